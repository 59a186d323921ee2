// Brute-force edit-distance median of a small binary cluster.

use dnasim::channel::{corrupt_read, stream_rng, Alphabet, ChannelConfig, ErrorBreakdown};
use dnasim::consensus::{constrained_median_bruteforce, edit_distance};
use dnasim::Result;

pub fn run_example() -> Result<()> {
    let alphabet = Alphabet::binary();
    let cfg = ChannelConfig::new(0.2, ErrorBreakdown::EQUAL, 2)?;
    let mut rng = stream_rng(2, &[1]);
    let original = alphabet.random_string(12, &mut rng);
    let reads: Vec<Vec<u8>> = (0..4)
        .map(|_| corrupt_read(&original, &cfg, &alphabet, &mut rng))
        .collect();

    println!("original {}", String::from_utf8_lossy(&original));
    for r in &reads {
        println!("read     {}", String::from_utf8_lossy(r));
    }
    let median = constrained_median_bruteforce(&reads, 12, &original, &alphabet, None)?;
    let total: usize = reads.iter().map(|r| edit_distance(&median, r)).sum();
    println!(
        "median   {}  (summed distance {total})",
        String::from_utf8_lossy(&median)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
