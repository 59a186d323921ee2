// Insertion/deletion/substitution channel and coverage sampling.

use dnasim::channel::{
    clusters_from_cores, corrupt_read, stream_rng, Alphabet, ChannelConfig, CoverageModel, ErrorBreakdown,
};
use dnasim::consensus::edit_distance;
use dnasim::Result;

pub fn run_example() -> Result<()> {
    let alphabet = Alphabet::dna();
    let mut rng = stream_rng(11, &[0]);
    let strand = alphabet.random_string(60, &mut rng);
    let cfg = ChannelConfig::new(0.1, ErrorBreakdown::EQUAL, 11)?;

    println!("original  {}", String::from_utf8_lossy(&strand));
    for _ in 0..4 {
        let read = corrupt_read(&strand, &cfg, &alphabet, &mut rng);
        println!(
            "read      {}  (len {}, edit distance {})",
            String::from_utf8_lossy(&read),
            read.len(),
            edit_distance(&strand, &read)
        );
    }

    let cores: Vec<Vec<u8>> = (0..200).map(|_| alphabet.random_string(88, &mut rng)).collect();
    let gamma = CoverageModel::Gamma { mean: 10.0, shape: 4.0 };
    let clusters = clusters_from_cores(&cores, &cfg, &gamma, 0);
    let sizes: Vec<usize> = clusters.iter().map(|c| c.reads.len()).collect();
    let lost = sizes.iter().filter(|&&n| n == 0).count();
    let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
    println!("gamma coverage over 200 strands: mean {mean:.2}, {lost} strands lost");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
