// Quality loss of a JPEG after single bit flips at different offsets.

use dnasim::bits::flip_bit;
use dnasim::quality::{QualityProbe, DEFAULT_REF_DB};
use dnasim::testimage::synthetic_jpeg;
use dnasim::Result;

pub fn run_example() -> Result<()> {
    let jpeg = synthetic_jpeg(96, 96, 4, 85);
    let probe = QualityProbe::new(&jpeg, DEFAULT_REF_DB)?;
    let bits = jpeg.len() * 8;
    println!("{} byte JPEG, reference {DEFAULT_REF_DB} dB", jpeg.len());
    for frac in [0.05, 0.25, 0.5, 0.75, 0.95] {
        let bit = (bits as f64 * frac) as usize;
        let mut copy = jpeg.clone();
        flip_bit(&mut copy, bit);
        let result = probe.evaluate(&copy);
        match result.loss_db() {
            Some(db) => println!("flip bit {bit:>6}: {db:5.1} dB loss"),
            None => println!("flip bit {bit:>6}: undecodable"),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
