// Positional error profile of one-way and two-way reconstruction.

use dnasim::consensus::{skew_profile, Reconstructor, SkewParams};
use dnasim::Result;

fn deciles(error: &[f64]) -> String {
    let l = error.len();
    (0..10)
        .map(|d| {
            let r = &error[d * l / 10..(d + 1) * l / 10];
            format!("{:.3}", r.iter().sum::<f64>() / r.len() as f64)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn run_example() -> Result<()> {
    for reconstructor in [Reconstructor::OneWay, Reconstructor::TwoWay] {
        let mut params = SkewParams::new(0.1, 5, 110, reconstructor, 200);
        params.seed = 5;
        let profile = skew_profile(&params)?;
        println!("{:>7} deciles: {}", reconstructor.name(), deciles(&profile.error));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
