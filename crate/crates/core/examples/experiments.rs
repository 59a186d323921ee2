// Small versions of the codeword-skew and minimum-coverage experiments.

use dnasim::experiment::{min_coverage_csv, run_min_coverage, run_skew, ExperimentConfig};
use dnasim::Result;

pub fn run_example() -> Result<()> {
    let config = ExperimentConfig {
        trials: 3,
        error_rates: vec![0.06],
        ..ExperimentConfig::default()
    };

    let skew = run_skew(&config)?;
    println!(
        "symbol errors per codeword over {} trials: baseline cv {:.2}, gini cv {:.2}",
        skew.trials,
        skew.baseline_cv(),
        skew.gini_cv()
    );

    let rows = run_min_coverage(&config)?;
    print!("{}", min_coverage_csv(&rows, &config));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
