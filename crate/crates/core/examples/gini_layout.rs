// Baseline versus Gini placement under an error pattern that hits the
// middle rows of every column hardest.

use dnasim::layout::LayoutStrategy;
use dnasim::rs::CodeSpec;
use dnasim::testimage::random_bytes;
use dnasim::Result;

pub fn run_example() -> Result<()> {
    let rows = 21;
    let code = CodeSpec::with_parity(8, 47)?;
    let baseline = LayoutStrategy::baseline(code.clone(), rows)?;
    let gini = LayoutStrategy::gini(code, rows)?;

    let payload = random_bytes(baseline.capacity_bits() / 8, 3);
    for layout in [&baseline, &gini] {
        let sent = layout.build_matrix(&payload)?;
        // corrupt rows 8..13 in a fifth of the columns
        let mut received = sent.clone();
        for col in (0..sent.cols()).step_by(5) {
            for row in 8..13 {
                received.set(row, col, sent.get(row, col) ^ 1);
            }
        }
        let errors = layout.errors_per_codeword(&sent, &received);
        let max = errors.iter().max().copied().unwrap_or(0);
        let recovery = layout.recover_payload(&received);
        println!(
            "{:>8}: max {:>2} errors per codeword, {} of {} codewords failed",
            layout.name(),
            max,
            recovery.failed_codewords(),
            errors.len()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
