// DnaMapper: earlier bits of each file land in more reliable rows.

use dnasim::priority::rank_bits_positional;
use dnasim::Result;

pub fn run_example() -> Result<()> {
    // three files of 400, 1200 and 2400 bits over four classes
    let files = [400, 1200, 2400];
    let classes = [1024, 1024, 1024, 1024];
    let ranking = rank_bits_positional(&files, &classes, Some(64))?;

    for (f, span) in ranking.spans().iter().enumerate() {
        let first = ranking.slot(span.start).class;
        let last = ranking.slot(span.end - 1).class;
        let label = if ranking.has_directory() && f == 0 {
            "directory".to_string()
        } else {
            format!("file {}", f)
        };
        println!(
            "{label:>9}: bits {:>4}..{:<4} classes {first}..={last}, share per class {:?}",
            span.start,
            span.end,
            ranking.file_class_shares(f)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
