// Bits to bases and back, and the strand format: primer, index, payload, primer.

use dnasim::codec::{assemble_strand, bases_to_bits, bits_to_bases, parse_strand, StrandLayout};
use dnasim::Result;

pub fn run_example() -> Result<()> {
    let bases = bits_to_bases("0001101100")?;
    println!("0001101100 -> {bases}");
    assert_eq!(bases_to_bits(&bases)?, "0001101100");

    let layout = StrandLayout::new(8, 21)?;
    println!(
        "m=8, 21 rows: {} columns, {} index bases, core {} bases, strand {} bases",
        layout.columns(),
        layout.index_bases(),
        layout.core_len(),
        layout.strand_len()
    );

    let payload: Vec<u16> = (0..21).map(|i| i * 12).collect();
    let strand = assemble_strand(&layout, 200, &payload)?;
    println!("column 200: {}", strand.as_str());
    let (index, back) = parse_strand(&layout, &strand.bases)?;
    assert_eq!((index, back), (200, payload));
    println!("parsed back to column {index}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
