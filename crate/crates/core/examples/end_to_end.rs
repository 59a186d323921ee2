// Encode two files, sequence them through a noisy channel, and decode.

use dnasim::channel::{ChannelConfig, CoverageModel, ErrorBreakdown};
use dnasim::pipeline::{encode_files, simulate, DecodeReport, Geometry, InputFile, Strategy};
use dnasim::quality::DEFAULT_REF_DB;
use dnasim::testimage::{random_bytes, synthetic_jpeg};
use dnasim::Result;

pub fn run_example() -> Result<()> {
    let geometry = Geometry::desk();
    // fill the unit: zero padding reconstructs almost for free and would
    // favour whichever layout keeps it in whole columns
    let photo = synthetic_jpeg(64, 64, 9, 80);
    let filler = geometry.capacity_bits()? / 8 - photo.len() - 64;
    let files = vec![
        InputFile::new("photo.jpg", photo),
        InputFile::new("notes.bin", random_bytes(filler, 9)),
    ];
    let channel = ChannelConfig::new(0.09, ErrorBreakdown::EQUAL, 9)?;

    for strategy in Strategy::ALL {
        let unit = encode_files(&files, &geometry, strategy)?;
        for n in [4, 8, 12] {
            let retrieval = simulate(&unit, &channel, &CoverageModel::Fixed { n }, 0, 0)?;
            let report = DecodeReport::new(strategy, &retrieval, Some(&files), DEFAULT_REF_DB);
            let exact: Vec<bool> = report.files.iter().map(|f| f.exact == Some(true)).collect();
            println!(
                "{strategy:>9} N={n:>2}: {:>2} failed codewords, files exact {exact:?}",
                report.failed_codewords
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
