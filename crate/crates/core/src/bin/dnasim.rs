use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dnasim::channel::{ChannelConfig, CoverageModel, ErrorBreakdown};
use dnasim::experiment::{
    min_coverage_csv, run_bit_profile, run_min_coverage, run_quality_sweep, run_skew, sweep_images, CoverageKind,
    ExperimentConfig,
};
use dnasim::pipeline::{cmd_decode, cmd_encode, DecodeOptions, Geometry, ReadSource, Strategy};
use dnasim::{Error, Result};

#[derive(Parser)]
#[command(name = "dnasim", version, about = "DNA storage reliability-skew simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GeometryArgs {
    /// Paper-scale geometry (m=16, R=82); slow.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    rows: Option<usize>,
    /// Parity fraction E/K.
    #[arg(long)]
    redundancy: Option<f64>,
}

impl GeometryArgs {
    fn apply(&self, mut g: Geometry) -> Geometry {
        if self.full {
            g = Geometry::full();
        }
        if let Some(m) = self.m {
            g.m = m;
        }
        if let Some(r) = self.rows {
            g.rows = r;
        }
        if let Some(e) = self.redundancy {
            g.redundancy = e;
        }
        g
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<Strategy>>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    error_rates: Option<Vec<f64>>,
    /// Only substitutions instead of equal thirds.
    #[arg(long)]
    substitutions_only: bool,
    #[arg(long)]
    gamma: bool,
    #[arg(long)]
    coverage: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    coverages: Option<Vec<usize>>,
    #[arg(long)]
    coverage_start: Option<usize>,
    #[arg(long)]
    max_coverage: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    erasures: Option<Vec<usize>>,
    #[arg(long)]
    ref_db: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    timing: bool,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    inputs: Vec<PathBuf>,
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_json(&read_text(path)?)?,
            None => ExperimentConfig::default(),
        };
        c.geometry = self.geometry.apply(c.geometry);
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(
            strategies,
            p,
            error_rates,
            coverage,
            coverages,
            coverage_start,
            max_coverage,
            trials,
            seed,
            erasures,
            ref_db,
            stride
        );
        if self.substitutions_only {
            c.breakdown = ErrorBreakdown::SUBSTITUTION_ONLY;
        }
        if self.gamma {
            c.coverage_model = CoverageKind::Gamma;
        }
        c.timing |= self.timing;
        if !self.inputs.is_empty() {
            c.inputs = self.inputs.clone();
        }
        if self.output.is_some() {
            c.output = self.output.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Encode files into strands.txt and manifest.json.
    Encode {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value = "gini")]
        strategy: Strategy,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Decode from a reads file or by simulating sequencing of a strands file.
    Decode {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, conflicts_with = "strands", required_unless_present = "strands")]
        reads: Option<PathBuf>,
        #[arg(long)]
        strands: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long, default_value_t = 10)]
        coverage: usize,
        #[arg(long)]
        gamma: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        /// Erase this many trailing columns before decoding.
        #[arg(long, default_value_t = 0)]
        erase_last: usize,
        /// Directory with the original files, for exactness and quality.
        #[arg(long)]
        originals: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Per-codeword error counts under Baseline and Gini.
    Skew(ExperimentArgs),
    /// Minimum error-free coverage per error rate and layout.
    Mincov(ExperimentArgs),
    /// Image quality over error rates and coverages.
    Sweep(ExperimentArgs),
    /// Single-bit-flip quality profile of a JPEG.
    Profile(ExperimentArgs),
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        context: format!("reading {}", path.display()),
        source: e,
    })
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io {
            context: format!("writing {}", path.display()),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode {
            files,
            strategy,
            geometry,
            out,
        } => {
            let manifest = cmd_encode(&files, strategy, &geometry.apply(Geometry::desk()), &out)?;
            eprintln!(
                "encoded {} files with {} into {}",
                manifest.files.len(),
                manifest.strategy,
                out.display()
            );
        }
        Command::Decode {
            manifest,
            reads,
            strands,
            p,
            coverage,
            gamma,
            seed,
            trial,
            erase_last,
            originals,
            out,
        } => {
            let source = match (reads, strands) {
                (Some(r), _) => ReadSource::Reads(r),
                (None, Some(s)) => ReadSource::Simulate {
                    strands: s,
                    channel: ChannelConfig::new(p, ErrorBreakdown::EQUAL, seed)?,
                    coverage: if gamma {
                        CoverageModel::Gamma {
                            mean: coverage as f64,
                            shape: CoverageModel::DEFAULT_GAMMA_SHAPE,
                        }
                    } else {
                        CoverageModel::Fixed { n: coverage }
                    },
                    trial,
                },
                (None, None) => unreachable!("clap requires one source"),
            };
            let options = DecodeOptions {
                erase_last,
                originals,
                ..DecodeOptions::default()
            };
            let report = cmd_decode(&source, &manifest, &out, &options)?;
            eprintln!(
                "decode {}: {} of {} codewords failed",
                if report.success { "succeeded" } else { "failed" },
                report.failed_codewords,
                report.codewords.len()
            );
        }
        Command::Skew(args) => {
            let c = args.config()?;
            let skew = run_skew(&c)?;
            let extra = [format!("p={} coverage={} trials={}", c.p, c.coverage, c.trials)];
            emit(&c.output, &skew.to_csv(&c.csv_header("skew", &extra)))?;
        }
        Command::Mincov(args) => {
            let c = args.config()?;
            let rows = run_min_coverage(&c)?;
            emit(&c.output, &min_coverage_csv(&rows, &c))?;
        }
        Command::Sweep(args) => {
            let c = args.config()?;
            let images = sweep_images(&c)?;
            let sweep = run_quality_sweep(&c, &images)?;
            let header = c.csv_header("sweep", &[format!("trials={}", c.trials)]);
            emit(&c.output, &sweep.records_csv(&header))?;
            let summary = sweep.summary_csv(&header);
            match &c.output {
                Some(path) => emit(&Some(path.with_extension("summary.csv")), &summary)?,
                None => print!("\n{summary}"),
            }
        }
        Command::Profile(args) => {
            let c = args.config()?;
            let path = c
                .inputs
                .first()
                .ok_or_else(|| Error::Argument("profile needs a JPEG input".into()))?;
            let jpeg = fs::read(path).map_err(|e| Error::Io {
                context: format!("reading {}", path.display()),
                source: e,
            })?;
            let profile = run_bit_profile(&jpeg, c.stride, c.ref_db)?;
            let extra = [format!("file={} stride={}", path.display(), c.stride)];
            emit(&c.output, &profile.to_csv(&c.csv_header("profile", &extra)))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
