//! Monte-Carlo experiments producing CSV tables.
//!
//! Every experiment is a pure function of an [`ExperimentConfig`]. Trials
//! draw from RNG streams keyed by `(seed, trial, column, read)`, so layouts
//! compared at one point see the same channel outcomes and a higher coverage
//! only adds reads to a lower one. Rows are emitted in a fixed order, which
//! makes output independent of thread scheduling.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{clusters_from_cores, stream, stream_rng, ChannelConfig, CoverageModel, ErrorBreakdown};
use crate::consensus::Reconstructor;
use crate::error::{Error, Result};
use crate::layout::{EncodingMatrix, LayoutStrategy};
use crate::pipeline::{
    encode_files, encode_files_with_priority, reconstruct_columns, simulate, EncodedUnit, Geometry, InputFile, Strategy,
};
use crate::priority::{flip_losses, pack_directory, DirEntry};
use crate::quality::{summarize, QualityProbe, QualityResult, DEFAULT_REF_DB};
use crate::testimage::{random_bytes, synthetic_jpeg};

pub const CSV_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageKind {
    Fixed,
    Gamma,
}

/// Parameters shared by all experiment commands. Absent JSON fields take
/// the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub geometry: Geometry,
    pub strategies: Vec<Strategy>,
    /// Error rate for single-point experiments.
    pub p: f64,
    /// Error rates swept by `mincov` and `sweep`.
    pub error_rates: Vec<f64>,
    pub breakdown: ErrorBreakdown,
    pub coverage_model: CoverageKind,
    pub gamma_shape: f64,
    /// Coverage for single-point experiments.
    pub coverage: usize,
    /// Coverages swept by `sweep`.
    pub coverages: Vec<usize>,
    /// First coverage tried by `mincov`.
    pub coverage_start: usize,
    /// Last coverage tried by `mincov`.
    pub max_coverage: usize,
    pub trials: usize,
    pub seed: u64,
    /// Trailing columns erased before decoding; `mincov` reports each value.
    pub erasures: Vec<usize>,
    pub ref_db: f64,
    /// Bit stride for `profile`.
    pub stride: usize,
    /// Input files for `sweep` and `profile`; synthetic JPEGs when empty.
    pub inputs: Vec<PathBuf>,
    pub synthetic_images: usize,
    /// Adds a wall-clock column to `sweep` records. Breaks byte-identity.
    pub timing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::desk(),
            strategies: Strategy::ALL.to_vec(),
            p: 0.09,
            error_rates: vec![0.03, 0.06, 0.09, 0.12],
            breakdown: ErrorBreakdown::EQUAL,
            coverage_model: CoverageKind::Fixed,
            gamma_shape: CoverageModel::DEFAULT_GAMMA_SHAPE,
            coverage: 20,
            coverages: (3..=20).collect(),
            coverage_start: 3,
            max_coverage: 60,
            trials: 10,
            seed: 1,
            erasures: vec![0],
            ref_db: DEFAULT_REF_DB,
            stride: 1,
            inputs: Vec::new(),
            synthetic_images: 2,
            timing: false,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "parsing experiment config".into(),
            source,
        })?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// First 16 hex digits of SHA-256 over the config without its output path.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let digest = Sha256::digest(serde_json::to_vec(&c).expect("config serializes"));
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.code()?;
        ChannelConfig::new(self.p, self.breakdown, self.seed)?;
        for &p in &self.error_rates {
            ChannelConfig::new(p, self.breakdown, self.seed)?;
        }
        if self.trials == 0 {
            return Err(Error::Argument("trials must be at least 1".into()));
        }
        if self.coverage_start == 0 || self.coverage_start > self.max_coverage {
            return Err(Error::Argument(format!(
                "coverage scan {}..={} is empty",
                self.coverage_start, self.max_coverage
            )));
        }
        if self.stride == 0 {
            return Err(Error::Argument("stride must be at least 1".into()));
        }
        if self.coverage_model == CoverageKind::Gamma && self.gamma_shape <= 0.0 {
            return Err(Error::Argument("gamma shape must be positive".into()));
        }
        Ok(())
    }

    pub fn channel(&self, p: f64) -> Result<ChannelConfig> {
        ChannelConfig::new(p, self.breakdown, self.seed)
    }

    pub fn coverage_model(&self, n: usize) -> CoverageModel {
        match self.coverage_model {
            CoverageKind::Fixed => CoverageModel::Fixed { n },
            CoverageKind::Gamma => CoverageModel::Gamma {
                mean: n as f64,
                shape: self.gamma_shape,
            },
        }
    }

    /// `#` comment lines that start every CSV.
    pub fn csv_header(&self, command: &str, extra: &[String]) -> String {
        let mut out = format!(
            "# dnasim {command}\n# schema_version={CSV_SCHEMA}\n# config_hash={}\n# seed={}\n",
            self.hash(),
            self.seed
        );
        for line in extra {
            let _ = writeln!(out, "# {line}");
        }
        out
    }
}

fn coefficient_of_variation(v: &[u64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<u64>() as f64 / n;
    let var = v.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n;
    if mean == 0.0 {
        0.0
    } else {
        var.sqrt() / mean
    }
}

/// Symbol errors per codeword under Baseline and Gini, summed over trials.
#[derive(Clone, Debug, PartialEq)]
pub struct CodewordSkew {
    pub baseline: Vec<u64>,
    pub gini: Vec<u64>,
    pub trials: usize,
}

impl CodewordSkew {
    pub fn baseline_cv(&self) -> f64 {
        coefficient_of_variation(&self.baseline)
    }

    pub fn gini_cv(&self) -> f64 {
        coefficient_of_variation(&self.gini)
    }

    pub fn total(&self) -> (u64, u64) {
        (self.baseline.iter().sum(), self.gini.iter().sum())
    }

    /// Columns codeword_id, layout, symbol_errors.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("codeword_id,layout,symbol_errors\n");
        for (name, counts) in [("baseline", &self.baseline), ("gini", &self.gini)] {
            for (c, n) in counts.iter().enumerate() {
                let _ = writeln!(out, "{c},{name},{n}");
            }
        }
        out
    }
}

/// Sends a matrix of random symbols through the channel and attributes
/// every wrong or missing cell to its Baseline and Gini codeword.
///
/// Both layouts see exactly the same received matrix, so their totals agree.
pub fn run_skew(config: &ExperimentConfig) -> Result<CodewordSkew> {
    config.validate()?;
    let geometry = &config.geometry;
    let baseline = LayoutStrategy::baseline(geometry.code()?, geometry.rows)?;
    let gini = geometry.layout(Strategy::Gini, &[])?;
    let strand_layout = geometry.strand_layout()?;
    let channel = config.channel(config.p)?;
    let model = config.coverage_model(config.coverage);
    let rows = geometry.rows;
    let cols = baseline.cols();
    let owners: Vec<usize> = (0..rows)
        .flat_map(|r| (0..cols).map(move |k| (r, k)))
        .map(|(r, k)| gini.cell_owner(r, k).map(|o| o.0))
        .collect::<Result<_>>()?;
    let symbol_max = 1u32 << geometry.m;

    let per_trial = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<(Vec<u64>, Vec<u64>)> {
            use rand::Rng;
            let mut rng = stream_rng(config.seed, &[stream::PAYLOAD, t]);
            let mut sent = EncodingMatrix::zeros(rows, cols);
            for r in 0..rows {
                for k in 0..cols {
                    sent.set(r, k, rng.random_range(0..symbol_max) as u16);
                }
            }
            let cores: Vec<Vec<u8>> = (0..cols)
                .map(|k| strand_layout.assemble_core(k, &sent.column(k)))
                .collect::<Result<_>>()?;
            let clusters = clusters_from_cores(&cores, &channel, &model, t);
            let received = reconstruct_columns(&clusters, &strand_layout, Reconstructor::TwoWay)?;
            let mut b = vec![0u64; rows];
            let mut g = vec![0u64; rows];
            for k in 0..cols {
                let column = received.get(&k);
                for r in 0..rows {
                    if column.is_none_or(|c| c[r] != sent.get(r, k)) {
                        b[r] += 1;
                        g[owners[r * cols + k]] += 1;
                    }
                }
            }
            Ok((b, g))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut skew = CodewordSkew {
        baseline: vec![0; rows],
        gini: vec![0; rows],
        trials: config.trials,
    };
    for (b, g) in per_trial {
        skew.baseline.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        skew.gini.iter_mut().zip(g).for_each(|(x, y)| *x += y);
    }
    Ok(skew)
}

/// A full-capacity unit of random data.
pub fn random_unit(geometry: &Geometry, strategy: Strategy, seed: u64) -> Result<EncodedUnit> {
    let name = "payload.bin";
    let dir = pack_directory(&[DirEntry {
        name: name.into(),
        size: 0,
    }])?;
    let size = geometry.capacity_bits()? / 8 - dir.len();
    let file = InputFile::new(name, random_bytes(size, seed));
    encode_files(&[file], geometry, strategy)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinCoverageRow {
    pub p: f64,
    pub layout: Strategy,
    pub erased_columns: usize,
    /// `None` if no coverage up to the scan limit succeeded.
    pub min_coverage: Option<usize>,
}

fn payload_seed(seed: u64) -> u64 {
    use rand::RngCore;
    stream_rng(seed, &[stream::PAYLOAD]).next_u64()
}

/// Smallest coverage at which all trials decode, per error rate, layout and
/// erasure count. Coverages are scanned upward one by one.
pub fn run_min_coverage(config: &ExperimentConfig) -> Result<Vec<MinCoverageRow>> {
    config.validate()?;
    let units: Vec<(Strategy, EncodedUnit)> = config
        .strategies
        .iter()
        .map(|&s| Ok((s, random_unit(&config.geometry, s, payload_seed(config.seed))?)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &p in &config.error_rates {
        let channel = config.channel(p)?;
        for (strategy, unit) in &units {
            for &erased in &config.erasures {
                let mut found = None;
                for n in config.coverage_start..=config.max_coverage {
                    let model = config.coverage_model(n);
                    let all_ok = (0..config.trials as u64)
                        .into_par_iter()
                        .map(|t| simulate(unit, &channel, &model, t, erased).map(|r| r.success()))
                        .try_fold(|| true, |acc, ok| ok.map(|ok| acc && ok))
                        .try_reduce(|| true, |a, b| Ok(a && b))?;
                    if all_ok {
                        found = Some(n);
                        break;
                    }
                }
                rows.push(MinCoverageRow {
                    p,
                    layout: *strategy,
                    erased_columns: erased,
                    min_coverage: found,
                });
            }
        }
    }
    Ok(rows)
}

/// Columns p, layout, erased_columns, min_coverage; `NA` when not found.
pub fn min_coverage_csv(rows: &[MinCoverageRow], config: &ExperimentConfig) -> String {
    let mut out = config.csv_header(
        "mincov",
        &[
            format!(
                "trials={} coverage_scan={}..={}",
                config.trials, config.coverage_start, config.max_coverage
            ),
            format!("NA = not found up to {}", config.max_coverage),
        ],
    );
    out.push_str("p,layout,erased_columns,min_coverage\n");
    for r in rows {
        let n = r.min_coverage.map_or("NA".to_string(), |n| n.to_string());
        let _ = writeln!(out, "{},{},{},{n}", r.p, r.layout, r.erased_columns);
    }
    out
}

/// One file of one trial at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub layout: String,
    pub p: f64,
    pub coverage: usize,
    pub trial: u64,
    pub decode_success: bool,
    pub failed_codewords: usize,
    pub file: String,
    pub quality: Option<QualityResult>,
    pub wall_ms: Option<f64>,
}

/// Trial averages at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub layout: String,
    pub p: f64,
    pub coverage: usize,
    /// Mean loss over decodable files, `None` if none decoded.
    pub mean_loss_db: Option<f64>,
    pub undecodable_rate: f64,
    pub success_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QualitySweep {
    pub records: Vec<RunRecord>,
    pub points: Vec<SweepPoint>,
}

impl QualitySweep {
    pub fn point(&self, layout: &str, p: f64, coverage: usize) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|s| s.layout == layout && s.p == p && s.coverage == coverage)
    }

    /// Columns layout, p, coverage, trial, decode_success,
    /// failed_codewords, file, loss_db, undecodable (and wall_ms when
    /// timing is on). `loss_db` is empty for undecodable or non-image files.
    pub fn records_csv(&self, header: &str) -> String {
        let timing = self.records.iter().any(|r| r.wall_ms.is_some());
        let mut out = String::from(header);
        out.push_str("layout,p,coverage,trial,decode_success,failed_codewords,file,loss_db,undecodable");
        out.push_str(if timing { ",wall_ms\n" } else { "\n" });
        for r in &self.records {
            let loss = r
                .quality
                .and_then(|q| q.loss_db())
                .map_or(String::new(), |l| format!("{l:.4}"));
            let undecodable = r.quality.is_some_and(|q| q.is_undecodable());
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{loss},{}",
                r.layout,
                r.p,
                r.coverage,
                r.trial,
                u8::from(r.decode_success),
                r.failed_codewords,
                r.file,
                u8::from(undecodable)
            );
            if let Some(ms) = r.wall_ms {
                let _ = write!(out, ",{ms:.1}");
            }
            out.push('\n');
        }
        out
    }

    /// Columns layout, p, coverage, mean_loss_db, undecodable_rate,
    /// success_rate.
    pub fn summary_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("layout,p,coverage,mean_loss_db,undecodable_rate,success_rate\n");
        for s in &self.points {
            let loss = s.mean_loss_db.map_or(String::new(), |l| format!("{l:.4}"));
            let _ = writeln!(
                out,
                "{},{},{},{loss},{:.4},{:.4}",
                s.layout, s.p, s.coverage, s.undecodable_rate, s.success_rate
            );
        }
        out
    }
}

/// Files for quality experiments: the configured inputs, or synthetic JPEGs
/// sized to fill most of one unit.
pub fn sweep_images(config: &ExperimentConfig) -> Result<Vec<InputFile>> {
    if !config.inputs.is_empty() {
        return crate::pipeline::load_files(&config.inputs);
    }
    synthetic_images(&config.geometry, config.synthetic_images.max(1), config.seed)
}

/// `count` synthetic JPEGs that together fit in one unit.
pub fn synthetic_images(geometry: &Geometry, count: usize, seed: u64) -> Result<Vec<InputFile>> {
    let budget = geometry.capacity_bits()? / 8;
    let mut side = 256u32;
    while side >= 8 {
        let files: Vec<InputFile> = (0..count)
            .map(|i| {
                InputFile::new(
                    format!("image{i:02}.jpg"),
                    synthetic_jpeg(side, side * 3 / 4, seed.wrapping_add(i as u64), 75),
                )
            })
            .collect();
        let entries: Vec<DirEntry> = files.iter().map(InputFile::entry).collect();
        let total = pack_directory(&entries)?.len() + files.iter().map(|f| f.data.len()).sum::<usize>();
        if total <= budget {
            return Ok(files);
        }
        side -= 8;
    }
    Err(Error::Argument(format!("{count} images do not fit in {budget} bytes")))
}

fn sweep_units(
    config: &ExperimentConfig,
    units: &[(String, EncodedUnit)],
    originals: &[InputFile],
) -> Result<QualitySweep> {
    config.validate()?;
    let probes: Vec<Option<QualityProbe>> = originals
        .iter()
        .map(|f| QualityProbe::new(&f.data, config.ref_db).ok())
        .collect();
    let mut points = Vec::new();
    for (u, _) in units.iter().enumerate() {
        for &p in &config.error_rates {
            for &n in &config.coverages {
                points.push((u, p, n));
            }
        }
    }
    let jobs: Vec<(usize, f64, usize, u64)> = points
        .iter()
        .flat_map(|&(u, p, n)| (0..config.trials as u64).map(move |t| (u, p, n, t)))
        .collect();
    let erased = config.erasures.first().copied().unwrap_or(0);
    let per_job = jobs
        .par_iter()
        .map(|&(u, p, n, t)| -> Result<Vec<RunRecord>> {
            let start = Instant::now();
            let (label, unit) = &units[u];
            let channel = config.channel(p)?;
            let retrieval = simulate(unit, &channel, &config.coverage_model(n), t, erased)?;
            let wall_ms = config.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            Ok(retrieval
                .files
                .iter()
                .zip(&probes)
                .map(|(f, probe)| RunRecord {
                    layout: label.clone(),
                    p,
                    coverage: n,
                    trial: t,
                    decode_success: retrieval.success(),
                    failed_codewords: retrieval.recovery.failed_codewords(),
                    file: f.name.clone(),
                    quality: probe.as_ref().map(|pr| pr.evaluate(&f.data)),
                    wall_ms,
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<RunRecord> = per_job.into_iter().flatten().collect();

    // records are in job order: trials x files per point
    let per_point = (config.trials * originals.len()).max(1);
    let points = points
        .iter()
        .zip(records.chunks(per_point))
        .map(|(&(u, p, n), recs)| {
            let qualities: Vec<QualityResult> = recs.iter().filter_map(|r| r.quality).collect();
            let (mean, rate) = summarize(&qualities);
            let trials_ok = recs.iter().filter(|r| r.decode_success).count() as f64 / recs.len().max(1) as f64;
            SweepPoint {
                layout: units[u].0.clone(),
                p,
                coverage: n,
                mean_loss_db: mean,
                undecodable_rate: rate,
                success_rate: trials_ok,
            }
        })
        .collect();
    Ok(QualitySweep { records, points })
}

/// Quality of retrieved images over error rates and coverages for each
/// configured layout.
pub fn run_quality_sweep(config: &ExperimentConfig, images: &[InputFile]) -> Result<QualitySweep> {
    let units: Vec<(String, EncodedUnit)> = config
        .strategies
        .iter()
        .map(|&s| Ok((s.name().to_string(), encode_files(images, &config.geometry, s)?)))
        .collect::<Result<_>>()?;
    sweep_units(config, &units, images)
}

/// DnaMapper with positional ranking against DnaMapper with the flip-profile
/// ranking of one image (layouts `positional` and `oracle`).
pub fn run_ranking_comparison(
    config: &ExperimentConfig,
    image: &InputFile,
    oracle_order: &[usize],
) -> Result<QualitySweep> {
    let files = [image.clone()];
    let units = vec![
        (
            "positional".to_string(),
            encode_files(&files, &config.geometry, Strategy::DnaMapper)?,
        ),
        (
            "oracle".to_string(),
            encode_files_with_priority(&files, &config.geometry, 0, oracle_order)?,
        ),
    ];
    sweep_units(config, &units, &files)
}

/// Loss from flipping single bits of a JPEG.
#[derive(Clone, Debug, PartialEq)]
pub struct BitProfile {
    pub file_bits: usize,
    pub positions: Vec<usize>,
    pub results: Vec<QualityResult>,
    pub ref_db: f64,
}

impl BitProfile {
    /// Loss with undecodable counted as the full reference loss.
    pub fn capped_loss(&self, i: usize) -> f64 {
        self.results[i].loss_db().unwrap_or(self.ref_db)
    }

    /// Mean capped loss over samples with bit position in `range`.
    pub fn region_mean(&self, range: std::ops::Range<usize>) -> Option<f64> {
        let v: Vec<f64> = (0..self.positions.len())
            .filter(|&i| range.contains(&self.positions[i]))
            .map(|i| self.capped_loss(i))
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Sampled bits by descending loss, undecodable first, ties by position.
    pub fn oracle_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.positions.len()).collect();
        idx.sort_by(|&a, &b| {
            self.results[b]
                .sort_key()
                .total_cmp(&self.results[a].sort_key())
                .then(self.positions[a].cmp(&self.positions[b]))
        });
        idx.into_iter().map(|i| self.positions[i]).collect()
    }

    /// Columns bit, loss_db, undecodable.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("bit,loss_db,undecodable\n");
        for (pos, q) in self.positions.iter().zip(&self.results) {
            let loss = q.loss_db().map_or(String::new(), |l| format!("{l:.4}"));
            let _ = writeln!(out, "{pos},{loss},{}", u8::from(q.is_undecodable()));
        }
        out
    }
}

/// Flips every `stride`-th bit of `jpeg` and records the loss.
pub fn run_bit_profile(jpeg: &[u8], stride: usize, ref_db: f64) -> Result<BitProfile> {
    if stride == 0 {
        return Err(Error::Argument("stride must be at least 1".into()));
    }
    let probe = QualityProbe::new(jpeg, ref_db)?;
    let positions: Vec<usize> = (0..jpeg.len() * 8).step_by(stride).collect();
    let results = flip_losses(jpeg, positions.clone(), &|b: &[u8]| probe.evaluate(b));
    Ok(BitProfile {
        file_bits: jpeg.len() * 8,
        positions,
        results,
        ref_db,
    })
}
