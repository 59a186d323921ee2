//! Insertion/deletion/substitution channel, coverage sampling and cluster
//! generation.
//!
//! Every random draw comes from a ChaCha8 stream derived from the run seed
//! and a tuple of identifiers (trial, column, read), so output never depends
//! on thread scheduling or iteration order. The channel consumes the same
//! number of draws at each position regardless of the base there, so two
//! strands pushed through the same stream see the same error events.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{Strand, StrandLayout};
use crate::error::{Error, Result};

/// The symbols a read is made of; the first symbol is the fallback for
/// reconstruction ties and exhausted reads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet(Vec<u8>);

impl Alphabet {
    pub fn dna() -> Self {
        Alphabet(b"ACGT".to_vec())
    }

    pub fn binary() -> Self {
        Alphabet(b"01".to_vec())
    }

    pub fn new(symbols: &[u8]) -> Result<Self> {
        let mut sorted = symbols.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() < 2 || sorted.len() != symbols.len() {
            return Err(Error::Argument("alphabet needs at least two distinct symbols".into()));
        }
        Ok(Alphabet(sorted))
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn random_string<R: Rng>(&self, len: usize, rng: &mut R) -> Vec<u8> {
        (0..len).map(|_| self.0[rng.random_range(0..self.0.len())]).collect()
    }
}

/// Split of the total error probability among error types.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub substitution: f64,
    pub deletion: f64,
    pub insertion: f64,
}

impl ErrorBreakdown {
    pub const EQUAL: ErrorBreakdown = ErrorBreakdown {
        substitution: 1.0 / 3.0,
        deletion: 1.0 / 3.0,
        insertion: 1.0 / 3.0,
    };

    pub const SUBSTITUTION_ONLY: ErrorBreakdown = ErrorBreakdown {
        substitution: 1.0,
        deletion: 0.0,
        insertion: 0.0,
    };

    fn validate(&self) -> Result<()> {
        let parts = [self.substitution, self.deletion, self.insertion];
        if parts.iter().any(|&x| x.is_nan() || x < 0.0) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!(
                "error breakdown must be non-negative and sum to 1, got {parts:?}"
            )));
        }
        Ok(())
    }
}

impl Default for ErrorBreakdown {
    fn default() -> Self {
        Self::EQUAL
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Total per-position error probability.
    pub p: f64,
    #[serde(default)]
    pub breakdown: ErrorBreakdown,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn new(p: f64, breakdown: ErrorBreakdown, seed: u64) -> Result<Self> {
        let cfg = Self { p, breakdown, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Argument(format!(
                "error probability must be in [0, 1], got {}",
                self.p
            )));
        }
        self.breakdown.validate()
    }

    /// Cumulative thresholds for deletion, insertion, substitution.
    fn thresholds(&self) -> (f64, f64, f64) {
        let del = self.p * self.breakdown.deletion;
        let ins = del + self.p * self.breakdown.insertion;
        let sub = ins + self.p * self.breakdown.substitution;
        (del, ins, sub)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum CoverageModel {
    Fixed { n: usize },
    Gamma { mean: f64, shape: f64 },
}

impl CoverageModel {
    pub const DEFAULT_GAMMA_SHAPE: f64 = 4.0;

    pub fn validate(&self) -> Result<()> {
        match *self {
            CoverageModel::Fixed { .. } => Ok(()),
            CoverageModel::Gamma { mean, shape } if mean > 0.0 && shape > 0.0 => Ok(()),
            CoverageModel::Gamma { mean, shape } => Err(Error::Argument(format!(
                "gamma coverage needs positive mean and shape, got {mean}, {shape}"
            ))),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            CoverageModel::Fixed { n } => n as f64,
            CoverageModel::Gamma { mean, .. } => mean,
        }
    }
}

/// All reads of one strand (perfect clustering); empty means the molecule
/// was lost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub column_index: usize,
    pub reads: Vec<Vec<u8>>,
}

/// Stream identifiers used when deriving RNGs.
pub mod stream {
    pub const COVERAGE: u64 = 0xC0;
    pub const READ: u64 = 0x7E;
    pub const TRIAL: u64 = 0x71;
    pub const PAYLOAD: u64 = 0xDA;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent generator for `(seed, ids...)`.
pub fn stream_rng(seed: u64, ids: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    for &id in ids {
        h = splitmix64(h ^ splitmix64(id.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// One noisy copy of `strand`.
///
/// Each position independently suffers at most one event: deletion (emit
/// nothing), insertion (emit a uniform random symbol, then the original),
/// or substitution (emit a uniformly chosen different symbol).
pub fn corrupt_read<R: Rng>(strand: &[u8], cfg: &ChannelConfig, alphabet: &Alphabet, rng: &mut R) -> Vec<u8> {
    let (del, ins, sub) = cfg.thresholds();
    let symbols = alphabet.symbols();
    let q = symbols.len();
    let mut out = Vec::with_capacity(strand.len() + strand.len() / 8 + 4);
    for &s in strand {
        let u: f64 = rng.random();
        if u < del {
            continue;
        } else if u < ins {
            out.push(symbols[rng.random_range(0..q)]);
            out.push(s);
        } else if u < sub {
            let k = rng.random_range(0..q - 1);
            // k-th symbol after skipping s
            let own = symbols.iter().position(|&x| x == s).unwrap_or(q - 1);
            out.push(symbols[if k >= own { k + 1 } else { k }]);
        } else {
            out.push(s);
        }
    }
    out
}

/// Read counts for `count` clusters.
pub fn sample_coverage<R: Rng>(model: &CoverageModel, count: usize, rng: &mut R) -> Vec<usize> {
    match *model {
        CoverageModel::Fixed { n } => vec![n; count],
        CoverageModel::Gamma { mean, shape } => {
            let gamma = Gamma::new(shape, mean / shape).expect("validated gamma parameters");
            (0..count)
                .map(|_| gamma.sample(rng).round().max(0.0) as usize)
                .collect()
        }
    }
}

/// Read `read` of column `column` in trial `trial`. The same read index
/// always yields the same read, so raising coverage only adds reads.
pub fn pooled_read(
    core: &[u8],
    cfg: &ChannelConfig,
    alphabet: &Alphabet,
    trial: u64,
    column: usize,
    read: usize,
) -> Vec<u8> {
    let mut rng = stream_rng(cfg.seed, &[stream::READ, trial, column as u64, read as u64]);
    corrupt_read(core, cfg, alphabet, &mut rng)
}

/// Clusters of noisy reads for primer-free strand cores.
pub fn clusters_from_cores(cores: &[Vec<u8>], cfg: &ChannelConfig, model: &CoverageModel, trial: u64) -> Vec<Cluster> {
    let mut cov_rng = stream_rng(cfg.seed, &[stream::COVERAGE, trial]);
    let counts = sample_coverage(model, cores.len(), &mut cov_rng);
    let alphabet = Alphabet::dna();
    cores
        .par_iter()
        .zip(counts)
        .enumerate()
        .map(|(k, (core, n))| Cluster {
            column_index: k,
            reads: (0..n).map(|r| pooled_read(core, cfg, &alphabet, trial, k, r)).collect(),
        })
        .collect()
}

/// Strips primers and generates one cluster per strand.
pub fn make_clusters(
    strands: &[Strand],
    layout: &StrandLayout,
    cfg: &ChannelConfig,
    model: &CoverageModel,
    trial: u64,
) -> Result<Vec<Cluster>> {
    cfg.validate()?;
    model.validate()?;
    let cores = strands
        .iter()
        .map(|s| layout.strip_primers(&s.bases).map(<[u8]>::to_vec))
        .collect::<Result<Vec<_>>>()?;
    Ok(clusters_from_cores(&cores, cfg, model, trial))
}

/// Writes `cluster_id<TAB>sequence` lines.
pub fn write_reads<W: Write>(mut out: W, clusters: &[Cluster]) -> std::io::Result<()> {
    for c in clusters {
        for r in &c.reads {
            write!(out, "{}\t", c.column_index)?;
            out.write_all(r)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Parses a reads file into clusters ordered by id. Clusters without reads
/// do not appear.
pub fn read_reads<R: BufRead>(input: R) -> Result<Vec<Cluster>> {
    let mut by_id: BTreeMap<usize, Vec<Vec<u8>>> = BTreeMap::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("reading reads file", e))?;
        if line.is_empty() {
            continue;
        }
        let (id, seq) = line
            .split_once('\t')
            .ok_or_else(|| Error::Parse(format!("line {}: expected cluster_id<TAB>sequence", n + 1)))?;
        let id: usize = id
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad cluster id {id:?}", n + 1)))?;
        by_id.entry(id).or_default().push(seq.as_bytes().to_vec());
    }
    Ok(by_id
        .into_iter()
        .map(|(column_index, reads)| Cluster { column_index, reads })
        .collect())
}
