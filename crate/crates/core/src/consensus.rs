//! Trace reconstruction from clusters of noisy reads.
//!
//! [`one_way`] walks all reads left to right with one pointer per read. At
//! each output position the in-bounds pointer characters vote; every read
//! that disagrees with the winner is re-synchronised by testing three
//! explanations against the next `W` consensus characters:
//!
//! * substitution: the read's character replaced the consensus one (advance 1),
//! * deletion: the consensus character is missing from the read (advance 0),
//! * insertion: the read has an extra character before it (advance 2).
//!
//! The best-scoring explanation wins, ties resolved in that order. Errors
//! made this way propagate, so accuracy falls along the strand. [`two_way`]
//! runs the same procedure from both ends and keeps the better half of each.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{corrupt_read, stream, stream_rng, Alphabet, ChannelConfig, ErrorBreakdown};
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructionParams {
    /// Target length `L`.
    pub length: usize,
    /// Lookahead window `W`.
    pub window: usize,
    pub alphabet: Alphabet,
}

impl ReconstructionParams {
    pub fn new(length: usize) -> Self {
        Self {
            length,
            window: DEFAULT_WINDOW,
            alphabet: Alphabet::dna(),
        }
    }

    pub fn with_alphabet(mut self, alphabet: Alphabet) -> Self {
        self.alphabet = alphabet;
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.length == 0 || self.window == 0 {
            return Err(Error::Argument(format!(
                "reconstruction needs L >= 1 and W >= 1, got L={} W={}",
                self.length, self.window
            )));
        }
        Ok(())
    }
}

/// Levenshtein distance with unit costs.
pub fn edit_distance(a: &[u8], b: &[u8]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for j in 1..=b.len() {
            let up = row[j];
            row[j] = (up + 1).min(row[j - 1] + 1).min(diag + usize::from(x != b[j - 1]));
            diag = up;
        }
    }
    row[b.len()]
}

fn window_matches(read: &[u8], from: usize, expected: impl Iterator<Item = u8>) -> usize {
    read.get(from..)
        .unwrap_or(&[])
        .iter()
        .zip(expected)
        .filter(|(a, b)| **a == *b)
        .count()
}

/// Left-to-right bitwise-majority alignment. Always returns `L` symbols.
pub fn one_way<S: AsRef<[u8]>>(reads: &[S], params: &ReconstructionParams) -> Result<Vec<u8>> {
    params.validate()?;
    if reads.is_empty() {
        return Err(Error::Argument("cannot reconstruct from an empty cluster".into()));
    }
    let symbols = params.alphabet.symbols();
    let mut code = [u8::MAX; 256];
    for (i, &s) in symbols.iter().enumerate() {
        code[s as usize] = i as u8;
    }
    let w = params.window;
    let reads: Vec<&[u8]> = reads.iter().map(AsRef::as_ref).collect();
    let mut ptr = vec![0usize; reads.len()];
    let mut counts = vec![0usize; symbols.len()];
    let mut out = Vec::with_capacity(params.length);
    let mut window = Vec::with_capacity(w);

    for _ in 0..params.length {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut active = false;
        for (r, read) in reads.iter().enumerate() {
            if let Some(&ch) = read.get(ptr[r]) {
                let k = code[ch as usize];
                if k != u8::MAX {
                    counts[k as usize] += 1;
                    active = true;
                }
            }
        }
        if !active {
            out.push(symbols[0]);
            continue;
        }
        // first maximum in alphabet order
        let best = (0..symbols.len()).fold(0, |b, k| if counts[k] > counts[b] { k } else { b });
        let winner = symbols[best];

        // consensus of the next W characters among agreeing reads
        window.clear();
        for k in 1..=w {
            counts.iter_mut().for_each(|c| *c = 0);
            let mut any = false;
            for (r, read) in reads.iter().enumerate() {
                if read.get(ptr[r]) == Some(&winner) {
                    if let Some(&ch) = read.get(ptr[r] + k) {
                        let kk = code[ch as usize];
                        if kk != u8::MAX {
                            counts[kk as usize] += 1;
                            any = true;
                        }
                    }
                }
            }
            if !any {
                break;
            }
            let b = (0..symbols.len()).fold(0, |b, x| if counts[x] > counts[b] { x } else { b });
            window.push(symbols[b]);
        }

        for (r, read) in reads.iter().enumerate() {
            let p = ptr[r];
            match read.get(p) {
                None => {}
                Some(&ch) if ch == winner => ptr[r] += 1,
                Some(_) => {
                    // too short to score a full window: take it as a substitution
                    if read.len() - p - 1 < w {
                        ptr[r] += 1;
                        continue;
                    }
                    let sub = window_matches(read, p + 1, window.iter().copied());
                    let del = window_matches(read, p, window.iter().copied());
                    let ins = window_matches(
                        read,
                        p + 1,
                        std::iter::once(winner).chain(window.iter().copied()).take(w),
                    );
                    ptr[r] += if sub >= del && sub >= ins {
                        1
                    } else if del >= ins {
                        0
                    } else {
                        2
                    };
                }
            }
        }
        out.push(winner);
    }
    Ok(out)
}

/// First half from a left-to-right pass, second half from a right-to-left
/// pass over reversed reads.
pub fn two_way<S: AsRef<[u8]>>(reads: &[S], params: &ReconstructionParams) -> Result<Vec<u8>> {
    let forward = one_way(reads, params)?;
    let reversed: Vec<Vec<u8>> = reads
        .iter()
        .map(|r| r.as_ref().iter().rev().copied().collect())
        .collect();
    let mut backward = one_way(&reversed, params)?;
    backward.reverse();
    let half = params.length.div_ceil(2);
    let mut out = forward;
    out[half..].copy_from_slice(&backward[half..]);
    Ok(out)
}

/// Largest `L` enumerated by default for an alphabet of `q` symbols.
pub fn default_enumeration_cap(q: usize) -> usize {
    match q {
        2 => 16,
        3 => 12,
        4 => 10,
        _ => (20.0 / (q as f64).log2()).floor() as usize,
    }
}

/// Exhaustive constrained edit-distance median with adversarial tie-breaking.
///
/// Among all length-`L` strings with minimal summed edit distance to the
/// reads, returns the one that agrees with `original` on the most weight,
/// where position `i` weighs `min(i, L-1-i)`: correct middles are preferred
/// over correct ends. Remaining ties go to the lexicographically smallest.
/// `max_len` overrides the enumeration cap.
pub fn constrained_median_bruteforce<S: AsRef<[u8]>>(
    reads: &[S],
    length: usize,
    original: &[u8],
    alphabet: &Alphabet,
    max_len: Option<usize>,
) -> Result<Vec<u8>> {
    let cap = max_len.unwrap_or_else(|| default_enumeration_cap(alphabet.len()));
    if length > cap {
        return Err(Error::Argument(format!(
            "length {length} exceeds the enumeration cap {cap}; pass a larger cap to override"
        )));
    }
    if original.len() != length {
        return Err(Error::Argument(format!(
            "original has length {}, expected {length}",
            original.len()
        )));
    }
    let reads: Vec<&[u8]> = reads.iter().map(AsRef::as_ref).collect();
    let symbols = alphabet.symbols();
    let weight: Vec<u64> = (0..length).map(|i| i.min(length - 1 - i) as u64).collect();

    // rows[d][r] = DP row of read r against the depth-d prefix
    let mut rows: Vec<Vec<Vec<u32>>> = vec![reads.iter().map(|b| (0..=b.len() as u32).collect()).collect()];
    for _ in 0..length {
        rows.push(reads.iter().map(|b| vec![0u32; b.len() + 1]).collect());
    }

    let mut best: Option<(u64, u64, Vec<u8>)> = None;
    let mut prefix = vec![0u8; length];
    let mut choice = vec![0usize; length + 1];
    let mut score = vec![0u64; length + 1];
    let mut depth = 0usize;

    // iterative DFS in lexicographic order
    loop {
        if choice[depth] >= symbols.len() || (depth == length && choice[depth] > 0) {
            if depth == 0 {
                break;
            }
            depth -= 1;
            choice[depth] += 1;
            continue;
        }
        if depth == length {
            let dist: u64 = rows[depth].iter().map(|row| *row.last().unwrap() as u64).sum();
            let better = match &best {
                None => true,
                Some((d, s, _)) => dist < *d || (dist == *d && score[depth] > *s),
            };
            if better {
                best = Some((dist, score[depth], prefix.clone()));
            }
            choice[depth] = 1;
            continue;
        }

        let c = symbols[choice[depth]];
        prefix[depth] = c;
        let (head, tail) = rows.split_at_mut(depth + 1);
        let prev = &head[depth];
        let next = &mut tail[0];
        let remaining = (length - depth - 1) as i64;
        let mut bound = 0u64;
        for ((b, p), n) in reads.iter().zip(prev).zip(next.iter_mut()) {
            n[0] = p[0] + 1;
            let mut lb = n[0] as i64 + (remaining - b.len() as i64).abs();
            for j in 1..=b.len() {
                let v = (p[j] + 1).min(n[j - 1] + 1).min(p[j - 1] + u32::from(c != b[j - 1]));
                n[j] = v;
                lb = lb.min(v as i64 + (remaining - (b.len() - j) as i64).abs());
            }
            bound += lb as u64;
        }
        score[depth + 1] = score[depth] + if c == original[depth] { weight[depth] } else { 0 };
        let pruned = matches!(&best, Some((d, _, _)) if bound > *d);
        if pruned {
            choice[depth] += 1;
        } else {
            depth += 1;
            choice[depth] = 0;
        }
    }
    Ok(best.map(|(_, _, s)| s).expect("at least one candidate"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reconstructor {
    OneWay,
    TwoWay,
    Oracle,
}

impl Reconstructor {
    pub fn name(self) -> &'static str {
        match self {
            Reconstructor::OneWay => "one_way",
            Reconstructor::TwoWay => "two_way",
            Reconstructor::Oracle => "oracle",
        }
    }
}

/// Inputs of a positional error profile experiment.
#[derive(Clone, Debug)]
pub struct SkewParams {
    pub p: f64,
    pub breakdown: ErrorBreakdown,
    pub reads: usize,
    pub length: usize,
    pub reconstructor: Reconstructor,
    pub trials: usize,
    pub seed: u64,
    pub alphabet: Alphabet,
    /// Enumeration cap override for the oracle.
    pub oracle_cap: Option<usize>,
}

impl SkewParams {
    pub fn new(p: f64, reads: usize, length: usize, reconstructor: Reconstructor, trials: usize) -> Self {
        Self {
            p,
            breakdown: ErrorBreakdown::EQUAL,
            reads,
            length,
            reconstructor,
            trials,
            seed: 0,
            alphabet: Alphabet::dna(),
            oracle_cap: None,
        }
    }
}

/// Per-position probability that the reconstructed symbol is wrong.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewProfile {
    pub error: Vec<f64>,
    /// Raw error counts per position.
    pub counts: Vec<u64>,
    pub trials: usize,
    pub p: f64,
    pub reads: usize,
    pub length: usize,
    pub breakdown: ErrorBreakdown,
    pub reconstructor: Reconstructor,
}

impl SkewProfile {
    /// Mean error over positions `range`.
    pub fn mean_over(&self, range: std::ops::Range<usize>) -> f64 {
        let n = range.len() as f64;
        self.error[range].iter().sum::<f64>() / n
    }

    /// CSV with columns position, error_probability, trials, p, N, L,
    /// algorithm, preceded by `#` comment lines.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut out = String::new();
        for h in header {
            out.push_str("# ");
            out.push_str(h);
            out.push('\n');
        }
        out.push_str("position,error_probability,trials,p,N,L,algorithm\n");
        for (i, e) in self.error.iter().enumerate() {
            out.push_str(&format!(
                "{i},{e:.6},{},{},{},{},{}\n",
                self.trials,
                self.p,
                self.reads,
                self.length,
                self.reconstructor.name()
            ));
        }
        out
    }
}

/// Reconstructs one cluster with the chosen algorithm.
pub fn reconstruct(
    reads: &[Vec<u8>],
    original: &[u8],
    reconstructor: Reconstructor,
    alphabet: &Alphabet,
    oracle_cap: Option<usize>,
) -> Result<Vec<u8>> {
    let params = ReconstructionParams::new(original.len()).with_alphabet(alphabet.clone());
    match reconstructor {
        Reconstructor::OneWay => one_way(reads, &params),
        Reconstructor::TwoWay => two_way(reads, &params),
        Reconstructor::Oracle => constrained_median_bruteforce(reads, original.len(), original, alphabet, oracle_cap),
    }
}

/// Monte-Carlo positional error profile: random strand, `N` noisy reads,
/// reconstruct, compare position by position.
pub fn skew_profile(params: &SkewParams) -> Result<SkewProfile> {
    if params.trials == 0 || params.reads == 0 || params.length == 0 {
        return Err(Error::Argument("trials, reads and length must be positive".into()));
    }
    let channel = ChannelConfig::new(params.p, params.breakdown, params.seed)?;
    if params.reconstructor == Reconstructor::Oracle {
        let cap = params
            .oracle_cap
            .unwrap_or_else(|| default_enumeration_cap(params.alphabet.len()));
        if params.length > cap {
            return Err(Error::Argument(format!(
                "length {} exceeds the enumeration cap {cap}",
                params.length
            )));
        }
    }
    let counts = (0..params.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(params.seed, &[stream::TRIAL, t]);
            let strand = params.alphabet.random_string(params.length, &mut rng);
            let reads: Vec<Vec<u8>> = (0..params.reads)
                .map(|_| corrupt_read(&strand, &channel, &params.alphabet, &mut rng))
                .collect();
            let guess = reconstruct(
                &reads,
                &strand,
                params.reconstructor,
                &params.alphabet,
                params.oracle_cap,
            )
            .expect("validated parameters");
            strand
                .iter()
                .zip(&guess)
                .map(|(a, b)| u64::from(a != b))
                .collect::<Vec<u64>>()
        })
        .reduce(
            || vec![0u64; params.length],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(SkewProfile {
        error: counts.iter().map(|&c| c as f64 / params.trials as f64).collect(),
        counts,
        trials: params.trials,
        p: params.p,
        reads: params.reads,
        length: params.length,
        breakdown: params.breakdown,
        reconstructor: params.reconstructor,
    })
}
