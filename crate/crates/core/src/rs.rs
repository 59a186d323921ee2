//! Systematic Reed-Solomon codes over GF(2^m) with full length `K = 2^m - 1`.
//!
//! A codeword is `M` data symbols followed by `E` parity symbols. Position
//! `j` of the codeword is the coefficient of `x^(K-1-j)`, and the generator
//! polynomial has roots `alpha^0 .. alpha^(E-1)`. Decoding corrects any
//! combination of `e` unknown-position errors and `f` erasures with
//! `2e + f <= E`, using Berlekamp-Massey seeded with the erasure locator,
//! Chien search and Forney's formula.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gf::{Field, Symbol};

/// Parameters of one Reed-Solomon code.
#[derive(Clone, Debug)]
pub struct CodeSpec {
    field: Arc<Field>,
    data: usize,
    parity: usize,
    /// Generator polynomial, descending degree, monic (`generator[0] == 1`).
    generator: Vec<Symbol>,
}

/// Whether a codeword position holds data or parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Data,
    Parity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    symbols: Vec<Symbol>,
    data_len: usize,
}

impl Codeword {
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.symbols
    }

    pub fn data(&self) -> &[Symbol] {
        &self.symbols[..self.data_len]
    }

    pub fn parity(&self) -> &[Symbol] {
        &self.symbols[self.data_len..]
    }

    pub fn origin(&self, position: usize) -> Origin {
        if position < self.data_len {
            Origin::Data
        } else {
            Origin::Parity
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Successful decode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub data: Vec<Symbol>,
    /// Symbols changed by correction plus erased positions filled.
    pub corrected: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DecodeFailure {
    #[error("{erasures} erasures exceed the {parity} parity symbols")]
    TooManyErasures { erasures: usize, parity: usize },
    #[error("error locator has degree {degree} but {roots} roots in the code")]
    LocatorMismatch { degree: usize, roots: usize },
    #[error("errata count {errors} errors + {erasures} erasures exceeds capability")]
    BeyondCapability { errors: usize, erasures: usize },
    #[error("syndromes nonzero after correction")]
    Inconsistent,
    #[error("zero derivative at error location")]
    DegenerateLocator,
}

impl CodeSpec {
    /// Code with `data_symbols` data symbols and `2^m - 1 - data_symbols`
    /// parity symbols.
    pub fn new(field: Arc<Field>, data_symbols: usize) -> Result<Self> {
        let k = field.order();
        if data_symbols == 0 || data_symbols > k {
            return Err(Error::Argument(format!(
                "data symbols must be in 1..={k}, got {data_symbols}"
            )));
        }
        let parity = k - data_symbols;
        let generator = build_generator(&field, parity);
        Ok(Self {
            field,
            data: data_symbols,
            parity,
            generator,
        })
    }

    /// Code for symbol width `m` (default polynomial) with `parity` parity symbols.
    pub fn with_parity(m: u32, parity: usize) -> Result<Self> {
        let field = Arc::new(Field::with_default_poly(m)?);
        let k = field.order();
        if parity >= k {
            return Err(Error::Argument(format!(
                "parity symbols must be below {k}, got {parity}"
            )));
        }
        Self::new(field, k - parity)
    }

    /// Parity count closest to `fraction * K`.
    pub fn parity_for_fraction(m: u32, fraction: f64) -> usize {
        let k = (1usize << m) - 1;
        ((fraction * k as f64).round() as usize).min(k - 1)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn m(&self) -> u32 {
        self.field.m()
    }

    /// Codeword length `K`.
    pub fn len(&self) -> usize {
        self.data + self.parity
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `M`.
    pub fn data_len(&self) -> usize {
        self.data
    }

    /// `E`.
    pub fn parity_len(&self) -> usize {
        self.parity
    }

    pub fn generator(&self) -> &[Symbol] {
        &self.generator
    }

    pub fn encode(&self, data: &[Symbol]) -> Result<Codeword> {
        if data.len() != self.data {
            return Err(Error::Argument(format!(
                "expected {} data symbols, got {}",
                self.data,
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&s| !self.field.contains(s)) {
            return Err(Error::Argument(format!(
                "symbol {bad} does not fit in {} bits",
                self.m()
            )));
        }
        let mut symbols = Vec::with_capacity(self.len());
        symbols.extend_from_slice(data);
        symbols.resize(self.len(), 0);
        if self.parity > 0 {
            // remainder of data(x) * x^E divided by g(x), by synthetic division
            let f = &*self.field;
            let mut rem = vec![0 as Symbol; self.parity];
            for &d in data {
                let feedback = d ^ rem[0];
                rem.rotate_left(1);
                rem[self.parity - 1] = 0;
                if feedback != 0 {
                    for (r, &g) in rem.iter_mut().zip(&self.generator[1..]) {
                        *r ^= f.mul(feedback, g);
                    }
                }
            }
            symbols[self.data..].copy_from_slice(&rem);
        }
        Ok(Codeword {
            symbols,
            data_len: self.data,
        })
    }

    /// Syndromes `S_i = r(alpha^i)`, `i = 0..E`.
    pub fn syndromes(&self, received: &[Symbol]) -> Vec<Symbol> {
        let f = &*self.field;
        (0..self.parity)
            .map(|i| {
                let x = f.alpha_pow(i as i64);
                received.iter().fold(0, |acc, &r| f.mul(acc, x) ^ r)
            })
            .collect()
    }

    /// Decodes `received`, treating `erasures` as known-bad positions whose
    /// contents are ignored.
    pub fn decode(&self, received: &[Symbol], erasures: &[usize]) -> std::result::Result<Decoded, DecodeFailure> {
        assert_eq!(received.len(), self.len(), "received word has wrong length");
        let k = self.len();
        let f = &*self.field;

        let mut erased: Vec<usize> = erasures.to_vec();
        erased.sort_unstable();
        erased.dedup();
        assert!(erased.iter().all(|&p| p < k), "erasure position out of range");
        if erased.len() > self.parity {
            return Err(DecodeFailure::TooManyErasures {
                erasures: erased.len(),
                parity: self.parity,
            });
        }

        let mut word = received.to_vec();
        for &p in &erased {
            word[p] = 0;
        }
        let synd = self.syndromes(&word);
        if synd.iter().all(|&s| s == 0) {
            return Ok(Decoded {
                data: word[..self.data].to_vec(),
                corrected: erased.len(),
            });
        }

        let locator_of = |pos: usize| f.alpha_pow((k - 1 - pos) as i64);

        // erasure locator Gamma(x) = prod (1 + X_k x), ascending order
        let mut gamma: Vec<Symbol> = vec![1];
        for &p in &erased {
            gamma = f.poly_mul(&gamma, &[1, locator_of(p)]);
        }

        let lambda = berlekamp_massey(f, &synd, gamma, erased.len());
        let degree = lambda.iter().rposition(|&c| c != 0).unwrap_or(0);
        let errors = degree.saturating_sub(erased.len());
        if degree < erased.len() || 2 * errors + erased.len() > self.parity {
            return Err(DecodeFailure::BeyondCapability {
                errors,
                erasures: erased.len(),
            });
        }

        // Chien search
        let mut positions = Vec::with_capacity(degree);
        for pos in 0..k {
            let x_inv = f.alpha_pow(-((k - 1 - pos) as i64));
            if f.poly_eval(&lambda, x_inv) == 0 {
                positions.push(pos);
            }
        }
        if positions.len() != degree {
            return Err(DecodeFailure::LocatorMismatch {
                degree,
                roots: positions.len(),
            });
        }

        // Forney: e_j = X_j * Omega(X_j^-1) / Lambda'(X_j^-1)
        let mut omega = f.poly_mul(&synd, &lambda);
        omega.truncate(self.parity);
        let derivative: Vec<Symbol> = lambda
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
            .collect();
        let mut changed = 0;
        for &pos in &positions {
            let x = locator_of(pos);
            let x_inv = f.inv(x);
            let denom = f.poly_eval(&derivative, x_inv);
            if denom == 0 {
                return Err(DecodeFailure::DegenerateLocator);
            }
            let magnitude = f.mul(x, f.div(f.poly_eval(&omega, x_inv), denom));
            if magnitude != 0 {
                word[pos] ^= magnitude;
                if erased.binary_search(&pos).is_err() {
                    changed += 1;
                }
            }
        }

        if self.syndromes(&word).iter().any(|&s| s != 0) {
            return Err(DecodeFailure::Inconsistent);
        }
        Ok(Decoded {
            data: word[..self.data].to_vec(),
            corrected: changed + erased.len(),
        })
    }
}

fn build_generator(f: &Field, parity: usize) -> Vec<Symbol> {
    // descending order; multiply by (x - alpha^i)
    let mut g: Vec<Symbol> = vec![1];
    for i in 0..parity {
        let root = f.alpha_pow(i as i64);
        let mut next = vec![0; g.len() + 1];
        for (j, &c) in g.iter().enumerate() {
            next[j] ^= c;
            next[j + 1] ^= f.mul(c, root);
        }
        g = next;
    }
    g
}

/// Errata locator via Berlekamp-Massey, starting from the erasure locator.
fn berlekamp_massey(f: &Field, synd: &[Symbol], gamma: Vec<Symbol>, erasures: usize) -> Vec<Symbol> {
    let n = synd.len();
    let mut lambda = gamma.clone();
    lambda.resize(n + 1, 0);
    let mut prev = gamma;
    prev.resize(n + 1, 0);
    let mut len = erasures;
    for r in (erasures + 1)..=n {
        let mut delta: Symbol = 0;
        for j in 0..=len.min(r - 1) {
            delta ^= f.mul(lambda[j], synd[r - 1 - j]);
        }
        // prev <- x * prev happens in every branch
        prev.rotate_right(1);
        prev[0] = 0;
        if delta == 0 {
            continue;
        }
        let updated: Vec<Symbol> = lambda.iter().zip(&prev).map(|(&l, &b)| l ^ f.mul(delta, b)).collect();
        if 2 * len < r + erasures {
            let inv = f.inv(delta);
            // prev holds x*B; the new B is lambda / delta
            prev = lambda.iter().map(|&l| f.mul(l, inv)).collect();
            len = r + erasures - len;
        }
        lambda = updated;
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(spec: &CodeSpec, rng: &mut ChaCha8Rng) -> Vec<Symbol> {
        (0..spec.data_len())
            .map(|_| rng.random_range(0..spec.field().size()) as Symbol)
            .collect()
    }

    #[test]
    fn zero_parity_is_identity() {
        let spec = CodeSpec::with_parity(4, 0).unwrap();
        let data: Vec<Symbol> = (0..15).collect();
        let cw = spec.encode(&data).unwrap();
        assert_eq!(cw.symbols(), &data[..]);
        assert_eq!(spec.decode(cw.symbols(), &[]).unwrap().data, data);
    }

    #[test]
    fn zero_data_gives_zero_codeword() {
        let spec = CodeSpec::with_parity(8, 32).unwrap();
        let cw = spec.encode(&vec![0; 223]).unwrap();
        assert!(cw.symbols().iter().all(|&s| s == 0));
    }

    #[test]
    fn encode_rejects_bad_input() {
        let spec = CodeSpec::with_parity(4, 4).unwrap();
        assert!(spec.encode(&[0; 10]).is_err());
        assert!(spec.encode(&[16; 11]).is_err());
    }

    #[test]
    fn codewords_vanish_at_generator_roots() {
        let spec = CodeSpec::with_parity(8, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cw = spec.encode(&random_data(&spec, &mut rng)).unwrap();
        assert!(spec.syndromes(cw.symbols()).iter().all(|&s| s == 0));
        assert_eq!(cw.origin(0), Origin::Data);
        assert_eq!(cw.origin(222), Origin::Data);
        assert_eq!(cw.origin(223), Origin::Parity);
    }

    #[test]
    fn round_trip_rs255_223() {
        let spec = CodeSpec::with_parity(8, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let data = random_data(&spec, &mut rng);
            let cw = spec.encode(&data).unwrap();
            let out = spec.decode(cw.symbols(), &[]).unwrap();
            assert_eq!(out.data, data);
            assert_eq!(out.corrected, 0);
        }
    }

    #[test]
    fn linearity() {
        let spec = CodeSpec::with_parity(8, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_data(&spec, &mut rng);
        let b = random_data(&spec, &mut rng);
        let sum: Vec<Symbol> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let ca = spec.encode(&a).unwrap();
        let cb = spec.encode(&b).unwrap();
        let combined: Vec<Symbol> = ca.symbols().iter().zip(cb.symbols()).map(|(x, y)| x ^ y).collect();
        assert_eq!(combined, spec.encode(&sum).unwrap().into_symbols());
    }

    #[test]
    fn exactly_e_erasures_recover() {
        let spec = CodeSpec::with_parity(8, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let data = random_data(&spec, &mut rng);
            let mut word = spec.encode(&data).unwrap().into_symbols();
            let erasures = sample(&mut rng, 255, 32).into_vec();
            for &p in &erasures {
                word[p] = rng.random();
                word[p] &= 0xFF;
            }
            let out = spec.decode(&word, &erasures).unwrap();
            assert_eq!(out.data, data);
            assert_eq!(out.corrected, 32);
        }
    }

    #[test]
    fn too_many_erasures_fail() {
        let spec = CodeSpec::with_parity(4, 4).unwrap();
        let word = vec![0; 15];
        assert_eq!(
            spec.decode(&word, &[0, 1, 2, 3, 4]),
            Err(DecodeFailure::TooManyErasures { erasures: 5, parity: 4 })
        );
    }

    /// Every error/erasure pattern within capability at m=4, E=4, checked
    /// exhaustively over positions with random nonzero magnitudes.
    #[test]
    fn exhaustive_capability_gf16() {
        let spec = CodeSpec::with_parity(4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = 15;
        let mut checked = 0;
        for e in 0..=2usize {
            for f in 0..=(4 - 2 * e) {
                // all position sets of size e+f, all ways to pick which are erasures
                for mask in 0u32..(1 << k) {
                    if mask.count_ones() as usize != e + f {
                        continue;
                    }
                    let positions: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
                    let mut choose = vec![false; positions.len()];
                    for c in choose.iter_mut().take(f) {
                        *c = true;
                    }
                    let data = random_data(&spec, &mut rng);
                    let mut word = spec.encode(&data).unwrap().into_symbols();
                    let mut erasures = Vec::new();
                    for (&p, &is_erasure) in positions.iter().zip(&choose) {
                        if is_erasure {
                            erasures.push(p);
                            word[p] = 0;
                        } else {
                            word[p] ^= rng.random_range(1..16);
                        }
                    }
                    let out = spec
                        .decode(&word, &erasures)
                        .unwrap_or_else(|err| panic!("e={e} f={f} positions={positions:?}: {err}"));
                    assert_eq!(out.data, data);
                    checked += 1;
                }
            }
        }
        assert!(checked > 1000);
    }

    /// One past capability: decoding either fails or lands on some other valid
    /// codeword; it never returns a non-codeword.
    #[test]
    fn beyond_capability_never_returns_invalid_codeword() {
        let spec = CodeSpec::with_parity(4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut failures = 0;
        let mut miscorrections = 0;
        let trials = 5000;
        for t in 0..trials {
            let data = random_data(&spec, &mut rng);
            let mut word = spec.encode(&data).unwrap().into_symbols();
            // 2e + f = 5
            let (e, f) = if t % 2 == 0 { (1, 3) } else { (2, 1) };
            let positions = sample(&mut rng, 15, e + f).into_vec();
            let erasures = positions[..f].to_vec();
            for &p in &positions[f..] {
                word[p] ^= rng.random_range(1..16);
            }
            match spec.decode(&word, &erasures) {
                Err(_) => failures += 1,
                Ok(out) => {
                    let re = spec.encode(&out.data).unwrap();
                    assert!(spec.syndromes(re.symbols()).iter().all(|&s| s == 0));
                    if out.data != data {
                        miscorrections += 1;
                    }
                }
            }
        }
        assert!(failures + miscorrections > 0);
        assert!(failures > miscorrections, "{failures} vs {miscorrections}");
    }

    #[test]
    fn mixed_errors_and_erasures_gf256() {
        let spec = CodeSpec::with_parity(8, 47).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let data = random_data(&spec, &mut rng);
            let mut word = spec.encode(&data).unwrap().into_symbols();
            let e = rng.random_range(0..=23usize);
            let f = rng.random_range(0..=(47 - 2 * e));
            let positions = sample(&mut rng, 255, e + f).into_vec();
            for &p in &positions[..f] {
                word[p] = 0;
            }
            for &p in &positions[f..] {
                word[p] ^= rng.random_range(1..256);
            }
            let out = spec.decode(&word, &positions[..f]).unwrap();
            assert_eq!(out.data, data);
            assert_eq!(out.corrected, e + f);
        }
    }

    #[test]
    fn odd_parity_count() {
        let spec = CodeSpec::with_parity(8, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let data = random_data(&spec, &mut rng);
            let mut word = spec.encode(&data).unwrap().into_symbols();
            let positions = sample(&mut rng, 255, 3).into_vec();
            // 2*2 + 1 = 5 = E
            word[positions[0]] = 0;
            word[positions[1]] ^= 0x5A;
            word[positions[2]] ^= 0x01;
            let out = spec.decode(&word, &[positions[0]]).unwrap();
            assert_eq!(out.data, data);
        }
    }
}
