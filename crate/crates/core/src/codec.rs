//! Binary to nucleotide conversion and strand assembly.
//!
//! Two bits map to one base (`00=A, 01=C, 10=G, 11=T`). A strand is
//! `primer5 ++ index ++ payload ++ primer3`, where the index is the column
//! number in `m` bits and the payload is the column's `R` symbols, each `m`
//! bits, most significant bit first.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::gf::Symbol;

pub const DEFAULT_PRIMER5: &str = "ACACGACGCTCTTCCGATCT";
pub const DEFAULT_PRIMER3: &str = "AGATCGGAAGAGCACACGTC";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Nucleotide {
    A,
    C,
    G,
    T,
}

impl Nucleotide {
    pub const ALL: [Nucleotide; 4] = [Nucleotide::A, Nucleotide::C, Nucleotide::G, Nucleotide::T];

    pub fn from_bits(bits: u8) -> Self {
        Self::ALL[(bits & 3) as usize]
    }

    pub fn bits(self) -> u8 {
        self as u8
    }

    pub fn as_byte(self) -> u8 {
        b"ACGT"[self as usize]
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            b'A' => Some(Nucleotide::A),
            b'C' => Some(Nucleotide::C),
            b'G' => Some(Nucleotide::G),
            b'T' => Some(Nucleotide::T),
            _ => None,
        }
    }
}

#[inline]
fn base_value(b: u8, position: usize) -> Result<u8> {
    Nucleotide::from_byte(b)
        .map(Nucleotide::bits)
        .ok_or(Error::InvalidBase {
            position,
            found: b as char,
        })
}

/// `"00011011"` becomes `"ACGT"`.
pub fn bits_to_bases(bits: &str) -> Result<String> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::Argument(format!("bit string length {} is odd", bits.len())));
    }
    let raw = bits.as_bytes();
    let mut out = String::with_capacity(raw.len() / 2);
    for (i, pair) in raw.chunks_exact(2).enumerate() {
        let mut v = 0u8;
        for (j, &c) in pair.iter().enumerate() {
            v = v << 1
                | match c {
                    b'0' => 0,
                    b'1' => 1,
                    _ => {
                        return Err(Error::Argument(format!(
                            "invalid bit {:?} at position {}",
                            c as char,
                            2 * i + j
                        )))
                    }
                };
        }
        out.push(Nucleotide::from_bits(v).as_byte() as char);
    }
    Ok(out)
}

/// Inverse of [`bits_to_bases`].
pub fn bases_to_bits(bases: &str) -> Result<String> {
    let mut out = String::with_capacity(bases.len() * 2);
    for (i, b) in bases.bytes().enumerate() {
        let v = base_value(b, i)?;
        out.push(if v & 2 != 0 { '1' } else { '0' });
        out.push(if v & 1 != 0 { '1' } else { '0' });
    }
    Ok(out)
}

/// Appends the `m/2` bases of one `m`-bit value, MSB first.
#[inline]
pub fn push_symbol_bases(out: &mut Vec<u8>, value: Symbol, m: u32) {
    for k in (0..m / 2).rev() {
        out.push(Nucleotide::from_bits((value >> (2 * k)) as u8).as_byte());
    }
}

/// Reads one `m`-bit value from `m/2` bases. `offset` is only used for
/// error positions.
#[inline]
pub fn read_symbol_bases(bases: &[u8], offset: usize) -> Result<Symbol> {
    let mut v: Symbol = 0;
    for (i, &b) in bases.iter().enumerate() {
        v = v << 2 | base_value(b, offset + i)? as Symbol;
    }
    Ok(v)
}

/// Geometry of a strand: primers, `m`-bit index, `rows` payload symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrandLayout {
    pub primer5: Vec<u8>,
    pub primer3: Vec<u8>,
    pub m: u32,
    pub rows: usize,
}

impl StrandLayout {
    pub fn new(m: u32, rows: usize) -> Result<Self> {
        Self::with_primers(m, rows, DEFAULT_PRIMER5, DEFAULT_PRIMER3)
    }

    pub fn with_primers(m: u32, rows: usize, primer5: &str, primer3: &str) -> Result<Self> {
        if !m.is_multiple_of(2) || !(2..=16).contains(&m) {
            return Err(Error::Argument(format!(
                "symbol width must be even and in 2..=16, got {m}"
            )));
        }
        for (i, b) in primer5.bytes().chain(primer3.bytes()).enumerate() {
            base_value(b, i)?;
        }
        Ok(Self {
            primer5: primer5.as_bytes().to_vec(),
            primer3: primer3.as_bytes().to_vec(),
            m,
            rows,
        })
    }

    pub fn index_bits(&self) -> u32 {
        self.m
    }

    pub fn index_bases(&self) -> usize {
        self.m as usize / 2
    }

    /// Number of strands (columns), `2^m - 1`.
    pub fn columns(&self) -> usize {
        (1 << self.m) - 1
    }

    /// Index plus payload, without primers.
    pub fn core_len(&self) -> usize {
        self.index_bases() + self.rows * self.m as usize / 2
    }

    pub fn strand_len(&self) -> usize {
        self.primer5.len() + self.core_len() + self.primer3.len()
    }

    /// The primer-free part of a strand. Errors if primers do not match.
    pub fn strip_primers<'a>(&self, bases: &'a [u8]) -> Result<&'a [u8]> {
        if bases.len() != self.strand_len() {
            return Err(Error::LengthMismatch {
                expected: self.strand_len(),
                actual: bases.len(),
            });
        }
        let (p5, rest) = bases.split_at(self.primer5.len());
        let (core, p3) = rest.split_at(self.core_len());
        if p5 != self.primer5.as_slice() || p3 != self.primer3.as_slice() {
            return Err(Error::Parse("strand primers do not match layout".into()));
        }
        Ok(core)
    }

    /// Index plus payload bases for one column.
    pub fn assemble_core(&self, column_index: usize, payload: &[Symbol]) -> Result<Vec<u8>> {
        if column_index >= 1 << self.m {
            return Err(Error::Argument(format!(
                "column index {column_index} does not fit in {} bits",
                self.m
            )));
        }
        if payload.len() != self.rows {
            return Err(Error::Argument(format!(
                "expected {} payload symbols, got {}",
                self.rows,
                payload.len()
            )));
        }
        let mut out = Vec::with_capacity(self.core_len());
        push_symbol_bases(&mut out, column_index as Symbol, self.m);
        for &s in payload {
            push_symbol_bases(&mut out, s, self.m);
        }
        Ok(out)
    }

    /// Parses index plus payload (no primers).
    pub fn parse_core(&self, core: &[u8]) -> Result<(usize, Vec<Symbol>)> {
        if core.len() != self.core_len() {
            return Err(Error::LengthMismatch {
                expected: self.core_len(),
                actual: core.len(),
            });
        }
        let w = self.m as usize / 2;
        let index = read_symbol_bases(&core[..w], 0)? as usize;
        if index >= self.columns() {
            return Err(Error::InvalidIndex {
                index,
                columns: self.columns(),
            });
        }
        let payload = core[w..]
            .chunks_exact(w)
            .enumerate()
            .map(|(r, chunk)| read_symbol_bases(chunk, w * (r + 1)))
            .collect::<Result<Vec<_>>>()?;
        Ok((index, payload))
    }
}

/// A clean synthesized molecule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strand {
    pub column_index: usize,
    pub bases: Vec<u8>,
}

impl Strand {
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.bases).expect("strand bases are ASCII")
    }
}

pub fn assemble_strand(layout: &StrandLayout, column_index: usize, payload: &[Symbol]) -> Result<Strand> {
    let core = layout.assemble_core(column_index, payload)?;
    let mut bases = Vec::with_capacity(layout.strand_len());
    bases.extend_from_slice(&layout.primer5);
    bases.extend_from_slice(&core);
    bases.extend_from_slice(&layout.primer3);
    Ok(Strand { column_index, bases })
}

/// Reads back index and payload from a full-length strand. Primer regions are
/// skipped, not validated.
pub fn parse_strand(layout: &StrandLayout, bases: &[u8]) -> Result<(usize, Vec<Symbol>)> {
    if bases.len() != layout.strand_len() {
        return Err(Error::LengthMismatch {
            expected: layout.strand_len(),
            actual: bases.len(),
        });
    }
    let start = layout.primer5.len();
    layout
        .parse_core(&bases[start..start + layout.core_len()])
        .map_err(|e| match e {
            Error::InvalidBase { position, found } => Error::InvalidBase {
                position: position + start,
                found,
            },
            other => other,
        })
}

/// One strand per line, line `k` holds column `k`.
pub fn write_strands<W: Write>(mut out: W, strands: &[Strand]) -> std::io::Result<()> {
    for s in strands {
        out.write_all(&s.bases)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_strands<R: BufRead>(input: R) -> Result<Vec<Strand>> {
    let mut strands = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("reading strand file", e))?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        for (i, b) in line.bytes().enumerate() {
            base_value(b, i).map_err(|e| Error::Parse(format!("line {}: {e}", k + 1)))?;
        }
        strands.push(Strand {
            column_index: strands.len(),
            bases: line.as_bytes().to_vec(),
        });
    }
    Ok(strands)
}
