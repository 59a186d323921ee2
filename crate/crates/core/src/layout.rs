//! The encoding matrix and codeword/data placement.
//!
//! The matrix has `R` rows (symbols per molecule) and `K = 2^m - 1` columns
//! (molecules). Every codeword has one symbol in every column, and symbol `j`
//! of any codeword always sits in column `j`, so data symbols occupy columns
//! `0..M` and parity symbols columns `M..K` under every strategy. A missing
//! molecule therefore erases exactly one symbol of every codeword.
//!
//! * **Baseline**: codeword `c` is row `c`; data fills the matrix column by
//!   column.
//! * **Gini**: codewords run along wrapped diagonals through the
//!   non-reserved rows `r_0 < r_1 < ... < r_{R'-1}`. Symbol `j` of the
//!   diagonal starting at `r_c` sits at row `r_{(c+j) mod R'}`, column `j`.
//!   Reserved rows stay plain row codewords. Data fills codeword by codeword.
//! * **DnaMapper**: codewords are rows as in Baseline; payload bits are placed
//!   by a [`BitRanking`] into rows ordered by reliability, alternating from
//!   the far end of the molecule and the end next to the index.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::bits::{get_bit, read_bits, set_bit, write_bits};
use crate::codec::{Strand, StrandLayout};
use crate::error::{Error, Result};
use crate::gf::Symbol;
use crate::priority::BitRanking;
use crate::rs::{CodeSpec, DecodeFailure};

/// `R x K` grid of symbols plus the set of columns known to be missing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<Symbol>,
    erased: BTreeSet<usize>,
}

impl EncodingMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            cells: vec![0; rows * cols],
            erased: BTreeSet::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Symbol {
        self.cells[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Symbol) {
        self.cells[row * self.cols + col] = value;
    }

    pub fn column(&self, col: usize) -> Vec<Symbol> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn erased_columns(&self) -> &BTreeSet<usize> {
        &self.erased
    }

    pub fn mark_erased(&mut self, col: usize) {
        self.erased.insert(col);
        for r in 0..self.rows {
            self.set(r, col, 0);
        }
    }

    /// Cells that differ from `other`, as `(row, col)`.
    pub fn diff_cells(&self, other: &EncodingMatrix) -> Vec<(usize, usize)> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.cells
            .iter()
            .zip(&other.cells)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| (i / self.cols, i % self.cols))
            .collect()
    }
}

/// How payload and codewords are placed in the matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Placement {
    Baseline,
    Gini { reserved_rows: BTreeSet<usize> },
    DnaMapper { ranking: BitRanking },
}

impl Placement {
    pub fn name(&self) -> &'static str {
        match self {
            Placement::Baseline => "baseline",
            Placement::Gini { .. } => "gini",
            Placement::DnaMapper { .. } => "dnamapper",
        }
    }
}

#[derive(Clone, Debug)]
pub struct LayoutStrategy {
    code: CodeSpec,
    rows: usize,
    placement: Placement,
    /// Non-reserved rows in ascending order (Gini only).
    diagonal_rows: Vec<usize>,
    /// Row to its index in `diagonal_rows`, `usize::MAX` if reserved.
    diagonal_index: Vec<usize>,
}

/// Per-codeword decode outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodewordStatus {
    pub codeword: usize,
    pub erasures: usize,
    pub outcome: std::result::Result<usize, DecodeFailure>,
}

impl CodewordStatus {
    pub fn ok(&self) -> bool {
        self.outcome.is_ok()
    }
}

#[derive(Clone, Debug)]
pub struct Recovery {
    /// Full data capacity in bytes (rounded up); callers truncate.
    pub payload: Vec<u8>,
    pub report: Vec<CodewordStatus>,
}

impl Recovery {
    pub fn failed_codewords(&self) -> usize {
        self.report.iter().filter(|s| !s.ok()).count()
    }

    pub fn success(&self) -> bool {
        self.failed_codewords() == 0
    }
}

/// Row holding reliability class `rank`: `R-1, 0, R-2, 1, ...`.
pub fn row_for_rank(rank: usize, rows: usize) -> usize {
    if rank.is_multiple_of(2) {
        rows - 1 - rank / 2
    } else {
        rank / 2
    }
}

/// Bit offset from the symbol's MSB for slot `slot` of a class.
///
/// Rows filled from the far end of the molecule (even ranks) start with the
/// symbol's last base and move toward its first; rows next to the index
/// (odd ranks) start with the first base. Within a base the high bit comes
/// first.
fn slot_bit_offset(rank: usize, slot: usize, m: u32) -> u32 {
    let slot = slot as u32;
    if rank.is_multiple_of(2) {
        m - 2 - 2 * (slot / 2) + slot % 2
    } else {
        slot
    }
}

impl LayoutStrategy {
    pub fn baseline(code: CodeSpec, rows: usize) -> Result<Self> {
        Self::new(code, rows, Placement::Baseline)
    }

    pub fn gini(code: CodeSpec, rows: usize) -> Result<Self> {
        Self::new(
            code,
            rows,
            Placement::Gini {
                reserved_rows: BTreeSet::new(),
            },
        )
    }

    pub fn new(code: CodeSpec, rows: usize, placement: Placement) -> Result<Self> {
        if rows == 0 {
            return Err(Error::Argument("matrix needs at least one row".into()));
        }
        let mut diagonal_rows = Vec::new();
        let mut diagonal_index = vec![usize::MAX; rows];
        match &placement {
            Placement::Baseline => {}
            Placement::Gini { reserved_rows } => {
                if let Some(&r) = reserved_rows.iter().find(|&&r| r >= rows) {
                    return Err(Error::Argument(format!("reserved row {r} outside 0..{rows}")));
                }
                for r in (0..rows).filter(|r| !reserved_rows.contains(r)) {
                    diagonal_index[r] = diagonal_rows.len();
                    diagonal_rows.push(r);
                }
            }
            Placement::DnaMapper { ranking } => {
                let per_class = code.data_len() * code.m() as usize;
                if ranking.class_count() != rows || ranking.class_capacities().iter().any(|&c| c != per_class) {
                    return Err(Error::Argument(format!(
                        "ranking must have {rows} classes of {per_class} bits"
                    )));
                }
            }
        }
        Ok(Self {
            code,
            rows,
            placement,
            diagonal_rows,
            diagonal_index,
        })
    }

    pub fn code(&self) -> &CodeSpec {
        &self.code
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.code.len()
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    pub fn name(&self) -> &'static str {
        self.placement.name()
    }

    /// Data capacity in bits, `R * M * m`.
    pub fn capacity_bits(&self) -> usize {
        self.rows * self.code.data_len() * self.code.m() as usize
    }

    /// Bits per reliability class (one matrix row of data).
    pub fn class_capacity_bits(&self) -> usize {
        self.code.data_len() * self.code.m() as usize
    }

    fn check_cell(&self, row: usize, col: usize) -> Result<()> {
        if row >= self.rows || col >= self.cols() {
            return Err(Error::Argument(format!(
                "cell ({row}, {col}) outside {}x{}",
                self.rows,
                self.cols()
            )));
        }
        Ok(())
    }

    /// `(codeword, symbol index)` owning a cell.
    pub fn cell_owner(&self, row: usize, col: usize) -> Result<(usize, usize)> {
        self.check_cell(row, col)?;
        Ok(self.owner_unchecked(row, col))
    }

    #[inline]
    pub(crate) fn owner_unchecked(&self, row: usize, col: usize) -> (usize, usize) {
        match &self.placement {
            Placement::Gini { .. } if self.diagonal_index[row] != usize::MAX => {
                let n = self.diagonal_rows.len();
                let i = self.diagonal_index[row];
                let c = (i + n - col % n) % n;
                (self.diagonal_rows[c], col)
            }
            _ => (row, col),
        }
    }

    /// Cells of codeword `c`; entry `j` holds symbol `j`.
    pub fn codeword_cells(&self, c: usize) -> Result<Vec<(usize, usize)>> {
        if c >= self.rows {
            return Err(Error::Argument(format!("codeword {c} outside 0..{}", self.rows)));
        }
        let k = self.cols();
        Ok(match &self.placement {
            Placement::Gini { .. } if self.diagonal_index[c] != usize::MAX => {
                let n = self.diagonal_rows.len();
                let start = self.diagonal_index[c];
                (0..k).map(|j| (self.diagonal_rows[(start + j) % n], j)).collect()
            }
            _ => (0..k).map(|j| (c, j)).collect(),
        })
    }

    /// Row of each symbol of codeword `c` (column is the symbol index).
    fn codeword_rows(&self, c: usize) -> Vec<usize> {
        self.codeword_cells(c)
            .expect("codeword in range")
            .into_iter()
            .map(|(r, _)| r)
            .collect()
    }

    /// Data cells in payload fill order (Baseline and Gini).
    fn fill_order(&self) -> Vec<(usize, usize)> {
        let m_data = self.code.data_len();
        match &self.placement {
            Placement::Baseline => (0..m_data)
                .flat_map(|col| (0..self.rows).map(move |row| (row, col)))
                .collect(),
            Placement::Gini { .. } => (0..self.rows)
                .flat_map(|c| {
                    let rows = self.codeword_rows(c);
                    (0..m_data).map(move |j| (rows[j], j))
                })
                .collect(),
            Placement::DnaMapper { .. } => unreachable!("DnaMapper places bits by ranking"),
        }
    }

    /// Matrix cell and bit offset (from the MSB) of a DnaMapper slot.
    fn ranked_bit_cell(&self, class: usize, pos: usize) -> (usize, usize, u32) {
        let m_data = self.code.data_len();
        let row = row_for_rank(class, self.rows);
        let col = pos % m_data;
        let offset = slot_bit_offset(class, pos / m_data, self.code.m());
        (row, col, offset)
    }

    /// Places `payload` (zero-padded to capacity) and computes parity.
    pub fn build_matrix(&self, payload: &[u8]) -> Result<EncodingMatrix> {
        let capacity = self.capacity_bits();
        let m = self.code.m();
        let mut matrix = EncodingMatrix::zeros(self.rows, self.cols());
        match &self.placement {
            Placement::DnaMapper { ranking } => {
                let bits = ranking.len();
                if payload.len() * 8 > bits.div_ceil(8) * 8 {
                    return Err(Error::Capacity {
                        requested: payload.len() * 8,
                        capacity: bits,
                    });
                }
                for b in 0..bits.min(payload.len() * 8) {
                    if get_bit(payload, b) {
                        let slot = ranking.slot(b);
                        let (row, col, off) = self.ranked_bit_cell(slot.class as usize, slot.pos as usize);
                        let v = matrix.get(row, col) | 1 << (m - 1 - off);
                        matrix.set(row, col, v);
                    }
                }
            }
            _ => {
                if payload.len() * 8 > capacity {
                    return Err(Error::Capacity {
                        requested: payload.len() * 8,
                        capacity,
                    });
                }
                for (i, (row, col)) in self.fill_order().into_iter().enumerate() {
                    matrix.set(row, col, read_bits(payload, i * m as usize, m));
                }
            }
        }
        self.write_parity(&mut matrix)?;
        Ok(matrix)
    }

    fn write_parity(&self, matrix: &mut EncodingMatrix) -> Result<()> {
        let m_data = self.code.data_len();
        for c in 0..self.rows {
            let rows = self.codeword_rows(c);
            let data: Vec<Symbol> = (0..m_data).map(|j| matrix.get(rows[j], j)).collect();
            let cw = self.code.encode(&data)?;
            for (j, &p) in cw.parity().iter().enumerate() {
                matrix.set(rows[m_data + j], m_data + j, p);
            }
        }
        Ok(())
    }

    /// Strand `k` carries index `k` and column `k` in row order.
    pub fn matrix_to_strands(&self, matrix: &EncodingMatrix, layout: &StrandLayout) -> Result<Vec<Strand>> {
        if layout.m != self.code.m() || layout.rows != self.rows {
            return Err(Error::Argument(format!(
                "strand layout (m={}, R={}) does not match matrix (m={}, R={})",
                layout.m,
                layout.rows,
                self.code.m(),
                self.rows
            )));
        }
        (0..self.cols())
            .map(|k| crate::codec::assemble_strand(layout, k, &matrix.column(k)))
            .collect()
    }

    /// Builds a received matrix; absent columns become erasures.
    pub fn strands_to_matrix(&self, columns: &BTreeMap<usize, Vec<Symbol>>) -> Result<EncodingMatrix> {
        let mut matrix = EncodingMatrix::zeros(self.rows, self.cols());
        for (&k, symbols) in columns {
            if k >= self.cols() || symbols.len() != self.rows {
                return Err(Error::Argument(format!(
                    "column {k} with {} symbols does not fit {}x{}",
                    symbols.len(),
                    self.rows,
                    self.cols()
                )));
            }
            for (r, &s) in symbols.iter().enumerate() {
                matrix.set(r, k, s);
            }
        }
        for k in (0..self.cols()).filter(|k| !columns.contains_key(k)) {
            matrix.mark_erased(k);
        }
        Ok(matrix)
    }

    /// Decodes every codeword and reads the payload back in placement order.
    /// Codewords that fail to decode contribute their received data symbols.
    pub fn recover_payload(&self, matrix: &EncodingMatrix) -> Recovery {
        let m_data = self.code.data_len();
        let m = self.code.m();
        let erasures: Vec<usize> = matrix.erased_columns().iter().copied().collect();
        let mut corrected = matrix.clone();
        let mut report = Vec::with_capacity(self.rows);
        for c in 0..self.rows {
            let rows = self.codeword_rows(c);
            let received: Vec<Symbol> = rows.iter().enumerate().map(|(j, &r)| matrix.get(r, j)).collect();
            let outcome = self.code.decode(&received, &erasures);
            if let Ok(decoded) = &outcome {
                for (j, &s) in decoded.data.iter().enumerate() {
                    corrected.set(rows[j], j, s);
                }
            }
            report.push(CodewordStatus {
                codeword: c,
                erasures: erasures.len(),
                outcome: outcome.map(|d| d.corrected),
            });
        }

        let capacity = self.capacity_bits();
        let mut payload = vec![0u8; capacity.div_ceil(8)];
        match &self.placement {
            Placement::DnaMapper { ranking } => {
                for b in 0..ranking.len() {
                    let slot = ranking.slot(b);
                    let (row, col, off) = self.ranked_bit_cell(slot.class as usize, slot.pos as usize);
                    set_bit(&mut payload, b, corrected.get(row, col) >> (m - 1 - off) & 1 == 1);
                }
            }
            _ => {
                for (i, (row, col)) in self.fill_order().into_iter().enumerate() {
                    write_bits(&mut payload, i * m as usize, m, corrected.get(row, col));
                }
            }
        }
        debug_assert!(m_data > 0);
        Recovery { payload, report }
    }

    /// Symbol errors per codeword between a sent and a received matrix.
    pub fn errors_per_codeword(&self, sent: &EncodingMatrix, received: &EncodingMatrix) -> Vec<usize> {
        let mut counts = vec![0; self.rows];
        for (r, c) in sent.diff_cells(received) {
            counts[self.owner_unchecked(r, c).0] += 1;
        }
        counts
    }

    /// Debug dump: a `#` header line, then `R` lines of `K` hex symbols.
    pub fn dump_csv(&self, matrix: &EncodingMatrix) -> String {
        let mut out = format!(
            "# strategy={} m={} K={} M={} E={} R={}\n",
            self.name(),
            self.code.m(),
            self.cols(),
            self.code.data_len(),
            self.code.parity_len(),
            self.rows
        );
        let width = self.code.m().div_ceil(4) as usize;
        for r in 0..matrix.rows() {
            for c in 0..matrix.cols() {
                if c > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{:0width$x}", matrix.get(r, c));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priority::rank_bits_positional;
    use crate::testimage::random_bytes;
    use proptest::prelude::*;

    fn code(m: u32, parity: usize) -> CodeSpec {
        CodeSpec::with_parity(m, parity).unwrap()
    }

    fn gini_reserved(code: CodeSpec, rows: usize, reserved: &[usize]) -> LayoutStrategy {
        LayoutStrategy::new(
            code,
            rows,
            Placement::Gini {
                reserved_rows: reserved.iter().copied().collect(),
            },
        )
        .unwrap()
    }

    fn dnamapper(code: CodeSpec, rows: usize, file_bits: &[usize]) -> LayoutStrategy {
        let per = code.data_len() * code.m() as usize;
        let ranking = rank_bits_positional(file_bits, &vec![per; rows], None).unwrap();
        LayoutStrategy::new(code, rows, Placement::DnaMapper { ranking }).unwrap()
    }

    #[test]
    fn baseline_owner_is_identity() {
        let s = LayoutStrategy::baseline(code(4, 4), 8).unwrap();
        assert_eq!(s.cell_owner(3, 7).unwrap(), (3, 7));
        assert_eq!(
            s.codeword_cells(0).unwrap(),
            (0..15).map(|j| (0, j)).collect::<Vec<_>>()
        );
        assert!(s.cell_owner(8, 0).is_err());
        assert!(s.cell_owner(0, 15).is_err());
        assert!(s.codeword_cells(8).is_err());
    }

    #[test]
    fn gini_diagonal_with_three_rows() {
        let s = LayoutStrategy::gini(code(4, 4), 3).unwrap();
        let cells = s.codeword_cells(1).unwrap();
        assert_eq!(&cells[..4], &[(1, 0), (2, 1), (0, 2), (1, 3)]);
        for (j, &(r, c)) in cells.iter().enumerate() {
            assert_eq!(s.cell_owner(r, c).unwrap(), (1, j));
        }
    }

    #[test]
    fn ownership_is_a_bijection_for_every_strategy() {
        for rows in 1..=8 {
            for m in [4u32, 5] {
                let k = (1 << m) - 1;
                let c = code(m, 4);
                let mut strategies = vec![
                    LayoutStrategy::baseline(c.clone(), rows).unwrap(),
                    LayoutStrategy::gini(c.clone(), rows).unwrap(),
                    dnamapper(c.clone(), rows, &[rows * c.data_len() * m as usize]),
                ];
                if rows > 2 {
                    strategies.push(gini_reserved(c.clone(), rows, &[0, rows - 1]));
                }
                for s in &strategies {
                    let mut seen = BTreeSet::new();
                    for r in 0..rows {
                        for col in 0..k {
                            let (cw, j) = s.cell_owner(r, col).unwrap();
                            assert!(cw < rows && j < k);
                            assert!(seen.insert((cw, j)), "{} duplicate owner", s.name());
                        }
                    }
                    assert_eq!(seen.len(), rows * k);
                    for cw in 0..rows {
                        for (j, (r, col)) in s.codeword_cells(cw).unwrap().into_iter().enumerate() {
                            assert_eq!(s.cell_owner(r, col).unwrap(), (cw, j));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn gini_visits_rows_evenly() {
        // R' = 5 divides K = 15
        let s = LayoutStrategy::gini(code(4, 4), 5).unwrap();
        for c in 0..5 {
            let cells = s.codeword_cells(c).unwrap();
            let cols: BTreeSet<usize> = cells.iter().map(|&(_, col)| col).collect();
            assert_eq!(cols.len(), 15);
            let mut per_row = [0; 5];
            for (r, _) in cells {
                per_row[r] += 1;
            }
            assert_eq!(per_row, [3; 5]);
        }
    }

    #[test]
    fn gini_reserved_rows_are_plain_codewords() {
        let s = gini_reserved(code(4, 4), 6, &[0, 5]);
        assert_eq!(
            s.codeword_cells(0).unwrap(),
            (0..15).map(|j| (0, j)).collect::<Vec<_>>()
        );
        assert_eq!(
            s.codeword_cells(5).unwrap(),
            (0..15).map(|j| (5, j)).collect::<Vec<_>>()
        );
        let inner = s.codeword_cells(2).unwrap();
        assert!(inner.iter().all(|&(r, _)| (1..5).contains(&r)));
        assert!(LayoutStrategy::new(
            code(4, 4),
            3,
            Placement::Gini {
                reserved_rows: [3].into_iter().collect()
            }
        )
        .is_err());
    }

    #[test]
    fn zigzag_rank_order() {
        let order: Vec<usize> = (0..7).map(|k| row_for_rank(k, 7)).collect();
        assert_eq!(order, [6, 0, 5, 1, 4, 2, 3]);
    }

    #[test]
    fn dnamapper_first_bits_land_in_last_base_of_last_row() {
        // m=4: rows of 2 bases; M = 11 data columns
        let c = code(4, 4);
        let s = dnamapper(c, 3, &[3 * 11 * 4]);
        let mut payload = vec![0u8; 3 * 11 * 4 / 8 + 1];
        // first 2M = 22 bits set
        for b in 0..22 {
            set_bit(&mut payload, b, true);
        }
        let matrix = s.build_matrix(&payload[..(3 * 11 * 4) / 8]).unwrap();
        for col in 0..11 {
            // last row, low two bits = last base
            assert_eq!(matrix.get(2, col), 0b0011);
            assert_eq!(matrix.get(0, col), 0);
        }
    }

    #[test]
    fn zero_payload_gives_zero_matrix() {
        let c = code(8, 47);
        for s in [
            LayoutStrategy::baseline(c.clone(), 5).unwrap(),
            LayoutStrategy::gini(c.clone(), 5).unwrap(),
        ] {
            let matrix = s.build_matrix(&[]).unwrap();
            assert!(matrix.cells.iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn capacity_error_reports_bits() {
        let s = LayoutStrategy::baseline(code(4, 4), 2).unwrap();
        // 2 * 11 * 4 = 88 bits = 11 bytes
        assert!(s.build_matrix(&[0; 11]).is_ok());
        match s.build_matrix(&[0; 12]) {
            Err(Error::Capacity { requested, capacity }) => {
                assert_eq!((requested, capacity), (96, 88));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn baseline_fills_column_major() {
        let s = LayoutStrategy::baseline(code(8, 47), 3).unwrap();
        let matrix = s.build_matrix(&[1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(matrix.column(0), vec![1, 2, 3]);
        assert_eq!(matrix.column(1), vec![4, 5, 6]);
    }

    #[test]
    fn gini_fills_codeword_major_along_diagonals() {
        let s = LayoutStrategy::gini(code(8, 47), 3).unwrap();
        let matrix = s.build_matrix(&[1, 2, 3, 4]).unwrap();
        assert_eq!(matrix.get(0, 0), 1);
        assert_eq!(matrix.get(1, 1), 2);
        assert_eq!(matrix.get(2, 2), 3);
        assert_eq!(matrix.get(0, 3), 4);
    }

    #[test]
    fn parity_stays_in_parity_columns() {
        let c = code(8, 47);
        let payload = random_bytes(3 * 208, 3);
        for s in [
            LayoutStrategy::baseline(c.clone(), 3).unwrap(),
            LayoutStrategy::gini(c.clone(), 3).unwrap(),
            dnamapper(c.clone(), 3, &[3 * 208 * 8]),
        ] {
            let matrix = s.build_matrix(&payload).unwrap();
            for cw in 0..3 {
                let cells = s.codeword_cells(cw).unwrap();
                let symbols: Vec<Symbol> = cells.iter().map(|&(r, col)| matrix.get(r, col)).collect();
                assert!(c.syndromes(&symbols).iter().all(|&x| x == 0), "{}", s.name());
                assert!(cells[208..].iter().all(|&(_, col)| col >= 208));
            }
        }
    }

    #[test]
    fn dropped_column_is_one_erasure_per_codeword() {
        let c = code(4, 4);
        let rows = 6;
        for s in [
            LayoutStrategy::baseline(c.clone(), rows).unwrap(),
            LayoutStrategy::gini(c.clone(), rows).unwrap(),
            gini_reserved(c.clone(), rows, &[0, 5]),
        ] {
            for dropped in 0..15 {
                let mut counts = vec![0; rows];
                for r in 0..rows {
                    let (cw, j) = s.cell_owner(r, dropped).unwrap();
                    assert_eq!(j, dropped);
                    counts[cw] += 1;
                }
                assert_eq!(counts, vec![1; rows]);
            }
        }
    }

    #[test]
    fn strands_round_trip_through_matrix() {
        let c = code(8, 47);
        let s = LayoutStrategy::gini(c, 4).unwrap();
        let matrix = s.build_matrix(&random_bytes(500, 4)).unwrap();
        let layout = StrandLayout::new(8, 4).unwrap();
        let strands = s.matrix_to_strands(&matrix, &layout).unwrap();
        assert_eq!(strands.len(), 255);
        let mut columns = BTreeMap::new();
        for st in &strands {
            assert_eq!(st.bases.len(), 20 + 4 + 16 + 20);
            let (k, payload) = crate::codec::parse_strand(&layout, &st.bases).unwrap();
            columns.insert(k, payload);
        }
        let received = s.strands_to_matrix(&columns).unwrap();
        assert!(received.erased_columns().is_empty());
        assert_eq!(received, matrix);
        assert!(s.matrix_to_strands(&matrix, &StrandLayout::new(8, 5).unwrap()).is_err());
    }

    #[test]
    fn noiseless_recovery_reports_zero_corrections() {
        let c = code(8, 47);
        let s = LayoutStrategy::baseline(c, 4).unwrap();
        let payload = random_bytes(4 * 208, 5);
        let matrix = s.build_matrix(&payload).unwrap();
        let rec = s.recover_payload(&matrix);
        assert_eq!(rec.payload, payload);
        assert!(rec.report.iter().all(|st| st.outcome == Ok(0)));
    }

    #[test]
    fn concentrated_middle_errors_fail_only_middle_row() {
        let c = code(8, 47);
        let s = LayoutStrategy::baseline(c, 5).unwrap();
        let payload = random_bytes(5 * 208, 6);
        let sent = s.build_matrix(&payload).unwrap();
        let mut received = sent.clone();
        for col in 0..40 {
            received.set(2, col * 6, received.get(2, col * 6) ^ 0x5A);
        }
        for col in 0..10 {
            received.set(0, col * 3, received.get(0, col * 3) ^ 1);
            received.set(4, col * 5, received.get(4, col * 5) ^ 2);
        }
        let rec = s.recover_payload(&received);
        let failed: Vec<usize> = rec.report.iter().filter(|st| !st.ok()).map(|st| st.codeword).collect();
        assert_eq!(failed, vec![2]);
        assert_eq!(s.errors_per_codeword(&sent, &received), vec![10, 0, 40, 0, 10]);
        // same physical damage under Gini spreads over all codewords
        let g = LayoutStrategy::gini(code(8, 47), 5).unwrap();
        let per = g.errors_per_codeword(&sent, &received);
        assert_eq!(per.iter().sum::<usize>(), 60);
        assert!(per.iter().all(|&e| e < 40));
    }

    #[test]
    fn dump_has_header_and_rows() {
        let s = LayoutStrategy::baseline(code(4, 4), 2).unwrap();
        let matrix = s.build_matrix(&[0xAB]).unwrap();
        let dump = s.dump_csv(&matrix);
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("# strategy=baseline m=4 K=15 M=11 E=4 R=2"));
        assert!(lines[1].starts_with("a,"));
        assert!(lines[2].starts_with("b,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn payload_round_trip_all_strategies(seed in any::<u64>(), rows in 1usize..6, len_frac in 0.0f64..1.0) {
            let c = code(8, 47);
            let cap_bytes = rows * 208;
            let len = (cap_bytes as f64 * len_frac) as usize;
            let payload = random_bytes(len, seed);
            for s in [
                LayoutStrategy::baseline(c.clone(), rows).unwrap(),
                LayoutStrategy::gini(c.clone(), rows).unwrap(),
                dnamapper(c.clone(), rows, &[len * 8]),
            ] {
                let matrix = s.build_matrix(&payload).unwrap();
                let rec = s.recover_payload(&matrix);
                prop_assert_eq!(&rec.payload[..len], &payload[..]);
            }
        }

        #[test]
        fn dropped_columns_within_parity_recover(seed in any::<u64>(), drop in 0usize..=47) {
            use rand::{seq::index::sample, SeedableRng};
            let c = code(8, 47);
            let payload = random_bytes(3 * 208, seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let dropped = sample(&mut rng, 255, drop).into_vec();
            for s in [LayoutStrategy::baseline(c.clone(), 3).unwrap(), LayoutStrategy::gini(c.clone(), 3).unwrap()] {
                let matrix = s.build_matrix(&payload).unwrap();
                let columns: BTreeMap<usize, Vec<Symbol>> = (0..255)
                    .filter(|k| !dropped.contains(k))
                    .map(|k| (k, matrix.column(k)))
                    .collect();
                let received = s.strands_to_matrix(&columns).unwrap();
                prop_assert_eq!(received.erased_columns().len(), drop);
                let rec = s.recover_payload(&received);
                prop_assert!(rec.success());
                prop_assert_eq!(&rec.payload[..], &payload[..]);
            }
        }

        #[test]
        fn few_row_errors_are_corrected(seed in any::<u64>(), errors in 0usize..=23) {
            use rand::{seq::index::sample, Rng, SeedableRng};
            let c = code(8, 47);
            let s = LayoutStrategy::baseline(c, 3).unwrap();
            let payload = random_bytes(3 * 208, seed);
            let sent = s.build_matrix(&payload).unwrap();
            let mut received = sent.clone();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 1);
            for col in sample(&mut rng, 255, errors) {
                let v = received.get(1, col) ^ rng.random_range(1..256u16);
                received.set(1, col, v);
            }
            let rec = s.recover_payload(&received);
            prop_assert!(rec.success());
            prop_assert_eq!(&rec.payload[..], &payload[..]);
        }
    }
}
