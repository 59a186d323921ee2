//! Bit-priority ranking and the directory file.
//!
//! Payload bits are assigned to reliability classes (class 0 is the most
//! reliable). Every file gets a share of each class proportional to its size,
//! earlier bits of a file landing in better classes. The directory, when
//! present, is placed first and takes the best slots whole.

use std::ops::Range;

use rayon::prelude::*;

use crate::bits::flip_bit;
use crate::error::{Error, Result};
use crate::quality::QualityResult;

/// Position of one payload bit: reliability class and slot within it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slot {
    pub class: u32,
    pub pos: u32,
}

/// Assignment of every payload bit to a reliability slot.
///
/// Payload bit order is the directory (if any) followed by each file in
/// order, MSB first within each byte.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitRanking {
    class_capacities: Vec<usize>,
    assignment: Vec<Slot>,
    /// Payload bit range of each file, directory first when present.
    spans: Vec<Range<usize>>,
    has_directory: bool,
}

impl BitRanking {
    pub fn class_count(&self) -> usize {
        self.class_capacities.len()
    }

    pub fn class_capacities(&self) -> &[usize] {
        &self.class_capacities
    }

    pub fn total_capacity(&self) -> usize {
        self.class_capacities.iter().sum()
    }

    /// Number of payload bits covered.
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn slot(&self, bit: usize) -> Slot {
        self.assignment[bit]
    }

    pub fn assignment(&self) -> &[Slot] {
        &self.assignment
    }

    pub fn spans(&self) -> &[Range<usize>] {
        &self.spans
    }

    pub fn has_directory(&self) -> bool {
        self.has_directory
    }

    /// Bits of `file` (an index into [`spans`](Self::spans)) that land in
    /// each class.
    pub fn file_class_shares(&self, file: usize) -> Vec<usize> {
        let mut shares = vec![0; self.class_count()];
        for slot in &self.assignment[self.spans[file].clone()] {
            shares[slot.class as usize] += 1;
        }
        shares
    }

    /// Reassigns one file's slots by an explicit importance order:
    /// `order[t]` is the file-relative bit index with the `t`-th highest
    /// priority. The file keeps the same set of slots.
    pub fn with_file_priority(mut self, file: usize, order: &[usize]) -> Result<Self> {
        let span = self
            .spans
            .get(file)
            .cloned()
            .ok_or_else(|| Error::Argument(format!("no file {file} in ranking")))?;
        if order.len() != span.len() {
            return Err(Error::Argument(format!(
                "priority order has {} entries for a file of {} bits",
                order.len(),
                span.len()
            )));
        }
        let mut seen = vec![false; span.len()];
        for &b in order {
            if b >= span.len() || std::mem::replace(&mut seen[b], true) {
                return Err(Error::Argument("priority order is not a permutation".into()));
            }
        }
        // slots of this file from best to worst
        let mut slots: Vec<Slot> = self.assignment[span.clone()].to_vec();
        slots.sort_by_key(|s| (s.class, s.pos));
        for (t, &b) in order.iter().enumerate() {
            self.assignment[span.start + b] = slots[t];
        }
        Ok(self)
    }
}

/// Ranks payload bits by position within each file.
///
/// `file_bits` are the sizes of the regular files, `directory_bits` the size
/// of the directory if one is stored (placed before all files in the
/// payload). Class capacities are in bits, best class first.
pub fn rank_bits_positional(
    file_bits: &[usize],
    class_capacities: &[usize],
    directory_bits: Option<usize>,
) -> Result<BitRanking> {
    let dir = directory_bits.unwrap_or(0);
    let total_files: usize = file_bits.iter().sum();
    let capacity: usize = class_capacities.iter().sum();
    if dir + total_files > capacity {
        return Err(Error::Capacity {
            requested: dir + total_files,
            capacity,
        });
    }

    let mut spans = Vec::with_capacity(file_bits.len() + 1);
    let mut cursor = 0;
    if directory_bits.is_some() {
        spans.push(0..dir);
        cursor = dir;
    }
    for &b in file_bits {
        spans.push(cursor..cursor + b);
        cursor += b;
    }
    let mut assignment = vec![Slot { class: 0, pos: 0 }; cursor];

    // directory carved out of the best classes first
    let mut used = vec![0usize; class_capacities.len()];
    let mut dir_next = 0;
    for (class, &cap) in class_capacities.iter().enumerate() {
        while dir_next < dir && used[class] < cap {
            assignment[dir_next] = Slot {
                class: class as u32,
                pos: used[class] as u32,
            };
            used[class] += 1;
            dir_next += 1;
        }
    }

    let shares = proportional_shares(file_bits, class_capacities, &used);
    let first_file = usize::from(directory_bits.is_some());
    let mut next_bit: Vec<usize> = spans[first_file..].iter().map(|s| s.start).collect();
    for (class, class_shares) in shares.iter().enumerate() {
        for (f, &share) in class_shares.iter().enumerate() {
            for _ in 0..share {
                assignment[next_bit[f]] = Slot {
                    class: class as u32,
                    pos: used[class] as u32,
                };
                used[class] += 1;
                next_bit[f] += 1;
            }
        }
    }
    debug_assert!(next_bit.iter().zip(&spans[first_file..]).all(|(n, s)| *n == s.end));

    Ok(BitRanking {
        class_capacities: class_capacities.to_vec(),
        assignment,
        spans,
        has_directory: directory_bits.is_some(),
    })
}

/// Splits each class's free capacity among files in proportion to file size.
///
/// Classes are filled best-first until all file bits are placed. Within a
/// class, each file receives the floor of its exact share and the leftover
/// slots go to the files with the largest accumulated shortfall (ties by file
/// order), which keeps every file's running total within one slot of exact
/// proportion and makes the totals come out exact.
fn proportional_shares(file_bits: &[usize], capacities: &[usize], used: &[usize]) -> Vec<Vec<usize>> {
    let total: u128 = file_bits.iter().map(|&b| b as u128).sum();
    let mut remaining_total = total;
    let mut remaining: Vec<u128> = file_bits.iter().map(|&b| b as u128).collect();
    // running (allocated * total - exact numerator), i.e. surplus scaled by total
    let mut surplus: Vec<i128> = vec![0; file_bits.len()];
    let mut out = Vec::with_capacity(capacities.len());
    for (class, &cap) in capacities.iter().enumerate() {
        let free = (cap - used[class]) as u128;
        let fill = free.min(remaining_total);
        let mut shares = vec![0usize; file_bits.len()];
        if fill > 0 {
            if fill == remaining_total {
                // last class in use: whatever is left
                for (f, s) in shares.iter_mut().enumerate() {
                    *s = remaining[f] as usize;
                }
            } else {
                let mut assigned = 0u128;
                let mut candidates = Vec::with_capacity(file_bits.len());
                for (f, &bits) in file_bits.iter().enumerate() {
                    let num = fill * bits as u128;
                    let floor = (num / total).min(remaining[f]);
                    shares[f] = floor as usize;
                    assigned += floor;
                    let after_floor = surplus[f] + (floor * total) as i128 - num as i128;
                    candidates.push((after_floor, f));
                }
                candidates.sort();
                let mut extra = fill - assigned;
                for &(_, f) in &candidates {
                    if extra == 0 {
                        break;
                    }
                    if (shares[f] as u128) < remaining[f] {
                        shares[f] += 1;
                        extra -= 1;
                    }
                }
                debug_assert_eq!(extra, 0);
            }
            for (f, &bits) in file_bits.iter().enumerate() {
                surplus[f] += (shares[f] as u128 * total) as i128 - (fill * bits as u128) as i128;
                remaining[f] -= shares[f] as u128;
            }
            remaining_total -= fill;
        }
        out.push(shares);
    }
    out
}

/// Ranks the bits of one file by the damage a single flip causes.
///
/// Returns bit indices sorted by descending loss, undecodable results first,
/// ties by ascending index.
pub fn rank_bits_oracle<F>(file: &[u8], quality_fn: F) -> Vec<usize>
where
    F: Fn(&[u8]) -> QualityResult + Sync,
{
    let losses = flip_losses(file, (0..file.len() * 8).collect(), &quality_fn);
    let mut order: Vec<usize> = (0..file.len() * 8).collect();
    order.sort_by(|&a, &b| losses[b].sort_key().total_cmp(&losses[a].sort_key()).then(a.cmp(&b)));
    order
}

/// Quality of the file with each listed bit flipped, one flip at a time.
pub fn flip_losses<F>(file: &[u8], positions: Vec<usize>, quality_fn: &F) -> Vec<QualityResult>
where
    F: Fn(&[u8]) -> QualityResult + Sync,
{
    positions
        .into_par_iter()
        .map_init(
            || file.to_vec(),
            |buf, bit| {
                flip_bit(buf, bit);
                let q = quality_fn(buf);
                flip_bit(buf, bit);
                q
            },
        )
        .collect()
}

/// One record of the directory file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirEntry {
    pub name: String,
    pub size: u64,
}

/// Serializes a directory: `u16` record count, then per record a `u16` name
/// length, the UTF-8 name and a `u64` size, all big-endian.
pub fn pack_directory(entries: &[DirEntry]) -> Result<Vec<u8>> {
    if entries.len() > u16::MAX as usize {
        return Err(Error::Argument(format!(
            "{} directory entries exceed the limit of {}",
            entries.len(),
            u16::MAX
        )));
    }
    let mut out = Vec::new();
    out.extend_from_slice(&(entries.len() as u16).to_be_bytes());
    for e in entries {
        let name = e.name.as_bytes();
        if name.len() > u16::MAX as usize {
            return Err(Error::Argument(format!(
                "file name of {} bytes exceeds {}",
                name.len(),
                u16::MAX
            )));
        }
        out.extend_from_slice(&(name.len() as u16).to_be_bytes());
        out.extend_from_slice(name);
        out.extend_from_slice(&e.size.to_be_bytes());
    }
    Ok(out)
}

/// Parses a directory from the front of `bytes`, returning the entries and
/// the number of bytes consumed.
pub fn parse_directory_prefix(bytes: &[u8]) -> Result<(Vec<DirEntry>, usize)> {
    fn take<'a>(bytes: &'a [u8], offset: &mut usize, n: usize, what: &str) -> Result<&'a [u8]> {
        let chunk = bytes.get(*offset..*offset + n).ok_or_else(|| Error::Directory {
            offset: *offset,
            reason: format!("truncated {what}"),
        })?;
        *offset += n;
        Ok(chunk)
    }
    let mut offset = 0;
    let count = u16::from_be_bytes(take(bytes, &mut offset, 2, "record count")?.try_into().unwrap());
    let mut entries = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let len = u16::from_be_bytes(take(bytes, &mut offset, 2, "name length")?.try_into().unwrap());
        let name_at = offset;
        let name = take(bytes, &mut offset, len as usize, "name")?;
        let name = std::str::from_utf8(name).map_err(|e| Error::Directory {
            offset: name_at + e.valid_up_to(),
            reason: "name is not UTF-8".into(),
        })?;
        let size = u64::from_be_bytes(take(bytes, &mut offset, 8, "size")?.try_into().unwrap());
        entries.push(DirEntry {
            name: name.to_string(),
            size,
        });
    }
    Ok((entries, offset))
}

/// Parses a complete directory; trailing bytes are an error.
pub fn unpack_directory(bytes: &[u8]) -> Result<Vec<DirEntry>> {
    let (entries, used) = parse_directory_prefix(bytes)?;
    if used != bytes.len() {
        return Err(Error::Directory {
            offset: used,
            reason: format!("{} trailing bytes", bytes.len() - used),
        });
    }
    Ok(entries)
}
