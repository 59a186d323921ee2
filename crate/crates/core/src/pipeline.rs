//! End-to-end storage pipeline: files to strands and back.
//!
//! All files go into one encoding unit. The payload is the packed directory
//! followed by every file in order; the chosen layout places it in the
//! matrix. A JSON manifest records the geometry and file table so the unit
//! can be decoded later from a reads file.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{make_clusters, ChannelConfig, Cluster, CoverageModel};
use crate::codec::{read_strands, write_strands, Strand, StrandLayout};
use crate::consensus::{one_way, two_way, ReconstructionParams, Reconstructor};
use crate::error::{Error, Result};
use crate::gf::Symbol;
use crate::layout::{EncodingMatrix, LayoutStrategy, Placement, Recovery};
use crate::priority::{pack_directory, parse_directory_prefix, rank_bits_positional, DirEntry};
use crate::quality::{QualityProbe, QualityResult, DEFAULT_REF_DB};
use crate::rs::CodeSpec;

pub const MANIFEST_SCHEMA: u32 = 1;
pub const STRANDS_FILE: &str = "strands.txt";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "report.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Baseline,
    Gini,
    DnaMapper,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Baseline, Strategy::Gini, Strategy::DnaMapper];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Baseline => "baseline",
            Strategy::Gini => "gini",
            Strategy::DnaMapper => "dnamapper",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Argument(format!("unknown strategy {s:?} (baseline, gini, dnamapper)")))
    }
}

/// Matrix geometry shared by encoder and decoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Symbol width in bits; `K = 2^m - 1` columns.
    pub m: u32,
    /// Rows `R`, one codeword each.
    pub rows: usize,
    /// Parity fraction `E / K`.
    pub redundancy: f64,
    /// Rows kept as plain row codewords under Gini.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reserved_rows: Vec<usize>,
}

impl Default for Geometry {
    fn default() -> Self {
        Self::desk()
    }
}

impl Geometry {
    /// 255 strands of 21 symbols, 18.4% parity.
    pub fn desk() -> Self {
        Self {
            m: 8,
            rows: 21,
            redundancy: 0.184,
            reserved_rows: Vec::new(),
        }
    }

    /// 65535 strands of 82 symbols. Roughly 8.7 MB of data per unit and
    /// minutes per trial.
    pub fn full() -> Self {
        Self {
            m: 16,
            rows: 82,
            ..Self::desk()
        }
    }

    pub fn parity(&self) -> usize {
        CodeSpec::parity_for_fraction(self.m, self.redundancy)
    }

    pub fn code(&self) -> Result<CodeSpec> {
        if !(0.0..1.0).contains(&self.redundancy) {
            return Err(Error::Argument(format!(
                "redundancy must be in [0, 1), got {}",
                self.redundancy
            )));
        }
        CodeSpec::with_parity(self.m, self.parity())
    }

    pub fn strand_layout(&self) -> Result<StrandLayout> {
        StrandLayout::new(self.m, self.rows)
    }

    pub fn capacity_bits(&self) -> Result<usize> {
        Ok(self.rows * self.code()?.data_len() * self.m as usize)
    }

    /// Layout for `strategy`. DnaMapper needs the file table to rank bits.
    pub fn layout(&self, strategy: Strategy, files: &[DirEntry]) -> Result<LayoutStrategy> {
        let code = self.code()?;
        let placement = match strategy {
            Strategy::Baseline => Placement::Baseline,
            Strategy::Gini => Placement::Gini {
                reserved_rows: self.reserved_rows.iter().copied().collect(),
            },
            Strategy::DnaMapper => {
                let per_class = code.data_len() * self.m as usize;
                let directory = pack_directory(files)?;
                let file_bits: Vec<usize> = files.iter().map(|f| f.size as usize * 8).collect();
                let ranking = rank_bits_positional(&file_bits, &vec![per_class; self.rows], Some(directory.len() * 8))?;
                Placement::DnaMapper { ranking }
            }
        };
        LayoutStrategy::new(code, self.rows, placement)
    }
}

/// A named file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputFile {
    pub name: String,
    pub data: Vec<u8>,
}

impl InputFile {
    pub fn new(name: impl Into<String>, data: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            data,
        }
    }

    pub fn entry(&self) -> DirEntry {
        DirEntry {
            name: self.name.clone(),
            size: self.data.len() as u64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub name: String,
    pub size: u64,
}

/// Everything needed to decode a unit besides the reads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub geometry: Geometry,
    pub strategy: Strategy,
    pub primer5: String,
    pub primer3: String,
    pub files: Vec<ManifestFile>,
    /// SHA-256 over geometry, strategy, primers and file table.
    pub layout_hash: String,
}

impl Manifest {
    fn new(geometry: &Geometry, strategy: Strategy, strand_layout: &StrandLayout, files: &[DirEntry]) -> Self {
        let mut manifest = Self {
            schema: MANIFEST_SCHEMA,
            geometry: geometry.clone(),
            strategy,
            primer5: String::from_utf8_lossy(&strand_layout.primer5).into_owned(),
            primer3: String::from_utf8_lossy(&strand_layout.primer3).into_owned(),
            files: files
                .iter()
                .map(|e| ManifestFile {
                    name: e.name.clone(),
                    size: e.size,
                })
                .collect(),
            layout_hash: String::new(),
        };
        manifest.layout_hash = manifest.compute_hash();
        manifest
    }

    fn compute_hash(&self) -> String {
        let mut unhashed = self.clone();
        unhashed.layout_hash.clear();
        let bytes = serde_json::to_vec(&unhashed).expect("manifest serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn entries(&self) -> Vec<DirEntry> {
        self.files
            .iter()
            .map(|f| DirEntry {
                name: f.name.clone(),
                size: f.size,
            })
            .collect()
    }

    pub fn strand_layout(&self) -> Result<StrandLayout> {
        StrandLayout::with_primers(self.geometry.m, self.geometry.rows, &self.primer5, &self.primer3)
    }

    pub fn layout(&self) -> Result<LayoutStrategy> {
        self.geometry.layout(self.strategy, &self.entries())
    }

    /// Checks schema and hash.
    pub fn validate(&self) -> Result<()> {
        if self.schema != MANIFEST_SCHEMA {
            return Err(Error::Parse(format!(
                "manifest schema {} is not supported (expected {MANIFEST_SCHEMA})",
                self.schema
            )));
        }
        if self.layout_hash != self.compute_hash() {
            return Err(Error::Parse("manifest layout hash does not match its contents".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "parsing manifest".into(),
            source,
        })?;
        manifest.validate()?;
        Ok(manifest)
    }
}

/// One encoded unit held in memory.
#[derive(Clone, Debug)]
pub struct EncodedUnit {
    pub manifest: Manifest,
    pub layout: LayoutStrategy,
    pub strand_layout: StrandLayout,
    pub payload: Vec<u8>,
    pub matrix: EncodingMatrix,
    pub strands: Vec<Strand>,
}

fn check_files(files: &[InputFile]) -> Result<()> {
    if files.is_empty() {
        return Err(Error::Argument("nothing to encode: the file list is empty".into()));
    }
    let mut names = std::collections::BTreeSet::new();
    for f in files {
        if !names.insert(f.name.as_str()) {
            return Err(Error::Argument(format!("duplicate file name {:?}", f.name)));
        }
    }
    Ok(())
}

/// Directory followed by every file.
pub fn assemble_payload(files: &[InputFile]) -> Result<Vec<u8>> {
    let entries: Vec<DirEntry> = files.iter().map(InputFile::entry).collect();
    let mut payload = pack_directory(&entries)?;
    for f in files {
        payload.extend_from_slice(&f.data);
    }
    Ok(payload)
}

/// Encodes `files` into one unit.
pub fn encode_files(files: &[InputFile], geometry: &Geometry, strategy: Strategy) -> Result<EncodedUnit> {
    check_files(files)?;
    let entries: Vec<DirEntry> = files.iter().map(InputFile::entry).collect();
    let payload = assemble_payload(files)?;
    let capacity = geometry.capacity_bits()?;
    if payload.len() * 8 > capacity {
        return Err(Error::Capacity {
            requested: payload.len() * 8,
            capacity,
        });
    }
    let layout = geometry.layout(strategy, &entries)?;
    encode_with_layout(files, geometry, layout)
}

/// Encodes with a DnaMapper ranking in which file `file` (index into
/// `files`) follows an explicit bit priority order, best first.
pub fn encode_files_with_priority(
    files: &[InputFile],
    geometry: &Geometry,
    file: usize,
    order: &[usize],
) -> Result<EncodedUnit> {
    let base = encode_files(files, geometry, Strategy::DnaMapper)?;
    let Placement::DnaMapper { ranking } = base.layout.placement().clone() else {
        unreachable!("DnaMapper strategy builds a ranking")
    };
    // span 0 is the directory
    let ranking = ranking.with_file_priority(file + 1, order)?;
    let layout = LayoutStrategy::new(geometry.code()?, geometry.rows, Placement::DnaMapper { ranking })?;
    encode_with_layout(files, geometry, layout)
}

fn encode_with_layout(files: &[InputFile], geometry: &Geometry, layout: LayoutStrategy) -> Result<EncodedUnit> {
    let entries: Vec<DirEntry> = files.iter().map(InputFile::entry).collect();
    let payload = assemble_payload(files)?;
    let strand_layout = geometry.strand_layout()?;
    let strategy = Strategy::from_str(layout.name())?;
    let matrix = layout.build_matrix(&payload)?;
    let strands = layout.matrix_to_strands(&matrix, &strand_layout)?;
    Ok(EncodedUnit {
        manifest: Manifest::new(geometry, strategy, &strand_layout, &entries),
        layout,
        strand_layout,
        payload,
        matrix,
        strands,
    })
}

/// Consensus for every non-empty cluster, keyed by the index read back
/// from the reconstructed strand. Strands whose index is out of range are
/// dropped; if two strands claim the same index the first cluster wins.
pub fn reconstruct_columns(
    clusters: &[Cluster],
    strand_layout: &StrandLayout,
    reconstructor: Reconstructor,
) -> Result<BTreeMap<usize, Vec<Symbol>>> {
    use rayon::prelude::*;
    let params = ReconstructionParams::new(strand_layout.core_len());
    let parsed: Vec<Option<(usize, Vec<Symbol>)>> = clusters
        .par_iter()
        .map(|c| {
            if c.reads.is_empty() {
                return Ok(None);
            }
            let core = match reconstructor {
                Reconstructor::OneWay => one_way(&c.reads, &params)?,
                Reconstructor::TwoWay => two_way(&c.reads, &params)?,
                Reconstructor::Oracle => {
                    return Err(Error::Argument(
                        "the oracle reconstructor needs the original strand".into(),
                    ))
                }
            };
            Ok(strand_layout.parse_core(&core).ok())
        })
        .collect::<Result<_>>()?;
    let mut columns = BTreeMap::new();
    for (k, symbols) in parsed.into_iter().flatten() {
        columns.entry(k).or_insert(symbols);
    }
    Ok(columns)
}

/// Files read back from a unit.
#[derive(Clone, Debug)]
pub struct Retrieval {
    pub recovery: Recovery,
    pub files: Vec<InputFile>,
    /// Whether the stored directory decoded and matched the manifest.
    pub directory_ok: bool,
}

impl Retrieval {
    pub fn success(&self) -> bool {
        self.recovery.success()
    }
}

/// Decodes a received matrix and splits the payload into files.
///
/// The stored directory is used when it parses and agrees with the
/// manifest; otherwise the manifest's table is used.
pub fn retrieve(layout: &LayoutStrategy, manifest: &Manifest, matrix: &EncodingMatrix) -> Result<Retrieval> {
    let recovery = layout.recover_payload(matrix);
    let expected = manifest.entries();
    let directory_len = pack_directory(&expected)?.len();
    let directory_ok = matches!(
        parse_directory_prefix(&recovery.payload),
        Ok((entries, used)) if entries == expected && used == directory_len
    );
    let mut offset = directory_len;
    let mut files = Vec::with_capacity(expected.len());
    for e in &expected {
        let end = offset + e.size as usize;
        let data = recovery
            .payload
            .get(offset..end)
            .ok_or_else(|| Error::Argument(format!("file table of manifest overruns payload at {:?}", e.name)))?
            .to_vec();
        files.push(InputFile::new(e.name.clone(), data));
        offset = end;
    }
    Ok(Retrieval {
        recovery,
        files,
        directory_ok,
    })
}

/// Reconstructs clusters, erases the last `erase_last` columns, decodes.
pub fn decode_clusters(
    layout: &LayoutStrategy,
    manifest: &Manifest,
    clusters: &[Cluster],
    reconstructor: Reconstructor,
    erase_last: usize,
) -> Result<Retrieval> {
    let strand_layout = manifest.strand_layout()?;
    let mut columns = reconstruct_columns(clusters, &strand_layout, reconstructor)?;
    let cols = layout.cols();
    columns.retain(|&k, _| k + erase_last < cols);
    let matrix = layout.strands_to_matrix(&columns)?;
    retrieve(layout, manifest, &matrix)
}

/// One simulated storage round: sequence, reconstruct, decode.
pub fn simulate(
    unit: &EncodedUnit,
    channel: &ChannelConfig,
    coverage: &CoverageModel,
    trial: u64,
    erase_last: usize,
) -> Result<Retrieval> {
    let clusters = make_clusters(&unit.strands, &unit.strand_layout, channel, coverage, trial)?;
    decode_clusters(
        &unit.layout,
        &unit.manifest,
        &clusters,
        Reconstructor::TwoWay,
        erase_last,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodewordReport {
    pub codeword: usize,
    pub erasures: usize,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileReport {
    pub name: String,
    pub size: u64,
    /// Byte-exact against the original, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undecodable: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub strategy: Strategy,
    pub success: bool,
    pub failed_codewords: usize,
    pub directory_ok: bool,
    pub codewords: Vec<CodewordReport>,
    pub files: Vec<FileReport>,
}

/// Quality of a retrieved file if the original is a decodable JPEG.
pub fn file_quality(original: &[u8], retrieved: &[u8], ref_db: f64) -> Option<QualityResult> {
    QualityProbe::new(original, ref_db).ok().map(|p| p.evaluate(retrieved))
}

impl DecodeReport {
    /// `originals` enables byte comparison and JPEG quality per file.
    pub fn new(strategy: Strategy, retrieval: &Retrieval, originals: Option<&[InputFile]>, ref_db: f64) -> Self {
        let codewords = retrieval
            .recovery
            .report
            .iter()
            .map(|s| CodewordReport {
                codeword: s.codeword,
                erasures: s.erasures,
                ok: s.ok(),
                corrected: s.outcome.as_ref().ok().copied(),
                failure: s.outcome.as_ref().err().map(|e| format!("{e:?}")),
            })
            .collect();
        let files = retrieval
            .files
            .iter()
            .map(|f| {
                let original = originals.and_then(|o| o.iter().find(|x| x.name == f.name));
                let quality = original.and_then(|o| file_quality(&o.data, &f.data, ref_db));
                FileReport {
                    name: f.name.clone(),
                    size: f.data.len() as u64,
                    exact: original.map(|o| o.data == f.data),
                    loss_db: quality.and_then(|q| q.loss_db()),
                    undecodable: quality.map(|q| q.is_undecodable()),
                }
            })
            .collect();
        Self {
            strategy,
            success: retrieval.success(),
            failed_codewords: retrieval.recovery.failed_codewords(),
            directory_ok: retrieval.directory_ok,
            codewords,
            files,
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn write_file(path: &Path, data: &[u8]) -> Result<()> {
    fs::write(path, data).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

/// Loads files from disk, naming each by its final path component.
pub fn load_files(paths: &[PathBuf]) -> Result<Vec<InputFile>> {
    paths
        .iter()
        .map(|p| {
            let name = p
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| Error::Argument(format!("{} has no usable file name", p.display())))?;
            Ok(InputFile::new(name, read_file(p)?))
        })
        .collect()
}

/// Encodes files on disk into `out/strands.txt` and `out/manifest.json`.
pub fn cmd_encode(paths: &[PathBuf], strategy: Strategy, geometry: &Geometry, out: &Path) -> Result<Manifest> {
    let files = load_files(paths)?;
    let unit = encode_files(&files, geometry, strategy)?;
    create_dir(out)?;
    let strands_path = out.join(STRANDS_FILE);
    let file =
        fs::File::create(&strands_path).map_err(|e| Error::io(format!("creating {}", strands_path.display()), e))?;
    let mut w = BufWriter::new(file);
    write_strands(&mut w, &unit.strands)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(format!("writing {}", strands_path.display()), e))?;
    write_file(&out.join(MANIFEST_FILE), unit.manifest.to_json().as_bytes())?;
    Ok(unit.manifest)
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text =
        String::from_utf8(read_file(path)?).map_err(|_| Error::Parse(format!("{} is not UTF-8", path.display())))?;
    Manifest::from_json(&text)
}

/// Where `cmd_decode` gets its reads.
#[derive(Clone, Debug)]
pub enum ReadSource {
    /// `cluster_id<TAB>sequence` lines of primer-free reads.
    Reads(PathBuf),
    /// Sequence a strands file through the simulated channel.
    Simulate {
        strands: PathBuf,
        channel: ChannelConfig,
        coverage: CoverageModel,
        trial: u64,
    },
}

#[derive(Clone, Debug)]
pub struct DecodeOptions {
    pub reconstructor: Reconstructor,
    pub erase_last: usize,
    pub ref_db: f64,
    /// Directory holding the original files, for exactness and quality.
    pub originals: Option<PathBuf>,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            reconstructor: Reconstructor::TwoWay,
            erase_last: 0,
            ref_db: DEFAULT_REF_DB,
            originals: None,
        }
    }
}

/// Decodes a unit, writes the recovered files and `report.json` into `out`.
/// Decoding failures are recorded in the report, not returned as errors.
pub fn cmd_decode(
    source: &ReadSource,
    manifest_path: &Path,
    out: &Path,
    options: &DecodeOptions,
) -> Result<DecodeReport> {
    let manifest = load_manifest(manifest_path)?;
    let layout = manifest.layout()?;
    let strand_layout = manifest.strand_layout()?;
    let clusters = match source {
        ReadSource::Reads(path) => {
            let file = fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
            crate::channel::read_reads(BufReader::new(file))?
        }
        ReadSource::Simulate {
            strands,
            channel,
            coverage,
            trial,
        } => {
            let file = fs::File::open(strands).map_err(|e| Error::io(format!("opening {}", strands.display()), e))?;
            let strands = read_strands(BufReader::new(file))?;
            if strands.len() != layout.cols() {
                return Err(Error::Argument(format!(
                    "strand file has {} strands, manifest geometry needs {}",
                    strands.len(),
                    layout.cols()
                )));
            }
            make_clusters(&strands, &strand_layout, channel, coverage, *trial)?
        }
    };
    let retrieval = decode_clusters(&layout, &manifest, &clusters, options.reconstructor, options.erase_last)?;
    let originals = match &options.originals {
        Some(dir) => Some(load_files(
            &manifest.files.iter().map(|f| dir.join(&f.name)).collect::<Vec<_>>(),
        )?),
        None => None,
    };
    let report = DecodeReport::new(manifest.strategy, &retrieval, originals.as_deref(), options.ref_db);
    create_dir(out)?;
    for f in &retrieval.files {
        write_file(&out.join(&f.name), &f.data)?;
    }
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&out.join(REPORT_FILE), json.as_bytes())?;
    Ok(report)
}
