//! On-disk formats.
//!
//! # Embedding file (`.emb`), little-endian
//!
//! | offset | size      | field                                          |
//! |--------|-----------|------------------------------------------------|
//! | 0      | 4         | magic `SGEM`                                   |
//! | 4      | 4         | version, `u32` = 1                             |
//! | 8      | 8         | n, `u64` (> 0)                                 |
//! | 16     | 8         | d, `u64` (> 0)                                 |
//! | 24     | 8         | id table offset, `u64` = 48 + 8·n·d            |
//! | 32     | 16        | modality tag, ASCII, NUL padded (e.g. `CNN+O`) |
//! | 48     | 8·n·d     | vectors, `f64`, row-major                      |
//! | table  | variable  | n × (`u32` byte length + UTF-8 node id)        |
//!
//! The file ends exactly after the id table.
//!
//! # Text files
//!
//! Tab-separated, `#` starts a comment line, blank lines are skipped.
//!
//! * inventory: `verb  sense  [class]`, class is `motion`, `non-motion` or
//!   `-`. Line order fixes the sense order of each verb.
//! * labels: `node_id  verb  sense`, sense `-` marks an unlabeled node.
//! * sense embeddings: `verb  sense  v_1 … v_d`.
//!
//! # Result tables (CSV with header)
//!
//! * summary: `modality,class,protocol,lpc,seed_count,mean_acc,std_acc`
//! * ablation series: `modality,class,protocol,lpc,seed,accuracy,iterations,converged`

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Location, Result};
use crate::eval::{ExperimentResult, SenseEmbeddingSet};
use crate::graph::{EmbeddingSet, Modality};
use crate::sense::{MotionClass, NodeLabel, NodeLabeling, SenseInventory};

pub const MAGIC: [u8; 4] = *b"SGEM";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 48;
const TAG_LEN: usize = 16;

/// Rows whose norm is further than this from one are re-normalized.
pub const NORM_SILENT_TOL: f64 = 1e-6;
/// Beyond this the re-normalization is reported as a warning.
pub const NORM_WARN_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingFileHeader {
    pub version: u32,
    pub n: u64,
    pub d: u64,
    pub modality: Modality,
    pub id_table_offset: u64,
}

/// A row whose stored norm was off the unit sphere and was rescaled on read.
#[derive(Debug, Clone, PartialEq)]
pub struct NormDrift {
    pub row: usize,
    pub node_id: String,
    pub norm: f64,
}

impl NormDrift {
    /// True when the drift exceeds [`NORM_WARN_TOL`].
    pub fn is_warning(&self) -> bool {
        (self.norm - 1.0).abs() > NORM_WARN_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedEmbeddings {
    pub embeddings: EmbeddingSet,
    pub renormalized: Vec<NormDrift>,
}

pub fn encode_embeddings(set: &EmbeddingSet) -> Vec<u8> {
    let (n, d) = (set.len(), set.dim());
    let table_offset = HEADER_LEN + 8 * n * d;
    let mut out = Vec::with_capacity(table_offset + set.node_ids().iter().map(|s| s.len() + 4).sum::<usize>());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    out.extend_from_slice(&(table_offset as u64).to_le_bytes());
    let mut tag = [0u8; TAG_LEN];
    let name = set.modality().to_string();
    tag[..name.len()].copy_from_slice(name.as_bytes());
    out.extend_from_slice(&tag);
    for v in set.vectors().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for id in set.node_ids() {
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id.as_bytes());
    }
    out
}

pub fn write_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_embeddings(set)).map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::format(
                self.path,
                Location::Byte(self.pos as u64),
                format!("file truncated while reading {what} ({len} bytes needed, {} left)", self.bytes.len() - self.pos),
            )
        })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }
}

pub fn decode_header(bytes: &[u8], path: &Path) -> Result<EmbeddingFileHeader> {
    let mut cur = Cursor { bytes, pos: 0, path };
    let bad = |pos: usize, msg: String| Error::format(path, Location::Byte(pos as u64), msg);
    if cur.take(4, "magic")? != MAGIC {
        return Err(bad(0, "bad magic, not an embedding file".into()));
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(bad(4, format!("unsupported version {version}")));
    }
    let n = cur.u64("n")?;
    let d = cur.u64("d")?;
    if n == 0 || d == 0 {
        return Err(bad(8, format!("n and d must be positive, got n={n} d={d}")));
    }
    let id_table_offset = cur.u64("id table offset")?;
    let expected = n
        .checked_mul(d)
        .and_then(|v| v.checked_mul(8))
        .and_then(|v| v.checked_add(HEADER_LEN as u64))
        .ok_or_else(|| bad(8, "n * d overflows".into()))?;
    if id_table_offset != expected {
        return Err(bad(24, format!("id table offset {id_table_offset} does not match n and d (expected {expected})")));
    }
    let raw_tag = cur.take(TAG_LEN, "modality tag")?;
    let tag_end = raw_tag.iter().position(|b| *b == 0).unwrap_or(TAG_LEN);
    let tag = std::str::from_utf8(&raw_tag[..tag_end]).map_err(|_| bad(32, "modality tag is not ASCII".into()))?;
    let modality = tag.parse::<Modality>().map_err(|_| bad(32, format!("unknown modality tag `{tag}`")))?;
    Ok(EmbeddingFileHeader {
        version,
        n,
        d,
        modality,
        id_table_offset,
    })
}

pub fn decode_embeddings(bytes: &[u8], path: &Path) -> Result<LoadedEmbeddings> {
    let header = decode_header(bytes, path)?;
    let (n, d) = (header.n as usize, header.d as usize);
    let mut cur = Cursor {
        bytes,
        pos: HEADER_LEN,
        path,
    };
    let body = cur.take(8 * n * d, "vectors")?;
    let mut vectors = Array2::<f64>::zeros((n, d));
    for (k, (slot, chunk)) in vectors.iter_mut().zip(body.chunks_exact(8)).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        if !v.is_finite() {
            return Err(Error::format(
                path,
                Location::Row(k / d),
                format!("non-finite value at column {} (byte offset {})", k % d, HEADER_LEN + 8 * k),
            ));
        }
        *slot = v;
    }
    let mut ids = Vec::with_capacity(n);
    for _ in 0..n {
        let at = cur.pos;
        let len = cur.u32("node id length")? as usize;
        let raw = cur.take(len, "node id")?;
        let id = std::str::from_utf8(raw)
            .map_err(|_| Error::format(path, Location::Byte(at as u64), "node id is not UTF-8"))?;
        ids.push(id.to_string());
    }
    if cur.pos != bytes.len() {
        return Err(Error::format(
            path,
            Location::Byte(cur.pos as u64),
            format!("{} trailing bytes after the id table", bytes.len() - cur.pos),
        ));
    }

    let mut renormalized = Vec::new();
    for (i, mut row) in vectors.outer_iter_mut().enumerate() {
        let norm = row.dot(&row).sqrt();
        if norm == 0.0 {
            return Err(Error::format(path, Location::Row(i), format!("node `{}` has a zero vector", ids[i])));
        }
        if (norm - 1.0).abs() > NORM_SILENT_TOL {
            row.mapv_inplace(|v| v / norm);
            let drift = NormDrift {
                row: i,
                node_id: ids[i].clone(),
                norm,
            };
            if drift.is_warning() {
                log::warn!("{}: row {i} (`{}`) has norm {norm}, re-normalized", path.display(), ids[i]);
            }
            renormalized.push(drift);
        }
    }
    let embeddings = EmbeddingSet::new(ids, vectors, header.modality).map_err(|e| match e {
        Error::DuplicateId(id) => Error::format(path, Location::Byte(header.id_table_offset), format!("duplicate node id `{id}`")),
        other => other,
    })?;
    Ok(LoadedEmbeddings {
        embeddings,
        renormalized,
    })
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<LoadedEmbeddings> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_embeddings(&bytes, path)
}

/// Non-comment records of a tab-separated file with their 1-based line numbers.
fn read_tsv(path: &Path) -> Result<Vec<(u64, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let out: Vec<(u64, Vec<String>)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| (i as u64 + 1, l.split('\t').map(|f| f.trim().to_string()).collect()))
        .collect();
    if out.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no records", path.display())));
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, Location::Line(line), format!("{other:?}")),
    }
}

pub fn read_inventory(path: impl AsRef<Path>) -> Result<SenseInventory> {
    let path = path.as_ref();
    let mut inv = SenseInventory::new();
    for (line, fields) in read_tsv(path)? {
        let at = |msg: String| Error::format(path, Location::Line(line), msg);
        if !(2..=3).contains(&fields.len()) {
            return Err(at(format!("expected 2 or 3 columns, found {}", fields.len())));
        }
        let motion = match fields.get(2).map(String::as_str) {
            None | Some("-") | Some("") => None,
            Some(c) => Some(c.parse::<MotionClass>().map_err(|e| at(e.to_string()))?),
        };
        inv.add_sense(&fields[0], &fields[1], motion).map_err(|e| at(e.to_string()))?;
    }
    Ok(inv)
}

pub fn write_inventory(inv: &SenseInventory, path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::from("# verb\tsense\tclass\n");
    for verb in inv.verbs() {
        let class = verb.motion.map(|m| m.to_string()).unwrap_or_else(|| "-".into());
        for &s in &verb.senses {
            text.push_str(&format!("{}\t{}\t{}\n", verb.id, inv.sense_id(s), class));
        }
    }
    write_text(path.as_ref(), &text)
}

/// Reads labels and checks every verb and sense against `inv`.
pub fn read_labels(path: impl AsRef<Path>, inv: &SenseInventory) -> Result<NodeLabeling> {
    let path = path.as_ref();
    let mut labels = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, fields) in read_tsv(path)? {
        let at = |msg: String| Error::format(path, Location::Line(line), msg);
        if fields.len() != 3 {
            return Err(at(format!("expected 3 columns, found {}", fields.len())));
        }
        let label = NodeLabel {
            node_id: fields[0].clone(),
            verb: fields[1].clone(),
            sense: (fields[2] != "-").then(|| fields[2].clone()),
        };
        if !seen.insert(label.node_id.clone()) {
            return Err(at(format!("duplicate node id `{}`", label.node_id)));
        }
        NodeLabeling::new(vec![label.clone()])?
            .validate(inv)
            .map_err(|e| at(e.to_string()))?;
        labels.push(label);
    }
    NodeLabeling::new(labels)
}

pub fn write_labels(labels: &NodeLabeling, path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::from("# node\tverb\tsense\n");
    for l in labels.labels() {
        text.push_str(&format!("{}\t{}\t{}\n", l.node_id, l.verb, l.sense.as_deref().unwrap_or("-")));
    }
    write_text(path.as_ref(), &text)
}

/// Reads sense embeddings, re-normalizing rows the same way as
/// [`read_embeddings`], and checks `(verb, sense)` pairs against `inv`.
pub fn read_sense_embeddings(path: impl AsRef<Path>, inv: &SenseInventory) -> Result<SenseEmbeddingSet> {
    let path = path.as_ref();
    let mut set: Option<SenseEmbeddingSet> = None;
    for (line, fields) in read_tsv(path)? {
        let at = |msg: String| Error::format(path, Location::Line(line), msg);
        if fields.len() < 3 {
            return Err(at("expected verb, sense and at least one value".into()));
        }
        let (verb, sense) = (&fields[0], &fields[1]);
        let vi = inv.verb_index(verb).ok_or_else(|| at(format!("unknown verb `{verb}`")))?;
        if !inv.sense_column(sense).is_some_and(|c| inv.candidates(vi).contains(&c)) {
            return Err(at(format!("sense `{sense}` is not a candidate of `{verb}`")));
        }
        let mut values = fields[2..]
            .iter()
            .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| at("values must be finite numbers".into()))?;
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(at("zero vector".into()));
        }
        if (norm - 1.0).abs() > NORM_SILENT_TOL {
            if (norm - 1.0).abs() > NORM_WARN_TOL {
                log::warn!("{}: line {line} has norm {norm}, re-normalized", path.display());
            }
            values.iter_mut().for_each(|v| *v /= norm);
        }
        let target = set.get_or_insert_with(|| SenseEmbeddingSet::new(values.len()));
        target.insert(verb, sense, values).map_err(|e| at(e.to_string()))?;
    }
    Ok(set.expect("read_tsv returns at least one record"))
}

pub fn write_sense_embeddings(set: &SenseEmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::from("# verb\tsense\tvalues...\n");
    for (verb, sense, v) in set.iter() {
        text.push_str(verb);
        text.push('\t');
        text.push_str(sense);
        for x in v.iter() {
            text.push('\t');
            text.push_str(&x.to_string());
        }
        text.push('\n');
    }
    write_text(path.as_ref(), &text)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub modality: String,
    pub class: String,
    pub protocol: String,
    pub lpc: usize,
    pub seed_count: usize,
    pub mean_acc: f64,
    pub std_acc: f64,
}

impl From<&ExperimentResult> for SummaryRow {
    fn from(r: &ExperimentResult) -> Self {
        SummaryRow {
            modality: r.modality.to_string(),
            class: r.class.clone(),
            protocol: r.protocol.to_string(),
            lpc: r.labels_per_class,
            seed_count: r.accuracies.len(),
            mean_acc: r.mean,
            std_acc: r.std,
        }
    }
}

pub const SUMMARY_HEADER: [&str; 7] = ["modality", "class", "protocol", "lpc", "seed_count", "mean_acc", "std_acc"];
pub const ABLATION_HEADER: [&str; 8] = ["modality", "class", "protocol", "lpc", "seed", "accuracy", "iterations", "converged"];

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

pub fn write_summary_csv(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    let write = |w: &mut csv::Writer<fs::File>, rec: Vec<String>| w.write_record(rec).map_err(|e| csv_error(path, e));
    write(&mut w, SUMMARY_HEADER.iter().map(|s| s.to_string()).collect())?;
    for r in rows {
        write(
            &mut w,
            vec![
                r.modality.clone(),
                r.class.clone(),
                r.protocol.clone(),
                r.lpc.to_string(),
                r.seed_count.to_string(),
                r.mean_acc.to_string(),
                r.std_acc.to_string(),
            ],
        )?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_summary_csv(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(SUMMARY_HEADER.iter().copied()) {
        return Err(Error::format(path, Location::Line(1), "unexpected header"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let at = |msg: &str| Error::format(path, Location::Line(line), msg.to_string());
        if rec.len() != SUMMARY_HEADER.len() {
            return Err(at("wrong column count"));
        }
        rows.push(SummaryRow {
            modality: rec[0].to_string(),
            class: rec[1].to_string(),
            protocol: rec[2].to_string(),
            lpc: rec[3].parse().map_err(|_| at("bad lpc"))?,
            seed_count: rec[4].parse().map_err(|_| at("bad seed_count"))?,
            mean_acc: rec[5].parse().map_err(|_| at("bad mean_acc"))?,
            std_acc: rec[6].parse().map_err(|_| at("bad std_acc"))?,
        });
    }
    Ok(rows)
}

/// Per-seed series, one row per `(modality, class, lpc, seed)`.
pub fn write_ablation_csv(results: &[ExperimentResult], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    w.write_record(ABLATION_HEADER).map_err(|e| csv_error(path, e))?;
    for r in results {
        for (k, seed) in r.seeds.iter().enumerate() {
            w.write_record([
                r.modality.to_string(),
                r.class.clone(),
                r.protocol.to_string(),
                r.labels_per_class.to_string(),
                seed.to_string(),
                r.accuracies[k].to_string(),
                r.iterations[k].to_string(),
                r.converged[k].to_string(),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Conventional file names inside an output directory.
pub fn summary_path(dir: &Path) -> PathBuf {
    dir.join("results.csv")
}

pub fn ablation_path(dir: &Path) -> PathBuf {
    dir.join("ablation.csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Write;

    fn sample_set() -> EmbeddingSet {
        let h = 1.0 / 2f64.sqrt();
        EmbeddingSet::new(
            vec!["a".into(), "bé".into()],
            array![[1.0, 0.0, 0.0], [h, 0.0, h]],
            "CNN+O".parse().unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn header_layout_is_fixed() {
        let bytes = encode_embeddings(&sample_set());
        assert_eq!(&bytes[0..4], b"SGEM");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 3);
        assert_eq!(u64::from_le_bytes(bytes[24..32].try_into().unwrap()), 48 + 48);
        assert_eq!(&bytes[32..37], b"CNN+O");
        assert!(bytes[37..48].iter().all(|b| *b == 0));
        assert_eq!(f64::from_le_bytes(bytes[48..56].try_into().unwrap()), 1.0);
        assert_eq!(u32::from_le_bytes(bytes[96..100].try_into().unwrap()), 1);
        assert_eq!(bytes[100], b'a');
        assert_eq!(u32::from_le_bytes(bytes[101..105].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), 108);
    }

    #[test]
    fn truncation_is_reported_with_offset() {
        let bytes = encode_embeddings(&sample_set());
        for cut in [0, 3, 20, 47, 60, 99, 107] {
            match decode_embeddings(&bytes[..cut], Path::new("x.emb")) {
                Err(Error::Format { location: Location::Byte(_), .. }) => {}
                other => panic!("cut {cut}: unexpected {other:?}"),
            }
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_embeddings(&extra, Path::new("x.emb")).is_err());
    }

    #[test]
    fn malformed_headers() {
        let good = encode_embeddings(&sample_set());
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        let mut bad_version = good.clone();
        bad_version[4] = 9;
        let mut bad_offset = good.clone();
        bad_offset[24] = 1;
        let mut bad_tag = good.clone();
        bad_tag[32] = b'Z';
        for b in [bad_magic, bad_version, bad_offset, bad_tag] {
            assert!(matches!(decode_embeddings(&b, Path::new("x")), Err(Error::Format { .. })));
        }
    }

    #[test]
    fn non_finite_values_name_the_row() {
        let mut bytes = encode_embeddings(&sample_set());
        bytes[48 + 24..48 + 32].copy_from_slice(&f64::NAN.to_le_bytes());
        match decode_embeddings(&bytes, Path::new("x")) {
            Err(Error::Format { location, .. }) => assert_eq!(location, Location::Row(1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn drifting_norm_is_renormalized() {
        let mut bytes = encode_embeddings(&sample_set());
        bytes[48..56].copy_from_slice(&0.99f64.to_le_bytes());
        let loaded = decode_embeddings(&bytes, Path::new("x")).unwrap();
        assert_eq!(loaded.renormalized.len(), 1);
        assert!(loaded.renormalized[0].is_warning());
        assert_eq!(loaded.embeddings.row(0)[0], 1.0);

        let mut small = encode_embeddings(&sample_set());
        small[48..56].copy_from_slice(&(1.0 + 5e-6f64).to_le_bytes());
        let loaded = decode_embeddings(&small, Path::new("x")).unwrap();
        assert_eq!(loaded.renormalized.len(), 1);
        assert!(!loaded.renormalized[0].is_warning());

        let mut zero = encode_embeddings(&sample_set());
        zero[48..56].copy_from_slice(&0f64.to_le_bytes());
        assert!(decode_embeddings(&zero, Path::new("x")).is_err());
    }

    fn write_file(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = fs::File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn inventory_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        let inv_path = write_file(
            dir.path(),
            "inv.tsv",
            "# comment\nplay\tplay.1\tmotion\nplay\tplay.2\tmotion\n\nread\tread.1\tnon-motion\n",
        );
        let inv = read_inventory(&inv_path).unwrap();
        assert_eq!(inv.sense_count(), 3);
        assert!(inv.has_motion_classes());

        let labels = write_file(dir.path(), "l.tsv", "a\tplay\tplay.2\nb\tread\t-\n");
        let l = read_labels(&labels, &inv).unwrap();
        assert_eq!(l.get(0).sense.as_deref(), Some("play.2"));
        assert_eq!(l.get(1).sense, None);

        let broken = write_file(dir.path(), "b.tsv", "a\tplay\tplay.2\n# x\nb\tread\tplay.1\n");
        match read_labels(&broken, &inv) {
            Err(Error::Format { location, .. }) => assert_eq!(location, Location::Line(3)),
            other => panic!("unexpected {other:?}"),
        }
        let dup = write_file(dir.path(), "d.tsv", "a\tplay\t-\na\tplay\t-\n");
        assert!(matches!(read_labels(&dup, &inv), Err(Error::Format { location: Location::Line(2), .. })));

        let dup_inv = write_file(dir.path(), "di.tsv", "play\tplay.1\nplay\tplay.1\n");
        assert!(matches!(read_inventory(&dup_inv), Err(Error::Format { location: Location::Line(2), .. })));

        let empty = write_file(dir.path(), "e.tsv", "");
        assert!(matches!(read_inventory(&empty), Err(Error::EmptyInput(_))));
        let comments = write_file(dir.path(), "c.tsv", "# only comments\n");
        assert!(matches!(read_inventory(&comments), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn sense_embeddings_reference_the_inventory() {
        let dir = tempfile::tempdir().unwrap();
        let inv = read_inventory(write_file(dir.path(), "inv.tsv", "v\ta\nv\tb\n")).unwrap();
        let ok = write_file(dir.path(), "s.tsv", "v\ta\t1\t0\nv\tb\t0\t2\n");
        let set = read_sense_embeddings(&ok, &inv).unwrap();
        assert_eq!(set.get("v", "b").unwrap().to_vec(), vec![0.0, 1.0]);
        let unknown = write_file(dir.path(), "u.tsv", "v\ta\t1\t0\nv\tc\t0\t1\n");
        assert!(matches!(read_sense_embeddings(&unknown, &inv), Err(Error::Format { location: Location::Line(2), .. })));
        let ragged = write_file(dir.path(), "r.tsv", "v\ta\t1\t0\nv\tb\t1\n");
        assert!(read_sense_embeddings(&ragged, &inv).is_err());
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(read_embeddings("/nonexistent/x.emb"), Err(Error::Io { .. })));
        assert!(read_inventory("/nonexistent/x.tsv").is_err());
    }
}
