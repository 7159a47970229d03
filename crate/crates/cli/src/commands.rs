use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sensegraph::io::{self, SummaryRow};
use sensegraph::synth::{self, SynthParams};
use sensegraph::{
    fuse_concat, run_baselines, run_experiment, EmbeddingSet, Error, ExperimentResult, Modality, NodeLabeling, Result,
    SenseInventory,
};

use crate::config::Settings;


fn load_file(tag: Modality, path: &Path) -> Result<EmbeddingSet> {
    let loaded = io::read_embeddings(path)?;
    for d in &loaded.renormalized {
        if d.is_warning() {
            log::warn!("{}: row {} (`{}`) had norm {} and was re-normalized", path.display(), d.row, d.node_id, d.norm);
        } else {
            log::debug!("{}: row {} re-normalized from norm {}", path.display(), d.row, d.norm);
        }
    }
    let found = loaded.embeddings.modality();
    if found != tag {
        return Err(Error::InvalidConfig(format!(
            "{} is tagged `{found}` but configured as `{tag}`",
            path.display()
        )));
    }
    Ok(loaded.embeddings)
}

/// The component a composite setup is split off from: `CNN` when present,
/// otherwise objects.
fn split(tag: Modality) -> Option<(Modality, Modality)> {
    let first = if tag.contains(Modality::CNN) {
        Modality::CNN
    } else {
        Modality::OBJECTS
    };
    Some((first, tag.without(first)?))
}

/// Which files a setup is built from, or the first missing component.
pub fn recipe(tag: Modality, files: &BTreeMap<Modality, PathBuf>) -> std::result::Result<Vec<Modality>, Modality> {
    if files.contains_key(&tag) {
        return Ok(vec![tag]);
    }
    match split(tag) {
        Some((a, b)) if tag.arity() > 1 => {
            let mut parts = recipe(a, files)?;
            parts.extend(recipe(b, files)?);
            Ok(parts)
        }
        _ => Err(tag),
    }
}

/// Loads a setup from its own file when one is configured, otherwise by
/// concatenating its components.
pub fn resolve_embeddings(
    tag: Modality,
    files: &BTreeMap<Modality, PathBuf>,
    cache: &mut BTreeMap<Modality, EmbeddingSet>,
) -> Result<EmbeddingSet> {
    if let Some(e) = cache.get(&tag) {
        return Ok(e.clone());
    }
    let emb = if let Some(path) = files.get(&tag) {
        load_file(tag, path)?
    } else {
        let (a, b) = split(tag)
            .filter(|_| tag.arity() > 1)
            .ok_or_else(|| Error::InvalidConfig(format!("no embedding file for modality `{tag}`")))?;
        let left = resolve_embeddings(a, files, cache)?;
        let right = resolve_embeddings(b, files, cache)?.reordered(left.node_ids())?;
        log::info!("fusing {a} and {b} into {tag}");
        fuse_concat(&left, &right)?
    };
    cache.insert(tag, emb.clone());
    Ok(emb)
}

fn load_corpus(s: &Settings) -> Result<(SenseInventory, NodeLabeling)> {
    let inventory = io::read_inventory(&s.inventory)?;
    let truth = io::read_labels(&s.labels, &inventory)?;
    log::info!(
        "{} verbs, {} senses, {} nodes",
        inventory.verbs().len(),
        inventory.sense_count(),
        truth.len()
    );
    Ok((inventory, truth))
}

/// Writes through a temporary name so a failed run leaves no half file.
fn commit(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    write(&tmp)?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn format_table(results: &[ExperimentResult]) -> String {
    let mut out = format!("{:<10} {:<11} {:<10} {:>4}  {}\n", "modality", "class", "protocol", "lpc", "accuracy (%)");
    for r in results {
        let _ = writeln!(
            out,
            "{:<10} {:<11} {:<10} {:>4}  {:.1} ± {:.1}",
            r.modality.to_string(),
            r.class,
            r.protocol.to_string(),
            r.labels_per_class,
            100.0 * r.mean,
            100.0 * r.std
        );
    }
    out
}

/// Runs every configured setup, then writes `results.csv` and
/// `ablation.csv`. Nothing is written unless every cell succeeds.
pub fn run(s: &Settings) -> Result<Vec<ExperimentResult>> {
    let (inventory, truth) = load_corpus(s)?;
    let mut cache = BTreeMap::new();
    let mut results = Vec::new();
    for &tag in &s.modalities {
        let emb = resolve_embeddings(tag, &s.embeddings, &mut cache)?;
        log::info!("{tag}: {} nodes, dim {}", emb.len(), emb.dim());
        results.extend(run_experiment(&emb, &inventory, &truth, &s.grid, &s.dynamics, s.class)?);
    }
    fs::create_dir_all(&s.output_dir).map_err(|e| Error::io(&s.output_dir, e))?;
    let rows: Vec<SummaryRow> = results.iter().map(SummaryRow::from).collect();
    commit(&io::summary_path(&s.output_dir), |p| io::write_summary_csv(&rows, p))?;
    commit(&io::ablation_path(&s.output_dir), |p| io::write_ablation_csv(&results, p))?;
    log::info!("wrote {}", io::summary_path(&s.output_dir).display());
    Ok(results)
}

pub fn baselines_path(dir: &Path) -> PathBuf {
    dir.join("baselines.csv")
}

/// First-sense, most-frequent-sense and, with sense embeddings, the
/// cosine-to-sense baseline. Rows use protocol names `fs`, `mfs` and
/// `unsupervised` with `lpc = 0`.
pub fn baselines(s: &Settings) -> Result<Vec<SummaryRow>> {
    let (inventory, truth) = load_corpus(s)?;
    let tag = s.modalities[0];
    let (emb, sense_emb) = match &s.sense_embeddings {
        Some(path) => {
            let mut cache = BTreeMap::new();
            let emb = resolve_embeddings(tag, &s.embeddings, &mut cache)?.reordered(&truth.node_ids())?;
            (Some(emb), Some(io::read_sense_embeddings(path, &inventory)?))
        }
        None => (None, None),
    };
    let scores = run_baselines(emb.as_ref(), sense_emb.as_ref(), &inventory, &truth, s.class)?;
    let row = |modality: String, class: &str, protocol: &str, acc: f64| SummaryRow {
        modality,
        class: class.to_string(),
        protocol: protocol.to_string(),
        lpc: 0,
        seed_count: 1,
        mean_acc: acc,
        std_acc: 0.0,
    };
    let mut rows = Vec::new();
    for b in &scores {
        rows.push(row("-".into(), &b.class, "fs", b.first_sense));
        rows.push(row("-".into(), &b.class, "mfs", b.most_frequent_sense));
        if let Some(u) = b.unsupervised {
            rows.push(row(tag.to_string(), &b.class, "unsupervised", u));
        }
    }
    fs::create_dir_all(&s.output_dir).map_err(|e| Error::io(&s.output_dir, e))?;
    commit(&baselines_path(&s.output_dir), |p| io::write_summary_csv(&rows, p))?;
    Ok(rows)
}

#[derive(Debug, Default)]
pub struct Findings {
    pub lines: Vec<String>,
    pub failures: usize,
    pub warnings: usize,
}

impl Findings {
    fn ok(&mut self, what: &str, detail: String) {
        self.lines.push(format!("ok    {what}: {detail}"));
    }

    fn warn(&mut self, what: &str, detail: String) {
        self.warnings += 1;
        self.lines.push(format!("warn  {what}: {detail}"));
    }

    fn fail(&mut self, what: &str, detail: String) {
        self.failures += 1;
        self.lines.push(format!("FAIL  {what}: {detail}"));
    }
}

/// Loads every input and checks references and norms. Never runs the dynamics.
pub fn validate(s: &Settings) -> Findings {
    let mut f = Findings::default();
    let inv_name = s.inventory.display().to_string();
    let inventory = match io::read_inventory(&s.inventory) {
        Ok(inv) => {
            f.ok(&inv_name, format!("{} verbs, {} senses", inv.verbs().len(), inv.sense_count()));
            Some(inv)
        }
        Err(e) => {
            f.fail(&inv_name, e.to_string());
            None
        }
    };

    let labels_name = s.labels.display().to_string();
    let truth = match &inventory {
        None => {
            f.fail(&labels_name, "not checked, the inventory did not load".into());
            None
        }
        Some(inv) => match io::read_labels(&s.labels, inv) {
            Ok(truth) => {
                let missing = truth.labels().iter().filter(|l| l.sense.is_none()).count();
                f.ok(&labels_name, format!("{} nodes", truth.len()));
                if missing > 0 {
                    f.warn(&labels_name, format!("{missing} nodes have no sense and cannot be scored"));
                }
                Some(truth)
            }
            Err(e) => {
                f.fail(&labels_name, e.to_string());
                None
            }
        },
    };

    let mut dims = HashSet::new();
    for (tag, path) in &s.embeddings {
        let name = format!("{} [{tag}]", path.display());
        let loaded = match io::read_embeddings(path) {
            Ok(l) => l,
            Err(e) => {
                f.fail(&name, e.to_string());
                continue;
            }
        };
        let emb = &loaded.embeddings;
        dims.insert(emb.dim());
        if emb.modality() != *tag {
            f.fail(&name, format!("file is tagged `{}`", emb.modality()));
            continue;
        }
        let mut problems = Vec::new();
        if let Some(truth) = &truth {
            let ids: HashSet<&str> = emb.node_ids().iter().map(String::as_str).collect();
            let absent: Vec<&str> = truth.labels().iter().map(|l| l.node_id.as_str()).filter(|id| !ids.contains(id)).collect();
            if let Some(first) = absent.first() {
                problems.push(format!("{} labeled nodes have no vector (first `{first}`)", absent.len()));
            }
            if emb.len() + absent.len() != truth.len() {
                problems.push(format!("{} vectors for {} labeled nodes", emb.len(), truth.len()));
            }
        }
        if problems.is_empty() {
            f.ok(&name, format!("{} vectors, dim {}", emb.len(), emb.dim()));
        } else {
            f.fail(&name, problems.join("; "));
        }
        for d in &loaded.renormalized {
            if d.is_warning() {
                f.warn(&name, format!("row {} (`{}`) has norm {}, re-normalized on load", d.row, d.node_id, d.norm));
            }
        }
    }

    if let Some(path) = &s.sense_embeddings {
        let name = path.display().to_string();
        match &inventory {
            None => f.fail(&name, "not checked, the inventory did not load".into()),
            Some(inv) => match io::read_sense_embeddings(path, inv) {
                Ok(set) => {
                    f.ok(&name, format!("{} senses, dim {}", set.len(), set.dim()));
                    let uncovered = (0..inv.verbs().len())
                        .flat_map(|v| inv.candidates(v).iter().map(move |&c| (v, c)))
                        .filter(|&(v, c)| set.get(&inv.verb(v).id, inv.sense_id(c)).is_none())
                        .count();
                    if uncovered > 0 {
                        f.warn(&name, format!("{uncovered} inventory senses have no vector"));
                    }
                    if !dims.is_empty() && !dims.contains(&set.dim()) {
                        f.warn(&name, format!("dim {} matches no embedding file", set.dim()));
                    }
                }
                Err(e) => f.fail(&name, e.to_string()),
            },
        }
    }

    for &tag in &s.modalities {
        let what = format!("modality {tag}");
        match recipe(tag, &s.embeddings) {
            Ok(parts) if parts.len() == 1 => f.ok(&what, "read from its own file".into()),
            Ok(parts) => {
                let names: Vec<String> = parts.iter().map(Modality::to_string).collect();
                f.ok(&what, format!("fused from {}", names.join(" + ")));
            }
            Err(missing) => f.fail(&what, format!("no embedding file for `{missing}`")),
        }
    }
    f
}

/// Writes a synthetic corpus plus an `experiment.toml` that points at it.
pub fn synth(params: &SynthParams, dir: &Path) -> Result<Vec<PathBuf>> {
    let data = synth::generate(params)?;
    let mut written = data.write_to(dir)?;
    let config = dir.join("experiment.toml");
    let text = "inventory = \"inventory.tsv\"\n\
                labels = \"labels.tsv\"\n\
                sense_embeddings = \"senses.tsv\"\n\
                output_dir = \"results\"\n\
                modalities = [\"CNN\"]\n\
                lpc = [1, 2, 8]\n\
                \n\
                [embeddings]\n\
                CNN = \"cnn.emb\"\n\
                O = \"o.emb\"\n\
                C = \"c.emb\"\n";
    fs::write(&config, text).map_err(|e| Error::io(&config, e))?;
    written.push(config);
    Ok(written)
}
