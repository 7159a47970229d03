//! Experiment settings: a TOML file merged with command-line overrides.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::Deserialize;
use sensegraph::{ClassFilter, DynamicsConfig, Error, ExperimentGrid, Location, Modality, Protocol, Result};

/// Keys accepted in the config file. Relative paths are taken from the
/// file's own directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub inventory: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub sense_embeddings: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    /// Embedding file per modality tag, e.g. `CNN = "cnn.emb"`.
    #[serde(default)]
    pub embeddings: BTreeMap<String, PathBuf>,
    pub modalities: Option<Vec<String>>,
    pub protocol: Option<String>,
    pub lpc: Option<Vec<usize>>,
    pub seeds: Option<Vec<u64>>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub class: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg: FileConfig = toml::from_str(&text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(1);
            Error::Format {
                path: path.to_path_buf(),
                location: Location::Line(line as u64),
                message: e.message().to_string(),
            }
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut cfg.inventory, &mut cfg.labels, &mut cfg.sense_embeddings, &mut cfg.output_dir]
            .into_iter()
            .flatten()
        {
            rebase(p);
        }
        cfg.embeddings.values_mut().for_each(rebase);
        Ok(cfg)
    }
}

/// Flags shared by every command that reads an experiment. Each one
/// overrides the matching config key.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// TOML file with experiment settings.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub inventory: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub sense_embeddings: Option<PathBuf>,
    /// Embedding file for one modality, as `TAG=PATH`. Repeatable.
    #[arg(long = "embedding", value_name = "TAG=PATH", value_parser = parse_embedding)]
    pub embeddings: Vec<(Modality, PathBuf)>,
    /// Modality setups to evaluate, e.g. `CNN,CNN+O`.
    #[arg(short, long = "modality", value_delimiter = ',')]
    pub modalities: Vec<Modality>,
    /// `per_sense` or `per_verb`.
    #[arg(long)]
    pub protocol: Option<Protocol>,
    /// Labels per class, as a list or range: `1,2,20` or `1..=20`.
    #[arg(long, value_parser = parse_lpc)]
    pub lpc: Option<LpcList>,
    /// Sampling seeds, as a list or range: `0..15`.
    #[arg(long, value_parser = parse_list)]
    pub seeds: Option<SeedList>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// `all`, `motion` or `non-motion`.
    #[arg(long)]
    pub class: Option<ClassFilter>,
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
}

// Aliases keep clap from treating these as repeated flags.
type LpcList = Vec<usize>;
type SeedList = Vec<u64>;

fn parse_embedding(s: &str) -> std::result::Result<(Modality, PathBuf), String> {
    let (tag, path) = s.split_once('=').ok_or_else(|| format!("expected TAG=PATH, got `{s}`"))?;
    let tag = tag.parse::<Modality>().map_err(|e| e.to_string())?;
    Ok((tag, PathBuf::from(path)))
}

/// Comma-separated values and ranges (`a..b` or `a..=b`).
pub fn parse_list(s: &str) -> std::result::Result<Vec<u64>, String> {
    let num = |p: &str| p.trim().parse::<u64>().map_err(|_| format!("`{p}` is not a valid number"));
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let range = if let Some((a, b)) = part.split_once("..=") {
            num(a)?..num(b)?.saturating_add(1)
        } else if let Some((a, b)) = part.split_once("..") {
            num(a)?..num(b)?
        } else {
            let v = num(part)?;
            v..v + 1
        };
        if range.is_empty() {
            return Err(format!("empty range `{part}`"));
        }
        out.extend(range);
    }
    if out.is_empty() {
        return Err("the list is empty".into());
    }
    Ok(out)
}

fn parse_lpc(s: &str) -> std::result::Result<Vec<usize>, String> {
    parse_list(s)?
        .into_iter()
        .map(|v| usize::try_from(v).map_err(|_| format!("{v} is too large")))
        .collect()
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub inventory: PathBuf,
    pub labels: PathBuf,
    pub sense_embeddings: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub embeddings: BTreeMap<Modality, PathBuf>,
    pub modalities: Vec<Modality>,
    pub grid: ExperimentGrid,
    pub dynamics: DynamicsConfig,
    pub class: ClassFilter,
}

fn parse_key<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| Error::InvalidConfig(format!("`{key}`: {e}")))
}

impl Settings {
    /// Merges the config file (if any) with `args`; flags win. `default_lpc`
    /// is used when neither source sets a grid.
    pub fn resolve(args: &ExperimentArgs, default_lpc: &[usize]) -> Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let required = |flag: &Option<PathBuf>, key: Option<PathBuf>, name: &str| {
            flag.clone()
                .or(key)
                .ok_or_else(|| Error::InvalidConfig(format!("`{name}` is not set (config key or --{name})")))
        };
        let inventory = required(&args.inventory, file.inventory, "inventory")?;
        let labels = required(&args.labels, file.labels, "labels")?;

        let mut embeddings = BTreeMap::new();
        for (tag, path) in file.embeddings {
            embeddings.insert(parse_key::<Modality>("embeddings", &tag)?, path);
        }
        for (tag, path) in &args.embeddings {
            embeddings.insert(*tag, path.clone());
        }

        let modalities = if !args.modalities.is_empty() {
            args.modalities.clone()
        } else if let Some(list) = file.modalities {
            list.iter().map(|m| parse_key("modalities", m)).collect::<Result<_>>()?
        } else {
            embeddings.keys().copied().collect()
        };
        if modalities.is_empty() {
            return Err(Error::InvalidConfig("no modality selected and no embedding files given".into()));
        }

        let protocol = match (args.protocol, file.protocol) {
            (Some(p), _) => p,
            (None, Some(p)) => parse_key("protocol", &p)?,
            (None, None) => Protocol::PerSense,
        };
        let class = match (args.class, file.class) {
            (Some(c), _) => c,
            (None, Some(c)) => parse_key("class", &c)?,
            (None, None) => ClassFilter::All,
        };
        let grid = ExperimentGrid {
            protocol,
            labels_per_class: args.lpc.clone().or(file.lpc).unwrap_or_else(|| default_lpc.to_vec()),
            seeds: args.seeds.clone().or(file.seeds).unwrap_or_else(ExperimentGrid::default_seeds),
        };
        grid.validate()?;
        let defaults = DynamicsConfig::default();
        let dynamics = DynamicsConfig {
            max_iterations: args.max_iterations.or(file.max_iterations).unwrap_or(defaults.max_iterations),
            tolerance: args.tolerance.or(file.tolerance).unwrap_or(defaults.tolerance),
            ..defaults
        };
        dynamics.validate()?;

        Ok(Settings {
            inventory,
            labels,
            sense_embeddings: args.sense_embeddings.clone().or(file.sense_embeddings),
            output_dir: args
                .output_dir
                .clone()
                .or(file.output_dir)
                .unwrap_or_else(|| PathBuf::from("results")),
            embeddings,
            modalities,
            grid,
            dynamics,
            class,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_lpc("1,2,20").unwrap(), vec![1, 2, 20]);
        assert_eq!(parse_lpc("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_list("0..3,7").unwrap(), vec![0, 1, 2, 7]);
        assert!(parse_list("3..3").is_err());
        assert!(parse_list("a").is_err());
        assert!(parse_list("").is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        fs::write(
            &path,
            "inventory = \"inv.tsv\"\nlabels = \"/abs/labels.tsv\"\nlpc = [1, 2]\ntolerance = 1e-8\n\n[embeddings]\nO = \"o.emb\"\nC = \"c.emb\"\n",
        )
        .unwrap();
        let args = ExperimentArgs {
            config: Some(path),
            lpc: Some(vec![5]),
            ..Default::default()
        };
        let s = Settings::resolve(&args, &[1]).unwrap();
        assert_eq!(s.inventory, dir.path().join("inv.tsv"));
        assert_eq!(s.labels, PathBuf::from("/abs/labels.tsv"));
        assert_eq!(s.grid.labels_per_class, vec![5]);
        assert_eq!(s.grid.seeds.len(), 15);
        assert_eq!(s.dynamics.tolerance, 1e-8);
        assert_eq!(s.modalities, vec![Modality::OBJECTS, Modality::CAPTIONS]);
        assert_eq!(s.embeddings[&Modality::CAPTIONS], dir.path().join("c.emb"));
    }

    #[test]
    fn bad_files_are_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        fs::write(&path, "inventory = \"a\"\n\nlpc = [1, \"x\"]\n").unwrap();
        let args = ExperimentArgs {
            config: Some(path.clone()),
            ..Default::default()
        };
        match Settings::resolve(&args, &[1]) {
            Err(Error::Format { location, .. }) => assert_eq!(location, Location::Line(3)),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&path, "inventroy = \"a\"\n").unwrap();
        assert!(Settings::resolve(&args, &[1]).is_err());
        fs::write(&path, "inventory = \"a\"\n").unwrap();
        let err = Settings::resolve(&args, &[1]).unwrap_err().to_string();
        assert!(err.contains("labels"), "{err}");
    }
}
