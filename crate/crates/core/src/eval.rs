//! Accuracy, heuristic baselines and the seeded experiment grid.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, ArrayView1};
use rayon::prelude::*;

use crate::dynamics::{predict, run_dynamics, DynamicsConfig, DynamicsTrace};
use crate::error::{Error, Result};
use crate::graph::{build_similarity, EmbeddingSet, Modality, SimilarityGraph, UNIT_NORM_TOL};
use crate::sense::{init_assignment, sample_labeled_set, MotionClass, NodeLabeling, Protocol, SamplingPlan, SenseInventory, Split};

/// Predicted sense id per node id.
pub type Predictions = BTreeMap<String, String>;

/// Fraction of `unlabeled` nodes whose prediction matches the truth.
pub fn accuracy(predictions: &Predictions, truth: &NodeLabeling, unlabeled: &[usize]) -> Result<f64> {
    if unlabeled.is_empty() {
        return Err(Error::EmptyInput("accuracy over an empty unlabeled set".into()));
    }
    let mut correct = 0usize;
    for &i in unlabeled {
        let label = truth.get(i);
        let expected = label.sense.as_ref().ok_or_else(|| Error::MissingTruth {
            node: label.node_id.clone(),
        })?;
        let got = predictions.get(&label.node_id).ok_or_else(|| Error::MissingPrediction {
            node: label.node_id.clone(),
        })?;
        if got == expected {
            correct += 1;
        }
    }
    Ok(correct as f64 / unlabeled.len() as f64)
}

/// Every node in `unlabeled` gets the first sense listed for its verb.
pub fn baseline_fs(inventory: &SenseInventory, labeling: &NodeLabeling, unlabeled: &[usize]) -> Result<Predictions> {
    let mut out = Predictions::new();
    for &i in unlabeled {
        let label = labeling.get(i);
        let verb = verb_of(inventory, &label.node_id, &label.verb)?;
        let first = inventory.candidates(verb)[0];
        out.insert(label.node_id.clone(), inventory.sense_id(first).to_string());
    }
    Ok(out)
}

/// Every node in `unlabeled` gets its verb's most frequent sense across
/// the whole `truth` labeling. Frequency ties go to inventory order.
pub fn baseline_mfs(inventory: &SenseInventory, truth: &NodeLabeling, unlabeled: &[usize]) -> Result<Predictions> {
    let resolved = truth.resolve(inventory)?;
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for r in &resolved {
        if let Some(s) = r.sense {
            *counts.entry((r.verb, s)).or_default() += 1;
        }
    }
    let mut out = Predictions::new();
    for &i in unlabeled {
        let verb = resolved[i].verb;
        let mut best = inventory.candidates(verb)[0];
        let mut best_count = 0;
        for &s in inventory.candidates(verb) {
            let c = counts.get(&(verb, s)).copied().unwrap_or(0);
            if c > best_count {
                best = s;
                best_count = c;
            }
        }
        out.insert(truth.get(i).node_id.clone(), inventory.sense_id(best).to_string());
    }
    Ok(out)
}

fn verb_of(inventory: &SenseInventory, node: &str, verb: &str) -> Result<usize> {
    inventory.verb_index(verb).ok_or_else(|| Error::UnknownVerb {
        node: node.to_string(),
        verb: verb.to_string(),
    })
}

/// Unit-norm vector per `(verb, sense)` from a sense dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseEmbeddingSet {
    dim: usize,
    vectors: BTreeMap<(String, String), Array1<f64>>,
}

impl SenseEmbeddingSet {
    pub fn new(dim: usize) -> Self {
        SenseEmbeddingSet {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, verb: &str, sense: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                op: "sense embedding",
                left: (1, self.dim),
                right: (1, vector.len()),
            });
        }
        let v = Array1::from(vector);
        let norm = v.dot(&v).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnitNorm {
                node: format!("{verb}/{sense}"),
                norm,
            });
        }
        let key = (verb.to_string(), sense.to_string());
        if self.vectors.contains_key(&key) {
            return Err(Error::DuplicateId(format!("{verb}/{sense}")));
        }
        self.vectors.insert(key, v);
        Ok(())
    }

    pub fn get(&self, verb: &str, sense: &str) -> Option<ArrayView1<'_, f64>> {
        self.vectors.get(&(verb.to_string(), sense.to_string())).map(|v| v.view())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, ArrayView1<'_, f64>)> {
        self.vectors.iter().map(|((v, s), e)| (v.as_str(), s.as_str(), e.view()))
    }
}

/// Picks, for each node in `unlabeled`, the candidate sense whose
/// dictionary embedding has the highest cosine with the node embedding.
pub fn baseline_unsupervised(
    emb: &EmbeddingSet,
    sense_emb: &SenseEmbeddingSet,
    inventory: &SenseInventory,
    labeling: &NodeLabeling,
    unlabeled: &[usize],
) -> Result<Predictions> {
    if emb.dim() != sense_emb.dim() {
        return Err(Error::DimensionMismatch {
            op: "baseline_unsupervised",
            left: (emb.len(), emb.dim()),
            right: (sense_emb.len(), sense_emb.dim()),
        });
    }
    let rows: HashMap<&str, usize> = emb.node_ids().iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut out = Predictions::new();
    for &i in unlabeled {
        let label = labeling.get(i);
        let verb = verb_of(inventory, &label.node_id, &label.verb)?;
        let row = *rows.get(label.node_id.as_str()).ok_or_else(|| Error::NodeIdMismatch {
            index: i,
            left: label.node_id.clone(),
            right: "<absent from embeddings>".into(),
        })?;
        let node_vec = emb.row(row);
        let node_norm = node_vec.dot(&node_vec).sqrt();
        let mut best: Option<(usize, f64)> = None;
        for &s in inventory.candidates(verb) {
            let sense = inventory.sense_id(s);
            let sv = sense_emb.get(&label.verb, sense).ok_or_else(|| Error::MissingSenseEmbedding {
                verb: label.verb.clone(),
                sense: sense.to_string(),
            })?;
            let cos = node_vec.dot(&sv) / (node_norm * sv.dot(&sv).sqrt());
            if best.is_none_or(|(_, b)| cos > b) {
                best = Some((s, cos));
            }
        }
        let (s, _) = best.expect("verbs have at least one sense");
        out.insert(label.node_id.clone(), inventory.sense_id(s).to_string());
    }
    Ok(out)
}

/// Which verbs an experiment covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassFilter {
    /// Every verb. When the inventory flags motion classes, motion and
    /// non-motion verbs run as two independent sub-experiments.
    #[default]
    All,
    Motion,
    NonMotion,
}

impl FromStr for ClassFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(ClassFilter::All),
            other => match other.parse::<MotionClass>()? {
                MotionClass::Motion => Ok(ClassFilter::Motion),
                MotionClass::NonMotion => Ok(ClassFilter::NonMotion),
            },
        }
    }
}

impl fmt::Display for ClassFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassFilter::All => "all",
            ClassFilter::Motion => "motion",
            ClassFilter::NonMotion => "non-motion",
        })
    }
}

/// Labels-per-class values crossed with seeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentGrid {
    pub protocol: Protocol,
    pub labels_per_class: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl ExperimentGrid {
    /// Fifteen seeds, `0..15`.
    pub fn default_seeds() -> Vec<u64> {
        (0..15).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels_per_class.is_empty() {
            return Err(Error::InvalidConfig("the lpc grid is empty".into()));
        }
        if self.labels_per_class.contains(&0) {
            return Err(Error::InvalidConfig("lpc values must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("the seed list is empty".into()));
        }
        Ok(())
    }
}

/// One cell of a results table: a modality, class and lpc over all seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub modality: Modality,
    /// `all`, `motion` or `non-motion`.
    pub class: String,
    pub protocol: Protocol,
    pub labels_per_class: usize,
    pub seeds: Vec<u64>,
    pub accuracies: Vec<f64>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    pub mean: f64,
    pub std: f64,
}

/// Mean and sample standard deviation (divisor `n - 1`, zero for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Everything produced by one `(lpc, seed)` run.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub split: Split,
    pub predictions: Predictions,
    pub accuracy: f64,
    pub trace: DynamicsTrace,
}

/// Sample a split, propagate labels over `graph`, and score the unlabeled part.
pub fn run_cell(
    graph: &SimilarityGraph,
    inventory: &SenseInventory,
    truth: &NodeLabeling,
    plan: &SamplingPlan,
    cfg: &DynamicsConfig,
) -> Result<CellOutcome> {
    let split = sample_labeled_set(truth, inventory, plan)?;
    let partial = truth.keep_senses(&split.labeled);
    let x0 = init_assignment(&partial, inventory)?;
    let (x, trace) = run_dynamics(graph, &x0, cfg)?;
    let predictions = predict(&x, inventory, &partial)?;
    let accuracy = accuracy(&predictions, truth, &split.unlabeled)?;
    Ok(CellOutcome {
        split,
        predictions,
        accuracy,
        trace,
    })
}

/// Node indices of each class group requested by `filter`.
pub fn class_groups(
    inventory: &SenseInventory,
    truth: &NodeLabeling,
    filter: ClassFilter,
) -> Result<Vec<(String, Vec<usize>)>> {
    let wanted: Vec<MotionClass> = match filter {
        ClassFilter::All if !inventory.has_motion_classes() => {
            return Ok(vec![("all".to_string(), (0..truth.len()).collect())]);
        }
        ClassFilter::All => vec![MotionClass::Motion, MotionClass::NonMotion],
        ClassFilter::Motion => vec![MotionClass::Motion],
        ClassFilter::NonMotion => vec![MotionClass::NonMotion],
    };
    if !inventory.has_motion_classes() {
        return Err(Error::InvalidConfig(format!(
            "class filter `{filter}` needs motion flags on every verb of the inventory"
        )));
    }
    let resolved = truth.resolve(inventory)?;
    Ok(wanted
        .into_iter()
        .map(|class| {
            let nodes = resolved
                .iter()
                .enumerate()
                .filter(|(_, r)| inventory.verb(r.verb).motion == Some(class))
                .map(|(i, _)| i)
                .collect();
            (class.to_string(), nodes)
        })
        .filter(|(_, nodes): &(String, Vec<usize>)| !nodes.is_empty())
        .collect())
}

/// Runs the full grid for one embedding.
///
/// Cells are independent and run in parallel; results are collected in
/// grid order so the output does not depend on scheduling.
pub fn run_experiment(
    emb: &EmbeddingSet,
    inventory: &SenseInventory,
    truth: &NodeLabeling,
    grid: &ExperimentGrid,
    cfg: &DynamicsConfig,
    filter: ClassFilter,
) -> Result<Vec<ExperimentResult>> {
    grid.validate()?;
    cfg.validate()?;
    let emb = emb.reordered(&truth.node_ids())?;
    let mut results = Vec::new();
    for (class, nodes) in class_groups(inventory, truth, filter)? {
        let sub_truth = truth.subset(&nodes);
        let graph = build_similarity(&emb.subset(&nodes))?;
        let cells: Vec<(usize, u64)> = grid
            .labels_per_class
            .iter()
            .flat_map(|&lpc| grid.seeds.iter().map(move |&seed| (lpc, seed)))
            .collect();
        let outcomes: Vec<CellOutcome> = cells
            .par_iter()
            .map(|&(lpc, seed)| {
                SamplingPlan::new(grid.protocol, lpc, seed)
                    .and_then(|plan| run_cell(&graph, inventory, &sub_truth, &plan, cfg))
                    .map_err(|e| Error::Cell {
                        lpc,
                        seed,
                        class: class.clone(),
                        source: Box::new(e),
                    })
            })
            .collect::<Result<_>>()?;

        for (k, &lpc) in grid.labels_per_class.iter().enumerate() {
            let chunk = &outcomes[k * grid.seeds.len()..(k + 1) * grid.seeds.len()];
            if let Some(first) = chunk.first() {
                for w in &first.split.warnings {
                    log::warn!("{class}, lpc {lpc}: {w}");
                }
            }
            for (seed, o) in grid.seeds.iter().zip(chunk) {
                log::debug!(
                    "{class} lpc={lpc} seed={seed}: acc={:.4} iterations={} converged={} residual={:e} potential={:?}",
                    o.accuracy,
                    o.trace.iterations_run,
                    o.trace.converged,
                    o.trace.final_residual,
                    o.trace.potential_history
                );
            }
            let accuracies: Vec<f64> = chunk.iter().map(|o| o.accuracy).collect();
            let (mean, std) = mean_std(&accuracies);
            results.push(ExperimentResult {
                modality: emb.modality(),
                class: class.clone(),
                protocol: grid.protocol,
                labels_per_class: lpc,
                seeds: grid.seeds.clone(),
                iterations: chunk.iter().map(|o| o.trace.iterations_run).collect(),
                converged: chunk.iter().map(|o| o.trace.converged).collect(),
                accuracies,
                mean,
                std,
            });
        }
    }
    Ok(results)
}

/// Heuristic baseline accuracies for one class group, scored over every node.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineScores {
    pub class: String,
    pub nodes: usize,
    pub first_sense: f64,
    pub most_frequent_sense: f64,
    pub unsupervised: Option<f64>,
}

/// First-sense, most-frequent-sense and (when sense embeddings are given)
/// the cosine-to-sense baseline, per class group.
pub fn run_baselines(
    emb: Option<&EmbeddingSet>,
    sense_emb: Option<&SenseEmbeddingSet>,
    inventory: &SenseInventory,
    truth: &NodeLabeling,
    filter: ClassFilter,
) -> Result<Vec<BaselineScores>> {
    let mut out = Vec::new();
    for (class, nodes) in class_groups(inventory, truth, filter)? {
        let fs = accuracy(&baseline_fs(inventory, truth, &nodes)?, truth, &nodes)?;
        let mfs = accuracy(&baseline_mfs(inventory, truth, &nodes)?, truth, &nodes)?;
        let unsupervised = match (emb, sense_emb) {
            (Some(e), Some(s)) => Some(accuracy(
                &baseline_unsupervised(e, s, inventory, truth, &nodes)?,
                truth,
                &nodes,
            )?),
            _ => None,
        };
        out.push(BaselineScores {
            class,
            nodes: nodes.len(),
            first_sense: fs,
            most_frequent_sense: mfs,
            unsupervised,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sense::NodeLabel;
    use ndarray::array;

    fn label(node: &str, verb: &str, sense: Option<&str>) -> NodeLabel {
        NodeLabel {
            node_id: node.into(),
            verb: verb.into(),
            sense: sense.map(Into::into),
        }
    }

    fn fixture() -> (SenseInventory, NodeLabeling) {
        let mut inv = SenseInventory::new();
        inv.add_sense("ride", "ride.a", None).unwrap();
        inv.add_sense("ride", "ride.b", None).unwrap();
        let truth = NodeLabeling::new(vec![
            label("n0", "ride", Some("ride.b")),
            label("n1", "ride", Some("ride.b")),
            label("n2", "ride", Some("ride.b")),
            label("n3", "ride", Some("ride.a")),
        ])
        .unwrap();
        (inv, truth)
    }

    fn preds(pairs: &[(&str, &str)]) -> Predictions {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn accuracy_counts_only_unlabeled() {
        let (_, truth) = fixture();
        let all = preds(&[("n0", "ride.b"), ("n1", "ride.b"), ("n2", "ride.b"), ("n3", "ride.a")]);
        assert_eq!(accuracy(&all, &truth, &[0, 1, 2, 3]).unwrap(), 1.0);
        let half = preds(&[("n0", "ride.b"), ("n1", "ride.a"), ("n2", "ride.a"), ("n3", "ride.a")]);
        assert_eq!(accuracy(&half, &truth, &[0, 1, 2, 3]).unwrap(), 0.5);
        // n1 and n2 are wrong but labeled
        assert_eq!(accuracy(&half, &truth, &[0, 3]).unwrap(), 1.0);
        let missing = preds(&[("n0", "ride.b")]);
        assert!(matches!(accuracy(&missing, &truth, &[0, 3]), Err(Error::MissingPrediction { node }) if node == "n3"));
        assert!(accuracy(&all, &truth, &[]).is_err());
    }

    #[test]
    fn first_and_most_frequent_sense() {
        let (inv, truth) = fixture();
        let fs = baseline_fs(&inv, &truth, &[0, 1, 2, 3]).unwrap();
        assert!(fs.values().all(|s| s == "ride.a"));
        assert_eq!(accuracy(&fs, &truth, &[0, 1, 2, 3]).unwrap(), 0.25);
        let mfs = baseline_mfs(&inv, &truth, &[0, 1, 2, 3]).unwrap();
        assert!(mfs.values().all(|s| s == "ride.b"));
    }

    #[test]
    fn mfs_ties_follow_inventory_order() {
        let (inv, _) = fixture();
        let truth = NodeLabeling::new(vec![
            label("n0", "ride", Some("ride.b")),
            label("n1", "ride", Some("ride.a")),
            label("n2", "ride", Some("ride.b")),
            label("n3", "ride", Some("ride.a")),
        ])
        .unwrap();
        let mfs = baseline_mfs(&inv, &truth, &[0, 1]).unwrap();
        assert!(mfs.values().all(|s| s == "ride.a"));
    }

    #[test]
    fn unsupervised_picks_closest_sense() {
        let (inv, truth) = fixture();
        let emb = EmbeddingSet::new(
            truth.node_ids(),
            array![[1.0, 0.0], [0.0, 1.0], [0.6, 0.8], [0.8, 0.6]],
            Modality::CNN,
        )
        .unwrap();
        let mut senses = SenseEmbeddingSet::new(2);
        senses.insert("ride", "ride.a", vec![1.0, 0.0]).unwrap();
        senses.insert("ride", "ride.b", vec![0.0, 1.0]).unwrap();
        let p = baseline_unsupervised(&emb, &senses, &inv, &truth, &[0, 1, 2, 3]).unwrap();
        assert_eq!(p["n0"], "ride.a");
        assert_eq!(p["n1"], "ride.b");
        assert_eq!(p["n2"], "ride.b");
        assert_eq!(p["n3"], "ride.a");

        let mut partial = SenseEmbeddingSet::new(2);
        partial.insert("ride", "ride.a", vec![1.0, 0.0]).unwrap();
        match baseline_unsupervised(&emb, &partial, &inv, &truth, &[0]) {
            Err(Error::MissingSenseEmbedding { verb, sense }) => assert_eq!((verb.as_str(), sense.as_str()), ("ride", "ride.b")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unsupervised_cosines_point_three_and_point_seven() {
        let mut inv = SenseInventory::new();
        inv.add_sense("v", "s1", None).unwrap();
        inv.add_sense("v", "s2", None).unwrap();
        let truth = NodeLabeling::new(vec![label("x", "v", Some("s2"))]).unwrap();
        let emb = EmbeddingSet::new(vec!["x".into()], array![[1.0, 0.0, 0.0]], Modality::OBJECTS).unwrap();
        let mut senses = SenseEmbeddingSet::new(3);
        let a = 0.3f64;
        let b = 0.7f64;
        senses.insert("v", "s1", vec![a, (1.0 - a * a).sqrt(), 0.0]).unwrap();
        senses.insert("v", "s2", vec![b, 0.0, (1.0 - b * b).sqrt()]).unwrap();
        let p = baseline_unsupervised(&emb, &senses, &inv, &truth, &[0]).unwrap();
        assert_eq!(p["x"], "s2");
    }

    #[test]
    fn sense_embeddings_validate() {
        let mut s = SenseEmbeddingSet::new(2);
        assert!(s.insert("v", "a", vec![1.0]).is_err());
        assert!(s.insert("v", "a", vec![0.5, 0.5]).is_err());
        s.insert("v", "a", vec![0.0, 1.0]).unwrap();
        assert!(s.insert("v", "a", vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[0.7]), (0.7, 0.0));
    }

    #[test]
    fn class_filter_parsing() {
        assert_eq!("all".parse::<ClassFilter>().unwrap(), ClassFilter::All);
        assert_eq!("non-motion".parse::<ClassFilter>().unwrap(), ClassFilter::NonMotion);
        assert!("some".parse::<ClassFilter>().is_err());
    }

    #[test]
    fn class_groups_need_flags() {
        let (inv, truth) = fixture();
        assert_eq!(class_groups(&inv, &truth, ClassFilter::All).unwrap().len(), 1);
        assert!(class_groups(&inv, &truth, ClassFilter::Motion).is_err());
    }

    #[test]
    fn grid_validation() {
        let mut g = ExperimentGrid {
            protocol: Protocol::PerSense,
            labels_per_class: vec![],
            seeds: ExperimentGrid::default_seeds(),
        };
        assert!(g.validate().is_err());
        g.labels_per_class = vec![1, 0];
        assert!(g.validate().is_err());
        g.labels_per_class = vec![1];
        assert!(g.validate().is_ok());
        assert_eq!(g.seeds.len(), 15);
    }
}
