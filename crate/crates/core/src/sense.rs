//! Sense inventories, node labelings, initial assignments and the labeled
//! set sampling protocols.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::AssignmentMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MotionClass {
    Motion,
    NonMotion,
}

impl fmt::Display for MotionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MotionClass::Motion => "motion",
            MotionClass::NonMotion => "non-motion",
        })
    }
}

impl FromStr for MotionClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "motion" => Ok(MotionClass::Motion),
            "non-motion" | "nonmotion" | "non_motion" => Ok(MotionClass::NonMotion),
            _ => Err(Error::InvalidConfig(format!("unknown motion class `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verb {
    pub id: String,
    /// Sense columns in dictionary order; index 0 is the first sense.
    pub senses: Vec<usize>,
    pub motion: Option<MotionClass>,
}

/// Verbs, their ordered candidate senses, and the global sense columns.
///
/// Sense ids are global: two verbs listing the same sense id share a
/// column. The order in which senses are added defines both first-sense
/// order and tie-break order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SenseInventory {
    verbs: Vec<Verb>,
    sense_ids: Vec<String>,
    verb_index: HashMap<String, usize>,
    sense_index: HashMap<String, usize>,
}

impl SenseInventory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `sense` to the candidate list of `verb`, creating either as needed.
    pub fn add_sense(&mut self, verb: &str, sense: &str, motion: Option<MotionClass>) -> Result<()> {
        let col = match self.sense_index.get(sense) {
            Some(&c) => c,
            None => {
                self.sense_ids.push(sense.to_string());
                self.sense_index.insert(sense.to_string(), self.sense_ids.len() - 1);
                self.sense_ids.len() - 1
            }
        };
        let vi = match self.verb_index.get(verb) {
            Some(&v) => v,
            None => {
                self.verbs.push(Verb {
                    id: verb.to_string(),
                    senses: Vec::new(),
                    motion,
                });
                self.verb_index.insert(verb.to_string(), self.verbs.len() - 1);
                self.verbs.len() - 1
            }
        };
        let entry = &mut self.verbs[vi];
        if entry.senses.contains(&col) {
            return Err(Error::DuplicateId(format!("{verb}/{sense}")));
        }
        if entry.motion != motion {
            return Err(Error::InvalidConfig(format!("verb `{verb}` has conflicting motion classes")));
        }
        entry.senses.push(col);
        Ok(())
    }

    pub fn verbs(&self) -> &[Verb] {
        &self.verbs
    }

    pub fn verb(&self, index: usize) -> &Verb {
        &self.verbs[index]
    }

    pub fn verb_index(&self, id: &str) -> Option<usize> {
        self.verb_index.get(id).copied()
    }

    /// Number of distinct senses, i.e. assignment matrix columns.
    pub fn sense_count(&self) -> usize {
        self.sense_ids.len()
    }

    pub fn sense_id(&self, column: usize) -> &str {
        &self.sense_ids[column]
    }

    pub fn sense_column(&self, id: &str) -> Option<usize> {
        self.sense_index.get(id).copied()
    }

    pub fn candidates(&self, verb: usize) -> &[usize] {
        &self.verbs[verb].senses
    }

    /// True when every verb carries a motion flag.
    pub fn has_motion_classes(&self) -> bool {
        !self.verbs.is_empty() && self.verbs.iter().all(|v| v.motion.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.verbs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLabel {
    pub node_id: String,
    pub verb: String,
    pub sense: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ResolvedLabel {
    pub verb: usize,
    pub sense: Option<usize>,
}

/// Per-node verb and, for labeled nodes, the sense.
///
/// Holds opaque string ids; resolution against a [`SenseInventory`]
/// happens in the operations that need it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLabeling {
    labels: Vec<NodeLabel>,
}

impl NodeLabeling {
    pub fn new(labels: Vec<NodeLabel>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.node_id.as_str()) {
                return Err(Error::DuplicateId(l.node_id.clone()));
            }
        }
        Ok(NodeLabeling { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn get(&self, i: usize) -> &NodeLabel {
        &self.labels[i]
    }

    pub fn node_ids(&self) -> Vec<String> {
        self.labels.iter().map(|l| l.node_id.clone()).collect()
    }

    /// Same nodes with only the senses at `labeled` kept.
    pub fn keep_senses(&self, labeled: &[usize]) -> NodeLabeling {
        let keep: HashSet<usize> = labeled.iter().copied().collect();
        let labels = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| NodeLabel {
                sense: if keep.contains(&i) { l.sense.clone() } else { None },
                ..l.clone()
            })
            .collect();
        NodeLabeling { labels }
    }

    pub fn subset(&self, indices: &[usize]) -> NodeLabeling {
        NodeLabeling {
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }

    /// Checks every verb and sense against `inventory`.
    pub fn validate(&self, inventory: &SenseInventory) -> Result<()> {
        self.resolve(inventory).map(|_| ())
    }

    pub(crate) fn resolve(&self, inventory: &SenseInventory) -> Result<Vec<ResolvedLabel>> {
        self.labels
            .iter()
            .map(|l| {
                let verb = inventory.verb_index(&l.verb).ok_or_else(|| Error::UnknownVerb {
                    node: l.node_id.clone(),
                    verb: l.verb.clone(),
                })?;
                let sense = match &l.sense {
                    None => None,
                    Some(s) => {
                        let col = inventory
                            .sense_column(s)
                            .filter(|c| inventory.candidates(verb).contains(c))
                            .ok_or_else(|| Error::SenseNotCandidate {
                                node: l.node_id.clone(),
                                verb: l.verb.clone(),
                                sense: s.clone(),
                            })?;
                        Some(col)
                    }
                };
                Ok(ResolvedLabel { verb, sense })
            })
            .collect()
    }

    /// Resolves and requires a sense on every node.
    pub(crate) fn resolve_truth(&self, inventory: &SenseInventory) -> Result<Vec<(usize, usize)>> {
        self.resolve(inventory)?
            .into_iter()
            .zip(&self.labels)
            .map(|(r, l)| {
                r.sense.map(|s| (r.verb, s)).ok_or_else(|| Error::MissingTruth {
                    node: l.node_id.clone(),
                })
            })
            .collect()
    }
}

/// Builds the starting assignment: labeled nodes are one-hot on their
/// sense, unlabeled nodes are uniform over their verb's candidates.
pub fn init_assignment(labeling: &NodeLabeling, inventory: &SenseInventory) -> Result<AssignmentMatrix> {
    let resolved = labeling.resolve(inventory)?;
    let mut values = Array2::<f64>::zeros((labeling.len(), inventory.sense_count()));
    for (i, r) in resolved.iter().enumerate() {
        match r.sense {
            Some(col) => values[[i, col]] = 1.0,
            None => {
                let cands = inventory.candidates(r.verb);
                let p = 1.0 / cands.len() as f64;
                for &c in cands {
                    values[[i, c]] = p;
                }
            }
        }
    }
    AssignmentMatrix::new(labeling.node_ids(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    /// `labels_per_class` labeled nodes for every sense.
    PerSense,
    /// `labels_per_class` labeled nodes for every verb.
    PerVerb,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::PerSense => "per_sense",
            Protocol::PerVerb => "per_verb",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_sense" | "per-sense" | "sense" => Ok(Protocol::PerSense),
            "per_verb" | "per-verb" | "verb" => Ok(Protocol::PerVerb),
            _ => Err(Error::InvalidConfig(format!("unknown protocol `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingPlan {
    pub protocol: Protocol,
    pub labels_per_class: usize,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn new(protocol: Protocol, labels_per_class: usize, seed: u64) -> Result<Self> {
        if labels_per_class == 0 {
            return Err(Error::InvalidConfig("labels_per_class must be at least 1".into()));
        }
        Ok(SamplingPlan {
            protocol,
            labels_per_class,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SamplingWarning {
    /// The class has a single member, which stays unlabeled.
    Singleton { class: String },
    /// Fewer labels than requested so that one member stays unlabeled.
    Clamped {
        class: String,
        requested: usize,
        granted: usize,
    },
}

impl fmt::Display for SamplingWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingWarning::Singleton { class } => {
                write!(f, "class `{class}` has one member; it stays unlabeled")
            }
            SamplingWarning::Clamped {
                class,
                requested,
                granted,
            } => write!(f, "class `{class}`: {granted} of {requested} requested labels"),
        }
    }
}

/// A partition of the nodes into labeled and unlabeled indices, both sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub labeled: Vec<usize>,
    pub unlabeled: Vec<usize>,
    pub warnings: Vec<SamplingWarning>,
}

/// Draws the labeled set from a fully labeled ground truth.
///
/// Each class contributes `min(labels_per_class, size - 1)` nodes drawn
/// uniformly without replacement, so every class keeps at least one node
/// to score. Classes are visited in inventory order and the generator is
/// seeded from the plan alone, which makes the split reproducible.
pub fn sample_labeled_set(truth: &NodeLabeling, inventory: &SenseInventory, plan: &SamplingPlan) -> Result<Split> {
    if plan.labels_per_class == 0 {
        return Err(Error::InvalidConfig("labels_per_class must be at least 1".into()));
    }
    let resolved = truth.resolve_truth(inventory)?;
    let (class_count, class_name): (usize, Box<dyn Fn(usize) -> String>) = match plan.protocol {
        Protocol::PerSense => (inventory.sense_count(), Box::new(|c| inventory.sense_id(c).to_string())),
        Protocol::PerVerb => (inventory.verbs().len(), Box::new(|c| inventory.verb(c).id.clone())),
    };
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (i, &(verb, sense)) in resolved.iter().enumerate() {
        let class = match plan.protocol {
            Protocol::PerSense => sense,
            Protocol::PerVerb => verb,
        };
        members[class].push(i);
    }

    let largest = members.iter().map(Vec::len).max().unwrap_or(0);
    if largest == 0 {
        return Err(Error::EmptyInput("no nodes to sample from".into()));
    }
    if plan.labels_per_class > largest {
        return Err(Error::Sampling(format!(
            "labels_per_class = {} exceeds every class size (largest is {largest})",
            plan.labels_per_class
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut is_labeled = vec![false; resolved.len()];
    let mut warnings = Vec::new();
    for (class, nodes) in members.iter().enumerate() {
        if nodes.is_empty() {
            continue;
        }
        let take = plan.labels_per_class.min(nodes.len() - 1);
        if nodes.len() == 1 {
            warnings.push(SamplingWarning::Singleton {
                class: class_name(class),
            });
        } else if take < plan.labels_per_class {
            warnings.push(SamplingWarning::Clamped {
                class: class_name(class),
                requested: plan.labels_per_class,
                granted: take,
            });
        }
        for pick in rand::seq::index::sample(&mut rng, nodes.len(), take) {
            is_labeled[nodes[pick]] = true;
        }
    }

    let (labeled, unlabeled): (Vec<usize>, Vec<usize>) = (0..resolved.len()).partition(|&i| is_labeled[i]);
    if unlabeled.is_empty() {
        return Err(Error::Sampling("the unlabeled set is empty".into()));
    }
    Ok(Split {
        labeled,
        unlabeled,
        warnings,
    })
}
