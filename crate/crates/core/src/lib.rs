//! Transductive sense labeling on similarity graphs.
//!
//! Nodes (for example `<image, verb>` pairs) carry unit-norm embeddings.
//! A cosine similarity graph is built over all of them, a few nodes are
//! labeled, and replicator dynamics propagate the labels so that every
//! node settles on a sense from its own candidate set. The [`eval`]
//! module wraps this in a seeded benchmark harness with heuristic
//! baselines.

pub mod dynamics;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod sense;
pub mod synth;

pub use dynamics::{
    check_consistency, potential, predict, rd_step, run_dynamics, support_payoff, AssignmentMatrix,
    ConsistencyReport, DynamicsConfig, DynamicsTrace, Step, StrategySets,
};
pub use error::{Error, Location, Result};
pub use eval::{
    accuracy, baseline_fs, baseline_mfs, baseline_unsupervised, class_groups, mean_std, run_baselines,
    run_cell, run_experiment, BaselineScores, CellOutcome, ClassFilter, ExperimentGrid, ExperimentResult,
    Predictions, SenseEmbeddingSet,
};
pub use graph::{build_similarity, fuse_concat, mean_pool_unit, EmbeddingSet, Modality, SimilarityGraph};
pub use sense::{
    init_assignment, sample_labeled_set, MotionClass, NodeLabel, NodeLabeling, Protocol, SamplingPlan,
    SamplingWarning, SenseInventory, Split,
};
