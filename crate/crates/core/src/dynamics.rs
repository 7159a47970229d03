//! Replicator dynamics over a similarity graph.
//!
//! Every node is a player whose mixed strategy is a row of the assignment
//! matrix `X`. With pairwise payoff `A_ij = w_ij * I`, the support node `i`
//! receives for sense `h` is `U = W X`, and one step of the dynamics is
//!
//! ```text
//! x'_ih = x_ih * u_ih / sum_k x_ik * u_ik
//! ```
//!
//! The update is multiplicative, so zero entries stay zero. Candidate
//! masks and labeled rows (which are one-hot) therefore need no special
//! handling: both are fixed by the initial assignment.

use ndarray::{Array2, ArrayView1, Zip};

use crate::error::{Error, Result};
use crate::eval::Predictions;
use crate::graph::SimilarityGraph;
use crate::sense::{NodeLabeling, SenseInventory};

/// Rows of an [`AssignmentMatrix`] must sum to one within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Above this fraction of nonzero entries the payoff uses a dense product.
const DENSE_PRODUCT_THRESHOLD: f64 = 0.05;

/// Masses below this are flushed to zero after each update. Keeping them
/// would let products with weights down to `f64::EPSILON` go subnormal,
/// which slows the next payoff product by orders of magnitude.
pub const MASS_FLOOR: f64 = f64::MIN_POSITIVE / f64::EPSILON;

/// Row-stochastic node-by-sense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    node_ids: Vec<String>,
    values: Array2<f64>,
}

impl AssignmentMatrix {
    pub fn new(node_ids: Vec<String>, values: Array2<f64>) -> Result<Self> {
        if node_ids.len() != values.nrows() {
            return Err(Error::DimensionMismatch {
                op: "assignment matrix",
                left: (node_ids.len(), 1),
                right: values.dim(),
            });
        }
        for (i, row) in values.outer_iter().enumerate() {
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidMatrix(format!("row {i} has entry {v} outside [0, 1]")));
            }
            let sum = row.sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidMatrix(format!("row {i} sums to {sum}")));
            }
        }
        Ok(AssignmentMatrix { node_ids, values })
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of senses.
    pub fn m(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }
}

/// The pure strategies available to each node, in column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategySets(Vec<Vec<usize>>);

impl StrategySets {
    pub fn new(sets: Vec<Vec<usize>>) -> Self {
        StrategySets(sets)
    }

    /// Strategies with nonzero initial mass. Labeled rows get only their
    /// label; unlabeled rows get their verb's candidates.
    pub fn from_support(x: &AssignmentMatrix) -> Self {
        StrategySets(
            x.values
                .outer_iter()
                .map(|row| row.iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(h, _)| h).collect())
                .collect(),
        )
    }

    pub fn get(&self, node: usize) -> &[usize] {
        &self.0[node]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    pub max_iterations: usize,
    /// Stop once the largest absolute entry change of a step falls below this.
    pub tolerance: f64,
    pub renormalize_each_step: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            max_iterations: 100,
            tolerance: 1e-6,
            renormalize_each_step: true,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace {
    pub iterations_run: usize,
    pub final_residual: f64,
    /// `sum_ij w_ij <x_i, x_j>` for the initial iterate and after each step.
    pub potential_history: Vec<f64>,
    pub converged: bool,
    /// Nodes that received zero total support on some step and were left as is.
    pub zero_payoff_nodes: Vec<usize>,
}

/// Result of a single replicator step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub assignment: AssignmentMatrix,
    /// Rows whose average payoff was zero; they are returned unchanged.
    pub zero_payoff_nodes: Vec<usize>,
}

fn check_dims(op: &'static str, w: &SimilarityGraph, x: &Array2<f64>) -> Result<()> {
    if w.n() != x.nrows() {
        return Err(Error::DimensionMismatch {
            op,
            left: w.weights().dim(),
            right: x.dim(),
        });
    }
    Ok(())
}

/// `U = W X` in a form that skips zero entries of `X` when it is sparse.
///
/// Each output entry is reduced in ascending neighbour order, so the result
/// does not depend on how rows are scheduled across threads.
fn payoff(w: &Array2<f64>, x: &Array2<f64>) -> Array2<f64> {
    let (n, m) = x.dim();
    if n == 0 || m == 0 {
        return Array2::zeros((n, m));
    }
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (j, row) in x.outer_iter().enumerate() {
        for (h, &v) in row.iter().enumerate() {
            if v != 0.0 {
                columns[h].push((j, v));
            }
        }
    }
    let nnz: usize = columns.iter().map(Vec::len).sum();
    if nnz as f64 > DENSE_PRODUCT_THRESHOLD * (n * m) as f64 {
        return w.dot(x);
    }
    let mut u = Array2::<f64>::zeros((n, m));
    Zip::from(u.rows_mut()).and(w.rows()).par_for_each(|mut out, weights| {
        for (slot, column) in out.iter_mut().zip(&columns) {
            *slot = column.iter().map(|&(j, v)| weights[j] * v).sum();
        }
    });
    u
}

/// Support `u_ih = sum_j w_ij x_jh` for every node and sense.
pub fn support_payoff(w: &SimilarityGraph, x: &AssignmentMatrix) -> Result<Array2<f64>> {
    check_dims("support_payoff", w, &x.values)?;
    Ok(payoff(w.weights(), &x.values))
}

struct Update {
    next: Array2<f64>,
    zero_payoff: Vec<usize>,
    potential: f64,
}

fn replicator_update(x: &Array2<f64>, u: &Array2<f64>, renormalize: bool, iteration: usize) -> Result<Update> {
    let mut next = x.clone();
    let mut zero_payoff = Vec::new();
    let mut potential = 0.0;
    for (i, (mut row, urow)) in next.outer_iter_mut().zip(u.outer_iter()).enumerate() {
        let average: f64 = row.iter().zip(urow.iter()).map(|(a, b)| a * b).sum();
        if !average.is_finite() {
            return Err(Error::NumericalFailure {
                node: i,
                iteration,
                detail: format!("average payoff is {average}"),
            });
        }
        potential += average;
        if average <= 0.0 {
            zero_payoff.push(i);
            continue;
        }
        row.zip_mut_with(&urow, |xv, uv| {
            let v = *xv * uv / average;
            *xv = if v < MASS_FLOOR { 0.0 } else { v };
        });
        if renormalize {
            let sum = row.sum();
            row.mapv_inplace(|v| v / sum);
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure {
                node: i,
                iteration,
                detail: "non-finite assignment after update".into(),
            });
        }
    }
    Ok(Update {
        next,
        zero_payoff,
        potential,
    })
}

/// One replicator update of every row.
pub fn rd_step(w: &SimilarityGraph, x: &AssignmentMatrix, renormalize: bool) -> Result<Step> {
    check_dims("rd_step", w, &x.values)?;
    let u = payoff(w.weights(), &x.values);
    let update = replicator_update(&x.values, &u, renormalize, 0)?;
    Ok(Step {
        assignment: AssignmentMatrix {
            node_ids: x.node_ids.clone(),
            values: update.next,
        },
        zero_payoff_nodes: update.zero_payoff,
    })
}

/// `sum_ij w_ij <x_i, x_j>`, the quantity the dynamics never decrease.
pub fn potential(w: &SimilarityGraph, x: &AssignmentMatrix) -> Result<f64> {
    let u = support_payoff(w, x)?;
    Ok((&x.values * &u).sum())
}

fn max_abs_change(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    Zip::from(a).and(b).fold(0.0f64, |acc, x, y| acc.max((x - y).abs()))
}

/// Iterates [`rd_step`] until the assignment stabilizes.
///
/// Hitting `max_iterations` is reported through `converged = false`, not
/// as an error.
pub fn run_dynamics(
    w: &SimilarityGraph,
    x0: &AssignmentMatrix,
    cfg: &DynamicsConfig,
) -> Result<(AssignmentMatrix, DynamicsTrace)> {
    cfg.validate()?;
    check_dims("run_dynamics", w, &x0.values)?;
    let mut x = x0.values.clone();
    let mut history = Vec::with_capacity(cfg.max_iterations + 1);
    let mut zero_payoff = vec![false; x.nrows()];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        let u = payoff(w.weights(), &x);
        let update = replicator_update(&x, &u, cfg.renormalize_each_step, iterations)?;
        history.push(update.potential);
        for i in update.zero_payoff {
            zero_payoff[i] = true;
        }
        residual = max_abs_change(&x, &update.next);
        x = update.next;
        iterations += 1;
        if residual < cfg.tolerance {
            converged = true;
            break;
        }
    }
    let u = payoff(w.weights(), &x);
    history.push((&x * &u).sum());

    let trace = DynamicsTrace {
        iterations_run: iterations,
        final_residual: residual,
        potential_history: history,
        converged,
        zero_payoff_nodes: zero_payoff.iter().enumerate().filter(|(_, z)| **z).map(|(i, _)| i).collect(),
    };
    Ok((
        AssignmentMatrix {
            node_ids: x0.node_ids.clone(),
            values: x,
        },
        trace,
    ))
}

/// Per-node outcome of the labeling consistency check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub passed: Vec<bool>,
    /// `max_h u_ih - sum_k x_ik u_ik` over the node's strategies; positive
    /// values mean some pure strategy earns more than the current mix.
    pub worst_violation: Vec<f64>,
}

impl ConsistencyReport {
    pub fn all_passed(&self) -> bool {
        self.passed.iter().all(|p| *p)
    }

    pub fn failures(&self) -> Vec<usize> {
        self.passed.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i).collect()
    }
}

/// Checks that no node could gain more than `tol` by switching to any pure
/// strategy in its set. Payoffs are linear in the node's own strategy, so
/// pure deviations are the only ones that need checking.
pub fn check_consistency(
    w: &SimilarityGraph,
    x: &AssignmentMatrix,
    strategies: &StrategySets,
    tol: f64,
) -> Result<ConsistencyReport> {
    check_dims("check_consistency", w, &x.values)?;
    if strategies.len() != x.n() {
        return Err(Error::DimensionMismatch {
            op: "check_consistency",
            left: x.values.dim(),
            right: (strategies.len(), x.m()),
        });
    }
    let u = payoff(w.weights(), &x.values);
    let mut passed = Vec::with_capacity(x.n());
    let mut worst = Vec::with_capacity(x.n());
    for (i, (xrow, urow)) in x.values.outer_iter().zip(u.outer_iter()).enumerate() {
        let average: f64 = xrow.iter().zip(urow.iter()).map(|(a, b)| a * b).sum();
        let violation = strategies
            .get(i)
            .iter()
            .map(|&h| urow[h] - average)
            .fold(f64::NEG_INFINITY, f64::max);
        let violation = if violation.is_finite() { violation } else { 0.0 };
        passed.push(violation <= tol);
        worst.push(violation);
    }
    Ok(ConsistencyReport {
        passed,
        worst_violation: worst,
    })
}

/// Reads out one sense per node: the candidate with the largest mass,
/// ties going to the sense listed first for the node's verb.
pub fn predict(x: &AssignmentMatrix, inventory: &SenseInventory, labeling: &NodeLabeling) -> Result<Predictions> {
    if labeling.len() != x.n() {
        return Err(Error::DimensionMismatch {
            op: "predict",
            left: x.values.dim(),
            right: (labeling.len(), inventory.sense_count()),
        });
    }
    if inventory.sense_count() != x.m() {
        return Err(Error::DimensionMismatch {
            op: "predict",
            left: x.values.dim(),
            right: (x.n(), inventory.sense_count()),
        });
    }
    let resolved = labeling.resolve(inventory)?;
    let mut out = Predictions::new();
    for (i, r) in resolved.iter().enumerate() {
        let node = &x.node_ids[i];
        if *node != labeling.get(i).node_id {
            return Err(Error::NodeIdMismatch {
                index: i,
                left: node.clone(),
                right: labeling.get(i).node_id.clone(),
            });
        }
        let row = x.values.row(i);
        let mut best: Option<(usize, f64)> = None;
        for &h in inventory.candidates(r.verb) {
            if best.is_none_or(|(_, b)| row[h] > b) {
                best = Some((h, row[h]));
            }
        }
        match best {
            Some((h, v)) if v > 0.0 => {
                out.insert(node.clone(), inventory.sense_id(h).to_string());
            }
            _ => return Err(Error::ZeroRow { node: node.clone() }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sense::NodeLabel;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Axis};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("n{i}")).collect()
    }

    fn graph(w: Array2<f64>) -> SimilarityGraph {
        SimilarityGraph::from_weights(w).unwrap()
    }

    fn assignment(v: Array2<f64>) -> AssignmentMatrix {
        AssignmentMatrix::new(ids(v.nrows()), v).unwrap()
    }

    fn random_instance(n: usize, m: usize, seed: u64) -> (SimilarityGraph, AssignmentMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let v: f64 = rng.random();
                w[[i, j]] = v;
                w[[j, i]] = v;
            }
        }
        let mut x = Array2::<f64>::from_shape_fn((n, m), |_| rng.random::<f64>() + 0.01);
        for mut row in x.outer_iter_mut() {
            let s = row.sum();
            row.mapv_inplace(|v| v / s);
        }
        (graph(w), assignment(x))
    }

    #[test]
    fn single_edge_payoff() {
        let w = graph(array![[0.0, 1.0], [1.0, 0.0]]);
        let x = assignment(array![[1.0, 0.0], [0.5, 0.5]]);
        assert_eq!(support_payoff(&w, &x).unwrap(), array![[0.5, 0.5], [1.0, 0.0]]);
    }

    #[test]
    fn empty_graph_payoff_is_zero() {
        let w = graph(Array2::zeros((3, 3)));
        let (_, x) = random_instance(3, 4, 1);
        assert!(support_payoff(&w, &x).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn payoff_matches_double_loop() {
        let (w, x) = random_instance(5, 3, 2);
        let u = support_payoff(&w, &x).unwrap();
        for i in 0..5 {
            for h in 0..3 {
                let mut expected = 0.0;
                for j in 0..5 {
                    expected += w.weights()[[i, j]] * x.values()[[j, h]];
                }
                assert_abs_diff_eq!(u[[i, h]], expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sparse_and_dense_products_agree() {
        let (w, _) = random_instance(30, 8, 3);
        let mut x = Array2::<f64>::zeros((30, 8));
        for i in 0..30 {
            x[[i, i % 8]] = 0.5;
            x[[i, (i + 3) % 8]] = 0.5;
        }
        let sparse = payoff(w.weights(), &x);
        let dense = w.weights().dot(&x);
        for (a, b) in sparse.iter().zip(dense.iter()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn payoff_dimension_mismatch() {
        let w = graph(Array2::zeros((3, 3)));
        let x = assignment(array![[1.0, 0.0], [0.0, 1.0]]);
        match support_payoff(&w, &x) {
            Err(Error::DimensionMismatch { left, right, .. }) => {
                assert_eq!((left, right), ((3, 3), (2, 2)));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(rd_step(&w, &x, true).is_err());
    }

    #[test]
    fn one_hot_rows_are_fixed() {
        let (w, _) = random_instance(3, 3, 4);
        let x = assignment(array![[0.0, 1.0, 0.0], [0.2, 0.3, 0.5], [1.0, 0.0, 0.0]]);
        let step = rd_step(&w, &x, true).unwrap();
        assert_eq!(step.assignment.row(0).to_vec(), vec![0.0, 1.0, 0.0]);
        assert_eq!(step.assignment.row(2).to_vec(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn direct_substitution() {
        let w = graph(array![[0.0, 2.0, 1.0], [2.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let x = assignment(array![[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(support_payoff(&w, &x).unwrap().row(0).to_vec(), vec![2.0, 1.0]);
        let step = rd_step(&w, &x, false).unwrap();
        assert_abs_diff_eq!(step.assignment.row(0)[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(step.assignment.row(0)[1], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn step_matches_scalar_loop() {
        let (w, x) = random_instance(6, 4, 5);
        let step = rd_step(&w, &x, false).unwrap();
        for i in 0..6 {
            let u: Vec<f64> = (0..4).map(|h| (0..6).map(|j| w.weights()[[i, j]] * x.values()[[j, h]]).sum()).collect();
            let avg: f64 = (0..4).map(|h| x.values()[[i, h]] * u[h]).sum();
            for (h, uh) in u.iter().enumerate() {
                assert_abs_diff_eq!(step.assignment.values()[[i, h]], x.values()[[i, h]] * uh / avg, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn isolated_node_is_flagged_and_unchanged() {
        let w = graph(array![[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        let x = assignment(array![[1.0, 0.0], [0.5, 0.5], [0.3, 0.7]]);
        let step = rd_step(&w, &x, true).unwrap();
        assert_eq!(step.zero_payoff_nodes, vec![2]);
        assert_eq!(step.assignment.row(2).to_vec(), vec![0.3, 0.7]);
        let (_, trace) = run_dynamics(&w, &x, &DynamicsConfig::default()).unwrap();
        assert_eq!(trace.zero_payoff_nodes, vec![2]);
    }

    #[test]
    fn labeled_neighbour_dominates() {
        let w = graph(array![[0.0, 1.0], [1.0, 0.0]]);
        let x = assignment(array![[1.0, 0.0], [0.5, 0.5]]);
        let (out, trace) = run_dynamics(&w, &x, &DynamicsConfig::default()).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.potential_history.len(), trace.iterations_run + 1);
        assert_abs_diff_eq!(out.row(1)[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(out.row(1)[1], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn symmetric_ring_stays_symmetric() {
        // rotating the ring maps the instance onto itself
        let w = graph(array![[0.0, 0.7, 0.7], [0.7, 0.0, 0.7], [0.7, 0.7, 0.0]]);
        let x = assignment(array![[0.6, 0.4], [0.6, 0.4], [0.6, 0.4]]);
        let (out, _) = run_dynamics(&w, &x, &DynamicsConfig::default()).unwrap();
        let perm = [1, 2, 0];
        let permuted_x = assignment(x.values().select(Axis(0), &perm));
        let (out_p, _) = run_dynamics(&w, &permuted_x, &DynamicsConfig::default()).unwrap();
        for (i, &p) in perm.iter().enumerate() {
            for h in 0..2 {
                assert_abs_diff_eq!(out_p.values()[[i, h]], out.values()[[p, h]], epsilon = 1e-12);
                assert_abs_diff_eq!(out.values()[[i, h]], out.values()[[0, h]], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hitting_the_cap_is_not_an_error() {
        let (w, x) = random_instance(10, 3, 6);
        let cfg = DynamicsConfig {
            max_iterations: 2,
            tolerance: 1e-300,
            renormalize_each_step: true,
        };
        let (_, trace) = run_dynamics(&w, &x, &cfg).unwrap();
        assert!(!trace.converged);
        assert_eq!(trace.iterations_run, 2);
        assert_eq!(trace.potential_history.len(), 3);
    }

    #[test]
    fn config_validation() {
        let mut cfg = DynamicsConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.max_iterations = 0;
        assert!(cfg.validate().is_err());
        cfg.max_iterations = 1;
        cfg.tolerance = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn consistency_cases() {
        let w = graph(Array2::zeros((2, 2)));
        let x = assignment(array![[0.5, 0.5], [0.5, 0.5]]);
        let report = check_consistency(&w, &x, &StrategySets::from_support(&x), 1e-6).unwrap();
        assert!(report.all_passed());

        // node 0 is uniform but its only neighbour is one-hot on sense 0
        let w = graph(array![[0.0, 1.0], [1.0, 0.0]]);
        let x = assignment(array![[0.5, 0.5], [1.0, 0.0]]);
        let report = check_consistency(&w, &x, &StrategySets::from_support(&x), 1e-6).unwrap();
        assert_eq!(report.failures(), vec![0]);
        assert_abs_diff_eq!(report.worst_violation[0], 0.5, epsilon = 1e-15);

        let (out, _) = run_dynamics(&w, &x, &DynamicsConfig::default()).unwrap();
        assert!(check_consistency(&w, &out, &StrategySets::from_support(&x), 1e-6)
            .unwrap()
            .all_passed());
    }

    #[test]
    fn assignment_validation() {
        assert!(AssignmentMatrix::new(ids(1), array![[0.5, 0.4]]).is_err());
        assert!(AssignmentMatrix::new(ids(1), array![[1.5, -0.5]]).is_err());
        assert!(AssignmentMatrix::new(ids(2), array![[1.0, 0.0]]).is_err());
        assert!(AssignmentMatrix::new(ids(1), array![[f64::NAN, 1.0]]).is_err());
    }

    fn readout_fixture() -> (SenseInventory, NodeLabeling) {
        let mut inv = SenseInventory::new();
        inv.add_sense("run", "run#1", None).unwrap();
        inv.add_sense("run", "run#2", None).unwrap();
        inv.add_sense("eat", "eat#1", None).unwrap();
        let lab = NodeLabeling::new(
            (0..2)
                .map(|i| NodeLabel {
                    node_id: format!("n{i}"),
                    verb: "run".into(),
                    sense: None,
                })
                .collect(),
        )
        .unwrap();
        (inv, lab)
    }

    #[test]
    fn argmax_readout_with_ties() {
        let (inv, lab) = readout_fixture();
        let x = assignment(array![[0.7, 0.3, 0.0], [0.5, 0.5, 0.0]]);
        let p = predict(&x, &inv, &lab).unwrap();
        assert_eq!(p["n0"], "run#1");
        assert_eq!(p["n1"], "run#1");
    }

    #[test]
    fn readout_rejects_row_without_candidate_mass() {
        let (inv, lab) = readout_fixture();
        let x = assignment(array![[0.0, 0.0, 1.0], [0.5, 0.5, 0.0]]);
        assert!(matches!(predict(&x, &inv, &lab), Err(Error::ZeroRow { node }) if node == "n0"));
    }
}
