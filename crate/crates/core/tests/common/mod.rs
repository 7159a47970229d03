#![allow(dead_code)]

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sensegraph::{AssignmentMatrix, EmbeddingSet, NodeLabeling, Predictions, SenseInventory, SimilarityGraph};

/// A random symmetric graph plus an initial assignment where some rows are
/// one-hot and the rest are uniform over a random candidate subset.
pub fn random_instance(seed: u64, max_n: usize, max_m: usize) -> (SimilarityGraph, AssignmentMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_n);
    let m = rng.random_range(1..=max_m);
    let density: f64 = rng.random_range(0.1..=1.0);
    let mut w = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                let v: f64 = rng.random();
                w[[i, j]] = v;
                w[[j, i]] = v;
            }
        }
    }
    let mut x = Array2::<f64>::zeros((n, m));
    for i in 0..n {
        let mut cand: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.6)).collect();
        if cand.is_empty() {
            cand.push(rng.random_range(0..m));
        }
        if rng.random_bool(0.3) {
            x[[i, cand[rng.random_range(0..cand.len())]]] = 1.0;
        } else {
            for &h in &cand {
                x[[i, h]] = 1.0 / cand.len() as f64;
            }
        }
    }
    let ids = (0..n).map(|i| format!("n{i}")).collect();
    (
        SimilarityGraph::from_weights(w).unwrap(),
        AssignmentMatrix::new(ids, x).unwrap(),
    )
}

/// Payoffs by explicit double loop.
pub fn scalar_payoff(w: &Array2<f64>, x: &Array2<f64>) -> Vec<Vec<f64>> {
    let (n, m) = x.dim();
    let mut u = vec![vec![0.0; m]; n];
    for i in 0..n {
        for h in 0..m {
            for j in 0..n {
                u[i][h] += w[[i, j]] * x[[j, h]];
            }
        }
    }
    u
}

/// One replicator step by scalar loops; zero-support rows are kept.
pub fn scalar_step(w: &Array2<f64>, x: &Array2<f64>) -> Array2<f64> {
    let u = scalar_payoff(w, x);
    let (n, m) = x.dim();
    let mut out = x.clone();
    for i in 0..n {
        let mut avg = 0.0;
        for h in 0..m {
            avg += x[[i, h]] * u[i][h];
        }
        if avg > 0.0 {
            for h in 0..m {
                out[[i, h]] = x[[i, h]] * u[i][h] / avg;
            }
            let s: f64 = out.row(i).sum();
            for h in 0..m {
                out[[i, h]] /= s;
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// Predicts, for every unlabeled node, the candidate sense whose labeled
/// members have the nearest mean direction.
pub fn centroid_oracle(
    emb: &EmbeddingSet,
    inventory: &SenseInventory,
    truth: &NodeLabeling,
    labeled: &[usize],
    unlabeled: &[usize],
) -> Predictions {
    let mut sums: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for &i in labeled {
        let sense = truth.get(i).sense.as_deref().unwrap();
        let acc = sums.entry(sense).or_insert_with(|| vec![0.0; emb.dim()]);
        for (a, v) in acc.iter_mut().zip(emb.row(i)) {
            *a += v;
        }
    }
    let mut out = Predictions::new();
    for &i in unlabeled {
        let label = truth.get(i);
        let verb = inventory.verb_index(&label.verb).unwrap();
        let mut best: Option<(&str, f64)> = None;
        for &col in inventory.candidates(verb) {
            let sense = inventory.sense_id(col);
            let Some(c) = sums.get(sense) else { continue };
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cos = c.iter().zip(emb.row(i)).map(|(a, b)| a * b).sum::<f64>() / norm;
            if best.is_none_or(|(_, b)| cos > b) {
                best = Some((sense, cos));
            }
        }
        out.insert(label.node_id.clone(), best.unwrap().0.to_string());
    }
    out
}
