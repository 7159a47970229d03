//! Embedding sets, modality fusion and the cosine similarity graph.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use ndarray::{concatenate, Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// Rows of an [`EmbeddingSet`] must have unit L2 norm within this tolerance.
pub const UNIT_NORM_TOL: f64 = 1e-6;

/// Maximum asymmetry accepted by [`SimilarityGraph::from_weights`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Which feature sources an embedding was built from.
///
/// Concatenating two embeddings unions their sources, so every setup
/// (`O`, `C`, `O+C`, `CNN`, `CNN+O`, `CNN+C`, `CNN+O+C`) is reachable from
/// the three base sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modality(u8);

impl Modality {
    pub const CNN: Modality = Modality(0b001);
    pub const OBJECTS: Modality = Modality(0b010);
    pub const CAPTIONS: Modality = Modality(0b100);

    const NAMES: [(Modality, &'static str); 3] = [
        (Modality::CNN, "CNN"),
        (Modality::OBJECTS, "O"),
        (Modality::CAPTIONS, "C"),
    ];

    /// All seven non-empty setups in canonical order.
    pub fn all_setups() -> [Modality; 7] {
        [
            Modality(0b010),
            Modality(0b100),
            Modality(0b110),
            Modality(0b001),
            Modality(0b011),
            Modality(0b101),
            Modality(0b111),
        ]
    }

    pub fn union(self, other: Modality) -> Modality {
        Modality(self.0 | other.0)
    }

    pub fn contains(self, other: Modality) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn without(self, other: Modality) -> Option<Modality> {
        let rest = self.0 & !other.0;
        (rest != 0).then_some(Modality(rest))
    }

    /// Number of base sources.
    pub fn arity(self) -> u32 {
        self.0.count_ones()
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = Self::NAMES
            .iter()
            .filter(|(m, _)| self.contains(*m))
            .map(|(_, name)| *name)
            .collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u8;
        for part in s.split('+') {
            let part = part.trim();
            let found = Self::NAMES
                .iter()
                .find(|(_, name)| name.eq_ignore_ascii_case(part))
                .ok_or_else(|| Error::UnknownModality(s.to_string()))?;
            bits |= found.0 .0;
        }
        if bits == 0 {
            return Err(Error::UnknownModality(s.to_string()));
        }
        Ok(Modality(bits))
    }
}

/// Node ids paired with unit-norm feature vectors of one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    node_ids: Vec<String>,
    vectors: Array2<f64>,
    modality: Modality,
}

impl EmbeddingSet {
    /// Wraps already normalized vectors, rejecting rows off the unit sphere.
    pub fn new(node_ids: Vec<String>, vectors: Array2<f64>, modality: Modality) -> Result<Self> {
        check_shape(&node_ids, &vectors)?;
        for (i, row) in vectors.outer_iter().enumerate() {
            let norm = finite_norm(&node_ids[i], row)?;
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::NotUnitNorm {
                    node: node_ids[i].clone(),
                    norm,
                });
            }
        }
        Ok(EmbeddingSet {
            node_ids,
            vectors,
            modality,
        })
    }

    /// Scales every row to unit norm.
    pub fn normalized(node_ids: Vec<String>, mut vectors: Array2<f64>, modality: Modality) -> Result<Self> {
        check_shape(&node_ids, &vectors)?;
        for (i, mut row) in vectors.outer_iter_mut().enumerate() {
            let norm = finite_norm(&node_ids[i], row.view())?;
            if norm == 0.0 {
                return Err(Error::ZeroNorm {
                    node: node_ids[i].clone(),
                });
            }
            row.mapv_inplace(|v| v / norm);
        }
        Ok(EmbeddingSet {
            node_ids,
            vectors,
            modality,
        })
    }

    #[cfg(test)]
    pub(crate) fn new_unchecked(node_ids: Vec<String>, vectors: Array2<f64>, modality: Modality) -> Self {
        EmbeddingSet {
            node_ids,
            vectors,
            modality,
        }
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.vectors.row(i)
    }

    /// Restricts the set to `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> EmbeddingSet {
        EmbeddingSet {
            node_ids: indices.iter().map(|&i| self.node_ids[i].clone()).collect(),
            vectors: self.vectors.select(Axis(0), indices),
            modality: self.modality,
        }
    }

    /// Reorders rows to follow `order`, which must be a permutation of the ids.
    pub fn reordered(&self, order: &[String]) -> Result<EmbeddingSet> {
        let index: std::collections::HashMap<&str, usize> = self
            .node_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        if order.len() != self.len() {
            return Err(Error::DimensionMismatch {
                op: "reorder embeddings",
                left: (self.len(), self.dim()),
                right: (order.len(), self.dim()),
            });
        }
        let mut indices = Vec::with_capacity(order.len());
        for (pos, id) in order.iter().enumerate() {
            match index.get(id.as_str()) {
                Some(&i) => indices.push(i),
                None => {
                    return Err(Error::NodeIdMismatch {
                        index: pos,
                        left: id.clone(),
                        right: "<absent from embeddings>".into(),
                    })
                }
            }
        }
        Ok(self.subset(&indices))
    }
}

fn check_shape(node_ids: &[String], vectors: &Array2<f64>) -> Result<()> {
    if node_ids.is_empty() || vectors.ncols() == 0 {
        return Err(Error::EmptyInput("embedding set needs n > 0 and d > 0".into()));
    }
    if node_ids.len() != vectors.nrows() {
        return Err(Error::DimensionMismatch {
            op: "embedding set",
            left: (node_ids.len(), 1),
            right: vectors.dim(),
        });
    }
    let mut seen = HashSet::with_capacity(node_ids.len());
    for id in node_ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

fn finite_norm(node: &str, row: ArrayView1<'_, f64>) -> Result<f64> {
    if row.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMatrix(format!("node `{node}` has a non-finite coordinate")));
    }
    Ok(row.dot(&row).sqrt())
}

/// Symmetric, nonnegative weight matrix with an exactly zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    weights: Array2<f64>,
}

impl SimilarityGraph {
    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        let (rows, cols) = weights.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                op: "similarity graph",
                left: (rows, cols),
                right: (cols, rows),
            });
        }
        for i in 0..rows {
            if weights[[i, i]] != 0.0 {
                return Err(Error::InvalidMatrix(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..rows {
                let w = weights[[i, j]];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidMatrix(format!("weight ({i}, {j}) = {w} is not a finite nonnegative value")));
                }
                if (w - weights[[j, i]]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidMatrix(format!("weights ({i}, {j}) and ({j}, {i}) differ")));
                }
            }
        }
        Ok(SimilarityGraph { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn into_weights(self) -> Array2<f64> {
        self.weights
    }

    /// Induced subgraph on `indices`, in that order.
    pub fn subgraph(&self, indices: &[usize]) -> SimilarityGraph {
        let rows = self.weights.select(Axis(0), indices);
        SimilarityGraph {
            weights: rows.select(Axis(1), indices),
        }
    }

    /// Keeps an edge when either endpoint ranks the other among its `k`
    /// heaviest neighbours (ties go to the lower index). The full graph is
    /// the default everywhere; this is opt-in.
    pub fn sparsify_top_k(&self, k: usize) -> SimilarityGraph {
        let n = self.n();
        let mut keep = Array2::<bool>::from_elem((n, n), false);
        for i in 0..n {
            let row = self.weights.row(i);
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            for &j in order.iter().take(k) {
                keep[[i, j]] = true;
                keep[[j, i]] = true;
            }
        }
        let weights = Array2::from_shape_fn((n, n), |(i, j)| if keep[[i, j]] { self.weights[[i, j]] } else { 0.0 });
        SimilarityGraph { weights }
    }
}

/// Pairwise cosine similarity with negative values clamped to zero and no
/// self-loops.
pub fn build_similarity(emb: &EmbeddingSet) -> Result<SimilarityGraph> {
    let vectors = emb.vectors();
    let norms: Array1<f64> = vectors.outer_iter().map(|r| r.dot(&r).sqrt()).collect();
    if let Some(i) = norms.iter().position(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::ZeroNorm {
            node: emb.node_ids()[i].clone(),
        });
    }
    let gram = vectors.dot(&vectors.t());
    let n = emb.len();
    let mut weights = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let cos = (gram[[i, j]] / (norms[i] * norms[j])).clamp(0.0, 1.0);
            weights[[i, j]] = cos;
            weights[[j, i]] = cos;
        }
    }
    Ok(SimilarityGraph { weights })
}

/// Concatenates two embeddings of the same nodes and re-normalizes each row.
pub fn fuse_concat(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<EmbeddingSet> {
    let common = a.len().min(b.len());
    if let Some(i) = (0..common).find(|&i| a.node_ids[i] != b.node_ids[i]) {
        return Err(Error::NodeIdMismatch {
            index: i,
            left: a.node_ids[i].clone(),
            right: b.node_ids[i].clone(),
        });
    }
    if a.len() != b.len() {
        let missing = "<missing>".to_string();
        return Err(Error::NodeIdMismatch {
            index: common,
            left: a.node_ids.get(common).unwrap_or(&missing).clone(),
            right: b.node_ids.get(common).unwrap_or(&missing).clone(),
        });
    }
    let joined = concatenate(Axis(1), &[a.vectors.view(), b.vectors.view()])
        .map_err(|e| Error::InvalidMatrix(e.to_string()))?;
    EmbeddingSet::normalized(a.node_ids.clone(), joined, a.modality.union(b.modality))
}

/// Arithmetic mean of `vectors`, scaled to unit length.
pub fn mean_pool_unit<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Vec<f64>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::EmptyInput("mean pooling needs at least one vector".into()))?;
    let dim = first.as_ref().len();
    let mut mean = Array1::<f64>::zeros(dim);
    for v in vectors {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                op: "mean pooling",
                left: (1, dim),
                right: (1, v.len()),
            });
        }
        mean += &ArrayView1::from(v);
    }
    mean /= vectors.len() as f64;
    let norm = mean.dot(&mean).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroMean);
    }
    Ok(mean.mapv(|v| v / norm).to_vec())
}
