//! Gaussian-cluster datasets where every cluster is one sense of a single verb.
//!
//! Three views of the same clusters are produced (tagged `CNN`, `O` and
//! `C`), each with its own random centers, so that fusion recipes can be
//! exercised without real features.

use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::eval::SenseEmbeddingSet;
use crate::graph::{EmbeddingSet, Modality};
use crate::io;
use crate::sense::{NodeLabel, NodeLabeling, SenseInventory};

pub const VERB: &str = "synth";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub clusters: usize,
    pub points: usize,
    pub dim: usize,
    /// Per-coordinate standard deviation around unit-norm centers.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            clusters: 3,
            points: 300,
            dim: 16,
            noise: 0.15,
            seed: 7,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.clusters < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 clusters, got {}", self.clusters)));
        }
        if self.points < self.clusters {
            return Err(Error::InvalidConfig(format!(
                "need at least one point per cluster ({} points, {} clusters)",
                self.points, self.clusters
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dim must be positive".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::InvalidConfig(format!("noise must be a nonnegative number, got {}", self.noise)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticView {
    pub embeddings: EmbeddingSet,
    /// Unit-norm cluster centers, one row per sense.
    pub centers: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub inventory: SenseInventory,
    pub truth: NodeLabeling,
    /// Cluster index of every point.
    pub cluster_of: Vec<usize>,
    pub views: Vec<SyntheticView>,
}

impl SyntheticDataset {
    pub fn view(&self, modality: Modality) -> Option<&SyntheticView> {
        self.views.iter().find(|v| v.embeddings.modality() == modality)
    }

    /// The `CNN` view centers as a sense dictionary.
    pub fn sense_embeddings(&self) -> SenseEmbeddingSet {
        let view = &self.views[0];
        let mut set = SenseEmbeddingSet::new(view.centers.ncols());
        for (k, row) in view.centers.outer_iter().enumerate() {
            set.insert(VERB, &sense_id(k), row.to_vec()).expect("centers are unit norm");
        }
        set
    }

    /// Writes `inventory.tsv`, `labels.tsv`, `senses.tsv` and one `.emb` per view.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let inv = dir.join("inventory.tsv");
        io::write_inventory(&self.inventory, &inv)?;
        written.push(inv);
        let labels = dir.join("labels.tsv");
        io::write_labels(&self.truth, &labels)?;
        written.push(labels);
        let senses = dir.join("senses.tsv");
        io::write_sense_embeddings(&self.sense_embeddings(), &senses)?;
        written.push(senses);
        for view in &self.views {
            let path = dir.join(format!("{}.emb", view.embeddings.modality().to_string().to_lowercase()));
            io::write_embeddings(&view.embeddings, &path)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn sense_id(cluster: usize) -> String {
    format!("{VERB}.{cluster}")
}

fn unit_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Array1<f64> {
    loop {
        let v: Array1<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.dot(&v).sqrt();
        if norm > 0.0 {
            return v / norm;
        }
    }
}

/// Orthonormal when `clusters <= dim`, otherwise plain random unit vectors.
fn random_centers(rng: &mut ChaCha8Rng, clusters: usize, dim: usize) -> Array2<f64> {
    let mut centers = Array2::<f64>::zeros((clusters, dim));
    for k in 0..clusters {
        let mut v = unit_gaussian(rng, dim);
        if k < dim {
            loop {
                for prev in centers.outer_iter().take(k) {
                    let proj = prev.dot(&v);
                    v.scaled_add(-proj, &prev);
                }
                let norm = v.dot(&v).sqrt();
                if norm > 1e-8 {
                    v /= norm;
                    break;
                }
                v = unit_gaussian(rng, dim);
            }
        }
        centers.row_mut(k).assign(&v);
    }
    centers
}

fn make_view(params: &SynthParams, cluster_of: &[usize], ids: &[String], modality: Modality, rng: &mut ChaCha8Rng) -> Result<SyntheticView> {
    let centers = random_centers(rng, params.clusters, params.dim);
    let mut points = Array2::<f64>::zeros((params.points, params.dim));
    for (i, mut row) in points.outer_iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *v = centers[[cluster_of[i], k]] + params.noise * z;
        }
    }
    Ok(SyntheticView {
        embeddings: EmbeddingSet::normalized(ids.to_vec(), points, modality)?,
        centers,
    })
}

/// Points are assigned to clusters round-robin, so cluster sizes differ by
/// at most one. Identical parameters give identical data.
pub fn generate(params: &SynthParams) -> Result<SyntheticDataset> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut inventory = SenseInventory::new();
    for k in 0..params.clusters {
        inventory.add_sense(VERB, &sense_id(k), None)?;
    }
    let width = params.points.to_string().len();
    let ids: Vec<String> = (0..params.points).map(|i| format!("p{i:0width$}")).collect();
    let cluster_of: Vec<usize> = (0..params.points).map(|i| i % params.clusters).collect();
    let truth = NodeLabeling::new(
        ids.iter()
            .zip(&cluster_of)
            .map(|(id, &k)| NodeLabel {
                node_id: id.clone(),
                verb: VERB.to_string(),
                sense: Some(sense_id(k)),
            })
            .collect(),
    )?;
    let views = [Modality::CNN, Modality::OBJECTS, Modality::CAPTIONS]
        .into_iter()
        .map(|m| make_view(params, &cluster_of, &ids, m, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticDataset {
        inventory,
        truth,
        cluster_of,
        views,
    })
}

/// Fraction of points whose nearest center (by cosine) is their own.
pub fn center_separability(view: &SyntheticView, cluster_of: &[usize]) -> f64 {
    let emb = view.embeddings.vectors();
    let scores = emb.dot(&view.centers.t());
    let hits = scores
        .outer_iter()
        .zip(cluster_of)
        .filter(|(row, &k)| {
            let best = row
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
            best.0 == k
        })
        .count();
    hits as f64 / cluster_of.len() as f64
}
