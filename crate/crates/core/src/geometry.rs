//! Embeddings, per-class datasets, Euclidean distances, brute-force K-NN and
//! the typicality score (inverse mean distance to the K nearest neighbors).

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type ExemplarId = usize;
pub type ClassId = u32;

/// Added to the mean neighbor distance before inversion so duplicated
/// exemplars get a large but finite typicality.
pub const TYPICALITY_EPS: f64 = 1e-12;

/// Default neighborhood size for typicality.
pub const DEFAULT_KNN: usize = 20;

/// A point in feature space. Non-empty, all entries finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding<S>(Vec<S>);

impl<S: Scalar> Embedding<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("embedding must have dimension > 0"));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "embedding entry {pos} is not finite"
            )));
        }
        Ok(Embedding(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }

    pub fn scaled(&self, c: S) -> Self {
        Embedding(self.0.iter().map(|&v| v * c).collect())
    }
}

impl<S> AsRef<[S]> for Embedding<S> {
    fn as_ref(&self) -> &[S] {
        &self.0
    }
}

/// Labeled exemplars of one class. Ids are unique, the set is non-empty and
/// every embedding has the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDataset<S> {
    class_id: ClassId,
    items: Vec<(ExemplarId, Embedding<S>)>,
}

impl<S: Scalar> ClassDataset<S> {
    pub fn new(class_id: ClassId, items: Vec<(ExemplarId, Embedding<S>)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::invalid(format!("class {class_id} has no exemplars")));
        }
        let dim = items[0].1.dim();
        let mut seen = BTreeSet::new();
        for (id, emb) in &items {
            if emb.dim() != dim {
                return Err(Error::invalid(format!(
                    "class {class_id}: exemplar {id} has dimension {}, expected {dim}",
                    emb.dim()
                )));
            }
            if !seen.insert(*id) {
                return Err(Error::invalid(format!(
                    "class {class_id}: duplicate exemplar id {id}"
                )));
            }
        }
        Ok(ClassDataset { class_id, items })
    }

    /// Builds a dataset from raw rows, numbering exemplars `0..rows.len()`.
    pub fn from_rows(class_id: ClassId, rows: Vec<Vec<S>>) -> Result<Self> {
        let items = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| Embedding::new(r).map(|e| (i, e)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(class_id, items)
    }

    pub fn class_id(&self) -> ClassId {
        self.class_id
    }

    pub fn items(&self) -> &[(ExemplarId, Embedding<S>)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.items[0].1.dim()
    }

    pub fn ids(&self) -> impl Iterator<Item = ExemplarId> + '_ {
        self.items.iter().map(|(id, _)| *id)
    }

    pub fn position(&self, id: ExemplarId) -> Option<usize> {
        self.items.iter().position(|(i, _)| *i == id)
    }

    pub fn embedding(&self, id: ExemplarId) -> Option<&Embedding<S>> {
        self.items.iter().find(|(i, _)| *i == id).map(|(_, e)| e)
    }

    /// Componentwise mean of all embeddings.
    pub fn mean(&self) -> Vec<S> {
        let mut acc = vec![S::zero(); self.dim()];
        for (_, e) in &self.items {
            for (a, &v) in acc.iter_mut().zip(e.as_slice()) {
                *a += v;
            }
        }
        let m = S::from_usize(self.len()).expect("class size fits the scalar type");
        acc.iter_mut().for_each(|a| *a /= m);
        acc
    }

    /// Applies `f` to every embedding, keeping ids.
    pub fn map_embeddings(&self, mut f: impl FnMut(&Embedding<S>) -> Embedding<S>) -> Result<Self> {
        let items = self.items.iter().map(|(id, e)| (*id, f(e))).collect();
        Self::new(self.class_id, items)
    }
}

pub fn squared_distance<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

pub fn euclidean_distance<S: Scalar>(a: &Embedding<S>, b: &Embedding<S>) -> Result<S> {
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(squared_distance(a.as_slice(), b.as_slice()).sqrt())
}

/// Total order on (distance, id) used for neighbor ranking.
fn by_distance_then_id<S: Scalar>(a: &(S, ExemplarId), b: &(S, ExemplarId)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.cmp(&b.1))
}

/// Distances from item `pos` to every other item, paired with their ids.
fn distances_from<S: Scalar>(data: &ClassDataset<S>, pos: usize) -> Vec<(S, ExemplarId)> {
    let q = data.items[pos].1.as_slice();
    data.items
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != pos)
        .map(|(_, (id, e))| (squared_distance(q, e.as_slice()).sqrt(), *id))
        .collect()
}

/// Keeps the `k` smallest entries of `dists`, sorted by (distance, id).
fn take_nearest<S: Scalar>(mut dists: Vec<(S, ExemplarId)>, k: usize) -> Vec<(S, ExemplarId)> {
    let k = k.min(dists.len());
    if k == 0 {
        return Vec::new();
    }
    if k < dists.len() {
        dists.select_nth_unstable_by(k - 1, by_distance_then_id);
        dists.truncate(k);
    }
    dists.sort_by(by_distance_then_id);
    dists
}

/// The `k` exemplars closest to `query_id`, excluding the query itself.
///
/// `k` is clamped to `m - 1` for small classes; ties go to the lower id.
pub fn k_nearest_neighbors<S: Scalar>(
    query_id: ExemplarId,
    data: &ClassDataset<S>,
    k: usize,
) -> Result<Vec<ExemplarId>> {
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    let pos = data.position(query_id).ok_or(Error::NotFound(query_id))?;
    Ok(take_nearest(distances_from(data, pos), k)
        .into_iter()
        .map(|(_, id)| id)
        .collect())
}

fn typicality_from_neighbors<S: Scalar>(nearest: &[(S, ExemplarId)]) -> S {
    let k = S::from_usize(nearest.len()).expect("K fits the scalar type");
    let mean = nearest.iter().map(|(d, _)| *d).sum::<S>() / k;
    (mean + S::from_f64_lossy(TYPICALITY_EPS)).recip()
}

/// Inverse of the mean distance from `query_id` to its `k` nearest
/// same-class neighbors.
pub fn typicality<S: Scalar>(query_id: ExemplarId, data: &ClassDataset<S>, k: usize) -> Result<S> {
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    let pos = data.position(query_id).ok_or(Error::NotFound(query_id))?;
    if data.len() < 2 {
        return Err(Error::invalid(format!(
            "typicality is undefined for singleton class {}",
            data.class_id()
        )));
    }
    let nearest = take_nearest(distances_from(data, pos), k);
    Ok(typicality_from_neighbors(&nearest))
}

/// Typicality of every exemplar, aligned with `data.items()`.
///
/// Builds the full pairwise distance matrix once, so this is the entry point
/// selection uses.
pub fn typicality_scores<S: Scalar>(data: &ClassDataset<S>, k: usize) -> Result<Vec<S>> {
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    let m = data.len();
    if m < 2 {
        return Err(Error::invalid(format!(
            "typicality is undefined for singleton class {}",
            data.class_id()
        )));
    }
    let dist = pairwise_distances(data);
    let scores = (0..m)
        .map(|i| {
            let row: Vec<(S, ExemplarId)> = (0..m)
                .filter(|&j| j != i)
                .map(|j| (dist[i * m + j], data.items[j].0))
                .collect();
            typicality_from_neighbors(&take_nearest(row, k))
        })
        .collect();
    Ok(scores)
}

/// Row-major `m x m` matrix of Euclidean distances between items.
pub fn pairwise_distances<S: Scalar>(data: &ClassDataset<S>) -> Vec<S> {
    let m = data.len();
    let mut out = vec![S::zero(); m * m];
    for i in 0..m {
        let a = data.items[i].1.as_slice();
        for j in (i + 1)..m {
            let d = squared_distance(a, data.items[j].1.as_slice()).sqrt();
            out[i * m + j] = d;
            out[j * m + i] = d;
        }
    }
    out
}
