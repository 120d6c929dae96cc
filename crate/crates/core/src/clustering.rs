//! Seeded Lloyd's k-means with k-means++ initialization.
//!
//! Results never contain empty clusters: a cluster that loses all its points
//! during an iteration takes over the point farthest from the centroid of the
//! currently largest cluster.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{squared_distance, ClassDataset, ExemplarId};
use crate::scalar::Scalar;

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering<S> {
    /// Exemplar ids, aligned with `assignments`.
    pub ids: Vec<ExemplarId>,
    /// Cluster index per exemplar, in dataset order.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<S>>,
    pub sizes: Vec<usize>,
    /// Within-cluster sum of squares after each Lloyd iteration.
    pub wcss_history: Vec<S>,
    pub converged: bool,
}

impl<S: Scalar> Clustering<S> {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn cluster_of(&self, id: ExemplarId) -> Option<usize> {
        self.ids
            .iter()
            .position(|&i| i == id)
            .map(|p| self.assignments[p])
    }

    /// Dataset positions of the members of `cluster`.
    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignments
            .iter()
            .enumerate()
            .filter(move |(_, &a)| a == cluster)
            .map(|(p, _)| p)
    }

    pub fn wcss(&self) -> S {
        *self.wcss_history.last().expect("at least one iteration is recorded")
    }
}

/// Cluster indices in non-increasing size order, ties by ascending index.
pub fn sort_clusters_by_size<S>(c: &Clustering<S>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..c.sizes.len()).collect();
    order.sort_by(|&a, &b| c.sizes[b].cmp(&c.sizes[a]).then(a.cmp(&b)));
    order
}

pub fn kmeans<S: Scalar>(data: &ClassDataset<S>, k: usize, seed: u64) -> Result<Clustering<S>> {
    check_k(data, k)?;
    let init = plus_plus_init(data, k, seed);
    Ok(lloyd(data, init))
}

/// Runs Lloyd iterations from caller-supplied initial centroids.
pub fn kmeans_from_centroids<S: Scalar>(
    data: &ClassDataset<S>,
    centroids: Vec<Vec<S>>,
) -> Result<Clustering<S>> {
    check_k(data, centroids.len())?;
    if centroids.iter().any(|c| c.len() != data.dim()) {
        return Err(Error::invalid("initial centroid dimension differs from data"));
    }
    Ok(lloyd(data, centroids))
}

fn check_k<S: Scalar>(data: &ClassDataset<S>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > data.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the {} exemplars of class {}",
            data.len(),
            data.class_id()
        )));
    }
    Ok(())
}

fn plus_plus_init<S: Scalar>(data: &ClassDataset<S>, k: usize, seed: u64) -> Vec<Vec<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items = data.items();
    let m = items.len();
    let mut chosen = vec![false; m];
    let first = rng.random_range(0..m);
    chosen[first] = true;
    let mut centroids = vec![items[first].1.as_slice().to_vec()];
    let mut nearest: Vec<f64> = items
        .iter()
        .map(|(_, e)| squared_distance(e.as_slice(), &centroids[0]).to_f64_lossy())
        .collect();

    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (p, &w) in nearest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                if target < w {
                    pick = Some(p);
                    break;
                }
                target -= w;
                pick = Some(p);
            }
            pick.expect("positive total weight has a positive entry")
        } else {
            // every point coincides with a centroid; take any unused point
            let free: Vec<usize> = (0..m).filter(|&p| !chosen[p]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[next] = true;
        let c = items[next].1.as_slice().to_vec();
        for (p, (_, e)) in items.iter().enumerate() {
            let d = squared_distance(e.as_slice(), &c).to_f64_lossy();
            if d < nearest[p] {
                nearest[p] = d;
            }
        }
        centroids.push(c);
    }
    centroids
}

fn nearest_centroid<S: Scalar>(point: &[S], centroids: &[Vec<S>]) -> usize {
    let mut best = 0;
    let mut best_d = squared_distance(point, &centroids[0]);
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = squared_distance(point, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn recompute_means<S: Scalar>(data: &ClassDataset<S>, assignments: &[usize], k: usize) -> Vec<Vec<S>> {
    let dim = data.dim();
    let mut sums = vec![vec![S::zero(); dim]; k];
    let mut counts = vec![0usize; k];
    for ((_, e), &a) in data.items().iter().zip(assignments) {
        counts[a] += 1;
        for (s, &v) in sums[a].iter_mut().zip(e.as_slice()) {
            *s += v;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        let n = S::from_usize(n).expect("count fits the scalar type");
        s.iter_mut().for_each(|v| *v /= n);
    }
    sums
}

fn counts(assignments: &[usize], k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    sizes
}

/// Gives every empty cluster one point taken from the largest cluster.
fn repair_empty<S: Scalar>(
    data: &ClassDataset<S>,
    assignments: &mut [usize],
    centroids: &mut [Vec<S>],
) {
    let k = centroids.len();
    loop {
        let sizes = counts(assignments, k);
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut largest = 0;
        for j in 1..k {
            if sizes[j] > sizes[largest] {
                largest = j;
            }
        }
        let mut farthest = None;
        let mut far_d = S::neg_infinity();
        for (p, (_, e)) in data.items().iter().enumerate() {
            if assignments[p] != largest {
                continue;
            }
            let d = squared_distance(e.as_slice(), &centroids[largest]);
            if d > far_d {
                far_d = d;
                farthest = Some(p);
            }
        }
        let p = farthest.expect("largest cluster is non-empty");
        assignments[p] = empty;
        centroids[empty] = data.items()[p].1.as_slice().to_vec();
    }
}

fn wcss<S: Scalar>(data: &ClassDataset<S>, assignments: &[usize], centroids: &[Vec<S>]) -> S {
    data.items()
        .iter()
        .zip(assignments)
        .map(|((_, e), &a)| squared_distance(e.as_slice(), &centroids[a]))
        .sum()
}

fn lloyd<S: Scalar>(data: &ClassDataset<S>, mut centroids: Vec<Vec<S>>) -> Clustering<S> {
    let k = centroids.len();
    let mut assignments: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        let mut next: Vec<usize> = data
            .items()
            .iter()
            .map(|(_, e)| nearest_centroid(e.as_slice(), &centroids))
            .collect();
        repair_empty(data, &mut next, &mut centroids);
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
        centroids = recompute_means(data, &assignments, k);
        history.push(wcss(data, &assignments, &centroids));
    }

    Clustering {
        ids: data.ids().collect(),
        sizes: counts(&assignments, k),
        assignments,
        centroids,
        wcss_history: history,
        converged,
    }
}
