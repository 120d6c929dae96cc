//! Exemplar-selection strategies. Each produces a [`PriorityList`] for one
//! class: the head of the list is kept longest when the buffer shrinks.
//!
//! TEAL grows nested sets `S_1 ⊆ S_2 ⊆ … ⊆ S_k` following a [`PaceSchedule`].
//! At step `i` the class is re-clustered into `s_i` clusters and the most
//! typical point of each of the `s_i - s_{i-1}` largest uncovered clusters is
//! appended. Earlier steps have higher priority.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{kmeans, sort_clusters_by_size};
use crate::error::{Error, Result};
use crate::geometry::{squared_distance, typicality_scores, ClassDataset, ClassId, ExemplarId, DEFAULT_KNN};
use crate::scalar::Scalar;

/// Default base of the logarithmic pace.
pub const DEFAULT_PACE_BASE: f64 = 1.4;

/// First exponent of the logarithmic pace: `s_1 = floor(b^4)`.
const PACE_FIRST_EXPONENT: i32 = 4;

/// Tolerance on probability vectors passed to [`entropy_select`].
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-6;

/// Ordered exemplar ids of one class, highest priority first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityList {
    pub class_id: ClassId,
    pub ordered_ids: Vec<ExemplarId>,
}

impl PriorityList {
    pub fn new(class_id: ClassId, ordered_ids: Vec<ExemplarId>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        if let Some(dup) = ordered_ids.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::invalid(format!(
                "priority list for class {class_id} repeats exemplar {dup}"
            )));
        }
        Ok(PriorityList { class_id, ordered_ids })
    }

    pub fn len(&self) -> usize {
        self.ordered_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered_ids.is_empty()
    }

    /// The first `n` ids (or all of them).
    pub fn prefix(&self, n: usize) -> &[ExemplarId] {
        &self.ordered_ids[..n.min(self.len())]
    }
}

/// Strictly increasing selection sizes `s_1 < … < s_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaceSchedule {
    sizes: Vec<usize>,
}

impl PaceSchedule {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes[0] == 0 {
            return Err(Error::invalid("pace must be non-empty and positive"));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "pace {sizes:?} is not strictly increasing"
            )));
        }
        Ok(PaceSchedule { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn last(&self) -> usize {
        *self.sizes.last().expect("pace is non-empty")
    }
}

/// `floor(b^4), floor(b^5), …` truncated below `n`, with `n` appended.
pub fn logarithmic_pace(n: usize, base: f64) -> Result<PaceSchedule> {
    if n == 0 {
        return Err(Error::invalid("pace target n must be at least 1"));
    }
    if !(base > 1.0 && base.is_finite()) {
        return Err(Error::invalid(format!("pace base {base} must be > 1")));
    }
    let mut sizes: Vec<usize> = Vec::new();
    let mut exponent = PACE_FIRST_EXPONENT;
    loop {
        let v = base.powi(exponent).floor();
        if v >= n as f64 {
            break;
        }
        let v = v as usize;
        if v >= 1 && sizes.last() != Some(&v) {
            sizes.push(v);
        }
        exponent += 1;
    }
    sizes.push(n);
    PaceSchedule::new(sizes)
}

/// How TEAL treats covered clusters among the largest ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CoverMode {
    /// Take the `s_i - s_{i-1}` largest clusters that are uncovered. Always
    /// yields exactly `n` exemplars.
    #[default]
    LargestUncovered,
    /// Scan the `s_i - s_{i-1}` largest clusters and skip the covered ones,
    /// which may leave the list shorter than `n`.
    SkipCovered,
}

/// What happened in one TEAL iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub clusters: usize,
    pub added: Vec<ExemplarId>,
    pub uncovered_before: usize,
    pub uncovered_after: usize,
    /// Cluster sizes in the order returned by k-means.
    pub cluster_sizes: Vec<usize>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("number of exemplars to select must be at least 1"))
    } else {
        Ok(())
    }
}

/// Index of the maximum score among `positions`, ties to the lower id.
fn most_typical<S: Scalar>(
    data: &ClassDataset<S>,
    scores: &[S],
    positions: impl Iterator<Item = usize>,
) -> usize {
    let items = data.items();
    positions
        .reduce(|best, p| {
            if scores[p] > scores[best] || (scores[p] == scores[best] && items[p].0 < items[best].0) {
                p
            } else {
                best
            }
        })
        .expect("clusters are non-empty")
}

fn by_descending_typicality<S: Scalar>(data: &ClassDataset<S>, k: usize) -> Result<PriorityList> {
    if data.len() == 1 {
        return PriorityList::new(data.class_id(), vec![data.items()[0].0]);
    }
    let scores = typicality_scores(data, k)?;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let items = data.items();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(items[a].0.cmp(&items[b].0))
    });
    PriorityList::new(data.class_id(), order.into_iter().map(|p| items[p].0).collect())
}

pub fn teal_select<S: Scalar>(
    data: &ClassDataset<S>,
    n: usize,
    k: usize,
    pace: &PaceSchedule,
    seed: u64,
) -> Result<PriorityList> {
    teal_select_traced(data, n, k, pace, seed, CoverMode::default()).map(|(l, _)| l)
}

pub fn teal_select_with<S: Scalar>(
    data: &ClassDataset<S>,
    n: usize,
    k: usize,
    pace: &PaceSchedule,
    seed: u64,
    mode: CoverMode,
) -> Result<PriorityList> {
    teal_select_traced(data, n, k, pace, seed, mode).map(|(l, _)| l)
}

/// TEAL selection that also reports per-iteration coverage.
///
/// Iteration `i` (zero-based) clusters with seed `seed + i`. When `n` exceeds
/// the class size, every exemplar is returned by descending typicality.
pub fn teal_select_traced<S: Scalar>(
    data: &ClassDataset<S>,
    n: usize,
    k: usize,
    pace: &PaceSchedule,
    seed: u64,
    mode: CoverMode,
) -> Result<(PriorityList, Vec<IterationTrace>)> {
    check_n(n)?;
    if n > data.len() {
        return Ok((by_descending_typicality(data, k)?, Vec::new()));
    }
    if pace.last() != n {
        return Err(Error::invalid(format!(
            "pace ends at {} but n = {n}",
            pace.last()
        )));
    }
    if data.len() == 1 {
        return Ok((PriorityList::new(data.class_id(), vec![data.items()[0].0])?, Vec::new()));
    }

    let scores = typicality_scores(data, k)?;
    let items = data.items();
    let mut selected_pos: Vec<usize> = Vec::with_capacity(n);
    let mut traces = Vec::with_capacity(pace.sizes().len());
    let mut previous = 0;

    for (i, &clusters) in pace.sizes().iter().enumerate() {
        let clustering = kmeans(data, clusters, seed.wrapping_add(i as u64))?;
        let mut covered = vec![false; clusters];
        for &p in &selected_pos {
            covered[clustering.assignments[p]] = true;
        }
        let uncovered_before = covered.iter().filter(|c| !**c).count();
        let quota = clusters - previous;
        let order = sort_clusters_by_size(&clustering);

        let targets: Vec<usize> = match mode {
            CoverMode::LargestUncovered => order
                .into_iter()
                .filter(|&j| !covered[j])
                .take(quota)
                .collect(),
            CoverMode::SkipCovered => order
                .into_iter()
                .take(quota)
                .filter(|&j| !covered[j])
                .collect(),
        };

        let mut added = Vec::with_capacity(targets.len());
        for j in targets {
            let p = most_typical(data, &scores, clustering.members(j));
            selected_pos.push(p);
            covered[j] = true;
            added.push(items[p].0);
        }
        traces.push(IterationTrace {
            clusters,
            added,
            uncovered_before,
            uncovered_after: covered.iter().filter(|c| !**c).count(),
            cluster_sizes: clustering.sizes.clone(),
        });
        previous = clusters;
    }

    let ids = selected_pos.into_iter().map(|p| items[p].0).collect();
    Ok((PriorityList::new(data.class_id(), ids)?, traces))
}

/// Single k-means into `n` clusters; the most typical point of each cluster,
/// in descending cluster-size order.
pub fn teal_onetime_select<S: Scalar>(
    data: &ClassDataset<S>,
    n: usize,
    k: usize,
    seed: u64,
) -> Result<PriorityList> {
    check_n(n)?;
    if n > data.len() {
        return by_descending_typicality(data, k);
    }
    if data.len() == 1 {
        return PriorityList::new(data.class_id(), vec![data.items()[0].0]);
    }
    let scores = typicality_scores(data, k)?;
    let clustering = kmeans(data, n, seed)?;
    let ids = sort_clusters_by_size(&clustering)
        .into_iter()
        .map(|j| data.items()[most_typical(data, &scores, clustering.members(j))].0)
        .collect();
    PriorityList::new(data.class_id(), ids)
}

/// Dataset positions sorted by exemplar id.
fn positions_by_id<S: Scalar>(data: &ClassDataset<S>) -> Vec<usize> {
    let mut pos: Vec<usize> = (0..data.len()).collect();
    pos.sort_by_key(|&p| data.items()[p].0);
    pos
}

/// Greedy herding: each step adds the point that keeps the running mean of
/// the selected set closest to the class mean.
pub fn herding_select<S: Scalar>(data: &ClassDataset<S>, n: usize) -> Result<PriorityList> {
    check_n(n)?;
    let n = n.min(data.len());
    let mu = data.mean();
    let items = data.items();
    let candidates = positions_by_id(data);
    let mut taken = vec![false; data.len()];
    let mut sum = vec![S::zero(); data.dim()];
    let mut ids = Vec::with_capacity(n);
    let mut trial = vec![S::zero(); data.dim()];

    for step in 1..=n {
        let k = S::from_usize(step).expect("step fits the scalar type");
        let mut best: Option<(usize, S)> = None;
        for &p in &candidates {
            if taken[p] {
                continue;
            }
            for ((t, &s), &x) in trial.iter_mut().zip(&sum).zip(items[p].1.as_slice()) {
                *t = (s + x) / k;
            }
            let r = squared_distance(&mu, &trial);
            if best.is_none_or(|(_, br)| r < br) {
                best = Some((p, r));
            }
        }
        let (p, _) = best.expect("a candidate remains while step <= m");
        taken[p] = true;
        for (s, &x) in sum.iter_mut().zip(items[p].1.as_slice()) {
            *s += x;
        }
        ids.push(items[p].0);
    }
    PriorityList::new(data.class_id(), ids)
}

/// Points closest to the class mean first.
pub fn centered_select<S: Scalar>(data: &ClassDataset<S>, n: usize) -> Result<PriorityList> {
    check_n(n)?;
    let mu = data.mean();
    let items = data.items();
    let mut keyed: Vec<(S, ExemplarId)> = items
        .iter()
        .map(|(id, e)| (squared_distance(e.as_slice(), &mu), *id))
        .collect();
    keyed.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    keyed.truncate(n);
    PriorityList::new(data.class_id(), keyed.into_iter().map(|(_, id)| id).collect())
}

/// Uniform draws without replacement (partial Fisher-Yates over ids in
/// ascending order), so shorter draws are prefixes of longer ones.
pub fn random_select<S: Scalar>(data: &ClassDataset<S>, n: usize, seed: u64) -> Result<PriorityList> {
    check_n(n)?;
    let n = n.min(data.len());
    let mut ids: Vec<ExemplarId> = data.ids().collect();
    ids.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n {
        let j = rng.random_range(i..ids.len());
        ids.swap(i, j);
    }
    ids.truncate(n);
    PriorityList::new(data.class_id(), ids)
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy<S: Scalar>(p: &[S]) -> S {
    p.iter()
        .filter(|&&v| v > S::zero())
        .map(|&v| -v * v.ln())
        .sum()
}

/// Highest predictive entropy first. `probs` is aligned with `data.items()`.
pub fn entropy_select<S: Scalar>(data: &ClassDataset<S>, n: usize, probs: &[Vec<S>]) -> Result<PriorityList> {
    check_n(n)?;
    if probs.len() != data.len() {
        return Err(Error::invalid(format!(
            "{} probability vectors for {} exemplars",
            probs.len(),
            data.len()
        )));
    }
    let tol = S::from_f64_lossy(PROBABILITY_SUM_TOLERANCE);
    for (pos, p) in probs.iter().enumerate() {
        let id = data.items()[pos].0;
        if p.is_empty() || p.iter().any(|v| !v.is_finite() || *v < S::zero() || *v > S::one()) {
            return Err(Error::invalid(format!(
                "exemplar {id}: probabilities must be finite values in [0, 1]"
            )));
        }
        let total: S = p.iter().copied().sum();
        if (total - S::one()).abs() > tol {
            return Err(Error::invalid(format!(
                "exemplar {id}: probabilities sum to {total}"
            )));
        }
    }
    let mut keyed: Vec<(S, ExemplarId)> = probs
        .iter()
        .zip(data.items())
        .map(|(p, (id, _))| (shannon_entropy(p), *id))
        .collect();
    keyed.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    keyed.truncate(n);
    PriorityList::new(data.class_id(), keyed.into_iter().map(|(_, id)| id).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Teal,
    TealOnetime,
    Herding,
    Centered,
    Random,
    Entropy,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Teal,
        Strategy::TealOnetime,
        Strategy::Herding,
        Strategy::Centered,
        Strategy::Random,
        Strategy::Entropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Teal => "teal",
            Strategy::TealOnetime => "teal-onetime",
            Strategy::Herding => "herding",
            Strategy::Centered => "centered",
            Strategy::Random => "random",
            Strategy::Entropy => "entropy",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    pub knn: usize,
    pub pace_base: f64,
    pub cover_mode: CoverMode,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            knn: DEFAULT_KNN,
            pace_base: DEFAULT_PACE_BASE,
            cover_mode: CoverMode::default(),
        }
    }
}

/// Runs `strategy` on one class. `probs` is required for [`Strategy::Entropy`].
pub fn select<S: Scalar>(
    strategy: Strategy,
    data: &ClassDataset<S>,
    n: usize,
    params: &SelectionParams,
    seed: u64,
    probs: Option<&[Vec<S>]>,
) -> Result<PriorityList> {
    match strategy {
        Strategy::Teal => {
            check_n(n)?;
            let pace = logarithmic_pace(n, params.pace_base)?;
            teal_select_with(data, n, params.knn, &pace, seed, params.cover_mode)
        }
        Strategy::TealOnetime => teal_onetime_select(data, n, params.knn, seed),
        Strategy::Herding => herding_select(data, n),
        Strategy::Centered => centered_select(data, n),
        Strategy::Random => random_select(data, n, seed),
        Strategy::Entropy => {
            let probs = probs.ok_or_else(|| Error::invalid("entropy selection needs class probabilities"))?;
            entropy_select(data, n, probs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::typicality;

    fn line(points: &[f64]) -> ClassDataset<f64> {
        ClassDataset::from_rows(0, points.iter().map(|&p| vec![p]).collect()).unwrap()
    }

    #[test]
    fn pace_examples() {
        assert_eq!(
            logarithmic_pace(50, 1.4).unwrap().sizes(),
            &[3, 5, 7, 10, 14, 20, 28, 40, 50]
        );
        assert_eq!(logarithmic_pace(3, 1.4).unwrap().sizes(), &[3]);
        assert_eq!(logarithmic_pace(1, 1.4).unwrap().sizes(), &[1]);
        assert_eq!(logarithmic_pace(4, 1.4).unwrap().sizes(), &[3, 4]);
        assert!(logarithmic_pace(0, 1.4).is_err());
        assert!(logarithmic_pace(5, 1.0).is_err());
    }

    #[test]
    fn pace_with_small_base_dedupes() {
        let p = logarithmic_pace(5, 1.05).unwrap();
        assert_eq!(p.sizes(), &[1, 2, 3, 4, 5]);
    }

    #[test]
    fn pace_rejects_non_increasing() {
        assert!(PaceSchedule::new(vec![3, 3]).is_err());
        assert!(PaceSchedule::new(vec![]).is_err());
        assert!(PaceSchedule::new(vec![0, 2]).is_err());
    }

    #[test]
    fn teal_requires_matching_pace() {
        let data = line(&[0.0, 1.0, 2.0, 3.0]);
        let pace = PaceSchedule::new(vec![1, 2]).unwrap();
        assert!(teal_select(&data, 3, 2, &pace, 0).is_err());
        assert!(teal_select(&data, 0, 2, &pace, 0).is_err());
    }

    #[test]
    fn teal_oversized_n_orders_by_typicality() {
        let data = line(&[0.0, 0.1, 0.2, 5.0]);
        let pace = PaceSchedule::new(vec![10]).unwrap();
        let list = teal_select(&data, 10, 1, &pace, 0).unwrap();
        assert_eq!(list.len(), 4);
        let t: Vec<f64> = list.ordered_ids.iter().map(|&id| typicality(id, &data, 1).unwrap()).collect();
        assert!(t.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(*list.ordered_ids.last().unwrap(), 3);
    }

    #[test]
    fn teal_select_all_points() {
        let data = line(&[0.0, 1.0, 3.0, 7.0, 15.0]);
        let pace = PaceSchedule::new(vec![5]).unwrap();
        let list = teal_select(&data, 5, 2, &pace, 3).unwrap();
        let mut sorted = list.ordered_ids.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn teal_singleton_class() {
        let data = line(&[4.0]);
        let pace = PaceSchedule::new(vec![1]).unwrap();
        assert_eq!(teal_select(&data, 1, 20, &pace, 0).unwrap().ordered_ids, vec![0]);
        assert_eq!(teal_onetime_select(&data, 3, 20, 0).unwrap().ordered_ids, vec![0]);
    }

    #[test]
    fn onetime_single_cluster_is_global_argmax() {
        let data = line(&[0.0, 0.9, 1.0, 1.1, 6.0]);
        let list = teal_onetime_select(&data, 1, 2, 9).unwrap();
        assert_eq!(list.ordered_ids, vec![2]);
    }

    #[test]
    fn onetime_equals_single_step_teal() {
        let data = line(&[0.0, 0.4, 1.0, 3.3, 3.5, 8.0, 8.1, 8.7, 12.0]);
        for seed in 0..10 {
            let pace = PaceSchedule::new(vec![3]).unwrap();
            assert_eq!(
                teal_select(&data, 3, 2, &pace, seed).unwrap(),
                teal_onetime_select(&data, 3, 2, seed).unwrap()
            );
        }
    }

    #[test]
    fn skip_covered_can_underfill() {
        // A dominant blob that the first step covers stays the largest cluster
        // at the second step, so the literal scan skips it.
        let mut pts: Vec<f64> = (0..12).map(|i| i as f64 * 0.01).collect();
        pts.extend([50.0, 50.1, 100.0, 100.1, 150.0]);
        let data = line(&pts);
        let pace = PaceSchedule::new(vec![1, 2]).unwrap();
        let prose = teal_select_with(&data, 2, 1, &pace, 0, CoverMode::LargestUncovered).unwrap();
        let literal = teal_select_with(&data, 2, 1, &pace, 0, CoverMode::SkipCovered).unwrap();
        assert_eq!(prose.len(), 2);
        assert_eq!(literal.len(), 1);
        assert_eq!(prose.ordered_ids[0], literal.ordered_ids[0]);
    }

    #[test]
    fn herding_tie_goes_to_lower_id() {
        let data = line(&[-1.0, 1.0]);
        assert_eq!(herding_select(&data, 1).unwrap().ordered_ids, vec![0]);
        let data = line(&[1.0, -1.0]);
        assert_eq!(herding_select(&data, 1).unwrap().ordered_ids, vec![0]);
    }

    #[test]
    fn herding_matches_naive_greedy() {
        let data = ClassDataset::<f64>::from_rows(
            2,
            vec![vec![0.0, 1.0], vec![2.0, -1.0], vec![0.5, 0.5], vec![-3.0, 0.0], vec![1.0, 1.0]],
        )
        .unwrap();
        let got = herding_select(&data, 5).unwrap().ordered_ids;
        let rows: Vec<Vec<f64>> = data.items().iter().map(|(_, e)| e.as_slice().to_vec()).collect();
        let mu = [0.1, 0.3];
        let mut chosen: Vec<usize> = Vec::new();
        while chosen.len() < 5 {
            let mut best = usize::MAX;
            let mut best_r = f64::INFINITY;
            for c in 0..5 {
                if chosen.contains(&c) {
                    continue;
                }
                let k = (chosen.len() + 1) as f64;
                let mx = (chosen.iter().map(|&i| rows[i][0]).sum::<f64>() + rows[c][0]) / k;
                let my = (chosen.iter().map(|&i| rows[i][1]).sum::<f64>() + rows[c][1]) / k;
                let r = ((mu[0] - mx).powi(2) + (mu[1] - my).powi(2)).sqrt();
                if r < best_r {
                    best_r = r;
                    best = c;
                }
            }
            chosen.push(best);
        }
        assert_eq!(got, chosen);
    }

    #[test]
    fn centered_examples() {
        let data = line(&[0.0, 1.0, 10.0]);
        assert_eq!(centered_select(&data, 2).unwrap().ordered_ids, vec![1, 0]);
        assert_eq!(centered_select(&data, 3).unwrap().ordered_ids, vec![1, 0, 2]);
        assert_eq!(centered_select(&data, 9).unwrap().ordered_ids, vec![1, 0, 2]);
    }

    #[test]
    fn random_is_permutation_and_deterministic() {
        let data = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let a = random_select(&data, 6, 17).unwrap();
        let mut s = a.ordered_ids.clone();
        s.sort();
        assert_eq!(s, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(a, random_select(&data, 6, 17).unwrap());
    }

    #[test]
    fn random_is_uniform() {
        let data = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let mut hits = [0usize; 5];
        for seed in 0..10_000 {
            hits[random_select(&data, 1, seed).unwrap().ordered_ids[0]] += 1;
        }
        for h in hits {
            let f = h as f64 / 10_000.0;
            assert!((f - 0.2).abs() <= 0.02, "{hits:?}");
        }
    }

    #[test]
    fn entropy_examples() {
        let data = line(&[0.0, 1.0]);
        let probs = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        assert_eq!(entropy_select(&data, 1, &probs).unwrap().ordered_ids, vec![1]);

        let data = line(&[0.0, 1.0, 2.0]);
        let uniform = vec![vec![0.25; 4]; 3];
        assert_eq!(entropy_select(&data, 3, &uniform).unwrap().ordered_ids, vec![0, 1, 2]);
    }

    #[test]
    fn entropy_rejects_malformed() {
        let data = line(&[0.0, 1.0]);
        assert!(entropy_select(&data, 1, &[vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(entropy_select(&data, 1, &[vec![0.5, 0.5]]).is_err());
        assert!(entropy_select(&data, 1, &[vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
        assert!(entropy_select(&data, 1, &[vec![f64::NAN, 1.0], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("gss".parse::<Strategy>().is_err());
    }
}
