//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the library's distance or neighbor code.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use teal_core::geometry::ClassDataset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

/// Inverse mean distance to the `k` nearest other points, by a full sort.
pub fn oracle_typicality(points: &[Vec<f64>], i: usize, k: usize) -> f64 {
    let mut d: Vec<f64> = (0..points.len()).filter(|&j| j != i).map(|j| l2(&points[i], &points[j])).collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = k.min(d.len());
    let mean = d[..k].iter().sum::<f64>() / k as f64;
    1.0 / (mean + 1e-12)
}

pub fn rows(data: &ClassDataset<f64>) -> Vec<Vec<f64>> {
    data.items().iter().map(|(_, e)| e.as_slice().to_vec()).collect()
}

pub fn random_rows(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

/// Well-separated 2-D blobs; returns the dataset and each point's blob.
pub fn blobs(rng: &mut ChaCha8Rng, sizes: &[usize]) -> (ClassDataset<f64>, Vec<usize>) {
    let mut pts = Vec::new();
    let mut blob_of = Vec::new();
    for (b, &n) in sizes.iter().enumerate() {
        let cx = 100.0 * b as f64;
        let cy = rng.random_range(-5.0..5.0);
        for _ in 0..n {
            pts.push(vec![cx + rng.random_range(-1.0..1.0), cy + rng.random_range(-1.0..1.0)]);
            blob_of.push(b);
        }
    }
    (ClassDataset::from_rows(0, pts).unwrap(), blob_of)
}

/// Per-step exhaustive herding: at every step, the candidate minimizing the
/// residual between the class mean and the running mean (ties to lower id).
pub fn oracle_herding(points: &[Vec<f64>], n: usize) -> Vec<usize> {
    let m = points.len();
    let d = points[0].len();
    let mu: Vec<f64> = (0..d).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / m as f64).collect();
    let mut chosen: Vec<usize> = Vec::new();
    for step in 1..=n {
        let residuals: Vec<(f64, usize)> = (0..m)
            .filter(|c| !chosen.contains(c))
            .map(|c| {
                let running: Vec<f64> = (0..d)
                    .map(|k| (chosen.iter().map(|&i| points[i][k]).sum::<f64>() + points[c][k]) / step as f64)
                    .collect();
                (l2(&mu, &running), c)
            })
            .collect();
        let best = residuals
            .iter()
            .fold(None::<(f64, usize)>, |acc, &(r, c)| match acc {
                Some((br, _)) if br <= r => acc,
                _ => Some((r, c)),
            })
            .unwrap();
        chosen.push(best.1);
    }
    chosen
}

use std::collections::BTreeMap;
use teal_core::geometry::Embedding;
use teal_core::memory::{MemoryBuffer, PrioritizedClass};
use teal_core::selection::PriorityList;

/// Drives a buffer through a random task sequence and checks every law
/// after every update against a direct recomputation of quotas and prefixes.
pub fn check_buffer_sequence(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let capacity = r.random_range(1..80);
    let tasks = r.random_range(1..7);
    let mut buffer = MemoryBuffer::<f64>::new(capacity).map_err(|e| e.to_string())?;
    let mut lists: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut order: Vec<u32> = Vec::new();
    let mut previous: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut next_id = 0usize;
    let mut next_class = 0u32;

    for _ in 0..tasks {
        let mut new = Vec::new();
        for _ in 0..r.random_range(1..5) {
            let c = next_class;
            next_class += 1;
            let len = r.random_range(0..40);
            let mut ids: Vec<usize> = (next_id..next_id + len).collect();
            next_id += len;
            for i in (1..ids.len()).rev() {
                ids.swap(i, r.random_range(0..=i));
            }
            let embs = ids.iter().map(|&i| Embedding::new(vec![i as f64, c as f64]).unwrap()).collect();
            new.push(PrioritizedClass::new(PriorityList::new(c, ids.clone()).unwrap(), embs).unwrap());
            lists.insert(c, ids);
            order.push(c);
        }
        let outcome = buffer.update_after_task(new).map_err(|e| e.to_string())?;
        buffer = outcome.buffer;
        buffer.check_invariants().map_err(|e| e.to_string())?;

        let n = order.len();
        let mut total = 0;
        let mut counts_when_full = Vec::new();
        let mut any_short = false;
        for (i, c) in order.iter().enumerate() {
            let quota = capacity / n + usize::from(i < capacity % n);
            let list = &lists[c];
            let stored = buffer.stored_ids(*c).ok_or("class missing")?;
            let expect = &list[..quota.min(list.len())];
            if stored != expect {
                return Err(format!("class {c}: stored {stored:?}, expected prefix {expect:?}"));
            }
            if let Some(prev) = previous.get(c) {
                if !prev.starts_with(stored) {
                    return Err(format!("class {c}: {stored:?} is not a truncation of {prev:?}"));
                }
            }
            if list.len() >= quota {
                counts_when_full.push(stored.len());
            } else {
                any_short = true;
            }
            total += stored.len();
        }
        if total > capacity {
            return Err(format!("{total} stored over capacity {capacity}"));
        }
        if let (Some(hi), Some(lo)) = (counts_when_full.iter().max(), counts_when_full.iter().min()) {
            if hi - lo > 1 {
                return Err(format!("counts spread {lo}..{hi}"));
            }
        }
        if !any_short && total != capacity {
            return Err(format!("{total} stored with enough data for {capacity}"));
        }
        let view = buffer.replay_view();
        if view.len() != total || view.iter().any(|v| v.embedding.as_slice()[0] != v.exemplar_id as f64) {
            return Err("replay view misaligned with stored ids".into());
        }
        let snap = buffer.to_snapshot(true);
        let back = MemoryBuffer::<f64>::from_snapshot(&snap).map_err(|e| e.to_string())?;
        if back != buffer {
            return Err("snapshot round trip changed the buffer".into());
        }
        previous = order.iter().map(|c| (*c, buffer.stored_ids(*c).unwrap().to_vec())).collect();
    }
    Ok(())
}

use teal_core::sim::Learner;

/// Central-difference check of the analytic gradient on a random network and
/// batch; returns `|g - g_fd| / max(|g|, |g_fd|)` over the whole vector.
pub fn gradient_check(seed: u64, hidden: usize, classes: usize) -> f64 {
    let mut r = rng(seed);
    let d = r.random_range(1..6);
    let mut l = Learner::new(d, hidden, seed).unwrap();
    l.ensure_classes(classes);
    let base: Vec<f64> = l.parameters().iter().map(|_| r.random_range(-1.0..1.0)).collect();
    l.set_parameters(&base).unwrap();
    let batch: Vec<(Vec<f64>, usize)> = (0..r.random_range(1..8))
        .map(|_| ((0..d).map(|_| r.random_range(-2.0..2.0)).collect(), r.random_range(0..classes)))
        .collect();
    let (_, g) = l.loss_and_gradients(&batch).unwrap();
    let analytic = g.flatten();
    let h = 1e-6;
    let mut numeric = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] += h;
        l.set_parameters(&p).unwrap();
        let up = l.loss(&batch).unwrap();
        p[i] -= 2.0 * h;
        l.set_parameters(&p).unwrap();
        let down = l.loss(&batch).unwrap();
        numeric.push((up - down) / (2.0 * h));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
    let scale = norm(&analytic).max(norm(&numeric));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}
