use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::stream::TaskData;
use crate::error::{Error, Result};
use crate::geometry::{ClassId, Embedding};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    pub batch_size: usize,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper { hidden: 64, epochs: 15, lr: 0.05, momentum: 0.9, batch_size: 32 }
    }
}

impl Hyper {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.batch_size == 0 {
            return Err(Error::invalid("hidden width and batch size must be positive"));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("lr must be >= 0 and momentum in [0, 1)"));
        }
        Ok(())
    }
}

/// What the loader feeds for a replayed exemplar: either the raw input,
/// which goes through the whole network, or a stored hidden-layer embedding,
/// which only trains the output head.
#[derive(Debug, Clone, PartialEq)]
pub enum ReplayInput {
    Raw(Vec<f64>),
    Features(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySample {
    pub class_id: ClassId,
    pub input: ReplayInput,
}

#[derive(Debug, Clone, Copy)]
enum InputRef<'a> {
    Raw(&'a [f64]),
    Features(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    fn zeros_like(l: &Learner) -> Self {
        Gradients {
            w1: vec![0.0; l.w1.len()],
            b1: vec![0.0; l.b1.len()],
            w2: vec![0.0; l.w2.len()],
            b2: vec![0.0; l.b2.len()],
        }
    }

    /// Same layout as [`Learner::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }

    fn scale(&mut self, c: f64) {
        for v in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            v.iter_mut().for_each(|x| *x *= c);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean minibatch loss per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `input -> hidden (ReLU) -> logits`, trained with momentum SGD on
/// cross-entropy. The output head grows as classes arrive; new rows start
/// at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Learner {
    input_dim: usize,
    hidden: usize,
    classes: usize,
    /// `hidden x input_dim`, row-major.
    w1: Vec<f64>,
    b1: Vec<f64>,
    /// `classes x hidden`, row-major.
    w2: Vec<f64>,
    b2: Vec<f64>,
    velocity: Gradients,
}

impl Learner {
    /// He-normal first layer, zero biases, empty head.
    pub fn new(input_dim: usize, hidden: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden == 0 {
            return Err(Error::invalid("learner dimensions must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let std = (2.0 / input_dim as f64).sqrt();
        let w1 = (0..hidden * input_dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                std * z
            })
            .collect();
        let mut l = Learner {
            input_dim,
            hidden,
            classes: 0,
            w1,
            b1: vec![0.0; hidden],
            w2: Vec::new(),
            b2: Vec::new(),
            velocity: Gradients { w1: vec![], b1: vec![], w2: vec![], b2: vec![] },
        };
        l.velocity = Gradients::zeros_like(&l);
        Ok(l)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    /// Grows the head to `n` logits.
    pub fn ensure_classes(&mut self, n: usize) {
        if n <= self.classes {
            return;
        }
        self.w2.resize(n * self.hidden, 0.0);
        self.b2.resize(n, 0.0);
        self.velocity.w2.resize(n * self.hidden, 0.0);
        self.velocity.b2.resize(n, 0.0);
        self.classes = n;
    }

    /// Flat parameter vector: `w1, b1, w2, b2`.
    pub fn parameters(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        let sizes = [self.w1.len(), self.b1.len(), self.w2.len(), self.b2.len()];
        if params.len() != sizes.iter().sum::<usize>() {
            return Err(Error::invalid("parameter vector has the wrong length"));
        }
        let mut rest = params;
        for (dst, n) in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
            .into_iter()
            .zip(sizes)
        {
            let (head, tail) = rest.split_at(n);
            dst.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::invalid(format!(
                "input has dimension {}, learner expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        self.w1
            .chunks_exact(self.input_dim)
            .zip(&self.b1)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    fn hidden_of(&self, x: &[f64]) -> Vec<f64> {
        self.pre_activation(x).into_iter().map(|z| z.max(0.0)).collect()
    }

    fn head(&self, h: &[f64]) -> Vec<f64> {
        self.w2
            .chunks_exact(self.hidden)
            .zip(&self.b2)
            .map(|(row, b)| row.iter().zip(h).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.head(&self.hidden_of(x)))
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(x)?))
    }

    /// Arg-max class over all current logits, ties to the lower index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let logits = self.logits(x)?;
        let mut best = 0;
        for (j, &z) in logits.iter().enumerate() {
            if z > logits[best] {
                best = j;
            }
        }
        Ok(best)
    }

    /// Post-ReLU hidden activations.
    pub fn embed(&self, inputs: &[Vec<f64>]) -> Result<Vec<Embedding<f64>>> {
        inputs
            .iter()
            .map(|x| {
                self.check_input(x)?;
                Embedding::new(self.hidden_of(x))
            })
            .collect()
    }

    fn accumulate(&self, input: InputRef<'_>, label: usize, g: &mut Gradients) -> f64 {
        let (pre, h) = match input {
            InputRef::Raw(x) => {
                let pre = self.pre_activation(x);
                let h = pre.iter().map(|z| z.max(0.0)).collect::<Vec<_>>();
                (Some(pre), h)
            }
            InputRef::Features(h) => (None, h.to_vec()),
        };
        let mut p = softmax(&self.head(&h));
        let loss = -p[label].max(f64::MIN_POSITIVE).ln();
        p[label] -= 1.0;
        let dlogits = p;

        let mut dh = vec![0.0; self.hidden];
        for (c, &dz) in dlogits.iter().enumerate() {
            g.b2[c] += dz;
            let row = c * self.hidden;
            for j in 0..self.hidden {
                g.w2[row + j] += dz * h[j];
                dh[j] += dz * self.w2[row + j];
            }
        }
        if let (Some(pre), InputRef::Raw(x)) = (pre, input) {
            for j in 0..self.hidden {
                if pre[j] <= 0.0 {
                    continue;
                }
                let dz = dh[j];
                g.b1[j] += dz;
                let row = j * self.input_dim;
                for (k, &v) in x.iter().enumerate() {
                    g.w1[row + k] += dz * v;
                }
            }
        }
        loss
    }

    fn batch_loss_and_gradients(&self, batch: &[(InputRef<'_>, usize)]) -> (f64, Gradients) {
        let mut g = Gradients::zeros_like(self);
        let mut loss = 0.0;
        for &(input, label) in batch {
            loss += self.accumulate(input, label, &mut g);
        }
        let inv = 1.0 / batch.len().max(1) as f64;
        g.scale(inv);
        (loss * inv, g)
    }

    /// Mean cross-entropy over raw-input examples and its gradient.
    pub fn loss_and_gradients(&self, batch: &[(Vec<f64>, usize)]) -> Result<(f64, Gradients)> {
        let refs = self.checked_batch(batch)?;
        Ok(self.batch_loss_and_gradients(&refs))
    }

    pub fn loss(&self, batch: &[(Vec<f64>, usize)]) -> Result<f64> {
        let refs = self.checked_batch(batch)?;
        let mut loss = 0.0;
        for (x, label) in refs {
            let InputRef::Raw(x) = x else { unreachable!() };
            let p = softmax(&self.head(&self.hidden_of(x)));
            loss -= p[label].max(f64::MIN_POSITIVE).ln();
        }
        Ok(loss / batch.len().max(1) as f64)
    }

    fn checked_batch<'a>(&self, batch: &'a [(Vec<f64>, usize)]) -> Result<Vec<(InputRef<'a>, usize)>> {
        batch
            .iter()
            .map(|(x, label)| {
                self.check_input(x)?;
                if *label >= self.classes {
                    return Err(Error::invalid(format!("label {label} outside the {} classes", self.classes)));
                }
                Ok((InputRef::Raw(x.as_slice()), *label))
            })
            .collect()
    }

    fn sgd_step(&mut self, g: &Gradients, lr: f64, momentum: f64) {
        let params = [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2];
        let vels = [&mut self.velocity.w1, &mut self.velocity.b1, &mut self.velocity.w2, &mut self.velocity.b2];
        let grads = [&g.w1, &g.b1, &g.w2, &g.b2];
        for ((p, v), gr) in params.into_iter().zip(vels).zip(grads) {
            for ((pi, vi), gi) in p.iter_mut().zip(v.iter_mut()).zip(gr.iter()) {
                *vi = momentum * *vi + gi;
                *pi -= lr * *vi;
            }
        }
    }

    /// Trains on one task while replaying buffered exemplars.
    ///
    /// Every minibatch slot first draws a class uniformly from the task's
    /// classes and the replayed classes, then an example uniformly from that
    /// class, so each seen class has the same expected count per batch.
    pub fn train_task(
        &mut self,
        task: &TaskData,
        replay: &[ReplaySample],
        hyper: &Hyper,
        seed: u64,
    ) -> Result<TrainReport> {
        hyper.validate()?;
        if task.train.is_empty() {
            return Err(Error::invalid("task has no training data"));
        }
        let mut pools: BTreeMap<ClassId, Vec<InputRef<'_>>> = BTreeMap::new();
        for s in &task.train {
            self.check_input(&s.input)?;
            pools.entry(s.class_id).or_default().push(InputRef::Raw(&s.input));
        }
        for r in replay {
            let input = match &r.input {
                ReplayInput::Raw(x) => {
                    self.check_input(x)?;
                    InputRef::Raw(x)
                }
                ReplayInput::Features(h) => {
                    if h.len() != self.hidden {
                        return Err(Error::invalid("replayed embedding does not match hidden width"));
                    }
                    InputRef::Features(h)
                }
            };
            pools.entry(r.class_id).or_default().push(input);
        }
        let max_class = *pools.keys().next_back().expect("task is non-empty") as usize;
        self.ensure_classes(max_class + 1);

        let classes: Vec<(usize, &Vec<InputRef<'_>>)> =
            pools.iter().map(|(&c, v)| (c as usize, v)).collect();
        let total = task.train.len() + replay.len();
        let batches = total.div_ceil(hyper.batch_size);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut epoch_losses = Vec::with_capacity(hyper.epochs);
        let mut batch = Vec::with_capacity(hyper.batch_size);

        for _ in 0..hyper.epochs {
            let mut sum = 0.0;
            for _ in 0..batches {
                batch.clear();
                for _ in 0..hyper.batch_size {
                    let (label, pool) = classes[rng.random_range(0..classes.len())];
                    batch.push((pool[rng.random_range(0..pool.len())], label));
                }
                let (loss, g) = self.batch_loss_and_gradients(&batch);
                sum += loss;
                self.sgd_step(&g, hyper.lr, hyper.momentum);
            }
            epoch_losses.push(sum / batches as f64);
        }
        Ok(TrainReport { epoch_losses })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_batch(rng: &mut ChaCha8Rng, n: usize, d: usize, classes: usize) -> Vec<(Vec<f64>, usize)> {
        (0..n)
            .map(|_| {
                let x = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                (x, rng.random_range(0..classes))
            })
            .collect()
    }

    fn randomize(l: &mut Learner, rng: &mut ChaCha8Rng) {
        let p: Vec<f64> = l.parameters().iter().map(|_| rng.random_range(-0.8..0.8)).collect();
        l.set_parameters(&p).unwrap();
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1000.0, -3.0, 2.5, 0.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(p.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let mut l = Learner::new(3, 5, rng.random()).unwrap();
            l.ensure_classes(3);
            randomize(&mut l, &mut rng);
            let batch = random_batch(&mut rng, 6, 3, 3);
            let (_, g) = l.loss_and_gradients(&batch).unwrap();
            let analytic = g.flatten();
            let base = l.parameters();
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
            l.set_parameters(&base).unwrap();
            let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
            assert!(diff / norm < 1e-4, "relative error {}", diff / norm);
        }
    }

    #[test]
    fn zero_input_zero_bias_embeds_to_zero() {
        let l = Learner::new(4, 6, 1).unwrap();
        let e = l.embed(&[vec![0.0; 4]]).unwrap();
        assert!(e[0].as_slice().iter().all(|&v| v == 0.0));
        assert!(l.embed(&[vec![0.0; 3]]).is_err());
    }

    #[test]
    fn head_grows_with_zero_rows() {
        let mut l = Learner::new(2, 3, 0).unwrap();
        l.ensure_classes(2);
        assert_eq!(l.logits(&[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        l.ensure_classes(1);
        assert_eq!(l.num_classes(), 2);
    }
}
