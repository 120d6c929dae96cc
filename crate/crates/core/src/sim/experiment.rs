use serde::{Deserialize, Serialize};

use super::derive_seed;
use super::learner::{Hyper, Learner, ReplayInput, ReplaySample, TrainReport};
use super::metrics::{evaluate, AccuracyMatrix};
use super::stream::{generate_stream, StreamConfig, TaskData, TaskStream};
use crate::error::{Error, Result};
use crate::geometry::{ClassDataset, ClassId};
use crate::memory::{quotas, MemoryBuffer, PrioritizedClass, Underfill};
use crate::selection::{random_select, select, PriorityList, SelectionParams, Strategy};

const LEARNER_TAG: u64 = 1;
const TRAIN_TAG: u64 = 100;
const SELECT_TAG: u64 = 10_000;
const PROVISIONAL_TAG: u64 = 20_000;

/// How stored exemplars are replayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplayMode {
    /// Replay the hidden-layer embedding captured at selection time through
    /// the output head only.
    Frozen,
    /// Replay the stored exemplar's raw input through the current network.
    #[default]
    Reembed,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub stream: StreamConfig,
    pub hyper: Hyper,
    pub selection: SelectionParams,
    pub replay_mode: ReplayMode,
    /// Reserve each new class's slots with a random placeholder before
    /// training on its task, replaced by the real selection afterwards.
    pub two_stage_fill: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub accuracy: AccuracyMatrix,
    pub buffer: MemoryBuffer<f64>,
    pub train_reports: Vec<TrainReport>,
    pub underfilled: Vec<Underfill>,
}

impl ExperimentResult {
    pub fn final_average(&self) -> f64 {
        self.accuracy.final_average().expect("at least one task ran")
    }
}

fn class_dataset(learner: &Learner, task: &TaskData, class_id: ClassId) -> Result<ClassDataset<f64>> {
    let samples: Vec<_> = task.train_of(class_id).collect();
    let inputs: Vec<Vec<f64>> = samples.iter().map(|s| s.input.clone()).collect();
    let embeddings = learner.embed(&inputs)?;
    ClassDataset::new(class_id, samples.iter().map(|s| s.id).zip(embeddings).collect())
}

fn replay_samples(buffer: &MemoryBuffer<f64>, stream: &TaskStream, mode: ReplayMode) -> Result<Vec<ReplaySample>> {
    let mut out: Vec<(ClassId, usize, ReplaySample)> = Vec::with_capacity(buffer.len());
    for item in buffer.replay_view() {
        if buffer.is_provisional(item.class_id) == Some(true) {
            continue;
        }
        let input = match mode {
            ReplayMode::Frozen => ReplayInput::Features(item.embedding.as_slice().to_vec()),
            ReplayMode::Reembed => {
                let s = stream
                    .train_sample(item.exemplar_id)
                    .ok_or(Error::NotFound(item.exemplar_id))?;
                ReplayInput::Raw(s.input.clone())
            }
        };
        out.push((item.class_id, item.exemplar_id, ReplaySample { class_id: item.class_id, input }));
    }
    // canonical order: the loader must not depend on priority order
    out.sort_by_key(|(c, id, _)| (*c, *id));
    Ok(out.into_iter().map(|(_, _, s)| s).collect())
}

fn quota_for(buffer: &MemoryBuffer<f64>, new: &[ClassId], capacity: usize) -> Result<Vec<(ClassId, usize)>> {
    let mut ids = buffer.class_ids();
    ids.extend(new.iter().filter(|c| !buffer.class_ids().contains(c)));
    quotas(capacity, &ids)
}

/// Trains the stream task by task, refreshing the buffer after each task
/// with `strategy`, and records the accuracy matrix.
pub fn run_experiment(
    config: &ExperimentConfig,
    strategy: Strategy,
    capacity: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    config.hyper.validate()?;
    let stream = generate_stream(&config.stream, seed)?;
    let mut learner = Learner::new(
        config.stream.input_dim,
        config.hyper.hidden,
        derive_seed(seed, LEARNER_TAG),
    )?;
    let mut buffer = MemoryBuffer::<f64>::new(capacity)?;
    let mut accuracy = AccuracyMatrix::new();
    let mut train_reports = Vec::with_capacity(stream.tasks.len());
    let mut underfilled = Vec::new();

    for (t, task) in stream.tasks.iter().enumerate() {
        if config.two_stage_fill {
            for &c in &task.classes {
                let quota = quota_for(&buffer, &[c], capacity)?
                    .into_iter()
                    .find(|(id, _)| *id == c)
                    .map_or(0, |(_, q)| q);
                let data = class_dataset(&learner, task, c)?;
                let list = if quota == 0 {
                    PriorityList::new(c, Vec::new())?
                } else {
                    random_select(&data, quota, derive_seed(seed, PROVISIONAL_TAG + c as u64))?
                };
                buffer = buffer.provisional_fill(PrioritizedClass::from_dataset(list, &data)?)?;
                buffer.check_invariants()?;
            }
        }

        let replay = replay_samples(&buffer, &stream, config.replay_mode)?;
        train_reports.push(learner.train_task(
            task,
            &replay,
            &config.hyper,
            derive_seed(seed, TRAIN_TAG + t as u64),
        )?);

        let q = quota_for(&buffer, &task.classes, capacity)?;
        let mut new_classes = Vec::with_capacity(task.classes.len());
        for &c in &task.classes {
            let n = q.iter().find(|(id, _)| *id == c).map_or(0, |(_, n)| *n);
            let data = class_dataset(&learner, task, c)?;
            let list = if n == 0 {
                PriorityList::new(c, Vec::new())?
            } else {
                let probs = if strategy == Strategy::Entropy {
                    Some(
                        task.train_of(c)
                            .map(|s| learner.predict_proba(&s.input))
                            .collect::<Result<Vec<_>>>()?,
                    )
                } else {
                    None
                };
                select(
                    strategy,
                    &data,
                    n,
                    &config.selection,
                    derive_seed(seed, SELECT_TAG + c as u64),
                    probs.as_deref(),
                )?
            };
            new_classes.push(PrioritizedClass::from_dataset(list, &data)?);
        }
        let outcome = buffer.update_after_task(new_classes)?;
        buffer = outcome.buffer;
        underfilled.extend(outcome.underfilled);
        buffer.check_invariants()?;

        let (row, _) = evaluate(&learner, &stream, t + 1)?;
        accuracy.push_row(row)?;
    }

    Ok(ExperimentResult { accuracy, buffer, train_reports, underfilled })
}
