use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ClassId, ExemplarId};

/// Shape of a synthetic task stream. Each class is a uniform mixture of
/// `gaussians_per_class` isotropic Gaussians with shared `sigma`. A class
/// center is drawn from `N(0, mean_scale^2 I)` and each component mean from
/// `N(center, component_spread^2 I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    pub tasks: usize,
    pub classes_per_task: usize,
    pub input_dim: usize,
    pub gaussians_per_class: usize,
    pub sigma: f64,
    pub mean_scale: f64,
    pub component_spread: f64,
    pub train_per_class: usize,
    pub test_per_class: usize,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            tasks: 5,
            classes_per_task: 4,
            input_dim: 32,
            gaussians_per_class: 3,
            sigma: 1.3,
            mean_scale: 0.8,
            component_spread: 0.4,
            train_per_class: 200,
            test_per_class: 100,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("tasks", self.tasks),
            ("classes_per_task", self.classes_per_task),
            ("input_dim", self.input_dim),
            ("gaussians_per_class", self.gaussians_per_class),
            ("train_per_class", self.train_per_class),
            ("test_per_class", self.test_per_class),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(Error::invalid(format!("stream config: {name} must be at least 1")));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("stream config: sigma must be finite and >= 0"));
        }
        for (name, v) in [("mean_scale", self.mean_scale), ("component_spread", self.component_spread)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("stream config: {name} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.tasks * self.classes_per_task
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Unique within the split; training ids double as exemplar ids.
    pub id: ExemplarId,
    pub class_id: ClassId,
    pub component: usize,
    pub input: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskData {
    pub classes: Vec<ClassId>,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

impl TaskData {
    pub fn train_of(&self, class_id: ClassId) -> impl Iterator<Item = &Sample> {
        self.train.iter().filter(move |s| s.class_id == class_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskStream {
    pub config: StreamConfig,
    pub tasks: Vec<TaskData>,
    /// `component_means[class][component]`.
    pub component_means: Vec<Vec<Vec<f64>>>,
}

impl TaskStream {
    /// Training sample by exemplar id (ids are assigned densely in order).
    pub fn train_sample(&self, id: ExemplarId) -> Option<&Sample> {
        let per_task = self.config.classes_per_task * self.config.train_per_class;
        self.tasks
            .get(id / per_task)
            .and_then(|t| t.train.get(id % per_task))
            .filter(|s| s.id == id)
    }
}

fn draw(rng: &mut ChaCha8Rng, mean: &[f64], sigma: f64) -> Vec<f64> {
    mean.iter()
        .map(|&m| {
            let z: f64 = StandardNormal.sample(rng);
            m + sigma * z
        })
        .collect()
}

/// Class `c` of task `t` gets id `t * classes_per_task + c`. Means, training
/// draws and test draws use separate RNG streams of the same seed.
pub fn generate_stream(config: &StreamConfig, seed: u64) -> Result<TaskStream> {
    config.validate()?;
    let mut mean_rng = ChaCha8Rng::seed_from_u64(seed);
    mean_rng.set_stream(0);
    let mut train_rng = ChaCha8Rng::seed_from_u64(seed);
    train_rng.set_stream(1);
    let mut test_rng = ChaCha8Rng::seed_from_u64(seed);
    test_rng.set_stream(2);

    let origin = vec![0.0; config.input_dim];
    let component_means: Vec<Vec<Vec<f64>>> = (0..config.num_classes())
        .map(|_| {
            let center = draw(&mut mean_rng, &origin, config.mean_scale);
            (0..config.gaussians_per_class)
                .map(|_| draw(&mut mean_rng, &center, config.component_spread))
                .collect()
        })
        .collect();

    let mut next_train = 0;
    let mut next_test = 0;
    let mut tasks = Vec::with_capacity(config.tasks);
    for t in 0..config.tasks {
        let classes: Vec<ClassId> = (0..config.classes_per_task)
            .map(|c| (t * config.classes_per_task + c) as ClassId)
            .collect();
        let split = |rng: &mut ChaCha8Rng, per_class: usize, next: &mut usize| {
            let mut out = Vec::with_capacity(per_class * classes.len());
            for &class_id in &classes {
                let means = &component_means[class_id as usize];
                for _ in 0..per_class {
                    let component = rng.random_range(0..means.len());
                    out.push(Sample {
                        id: *next,
                        class_id,
                        component,
                        input: draw(rng, &means[component], config.sigma),
                    });
                    *next += 1;
                }
            }
            out
        };
        let train = split(&mut train_rng, config.train_per_class, &mut next_train);
        let test = split(&mut test_rng, config.test_per_class, &mut next_test);
        tasks.push(TaskData { classes, train, test });
    }
    Ok(TaskStream { config: config.clone(), tasks, component_means })
}
