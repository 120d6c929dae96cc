mod common;

use rand_distr::{Distribution, StandardNormal};
use teal_core::sim::{evaluate, generate_stream, run_experiment, ExperimentConfig, Learner, StreamConfig};
use teal_core::Strategy;

fn small() -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        stream: StreamConfig {
            tasks: 3,
            classes_per_task: 2,
            input_dim: 8,
            train_per_class: 40,
            test_per_class: 30,
            ..StreamConfig::default()
        },
        ..ExperimentConfig::default()
    };
    cfg.hyper.epochs = 5;
    cfg.hyper.hidden = 16;
    cfg
}

fn separable(tasks: usize) -> ExperimentConfig {
    let mut cfg = small();
    cfg.stream.tasks = tasks;
    cfg.stream.sigma = 0.05;
    cfg.stream.mean_scale = 3.0;
    cfg.stream.component_spread = 0.1;
    cfg.hyper.epochs = 15;
    cfg
}

#[test]
fn gradients_agree_with_central_differences() {
    for seed in 0..8 {
        let err = common::gradient_check(seed, 1 + seed as usize % 8, 1 + seed as usize % 4);
        assert!(err < 1e-4, "seed {seed}: {err}");
    }
}

#[test]
fn saturated_buffer_makes_strategies_indistinguishable() {
    let cfg = small();
    let everything = cfg.stream.num_classes() * cfg.stream.train_per_class;
    let base = run_experiment(&cfg, Strategy::Random, everything, 3).unwrap();
    for s in [Strategy::Teal, Strategy::Herding, Strategy::Centered] {
        let other = run_experiment(&cfg, s, everything, 3).unwrap();
        assert_eq!(other.accuracy.averages(), base.accuracy.averages(), "{s}");
    }
}

#[test]
fn one_task_runs_do_not_depend_on_the_strategy() {
    let mut cfg = small();
    cfg.stream.tasks = 1;
    let base = run_experiment(&cfg, Strategy::Random, 6, 0).unwrap();
    for s in Strategy::ALL {
        assert_eq!(run_experiment(&cfg, s, 6, 0).unwrap().accuracy, base.accuracy, "{s}");
    }
}

#[test]
fn zero_learning_rate_leaves_weights_alone() {
    let cfg = small();
    let stream = generate_stream(&cfg.stream, 1).unwrap();
    let mut l = Learner::new(8, 16, 4).unwrap();
    l.ensure_classes(2);
    let before = l.parameters();
    let mut hyper = cfg.hyper.clone();
    hyper.lr = 0.0;
    l.train_task(&stream.tasks[0], &[], &hyper, 9).unwrap();
    assert_eq!(l.parameters(), before);
}

#[test]
fn separable_task_is_learned() {
    let cfg = separable(1);
    let r = run_experiment(&cfg, Strategy::Random, 1, 2).unwrap();
    assert!(r.final_average() >= 0.95, "{}", r.final_average());
    let losses = &r.train_reports[0].epoch_losses;
    assert!(losses.last() < losses.first());
}

#[test]
fn perfectly_separable_stream_with_full_replay_scores_one() {
    let cfg = separable(3);
    let everything = cfg.stream.num_classes() * cfg.stream.train_per_class;
    let r = run_experiment(&cfg, Strategy::Teal, everything, 0).unwrap();
    for t in 1..=3 {
        assert_eq!(r.accuracy.average(t), Some(1.0), "{:?}", r.accuracy.rows());
    }
}

#[test]
fn replay_keeps_an_old_class_near_its_post_training_accuracy() {
    let cfg = separable(2);
    let everything = cfg.stream.num_classes() * cfg.stream.train_per_class;
    let r = run_experiment(&cfg, Strategy::Herding, everything, 5).unwrap();
    let after_first = r.accuracy.get(1, 1).unwrap();
    let after_second = r.accuracy.get(2, 1).unwrap();
    assert!(after_second >= after_first - 0.10, "{after_first} -> {after_second}");
}

#[test]
fn random_networks_guess_at_chance() {
    let mut cfg = small();
    cfg.stream.tasks = 1;
    cfg.stream.classes_per_task = 4;
    let stream = generate_stream(&cfg.stream, 0).unwrap();
    let mut r = common::rng(3);
    let mut total = 0.0;
    let trials = 200;
    for i in 0..trials {
        let mut l = Learner::new(8, 16, i).unwrap();
        l.ensure_classes(4);
        let p: Vec<f64> = l.parameters().iter().map(|_| StandardNormal.sample(&mut r)).collect();
        l.set_parameters(&p).unwrap();
        total += evaluate(&l, &stream, 1).unwrap().1;
    }
    let mean = total / trials as f64;
    assert!((mean - 0.25).abs() < 0.04, "{mean}");
}

fn separation(points: &[(u32, Vec<f64>)]) -> f64 {
    let classes: Vec<u32> = {
        let mut c: Vec<u32> = points.iter().map(|p| p.0).collect();
        c.sort();
        c.dedup();
        c
    };
    let means: Vec<Vec<f64>> = classes
        .iter()
        .map(|c| {
            let rows: Vec<&Vec<f64>> = points.iter().filter(|p| p.0 == *c).map(|p| &p.1).collect();
            (0..rows[0].len()).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / rows.len() as f64).collect()
        })
        .collect();
    let within = points
        .iter()
        .map(|(c, x)| common::l2(x, &means[classes.iter().position(|k| k == c).unwrap()]).powi(2))
        .sum::<f64>()
        / points.len() as f64;
    let mut between = 0.0;
    let mut pairs = 0.0;
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            between += common::l2(&means[i], &means[j]).powi(2);
            pairs += 1.0;
        }
    }
    between / pairs / within
}

#[test]
fn training_separates_classes_in_the_hidden_layer() {
    let mut cfg = ExperimentConfig::default();
    cfg.stream.tasks = 1;
    let stream = generate_stream(&cfg.stream, 7).unwrap();
    let mut l = Learner::new(cfg.stream.input_dim, cfg.hyper.hidden, 1).unwrap();
    let task = &stream.tasks[0];
    let raw: Vec<(u32, Vec<f64>)> = task.test.iter().map(|s| (s.class_id, s.input.clone())).collect();
    let inputs: Vec<Vec<f64>> = raw.iter().map(|p| p.1.clone()).collect();
    let hidden = |l: &Learner| -> Vec<(u32, Vec<f64>)> {
        raw.iter().zip(l.embed(&inputs).unwrap()).map(|(p, e)| (p.0, e.into_inner())).collect()
    };
    let untrained = separation(&hidden(&l));
    l.train_task(task, &[], &cfg.hyper, 2).unwrap();
    let after = separation(&hidden(&l));
    assert!(after > untrained, "{untrained} -> {after}");
    assert!(after > separation(&raw), "hidden {after} vs raw {}", separation(&raw));
}

#[test]
fn two_stage_fill_runs_and_changes_nothing_for_one_task() {
    let mut cfg = small();
    cfg.two_stage_fill = true;
    let r = run_experiment(&cfg, Strategy::Teal, 12, 1).unwrap();
    assert_eq!(r.buffer.len(), 12);
    assert!(r.buffer.class_ids().iter().all(|&c| r.buffer.is_provisional(c) == Some(false)));
    cfg.stream.tasks = 1;
    let a = run_experiment(&cfg, Strategy::Teal, 4, 1).unwrap();
    cfg.two_stage_fill = false;
    let b = run_experiment(&cfg, Strategy::Teal, 4, 1).unwrap();
    assert_eq!(a.accuracy, b.accuracy);
    assert_eq!(a.buffer, b.buffer);
}

#[test]
fn runs_are_reproducible() {
    let cfg = small();
    let a = run_experiment(&cfg, Strategy::Teal, 10, 42).unwrap();
    let b = run_experiment(&cfg, Strategy::Teal, 10, 42).unwrap();
    assert_eq!(a, b);
    let c = run_experiment(&cfg, Strategy::Teal, 10, 43).unwrap();
    assert_ne!(a.accuracy, c.accuracy);
}
