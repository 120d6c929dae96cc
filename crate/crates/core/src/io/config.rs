//! Flat `key = value` experiment configs. `#` starts a comment; unknown keys
//! are rejected.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::selection::CoverMode;
use crate::sim::{ExperimentConfig, ReplayMode};

pub const CONFIG_KEYS: &[&str] = &[
    "tasks",
    "classes_per_task",
    "input_dim",
    "gaussians_per_class",
    "sigma",
    "mean_scale",
    "component_spread",
    "train_per_class",
    "test_per_class",
    "hidden",
    "epochs",
    "lr",
    "momentum",
    "batch_size",
    "knn",
    "pace_base",
    "covered_skip",
    "replay_mode",
    "two_stage_fill",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| Error::Config {
        key: key.to_string(),
        message: format!("cannot parse `{value}`: {e}"),
    })
}

fn parse_replay_mode(key: &str, value: &str) -> Result<ReplayMode> {
    match value {
        "frozen" => Ok(ReplayMode::Frozen),
        "reembed" => Ok(ReplayMode::Reembed),
        _ => Err(Error::Config {
            key: key.to_string(),
            message: format!("expected `frozen` or `reembed`, found `{value}`"),
        }),
    }
}

/// Starts from [`ExperimentConfig::default`] and overrides every listed key.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            location: format!("line {}", i + 1),
            message: format!("expected `key = value`, found `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let s = &mut cfg.stream;
        let h = &mut cfg.hyper;
        match key {
            "tasks" => s.tasks = parse(key, value)?,
            "classes_per_task" => s.classes_per_task = parse(key, value)?,
            "input_dim" => s.input_dim = parse(key, value)?,
            "gaussians_per_class" => s.gaussians_per_class = parse(key, value)?,
            "sigma" => s.sigma = parse(key, value)?,
            "mean_scale" => s.mean_scale = parse(key, value)?,
            "component_spread" => s.component_spread = parse(key, value)?,
            "train_per_class" => s.train_per_class = parse(key, value)?,
            "test_per_class" => s.test_per_class = parse(key, value)?,
            "hidden" => h.hidden = parse(key, value)?,
            "epochs" => h.epochs = parse(key, value)?,
            "lr" => h.lr = parse(key, value)?,
            "momentum" => h.momentum = parse(key, value)?,
            "batch_size" => h.batch_size = parse(key, value)?,
            "knn" => cfg.selection.knn = parse(key, value)?,
            "pace_base" => cfg.selection.pace_base = parse(key, value)?,
            "covered_skip" => {
                cfg.selection.cover_mode = if parse::<bool>(key, value)? {
                    CoverMode::SkipCovered
                } else {
                    CoverMode::LargestUncovered
                }
            }
            "replay_mode" => cfg.replay_mode = parse_replay_mode(key, value)?,
            "two_stage_fill" => cfg.two_stage_fill = parse(key, value)?,
            other => {
                return Err(Error::Config {
                    key: other.to_string(),
                    message: "unknown key".into(),
                })
            }
        }
    }
    cfg.stream.validate()?;
    cfg.hyper.validate()?;
    if cfg.selection.knn == 0 {
        return Err(Error::Config { key: "knn".into(), message: "must be at least 1".into() });
    }
    if cfg.selection.pace_base <= 1.0 || !cfg.selection.pace_base.is_finite() {
        return Err(Error::Config { key: "pace_base".into(), message: "must be > 1".into() });
    }
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Writes every key; `parse_config(&format_config(c)) == c`.
pub fn format_config(cfg: &ExperimentConfig) -> String {
    let s = &cfg.stream;
    let h = &cfg.hyper;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").expect("writing to a String");
    kv("tasks", s.tasks.to_string());
    kv("classes_per_task", s.classes_per_task.to_string());
    kv("input_dim", s.input_dim.to_string());
    kv("gaussians_per_class", s.gaussians_per_class.to_string());
    kv("sigma", s.sigma.to_string());
    kv("mean_scale", s.mean_scale.to_string());
    kv("component_spread", s.component_spread.to_string());
    kv("train_per_class", s.train_per_class.to_string());
    kv("test_per_class", s.test_per_class.to_string());
    kv("hidden", h.hidden.to_string());
    kv("epochs", h.epochs.to_string());
    kv("lr", h.lr.to_string());
    kv("momentum", h.momentum.to_string());
    kv("batch_size", h.batch_size.to_string());
    kv("knn", cfg.selection.knn.to_string());
    kv("pace_base", cfg.selection.pace_base.to_string());
    kv("covered_skip", (cfg.selection.cover_mode == CoverMode::SkipCovered).to_string());
    kv(
        "replay_mode",
        match cfg.replay_mode {
            ReplayMode::Frozen => "frozen",
            ReplayMode::Reembed => "reembed",
        }
        .to_string(),
    );
    kv("two_stage_fill", cfg.two_stage_fill.to_string());
    out
}
