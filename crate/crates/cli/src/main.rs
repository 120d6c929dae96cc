use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use teal_core::geometry::{squared_distance, ClassDataset, DEFAULT_KNN};
use teal_core::harness::{write_outputs, Sweep, RESULTS_FILE, SUMMARY_FILE};
use teal_core::io::{
    read_config, read_embeddings, write_embedding_file, EmbeddingFile, EmbeddingFormat, EmbeddingRecord,
};
use teal_core::memory::quotas;
use teal_core::selection::{select, DEFAULT_PACE_BASE};
use teal_core::sim::{generate_stream, softmax, StreamConfig};
use teal_core::{ClassId, CoverMode, SelectionParams, Strategy};

#[derive(Parser)]
#[command(name = "teal", version, about = "Exemplar selection for class-incremental replay buffers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build per-class priority lists from an embedding file.
    Select(SelectArgs),
    /// Run the class-incremental simulator over strategies, capacities and seeds.
    Simulate(SimulateArgs),
    /// Write a synthetic embedding file.
    GenEmbeddings(GenArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("size").required(true).args(["capacity", "per_class"])))]
struct SelectArgs {
    #[arg(long)]
    embeddings: PathBuf,
    /// `csv` or `binary`; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<String>,
    /// Total buffer size, split into class-balanced quotas.
    #[arg(long)]
    capacity: Option<usize>,
    /// Exemplars per class.
    #[arg(long)]
    per_class: Option<usize>,
    #[arg(long, default_value = "teal", value_parser = parse_strategy)]
    strategy: Strategy,
    #[arg(long, default_value_t = DEFAULT_KNN)]
    knn: usize,
    #[arg(long, default_value_t = DEFAULT_PACE_BASE)]
    pace_base: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip covered clusters among the largest ones instead of taking the
    /// largest uncovered clusters.
    #[arg(long)]
    covered_skip: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// `key = value` experiment config; omitted keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "teal,random", value_parser = parse_strategy)]
    strategy: Vec<Strategy>,
    #[arg(long, value_delimiter = ',', required = true)]
    capacity: Vec<usize>,
    /// Comma-separated seeds; `a..b` expands to a half-open range.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seed: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long, default_value_t = 50)]
    per_class: usize,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e: teal_core::Error| e.to_string())
}

fn parse_seeds(raw: &[String]) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in raw {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (a.parse()?, b.parse()?);
            seeds.extend(a..b);
        } else {
            seeds.push(part.parse().with_context(|| format!("bad seed `{part}`"))?);
        }
    }
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn format_for(path: &Path, explicit: Option<&str>) -> Result<EmbeddingFormat> {
    Ok(match explicit {
        Some(f) => f.parse()?,
        None => EmbeddingFormat::from_path(path),
    })
}

/// Softmax over negative distances to every class mean.
fn nearest_mean_probs(classes: &BTreeMap<ClassId, ClassDataset<f64>>, data: &ClassDataset<f64>) -> Vec<Vec<f64>> {
    let means: Vec<Vec<f64>> = classes.values().map(|c| c.mean()).collect();
    data.items()
        .iter()
        .map(|(_, e)| {
            let logits: Vec<f64> = means
                .iter()
                .map(|m| -squared_distance(e.as_slice(), m).sqrt())
                .collect();
            softmax(&logits)
        })
        .collect()
}

fn run_select(args: SelectArgs) -> Result<()> {
    let format = format_for(&args.embeddings, args.format.as_deref())?;
    let classes = read_embeddings::<f64>(&args.embeddings, format)
        .with_context(|| format!("reading {}", args.embeddings.display()))?;
    if classes.is_empty() {
        bail!("{} has no records", args.embeddings.display());
    }
    let ids: Vec<ClassId> = classes.keys().copied().collect();
    let sizes: BTreeMap<ClassId, usize> = match (args.capacity, args.per_class) {
        (Some(c), _) => quotas(c, &ids)?.into_iter().collect(),
        (None, Some(n)) => ids.iter().map(|&c| (c, n)).collect(),
        (None, None) => unreachable!("clap requires one of --capacity/--per-class"),
    };
    let params = SelectionParams {
        knn: args.knn,
        pace_base: args.pace_base,
        cover_mode: if args.covered_skip { CoverMode::SkipCovered } else { CoverMode::LargestUncovered },
    };

    let mut out: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
    for (&c, data) in &classes {
        let n = sizes[&c];
        let list = if n == 0 {
            Vec::new()
        } else {
            let probs = (args.strategy == Strategy::Entropy).then(|| nearest_mean_probs(&classes, data));
            select(args.strategy, data, n, &params, args.seed.wrapping_add(c as u64), probs.as_deref())
                .with_context(|| format!("selecting class {c}"))?
                .ordered_ids
        };
        out.insert(c, list);
    }
    let mut json = serde_json::to_string_pretty(&out)?;
    json.push('\n');
    teal_core::io::write_atomic(&args.out, json.as_bytes())?;
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let config = match &args.config {
        Some(p) => read_config(p).with_context(|| format!("reading {}", p.display()))?,
        None => Default::default(),
    };
    let sweep = Sweep {
        config,
        strategies: args.strategy,
        capacities: args.capacity,
        seeds: parse_seeds(&args.seed)?,
    };
    let records = sweep.run()?;
    let summary = write_outputs(&args.out, &records)?;
    for row in &summary {
        println!(
            "{:<13} capacity {:>5}  A_T {:.4} ± {:.4}  ({} runs)",
            row.strategy, row.capacity, row.mean_final_a_t, row.stderr_final_a_t, row.runs
        );
    }
    eprintln!(
        "wrote {} and {} to {}",
        RESULTS_FILE,
        SUMMARY_FILE,
        args.out.display()
    );
    Ok(())
}

fn run_gen(args: GenArgs) -> Result<()> {
    let stream_cfg = StreamConfig {
        tasks: 1,
        classes_per_task: args.classes,
        input_dim: args.dim,
        train_per_class: args.per_class,
        test_per_class: 1,
        ..StreamConfig::default()
    };
    let stream = generate_stream(&stream_cfg, args.seed)?;
    let records = stream.tasks[0]
        .train
        .iter()
        .map(|s| EmbeddingRecord {
            label: s.class_id,
            values: s.input.iter().map(|&v| v as f32).collect(),
        })
        .collect();
    let file = EmbeddingFile::new(args.dim, records)?;
    write_embedding_file(&args.out, format_for(&args.out, args.format.as_deref())?, &file)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Select(a) => run_select(a),
        Command::Simulate(a) => run_simulate(a),
        Command::GenEmbeddings(a) => run_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
