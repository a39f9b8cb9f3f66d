//! `combopt` command-line driver.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use combopt::datasets::{self, BoxKind, DatasetSpec, KnapsackSpec, RcSpec, WscSpec};
use combopt::harness::{self, Checkpoint, ExperimentConfig, GridSpec};
use combopt::par;

#[derive(Parser)]
#[command(name = "combopt", version, about = "Train and evaluate ILP layers on synthetic tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Rc,
    Wsc,
    Knapsack,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoxArg {
    Binary,
    Dense,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled dataset as JSON lines.
    Generate {
        #[arg(long, value_enum)]
        task: TaskArg,
        /// Constraints (rc) or universe size (wsc); ignored for knapsack.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "box", value_enum, default_value = "binary")]
        box_kind: BoxArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        train_size: Option<usize>,
        #[arg(long)]
        test_size: Option<usize>,
    },
    /// Train a model for every seed in the config.
    Train {
        /// Experiment config (TOML, or JSON with a .json extension).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Evaluate a checkpoint on a dataset and print the metrics as JSON.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
    },
    /// Run every cell of an ablation grid.
    Ablate {
        #[arg(long)]
        grid: PathBuf,
    },
}

fn dataset_spec(task: TaskArg, m: Option<usize>, box_kind: BoxArg, seed: u64) -> Result<DatasetSpec> {
    let kind = match box_kind {
        BoxArg::Binary => BoxKind::Binary,
        BoxArg::Dense => BoxKind::Dense,
    };
    Ok(match task {
        TaskArg::Rc => DatasetSpec::Rc(RcSpec::new(m.unwrap_or(1), kind, seed)),
        TaskArg::Wsc => DatasetSpec::Wsc(WscSpec::new(m.unwrap_or(4), seed)),
        TaskArg::Knapsack => {
            if m.is_some() {
                bail!("--m does not apply to knapsack");
            }
            DatasetSpec::Knapsack(KnapsackSpec::new(seed))
        }
    })
}

fn resize(spec: &mut DatasetSpec, train: Option<usize>, test: Option<usize>) {
    let (tr, te) = match spec {
        DatasetSpec::Rc(s) => (&mut s.train_size, &mut s.test_size),
        DatasetSpec::Wsc(s) => (&mut s.train_size, &mut s.test_size),
        DatasetSpec::Knapsack(s) => (&mut s.train_size, &mut s.test_size),
    };
    if let Some(v) = train {
        *tr = v;
    }
    if let Some(v) = test {
        *te = v;
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    par::configure_threads_from_env()?;
    match cli.command {
        Command::Generate {
            task,
            m,
            box_kind,
            seed,
            out,
            train_size,
            test_size,
        } => {
            let mut spec = dataset_spec(task, m, box_kind, seed)?;
            resize(&mut spec, train_size, test_size);
            let ds = datasets::generate(&spec)?;
            datasets::save(&ds, &out).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("wrote {} train / {} test items to {}", ds.train.len(), ds.test.len(), out.display());
        }
        Command::Train {
            config,
            dataset,
            out_dir,
        } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let ds = datasets::load(&dataset)?;
            let runs = harness::run(&cfg, &ds)?;
            let summary = harness::emit_results(&cfg, Some(&ds.spec), &runs, &out_dir)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Eval {
            checkpoint,
            dataset,
            split,
        } => {
            let ck = Checkpoint::load(&checkpoint)
                .with_context(|| format!("reading checkpoint {}", checkpoint.display()))?;
            let ds = datasets::load(&dataset)?;
            let items = match split {
                SplitArg::Train => &ds.train,
                SplitArg::Test => &ds.test,
            };
            let metrics = harness::evaluate(&ck.model, &ds, items)?;
            println!("{}", serde_json::to_string_pretty(&metrics)?);
        }
        Command::Ablate { grid } => {
            let g = GridSpec::from_path(&grid)?;
            let ds = datasets::load(&g.dataset)?;
            let rows = harness::run_ablation_grid(&g, &ds, &g.out_dir)?;
            println!("{}", serde_json::to_string_pretty(&rows)?);
        }
    }
    Ok(())
}
