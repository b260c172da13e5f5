//! `aiqt`: train, evaluate and export sparse amplitude-encoding transforms.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aiqt::data::Split;
use aiqt::harness::{
    export_qasm, format_crmse, read_eval_rows, render_table, run_eval, run_powerlaw, run_rank_profile,
    run_reconstruct, run_train, ExperimentConfig, KSpec, Method, SampleSelector, CHECKPOINT_FILE, EVAL_JSON_FILE,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aiqt", version, about = "Sparse amplitude encoding with trainable butterfly transforms")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment config (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Output directory; defaults to the config's out_dir.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Transform(s) to use.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    method: Vec<MethodArg>,
    /// Sparsity budget(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',', value_name = "INT[,INT...]")]
    k: Vec<usize>,
    /// Overrides the config depth.
    #[arg(long, global = true)]
    depth: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Aiqt,
    Fsl,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Aiqt => Method::Aiqt,
            MethodArg::Fsl => Method::Fsl,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Validation,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Validation => Split::Validation,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write checkpoint.json and history.csv.
    Train,
    /// Evaluation table per method, k and split.
    Eval {
        /// Trained checkpoint; defaults to <out>/checkpoint.json.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Also report FSL on the training split.
        #[arg(long)]
        all_splits: bool,
    },
    /// Fit cRMSE = A k^B per method from an eval.json sweep.
    Powerlaw {
        /// Evaluation rows; defaults to <out>/eval.json.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "validation")]
        split: SplitArg,
    },
    /// Write the circuit of a checkpoint as OpenQASM 2.0 after verifying it.
    ExportQasm {
        /// Defaults to <out>/checkpoint.json.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Defaults to <out>/circuit.qasm.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Per-sample reconstruction CSV, plus images for image datasets.
    Reconstruct {
        /// Position of the sample within its split.
        #[arg(long, default_value_t = 0)]
        sample: usize,
        #[arg(long, value_enum, default_value = "validation")]
        split: SplitArg,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Mean and spread of the sorted coefficient energies per rank.
    RankProfile {
        #[arg(long, value_enum, default_value = "validation")]
        split: SplitArg,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

struct Session {
    cfg: Option<ExperimentConfig>,
    out: PathBuf,
    methods: Vec<Method>,
}

impl Session {
    fn config(&self) -> Result<&ExperimentConfig> {
        self.cfg.as_ref().context("this command needs --config")
    }

    /// Explicit checkpoint, else `<out>/checkpoint.json` if it exists.
    fn checkpoint(&self, explicit: Option<PathBuf>) -> Option<PathBuf> {
        explicit.or_else(|| Some(self.out.join(CHECKPOINT_FILE)).filter(|p| p.exists()))
    }

    /// Methods from the command line, else FSL plus AIQT when a checkpoint
    /// is available.
    fn methods(&self, checkpoint: Option<&Path>) -> Vec<Method> {
        if !self.methods.is_empty() {
            return self.methods.clone();
        }
        let mut m = vec![Method::Fsl];
        if checkpoint.is_some() {
            m.push(Method::Aiqt);
        }
        m
    }
}

fn build_context(g: &Global) -> Result<Session> {
    let cfg = match &g.config {
        Some(path) => {
            let mut cfg =
                ExperimentConfig::load(path).with_context(|| format!("reading config {}", path.display()))?;
            if let Some(seed) = g.seed {
                cfg.seed = seed;
            }
            if let Some(depth) = g.depth {
                cfg.depth = depth;
            }
            if !g.k.is_empty() {
                cfg.k = KSpec::Many(g.k.clone());
                cfg.train_k = None;
            }
            Some(cfg)
        }
        None => None,
    };
    let out = match (&g.out, &cfg) {
        (Some(o), _) => o.clone(),
        (None, Some(c)) => c.out_dir.clone(),
        (None, None) => PathBuf::from("out"),
    };
    let methods = g.method.iter().map(|&m| m.into()).collect();
    Ok(Session { cfg, out, methods })
}

fn run(cli: Cli) -> Result<()> {
    let ctx = build_context(&cli.global)?;
    match cli.command {
        Command::Train => {
            let cfg = ctx.config()?;
            let art = run_train(cfg, &ctx.out)?;
            let last = art.rows.last().expect("history is never empty");
            println!(
                "trained {} epochs: tail loss {:.6e} -> {:.6e}",
                last.epoch, art.rows[0].hard_tail_loss, last.hard_tail_loss
            );
            println!("checkpoint {}", art.checkpoint.display());
            println!("history {}", art.history.display());
        }
        Command::Eval { checkpoint, all_splits } => {
            let mut cfg = ctx.config()?.clone();
            if all_splits {
                cfg.fsl_validation_only = false;
            }
            let ckpt = ctx.checkpoint(checkpoint);
            let methods = ctx.methods(ckpt.as_deref());
            let rows = run_eval(&cfg, &methods, ckpt.as_deref(), &ctx.out)?;
            print!("{}", render_table(&rows));
        }
        Command::Powerlaw { input, split } => {
            let input = input.unwrap_or_else(|| ctx.out.join(EVAL_JSON_FILE));
            let rows = read_eval_rows(&input).with_context(|| format!("reading {}", input.display()))?;
            let split = Split::from(split).to_string();
            for f in run_powerlaw(&rows, &split, &ctx.out)? {
                println!(
                    "{:<5} cRMSE = {:.4e} k^{:.4}  R^2 = {:.4}  ({} points)",
                    f.method.to_string(),
                    f.fit.a,
                    f.fit.b,
                    f.fit.r2,
                    f.fit.points
                );
            }
        }
        Command::ExportQasm { checkpoint, output } => {
            let ckpt = checkpoint.unwrap_or_else(|| ctx.out.join(CHECKPOINT_FILE));
            let output = output.unwrap_or_else(|| ctx.out.join("circuit.qasm"));
            let e = export_qasm(&ckpt, &output)?;
            println!(
                "wrote {} ({} u3, {} cu1, {} swap; max deviation {:.2e})",
                output.display(),
                e.counts.single_qubit,
                e.counts.controlled_phase,
                e.counts.swap,
                e.max_error
            );
        }
        Command::Reconstruct { sample, split, checkpoint } => {
            let cfg = ctx.config()?;
            let ks = cfg.k_values();
            let [k] = ks[..] else { bail!("reconstruct takes a single k, got {ks:?}") };
            let ckpt = ctx.checkpoint(checkpoint);
            let methods = ctx.methods(ckpt.as_deref());
            let sel = SampleSelector { split: split.into(), index: sample };
            let s = run_reconstruct(cfg, &methods, ckpt.as_deref(), sel, k, &ctx.out)?;
            for r in &s.results {
                println!(
                    "{:<5} |K|={} cRMSE(1e-3)={} F={:.6} I={:.3e}",
                    r.method.to_string(),
                    r.kept,
                    format_crmse(r.crmse),
                    r.fidelity,
                    r.imag_norm
                );
            }
            for f in &s.files {
                println!("wrote {}", f.display());
            }
        }
        Command::RankProfile { split, checkpoint } => {
            let cfg = ctx.config()?;
            let ckpt = ctx.checkpoint(checkpoint);
            let methods = ctx.methods(ckpt.as_deref());
            for f in run_rank_profile(cfg, &methods, ckpt.as_deref(), split.into(), &ctx.out)? {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AIQT_LOG", "info")).init();
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
