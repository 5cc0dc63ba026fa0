//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when the config, flags or output location
//! are unusable, 2 when a computation fails.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{ExperimentConfig, ExperimentId, ScheduleKind};
use crate::cost::CostKind;
use crate::error::{Result, SggdError};

#[derive(Debug, Parser)]
#[command(name = "sggd", version, about = "Symmetry-guided training of small quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One-parameter Werner landscape.
    Werner(RunArgs),
    /// Two-parameter Werner landscapes.
    Werner2(RunArgs),
    /// Cat–dog bitstring landscapes and training table.
    Catdog(RunArgs),
    /// Biased 2-class classifier, baseline against guided cost.
    Classify2d(RunArgs),
    /// Biased 3-class classifier built from two binary branches.
    Classify3c(RunArgs),
    /// Gate counts for a symmetrized ZZ gate.
    Overhead(OverheadArgs),
    /// Only the landscape scan of the configured experiment (werner by
    /// default).
    Landscape(RunArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CostArg {
    C0,
    C1,
    C2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScheduleArg {
    Constant,
    Ramp,
    Auto,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; must not exist yet.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    cost: Option<CostArg>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum)]
    schedule: Option<ScheduleArg>,
}

#[derive(Debug, Args)]
struct OverheadArgs {
    /// Number of qubits.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write summary.json and the manifest here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_or_bare(path: Option<&Path>, default: ExperimentId) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::bare(default)),
    }
}

fn build_config(sub: ExperimentId, landscape: bool, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = load_or_bare(args.config.as_deref(), sub)?;
    if landscape {
        if !cfg.experiment.is_landscape() {
            return Err(SggdError::schema(
                "experiment",
                format!("`{}` has no landscape scan", cfg.experiment.name()),
            ));
        }
    } else if cfg.experiment != sub {
        return Err(SggdError::schema(
            "experiment",
            format!("config is for `{}`, command is `{}`", cfg.experiment.name(), sub.name()),
        ));
    }
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if args.cost.is_some() || args.lambda.is_some() || args.schedule.is_some() {
        let cost = cfg.cost.get_or_insert_with(Default::default);
        if let Some(c) = args.cost {
            cost.kind = Some(match c {
                CostArg::C0 => CostKind::C0,
                CostArg::C1 => CostKind::C1,
                CostArg::C2 => CostKind::C2,
            });
        }
        if let Some(l) = args.lambda {
            cost.lambda = Some(l);
        }
        if let Some(s) = args.schedule {
            cost.schedule = Some(match s {
                ScheduleArg::Constant => ScheduleKind::Constant,
                ScheduleArg::Ramp => ScheduleKind::Ramp,
                ScheduleArg::Auto => ScheduleKind::Auto,
            });
        }
    }
    cfg.resolve()
}

fn default_out(cfg: &ExperimentConfig) -> PathBuf {
    PathBuf::from("results").join(format!("{}-seed{}", cfg.experiment.name(), cfg.seed()))
}

fn run_experiment(sub: ExperimentId, landscape: bool, args: &RunArgs) -> Result<()> {
    let cfg = build_config(sub, landscape, args)?;
    let out = args.out.clone().unwrap_or_else(|| default_out(&cfg));
    let manifest = if landscape {
        crate::run::write_run(&cfg, &out, crate::run::execute_landscape)?
    } else {
        crate::run::run_to_dir(&cfg, &out)?
    };
    println!(
        "wrote {} files to {}",
        manifest.files.len(),
        manifest.output_dir.display()
    );
    Ok(())
}

fn run_overhead(args: &OverheadArgs) -> Result<()> {
    let mut cfg = load_or_bare(args.config.as_deref(), ExperimentId::Overhead)?;
    if cfg.experiment != ExperimentId::Overhead {
        return Err(SggdError::schema(
            "experiment",
            format!("config is for `{}`, command is `overhead`", cfg.experiment.name()),
        ));
    }
    if let Some(n) = args.n {
        cfg.n = Some(n);
    }
    let cfg = cfg.resolve()?;
    let report = crate::experiments::symmetrization_overhead(cfg.n.unwrap_or(4))?;
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    if let Some(out) = &args.out {
        crate::run::run_to_dir(&cfg, out)?;
    }
    Ok(())
}

fn exit_code(e: &SggdError) -> i32 {
    if e.is_config_error() {
        1
    } else {
        2
    }
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Werner(a) => run_experiment(ExperimentId::Werner, false, a),
        Command::Werner2(a) => run_experiment(ExperimentId::Werner2, false, a),
        Command::Catdog(a) => run_experiment(ExperimentId::Catdog, false, a),
        Command::Classify2d(a) => run_experiment(ExperimentId::Classify2d, false, a),
        Command::Classify3c(a) => run_experiment(ExperimentId::Classify3c, false, a),
        Command::Landscape(a) => run_experiment(ExperimentId::Werner, true, a),
        Command::Overhead(a) => run_overhead(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
