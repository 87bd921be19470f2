use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gsprep::harness::{
    emit_report, run_experiment_with_threads, scaling_fit, ExperimentConfig, Format, LedgerField, Method, ReportRow,
};
use gsprep::lcu::AmpMode;
use gsprep::spectra::{Model, ModelSpec};

#[derive(Parser)]
#[command(name = "gsprep", version, about = "Ground-state preparation and ground-energy estimation experiments")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, global = true)]
    qubit_cap: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Random,
    Ising,
    Adversarial,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fps,
    Aa,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Pea,
    PeaUnknown,
    PeaEstimate,
    Filter,
    FilterUnknown,
    FilterCombined,
    FilterEstimate,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, value_enum, default_value = "random")]
    model: ModelArg,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    /// Spectral gap of the generated instance.
    #[arg(long, default_value_t = 0.1)]
    gap: f64,
    /// Ground energy of the random model.
    #[arg(long)]
    ground: Option<f64>,
    /// Transverse field of the Ising chain.
    #[arg(long, default_value_t = 1.0)]
    field: f64,
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
    /// Ground overlap of the trial state.
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    /// Gap lower bound given to the algorithm (default: the true gap).
    #[arg(long)]
    delta_lb: Option<f64>,
    /// Overlap lower bound given to the algorithm (default: the true overlap).
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long, value_enum, default_value = "fps")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long)]
    wall_time: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Known ground energy, Fourier LCU.
    PrepareKnown {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        energy_guess_error: f64,
    },
    /// Unknown ground energy: grid search, or the combined pipeline with --kappa.
    PrepareUnknown {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        grid_cap: Option<usize>,
        /// Simulate the search on full register states.
        #[arg(long)]
        literal: bool,
    },
    /// Ground-energy estimate to additive precision --xi
    EstimateEnergy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        grid_cap: Option<usize>,
    },
    /// Phase-estimation and filtering baselines.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: BaselineArg,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        energy_guess_error: f64,
    },
    /// Chebyshev projection on the quantum walk.
    Chebwalk {
        #[command(flatten)]
        common: Common,
        /// Absolute energy guess (default: the ground energy).
        #[arg(long)]
        energy_guess: Option<f64>,
        #[arg(long)]
        sparsity: Option<usize>,
        /// Search over energies instead of using a guess.
        #[arg(long)]
        unknown: bool,
    },
    /// Runs an experiment file and reports scaling fits for swept runs.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
}

fn base(method: Method, c: &Common, seed: u64) -> Result<ExperimentConfig, String> {
    let model = match c.model {
        ModelArg::Random => Model::RandomHermitian { dim: c.dim, gap: c.gap, ground: c.ground },
        ModelArg::Ising => {
            if !c.dim.is_power_of_two() {
                return Err(format!("dim {} is not a power of two", c.dim));
            }
            Model::TransverseIsing { sites: c.dim.trailing_zeros() as usize, field: c.field }
        }
        ModelArg::Adversarial => Model::Adversarial { k: 8, c: 0.25, dim: c.dim, gap_units: 1 },
    };
    let mut cfg = ExperimentConfig::new(method, ModelSpec::new(model, c.instance_seed), c.overlap);
    cfg.seed = seed;
    cfg.trials = c.trials;
    cfg.record_wall_time = c.wall_time;
    cfg.params.eps = c.eps;
    cfg.params.delta_lb = c.delta_lb;
    cfg.params.chi = c.chi;
    cfg.params.mode = match c.mode {
        ModeArg::Fps => AmpMode::Fps,
        ModeArg::Aa => AmpMode::Aa,
    };
    Ok(cfg)
}

fn build(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.cmd {
        Cmd::PrepareKnown { common, energy_guess_error } => {
            let mut c = base(Method::LcuFourier, common, cli.seed)?;
            c.params.energy_guess_error = *energy_guess_error;
            c
        }
        Cmd::PrepareUnknown { common, kappa, grid_cap, literal } => {
            let mut c = base(if kappa.is_some() { Method::Combined } else { Method::Grid }, common, cli.seed)?;
            c.params.kappa = *kappa;
            c.params.grid_cap = *grid_cap;
            c.params.literal = *literal;
            c
        }
        Cmd::EstimateEnergy { common, xi, kappa, grid_cap } => {
            let mut c = base(if kappa.is_some() { Method::CombinedEstimate } else { Method::GridEstimate }, common, cli.seed)?;
            c.params.xi = Some(*xi);
            c.params.kappa = *kappa;
            c.params.grid_cap = *grid_cap;
            c
        }
        Cmd::Baseline { common, method, xi, kappa, energy_guess_error } => {
            let m = match method {
                BaselineArg::Pea => Method::Pea,
                BaselineArg::PeaUnknown => Method::PeaUnknown,
                BaselineArg::PeaEstimate => Method::PeaEstimate,
                BaselineArg::Filter => Method::Filter,
                BaselineArg::FilterUnknown => Method::FilterUnknown,
                BaselineArg::FilterCombined => Method::FilterCombined,
                BaselineArg::FilterEstimate => Method::FilterEstimate,
            };
            let mut c = base(m, common, cli.seed)?;
            c.params.xi = *xi;
            c.params.kappa = *kappa;
            c.params.energy_guess_error = *energy_guess_error;
            c
        }
        Cmd::Chebwalk { common, energy_guess, sparsity, unknown } => {
            let mut c = base(if *unknown { Method::ChebwalkGrid } else { Method::Chebwalk }, common, cli.seed)?;
            c.params.energy = *energy_guess;
            c.params.sparsity = *sparsity;
            c
        }
        Cmd::Bench { config } => {
            let text = std::fs::read_to_string(config).map_err(|e| format!("{}: {e}", config.display()))?;
            ExperimentConfig::from_toml(&text).map_err(|e| e.to_string())?
        }
    };
    if let Some(f) = cli.format {
        cfg.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(o) = &cli.out {
        cfg.output = Some(o.clone());
    }
    if let Some(q) = cli.qubit_cap {
        cfg.qubit_cap = q;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn print_fits(cfg: &ExperimentConfig, rows: &[ReportRow]) {
    let Some(s) = &cfg.sweep else { return };
    for field in [LedgerField::HamsimTime, LedgerField::TrialCalls, LedgerField::WalkSteps] {
        if let Ok(f) = scaling_fit(rows, s.axis, field) {
            eprintln!("fit {:?} vs {:?}: slope {:.4} r2 {:.4}", field, s.axis, f.slope, f.r2);
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match build(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let rows = match run_experiment_with_threads(&cfg, cli.threads) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit_report(&rows, cfg.format, cfg.output.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if matches!(cli.cmd, Cmd::Bench { .. }) {
        print_fits(&cfg, &rows);
    }
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("run seed {} failed: {}", r.seed, r.error.as_deref().unwrap_or(""));
    }
    let failed = rows.iter().filter(|r| !r.success).count();
    eprintln!("{} runs, {} failed", rows.len(), failed);
    if failed > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
