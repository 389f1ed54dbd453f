use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lbdp::bench::{emit_report, format_table, run_bench, BenchConfig};
use lbdp::estimate::{approx_mle, fit, SolverConfig};
use lbdp::inhomogeneous::{generalized_estimate, RateFunctionSpec};
use lbdp::io::{read_series, write_results, write_series, write_trajectory, NamedSeries};
use lbdp::simulate::{
    gillespie, gillespie_with_rng, observe, replicate_rng, sample_schedule_with_rng, tau_leap,
    tau_leap_with_rng, DEFAULT_TAU_STEP,
};
use lbdp::vaf::{
    fit_cohort, read_records, summarize, write_summaries, CohortOptions, TransformMode,
    WILDTYPE_POP,
};
use lbdp::{Error, Method, ObservationSeries, RateParams};

#[derive(Parser)]
#[command(
    name = "lbdp",
    version,
    about = "Simulate and estimate linear birth-death processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a sample path, or observed series with --observe
    #[command(version)]
    Simulate(SimulateArgs),
    /// Fit a growth rate to observed series
    #[command(version)]
    Estimate(EstimateArgs),
    /// Run a Monte Carlo comparison of estimators
    #[command(version)]
    Bench(BenchArgs),
    /// Fit clone growth rates to variant allele frequencies
    #[command(version)]
    Vaf(VafArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SimKind {
    Gillespie,
    Tauleap,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    x0: u64,
    /// Horizon of the sample path; required unless --observe is given
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, value_enum, default_value = "gillespie")]
    method: SimKind,
    #[arg(long, default_value_t = DEFAULT_TAU_STEP)]
    tau_step: f64,
    /// Observe at this many Gamma-spaced times instead of writing the path
    #[arg(long)]
    observe: Option<usize>,
    #[arg(long, default_value_t = 1)]
    n_series: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma_shape: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RateModel {
    Constant,
    LinearBirth,
    ExpDecay,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    /// gw, approx, gaussian, saddlepoint or generalized
    #[arg(long, default_value = "approx")]
    method: Method,
    /// Rate model for the generalized estimator
    #[arg(long, value_enum, default_value = "constant")]
    model: RateModel,
    /// Constant death rate of the generalized rate model
    #[arg(long, default_value_t = 0.0)]
    death_rate: f64,
    /// Starting parameters of the generalized estimator, comma separated
    #[arg(long, value_delimiter = ',')]
    theta_init: Option<Vec<f64>>,
    /// Accepted for uniformity; estimation is deterministic
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the configuration file
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the worker count in the configuration file
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct VafArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "approx")]
    method: Method,
    /// Use the algebraic inverse of the VAF forward map
    #[arg(long)]
    exact_inverse: bool,
    #[arg(long, default_value_t = WILDTYPE_POP)]
    wildtype_pop: f64,
    /// Accepted for uniformity; the pipeline is deterministic
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> lbdp::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> lbdp::Result<File> {
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn simulate(a: SimulateArgs) -> lbdp::Result<()> {
    let p = RateParams::new(a.lambda, a.mu)?;
    let Some(n_points) = a.observe else {
        let t_max = a
            .t_max
            .ok_or_else(|| Error::InvalidParams("--t-max or --observe is required".into()))?;
        let traj = match a.method {
            SimKind::Gillespie => gillespie(p, a.x0, t_max, a.seed)?,
            SimKind::Tauleap => tau_leap(p, a.x0, t_max, a.tau_step, a.seed)?,
        };
        let mut out = output(a.out.as_deref())?;
        write_trajectory(&mut out, &traj, a.seed)?;
        return Ok(out.flush()?);
    };
    if a.n_series == 0 {
        return Err(Error::InvalidParams("--n-series must be positive".into()));
    }
    let times = sample_schedule_with_rng(
        n_points,
        a.gamma_shape,
        a.gamma_rate,
        &mut replicate_rng(a.seed, 0),
    )?;
    let t_max = *times.last().expect("at least two points");
    let mut named = Vec::with_capacity(a.n_series);
    for k in 0..a.n_series {
        let mut rng = replicate_rng(a.seed, k as u64 + 1);
        let traj = match a.method {
            SimKind::Gillespie => gillespie_with_rng(p, a.x0, t_max, &mut rng)?,
            SimKind::Tauleap => tau_leap_with_rng(p, a.x0, t_max, a.tau_step, &mut rng)?,
        };
        named.push(NamedSeries {
            id: (k + 1).to_string(),
            series: observe(&traj, &times)?,
        });
    }
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "# seed={}", a.seed)?;
    write_series(&mut out, &named)?;
    Ok(out.flush()?)
}

fn rate_model(model: RateModel, death: f64) -> lbdp::Result<RateFunctionSpec> {
    if !(death >= 0.0 && death.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "death rate must be nonnegative, got {death}"
        )));
    }
    Ok(match model {
        RateModel::Constant => RateFunctionSpec::constant_growth(death),
        RateModel::LinearBirth => RateFunctionSpec::linear_birth(death),
        RateModel::ExpDecay => RateFunctionSpec::exp_decay(death),
    })
}

fn estimate(a: EstimateArgs) -> lbdp::Result<()> {
    let series: Vec<ObservationSeries> = read_series(open(&a.input)?)?
        .into_iter()
        .map(|n| n.series)
        .collect();
    let cfg = SolverConfig::default();
    if a.method != Method::Generalized {
        let r = fit(a.method, &series, &cfg)?;
        let mut out = output(a.out.as_deref())?;
        write_results(&mut out, &[r])?;
        return Ok(out.flush()?);
    }
    let spec = rate_model(a.model, a.death_rate)?;
    let theta_init = match a.theta_init {
        Some(t) => t,
        None => {
            let alpha = approx_mle(&series, &cfg)?.alpha_hat.unwrap_or(0.0);
            let birth = (alpha + a.death_rate).max(1e-3);
            match a.model {
                RateModel::Constant => vec![alpha.max(-a.death_rate)],
                RateModel::LinearBirth => vec![birth, 0.0],
                RateModel::ExpDecay => vec![birth, 0.01],
            }
        }
    };
    if theta_init.len() != spec.theta_dim() {
        return Err(Error::InvalidParams(format!(
            "--theta-init needs {} value(s), got {}",
            spec.theta_dim(),
            theta_init.len()
        )));
    }
    let r = generalized_estimate(&spec, &series, &theta_init, &cfg)?;
    let theta = r.theta_hat.as_deref().unwrap_or_default();
    let theta: Vec<String> = theta.iter().map(f64::to_string).collect();
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "# theta={}", theta.join(","))?;
    writeln!(
        out,
        "# residual_norm={:e}",
        r.residual_norm.unwrap_or(f64::NAN)
    )?;
    write_results(&mut out, &[r])?;
    Ok(out.flush()?)
}

fn bench(a: BenchArgs) -> lbdp::Result<()> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Error::Io(format!("{}: {e}", a.config.display())))?;
    let mut cfg = BenchConfig::from_toml(&text)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let report = run_bench(&cfg)?;
    emit_report(&report, &a.out)?;
    eprint!("{}", format_table(&report));
    Ok(())
}

fn vaf(a: VafArgs) -> lbdp::Result<()> {
    let records = read_records(open(&a.input)?)?;
    let opts = CohortOptions {
        method: a.method,
        mode: if a.exact_inverse {
            TransformMode::Inverse
        } else {
            TransformMode::Odds
        },
        wildtype_pop: a.wildtype_pop,
    };
    if !(opts.wildtype_pop > 0.0 && opts.wildtype_pop.is_finite()) {
        return Err(Error::InvalidParams(
            "--wildtype-pop must be positive".into(),
        ));
    }
    let cohort = fit_cohort(&records, &opts);
    for s in &cohort.skipped {
        eprintln!(
            "warning: skipped {} / {}: {}",
            s.subject_id, s.mutation, s.reason
        );
    }
    for f in &cohort.fits {
        if let Err(e) = &f.result {
            eprintln!(
                "warning: fit failed for {} / {}: {e}",
                f.subject_id, f.mutation
            );
        }
    }
    let summaries = summarize(&cohort, opts.method)?;
    let mut out = output(a.out.as_deref())?;
    write_summaries(&mut out, &summaries)?;
    Ok(out.flush()?)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParams(_)
        | Error::InvalidSeries(_)
        | Error::Config(_)
        | Error::Parse(_)
        | Error::OutOfRange(_)
        | Error::CriticalProcess
        | Error::NotEquidistant { .. }
        | Error::OutOfBounds(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let res = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Bench(a) => bench(a),
        Command::Vaf(a) => vaf(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
