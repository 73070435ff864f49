//! Command-line front end: data collection, subspace computation, zeros,
//! feedback design, attack design/simulation, and the randomized
//! verification suite. All reports are JSON with a schema version; exit
//! codes are 0 (success), 2 (validation error), 3 (numerical failure).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use geodd::attack::{design_attack, detect, simulate_attack};
use geodd::data_driven::{
    feedback_dd, feedback_residual, rstar_dd, sstar_dd, vstar_dd, zero_membership_dd, zeros_dd,
};
use geodd::error::Error;
use geodd::io::{
    load_experiment, save_experiment, write_attack_csv, ComplexJson, MatJson, SubspaceJson,
    SCHEMA_VERSION,
};
use geodd::linalg::{rank_tol, vcat, Tolerances};
use geodd::lti::{
    collect, is_persistently_exciting, ExperimentConfig, ExperimentData, LtiSystem,
    SingleTrajectory,
};
use geodd::oracle;
use geodd::subspace::principal_angle_max;
use geodd::systems::resolve_system;
use geodd::verify::oracle_agreement_suite;
use geodd::{Result, Vector};

#[derive(Parser)]
#[command(
    name = "geodd",
    version,
    about = "Data-driven geometric control: invariant subspaces, feedback, zeros, and stealthy attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_rank: f64,
    /// Maximum principal angle under which subspaces compare equal.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_eq: f64,
}

#[derive(Args, Clone)]
struct SystemArgs {
    /// Builtin name (consensus, siso-zero-1, siso-zero-2, random:n,m,p[,seed])
    /// or a directory with A.csv/B.csv/C.csv.
    #[arg(long, default_value = "consensus")]
    system: String,
    /// Experiment horizon T (default: the state dimension).
    #[arg(long)]
    horizon: Option<usize>,
    /// Number of experiments N (default: n + mT + 2n).
    #[arg(long)]
    experiments: Option<usize>,
    /// PRNG seed; every command is deterministic given its seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiments against a system and write the data directory.
    Collect {
        #[command(flatten)]
        sys: SystemArgs,
        /// Output directory for X.csv, X0.csv, Y.csv, U.csv, manifest.json.
        #[arg(long, env = "GEODD_OUT")]
        out: PathBuf,
    },
    /// Compute V*, S*, R* from a data directory.
    Subspaces {
        /// Data directory written by `collect`.
        #[arg(long)]
        data: PathBuf,
        /// Compare against the model-based oracle (requires a builtin system
        /// name in the manifest).
        #[arg(long)]
        oracle: bool,
    },
    /// Compute the invariant zeros of a system from data.
    Zeros {
        #[command(flatten)]
        sys: SystemArgs,
        /// Also compute the model-based zeros and report the match.
        #[arg(long)]
        oracle: bool,
    },
    /// Compute a feedback gain that renders V* invariant.
    Feedback {
        #[command(flatten)]
        sys: SystemArgs,
    },
    /// Design and simulate a stealthy attack.
    Attack {
        #[command(flatten)]
        sys: SystemArgs,
        /// Norm of the stacked attack input.
        #[arg(long, default_value_t = 10.0)]
        attack_energy: f64,
        /// Step at which the attack window starts.
        #[arg(long, default_value_t = 24)]
        onset: usize,
        /// Constant nominal input, comma-separated (default: -2,2,4 for the
        /// consensus system, zero otherwise).
        #[arg(long)]
        nominal: Option<String>,
        /// Directory for the per-step CSV trace.
        #[arg(long, env = "GEODD_OUT")]
        out: PathBuf,
    },
    /// Run the randomized oracle-agreement suite.
    Verify {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn tolerances(cli: &Cli) -> Result<Tolerances> {
    let tol = Tolerances {
        rank_rel: cli.tol_rank,
        subspace_eq: cli.tol_eq,
        ..Tolerances::default()
    };
    tol.validate()?;
    Ok(tol)
}

fn experiment_config(sys: &LtiSystem, args: &SystemArgs) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_for(sys, args.seed);
    if let Some(t) = args.horizon {
        cfg.horizon = t;
        cfg.experiments = sys.state_dim() + sys.input_dim() * t + 2 * sys.state_dim();
    }
    if let Some(n) = args.experiments {
        cfg.experiments = n;
    }
    cfg
}

fn collect_from_args(args: &SystemArgs, tol: &Tolerances) -> Result<(LtiSystem, ExperimentData)> {
    let sys = resolve_system(&args.system)?;
    let cfg = experiment_config(&sys, args);
    let data = collect(&sys, &cfg, tol)?;
    Ok((sys, data))
}

/// A single trajectory long enough for the feedback rank condition
/// rank([U0T; X0T]) = n + m.
fn informative_trajectory(sys: &LtiSystem, seed: u64) -> Result<SingleTrajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = sys.state_dim() + sys.input_dim() + 4;
    let x0 = Vector::from_fn(sys.state_dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let inputs: Vec<Vector> = (0..horizon)
        .map(|_| Vector::from_fn(sys.input_dim(), |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    sys.simulate(&x0, &inputs)
}

fn parse_nominal(spec: &Option<String>, system: &str, m: usize) -> Result<Vector> {
    match spec {
        Some(s) => {
            let values: Vec<f64> = s
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidConfig(format!("bad nominal entry '{v}'")))
                })
                .collect::<Result<_>>()?;
            if values.len() != m {
                return Err(Error::InvalidConfig(format!(
                    "nominal input has {} entries, expected {m}",
                    values.len()
                )));
            }
            Ok(Vector::from_vec(values))
        }
        None if system == "consensus" => Ok(Vector::from_column_slice(&[-2.0, 2.0, 4.0])),
        None => Ok(Vector::zeros(m)),
    }
}

fn cmd_collect(cli: &Cli, args: &SystemArgs, out: &PathBuf) -> Result<()> {
    let tol = tolerances(cli)?;
    let (_, data) = collect_from_args(args, &tol)?;
    let stacked = vcat(&data.x0, &data.u);
    let rank = rank_tol(&stacked, &tol)?;
    let expected = data.n + data.m * data.horizon;
    if !is_persistently_exciting(&data, &tol)? {
        return Err(Error::NotPersistentlyExciting { rank, expected });
    }
    save_experiment(out, &data, args.seed, Some(&args.system))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "collect",
            "system": args.system,
            "n": data.n, "m": data.m, "p": data.p,
            "horizon": data.horizon,
            "experiments": data.experiments,
            "seed": args.seed,
            "excitation_rank": rank,
            "excitation_expected": expected,
            "persistently_exciting": true,
            "out": out,
        }))?
    );
    Ok(())
}

fn cmd_subspaces(cli: &Cli, data_dir: &PathBuf, oracle: bool) -> Result<()> {
    let tol = tolerances(cli)?;
    let (data, manifest) = load_experiment(data_dir, &tol)?;
    let v = vstar_dd(&data, &tol)?;
    let s = sstar_dd(&data, &tol)?;
    let r = rstar_dd(&data, &tol)?;
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "subspaces",
        "vstar": SubspaceJson::from_subspace(&v),
        "sstar": SubspaceJson::from_subspace(&s),
        "rstar": SubspaceJson::from_subspace(&r),
    });
    if oracle {
        let name = manifest.system.as_deref().ok_or_else(|| {
            Error::InvalidConfig("manifest has no system name; cannot run the oracle".into())
        })?;
        let sys = resolve_system(name)?;
        let angles = json!({
            "vstar": principal_angle_max(&v, &oracle::vstar_model(&sys, &tol)?)?,
            "sstar": principal_angle_max(&s, &oracle::sstar_model(&sys, &tol)?)?,
            "rstar": principal_angle_max(&r, &oracle::rstar_model(&sys, &tol)?)?,
        });
        report["oracle_angles"] = angles;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_zeros(cli: &Cli, args: &SystemArgs, oracle: bool) -> Result<()> {
    let tol = tolerances(cli)?;
    let (sys, data) = collect_from_args(args, &tol)?;
    let v = vstar_dd(&data, &tol)?;
    let traj = informative_trajectory(&sys, args.seed.wrapping_add(1))?;
    let zeros = zeros_dd(&traj, &v, &tol)?;
    let mut entries = Vec::new();
    for z in &zeros {
        let membership = zero_membership_dd(&data, &v, *z, &tol)?;
        entries.push(json!({
            "zero": ComplexJson::from(*z),
            "membership": membership.is_zero(),
        }));
    }
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "zeros",
        "system": args.system,
        "vstar_dim": v.dim(),
        "zeros": entries,
    });
    if oracle {
        let model: Vec<ComplexJson> = oracle::invariant_zeros_model(&sys, &tol)?
            .into_iter()
            .map(ComplexJson::from)
            .collect();
        report["oracle_zeros"] = serde_json::to_value(model)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_feedback(cli: &Cli, args: &SystemArgs) -> Result<()> {
    let tol = tolerances(cli)?;
    let (sys, data) = collect_from_args(args, &tol)?;
    let v = vstar_dd(&data, &tol)?;
    let traj = informative_trajectory(&sys, args.seed.wrapping_add(1))?;
    let f = feedback_dd(&traj, &v, &tol)?;
    let residual = feedback_residual(&traj, &v, &tol)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "feedback",
            "system": args.system,
            "vstar_dim": v.dim(),
            "gain": MatJson::from_mat(&f),
            "residual": residual,
        }))?
    );
    Ok(())
}

fn cmd_attack(
    cli: &Cli,
    args: &SystemArgs,
    energy: f64,
    onset: usize,
    nominal: &Option<String>,
    out: &PathBuf,
) -> Result<()> {
    let tol = tolerances(cli)?;
    let (sys, data) = collect_from_args(args, &tol)?;
    let plan = design_attack(&data, energy, onset, &tol)?;
    let nominal_u = parse_nominal(nominal, &args.system, sys.input_dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed.wrapping_add(2));
    let x0 = Vector::from_fn(sys.state_dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let total = onset + plan.horizon;
    let outcome = simulate_attack(&sys, &plan, &nominal_u, &x0, total)?;
    let stealthy = !detect(&outcome, 1e-9);
    let max_state_dev = outcome
        .state_deviation
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    let max_output_dev = outcome
        .output_deviation
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    std::fs::create_dir_all(out)?;
    let csv_path = out.join("attack.csv");
    write_attack_csv(&csv_path, &outcome)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "attack",
            "system": args.system,
            "rstar_dim": plan.subspace.dim(),
            "onset": onset,
            "window": plan.horizon,
            "energy": energy,
            "stealthy": stealthy,
            "max_state_deviation": max_state_dev,
            "max_output_deviation": max_output_dev,
            "trace": csv_path,
        }))?
    );
    println!("stealthy: {stealthy}");
    if !stealthy {
        return Err(Error::NoStealthyAttack(format!(
            "designed attack exceeded the monitor threshold (max output deviation {max_output_dev:.3e})"
        )));
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, trials: usize, seed: u64) -> Result<()> {
    let tol = tolerances(cli)?;
    let report = oracle_agreement_suite(trials, seed, &tol)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "verify",
            "trials": report.trials,
            "failures": report.failures,
            "passed": report.passed(),
        }))?
    );
    if !report.passed() {
        return Err(Error::ResidualExceedsTolerance {
            residual: report.failures.len() as f64,
            tolerance: 0.0,
        });
    }
    Ok(())
}

/// 2 for configuration/input problems, 3 for numerical-verification failures.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::DimensionMismatch(_)
        | Error::InvalidConfig(_)
        | Error::HorizonTooShort { .. }
        | Error::Io(_)
        | Error::Parse(_)
        | Error::Json(_) => 2,
        Error::NonFinite
        | Error::NotPersistentlyExciting { .. }
        | Error::NotControlledInvariant { .. }
        | Error::TrajectoryNotInformative { .. }
        | Error::ResidualExceedsTolerance { .. }
        | Error::BlockTriangularizationFailed { .. }
        | Error::DegenerateSystem { .. }
        | Error::NoStealthyAttack(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Collect { sys, out } => cmd_collect(&cli, sys, out),
        Command::Subspaces { data, oracle } => cmd_subspaces(&cli, data, *oracle),
        Command::Zeros { sys, oracle } => cmd_zeros(&cli, sys, *oracle),
        Command::Feedback { sys } => cmd_feedback(&cli, sys),
        Command::Attack {
            sys,
            attack_energy,
            onset,
            nominal,
            out,
        } => cmd_attack(&cli, sys, *attack_energy, *onset, nominal, out),
        Command::Verify { trials, seed } => cmd_verify(&cli, *trials, *seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
