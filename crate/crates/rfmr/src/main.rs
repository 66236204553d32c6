//! Command-line surface for the RFMR library.
//!
//! Every subcommand validates all inputs before computing, writes files
//! atomically, and emits JSON with a `schema_version` field and all doubles
//! in round-trip-exact form. Outputs are deterministic given the same flags
//! (including `--seed`). Exit codes: 0 success, 2 bad input, 3 numerical
//! failure; errors are mirrored as a JSON object on standard error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rfmr::control::{default_scale, plan, reachable, DEFAULT_REACH_TOL};
use rfmr::fibers::{direction_residual_norm, fiber_direction, Fiber};
use rfmr::homotopy::{equilibrium_at, trace_path, HomotopyProblem, TracerOptions};
use rfmr::io::{atomic_write, json_g17, trace_csv, trajectory_csv, SCHEMA_VERSION};
use rfmr::jacobians::{rank_certificate, rank_certificate_scaled, MatrixKind};
use rfmr::model::{equilibrium_residual, first_integral, ParamVector, StateVector};
use rfmr::oracle::{newton_multistart, random_interior_state, random_params};
use rfmr::simulate::{integrate, integrate_until};
use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "rfmr",
    version,
    about = "Equilibria of the ribosome flow model on a ring: continuation, fibers, simulation, control, certification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the equilibrium for a rate vector on the slice Σe = s
    Equilibrium(EquilibriumArgs),
    /// Trace the continuation path from unit rates and write it as CSV
    Trace(TraceArgs),
    /// Compute the fiber of rate vectors fixing a given state
    Fiber(FiberArgs),
    /// Integrate the flow and write the trajectory as CSV
    Simulate(SimulateArgs),
    /// Build an open-loop constant-rate plan steering x0 to a target
    Control(ControlArgs),
    /// Emit rank certificates, or a uniqueness report with --uniqueness
    Certify(CertifyArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct LamInput {
    /// Rates as a comma-separated list
    #[arg(long, value_name = "L1,L2,...")]
    lam: Option<String>,
    /// Rates as a JSON array file
    #[arg(long, value_name = "PATH")]
    lam_file: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct LamStartInput {
    /// Segment start rates (default: all ones)
    #[arg(long, value_name = "L1,L2,...")]
    lam_start: Option<String>,
    /// Segment start rates as a JSON array file
    #[arg(long, value_name = "PATH")]
    lam_start_file: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct StateInput {
    /// State as a comma-separated list
    #[arg(long = "e", value_name = "E1,E2,...", alias = "state")]
    e: Option<String>,
    /// State as a JSON array file
    #[arg(long = "e-file", value_name = "PATH")]
    e_file: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct X0Input {
    /// Initial state as a comma-separated list
    #[arg(long, value_name = "X1,X2,...")]
    x0: Option<String>,
    /// Initial state as a JSON array file
    #[arg(long, value_name = "PATH")]
    x0_file: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TargetInput {
    /// Target state as a comma-separated list
    #[arg(long, value_name = "T1,T2,...")]
    target: Option<String>,
    /// Target state as a JSON array file
    #[arg(long, value_name = "PATH")]
    target_file: Option<PathBuf>,
}

#[derive(Args)]
struct TracerFlags {
    /// Initial predictor step in t
    #[arg(long, default_value_t = 1e-2)]
    initial_step: f64,
    /// Smallest step before the trace gives up
    #[arg(long, default_value_t = 1e-8)]
    min_step: f64,
    /// Largest step the adaptive policy may grow to
    #[arg(long, default_value_t = 0.1)]
    max_step: f64,
    /// Corrector acceptance threshold on the residual sup-norm
    #[arg(long, default_value_t = 1e-10)]
    corrector_tol: f64,
    /// Newton iterations allowed per correction
    #[arg(long, default_value_t = 8)]
    max_corrector_iters: usize,
    /// Predictor attempts before giving up
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
}

impl TracerFlags {
    fn to_options(&self) -> TracerOptions {
        TracerOptions {
            initial_step: self.initial_step,
            min_step: self.min_step,
            max_step: self.max_step,
            corrector_tol: self.corrector_tol,
            max_corrector_iters: self.max_corrector_iters,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Args)]
struct EquilibriumArgs {
    #[command(flatten)]
    lam: LamInput,
    /// Total occupancy selecting the slice
    #[arg(long)]
    s: f64,
    #[command(flatten)]
    tracer: TracerFlags,
    /// Write the JSON result here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    lam: LamInput,
    #[command(flatten)]
    lam_start: LamStartInput,
    /// Total occupancy selecting the slice
    #[arg(long)]
    s: f64,
    #[command(flatten)]
    tracer: TracerFlags,
    /// CSV output path (one row per accepted node)
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// JSON sidecar path (default: the CSV path with a .json extension)
    #[arg(long, value_name = "PATH")]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct FiberArgs {
    #[command(flatten)]
    state: StateInput,
    /// Write the JSON result here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    lam: LamInput,
    #[command(flatten)]
    x0: X0Input,
    /// Integration horizon
    #[arg(long, default_value_t = 100.0)]
    t_end: f64,
    /// Fixed integration step
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,
    /// Stop early once the field sup-norm drops below this
    #[arg(long)]
    tolerance: Option<f64>,
    /// CSV output path (standard output when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ControlArgs {
    #[command(flatten)]
    target: TargetInput,
    #[command(flatten)]
    x0: X0Input,
    /// Ray representative: lam = scale * omega_target (default sqrt(n))
    #[arg(long)]
    scale: Option<f64>,
    /// Tolerance on the first-integral match for reachability
    #[arg(long, default_value_t = DEFAULT_REACH_TOL)]
    reach_tol: f64,
    /// Write the plan JSON here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also simulate the plan and write the trajectory CSV here
    #[arg(long, value_name = "PATH")]
    validate_out: Option<PathBuf>,
    /// Horizon for the validation trajectory
    #[arg(long, default_value_t = 200.0)]
    t_end: f64,
    /// Step for the validation trajectory
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum KindArg {
    JLambda,
    JE,
    A,
    W,
    All,
}

impl KindArg {
    fn kinds(self) -> Vec<MatrixKind> {
        match self {
            KindArg::JLambda => vec![MatrixKind::JLambda],
            KindArg::JE => vec![MatrixKind::JE],
            KindArg::A => vec![MatrixKind::A],
            KindArg::W => vec![MatrixKind::W],
            KindArg::All => vec![
                MatrixKind::JLambda,
                MatrixKind::JE,
                MatrixKind::A,
                MatrixKind::W,
            ],
        }
    }
}

#[derive(Args)]
struct CertifyArgs {
    /// Multistart uniqueness probe (requires --lam/--lam-file and --s)
    #[arg(long)]
    uniqueness: bool,
    #[command(flatten)]
    lam: LamOptInput,
    /// Total occupancy for the uniqueness probe
    #[arg(long)]
    s: Option<f64>,
    /// Newton starts for the uniqueness probe
    #[arg(long, default_value_t = 200)]
    seeds: usize,
    /// Dimension for rank sampling
    #[arg(long)]
    n: Option<usize>,
    /// Number of (lam, e) samples for rank certification
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Which matrix to certify
    #[arg(long, value_enum, default_value_t = KindArg::JE)]
    kind: KindArg,
    /// Absolute singular-value threshold (default: scaled per matrix)
    #[arg(long)]
    threshold: Option<f64>,
    /// RNG seed (recorded in the report)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct LamOptInput {
    /// Rates as a comma-separated list
    #[arg(long, value_name = "L1,L2,...")]
    lam: Option<String>,
    /// Rates as a JSON array file
    #[arg(long, value_name = "PATH")]
    lam_file: Option<PathBuf>,
}

struct CliError {
    kind: String,
    message: String,
    code: i32,
}

impl From<rfmr::Error> for CliError {
    fn from(err: rfmr::Error) -> Self {
        CliError {
            kind: err.kind().to_string(),
            message: err.to_string(),
            code: if err.is_input_error() { 2 } else { 3 },
        }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError {
        kind: "invalid_input".into(),
        message: message.into(),
        code: 2,
    }
}

fn io_error(path: &Path, err: std::io::Error) -> CliError {
    CliError {
        kind: "io".into(),
        message: format!("{}: {err}", path.display()),
        code: 2,
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        let envelope = json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "kind": err.kind, "message": err.message },
        });
        eprintln!("{envelope}");
        std::process::exit(err.code);
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Equilibrium(args) => run_equilibrium(args),
        Command::Trace(args) => run_trace(args),
        Command::Fiber(args) => run_fiber(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Control(args) => run_control(args),
        Command::Certify(args) => run_certify(args),
    }
}

fn parse_inline_vector(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .map_err(|_| input_error(format!("cannot parse '{tok}' as a number")))
        })
        .collect()
}

fn load_vector_file(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        input_error(format!(
            "{} is not a JSON array of numbers: {e}",
            path.display()
        ))
    })
}

fn vector_input(inline: Option<&str>, file: Option<&Path>) -> Result<Vec<f64>, CliError> {
    match (inline, file) {
        (Some(text), None) => parse_inline_vector(text),
        (None, Some(path)) => load_vector_file(path),
        // clap's argument groups enforce exactly-one for required inputs.
        _ => Err(input_error("expected exactly one of the inline/file forms")),
    }
}

fn param_vector(inline: Option<&str>, file: Option<&Path>) -> Result<ParamVector, CliError> {
    Ok(ParamVector::new(vector_input(inline, file)?)?)
}

fn state_vector(inline: Option<&str>, file: Option<&Path>) -> Result<StateVector, CliError> {
    Ok(StateVector::new(vector_input(inline, file)?)?)
}

/// Prints to stdout, or atomically writes to `path` when given.
fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => atomic_write(path, content.as_bytes()).map_err(|e| io_error(path, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json_line<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut text =
        json_g17(value).map_err(|e| input_error(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn run_equilibrium(args: EquilibriumArgs) -> Result<(), CliError> {
    let lam = param_vector(args.lam.lam.as_deref(), args.lam.lam_file.as_deref())?;
    let opts = args.tracer.to_options();
    let e = equilibrium_at(&lam, args.s, &opts)?;
    let f_norm = equilibrium_residual(&lam, &e)?.norm_inf();
    let residual_norm = f_norm.max((first_integral(&e) - args.s).abs());
    let payload = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "equilibrium",
        "n": lam.len(),
        "s": args.s,
        "lam": lam,
        "e": e,
        "residual_norm": residual_norm,
    });
    emit(args.out.as_deref(), &to_json_line(&payload)?)
}

fn run_trace(args: TraceArgs) -> Result<(), CliError> {
    let lam_end = param_vector(args.lam.lam.as_deref(), args.lam.lam_file.as_deref())?;
    let lam_start = if args.lam_start.lam_start.is_some() || args.lam_start.lam_start_file.is_some()
    {
        param_vector(
            args.lam_start.lam_start.as_deref(),
            args.lam_start.lam_start_file.as_deref(),
        )?
    } else {
        ParamVector::ones(lam_end.len())?
    };
    let opts = args.tracer.to_options();
    let prob = HomotopyProblem::new(lam_start, lam_end, args.s)?;
    let trace = trace_path(&prob, &opts)?;
    let last = trace.final_node();
    match trace.status {
        rfmr::TraceStatus::Converged => {}
        rfmr::TraceStatus::StepUnderflow => {
            return Err(rfmr::Error::StepUnderflow {
                t: last.t,
                min_step: opts.min_step,
            }
            .into())
        }
        rfmr::TraceStatus::MaxSteps => {
            return Err(rfmr::Error::MaxSteps {
                t: last.t,
                max_steps: opts.max_steps,
            }
            .into())
        }
    }

    let sidecar_path = args
        .sidecar
        .clone()
        .unwrap_or_else(|| args.out.with_extension("json"));
    let sidecar = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "trace",
        "problem": {
            "n": trace.lam_end.len(),
            "s": trace.s,
            "lam_start": trace.lam_start,
            "lam_end": trace.lam_end,
        },
        "options": opts,
        "status": trace.status,
        "near_boundary_s": trace.near_boundary_s,
        "nodes": trace.nodes.len(),
        "final": {
            "t": last.t,
            "e": last.state,
            "residual_norm": last.residual_norm,
        },
    });
    emit(Some(&args.out), &trace_csv(&trace))?;
    emit(Some(&sidecar_path), &to_json_line(&sidecar)?)
}

fn run_fiber(args: FiberArgs) -> Result<(), CliError> {
    let e = state_vector(args.state.e.as_deref(), args.state.e_file.as_deref())?;
    let payload = match fiber_direction(&e)? {
        Fiber::Ray(dir) => json!({
            "schema_version": SCHEMA_VERSION,
            "command": "fiber",
            "kind": "ray",
            "n": e.len(),
            "anchor": dir.anchor(),
            "omega": dir.omega(),
            "residual_norm": direction_residual_norm(&dir),
        }),
        Fiber::AllParameters => json!({
            "schema_version": SCHEMA_VERSION,
            "command": "fiber",
            "kind": "all_parameters",
            "n": e.len(),
            "anchor": e,
        }),
    };
    emit(args.out.as_deref(), &to_json_line(&payload)?)
}

fn run_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let lam = param_vector(args.lam.lam.as_deref(), args.lam.lam_file.as_deref())?;
    let x0 = state_vector(args.x0.x0.as_deref(), args.x0.x0_file.as_deref())?;
    let traj = integrate_until(&lam, &x0, args.t_end, args.dt, args.tolerance)?;
    emit(args.out.as_deref(), &trajectory_csv(&traj))
}

fn run_control(args: ControlArgs) -> Result<(), CliError> {
    let target = state_vector(
        args.target.target.as_deref(),
        args.target.target_file.as_deref(),
    )?;
    let x0 = state_vector(args.x0.x0.as_deref(), args.x0.x0_file.as_deref())?;
    if !reachable(&x0, &target, args.reach_tol)? {
        return Err(CliError {
            kind: "unreachable_target".into(),
            message: format!(
                "target is unreachable: first integrals {} (x0) vs {} (target) differ beyond {}",
                first_integral(&x0),
                first_integral(&target),
                args.reach_tol
            ),
            code: 2,
        });
    }
    let scale = args.scale.unwrap_or_else(|| default_scale(target.len()));
    let control_plan = plan(&target, scale)?;
    let plan_residual = equilibrium_residual(&control_plan.lam, &target)?.norm_inf();
    let mut payload = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "control",
        "n": target.len(),
        "target": control_plan.target,
        "x0": x0,
        "scale": control_plan.scale,
        "lam": control_plan.lam,
        "plan_residual_norm": plan_residual,
        "first_integral": first_integral(&target),
    });
    if let Some(vpath) = &args.validate_out {
        let traj = integrate(&control_plan.lam, &x0, args.t_end, args.dt)?;
        let final_state = traj.final_state();
        let distance = final_state
            .as_slice()
            .iter()
            .zip(target.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        payload["validation"] = json!({
            "t_end": args.t_end,
            "dt": args.dt,
            "final_distance_to_target": distance,
        });
        emit(Some(vpath), &trajectory_csv(&traj))?;
    }
    emit(args.out.as_deref(), &to_json_line(&payload)?)
}

fn run_certify(args: CertifyArgs) -> Result<(), CliError> {
    if args.uniqueness {
        certify_uniqueness(args)
    } else {
        certify_rank(args)
    }
}

fn certify_uniqueness(args: CertifyArgs) -> Result<(), CliError> {
    if args.lam.lam.is_none() && args.lam.lam_file.is_none() {
        return Err(input_error(
            "certify --uniqueness requires --lam or --lam-file",
        ));
    }
    let lam = param_vector(args.lam.lam.as_deref(), args.lam.lam_file.as_deref())?;
    let s = args
        .s
        .ok_or_else(|| input_error("certify --uniqueness requires --s"))?;
    let report = newton_multistart(&lam, s, args.seeds, args.seed)?;
    let payload = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "certify",
        "mode": "uniqueness",
        "n": lam.len(),
        "lam": lam,
        "s": s,
        "report": report,
    });
    emit(args.out.as_deref(), &to_json_line(&payload)?)
}

const CERTIFY_LAM_RANGE: (f64, f64) = (0.1, 10.0);
const CERTIFY_E_RANGE: (f64, f64) = (0.05, 0.95);

fn certify_rank(args: CertifyArgs) -> Result<(), CliError> {
    let n = args
        .n
        .ok_or_else(|| input_error("certify (rank mode) requires --n"))?;
    if args.samples == 0 {
        return Err(input_error("--samples must be at least 1"));
    }
    let kinds = args.kind.kinds();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut records = Vec::with_capacity(args.samples * kinds.len());
    let mut failures = 0usize;
    let mut min_sigma = f64::INFINITY;
    for sample in 0..args.samples {
        let lam = random_params(&mut rng, n, CERTIFY_LAM_RANGE.0, CERTIFY_LAM_RANGE.1)?;
        let e = random_interior_state(&mut rng, n, CERTIFY_E_RANGE.0, CERTIFY_E_RANGE.1)?;
        for &kind in &kinds {
            let cert = match args.threshold {
                Some(threshold) => rank_certificate(kind, &lam, &e, threshold)?,
                None => rank_certificate_scaled(kind, &lam, &e)?,
            };
            if !cert.full_rank {
                failures += 1;
            }
            min_sigma = min_sigma.min(cert.smallest_singular_value);
            records.push(json!({ "sample": sample, "certificate": cert }));
        }
    }
    let payload = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "certify",
        "mode": "rank",
        "n": n,
        "samples": args.samples,
        "seed": args.seed,
        "kinds": kinds.iter().map(|k| k.label()).collect::<Vec<_>>(),
        "lam_range": [CERTIFY_LAM_RANGE.0, CERTIFY_LAM_RANGE.1],
        "e_range": [CERTIFY_E_RANGE.0, CERTIFY_E_RANGE.1],
        "failures": failures,
        "min_sigma": min_sigma,
        "certificates": records,
    });
    emit(args.out.as_deref(), &to_json_line(&payload)?)
}
