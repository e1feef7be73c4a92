//! Command-line front end wiring the core modules into reproducible
//! experiments. Every artifact is written together with a manifest JSON
//! capturing the exact parameters, and nothing is written on failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use potts_core::anneal::{simulated_anneal, AnnealSchedule};
use potts_core::format::sig12;
use potts_core::iterate::{iterate_half_hot, RoundSolver, SaRoundSolver};
use potts_core::meanfield::{
    solve_infinite_q, sweep_gamma, Beta, Constraint, MeanFieldParams, TransitionOrder,
};
use potts_core::qubo::{export_qubo, import_qubo, read_answer, QuboFile};
use potts_core::replica::{
    scan_csv, solve_rs, Components, GlassParams, RsOrderParams, ScanPoint,
};
use potts_core::quadrature::GaussHermite;
use potts_core::{encode, Domain, PottsModel, QuadraticModel};

#[derive(Parser)]
#[command(
    name = "potts-anneal",
    version,
    about = "Potts-model encodings, mean-field transition analysis, and half-hot annealing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode an instance file into quadratic-model and QUBO files
    Encode(EncodeArgs),
    /// Order-parameter sweep over the transverse field
    Meanfield(MeanfieldArgs),
    /// Infinite-Q self-consistency magnetization over a Gamma grid
    Infq(InfqArgs),
    /// Replica-symmetric saddle-point scan over a (beta, Gamma) grid
    Replica(ReplicaArgs),
    /// Simulated annealing on a model file
    Anneal(AnnealArgs),
    /// Iterative half-hot optimization with a history dump
    Iterate(IterateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingKind {
    #[value(name = "one_hot", alias = "one-hot")]
    OneHot,
    #[value(name = "one_hot_ising", alias = "one-hot-ising")]
    OneHotIsing,
    #[value(name = "half_hot", alias = "half-hot")]
    HalfHot,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstraintArg {
    #[value(name = "one_hot", alias = "one-hot")]
    OneHot,
    #[value(name = "half_hot", alias = "half-hot")]
    HalfHot,
}

impl From<ConstraintArg> for Constraint {
    fn from(c: ConstraintArg) -> Self {
        match c {
            ConstraintArg::OneHot => Constraint::OneHot,
            ConstraintArg::HalfHot => Constraint::HalfHot,
        }
    }
}

/// `inf` (or `infinity`) selects the zero-temperature limit.
fn parse_beta(text: &str) -> std::result::Result<Beta, String> {
    match text {
        "inf" | "infinity" | "infinite" => Ok(Beta::Infinite),
        other => other
            .parse::<f64>()
            .map_err(|e| e.to_string())
            .and_then(|b| {
                if b > 0.0 {
                    Ok(Beta::Finite(b))
                } else {
                    Err("beta must be positive".into())
                }
            }),
    }
}

fn beta_to_string(beta: Beta) -> String {
    match beta {
        Beta::Infinite => "inf".into(),
        Beta::Finite(b) => b.to_string(),
    }
}

#[derive(Args)]
struct EncodeArgs {
    /// Instance JSON ({"n_spins", "n_components", "couplings": [[i,j,J]]})
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    encoding: EncodingKind,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Output prefix; writes <out>.qm.json and <out>.qubo.json
    #[arg(long, default_value = "encode")]
    out: String,
}

#[derive(Args)]
struct MeanfieldArgs {
    #[arg(long = "Q")]
    q: usize,
    #[arg(long, value_enum)]
    constraint: ConstraintArg,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long = "J", default_value_t = 1.0)]
    j: f64,
    #[arg(long, default_value_t = 2.0)]
    gamma_max: f64,
    #[arg(long, default_value_t = 0.01)]
    gamma_step: f64,
    #[arg(long, value_parser = parse_beta, default_value = "inf")]
    beta: Beta,
    #[arg(long)]
    threads: Option<usize>,
    /// Output CSV; a <out>.summary.json carries the classification
    #[arg(long, default_value = "meanfield.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct InfqArgs {
    #[arg(long = "J", default_value_t = 1.0)]
    j: f64,
    #[arg(long, value_parser = parse_beta, default_value = "inf")]
    beta: Beta,
    /// Single evaluation point; mutually exclusive with --gamma-max
    #[arg(long, conflicts_with_all = ["gamma_max", "gamma_step"])]
    gamma: Option<f64>,
    #[arg(long, requires = "gamma_step")]
    gamma_max: Option<f64>,
    #[arg(long)]
    gamma_step: Option<f64>,
    #[arg(long, default_value = "infq.csv")]
    out: PathBuf,
}

fn parse_positive(text: &str) -> std::result::Result<f64, String> {
    let value: f64 = text.parse().map_err(|e| format!("{e}"))?;
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err("must be finite and positive".into())
    }
}

#[derive(Args)]
struct ReplicaArgs {
    #[arg(long = "J", default_value_t = 1.0)]
    j: f64,
    #[arg(long = "J0", default_value_t = 0.0)]
    j0: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, num_args = 1.., required = true, value_parser = parse_positive)]
    betas: Vec<f64>,
    #[arg(long, num_args = 1.., required = true)]
    gammas: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    order: usize,
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "replica.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct AnnealArgs {
    /// Quadratic-model JSON or QUBO JSON
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    t_start: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, default_value = "anneal.json")]
    out: PathBuf,
}

#[derive(Args)]
struct IterateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sweeps: Option<usize>,
    /// Directory with round_<r>.answer.json files from an external solver;
    /// without it the internal annealer runs each round
    #[arg(long)]
    answers: Option<PathBuf>,
    /// Directory receiving round_<r>.qubo.json exports as rounds run
    #[arg(long)]
    dump_rounds: Option<PathBuf>,
    /// Output prefix; writes <out>.json and <out>.history.json
    #[arg(long, default_value = "iterate")]
    out: String,
}

/// Parse and run; returns the process exit code (0 ok, 1 runtime error,
/// 2 usage error).
pub fn dispatch<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    2
                }
            };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Encode(args) => run_encode(args),
        Command::Meanfield(args) => run_meanfield(args),
        Command::Infq(args) => run_infq(args),
        Command::Replica(args) => run_replica(args),
        Command::Anneal(args) => run_anneal(args),
        Command::Iterate(args) => run_iterate(args),
    }
}

/// Manifest accompanying every artifact; re-running the recorded command
/// with the recorded parameters reproduces the outputs byte for byte.
#[derive(Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub output_paths: Vec<String>,
    pub tool_version: String,
}

impl RunManifest {
    fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            parameters: BTreeMap::new(),
            seed,
            output_paths: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    /// Reconstruct the argv this manifest records.
    pub fn to_argv(&self) -> Vec<String> {
        let mut argv = vec!["potts-anneal".to_string(), self.command.clone()];
        for (key, value) in &self.parameters {
            argv.push(format!("--{key}"));
            // multi-valued flags are stored space-separated
            for part in value.split(' ') {
                argv.push(part.to_string());
            }
        }
        argv
    }
}

/// Stage outputs in memory, then write everything (atomically per file)
/// only once the command has fully succeeded.
struct Artifacts {
    manifest: RunManifest,
    files: Vec<(PathBuf, String)>,
}

impl Artifacts {
    fn new(manifest: RunManifest) -> Self {
        Self {
            manifest,
            files: Vec::new(),
        }
    }

    fn stage(&mut self, path: impl Into<PathBuf>, contents: String) {
        let path = path.into();
        self.manifest.output_paths.push(path.display().to_string());
        self.files.push((path, contents));
    }

    fn write(mut self, manifest_path: &Path) -> Result<()> {
        self.files.push((
            manifest_path.to_path_buf(),
            serde_json::to_string_pretty(&self.manifest)?,
        ));
        for (path, contents) in &self.files {
            write_atomic(path, contents)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Run `f` inside a rayon pool sized by `--threads` or
/// `POTTS_ANNEAL_THREADS`; fall back to the global pool.
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let n = threads.or_else(|| {
        std::env::var("POTTS_ANNEAL_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    match n {
        Some(n) if n > 0 => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(f)),
        _ => Ok(f()),
    }
}

fn run_encode(args: EncodeArgs) -> Result<()> {
    let model = PottsModel::read_instance(&args.instance)?;
    let qm = match args.encoding {
        EncodingKind::OneHot => encode::encode_one_hot(&model, args.lambda),
        EncodingKind::OneHotIsing => encode::encode_one_hot_ising(&model, args.lambda),
        EncodingKind::HalfHot => encode::encode_half_hot_ising(&model, args.lambda)?,
    };
    let manifest = RunManifest::new("encode", 0)
        .param("instance", args.instance.display())
        .param(
            "encoding",
            match args.encoding {
                EncodingKind::OneHot => "one_hot",
                EncodingKind::OneHotIsing => "one_hot_ising",
                EncodingKind::HalfHot => "half_hot",
            },
        )
        .param("lambda", args.lambda)
        .param("out", &args.out);
    let mut artifacts = Artifacts::new(manifest);
    artifacts.stage(format!("{}.qm.json", args.out), qm.to_json()?);
    artifacts.stage(
        format!("{}.qubo.json", args.out),
        serde_json::to_string_pretty(&QuboFile::from_model(&qm))?,
    );
    artifacts.write(Path::new(&format!("{}.manifest.json", args.out)))
}

#[derive(Serialize)]
struct SweepSummary {
    classification: TransitionOrder,
    gamma_star: Option<f64>,
    max_jump: f64,
    jump_m_plus: f64,
    jump_m_minus: f64,
}

fn run_meanfield(args: MeanfieldArgs) -> Result<()> {
    let params = MeanFieldParams {
        j: args.j,
        lambda: args.lambda,
        q: args.q,
        constraint: args.constraint.into(),
        beta: args.beta,
        gamma: 0.0,
    };
    let sweep = with_threads(args.threads, || {
        sweep_gamma(&params, args.gamma_max, args.gamma_step)
    })??;
    let summary = SweepSummary {
        classification: sweep.classification,
        gamma_star: sweep.gamma_star,
        max_jump: sweep.max_jump,
        jump_m_plus: sweep.jump_m_plus,
        jump_m_minus: sweep.jump_m_minus,
    };
    let manifest = RunManifest::new("meanfield", 0)
        .param("Q", args.q)
        .param(
            "constraint",
            match args.constraint {
                ConstraintArg::OneHot => "one_hot",
                ConstraintArg::HalfHot => "half_hot",
            },
        )
        .param("lambda", args.lambda)
        .param("J", args.j)
        .param("gamma-max", args.gamma_max)
        .param("gamma-step", args.gamma_step)
        .param("beta", beta_to_string(args.beta))
        .param("out", args.out.display());
    let mut artifacts = Artifacts::new(manifest);
    artifacts.stage(args.out.clone(), sweep.to_csv());
    let mut summary_name = args.out.file_name().unwrap_or_default().to_os_string();
    summary_name.push(".summary.json");
    artifacts.stage(
        args.out.with_file_name(summary_name),
        serde_json::to_string_pretty(&summary)?,
    );
    artifacts.write(&manifest_path(&args.out))
}

fn run_infq(args: InfqArgs) -> Result<()> {
    let gammas: Vec<f64> = if let Some(gamma) = args.gamma {
        vec![gamma]
    } else {
        let max = args
            .gamma_max
            .ok_or_else(|| anyhow!("pass either --gamma or --gamma-max with --gamma-step"))?;
        let step = args.gamma_step.unwrap();
        let steps = (max / step).round() as usize;
        (0..=steps).map(|k| (steps - k) as f64 * step).collect()
    };
    let mut csv = String::from("gamma,m\n");
    for &gamma in &gammas {
        let m = solve_infinite_q(args.j, gamma, args.beta);
        csv.push_str(&format!("{},{}\n", sig12(gamma), sig12(m)));
    }
    let mut manifest = RunManifest::new("infq", 0)
        .param("J", args.j)
        .param("beta", beta_to_string(args.beta))
        .param("out", args.out.display());
    if let Some(gamma) = args.gamma {
        manifest = manifest.param("gamma", gamma);
    } else {
        manifest = manifest
            .param("gamma-max", args.gamma_max.unwrap())
            .param("gamma-step", args.gamma_step.unwrap());
    }
    let mut artifacts = Artifacts::new(manifest);
    artifacts.stage(args.out.clone(), csv);
    artifacts.write(&manifest_path(&args.out))
}

fn run_replica(args: ReplicaArgs) -> Result<()> {
    use rayon::prelude::*;
    let grid = GaussHermite::new(args.order);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    for &beta in &args.betas {
        for &gamma in &args.gammas {
            cells.push((beta, gamma));
        }
    }
    // sort rows by parameter, independent of execution order
    cells.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rows: Vec<(ScanPoint, bool)> = with_threads(args.threads, || {
        cells
            .par_iter()
            .map(|&(beta, gamma)| {
                let params = GlassParams {
                    j: args.j,
                    j0: args.j0,
                    lambda: args.lambda,
                    gamma,
                    beta,
                    q: Components::Infinite,
                };
                let solve = solve_rs(
                    &params,
                    &RsOrderParams::symmetric(0.1, 0.5, 1.0),
                    args.damping,
                    args.tol,
                    args.max_iter,
                    &grid,
                )?;
                Ok((
                    ScanPoint {
                        beta,
                        gamma,
                        j0: args.j0,
                        m: solve.state.m,
                        xi: solve.state.xi,
                        eta: solve.state.eta,
                        converged: solve.converged,
                        iterations: solve.iterations,
                    },
                    solve.near_critical,
                ))
            })
            .collect::<potts_core::Result<Vec<_>>>()
    })??;
    for (row, near_critical) in &rows {
        if *near_critical {
            eprintln!(
                "near-critical: beta={} gamma={} took {} iterations",
                row.beta, row.gamma, row.iterations
            );
        }
    }
    let points: Vec<ScanPoint> = rows.iter().map(|(r, _)| *r).collect();
    let manifest = RunManifest::new("replica", 0)
        .param("J", args.j)
        .param("J0", args.j0)
        .param("lambda", args.lambda)
        .param(
            "betas",
            args.betas
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(" "),
        )
        .param(
            "gammas",
            args.gammas
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(" "),
        )
        .param("order", args.order)
        .param("damping", args.damping)
        .param("tol", args.tol)
        .param("max-iter", args.max_iter)
        .param("out", args.out.display());
    let mut artifacts = Artifacts::new(manifest);
    artifacts.stage(args.out.clone(), scan_csv(&points));
    artifacts.write(&manifest_path(&args.out))
}

#[derive(Serialize)]
struct AnnealOutput {
    best_energy: f64,
    seed: u64,
    config: Vec<(String, i8)>,
}

fn read_any_model(path: &Path) -> Result<QuadraticModel> {
    QuadraticModel::read_model(path).or_else(|_| {
        import_qubo(path).with_context(|| {
            format!(
                "{} parses as neither a quadratic-model nor a QUBO file",
                path.display()
            )
        })
    })
}

fn run_anneal(args: AnnealArgs) -> Result<()> {
    let qm = read_any_model(&args.model)?;
    let mut sched = AnnealSchedule::default_for(&qm);
    if let Some(s) = args.sweeps {
        sched.sweeps = s;
    }
    if let Some(t) = args.t_start {
        sched.t_start = t;
    }
    if let Some(t) = args.t_end {
        sched.t_end = t;
    }
    let result = simulated_anneal(&qm, &sched, args.seed);
    let output = AnnealOutput {
        best_energy: result.best_energy,
        seed: result.seed,
        config: qm
            .variables()
            .iter()
            .zip(&result.best_config)
            .map(|(&(q, i), &v)| (format!("{q}:{i}"), v))
            .collect(),
    };
    let mut manifest = RunManifest::new("anneal", args.seed)
        .param("model", args.model.display())
        .param("seed", args.seed)
        .param("sweeps", sched.sweeps)
        .param("t-start", sched.t_start)
        .param("t-end", sched.t_end)
        .param("out", args.out.display());
    manifest.seed = args.seed;
    let mut artifacts = Artifacts::new(manifest);
    artifacts.stage(args.out.clone(), serde_json::to_string_pretty(&output)?);
    artifacts.write(&manifest_path(&args.out))
}

/// Round solver used by `iterate`: internal SA, or answers injected from
/// an external solver, with optional per-round QUBO dumps.
struct CliRoundSolver {
    sa: SaRoundSolver,
    answers: Option<PathBuf>,
    dump_rounds: Option<PathBuf>,
}

impl RoundSolver for CliRoundSolver {
    fn solve(&mut self, round: usize, qm: &QuadraticModel) -> potts_core::Result<Vec<i8>> {
        if let Some(dir) = &self.dump_rounds {
            std::fs::create_dir_all(dir)?;
            export_qubo(qm, &dir.join(format!("round_{round}.qubo.json")))?;
        }
        match &self.answers {
            Some(dir) => {
                let path = dir.join(format!("round_{round}.answer.json"));
                let answer =
                    read_answer(&path).map_err(|e| potts_core::Error::RoundFailed {
                        round,
                        reason: format!("cannot read {}: {e}", path.display()),
                    })?;
                let binary = answer.to_binary_config(qm.num_variables())?;
                Ok(QuadraticModel::convert_config(
                    &binary,
                    Domain::Binary,
                    qm.domain(),
                ))
            }
            None => self.sa.solve(round, qm),
        }
    }
}

#[derive(Serialize)]
struct IterateOutput {
    assignment: Vec<usize>,
    energy: f64,
    rounds: usize,
    round_energies: Vec<f64>,
}

fn run_iterate(args: IterateArgs) -> Result<()> {
    let model = PottsModel::read_instance(&args.instance)?;
    let mut sa = SaRoundSolver::new(args.seed);
    if let Some(sweeps) = args.sweeps {
        // default schedule with the sweep budget overridden per round
        let probe = encode::encode_half_hot_ising(&model, args.lambda)?;
        let mut sched = AnnealSchedule::default_for(&probe);
        sched.sweeps = sweeps;
        sa.schedule = Some(sched);
    }
    let mut solver = CliRoundSolver {
        sa,
        answers: args.answers.clone(),
        dump_rounds: args.dump_rounds.clone(),
    };
    let outcome = iterate_half_hot(&model, args.lambda, &mut solver)?;
    let output = IterateOutput {
        assignment: outcome.assignment.clone(),
        energy: outcome.energy,
        rounds: outcome.round_energies.len(),
        round_energies: outcome.round_energies.clone(),
    };
    let mut manifest = RunManifest::new("iterate", args.seed)
        .param("instance", args.instance.display())
        .param("lambda", args.lambda)
        .param("seed", args.seed)
        .param("out", &args.out);
    if let Some(sweeps) = args.sweeps {
        manifest = manifest.param("sweeps", sweeps);
    }
    if let Some(dir) = &args.answers {
        manifest = manifest.param("answers", dir.display());
    }
    if let Some(dir) = &args.dump_rounds {
        manifest = manifest.param("dump-rounds", dir.display());
    }
    let mut artifacts = Artifacts::new(manifest);
    artifacts.stage(
        format!("{}.json", args.out),
        serde_json::to_string_pretty(&output)?,
    );
    artifacts.stage(
        format!("{}.history.json", args.out),
        serde_json::to_string_pretty(&outcome.history)?,
    );
    artifacts.write(Path::new(&format!("{}.manifest.json", args.out)))
}
