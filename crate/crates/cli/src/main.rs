//! Batch experiment front-end: parses instance files, runs the library
//! modules, and emits machine-readable result documents. The CLI performs no
//! math of its own; every number traces to a library call. Outputs are
//! byte-identical for identical configuration and seed.

mod instances;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qrs_core::hiddenshift::{boosted_bhsp, run_bhsp, ShiftOracle};
use qrs_core::linear::{solve_qle, truncated_weights};
use qrs_core::metropolis::run_chain;
use qrs_core::sqrs::SQRS_R;
use qrs_core::{
    plan_exact, run_aqrs, run_asqrs, verify_duality, AmplitudeVector, PreparationOracle, QrsError,
    ReflectionOracle, Schedule,
};

use instances::*;
use output::{csv_table, Document};

#[derive(Debug)]
pub enum CliError {
    /// Malformed input: exit code 1.
    Input(String),
    /// Infeasible instance (target probability above the attainable range):
    /// exit code 2.
    Infeasible(String),
    /// Violated numerical invariant: exit code 3.
    Numerical(String),
}

impl CliError {
    fn input(e: QrsError) -> Self {
        CliError::Input(e.to_string())
    }

    fn from_core(e: QrsError) -> Self {
        match e {
            QrsError::TargetOutOfRange { .. } | QrsError::Infeasible(_) => {
                CliError::Infeasible(e.to_string())
            }
            QrsError::Numerical(_) => CliError::Numerical(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Infeasible(m) | CliError::Numerical(m) => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Common {
    /// Instance file (schema depends on the subcommand).
    #[arg(long)]
    instance: PathBuf,
    /// Generator seed; mandatory for stochastic subcommands.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of independent trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Output format; CSV is a lossy projection for sweep tables.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(
    name = "qrs",
    about = "Rejection sampling workbench: water-filling, certified duality, \
             exact amplitude amplification, and desk-scale applications"
)]
enum Cli {
    /// Solve the water-filling allocation and certify it.
    Waterfill(Common),
    /// Emit the full duality certificate with per-check slacks.
    Certify(Common),
    /// Run the exact rejection sampling algorithm on a simulated oracle.
    Qrs(Common),
    /// Run single-copy state conversion trials.
    Sqrs(Common),
    /// Solve a linear-system instance through the conversion reduction.
    Qle(Common),
    /// Run Metropolis moves between eigenstates.
    Qmm(Common),
    /// Solve a Boolean hidden shift instance.
    Bhsp {
        #[command(flatten)]
        common: Common,
        /// Target success probability.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Hidden shift; drawn from the seed when omitted.
        #[arg(long)]
        shift: Option<usize>,
    },
    /// Boosted hidden shift: cut spectrum, repetition, and checking.
    BhspBoost {
        #[command(flatten)]
        common: Common,
        /// Spectral cut level in [0, 1].
        #[arg(long, default_value_t = 0.5)]
        gamma_cut: f64,
        /// Failure budget for the returned shift.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Hidden shift; drawn from the seed when omitted.
        #[arg(long)]
        shift: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_instance(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed instance: {e}")))
}

fn require_seed(common: &Common) -> Result<u64, CliError> {
    common
        .seed
        .ok_or_else(|| CliError::Input("this subcommand is stochastic; pass --seed".into()))
}

fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn emit(common: &Common, rendered: String) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli {
        Cli::Waterfill(common) => run_waterfill(&common, false),
        Cli::Certify(common) => run_waterfill(&common, true),
        Cli::Qrs(common) => run_qrs(&common),
        Cli::Sqrs(common) => run_sqrs(&common),
        Cli::Qle(common) => run_qle(&common),
        Cli::Qmm(common) => run_qmm(&common),
        Cli::Bhsp { common, p, shift } => run_bhsp_cmd(&common, p, shift),
        Cli::BhspBoost {
            common,
            gamma_cut,
            delta,
            shift,
        } => run_boost_cmd(&common, gamma_cut, delta, shift),
    }
}

// ---------------------------------------------------------------------------
// waterfill / certify

#[derive(Serialize)]
struct DualReport {
    lambda: Vec<f64>,
    mu: f64,
    objective: f64,
    excluded: Vec<usize>,
}

#[derive(Serialize)]
struct CheckReport {
    name: String,
    slack: f64,
    pass: bool,
}

#[derive(Serialize)]
struct WaterfillReport {
    p: f64,
    p_min: f64,
    p_max: f64,
    gamma_min: f64,
    gamma_max_infinite: bool,
    gamma_max: f64,
    gamma_bar_infinite: bool,
    gamma_bar: f64,
    epsilon: Vec<f64>,
    epsilon_norm: f64,
    objective: f64,
    dual: Option<DualReport>,
    certificate: String,
    checks: Vec<CheckReport>,
}

fn run_waterfill(common: &Common, full_checks: bool) -> Result<(), CliError> {
    let instance: WaterfillInstance = parse_json(&read_instance(&common.instance)?)?;
    let (pi, sigma) = instance.vectors()?;
    let solution = qrs_core::waterfill(&pi, &sigma, instance.p).map_err(CliError::from_core)?;
    let certificate = verify_duality(&pi, &sigma, instance.p).map_err(CliError::from_core)?;

    let report = WaterfillReport {
        p: instance.p,
        p_min: solution.p_min,
        p_max: solution.p_max,
        gamma_min: solution.gamma_min,
        gamma_max_infinite: solution.gamma_max.is_infinite(),
        gamma_max: finite_or_zero(solution.gamma_max),
        gamma_bar_infinite: solution.gamma_bar.is_infinite(),
        gamma_bar: finite_or_zero(solution.gamma_bar),
        epsilon: solution.epsilon.entries().to_vec(),
        epsilon_norm: solution.epsilon_norm(),
        objective: solution.objective(),
        dual: certificate.dual.as_ref().map(|w| DualReport {
            lambda: w.lambda.clone(),
            mu: w.mu,
            objective: w.objective,
            excluded: w.excluded.clone(),
        }),
        certificate: if certificate.pass { "pass" } else { "fail" }.into(),
        checks: if full_checks {
            certificate
                .checks
                .iter()
                .map(|c| CheckReport {
                    name: c.name.clone(),
                    slack: c.slack,
                    pass: c.pass,
                })
                .collect()
        } else {
            Vec::new()
        },
    };
    let command = if full_checks { "certify" } else { "waterfill" };
    let rendered = match common.format {
        Format::Json => Document::new(command, common.seed, None, report).to_json(),
        Format::Csv => {
            let mut rows = vec![
                format!("p,{}", report.p),
                format!("p_min,{}", report.p_min),
                format!("p_max,{}", report.p_max),
                format!(
                    "gamma_bar,{}",
                    render_level(report.gamma_bar, report.gamma_bar_infinite)
                ),
                format!("epsilon_norm,{}", report.epsilon_norm),
                format!("objective,{}", report.objective),
                format!("certificate,{}", report.certificate),
            ];
            for (k, e) in report.epsilon.iter().enumerate() {
                rows.push(format!("epsilon_{k},{e}"));
            }
            csv_table("key,value", &rows)
        }
    };
    if !certificate.pass {
        emit(common, rendered)?;
        return Err(CliError::Numerical("duality certificate failed".into()));
    }
    emit(common, rendered)
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

fn render_level(v: f64, infinite: bool) -> String {
    if infinite {
        "inf".into()
    } else {
        format!("{v}")
    }
}

// ---------------------------------------------------------------------------
// qrs

#[derive(Serialize)]
struct QrsTrialReport {
    trial: u64,
    accept: bool,
    accept_probability: f64,
    overlap: f64,
    overlap_squared: f64,
    queries: u64,
}

#[derive(Serialize)]
struct QrsReport {
    p: f64,
    epsilon_norm: f64,
    theta: f64,
    rounds: u64,
    r: f64,
    planned_queries: u64,
    mean_queries: f64,
    accept_rate: f64,
    trials: Vec<QrsTrialReport>,
}

fn run_qrs(common: &Common) -> Result<(), CliError> {
    let seed = require_seed(common)?;
    let instance: QrsInstance = parse_json(&read_instance(&common.instance)?)?;
    let (pi, sigma, xi) = instance.build(seed)?;
    let plan = plan_exact(&pi, &sigma, instance.p).map_err(CliError::from_core)?;
    let target = xi.superposition(&sigma).map_err(CliError::from_core)?;

    let trials = common.trials.unwrap_or(1).max(1);
    let mut reports = Vec::new();
    let mut accepted = 0u64;
    let mut total_queries = 0u64;
    for t in 0..trials {
        let oracle =
            PreparationOracle::new(&pi, &xi, trial_seed(seed, t)).map_err(CliError::from_core)?;
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
        let run = run_aqrs(
            &oracle, &pi, &sigma, instance.p, instance.d, &target, &mut rng,
        )
        .map_err(CliError::from_core)?;
        accepted += run.accept as u64;
        total_queries += run.queries;
        reports.push(QrsTrialReport {
            trial: t,
            accept: run.accept,
            accept_probability: run.accept_probability,
            overlap: run.success_overlap,
            overlap_squared: run.success_overlap * run.success_overlap,
            queries: run.queries,
        });
    }
    let report = QrsReport {
        p: instance.p,
        epsilon_norm: plan.epsilon_norm,
        theta: plan.theta,
        rounds: plan.t_tilde,
        r: plan.r,
        planned_queries: plan.queries(),
        mean_queries: total_queries as f64 / trials as f64,
        accept_rate: accepted as f64 / trials as f64,
        trials: reports,
    };
    let rendered = match common.format {
        Format::Json => Document::new("qrs", Some(seed), Some(trials), report).to_json(),
        Format::Csv => csv_table(
            "trial,accept,accept_probability,overlap,queries",
            &report
                .trials
                .iter()
                .map(|t| {
                    format!(
                        "{},{},{},{},{}",
                        t.trial, t.accept, t.accept_probability, t.overlap, t.queries
                    )
                })
                .collect::<Vec<_>>(),
        ),
    };
    emit(common, rendered)
}

// ---------------------------------------------------------------------------
// sqrs

#[derive(Serialize)]
struct SqrsTrialReport {
    trial: u64,
    queries: u64,
    accepted_level: i64,
    fidelity: f64,
}

#[derive(Serialize)]
struct SqrsReport {
    alpha: f64,
    epsilon_norm: f64,
    query_budget: f64,
    mean_queries: f64,
    p50_queries: u64,
    p90_queries: u64,
    max_queries: u64,
    trials: Vec<SqrsTrialReport>,
}

fn run_sqrs(common: &Common) -> Result<(), CliError> {
    let instance: SqrsInstance = parse_json(&read_instance(&common.instance)?)?;
    let seed = match (common.seed, instance.seed) {
        (Some(s), _) => s,
        (None, Some(s)) => s,
        (None, None) => {
            return Err(CliError::Input(
                "this subcommand is stochastic; pass --seed or a seed field".into(),
            ))
        }
    };
    let trials = common.trials.or(instance.trials).unwrap_or(1).max(1);
    let (tau, pi, xi) = instance.build(seed)?;
    let start = xi.superposition(&pi).map_err(CliError::from_core)?;
    // Verification target per the conversion semantics (alpha-independent).
    let sigma =
        AmplitudeVector::normalized((0..pi.len()).map(|k| pi[k] * tau.entries()[k]).collect())
            .map_err(CliError::from_core)?;
    let target = xi.superposition(&sigma).map_err(CliError::from_core)?;

    let eps_norm = qrs_core::sqrs::converted_mass(&pi, &tau, instance.alpha, SQRS_R)
        .map_err(CliError::from_core)?;

    let mut reports = Vec::new();
    let mut total = 0u64;
    for t in 0..trials {
        let initial = start.append_zero_register(2).map_err(CliError::from_core)?;
        let reflection = ReflectionOracle::new(initial.clone()).map_err(CliError::from_core)?;
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
        let run = run_asqrs(
            &initial,
            &reflection,
            &tau,
            instance.alpha,
            &Schedule::default(),
            &[1],
            &target,
            &mut rng,
        )
        .map_err(CliError::from_core)?;
        total += run.queries;
        reports.push(SqrsTrialReport {
            trial: t,
            queries: run.queries,
            accepted_level: run.accepted_level,
            fidelity: run.success_overlap,
        });
    }
    let mut sorted: Vec<u64> = reports.iter().map(|r| r.queries).collect();
    sorted.sort_unstable();
    let report = SqrsReport {
        alpha: instance.alpha,
        epsilon_norm: eps_norm,
        query_budget: 128.0 / eps_norm,
        mean_queries: total as f64 / trials as f64,
        p50_queries: sorted[(sorted.len() - 1) / 2],
        p90_queries: sorted[(sorted.len() - 1) * 9 / 10],
        max_queries: *sorted.last().unwrap(),
        trials: reports,
    };
    let rendered = match common.format {
        Format::Json => Document::new("sqrs", Some(seed), Some(trials), report).to_json(),
        Format::Csv => csv_table(
            "trial,queries,accepted_level,fidelity",
            &report
                .trials
                .iter()
                .map(|t| {
                    format!(
                        "{},{},{},{}",
                        t.trial, t.queries, t.accepted_level, t.fidelity
                    )
                })
                .collect::<Vec<_>>(),
        ),
    };
    emit(common, rendered)
}

// ---------------------------------------------------------------------------
// qle

#[derive(Serialize)]
struct QleTrialReport {
    trial: u64,
    queries: u64,
    accepted_level: i64,
}

#[derive(Serialize)]
struct QleReport {
    kappa: f64,
    kappa_tilde: f64,
    p_predicted: f64,
    p_measured: f64,
    fidelity: f64,
    queries_mean: f64,
    w_tilde_norm: f64,
    cost_scale: f64,
    trials: Vec<QleTrialReport>,
}

fn run_qle(common: &Common) -> Result<(), CliError> {
    let seed = require_seed(common)?;
    let file: QleInstanceFile = parse_json(&read_instance(&common.instance)?)?;
    let instance = file.build()?;
    let weights = truncated_weights(&instance, file.kappa_tilde).map_err(CliError::from_core)?;
    let trials = common.trials.unwrap_or(1).max(1);

    let mut reports = Vec::new();
    let mut total = 0u64;
    let mut p_measured = 0.0;
    let mut fidelity = 0.0;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
        let run = solve_qle(&instance, file.kappa_tilde, &mut rng).map_err(CliError::from_core)?;
        total += run.queries;
        p_measured = run.p_measured;
        fidelity = run.fidelity_truncated;
        reports.push(QleTrialReport {
            trial: t,
            queries: run.queries,
            accepted_level: run.accepted_level,
        });
    }
    let w_tilde_norm = weights.w_tilde.iter().map(|x| x * x).sum::<f64>().sqrt();
    let report = QleReport {
        kappa: file.kappa,
        kappa_tilde: file.kappa_tilde,
        p_predicted: weights.p,
        p_measured,
        fidelity,
        queries_mean: total as f64 / trials as f64,
        w_tilde_norm,
        cost_scale: file.kappa_tilde / w_tilde_norm,
        trials: reports,
    };
    let rendered = match common.format {
        Format::Json => Document::new("qle", Some(seed), Some(trials), report).to_json(),
        Format::Csv => csv_table(
            "trial,queries,accepted_level",
            &report
                .trials
                .iter()
                .map(|t| format!("{},{},{}", t.trial, t.queries, t.accepted_level))
                .collect::<Vec<_>>(),
        ),
    };
    emit(common, rendered)
}

// ---------------------------------------------------------------------------
// qmm

#[derive(Serialize)]
struct QmmMoveReport {
    step: usize,
    j: usize,
    queries: u64,
}

#[derive(Serialize)]
struct QmmReport {
    beta: f64,
    start: usize,
    steps: usize,
    histogram: Vec<u64>,
    total_queries: u64,
    moves: Vec<QmmMoveReport>,
}

fn run_qmm(common: &Common) -> Result<(), CliError> {
    let seed = require_seed(common)?;
    let file: QmmInstanceFile = parse_json(&read_instance(&common.instance)?)?;
    let instance = file.build()?;
    if file.start >= instance.dim() {
        return Err(CliError::Input(format!(
            "start index {} outside spectrum",
            file.start
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain =
        run_chain(&instance, file.start, file.steps, &mut rng).map_err(CliError::from_core)?;
    let report = QmmReport {
        beta: file.beta,
        start: file.start,
        steps: file.steps,
        histogram: chain.visits.clone(),
        total_queries: chain.total_queries,
        moves: chain
            .moves
            .iter()
            .enumerate()
            .map(|(step, (j, queries))| QmmMoveReport {
                step,
                j: *j,
                queries: *queries,
            })
            .collect(),
    };
    let rendered = match common.format {
        Format::Json => Document::new("qmm", Some(seed), None, report).to_json(),
        Format::Csv => csv_table(
            "step,j,queries",
            &report
                .moves
                .iter()
                .map(|m| format!("{},{},{}", m.step, m.j, m.queries))
                .collect::<Vec<_>>(),
        ),
    };
    emit(common, rendered)
}

// ---------------------------------------------------------------------------
// bhsp / bhsp-boost

fn draw_shift(
    f: &qrs_core::hiddenshift::BooleanFunction,
    requested: Option<usize>,
    seed: u64,
) -> Result<usize, CliError> {
    if let Some(s) = requested {
        return Ok(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5717);
    for _ in 0..4 * f.domain_size() {
        let s = rng.gen_range(0..f.domain_size());
        if s == 0 || f.influence(s) > 0.0 {
            return Ok(s);
        }
    }
    Err(CliError::Input(
        "could not draw a promise-respecting shift; pass --shift".into(),
    ))
}

#[derive(Serialize)]
struct BhspRunReport {
    run: u64,
    s_hat: usize,
    matched: bool,
    queries: u64,
}

#[derive(Serialize)]
struct BhspReport {
    n: u32,
    shift: usize,
    p: f64,
    epsilon_norm: f64,
    min_influence: f64,
    rounds: u64,
    match_rate: f64,
    runs: Vec<BhspRunReport>,
}

fn run_bhsp_cmd(common: &Common, p: f64, shift: Option<usize>) -> Result<(), CliError> {
    let seed = require_seed(common)?;
    let f = parse_function_file(&read_instance(&common.instance)?)?;
    let shift = draw_shift(&f, shift, seed)?;
    let trials = common.trials.unwrap_or(1).max(1);

    let mut runs = Vec::new();
    let mut matched = 0u64;
    let mut eps_norm = 0.0;
    let mut rounds = 0;
    for t in 0..trials {
        let oracle = ShiftOracle::new(f.clone(), shift).map_err(CliError::input)?;
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
        let run = run_bhsp(&oracle, p, &mut rng).map_err(CliError::from_core)?;
        matched += (run.s_hat == shift) as u64;
        eps_norm = run.epsilon_norm;
        rounds = run.rounds;
        runs.push(BhspRunReport {
            run: t,
            s_hat: run.s_hat,
            matched: run.s_hat == shift,
            queries: run.queries,
        });
    }
    let report = BhspReport {
        n: f.bits(),
        shift,
        p,
        epsilon_norm: eps_norm,
        min_influence: f.min_influence(),
        rounds,
        match_rate: matched as f64 / trials as f64,
        runs,
    };
    let rendered = match common.format {
        Format::Json => Document::new("bhsp", Some(seed), Some(trials), report).to_json(),
        Format::Csv => csv_table(
            "run,s_hat,matched,queries",
            &report
                .runs
                .iter()
                .map(|r| format!("{},{},{},{}", r.run, r.s_hat, r.matched, r.queries))
                .collect::<Vec<_>>(),
        ),
    };
    emit(common, rendered)
}

#[derive(Serialize)]
struct BoostRunReport {
    run: u64,
    s_hat: usize,
    matched: bool,
    attempts: u64,
    total_queries: u64,
}

#[derive(Serialize)]
struct BoostReport {
    n: u32,
    shift: usize,
    gamma_cut: f64,
    delta: f64,
    p: f64,
    p_l1_normalized: f64,
    p_l1_raw: f64,
    check_rounds: u64,
    failure_rate: f64,
    runs: Vec<BoostRunReport>,
}

fn run_boost_cmd(
    common: &Common,
    gamma_cut: f64,
    delta: f64,
    shift: Option<usize>,
) -> Result<(), CliError> {
    let seed = require_seed(common)?;
    let f = parse_function_file(&read_instance(&common.instance)?)?;
    let shift = draw_shift(&f, shift, seed)?;
    let trials = common.trials.unwrap_or(1).max(1);

    let mut runs = Vec::new();
    let mut failures = 0u64;
    let mut summary = (0.0, 0.0, 0.0, 0u64);
    for t in 0..trials {
        let oracle = ShiftOracle::new(f.clone(), shift).map_err(CliError::input)?;
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
        let run = boosted_bhsp(&oracle, gamma_cut, delta, &mut rng).map_err(CliError::from_core)?;
        failures += (run.s_hat != shift) as u64;
        summary = (run.p, run.p_l1_normalized, run.p_l1_raw, run.check_rounds);
        runs.push(BoostRunReport {
            run: t,
            s_hat: run.s_hat,
            matched: run.s_hat == shift,
            attempts: run.attempts,
            total_queries: run.total_queries,
        });
    }
    let report = BoostReport {
        n: f.bits(),
        shift,
        gamma_cut,
        delta,
        p: summary.0,
        p_l1_normalized: summary.1,
        p_l1_raw: summary.2,
        check_rounds: summary.3,
        failure_rate: failures as f64 / trials as f64,
        runs,
    };
    let rendered = match common.format {
        Format::Json => Document::new("bhsp-boost", Some(seed), Some(trials), report).to_json(),
        Format::Csv => csv_table(
            "run,s_hat,matched,attempts,total_queries",
            &report
                .runs
                .iter()
                .map(|r| {
                    format!(
                        "{},{},{},{},{}",
                        r.run, r.s_hat, r.matched, r.attempts, r.total_queries
                    )
                })
                .collect::<Vec<_>>(),
        ),
    };
    emit(common, rendered)
}
