//! Subcommand drivers. Each `cmd_*` validates the whole config before any
//! work starts, writes its artifacts into `out`, and returns whether the
//! experiment passed. Configuration problems come back as
//! [`CliError::Config`].

use std::path::Path;

use inertial_core::objectives::{builtin_corpus, check_gradient, check_lipschitz};
use inertial_core::ode::{compare_discrete_continuous, convergence_order, OdeSpec};
use inertial_core::rates::{estimate_loj_exponent, Quantity};
use inertial_core::solver::{admissibility_bound, run};
use inertial_core::{ComparisonRow, InertialParams, Objective, Trajectory};
use rayon::prelude::*;
use serde::Serialize;

use crate::artifacts::{self, fmt_f64, PlotKind};
use crate::config::{expand_grid, ExperimentConfig, GridPoint, Monitor};
use crate::error::{CliError, CliResult};
use crate::monitors::{self, ladder_violations, resolve_theta, MonitorReports, RateStudy};

pub const REPORT_SCHEMA: &str = "inertial-report/1";

#[derive(Clone, Debug, Serialize)]
pub struct ObjectiveInfo {
    pub id: String,
    pub dim: usize,
    pub lipschitz: f64,
    pub admissibility_bound: f64,
    pub known_critical_point: Option<Vec<f64>>,
    pub known_loj_exponent: Option<f64>,
}

impl ObjectiveInfo {
    fn new(obj: &Objective, beta: f64) -> Self {
        Self {
            id: obj.id.clone(),
            dim: obj.dim,
            lipschitz: obj.lipschitz,
            admissibility_bound: admissibility_bound(beta, obj.lipschitz),
            known_critical_point: obj.known_critical_point.clone(),
            known_loj_exponent: obj.known_loj_exponent,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FinalState {
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_next: Vec<f64>,
    pub g_y: f64,
    pub grad_norm_y: f64,
    pub gap: f64,
    pub distance_to_critical_set: Option<f64>,
}

/// Contents of `report.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub objective: ObjectiveInfo,
    pub params: InertialParams,
    pub x0: Vec<f64>,
    pub termination: &'static str,
    pub converged: bool,
    pub iterations: usize,
    #[serde(rename = "final")]
    pub final_state: FinalState,
    pub monitors: MonitorReports,
    /// Converged by gradient tolerance and every enabled monitor passed.
    pub pass: bool,
}

pub struct RunOutcome {
    pub objective: Objective,
    pub trajectory: Trajectory,
    pub report: RunReport,
    pub ode_rows: Option<Vec<ComparisonRow>>,
    pub value_slope: Option<f64>,
}

/// Solver plus monitors, without touching the file system.
pub fn execute_run(cfg: &ExperimentConfig) -> CliResult<RunOutcome> {
    let obj = cfg.objective()?;
    let params = cfg.params(&obj)?;
    let x0 = cfg.start_point(&obj)?;
    validate_monitors(cfg, &obj)?;
    let traj = run(&obj, &params, &x0, &cfg.stop.rule())?;
    let eval = monitors::evaluate(cfg, &obj, &traj, &x0);
    let last = traj.last();
    let final_state = FinalState {
        n: last.n,
        x: last.x.clone(),
        y: last.y.clone(),
        x_next: traj.x_final.clone(),
        g_y: last.g_y,
        grad_norm_y: last.grad_norm_y,
        gap: last.gap,
        distance_to_critical_set: obj.distance_to_critical_set(&last.y),
    };
    let pass = traj.converged() && eval.reports.pass();
    let report = RunReport {
        schema: REPORT_SCHEMA,
        config: cfg.clone(),
        objective: ObjectiveInfo::new(&obj, params.beta),
        params,
        x0,
        termination: traj.termination.as_str(),
        converged: traj.converged(),
        iterations: last.n,
        final_state,
        monitors: eval.reports,
        pass,
    };
    Ok(RunOutcome {
        objective: obj,
        trajectory: traj,
        report,
        ode_rows: eval.ode_rows,
        value_slope: eval.value_slope,
    })
}

/// Rejects monitor settings that cannot be satisfied by construction.
fn validate_monitors(cfg: &ExperimentConfig, obj: &Objective) -> CliResult<()> {
    if cfg.monitors.is_enabled(Monitor::Rates) && cfg.rates.theta.is_some() {
        resolve_theta(cfg, obj).map_err(CliError::from_core_config)?;
    }
    if cfg.monitors.is_enabled(Monitor::OdeCompare) {
        validate_ode(cfg, obj)?;
    }
    Ok(())
}

fn validate_ode(cfg: &ExperimentConfig, obj: &Objective) -> CliResult<()> {
    let o = &cfg.ode;
    for &s in &o.s_ladder {
        let beta = o.variant.beta(o.gamma, s);
        InertialParams::new(o.alpha, beta, s)
            .and_then(|p| p.check_admissible(obj.lipschitz))
            .map_err(|e| CliError::Config(format!("ode ladder entry s = {s} (beta = {beta}): {e}")))?;
    }
    Ok(())
}

pub fn cmd_run(cfg: &ExperimentConfig, out: &Path, plot_stub: bool) -> CliResult<bool> {
    let outcome = execute_run(cfg)?;
    artifacts::ensure_dir(out)?;
    artifacts::write_trajectory_csv(
        &out.join("trajectory.csv"),
        &outcome.trajectory,
        outcome.objective.lipschitz,
    )?;
    artifacts::write_json(&out.join("report.json"), &outcome.report)?;
    artifacts::write_text(&out.join("config.toml"), &cfg.to_toml())?;
    if let Some(rows) = &outcome.ode_rows {
        artifacts::write_ode_csv(&out.join("ode_compare.csv"), rows)?;
    }
    if plot_stub {
        artifacts::write_plot_stub(out, PlotKind::Trajectory)?;
    }
    Ok(outcome.report.pass)
}

pub const SUMMARY_HEADER: [&str; 18] = [
    "index",
    "objective",
    "alpha",
    "beta",
    "step_fraction",
    "step",
    "termination",
    "iterations",
    "converged",
    "final_gap",
    "final_grad_norm",
    "lyapunov",
    "gradH",
    "rates",
    "ode-compare",
    "rate_slope",
    "pass",
    "error",
];

fn sweep_row(base: &ExperimentConfig, point: &GridPoint) -> Vec<String> {
    let mut cfg = base.clone();
    cfg.sweep = None;
    cfg.run.objective = point.objective.clone();
    cfg.params.alpha = point.alpha;
    cfg.params.beta = point.beta;
    cfg.params.step = None;
    cfg.params.step_fraction = point.step_fraction;
    let head = [
        point.index.to_string(),
        point.objective.clone(),
        fmt_f64(point.alpha),
        fmt_f64(point.beta),
        fmt_f64(point.step_fraction),
    ];
    let mut row: Vec<String> = head.to_vec();
    match execute_run(&cfg) {
        Ok(o) => {
            let last = o.trajectory.last();
            row.extend([
                fmt_f64(o.report.params.step),
                o.report.termination.to_string(),
                last.n.to_string(),
                o.report.converged.to_string(),
                fmt_f64(last.gap),
                fmt_f64(last.grad_norm_y),
            ]);
            row.extend(
                o.report
                    .monitors
                    .entries()
                    .iter()
                    .map(|(_, e)| e.status.as_str().to_string()),
            );
            row.push(o.value_slope.map(fmt_f64).unwrap_or_default());
            row.push(o.report.pass.to_string());
            row.push(String::new());
        }
        Err(e) => {
            row.extend(std::iter::repeat_n(String::new(), 11));
            row.push("false".into());
            row.push(e.to_string());
        }
    }
    row
}

/// Runs the grid on `workers` threads (0 = one per core). Rows keep grid order.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path, workers: usize, plot_stub: bool) -> CliResult<bool> {
    let grid = expand_grid(cfg)?;
    artifacts::ensure_dir(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let rows: Vec<Vec<String>> = pool.install(|| grid.par_iter().map(|p| sweep_row(cfg, p)).collect());
    artifacts::write_rows(&out.join("summary.csv"), &SUMMARY_HEADER, &rows)?;
    artifacts::write_text(&out.join("config.toml"), &cfg.to_toml())?;
    if plot_stub {
        artifacts::write_plot_stub(out, PlotKind::Summary)?;
    }
    Ok(rows.iter().all(|r| r[16] == "true"))
}

/// Contents of `rates.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RatesDocument {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub objective: ObjectiveInfo,
    pub params: InertialParams,
    pub termination: &'static str,
    pub iterations: usize,
    #[serde(flatten)]
    pub study: RateStudy,
    /// Lojasiewicz exponent estimated from the run, when the fit succeeds.
    pub theta_hat: Option<f64>,
    pub theta_hat_error: Option<String>,
    pub pass: bool,
}

pub fn execute_rates(cfg: &ExperimentConfig) -> CliResult<RatesDocument> {
    let obj = cfg.objective()?;
    let params = cfg.params(&obj)?;
    let x0 = cfg.start_point(&obj)?;
    resolve_theta(cfg, &obj).map_err(CliError::from_core_config)?;
    let traj = run(&obj, &params, &x0, &cfg.stop.rule())?;
    let study = monitors::rate_study(cfg, &obj, &traj, &Quantity::ALL)?;
    let theta_hat = estimate_loj_exponent(&obj, &traj, cfg.rates.window_fraction);
    Ok(RatesDocument {
        schema: REPORT_SCHEMA,
        config: cfg.clone(),
        objective: ObjectiveInfo::new(&obj, params.beta),
        params,
        termination: traj.termination.as_str(),
        iterations: traj.last().n,
        pass: study.pass(),
        study,
        theta_hat: theta_hat.as_ref().ok().copied(),
        theta_hat_error: theta_hat.err().map(|e| e.to_string()),
    })
}

pub fn cmd_rates(cfg: &ExperimentConfig, out: &Path) -> CliResult<bool> {
    let doc = execute_rates(cfg)?;
    artifacts::ensure_dir(out)?;
    artifacts::write_json(&out.join("rates.json"), &doc)?;
    Ok(doc.pass)
}

#[derive(Clone, Debug, Serialize)]
pub struct OdeDocument {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub objective: ObjectiveInfo,
    pub rows: Vec<ComparisonRow>,
    pub strictly_decreasing: bool,
    /// Self-convergence order of the integrator on the coarsest ladder step.
    pub integrator_order: Option<f64>,
    pub pass: bool,
}

pub fn execute_ode(cfg: &ExperimentConfig) -> CliResult<OdeDocument> {
    let obj = cfg.objective()?;
    let x0 = cfg.start_point(&obj)?;
    validate_ode(cfg, &obj)?;
    let o = &cfg.ode;
    let rows = compare_discrete_continuous(
        &obj,
        o.gamma,
        o.alpha,
        &o.s_ladder,
        o.variant,
        &o.compare_options(x0.clone()),
    )
    .map_err(|e| match e {
        inertial_core::Error::Config(_) | inertial_core::Error::Domain { .. } => CliError::from_core_config(e),
        other => CliError::Core(other),
    })?;
    let integrator_order = o.s_ladder.first().and_then(|&s| {
        let root = s.sqrt();
        let t0 = o.n0 as f64 * root;
        let spec = OdeSpec {
            variant: o.variant,
            alpha: o.alpha,
            gamma: o.gamma,
            t0,
            x0: x0.clone(),
            v0: vec![0.0; obj.dim],
        };
        convergence_order(&spec, &obj, o.t_end.max(t0 + root), root / o.substeps as f64).ok()
    });
    let strictly_decreasing = ladder_violations(&rows).is_empty();
    Ok(OdeDocument {
        schema: REPORT_SCHEMA,
        config: cfg.clone(),
        objective: ObjectiveInfo::new(&obj, cfg.params.beta),
        pass: strictly_decreasing,
        rows,
        strictly_decreasing,
        integrator_order,
    })
}

pub fn cmd_ode(cfg: &ExperimentConfig, out: &Path, plot_stub: bool) -> CliResult<bool> {
    let doc = execute_ode(cfg)?;
    artifacts::ensure_dir(out)?;
    artifacts::write_ode_csv(&out.join("ode_compare.csv"), &doc.rows)?;
    artifacts::write_json(&out.join("ode_report.json"), &doc)?;
    if plot_stub {
        artifacts::write_plot_stub(out, PlotKind::OdeCompare)?;
    }
    Ok(doc.pass)
}

pub fn list_objectives() -> String {
    let mut s = format!(
        "{:<28} {:>4} {:>10} {:>7}  {}\n",
        "id", "dim", "L_g", "theta", "tracked critical point"
    );
    for obj in builtin_corpus() {
        let theta = obj
            .known_loj_exponent
            .map(|t| format!("{t:.4}"))
            .unwrap_or_else(|| "-".into());
        let point = obj.known_critical_point.as_ref().map(|p| {
            if p.len() > 4 {
                format!("[{}; {}]", p[0], p.len())
            } else {
                format!("{p:?}")
            }
        });
        s.push_str(&format!(
            "{:<28} {:>4} {:>10} {:>7}  {}\n",
            obj.id,
            obj.dim,
            obj.lipschitz,
            theta,
            point.unwrap_or_else(|| "-".into())
        ));
    }
    s
}

/// Finite-difference gradients at 100 points and Lipschitz ratios on 1e4
/// pairs for every corpus member (or just `only`).
pub fn check_gradients(only: Option<&Objective>, seed: u64) -> CliResult<(String, bool)> {
    let objs = match only {
        Some(o) => vec![o.clone()],
        None => builtin_corpus(),
    };
    let mut text = format!(
        "{:<28} {:>12} {:>12} {:>10} {:>6}  {}\n",
        "id", "max_rel_err", "max_abs_err", "L_ratio", "L_viol", "status"
    );
    let mut all_ok = true;
    for obj in &objs {
        let grad = check_gradient(obj, &obj.reference_box.sample(100, seed))?;
        let lip = check_lipschitz(obj, 10_000, seed, 1e-10);
        let ok = grad.passes(1e-6, 1e-6) && lip.violations == 0;
        all_ok &= ok;
        text.push_str(&format!(
            "{:<28} {:>12.3e} {:>12.3e} {:>10.4} {:>6}  {}\n",
            obj.id,
            grad.max_relative_error,
            grad.max_absolute_error,
            lip.max_ratio,
            lip.violations,
            if ok { "ok" } else { "FAIL" }
        ));
    }
    Ok((text, all_ok))
}
