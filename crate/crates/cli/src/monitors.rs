//! Runs the enabled monitors over a trajectory and shapes their results for
//! `report.json`.
//!
//! Every monitor entry has the same fields whether or not it ran, so the
//! report can be read without special cases.

use std::cmp::Ordering;

use inertial_core::lyapunov::{check_grad_h_bounds, critical_index, instrument};
use inertial_core::ode::compare_discrete_continuous;
use inertial_core::rates::{predict, rate_report, Quantity, RateReport};
use inertial_core::{ComparisonRow, Objective, Regime, Trajectory, Violation};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Monitor};

/// Longest violation list written to a report; `violation_count` has the total.
pub const MAX_LISTED_VIOLATIONS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The monitor could not be evaluated (e.g. too few iterates).
    Error,
    Skipped,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorEntry {
    pub enabled: bool,
    pub status: Status,
    /// True for `pass` and `skipped`.
    pub pass: bool,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    pub error: Option<String>,
    /// Monitor-specific summary; `null` unless the monitor ran.
    pub details: Value,
}

impl MonitorEntry {
    fn skipped() -> Self {
        Self {
            enabled: false,
            status: Status::Skipped,
            pass: true,
            violation_count: 0,
            violations: Vec::new(),
            error: None,
            details: Value::Null,
        }
    }

    fn failed(error: impl ToString) -> Self {
        Self {
            enabled: true,
            status: Status::Error,
            pass: false,
            violation_count: 0,
            violations: Vec::new(),
            error: Some(error.to_string()),
            details: Value::Null,
        }
    }

    fn evaluated(ok: bool, mut violations: Vec<Violation>, details: Value) -> Self {
        let violation_count = violations.len();
        violations.truncate(MAX_LISTED_VIOLATIONS);
        Self {
            enabled: true,
            status: if ok { Status::Pass } else { Status::Fail },
            pass: ok,
            violation_count,
            violations,
            error: None,
            details,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReports {
    pub lyapunov: MonitorEntry,
    #[serde(rename = "gradH")]
    pub grad_h: MonitorEntry,
    pub rates: MonitorEntry,
    #[serde(rename = "ode-compare")]
    pub ode_compare: MonitorEntry,
}

impl MonitorReports {
    pub fn pass(&self) -> bool {
        self.entries().iter().all(|(_, e)| e.pass)
    }

    pub fn entries(&self) -> [(Monitor, &MonitorEntry); 4] {
        [
            (Monitor::Lyapunov, &self.lyapunov),
            (Monitor::GradH, &self.grad_h),
            (Monitor::Rates, &self.rates),
            (Monitor::OdeCompare, &self.ode_compare),
        ]
    }
}

/// Monitor results plus the ODE ladder rows, which `run` also writes to CSV.
pub struct Evaluation {
    pub reports: MonitorReports,
    pub ode_rows: Option<Vec<ComparisonRow>>,
    /// Fitted `value_gap_y` slope, when the rates monitor produced one.
    pub value_slope: Option<f64>,
}

pub fn evaluate(cfg: &ExperimentConfig, obj: &Objective, traj: &Trajectory, x0: &[f64]) -> Evaluation {
    let m = &cfg.monitors;
    let opts = m.options();
    let lyapunov = if m.is_enabled(Monitor::Lyapunov) {
        match instrument(traj, obj, &opts) {
            Ok(r) => {
                let details = json!({
                    "n_start": r.n_start,
                    "tolerance": r.tolerance,
                    "monotonicity_violations": r.violations.len(),
                    "decrease_violations": r.decrease_violations.len(),
                    "empirical_d": r.empirical_d,
                    "last_energy_change": r.last_energy_change,
                    "final_diagonal_distance": r.final_diagonal_distance,
                    "final_energy": r.records.last().map(|e| e.energy),
                });
                let mut v = r.violations.clone();
                v.extend(r.decrease_violations.iter().copied());
                MonitorEntry::evaluated(r.pass(), v, details)
            }
            Err(e) => MonitorEntry::failed(e),
        }
    } else {
        MonitorEntry::skipped()
    };

    let grad_h = if m.is_enabled(Monitor::GradH) {
        match check_grad_h_bounds(traj, obj, &opts) {
            Ok(r) => {
                let details = json!({
                    "n_start": r.n_start,
                    "checked": r.checked,
                    "worst_ratio_iv": r.worst_ratio_iv,
                    "worst_n_iv": r.worst_n_iv,
                    "worst_ratio_v": r.worst_ratio_v,
                    "worst_n_v": r.worst_n_v,
                    "violations_iv": r.violations_iv.len(),
                    "violations_v": r.violations_v.len(),
                });
                let mut v = r.violations_iv.clone();
                v.extend(r.violations_v.iter().copied());
                MonitorEntry::evaluated(r.pass(), v, details)
            }
            Err(e) => MonitorEntry::failed(e),
        }
    } else {
        MonitorEntry::skipped()
    };

    let (rates, value_slope) = if m.is_enabled(Monitor::Rates) {
        match rate_checks(cfg, obj, traj) {
            Ok(study) => {
                let slope = study
                    .reports
                    .iter()
                    .find(|r| r.report.quantity == Quantity::ValueGapY)
                    .and_then(|r| r.report.slope_fitted);
                let violations = study
                    .reports
                    .iter()
                    .filter(|r| !r.report.holds)
                    .map(|r| Violation {
                        n: r.worst_n,
                        lhs: r.report.constant,
                        rhs: 2.0 * r.first_half_constant,
                        slack: 0.0,
                    })
                    .collect();
                let ok = study.pass();
                (
                    MonitorEntry::evaluated(ok, violations, serde_json::to_value(&study).expect("serializable")),
                    slope,
                )
            }
            Err(e) => (MonitorEntry::failed(e), None),
        }
    } else {
        (MonitorEntry::skipped(), None)
    };

    let mut ode_rows = None;
    let ode_compare = if m.is_enabled(Monitor::OdeCompare) {
        let o = &cfg.ode;
        match compare_discrete_continuous(
            obj,
            o.gamma,
            o.alpha,
            &o.s_ladder,
            o.variant,
            &o.compare_options(x0.to_vec()),
        ) {
            Ok(rows) => {
                let violations = ladder_violations(&rows);
                let entry = MonitorEntry::evaluated(
                    violations.is_empty(),
                    violations,
                    json!({ "rows": rows, "strictly_decreasing": ladder_violations(&rows).is_empty() }),
                );
                ode_rows = Some(rows);
                entry
            }
            Err(e) => MonitorEntry::failed(e),
        }
    } else {
        MonitorEntry::skipped()
    };

    Evaluation {
        reports: MonitorReports {
            lyapunov,
            grad_h,
            rates,
            ode_compare,
        },
        ode_rows,
        value_slope,
    }
}

/// Ladder steps where `D(s)` fails to strictly decrease (`n` is the row index).
pub fn ladder_violations(rows: &[ComparisonRow]) -> Vec<Violation> {
    rows.windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].sup_distance.partial_cmp(&w[0].sup_distance) != Some(Ordering::Less))
        .map(|(i, w)| Violation {
            n: i + 1,
            lhs: w[1].sup_distance,
            rhs: w[0].sup_distance,
            slack: 0.0,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEntry {
    /// `p` for the fast regime, absent in the slow one.
    pub p: Option<f64>,
    #[serde(flatten)]
    pub report: RateReport,
    pub first_half_constant: f64,
    pub worst_n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateStudy {
    pub theta: f64,
    pub regime: Regime,
    pub n_start: usize,
    pub window_fraction: f64,
    pub reports: Vec<RateEntry>,
}

impl RateStudy {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.report.holds)
    }
}

/// `theta` from the config, else the objective's known exponent.
pub fn resolve_theta(cfg: &ExperimentConfig, obj: &Objective) -> inertial_core::Result<f64> {
    let theta = cfg.rates.theta.or(obj.known_loj_exponent).ok_or_else(|| {
        inertial_core::Error::Config(format!("no theta given and `{}` has no known exponent", obj.id))
    })?;
    // surfaces the (0, 1) domain check
    predict(theta, Some(1.0))?;
    Ok(theta)
}

/// Envelope checks on `quantities`: once with the slow-regime exponents, or
/// once per configured `p` when `theta <= 1/2`.
pub fn rate_study(
    cfg: &ExperimentConfig,
    obj: &Objective,
    traj: &Trajectory,
    quantities: &[Quantity],
) -> inertial_core::Result<RateStudy> {
    let theta = resolve_theta(cfg, obj)?;
    let ps: Vec<Option<f64>> = if theta <= 0.5 {
        if cfg.rates.p.is_empty() {
            return Err(inertial_core::Error::Config("theta <= 1/2 needs at least one p".into()));
        }
        cfg.rates.p.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let n_start = critical_index(&traj.params, obj.lipschitz, cfg.monitors.n_max)?;
    let mut reports = Vec::new();
    let mut regime = Regime::Slow;
    for p in ps {
        let pred = predict(theta, p)?;
        regime = pred.regime;
        for &q in quantities {
            let bound = inertial_core::rates::check_bound(traj, obj, &pred, q, n_start)?;
            let report = rate_report(traj, obj, &pred, q, n_start, cfg.rates.window_fraction)?;
            reports.push(RateEntry {
                p,
                report,
                first_half_constant: bound.first_half_constant,
                worst_n: bound.worst_n,
            });
        }
    }
    Ok(RateStudy {
        theta,
        regime,
        n_start,
        window_fraction: cfg.rates.window_fraction,
        reports,
    })
}

/// The two quantities the rate results are stated for.
pub const MONITORED_QUANTITIES: [Quantity; 2] = [Quantity::ValueGapY, Quantity::IterateDist];

fn rate_checks(cfg: &ExperimentConfig, obj: &Objective, traj: &Trajectory) -> inertial_core::Result<RateStudy> {
    rate_study(cfg, obj, traj, &MONITORED_QUANTITIES)
}
