//! Energy descent and gradient bounds along a recorded trajectory.
//!
//! With `c = (2 - s L_g) / (2s)` and `k_n = beta n / (n + alpha)`, the
//! coefficient sequences are
//!
//! ```text
//! A_{n-1} = c ((1+beta) n + alpha)^2 / (n+alpha)^2 - beta n ((1+beta) n + alpha) / (s (n+alpha)^2)
//! C_{n-1} = c (beta n - beta)/(n+alpha-1) ((1+beta) n + alpha)/(n+alpha)
//!           - 1/(2s) (beta n - beta)/(n+alpha-1) beta n/(n+alpha)
//! B_n     = c k_n^2
//! delta_n = A_{n-1} - C_{n-1}
//! Delta_n = B_n + A_{n-1} - C_{n-1} - C_n
//! ```
//!
//! and for `n >= N` the energy `E_n = g(y_n) + delta_n |x_n - x_{n-1}|^2`
//! decreases:
//!
//! ```text
//! C_n |x_{n+1} + x_{n-1} - 2 x_n|^2 + Delta_n |x_n - x_{n-1}|^2 <= E_n - E_{n+1}.
//! ```
//!
//! `E_n` equals `H(y_n, u_n)` for `H(x, y) = g(x) + |y - x|^2 / 2` and
//! `u_n = sqrt(2 delta_n) (x_n - x_{n-1}) + y_n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::solver::{InertialParams, Trajectory};
use crate::vector::{dist, norm, norm_sq};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub n: usize,
    pub a_prev: f64,
    pub b: f64,
    pub c_prev: f64,
    pub c: f64,
    pub delta: f64,
    pub big_delta: f64,
}

/// `A_{n-1}` as a function of `n`.
fn a_prev_at(n: f64, p: &InertialParams, lipschitz: f64) -> f64 {
    let (alpha, beta, s) = (p.alpha, p.beta, p.step);
    let c = (2.0 - s * lipschitz) / (2.0 * s);
    let lead = (1.0 + beta) * n + alpha;
    let denom = n + alpha;
    c * (lead / denom).powi(2) - beta * n * lead / (s * denom * denom)
}

/// `C_{n-1}` as a function of `n`.
fn c_prev_at(n: f64, p: &InertialParams, lipschitz: f64) -> f64 {
    let (alpha, beta, s) = (p.alpha, p.beta, p.step);
    let c = (2.0 - s * lipschitz) / (2.0 * s);
    let shifted = (beta * n - beta) / (n + alpha - 1.0);
    let lead = ((1.0 + beta) * n + alpha) / (n + alpha);
    let k = beta * n / (n + alpha);
    c * shifted * lead - shifted * k / (2.0 * s)
}

/// All coefficients at index `n >= 1`.
pub fn coefficients(n: usize, params: &InertialParams, lipschitz: f64) -> CoefficientSet {
    assert!(n >= 1, "coefficients are defined for n >= 1");
    let nf = n as f64;
    let a_prev = a_prev_at(nf, params, lipschitz);
    let c_prev = c_prev_at(nf, params, lipschitz);
    let c = c_prev_at(nf + 1.0, params, lipschitz);
    let k = params.inertia(n);
    let b = (2.0 - params.step * lipschitz) / (2.0 * params.step) * k * k;
    CoefficientSet {
        n,
        a_prev,
        b,
        c_prev,
        c,
        delta: a_prev - c_prev,
        big_delta: b + a_prev - c_prev - c,
    }
}

/// Closed-form limits as `n -> inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientLimits {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
    pub big_delta: f64,
}

pub fn limits(params: &InertialParams, lipschitz: f64) -> CoefficientLimits {
    let (beta, s, l) = (params.beta, params.step, lipschitz);
    let two_s = 2.0 * s;
    CoefficientLimits {
        a: ((2.0 - s * l) * (beta + 1.0).powi(2) - 2.0 * beta - 2.0 * beta * beta) / two_s,
        b: (2.0 - s * l) * beta * beta / two_s,
        c: ((2.0 - s * l) * (beta * beta + beta) - beta * beta) / two_s,
        delta: (2.0 - beta * beta - s * l * (beta + 1.0)) / two_s,
        big_delta: (2.0 - s * l - 2.0 * beta) / two_s,
    }
}

/// Smallest `N <= n_max` such that `delta_n`, `Delta_n` and `C_n` are all
/// positive for every `n` in `[N, n_max]`.
pub fn critical_index(params: &InertialParams, lipschitz: f64, n_max: usize) -> Result<usize> {
    let mut last_violation = None;
    for n in 1..=n_max {
        let cs = coefficients(n, params, lipschitz);
        if !(cs.delta > 0.0 && cs.big_delta > 0.0 && cs.c > 0.0) {
            last_violation = Some(n);
        }
    }
    match last_violation {
        None => Ok(1),
        Some(n) if n >= n_max => Err(Error::CriticalIndexNotFound {
            n_max,
            last_violation: n,
        }),
        Some(n) => Ok(n + 1),
    }
}

/// Knobs shared by the monitors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorOptions {
    /// Scan bound for [`critical_index`].
    pub n_max: usize,
    /// Energy monotonicity tolerance, relative to `1 + |E_N|`.
    pub mono_rel_tol: f64,
    /// Relative slack on the `grad H` bounds.
    pub bound_rel_slack: f64,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        Self {
            n_max: 1_000_000,
            mono_rel_tol: 1e-12,
            bound_rel_slack: 1e-10,
        }
    }
}

/// One failed inequality `lhs <= rhs + slack`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub n: usize,
    pub delta: f64,
    /// `g(y_n) + delta_n |x_n - x_{n-1}|^2`
    pub energy: f64,
    pub u: Vec<f64>,
    /// `H(y_n, u_n)`, evaluated from `u_n` directly.
    pub h_value: f64,
    /// Euclidean norm of `grad H(y_n, u_n)`.
    pub grad_h_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Critical index `N`; records start there.
    pub n_start: usize,
    pub tolerance: f64,
    pub records: Vec<EnergyRecord>,
    /// `E_{n+1} > E_n + tol` (lhs = `E_{n+1}`, rhs = `E_n`).
    pub violations: Vec<Violation>,
    /// Failures of the sufficient-decrease inequality
    /// (lhs = `C_n |second difference|^2 + Delta_n gap_n^2`, rhs = `E_n - E_{n+1}`).
    pub decrease_violations: Vec<Violation>,
    /// `min (E_n - E_{n+1}) / gap_n^2` over `n >= N` with a nonzero gap.
    pub empirical_d: Option<f64>,
    /// `|E_last - E_{last-1}|`.
    pub last_energy_change: f64,
    /// `|u_n - y_n|` at the last record.
    pub final_diagonal_distance: f64,
}

impl EnergyReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty() && self.decrease_violations.is_empty()
    }
}

/// `E_n`, `delta_n` and `Delta_n` for every record with `n >= 1`; `None` at
/// `n = 0` where `delta_0` is undefined.
pub fn energy_series(traj: &Trajectory, lipschitz: f64) -> Vec<Option<(f64, f64, f64)>> {
    traj.records
        .iter()
        .map(|r| {
            (r.n >= 1).then(|| {
                let cs = coefficients(r.n, &traj.params, lipschitz);
                (r.g_y + cs.delta * r.gap * r.gap, cs.delta, cs.big_delta)
            })
        })
        .collect()
}

fn energy_record(traj: &Trajectory, obj: &Objective, n: usize) -> EnergyRecord {
    let rec = &traj.records[n];
    let prev = &traj.records[n - 1];
    let delta = coefficients(n, &traj.params, obj.lipschitz).delta;
    let root = (2.0 * delta).sqrt();
    let u: Vec<f64> = rec
        .x
        .iter()
        .zip(&prev.x)
        .zip(&rec.y)
        .map(|((x, xp), y)| root * (x - xp) + y)
        .collect();
    let grad = obj.gradient(&rec.y);
    let first: Vec<f64> = grad.iter().zip(&rec.y).zip(&u).map(|((g, y), u)| g + y - u).collect();
    let diff_sq = rec.y.iter().zip(&u).map(|(y, u)| (u - y) * (u - y)).sum::<f64>();
    EnergyRecord {
        n,
        delta,
        energy: rec.g_y + delta * rec.gap * rec.gap,
        h_value: obj.value(&rec.y) + 0.5 * diff_sq,
        grad_h_norm: (norm_sq(&first) + diff_sq).sqrt(),
        u,
    }
}

/// Energy records from the critical index on, with the descent checks.
pub fn instrument(traj: &Trajectory, obj: &Objective, opts: &MonitorOptions) -> Result<EnergyReport> {
    let n_start = critical_index(&traj.params, obj.lipschitz, opts.n_max)?;
    instrument_from(traj, obj, n_start, opts.mono_rel_tol)
}

/// [`instrument`] from a caller-chosen start index. Records with negative
/// `delta_n` get a NaN `u`.
pub fn instrument_from(traj: &Trajectory, obj: &Objective, n_start: usize, mono_rel_tol: f64) -> Result<EnergyReport> {
    let n_start = n_start.max(1);
    let len = traj.records.len();
    if len < n_start + 2 {
        return Err(Error::InsufficientData(format!(
            "trajectory has {len} records, need at least N + 2 = {}",
            n_start + 2
        )));
    }
    let records: Vec<EnergyRecord> = (n_start..len).map(|n| energy_record(traj, obj, n)).collect();
    let tolerance = mono_rel_tol * (1.0 + records[0].energy.abs());
    let mut violations = Vec::new();
    let mut decrease_violations = Vec::new();
    let mut empirical_d: Option<f64> = None;
    for pair in records.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        let n = cur.n;
        if next.energy > cur.energy + tolerance {
            violations.push(Violation {
                n,
                lhs: next.energy,
                rhs: cur.energy,
                slack: tolerance,
            });
        }
        let drop = cur.energy - next.energy;
        let gap = traj.records[n].gap;
        let cs = coefficients(n, &traj.params, obj.lipschitz);
        let second: f64 = traj.records[n + 1]
            .x
            .iter()
            .zip(&traj.records[n - 1].x)
            .zip(&traj.records[n].x)
            .map(|((a, b), c)| (a + b - 2.0 * c).powi(2))
            .sum();
        let lhs = cs.c * second + cs.big_delta * gap * gap;
        if lhs > drop + tolerance {
            decrease_violations.push(Violation {
                n,
                lhs,
                rhs: drop,
                slack: tolerance,
            });
        }
        if gap > 0.0 {
            let d = drop / (gap * gap);
            empirical_d = Some(empirical_d.map_or(d, |m| m.min(d)));
        }
    }
    let last = records.last().expect("at least two records");
    let before = &records[records.len() - 2];
    let final_diagonal_distance = {
        let rec = &traj.records[last.n];
        dist(&last.u, &rec.y)
    };
    Ok(EnergyReport {
        n_start,
        tolerance,
        last_energy_change: (last.energy - before.energy).abs(),
        final_diagonal_distance,
        violations,
        decrease_violations,
        empirical_d,
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradHReport {
    pub n_start: usize,
    pub checked: usize,
    /// Largest `|grad H| / rhs` for the first-order bound.
    pub worst_ratio_iv: f64,
    pub worst_n_iv: usize,
    /// Largest `|grad H|^2 / rhs` for the squared bound.
    pub worst_ratio_v: f64,
    pub worst_n_v: usize,
    pub violations_iv: Vec<Violation>,
    pub violations_v: Vec<Violation>,
}

impl GradHReport {
    pub fn pass(&self) -> bool {
        self.violations_iv.is_empty() && self.violations_v.is_empty()
    }

    pub fn worst_ratio(&self) -> f64 {
        self.worst_ratio_iv.max(self.worst_ratio_v)
    }
}

/// Both `grad H` bounds from the critical index on.
pub fn check_grad_h_bounds(traj: &Trajectory, obj: &Objective, opts: &MonitorOptions) -> Result<GradHReport> {
    let n_start = critical_index(&traj.params, obj.lipschitz, opts.n_max)?;
    check_grad_h_bounds_from(traj, obj, n_start, opts.bound_rel_slack)
}

/// `0/0` counts as equality.
fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Checks, for every `n >= n_start` that has a successor,
///
/// ```text
/// |grad H(y_n,u_n)|   <= |x_{n+1}-x_n| / s + (k_n / s + 2 sqrt(2 delta_n)) |x_n-x_{n-1}|
/// |grad H(y_n,u_n)|^2 <= 2/s^2 |x_{n+1}-x_n|^2 + 2 ((k_n/s - sqrt(2 delta_n))^2 + delta_n) |x_n-x_{n-1}|^2
/// ```
///
/// with `k_n = beta n / (n + alpha)`.
pub fn check_grad_h_bounds_from(
    traj: &Trajectory,
    obj: &Objective,
    n_start: usize,
    rel_slack: f64,
) -> Result<GradHReport> {
    let n_start = n_start.max(1);
    let len = traj.records.len();
    if len < n_start + 2 {
        return Err(Error::InsufficientData(format!(
            "trajectory has {len} records, need at least {}",
            n_start + 2
        )));
    }
    let p = &traj.params;
    let s = p.step;
    let mut report = GradHReport {
        n_start,
        checked: 0,
        worst_ratio_iv: 0.0,
        worst_n_iv: n_start,
        worst_ratio_v: 0.0,
        worst_n_v: n_start,
        violations_iv: Vec::new(),
        violations_v: Vec::new(),
    };
    for n in n_start..len - 1 {
        let er = energy_record(traj, obj, n);
        if er.delta < 0.0 {
            return Err(Error::Range { n, delta: er.delta });
        }
        let gap = traj.records[n].gap;
        let next_gap = traj.records[n + 1].gap;
        let k = p.inertia(n) / s;
        let root = (2.0 * er.delta).sqrt();

        let lhs = er.grad_h_norm;
        let rhs = next_gap / s + (k + 2.0 * root) * gap;
        let r = ratio(lhs, rhs);
        if r > report.worst_ratio_iv {
            report.worst_ratio_iv = r;
            report.worst_n_iv = n;
        }
        if lhs > rhs * (1.0 + rel_slack) {
            report.violations_iv.push(Violation {
                n,
                lhs,
                rhs,
                slack: rhs * rel_slack,
            });
        }

        let lhs = er.grad_h_norm * er.grad_h_norm;
        let rhs = 2.0 / (s * s) * next_gap * next_gap + 2.0 * ((k - root).powi(2) + er.delta) * gap * gap;
        let r = ratio(lhs, rhs);
        if r > report.worst_ratio_v {
            report.worst_ratio_v = r;
            report.worst_n_v = n;
        }
        if lhs > rhs * (1.0 + rel_slack) {
            report.violations_v.push(Violation {
                n,
                lhs,
                rhs,
                slack: rhs * rel_slack,
            });
        }
        report.checked += 1;
    }
    Ok(report)
}

/// `|u_n - y_n|` and `|grad g(y_n)|` at the last record: how close `(y, u)`
/// is to the diagonal `{(x, x) : grad g(x) = 0}`.
pub fn final_diagonal_gap(traj: &Trajectory, obj: &Objective) -> Option<(f64, f64)> {
    let last = traj.records.last()?;
    if last.n == 0 {
        return Some((0.0, last.grad_norm_y));
    }
    let er = energy_record(traj, obj, last.n);
    let d = norm(&er.u.iter().zip(&last.y).map(|(u, y)| u - y).collect::<Vec<_>>());
    Some((d, last.grad_norm_y))
}
