//! Continuous-time limits of the inertial scheme.
//!
//! With `beta = 1 - gamma s` the scheme approaches
//! `x'' + (alpha / t) x' + grad g(x) = 0` ([`OdeVariant::Avd`]); with
//! `beta = 1 - gamma sqrt(s)` it approaches
//! `x'' + (gamma + alpha / t) x' + grad g(x) = 0` ([`OdeVariant::Damped`]),
//! under the time scaling `x_n ~ x(n sqrt(s))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::solver::{run, InertialParams, StopRule};
use crate::vector::{all_finite, dist, norm_sq};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OdeVariant {
    /// `x'' + (alpha / t) x' + grad g(x) = 0`
    Avd,
    /// `x'' + (gamma + alpha / t) x' + grad g(x) = 0`
    Damped,
}

impl OdeVariant {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "avd" => Some(Self::Avd),
            "damped" => Some(Self::Damped),
            _ => None,
        }
    }

    /// `beta(s)` that makes the scheme a discretization of this variant.
    pub fn beta(&self, gamma: f64, s: f64) -> f64 {
        match self {
            Self::Avd => 1.0 - gamma * s,
            Self::Damped => 1.0 - gamma * s.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeSpec {
    pub variant: OdeVariant,
    pub alpha: f64,
    /// Constant damping; ignored by [`OdeVariant::Avd`].
    pub gamma: f64,
    pub t0: f64,
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
}

impl OdeSpec {
    fn validate(&self, obj: &Objective) -> Result<()> {
        if !(self.t0 > 0.0) {
            return Err(Error::Domain {
                what: "t0",
                value: self.t0,
                range: "(0, inf)",
            });
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Domain {
                what: "alpha",
                value: self.alpha,
                range: "(0, inf)",
            });
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::Domain {
                what: "gamma",
                value: self.gamma,
                range: "[0, inf)",
            });
        }
        obj.check_dim(&self.x0)?;
        obj.check_dim(&self.v0)
    }

    fn damping(&self, t: f64) -> f64 {
        match self.variant {
            OdeVariant::Avd => self.alpha / t,
            OdeVariant::Damped => self.gamma + self.alpha / t,
        }
    }
}

/// Samples of an integrated trajectory, one per step (including `t0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdePath {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

impl OdePath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `(x', v')` of the first-order system.
fn derivative(spec: &OdeSpec, obj: &Objective, t: f64, x: &[f64], v: &[f64], grad: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
    obj.gradient_into(x, grad);
    let damping = spec.damping(t);
    let a = v.iter().zip(grad.iter()).map(|(vi, gi)| -damping * vi - gi).collect();
    (v.to_vec(), a)
}

fn shifted(base: &[f64], slope: &[f64], h: f64) -> Vec<f64> {
    base.iter().zip(slope).map(|(b, k)| b + h * k).collect()
}

/// Classical fourth-order Runge-Kutta with fixed step `dt` from `t0` to
/// `t_end`. Step `k` lands at `t0 + k dt`; the last step is the largest `k`
/// with `t0 + k dt <= t_end` (up to rounding).
pub fn integrate(spec: &OdeSpec, obj: &Objective, t_end: f64, dt: f64) -> Result<OdePath> {
    spec.validate(obj)?;
    if !(t_end > spec.t0) {
        return Err(Error::Config(format!("t_end = {t_end} must exceed t0 = {}", spec.t0)));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain {
            what: "dt",
            value: dt,
            range: "(0, inf)",
        });
    }
    let steps = ((t_end - spec.t0) / dt + 1e-9).floor() as usize;
    let mut path = OdePath {
        times: Vec::with_capacity(steps + 1),
        positions: Vec::with_capacity(steps + 1),
        velocities: Vec::with_capacity(steps + 1),
    };
    let mut x = spec.x0.clone();
    let mut v = spec.v0.clone();
    let mut grad = vec![0.0; obj.dim];
    path.times.push(spec.t0);
    path.positions.push(x.clone());
    path.velocities.push(v.clone());
    for k in 0..steps {
        let t = spec.t0 + k as f64 * dt;
        let half = 0.5 * dt;
        let (k1x, k1v) = derivative(spec, obj, t, &x, &v, &mut grad);
        let (k2x, k2v) = derivative(
            spec,
            obj,
            t + half,
            &shifted(&x, &k1x, half),
            &shifted(&v, &k1v, half),
            &mut grad,
        );
        let (k3x, k3v) = derivative(
            spec,
            obj,
            t + half,
            &shifted(&x, &k2x, half),
            &shifted(&v, &k2v, half),
            &mut grad,
        );
        let (k4x, k4v) = derivative(
            spec,
            obj,
            t + dt,
            &shifted(&x, &k3x, dt),
            &shifted(&v, &k3v, dt),
            &mut grad,
        );
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        if !all_finite(&x) || !all_finite(&v) {
            return Err(Error::Divergence { n: k + 1, iterate: x });
        }
        path.times.push(spec.t0 + (k + 1) as f64 * dt);
        path.positions.push(x.clone());
        path.velocities.push(v.clone());
    }
    Ok(path)
}

/// `g(x) + |v|^2 / 2` along a path.
pub fn mechanical_energy(obj: &Objective, path: &OdePath) -> Vec<f64> {
    path.positions
        .iter()
        .zip(&path.velocities)
        .map(|(x, v)| obj.value(x) + 0.5 * norm_sq(v))
        .collect()
}

/// Observed order `log2(e(dt) / e(dt/2))` of the end-point error, measured
/// against a `dt/16` self-reference.
pub fn convergence_order(spec: &OdeSpec, obj: &Objective, t_end: f64, dt: f64) -> Result<f64> {
    let end = |h: f64| -> Result<Vec<f64>> {
        let p = integrate(spec, obj, t_end, h)?;
        Ok(p.positions.last().cloned().expect("nonempty path"))
    };
    let reference = end(dt / 16.0)?;
    let coarse = dist(&end(dt)?, &reference);
    let fine = dist(&end(dt / 2.0)?, &reference);
    Ok((coarse / fine).log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub s: f64,
    pub beta: f64,
    pub n_compared: usize,
    pub sup_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub x0: Vec<f64>,
    /// Matching index; the ODE starts at `t0 = n0 sqrt(s)`.
    pub n0: usize,
    /// ODE substeps per discrete step (`dt = sqrt(s) / substeps`).
    pub substeps: usize,
    /// Comparison horizon in ODE time.
    pub t_end: f64,
}

impl CompareOptions {
    pub fn new(x0: Vec<f64>) -> Self {
        Self {
            x0,
            n0: 5,
            substeps: 8,
            t_end: 5.0,
        }
    }
}

/// For each step size, runs the scheme with `beta = variant.beta(gamma, s)`,
/// starts the ODE from `x(t0) = x_{n0}`, `x'(t0) = (x_{n0} - x_{n0-1}) / sqrt(s)`
/// at `t0 = n0 sqrt(s)`, and reports `max_n |x_n - x(n sqrt(s))|` over the
/// horizon.
pub fn compare_discrete_continuous(
    obj: &Objective,
    gamma: f64,
    alpha: f64,
    s_list: &[f64],
    variant: OdeVariant,
    opts: &CompareOptions,
) -> Result<Vec<ComparisonRow>> {
    if !(gamma > 0.0) {
        return Err(Error::Domain {
            what: "gamma",
            value: gamma,
            range: "(0, inf)",
        });
    }
    if opts.n0 == 0 || opts.substeps < 8 {
        return Err(Error::Config("n0 must be >= 1 and substeps >= 8".into()));
    }
    obj.check_dim(&opts.x0)?;
    let mut rows = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let beta = variant.beta(gamma, s);
        let params = InertialParams::new(alpha, beta, s)
            .map_err(|e| Error::Config(format!("s = {s} gives beta = {beta}: {e}")))?;
        params.check_admissible(obj.lipschitz)?;
        let root = s.sqrt();
        let n_end = (opts.t_end / root + 1e-9).floor() as usize;
        if n_end <= opts.n0 {
            return Err(Error::Config(format!(
                "horizon t_end = {} is shorter than the matching time n0 sqrt(s)",
                opts.t_end
            )));
        }
        let stop = StopRule {
            grad_tol: f64::NEG_INFINITY,
            max_iter: n_end,
            diverge_norm: 1e12,
        };
        let traj = run(obj, &params, &opts.x0, &stop)?;
        if traj.records.len() != n_end + 1 {
            return Err(Error::Divergence {
                n: traj.last().n,
                iterate: traj.last().x.clone(),
            });
        }
        let x_match = &traj.records[opts.n0].x;
        let x_before = &traj.records[opts.n0 - 1].x;
        let spec = OdeSpec {
            variant,
            alpha,
            gamma: if variant == OdeVariant::Avd { 0.0 } else { gamma },
            t0: opts.n0 as f64 * root,
            x0: x_match.clone(),
            v0: x_match.iter().zip(x_before).map(|(a, b)| (a - b) / root).collect(),
        };
        let dt = root / opts.substeps as f64;
        let path = integrate(&spec, obj, n_end as f64 * root, dt)?;
        let mut sup = 0.0f64;
        for n in opts.n0..=n_end {
            let k = (n - opts.n0) * opts.substeps;
            let Some(x_ode) = path.positions.get(k) else {
                break;
            };
            sup = sup.max(dist(&traj.records[n].x, x_ode));
        }
        rows.push(ComparisonRow {
            s,
            beta,
            n_compared: n_end - opts.n0 + 1,
            sup_distance: sup,
        });
    }
    Ok(rows)
}
