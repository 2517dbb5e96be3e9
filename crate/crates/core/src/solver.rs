//! The inertial scheme and its two classical ancestors.
//!
//! [`run`] drives
//!
//! ```text
//! y_n     = x_n + beta * n / (n + alpha) * (x_n - x_{n-1})
//! x_{n+1} = y_n - s * grad g(y_n)
//! ```
//!
//! from `x_0 = y_0` with the convention `x_{-1} = x_0`, recording every
//! iterate. The heavy-ball and Nesterov steps are provided as baselines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::vector::{all_finite, dist, extrapolate, norm, step_along};

/// The triple `(alpha, beta, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InertialParams {
    pub alpha: f64,
    pub beta: f64,
    pub step: f64,
}

impl InertialParams {
    /// Checks `alpha > 0`, `beta in (0, 1)` and `s > 0`. Admissibility with
    /// respect to an objective is checked separately.
    pub fn new(alpha: f64, beta: f64, step: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain {
                what: "alpha",
                value: alpha,
                range: "(0, inf)",
            });
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Domain {
                what: "beta",
                value: beta,
                range: "(0, 1)",
            });
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain {
                what: "step",
                value: step,
                range: "(0, inf)",
            });
        }
        Ok(Self { alpha, beta, step })
    }

    /// Picks `s = fraction * 2 (1 - beta) / L_g`.
    pub fn with_step_fraction(alpha: f64, beta: f64, fraction: f64, lipschitz: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::Domain {
                what: "step fraction",
                value: fraction,
                range: "(0, 1)",
            });
        }
        // validate beta before it enters the bound
        Self::new(alpha, beta, 1.0)?;
        let bound = admissibility_bound(beta, lipschitz);
        if !bound.is_finite() {
            return Err(Error::Config(
                "step fraction needs L_g > 0 (the bound is infinite)".into(),
            ));
        }
        Self::new(alpha, beta, fraction * bound)
    }

    /// `beta * n / (n + alpha)`; zero at `n = 0`.
    pub fn inertia(&self, n: usize) -> f64 {
        let n = n as f64;
        self.beta * n / (n + self.alpha)
    }

    /// Strict check of `s < 2 (1 - beta) / L_g`.
    pub fn check_admissible(&self, lipschitz: f64) -> Result<()> {
        let bound = admissibility_bound(self.beta, lipschitz);
        if self.step < bound {
            Ok(())
        } else {
            Err(Error::Inadmissible {
                step: self.step,
                beta: self.beta,
                lipschitz,
                bound,
            })
        }
    }
}

/// `2 (1 - beta) / L_g`, infinite when `L_g = 0`.
pub fn admissibility_bound(beta: f64, lipschitz: f64) -> f64 {
    if lipschitz <= 0.0 {
        f64::INFINITY
    } else {
        2.0 * (1.0 - beta) / lipschitz
    }
}

/// One recorded iterate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub g_x: f64,
    pub g_y: f64,
    pub grad_norm_y: f64,
    /// `|x_n - x_{n-1}|`, zero at `n = 0`.
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    DivergenceGuard,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::GradientTolerance => "gradient-tolerance",
            Termination::MaxIterations => "max-iterations",
            Termination::DivergenceGuard => "divergence-guard",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub diverge_norm: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iter: 100_000,
            diverge_norm: 1e12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<IterateRecord>,
    pub termination: Termination,
    pub params: InertialParams,
    pub objective_id: String,
    /// `x_{n+1}` produced by the terminating step.
    pub x_final: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &IterateRecord {
        self.records.last().expect("a trajectory has at least one record")
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::GradientTolerance
    }

    /// `sum_{n >= 1} |x_n - x_{n-1}|^2`.
    pub fn gap_sum_sq(&self) -> f64 {
        self.records.iter().map(|r| r.gap * r.gap).sum()
    }

    /// Share of `sum gap^2` contributed by the last half of the records.
    /// Zero for a stationary run.
    pub fn gap_tail_fraction(&self) -> f64 {
        let total = self.gap_sum_sq();
        if total == 0.0 {
            return 0.0;
        }
        let half = self.records.len() / 2;
        let tail: f64 = self.records[half..].iter().map(|r| r.gap * r.gap).sum();
        tail / total
    }
}

/// `(x_{n+1}, y_n, grad g(y_n))` for an extrapolation coefficient `coef`.
fn extrapolated_step(
    x_n: &[f64],
    x_prev: &[f64],
    coef: f64,
    step: f64,
    n: usize,
    obj: &Objective,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    obj.check_dim(x_n)?;
    obj.check_dim(x_prev)?;
    let y = extrapolate(x_n, x_prev, coef);
    let grad = obj.gradient(&y);
    if !all_finite(&grad) || !all_finite(&y) {
        return Err(Error::Divergence { n, iterate: y });
    }
    Ok((step_along(&y, &grad, step), y, grad))
}

/// One step of the inertial scheme. Returns `(x_{n+1}, y_n)`.
pub fn step_inertial(
    x_n: &[f64],
    x_prev: &[f64],
    n: usize,
    params: &InertialParams,
    obj: &Objective,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (next, y, _) = extrapolated_step(x_n, x_prev, params.inertia(n), params.step, n, obj)?;
    Ok((next, y))
}

/// Heavy-ball parameters: momentum `kappa_n in [0, 1)` and step `lambda_n > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeavyBallParams {
    pub momentum: f64,
    pub step: f64,
}

/// Polyak's heavy ball: extrapolate, but take the gradient at `x_n`.
pub fn step_heavy_ball(x_n: &[f64], x_prev: &[f64], params: &HeavyBallParams, obj: &Objective) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&params.momentum) || !(params.step > 0.0) {
        return Err(Error::Config(format!(
            "heavy ball needs momentum in [0, 1) and step > 0, got {params:?}"
        )));
    }
    obj.check_dim(x_n)?;
    obj.check_dim(x_prev)?;
    let grad = obj.gradient(x_n);
    if !all_finite(&grad) {
        return Err(Error::Divergence {
            n: 0,
            iterate: x_n.to_vec(),
        });
    }
    let y = extrapolate(x_n, x_prev, params.momentum);
    Ok(step_along(&y, &grad, params.step))
}

/// `t_{n+1} = (sqrt(4 t_n^2 + 1) + 1) / 2`.
pub fn nesterov_t_next(t: f64) -> f64 {
    ((4.0 * t * t + 1.0).sqrt() + 1.0) / 2.0
}

/// Chambolle-Dossal sequence `t_n = (n + a - 1) / a`, `a >= 2`.
pub fn chambolle_dossal_t(n: usize, a: f64) -> f64 {
    (n as f64 + a - 1.0) / a
}

/// Nesterov's step with coefficient `(t_n - 1) / t_{n+1}`. Returns
/// `(x_{n+1}, t_{n+1})`. The caller is responsible for `s <= 1 / L_g`.
pub fn step_nesterov(x_n: &[f64], x_prev: &[f64], t_n: f64, obj: &Objective, step: f64) -> Result<(Vec<f64>, f64)> {
    if !(t_n >= 1.0) {
        return Err(Error::Domain {
            what: "t_n",
            value: t_n,
            range: "[1, inf)",
        });
    }
    let t_next = nesterov_t_next(t_n);
    let (next, _, _) = extrapolated_step(x_n, x_prev, (t_n - 1.0) / t_next, step, 0, obj)?;
    Ok((next, t_next))
}

/// Runs the inertial scheme from `x_0 = y_0 = x0`.
///
/// Stops when `|grad g(y_n)| <= grad_tol`, when `n = max_iter`, or when
/// `|x_n| > diverge_norm` (or a non-finite value appears). The terminating
/// iterate is recorded.
pub fn run(obj: &Objective, params: &InertialParams, x0: &[f64], stop: &StopRule) -> Result<Trajectory> {
    params.check_admissible(obj.lipschitz)?;
    run_unchecked(obj, params, x0, stop)
}

/// [`run`] without the admissibility check. Used to observe what the
/// monitors report when the step-size condition is violated.
pub fn run_unchecked(obj: &Objective, params: &InertialParams, x0: &[f64], stop: &StopRule) -> Result<Trajectory> {
    obj.check_dim(x0)?;
    if !all_finite(x0) {
        return Err(Error::Config("x0 must be finite".into()));
    }
    let mut records = Vec::new();
    let mut x_prev = x0.to_vec();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; obj.dim];
    let termination = loop {
        let n = records.len();
        let y = extrapolate(&x, &x_prev, params.inertia(n));
        obj.gradient_into(&y, &mut grad);
        let grad_norm_y = norm(&grad);
        let gap = dist(&x, &x_prev);
        let next = step_along(&y, &grad, params.step);
        records.push(IterateRecord {
            n,
            g_x: obj.value(&x),
            g_y: obj.value(&y),
            grad_norm_y,
            gap,
            x: std::mem::replace(&mut x, next),
            y,
        });
        let rec = records.last().expect("just pushed");
        if !grad_norm_y.is_finite() || !all_finite(&rec.y) || norm(&rec.x) > stop.diverge_norm {
            break Termination::DivergenceGuard;
        }
        if grad_norm_y <= stop.grad_tol {
            break Termination::GradientTolerance;
        }
        if n >= stop.max_iter {
            break Termination::MaxIterations;
        }
        x_prev.clone_from(&rec.x);
    };
    Ok(Trajectory {
        records,
        termination,
        params: *params,
        objective_id: obj.id.clone(),
        x_final: x,
    })
}
