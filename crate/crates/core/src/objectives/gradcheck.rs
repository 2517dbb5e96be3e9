use crate::error::Result;
use crate::vector::{dist, norm};

use super::Objective;

/// Result of comparing analytic gradients with central differences.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientCheck {
    /// Largest `|grad - fd| / |grad|` over the points (`0` when both vanish).
    pub max_relative_error: f64,
    /// Largest `|grad - fd|` over the points.
    pub max_absolute_error: f64,
    /// Point with the largest relative error.
    pub worst_point: Vec<f64>,
    /// Per-point `(relative, absolute)` errors, in input order.
    pub errors: Vec<(f64, f64)>,
}

impl GradientCheck {
    /// Every point is within `rel_tol` relative or `abs_tol` absolute error.
    pub fn passes(&self, rel_tol: f64, abs_tol: f64) -> bool {
        self.errors.iter().all(|&(rel, abs)| rel <= rel_tol || abs <= abs_tol)
    }
}

/// Central-difference gradient with `h = 1e-6 (1 + |x|)`.
pub fn central_difference(obj: &Objective, x: &[f64]) -> Vec<f64> {
    let h = 1e-6 * (1.0 + norm(x));
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let fp = obj.value(&probe);
            probe[i] = x[i] - h;
            let fm = obj.value(&probe);
            probe[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

pub fn check_gradient(obj: &Objective, points: &[Vec<f64>]) -> Result<GradientCheck> {
    for p in points {
        obj.check_dim(p)?;
    }
    let mut report = GradientCheck {
        max_relative_error: 0.0,
        max_absolute_error: 0.0,
        worst_point: points.first().cloned().unwrap_or_default(),
        errors: Vec::with_capacity(points.len()),
    };
    for p in points {
        let analytic = obj.gradient(p);
        let numeric = central_difference(obj, p);
        let abs = dist(&analytic, &numeric);
        let scale = norm(&analytic);
        let rel = if abs == 0.0 {
            0.0
        } else if scale == 0.0 {
            f64::INFINITY
        } else {
            abs / scale
        };
        if rel > report.max_relative_error {
            report.max_relative_error = rel;
            report.worst_point = p.clone();
        }
        report.max_absolute_error = report.max_absolute_error.max(abs);
        report.errors.push((rel, abs));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzCheck {
    /// Largest observed `|grad(x) - grad(y)| / |x - y|`.
    pub max_ratio: f64,
    /// Pairs where `|grad(x) - grad(y)| > L |x - y| + slack`.
    pub violations: usize,
}

/// Samples `pairs` point pairs from the objective's reference box and checks
/// the Lipschitz bound on the gradient.
pub fn check_lipschitz(obj: &Objective, pairs: usize, seed: u64, slack: f64) -> LipschitzCheck {
    let xs = obj.reference_box.sample(pairs, seed);
    let ys = obj.reference_box.sample(pairs, seed.wrapping_add(0x9e37_79b9));
    let mut out = LipschitzCheck {
        max_ratio: 0.0,
        violations: 0,
    };
    for (x, y) in xs.iter().zip(&ys) {
        let dx = dist(x, y);
        let dg = dist(&obj.gradient(x), &obj.gradient(y));
        if dx > 0.0 {
            out.max_ratio = out.max_ratio.max(dg / dx);
        }
        if dg > obj.lipschitz * dx + slack {
            out.violations += 1;
        }
    }
    out
}
