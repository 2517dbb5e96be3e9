//! Built-in test functions.
//!
//! Non-quadratic members have unbounded Hessians, so their Lipschitz
//! constants are only valid on a stated box. Each constructor documents the
//! box and the bound it uses.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{BoxDomain, Objective, SmoothFunction};
use crate::error::{Error, Result};

/// `g(x) = x^T Q x / 2 - b^T x`.
#[derive(Debug)]
struct Quadratic {
    q: DMatrix<f64>,
    b: DVector<f64>,
}

impl SmoothFunction for Quadratic {
    fn value(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        0.5 * x.dot(&(&self.q * &x)) - self.b.dot(&x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let x = DVector::from_column_slice(x);
        let g = &self.q * x - &self.b;
        out.copy_from_slice(g.as_slice());
    }
}

/// Diagonal quadratic `sum_i d_i x_i^2 / 2`. Cheaper than the dense form.
#[derive(Debug)]
struct DiagonalQuadratic {
    diag: Vec<f64>,
}

impl SmoothFunction for DiagonalQuadratic {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.diag.iter().zip(x).map(|(d, v)| d * v * v).sum::<f64>()
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for ((o, d), v) in out.iter_mut().zip(&self.diag).zip(x) {
            *o = d * v;
        }
    }
}

/// Quadratic `x^T Q x / 2 - b^T x` with symmetric positive-semidefinite `Q`
/// given row-major.
///
/// `L_g` is the largest eigenvalue of `Q`. When `Q` is positive definite the
/// minimizer `Q^{-1} b` is tracked with Lojasiewicz exponent 1/2; when `Q` is
/// singular only `b = 0` yields a known critical point (the origin).
pub fn quadratic(q: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Objective> {
    let dim = b.len();
    if dim == 0 || q.len() != dim || q.iter().any(|row| row.len() != dim) {
        return Err(Error::Config(format!("Q must be {dim}x{dim} to match b")));
    }
    let q = DMatrix::from_fn(dim, dim, |i, j| q[i][j]);
    let scale = q.amax().max(f64::MIN_POSITIVE);
    if (&q - q.transpose()).amax() > 1e-12 * scale {
        return Err(Error::Config("Q is not symmetric".into()));
    }
    let eig = q.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    if lmin < -1e-12 * scale {
        return Err(Error::Config(format!(
            "Q is not positive semidefinite (smallest eigenvalue {lmin})"
        )));
    }
    let b = DVector::from_vec(b);
    let critical = if lmin > 1e-12 * scale {
        q.clone().cholesky().map(|c| c.solve(&b).as_slice().to_vec())
    } else if b.amax() == 0.0 {
        Some(vec![0.0; dim])
    } else {
        None
    };
    let lower_bounded = critical.is_some();
    let mut obj = Objective::new(
        format!("custom-quadratic:dim={dim}"),
        dim,
        lmax.max(0.0),
        Arc::new(Quadratic { q, b }),
    )
    .bounded_below(lower_bounded);
    if let Some(p) = critical {
        obj = obj.with_critical_point(p, Some(0.5));
    }
    Ok(obj)
}

/// `g(x) = sum_i lambda_i x_i^2 / 2` with eigenvalues spaced geometrically
/// from 1 down to `1 / cond`, so `L_g = 1` (global) and the minimizer is 0.
pub fn ill_conditioned_quadratic(dim: usize, cond: f64) -> Result<Objective> {
    if dim == 0 {
        return Err(Error::Config("quadratic dim must be positive".into()));
    }
    if !(cond >= 1.0 && cond.is_finite()) {
        return Err(Error::Config(format!(
            "quadratic cond must be a finite number >= 1, got {cond}"
        )));
    }
    let diag: Vec<f64> = (0..dim)
        .map(|i| {
            if dim == 1 {
                1.0
            } else {
                cond.powf(-(i as f64) / (dim - 1) as f64)
            }
        })
        .collect();
    let id = if dim == 1 && cond == 1.0 {
        "quadratic".to_string()
    } else {
        format!("quadratic:dim={dim}:cond={cond}")
    };
    Ok(Objective::new(id, dim, 1.0, Arc::new(DiagonalQuadratic { diag }))
        .with_critical_point(vec![0.0; dim], Some(0.5))
        .bounded_below(true)
        .with_default_start(vec![1.0; dim]))
}

/// `g(x) = |x|^q` for even `q`.
#[derive(Debug)]
struct Power {
    q: i32,
}

impl SmoothFunction for Power {
    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        r2.powi(self.q / 2)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let factor = self.q as f64 * r2.powi(self.q / 2 - 1);
        for (o, v) in out.iter_mut().zip(x) {
            *o = factor * v;
        }
    }
}

/// Power family `g(x) = |x|^q`, `q >= 2` even, on the box `[-1, 1]^dim`.
///
/// The Hessian eigenvalues are `q (q-1) r^(q-2)` (radial) and `q r^(q-2)`, so
/// `L_g = q (q-1) dim^((q-2)/2)` on the box. Lojasiewicz exponent at 0 is
/// `1 - 1/q`.
pub fn power(q: u32, dim: usize) -> Result<Objective> {
    if q < 2 || !q.is_multiple_of(2) {
        return Err(Error::Config(format!("power q must be an even integer >= 2, got {q}")));
    }
    if dim == 0 {
        return Err(Error::Config("power dim must be positive".into()));
    }
    let qf = q as f64;
    let lipschitz = qf * (qf - 1.0) * (dim as f64).powf((qf - 2.0) / 2.0);
    let id = if dim == 1 {
        format!("power:q={q}")
    } else {
        format!("power:q={q}:dim={dim}")
    };
    Ok(Objective::new(id, dim, lipschitz, Arc::new(Power { q: q as i32 }))
        .with_lipschitz_box(BoxDomain::cube(dim, 1.0))
        .with_critical_point(vec![0.0; dim], Some(1.0 - 1.0 / qf))
        .bounded_below(true)
        .with_default_start(vec![0.5 / (dim as f64).sqrt(); dim]))
}

#[derive(Debug)]
struct Rosenbrock;

impl SmoothFunction for Rosenbrock {
    fn value(&self, x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let (a, b) = (x[0], x[1]);
        let r = b - a * a;
        out[0] = -2.0 * (1.0 - a) - 400.0 * a * r;
        out[1] = 200.0 * r;
    }
}

/// 2D Rosenbrock `(1-x)^2 + 100 (y-x^2)^2` on `[-1.5, 1.5] x [-0.5, 2.5]`.
///
/// The Hessian `[[1200x^2 - 400y + 2, -400x], [-400x, 200]]` has its largest
/// eigenvalue at the corner `|x| = 1.5, y = -0.5`, about 3029.3; the most
/// negative eigenvalue on the box is -998. `L_g = 3030`.
pub fn rosenbrock() -> Objective {
    Objective::new("rosenbrock", 2, 3030.0, Arc::new(Rosenbrock))
        .with_lipschitz_box(BoxDomain {
            lower: vec![-1.5, -0.5],
            upper: vec![1.5, 2.5],
        })
        .with_critical_point(vec![1.0, 1.0], Some(0.5))
        .bounded_below(true)
        .with_default_start(vec![-1.2, 1.0])
}

#[derive(Debug)]
struct DoubleWell;

impl SmoothFunction for DoubleWell {
    fn value(&self, x: &[f64]) -> f64 {
        (x[0] * x[0] - 1.0).powi(2)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
    }
}

/// `g(x) = (x^2 - 1)^2` on `[-1.5, 1.5]`: minima at +-1, local maximum at 0.
///
/// `g'' = 12x^2 - 4`, so `L_g = 23` on the box. The tracked critical point is
/// the minimizer 1 (exponent 1/2).
pub fn double_well() -> Objective {
    Objective::new("doublewell", 1, 23.0, Arc::new(DoubleWell))
        .with_lipschitz_box(BoxDomain::cube(1, 1.5))
        .with_critical_point(vec![1.0], Some(0.5))
        .with_other_critical_point(vec![0.0])
        .with_other_critical_point(vec![-1.0])
        .bounded_below(true)
        .with_default_start(vec![0.5])
}

#[derive(Debug)]
struct Quartic2d;

impl SmoothFunction for Quartic2d {
    fn value(&self, x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        a.powi(4) + b.powi(4) - 4.0 * a * b + 1.0
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let (a, b) = (x[0], x[1]);
        out[0] = 4.0 * a.powi(3) - 4.0 * b;
        out[1] = 4.0 * b.powi(3) - 4.0 * a;
    }
}

/// Coercive nonconvex quartic `x^4 + y^4 - 4xy + 1` on `[-2, 2]^2`.
///
/// Critical points: saddle at the origin, minima at `(1, 1)` and `(-1, -1)`
/// with value -1. Hessian `[[12x^2, -4], [-4, 12y^2]]`, largest eigenvalue 52
/// on the box.
pub fn quartic_2d() -> Objective {
    Objective::new("quartic2d", 2, 52.0, Arc::new(Quartic2d))
        .with_lipschitz_box(BoxDomain::cube(2, 2.0))
        .with_critical_point(vec![1.0, 1.0], Some(0.5))
        .with_other_critical_point(vec![0.0, 0.0])
        .with_other_critical_point(vec![-1.0, -1.0])
        .bounded_below(true)
        .with_default_start(vec![0.8, 1.4])
}

#[derive(Debug)]
struct Constant;

impl SmoothFunction for Constant {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn gradient_into(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// `g = 0`. Every point is critical; `L_g = 0`.
pub fn constant(dim: usize) -> Result<Objective> {
    if dim == 0 {
        return Err(Error::Config("constant dim must be positive".into()));
    }
    let id = if dim == 1 {
        "constant".to_string()
    } else {
        format!("constant:dim={dim}")
    };
    Ok(Objective::new(id, dim, 0.0, Arc::new(Constant)).bounded_below(true))
}

/// The standard corpus: two quadratics, the power family for `q` in
/// {4, 6, 8}, Rosenbrock, the double well and the 2D quartic.
pub fn builtin_corpus() -> Vec<Objective> {
    let mut out = vec![
        ill_conditioned_quadratic(1, 1.0).expect("valid"),
        ill_conditioned_quadratic(10, 100.0).expect("valid"),
    ];
    out.extend([4, 6, 8].map(|q| power(q, 1).expect("valid")));
    out.extend([rosenbrock(), double_well(), quartic_2d()]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_quadratic_constants() {
        let obj = quadratic(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        assert!((obj.lipschitz - 1.0).abs() < 1e-12);
        assert_eq!(obj.known_loj_exponent, Some(0.5));
        assert_eq!(obj.known_critical_point, Some(vec![0.0, 0.0]));
    }

    #[test]
    fn dense_quadratic_minimizer() {
        let obj = quadratic(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![1.0, 2.0]).unwrap();
        // Q^{-1} b = (1/5) * [[3, -1], [-1, 2]] * (1, 2) = (0.2, 0.6)
        let p = obj.known_critical_point.clone().unwrap();
        assert!((p[0] - 0.2).abs() < 1e-12 && (p[1] - 0.6).abs() < 1e-12);
        assert!(crate::vector::norm(&obj.gradient(&p)) < 1e-12);
        // eigenvalues (5 +- sqrt 5) / 2
        assert!((obj.lipschitz - (5.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_quadratics() {
        assert!(quadratic(vec![vec![1.0, 2.0], vec![0.0, 1.0]], vec![0.0; 2]).is_err());
        assert!(quadratic(vec![vec![-1.0]], vec![0.0]).is_err());
        assert!(quadratic(vec![vec![1.0]], vec![0.0; 2]).is_err());
    }

    #[test]
    fn singular_quadratic() {
        let obj = quadratic(vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0, 0.0]).unwrap();
        assert!(obj.lower_bounded);
        assert_eq!(obj.known_critical_point, Some(vec![0.0, 0.0]));
        let obj = quadratic(vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0, 1.0]).unwrap();
        assert!(obj.known_critical_point.is_none());
    }

    #[test]
    fn power_exponents() {
        assert_eq!(power(4, 1).unwrap().known_loj_exponent, Some(0.75));
        assert_eq!(power(2, 1).unwrap().known_loj_exponent, Some(0.5));
        assert_eq!(power(4, 1).unwrap().lipschitz, 12.0);
        assert!(power(3, 1).is_err());
        assert!(power(0, 1).is_err());
    }

    #[test]
    fn double_well_saddle() {
        let obj = double_well();
        assert_eq!(obj.gradient(&[0.0]), vec![0.0]);
        assert_eq!(obj.value(&[0.0]), 1.0);
        assert_eq!(obj.value(&[1.0]), 0.0);
        assert_eq!(obj.critical_points.len(), 3);
    }

    #[test]
    fn critical_points_are_critical() {
        for obj in builtin_corpus() {
            for p in &obj.critical_points {
                let g = obj.gradient(p);
                assert!(crate::vector::norm(&g) <= 1e-10, "{} at {p:?}", obj.id);
            }
        }
    }

    #[test]
    fn rosenbrock_lipschitz_corner() {
        // Largest Hessian eigenvalue over the box sits at |x| = 1.5, y = -0.5.
        let (a, c, b) = (1200.0 * 2.25 + 200.0 + 2.0, 200.0, 600.0_f64);
        let lmax = (a + c) / 2.0 + (((a - c) / 2.0_f64).powi(2) + b * b).sqrt();
        assert!(lmax < rosenbrock().lipschitz);
        assert!(lmax > 3029.0);
    }
}
