//! Smooth test functions with analytic gradients.
//!
//! An [`Objective`] bundles a [`SmoothFunction`] with the metadata the
//! monitors need: a Lipschitz constant of the gradient, the box on which that
//! constant is valid, the known critical points and (where known) the
//! Lojasiewicz exponent at the tracked critical point.

mod corpus;
mod gradcheck;
mod id;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use corpus::{
    builtin_corpus, constant, double_well, ill_conditioned_quadratic, power, quadratic, quartic_2d, rosenbrock,
};
pub use gradcheck::{check_gradient, check_lipschitz, GradientCheck, LipschitzCheck};
pub use id::from_id;

/// A differentiable function `g: R^m -> R`.
pub trait SmoothFunction: Send + Sync + fmt::Debug {
    fn value(&self, x: &[f64]) -> f64;

    /// Writes `grad g(x)` into `out`.
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);
}

/// Axis-aligned box `[lower, upper]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self {
            lower: vec![-half_width; dim],
            upper: vec![half_width; dim],
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// `count` points drawn uniformly from the box.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.lower
                    .iter()
                    .zip(&self.upper)
                    .map(|(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
                    .collect()
            })
            .collect()
    }
}

/// A smooth objective together with the constants the theory needs.
///
/// Immutable after construction; cloning shares the underlying function.
#[derive(Clone, Debug)]
pub struct Objective {
    /// Canonical corpus id, e.g. `quadratic:dim=10:cond=100`.
    pub id: String,
    pub dim: usize,
    /// A valid `L_g` on [`Objective::lipschitz_box`] (or globally when that is `None`).
    pub lipschitz: f64,
    /// Box on which `lipschitz` is valid; `None` when the constant is global.
    pub lipschitz_box: Option<BoxDomain>,
    /// Box used for sampling test points.
    pub reference_box: BoxDomain,
    /// The critical point rate checks are run against.
    pub known_critical_point: Option<Vec<f64>>,
    /// Every critical point known in closed form (includes the tracked one).
    pub critical_points: Vec<Vec<f64>>,
    /// Lojasiewicz exponent at `known_critical_point`.
    pub known_loj_exponent: Option<f64>,
    pub lower_bounded: bool,
    /// Preset starting point.
    pub default_start: Vec<f64>,
    function: Arc<dyn SmoothFunction>,
}

impl Objective {
    pub fn new(id: impl Into<String>, dim: usize, lipschitz: f64, function: Arc<dyn SmoothFunction>) -> Self {
        Self {
            id: id.into(),
            dim,
            lipschitz,
            lipschitz_box: None,
            reference_box: BoxDomain::cube(dim, 1.0),
            known_critical_point: None,
            critical_points: Vec::new(),
            known_loj_exponent: None,
            lower_bounded: false,
            default_start: vec![1.0; dim],
            function,
        }
    }

    pub fn with_lipschitz_box(mut self, domain: BoxDomain) -> Self {
        self.reference_box = domain.clone();
        self.lipschitz_box = Some(domain);
        self
    }

    pub fn with_reference_box(mut self, domain: BoxDomain) -> Self {
        self.reference_box = domain;
        self
    }

    /// Sets the tracked critical point and its exponent; the point is also
    /// added to `critical_points`.
    pub fn with_critical_point(mut self, point: Vec<f64>, loj_exponent: Option<f64>) -> Self {
        if !self.critical_points.contains(&point) {
            self.critical_points.push(point.clone());
        }
        self.known_critical_point = Some(point);
        self.known_loj_exponent = loj_exponent;
        self
    }

    pub fn with_other_critical_point(mut self, point: Vec<f64>) -> Self {
        self.critical_points.push(point);
        self
    }

    pub fn bounded_below(mut self, yes: bool) -> Self {
        self.lower_bounded = yes;
        self
    }

    pub fn with_default_start(mut self, start: Vec<f64>) -> Self {
        self.default_start = start;
        self
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.function.value(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.function.gradient_into(x, &mut out);
        out
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.function.gradient_into(x, out);
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            })
        }
    }

    /// Whether `x` lies where `lipschitz` is known to be valid.
    pub fn in_lipschitz_region(&self, x: &[f64]) -> bool {
        self.lipschitz_box.as_ref().is_none_or(|b| b.contains(x))
    }

    /// Value at the tracked critical point.
    pub fn critical_value(&self) -> Option<f64> {
        self.known_critical_point.as_deref().map(|p| self.value(p))
    }

    /// Distance from `x` to the nearest known critical point.
    pub fn distance_to_critical_set(&self, x: &[f64]) -> Option<f64> {
        self.critical_points
            .iter()
            .map(|p| crate::vector::dist(x, p))
            .min_by(|a, b| a.total_cmp(b))
    }
}
