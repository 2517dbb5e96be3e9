//! Inertial gradient method of Nesterov type for nonconvex smooth minimization.
//!
//! The iteration is
//!
//! ```text
//! y_n     = x_n + beta * n / (n + alpha) * (x_n - x_{n-1})
//! x_{n+1} = y_n - s * grad g(y_n)
//! ```
//!
//! with `alpha > 0`, `beta in (0, 1)` and `0 < s < 2 (1 - beta) / L_g`.
//!
//! Besides the solver, the crate ships the machinery needed to check a
//! recorded run against the convergence theory of the method:
//!
//! * [`objectives`]: smooth test functions with analytic gradients, Lipschitz
//!   constants and Lojasiewicz exponents, plus finite-difference checks.
//! * [`solver`]: the inertial scheme, heavy-ball and Nesterov baselines.
//! * [`lyapunov`]: coefficient sequences, the regularized energy and its
//!   descent, and the gradient bounds on `H(x, y) = g(x) + |y - x|^2 / 2`.
//! * [`rates`]: log-log rate fits and envelope checks driven by the
//!   Lojasiewicz exponent.
//! * [`ode`]: the continuous-time limits and the discrete/continuous
//!   correspondence check.

// Validation is written as `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lyapunov;
pub mod objectives;
pub mod ode;
pub mod rates;
pub mod solver;
pub mod vector;

pub use error::{Error, Result};
pub use lyapunov::{CoefficientSet, EnergyRecord, EnergyReport, GradHReport, Violation};
pub use objectives::{Objective, SmoothFunction};
pub use ode::{ComparisonRow, OdeSpec, OdeVariant};
pub use rates::{BoundReport, Quantity, RateFit, RatePrediction, Regime};
pub use solver::{InertialParams, IterateRecord, StopRule, Termination, Trajectory};
