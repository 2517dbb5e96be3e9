//! Empirical convergence rates against the Lojasiewicz-exponent predictions.
//!
//! For a Lojasiewicz exponent `theta` at the limit point:
//!
//! * `theta <= 1/2`: for every `p > 0`, `g(y_n) - g(x*) = O(n^-p)` and
//!   `|x_n - x*| = O(n^(-p/2))`;
//! * `theta > 1/2`: `g(y_n) - g(x*) = O(n^(-1/(2 theta - 1)))` and
//!   `|x_n - x*| = O(n^(-(1 - theta)/(2 theta - 1)))`.
//!
//! The constants are unknown, so the checks here are one-sided envelopes
//! whose fitted constant must be stable over the recorded range, plus a
//! log-log slope fit for the slow regime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::solver::Trajectory;
use crate::vector::{dist, norm};

/// Iterates excluded at the end of a run before fitting.
pub const TAIL_EXCLUDED: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `theta <= 1/2`
    Fast,
    /// `theta > 1/2`
    Slow,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePrediction {
    pub theta: f64,
    pub regime: Regime,
    /// Predicted decay exponent of `g(y_n) - g(x*)`.
    pub value_exponent: f64,
    /// Predicted decay exponent of `|x_n - x*|`.
    pub iterate_exponent: f64,
}

impl RatePrediction {
    pub fn exponent_for(&self, quantity: Quantity) -> f64 {
        match quantity {
            Quantity::ValueGapY | Quantity::ValueGapX => self.value_exponent,
            Quantity::IterateDist | Quantity::YnormDist => self.iterate_exponent,
        }
    }
}

/// Predicted exponents. `p` is required (and only used) when `theta <= 1/2`.
pub fn predict(theta: f64, p: Option<f64>) -> Result<RatePrediction> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain {
            what: "theta",
            value: theta,
            range: "(0, 1)",
        });
    }
    if theta <= 0.5 {
        let p = p.ok_or_else(|| Error::Config(format!("theta = {theta} <= 1/2 needs an exponent p to test")))?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain {
                what: "p",
                value: p,
                range: "(0, inf)",
            });
        }
        Ok(RatePrediction {
            theta,
            regime: Regime::Fast,
            value_exponent: p,
            iterate_exponent: p / 2.0,
        })
    } else {
        Ok(RatePrediction {
            theta,
            regime: Regime::Slow,
            value_exponent: 1.0 / (2.0 * theta - 1.0),
            iterate_exponent: (1.0 - theta) / (2.0 * theta - 1.0),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `g(y_n) - g(x*)`
    ValueGapY,
    /// `g(x_n) - g(x*)`
    ValueGapX,
    /// `|x_n - x*|`
    IterateDist,
    /// `|y_n - x*|`
    YnormDist,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [
        Quantity::ValueGapY,
        Quantity::ValueGapX,
        Quantity::IterateDist,
        Quantity::YnormDist,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::ValueGapY => "value_gap_y",
            Quantity::ValueGapX => "value_gap_x",
            Quantity::IterateDist => "iterate_dist",
            Quantity::YnormDist => "ynorm_dist",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|q| q.as_str() == s)
    }
}

/// `(n, quantity_n)` for every record.
pub fn quantity_series(traj: &Trajectory, obj: &Objective, quantity: Quantity) -> Result<Vec<(usize, f64)>> {
    let target = obj
        .known_critical_point
        .as_deref()
        .ok_or_else(|| Error::Config(format!("objective `{}` has no known critical point", obj.id)))?;
    let g_star = obj.value(target);
    Ok(traj
        .records
        .iter()
        .map(|r| {
            let q = match quantity {
                Quantity::ValueGapY => r.g_y - g_star,
                Quantity::ValueGapX => r.g_x - g_star,
                Quantity::IterateDist => dist(&r.x, target),
                Quantity::YnormDist => dist(&r.y, target),
            };
            (r.n, q)
        })
        .collect())
}

/// Ordinary least squares `y = slope * x + intercept`; returns
/// `(slope, intercept, r_squared)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r2 = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Log-log fit of `ys` against `xs`. Nonpositive pairs are dropped; more
/// than half dropped is a degenerate fit, fewer than 10 left is too little.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let total = xs.len();
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    let dropped = total - lx.len();
    if dropped * 2 > total {
        return Err(Error::DegenerateFit { dropped, total });
    }
    if lx.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} usable points, need at least 10",
            lx.len()
        )));
    }
    Ok(least_squares(&lx, &ly))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub quantity: Quantity,
    /// Slope of `log q_n` against `log n`; `n^-c` decay gives `-c`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (usize, usize),
}

/// Default share of the run used for tail fits.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;

/// Index window `[n_lo, n_hi]` covering the last `fraction` of the
/// pre-termination iterates, without the final [`TAIL_EXCLUDED`].
pub fn tail_window(traj: &Trajectory, fraction: f64) -> Result<(usize, usize)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Domain {
            what: "window fraction",
            value: fraction,
            range: "(0, 1)",
        });
    }
    let last = traj.last().n;
    let n_hi = last.saturating_sub(TAIL_EXCLUDED);
    let n_lo = ((n_hi as f64 * (1.0 - fraction)).ceil() as usize).max(1);
    if n_lo >= n_hi {
        return Err(Error::InsufficientData(format!(
            "run of {} iterations leaves no fitting window",
            last
        )));
    }
    Ok((n_lo, n_hi))
}

pub fn fit_rate(traj: &Trajectory, obj: &Objective, quantity: Quantity, window_fraction: f64) -> Result<RateFit> {
    let series = quantity_series(traj, obj, quantity)?;
    let (n_lo, n_hi) = tail_window(traj, window_fraction)?;
    let (ns, qs): (Vec<f64>, Vec<f64>) = series[n_lo..=n_hi].iter().map(|&(n, q)| (n as f64, q)).unzip();
    let (slope, intercept, r_squared) = fit_power_law(&ns, &qs)?;
    Ok(RateFit {
        quantity,
        slope,
        intercept,
        r_squared,
        window: (n_lo, n_hi),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub quantity: Quantity,
    pub exponent: f64,
    /// `fitted_constant <= 2 * first_half_constant`.
    pub holds: bool,
    /// Smallest `c` with `q_n <= c n^-exponent` on `[n_start, n_end]`.
    pub fitted_constant: f64,
    /// Same, on the first half of the range.
    pub first_half_constant: f64,
    /// Index attaining `fitted_constant`.
    pub worst_n: usize,
    pub n_start: usize,
    pub n_end: usize,
}

/// One-sided envelope check `q_n <= c n^-exponent` for `n >= n_start`.
pub fn check_bound(
    traj: &Trajectory,
    obj: &Objective,
    prediction: &RatePrediction,
    quantity: Quantity,
    n_start: usize,
) -> Result<BoundReport> {
    let series = quantity_series(traj, obj, quantity)?;
    let n_start = n_start.max(1);
    let n_end = traj.last().n;
    if n_end < n_start + 9 {
        return Err(Error::InsufficientData(format!(
            "bound check on [{n_start}, {n_end}] needs at least 10 points"
        )));
    }
    let exponent = prediction.exponent_for(quantity);
    let mid = n_start + (n_end - n_start) / 2;
    let scaled = |n: usize, q: f64| q * (n as f64).powf(exponent);
    let (mut c, mut worst_n, mut c_first) = (f64::NEG_INFINITY, n_start, f64::NEG_INFINITY);
    for &(n, q) in &series[n_start..=n_end] {
        let v = scaled(n, q);
        if v > c {
            c = v;
            worst_n = n;
        }
        if n <= mid {
            c_first = c_first.max(v);
        }
    }
    let holds = c.is_finite() && c_first.is_finite() && c <= 2.0 * c_first.max(0.0) || c <= 0.0;
    Ok(BoundReport {
        quantity,
        exponent,
        holds,
        fitted_constant: c,
        first_half_constant: c_first,
        worst_n,
        n_start,
        n_end,
    })
}

/// Combined fit and envelope result, as written to `rates.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub quantity: Quantity,
    pub exponent_predicted: f64,
    pub slope_fitted: Option<f64>,
    pub r2: Option<f64>,
    pub holds: bool,
    pub constant: f64,
    /// Set when the slope fit could not be made.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
}

pub fn rate_report(
    traj: &Trajectory,
    obj: &Objective,
    prediction: &RatePrediction,
    quantity: Quantity,
    n_start: usize,
    window_fraction: f64,
) -> Result<RateReport> {
    let bound = check_bound(traj, obj, prediction, quantity, n_start)?;
    let fit = fit_rate(traj, obj, quantity, window_fraction);
    Ok(RateReport {
        quantity,
        exponent_predicted: bound.exponent,
        slope_fitted: fit.as_ref().ok().map(|f| f.slope),
        r2: fit.as_ref().ok().map(|f| f.r_squared),
        holds: bound.holds,
        constant: bound.fitted_constant,
        fit_error: fit.err().map(|e| e.to_string()),
    })
}

/// Slope of `log |grad g|` against `log (g - g*)`: estimates `theta` in
/// `|g - g*|^theta <= K |grad g|`.
pub fn estimate_exponent_from_pairs(value_gaps: &[f64], grad_norms: &[f64]) -> Result<f64> {
    fit_power_law(value_gaps, grad_norms).map(|(slope, _, _)| slope)
}

/// Estimates the Lojasiewicz exponent from the tail of a run, using
/// `g(x_n) - g(x*)` and `|grad g(x_n)|`.
pub fn estimate_loj_exponent(obj: &Objective, traj: &Trajectory, window_fraction: f64) -> Result<f64> {
    let g_star = obj
        .critical_value()
        .ok_or_else(|| Error::Config(format!("objective `{}` has no known critical point", obj.id)))?;
    let (n_lo, n_hi) = tail_window(traj, window_fraction)?;
    let (gaps, grads): (Vec<f64>, Vec<f64>) = traj.records[n_lo..=n_hi]
        .iter()
        .map(|r| (r.g_x - g_star, norm(&obj.gradient(&r.x))))
        .unzip();
    estimate_exponent_from_pairs(&gaps, &grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{ill_conditioned_quadratic, power};
    use crate::solver::{run, InertialParams, StopRule};

    #[test]
    fn slow_regime_exponents() {
        let p = predict(0.75, None).unwrap();
        assert_eq!(p.regime, Regime::Slow);
        assert_eq!(p.value_exponent, 2.0);
        assert_eq!(p.iterate_exponent, 0.5);
        let near_one = predict(1.0 - 1e-9, None).unwrap();
        assert!((near_one.value_exponent - 1.0).abs() < 1e-8);
        assert!(near_one.iterate_exponent > 0.0 && near_one.iterate_exponent < 1e-8);
    }

    #[test]
    fn fast_regime_exponents() {
        let p = predict(0.5, Some(4.0)).unwrap();
        assert_eq!(p.regime, Regime::Fast);
        assert_eq!(p.value_exponent, 4.0);
        assert_eq!(p.iterate_exponent, 2.0);
        assert!(predict(0.5, None).is_err());
        assert!(predict(0.3, Some(-1.0)).is_err());
    }

    #[test]
    fn theta_domain() {
        for t in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(predict(t, Some(1.0)), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn exact_power_law() {
        let ns: Vec<f64> = (1..=100).map(f64::from).collect();
        let qs: Vec<f64> = ns.iter().map(|n| n.powi(-2)).collect();
        let (slope, _, r2) = fit_power_law(&ns, &qs).unwrap();
        assert!((slope + 2.0).abs() <= 1e-9);
        assert!((r2 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn synthetic_exponent_pairs() {
        let ts: Vec<f64> = (1..=50).map(|k| 10f64.powf(-(k as f64) / 5.0)).collect();
        let grads: Vec<f64> = ts.iter().map(|t| t.powf(0.6)).collect();
        let theta = estimate_exponent_from_pairs(&ts, &grads).unwrap();
        assert!((theta - 0.6).abs() <= 1e-9);
    }

    #[test]
    fn fit_errors() {
        let xs: Vec<f64> = (1..=9).map(f64::from).collect();
        assert!(matches!(fit_power_law(&xs, &xs), Err(Error::InsufficientData(_))));
        let xs: Vec<f64> = (1..=30).map(f64::from).collect();
        let ys: Vec<f64> = (1..=30).map(|k| if k % 3 == 0 { 1.0 } else { 0.0 }).collect();
        assert!(matches!(
            fit_power_law(&xs, &ys),
            Err(Error::DegenerateFit { dropped: 20, total: 30 })
        ));
    }

    #[test]
    fn quadratic_exponent_estimate() {
        let obj = ill_conditioned_quadratic(1, 1.0).unwrap();
        let p = InertialParams::new(3.0, 0.5, 0.5).unwrap();
        let t = run(&obj, &p, &[1.0], &StopRule::default()).unwrap();
        let theta = estimate_loj_exponent(&obj, &t, DEFAULT_WINDOW_FRACTION).unwrap();
        assert!((theta - 0.5).abs() <= 0.05, "{theta}");
    }

    #[test]
    fn power_rate_and_envelopes() {
        let obj = power(4, 1).unwrap();
        let p = InertialParams::with_step_fraction(3.0, 0.5, 0.9, obj.lipschitz).unwrap();
        let stop = StopRule {
            max_iter: 20_000,
            ..StopRule::default()
        };
        let t = run(&obj, &p, &obj.default_start, &stop).unwrap();
        let fit = fit_rate(&t, &obj, Quantity::ValueGapY, DEFAULT_WINDOW_FRACTION).unwrap();
        assert!((fit.slope + 2.0).abs() <= 0.3, "{fit:?}");
        let pred = predict(0.75, None).unwrap();
        for q in [Quantity::ValueGapY, Quantity::IterateDist] {
            let b = check_bound(&t, &obj, &pred, q, 20).unwrap();
            assert!(b.holds, "{b:?}");
        }
        let theta = estimate_loj_exponent(&obj, &t, DEFAULT_WINDOW_FRACTION).unwrap();
        assert!((theta - 0.75).abs() <= 0.05, "{theta}");
    }

    #[test]
    fn quantity_names() {
        for q in Quantity::ALL {
            assert_eq!(Quantity::parse(q.as_str()), Some(q));
        }
        assert_eq!(Quantity::parse("nope"), None);
    }
}
