//! TOML experiment configuration.
//!
//! Every section is optional; missing keys take the defaults below. Unknown
//! keys are rejected so typos surface as configuration errors.

use std::path::{Path, PathBuf};

use inertial_core::objectives::from_id;
use inertial_core::ode::CompareOptions;
use inertial_core::solver::admissibility_bound;
use inertial_core::{InertialParams, Objective, OdeVariant, StopRule};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub params: ParamsSection,
    pub stop: StopSection,
    pub monitors: MonitorsSection,
    pub rates: RatesSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub ode: OdeSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub objective: String,
    pub x0: StartPoint,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            objective: "quadratic".into(),
            x0: StartPoint::Preset(Preset::Default),
            seed: 0,
            output_dir: None,
        }
    }
}

/// Either explicit coordinates or a named preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartPoint {
    Point(Vec<f64>),
    Preset(Preset),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// The objective's own starting point.
    Default,
    /// Uniform in the objective's reference box, drawn from `seed`.
    Random,
    Zeros,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub alpha: f64,
    pub beta: f64,
    /// Absolute step size; takes precedence over `step_fraction`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Step as a fraction of `2 (1 - beta) / L_g`.
    pub step_fraction: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self {
            alpha: 3.0,
            beta: 0.5,
            step: None,
            step_fraction: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopSection {
    pub grad_tol: f64,
    pub max_iter: usize,
    pub diverge_norm: f64,
}

impl Default for StopSection {
    fn default() -> Self {
        let d = StopRule::default();
        Self {
            grad_tol: d.grad_tol,
            max_iter: d.max_iter,
            diverge_norm: d.diverge_norm,
        }
    }
}

impl StopSection {
    pub fn rule(&self) -> StopRule {
        StopRule {
            grad_tol: self.grad_tol,
            max_iter: self.max_iter,
            diverge_norm: self.diverge_norm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Monitor {
    #[serde(rename = "lyapunov")]
    Lyapunov,
    #[serde(rename = "gradH")]
    GradH,
    #[serde(rename = "rates")]
    Rates,
    #[serde(rename = "ode-compare")]
    OdeCompare,
}

impl Monitor {
    pub const ALL: [Monitor; 4] = [Monitor::Lyapunov, Monitor::GradH, Monitor::Rates, Monitor::OdeCompare];

    pub fn as_str(&self) -> &'static str {
        match self {
            Monitor::Lyapunov => "lyapunov",
            Monitor::GradH => "gradH",
            Monitor::Rates => "rates",
            Monitor::OdeCompare => "ode-compare",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorsSection {
    pub enabled: Vec<Monitor>,
    /// Energy monotonicity tolerance relative to `1 + |E_N|`.
    pub mono_rel_tol: f64,
    pub bound_rel_slack: f64,
    /// Scan bound for the critical index.
    pub n_max: usize,
}

impl Default for MonitorsSection {
    fn default() -> Self {
        let d = inertial_core::lyapunov::MonitorOptions::default();
        Self {
            enabled: vec![Monitor::Lyapunov, Monitor::GradH, Monitor::Rates],
            mono_rel_tol: d.mono_rel_tol,
            bound_rel_slack: d.bound_rel_slack,
            n_max: d.n_max,
        }
    }
}

impl MonitorsSection {
    pub fn is_enabled(&self, m: Monitor) -> bool {
        self.enabled.contains(&m)
    }

    pub fn options(&self) -> inertial_core::lyapunov::MonitorOptions {
        inertial_core::lyapunov::MonitorOptions {
            n_max: self.n_max,
            mono_rel_tol: self.mono_rel_tol,
            bound_rel_slack: self.bound_rel_slack,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesSection {
    /// Lojasiewicz exponent; defaults to the objective's known value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Rate exponents checked when `theta <= 1/2`.
    pub p: Vec<f64>,
    pub window_fraction: f64,
}

impl Default for RatesSection {
    fn default() -> Self {
        Self {
            theta: None,
            p: vec![2.0, 4.0, 6.0],
            window_fraction: inertial_core::rates::DEFAULT_WINDOW_FRACTION,
        }
    }
}

/// Lists missing from the file fall back to the single base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_fraction: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeSection {
    pub gamma: f64,
    pub alpha: f64,
    pub s_ladder: Vec<f64>,
    pub variant: OdeVariant,
    pub n0: usize,
    pub substeps: usize,
    pub t_end: f64,
}

impl Default for OdeSection {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            alpha: 4.0,
            s_ladder: vec![1e-2, 2.5e-3, 6.25e-4],
            variant: OdeVariant::Damped,
            n0: 5,
            substeps: 8,
            t_end: 5.0,
        }
    }
}

impl OdeSection {
    pub fn compare_options(&self, x0: Vec<f64>) -> CompareOptions {
        CompareOptions {
            x0,
            n0: self.n0,
            substeps: self.substeps,
            t_end: self.t_end,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn objective(&self) -> CliResult<Objective> {
        from_id(&self.run.objective).map_err(CliError::from_core_config)
    }

    pub fn start_point(&self, obj: &Objective) -> CliResult<Vec<f64>> {
        let x0 = match &self.run.x0 {
            StartPoint::Point(p) => p.clone(),
            StartPoint::Preset(Preset::Default) => obj.default_start.clone(),
            StartPoint::Preset(Preset::Zeros) => vec![0.0; obj.dim],
            StartPoint::Preset(Preset::Random) => obj.reference_box.sample(1, self.run.seed).remove(0),
        };
        obj.check_dim(&x0).map_err(CliError::from_core_config)?;
        Ok(x0)
    }

    /// Validated, admissible parameters for `obj`.
    pub fn params(&self, obj: &Objective) -> CliResult<InertialParams> {
        let p = &self.params;
        let params = match p.step {
            Some(step) => InertialParams::new(p.alpha, p.beta, step),
            None => InertialParams::with_step_fraction(p.alpha, p.beta, p.step_fraction, obj.lipschitz),
        }
        .map_err(CliError::from_core_config)?;
        params
            .check_admissible(obj.lipschitz)
            .map_err(CliError::from_core_config)?;
        Ok(params)
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.run.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

/// One sweep grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub index: usize,
    pub objective: String,
    pub alpha: f64,
    pub beta: f64,
    pub step_fraction: f64,
}

/// Expands `[sweep]` into grid points (objective-major order) and checks
/// each point before anything runs.
pub fn expand_grid(cfg: &ExperimentConfig) -> CliResult<Vec<GridPoint>> {
    let sweep = cfg.sweep.clone().unwrap_or_default();
    let objectives = sweep.objective.unwrap_or_else(|| vec![cfg.run.objective.clone()]);
    let alphas = sweep.alpha.unwrap_or_else(|| vec![cfg.params.alpha]);
    let betas = sweep.beta.unwrap_or_else(|| vec![cfg.params.beta]);
    let fractions = sweep.step_fraction.unwrap_or_else(|| vec![cfg.params.step_fraction]);

    for id in &objectives {
        let obj = from_id(id).map_err(CliError::from_core_config)?;
        for &beta in &betas {
            InertialParams::new(1.0, beta, 1.0).map_err(CliError::from_core_config)?;
            if !admissibility_bound(beta, obj.lipschitz).is_finite() {
                return Err(CliError::Config(format!(
                    "objective `{id}` has L_g = 0; step fractions need a finite bound"
                )));
            }
        }
    }
    for &alpha in &alphas {
        InertialParams::new(alpha, 0.5, 1.0).map_err(CliError::from_core_config)?;
    }
    for &f in &fractions {
        if !(f > 0.0 && f < 1.0) {
            return Err(CliError::Config(format!("step_fraction = {f} outside (0, 1)")));
        }
    }

    let mut grid = Vec::new();
    for objective in &objectives {
        for &alpha in &alphas {
            for &beta in &betas {
                for &step_fraction in &fractions {
                    grid.push(GridPoint {
                        index: grid.len(),
                        objective: objective.clone(),
                        alpha,
                        beta,
                        step_fraction,
                    });
                }
            }
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn echo_round_trips() {
        let text = r#"
            [run]
            objective = "rosenbrock"
            x0 = [0.5, 0.5]
            seed = 9
            [params]
            alpha = 4.0
            beta = 0.3
            step = 1e-4
            [monitors]
            enabled = ["lyapunov", "ode-compare"]
            [sweep]
            beta = [0.3, 0.5]
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.run.x0, StartPoint::Point(vec![0.5, 0.5]));
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn presets_resolve() {
        let mut cfg =
            ExperimentConfig::from_toml("[run]\nobjective = \"rosenbrock\"\nx0 = \"random\"\nseed = 3").unwrap();
        let obj = cfg.objective().unwrap();
        let a = cfg.start_point(&obj).unwrap();
        assert!(obj.reference_box.contains(&a));
        assert_eq!(a, cfg.start_point(&obj).unwrap());
        cfg.run.seed = 4;
        assert_ne!(a, cfg.start_point(&obj).unwrap());
        cfg.run.x0 = StartPoint::Preset(Preset::Zeros);
        assert_eq!(cfg.start_point(&obj).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_points() {
        assert!(ExperimentConfig::from_toml("[params]\nstepsize = 1.0").is_err());
        assert!(ExperimentConfig::from_toml("[run]\nx0 = \"somewhere\"").is_err());
        let cfg = ExperimentConfig::from_toml("[run]\nx0 = [1.0, 2.0]").unwrap();
        let obj = cfg.objective().unwrap();
        assert!(matches!(cfg.start_point(&obj), Err(CliError::Config(_))));
    }

    #[test]
    fn inadmissible_step_names_the_bound() {
        let cfg = ExperimentConfig::from_toml("[params]\nbeta = 0.5\nstep = 1.0").unwrap();
        let err = cfg.params(&cfg.objective().unwrap()).unwrap_err();
        assert!(err.to_string().contains("2(1-beta)/L_g = 1"), "{err}");
    }

    #[test]
    fn grid_is_objective_major_and_validated() {
        let mut cfg = ExperimentConfig {
            sweep: Some(SweepSection {
                objective: Some(vec!["quadratic".into(), "doublewell".into()]),
                beta: Some(vec![0.3, 0.7]),
                ..SweepSection::default()
            }),
            ..ExperimentConfig::default()
        };
        let grid = expand_grid(&cfg).unwrap();
        assert_eq!(grid.len(), 4);
        assert_eq!((grid[1].objective.as_str(), grid[1].beta), ("quadratic", 0.7));
        assert_eq!(grid[3].index, 3);

        cfg.sweep.as_mut().unwrap().beta = Some(vec![0.5, 1.0]);
        assert!(matches!(expand_grid(&cfg), Err(CliError::Config(_))));
        cfg.sweep.as_mut().unwrap().beta = Some(vec![]);
        assert!(expand_grid(&cfg).unwrap().is_empty());
    }
}
