//! Scenario files: one TOML table per model component, every table optional.

use std::path::Path;

use demandtier::{
    LearningSpec, ModelError, PlannerConfig, PreferenceSchedule, Series, SolverConfig, SweepConfig,
    TechnologyState,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub preferences: PreferenceSchedule,
    pub learning: LearningSpec,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub simulation: Simulation,
    pub statics: Statics,
    pub planner: Planner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Simulation {
    pub a_h0: f64,
    pub a_l0: f64,
    pub wage: f64,
    pub horizon: usize,
    /// A number or an array with at least `horizon` entries.
    pub education: Series,
    pub income: Series,
}

impl Default for Simulation {
    fn default() -> Self {
        Self {
            a_h0: 1.0,
            a_l0: 5.0,
            wage: 1.0,
            horizon: 500,
            education: Series::Constant(0.28),
            income: Series::Constant(10.0),
        }
    }
}

impl Simulation {
    pub fn initial_state(&self) -> Result<TechnologyState, ModelError> {
        TechnologyState::new(self.a_h0, self.a_l0, self.wage)
    }
}

/// Income grid and prices for the comparative-statics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Statics {
    pub income_min: f64,
    pub income_max: f64,
    pub income_points: usize,
    pub price_l: f64,
    pub price_h: f64,
}

impl Default for Statics {
    fn default() -> Self {
        Self {
            income_min: 1.0,
            income_max: 20.0,
            income_points: 20,
            price_l: 1.0,
            price_h: 1.0,
        }
    }
}

impl Statics {
    pub fn incomes(&self) -> Vec<f64> {
        let n = self.income_points;
        if n == 1 {
            return vec![self.income_min];
        }
        let step = (self.income_max - self.income_min) / (n - 1) as f64;
        (0..n)
            .map(|j| {
                if j == n - 1 {
                    self.income_max
                } else {
                    self.income_min + j as f64 * step
                }
            })
            .collect()
    }
}

/// Planner settings. The planner runs on linear learning with its own
/// coefficients; `nu = phi = 0` is allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Planner {
    pub beta: f64,
    pub horizon: usize,
    pub kappa_scale: f64,
    pub kappa_curv: f64,
    pub nu: f64,
    pub phi: f64,
    pub chi: f64,
}

impl Default for Planner {
    fn default() -> Self {
        let c = PlannerConfig::default();
        Self {
            beta: c.beta,
            horizon: c.horizon,
            kappa_scale: c.kappa_scale,
            kappa_curv: c.kappa_curv,
            nu: 0.6,
            phi: 0.8,
            chi: 1.2,
        }
    }
}

impl Planner {
    pub fn config(&self) -> PlannerConfig {
        PlannerConfig {
            beta: self.beta,
            horizon: self.horizon,
            kappa_scale: self.kappa_scale,
            kappa_curv: self.kappa_curv,
        }
    }

    pub fn learning(&self) -> Result<LearningSpec, ModelError> {
        LearningSpec::linear_diagnostic(self.nu, self.phi, self.chi)
    }
}

fn keyed(section: &str, err: ModelError) -> CliError {
    match err {
        ModelError::InvalidParameter { name, reason } => {
            CliError::Config(format!("{section}.{name}: {reason}"))
        }
        other => CliError::Config(format!("[{section}] {other}")),
    }
}

fn check(section: &str, key: &str, ok: bool, reason: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{section}.{key}: {reason}")))
    }
}

fn check_series(
    key: &str,
    s: &Series,
    horizon: usize,
    min: f64,
    strict: bool,
) -> Result<(), CliError> {
    check(
        "simulation",
        key,
        s.covers(horizon),
        "array is shorter than simulation.horizon",
    )?;
    let bad = s
        .values()
        .into_iter()
        .any(|v| !v.is_finite() || v < min || (strict && v == min));
    let reason = if strict {
        format!("entries must be finite and > {min}")
    } else {
        format!("entries must be finite and >= {min}")
    };
    check("simulation", key, !bad, &reason)
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let sc: Scenario = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("scenario parse error: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises to TOML")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.preferences
            .validate()
            .map_err(|e| keyed("preferences", e))?;
        self.learning.validate().map_err(|e| keyed("learning", e))?;
        self.solver.validate().map_err(|e| keyed("solver", e))?;
        self.sweep.validate().map_err(|e| keyed("sweep", e))?;

        let sim = &self.simulation;
        for (key, v) in [("a_h0", sim.a_h0), ("a_l0", sim.a_l0), ("wage", sim.wage)] {
            check(
                "simulation",
                key,
                v > 0.0 && v.is_finite(),
                "must be positive and finite",
            )?;
        }
        check(
            "simulation",
            "horizon",
            sim.horizon >= 1,
            "must be at least 1",
        )?;
        check_series("education", &sim.education, sim.horizon, 0.0, false)?;
        check_series("income", &sim.income, sim.horizon, 0.0, true)?;

        let st = &self.statics;
        check(
            "statics",
            "income_min",
            st.income_min > 0.0 && st.income_min.is_finite(),
            "must be positive and finite",
        )?;
        check(
            "statics",
            "income_max",
            st.income_max >= st.income_min && st.income_max.is_finite(),
            "must be finite and >= income_min",
        )?;
        check(
            "statics",
            "income_points",
            st.income_points >= 1,
            "must be at least 1",
        )?;
        for (key, v) in [("price_l", st.price_l), ("price_h", st.price_h)] {
            check(
                "statics",
                key,
                v > 0.0 && v.is_finite(),
                "must be positive and finite",
            )?;
        }

        let pl = &self.planner;
        pl.config().validate().map_err(|e| keyed("planner", e))?;
        pl.learning().map_err(|e| keyed("planner", e))?;
        check_series("education", &sim.education, pl.horizon, 0.0, false)
            .and(check_series("income", &sim.income, pl.horizon, 0.0, true))
            .map_err(|_| {
                CliError::Config(
                    "planner.horizon: exceeds the length of simulation.education or simulation.income"
                        .into(),
                )
            })?;
        Ok(())
    }
}
