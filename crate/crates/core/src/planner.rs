//! Planner-side optimality residuals for education along a given path.
//!
//! The planner maximises `Σ_t β^t U_t` subject to the period resource
//! constraint `p_L C_L + p_H C_H + κ(E) = Y` and the learning law
//! `A_H' = (1 + φ s + ν E) A_H`, taking the low-tier productivity path as
//! given. Along a supplied path the first-order condition for `E_t` reads
//!
//! ```text
//! ∂U_t/∂E_t + η_t (φ ∂s_t/∂E_t + ν) A_H,t  =  λ_t κ'(E_t)
//! ```
//!
//! and the report records each term together with the wedge
//! `lhs − rhs`. `λ_t` is the household's marginal utility of income, and the
//! costate `η_t` (the value of one more unit of `A_H,t+1`, in period-`t`
//! utility) follows the backward recursion
//!
//! ```text
//! η_t = β [ λ_{t+1} C_H,t+1 p_{t+1} / A_H,t+1 + η_{t+1} (g_H,t+1 + φ s_{t+1}(1 − s_{t+1})) ]
//! ```
//!
//! with `η = 0` in the last period.

use serde::{Deserialize, Serialize};

use crate::demand::{solve_demand, HouseholdBudget, PreferenceSchedule};
use crate::dynamics::{dshare_q_de, excess_share_unchecked, LearningSpec, TimePath};
use crate::error::{invalid, ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub beta: f64,
    pub horizon: usize,
    pub kappa_scale: f64,
    pub kappa_curv: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            beta: 0.95,
            horizon: 3,
            kappa_scale: 0.5,
            kappa_curv: 2.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid("beta", "must lie in (0, 1)"));
        }
        if self.horizon < 1 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        if !(self.kappa_scale > 0.0 && self.kappa_scale.is_finite()) {
            return Err(invalid("kappa_scale", "must be positive and finite"));
        }
        if !(self.kappa_curv >= 1.0 && self.kappa_curv.is_finite()) {
            return Err(invalid("kappa_curv", "must be finite and >= 1"));
        }
        Ok(())
    }

    /// Resource cost of education, `κ(E) = scale · E^curv`.
    pub fn kappa(&self, e: f64) -> f64 {
        self.kappa_scale * e.powf(self.kappa_curv)
    }

    pub fn kappa_prime(&self, e: f64) -> f64 {
        self.kappa_scale * self.kappa_curv * e.powf(self.kappa_curv - 1.0)
    }
}

/// Exogenous inputs the planner takes as given.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerPath {
    pub a_h0: f64,
    pub a_l: Vec<f64>,
    pub education: Vec<f64>,
    pub income: Vec<f64>,
}

impl PlannerPath {
    /// Initial `A_H`, the `A_L` column, and the education and income inputs of
    /// a simulated path. Later `A_H` values are regenerated from the learning
    /// law when the report is evaluated.
    pub fn from_time_path(path: &TimePath) -> Result<Self> {
        let first = path
            .rows
            .first()
            .ok_or_else(|| ModelError::InvalidState("empty time path".into()))?;
        Ok(Self {
            a_h0: first.a_h,
            a_l: path.rows.iter().map(|r| r.a_l).collect(),
            education: path.rows.iter().map(|r| r.education).collect(),
            income: path.rows.iter().map(|r| r.income).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocRow {
    pub t: usize,
    pub education: f64,
    pub a_h: f64,
    pub p: f64,
    pub s_q: f64,
    pub preference_term: f64,
    pub spillover_term: f64,
    pub shadow_cost: f64,
    pub wedge: f64,
    pub lambda: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FocReport {
    pub rows: Vec<FocRow>,
}

struct Period {
    e: f64,
    a_h: f64,
    p: f64,
    s: f64,
    g_h: f64,
    c_h: f64,
    lambda: f64,
    du_de: f64,
}

/// Evaluates the education first-order condition along `path` for
/// `cfg.horizon` periods. Requires linear learning.
pub fn evaluate_foc(
    sched: &PreferenceSchedule,
    spec: &LearningSpec,
    cfg: &PlannerConfig,
    path: &PlannerPath,
) -> Result<FocReport> {
    let LearningSpec::Linear { nu, phi, .. } = *spec else {
        return Err(ModelError::SpecVariantUnsupported);
    };
    cfg.validate()?;
    let horizon = cfg.horizon;
    if path.a_l.len() < horizon || path.education.len() < horizon || path.income.len() < horizon {
        return Err(invalid("horizon", "planner path shorter than horizon"));
    }
    if !(path.a_h0 > 0.0 && path.a_h0.is_finite()) {
        return Err(ModelError::InvalidState(format!(
            "a_h must be positive, got {}",
            path.a_h0
        )));
    }

    let mut periods = Vec::with_capacity(horizon);
    let mut a_h = path.a_h0;
    for t in 0..horizon {
        let e = path.education[t];
        let a_l = path.a_l[t];
        if !(a_l > 0.0 && a_l.is_finite()) {
            return Err(ModelError::InvalidState(format!(
                "a_l must be positive, got {a_l}"
            )));
        }
        if !(e >= 0.0 && e.is_finite()) {
            return Err(invalid(
                "education",
                format!("must be finite and >= 0, got {e}"),
            ));
        }
        let p = a_l / a_h;
        let alpha = sched.alpha(e);
        let s = excess_share_unchecked(alpha, p);

        let spend = path.income[t] - cfg.kappa(e);
        let budget = HouseholdBudget {
            income: spend,
            price_l: 1.0,
            price_h: p,
        };
        if !(spend > 0.0) {
            return Err(ModelError::NonInteriorBudget {
                supernumerary: budget.supernumerary(sched, e),
            });
        }
        let sol = solve_demand(sched, &budget, e)?;

        let x_l = sol.c_l - sched.gamma_l(e);
        let x_h = sol.c_h - sched.gamma_h;
        let (alpha_prime, _) = sched.alpha_prime(e);
        // Partial of U in E at the chosen bundle, through α(E) and γ_L(E).
        let du_de = sol.utility
            * (alpha_prime * (x_h.ln() - x_l.ln()) - (1.0 - alpha) * sched.gamma_l_prime(e) / x_l);

        let g_h = 1.0 + phi * s + nu * e;
        periods.push(Period {
            e,
            a_h,
            p,
            s,
            g_h,
            c_h: sol.c_h,
            lambda: sol.utility / sol.supernumerary,
            du_de,
        });
        a_h *= g_h;
    }

    let mut eta = vec![0.0; horizon];
    for t in (0..horizon.saturating_sub(1)).rev() {
        let next = &periods[t + 1];
        let direct = next.lambda * next.c_h * next.p / next.a_h;
        let carried = eta[t + 1] * (next.g_h + phi * next.s * (1.0 - next.s));
        eta[t] = cfg.beta * (direct + carried);
    }

    let rows = periods
        .iter()
        .zip(&eta)
        .enumerate()
        .map(|(t, (pd, &eta_t))| {
            let s_e = dshare_q_de(sched, pd.e, pd.s);
            let spillover_term = eta_t * (phi * s_e + nu) * pd.a_h;
            let shadow_cost = pd.lambda * cfg.kappa_prime(pd.e);
            FocRow {
                t,
                education: pd.e,
                a_h: pd.a_h,
                p: pd.p,
                s_q: pd.s,
                preference_term: pd.du_de,
                spillover_term,
                shadow_cost,
                wedge: pd.du_de + spillover_term - shadow_cost,
                lambda: pd.lambda,
                eta: eta_t,
            }
        })
        .collect();
    Ok(FocReport { rows })
}

/// `true` in periods where the planner would push education above the
/// evaluated path.
pub fn education_wedge_sign(report: &FocReport) -> Vec<bool> {
    report.rows.iter().map(|r| r.wedge > 0.0).collect()
}
