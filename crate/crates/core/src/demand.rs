//! Household side: education-dependent Stone–Geary preferences and their
//! closed-form Marshallian demands.
//!
//! Utility is `U = (C_L - γ_L(E))^(1-α(E)) · (C_H - γ_H)^α(E)` subject to
//! `p_L C_L + p_H C_H = Y`. The preference weight `α(E)` is an affine schedule
//! clipped to `[alpha_lo, alpha_hi]`; the low-tier subsistence level decays
//! exponentially in education.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, ModelError, Result};

/// Education-dependent preference objects `α(E)`, `γ_L(E)` and the constant `γ_H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreferenceSchedule {
    pub alpha_base: f64,
    pub alpha_slope: f64,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub gamma_l_base: f64,
    pub gamma_l_decay: f64,
    pub gamma_h: f64,
}

impl Default for PreferenceSchedule {
    /// `α(E) = clip(0.78 + 0.16 E, 0.60, 0.97)`, `γ_L(E) = 2 e^{-0.5 E}`, `γ_H = 0`.
    fn default() -> Self {
        Self {
            alpha_base: 0.78,
            alpha_slope: 0.16,
            alpha_lo: 0.60,
            alpha_hi: 0.97,
            gamma_l_base: 2.0,
            gamma_l_decay: 0.5,
            gamma_h: 0.0,
        }
    }
}

impl PreferenceSchedule {
    pub fn new(
        alpha_base: f64,
        alpha_slope: f64,
        alpha_lo: f64,
        alpha_hi: f64,
        gamma_l_base: f64,
        gamma_l_decay: f64,
        gamma_h: f64,
    ) -> Result<Self> {
        let sched = Self {
            alpha_base,
            alpha_slope,
            alpha_lo,
            alpha_hi,
            gamma_l_base,
            gamma_l_decay,
            gamma_h,
        };
        sched.validate()?;
        Ok(sched)
    }

    /// Schedule with a constant preference weight and constant subsistence levels.
    pub fn constant(alpha: f64, gamma_l: f64, gamma_h: f64) -> Result<Self> {
        Self::new(alpha, 0.0, alpha, alpha, gamma_l, 0.0, gamma_h)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("alpha_base", self.alpha_base),
            ("alpha_slope", self.alpha_slope),
            ("alpha_lo", self.alpha_lo),
            ("alpha_hi", self.alpha_hi),
            ("gamma_l_base", self.gamma_l_base),
            ("gamma_l_decay", self.gamma_l_decay),
            ("gamma_h", self.gamma_h),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if !(self.alpha_lo > 0.0) {
            return Err(invalid("alpha_lo", "must be > 0"));
        }
        if !(self.alpha_hi < 1.0) {
            return Err(invalid("alpha_hi", "must be < 1"));
        }
        if self.alpha_lo > self.alpha_hi {
            return Err(invalid("alpha_hi", "must be >= alpha_lo"));
        }
        if self.alpha_slope < 0.0 {
            return Err(invalid("alpha_slope", "must be >= 0"));
        }
        if self.gamma_l_base < 0.0 {
            return Err(invalid("gamma_l_base", "must be >= 0"));
        }
        if self.gamma_l_decay < 0.0 {
            return Err(invalid("gamma_l_decay", "must be >= 0"));
        }
        if self.gamma_h < 0.0 {
            return Err(invalid("gamma_h", "must be >= 0"));
        }
        Ok(())
    }

    fn alpha_raw(&self, e: f64) -> f64 {
        self.alpha_base + self.alpha_slope * e
    }

    /// Preference weight on the high-tier good.
    pub fn alpha(&self, e: f64) -> f64 {
        self.alpha_raw(e).max(self.alpha_lo).min(self.alpha_hi)
    }

    /// `α'(E)` and whether a clip bound is active at `E`. Inside a clipped
    /// region (kinks included) the derivative is reported as 0.
    pub fn alpha_prime(&self, e: f64) -> (f64, bool) {
        let raw = self.alpha_raw(e);
        if raw > self.alpha_lo && raw < self.alpha_hi {
            (self.alpha_slope, false)
        } else {
            (0.0, true)
        }
    }

    /// Low-tier subsistence level.
    pub fn gamma_l(&self, e: f64) -> f64 {
        self.gamma_l_base * (-self.gamma_l_decay * e).exp()
    }

    pub fn gamma_l_prime(&self, e: f64) -> f64 {
        -self.gamma_l_decay * self.gamma_l(e)
    }
}

/// Prices and income faced by the household in one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HouseholdBudget {
    pub income: f64,
    pub price_l: f64,
    pub price_h: f64,
}

impl HouseholdBudget {
    pub fn new(income: f64, price_l: f64, price_h: f64) -> Result<Self> {
        let b = Self {
            income,
            price_l,
            price_h,
        };
        b.validate()?;
        Ok(b)
    }

    /// Budget with the low-tier good as numeraire.
    pub fn with_relative_price(income: f64, p: f64) -> Result<Self> {
        Self::new(income, 1.0, p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("income", self.income),
            ("price_l", self.price_l),
            ("price_h", self.price_h),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(
                    name,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        Ok(())
    }

    /// Income left after buying both subsistence bundles.
    pub fn supernumerary(&self, sched: &PreferenceSchedule, e: f64) -> f64 {
        self.income - self.price_l * sched.gamma_l(e) - self.price_h * sched.gamma_h
    }
}

/// Interior optimum of the household problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandSolution {
    pub c_l: f64,
    pub c_h: f64,
    pub supernumerary: f64,
    pub share_h: f64,
    pub share_l: f64,
    pub utility: f64,
}

/// Closed-form Marshallian demands at education level `e`.
pub fn solve_demand(
    sched: &PreferenceSchedule,
    budget: &HouseholdBudget,
    e: f64,
) -> Result<DemandSolution> {
    budget.validate()?;
    let b = budget.supernumerary(sched, e);
    if !(b > 0.0) {
        return Err(ModelError::NonInteriorBudget { supernumerary: b });
    }
    let alpha = sched.alpha(e);
    let gamma_l = sched.gamma_l(e);

    // Above-subsistence quantities.
    let x_l = (1.0 - alpha) * b / budget.price_l;
    let x_h = alpha * b / budget.price_h;

    let share_h = (alpha * b + budget.price_h * sched.gamma_h) / budget.income;
    Ok(DemandSolution {
        c_l: gamma_l + x_l,
        c_h: sched.gamma_h + x_h,
        supernumerary: b,
        share_h,
        share_l: 1.0 - share_h,
        utility: x_l.powf(1.0 - alpha) * x_h.powf(alpha),
    })
}

/// Stone–Geary utility of an arbitrary bundle. Zero on the subsistence edge.
pub fn utility(sched: &PreferenceSchedule, e: f64, c_l: f64, c_h: f64) -> Result<f64> {
    let x_l = c_l - sched.gamma_l(e);
    let x_h = c_h - sched.gamma_h;
    if x_l < 0.0 || x_h < 0.0 {
        return Err(ModelError::InvalidState(format!(
            "bundle ({c_l}, {c_h}) lies below subsistence"
        )));
    }
    let alpha = sched.alpha(e);
    Ok(x_l.powf(1.0 - alpha) * x_h.powf(alpha))
}

/// Income elasticities of the two goods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncomeElasticities {
    pub eta_h: f64,
    pub eta_l: f64,
}

/// `η_H = Y/B` and `η_L = (1-α)/s_L`. Only defined for `γ_H = 0`.
pub fn income_elasticities(
    sched: &PreferenceSchedule,
    budget: &HouseholdBudget,
    e: f64,
) -> Result<IncomeElasticities> {
    if sched.gamma_h != 0.0 {
        return Err(ModelError::GammaHNonzero(sched.gamma_h));
    }
    let sol = solve_demand(sched, budget, e)?;
    let alpha = sched.alpha(e);
    Ok(IncomeElasticities {
        eta_h: budget.income / sol.supernumerary,
        eta_l: (1.0 - alpha) / sol.share_l,
    })
}

/// Education sensitivity of the nominal high-tier budget share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShareSensitivity {
    pub value: f64,
    /// The α schedule is clipped at `E`, so the preference channel is off.
    pub clipped: bool,
}

/// `∂s_H/∂E = α'(E) B / Y − α(E) p_L γ_L'(E) / Y`.
pub fn dshare_h_de(
    sched: &PreferenceSchedule,
    budget: &HouseholdBudget,
    e: f64,
) -> Result<ShareSensitivity> {
    let sol = solve_demand(sched, budget, e)?;
    let (alpha_prime, clipped) = sched.alpha_prime(e);
    let alpha = sched.alpha(e);
    let y = budget.income;
    let value =
        alpha_prime * sol.supernumerary / y - alpha / y * (budget.price_l * sched.gamma_l_prime(e));
    Ok(ShareSensitivity { value, clipped })
}
