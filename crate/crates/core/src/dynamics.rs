//! Supply side: learning-by-doing growth factors and the relative-price map.
//!
//! Sectoral productivities grow as `A_H' = g_H(s, E) A_H` and
//! `A_L' = g_L(1 - s) A_L`, where `s` is the excess-quantity share of the
//! high-tier good. Under perfect competition the relative price is
//! `p = A_L / A_H`, so one period of learning maps `p` to `p · H(s, E)` with
//! `H = g_L / g_H`. Closing the loop with the household's
//! `s = S(p; E) = α / (α + (1 - α) p)` gives the one-dimensional map `T`.

use serde::{Deserialize, Serialize};

use crate::demand::{solve_demand, DemandSolution, HouseholdBudget, PreferenceSchedule};
use crate::error::{invalid, ModelError, Result};

/// Learning functions for the two sectors.
///
/// `Linear`: `g_H = 1 + νE + φ s`, `g_L = 1 + χ (1 - s)`.
/// `Cubic`: `g_H = 1 + νE + φ₁ s − φ₂ s³`, `g_L = 1 + χ₁ (1 - s) − χ₂ (1 - s)³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum LearningSpec {
    Linear {
        nu: f64,
        phi: f64,
        chi: f64,
    },
    Cubic {
        nu: f64,
        phi1: f64,
        phi2: f64,
        chi1: f64,
        chi2: f64,
    },
}

impl Default for LearningSpec {
    /// The cubic calibration `(ν, φ₁, φ₂, χ₁, χ₂) = (0.6, 0.8, 1.0, 1.2, 1.5)`.
    fn default() -> Self {
        LearningSpec::Cubic {
            nu: 0.6,
            phi1: 0.8,
            phi2: 1.0,
            chi1: 1.2,
            chi2: 1.5,
        }
    }
}

/// Minimum of `1 + b x − c x³` over `x ∈ [0, 1]`.
fn cubic_min_on_unit(b: f64, c: f64) -> f64 {
    let f = |x: f64| 1.0 + b * x - c * x * x * x;
    let mut min = f(0.0).min(f(1.0));
    if c != 0.0 {
        let r = b / (3.0 * c);
        if r > 0.0 {
            let x = r.sqrt();
            if x < 1.0 {
                min = min.min(f(x));
            }
        }
    }
    min
}

impl LearningSpec {
    pub fn linear(nu: f64, phi: f64, chi: f64) -> Result<Self> {
        let spec = LearningSpec::Linear { nu, phi, chi };
        spec.validate()?;
        Ok(spec)
    }

    /// Linear learning with the positivity of `ν`, `φ`, `χ` relaxed to
    /// non-negativity. Only meant for switching spillover channels off in
    /// planner diagnostics.
    pub fn linear_diagnostic(nu: f64, phi: f64, chi: f64) -> Result<Self> {
        for (name, v) in [("nu", nu), ("phi", phi), ("chi", chi)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(LearningSpec::Linear { nu, phi, chi })
    }

    pub fn cubic(nu: f64, phi1: f64, phi2: f64, chi1: f64, chi2: f64) -> Result<Self> {
        let spec = LearningSpec::Cubic {
            nu,
            phi1,
            phi2,
            chi1,
            chi2,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks parameter signs and, for the cubic variant, strict positivity of
    /// both growth factors on `s ∈ [0, 1]`. Since `ν > 0`, checking `g_H` at
    /// `E = 0` covers every admissible `E ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        match *self {
            LearningSpec::Linear { nu, phi, chi } => {
                for (name, v) in [("nu", nu), ("phi", phi), ("chi", chi)] {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(invalid(name, format!("must be finite and > 0, got {v}")));
                    }
                }
            }
            LearningSpec::Cubic {
                nu,
                phi1,
                phi2,
                chi1,
                chi2,
            } => {
                if !(nu > 0.0 && nu.is_finite()) {
                    return Err(invalid("nu", format!("must be finite and > 0, got {nu}")));
                }
                for (name, v) in [
                    ("phi1", phi1),
                    ("phi2", phi2),
                    ("chi1", chi1),
                    ("chi2", chi2),
                ] {
                    if !v.is_finite() {
                        return Err(invalid(name, format!("must be finite, got {v}")));
                    }
                }
                if phi1 == 0.0 && phi2 == 0.0 && chi1 == 0.0 && chi2 == 0.0 {
                    return Err(invalid("phi1", "all learning slopes are zero"));
                }
                let min_h = cubic_min_on_unit(phi1, phi2);
                if min_h <= 0.0 {
                    return Err(invalid(
                        "phi2",
                        format!("g_H reaches {min_h} on [0, 1]; must stay positive"),
                    ));
                }
                let min_l = cubic_min_on_unit(chi1, chi2);
                if min_l <= 0.0 {
                    return Err(invalid(
                        "chi2",
                        format!("g_L reaches {min_l} on [0, 1]; must stay positive"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn nu(&self) -> f64 {
        match *self {
            LearningSpec::Linear { nu, .. } | LearningSpec::Cubic { nu, .. } => nu,
        }
    }

    /// `g_H(s, E)` without range checks.
    pub fn g_h(&self, s: f64, e: f64) -> f64 {
        match *self {
            LearningSpec::Linear { nu, phi, .. } => 1.0 + nu * e + phi * s,
            LearningSpec::Cubic { nu, phi1, phi2, .. } => {
                1.0 + nu * e + phi1 * s - phi2 * s * s * s
            }
        }
    }

    /// `g_L(1 - s)` without range checks.
    pub fn g_l(&self, s: f64) -> f64 {
        let u = 1.0 - s;
        match *self {
            LearningSpec::Linear { chi, .. } => 1.0 + chi * u,
            LearningSpec::Cubic { chi1, chi2, .. } => 1.0 + chi1 * u - chi2 * u * u * u,
        }
    }

    /// First and second derivatives of `g_H` in `s`.
    fn g_h_s(&self, s: f64) -> (f64, f64) {
        match *self {
            LearningSpec::Linear { phi, .. } => (phi, 0.0),
            LearningSpec::Cubic { phi1, phi2, .. } => (phi1 - 3.0 * phi2 * s * s, -6.0 * phi2 * s),
        }
    }

    /// First and second derivatives of `s ↦ g_L(1 - s)`.
    fn g_l_s(&self, s: f64) -> (f64, f64) {
        let u = 1.0 - s;
        match *self {
            LearningSpec::Linear { chi, .. } => (-chi, 0.0),
            LearningSpec::Cubic { chi1, chi2, .. } => {
                (-(chi1 - 3.0 * chi2 * u * u), -6.0 * chi2 * u)
            }
        }
    }
}

fn check_share(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(ModelError::ShareOutOfRange(s))
    }
}

fn check_price(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidPrice(p))
    }
}

/// Both sectoral growth factors `(g_H, g_L)` at share `s`.
pub fn growth_factors(spec: &LearningSpec, s: f64, e: f64) -> Result<(f64, f64)> {
    check_share(s)?;
    Ok((spec.g_h(s, e), spec.g_l(s)))
}

/// `H = g_L / g_H` with its exact first partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HRatio {
    pub h: f64,
    pub dh_ds: f64,
    pub dh_de: f64,
}

pub fn h_ratio(spec: &LearningSpec, s: f64, e: f64) -> Result<HRatio> {
    check_share(s)?;
    Ok(h_ratio_unchecked(spec, s, e))
}

pub(crate) fn h_ratio_unchecked(spec: &LearningSpec, s: f64, e: f64) -> HRatio {
    let gh = spec.g_h(s, e);
    let gl = spec.g_l(s);
    let (gh_s, _) = spec.g_h_s(s);
    let (gl_s, _) = spec.g_l_s(s);
    HRatio {
        h: gl / gh,
        dh_ds: (gl_s * gh - gl * gh_s) / (gh * gh),
        dh_de: -spec.nu() * gl / (gh * gh),
    }
}

/// Second partials `(H_ss, H_sE)` of the growth ratio.
pub fn h_second_partials(spec: &LearningSpec, s: f64, e: f64) -> (f64, f64) {
    let gh = spec.g_h(s, e);
    let gl = spec.g_l(s);
    let (gh_s, gh_ss) = spec.g_h_s(s);
    let (gl_s, gl_ss) = spec.g_l_s(s);
    let nu = spec.nu();
    let h_s = (gl_s * gh - gl * gh_s) / (gh * gh);
    let h_ss = (gl_ss * gh - gl * gh_ss) / (gh * gh) - 2.0 * gh_s * h_s / gh;
    let h_se = nu * gl_s / (gh * gh) - 2.0 * nu * h_s / gh;
    (h_ss, h_se)
}

/// Excess-quantity share `S(p; E) = α / (α + (1 − α) p)`.
pub fn excess_share(sched: &PreferenceSchedule, e: f64, p: f64) -> Result<f64> {
    check_price(p)?;
    Ok(excess_share_unchecked(sched.alpha(e), p))
}

#[inline]
pub(crate) fn excess_share_unchecked(alpha: f64, p: f64) -> f64 {
    alpha / (alpha + (1.0 - alpha) * p)
}

/// `∂S/∂E = α'(E) s (1 − s) / (α (1 − α))`.
pub fn dshare_q_de(sched: &PreferenceSchedule, e: f64, s: f64) -> f64 {
    let alpha = sched.alpha(e);
    let (alpha_prime, _) = sched.alpha_prime(e);
    alpha_prime * s * (1.0 - s) / (alpha * (1.0 - alpha))
}

/// One step of the relative-price law `T(p; E) = p · H(S(p; E), E)`.
pub fn price_map(sched: &PreferenceSchedule, spec: &LearningSpec, p: f64, e: f64) -> Result<f64> {
    check_price(p)?;
    Ok(price_map_unchecked(sched, spec, p, e))
}

#[inline]
pub(crate) fn price_map_unchecked(
    sched: &PreferenceSchedule,
    spec: &LearningSpec,
    p: f64,
    e: f64,
) -> f64 {
    let s = excess_share_unchecked(sched.alpha(e), p);
    p * spec.g_l(s) / spec.g_h(s, e)
}

/// Sectoral productivities and the wage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechnologyState {
    pub a_h: f64,
    pub a_l: f64,
    pub wage: f64,
}

impl TechnologyState {
    pub fn new(a_h: f64, a_l: f64, wage: f64) -> Result<Self> {
        let st = Self { a_h, a_l, wage };
        st.validate()?;
        Ok(st)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a_h", self.a_h), ("a_l", self.a_l), ("wage", self.wage)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelError::InvalidState(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Relative price `p_H / p_L = (w/A_H) / (w/A_L) = A_L / A_H`.
    pub fn relative_price(&self) -> f64 {
        self.a_l / self.a_h
    }
}

/// A per-period exogenous input: either a constant or an explicit series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Series {
    Constant(f64),
    Path(Vec<f64>),
}

impl Series {
    pub fn at(&self, t: usize) -> f64 {
        match self {
            Series::Constant(v) => *v,
            Series::Path(v) => v[t],
        }
    }

    pub fn covers(&self, horizon: usize) -> bool {
        match self {
            Series::Constant(_) => true,
            Series::Path(v) => v.len() >= horizon,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Series::Constant(v) => vec![*v],
            Series::Path(v) => v.clone(),
        }
    }
}

impl From<f64> for Series {
    fn from(v: f64) -> Self {
        Series::Constant(v)
    }
}

impl From<Vec<f64>> for Series {
    fn from(v: Vec<f64>) -> Self {
        Series::Path(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRow {
    pub t: usize,
    pub education: f64,
    pub income: f64,
    pub p: f64,
    pub s_q: f64,
    pub a_h: f64,
    pub a_l: f64,
    /// `None` when supernumerary income is not positive in this period.
    pub household: Option<DemandSolution>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimePath {
    pub rows: Vec<PathRow>,
}

impl TimePath {
    pub fn prices(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p).collect()
    }

    pub fn last(&self) -> Option<&PathRow> {
        self.rows.last()
    }
}

/// Iterates the productivity recursion for `horizon` periods, recording
/// prices, shares and the household optimum (at `p_L = 1`, `p_H = p`) of
/// every period.
pub fn simulate_path(
    sched: &PreferenceSchedule,
    spec: &LearningSpec,
    initial: &TechnologyState,
    e_path: &Series,
    income_path: &Series,
    horizon: usize,
) -> Result<TimePath> {
    if horizon == 0 {
        return Err(ModelError::InvalidHorizon);
    }
    initial.validate()?;
    if !e_path.covers(horizon) {
        return Err(invalid("education", "path shorter than horizon"));
    }
    if !income_path.covers(horizon) {
        return Err(invalid("income", "path shorter than horizon"));
    }

    let mut state = *initial;
    let mut rows = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let e = e_path.at(t);
        if !(e >= 0.0 && e.is_finite()) {
            return Err(invalid(
                "education",
                format!("must be finite and >= 0, got {e}"),
            ));
        }
        let income = income_path.at(t);
        let p = state.relative_price();
        let s = excess_share_unchecked(sched.alpha(e), p);
        let household = HouseholdBudget::with_relative_price(income, p)
            .and_then(|b| solve_demand(sched, &b, e))
            .ok();
        rows.push(PathRow {
            t,
            education: e,
            income,
            p,
            s_q: s,
            a_h: state.a_h,
            a_l: state.a_l,
            household,
        });

        state.a_h *= spec.g_h(s, e);
        state.a_l *= spec.g_l(s);
        if !(state.a_h.is_finite() && state.a_l.is_finite() && state.a_h > 0.0 && state.a_l > 0.0) {
            return Err(ModelError::InvalidState(format!(
                "productivities left the representable range after period {t}"
            )));
        }
    }
    Ok(TimePath { rows })
}
