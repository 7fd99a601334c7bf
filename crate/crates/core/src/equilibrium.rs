//! All fixed points of the price map on a bounded interval.
//!
//! `F(p) = T(p; E) − p` is sampled on an equally spaced grid; each sign change
//! is refined by bisection, nearby roots are merged, and every survivor is
//! classified through `T'(p*) = 1 − s*(1 − s*) H_s(s*, E)`.
//!
//! Tangential roots (where `F` touches zero without changing sign) are not
//! bracketed; those are handled by the saddle-node refinement in
//! [`crate::bifurcation`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::demand::PreferenceSchedule;
use crate::dynamics::{
    excess_share_unchecked, h_ratio_unchecked, price_map_unchecked, LearningSpec,
};
use crate::error::{invalid, ModelError, Result};

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub p_min: f64,
    pub p_max: f64,
    pub grid_points: usize,
    pub bisect_tol: f64,
    pub dedup_tol: f64,
    pub marginal_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            p_min: 0.01,
            p_max: 14.0,
            grid_points: 4001,
            bisect_tol: 1e-12,
            dedup_tol: 1e-7,
            marginal_tol: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_min > 0.0 && self.p_min.is_finite()) {
            return Err(invalid("p_min", "must be positive and finite"));
        }
        if !(self.p_max > self.p_min && self.p_max.is_finite()) {
            return Err(invalid("p_max", "must be finite and greater than p_min"));
        }
        if self.grid_points < 3 {
            return Err(invalid("grid_points", "must be at least 3"));
        }
        for (name, v) in [
            ("bisect_tol", self.bisect_tol),
            ("dedup_tol", self.dedup_tol),
            ("marginal_tol", self.marginal_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be positive and finite"));
            }
        }
        Ok(())
    }

    fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.grid_points;
        let step = (self.p_max - self.p_min) / (n - 1) as f64;
        (0..n).map(move |i| {
            if i == n - 1 {
                self.p_max
            } else {
                self.p_min + i as f64 * step
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Stable => "Stable",
            Stability::Unstable => "Unstable",
            Stability::Marginal => "Marginal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub p_star: f64,
    pub s_star: f64,
    /// `H_s` at `(s*, E)`.
    pub dh_ds: f64,
    pub t_prime: f64,
    pub stability: Stability,
    /// `|T(p*) − p*|`.
    pub residual: f64,
}

/// Slope of the price map at a fixed point and the resulting stability class.
///
/// `|T'| < 1 − marginal_tol` is stable, `|T'| > 1 + marginal_tol` unstable,
/// anything in between marginal.
pub fn classify_stability(s_star: f64, dh_ds: f64, marginal_tol: f64) -> Result<(f64, Stability)> {
    if !(s_star > 0.0 && s_star < 1.0) {
        return Err(ModelError::ShareOutOfRange(s_star));
    }
    let t_prime = 1.0 - s_star * (1.0 - s_star) * dh_ds;
    let mag = t_prime.abs();
    let stability = if mag < 1.0 - marginal_tol {
        Stability::Stable
    } else if mag > 1.0 + marginal_tol {
        Stability::Unstable
    } else {
        Stability::Marginal
    };
    Ok((t_prime, stability))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    let mut best = if f_lo.abs() <= f_hi.abs() { lo } else { hi };
    let mut best_res = f_lo.abs().min(f_hi.abs());
    if best_res <= tol * best.max(1.0) {
        return best;
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid.abs() < best_res {
            best = mid;
            best_res = f_mid.abs();
        }
        if f_mid.abs() <= tol * mid.max(1.0) {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    best
}

/// Every fixed point of `T(·; E)` inside `[p_min, p_max]`, ascending in price.
/// An empty list is a legitimate answer.
pub fn find_fixed_points(
    sched: &PreferenceSchedule,
    spec: &LearningSpec,
    e: f64,
    cfg: &SolverConfig,
) -> Vec<FixedPoint> {
    let f = |p: f64| price_map_unchecked(sched, spec, p, e) - p;

    let mut candidates = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for p in cfg.grid() {
        let fp = f(p);
        if fp == 0.0 {
            candidates.push(p);
        } else if let Some((p0, f0)) = prev {
            if f0 != 0.0 && (f0 < 0.0) != (fp < 0.0) {
                candidates.push(bisect(f, p0, p, cfg.bisect_tol));
            }
        }
        prev = Some((p, fp));
    }

    let alpha = sched.alpha(e);
    let mut roots: Vec<FixedPoint> = Vec::with_capacity(candidates.len());
    for p in candidates {
        let residual = f(p).abs();
        // A sign change without a root (never expected for a continuous map)
        // would show up here as a large residual.
        if residual > cfg.bisect_tol * p.max(1.0) {
            continue;
        }
        let s = excess_share_unchecked(alpha, p);
        let dh_ds = h_ratio_unchecked(spec, s, e).dh_ds;
        let Ok((t_prime, stability)) = classify_stability(s, dh_ds, cfg.marginal_tol) else {
            continue;
        };
        let fp = FixedPoint {
            p_star: p,
            s_star: s,
            dh_ds,
            t_prime,
            stability,
            residual,
        };
        match roots.last_mut() {
            Some(last) if p - last.p_star <= cfg.dedup_tol => {
                if fp.residual < last.residual {
                    *last = fp;
                }
            }
            _ => roots.push(fp),
        }
    }
    roots
}
