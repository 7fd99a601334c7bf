//! Education sweeps of the steady-state set.
//!
//! Each grid value of `E` gets its own fixed-point inventory. Where the root
//! count changes between neighbouring grid values, the change is either a
//! root leaving through an edge of the price interval or a fold, in which
//! case the threshold is pinned down by solving `H(s, Ē) = 1`,
//! `H_s(s, Ē) = 0` with Newton's method.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demand::PreferenceSchedule;
use crate::dynamics::{
    dshare_q_de, excess_share, h_ratio, h_ratio_unchecked, h_second_partials, price_map_unchecked,
    LearningSpec,
};
use crate::equilibrium::{find_fixed_points, FixedPoint, SolverConfig};
use crate::error::{invalid, ModelError, Result};

const MAX_NEWTON: usize = 200;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub e_min: f64,
    pub e_max: f64,
    pub e_points: usize,
    pub refine_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            e_min: 0.05,
            e_max: 0.45,
            e_points: 81,
            refine_tol: 1e-8,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_min.is_finite() && self.e_min >= 0.0) {
            return Err(invalid("e_min", "must be finite and >= 0"));
        }
        if !(self.e_max.is_finite() && self.e_max > self.e_min) {
            return Err(invalid("e_max", "must be finite and greater than e_min"));
        }
        if self.e_points < 2 {
            return Err(invalid("e_points", "must be at least 2"));
        }
        if !(self.refine_tol > 0.0 && self.refine_tol.is_finite()) {
            return Err(invalid("refine_tol", "must be positive and finite"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.e_points;
        let step = (self.e_max - self.e_min) / (n - 1) as f64;
        (0..n)
            .map(|j| {
                if j == n - 1 {
                    self.e_max
                } else {
                    self.e_min + j as f64 * step
                }
            })
            .collect()
    }
}

/// A fold point of the steady-state set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleNode {
    pub e_bar: f64,
    pub s_bar: f64,
    /// `|H(s̄, Ē) − 1|`.
    pub res_h: f64,
    /// `|H_s(s̄, Ē)|`.
    pub res_dh_ds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramRow {
    pub e: f64,
    pub roots: Vec<FixedPoint>,
}

/// A root-count change between two neighbouring grid values.
#[derive(Debug, Clone, PartialEq)]
pub enum Transition {
    /// A fold, refined to its threshold.
    SaddleNode {
        e_lo: f64,
        e_hi: f64,
        node: SaddleNode,
    },
    /// A root entered or left through `p_min` or `p_max`.
    Boundary {
        e_lo: f64,
        e_hi: f64,
        count_lo: usize,
        count_hi: usize,
    },
    /// A fold candidate whose refinement failed.
    Unrefined {
        e_lo: f64,
        e_hi: f64,
        count_lo: usize,
        count_hi: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BifurcationDiagram {
    pub rows: Vec<DiagramRow>,
    pub transitions: Vec<Transition>,
}

impl BifurcationDiagram {
    pub fn thresholds(&self) -> Vec<SaddleNode> {
        self.transitions
            .iter()
            .filter_map(|t| match t {
                Transition::SaddleNode { node, .. } => Some(*node),
                _ => None,
            })
            .collect()
    }

    pub fn unrefined(&self) -> impl Iterator<Item = &Transition> {
        self.transitions
            .iter()
            .filter(|t| matches!(t, Transition::Unrefined { .. }))
    }
}

/// Root inventory on every grid value of `E`, plus classified transitions.
/// Rows are evaluated in parallel; the result does not depend on the number
/// of worker threads.
pub fn sweep(
    sched: &PreferenceSchedule,
    spec: &LearningSpec,
    sweep_cfg: &SweepConfig,
    solver_cfg: &SolverConfig,
) -> BifurcationDiagram {
    let rows: Vec<DiagramRow> = sweep_cfg
        .grid()
        .into_par_iter()
        .map(|e| DiagramRow {
            e,
            roots: find_fixed_points(sched, spec, e, solver_cfg),
        })
        .collect();

    let edge_signs = |e: f64| {
        let f = |p: f64| price_map_unchecked(sched, spec, p, e) - p;
        (f(solver_cfg.p_min) < 0.0, f(solver_cfg.p_max) < 0.0)
    };

    let candidates: Vec<(usize, usize)> = rows
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].roots.len() != w[1].roots.len())
        .map(|(j, _)| (j, j + 1))
        .collect();

    let transitions = candidates
        .into_par_iter()
        .map(|(j, k)| {
            let (lo, hi) = (&rows[j], &rows[k]);
            let (count_lo, count_hi) = (lo.roots.len(), hi.roots.len());
            let (a0, b0) = edge_signs(lo.e);
            let (a1, b1) = edge_signs(hi.e);
            let crossings = usize::from(a0 != a1) + usize::from(b0 != b1);
            let interior = count_lo.abs_diff(count_hi).saturating_sub(crossings);
            if interior == 0 {
                return Transition::Boundary {
                    e_lo: lo.e,
                    e_hi: hi.e,
                    count_lo,
                    count_hi,
                };
            }
            let richer = if count_lo > count_hi { lo } else { hi };
            let s_hint = colliding_share_hint(&richer.roots);
            match refine_saddle_node(spec, (lo.e, hi.e), s_hint, sweep_cfg.refine_tol) {
                Ok(node) => Transition::SaddleNode {
                    e_lo: lo.e,
                    e_hi: hi.e,
                    node,
                },
                Err(err) => Transition::Unrefined {
                    e_lo: lo.e,
                    e_hi: hi.e,
                    count_lo,
                    count_hi,
                    reason: err.to_string(),
                },
            }
        })
        .collect();

    BifurcationDiagram { rows, transitions }
}

/// Mean share of the two neighbouring roots that sit closest together.
fn colliding_share_hint(roots: &[FixedPoint]) -> f64 {
    roots
        .windows(2)
        .map(|w| {
            (
                (w[0].s_star - w[1].s_star).abs(),
                0.5 * (w[0].s_star + w[1].s_star),
            )
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, mid)| mid)
        .unwrap_or(0.5)
}

/// Solves `H(s, E) = 1`, `H_s(s, E) = 0` by damped Newton iteration with an
/// analytic Jacobian, starting from `(s_hint, midpoint of e_bracket)`. The
/// solution must lie strictly inside `e_bracket`.
pub fn refine_saddle_node(
    spec: &LearningSpec,
    e_bracket: (f64, f64),
    s_hint: f64,
    refine_tol: f64,
) -> Result<SaddleNode> {
    let (e_lo, e_hi) = e_bracket;
    let residual = |s: f64, e: f64| {
        let r = h_ratio_unchecked(spec, s, e);
        (r.h - 1.0, r.dh_ds)
    };
    let norm = |r: (f64, f64)| r.0.abs().max(r.1.abs());
    let fail = |iterations: usize, reason: &str| ModelError::NoConvergence {
        iterations,
        reason: reason.to_string(),
    };

    let mut s = s_hint.clamp(0.0, 1.0);
    let mut e = 0.5 * (e_lo + e_hi);
    let mut r = residual(s, e);
    let target = refine_tol * 1e-4;

    let mut iterations = 0;
    while iterations < MAX_NEWTON && norm(r) > target {
        iterations += 1;
        let d = h_ratio_unchecked(spec, s, e);
        let (h_ss, h_se) = h_second_partials(spec, s, e);
        // J = [[H_s, H_E], [H_ss, H_sE]]
        let det = d.dh_ds * h_se - d.dh_de * h_ss;
        if !det.is_finite() || det.abs() < f64::EPSILON * 1e-3 {
            return Err(fail(iterations, "singular Jacobian"));
        }
        let ds = -(h_se * r.0 - d.dh_de * r.1) / det;
        let de = -(-h_ss * r.0 + d.dh_ds * r.1) / det;

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let (s_new, e_new) = (s + step * ds, e + step * de);
            if (0.0..=1.0).contains(&s_new) && e_new.is_finite() {
                let r_new = residual(s_new, e_new);
                if norm(r_new) < norm(r) {
                    accepted = Some((s_new, e_new, r_new));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((s_new, e_new, r_new)) => {
                let moved = (s_new - s).abs().max((e_new - e).abs());
                s = s_new;
                e = e_new;
                r = r_new;
                if moved < 1e-15 {
                    break;
                }
            }
            None => break,
        }
    }

    let (res_h, res_dh_ds) = (r.0.abs(), r.1.abs());
    if res_h > refine_tol || res_dh_ds > refine_tol {
        return Err(fail(iterations, "residuals above tolerance"));
    }
    if !(e > e_lo && e < e_hi) {
        return Err(fail(
            iterations,
            &format!("solution E = {e} lies outside ({e_lo}, {e_hi})"),
        ));
    }
    Ok(SaddleNode {
        e_bar: e,
        s_bar: s,
        res_h,
        res_dh_ds,
    })
}

/// Decomposition of the education effect on the price map at a steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCondition {
    /// `−H_E / H_s`.
    pub lhs: f64,
    /// `α'(E) s*(1 − s*) / (α (1 − α))`.
    pub rhs: f64,
    /// Whether education shifts the map down at `p*`. For `H_s > 0` this is
    /// `lhs > rhs`; for `H_s < 0` the inequality reverses.
    pub education_lowers_price: bool,
    /// `∂T/∂E = p (H_E + H_s S_E)`.
    pub dt_de: f64,
}

pub fn channel_condition(
    sched: &PreferenceSchedule,
    spec: &LearningSpec,
    p_star: f64,
    e: f64,
    marginal_tol: f64,
) -> Result<ChannelCondition> {
    let s = excess_share(sched, e, p_star)?;
    let d = h_ratio(spec, s, e)?;
    let s_e = dshare_q_de(sched, e, s);
    let dt_de = p_star * (d.dh_de + d.dh_ds * s_e);
    if d.dh_ds.abs() <= marginal_tol {
        return Err(ModelError::DegenerateChannel { dt_de });
    }
    let lhs = -d.dh_de / d.dh_ds;
    let alpha = sched.alpha(e);
    let (alpha_prime, _) = sched.alpha_prime(e);
    let rhs = alpha_prime * (1.0 - s) * s / (alpha * (1.0 - alpha));
    let education_lowers_price = if d.dh_ds > 0.0 { lhs > rhs } else { lhs < rhs };
    Ok(ChannelCondition {
        lhs,
        rhs,
        education_lowers_price,
        dt_de,
    })
}
