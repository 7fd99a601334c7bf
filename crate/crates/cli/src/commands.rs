use std::io::Write;

use demandtier::{
    dshare_h_de, evaluate_foc, find_fixed_points, income_elasticities, simulate_path, solve_demand,
    sweep, HouseholdBudget, ModelError, PlannerPath, Series, Transition,
};

use crate::format::{flag, num, opt, write_csv};
use crate::{CliError, Scenario};

/// Education level used by `fixed-points` and `statics` when `--E` is absent.
pub const DEFAULT_E: f64 = 0.215;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write<W: Write>(&self, out: W) -> Result<(), CliError> {
        write_csv(out, self.header, &self.rows)
    }
}

pub fn check_e(e: f64) -> Result<f64, CliError> {
    if e.is_finite() && e >= 0.0 {
        Ok(e)
    } else {
        Err(CliError::Config(format!(
            "--E: must be finite and >= 0, got {e}"
        )))
    }
}

pub fn fixed_points(sc: &Scenario, e: f64) -> Result<Table, CliError> {
    let e = check_e(e)?;
    let rows = find_fixed_points(&sc.preferences, &sc.learning, e, &sc.solver)
        .into_iter()
        .map(|r| {
            vec![
                num(e),
                num(r.p_star),
                num(r.s_star),
                num(r.t_prime),
                r.stability.to_string(),
            ]
        })
        .collect();
    Ok(Table {
        header: &["E", "p_star", "s_star", "t_prime", "stability"],
        rows,
    })
}

pub struct BifurcationOutput {
    pub locus: Table,
    pub thresholds: Table,
    /// One line per transition that is not a refined fold.
    pub notes: Vec<String>,
    pub unrefined: usize,
}

pub fn bifurcation(sc: &Scenario) -> Result<BifurcationOutput, CliError> {
    let d = sweep(&sc.preferences, &sc.learning, &sc.sweep, &sc.solver);
    let locus = d
        .rows
        .iter()
        .flat_map(|row| {
            if row.roots.is_empty() {
                // keep every grid value visible; no root in the price interval
                return vec![vec![num(row.e), String::new(), String::new()]];
            }
            row.roots
                .iter()
                .map(|r| vec![num(row.e), num(r.p_star), r.stability.to_string()])
                .collect()
        })
        .collect();
    let thresholds = d
        .thresholds()
        .iter()
        .map(|n| vec![num(n.e_bar), num(n.s_bar), num(n.res_h), num(n.res_dh_ds)])
        .collect();

    let mut notes = Vec::new();
    let mut unrefined = 0;
    for t in &d.transitions {
        match t {
            Transition::SaddleNode { .. } => {}
            Transition::Boundary { e_lo, e_hi, count_lo, count_hi } => notes.push(format!(
                "boundary transition in [{e_lo}, {e_hi}]: {count_lo} -> {count_hi} roots, a root crosses the price interval edge"
            )),
            Transition::Unrefined { e_lo, e_hi, count_lo, count_hi, reason } => {
                unrefined += 1;
                notes.push(format!(
                    "unrefined transition in [{e_lo}, {e_hi}]: {count_lo} -> {count_hi} roots: {reason}"
                ));
            }
        }
    }
    Ok(BifurcationOutput {
        locus: Table {
            header: &["E", "p_star", "stability"],
            rows: locus,
        },
        thresholds: Table {
            header: &["E_bar", "s_bar", "res_H", "res_dHds"],
            rows: thresholds,
        },
        notes,
        unrefined,
    })
}

fn education_path(sc: &Scenario, e: Option<f64>) -> Result<Series, CliError> {
    Ok(match e {
        Some(e) => Series::Constant(check_e(e)?),
        None => sc.simulation.education.clone(),
    })
}

pub fn simulate(sc: &Scenario, e: Option<f64>) -> Result<Table, CliError> {
    let sim = &sc.simulation;
    let path = simulate_path(
        &sc.preferences,
        &sc.learning,
        &sim.initial_state()?,
        &education_path(sc, e)?,
        &sim.income,
        sim.horizon,
    )?;
    let rows = path
        .rows
        .iter()
        .map(|r| {
            let h = r.household;
            vec![
                r.t.to_string(),
                num(r.p),
                num(r.s_q),
                num(r.a_h),
                num(r.a_l),
                opt(h.map(|h| h.c_l)),
                opt(h.map(|h| h.c_h)),
                opt(h.map(|h| h.share_h)),
                opt(h.map(|h| h.utility)),
                flag(h.is_some()).to_string(),
            ]
        })
        .collect();
    Ok(Table {
        header: &[
            "t",
            "p",
            "s_Q",
            "a_H",
            "a_L",
            "c_L",
            "c_H",
            "share_H",
            "utility",
            "interior_flag",
        ],
        rows,
    })
}

pub fn statics(sc: &Scenario, e: f64) -> Result<Table, CliError> {
    let e = check_e(e)?;
    let st = &sc.statics;
    let sched = &sc.preferences;
    let mut rows = Vec::new();
    for y in st.incomes() {
        let b = HouseholdBudget::new(y, st.price_l, st.price_h)?;
        let row = match solve_demand(sched, &b, e) {
            Ok(sol) => {
                let el = match income_elasticities(sched, &b, e) {
                    Ok(el) => Some(el),
                    Err(ModelError::GammaHNonzero(_)) => None,
                    Err(err) => return Err(err.into()),
                };
                let d = dshare_h_de(sched, &b, e)?;
                vec![
                    num(y),
                    num(sol.share_h),
                    num(sol.share_l),
                    opt(el.map(|x| x.eta_h)),
                    opt(el.map(|x| x.eta_l)),
                    num(d.value),
                    "1".to_string(),
                ]
            }
            Err(ModelError::NonInteriorBudget { .. }) => {
                let mut r = vec![num(y)];
                r.extend(std::iter::repeat_n(String::new(), 5));
                r.push("0".to_string());
                r
            }
            Err(err) => return Err(err.into()),
        };
        rows.push(row);
    }
    Ok(Table {
        header: &[
            "Y",
            "share_H",
            "share_L",
            "eta_H",
            "eta_L",
            "dshare_H_dE",
            "interior",
        ],
        rows,
    })
}

pub fn planner_foc(sc: &Scenario, e: Option<f64>) -> Result<Table, CliError> {
    let cfg = sc.planner.config();
    let spec = sc.planner.learning()?;
    let sim = &sc.simulation;
    let path = simulate_path(
        &sc.preferences,
        &spec,
        &sim.initial_state()?,
        &education_path(sc, e)?,
        &sim.income,
        cfg.horizon,
    )?;
    let report = evaluate_foc(
        &sc.preferences,
        &spec,
        &cfg,
        &PlannerPath::from_time_path(&path)?,
    )?;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.t.to_string(),
                num(r.preference_term),
                num(r.spillover_term),
                num(r.shadow_cost),
                num(r.wedge),
                num(r.lambda),
                num(r.eta),
                flag(r.wedge > 0.0).to_string(),
            ]
        })
        .collect();
    Ok(Table {
        header: &[
            "t",
            "preference_term",
            "spillover_term",
            "shadow_cost",
            "wedge",
            "lambda",
            "eta",
            "wedge_positive",
        ],
        rows,
    })
}
