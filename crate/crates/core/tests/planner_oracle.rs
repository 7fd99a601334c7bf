use demandtier::{
    education_wedge_sign, evaluate_foc, simulate_path, LearningSpec, PlannerConfig, PlannerPath,
    PreferenceSchedule, TechnologyState,
};

const NU: f64 = 0.6;
const PHI: f64 = 0.8;
const CHI: f64 = 1.2;

/// Discounted utility of an education path with `A_L` held at the supplied
/// values and `A_H` following the linear learning law. Written out by hand so
/// it shares nothing with the report's derivation.
fn objective(
    sched: &PreferenceSchedule,
    cfg: &PlannerConfig,
    path: &PlannerPath,
    nu: f64,
    phi: f64,
    education: &[f64],
) -> f64 {
    let mut a_h = path.a_h0;
    let mut total = 0.0;
    for (t, &e) in education.iter().enumerate() {
        let p = path.a_l[t] / a_h;
        let alpha =
            (sched.alpha_base + sched.alpha_slope * e).clamp(sched.alpha_lo, sched.alpha_hi);
        let gamma_l = sched.gamma_l_base * (-sched.gamma_l_decay * e).exp();
        let spend = path.income[t] - cfg.kappa_scale * e.powf(cfg.kappa_curv);
        let b = spend - gamma_l - p * sched.gamma_h;
        let x_l = (1.0 - alpha) * b;
        let x_h = alpha * b / p;
        total += cfg.beta.powi(t as i32) * x_l.powf(1.0 - alpha) * x_h.powf(alpha);
        let s = alpha / (alpha + (1.0 - alpha) * p);
        a_h *= 1.0 + phi * s + nu * e;
    }
    total
}

fn fd_wedges(
    sched: &PreferenceSchedule,
    cfg: &PlannerConfig,
    path: &PlannerPath,
    nu: f64,
    phi: f64,
) -> Vec<f64> {
    let base = &path.education[..cfg.horizon];
    (0..cfg.horizon)
        .map(|t| {
            let h = 1e-5;
            let mut up = base.to_vec();
            let mut dn = base.to_vec();
            up[t] += h;
            dn[t] -= h;
            let d = (objective(sched, cfg, path, nu, phi, &up)
                - objective(sched, cfg, path, nu, phi, &dn))
                / (2.0 * h);
            d / cfg.beta.powi(t as i32)
        })
        .collect()
}

fn small_instance(education: f64) -> (PreferenceSchedule, PlannerConfig, PlannerPath) {
    let sched = PreferenceSchedule::default();
    let spec = LearningSpec::linear(NU, PHI, CHI).unwrap();
    let cfg = PlannerConfig::default();
    let st = TechnologyState::new(1.0, 3.0, 1.0).unwrap();
    let sim = simulate_path(
        &sched,
        &spec,
        &st,
        &education.into(),
        &10.0.into(),
        cfg.horizon,
    )
    .unwrap();
    (sched, cfg, PlannerPath::from_time_path(&sim).unwrap())
}

#[test]
fn wedges_match_objective_gradient() {
    for e in [0.1, 0.3, 0.8] {
        let (sched, cfg, path) = small_instance(e);
        let spec = LearningSpec::linear(NU, PHI, CHI).unwrap();
        let rep = evaluate_foc(&sched, &spec, &cfg, &path).unwrap();
        let fd = fd_wedges(&sched, &cfg, &path, NU, PHI);
        for (row, g) in rep.rows.iter().zip(&fd) {
            assert!(
                (row.wedge - g).abs() <= 1e-4 * g.abs(),
                "E = {e}, t = {}: {} vs {g}",
                row.t,
                row.wedge
            );
        }
        let signs = education_wedge_sign(&rep);
        let fd_signs: Vec<bool> = fd.iter().map(|g| *g > 0.0).collect();
        assert_eq!(signs, fd_signs);
    }
}

#[test]
fn wedges_match_with_spillovers_off() {
    let (sched, cfg, path) = small_instance(0.3);
    let spec = LearningSpec::linear_diagnostic(0.0, 0.0, CHI).unwrap();
    let rep = evaluate_foc(&sched, &spec, &cfg, &path).unwrap();
    let fd = fd_wedges(&sched, &cfg, &path, 0.0, 0.0);
    for (row, g) in rep.rows.iter().zip(&fd) {
        assert_eq!(row.spillover_term, 0.0);
        assert!((row.wedge - g).abs() <= 1e-4 * g.abs());
    }
}

#[test]
fn costate_is_positive_before_the_last_period() {
    let (sched, cfg, path) = small_instance(0.3);
    let spec = LearningSpec::linear(NU, PHI, CHI).unwrap();
    let rep = evaluate_foc(&sched, &spec, &cfg, &path).unwrap();

    // Continuation value rises with A_H: bump A_H0 and re-evaluate periods 1..
    let bump = |da: f64| {
        let mut p = path.clone();
        p.a_h0 += da;
        let e = &p.education[..cfg.horizon];
        objective(&sched, &cfg, &p, NU, PHI, e)
    };
    assert!(bump(1e-4) > bump(-1e-4));

    let last = rep.rows.len() - 1;
    for row in &rep.rows[..last] {
        assert!(row.eta > 0.0);
        assert!(row.spillover_term > 0.0);
    }
    assert_eq!(rep.rows[last].eta, 0.0);
}

#[test]
fn lower_discount_factor_shrinks_spillovers() {
    let (sched, cfg, path) = small_instance(0.3);
    let spec = LearningSpec::linear(NU, PHI, CHI).unwrap();
    let mut prev: Option<Vec<f64>> = None;
    for beta in [0.99, 0.9, 0.7, 0.4, 0.1] {
        let c = PlannerConfig { beta, ..cfg };
        let rep = evaluate_foc(&sched, &spec, &c, &path).unwrap();
        let spill: Vec<f64> = rep.rows.iter().map(|r| r.spillover_term.abs()).collect();
        if let Some(p) = &prev {
            for (a, b) in spill.iter().zip(p) {
                assert!(a <= b);
            }
        }
        prev = Some(spill);
    }
}

#[test]
fn longer_horizon_still_matches() {
    let sched = PreferenceSchedule::default();
    let spec = LearningSpec::linear(NU, PHI, CHI).unwrap();
    let cfg = PlannerConfig {
        horizon: 8,
        beta: 0.9,
        ..PlannerConfig::default()
    };
    let st = TechnologyState::new(1.0, 2.0, 1.0).unwrap();
    let edu: Vec<f64> = (0..8).map(|t| 0.2 + 0.05 * t as f64).collect();
    let inc: Vec<f64> = (0..8).map(|t| 8.0 + t as f64).collect();
    let sim = simulate_path(&sched, &spec, &st, &edu.into(), &inc.into(), 8).unwrap();
    let path = PlannerPath::from_time_path(&sim).unwrap();
    let rep = evaluate_foc(&sched, &spec, &cfg, &path).unwrap();
    let fd = fd_wedges(&sched, &cfg, &path, NU, PHI);
    for (row, g) in rep.rows.iter().zip(&fd) {
        assert!((row.wedge - g).abs() <= 1e-4 * g.abs().max(1e-3));
    }
}
