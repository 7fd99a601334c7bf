use demandtier::bifurcation::Transition;
use demandtier::{
    find_fixed_points, h_ratio, price_map, refine_saddle_node, simulate_path, sweep, LearningSpec,
    PreferenceSchedule, SolverConfig, Stability, SweepConfig, TechnologyState,
};

const FIXED_POINTS_GOLDEN: &str = include_str!("data/fixed_points_golden.csv");
const SADDLE_GOLDEN: &str = include_str!("data/saddle_nodes_golden.csv");

fn scenario() -> (PreferenceSchedule, LearningSpec) {
    (PreferenceSchedule::default(), LearningSpec::default())
}

fn golden_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

/// Straight-line map written without the crate's helpers.
fn oracle_map(p: f64, e: f64) -> f64 {
    let alpha = (0.78 + 0.16 * e).clamp(0.60, 0.97);
    let s = alpha / (alpha + (1.0 - alpha) * p);
    let u = 1.0 - s;
    let g_h = 1.0 + 0.6 * e + 0.8 * s - s * s * s;
    let g_l = 1.0 + 1.2 * u - 1.5 * u * u * u;
    p * g_l / g_h
}

/// Dense-grid (10⁶ points) bracketing with plain bisection.
fn oracle_roots(e: f64) -> Vec<f64> {
    let n = 1_000_000;
    let (lo, hi) = (0.01, 14.0);
    let f = |p: f64| oracle_map(p, e) - p;
    let mut roots = Vec::new();
    let mut p0 = lo;
    let mut f0 = f(p0);
    for i in 1..n {
        let p1 = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let f1 = f(p1);
        if (f0 < 0.0) != (f1 < 0.0) {
            let (mut a, mut b, mut fa) = (p0, p1, f0);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if (fm < 0.0) == (fa < 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        p0 = p1;
        f0 = f1;
    }
    roots
}

#[test]
fn root_structure_matches_three_panels() {
    let (sched, spec) = scenario();
    let cfg = SolverConfig::default();

    let low = find_fixed_points(&sched, &spec, 0.145, &cfg);
    assert_eq!(low.len(), 1);
    assert_eq!(low[0].stability, Stability::Stable);

    let mid = find_fixed_points(&sched, &spec, 0.215, &cfg);
    let classes: Vec<_> = mid.iter().map(|r| r.stability).collect();
    assert_eq!(
        classes,
        [Stability::Stable, Stability::Unstable, Stability::Stable]
    );

    let high = find_fixed_points(&sched, &spec, 0.280, &cfg);
    assert_eq!(high.len(), 1);
    assert_eq!(high[0].stability, Stability::Stable);
}

#[test]
fn roots_match_frozen_golden_values() {
    let (sched, spec) = scenario();
    let cfg = SolverConfig::default();
    let golden = golden_rows(FIXED_POINTS_GOLDEN);
    for e in [0.145, 0.215, 0.28] {
        let expected: Vec<&Vec<f64>> = golden.iter().filter(|r| r[0] == e).collect();
        let got = find_fixed_points(&sched, &spec, e, &cfg);
        assert_eq!(got.len(), expected.len(), "E = {e}");
        for (g, x) in got.iter().zip(expected) {
            // Bisection stops once |T(p) − p| ≤ tol·max(1, p), which pins p*
            // only to within that bound divided by |1 − T'|.
            let p_tol = 2.0 * cfg.bisect_tol * x[1].max(1.0) / (1.0 - x[3]).abs();
            assert!((g.p_star - x[1]).abs() <= p_tol, "p* at E = {e}");
            assert!((g.s_star - x[2]).abs() <= 1e-10, "s* at E = {e}");
            assert!((g.t_prime - x[3]).abs() <= 1e-8, "T' at E = {e}");
        }
    }
}

#[test]
fn roots_match_dense_grid_oracle() {
    let (sched, spec) = scenario();
    let cfg = SolverConfig::default();
    for e in [0.145, 0.18, 0.215, 0.28] {
        let oracle = oracle_roots(e);
        let got = find_fixed_points(&sched, &spec, e, &cfg);
        assert_eq!(got.len(), oracle.len(), "E = {e}");
        for (g, o) in got.iter().zip(&oracle) {
            assert!((g.p_star - o).abs() <= 1e-9 * o.max(1.0));
        }
    }
}

#[test]
fn refining_the_grid_never_loses_roots() {
    let (sched, spec) = scenario();
    for e in [0.1, 0.145, 0.17, 0.215, 0.235, 0.28, 0.4] {
        let mut cfg = SolverConfig {
            grid_points: 501,
            ..SolverConfig::default()
        };
        let mut last = find_fixed_points(&sched, &spec, e, &cfg).len();
        for _ in 0..5 {
            cfg.grid_points = 2 * cfg.grid_points - 1;
            let n = find_fixed_points(&sched, &spec, e, &cfg).len();
            assert!(
                n >= last,
                "E = {e}: {n} < {last} at {} points",
                cfg.grid_points
            );
            last = n;
        }
    }
}

#[test]
fn analytic_slope_and_fixed_point_characterisations_agree() {
    let (sched, spec) = scenario();
    let cfg = SolverConfig::default();
    for e in [0.145, 0.215, 0.28] {
        for r in find_fixed_points(&sched, &spec, e, &cfg) {
            let h = 1e-6 * r.p_star;
            let fd = (price_map(&sched, &spec, r.p_star + h, e).unwrap()
                - price_map(&sched, &spec, r.p_star - h, e).unwrap())
                / (2.0 * h);
            assert!((r.t_prime - fd).abs() <= 1e-5 * fd.abs());
            let hr = h_ratio(&spec, r.s_star, e).unwrap();
            assert!((hr.h - 1.0).abs() <= 1e-10);
            let t = price_map(&sched, &spec, r.p_star, e).unwrap();
            assert!((t - r.p_star).abs() <= cfg.bisect_tol * r.p_star.max(1.0));
        }
    }
}

#[test]
fn basins_around_each_root() {
    let (sched, spec) = scenario();
    let cfg = SolverConfig::default();
    let offset = 10.0 * cfg.dedup_tol;
    for e in [0.145, 0.215, 0.28] {
        for r in find_fixed_points(&sched, &spec, e, &cfg) {
            for sign in [-1.0, 1.0] {
                let st = TechnologyState::new(1.0, r.p_star + sign * offset, 1.0).unwrap();
                let path = simulate_path(&sched, &spec, &st, &e.into(), &10.0.into(), 500).unwrap();
                let gap = (path.last().unwrap().p - r.p_star).abs();
                match r.stability {
                    Stability::Stable => assert!(gap < 1e-6, "E = {e}, p* = {}", r.p_star),
                    Stability::Unstable => assert!(gap > 1e-3, "E = {e}, p* = {}", r.p_star),
                    Stability::Marginal => unreachable!(),
                }
            }
        }
    }
}

#[test]
fn fixed_point_start_stays_put() {
    let (sched, spec) = scenario();
    let r = find_fixed_points(&sched, &spec, 0.28, &SolverConfig::default())[0];
    let st = TechnologyState::new(1.0, r.p_star, 1.0).unwrap();
    let path = simulate_path(&sched, &spec, &st, &0.28.into(), &10.0.into(), 200).unwrap();
    for row in &path.rows {
        assert!((row.p - r.p_star).abs() <= 1e-10);
    }
}

#[test]
fn simulation_converges_to_the_unique_stable_root() {
    let (sched, spec) = scenario();
    let roots = find_fixed_points(&sched, &spec, 0.28, &SolverConfig::default());
    let st = TechnologyState::new(1.0, 5.0, 1.0).unwrap();
    // |T'| ≈ 0.974 here, so the gap from p₀ = 5 falls below 1e-6 only after
    // roughly 510 periods.
    let path = simulate_path(&sched, &spec, &st, &0.28.into(), &10.0.into(), 600).unwrap();
    assert_eq!(roots.len(), 1);
    assert!((path.last().unwrap().p - roots[0].p_star).abs() < 1e-6);
}

#[test]
fn saddle_nodes_match_golden_and_sit_inside_brackets() {
    let (sched, spec) = scenario();
    let diagram = sweep(
        &sched,
        &spec,
        &SweepConfig::default(),
        &SolverConfig::default(),
    );
    assert_eq!(diagram.rows.len(), 81);
    let golden = golden_rows(SADDLE_GOLDEN);
    let nodes: Vec<_> = diagram
        .transitions
        .iter()
        .filter_map(|t| match t {
            Transition::SaddleNode { e_lo, e_hi, node } => Some((*e_lo, *e_hi, *node)),
            _ => None,
        })
        .collect();
    assert_eq!(nodes.len(), golden.len());
    for ((lo, hi, node), g) in nodes.iter().zip(&golden) {
        assert!(*lo < node.e_bar && node.e_bar < *hi);
        assert!(node.res_h <= 1e-8 && node.res_dh_ds <= 1e-8);
        assert!((node.e_bar - g[0]).abs() < 1e-10);
        assert!((node.s_bar - g[1]).abs() < 1e-9);
    }
    assert!(nodes[0].2.e_bar > 0.145 && nodes[0].2.e_bar < 0.215);
    assert!(nodes[1].2.e_bar > 0.215 && nodes[1].2.e_bar < 0.280);
    assert_eq!(diagram.unrefined().count(), 0);
}

#[test]
fn other_transitions_are_boundary_crossings() {
    let (sched, spec) = scenario();
    let diagram = sweep(
        &sched,
        &spec,
        &SweepConfig::default(),
        &SolverConfig::default(),
    );
    for t in &diagram.transitions {
        if let Transition::Boundary {
            count_lo, count_hi, ..
        } = t
        {
            assert_eq!(count_lo.abs_diff(*count_hi), 1);
        }
    }
    // every count change is accounted for
    let changes = diagram
        .rows
        .windows(2)
        .filter(|w| w[0].roots.len() != w[1].roots.len())
        .count();
    assert_eq!(changes, diagram.transitions.len());
}

#[test]
fn upper_fold_removes_the_low_share_root() {
    let (sched, spec) = scenario();
    let diagram = sweep(
        &sched,
        &spec,
        &SweepConfig::default(),
        &SolverConfig::default(),
    );
    let upper = diagram.thresholds()[1];
    let before = diagram.rows.iter().rfind(|r| r.e < upper.e_bar).unwrap();
    let after = diagram.rows.iter().find(|r| r.e > upper.e_bar).unwrap();
    assert_eq!(before.roots.len(), 3);
    assert_eq!(after.roots.len(), 1);
    // The fold share lies between the unstable middle root and the low-share
    // (high-price) stable root; the survivor is the high-share root.
    let (hi_s, mid_s, lo_s) = (
        before.roots[0].s_star,
        before.roots[1].s_star,
        before.roots[2].s_star,
    );
    assert!(lo_s < upper.s_bar && upper.s_bar < mid_s);
    assert!(after.roots[0].s_star > hi_s);

    // Lower fold creates the high-share pair instead.
    let lower = diagram.thresholds()[0];
    let after = diagram.rows.iter().find(|r| r.e > lower.e_bar).unwrap();
    assert!(after.roots[1].s_star < lower.s_bar && lower.s_bar < after.roots[0].s_star);
}

#[test]
fn single_low_price_stable_root_above_the_upper_fold() {
    let (sched, spec) = scenario();
    let diagram = sweep(
        &sched,
        &spec,
        &SweepConfig::default(),
        &SolverConfig::default(),
    );
    let e_bar = diagram.thresholds()[1].e_bar;
    for row in diagram.rows.iter().filter(|r| r.e > e_bar) {
        // Above ~0.4 the remaining root exits through p_min.
        if row.roots.is_empty() {
            continue;
        }
        assert_eq!(row.roots.len(), 1);
        assert_eq!(row.roots[0].stability, Stability::Stable);
        assert!(row.roots[0].p_star < 1.0);
    }
}

#[test]
fn sweep_is_identical_across_thread_counts() {
    let (sched, spec) = scenario();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                sweep(
                    &sched,
                    &spec,
                    &SweepConfig::default(),
                    &SolverConfig::default(),
                )
            })
    };
    let one = run(1);
    let many = run(4);
    assert_eq!(format!("{one:?}"), format!("{many:?}"));
    assert_eq!(format!("{one:?}"), format!("{:?}", run(1)));
}

#[test]
fn denser_education_grid_confirms_thresholds() {
    let (sched, spec) = scenario();
    let dense = SweepConfig {
        e_points: 801,
        ..SweepConfig::default()
    };
    let coarse = sweep(
        &sched,
        &spec,
        &SweepConfig::default(),
        &SolverConfig::default(),
    );
    let fine = sweep(&sched, &spec, &dense, &SolverConfig::default());
    let a = coarse.thresholds();
    let b = fine.thresholds();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x.e_bar - y.e_bar).abs() < 1e-10);
    }
    // Root count flips in the fine grid bracket the refined thresholds within one step.
    let step = (dense.e_max - dense.e_min) / (dense.e_points - 1) as f64;
    for node in &a {
        let flip = fine
            .rows
            .windows(2)
            .find(|w| w[0].e < node.e_bar && node.e_bar < w[1].e)
            .unwrap();
        assert_ne!(flip[0].roots.len(), flip[1].roots.len());
        assert!(flip[1].e - flip[0].e <= step * (1.0 + 1e-9));
    }
}

#[test]
fn refine_from_explicit_bracket() {
    let spec = LearningSpec::default();
    let node = refine_saddle_node(&spec, (0.145, 0.215), 0.8, 1e-8).unwrap();
    assert!(node.e_bar > 0.145 && node.e_bar < 0.215);
}
