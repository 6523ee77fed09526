//! Solver checks against analytic solutions and structural properties.

use std::time::Instant;

use driftbound::geometry::Domain;
use driftbound::scenario::{Constants, Expr, Mode, PFamily, Scenario, SymMatrix};
use driftbound::solver::{simulate, Solver};
use proptest::prelude::*;

fn e(s: &str) -> Expr {
    Expr::parse(s).unwrap()
}

fn interval_scenario(u0: &str, g: &str, f: &str, drift: &str) -> Scenario {
    Scenario {
        domain: Domain::interval(0.0, 1.0).unwrap(),
        mode: Mode::Linear,
        a: SymMatrix::identity(1),
        drift: vec![e(drift)],
        k: None,
        p_family: PFamily::Identity { nonnegative: false },
        f: e(f),
        g: e(g),
        u0: e(u0),
        u_star: 0.0,
        constants: Constants::new(1.0, 1.0),
    }
}

fn heat_error(nodes: usize) -> f64 {
    let sc = interval_scenario("sin(pi*x1)", "0", "0", "0");
    let series = simulate(&sc, &[nodes], 0.1, 0.1).unwrap();
    let exact = (-std::f64::consts::PI.powi(2) * 0.1).exp();
    (series.last().unwrap().max_u - exact).abs()
}

#[test]
fn heat_kernel_decay_and_order() {
    let start = Instant::now();
    let errs: Vec<f64> = [101, 201, 401].iter().map(|&n| heat_error(n)).collect();
    assert!(errs[2] < 2e-3, "{errs:?}");
    let order1 = (errs[0] / errs[1]).log2();
    let order2 = (errs[1] / errs[2]).log2();
    assert!(order1 >= 1.9 && order2 >= 1.9, "orders {order1} {order2} errors {errs:?}");
    eprintln!("heat errors {errs:?}, orders {order1:.3} {order2:.3}, {:?}", start.elapsed());
}

#[test]
fn constant_forcing_stays_below_linear_growth() {
    let sc = interval_scenario("0", "0", "0.7", "0");
    let series = simulate(&sc, &[81], 1.0, 0.05).unwrap();
    for s in &series.samples {
        assert!(s.max_u <= 0.7 * s.t + 2e-3, "{s:?}");
    }
}

#[test]
fn constant_steady_state() {
    let sc = interval_scenario("1", "1", "0", "0");
    let series = simulate(&sc, &[51], 1.0, 0.1).unwrap();
    for s in &series.samples {
        assert_eq!((s.max_u, s.min_u), (1.0, 1.0));
    }
}

#[test]
fn box_heat_decay() {
    let sc = Scenario {
        domain: Domain::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
        mode: Mode::Linear,
        a: SymMatrix::identity(2),
        drift: vec![e("0"), e("0")],
        k: None,
        p_family: PFamily::Identity { nonnegative: false },
        f: e("0"),
        g: e("0"),
        u0: e("sin(pi*x1)*sin(pi*x2)"),
        u_star: 0.0,
        constants: Constants::new(1.0, 2.0),
    };
    let series = simulate(&sc, &[41, 41], 0.05, 0.05).unwrap();
    let exact = (-2.0 * std::f64::consts::PI.powi(2) * 0.05).exp();
    assert!((series.last().unwrap().max_u - exact).abs() < 2e-3);
}

#[test]
fn runs_are_bitwise_deterministic() {
    let sc = interval_scenario("sin(pi*x1) + x1", "x1*cos(t)", "exp(-t)*x1", "2*sin(3*x1 + t)");
    let a = simulate(&sc, &[61], 0.5, 0.05).unwrap();
    let b = simulate(&sc, &[61], 0.5, 0.05).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn boundary_carries_data_at_samples() {
    let sc = interval_scenario("x1", "x1*cos(t) + t", "0", "1");
    let mut solver = Solver::new(&sc, &[31]).unwrap();
    let g = sc.g.clone();
    solver
        .run(0.4, 0.1, |st| {
            for &p in st.grid.boundary() {
                let x = st.grid.coords(p);
                assert_eq!(st.u[p], g.at(x, st.t, 0.0).unwrap());
            }
        })
        .unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn discrete_maximum_principle(
        amp in 0.1..2.0f64,
        freq in 1.0..4.0f64,
        drift in -20.0..20.0f64,
        diff in 0.2..3.0f64,
        gval in -1.0..1.0f64,
    ) {
        let mut sc = interval_scenario(
            &format!("{amp}*sin({freq}*pi*x1) + {gval}"),
            &format!("{gval}"),
            "0",
            &format!("{drift}*cos(x1 + t)"),
        );
        sc.a = SymMatrix::from_upper(1, vec![Expr::constant(diff)]).unwrap();
        let mut solver = Solver::new(&sc, &[41]).unwrap();
        let mut st = solver.initial_state().unwrap();
        let bound_hi = st.stats().max_u;
        let bound_lo = st.stats().min_u;
        for _ in 0..300 {
            let next = solver.advance(&st, None).unwrap();
            let s = next.stats();
            prop_assert!(s.max_u <= bound_hi + 1e-12);
            prop_assert!(s.min_u >= bound_lo - 1e-12);
            st = next;
        }
    }
}
