use std::f64::consts::PI;

use gifkit_core::constructors::{
    from_classical_flow, krylov_bogolioubov_average, stopping_index, stopping_rotation,
    DiscreteClassicalFlow,
};
use gifkit_core::families;
use gifkit_core::{Error, Marginal, Observable, PathEvent, PathMeasure, StateSpace, TimeGrid};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `∫ f(z(t)) dq = ∫ f dμ` at every grid time, for flows induced by
    /// random bijections.
    #[test]
    fn induced_flows_keep_every_observable_integral(n in 2usize..9, steps in 1usize..10, seed in any::<u64>()) {
        let mut rng = families::rng(seed);
        let space = StateSpace::circle(n).unwrap();
        let grid = TimeGrid::window(1.0, steps).unwrap();
        let h = families::random_bijection(&mut rng, n);
        let flow = DiscreteClassicalFlow::step_map(space, h).unwrap();
        let mu = Marginal::uniform(n);
        let q = from_classical_flow(&flow, &mu, grid).unwrap();
        let f = Observable::new((0..n).map(|c| (c as f64 * 1.7).sin()).collect()).unwrap();
        let target = f.integrate(&mu);
        for k in 0..grid.path_len() {
            let along: f64 = q.atoms().iter().map(|a| a.weight * f.at(a.cells.at(k))).sum();
            prop_assert!((along - target).abs() <= 1e-12);
        }
    }

    #[test]
    fn non_injective_maps_rejected(n in 2usize..9, seed in any::<u64>()) {
        let mut rng = families::rng(seed);
        let space = StateSpace::circle(n).unwrap();
        let grid = TimeGrid::window(1.0, 3).unwrap();
        let flow = DiscreteClassicalFlow::step_map(space, families::random_non_bijection(&mut rng, n)).unwrap();
        let is_not_preserving = matches!(
            from_classical_flow(&flow, &Marginal::uniform(n), grid),
            Err(Error::NotMeasurePreserving { .. })
        );
        prop_assert!(is_not_preserving);
        prop_assert!(!families::perturbed_flow_measure(&mut rng, space, grid).unwrap().is_incompressible(1e-12));
    }

    /// `|q_n(Γ^{-s}A) − q_n(A)| ≤ 2s/n` for single-time cylinders, with the
    /// left side recomputed by rotating atoms directly.
    #[test]
    fn cesaro_defect_bound(n_cells in 2usize..5, steps in 2usize..8, atoms in 1usize..4, seed in any::<u64>()) {
        let mut rng = families::rng(seed);
        let space = StateSpace::circle(n_cells).unwrap();
        let grid = TimeGrid::periodic(1.0, steps).unwrap();
        let omega = families::random_path_measure(&mut rng, space, grid, atoms).unwrap();
        for n in 1..=steps {
            let qn = krylov_bogolioubov_average(&omega, n).unwrap();
            for s in 1..=4usize.min(steps) {
                for t in 0..steps {
                    for c in 0..n_cells {
                        let a = PathEvent::at_time(t, [c]);
                        let direct: f64 = qn
                            .atoms()
                            .iter()
                            .filter(|x| x.cells.at((t + s) % steps) == c)
                            .map(|x| x.weight)
                            .sum();
                        let lhs = qn.event_mass(&a.shift_preimage(s, &grid).unwrap()).unwrap();
                        prop_assert!((lhs - direct).abs() <= 1e-12);
                        let defect = (lhs - qn.event_mass(&a).unwrap()).abs();
                        prop_assert!(defect <= 2.0 * s as f64 / n as f64 + 1e-12);
                        if n == steps {
                            prop_assert_eq!(defect, 0.0);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn stopping_rotation_reference_case() {
    let space = StateSpace::circle(8).unwrap();
    let grid = TimeGrid::window(PI, 16).unwrap();
    let q = stopping_rotation(space, grid).unwrap();
    let report = q.check_incompressible(0.0);
    assert_eq!(report.max_tv_deviation, 0.0);
    for k in 0..=16 {
        assert!(q
            .marginal_at(k)
            .unwrap()
            .masses()
            .iter()
            .all(|&m| m == 0.125));
    }
    // A quarter turn is two cells.
    for a in q.atoms() {
        assert_eq!(a.cells.at(16), (a.cells.at(0) + 2) % 8);
    }
    let frozen = stopping_index(&space, &grid);
    assert_eq!(frozen, 8);
    for a in q.atoms() {
        assert!(a.cells.cells()[frozen..]
            .iter()
            .all(|&c| c == a.cells.at(frozen)));
    }
}

#[test]
fn stopping_rotation_never_returns() {
    // Direct scan: no atom is back in its starting cell at any time at or
    // after one cell width.
    for (n, horizon, steps) in [(8, PI, 16), (16, 4.0, 64), (12, 3.0, 30)] {
        let space = StateSpace::circle(n).unwrap();
        let grid = TimeGrid::window(horizon, steps).unwrap();
        let q = stopping_rotation(space, grid).unwrap();
        let from = (0..=steps)
            .find(|&k| grid.time(k) >= space.cell_width())
            .unwrap();
        let revisiting: f64 = q
            .atoms()
            .iter()
            .filter(|a| a.cells.cells()[from..].contains(&a.cells.at(0)))
            .map(|a| a.weight)
            .sum();
        assert_eq!(revisiting, 0.0, "n={n}");
        assert!(q.is_incompressible(1e-12));
    }
}

#[test]
fn stopping_rotation_needs_long_horizon() {
    let space = StateSpace::circle(8).unwrap();
    let grid = TimeGrid::window(1.5, 6).unwrap();
    assert!(matches!(
        stopping_rotation(space, grid),
        Err(Error::HorizonTooShort { .. })
    ));
}

#[test]
fn full_average_of_rotation_path() {
    let space = StateSpace::circle(4).unwrap();
    let grid = TimeGrid::periodic(4.0, 4).unwrap();
    let omega = PathMeasure::dirac(space, grid, vec![0, 1, 2, 3]).unwrap();
    let q = krylov_bogolioubov_average(&omega, 4).unwrap();
    assert_eq!(q.len(), 4);
    assert!(q.atoms().iter().all(|a| a.weight == 0.25));
    assert_eq!(q.shift(1).unwrap(), q);
}
