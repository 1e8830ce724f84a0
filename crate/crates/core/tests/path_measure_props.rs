use gifkit_core::families;
use gifkit_core::{mix, PathEvent, PathMeasure, StateSpace, TimeGrid};
use proptest::prelude::*;

fn arb_measure(mode_periodic: bool) -> impl Strategy<Value = PathMeasure> {
    (2usize..6, 2usize..7, 1usize..6, any::<u64>()).prop_map(move |(n, steps, atoms, seed)| {
        let space = StateSpace::circle(n).unwrap();
        let grid = if mode_periodic {
            TimeGrid::periodic(1.0, steps).unwrap()
        } else {
            TimeGrid::window(1.0, steps).unwrap()
        };
        families::random_path_measure(&mut families::rng(seed), space, grid, atoms).unwrap()
    })
}

fn arb_incompressible(periodic: bool) -> impl Strategy<Value = PathMeasure> {
    (2usize..7, 1usize..8, 1usize..4, any::<u64>()).prop_map(move |(n, steps, parts, seed)| {
        let space = StateSpace::circle(n).unwrap();
        let grid = if periodic {
            TimeGrid::periodic(1.0, steps.max(2)).unwrap()
        } else {
            TimeGrid::window(1.0, steps).unwrap()
        };
        families::random_incompressible(&mut families::rng(seed), space, grid, parts).unwrap()
    })
}

/// Marginal masses recomputed by scanning atoms cell by cell.
fn marginal_by_scan(q: &PathMeasure, k: usize) -> Vec<f64> {
    (0..q.space().len())
        .map(|c| {
            q.atoms()
                .iter()
                .filter(|a| a.cells.at(k) == c)
                .map(|a| a.weight)
                .sum()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn condition_and_mix_recombine(q in arb_measure(false), cells in proptest::collection::btree_set(0usize..5, 1..3)) {
        let phi = PathEvent::starts_in(cells.iter().copied().filter(|&c| c < q.space().len()));
        let p = q.event_mass(&phi).unwrap();
        prop_assume!(p > 1e-9 && p < 1.0 - 1e-9);
        let q1 = q.condition(&phi).unwrap();
        let q2 = q.condition(&phi.clone().complement()).unwrap();
        let back = mix(&[q1, q2], &[p, 1.0 - p]).unwrap();
        prop_assert_eq!(back.len(), q.len());
        for (a, b) in back.atoms().iter().zip(q.atoms()) {
            prop_assert_eq!(&a.cells, &b.cells);
            prop_assert!((a.weight - b.weight).abs() <= 1e-15);
        }
    }

    #[test]
    fn shift_group_law(q in arb_measure(true), a in -9i64..9, b in -9i64..9) {
        let n = q.grid().n_steps() as i64;
        let left = q.shift(a).unwrap().shift(b).unwrap();
        let right = q.shift((a + b).rem_euclid(n)).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(q.shift(0).unwrap(), q);
    }

    #[test]
    fn shift_keeps_mass_and_gif_marginals(q in arb_incompressible(true), s in 0i64..8) {
        let shifted = q.shift(s).unwrap();
        prop_assert!((shifted.total_mass() - 1.0).abs() <= 1e-12);
        let m0 = q.marginal_at(0).unwrap();
        for k in 0..q.grid().path_len() {
            prop_assert!(shifted.marginal_at(k).unwrap().tv_distance(&m0) <= 1e-12);
        }
    }

    #[test]
    fn marginals_match_scan(q in arb_measure(false)) {
        for k in 0..q.grid().path_len() {
            let got = q.marginal_at(k).unwrap();
            let scan = marginal_by_scan(&q, k);
            for (a, b) in got.masses().iter().zip(&scan) {
                prop_assert!((a - b).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn incompressibility_is_convex(q1 in arb_incompressible(false), seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let q2 = families::random_incompressible(&mut families::rng(seed), *q1.space(), *q1.grid(), 2).unwrap();
        let m = mix(&[q1, q2], &[lambda, 1.0 - lambda]).unwrap();
        prop_assert!(m.check_incompressible(1e-12).pass);
    }

    #[test]
    fn start_events_keep_mass_under_shift_preimage(q in arb_incompressible(false), c in 0usize..6, s in 0usize..8) {
        let n = q.space().len();
        let phi = PathEvent::starts_in([c % n]);
        let s = s.min(q.grid().last_index());
        let lhs = q.event_mass(&phi.shift_preimage(s, q.grid()).unwrap()).unwrap();
        let rhs = q.event_mass(&phi).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn canonical_form_ignores_input_order(q in arb_measure(false), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut atoms: Vec<(Vec<usize>, f64)> =
            q.atoms().iter().map(|a| (a.cells.cells().to_vec(), a.weight)).collect();
        atoms.shuffle(&mut families::rng(seed));
        let again = PathMeasure::new(*q.space(), *q.grid(), atoms).unwrap();
        prop_assert_eq!(again, q);
    }

    #[test]
    fn json_round_trip(q in arb_measure(false)) {
        let text = serde_json::to_string(&q).unwrap();
        let back: PathMeasure = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, q);
    }
}

#[test]
fn duplicate_atoms_merge() {
    let space = StateSpace::circle(3).unwrap();
    let grid = TimeGrid::window(1.0, 1).unwrap();
    let q = PathMeasure::new(
        space,
        grid,
        [(vec![1, 2], 0.25), (vec![0, 0], 0.5), (vec![1, 2], 0.25)],
    )
    .unwrap();
    assert_eq!(q.len(), 2);
    assert_eq!(q.atoms()[0].cells.cells(), &[0, 0]);
    assert_eq!(q.atoms()[1].weight, 0.5);
}

#[test]
fn serialized_atoms_are_sorted() {
    let space = StateSpace::circle(3).unwrap();
    let grid = TimeGrid::window(1.0, 1).unwrap();
    let q = PathMeasure::new(space, grid, [(vec![2, 2], 0.5), (vec![0, 1], 0.5)]).unwrap();
    let v: serde_json::Value = serde_json::to_value(&q).unwrap();
    assert_eq!(v["atoms"][0]["cells"], serde_json::json!([0, 1]));
    assert_eq!(v["space"]["kind"], "circle");
    assert_eq!(v["grid"]["mode"], "window");
}
