use std::collections::BTreeSet;

use gifkit_core::constructors::{krylov_bogolioubov_average, orbit_measure};
use gifkit_core::families::{self, StructureKind};
use gifkit_core::structure::{
    check_support_ergodicity, decompose, is_ergodic, is_weak_ergodic, lemma53_check, shift_defect,
    strict_invariant_hull, WeakErgodicOptions,
};
use gifkit_core::{mix, PathEvent, PathMeasure, StateSpace, TimeGrid};
use proptest::prelude::*;
use rand::Rng;

fn rotate(path: &[usize], s: usize) -> Vec<usize> {
    let mut r = path.to_vec();
    r.rotate_left(s % path.len());
    r
}

/// Brute-force search for a set of support atoms closed under every
/// rotation with mass strictly between 0 and 1.
fn brute_invariant_subset(q: &PathMeasure) -> Option<Vec<usize>> {
    let atoms: Vec<&[usize]> = q.atoms().iter().map(|a| a.cells.cells()).collect();
    let len = q.grid().path_len();
    assert!(atoms.len() <= 16, "brute force is exponential");
    for mask in 1u32..(1 << atoms.len()) - 1 {
        let members: BTreeSet<Vec<usize>> = (0..atoms.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| atoms[i].to_vec())
            .collect();
        let closed = members
            .iter()
            .all(|p| (0..len).all(|s| members.contains(&rotate(p, s))));
        let mass: f64 = (0..atoms.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| q.atoms()[i].weight)
            .sum();
        if closed && mass > 1e-12 && mass < 1.0 - 1e-12 {
            return Some((0..atoms.len()).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    None
}

/// Cell sets `E` for which conditioning on `{z(0) ∈ E}` and on its complement
/// both give incompressible measures, i.e. admissible splittings.
fn brute_admissible_splits(q: &PathMeasure) -> Vec<Vec<usize>> {
    let n = q.space().len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) - 1 {
        let cells: Vec<usize> = (0..n).filter(|c| mask & (1 << c) != 0).collect();
        let p: f64 = q
            .atoms()
            .iter()
            .filter(|a| cells.contains(&a.cells.at(0)))
            .map(|a| a.weight)
            .sum();
        if p <= 1e-12 || p >= 1.0 - 1e-12 {
            continue;
        }
        let phi = PathEvent::starts_in(cells.iter().copied());
        let q1 = q.condition(&phi).unwrap();
        let q2 = q.condition(&phi.complement()).unwrap();
        if q1.is_incompressible(1e-12) && q2.is_incompressible(1e-12) {
            out.push(cells);
        }
    }
    out
}

/// Shift-invariant measures: full Cesàro averages and mixtures of them.
fn arb_invariant() -> impl Strategy<Value = PathMeasure> {
    (2usize..4, 2usize..5, 1usize..3, any::<u64>()).prop_map(|(n, steps, atoms, seed)| {
        let mut rng = families::rng(seed);
        let space = StateSpace::circle(n).unwrap();
        let grid = TimeGrid::periodic(1.0, steps).unwrap();
        let omega = families::random_path_measure(&mut rng, space, grid, atoms).unwrap();
        krylov_bogolioubov_average(&omega, steps).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ergodic_iff_no_invariant_atom_set(q in arb_invariant()) {
        prop_assume!(q.len() <= 16);
        let verdict = is_ergodic(&q).unwrap();
        let brute = brute_invariant_subset(&q);
        prop_assert_eq!(verdict.ergodic, brute.is_none());
        if let Some(w) = verdict.witness {
            prop_assert_eq!(w.defect, 0.0);
            prop_assert!(w.mass > 0.0 && w.mass < 1.0);
            prop_assert!((q.event_mass(&w.event).unwrap() - w.mass).abs() <= 1e-12);
        }
    }

    #[test]
    fn hull_is_strictly_invariant(q in arb_invariant(), seed in any::<u64>()) {
        let orbits = gifkit_core::structure::shift_orbit_partition(&q).unwrap();
        let mut rng = families::rng(seed);
        let len = q.grid().path_len();
        let n = q.space().len();
        // One orbit plus stray paths off the support: invariant mod q only.
        let mut paths: BTreeSet<Vec<usize>> = orbits[0]
            .atoms
            .iter()
            .map(|&i| q.atoms()[i].cells.cells().to_vec())
            .collect();
        for _ in 0..3 {
            let stray: Vec<usize> = (0..len).map(|_| rng.random_range(0..n)).collect();
            if q.weight_of(&stray) == 0.0 {
                paths.insert(stray);
            }
        }
        let event = PathEvent::paths(paths.iter().cloned());
        prop_assert_eq!(shift_defect(&q, &event).unwrap(), 0.0);
        let hull = strict_invariant_hull(&q, &event).unwrap();
        let PathEvent::Paths(members) = &hull else { panic!("explicit hull") };
        for p in members {
            prop_assert!(paths.contains(p));
            for s in 0..len {
                prop_assert!(members.contains(&rotate(p, s)));
            }
        }
        prop_assert_eq!(q.event_mass(&hull).unwrap(), q.event_mass(&event).unwrap());
    }

    #[test]
    fn start_events_keep_mass(index in 0usize..200, seed in any::<u64>(), s in 0usize..12) {
        let mut rng = families::rng(seed);
        let (_, q) = families::structure_family_member(&mut rng, index).unwrap();
        let n = q.space().len();
        let cells: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        let r = lemma53_check(&q, &cells, s % q.grid().path_len()).unwrap();
        prop_assert!(r.equal);
    }
}

#[test]
fn family_splits_match_brute_scan() {
    let mut rng = families::rng(17);
    let mut seen = BTreeSet::new();
    for index in 0..50 {
        let (kind, q) = families::structure_family_member(&mut rng, index).unwrap();
        assert!(q.is_incompressible(1e-12), "{kind:?}");
        let verdict = is_weak_ergodic(&q, WeakErgodicOptions::default()).unwrap();
        let splits = brute_admissible_splits(&q);
        assert_eq!(verdict.weak_ergodic, splits.is_empty(), "{kind:?} #{index}");
        seen.insert((format!("{kind:?}"), verdict.weak_ergodic));
        if let Some(cells) = verdict.witness {
            assert!(splits.contains(&cells));
            let d = decompose(&q, &cells).unwrap();
            assert!(d.q1.is_incompressible(1e-12) && d.q2.is_incompressible(1e-12));
            let back = mix(&[d.q1.clone(), d.q2.clone()], &[d.p, 1.0 - d.p]).unwrap();
            assert!(back.approx_eq(&q, 1e-15));
        }
        if matches!(
            kind,
            StructureKind::TransitiveCycle | StructureKind::CycleMix | StructureKind::OrbitMeasure
        ) {
            assert!(verdict.weak_ergodic, "{kind:?} visits every cell");
        }
    }
    // The family exercises both outcomes.
    assert!(seen.iter().any(|(_, w)| *w));
    assert!(seen.iter().any(|(_, w)| !*w));
}

#[test]
fn restricted_scan_agrees_on_family() {
    let mut rng = families::rng(23);
    for index in 0..50 {
        let (_, q) = families::structure_family_member(&mut rng, index).unwrap();
        let full = is_weak_ergodic(&q, WeakErgodicOptions::default()).unwrap();
        let restricted = is_weak_ergodic(
            &q,
            WeakErgodicOptions {
                force_restricted: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(full.weak_ergodic, restricted.weak_ergodic);
    }
}

#[test]
fn ergodic_members_are_weak_ergodic_with_ergodic_atoms() {
    let mut rng = families::rng(29);
    let mut ergodic_count = 0;
    for index in 0..100 {
        let (kind, q) = families::structure_family_member(&mut rng, index).unwrap();
        let Ok(verdict) = is_ergodic(&q) else {
            continue;
        };
        if !verdict.ergodic {
            continue;
        }
        ergodic_count += 1;
        assert!(
            is_weak_ergodic(&q, WeakErgodicOptions::default())
                .unwrap()
                .weak_ergodic
        );
        let atoms = check_support_ergodicity(&q).unwrap();
        assert!(atoms.iter().all(|a| a.ergodic), "{kind:?}");
        if kind == StructureKind::OrbitMeasure {
            // The path follows one n-cycle.
            assert!(atoms
                .iter()
                .all(|a| a.cycles == Some(1) && a.period == q.space().len()));
        }
    }
    assert!(ergodic_count >= 20);
}

#[test]
fn mixed_cycles_are_weak_ergodic_but_not_ergodic() {
    let space = StateSpace::circle(3).unwrap();
    let grid = TimeGrid::periodic(6.0, 6).unwrap();
    let forward = orbit_measure(space, grid, vec![0, 1, 2, 0, 1, 2]).unwrap();
    let backward = orbit_measure(space, grid, vec![0, 2, 1, 0, 2, 1]).unwrap();
    let q = mix(&[forward, backward], &[0.5, 0.5]).unwrap();
    assert!(!is_ergodic(&q).unwrap().ergodic);
    assert!(
        is_weak_ergodic(&q, WeakErgodicOptions::default())
            .unwrap()
            .weak_ergodic
    );
    assert!(brute_admissible_splits(&q).is_empty());
}
