//! Invariant events, ergodicity and convex structure.
//!
//! Every decision here is made on the support of the measure: events that
//! differ only off the support have the same mass under `q`, so the finite
//! support σ-algebra carries all the information.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, stable_sum};
use crate::path_measure::{PathEvent, PathMeasure, WEIGHT_TOL};

/// Largest cell count for which weak ergodicity is decided by scanning every
/// cell subset.
pub const EXHAUSTIVE_SCAN_CELLS: usize = 16;

/// An event together with its shift defect and mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantWitness {
    pub event: PathEvent,
    /// `max_s q(Γ^s Φ △ Φ)`.
    pub defect: f64,
    pub mass: f64,
}

/// Shift orbit of support atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    /// Indices into `q.atoms()`, ascending.
    pub atoms: Vec<usize>,
    pub mass: f64,
}

fn require_shift_invariant(q: &PathMeasure) -> Result<()> {
    q.grid().require_periodic()?;
    let shifted = q.shift(1)?;
    if shifted.approx_eq(q, WEIGHT_TOL) {
        Ok(())
    } else {
        Err(Error::NotShiftInvariant {
            defect: shifted.max_weight_gap(q).max(f64::MIN_POSITIVE),
        })
    }
}

/// `max_s q(Γ^s Φ △ Φ)` over all grid shifts of a periodic measure.
pub fn shift_defect(q: &PathMeasure, event: &PathEvent) -> Result<f64> {
    q.grid().require_periodic()?;
    event.validate(q.grid())?;
    let n = q.grid().path_len();
    let defects = par::map_range(n, |s| {
        stable_sum(
            q.atoms()
                .iter()
                .filter(|a| {
                    // z ∈ Γ^s Φ  ⇔  Γ^{-s} z ∈ Φ.
                    let back = a.cells.rotated(n - s);
                    event.contains(back.cells()) != event.contains(a.cells.cells())
                })
                .map(|a| a.weight)
                .collect(),
        )
    });
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// Groups support atoms into orbits of the shift. Requires an exactly
/// shift-invariant periodic measure.
pub fn shift_orbit_partition(q: &PathMeasure) -> Result<Vec<Orbit>> {
    require_shift_invariant(q)?;
    let n = q.grid().path_len();
    let index_of = |cells: &[usize]| {
        q.atoms()
            .binary_search_by(|a| a.cells.cells().cmp(cells))
            .ok()
    };
    let mut assigned = vec![false; q.len()];
    let mut orbits = Vec::new();
    for i in 0..q.len() {
        if assigned[i] {
            continue;
        }
        let mut members = BTreeSet::new();
        for s in 0..n {
            let rotated = q.atoms()[i].cells.rotated(s);
            let j = index_of(rotated.cells()).expect("support is shift-closed");
            members.insert(j);
        }
        for &j in &members {
            assigned[j] = true;
        }
        let atoms: Vec<usize> = members.into_iter().collect();
        let mass = stable_sum(atoms.iter().map(|&j| q.atoms()[j].weight).collect());
        orbits.push(Orbit { atoms, mass });
    }
    Ok(orbits)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicVerdict {
    pub ergodic: bool,
    pub orbit_count: usize,
    /// A shift-invariant event of mass strictly between 0 and 1.
    pub witness: Option<InvariantWitness>,
}

fn orbit_event(q: &PathMeasure, orbit: &Orbit) -> PathEvent {
    PathEvent::paths(
        orbit
            .atoms
            .iter()
            .map(|&i| q.atoms()[i].cells.cells().to_vec()),
    )
}

/// Ergodic iff the support is a single shift orbit.
pub fn is_ergodic(q: &PathMeasure) -> Result<ErgodicVerdict> {
    let orbits = shift_orbit_partition(q)?;
    let witness = if orbits.len() > 1 {
        let event = orbit_event(q, &orbits[0]);
        Some(InvariantWitness {
            defect: shift_defect(q, &event)?,
            mass: orbits[0].mass,
            event,
        })
    } else {
        None
    };
    Ok(ErgodicVerdict {
        ergodic: orbits.len() == 1,
        orbit_count: orbits.len(),
        witness,
    })
}

/// The strictly invariant event `F = ∩_s Γ^s B` for an event `B` that is
/// invariant up to `q`-null sets.
///
/// `F` is returned as an explicit set of paths. Paths off the shift orbits of
/// the support are dropped unless `B` lists them explicitly; they are
/// `q`-null either way.
pub fn strict_invariant_hull(q: &PathMeasure, event: &PathEvent) -> Result<PathEvent> {
    require_shift_invariant(q)?;
    let defect = shift_defect(q, event)?;
    if defect > 0.0 {
        return Err(Error::Precondition(format!(
            "event is not invariant mod q (defect {defect:e})"
        )));
    }
    let n = q.grid().path_len();
    let mut candidates: BTreeSet<Vec<usize>> =
        q.atoms().iter().map(|a| a.cells.cells().to_vec()).collect();
    if let PathEvent::Paths(explicit) = event {
        candidates.extend(explicit.iter().cloned());
    }
    let hull = candidates.into_iter().filter(|z| {
        (0..n).all(|s| {
            let mut r = z.clone();
            r.rotate_left(s);
            event.contains(&r)
        })
    });
    Ok(PathEvent::paths(hull))
}

/// Cells visited by each positively weighted atom, as sorted cell lists.
fn atom_images(q: &PathMeasure) -> Vec<Vec<usize>> {
    q.atoms()
        .iter()
        .map(|a| {
            let set: BTreeSet<usize> = a.cells.cells().iter().copied().collect();
            set.into_iter().collect()
        })
        .collect()
}

/// Whether `{z(0) ∈ E}` coincides with `{z(t) ∈ E}` on the support for every
/// grid time, i.e. every atom stays entirely inside or entirely outside `E`.
pub fn is_start_event_invariant(q: &PathMeasure, cells: &[usize]) -> bool {
    let mut in_set = vec![false; q.space().len()];
    for &c in cells {
        if c < in_set.len() {
            in_set[c] = true;
        }
    }
    q.atoms().iter().all(|a| {
        let first = in_set[a.cells.at(0)];
        a.cells.cells().iter().all(|&c| in_set[c] == first)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    /// Every subset of cells.
    Exhaustive,
    /// Unions of the classes of cells linked by support paths.
    Restricted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakErgodicVerdict {
    pub weak_ergodic: bool,
    /// Cells `E` with `{z(0) ∈ E}` invariant and of mass in `(0, 1)`.
    pub witness: Option<Vec<usize>>,
    pub witness_mass: Option<f64>,
    pub scan: ScanKind,
    pub scanned: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WeakErgodicOptions {
    /// Allow the restricted scan when the space exceeds the exhaustive limit.
    pub allow_restricted: bool,
    /// Use the restricted scan even on small spaces.
    pub force_restricted: bool,
}

/// Classes of cells joined by appearing on a common support path. Unvisited
/// cells are omitted. Classes are sorted by smallest cell.
pub fn linked_cell_classes(q: &PathMeasure) -> Vec<Vec<usize>> {
    let n = q.space().len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut visited = vec![false; n];
    for img in atom_images(q) {
        for &c in &img {
            visited[c] = true;
        }
        for w in img.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for c in (0..n).filter(|&c| visited[c]) {
        let r = find(&mut parent, c);
        if slot[r] == usize::MAX {
            slot[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[slot[r]].push(c);
    }
    classes
}

/// Decides weak ergodicity by scanning cell sets `E` for events
/// `{z(0) ∈ E}` that are shift-invariant on the support with mass in
/// `(0, 1)`.
pub fn is_weak_ergodic(q: &PathMeasure, options: WeakErgodicOptions) -> Result<WeakErgodicVerdict> {
    let inc = q.check_incompressible(WEIGHT_TOL);
    if !inc.pass {
        return Err(Error::NotIncompressible {
            deviation: inc.max_tv_deviation,
        });
    }
    let n = q.space().len();
    let exhaustive = n <= EXHAUSTIVE_SCAN_CELLS && !options.force_restricted;
    if !exhaustive && !(options.allow_restricted || options.force_restricted) {
        return Err(Error::ScanTooLarge(format!(
            "{n} cells exceed the exhaustive limit of {EXHAUSTIVE_SCAN_CELLS}"
        )));
    }
    let start_mass = |mask_has: &dyn Fn(usize) -> bool| {
        stable_sum(
            q.atoms()
                .iter()
                .filter(|a| mask_has(a.cells.at(0)))
                .map(|a| a.weight)
                .collect(),
        )
    };
    let nontrivial = |m: f64| m > WEIGHT_TOL && m < 1.0 - WEIGHT_TOL;

    if exhaustive {
        let images: Vec<u32> = atom_images(q)
            .into_iter()
            .map(|img| img.into_iter().fold(0u32, |m, c| m | (1 << c)))
            .collect();
        let total = 1u64 << n;
        // Masks 1..total-1; the empty and full sets have mass 0 and 1.
        let hit = par::find_first((total.saturating_sub(2)) as usize, |i| {
            let e = (i + 1) as u32;
            images.iter().all(|&img| img & e == 0 || img & e == img)
                && nontrivial(start_mass(&|c| e & (1 << c) != 0))
        });
        let witness = hit.map(|i| {
            let e = (i + 1) as u32;
            (0..n).filter(|c| e & (1 << c) != 0).collect::<Vec<_>>()
        });
        let witness_mass = witness
            .as_ref()
            .map(|cells| start_mass(&|c| cells.contains(&c)));
        return Ok(WeakErgodicVerdict {
            weak_ergodic: witness.is_none(),
            witness,
            witness_mass,
            scan: ScanKind::Exhaustive,
            scanned: total,
        });
    }

    let classes = linked_cell_classes(q);
    let k = classes.len();
    if k > 62 {
        return Err(Error::ScanTooLarge(format!("{k} linked classes")));
    }
    let total = 1u64 << k;
    let union_of = |mask: u64| -> Vec<usize> {
        let mut cells: Vec<usize> = (0..k)
            .filter(|j| mask & (1 << j) != 0)
            .flat_map(|j| classes[j].iter().copied())
            .collect();
        cells.sort_unstable();
        cells
    };
    // Every single class is invariant; with two or more classes the first
    // one is already a witness, so the scan stops at mask 1.
    let limit = total.saturating_sub(2).min(1 << 20) as usize;
    let hit = par::find_first(limit, |i| {
        let cells = union_of((i + 1) as u64);
        nontrivial(start_mass(&|c| cells.binary_search(&c).is_ok()))
    });
    let witness = hit.map(|i| union_of((i + 1) as u64));
    let witness_mass = witness
        .as_ref()
        .map(|cells| start_mass(&|c| cells.binary_search(&c).is_ok()));
    Ok(WeakErgodicVerdict {
        weak_ergodic: witness.is_none(),
        witness,
        witness_mass,
        scan: ScanKind::Restricted,
        scanned: hit.map_or(limit as u64, |i| i as u64 + 1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// `p = q(Φ)`.
    pub p: f64,
    /// `q(· | Φ)`.
    pub q1: PathMeasure,
    /// `q(· | Φᶜ)`.
    pub q2: PathMeasure,
}

/// Splits `q = p·q₁ + (1−p)·q₂` along an invariant start event
/// `Φ = {z(0) ∈ E}` with `0 < q(Φ) < 1`.
pub fn decompose(q: &PathMeasure, cells: &[usize]) -> Result<Decomposition> {
    if !is_start_event_invariant(q, cells) {
        return Err(Error::Precondition(
            "start event is not shift-invariant on the support".into(),
        ));
    }
    let phi = PathEvent::starts_in(cells.iter().copied());
    let p = q.event_mass(&phi)?;
    if !(p > 0.0 && p < 1.0) || q.event_mass(&phi.clone().complement())? <= 0.0 {
        return Err(Error::Precondition(format!(
            "event mass {p} is not strictly between 0 and 1"
        )));
    }
    Ok(Decomposition {
        p,
        q1: q.condition(&phi)?,
        q2: q.condition(&phi.complement())?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomErgodicity {
    pub atom: usize,
    /// Minimal period of the cell sequence.
    pub period: usize,
    pub image: Vec<usize>,
    /// Visit frequencies over one period, aligned with `image`.
    pub empirical: Vec<f64>,
    /// Each image cell has a single successor, so the induced cell flow is a
    /// map.
    pub single_valued: bool,
    /// Number of cycles of the induced map (when single valued).
    pub cycles: Option<usize>,
    /// Number of classes of image cells that are invariant under the
    /// successor relation.
    pub invariant_classes: usize,
    /// Marginal mass of the image.
    pub image_mass: f64,
    pub ergodic: bool,
}

/// Per-atom check that the cell flow `z(t₀) ↦ z(t₀ + t)` along each support
/// path is ergodic for its empirical measure, and that the path's image
/// carries the full marginal. Requires an ergodic `q`.
pub fn check_support_ergodicity(q: &PathMeasure) -> Result<Vec<AtomErgodicity>> {
    let verdict = is_ergodic(q)?;
    if !verdict.ergodic {
        return Err(Error::Precondition(format!(
            "measure is not ergodic ({} shift orbits)",
            verdict.orbit_count
        )));
    }
    let mu = q.marginal_at(0)?;
    let n_cells = q.space().len();
    Ok(par::map_range(q.len(), |i| {
        let cells = q.atoms()[i].cells.cells();
        let len = cells.len();
        let period = (1..=len)
            .find(|&p| len % p == 0 && (0..len).all(|k| cells[k] == cells[(k + p) % len]))
            .unwrap_or(len);
        let block = &cells[..period];
        let image: Vec<usize> = block
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let empirical = image
            .iter()
            .map(|c| block.iter().filter(|&&x| x == *c).count() as f64 / period as f64)
            .collect();

        let mut successor = vec![usize::MAX; n_cells];
        let mut single_valued = true;
        let mut parent: Vec<usize> = (0..n_cells).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for k in 0..period {
            let (a, b) = (block[k], block[(k + 1) % period]);
            if successor[a] == usize::MAX {
                successor[a] = b;
            } else if successor[a] != b {
                single_valued = false;
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let roots: BTreeSet<usize> = image.iter().map(|&c| find(&mut parent, c)).collect();
        let invariant_classes = roots.len();
        let cycles = single_valued.then(|| {
            let mut seen = vec![false; n_cells];
            let mut count = 0;
            for &start in &image {
                if !seen[start] {
                    count += 1;
                    let mut c = start;
                    while !seen[c] {
                        seen[c] = true;
                        c = successor[c];
                    }
                }
            }
            count
        });
        let image_mass = mu.mass_of(image.iter().copied());
        AtomErgodicity {
            atom: i,
            period,
            ergodic: invariant_classes == 1 && (image_mass - 1.0).abs() <= WEIGHT_TOL,
            image,
            empirical,
            single_valued,
            cycles,
            invariant_classes,
            image_mass,
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartEventShift {
    /// `q(Γ^{-s}Φ)`.
    pub lhs: f64,
    /// `q(Φ)`.
    pub rhs: f64,
    pub equal: bool,
}

/// Compares `q(Γ^{-s}Φ)` with `q(Φ)` for `Φ = {z(0) ∈ E}`; the two agree
/// for every incompressible `q`.
pub fn lemma53_check(q: &PathMeasure, cells: &[usize], s: usize) -> Result<StartEventShift> {
    let phi = PathEvent::starts_in(cells.iter().copied());
    let lhs = q.event_mass(&phi.shift_preimage(s, q.grid())?)?;
    let rhs = q.event_mass(&phi)?;
    Ok(StartEventShift {
        lhs,
        rhs,
        equal: (lhs - rhs).abs() <= WEIGHT_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{
        from_classical_flow, orbit_measure, stopping_rotation, DiscreteClassicalFlow,
    };
    use crate::path_measure::{mix, Marginal, StateSpace, TimeGrid};
    use std::f64::consts::PI;

    fn periodic(n: usize, steps: usize) -> (StateSpace, TimeGrid) {
        (
            StateSpace::circle(n).unwrap(),
            TimeGrid::periodic(steps as f64, steps).unwrap(),
        )
    }

    #[test]
    fn single_orbit() {
        let (space, grid) = periodic(4, 4);
        let q = orbit_measure(space, grid, vec![0, 1, 2, 3]).unwrap();
        let orbits = shift_orbit_partition(&q).unwrap();
        assert_eq!(orbits.len(), 1);
        assert_eq!(orbits[0].atoms.len(), 4);
        let v = is_ergodic(&q).unwrap();
        assert!(v.ergodic);
        assert!(v.witness.is_none());
    }

    #[test]
    fn two_orbits_not_ergodic() {
        let (space, grid) = periodic(4, 4);
        let a = orbit_measure(space, grid, vec![0, 1, 2, 3]).unwrap();
        let b = orbit_measure(space, grid, vec![0, 0, 1, 1]).unwrap();
        let q = mix(&[a, b], &[0.5, 0.5]).unwrap();
        assert_eq!(shift_orbit_partition(&q).unwrap().len(), 2);
        let v = is_ergodic(&q).unwrap();
        assert!(!v.ergodic);
        let w = v.witness.unwrap();
        assert_eq!(w.mass, 0.5);
        assert_eq!(w.defect, 0.0);
    }

    #[test]
    fn period_two_rotation_splits_even_odd() {
        let (space, grid) = periodic(4, 4);
        let q = from_classical_flow(
            &DiscreteClassicalFlow::rotation(space, 2),
            &Marginal::uniform(4),
            grid,
        )
        .unwrap();
        let orbits = shift_orbit_partition(&q).unwrap();
        assert_eq!(orbits.len(), 2);
        let starts: Vec<BTreeSet<usize>> = orbits
            .iter()
            .map(|o| o.atoms.iter().map(|&i| q.atoms()[i].cells.at(0)).collect())
            .collect();
        assert!(starts.contains(&[0, 2].into_iter().collect()));
        assert!(starts.contains(&[1, 3].into_iter().collect()));
        assert!(!is_ergodic(&q).unwrap().ergodic);
    }

    #[test]
    fn transitive_permutation_is_ergodic() {
        let (space, grid) = periodic(5, 5);
        let flow = DiscreteClassicalFlow::step_map(space, vec![3, 4, 0, 1, 2]).unwrap();
        let q = from_classical_flow(&flow, &Marginal::uniform(5), grid).unwrap();
        assert!(is_ergodic(&q).unwrap().ergodic);
        let per_atom = check_support_ergodicity(&q).unwrap();
        assert!(per_atom.iter().all(|a| a.ergodic && a.cycles == Some(1)));
    }

    #[test]
    fn non_invariant_input_rejected() {
        let (space, grid) = periodic(3, 3);
        let q = PathMeasure::dirac(space, grid, vec![0, 1, 1]).unwrap();
        assert!(matches!(
            shift_orbit_partition(&q),
            Err(Error::NotShiftInvariant { .. })
        ));
        let w =
            PathMeasure::dirac(space, TimeGrid::window(1.0, 2).unwrap(), vec![0, 0, 0]).unwrap();
        assert!(matches!(is_ergodic(&w), Err(Error::Mode { .. })));
    }

    #[test]
    fn hull_drops_null_part() {
        let (space, grid) = periodic(4, 4);
        let a = orbit_measure(space, grid, vec![0, 1, 2, 3]).unwrap();
        let b = orbit_measure(space, grid, vec![0, 0, 1, 1]).unwrap();
        let q = mix(&[a.clone(), b], &[0.5, 0.5]).unwrap();
        let orbit: Vec<Vec<usize>> = a.atoms().iter().map(|x| x.cells.cells().to_vec()).collect();
        let invariant = PathEvent::paths(orbit.clone());
        assert_eq!(strict_invariant_hull(&q, &invariant).unwrap(), invariant);

        let mut noisy = orbit.clone();
        noisy.push(vec![3, 3, 3, 2]);
        let b_event = PathEvent::paths(noisy);
        let f = strict_invariant_hull(&q, &b_event).unwrap();
        assert_eq!(f, invariant);
        assert_eq!(shift_defect(&q, &f).unwrap(), 0.0);
        for s in 0..4 {
            assert_eq!(f.shift_image(s, &grid).unwrap(), f);
        }

        let not_invariant = PathEvent::paths([vec![0, 1, 2, 3]]);
        assert!(strict_invariant_hull(&q, &not_invariant).is_err());
    }

    #[test]
    fn hull_of_cylinder_event() {
        let (space, grid) = periodic(4, 4);
        let q = from_classical_flow(
            &DiscreteClassicalFlow::rotation(space, 2),
            &Marginal::uniform(4),
            grid,
        )
        .unwrap();
        let even = PathEvent::starts_in([0, 2]);
        let f = strict_invariant_hull(&q, &even).unwrap();
        assert_eq!(q.event_mass(&f).unwrap(), 0.5);
        assert!(q
            .atoms()
            .iter()
            .all(|a| f.contains(a.cells.cells()) == even.contains(a.cells.cells())));
    }

    #[test]
    fn weak_ergodic_cases() {
        let (space, grid) = periodic(4, 4);
        let rot = from_classical_flow(
            &DiscreteClassicalFlow::rotation(space, 1),
            &Marginal::uniform(4),
            grid,
        )
        .unwrap();
        assert!(
            is_weak_ergodic(&rot, Default::default())
                .unwrap()
                .weak_ergodic
        );

        // Two ergodic classical flows with the same uniform marginal on
        // disjoint path families: weak ergodic, not ergodic.
        let other = from_classical_flow(
            &DiscreteClassicalFlow::step_map(space, vec![2, 3, 1, 0]).unwrap(),
            &Marginal::uniform(4),
            grid,
        )
        .unwrap();
        let q = mix(&[rot, other], &[0.5, 0.5]).unwrap();
        assert!(!is_ergodic(&q).unwrap().ergodic);
        assert!(
            is_weak_ergodic(&q, Default::default())
                .unwrap()
                .weak_ergodic
        );

        let split = from_classical_flow(
            &DiscreteClassicalFlow::rotation(space, 2),
            &Marginal::uniform(4),
            grid,
        )
        .unwrap();
        let v = is_weak_ergodic(&split, Default::default()).unwrap();
        assert!(!v.weak_ergodic);
        assert_eq!(v.witness, Some(vec![0, 2]));
        assert_eq!(v.witness_mass, Some(0.5));
        let r = is_weak_ergodic(
            &split,
            WeakErgodicOptions {
                allow_restricted: true,
                force_restricted: true,
            },
        )
        .unwrap();
        assert!(!r.weak_ergodic);
        assert_eq!(r.scan, ScanKind::Restricted);
    }

    #[test]
    fn large_space_needs_restricted_scan() {
        let space = StateSpace::circle(20).unwrap();
        let grid = TimeGrid::window(2.0, 2).unwrap();
        let q = from_classical_flow(
            &DiscreteClassicalFlow::identity(space),
            &Marginal::uniform(20),
            grid,
        )
        .unwrap();
        assert!(matches!(
            is_weak_ergodic(&q, Default::default()),
            Err(Error::ScanTooLarge(_))
        ));
        let v = is_weak_ergodic(
            &q,
            WeakErgodicOptions {
                allow_restricted: true,
                force_restricted: false,
            },
        )
        .unwrap();
        assert!(!v.weak_ergodic);
        assert_eq!(v.witness, Some(vec![0]));
    }

    #[test]
    fn decompose_two_constants() {
        let space = StateSpace::circle(4).unwrap();
        let grid = TimeGrid::window(1.0, 2).unwrap();
        let q = PathMeasure::new(space, grid, [(vec![0; 3], 0.5), (vec![1; 3], 0.5)]).unwrap();
        let d = decompose(&q, &[0]).unwrap();
        assert_eq!(d.p, 0.5);
        assert_eq!(d.q1, PathMeasure::dirac(space, grid, vec![0; 3]).unwrap());
        assert_eq!(d.q2, PathMeasure::dirac(space, grid, vec![1; 3]).unwrap());
        assert!(d.q1.is_incompressible(1e-12) && d.q2.is_incompressible(1e-12));
        let back = mix(&[d.q1, d.q2], &[d.p, 1.0 - d.p]).unwrap();
        assert!(back.approx_eq(&q, 1e-12));
        assert!(decompose(&q, &[0, 1]).is_err());
        assert!(decompose(&q, &[2]).is_err());
    }

    #[test]
    fn decompose_rejects_weak_ergodic() {
        let (space, grid) = periodic(4, 4);
        let q = orbit_measure(space, grid, vec![0, 1, 2, 3]).unwrap();
        for mask in 1u32..15 {
            let cells: Vec<usize> = (0..4).filter(|c| mask & (1 << c) != 0).collect();
            assert!(decompose(&q, &cells).is_err());
        }
    }

    #[test]
    fn support_ergodicity_needs_ergodic_input() {
        let (space, grid) = periodic(4, 4);
        let q = from_classical_flow(
            &DiscreteClassicalFlow::rotation(space, 2),
            &Marginal::uniform(4),
            grid,
        )
        .unwrap();
        assert!(matches!(
            check_support_ergodicity(&q),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn start_event_shift_identity() {
        let space = StateSpace::circle(8).unwrap();
        let grid = TimeGrid::window(PI, 16).unwrap();
        let q = stopping_rotation(space, grid).unwrap();
        for c in 0..8 {
            for s in 0..=16 {
                let r = lemma53_check(&q, &[c], s).unwrap();
                assert!(r.equal, "cell {c} shift {s}");
            }
        }
        let all = lemma53_check(&q, &(0..8).collect::<Vec<_>>(), 3).unwrap();
        assert_eq!((all.lhs, all.rhs), (1.0, 1.0));
        let moving =
            PathMeasure::dirac(space, TimeGrid::window(1.0, 1).unwrap(), vec![0, 1]).unwrap();
        assert!(!lemma53_check(&moving, &[0], 1).unwrap().equal);
    }
}
