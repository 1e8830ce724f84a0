use serde::{Deserialize, Serialize};

/// Closed interval `[left, left + length]` with positive length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub left: f64,
    pub length: f64,
}

impl Interval {
    pub fn new(left: f64, length: f64) -> Option<Self> {
        (left.is_finite() && length.is_finite() && length > 0.0).then_some(Self { left, length })
    }

    pub fn right(&self) -> f64 {
        self.left + self.length
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.left <= other.right() && other.left <= self.right()
    }

    /// `[a − l, a + 2l]`.
    pub fn tripled(&self) -> Interval {
        Interval {
            left: self.left - self.length,
            length: 3.0 * self.length,
        }
    }

    pub fn contains_point(&self, x: f64) -> bool {
        self.left <= x && x <= self.right()
    }
}

/// Greedy disjoint subcollection: longest first, ties to the smaller left
/// endpoint, then to the smaller input index. Returns indices into
/// `intervals` in selection order.
///
/// Every rejected interval meets a selected one at least as long, so it lies
/// inside that interval's tripled version.
pub fn vitali_select(intervals: &[Interval]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..intervals.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&intervals[i], &intervals[j]);
        b.length
            .total_cmp(&a.length)
            .then(a.left.total_cmp(&b.left))
            .then(i.cmp(&j))
    });
    let mut selected: Vec<usize> = Vec::new();
    for i in order {
        if selected
            .iter()
            .all(|&j| !intervals[i].intersects(&intervals[j]))
        {
            selected.push(i);
        }
    }
    selected
}

/// Pairwise disjointness of the selected intervals.
pub fn pairwise_disjoint(intervals: &[Interval], selected: &[usize]) -> bool {
    selected.iter().enumerate().all(|(a, &i)| {
        selected[a + 1..]
            .iter()
            .all(|&j| !intervals[i].intersects(&intervals[j]))
    })
}

/// Union of closed intervals as sorted, disjoint components.
pub fn union_components(intervals: impl IntoIterator<Item = Interval>) -> Vec<(f64, f64)> {
    let mut spans: Vec<(f64, f64)> = intervals.into_iter().map(|i| (i.left, i.right())).collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (l, r) in spans {
        match out.last_mut() {
            Some(last) if l <= last.1 => last.1 = last.1.max(r),
            _ => out.push((l, r)),
        }
    }
    out
}

/// Endpoint check that every input interval lies in the union of the tripled
/// selected intervals.
pub fn tripled_cover_holds(intervals: &[Interval], selected: &[usize]) -> bool {
    let cover = union_components(selected.iter().map(|&i| intervals[i].tripled()));
    intervals
        .iter()
        .all(|iv| cover.iter().any(|&(l, r)| l <= iv.left && iv.right() <= r))
}

/// Probes every input interval on a grid of spacing `resolution` (both
/// endpoints included) and counts probes outside the tripled selection.
pub fn uncovered_probes(intervals: &[Interval], selected: &[usize], resolution: f64) -> usize {
    let tripled: Vec<Interval> = selected.iter().map(|&i| intervals[i].tripled()).collect();
    let mut misses = 0;
    for iv in intervals {
        let steps = (iv.length / resolution).ceil() as usize;
        for s in 0..=steps {
            let x = (iv.left + s as f64 * resolution).min(iv.right());
            if !tripled.iter().any(|t| t.contains_point(x)) {
                misses += 1;
            }
        }
    }
    misses
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(l: f64, len: f64) -> Interval {
        Interval::new(l, len).unwrap()
    }

    #[test]
    fn single_interval() {
        let xs = [iv(2.0, 0.5)];
        assert_eq!(vitali_select(&xs), vec![0]);
        assert!(tripled_cover_holds(&xs, &[0]));
    }

    #[test]
    fn textbook_three() {
        let xs = [iv(0.0, 1.0), iv(0.5, 1.0), iv(3.0, 1.0)];
        let sel = vitali_select(&xs);
        assert_eq!(sel, vec![0, 2]);
        assert_eq!(xs[0].tripled(), iv(-1.0, 3.0));
        assert_eq!(xs[2].tripled(), iv(2.0, 3.0));
        assert!(pairwise_disjoint(&xs, &sel));
        assert!(tripled_cover_holds(&xs, &sel));
        assert_eq!(uncovered_probes(&xs, &sel, 0.01), 0);
    }

    #[test]
    fn touching_endpoints_are_not_disjoint() {
        let xs = [iv(0.0, 1.0), iv(1.0, 1.0)];
        assert_eq!(vitali_select(&xs).len(), 1);
    }

    #[test]
    fn longest_first() {
        let xs = [iv(0.0, 0.2), iv(0.1, 5.0), iv(4.0, 0.5)];
        assert_eq!(vitali_select(&xs), vec![1]);
    }

    #[test]
    fn invalid_intervals_rejected() {
        assert!(Interval::new(0.0, 0.0).is_none());
        assert!(Interval::new(f64::NAN, 1.0).is_none());
    }
}
