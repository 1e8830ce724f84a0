//! CSV, JSON and SVG renderings of diagnostic results.
//!
//! Column orders are fixed and every renderer is a pure function of its
//! input, so identical results give byte-identical files. Floats use Rust's
//! shortest round-trip formatting.

use std::fmt::Write as _;

use serde::Serialize;

use crate::ergodic::{AverageProfile, MaximalInequalityReport};

/// Columns of the α-sweep table.
pub const SWEEP_COLUMNS: [&str; 6] = ["alpha", "lhs", "bound1", "bound3", "pass3", "pass1"];

/// Leading columns of the profile table; one `in_E_alpha(α)` column follows
/// per requested level.
pub const PROFILE_COLUMNS: [&str; 4] = ["atom_id", "k", "A_k", "f_star"];

/// A header line followed by one line per row. An empty row set gives a
/// header-only table.
pub fn csv_table<S: AsRef<str>>(header: &[S], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header.iter().map(|h| h.as_ref()))
        .expect("writing to memory");
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing memory")).expect("csv output is utf-8")
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// `alpha, lhs, bound1, bound3, pass3, pass1`, one row per level.
pub fn maximal_sweep_csv(report: &MaximalInequalityReport) -> String {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.alpha),
                num(r.lhs),
                num(r.bound1),
                num(r.bound3),
                r.pass3.to_string(),
                r.pass1.to_string(),
            ]
        })
        .collect();
    csv_table(&SWEEP_COLUMNS, &rows)
}

/// `atom_id, k, A_k, f_star, in_E_alpha(α)…`, one row per atom and horizon.
pub fn profile_csv(profile: &AverageProfile, alphas: &[f64]) -> String {
    let mut header: Vec<String> = PROFILE_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(alphas.iter().map(|a| format!("in_E_alpha({a})")));
    let maxima = profile.maximal();
    let mut rows = Vec::new();
    for (i, (averages, &star)) in profile.per_atom.iter().zip(&maxima).enumerate() {
        for (k, &a) in averages.iter().enumerate() {
            let mut row = vec![i.to_string(), (k + 1).to_string(), num(a), num(star)];
            row.extend(alphas.iter().map(|&alpha| (star > alpha).to_string()));
            rows.push(row);
        }
    }
    csv_table(&header, &rows)
}

/// Pretty JSON with a trailing newline. Struct fields keep declaration
/// order and maps are ordered, so the output is stable.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
                (l.min(v), h.max(v))
            });
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        Self {
            x: span(&mut xs.clone()),
            y: span(&mut ys.clone()),
        }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }
}

fn svg_open(title: &str, frame: &Frame, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel} [{:.3}, {:.3}]</text>"#,
        W / 2.0,
        H - 12.0,
        frame.x.0,
        frame.x.1
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{ylabel} [{:.3}, {:.3}]</text>"#,
        H / 2.0,
        H / 2.0,
        frame.y.0,
        frame.y.1
    );
    s
}

fn polyline(frame: &Frame, points: &[(f64, f64)], color: &str) -> String {
    let pts: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    format!(
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
        pts.join(" ")
    ) + "\n"
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Running averages `A_k` against `k` for up to `max_atoms` atoms.
pub fn profile_svg(profile: &AverageProfile, max_atoms: usize) -> String {
    let shown = &profile.per_atom[..profile.per_atom.len().min(max_atoms)];
    let xs = shown.iter().flat_map(|p| (1..=p.len()).map(|k| k as f64));
    let ys = shown.iter().flat_map(|p| p.iter().copied());
    let frame = Frame::new(xs, ys);
    let mut s = svg_open("running averages", &frame, "k", "A_k");
    for (i, p) in shown.iter().enumerate() {
        let points: Vec<(f64, f64)> = p
            .iter()
            .enumerate()
            .map(|(k, &a)| ((k + 1) as f64, a))
            .collect();
        s += &polyline(&frame, &points, PALETTE[i % PALETTE.len()]);
    }
    s + "</svg>\n"
}

/// `α·q(E_α)` against `α`, with the two reference bounds.
pub fn sweep_svg(report: &MaximalInequalityReport) -> String {
    let xs = report.rows.iter().map(|r| r.alpha);
    let ys = report.rows.iter().flat_map(|r| [r.lhs, r.bound1, r.bound3]);
    let frame = Frame::new(xs, ys);
    let mut s = svg_open("maximal inequality", &frame, "alpha", "alpha q(E_alpha)");
    let series = |f: fn(&crate::ergodic::MaximalRow) -> f64| -> Vec<(f64, f64)> {
        report.rows.iter().map(|r| (r.alpha, f(r))).collect()
    };
    s += &polyline(&frame, &series(|r| r.lhs), PALETTE[0]);
    s += &polyline(&frame, &series(|r| r.bound1), PALETTE[2]);
    s += &polyline(&frame, &series(|r| r.bound3), PALETTE[1]);
    s + "</svg>\n"
}
