//! Acceptance battery: runs `gifkit suite --seed 7` twice and judges the raw
//! quantities in its report against thresholds pinned here, independently of
//! the verdicts the suite computes for itself. Prints one PASS/FAIL line per
//! criterion. Runs without the libtest harness so the lines always show.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

const SEED: &str = "7";
const EQ_TOL: f64 = 1e-12;
const SOLVE_TOL: f64 = 1e-9;
const RECOMBINE_TOL: f64 = 1e-15;
const TIME_LIMIT: Duration = Duration::from_secs(60);

fn run_suite(out: &Path) -> (Vec<u8>, Duration) {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_gifkit"))
        .args(["suite", "--seed", SEED, "--out"])
        .arg(out)
        .status()
        .expect("gifkit runs");
    let elapsed = start.elapsed();
    // Exit 1 means some criterion failed; the report is still written.
    assert!(
        matches!(status.code(), Some(0 | 1)),
        "suite crashed: {status}"
    );
    (std::fs::read(out).expect("report written"), elapsed)
}

fn f(m: &Value, key: &str) -> f64 {
    m[key]
        .as_f64()
        .unwrap_or_else(|| panic!("metric {key} missing: {m}"))
}

fn u(m: &Value, key: &str) -> u64 {
    m[key]
        .as_u64()
        .unwrap_or_else(|| panic!("metric {key} missing: {m}"))
}

fn judge(id: u64, m: &Value) -> (bool, String) {
    match id {
        1 => (
            u(m, "constructors") > 0
                && f(m, "constructor_max_deviation") <= EQ_TOL
                && u(m, "bijection_flows") == 50
                && f(m, "bijection_max_deviation") <= EQ_TOL
                && u(m, "perturbations") == 50
                && u(m, "perturbations_failing") == 50,
            format!(
                "constructors dev {:e}, bijections dev {:e}, perturbations failing {}/50",
                f(m, "constructor_max_deviation"),
                f(m, "bijection_max_deviation"),
                u(m, "perturbations_failing")
            ),
        ),
        2 => (
            f(m, "max_tv_deviation") == 0.0
                && f(m, "marginal_max_error") == 0.0
                && u(m, "single_cells") == 8
                && f(m, "single_cell_max_pointwise_mass") == 0.0
                && u(m, "arcs") > 0
                && u(m, "arcs_with_witness") == u(m, "arcs")
                && f(m, "min_witness_mass") > 0.0,
            format!(
                "deviation {}, pointwise mass {}, witnessed arcs {}/{}",
                f(m, "max_tv_deviation"),
                f(m, "single_cell_max_pointwise_mass"),
                u(m, "arcs_with_witness"),
                u(m, "arcs")
            ),
        ),
        3 => (
            u(m, "measures") == 200 && u(m, "cases") == 20_000 && u(m, "factor3_violations") == 0,
            format!(
                "{} cases, factor-3 violations {}, factor-1 pass rate {} (reported only)",
                u(m, "cases"),
                u(m, "factor3_violations"),
                f(m, "factor1_pass_rate")
            ),
        ),
        4 => (
            u(m, "collections") == 1000
                && u(m, "overlapping_selections") == 0
                && u(m, "cover_failures") == 0
                && u(m, "uncovered_probes") == 0,
            format!(
                "{} collections, overlapping {}, uncovered probes {}",
                u(m, "collections"),
                u(m, "overlapping_selections"),
                u(m, "uncovered_probes")
            ),
        ),
        5 => (
            u(m, "cases") == 10 * u(m, "gifs")
                && f(m, "integral_max_excess") <= EQ_TOL
                && f(m, "cauchy_max_excess") <= EQ_TOL,
            format!(
                "{} cases, integral excess {:e}, Cauchy excess {:e} over {} pairs in time units \
                 (grid-index form violations per GIF, reported only: {})",
                u(m, "cases"),
                f(m, "integral_max_excess"),
                f(m, "cauchy_max_excess"),
                u(m, "horizon_pairs"),
                m["cauchy_index_form_violations_by_gif"]
            ),
        ),
        6 => (
            f(m, "mixture_max_deviation") <= EQ_TOL
                && u(m, "family_members") == 50
                && u(m, "non_weak_members") > 0
                && u(m, "weak_ergodic_members") > 0
                && u(m, "non_weak_without_admissible_split") == 0
                && f(m, "decomposition_max_deviation") <= EQ_TOL
                && f(m, "recombination_max_gap") <= RECOMBINE_TOL
                && u(m, "support_mismatches") == 0
                && u(m, "admissible_splits_in_weak_members") == 0
                && u(m, "ergodic_measures") > 0
                && u(m, "non_ergodic_support_atoms") == 0,
            format!(
                "{} decomposed (gap {:e}), {} weak ergodic with {} splits, {} ergodic",
                u(m, "non_weak_members"),
                f(m, "recombination_max_gap"),
                u(m, "weak_ergodic_members"),
                u(m, "admissible_splits_in_weak_members"),
                u(m, "ergodic_measures")
            ),
        ),
        7 => (
            u(m, "starting_measures") == 20
                && f(m, "defect_max_excess") <= EQ_TOL
                && f(m, "full_average_max_defect") == 0.0,
            format!(
                "{} cases, worst excess over 2s/n {:e}, full-average defect {}",
                u(m, "cases"),
                f(m, "defect_max_excess"),
                f(m, "full_average_max_defect")
            ),
        ),
        8 => (
            f(m, "identity_max_value") == 0.0
                && u(m, "oracle_instances") > 0
                && f(m, "oracle_max_rel_gap") <= SOLVE_TOL
                && u(m, "bijections") == 20
                && f(m, "classical_max_rel_excess") <= SOLVE_TOL
                && f(m, "max_residual") <= SOLVE_TOL,
            format!(
                "identity {}, oracle gap {:e} over {} instances, classical excess {:e}, residual {:e}",
                f(m, "identity_max_value"),
                f(m, "oracle_max_rel_gap"),
                u(m, "oracle_instances"),
                f(m, "classical_max_rel_excess"),
                f(m, "max_residual")
            ),
        ),
        _ => unreachable!(),
    }
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let (first, t1) = run_suite(&dir.path().join("a.json"));
    let (second, t2) = run_suite(&dir.path().join("b.json"));
    let report: Value = serde_json::from_slice(&first).expect("report is JSON");
    let criteria = report["criteria"].as_array().expect("criteria array");

    let mut failed = Vec::new();
    for id in 1..=8u64 {
        let c = criteria
            .iter()
            .find(|c| c["id"].as_u64() == Some(id))
            .unwrap_or_else(|| panic!("criterion {id} missing"));
        let (ok, detail) = if c["metrics"].get("error").is_some() {
            (false, format!("error: {}", c["metrics"]["error"]))
        } else {
            judge(id, &c["metrics"])
        };
        println!(
            "{} criterion {id}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failed.push(id);
        }
    }

    let identical = first == second;
    let fast = t1 < TIME_LIMIT && t2 < TIME_LIMIT;
    println!(
        "{} criterion 9: reports byte-identical: {identical} ({} bytes); runs took {:.1}s and {:.1}s",
        if identical && fast { "PASS" } else { "FAIL" },
        first.len(),
        t1.as_secs_f64(),
        t2.as_secs_f64()
    );
    if !(identical && fast) {
        failed.push(9);
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
