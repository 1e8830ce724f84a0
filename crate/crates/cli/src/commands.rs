use std::path::Path;

use gifkit_core::brenier::{solve_min_action, ActionProblem, SolveOptions};
use gifkit_core::constructors::{
    from_classical_flow, krylov_bogolioubov_average, stopping_rotation, DiscreteClassicalFlow,
    FlowRule,
};
use gifkit_core::ergodic::{
    check_maximal_inequality, pointwise_limit, AverageProfile, PointwiseOptions,
};
use gifkit_core::structure::{
    check_support_ergodicity, decompose, is_ergodic, is_weak_ergodic, lemma53_check,
    WeakErgodicOptions,
};
use gifkit_core::{mix, report, Marginal, Observable, PathMeasure, StateSpace, TimeGrid};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{
    BrenierArgs, BuildArgs, BuildKind, CheckArgs, Cli, Command, ErgodicArgs, StructureArgs,
    StructureCheck,
};
use crate::{bridge, emit, read_json, suite, write_file, CliError, CliResult};

pub const CHECK_TOL: f64 = 1e-12;
pub const SOLVE_TOL: f64 = 1e-9;

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Build(a) => build(a, out),
        Command::Check(a) => check(a, cli.tol.unwrap_or(CHECK_TOL), out),
        Command::Ergodic(a) => ergodic(a, cli.tol.unwrap_or(CHECK_TOL), out),
        Command::Structure(a) => structure(a, cli.tol.unwrap_or(CHECK_TOL), out),
        Command::Brenier(a) => brenier(a, cli.tol.unwrap_or(SOLVE_TOL), out),
        Command::Suite => {
            let r = suite::run(cli.seed);
            emit(out, &report::to_json(&r))?;
            if r.pass {
                Ok(())
            } else {
                let failed: Vec<u8> = r
                    .criteria
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| c.id)
                    .collect();
                Err(CliError::CheckFailed {
                    message: format!("suite criteria failed: {failed:?}"),
                    detail: json!({ "failed": failed }),
                })
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalParams {
    space: StateSpace,
    grid: TimeGrid,
    rule: FlowRule,
    /// Starting marginal; uniform if omitted.
    #[serde(default)]
    mu: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StoppingParams {
    space: StateSpace,
    grid: TimeGrid,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KbParams {
    omega: PathMeasure,
    n: usize,
}

fn build(a: &BuildArgs, out: Option<&Path>) -> CliResult<()> {
    let q = match a.kind {
        BuildKind::Classical => {
            let p: ClassicalParams = read_json(&a.params)?;
            let mu = match p.mu {
                Some(m) => Marginal::new(m)?,
                None => Marginal::uniform(p.space.len()),
            };
            let flow = DiscreteClassicalFlow::new(p.space, p.rule)?;
            from_classical_flow(&flow, &mu, p.grid)?
        }
        BuildKind::StoppingRotation => {
            let p: StoppingParams = read_json(&a.params)?;
            stopping_rotation(p.space, p.grid)?
        }
        BuildKind::KbAverage => {
            let p: KbParams = read_json(&a.params)?;
            krylov_bogolioubov_average(&p.omega, p.n)?
        }
    };
    emit(out, &report::to_json(&q))
}

fn check(a: &CheckArgs, tol: f64, out: Option<&Path>) -> CliResult<()> {
    let q: PathMeasure = read_json(&a.measure)?;
    let r = q.check_incompressible(tol);
    emit(out, &report::to_json(&r))?;
    if r.pass {
        Ok(())
    } else {
        Err(gifkit_core::Error::NotIncompressible {
            deviation: r.max_tv_deviation,
        }
        .into())
    }
}

#[derive(Serialize)]
struct ErgodicSummary {
    atoms: usize,
    n_steps: usize,
    incompressible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pointwise: Option<gifkit_core::ergodic::PointwiseLimitReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    maximal: Option<gifkit_core::ergodic::MaximalInequalityReport>,
}

fn ergodic(a: &ErgodicArgs, tol: f64, out: Option<&Path>) -> CliResult<()> {
    let q: PathMeasure = read_json(&a.measure)?;
    let f: Observable = read_json(&a.observable)?;
    let profile = AverageProfile::compute(&q, &f)?;
    write_file(&a.report, &report::profile_csv(&profile, &a.alphas))?;
    if let Some(dir) = &a.svg {
        write_file(&dir.join("profile.svg"), &report::profile_svg(&profile, 6))?;
    }
    let incompressible = q.is_incompressible(tol);
    let pointwise = if incompressible {
        pointwise_limit(&q, &f, PointwiseOptions::default()).ok()
    } else {
        None
    };
    let maximal = if a.sweep.is_some() || !a.alphas.is_empty() {
        Some(check_maximal_inequality(&q, &f, &a.alphas)?)
    } else {
        None
    };
    if let (Some(path), Some(m)) = (&a.sweep, &maximal) {
        write_file(path, &report::maximal_sweep_csv(m))?;
        if let Some(dir) = &a.svg {
            write_file(&dir.join("sweep.svg"), &report::sweep_svg(m))?;
        }
    }
    let summary = ErgodicSummary {
        atoms: q.len(),
        n_steps: q.grid().n_steps(),
        incompressible,
        pointwise,
        maximal,
    };
    emit(out, &report::to_json(&summary))?;
    if let Some(m) = &summary.maximal {
        if !m.all_pass3() {
            return Err(CliError::CheckFailed {
                message: "maximal inequality with constant 3 fails".into(),
                detail: serde_json::to_value(m).expect("serializable"),
            });
        }
    }
    Ok(())
}

fn structure(a: &StructureArgs, tol: f64, out: Option<&Path>) -> CliResult<()> {
    let q: PathMeasure = read_json(&a.measure)?;
    let need_cells = || {
        if a.cells.is_empty() {
            Err(CliError::Usage("--cells is required for this check".into()))
        } else {
            Ok(a.cells.clone())
        }
    };
    match a.check {
        StructureCheck::Ergodic => {
            let verdict = is_ergodic(&q)?;
            let atoms = if verdict.ergodic {
                Some(check_support_ergodicity(&q)?)
            } else {
                None
            };
            let body = json!({ "verdict": verdict, "support": atoms });
            emit(out, &report::to_json(&body))?;
            if let Some(atoms) = atoms {
                if atoms.iter().any(|x| !x.ergodic) {
                    return Err(CliError::CheckFailed {
                        message: "ergodic measure has a non-ergodic support atom".into(),
                        detail: body["support"].clone(),
                    });
                }
            }
            Ok(())
        }
        StructureCheck::WeakErgodic => {
            let opts = WeakErgodicOptions {
                force_restricted: a.restricted,
                ..Default::default()
            };
            emit(out, &report::to_json(&is_weak_ergodic(&q, opts)?))
        }
        StructureCheck::Decompose => {
            let cells = if a.cells.is_empty() {
                is_weak_ergodic(&q, WeakErgodicOptions::default())?
                    .witness
                    .ok_or_else(|| {
                        CliError::Usage(
                            "measure is weak ergodic; pass --cells to force a split".into(),
                        )
                    })?
            } else {
                a.cells.clone()
            };
            let d = decompose(&q, &cells)?;
            emit(
                out,
                &report::to_json(&json!({ "cells": cells, "decomposition": d })),
            )?;
            let back = mix(&[d.q1.clone(), d.q2.clone()], &[d.p, 1.0 - d.p])?;
            let gap = back.max_weight_gap(&q);
            if !(d.q1.is_incompressible(tol) && d.q2.is_incompressible(tol)) || gap > tol {
                return Err(CliError::CheckFailed {
                    message: "decomposition does not reproduce the measure".into(),
                    detail: json!({ "recombination_gap": gap }),
                });
            }
            Ok(())
        }
        StructureCheck::Lemma53 => {
            let r = lemma53_check(&q, &need_cells()?, a.shift)?;
            emit(out, &report::to_json(&r))?;
            if r.equal {
                Ok(())
            } else {
                Err(CliError::CheckFailed {
                    message: "start event changes mass under the shift".into(),
                    detail: serde_json::to_value(r).expect("serializable"),
                })
            }
        }
    }
}

fn brenier(a: &BrenierArgs, tol: f64, out: Option<&Path>) -> CliResult<()> {
    let problem: ActionProblem = read_json(&a.config)?;
    let warm_start = match &a.warm_start {
        Some(p) => Some(read_json::<PathMeasure>(p)?),
        None => None,
    };
    let options = SolveOptions {
        enumeration_cap: a.cap,
        tol,
        probe_degeneracy: !a.no_probe,
        warm_start,
    };
    let mut r = solve_min_action(&problem, &options)?;
    if !a.no_oracle && bridge::oracle_feasible(&problem) {
        r.oracle_gap = bridge::oracle_value(&problem).map(|v| bridge::rel_gap(r.value, v));
    }
    emit(out, &report::to_json(&r))?;
    if let Some(path) = &a.measure_out {
        write_file(path, &report::to_json(&r.measure))?;
    }
    let worst = r
        .residuals
        .incompressibility_tv
        .max(r.residuals.coupling_tv);
    if worst > tol || r.oracle_gap.is_some_and(|g| g > tol) {
        return Err(CliError::CheckFailed {
            message: "solution residuals or oracle gap exceed the tolerance".into(),
            detail: json!({ "residuals": r.residuals, "oracle_gap": r.oracle_gap }),
        });
    }
    Ok(())
}
