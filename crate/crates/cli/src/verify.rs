//! Discretization-error report for the three stages of a nested run.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::sync::Arc;

use nested_adiabatic::evolve::{error_budget, ErrorBudget, DENSE_MEASURE_CAP};
use nested_adiabatic::hilbert::StructuredHamiltonian;
use nested_adiabatic::nested::NestedProblem;
use nested_adiabatic::schedule::Schedule;
use nested_adiabatic::Error;
use serde::Serialize;

use crate::commands::{load_instance, problem_for, resolve_config, write_meta};
use crate::VerifyArgs;

/// Largest accepted `measured_trotter / trotter_bound_scale`.
pub const TROTTER_CONSTANT_LIMIT: f64 = 10.0;

#[derive(Serialize)]
struct StageRow {
    stage: &'static str,
    budget: ErrorBudget<f64>,
    piecewise_ok: bool,
    trotter_constant: f64,
    trotter_ok: bool,
}

#[derive(Serialize)]
struct StageCChecks {
    dh_norm: f64,
    dh_norm_below_one: bool,
    commutator_norm: f64,
    commutator_limit: f64,
    commutator_below_limit: bool,
}

#[derive(Serialize)]
struct VerifyOutput {
    label: String,
    degenerate: bool,
    stages: Vec<StageRow>,
    stage_c: StageCChecks,
}

fn row(
    stage: &'static str,
    h_i: &StructuredHamiltonian<f64>,
    h_f: &StructuredHamiltonian<f64>,
    schedule: &Schedule<f64>,
    r: usize,
) -> anyhow::Result<StageRow> {
    let budget = error_budget(h_i, h_f, schedule, r)?;
    let c = budget.trotter_constant();
    Ok(StageRow {
        stage,
        piecewise_ok: budget.piecewise_within_bound(),
        trotter_constant: c,
        trotter_ok: c <= TROTTER_CONSTANT_LIMIT,
        budget,
    })
}

fn stage_rows(
    problem: &NestedProblem,
    eps: f64,
    cfg: &crate::config::RunConfig,
    degenerate: bool,
) -> anyhow::Result<Vec<StageRow>> {
    let plan = problem.plan::<f64>(&cfg.nested())?;
    let pick = |hi: StructuredHamiltonian<f64>, hf: StructuredHamiltonian<f64>| {
        if degenerate {
            (hf.clone(), hf)
        } else {
            (hi, hf)
        }
    };
    let (ai, af) = problem.stage_a_pair::<f64>()?;
    let (ai, af) = pick(ai, af);
    let (bi, bf) = problem.stage_b_pair::<f64>()?;
    let (bi, bf) = pick(bi, bf);
    let u = Arc::new(problem.build_u(eps, plan.r_a, plan.r_b)?);
    let ci = StructuredHamiltonian::conjugated(u, problem.h_0())?;
    let (ci, cf) = pick(ci, problem.h_ab()?);
    let (sc, _) = problem.stage_c_schedule(eps, cfg.grid_points)?;
    Ok(vec![
        row("A", &ai, &af, &problem.stage_a_schedule(eps)?, plan.r_a)?,
        row("B", &bi, &bf, &problem.stage_b_schedule(eps)?, plan.r_b)?,
        row("C", &ci, &cf, &sc, plan.r_c)?,
    ])
}

pub fn verify(args: &VerifyArgs) -> anyhow::Result<()> {
    let cfg = resolve_config(&args.common)?;
    let instance = load_instance(&args.common.instance, args.common.dimacs)?;
    let problem = problem_for(&instance, &cfg)?;
    if problem.dim() > DENSE_MEASURE_CAP {
        return Err(Error::Resource(format!(
            "verification needs dimension <= {DENSE_MEASURE_CAP}, instance has {}",
            problem.dim()
        ))
        .into());
    }
    let stages = stage_rows(&problem, cfg.epsilon, &cfg, args.degenerate)?;
    let c = &problem.census();
    let limit = (c.m_a_s as f64 / c.m_a as f64).sqrt();
    let bc = &stages[2].budget;
    let checks = StageCChecks {
        dh_norm: bc.dh_norm,
        dh_norm_below_one: bc.dh_norm < 1.0,
        commutator_norm: bc.commutator_norm,
        commutator_limit: limit,
        commutator_below_limit: bc.commutator_norm < limit,
    };
    let out = VerifyOutput {
        label: instance.label().to_string(),
        degenerate: args.degenerate,
        stages,
        stage_c: checks,
    };

    let dir = cfg.out_dir(args.common.out_dir.as_deref());
    fs::create_dir_all(&dir)?;
    let mut w = BufWriter::new(File::create(dir.join("verify.csv"))?);
    write_table(&out, &mut w)?;
    w.flush()?;
    fs::write(
        dir.join("verify.json"),
        serde_json::to_string_pretty(&out)? + "\n",
    )?;
    write_meta(&dir, "verify")?;

    write_table(&out, std::io::stdout().lock())?;
    let s = &out.stage_c;
    println!(
        "stage C: ||H_i - H_f|| = {:.6} (< 1: {}), ||[H_i, H_f]|| = {:.6} (< {:.6}: {})",
        s.dh_norm, s.dh_norm_below_one, s.commutator_norm, s.commutator_limit, s.commutator_below_limit
    );
    Ok(())
}

fn write_table<W: Write>(out: &VerifyOutput, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "stage,total_time,steps,dh_norm,commutator_norm,piecewise_bound,measured_piecewise,piecewise_ok,trotter_bound_scale,measured_trotter,trotter_constant,trotter_ok,estimated"
    )?;
    for r in &out.stages {
        let b = &r.budget;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.stage,
            b.total_time,
            b.steps,
            b.dh_norm,
            b.commutator_norm,
            b.piecewise_bound,
            b.measured_piecewise,
            r.piecewise_ok,
            b.trotter_bound_scale,
            b.measured_trotter,
            r.trotter_constant,
            r.trotter_ok,
            b.estimated
        )?;
    }
    Ok(())
}
