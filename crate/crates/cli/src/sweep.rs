//! Parameter sweeps with a log-log fit footer.
//!
//! CSV schema: `axis,value,instances,failures,mean_time_model,mean_fidelity,mean_trotter_error`
//! with one row per axis value in the order given, then the footer
//! `fit,<exponent>,<points>,<failed rows>,,,`.

use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::Context;
use nested_adiabatic::analysis::fit_scaling;
use nested_adiabatic::csp::{census_with_cap, generate_random_ksat};
use nested_adiabatic::evolve::{error_budget, evolve_discretized};
use nested_adiabatic::hilbert::{StateVector, StructuredHamiltonian};
use nested_adiabatic::nested::NestedProblem;
use nested_adiabatic::schedule::{grover_schedule, linear_schedule, Schedule};
use rayon::prelude::*;

use crate::config::{Axis, SweepSpec};
use crate::{SweepArgs, UsageError};

/// Attempts per instance slot when looking for a satisfiable formula.
const SEED_ATTEMPTS: u64 = 100;

#[derive(Clone, Debug, Default)]
pub struct PointRow {
    pub value: f64,
    pub instances: usize,
    pub failures: usize,
    pub time_model: Option<f64>,
    pub fidelity: Option<f64>,
    pub trotter_error: Option<f64>,
}

struct Sample {
    time: f64,
    fidelity: f64,
    trotter: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn as_count(v: f64, what: &str) -> anyhow::Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(UsageError(format!("{what} must be a positive integer, got {v}")).into())
    }
}

fn grover_run(
    n: usize,
    m: usize,
    schedule: &Schedule<f64>,
    r: usize,
    budget: bool,
) -> anyhow::Result<Sample> {
    let marked: Vec<usize> = (0..m).collect();
    let hi = StructuredHamiltonian::rank_one_uniform(n);
    let hf = StructuredHamiltonian::diagonal_marked(n, marked)?;
    let res = evolve_discretized(&hi, &hf, schedule, r, &StateVector::uniform_dim(n))?;
    let trotter = if budget {
        Some(error_budget(&hi, &hf, schedule, r)?.measured_trotter)
    } else {
        None
    };
    Ok(Sample {
        time: schedule.total_time,
        fidelity: res.fidelity_to_ground,
        trotter,
    })
}

fn steps(t: f64, mult: f64) -> usize {
    ((t * mult).ceil() as usize).max(1)
}

fn nested_run(spec: &SweepSpec, n_ab: usize, clauses: usize, slot: usize) -> anyhow::Result<Sample> {
    let p = &spec.problem;
    let base_seed = p.seed.wrapping_add(1_000_003 * slot as u64);
    for attempt in 0..SEED_ATTEMPTS {
        let inst = generate_random_ksat(n_ab, clauses, p.k, base_seed + attempt)?;
        let partition = spec.base.resolve_partition(&inst)?;
        let census = census_with_cap(&inst, partition, spec.base.enumeration_cap)?;
        if census.m_ab == 0 {
            continue;
        }
        let problem = NestedProblem::with_census(inst, partition, census)?;
        let report = problem.run::<f64>(&spec.base.nested())?;
        return Ok(Sample {
            time: report.wall_time_model,
            fidelity: report.final_solution_mass,
            trotter: None,
        });
    }
    anyhow::bail!("no satisfiable instance within {SEED_ATTEMPTS} seeds")
}

fn sample(spec: &SweepSpec, value: f64, slot: usize) -> anyhow::Result<Sample> {
    let p = &spec.problem;
    let base = &spec.base;
    match spec.axis {
        Axis::SearchSize => {
            let n = as_count(value, "N")?;
            let sched = grover_schedule(n, p.marked, base.epsilon)?;
            grover_run(
                n,
                p.marked,
                &sched,
                steps(sched.total_time, base.r_multipliers.a),
                false,
            )
        }
        Axis::Epsilon => {
            let sched = grover_schedule(p.n, p.marked, value)?;
            grover_run(
                p.n,
                p.marked,
                &sched,
                steps(sched.total_time, base.r_multipliers.a),
                false,
            )
        }
        Axis::Steps => {
            let r = as_count(value, "r")?;
            let sched = match p.total_time {
                Some(t) => linear_schedule(t)?,
                None => grover_schedule(p.n, p.marked, base.epsilon)?,
            };
            grover_run(p.n, p.marked, &sched, r, true)
        }
        Axis::Variables => {
            let n = as_count(value, "n_ab")?;
            nested_run(spec, n, (p.beta * n as f64).round() as usize, slot)
        }
        Axis::Beta => {
            if !(value >= 0.0) {
                anyhow::bail!(UsageError(format!("beta must be non-negative, got {value}")));
            }
            nested_run(spec, p.n_ab, (value * p.n_ab as f64).round() as usize, slot)
        }
    }
}

/// Instances drawn per point; the deterministic search problems need one.
fn slots(spec: &SweepSpec) -> usize {
    match spec.axis {
        Axis::Variables | Axis::Beta => spec.instances_per_point,
        _ => 1,
    }
}

pub fn evaluate(spec: &SweepSpec, value: f64) -> PointRow {
    let samples: Vec<anyhow::Result<Sample>> = (0..slots(spec)).map(|s| sample(spec, value, s)).collect();
    let ok: Vec<&Sample> = samples.iter().filter_map(|s| s.as_ref().ok()).collect();
    for e in samples.iter().filter_map(|s| s.as_ref().err()) {
        eprintln!("warning: {} = {value}: {e:#}", spec.axis.name());
    }
    PointRow {
        value,
        instances: samples.len(),
        failures: samples.len() - ok.len(),
        time_model: mean(ok.iter().map(|s| s.time)),
        fidelity: mean(ok.iter().map(|s| s.fidelity)),
        trotter_error: mean(ok.iter().filter_map(|s| s.trotter)),
    }
}

/// Size used on the fit's abscissa, and the fitted quantity.
fn fit_point(axis: Axis, row: &PointRow) -> Option<(f64, f64)> {
    match axis {
        Axis::Steps => Some((row.value, row.trotter_error?)),
        Axis::Variables => Some((2f64.powf(row.value), row.time_model?)),
        _ => Some((row.value, row.time_model?)),
    }
}

pub fn fit_exponent(axis: Axis, rows: &[PointRow]) -> (Option<f64>, usize) {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.failures < r.instances)
        .filter_map(|r| fit_point(axis, r))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pts.len();
    (fit_scaling(&pts).ok().map(|f| f.exponent), n)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(axis: Axis, rows: &[PointRow], mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "axis,value,instances,failures,mean_time_model,mean_fidelity,mean_trotter_error"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            axis.name(),
            r.value,
            r.instances,
            r.failures,
            opt(r.time_model),
            opt(r.fidelity),
            opt(r.trotter_error)
        )?;
    }
    let (exp, n) = fit_exponent(axis, rows);
    let failed = rows.iter().filter(|r| r.failures > 0).count();
    writeln!(w, "fit,{},{n},{failed},,,", opt(exp))
}

pub fn sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let spec = SweepSpec::load(&args.spec)?;
    if args.jobs == 0 {
        anyhow::bail!(UsageError("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("building worker pool")?;
    let rows: Vec<PointRow> = pool.install(|| spec.values.par_iter().map(|&v| evaluate(&spec, v)).collect());
    match &args.out {
        Some(path) => {
            let mut w =
                BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            write_csv(spec.axis, &rows, &mut w)?;
            w.flush()?;
        }
        None => write_csv(spec.axis, &rows, std::io::stdout().lock())?,
    }
    let warnings = rows.iter().filter(|r| r.failures > 0).count();
    if warnings > 0 {
        eprintln!("warnings: {warnings} point(s) with failures");
    }
    Ok(())
}
