use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use nested_adiabatic::csp::{
    beta_of, census_with_cap, generate_random_ksat, read_dimacs, write_dimacs, CspInstance, Partition,
    SolutionCensus,
};
use nested_adiabatic::nested::NestedProblem;
use nested_adiabatic::NestedRunReport64;
use serde::Serialize;

use crate::config::{Format, PartitionChoice, RunConfig};
use crate::{CensusArgs, GenerateArgs, InstanceArgs, RunArgs, UsageError};

fn is_dimacs_path(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("cnf" | "dimacs"))
}

pub fn load_instance(path: &Path, dimacs: bool) -> anyhow::Result<CspInstance> {
    let file = File::open(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    let instance = if dimacs || is_dimacs_path(path) {
        let mut inst = read_dimacs(BufReader::new(file))?;
        if inst.label().is_empty() {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                inst.set_label(stem);
            }
        }
        inst
    } else {
        let text = std::io::read_to_string(file)?;
        CspInstance::from_json(&text)?
    };
    Ok(instance)
}

/// Config file (or defaults) with command-line overrides applied.
pub fn resolve_config(args: &InstanceArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(n_a) = args.n_a {
        cfg.partition = PartitionChoice::Fixed(n_a);
    }
    if let Some(eps) = args.epsilon {
        cfg.epsilon = eps;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn problem_for(instance: &CspInstance, cfg: &RunConfig) -> anyhow::Result<NestedProblem> {
    let partition = cfg.resolve_partition(instance)?;
    let census = census_with_cap(instance, partition, cfg.enumeration_cap)?;
    Ok(NestedProblem::with_census(instance.clone(), partition, census)?)
}

pub fn write_meta(dir: &Path, command: &str) -> anyhow::Result<()> {
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "command": command,
        "created_unix": created,
        "version": env!("CARGO_PKG_VERSION"),
    });
    fs::write(
        dir.join("run_meta.json"),
        serde_json::to_string_pretty(&meta)? + "\n",
    )?;
    Ok(())
}

pub fn generate(args: &GenerateArgs) -> anyhow::Result<()> {
    let inst = generate_random_ksat(args.n, args.clauses, args.k, args.seed)
        .map_err(|e| UsageError(e.to_string()))?;
    let text = if is_dimacs_path(&args.out) {
        write_dimacs(&inst)?
    } else {
        inst.to_json()? + "\n"
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&args.out, text).with_context(|| format!("writing {}", args.out.display()))?;
    println!("xi={} beta={}", inst.xi(), beta_of(&inst));
    Ok(())
}

#[derive(Serialize)]
struct RunOutput<'a> {
    config: &'a RunConfig,
    partition: Partition,
    partition_source: &'static str,
    beta: f64,
    report: &'a NestedRunReport64,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<BTreeMap<usize, usize>>,
}

pub fn run(args: &RunArgs) -> anyhow::Result<()> {
    let mut cfg = resolve_config(&args.common)?;
    if let Some(shots) = args.shots {
        cfg.shots = shots;
    }
    let instance = load_instance(&args.common.instance, args.common.dimacs)?;
    let problem = problem_for(&instance, &cfg)?;
    let report: NestedRunReport64 = problem.run(&cfg.nested())?;
    let samples = if cfg.shots > 0 {
        Some(report.sample_measurements(cfg.shots, cfg.sample_seed)?)
    } else {
        None
    };
    let dir = cfg.out_dir(args.common.out_dir.as_deref());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    if cfg.wants(Format::Json) {
        let out = RunOutput {
            config: &cfg,
            partition: problem.partition(),
            partition_source: match cfg.partition {
                PartitionChoice::Fixed(_) => "fixed",
                PartitionChoice::Auto(_) => "auto",
            },
            beta: beta_of(&instance),
            report: &report,
            samples,
        };
        fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&out)? + "\n",
        )?;
    }
    if cfg.wants(Format::Csv) {
        let mut w = BufWriter::new(File::create(dir.join("histogram.csv"))?);
        report.write_histogram_csv(&mut w)?;
        w.flush()?;
    }
    write_meta(&dir, "run")?;
    let p = &report.plan;
    println!("instance: {}", report.label);
    println!(
        "partition: n_a={} n_b={} | M_A={} M_A^S={} M_AB={}",
        p.partition.n_a, p.partition.n_b, report.census.m_a, report.census.m_a_s, report.census.m_ab
    );
    println!(
        "times: T_A={:.4} T_B={:.4} T_C={:.4} | steps: r_A={} r_B={} r_C={}",
        p.t_a, p.t_b, p.t_c, p.r_a, p.r_b, p.r_c
    );
    println!("fidelity after A: {:.6}", report.fidelity_after_a);
    println!("fidelity after B: {:.6}", report.fidelity_after_b);
    println!("final solution mass: {:.6}", report.final_solution_mass);
    if let Some(best) = report.argmax() {
        println!("most likely outcome: {best}");
    }
    println!("wrote {}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct CensusOutput<'a> {
    label: &'a str,
    beta: f64,
    census: &'a SolutionCensus,
}

pub fn census(args: &CensusArgs) -> anyhow::Result<()> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(n_a) = args.n_a {
        cfg.partition = PartitionChoice::Fixed(n_a);
    }
    cfg.validate()?;
    let instance = load_instance(&args.instance, args.dimacs)?;
    let partition = cfg.resolve_partition(&instance)?;
    let c = census_with_cap(&instance, partition, cfg.enumeration_cap)?;
    let out = CensusOutput {
        label: instance.label(),
        beta: beta_of(&instance),
        census: &c,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
