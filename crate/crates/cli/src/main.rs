use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use llmsched_cli::config::{cluster_preset, load_catalog, load_cluster, ClusterFile};
use llmsched_cli::experiment::{ablate, mean_std, sweep, Cell, Lab, SweepParam};
use llmsched_cli::io;
use llmsched_core::bayesnet::StructureSearch;
use llmsched_core::profiler::ProfileSet;
use llmsched_core::sched::{Policy, SchedulerConfig};
use llmsched_core::workload::{collect_trace, default_catalog, Catalog, Preset};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "llmsched", version, about = "Uncertainty-aware scheduling simulator for compound LLM applications")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a ground-truth trace of a synthetic workload.
    Generate(GenerateArgs),
    /// Train application profiles from a trace.
    Profile(ProfileArgs),
    /// Simulate one scheduler over one or more seeds.
    Run(RunArgs),
    /// Simulate every scheduler over the same seeds.
    Compare(CommonArgs),
    /// Vary epsilon, ratio or lambda around a base configuration.
    Sweep(SweepArgs),
    /// Compare LLMSched with its two ablated variants.
    Ablate(CommonArgs),
    /// Write the built-in application catalog as TOML.
    Catalog {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value = "mixed")]
    workload: String,
    #[arg(long, default_value_t = 0.9)]
    lambda: f64,
    #[arg(long, default_value_t = 300)]
    num_jobs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Application catalog (TOML); the built-in one by default.
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    traces: PathBuf,
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Cluster whose latency table goes into the profiles.
    #[arg(long)]
    cluster: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct CommonArgs {
    #[arg(long, default_value = "mixed")]
    workload: String,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.2)]
    ratio: f64,
    #[arg(long, default_value_t = 0.9)]
    lambda: f64,
    #[arg(long, default_value_t = 300)]
    num_jobs: usize,
    /// Single seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seed list such as `1,2,5` or a range `0..20`.
    #[arg(long)]
    seeds: Option<String>,
    /// Cluster file (TOML); a per-workload preset by default.
    #[arg(long)]
    cluster: Option<PathBuf>,
    /// Profiles file written by `profile`; trained on a synthetic history
    /// when absent.
    #[arg(long)]
    profiles: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "llmsched")]
    scheduler: String,
    /// Also write every computed uncertainty score.
    #[arg(long)]
    dump_scores: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// epsilon, ratio or lambda.
    #[arg(long)]
    param: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

/// Effective settings, echoed next to every result.
#[derive(Serialize)]
struct Provenance<'a> {
    command: &'a str,
    workload: &'a str,
    scheduler: &'a str,
    epsilon: f64,
    ratio: f64,
    lambda: f64,
    num_jobs: usize,
    seeds: &'a [u64],
    profiles: String,
    catalog: String,
    cluster: ClusterFile,
}

fn parse_seeds(a: &CommonArgs) -> Result<Vec<u64>> {
    if let Some(s) = a.seed {
        return Ok(vec![s]);
    }
    let Some(text) = &a.seeds else { return Ok(vec![0]) };
    if let Some((lo, hi)) = text.split_once("..") {
        let (lo, hi): (u64, u64) = (lo.trim().parse()?, hi.trim().parse()?);
        if lo >= hi {
            bail!("empty seed range {text}");
        }
        return Ok((lo..hi).collect());
    }
    text.split(',').map(|s| s.trim().parse().with_context(|| format!("bad seed {s:?}"))).collect()
}

fn catalog(path: &Option<PathBuf>) -> Result<Catalog> {
    match path {
        Some(p) => load_catalog(p),
        None => Ok(default_catalog()),
    }
}

fn preset(name: &str) -> Result<Preset> {
    Preset::parse(name).with_context(|| format!("unknown workload {name:?}; expected mixed, predefined, chainlike or planning"))
}

struct Setup {
    lab: Lab,
    cell: Cell,
    seeds: Vec<u64>,
}

fn setup(a: &CommonArgs, policy: Policy, dump_scores: bool) -> Result<Setup> {
    let preset = preset(&a.workload)?;
    let cluster = match &a.cluster {
        Some(p) => load_cluster(p)?,
        None => cluster_preset(preset),
    };
    let catalog = catalog(&a.catalog)?;
    let lab = match &a.profiles {
        Some(p) => Lab::new(catalog, io::read_profiles(p)?)?,
        None => Lab::trained(catalog, cluster.calibration.clone())?,
    };
    let scheduler = SchedulerConfig { epsilon: a.epsilon, ratio: a.ratio, ..SchedulerConfig::new(policy) };
    scheduler.validate()?;
    if !(a.lambda > 0.0) || a.num_jobs == 0 {
        bail!("need a positive arrival rate and at least one job");
    }
    let cell = Cell { preset, scheduler, cluster, lambda: a.lambda, num_jobs: a.num_jobs, dump_scores };
    Ok(Setup { lab, cell, seeds: parse_seeds(a)? })
}

fn write_provenance(dir: &Path, command: &str, scheduler: &str, a: &CommonArgs, s: &Setup) -> Result<()> {
    let p = Provenance {
        command,
        workload: &a.workload,
        scheduler,
        epsilon: a.epsilon,
        ratio: a.ratio,
        lambda: a.lambda,
        num_jobs: a.num_jobs,
        seeds: &s.seeds,
        profiles: a.profiles.as_ref().map_or("synthetic history".into(), |p| p.display().to_string()),
        catalog: a.catalog.as_ref().map_or("built-in".into(), |p| p.display().to_string()),
        cluster: ClusterFile::from_config(&s.cell.cluster),
    };
    fs::write(dir.join(format!("{command}-config.toml")), toml::to_string(&p)?)?;
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let catalog = catalog(&a.catalog)?;
    let lab_templates = catalog.templates()?;
    let spec = llmsched_core::workload::WorkloadSpec {
        mix: preset(&a.workload)?.mix(&catalog),
        lambda: a.lambda,
        num_jobs: a.num_jobs,
        seed: a.seed,
    };
    let jobs = llmsched_core::workload::generate_workload(&catalog, &lab_templates, &spec)?;
    io::write_trace(&a.out, &collect_trace(&jobs, &catalog.names()))?;
    eprintln!("wrote {} records to {}", jobs.len(), a.out.display());
    Ok(())
}

fn cmd_profile(a: ProfileArgs) -> Result<()> {
    let catalog = catalog(&a.catalog)?;
    let templates = catalog.templates()?;
    let traces = io::read_trace(&a.traces)?;
    let calibration = match &a.cluster {
        Some(p) => load_cluster(p)?.calibration,
        None => llmsched_cli::config::default_calibration(),
    };
    let profiles = ProfileSet::train(&templates, &traces, calibration, &StructureSearch::default())
        .with_context(|| format!("training on {}", a.traces.display()))?;
    io::write_profiles(&a.out, &profiles)?;
    for p in &profiles.apps {
        let vars = p.network.as_ref().map_or(0, |n| n.stages.len());
        eprintln!("{}: {} network variables, mean job {:.2} s", p.app, vars, p.mean_job_duration);
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let policy = Policy::parse(&a.scheduler)?;
    let s = setup(&a.common, policy, a.dump_scores)?;
    let dir = &a.common.out;
    fs::create_dir_all(dir)?;
    write_provenance(dir, "run", policy.name(), &a.common, &s)?;
    for &seed in &s.seeds {
        let out = s.lab.run(&s.cell, seed)?;
        let stem = format!("{}-seed{seed}", policy.name());
        io::write_jobs_csv(&dir.join(format!("{stem}-jobs.csv")), &out.metrics)?;
        io::write_summary_csv(&dir.join(format!("{stem}-summary.csv")), &out.metrics)?;
        io::write_timing_csv(&dir.join(format!("{stem}-timing.csv")), &out.timing)?;
        if a.dump_scores {
            let mut body = String::from("time,job_id,app,stage_id,mutual_information,range_sum,dynamic_bonus,reduction,remaining\n");
            for r in &out.scores {
                body.push_str(&format!(
                    "{:.6},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                    r.time, r.job, r.app, r.score.stage_id, r.score.mutual_information, r.score.range_sum,
                    r.score.dynamic_bonus, r.score.reduction, r.remaining
                ));
            }
            fs::write(dir.join(format!("{stem}-scores.csv")), body)?;
        }
        if out.violations.total() > 0 {
            bail!("seed {seed}: simulator invariants violated: {:?}", out.violations);
        }
        println!(
            "{} seed {seed}: average JCT {:.3} s, overhead {:.3} ms/decision",
            policy.name(),
            out.metrics.average_jct,
            out.timing.mean_ms()
        );
    }
    Ok(())
}

fn cmd_compare(a: CommonArgs) -> Result<()> {
    let s = setup(&a, Policy::LlmSched, false)?;
    fs::create_dir_all(&a.out)?;
    write_provenance(&a.out, "compare", "all", &a, &s)?;
    let mut rows = Vec::new();
    for p in Policy::ALL {
        let cell = Cell { scheduler: SchedulerConfig { policy: p, ..s.cell.scheduler }, ..s.cell.clone() };
        let (m, sd) = mean_std(&s.lab.mean_jcts(&cell, &s.seeds)?);
        rows.push((p.name(), m, sd));
    }
    let best = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let mut body = String::from("scheduler,mean_jct,stddev,normalized\n");
    for (name, m, sd) in &rows {
        body.push_str(&format!("{name},{m:.6},{sd:.6},{:.6}\n", m / best));
        println!("{name:>9}: {m:8.3} s (sd {sd:.3}, x{:.3})", m / best);
    }
    fs::write(a.out.join("compare.csv"), body)?;
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let param = SweepParam::parse(&a.param)?;
    let s = setup(&a.common, Policy::LlmSched, false)?;
    fs::create_dir_all(&a.common.out)?;
    write_provenance(&a.common.out, "sweep", "llmsched", &a.common, &s)?;
    let rows = sweep(&s.lab, &s.cell, param, &a.values, &s.seeds)?;
    let mut body = format!("{},mean_jct,normalized_jct,stddev\n", param.name());
    for r in &rows {
        body.push_str(&format!("{},{:.6},{:.6},{:.6}\n", r.value, r.mean_jct, r.normalized, r.stddev));
        println!("{} = {:<6}: normalized JCT {:.4} (sd {:.4})", param.name(), r.value, r.normalized, r.stddev);
    }
    fs::write(a.common.out.join(format!("sweep-{}.csv", param.name())), body)?;
    Ok(())
}

fn cmd_ablate(a: CommonArgs) -> Result<()> {
    let s = setup(&a, Policy::LlmSched, false)?;
    fs::create_dir_all(&a.out)?;
    write_provenance(&a.out, "ablate", "llmsched", &a, &s)?;
    let rows = ablate(&s.lab, &s.cell, &s.seeds)?;
    let mut body = String::from("variant,mean_jct,normalized_jct\n");
    for r in &rows {
        body.push_str(&format!("{},{:.6},{:.6}\n", r.variant, r.mean_jct, r.normalized));
        println!("{:>20}: {:8.3} s (x{:.4})", r.variant, r.mean_jct, r.normalized);
    }
    fs::write(a.out.join("ablation.csv"), body)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Profile(a) => cmd_profile(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Compare(a) => cmd_compare(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Ablate(a) => cmd_ablate(a),
        Cmd::Catalog { out } => toml::to_string(&default_catalog())
            .map_err(anyhow::Error::from)
            .and_then(|t| Ok(fs::write(&out, t)?)),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
