use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use eesaa_core::{
    run_batch, AggregateRow, BatchJob, NetworkConfig, PairingTable, ProtocolKind, SimSummary, Simulation,
};

use crate::config::parse_config;
use crate::error::CliError;
use crate::output::{emit_csv, RunProvenance, SummaryDigest};
use crate::plots::{emit_plots, ProtocolRuns};

#[derive(Debug, Parser)]
#[command(name = "eesaa", version, about = "Round-based clustered sensor network simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one network and write its round table and provenance.
    Run(RunArgs),
    /// Sweep seeds for one or more protocols.
    Batch(BatchArgs),
    /// Run all four protocols over a seed sweep and plot the comparison.
    Compare(CompareArgs),
    /// Re-run a simulation from its provenance record.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration; absent keys take the reference defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed (base seed for sweeps). Overrides `rng_seed` from the config.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Round limit. Overrides `max_rounds` from the config.
    #[arg(long, value_name = "N")]
    pub rounds: Option<u32>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "NAME", default_value = "eesaa")]
    pub protocol: ProtocolKind,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of consecutive seeds starting at the base seed.
    #[arg(long, value_name = "N", default_value_t = 10)]
    pub seeds: u32,
    /// Comma-separated protocol list.
    #[arg(
        long,
        value_name = "LIST",
        value_delimiter = ',',
        default_value = "eesaa,leach,sep,deec"
    )]
    pub protocols: Vec<ProtocolKind>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "N", default_value_t = 10)]
    pub seeds: u32,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Provenance JSON written by `run` or `batch`.
    #[arg(long, value_name = "PATH")]
    pub provenance: PathBuf,
    #[arg(long, value_name = "DIR", default_value = "replay")]
    pub out: PathBuf,
}

/// Flags override the file, the file overrides the defaults.
pub fn resolve_config(common: &CommonArgs) -> Result<NetworkConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => parse_config(path)?,
        None => NetworkConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.rng_seed = seed;
    }
    if let Some(rounds) = common.rounds {
        cfg.max_rounds = rounds;
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

pub fn run_file_stem(protocol: ProtocolKind, seed: u64) -> String {
    format!("{}_seed{}", protocol.name(), seed)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn simulate(cfg: &NetworkConfig, protocol: ProtocolKind) -> Result<(SimSummary, Option<PairingTable>), CliError> {
    let sim = Simulation::new(cfg.clone(), protocol).map_err(|e| CliError::Config(e.to_string()))?;
    let pairing = sim.pairing().cloned();
    Ok((sim.run(), pairing))
}

fn write_run(
    dir: &Path,
    cfg: &NetworkConfig,
    protocol: ProtocolKind,
    pairing: Option<&PairingTable>,
    summary: &SimSummary,
) -> Result<(), CliError> {
    let stem = run_file_stem(protocol, cfg.rng_seed);
    emit_csv(summary, &dir.join(format!("{stem}.csv")))?;
    RunProvenance::new(cfg, protocol, pairing, summary).write(&dir.join(format!("{stem}.provenance.json")))
}

fn fmt_round(r: Option<u32>) -> String {
    r.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&args.common)?;
    let (summary, pairing) = simulate(&cfg, args.protocol)?;
    create_dir(&args.common.out)?;
    write_run(&args.common.out, &cfg, args.protocol, pairing.as_ref(), &summary)?;
    writeln!(
        out,
        "{} seed {}: first death {}, last death {}, packets to BS {}, rounds {}",
        args.protocol,
        cfg.rng_seed,
        fmt_round(summary.first_death_round),
        fmt_round(summary.last_death_round),
        summary.cumulative_packets_to_bs,
        summary.rounds_simulated
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

fn batch_jobs(cfg: &NetworkConfig, protocols: &[ProtocolKind], seeds: u32) -> Vec<BatchJob> {
    protocols
        .iter()
        .flat_map(|&protocol| {
            (0..u64::from(seeds)).map(move |i| BatchJob {
                config: cfg.clone(),
                protocol,
                seed: cfg.rng_seed.wrapping_add(i),
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct BatchFile<'a> {
    jobs: Vec<JobEntry>,
    aggregates: &'a [AggregateRow],
}

#[derive(Debug, Serialize)]
struct JobEntry {
    protocol: ProtocolKind,
    seed: u64,
    result: Result<SummaryDigest, String>,
}

/// Runs the sweep, writes one CSV and provenance per job plus
/// `summary.json`, and returns the per-protocol groups.
fn execute_sweep(
    cfg: &NetworkConfig,
    protocols: &[ProtocolKind],
    seeds: u32,
    dir: &Path,
) -> Result<(Vec<ProtocolRuns>, Vec<AggregateRow>), CliError> {
    let jobs = batch_jobs(cfg, protocols, seeds);
    let report = run_batch(&jobs);
    create_dir(dir)?;

    let mut groups: Vec<ProtocolRuns> = Vec::new();
    let mut entries = Vec::new();
    for (job, result) in jobs.iter().zip(&report.results) {
        let job_cfg = NetworkConfig {
            rng_seed: job.seed,
            ..job.config.clone()
        };
        match result {
            Ok(summary) => {
                let pairing = match job.protocol {
                    ProtocolKind::Eesaa => simulate_pairing(&job_cfg)?,
                    _ => None,
                };
                write_run(dir, &job_cfg, job.protocol, pairing.as_ref(), summary)?;
                match groups.iter_mut().find(|g| g.protocol == job.protocol) {
                    Some(g) => g.runs.push(summary.clone()),
                    None => groups.push(ProtocolRuns {
                        protocol: job.protocol,
                        runs: vec![summary.clone()],
                    }),
                }
                entries.push(JobEntry {
                    protocol: job.protocol,
                    seed: job.seed,
                    result: Ok(summary.into()),
                });
            }
            Err(e) => entries.push(JobEntry {
                protocol: job.protocol,
                seed: job.seed,
                result: Err(e.to_string()),
            }),
        }
    }
    let file = BatchFile {
        jobs: entries,
        aggregates: &report.aggregates,
    };
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok((groups, report.aggregates))
}

fn simulate_pairing(cfg: &NetworkConfig) -> Result<Option<PairingTable>, CliError> {
    let sim = Simulation::new(cfg.clone(), ProtocolKind::Eesaa).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(sim.pairing().cloned())
}

/// Aggregate table, one row per protocol, with ratios against LEACH.
pub fn format_table(rows: &[AggregateRow]) -> String {
    let leach = rows.iter().find(|r| r.protocol == ProtocolKind::Leach);
    let mut s = format!(
        "{:<8} {:>4} {:>10} {:>10} {:>12} {:>12} {:>9} {:>9}\n",
        "protocol", "runs", "FND mean", "LND mean", "instability", "packets BS", "FND/LEACH", "LND/LEACH"
    );
    for r in rows {
        let ratio = |a: f64, b: Option<f64>| {
            b.filter(|b| *b > 0.0)
                .map_or("-".to_string(), |b| format!("{:.2}", a / b))
        };
        s.push_str(&format!(
            "{:<8} {:>4} {:>10.1} {:>10.1} {:>12.1} {:>12.1} {:>9} {:>9}\n",
            r.protocol.name(),
            r.runs,
            r.first_death_round.mean,
            r.last_death_round.mean,
            r.last_death_round.mean - r.first_death_round.mean,
            r.cumulative_packets_to_bs.mean,
            ratio(r.first_death_round.mean, leach.map(|l| l.first_death_round.mean)),
            ratio(r.last_death_round.mean, leach.map(|l| l.last_death_round.mean)),
        ));
    }
    s
}

pub fn cmd_batch(args: &BatchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&args.common)?;
    if args.seeds == 0 {
        return Err(CliError::Config("--seeds must be at least 1".into()));
    }
    let (_, aggregates) = execute_sweep(&cfg, &args.protocols, args.seeds, &args.common.out)?;
    write!(out, "{}", format_table(&aggregates)).map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&args.common)?;
    if args.seeds == 0 {
        return Err(CliError::Config("--seeds must be at least 1".into()));
    }
    let (groups, aggregates) = execute_sweep(&cfg, &ProtocolKind::ALL, args.seeds, &args.common.out)?;
    let plots = emit_plots(&groups, &args.common.out)?;
    let mut text = format_table(&aggregates);
    for p in plots {
        text.push_str(&format!("wrote {}\n", p.display()));
    }
    write!(out, "{text}").map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn cmd_replay(args: &ReplayArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let recorded = RunProvenance::read(&args.provenance)?;
    let cfg = recorded.config.clone();
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let (summary, pairing) = simulate(&cfg, recorded.protocol)?;
    if SummaryDigest::from(&summary) != recorded.summary || pairing != recorded.pairing {
        return Err(CliError::Runtime(format!(
            "replay of {} diverged from the recorded run",
            args.provenance.display()
        )));
    }
    create_dir(&args.out)?;
    write_run(&args.out, &cfg, recorded.protocol, pairing.as_ref(), &summary)?;
    writeln!(out, "replay of {} matches the recorded run", args.provenance.display())
        .map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Batch(a) => cmd_batch(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Replay(a) => cmd_replay(a, out),
    }
}
