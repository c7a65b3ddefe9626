//! Round loop, metrics and seed batches.
//!
//! Randomness comes from a single ChaCha8 stream seeded with `rng_seed`. The
//! stream is consumed in a fixed order:
//!
//! 1. deployment: `x` then `y` for each node in id order;
//! 2. application types, one draw per node in id order, only when
//!    `app_type_count > 1`;
//! 3. election draws, one per eligible-mode node per election, ascending id.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::baselines::{Baseline, BaselineKind};
use crate::eesaa::{Eesaa, NtpReport};
use crate::error::ConfigError;
use crate::model::{NetworkConfig, NodeId, NodeState, Position};
use crate::pairing::PairingTable;

pub type SimRng = ChaCha8Rng;

/// Name of the generator, recorded alongside every run.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

pub fn new_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Eesaa,
    Leach,
    Sep,
    Deec,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] = [
        ProtocolKind::Eesaa,
        ProtocolKind::Leach,
        ProtocolKind::Sep,
        ProtocolKind::Deec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Eesaa => "eesaa",
            ProtocolKind::Leach => "leach",
            ProtocolKind::Sep => "sep",
            ProtocolKind::Deec => "deec",
        }
    }

    fn baseline(self) -> Option<BaselineKind> {
        match self {
            ProtocolKind::Eesaa => None,
            ProtocolKind::Leach => Some(BaselineKind::Leach),
            ProtocolKind::Sep => Some(BaselineKind::Sep),
            ProtocolKind::Deec => Some(BaselineKind::Deec),
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eesaa" => Ok(ProtocolKind::Eesaa),
            "leach" => Ok(ProtocolKind::Leach),
            "sep" => Ok(ProtocolKind::Sep),
            "deec" => Ok(ProtocolKind::Deec),
            other => Err(format!(
                "unknown protocol `{other}` (expected eesaa, leach, sep or deec)"
            )),
        }
    }
}

/// Metrics of one completed round, taken after all debits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub alive: u32,
    pub dead: u32,
    pub ch_count: u32,
    pub packets_to_bs: u64,
    pub packets_to_ch: u64,
    pub energy_dissipated: f64,
    pub total_residual: f64,
}

impl RoundRecord {
    pub fn snapshot(round: u32, nodes: &[NodeState], ch_count: u32, report: NtpReport) -> Self {
        let alive = nodes.iter().filter(|n| n.is_alive()).count() as u32;
        Self {
            round,
            alive,
            dead: nodes.len() as u32 - alive,
            ch_count,
            packets_to_bs: report.packets_to_bs,
            packets_to_ch: report.packets_to_ch,
            energy_dissipated: report.energy_dissipated,
            total_residual: nodes.iter().map(|n| n.residual_energy).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RoundOutcome {
    Completed(RoundRecord),
    /// No node was alive when the round started.
    Terminal(RoundRecord),
}

impl RoundOutcome {
    pub fn record(&self) -> &RoundRecord {
        match self {
            RoundOutcome::Completed(r) | RoundOutcome::Terminal(r) => r,
        }
    }
}

/// A clustering protocol driven one round at a time.
pub trait Protocol {
    fn run_round(&mut self, nodes: &mut [NodeState], cfg: &NetworkConfig, round: u32, rng: &mut SimRng)
        -> RoundOutcome;
}

/// Lifetime metrics of one run. Round fields are `None` when the event did
/// not happen within the simulated rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub first_death_round: Option<u32>,
    pub last_death_round: Option<u32>,
    pub instability: Option<u32>,
    pub cumulative_packets_to_bs: u64,
    pub rounds_simulated: u32,
    pub per_round: Vec<RoundRecord>,
}

/// Derives the lifetime metrics from an ordered round series.
pub fn compute_summary(records: Vec<RoundRecord>) -> SimSummary {
    let first_death_round = records.iter().find(|r| r.dead > 0).map(|r| r.round);
    let last_death_round = records.iter().find(|r| r.alive == 0).map(|r| r.round);
    let instability = match (first_death_round, last_death_round) {
        (Some(f), Some(l)) => Some(l - f),
        _ => None,
    };
    SimSummary {
        first_death_round,
        last_death_round,
        instability,
        cumulative_packets_to_bs: records.iter().map(|r| r.packets_to_bs).sum(),
        rounds_simulated: records.last().map_or(0, |r| r.round),
        per_round: records,
    }
}

/// Places `n_nodes` uniformly in the field and assigns application types.
pub fn deploy(cfg: &NetworkConfig, kind: ProtocolKind, rng: &mut SimRng) -> Vec<NodeState> {
    let positions: Vec<Position> = (0..cfg.n_nodes)
        .map(|_| {
            let x = rng.gen::<f64>() * cfg.field_width;
            let y = rng.gen::<f64>() * cfg.field_height;
            Position::new(x, y)
        })
        .collect();
    let app_types: Vec<u32> = if cfg.app_type_count > 1 {
        (0..cfg.n_nodes)
            .map(|_| ((rng.gen::<f64>() * f64::from(cfg.app_type_count)) as u32).min(cfg.app_type_count - 1))
            .collect()
    } else {
        vec![0; cfg.n_nodes as usize]
    };
    positions
        .into_iter()
        .zip(app_types)
        .enumerate()
        .map(|(i, (pos, app))| {
            let id = NodeId(i as u32);
            let energy = match kind.baseline() {
                Some(b) => Baseline::initial_energy(b, id, cfg),
                None => cfg.initial_energy,
            };
            NodeState::new(id, pos, app, energy)
        })
        .collect()
}

enum Driver {
    Eesaa(Eesaa),
    Baseline(Baseline),
}

/// A single deterministic run, steppable one round at a time.
pub struct Simulation {
    cfg: NetworkConfig,
    kind: ProtocolKind,
    nodes: Vec<NodeState>,
    driver: Driver,
    rng: SimRng,
    round: u32,
    records: Vec<RoundRecord>,
    finished: bool,
}

impl Simulation {
    pub fn new(cfg: NetworkConfig, kind: ProtocolKind) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let mut rng = new_rng(cfg.rng_seed);
        let mut nodes = deploy(&cfg, kind, &mut rng);
        let driver = match kind.baseline() {
            None => Driver::Eesaa(Eesaa::setup(&mut nodes, &cfg)),
            Some(b) => Driver::Baseline(Baseline::new(b, &nodes, &cfg)),
        };
        Ok(Self {
            cfg,
            kind,
            nodes,
            driver,
            rng,
            round: 0,
            records: Vec::new(),
            finished: false,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn pairing(&self) -> Option<&PairingTable> {
        match &self.driver {
            Driver::Eesaa(e) => Some(e.pairing()),
            Driver::Baseline(_) => None,
        }
    }

    pub fn initial_total_energy(&self) -> f64 {
        (0..self.cfg.n_nodes)
            .map(|i| match self.kind.baseline() {
                Some(b) => Baseline::initial_energy(b, NodeId(i), &self.cfg),
                None => self.cfg.initial_energy,
            })
            .sum()
    }

    /// Runs the next round. Returns `None` once the network is dead or
    /// `max_rounds` is exhausted.
    pub fn step(&mut self) -> Option<RoundRecord> {
        if self.finished || self.round >= self.cfg.max_rounds {
            self.finished = true;
            return None;
        }
        self.round += 1;
        let outcome = match &mut self.driver {
            Driver::Eesaa(p) => p.run_round(&mut self.nodes, &self.cfg, self.round, &mut self.rng),
            Driver::Baseline(p) => p.run_round(&mut self.nodes, &self.cfg, self.round, &mut self.rng),
        };
        match outcome {
            RoundOutcome::Terminal(_) => {
                self.finished = true;
                None
            }
            RoundOutcome::Completed(record) => {
                if record.alive == 0 {
                    self.finished = true;
                }
                self.records.push(record);
                Some(record)
            }
        }
    }

    pub fn run(mut self) -> SimSummary {
        while self.step().is_some() {}
        compute_summary(self.records)
    }
}

/// Deploys, runs and summarises one network.
pub fn run_simulation(cfg: &NetworkConfig, kind: ProtocolKind) -> Result<SimSummary, ConfigError> {
    Ok(Simulation::new(cfg.clone(), kind)?.run())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchJob {
    pub config: NetworkConfig,
    pub protocol: ProtocolKind,
    pub seed: u64,
}

/// Sample statistics over the runs where the event was observed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub stddev: f64,
}

impl Stats {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            count: values.len(),
            mean,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            stddev: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub protocol: ProtocolKind,
    pub runs: usize,
    pub first_death_round: Stats,
    pub last_death_round: Stats,
    pub cumulative_packets_to_bs: Stats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    /// One entry per job, in job order.
    pub results: Vec<Result<SimSummary, ConfigError>>,
    /// One row per protocol, in order of first appearance.
    pub aggregates: Vec<AggregateRow>,
}

/// Runs every job in parallel; results keep the input order.
pub fn run_batch(jobs: &[BatchJob]) -> BatchReport {
    let results: Vec<Result<SimSummary, ConfigError>> = jobs
        .par_iter()
        .map(|job| {
            let cfg = NetworkConfig {
                rng_seed: job.seed,
                ..job.config.clone()
            };
            run_simulation(&cfg, job.protocol)
        })
        .collect();

    let mut protocols: Vec<ProtocolKind> = Vec::new();
    for job in jobs {
        if !protocols.contains(&job.protocol) {
            protocols.push(job.protocol);
        }
    }
    let aggregates = protocols
        .into_iter()
        .map(|protocol| {
            let ok: Vec<&SimSummary> = jobs
                .iter()
                .zip(&results)
                .filter(|(j, _)| j.protocol == protocol)
                .filter_map(|(_, r)| r.as_ref().ok())
                .collect();
            let collect =
                |f: &dyn Fn(&SimSummary) -> Option<f64>| -> Vec<f64> { ok.iter().filter_map(|s| f(s)).collect() };
            AggregateRow {
                protocol,
                runs: ok.len(),
                first_death_round: Stats::from_values(&collect(&|s| s.first_death_round.map(f64::from))),
                last_death_round: Stats::from_values(&collect(&|s| s.last_death_round.map(f64::from))),
                cumulative_packets_to_bs: Stats::from_values(&collect(&|s| Some(s.cumulative_packets_to_bs as f64))),
            }
        })
        .collect();
    BatchReport { results, aggregates }
}
