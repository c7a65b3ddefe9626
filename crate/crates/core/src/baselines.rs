//! LEACH, SEP and DEEC cluster-head election for comparison runs.
//!
//! All three share one round structure: every live node draws once (ascending
//! id), elected heads gather their nearest neighbours, and the transmission
//! phase is the same one EESAA uses. Nodes never sleep. The protocols differ
//! only in the per-node election probability and its rotation epoch:
//!
//! * LEACH: `p` for everyone, eligibility reset every `ceil(1/p)` rounds.
//! * SEP: `p/(1+alpha*m)` for normal nodes and `p(1+alpha)/(1+alpha*m)` for
//!   advanced ones, each with its own epoch. With `m = 0` it is LEACH.
//! * DEEC: `p * E_i / E_avg`, with the epoch recomputed from the node's
//!   current probability every round.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eesaa::{associate_members, epoch_length, richest_active, run_ntp};
use crate::engine::{Protocol, RoundOutcome, RoundRecord, SimRng};
use crate::error::ModelError;
use crate::model::{NetworkConfig, NodeId, NodeState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Leach,
    Sep,
    Deec,
}

/// Knobs of the heterogeneous baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    pub sep_advanced_fraction: f64,
    pub sep_energy_factor: f64,
    pub deec_rounds_estimate: Option<u32>,
}

impl BaselineParams {
    pub fn from_config(cfg: &NetworkConfig) -> Self {
        Self {
            sep_advanced_fraction: cfg.sep_advanced_fraction,
            sep_energy_factor: cfg.sep_energy_factor,
            deec_rounds_estimate: cfg.deec_rounds_estimate,
        }
    }
}

/// LEACH threshold for one node; 0 once it has served in the current epoch.
pub fn leach_threshold(p_desired: f64, round: u32, eligible: bool) -> Result<f64, ModelError> {
    let t = crate::eesaa::election_threshold(p_desired, round)?;
    Ok(if eligible { t } else { 0.0 })
}

/// Threshold for an arbitrary per-node probability. `p >= 1` always elects.
fn rotating_threshold(p: f64, round: u32) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    let phase = round % epoch_length(p);
    p / (1.0 - p * f64::from(phase))
}

/// `(normal, advanced)` election probabilities of SEP.
pub fn sep_probabilities(p: f64, m: f64, alpha: f64) -> (f64, f64) {
    let denom = 1.0 + alpha * m;
    (p / denom, p * (1.0 + alpha) / denom)
}

/// DEEC election probability, `p * residual / average`, capped at 1.
pub fn deec_probability(p: f64, residual: f64, average: f64) -> f64 {
    if average <= 0.0 {
        return 1.0;
    }
    (p * residual / average).min(1.0)
}

/// Number of advanced nodes in a SEP deployment; they take the lowest ids.
pub fn sep_advanced_count(n_nodes: u32, m: f64) -> u32 {
    (m * f64::from(n_nodes)).floor() as u32
}

#[derive(Debug, Clone)]
pub struct Baseline {
    kind: BaselineKind,
    params: BaselineParams,
    p: f64,
    advanced: Vec<bool>,
    last_ch: Vec<Option<u32>>,
    initial_total: f64,
}

impl Baseline {
    pub fn new(kind: BaselineKind, nodes: &[NodeState], cfg: &NetworkConfig) -> Self {
        let params = BaselineParams::from_config(cfg);
        let n_adv = match kind {
            BaselineKind::Sep => sep_advanced_count(cfg.n_nodes, params.sep_advanced_fraction),
            _ => 0,
        };
        Self {
            kind,
            params,
            p: cfg.p_desired,
            advanced: (0..nodes.len() as u32).map(|i| i < n_adv).collect(),
            last_ch: vec![None; nodes.len()],
            initial_total: nodes.iter().map(|n| n.residual_energy).sum(),
        }
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    /// Starting energy of node `id` under this protocol.
    pub fn initial_energy(kind: BaselineKind, id: NodeId, cfg: &NetworkConfig) -> f64 {
        let n_adv = sep_advanced_count(cfg.n_nodes, cfg.sep_advanced_fraction);
        if kind == BaselineKind::Sep && id.0 < n_adv {
            cfg.initial_energy * (1.0 + cfg.sep_energy_factor)
        } else {
            cfg.initial_energy
        }
    }

    fn average_energy(&self, nodes: &[NodeState], round: u32) -> f64 {
        let n = nodes.len() as f64;
        match self.params.deec_rounds_estimate {
            Some(r_est) => self.initial_total / n * (1.0 - f64::from(round) / f64::from(r_est)),
            None => nodes.iter().map(|n| n.residual_energy).sum::<f64>() / n,
        }
    }

    fn probability(&self, node: &NodeState, avg: f64) -> f64 {
        match self.kind {
            BaselineKind::Leach => self.p,
            BaselineKind::Sep => {
                let (p_nrm, p_adv) =
                    sep_probabilities(self.p, self.params.sep_advanced_fraction, self.params.sep_energy_factor);
                if self.advanced[node.id.index()] {
                    p_adv
                } else {
                    p_nrm
                }
            }
            BaselineKind::Deec => deec_probability(self.p, node.residual_energy, avg),
        }
    }

    fn threshold(&self, node: &NodeState, round: u32, avg: f64) -> f64 {
        let p = self.probability(node, avg);
        let epoch_start = if p >= 1.0 {
            round
        } else {
            round - round % epoch_length(p)
        };
        let eligible = self.last_ch[node.id.index()].is_none_or(|r| r < epoch_start);
        if eligible {
            rotating_threshold(p, round)
        } else {
            0.0
        }
    }
}

impl Protocol for Baseline {
    fn run_round(
        &mut self,
        nodes: &mut [NodeState],
        cfg: &NetworkConfig,
        round: u32,
        rng: &mut SimRng,
    ) -> RoundOutcome {
        if !nodes.iter().any(NodeState::is_alive) {
            return RoundOutcome::Terminal(RoundRecord::snapshot(round, nodes, 0, Default::default()));
        }
        for node in nodes.iter_mut() {
            node.is_ch = false;
            node.cch_flag = false;
            node.cluster_of = None;
        }

        let avg = self.average_energy(nodes, round);
        let mut heads = Vec::new();
        for node in nodes.iter().filter(|n| n.is_active()) {
            let u: f64 = rng.gen();
            if u < self.threshold(node, round, avg) {
                heads.push(node.id);
            }
        }
        if heads.is_empty() {
            heads.extend(richest_active(nodes));
        }
        for &h in &heads {
            self.last_ch[h.index()] = Some(round);
            nodes[h.index()].is_ch = true;
        }

        let clusters = associate_members(&heads, nodes);
        let report = run_ntp(&clusters, nodes, cfg);
        RoundOutcome::Completed(RoundRecord::snapshot(round, nodes, clusters.len() as u32, report))
    }
}
