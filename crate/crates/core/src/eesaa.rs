//! The sleep/awake aware clustering protocol.
//!
//! A round runs in six steps:
//!
//! 1. The nodes flagged as next cluster heads in the previous round act as
//!    cluster heads. When none of them is alive (always the case in round 1)
//!    Active nodes run a threshold election instead.
//! 2. Every other Active node joins its nearest cluster head.
//! 3. Each cluster head hands over to the candidate with the most residual
//!    energy, which becomes the cluster head of the next round.
//! 4. Active nodes transmit to their heads; heads aggregate and forward one
//!    packet to the base station. Sleeping nodes spend nothing.
//! 5. Coupled nodes swap between Active and Sleep (see [`next_mode`]).
//! 6. A [`RoundRecord`] is produced. Head and membership flags of the round
//!    stay set until the next round clears them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Protocol, RoundOutcome, RoundRecord, SimRng};
use crate::error::ModelError;
use crate::model::{ch_round_energy, distance, tx_energy, Mode, NetworkConfig, NodeId, NodeState};
use crate::pairing::{compute_pairs, initial_modes, PairingTable};

/// One cluster for the current round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub ch_id: NodeId,
    /// Ascending.
    pub member_ids: Vec<NodeId>,
    pub next_cch: Option<NodeId>,
}

/// Rounds in one election epoch, `ceil(1/p)`.
pub fn epoch_length(p: f64) -> u32 {
    let inv = 1.0 / p;
    let nearest = inv.round();
    // 1/0.1 and friends must not round up to 11
    if (inv - nearest).abs() < 1e-9 {
        nearest as u32
    } else {
        inv.ceil() as u32
    }
}

fn check_probability(p: f64) -> Result<(), ModelError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter(
            "election probability must lie strictly between 0 and 1",
        ))
    }
}

/// Rotating election threshold `p / (1 - p * (round mod ceil(1/p)))` for an
/// eligible node. Ineligible nodes use 0.
pub fn election_threshold(p_desired: f64, round: u32) -> Result<f64, ModelError> {
    check_probability(p_desired)?;
    let phase = round % epoch_length(p_desired);
    Ok(p_desired / (1.0 - p_desired * f64::from(phase)))
}

/// Threshold election among the Active, alive nodes.
///
/// Every Active node draws one uniform number, in ascending id order, and is
/// elected when the draw falls below the threshold and `eligible(id)` holds.
/// If nobody is elected the Active node with the most residual energy (lowest
/// id on a tie) becomes the only head.
pub fn elect_pchs(
    nodes: &[NodeState],
    p_desired: f64,
    round: u32,
    eligible: impl Fn(NodeId) -> bool,
    rng: &mut SimRng,
) -> Result<Vec<NodeId>, ModelError> {
    let threshold = election_threshold(p_desired, round)?;
    let mut elected = Vec::new();
    for node in nodes.iter().filter(|n| n.is_active()) {
        let u: f64 = rng.gen();
        if eligible(node.id) && u < threshold {
            elected.push(node.id);
        }
    }
    if elected.is_empty() {
        if let Some(best) = richest_active(nodes) {
            elected.push(best);
        }
    }
    Ok(elected)
}

pub(crate) fn richest_active(nodes: &[NodeState]) -> Option<NodeId> {
    nodes
        .iter()
        .filter(|n| n.is_active())
        .fold(None::<&NodeState>, |best, n| match best {
            Some(b) if b.residual_energy >= n.residual_energy => Some(b),
            _ => Some(n),
        })
        .map(|n| n.id)
}

/// Attaches every Active non-head node to its nearest head (lower head id on
/// a tie). Distance stands in for received signal strength. Returns one
/// cluster per head, ordered by head id, and records `cluster_of`.
pub fn associate_members(chs: &[NodeId], nodes: &mut [NodeState]) -> Vec<ClusterAssignment> {
    let mut heads = chs.to_vec();
    heads.sort();
    heads.dedup();
    let mut clusters: Vec<ClusterAssignment> = heads
        .iter()
        .map(|&ch_id| ClusterAssignment {
            ch_id,
            member_ids: Vec::new(),
            next_cch: None,
        })
        .collect();
    if clusters.is_empty() {
        return clusters;
    }
    for i in 0..nodes.len() {
        let node = &nodes[i];
        if !node.is_active() || heads.binary_search(&node.id).is_ok() {
            continue;
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, &h) in heads.iter().enumerate() {
            let d = distance(node.position, nodes[h.index()].position);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        clusters[best].member_ids.push(node.id);
        nodes[i].cluster_of = Some(heads[best]);
    }
    clusters
}

/// Picks the next cluster head from the current head and its members: most
/// residual energy first, then nearest to the current head, then lowest id.
/// Sets `next_cch` and the winner's `cch_flag`.
pub fn select_cch(cluster: &mut ClusterAssignment, nodes: &mut [NodeState]) -> NodeId {
    let head_pos = nodes[cluster.ch_id.index()].position;
    let mut best: Option<(f64, f64, NodeId)> = None;
    for &id in std::iter::once(&cluster.ch_id).chain(cluster.member_ids.iter()) {
        let n = &nodes[id.index()];
        if !n.is_alive() {
            continue;
        }
        let key = (n.residual_energy, distance(n.position, head_pos), id);
        best = match best {
            None => Some(key),
            Some(b) => {
                let better = key.0 > b.0 || (key.0 == b.0 && (key.1 < b.1 || (key.1 == b.1 && key.2 < b.2)));
                Some(if better { key } else { b })
            }
        };
    }
    let (_, _, winner) = best.expect("cluster has a live candidate");
    nodes[winner.index()].cch_flag = true;
    cluster.next_cch = Some(winner);
    winner
}

/// Energy and packet totals of one transmission phase.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NtpReport {
    pub energy_dissipated: f64,
    pub packets_to_ch: u64,
    pub packets_to_bs: u64,
}

/// Data transmission phase. Members send in slot order (ascending id) to
/// their head; each head then pays reception, aggregation and the uplink to
/// the base station in one debit. A node that runs dry mid-transmission dies
/// and its packet is lost.
pub fn run_ntp(clusters: &[ClusterAssignment], nodes: &mut [NodeState], cfg: &NetworkConfig) -> NtpReport {
    let radio = &cfg.radio;
    let mut report = NtpReport::default();
    for cluster in clusters {
        let head = cluster.ch_id;
        if !nodes[head.index()].is_alive() {
            continue;
        }
        let head_pos = nodes[head.index()].position;
        let mut delivered = 0u32;
        for &m in &cluster.member_ids {
            let member = &mut nodes[m.index()];
            if !member.is_active() {
                continue;
            }
            let cost = tx_energy(radio, cfg.packet_bits, distance(member.position, head_pos));
            report.energy_dissipated += member.debit(cost);
            if member.is_alive() {
                delivered += 1;
            }
        }
        report.packets_to_ch += u64::from(delivered);

        let ch = &mut nodes[head.index()];
        let cost = ch_round_energy(
            radio,
            delivered,
            cfg.packet_bits,
            cfg.aggregated_bits,
            distance(ch.position, cfg.bs_position),
        );
        report.energy_dissipated += ch.debit(cost);
        if ch.is_alive() {
            report.packets_to_bs += 1;
        }
    }
    if cfg.sleep_energy > 0.0 {
        for node in nodes.iter_mut().filter(|n| n.mode == Mode::Sleep) {
            report.energy_dissipated += node.debit(cfg.sleep_energy);
        }
    }
    report
}

/// What a node knows about its coupled partner at the end of a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartnerState {
    Uncoupled,
    Dead,
    Alive { cch_flag: bool },
}

/// End-of-round mode transition for a single node.
pub fn next_mode(mode: Mode, cch_flag: bool, partner: PartnerState) -> Mode {
    match (mode, partner) {
        (Mode::Dead, _) => Mode::Dead,
        (_, PartnerState::Uncoupled) | (_, PartnerState::Dead) => Mode::Active,
        (Mode::Active, PartnerState::Alive { .. }) => {
            if cch_flag {
                Mode::Active
            } else {
                Mode::Sleep
            }
        }
        (Mode::Sleep, PartnerState::Alive { cch_flag: partner_cch }) => {
            if partner_cch {
                Mode::Sleep
            } else {
                Mode::Active
            }
        }
    }
}

/// Applies [`next_mode`] to every node against the same end-of-round snapshot.
pub fn node_mode_setup(nodes: &mut [NodeState]) {
    let modes: Vec<Mode> = nodes
        .iter()
        .map(|n| {
            let partner = match n.partner {
                None => PartnerState::Uncoupled,
                Some(p) if !nodes[p.index()].is_alive() => PartnerState::Dead,
                Some(p) => PartnerState::Alive {
                    cch_flag: nodes[p.index()].cch_flag,
                },
            };
            next_mode(n.mode, n.cch_flag, partner)
        })
        .collect();
    for (node, mode) in nodes.iter_mut().zip(modes) {
        node.mode = mode;
    }
}

/// Per-run protocol state.
#[derive(Debug, Clone)]
pub struct Eesaa {
    pairing: PairingTable,
    /// Round in which each node was last elected by threshold.
    last_elected: Vec<Option<u32>>,
}

impl Eesaa {
    /// Couples the deployed nodes and sets their starting modes.
    pub fn setup(nodes: &mut [NodeState], cfg: &NetworkConfig) -> Self {
        let pairing = compute_pairs(nodes, cfg.pairing_range);
        pairing.apply(nodes);
        initial_modes(nodes, &pairing, cfg.bs_position);
        Self {
            pairing,
            last_elected: vec![None; nodes.len()],
        }
    }

    pub fn pairing(&self) -> &PairingTable {
        &self.pairing
    }
}

impl Protocol for Eesaa {
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

        let mut heads: Vec<NodeId> = nodes
            .iter()
            .filter(|n| n.is_alive() && n.cch_flag)
            .map(|n| n.id)
            .collect();
        for node in nodes.iter_mut() {
            node.cch_flag = false;
            node.is_ch = false;
            node.cluster_of = None;
        }
        if heads.is_empty() {
            let epoch = epoch_length(cfg.p_desired);
            let epoch_start = round - round % epoch;
            let last = &self.last_elected;
            heads = elect_pchs(
                nodes,
                cfg.p_desired,
                round,
                |id| last[id.index()].is_none_or(|r| r < epoch_start),
                rng,
            )
            .expect("config validated");
            for &h in &heads {
                self.last_elected[h.index()] = Some(round);
            }
        }
        for &h in &heads {
            nodes[h.index()].is_ch = true;
        }

        let mut clusters = associate_members(&heads, nodes);
        for cluster in &mut clusters {
            select_cch(cluster, nodes);
        }
        let report = run_ntp(&clusters, nodes, cfg);
        node_mode_setup(nodes);

        RoundOutcome::Completed(RoundRecord::snapshot(round, nodes, clusters.len() as u32, report))
    }
}
