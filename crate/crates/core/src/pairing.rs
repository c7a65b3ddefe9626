//! Base-station side coupling of sensor nodes.
//!
//! Nodes of the same application type that lie within `pairing_range` of
//! each other are coupled greedily, closest eligible pair first. The nearer
//! member of each pair (with respect to the base station) starts Active and
//! its partner starts asleep; uncoupled nodes stay Active for life.

use serde::{Deserialize, Serialize};

use crate::model::{distance, Mode, NodeId, NodeState, Position};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PairingTable {
    /// Coupled nodes, `(a, b)` with `a < b`, sorted by `a`.
    pub pairs: Vec<(NodeId, NodeId)>,
    /// Nodes left without a partner, ascending.
    pub isolated: Vec<NodeId>,
}

impl PairingTable {
    pub fn partner_of(&self, id: NodeId) -> Option<NodeId> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == id {
                Some(b)
            } else if b == id {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Writes the partner links into the node states.
    pub fn apply(&self, nodes: &mut [NodeState]) {
        for node in nodes.iter_mut() {
            node.partner = None;
        }
        for &(a, b) in &self.pairs {
            nodes[a.index()].partner = Some(b);
            nodes[b.index()].partner = Some(a);
        }
    }

    /// Sum of intra-pair distances.
    pub fn total_distance(&self, nodes: &[NodeState]) -> f64 {
        self.pairs
            .iter()
            .map(|&(a, b)| distance(position_of(nodes, a), position_of(nodes, b)))
            .sum()
    }
}

fn position_of(nodes: &[NodeState], id: NodeId) -> Position {
    nodes
        .iter()
        .find(|n| n.id == id)
        .map(|n| n.position)
        .expect("node id present")
}

/// Greedy global-minimum-distance matching.
///
/// The result depends only on the set of nodes, not on their order in
/// `nodes`. Equal distances are resolved by the smaller first id, then the
/// smaller second id.
pub fn compute_pairs(nodes: &[NodeState], pairing_range: f64) -> PairingTable {
    let mut sorted: Vec<&NodeState> = nodes.iter().collect();
    sorted.sort_by_key(|n| n.id);

    let mut candidates = Vec::new();
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            if a.app_type != b.app_type {
                continue;
            }
            let d = distance(a.position, b.position);
            if d <= pairing_range {
                candidates.push((d, a.id, b.id));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut matched = std::collections::HashSet::new();
    let mut pairs = Vec::new();
    for (_, a, b) in candidates {
        if matched.contains(&a) || matched.contains(&b) {
            continue;
        }
        matched.insert(a);
        matched.insert(b);
        pairs.push((a, b));
    }
    pairs.sort();

    let isolated = sorted.iter().map(|n| n.id).filter(|id| !matched.contains(id)).collect();
    PairingTable { pairs, isolated }
}

/// Assigns the starting mode of every live node: in each pair the member
/// strictly nearer the base station is Active (lower id on a tie) and the
/// other sleeps; isolated nodes are Active.
pub fn initial_modes(nodes: &mut [NodeState], table: &PairingTable, bs: Position) {
    for &id in &table.isolated {
        let node = &mut nodes[id.index()];
        if node.is_alive() {
            node.mode = Mode::Active;
        }
    }
    for &(a, b) in &table.pairs {
        let da = distance(nodes[a.index()].position, bs);
        let db = distance(nodes[b.index()].position, bs);
        // a < b, so a wins ties
        let (awake, asleep) = if db < da { (b, a) } else { (a, b) };
        if nodes[awake.index()].is_alive() {
            nodes[awake.index()].mode = Mode::Active;
        }
        if nodes[asleep.index()].is_alive() {
            nodes[asleep.index()].mode = Mode::Sleep;
        }
    }
}
