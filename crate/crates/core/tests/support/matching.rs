//! Exhaustive matching oracle for small instances. Independent of the
//! greedy matcher: it enumerates every set of disjoint eligible pairs.

use eesaa_core::model::distance;
use eesaa_core::NodeState;

/// `best[k]` is the minimum total distance over all matchings with exactly
/// `k` pairs, or `None` if no matching of that size exists.
pub fn min_total_by_cardinality(nodes: &[NodeState], range: f64) -> Vec<Option<f64>> {
    let n = nodes.len();
    let mut best = vec![None; n / 2 + 1];
    let mut used = vec![false; n];
    recurse(nodes, range, 0, &mut used, 0, 0.0, &mut best);
    best
}

fn recurse(
    nodes: &[NodeState],
    range: f64,
    start: usize,
    used: &mut [bool],
    pairs: usize,
    total: f64,
    best: &mut [Option<f64>],
) {
    match best[pairs] {
        Some(b) if b <= total => {}
        _ => best[pairs] = Some(total),
    }
    let n = nodes.len();
    let Some(i) = (start..n).find(|&i| !used[i]) else {
        return;
    };
    // leave i unmatched
    used[i] = true;
    recurse(nodes, range, i + 1, used, pairs, total, best);
    // or match it with some later j
    for j in i + 1..n {
        if used[j] || nodes[i].app_type != nodes[j].app_type {
            continue;
        }
        let d = distance(nodes[i].position, nodes[j].position);
        if d > range {
            continue;
        }
        used[j] = true;
        recurse(nodes, range, i + 1, used, pairs + 1, total + d, best);
        used[j] = false;
    }
    used[i] = false;
}
