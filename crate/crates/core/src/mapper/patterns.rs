//! Structure extraction: motif subgraph matching, ring detection and fused
//! ring systems.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::MapError;
use crate::gnn::GraphInstance;

/// Largest ring size considered by ring and fused-ring patterns.
pub const MAX_RING_SIZE: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StructurePattern {
    /// A connected pattern graph. `nodes[i]` optionally names a feature the
    /// matched node must carry.
    MotifGraph { nodes: Vec<Option<String>>, edges: Vec<(usize, usize)> },
    /// A chordless cycle of `size` nodes. `positions` is empty or lists one
    /// optional feature constraint per position, matched up to rotation and
    /// reflection. `aromatic` requires every ring node to carry the
    /// `aromatic` feature.
    Ring {
        size: usize,
        #[serde(default)]
        positions: Vec<Option<String>>,
        #[serde(default)]
        aromatic: bool,
    },
    /// A system of at least `min_count` chordless rings connected by shared
    /// edges.
    FusedRings { min_count: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StructureMatch {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl StructurePattern {
    pub fn validate(&self) -> Result<(), MapError> {
        let bad = |reason: &str| Err(MapError::InvalidPattern(reason.to_string()));
        match self {
            StructurePattern::MotifGraph { nodes, edges } => {
                if nodes.is_empty() || edges.is_empty() {
                    return bad("motif needs at least one edge");
                }
                if edges.iter().any(|&(u, v)| u >= nodes.len() || v >= nodes.len() || u == v) {
                    return bad("motif edge out of range or self loop");
                }
                let mut seen = vec![false; nodes.len()];
                let mut stack = vec![0];
                seen[0] = true;
                while let Some(u) = stack.pop() {
                    for &(a, b) in edges {
                        for (x, y) in [(a, b), (b, a)] {
                            if x == u && !seen[y] {
                                seen[y] = true;
                                stack.push(y);
                            }
                        }
                    }
                }
                if seen.contains(&false) {
                    return bad("motif is not connected");
                }
                Ok(())
            }
            StructurePattern::Ring { size, positions, .. } => {
                if *size < 3 || *size > MAX_RING_SIZE {
                    return bad("ring size must be between 3 and 8");
                }
                if !positions.is_empty() && positions.len() != *size {
                    return bad("ring positions must match the ring size");
                }
                Ok(())
            }
            StructurePattern::FusedRings { min_count } => {
                if *min_count < 2 {
                    return bad("fused ring systems need at least two rings");
                }
                Ok(())
            }
        }
    }

    /// Feature names the pattern refers to.
    pub fn feature_names(&self) -> BTreeSet<&str> {
        match self {
            StructurePattern::MotifGraph { nodes, .. } => nodes.iter().flatten().map(String::as_str).collect(),
            StructurePattern::Ring { positions, aromatic, .. } => {
                let mut names: BTreeSet<&str> = positions.iter().flatten().map(String::as_str).collect();
                if *aromatic {
                    names.insert("aromatic");
                }
                names
            }
            StructurePattern::FusedRings { .. } => BTreeSet::new(),
        }
    }
}

fn resolve(feature_names: &[String], name: &Option<String>) -> Result<Option<usize>, MapError> {
    match name {
        None => Ok(None),
        Some(n) => feature_names
            .iter()
            .position(|f| f == n)
            .map(Some)
            .ok_or_else(|| MapError::UnknownFeature(n.clone())),
    }
}

fn has(graph: &GraphInstance, node: usize, column: Option<usize>) -> bool {
    column.is_none_or(|c| graph.features[[node, c]] > 0.5)
}

/// All matches of `pattern`, deduplicated by node set and sorted by node tuple.
pub fn extract_structures(
    graph: &GraphInstance,
    feature_names: &[String],
    pattern: &StructurePattern,
) -> Result<Vec<StructureMatch>, MapError> {
    pattern.validate()?;
    let mut matches = match pattern {
        StructurePattern::MotifGraph { nodes, edges } => {
            let columns = nodes.iter().map(|n| resolve(feature_names, n)).collect::<Result<Vec<_>, _>>()?;
            match_motif(graph, &columns, edges)
        }
        StructurePattern::Ring { size, positions, aromatic } => {
            let columns = positions.iter().map(|n| resolve(feature_names, n)).collect::<Result<Vec<_>, _>>()?;
            let aromatic_col = if *aromatic {
                Some(resolve(feature_names, &Some("aromatic".to_string()))?.expect("named"))
            } else {
                None
            };
            chordless_cycles(graph, *size, *size)
                .into_iter()
                .filter(|cycle| cycle.iter().all(|&v| has(graph, v, aromatic_col)))
                .filter(|cycle| columns.is_empty() || positions_fit(graph, cycle, &columns))
                .map(|cycle| cycle_match(&cycle))
                .collect()
        }
        StructurePattern::FusedRings { min_count } => fused_systems(graph, *min_count),
    };
    matches.sort();
    matches.dedup_by(|a, b| a.nodes == b.nodes);
    Ok(matches)
}

fn match_motif(graph: &GraphInstance, columns: &[Option<usize>], edges: &[(usize, usize)]) -> Vec<StructureMatch> {
    let k = columns.len();
    if k > graph.num_nodes {
        return Vec::new();
    }
    // Visit pattern nodes in BFS order so every node after the first has an
    // already-placed neighbour.
    let mut order = vec![0];
    let mut placed = vec![false; k];
    placed[0] = true;
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !placed[y] {
                    placed[y] = true;
                    order.push(y);
                }
            }
        }
        i += 1;
    }
    let adj = graph.neighbors();
    let mut assignment = vec![usize::MAX; k];
    let mut used = vec![false; graph.num_nodes];
    let mut seen_sets = BTreeSet::new();
    let mut out = Vec::new();
    search_motif(graph, &adj, columns, edges, &order, 0, &mut assignment, &mut used, &mut seen_sets, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn search_motif(
    graph: &GraphInstance,
    adj: &[Vec<usize>],
    columns: &[Option<usize>],
    edges: &[(usize, usize)],
    order: &[usize],
    depth: usize,
    assignment: &mut [usize],
    used: &mut [bool],
    seen_sets: &mut BTreeSet<Vec<usize>>,
    out: &mut Vec<StructureMatch>,
) {
    if depth == order.len() {
        let mut nodes = assignment.to_vec();
        nodes.sort_unstable();
        if seen_sets.insert(nodes.clone()) {
            let mut es: Vec<(usize, usize)> = edges
                .iter()
                .map(|&(a, b)| (assignment[a].min(assignment[b]), assignment[a].max(assignment[b])))
                .collect();
            es.sort_unstable();
            es.dedup();
            out.push(StructureMatch { nodes, edges: es });
        }
        return;
    }
    let p = order[depth];
    for v in 0..graph.num_nodes {
        if used[v] || !has(graph, v, columns[p]) {
            continue;
        }
        let consistent = edges.iter().all(|&(a, b)| {
            let other = if a == p {
                b
            } else if b == p {
                a
            } else {
                return true;
            };
            let w = assignment[other];
            w == usize::MAX || adj[v].contains(&w)
        });
        if !consistent {
            continue;
        }
        assignment[p] = v;
        used[v] = true;
        search_motif(graph, adj, columns, edges, order, depth + 1, assignment, used, seen_sets, out);
        used[v] = false;
        assignment[p] = usize::MAX;
    }
}

/// Chordless simple cycles with `min..=max` nodes, each listed once as a
/// node sequence starting at its smallest node.
pub fn chordless_cycles(graph: &GraphInstance, min: usize, max: usize) -> Vec<Vec<usize>> {
    let adj = graph.neighbors();
    let mut out = Vec::new();
    for start in 0..graph.num_nodes {
        let mut path = vec![start];
        extend_cycle(&adj, start, min, max, &mut path, &mut out);
    }
    out
}

fn extend_cycle(
    adj: &[Vec<usize>],
    start: usize,
    min: usize,
    max: usize,
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let last = *path.last().expect("non-empty path");
    for &next in &adj[last] {
        if next == start && path.len() >= min.max(3) && path[1] < last {
            if is_chordless(adj, path) {
                out.push(path.clone());
            }
            continue;
        }
        if next <= start || path.contains(&next) || path.len() == max {
            continue;
        }
        // A chord from `next` back into the path (other than to `last`, or to
        // `start` when closing) rules out every extension.
        let inner = path.get(1..path.len() - 1).unwrap_or(&[]);
        let chord = inner.iter().any(|&p| adj[next].contains(&p));
        if chord {
            continue;
        }
        path.push(next);
        extend_cycle(adj, start, min, max, path, out);
        path.pop();
    }
}

fn is_chordless(adj: &[Vec<usize>], cycle: &[usize]) -> bool {
    let k = cycle.len();
    for i in 0..k {
        for j in i + 2..k {
            if i == 0 && j == k - 1 {
                continue;
            }
            if adj[cycle[i]].contains(&cycle[j]) {
                return false;
            }
        }
    }
    true
}

fn positions_fit(graph: &GraphInstance, cycle: &[usize], columns: &[Option<usize>]) -> bool {
    let k = cycle.len();
    (0..k).any(|rot| {
        [true, false].iter().any(|&forward| {
            (0..k).all(|i| {
                let idx = if forward { (rot + i) % k } else { (rot + k - i) % k };
                has(graph, cycle[idx], columns[i])
            })
        })
    })
}

fn cycle_match(cycle: &[usize]) -> StructureMatch {
    let k = cycle.len();
    let mut nodes = cycle.to_vec();
    nodes.sort_unstable();
    let mut edges: Vec<(usize, usize)> = (0..k)
        .map(|i| {
            let (a, b) = (cycle[i], cycle[(i + 1) % k]);
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    StructureMatch { nodes, edges }
}

fn fused_systems(graph: &GraphInstance, min_count: usize) -> Vec<StructureMatch> {
    let rings: Vec<StructureMatch> =
        chordless_cycles(graph, 3, MAX_RING_SIZE).iter().map(|c| cycle_match(c)).collect();
    let mut component = vec![usize::MAX; rings.len()];
    let mut out = Vec::new();
    for seed in 0..rings.len() {
        if component[seed] != usize::MAX {
            continue;
        }
        component[seed] = seed;
        let mut members = vec![seed];
        let mut i = 0;
        while i < members.len() {
            let r = members[i];
            for other in 0..rings.len() {
                if component[other] == usize::MAX && rings[r].edges.iter().any(|e| rings[other].edges.contains(e)) {
                    component[other] = seed;
                    members.push(other);
                }
            }
            i += 1;
        }
        if members.len() >= min_count {
            let nodes: BTreeSet<usize> = members.iter().flat_map(|&r| rings[r].nodes.iter().copied()).collect();
            let edges: BTreeSet<(usize, usize)> =
                members.iter().flat_map(|&r| rings[r].edges.iter().copied()).collect();
            out.push(StructureMatch { nodes: nodes.into_iter().collect(), edges: edges.into_iter().collect() });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn names() -> Vec<String> {
        ["C", "H", "N", "O"].iter().map(|s| s.to_string()).collect()
    }

    fn graph(labels: &[usize], edges: &[(usize, usize)]) -> GraphInstance {
        let mut x = Array2::zeros((labels.len(), 4));
        for (i, &l) in labels.iter().enumerate() {
            x[[i, l]] = 1.0;
        }
        GraphInstance::new("t", labels.len(), edges.iter().copied(), x, 0).unwrap()
    }

    fn methyl() -> StructurePattern {
        let c = Some("C".to_string());
        let h = Some("H".to_string());
        StructurePattern::MotifGraph { nodes: vec![c, h.clone(), h.clone(), h], edges: vec![(0, 1), (0, 2), (0, 3)] }
    }

    #[test]
    fn methyl_on_ch3() {
        let g = graph(&[0, 1, 1, 1, 0], &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let m = extract_structures(&g, &names(), &methyl()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].edges, vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn pattern_larger_than_graph() {
        let g = graph(&[0, 1], &[(0, 1)]);
        assert!(extract_structures(&g, &names(), &methyl()).unwrap().is_empty());
    }

    #[test]
    fn unknown_feature_is_an_error() {
        let g = graph(&[0, 1], &[(0, 1)]);
        let p = StructurePattern::Ring { size: 3, positions: vec![], aromatic: true };
        assert_eq!(extract_structures(&g, &names(), &p), Err(MapError::UnknownFeature("aromatic".into())));
    }

    #[test]
    fn hexagon_with_pendant() {
        let g = graph(&[0; 7], &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (2, 6)]);
        let p = StructurePattern::Ring { size: 6, positions: vec![Some("C".into()); 6], aromatic: false };
        let m = extract_structures(&g, &names(), &p).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].edges.len(), 6);
    }

    #[test]
    fn ring_positions_match_up_to_rotation() {
        // 5-ring with one nitrogen at node 3.
        let g = graph(&[0, 0, 0, 2, 0], &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let mut pos = vec![None; 5];
        pos[0] = Some("N".to_string());
        let p = StructurePattern::Ring { size: 5, positions: pos, aromatic: false };
        assert_eq!(extract_structures(&g, &names(), &p).unwrap().len(), 1);
        let all_c = StructurePattern::Ring { size: 5, positions: vec![Some("C".into()); 5], aromatic: false };
        assert!(extract_structures(&g, &names(), &all_c).unwrap().is_empty());
    }

    #[test]
    fn fused_rings() {
        // Two hexagons sharing edge (0,1), plus a separate triangle.
        let g = graph(
            &[0; 13],
            &[
                (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0),
                (0, 6), (6, 7), (7, 8), (8, 9), (9, 1),
                (10, 11), (11, 12), (12, 10),
            ],
        );
        let rings = chordless_cycles(&g, 3, 8);
        assert_eq!(rings.len(), 3, "{rings:?}");
        let two = extract_structures(&g, &names(), &StructurePattern::FusedRings { min_count: 2 }).unwrap();
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].nodes.len(), 10);
        assert_eq!(two[0].edges.len(), 11);
        assert!(extract_structures(&g, &names(), &StructurePattern::FusedRings { min_count: 3 }).unwrap().is_empty());
    }

    #[test]
    fn invalid_patterns() {
        assert!(StructurePattern::Ring { size: 2, positions: vec![], aromatic: false }.validate().is_err());
        let disconnected = StructurePattern::MotifGraph { nodes: vec![None; 4], edges: vec![(0, 1), (2, 3)] };
        assert!(disconnected.validate().is_err());
    }
}
