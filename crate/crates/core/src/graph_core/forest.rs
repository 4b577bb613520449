use std::collections::BTreeSet;

use super::{
    format_violations, validate_agraph, validate_pre_agraph, AGraph, Dart, Graph,
    UnionFind, Wedge,
};
use crate::error::{Error, Result};

/// Result of contracting a set of edges.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub graph: Graph,
    pub vertex_map: Vec<usize>,
    /// Image of every old dart; `None` for contracted darts.
    pub dart_map: Vec<Option<Dart>>,
}

impl Contraction {
    /// Image of a dart path with contracted darts dropped.
    pub fn map_path(&self, path: &[Dart]) -> Vec<Dart> {
        path.iter().filter_map(|&d| self.dart_map[d]).collect()
    }
}

/// Contracts `edges`; surviving vertices and edges keep their relative order.
pub fn contract_edges(graph: &Graph, edges: &BTreeSet<usize>) -> Contraction {
    let nv = graph.num_vertices();
    let mut uf = UnionFind::new(nv);
    for &e in edges {
        let (u, v) = graph.endpoints(e);
        uf.union(u, v);
    }
    let mut index = vec![usize::MAX; nv];
    let mut next = 0;
    let mut vertex_map = vec![0; nv];
    for (v, slot) in vertex_map.iter_mut().enumerate() {
        let r = uf.find(v);
        if index[r] == usize::MAX {
            index[r] = next;
            next += 1;
        }
        *slot = index[r];
    }
    let mut dart_map = vec![None; graph.num_darts()];
    let mut new_edges = Vec::new();
    for e in (0..graph.num_edges()).filter(|e| !edges.contains(e)) {
        let (u, v) = graph.endpoints(e);
        let ne = new_edges.len();
        new_edges.push((vertex_map[u], vertex_map[v]));
        dart_map[2 * e] = Some(2 * ne);
        dart_map[2 * e + 1] = Some(2 * ne + 1);
    }
    Contraction {
        graph: Graph::new(next, &new_edges),
        vertex_map,
        dart_map,
    }
}

/// Acyclic in the graph, and acyclic in the graph with wedge cycles collapsed.
pub fn is_forest(g: &AGraph, edges: &BTreeSet<usize>) -> bool {
    let graph = &g.graph;
    if edges.iter().any(|&e| e >= graph.num_edges()) {
        return false;
    }
    let mut uf = UnionFind::new(graph.num_vertices());
    for &e in edges {
        let (u, v) = graph.endpoints(e);
        if !uf.union(u, v) {
            return false;
        }
    }
    let mut hat = UnionFind::new(graph.num_vertices());
    let mut in_wedge = BTreeSet::new();
    for j in 0..g.wedges.len() {
        let vs: Vec<usize> = g.wedge_vertices(j).into_iter().collect();
        for w in vs.windows(2) {
            hat.union(w[0], w[1]);
        }
        in_wedge.extend(g.wedge_edges(j));
    }
    edges.iter().filter(|e| !in_wedge.contains(e)).all(|&e| {
        let (u, v) = graph.endpoints(e);
        hat.union(u, v)
    })
}

/// Contracts `edges` and carries the wedge cycles along, without validation.
pub fn contract_agraph(g: &AGraph, edges: &BTreeSet<usize>) -> (AGraph, Contraction) {
    let c = contract_edges(&g.graph, edges);
    let wedges = g
        .wedges
        .iter()
        .map(|w| Wedge {
            base: c.vertex_map[w.base],
            circles: w.circles.iter().map(|circ| c.map_path(circ)).collect(),
        })
        .collect();
    (AGraph::new(c.graph.clone(), wedges, g.basis.clone()), c)
}

/// Collapses a forest; the quotient must again satisfy the strict conditions.
pub fn collapse_forest(g: &AGraph, edges: &BTreeSet<usize>) -> Result<AGraph> {
    if !is_forest(g, edges) {
        return Err(Error::InvalidForest(format!("{edges:?} is not a forest")));
    }
    let (h, _) = contract_agraph(g, edges);
    let v = validate_agraph(&h);
    if v.is_empty() {
        Ok(h)
    } else {
        Err(Error::InvalidGraph(format_violations(&v)))
    }
}

/// Every forest of `g` (including the empty one), in lexicographic order.
pub fn forests(g: &AGraph) -> Vec<BTreeSet<usize>> {
    fn go(
        g: &AGraph,
        e: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<BTreeSet<usize>>,
    ) {
        if e == g.graph.num_edges() {
            out.push(current.iter().copied().collect());
            return;
        }
        go(g, e + 1, current, out);
        current.push(e);
        if is_forest(g, &current.iter().copied().collect()) {
            go(g, e + 1, current, out);
        }
        current.pop();
    }
    let mut out = Vec::new();
    go(g, 0, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Collapses every edge shared by two or more wedge cycles.
pub fn collapse_wedge_intersections(g: &AGraph) -> Result<AGraph> {
    let v = validate_pre_agraph(g);
    if !v.is_empty() {
        return Err(Error::InvalidGraph(format_violations(&v)));
    }
    let shared: BTreeSet<usize> = g
        .edge_masks()
        .iter()
        .enumerate()
        .filter(|(_, m)| m.count_ones() >= 2)
        .map(|(e, _)| e)
        .collect();
    if shared.is_empty() {
        return Ok(g.clone());
    }
    let (h, _) = contract_agraph(g, &shared);
    let v = validate_agraph(&h);
    if v.is_empty() {
        Ok(h)
    } else {
        Err(Error::InvalidGraph(format_violations(&v)))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{rose, validate_agraph, Wedge};
    use super::*;
    use crate::free_group::BasisSpec;

    /// Two vertices: a wedge circle through both, plus a free loop at each.
    fn theta_with_wedge() -> AGraph {
        let b = BasisSpec::new(3, &[1]).unwrap();
        let graph = Graph::new(2, &[(0, 1), (1, 0), (0, 0), (1, 1)]);
        let g = AGraph::new(graph, vec![Wedge { base: 0, circles: vec![vec![0, 2]] }], b);
        assert!(validate_agraph(&g).is_empty());
        g
    }

    #[test]
    fn forest_checks() {
        let g = theta_with_wedge();
        assert!(is_forest(&g, &BTreeSet::from([0])));
        assert!(!is_forest(&g, &BTreeSet::from([0, 1])));
        assert!(!is_forest(&g, &BTreeSet::from([2])));
        // two parallel non-wedge edges between two wedge cycles
        let b = BasisSpec::new(3, &[1, 1]).unwrap();
        let graph = Graph::new(2, &[(0, 0), (1, 1), (0, 1), (0, 1)]);
        let g2 = AGraph::new(
            graph,
            vec![
                Wedge { base: 0, circles: vec![vec![0]] },
                Wedge { base: 1, circles: vec![vec![2]] },
            ],
            b,
        );
        assert!(is_forest(&g2, &BTreeSet::from([2])));
        assert!(!is_forest(&g2, &BTreeSet::from([2, 3])));
    }

    #[test]
    fn collapse_to_rose() {
        let g = theta_with_wedge();
        assert_eq!(collapse_forest(&g, &BTreeSet::new()).unwrap(), g);
        let r = collapse_forest(&g, &BTreeSet::from([0])).unwrap();
        assert_eq!((r.graph.num_vertices(), r.graph.num_edges()), (1, 3));
        assert_eq!(r.wedges[0].circles, vec![vec![0]]);
        assert_eq!(forests(&g).len(), 3);
        assert!(collapse_forest(&g, &BTreeSet::from([0, 1])).is_err());
    }

    #[test]
    fn rose_is_unchanged_by_intersection_collapse() {
        let r = rose(&BasisSpec::new(3, &[1, 1]).unwrap());
        assert_eq!(collapse_wedge_intersections(&r).unwrap(), r);
    }
}
