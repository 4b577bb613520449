use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{edge_of, AGraph, Graph, UnionFind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Disconnected,
    RankMismatch { expected: usize, found: usize },
    LowValence { vertex: usize, valence: usize },
    WedgeCount { expected: usize, found: usize },
    CircleCount { wedge: usize, expected: usize, found: usize },
    BadBase { wedge: usize },
    CircleNotClosed { wedge: usize, circle: usize },
    CircleNotEmbedded { wedge: usize, circle: usize },
    CirclesOverlap { wedge: usize, a: usize, b: usize },
    WedgesShareEdges { a: usize, b: usize },
    WedgesMeetTwice { a: usize, b: usize, points: usize },
    IntersectionNotTree { a: usize, b: usize },
    IntersectionsNotForest,
    DualGraphCycle,
    CollapsedRank { expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            Disconnected => write!(f, "graph is disconnected"),
            RankMismatch { expected, found } => write!(f, "rank {found}, expected {expected}"),
            LowValence { vertex, valence } => write!(f, "vertex {vertex} has valence {valence}"),
            WedgeCount { expected, found } => {
                write!(f, "{found} wedge cycles, expected {expected}")
            }
            CircleCount { wedge, expected, found } => write!(
                f,
                "wedge {} has {found} circles, expected {expected}",
                wedge + 1
            ),
            BadBase { wedge } => write!(f, "wedge {} base vertex out of range", wedge + 1),
            CircleNotClosed { wedge, circle } => write!(
                f,
                "circle {} of wedge {} is not a closed path at the base",
                circle + 1,
                wedge + 1
            ),
            CircleNotEmbedded { wedge, circle } => write!(
                f,
                "circle {} of wedge {} is not embedded",
                circle + 1,
                wedge + 1
            ),
            CirclesOverlap { wedge, a, b } => write!(
                f,
                "circles {} and {} of wedge {} meet outside the base",
                a + 1,
                b + 1,
                wedge + 1
            ),
            WedgesShareEdges { a, b } => {
                write!(f, "wedge cycles {} and {} share edges", a + 1, b + 1)
            }
            WedgesMeetTwice { a, b, points } => write!(
                f,
                "wedge cycles {} and {} meet in {points} points",
                a + 1,
                b + 1
            ),
            IntersectionNotTree { a, b } => write!(
                f,
                "intersection of wedge cycles {} and {} is not a tree",
                a + 1,
                b + 1
            ),
            IntersectionsNotForest => write!(f, "union of wedge intersections is not a forest"),
            DualGraphCycle => write!(f, "dual graph has a cycle"),
            CollapsedRank { expected, found } => write!(
                f,
                "graph with wedge cycles collapsed has rank {found}, expected {expected}"
            ),
        }
    }
}

/// Bipartite incidence graph: nodes `0..k` are the wedge cycles, the rest are
/// the intersection pieces (points, or connected overlaps in the loose case).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualGraph {
    pub graph: Graph,
    pub num_wedges: usize,
    /// Graph vertices making up each intersection node.
    pub pieces: Vec<BTreeSet<usize>>,
}

impl DualGraph {
    pub fn is_forest(&self) -> bool {
        self.graph.cycle_rank() == 0
    }
}

pub fn dual_graph(g: &AGraph) -> DualGraph {
    let k = g.wedges.len();
    let nv = g.graph.num_vertices();
    let vsets: Vec<BTreeSet<usize>> = (0..k).map(|j| g.wedge_vertices(j)).collect();
    let masks = g.edge_masks();
    let shared: Vec<bool> = (0..nv)
        .map(|v| vsets.iter().filter(|s| s.contains(&v)).count() >= 2)
        .collect();
    let mut uf = UnionFind::new(nv);
    for (e, m) in masks.iter().enumerate() {
        if m.count_ones() >= 2 {
            let (u, v) = g.graph.endpoints(e);
            uf.union(u, v);
        }
    }
    let mut pieces: Vec<BTreeSet<usize>> = Vec::new();
    let mut root_index = std::collections::BTreeMap::new();
    for v in (0..nv).filter(|&v| shared[v]) {
        let r = uf.find(v);
        let idx = *root_index.entry(r).or_insert_with(|| {
            pieces.push(BTreeSet::new());
            pieces.len() - 1
        });
        pieces[idx].insert(v);
    }
    let mut edges = Vec::new();
    for (p, piece) in pieces.iter().enumerate() {
        for (j, vs) in vsets.iter().enumerate() {
            if !vs.is_disjoint(piece) {
                edges.push((j, k + p));
            }
        }
    }
    DualGraph {
        graph: Graph::new(k + pieces.len(), &edges),
        num_wedges: k,
        pieces,
    }
}

fn common_checks(g: &AGraph, out: &mut Vec<Violation>) -> bool {
    let graph = &g.graph;
    let n = g.basis.n();
    if !graph.is_connected() {
        out.push(Violation::Disconnected);
    } else {
        let r = graph.num_edges() + 1 - graph.num_vertices();
        if r != n {
            out.push(Violation::RankMismatch { expected: n, found: r });
        }
    }
    // rank one admits a lone loop
    let min_valence = if n == 1 { 2 } else { 3 };
    for v in 0..graph.num_vertices() {
        let val = graph.valence(v);
        if val < min_valence {
            out.push(Violation::LowValence { vertex: v, valence: val });
        }
    }
    let s = g.basis.s();
    if g.wedges.len() != s.len() {
        out.push(Violation::WedgeCount { expected: s.len(), found: g.wedges.len() });
        return false;
    }
    let mut circles_ok = true;
    for (j, w) in g.wedges.iter().enumerate() {
        if w.circles.len() != s[j] {
            out.push(Violation::CircleCount { wedge: j, expected: s[j], found: w.circles.len() });
            circles_ok = false;
        }
        if w.base >= graph.num_vertices() {
            out.push(Violation::BadBase { wedge: j });
            circles_ok = false;
            continue;
        }
        let mut vsets = Vec::new();
        let mut esets = Vec::new();
        for (i, c) in w.circles.iter().enumerate() {
            if c.is_empty() || c.iter().any(|&d| d >= graph.num_darts()) {
                out.push(Violation::CircleNotClosed { wedge: j, circle: i });
                circles_ok = false;
                continue;
            }
            let closed = graph.tail(c[0]) == w.base
                && graph.head(c[c.len() - 1]) == w.base
                && c.windows(2).all(|p| graph.head(p[0]) == graph.tail(p[1]));
            if !closed {
                out.push(Violation::CircleNotClosed { wedge: j, circle: i });
                circles_ok = false;
                continue;
            }
            let vs: BTreeSet<usize> = c.iter().map(|&d| graph.tail(d)).collect();
            let es: BTreeSet<usize> = c.iter().map(|&d| edge_of(d)).collect();
            if vs.len() != c.len() || es.len() != c.len() {
                out.push(Violation::CircleNotEmbedded { wedge: j, circle: i });
                circles_ok = false;
            }
            vsets.push((i, vs));
            esets.push(es);
        }
        for a in 0..vsets.len() {
            for b in a + 1..vsets.len() {
                let meet: BTreeSet<usize> =
                    vsets[a].1.intersection(&vsets[b].1).copied().collect();
                let base_only = meet.len() == 1 && meet.contains(&w.base);
                if !base_only || !esets[a].is_disjoint(&esets[b]) {
                    out.push(Violation::CirclesOverlap {
                        wedge: j,
                        a: vsets[a].0,
                        b: vsets[b].0,
                    });
                    circles_ok = false;
                }
            }
        }
    }
    circles_ok
}

fn collapsed_rank_check(g: &AGraph, out: &mut Vec<Violation>) {
    if !g.graph.is_connected() {
        return;
    }
    let expected = g.basis.free_rank();
    let found = g.collapse_wedges().cycle_rank();
    if found != expected {
        out.push(Violation::CollapsedRank { expected, found });
    }
}

/// All violations of the strict conditions: wedge cycles meet pairwise in at
/// most a point and their dual graph is a forest.
pub fn validate_agraph(g: &AGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    if !common_checks(g, &mut out) {
        return out;
    }
    let k = g.wedges.len();
    let vsets: Vec<BTreeSet<usize>> = (0..k).map(|j| g.wedge_vertices(j)).collect();
    let esets: Vec<BTreeSet<usize>> = (0..k).map(|j| g.wedge_edges(j)).collect();
    let mut pairwise_ok = true;
    for a in 0..k {
        for b in a + 1..k {
            if !esets[a].is_disjoint(&esets[b]) {
                out.push(Violation::WedgesShareEdges { a, b });
                pairwise_ok = false;
            }
            let points = vsets[a].intersection(&vsets[b]).count();
            if points > 1 {
                out.push(Violation::WedgesMeetTwice { a, b, points });
                pairwise_ok = false;
            }
        }
    }
    if pairwise_ok {
        if !dual_graph(g).is_forest() {
            out.push(Violation::DualGraphCycle);
        }
        collapsed_rank_check(g, &mut out);
    }
    out
}

/// All violations of the loose conditions: pairwise intersections are empty,
/// a point or a tree, and together they form a forest.
pub fn validate_pre_agraph(g: &AGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    if !common_checks(g, &mut out) {
        return out;
    }
    let k = g.wedges.len();
    let vsets: Vec<BTreeSet<usize>> = (0..k).map(|j| g.wedge_vertices(j)).collect();
    let esets: Vec<BTreeSet<usize>> = (0..k).map(|j| g.wedge_edges(j)).collect();
    let mut union_edges = BTreeSet::new();
    let mut pairwise_ok = true;
    for a in 0..k {
        for b in a + 1..k {
            let vs: Vec<usize> = vsets[a].intersection(&vsets[b]).copied().collect();
            if vs.is_empty() {
                continue;
            }
            let es: Vec<usize> = esets[a].intersection(&esets[b]).copied().collect();
            union_edges.extend(es.iter().copied());
            if !is_tree(&g.graph, &vs, &es) {
                out.push(Violation::IntersectionNotTree { a, b });
                pairwise_ok = false;
            }
        }
    }
    let mut uf = UnionFind::new(g.graph.num_vertices());
    if union_edges.iter().any(|&e| {
        let (u, v) = g.graph.endpoints(e);
        !uf.union(u, v)
    }) {
        out.push(Violation::IntersectionsNotForest);
        pairwise_ok = false;
    }
    if pairwise_ok {
        if !dual_graph(g).is_forest() {
            out.push(Violation::DualGraphCycle);
        }
        collapsed_rank_check(g, &mut out);
    }
    out
}

fn is_tree(graph: &Graph, vs: &[usize], es: &[usize]) -> bool {
    if es.len() + 1 != vs.len() {
        return false;
    }
    let mut uf = UnionFind::new(graph.num_vertices());
    for &e in es {
        let (u, v) = graph.endpoints(e);
        if !vs.contains(&u) || !vs.contains(&v) || !uf.union(u, v) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::super::{relative_rose, rose, Wedge};
    use super::*;
    use crate::free_group::BasisSpec;

    /// Three single-circle wedges, each pair meeting at its own point.
    fn triangle_of_wedges() -> AGraph {
        let graph = Graph::new(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (2, 0), (0, 2)]);
        let b = BasisSpec::new(4, &[1, 1, 1]).unwrap();
        let wedges = vec![
            Wedge { base: 0, circles: vec![vec![0, 2]] },
            Wedge { base: 1, circles: vec![vec![4, 6]] },
            Wedge { base: 2, circles: vec![vec![8, 10]] },
        ];
        AGraph::new(graph, wedges, b)
    }

    #[test]
    fn triangle_dual_is_hexagon() {
        let g = triangle_of_wedges();
        let d = dual_graph(&g);
        assert_eq!((d.graph.num_vertices(), d.graph.num_edges()), (6, 6));
        assert!(!d.is_forest());
        let v = validate_agraph(&g);
        assert!(v.contains(&Violation::DualGraphCycle), "{v:?}");
    }

    #[test]
    fn disjoint_and_meeting_duals() {
        let b = BasisSpec::new(4, &[1, 1]).unwrap();
        let r = relative_rose(&b);
        let d = dual_graph(&r);
        assert_eq!((d.graph.num_vertices(), d.graph.num_edges()), (2, 0));
        let r = rose(&BasisSpec::new(3, &[1, 1]).unwrap());
        let d = dual_graph(&r);
        assert_eq!((d.graph.num_vertices(), d.graph.num_edges()), (3, 2));
        assert!(validate_agraph(&r).is_empty());
    }

    #[test]
    fn low_valence_and_rank() {
        let b = BasisSpec::new(2, &[]).unwrap();
        let g = AGraph::new(Graph::new(2, &[(0, 1), (0, 1), (0, 1), (0, 0)]), vec![], b);
        let v = validate_agraph(&g);
        assert!(v.contains(&Violation::RankMismatch { expected: 2, found: 3 }));
        let b = BasisSpec::new(2, &[]).unwrap();
        let g = AGraph::new(Graph::new(2, &[(0, 1), (0, 0), (1, 1)]), vec![], b);
        assert!(validate_agraph(&g).is_empty());
        let g = AGraph::new(Graph::new(3, &[(0, 1), (1, 2), (0, 0), (2, 2)]), vec![], g.basis);
        assert!(matches!(validate_agraph(&g)[..], [Violation::LowValence { vertex: 1, .. }]));
    }
}
