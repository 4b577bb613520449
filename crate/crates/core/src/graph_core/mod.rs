//! Half-edge multigraphs carrying a system of wedge cycles.
//!
//! Edge `e` owns the darts `2e` and `2e + 1`; the reverse of a dart flips the
//! low bit. Every dart records the vertex it starts at.

mod canon;
mod enumerate;
mod forest;
mod ideal;
mod io;
mod validate;

use std::collections::BTreeSet;

pub use canon::{canonical_form, canonical_key, CanonKey};
pub use enumerate::{enumerate_agraph_types, EnumerationConfig, DEFAULT_EDGE_GUARD};
pub use forest::{
    collapse_forest, collapse_wedge_intersections, contract_agraph, contract_edges, forests, is_forest,
    Contraction,
};
pub use ideal::{
    blow_up, blow_up_with_lift, compatible, ideal_edges_at, is_legal, refined_legal,
    remark_legal, separated_circle_pairs, BlowUpLift, IdealEdge,
};
pub use io::{agraph_from_json, agraph_to_json, to_dot};
pub use validate::{dual_graph, validate_agraph, validate_pre_agraph, DualGraph, Violation};

use crate::error::{Error, Result};
use crate::free_group::BasisSpec;

pub type Dart = usize;

#[inline]
pub fn rev(d: Dart) -> Dart {
    d ^ 1
}

#[inline]
pub fn edge_of(d: Dart) -> usize {
    d / 2
}

/// Connected multigraph given by the starting vertex of every dart.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    num_vertices: usize,
    tails: Vec<usize>,
}

impl Graph {
    /// Edge `e = (u, v)` gets dart `2e` from `u` to `v`.
    pub fn new(num_vertices: usize, edges: &[(usize, usize)]) -> Self {
        let mut tails = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in edges {
            assert!(u < num_vertices && v < num_vertices, "edge endpoint out of range");
            tails.push(u);
            tails.push(v);
        }
        Self { num_vertices, tails }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.tails.len() / 2
    }

    pub fn num_darts(&self) -> usize {
        self.tails.len()
    }

    pub fn tail(&self, d: Dart) -> usize {
        self.tails[d]
    }

    pub fn head(&self, d: Dart) -> usize {
        self.tails[rev(d)]
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        (self.tails[2 * e], self.tails[2 * e + 1])
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let (u, v) = self.endpoints(e);
        u == v
    }

    /// Darts starting at `v`, in increasing order.
    pub fn darts_at(&self, v: usize) -> Vec<Dart> {
        (0..self.tails.len()).filter(|&d| self.tails[d] == v).collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.tails.iter().filter(|&&t| t == v).count()
    }

    pub fn is_connected(&self) -> bool {
        if self.num_vertices == 0 {
            return false;
        }
        let mut uf = UnionFind::new(self.num_vertices);
        for e in 0..self.num_edges() {
            let (u, v) = self.endpoints(e);
            uf.union(u, v);
        }
        uf.count() == 1
    }

    /// First Betti number of a connected graph.
    pub fn rank(&self) -> Result<usize> {
        if !self.is_connected() {
            return Err(Error::InvalidGraph("graph is disconnected".into()));
        }
        Ok(self.num_edges() + 1 - self.num_vertices)
    }

    /// Betti number of a possibly disconnected graph (sum over components).
    pub fn cycle_rank(&self) -> usize {
        let mut uf = UnionFind::new(self.num_vertices);
        for e in 0..self.num_edges() {
            let (u, v) = self.endpoints(e);
            uf.union(u, v);
        }
        self.num_edges() + uf.count() - self.num_vertices
    }

    /// Non-loop edges whose removal disconnects the graph.
    pub fn separating_edges(&self) -> Vec<usize> {
        (0..self.num_edges())
            .filter(|&e| {
                if self.is_loop(e) {
                    return false;
                }
                let mut uf = UnionFind::new(self.num_vertices);
                for f in (0..self.num_edges()).filter(|&f| f != e) {
                    let (u, v) = self.endpoints(f);
                    uf.union(u, v);
                }
                let (u, v) = self.endpoints(e);
                uf.find(u) != uf.find(v)
            })
            .collect()
    }

    /// Reduced dart path from `from` to `to` along a BFS tree.
    pub fn path_between(&self, from: usize, to: usize) -> Option<Vec<Dart>> {
        let mut prev: Vec<Option<Dart>> = vec![None; self.num_vertices];
        let mut seen = vec![false; self.num_vertices];
        seen[from] = true;
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for d in self.darts_at(u) {
                let w = self.head(d);
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        if !seen[to] {
            return None;
        }
        let mut path = Vec::new();
        let mut cur = to;
        while cur != from {
            let d = prev[cur].expect("bfs tree");
            path.push(d);
            cur = self.tail(d);
        }
        path.reverse();
        Some(path)
    }
}

/// Removes backtracking `d rev(d)` from a dart path.
pub fn reduce_path(path: &[Dart]) -> Vec<Dart> {
    let mut out: Vec<Dart> = Vec::with_capacity(path.len());
    for &d in path {
        if out.last() == Some(&rev(d)) {
            out.pop();
        } else {
            out.push(d);
        }
    }
    out
}

/// Reduces a closed path cyclically.
pub fn cyclically_reduce_path(path: &[Dart]) -> Vec<Dart> {
    let mut p = reduce_path(path);
    while p.len() >= 2 && p[0] == rev(p[p.len() - 1]) {
        p.pop();
        p.remove(0);
    }
    p
}

/// Disjoint-set forest.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    count: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), count: n }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        self.count -= 1;
        true
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// The `j`-th wedge cycle: `s(j)` circles through a common base vertex.
/// Each circle is a closed dart path starting and ending at `base`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Wedge {
    pub base: usize,
    pub circles: Vec<Vec<Dart>>,
}

/// A graph with a wedge-cycle system for a given free factor system.
///
/// The same type carries both the strict graphs (wedge cycles meet in at most
/// a point) and the looser intermediate ones whose wedge cycles may overlap
/// in trees; [`validate_agraph`] and [`validate_pre_agraph`] tell them apart.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AGraph {
    pub graph: Graph,
    pub wedges: Vec<Wedge>,
    pub basis: BasisSpec,
}

impl AGraph {
    pub fn new(graph: Graph, wedges: Vec<Wedge>, basis: BasisSpec) -> Self {
        Self { graph, wedges, basis }
    }

    /// Builds and validates.
    pub fn checked(graph: Graph, wedges: Vec<Wedge>, basis: BasisSpec) -> Result<Self> {
        let g = Self::new(graph, wedges, basis);
        let v = validate_agraph(&g);
        if v.is_empty() {
            Ok(g)
        } else {
            Err(Error::InvalidGraph(format_violations(&v)))
        }
    }

    pub fn wedge_edges(&self, j: usize) -> BTreeSet<usize> {
        self.wedges[j]
            .circles
            .iter()
            .flatten()
            .map(|&d| edge_of(d))
            .collect()
    }

    pub fn wedge_vertices(&self, j: usize) -> BTreeSet<usize> {
        let mut vs: BTreeSet<usize> = self.wedges[j]
            .circles
            .iter()
            .flatten()
            .map(|&d| self.graph.tail(d))
            .collect();
        vs.insert(self.wedges[j].base);
        vs
    }

    /// Bitmask of the wedges containing each edge.
    pub fn edge_masks(&self) -> Vec<u32> {
        let mut masks = vec![0u32; self.graph.num_edges()];
        for j in 0..self.wedges.len() {
            for e in self.wedge_edges(j) {
                masks[e] |= 1 << j;
            }
        }
        masks
    }

    /// Wedges passing through `v`.
    pub fn wedges_at(&self, v: usize) -> Vec<usize> {
        (0..self.wedges.len())
            .filter(|&j| self.wedge_vertices(j).contains(&v))
            .collect()
    }

    pub fn in_any_wedge(&self, e: usize) -> bool {
        (0..self.wedges.len()).any(|j| self.wedge_edges(j).contains(&e))
    }

    /// True iff the wedge cycles are pairwise disjoint.
    pub fn is_small(&self) -> bool {
        let sets: Vec<BTreeSet<usize>> =
            (0..self.wedges.len()).map(|j| self.wedge_vertices(j)).collect();
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                if !sets[a].is_disjoint(&sets[b]) {
                    return false;
                }
            }
        }
        true
    }

    pub fn has_separating_edge(&self) -> bool {
        !self.graph.separating_edges().is_empty()
    }

    /// Graph obtained by collapsing every wedge cycle to a point.
    pub fn collapse_wedges(&self) -> Graph {
        let mut uf = UnionFind::new(self.graph.num_vertices());
        let mut wedge_edges = BTreeSet::new();
        for j in 0..self.wedges.len() {
            let vs: Vec<usize> = self.wedge_vertices(j).into_iter().collect();
            for w in vs.windows(2) {
                uf.union(w[0], w[1]);
            }
            wedge_edges.extend(self.wedge_edges(j));
        }
        let mut index = vec![usize::MAX; self.graph.num_vertices()];
        let mut next = 0;
        for v in 0..self.graph.num_vertices() {
            let r = uf.find(v);
            if index[r] == usize::MAX {
                index[r] = next;
                next += 1;
            }
            index[v] = index[r];
        }
        let edges: Vec<(usize, usize)> = (0..self.graph.num_edges())
            .filter(|e| !wedge_edges.contains(e))
            .map(|e| {
                let (u, v) = self.graph.endpoints(e);
                (index[u], index[v])
            })
            .collect();
        Graph::new(next, &edges)
    }

    /// Number of edges of each circle, listed per wedge.
    pub fn circle_lengths(&self) -> Vec<Vec<usize>> {
        self.wedges
            .iter()
            .map(|w| w.circles.iter().map(|c| c.len()).collect())
            .collect()
    }
}

pub fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// The single-vertex rose: all circles and free letters are loops at vertex 0.
/// Edge order follows the generator order of the basis.
pub fn rose(basis: &BasisSpec) -> AGraph {
    let n = basis.n();
    let graph = Graph::new(1, &vec![(0, 0); n]);
    let mut wedges = Vec::new();
    let mut e = 0;
    for &r in basis.s() {
        let circles = (0..r).map(|i| vec![2 * (e + i)]).collect();
        wedges.push(Wedge { base: 0, circles });
        e += r;
    }
    AGraph::new(graph, wedges, basis.clone())
}

/// Relative rose: free loops at a central vertex 0 and one stem per factor
/// ending at a vertex that carries that factor's circles.
/// Edge order: circles (generator order), stems, free loops.
pub fn relative_rose(basis: &BasisSpec) -> AGraph {
    let k = basis.k();
    let mut edges = Vec::new();
    let mut wedges = Vec::new();
    for (j, &r) in basis.s().iter().enumerate() {
        let circles = (0..r)
            .map(|_| {
                edges.push((j + 1, j + 1));
                vec![2 * (edges.len() - 1)]
            })
            .collect();
        wedges.push(Wedge { base: j + 1, circles });
    }
    for j in 0..k {
        edges.push((0, j + 1));
    }
    for _ in 0..basis.free_rank() {
        edges.push((0, 0));
    }
    AGraph::new(Graph::new(k + 1, &edges), wedges, basis.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks() {
        assert_eq!(Graph::new(1, &[(0, 0)]).rank().unwrap(), 1);
        assert_eq!(Graph::new(2, &[(0, 1), (0, 1), (0, 1)]).rank().unwrap(), 2);
        let b = BasisSpec::new(9, &[3, 2, 2]).unwrap();
        let r = relative_rose(&b);
        assert_eq!(r.graph.rank().unwrap(), 9);
        assert!(validate_agraph(&r).is_empty(), "{:?}", validate_agraph(&r));
        assert!(Graph::new(2, &[(0, 0), (1, 1)]).rank().is_err());
    }

    #[test]
    fn wedge_collapse_rank() {
        let b = BasisSpec::new(9, &[3, 2, 2]).unwrap();
        let r = relative_rose(&b);
        let hat = r.collapse_wedges();
        assert_eq!(hat.rank().unwrap(), 9 - 7);
        let b0 = BasisSpec::new(2, &[]).unwrap();
        let r0 = rose(&b0);
        assert_eq!(r0.collapse_wedges(), r0.graph);
        // two 2-circle wedges at one point collapse to a point
        let b = BasisSpec::new(4, &[2, 2]).unwrap();
        let hat = rose(&b).collapse_wedges();
        assert_eq!((hat.num_vertices(), hat.num_edges()), (1, 0));
    }

    #[test]
    fn path_reduction() {
        assert_eq!(reduce_path(&[0, 2, 3, 1]), Vec::<Dart>::new());
        assert_eq!(cyclically_reduce_path(&[4, 0, 2, 5]), vec![0, 2]);
    }
}
