use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{format_violations, rev, validate_agraph, AGraph, Dart, Graph, Wedge};
use crate::error::{Error, Result};

/// A split of the darts at `vertex` into `side` and its complement.
///
/// `side` is the block not containing the smallest dart at the vertex, so each
/// unordered partition has one representative.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct IdealEdge {
    pub vertex: usize,
    pub side: BTreeSet<Dart>,
}

impl IdealEdge {
    /// Normalises an arbitrary block of the partition.
    pub fn from_block(graph: &Graph, vertex: usize, block: &BTreeSet<Dart>) -> Result<Self> {
        let at: BTreeSet<Dart> = graph.darts_at(vertex).into_iter().collect();
        if !block.is_subset(&at) {
            return Err(Error::BlowUp(format!("darts {block:?} are not all at vertex {vertex}")));
        }
        let d0 = *at.iter().next().expect("vertex has darts");
        let side = if block.contains(&d0) {
            at.difference(block).copied().collect()
        } else {
            block.clone()
        };
        let e = Self { vertex, side };
        if e.side.len() < 2 || at.len() - e.side.len() < 2 {
            return Err(Error::BlowUp("both blocks need at least two darts".into()));
        }
        Ok(e)
    }

    pub fn separates(&self, a: Dart, b: Dart) -> bool {
        self.side.contains(&a) != self.side.contains(&b)
    }
}

pub fn ideal_edges_at(g: &AGraph, v: usize) -> Vec<IdealEdge> {
    let darts = g.graph.darts_at(v);
    let d = darts.len();
    if d < 4 {
        return Vec::new();
    }
    let rest = &darts[1..];
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << rest.len()) {
        let size = mask.count_ones() as usize;
        if size < 2 || size > d - 2 {
            continue;
        }
        let side = rest
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &x)| x)
            .collect();
        out.push(IdealEdge { vertex: v, side });
    }
    out.sort();
    out
}

/// Distinct ideal edges at one vertex whose partitions do not cross.
pub fn compatible(a: &IdealEdge, b: &IdealEdge) -> bool {
    a.vertex == b.vertex
        && a != b
        && (a.side.is_subset(&b.side) || b.side.is_subset(&a.side) || a.side.is_disjoint(&b.side))
}

/// Passages of wedge circles through `v`: `(wedge, circle, incoming, outgoing)`
/// with both darts based at `v`.
fn crossings(g: &AGraph, v: usize) -> Vec<(usize, usize, Dart, Dart)> {
    let mut out = Vec::new();
    for (j, w) in g.wedges.iter().enumerate() {
        for (i, c) in w.circles.iter().enumerate() {
            for p in 0..c.len() {
                if g.graph.tail(c[p]) == v {
                    let prev = c[(p + c.len() - 1) % c.len()];
                    out.push((j, i, rev(prev), c[p]));
                }
            }
        }
    }
    out
}

/// Circles `(wedge, circle)` whose two darts at the vertex are split by `e`.
pub fn separated_circle_pairs(g: &AGraph, e: &IdealEdge) -> Vec<(usize, usize)> {
    crossings(g, e.vertex)
        .into_iter()
        .filter(|&(_, _, a, b)| e.separates(a, b))
        .map(|(j, i, _, _)| (j, i))
        .collect()
}

/// Local criterion: at most one circle pair is separated.
pub fn remark_legal(g: &AGraph, e: &IdealEdge) -> bool {
    separated_circle_pairs(g, e).len() <= 1
}

/// Local criterion that also keeps the unseparated circles of a wedge based
/// at the vertex together on one side.
pub fn refined_legal(g: &AGraph, e: &IdealEdge) -> bool {
    if !remark_legal(g, e) {
        return false;
    }
    let mut side_of_wedge: BTreeMap<usize, bool> = BTreeMap::new();
    for (j, _, a, b) in crossings(g, e.vertex) {
        if g.wedges[j].circles.len() < 2 || e.separates(a, b) {
            continue;
        }
        let side = e.side.contains(&a);
        if *side_of_wedge.entry(j).or_insert(side) != side {
            return false;
        }
    }
    true
}

/// Blow-up validity: the graph obtained by pulling the ideal edge out is again
/// a valid graph with wedge cycles.
pub fn is_legal(g: &AGraph, e: &IdealEdge) -> bool {
    blow_up(g, e.vertex, std::slice::from_ref(e)).is_ok()
}

/// A blow-up together with what is needed to lift paths into it.
///
/// Old darts keep their ids; the new tree edges are appended.
#[derive(Clone, Debug)]
pub struct BlowUpLift {
    pub graph: AGraph,
    pub vertex: usize,
    /// Tree node receiving each dart formerly at the vertex.
    pub node_of_dart: BTreeMap<Dart, usize>,
    /// For each non-root tree node: its parent and the dart from parent to it.
    pub tree_parent: BTreeMap<usize, (usize, Dart)>,
    /// Ids of the new tree edges.
    pub tree_edges: BTreeSet<usize>,
}

impl BlowUpLift {
    fn ancestors(&self, mut x: usize) -> Vec<usize> {
        let mut chain = vec![x];
        while let Some(&(p, _)) = self.tree_parent.get(&x) {
            chain.push(p);
            x = p;
        }
        chain
    }

    /// Tree path between two tree nodes.
    pub fn tree_path(&self, a: usize, b: usize) -> Vec<Dart> {
        let ua = self.ancestors(a);
        let ub = self.ancestors(b);
        let lca = *ua.iter().find(|x| ub.contains(x)).expect("common root");
        let mut up = Vec::new();
        let mut x = a;
        while x != lca {
            let (p, d) = self.tree_parent[&x];
            up.push(rev(d));
            x = p;
        }
        let mut down = Vec::new();
        let mut y = b;
        while y != lca {
            let (p, d) = self.tree_parent[&y];
            down.push(d);
            y = p;
        }
        down.reverse();
        up.extend(down);
        up
    }

    /// Lifts a dart path of the old graph. Endpoints at the blown-up vertex
    /// are pinned to the given tree nodes; elsewhere they are unchanged.
    pub fn lift_path(&self, path: &[Dart], start_node: usize, end_node: usize) -> Vec<Dart> {
        let at_v = |d: Dart| self.node_of_dart.contains_key(&d);
        let mut out = Vec::new();
        for (p, &d) in path.iter().enumerate() {
            if at_v(d) {
                let from = if p == 0 { start_node } else { self.node_of_dart[&rev(path[p - 1])] };
                out.extend(self.tree_path(from, self.node_of_dart[&d]));
            }
            out.push(d);
        }
        match path.last() {
            Some(&last) if at_v(rev(last)) => {
                out.extend(self.tree_path(self.node_of_dart[&rev(last)], end_node));
            }
            None => out.extend(self.tree_path(start_node, end_node)),
            _ => {}
        }
        super::reduce_path(&out)
    }

    /// Lifts a closed path; a path based at the blown-up vertex stays based
    /// at the root of the tree.
    pub fn lift_loop(&self, path: &[Dart]) -> Vec<Dart> {
        self.lift_path(path, self.vertex, self.vertex)
    }
}

pub fn blow_up(g: &AGraph, v: usize, family: &[IdealEdge]) -> Result<AGraph> {
    blow_up_with_lift(g, v, family).map(|b| b.graph)
}

pub fn blow_up_with_lift(g: &AGraph, v: usize, family: &[IdealEdge]) -> Result<BlowUpLift> {
    if v >= g.graph.num_vertices() {
        return Err(Error::BlowUp(format!("no vertex {v}")));
    }
    let at = g.graph.darts_at(v);
    let d0 = at[0];
    let mut sides: Vec<BTreeSet<Dart>> = Vec::new();
    for e in family {
        if e.vertex != v {
            return Err(Error::BlowUp(format!("ideal edge at {} used at {v}", e.vertex)));
        }
        if e.side.contains(&d0)
            || e.side.len() < 2
            || at.len() < e.side.len() + 2
            || e.side.iter().any(|d| !at.contains(d))
        {
            return Err(Error::BlowUp(format!("malformed ideal edge {:?}", e.side)));
        }
        sides.push(e.side.clone());
    }
    for a in 0..family.len() {
        for b in a + 1..family.len() {
            if !compatible(&family[a], &family[b]) {
                return Err(Error::BlowUp(format!(
                    "ideal edges {:?} and {:?} are not compatible",
                    family[a].side, family[b].side
                )));
            }
        }
    }
    // larger sides first so parents precede children
    sides.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let nv = g.graph.num_vertices();
    let ne = g.graph.num_edges();
    let node = |idx: usize| nv + idx;
    let smallest_containing = |pred: &dyn Fn(&BTreeSet<Dart>) -> bool| -> Option<usize> {
        (0..sides.len()).rev().find(|&i| pred(&sides[i]))
    };
    let mut tails: Vec<usize> = (0..g.graph.num_darts()).map(|d| g.graph.tail(d)).collect();
    let mut node_of_dart = BTreeMap::new();
    for &d in &at {
        let n = smallest_containing(&|s| s.contains(&d)).map_or(v, node);
        tails[d] = n;
        node_of_dart.insert(d, n);
    }
    let mut tree_parent = BTreeMap::new();
    let mut tree_edges = BTreeSet::new();
    for (idx, s) in sides.iter().enumerate() {
        let parent = (0..idx)
            .rev()
            .find(|&i| s.is_subset(&sides[i]) && sides[i] != *s)
            .map_or(v, node);
        let e = ne + idx;
        tails.push(parent);
        tails.push(node(idx));
        tree_parent.insert(node(idx), (parent, 2 * e));
        tree_edges.insert(e);
    }
    let edges: Vec<(usize, usize)> = (0..tails.len() / 2)
        .map(|e| (tails[2 * e], tails[2 * e + 1]))
        .collect();
    let graph = Graph::new(nv + sides.len(), &edges);
    let mut lift = BlowUpLift {
        graph: AGraph::new(graph, Vec::new(), g.basis.clone()),
        vertex: v,
        node_of_dart,
        tree_parent,
        tree_edges,
    };
    let mut wedges = Vec::new();
    for w in &g.wedges {
        let circles: Vec<Vec<Dart>> = w
            .circles
            .iter()
            .map(|c| lift_cycle(&lift, c))
            .collect();
        let base = if w.base != v {
            w.base
        } else {
            let graph = &lift.graph.graph;
            let common = circles
                .iter()
                .map(|c| c.iter().map(|&d| graph.tail(d)).collect::<BTreeSet<_>>())
                .reduce(|a, b| a.intersection(&b).copied().collect())
                .unwrap_or_default();
            if common.contains(&v) {
                v
            } else {
                common
                    .iter()
                    .next()
                    .copied()
                    .unwrap_or_else(|| graph.tail(circles[0][0]))
            }
        };
        let circles = circles
            .into_iter()
            .map(|c| rotate_to(&lift.graph.graph, c, base))
            .collect();
        wedges.push(Wedge { base, circles });
    }
    lift.graph.wedges = wedges;
    let violations = validate_agraph(&lift.graph);
    if !violations.is_empty() {
        return Err(Error::BlowUp(format_violations(&violations)));
    }
    Ok(lift)
}

/// Lifts a cyclic dart sequence, inserting tree paths at each passage.
fn lift_cycle(lift: &BlowUpLift, c: &[Dart]) -> Vec<Dart> {
    let mut out = Vec::new();
    for p in 0..c.len() {
        let d = c[p];
        if let Some(&to) = lift.node_of_dart.get(&d) {
            let prev = c[(p + c.len() - 1) % c.len()];
            let from = lift.node_of_dart[&rev(prev)];
            out.extend(lift.tree_path(from, to));
        }
        out.push(d);
    }
    out
}

fn rotate_to(graph: &Graph, c: Vec<Dart>, base: usize) -> Vec<Dart> {
    match c.iter().position(|&d| graph.tail(d) == base) {
        Some(p) => {
            let mut r = c[p..].to_vec();
            r.extend_from_slice(&c[..p]);
            r
        }
        None => c,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{contract_agraph, rose};
    use super::*;
    use crate::free_group::BasisSpec;

    fn block(g: &AGraph, v: usize, darts: &[Dart]) -> IdealEdge {
        IdealEdge::from_block(&g.graph, v, &darts.iter().copied().collect()).unwrap()
    }

    #[test]
    fn partition_counts() {
        for (n, expect) in [(2, 3), (3, 25)] {
            let r = rose(&BasisSpec::new(n, &[]).unwrap());
            assert_eq!(ideal_edges_at(&r, 0).len(), expect);
        }
    }

    #[test]
    fn two_wedges_at_a_point() {
        // loops a (darts 0,1) and b (darts 2,3), each its own wedge
        let g = rose(&BasisSpec::new(2, &[1, 1]).unwrap());
        let sep = block(&g, 0, &[0, 1]);
        assert!(is_legal(&g, &sep) && remark_legal(&g, &sep) && refined_legal(&g, &sep));
        let cross = block(&g, 0, &[0, 2]);
        assert_eq!(separated_circle_pairs(&g, &cross).len(), 2);
        assert!(!is_legal(&g, &cross) && !remark_legal(&g, &cross));
        let h = blow_up(&g, 0, &[sep.clone()]).unwrap();
        assert_eq!((h.graph.num_vertices(), h.graph.num_edges()), (2, 3));
        let (back, _) = contract_agraph(&h, &BTreeSet::from([2]));
        assert_eq!(back, g);
    }

    #[test]
    fn base_of_two_circle_wedge() {
        let g = rose(&BasisSpec::new(2, &[2]).unwrap());
        let e = block(&g, 0, &[0, 2]);
        assert!(!is_legal(&g, &e));
        assert!(!remark_legal(&g, &e));
        // both circles intact but on opposite sides
        let e = block(&g, 0, &[0, 1]);
        assert!(!is_legal(&g, &e));
        assert!(remark_legal(&g, &e));
        assert!(!refined_legal(&g, &e));
    }

    #[test]
    fn incompatible_family_rejected() {
        let g = rose(&BasisSpec::new(3, &[]).unwrap());
        let a = block(&g, 0, &[0, 1]);
        let b = block(&g, 0, &[1, 2]);
        assert!(!compatible(&a, &b));
        assert!(blow_up(&g, 0, &[a.clone(), b]).is_err());
        let c = block(&g, 0, &[0, 1, 2]);
        assert!(compatible(&a, &c));
        let h = blow_up(&g, 0, &[a, c]).unwrap();
        assert_eq!((h.graph.num_vertices(), h.graph.num_edges()), (3, 5));
    }

    #[test]
    fn lifted_loops_close_up() {
        let g = rose(&BasisSpec::new(2, &[1, 1]).unwrap());
        let lift = blow_up_with_lift(&g, 0, &[block(&g, 0, &[0, 1])]).unwrap();
        let graph = &lift.graph.graph;
        for path in [vec![0], vec![2], vec![0, 2], vec![3, 1, 2]] {
            let p = lift.lift_loop(&path);
            assert_eq!(graph.tail(p[0]), 0);
            assert_eq!(graph.head(*p.last().unwrap()), 0);
            assert!(p.windows(2).all(|w| graph.head(w[0]) == graph.tail(w[1])));
        }
    }
}
