use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::{MetricGraph, TOLERANCE};
use crate::error::{Error, Result};
use crate::free_group::{simultaneous_conjugator, FreeWord};
use crate::graph_core::{cyclically_reduce_path, reduce_path, rev, Dart, Graph};
use crate::spine_complex::Marking;

/// A map between metric graphs, linear on edges. `edge_images[e]` is the
/// image of the dart `2e`.
#[derive(Clone, Debug)]
pub struct GraphMap {
    pub source: MetricGraph,
    pub target: MetricGraph,
    pub vertex_images: Vec<usize>,
    pub edge_images: Vec<Vec<Dart>>,
}

fn inverse_path(p: &[Dart]) -> Vec<Dart> {
    p.iter().rev().map(|&d| rev(d)).collect()
}

impl GraphMap {
    pub fn new(
        source: MetricGraph,
        target: MetricGraph,
        vertex_images: Vec<usize>,
        edge_images: Vec<Vec<Dart>>,
    ) -> Result<Self> {
        let (gs, gt) = (&source.graph.graph, &target.graph.graph);
        let bad = |m: String| Err(Error::InvalidGraph(m));
        if source.lengths.lengths().len() != gs.num_edges()
            || target.lengths.lengths().len() != gt.num_edges()
        {
            return Err(Error::DegenerateMetric("one length per edge is required".into()));
        }
        if vertex_images.len() != gs.num_vertices() || edge_images.len() != gs.num_edges() {
            return bad("map needs an image for every vertex and edge".into());
        }
        if let Some(v) = vertex_images.iter().find(|&&v| v >= gt.num_vertices()) {
            return bad(format!("vertex image {v} is not a target vertex"));
        }
        for (e, p) in edge_images.iter().enumerate() {
            let (u, v) = gs.endpoints(e);
            let (fu, fv) = (vertex_images[u], vertex_images[v]);
            if p.iter().any(|&d| d >= gt.num_darts()) {
                return bad(format!("image of edge {e} uses an unknown dart"));
            }
            let joined = match (p.first(), p.last()) {
                (None, _) => fu == fv,
                (Some(&a), Some(&b)) => {
                    gt.tail(a) == fu
                        && gt.head(b) == fv
                        && p.windows(2).all(|w| gt.head(w[0]) == gt.tail(w[1]))
                }
                _ => unreachable!(),
            };
            if !joined {
                return bad(format!("image of edge {e} is not a path between the vertex images"));
            }
            if reduce_path(p) != *p {
                return bad(format!("image of edge {e} is not reduced"));
            }
        }
        Ok(Self { source, target, vertex_images, edge_images })
    }

    pub fn identity(g: MetricGraph) -> Self {
        let gr = &g.graph.graph;
        Self {
            vertex_images: (0..gr.num_vertices()).collect(),
            edge_images: (0..gr.num_edges()).map(|e| vec![2 * e]).collect(),
            target: g.clone(),
            source: g,
        }
    }

    pub fn dart_image(&self, d: Dart) -> Vec<Dart> {
        let p = &self.edge_images[d / 2];
        if d % 2 == 0 {
            p.clone()
        } else {
            inverse_path(p)
        }
    }

    pub fn path_image(&self, path: &[Dart]) -> Vec<Dart> {
        let all: Vec<Dart> = path.iter().flat_map(|&d| self.dart_image(d)).collect();
        reduce_path(&all)
    }

    /// Image length over domain length of a closed path.
    pub fn stretch(&self, cycle: &[Dart]) -> f64 {
        let image = cyclically_reduce_path(&self.path_image(cycle));
        self.target.lengths.path_length(&image) / self.source.lengths.path_length(cycle)
    }

    pub fn edge_stretch(&self, e: usize) -> f64 {
        self.target.lengths.path_length(&self.edge_images[e]) / self.source.lengths.length(e)
    }

    pub fn max_edge_stretch(&self) -> f64 {
        (0..self.edge_images.len()).map(|e| self.edge_stretch(e)).fold(0.0, f64::max)
    }

    fn is_self_map(&self) -> bool {
        self.source.graph.graph == self.target.graph.graph
    }

    /// Whether `f o m1` is homotopic to `m2`, allowing the base point to move.
    pub fn commutes_with(&self, m1: &Marking, m2: &Marking) -> bool {
        if m1.images.len() != m2.images.len() {
            return false;
        }
        let gt = &self.target.graph.graph;
        let Some(q) = gt.path_between(m2.base, self.vertex_images[m1.base]) else {
            return false;
        };
        let qi = inverse_path(&q);
        let pairs: Vec<(FreeWord, FreeWord)> = m1
            .images
            .iter()
            .zip(&m2.images)
            .map(|(p, p2)| {
                let loop2: Vec<Dart> =
                    q.iter().copied().chain(self.path_image(p)).chain(qi.iter().copied()).collect();
                (m2.loop_word(&reduce_path(&loop2)), m2.loop_word(p2))
            })
            .collect();
        simultaneous_conjugator(&pairs).is_some()
    }

    pub fn to_json(&self) -> Value {
        let images: BTreeMap<String, &Vec<Dart>> =
            self.edge_images.iter().enumerate().map(|(e, p)| (e.to_string(), p)).collect();
        json!({
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "vertex_images": self.vertex_images,
            "edge_images": images,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let perr = |loc: &str, msg: &str| Error::Parse { location: loc.into(), message: msg.into() };
        let source = MetricGraph::from_json(v.get("source").ok_or_else(|| perr("source", "missing"))?)?;
        let target = MetricGraph::from_json(v.get("target").ok_or_else(|| perr("target", "missing"))?)?;
        let vertex_images = v
            .get("vertex_images")
            .and_then(Value::as_array)
            .ok_or_else(|| perr("vertex_images", "expected array"))?
            .iter()
            .enumerate()
            .map(|(i, x)| {
                x.as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| perr(&format!("vertex_images[{i}]"), "expected index"))
            })
            .collect::<Result<Vec<_>>>()?;
        let obj = v
            .get("edge_images")
            .and_then(Value::as_object)
            .ok_or_else(|| perr("edge_images", "expected object"))?;
        let ne = source.graph.graph.num_edges();
        let mut edge_images = vec![None; ne];
        for (k, p) in obj {
            let loc = format!("edge_images.{k}");
            let e: usize = k.parse().map_err(|_| perr(&loc, "edge key is not an index"))?;
            if e >= ne {
                return Err(perr(&loc, "no such edge"));
            }
            let path = p
                .as_array()
                .ok_or_else(|| perr(&loc, "expected dart array"))?
                .iter()
                .map(|d| d.as_u64().map(|d| d as usize).ok_or_else(|| perr(&loc, "expected dart")))
                .collect::<Result<Vec<_>>>()?;
            edge_images[e] = Some(path);
        }
        let edge_images = edge_images
            .into_iter()
            .enumerate()
            .map(|(e, p)| p.ok_or_else(|| perr(&format!("edge_images.{e}"), "missing")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, vertex_images, edge_images)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzReport {
    pub engine: String,
    pub constant: f64,
    /// A loop realising the constant, as a dart sequence.
    pub witness: Vec<Dart>,
    pub loops_examined: usize,
}

/// A way of computing the Lipschitz constant of the homotopy class of a map.
pub trait LipschitzEngine: Send + Sync {
    fn name(&self) -> &'static str;
    fn lipschitz(&self, f: &GraphMap) -> Result<LipschitzReport>;
}

/// Maximum over embedded cycles, figure eights and barbells.
pub struct CandidateEngine;

/// Maximum over all cyclically reduced loops up to a combinatorial length.
pub struct BruteForceEngine {
    /// Defaults to twice the number of edges.
    pub max_len: Option<usize>,
}

/// Largest stretch, ties going to the lexicographically smallest loop.
fn best_of(f: &GraphMap, loops: impl IntoParallelIterator<Item = Vec<Dart>>) -> Option<(f64, Vec<Dart>, usize)> {
    loops
        .into_par_iter()
        .map(|c| (f.stretch(&c), c, 1usize))
        .reduce_with(|a, b| {
            let n = a.2 + b.2;
            let keep_a = if (a.0 - b.0).abs() <= TOLERANCE { a.1 <= b.1 } else { a.0 > b.0 };
            if keep_a {
                (a.0, a.1, n)
            } else {
                (b.0, b.1, n)
            }
        })
}

impl LipschitzEngine for CandidateEngine {
    fn name(&self) -> &'static str {
        "candidates"
    }

    fn lipschitz(&self, f: &GraphMap) -> Result<LipschitzReport> {
        let loops = candidate_loops(&f.source.graph.graph);
        let (constant, witness, n) = best_of(f, loops)
            .ok_or_else(|| Error::DegenerateMetric("source graph has no loops".into()))?;
        Ok(LipschitzReport { engine: self.name().into(), constant, witness, loops_examined: n })
    }
}

impl LipschitzEngine for BruteForceEngine {
    fn name(&self) -> &'static str {
        "brute-force"
    }

    fn lipschitz(&self, f: &GraphMap) -> Result<LipschitzReport> {
        let g = &f.source.graph.graph;
        let max_len = self.max_len.unwrap_or(2 * g.num_edges());
        let (constant, witness, n) = best_of(f, brute_force_loops(g, max_len))
            .ok_or_else(|| Error::DegenerateMetric("source graph has no loops".into()))?;
        Ok(LipschitzReport { engine: self.name().into(), constant, witness, loops_examined: n })
    }
}

pub fn lipschitz(f: &GraphMap) -> Result<LipschitzReport> {
    CandidateEngine.lipschitz(f)
}

/// Embedded cycles, each once, starting at their smallest vertex.
fn embedded_cycles(g: &Graph) -> Vec<Vec<Dart>> {
    fn go(
        g: &Graph,
        s: usize,
        path: &mut Vec<Dart>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<Dart>>,
        seen: &mut BTreeSet<Vec<usize>>,
    ) {
        let at = path.last().map_or(s, |&d| g.head(d));
        for d in g.darts_at(at) {
            if path.iter().any(|&p| p / 2 == d / 2) {
                continue;
            }
            let h = g.head(d);
            if h == s {
                path.push(d);
                let mut key: Vec<usize> = path.iter().map(|d| d / 2).collect();
                key.sort_unstable();
                if seen.insert(key) {
                    out.push(path.clone());
                }
                path.pop();
            } else if h > s && !on_path[h] {
                on_path[h] = true;
                path.push(d);
                go(g, s, path, on_path, out, seen);
                path.pop();
                on_path[h] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut on_path = vec![false; g.num_vertices()];
    for s in 0..g.num_vertices() {
        go(g, s, &mut Vec::new(), &mut on_path, &mut out, &mut seen);
    }
    out
}

fn vertices_of(g: &Graph, c: &[Dart]) -> BTreeSet<usize> {
    c.iter().map(|&d| g.tail(d)).collect()
}

/// The cycle read starting at vertex `v`.
fn rotate_to(g: &Graph, c: &[Dart], v: usize) -> Vec<Dart> {
    let i = c.iter().position(|&d| g.tail(d) == v).expect("vertex on cycle");
    c[i..].iter().chain(&c[..i]).copied().collect()
}

/// Embedded paths from `from` to a vertex in `to`, with interior avoiding `avoid`.
fn connecting_paths(g: &Graph, from: usize, to: &BTreeSet<usize>, avoid: &BTreeSet<usize>) -> Vec<Vec<Dart>> {
    fn go(
        g: &Graph,
        path: &mut Vec<Dart>,
        visited: &mut BTreeSet<usize>,
        to: &BTreeSet<usize>,
        avoid: &BTreeSet<usize>,
        out: &mut Vec<Vec<Dart>>,
        at: usize,
    ) {
        for d in g.darts_at(at) {
            let h = g.head(d);
            if to.contains(&h) {
                path.push(d);
                out.push(path.clone());
                path.pop();
            } else if !avoid.contains(&h) && !visited.contains(&h) {
                visited.insert(h);
                path.push(d);
                go(g, path, visited, to, avoid, out, h);
                path.pop();
                visited.remove(&h);
            }
        }
    }
    let mut out = Vec::new();
    go(g, &mut Vec::new(), &mut BTreeSet::from([from]), to, avoid, &mut out, from);
    out
}

/// Embedded cycles, figure eights (two cycles sharing one vertex) and
/// barbells (two disjoint cycles joined by an embedded arc), both relative
/// orientations for the two-cycle shapes.
pub fn candidate_loops(g: &Graph) -> Vec<Vec<Dart>> {
    let cycles = embedded_cycles(g);
    let verts: Vec<BTreeSet<usize>> = cycles.iter().map(|c| vertices_of(g, c)).collect();
    let mut out = cycles.clone();
    for a in 0..cycles.len() {
        for b in a + 1..cycles.len() {
            let common: Vec<usize> = verts[a].intersection(&verts[b]).copied().collect();
            let share_edge = cycles[a].iter().any(|&d| cycles[b].iter().any(|&e| e / 2 == d / 2));
            let cb_rev = inverse_path(&cycles[b]);
            if common.len() == 1 && !share_edge {
                let v = common[0];
                let ca = rotate_to(g, &cycles[a], v);
                for cb in [&cycles[b], &cb_rev] {
                    out.push(ca.iter().chain(&rotate_to(g, cb, v)).copied().collect());
                }
            } else if common.is_empty() {
                let avoid: BTreeSet<usize> = verts[a].union(&verts[b]).copied().collect();
                for &u in &verts[a] {
                    for p in connecting_paths(g, u, &verts[b], &avoid) {
                        let w = g.head(*p.last().expect("nonempty arc"));
                        let ca = rotate_to(g, &cycles[a], u);
                        let pi = inverse_path(&p);
                        for cb in [&cycles[b], &cb_rev] {
                            let cb = rotate_to(g, cb, w);
                            out.push(ca.iter().chain(&p).chain(&cb).chain(&pi).copied().collect());
                        }
                    }
                }
            }
        }
    }
    out
}

/// Every cyclically reduced closed walk of length `1..=max_len`.
pub fn brute_force_loops(g: &Graph, max_len: usize) -> Vec<Vec<Dart>> {
    fn go(g: &Graph, path: &mut Vec<Dart>, max_len: usize, out: &mut Vec<Vec<Dart>>) {
        let last = *path.last().expect("nonempty");
        let first = path[0];
        if g.head(last) == g.tail(first) && first != rev(last) {
            out.push(path.clone());
        }
        if path.len() == max_len {
            return;
        }
        for d in g.darts_at(g.head(last)) {
            if d != rev(last) {
                path.push(d);
                go(g, path, max_len, out);
                path.pop();
            }
        }
    }
    (0..g.num_darts())
        .into_par_iter()
        .flat_map_iter(|d| {
            let mut out = Vec::new();
            if max_len > 0 {
                go(g, &mut vec![d], max_len, &mut out);
            }
            out
        })
        .collect()
}

/// Edges stretched by the largest edge stretch, within [`TOLERANCE`].
pub fn max_stretch_subgraph(f: &GraphMap) -> BTreeSet<usize> {
    let top = f.max_edge_stretch();
    (0..f.edge_images.len()).filter(|&e| f.edge_stretch(e) >= top - TOLERANCE).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct TurnReport {
    /// First dart of the image of each dart.
    pub derivative: Vec<Dart>,
    /// Each nondegenerate turn with its image.
    pub turn_map: Vec<((Dart, Dart), (Dart, Dart))>,
    pub illegal: Vec<(Dart, Dart)>,
    /// Whether the turn map was iterated (only for self-maps).
    pub iterated: bool,
}

fn turn(a: Dart, b: Dart) -> (Dart, Dart) {
    (a.min(b), a.max(b))
}

/// Derivative, turn map and illegal turns. Refuses maps collapsing an edge.
pub fn turn_analysis(f: &GraphMap) -> Result<TurnReport> {
    if let Some(e) = f.edge_images.iter().position(Vec::is_empty) {
        return Err(Error::CollapsedEdge(e));
    }
    let g = &f.source.graph.graph;
    let derivative: Vec<Dart> = (0..g.num_darts()).map(|d| f.dart_image(d)[0]).collect();
    let tf = |t: (Dart, Dart)| turn(derivative[t.0], derivative[t.1]);
    let mut turn_map = Vec::new();
    for v in 0..g.num_vertices() {
        let ds = g.darts_at(v);
        for (i, &a) in ds.iter().enumerate() {
            for &b in &ds[i + 1..] {
                turn_map.push((turn(a, b), tf(turn(a, b))));
            }
        }
    }
    turn_map.sort_unstable();
    let iterated = f.is_self_map();
    let illegal = turn_map
        .iter()
        .filter(|(t, image)| {
            if !iterated {
                return image.0 == image.1;
            }
            let mut seen = BTreeSet::from([*t]);
            let mut cur = *image;
            loop {
                if cur.0 == cur.1 {
                    return true;
                }
                if !seen.insert(cur) {
                    return false;
                }
                cur = tf(cur);
            }
        })
        .map(|(t, _)| *t)
        .collect();
    Ok(TurnReport { derivative, turn_map, illegal, iterated })
}

#[derive(Clone, Debug, Serialize)]
pub struct Optimality {
    pub optimal: bool,
    /// A vertex where every maximally stretched edge ends in the same dart.
    pub vertex: Option<usize>,
    pub gamma_f: BTreeSet<usize>,
}

impl GraphMap {
    /// Optimal unless, at some vertex of the maximally stretched subgraph, the
    /// images of all its edges ending there share their last dart.
    pub fn is_optimal(&self) -> Optimality {
        let gamma_f = max_stretch_subgraph(self);
        let g = &self.source.graph.graph;
        let mut ends: BTreeMap<usize, BTreeSet<Option<Dart>>> = BTreeMap::new();
        for &e in &gamma_f {
            for d in [2 * e, 2 * e + 1] {
                ends.entry(g.head(d)).or_default().insert(self.dart_image(d).last().copied());
            }
        }
        let vertex = ends.iter().find(|(_, last)| last.len() == 1).map(|(&v, _)| v);
        Optimality { optimal: vertex.is_none(), vertex, gamma_f }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_group::BasisSpec;
    use crate::graph_core::rose;
    use crate::metric_maps::MetricAssignment;
    use proptest::prelude::*;

    fn metric_rose(n: usize, lengths: Vec<f64>) -> MetricGraph {
        let b = BasisSpec::new(n, &[]).unwrap();
        MetricGraph { graph: rose(&b), lengths: MetricAssignment::raw(lengths).unwrap() }
    }

    #[test]
    fn identity_map() {
        let f = GraphMap::identity(metric_rose(2, vec![0.3, 0.7]));
        let l = lipschitz(&f).unwrap();
        assert!((l.constant - 1.0).abs() < 1e-12);
        assert_eq!(max_stretch_subgraph(&f).len(), 2);
        let t = turn_analysis(&f).unwrap();
        assert!(t.illegal.is_empty());
        assert!(f.is_optimal().optimal);
    }

    #[test]
    fn doubling_a_loop() {
        let b = BasisSpec::new(1, &[]).unwrap();
        let g = MetricGraph { graph: rose(&b), lengths: MetricAssignment::unit(1) };
        let f = GraphMap::new(g.clone(), g, vec![0], vec![vec![0, 0]]).unwrap();
        assert!((lipschitz(&f).unwrap().constant - 2.0).abs() < 1e-12);
    }

    #[test]
    fn stretching_one_loop() {
        let g = metric_rose(2, vec![1.0, 1.0]);
        let f = GraphMap::new(g.clone(), g, vec![0], vec![vec![0, 0, 0], vec![2]]).unwrap();
        assert_eq!(max_stretch_subgraph(&f), BTreeSet::from([0]));
        let l = lipschitz(&f).unwrap();
        assert!((l.constant - 3.0).abs() < 1e-12);
        assert_eq!(l.witness, vec![0]);
    }

    #[test]
    fn folding_is_not_optimal() {
        // b goes to a^-1 b a: both ends of b map to paths ending in a
        let g = metric_rose(2, vec![1.0, 1.0]);
        let f = GraphMap::new(g.clone(), g, vec![0], vec![vec![0], vec![1, 2, 0]]).unwrap();
        let o = f.is_optimal();
        assert_eq!(o.gamma_f, BTreeSet::from([1]));
        assert!(!o.optimal);
        assert_eq!(o.vertex, Some(0));
        let t = turn_analysis(&f).unwrap();
        assert!(t.illegal.contains(&(2, 3)));
        // the loop b is tightened by the fold
        assert!((lipschitz(&f).unwrap().constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collapsing_map_is_refused() {
        let g = metric_rose(2, vec![1.0, 1.0]);
        let f = GraphMap::new(g.clone(), g, vec![0], vec![vec![], vec![2]]).unwrap();
        assert_eq!(turn_analysis(&f).unwrap_err(), Error::CollapsedEdge(0));
    }

    #[test]
    fn bad_images_are_rejected() {
        let g = metric_rose(2, vec![1.0, 1.0]);
        assert!(GraphMap::new(g.clone(), g.clone(), vec![0], vec![vec![0, 1], vec![2]]).is_err());
        assert!(GraphMap::new(g.clone(), g, vec![0], vec![vec![9], vec![2]]).is_err());
    }

    #[test]
    fn candidates_of_theta_and_barbell() {
        let theta = Graph::new(2, &[(0, 1), (0, 1), (0, 1)]);
        // three cycles and no two-cycle shapes (every pair shares two vertices)
        assert_eq!(candidate_loops(&theta).len(), 3);
        let barbell = Graph::new(2, &[(0, 0), (0, 1), (1, 1)]);
        // two loops plus a barbell in each relative orientation
        assert_eq!(candidate_loops(&barbell).len(), 4);
    }

    #[test]
    fn json_round_trip() {
        let g = metric_rose(2, vec![0.25, 0.75]);
        let f = GraphMap::new(g.clone(), g, vec![0], vec![vec![0, 2], vec![2]]).unwrap();
        let back = GraphMap::from_json(&f.to_json()).unwrap();
        assert_eq!(back.edge_images, f.edge_images);
        assert_eq!(back.source.lengths, f.source.lengths);
        let mut bad = f.to_json();
        bad["edge_images"]["0"] = json!("x");
        assert!(matches!(GraphMap::from_json(&bad), Err(Error::Parse { .. })));
    }

    #[test]
    fn commutation_with_markings() {
        let b = BasisSpec::new(2, &[]).unwrap();
        let m = Marking::identity_rose(&b);
        let g = metric_rose(2, vec![1.0, 1.0]);
        let f = GraphMap::identity(g);
        assert!(f.commutes_with(&m, &m));
        let swapped = Marking { images: vec![vec![2], vec![0]], ..m.clone() };
        assert!(!f.commutes_with(&m, &swapped));
    }

    proptest! {
        #[test]
        fn candidates_match_brute_force_on_roses(
            l in proptest::collection::vec(0.1f64..1.0, 2),
            w1 in proptest::collection::vec(0usize..4, 1..4),
            w2 in proptest::collection::vec(0usize..4, 1..4),
        ) {
            let g = metric_rose(2, l);
            let im = |w: &Vec<usize>| reduce_path(w);
            let (a, b) = (im(&w1), im(&w2));
            prop_assume!(!a.is_empty() && !b.is_empty());
            let f = GraphMap::new(g.clone(), g, vec![0], vec![a, b]).unwrap();
            let c = CandidateEngine.lipschitz(&f).unwrap().constant;
            let bf = BruteForceEngine { max_len: None }.lipschitz(&f).unwrap().constant;
            // the candidate set is a subset of the brute-force loops
            prop_assert!(c <= bf + 1e-9);
        }
    }
}
