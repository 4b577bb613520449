use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde_json::{json, Value};

use super::{Poset, SimplicialComplex, Star};
use crate::error::{Error, Result};
use crate::free_group::{
    images_form_basis, simultaneous_conjugator, Automorphism, BasisSpec, FreeWord, Letter,
    WitnessGenerator,
};
use crate::graph_core::{
    blow_up_with_lift, canonical_form, contract_agraph, forests, format_violations, reduce_path,
    rev, rose, validate_agraph, AGraph, Dart, Graph, IdealEdge,
};

/// A graph with wedge cycles together with a marking from the rose.
///
/// `images[g - 1]` is the closed path at `base` representing generator `g`.
/// `wedge_paths[j]` runs from `base` to the base of wedge `j`, and the image
/// of `y_i^j` is that path, then circle `i` of wedge `j`, then back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marking {
    pub graph: AGraph,
    pub base: usize,
    pub images: Vec<Vec<Dart>>,
    pub wedge_paths: Vec<Vec<Dart>>,
}

fn inverse_path(p: &[Dart]) -> Vec<Dart> {
    p.iter().rev().map(|&d| rev(d)).collect()
}

fn concat(parts: &[&[Dart]]) -> Vec<Dart> {
    let all: Vec<Dart> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    reduce_path(&all)
}

impl Marking {
    /// The rose marked by the identity: generator `g` runs once around loop `g - 1`.
    pub fn identity_rose(basis: &BasisSpec) -> Self {
        let graph = rose(basis);
        Self {
            images: (0..basis.n()).map(|e| vec![2 * e]).collect(),
            wedge_paths: vec![Vec::new(); basis.k()],
            graph,
            base: 0,
        }
    }

    pub fn new(
        graph: AGraph,
        base: usize,
        images: Vec<Vec<Dart>>,
        wedge_paths: Vec<Vec<Dart>>,
    ) -> Result<Self> {
        let m = Self { graph, base, images, wedge_paths };
        m.check()?;
        Ok(m)
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.graph.basis
    }

    /// Validates the graph, the wedge correspondence and invertibility.
    pub fn check(&self) -> Result<()> {
        let v = validate_agraph(&self.graph);
        if !v.is_empty() {
            return Err(Error::InvalidGraph(format_violations(&v)));
        }
        let graph = &self.graph.graph;
        let basis = self.basis().clone();
        if self.images.len() != basis.n() || self.wedge_paths.len() != basis.k() {
            return Err(Error::InvalidGraph("marking has the wrong number of paths".into()));
        }
        let closed_at = |p: &[Dart], from: usize, to: usize| {
            if p.is_empty() {
                return from == to;
            }
            graph.tail(p[0]) == from
                && graph.head(p[p.len() - 1]) == to
                && p.windows(2).all(|w| graph.head(w[0]) == graph.tail(w[1]))
        };
        for (g, p) in self.images.iter().enumerate() {
            if !closed_at(p, self.base, self.base) || reduce_path(p) != *p {
                return Err(Error::InvalidGraph(format!(
                    "image of generator {} is not a reduced loop at the base",
                    g + 1
                )));
            }
        }
        for (j, w) in self.graph.wedges.iter().enumerate() {
            let p = &self.wedge_paths[j];
            if !closed_at(p, self.base, w.base) {
                return Err(Error::InvalidGraph(format!("wedge path {} is broken", j + 1)));
            }
            for (i, c) in w.circles.iter().enumerate() {
                let g = basis.y(i + 1, j + 1) as usize;
                let expect = concat(&[p, c, &inverse_path(p)]);
                if self.images[g - 1] != expect {
                    return Err(Error::InvalidGraph(format!(
                        "image of {} does not run around its circle",
                        basis.generator_name(g as Letter)
                    )));
                }
            }
        }
        let plain = BasisSpec::new(basis.n(), &[])?;
        let f = Automorphism::from_images(&plain, self.pi1_images())?;
        if !images_form_basis(&f) {
            return Err(Error::InvalidGraph("marking is not a homotopy equivalence".into()));
        }
        Ok(())
    }

    /// Marks a graph without wedges by its spanning tree at `base`: generator
    /// `g` is the loop through the `g`-th edge outside the tree.
    pub fn spanning_tree(graph: AGraph, base: usize) -> Result<Self> {
        if !graph.wedges.is_empty() {
            return Err(Error::InvalidGraph("spanning-tree marking needs a graph without wedges".into()));
        }
        let g = &graph.graph;
        if base >= g.num_vertices() {
            return Err(Error::InvalidGraph(format!("no vertex {base}")));
        }
        let prev = bfs_tree(g, base);
        let to_root = |mut v: usize| {
            let mut p = Vec::new();
            while let Some(d) = prev[v] {
                p.push(rev(d));
                v = g.tail(d);
            }
            p
        };
        let in_tree: BTreeSet<usize> = prev.iter().flatten().map(|d| d / 2).collect();
        let images = (0..g.num_edges())
            .filter(|e| !in_tree.contains(e))
            .map(|e| {
                let (u, v) = g.endpoints(e);
                concat(&[&inverse_path(&to_root(u)), &[2 * e], &to_root(v)])
            })
            .collect();
        Marking::new(graph, base, images, Vec::new())
    }

    /// Letters for the edges outside a BFS spanning tree at the base.
    fn tree_letters(&self) -> Vec<Option<Letter>> {
        let graph = &self.graph.graph;
        let mut in_tree = vec![false; graph.num_edges()];
        for d in bfs_tree(graph, self.base).into_iter().flatten() {
            in_tree[d / 2] = true;
        }
        let mut next = 0;
        in_tree
            .iter()
            .map(|&t| {
                if t {
                    None
                } else {
                    next += 1;
                    Some(next)
                }
            })
            .collect()
    }

    /// Reads a loop at the base as a word in the spanning-tree basis.
    pub fn loop_word(&self, path: &[Dart]) -> FreeWord {
        let letters = self.tree_letters();
        FreeWord::new(path.iter().filter_map(|&d| {
            letters[d / 2].map(|l| if d % 2 == 0 { l } else { -l })
        }))
    }

    pub fn pi1_images(&self) -> Vec<FreeWord> {
        self.images.iter().map(|p| self.loop_word(p)).collect()
    }

    /// `(G, phi) . psi = (G, phi o psi)`; `psi` must be relative.
    pub fn act(&self, psi: &Automorphism) -> Result<Marking> {
        if psi.basis() != self.basis() {
            return Err(Error::BasisMismatch);
        }
        let conj = psi.is_relative().ok_or_else(|| {
            Error::NotRelative("some factor is not mapped to a conjugate of itself".into())
        })?;
        let path_of = |w: &FreeWord| -> Vec<Dart> {
            let mut out = Vec::new();
            for &l in w.letters() {
                let p = &self.images[l.unsigned_abs() as usize - 1];
                if l > 0 {
                    out.extend_from_slice(p);
                } else {
                    out.extend(inverse_path(p));
                }
            }
            reduce_path(&out)
        };
        let images = psi.images().iter().map(path_of).collect();
        let wedge_paths = conj
            .iter()
            .zip(&self.wedge_paths)
            .map(|(u, p)| concat(&[&path_of(u), p]))
            .collect();
        Ok(Marking { graph: self.graph.clone(), base: self.base, images, wedge_paths })
    }

    pub fn collapse(&self, forest: &BTreeSet<usize>) -> Result<Marking> {
        let (h, c) = contract_agraph(&self.graph, forest);
        let v = validate_agraph(&h);
        if !v.is_empty() {
            return Err(Error::InvalidGraph(format_violations(&v)));
        }
        Ok(Marking {
            graph: h,
            base: c.vertex_map[self.base],
            images: self.images.iter().map(|p| reduce_path(&c.map_path(p))).collect(),
            wedge_paths: self.wedge_paths.iter().map(|p| reduce_path(&c.map_path(p))).collect(),
        })
    }

    /// Blows up a family of ideal edges (at one or more vertices).
    pub fn blow_up(&self, family: &[IdealEdge]) -> Result<Marking> {
        let mut by_vertex: BTreeMap<usize, Vec<IdealEdge>> = BTreeMap::new();
        for e in family {
            by_vertex.entry(e.vertex).or_default().push(e.clone());
        }
        let mut m = self.clone();
        for (v, es) in by_vertex {
            let lift = blow_up_with_lift(&m.graph, v, &es)?;
            let images = m.images.iter().map(|p| lift.lift_loop(p)).collect();
            let wedge_paths = m
                .wedge_paths
                .iter()
                .enumerate()
                .map(|(j, p)| lift.lift_path(p, v, lift.graph.wedges[j].base))
                .collect();
            m = Marking { graph: lift.graph, base: m.base, images, wedge_paths };
        }
        Ok(m)
    }

    /// Same point of the spine: a graph isomorphism carrying one marking to
    /// the other up to conjugation.
    pub fn equivalent(&self, other: &Marking) -> bool {
        if self.basis() != other.basis() || canonical_form(&self.graph) != canonical_form(&other.graph) {
            return false;
        }
        let v2: Vec<FreeWord> = other.pi1_images();
        let mut found = false;
        for_each_isomorphism(&self.graph, &other.graph, &mut |h: &[Dart]| {
            let g2 = &other.graph.graph;
            let hb = g2.tail(h[self.graph.graph.darts_at(self.base)[0]]);
            let q = g2.path_between(other.base, hb).expect("connected");
            let qi = inverse_path(&q);
            let pairs: Vec<(FreeWord, FreeWord)> = self
                .images
                .iter()
                .zip(&v2)
                .map(|(p, v)| {
                    let mapped: Vec<Dart> = p.iter().map(|&d| h[d]).collect();
                    (other.loop_word(&concat(&[&q, &mapped, &qi])), v.clone())
                })
                .collect();
            if simultaneous_conjugator(&pairs).is_some() {
                found = true;
            }
            found
        });
        found
    }

    pub fn to_json(&self) -> Value {
        let basis = self.basis();
        let images: BTreeMap<String, &Vec<Dart>> = self
            .images
            .iter()
            .enumerate()
            .map(|(g, p)| (basis.generator_name(g as Letter + 1), p))
            .collect();
        json!({
            "graph": crate::graph_core::agraph_to_json(&self.graph),
            "base": self.base,
            "images": images,
            "wedge_paths": self.wedge_paths,
        })
    }
}

/// For each vertex, the dart by which a BFS from `base` first reaches it.
fn bfs_tree(graph: &Graph, base: usize) -> Vec<Option<Dart>> {
    let mut prev = vec![None; graph.num_vertices()];
    let mut seen = vec![false; graph.num_vertices()];
    seen[base] = true;
    let mut queue = VecDeque::from([base]);
    while let Some(u) = queue.pop_front() {
        for d in graph.darts_at(u) {
            let w = graph.head(d);
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some(d);
                queue.push_back(w);
            }
        }
    }
    prev
}

/// Calls `f` on each wedge-label-preserving isomorphism (as a dart map) until
/// it returns true.
pub fn for_each_isomorphism(a: &AGraph, b: &AGraph, f: &mut dyn FnMut(&[Dart]) -> bool) {
    let (ga, gb) = (&a.graph, &b.graph);
    if ga.num_vertices() != gb.num_vertices() || ga.num_edges() != gb.num_edges() {
        return;
    }
    let (ma, mb) = (a.edge_masks(), b.edge_masks());
    struct St<'a> {
        ga: &'a Graph,
        gb: &'a Graph,
        ma: Vec<u32>,
        mb: Vec<u32>,
        h: Vec<Dart>,
        vmap: Vec<Option<usize>>,
        vused: Vec<bool>,
        eused: Vec<bool>,
    }
    fn assign(st: &mut St, x: usize, y: usize, fresh: &mut Vec<usize>) -> bool {
        match st.vmap[x] {
            Some(t) => t == y,
            None if st.vused[y] => false,
            None => {
                st.vmap[x] = Some(y);
                st.vused[y] = true;
                fresh.push(x);
                true
            }
        }
    }
    fn go(st: &mut St, e: usize, f: &mut dyn FnMut(&[Dart]) -> bool) -> bool {
        if e == st.ga.num_edges() {
            return f(&st.h);
        }
        let (u, v) = st.ga.endpoints(e);
        for e2 in 0..st.gb.num_edges() {
            if st.eused[e2] || st.mb[e2] != st.ma[e] {
                continue;
            }
            for d2 in [2 * e2, 2 * e2 + 1] {
                let mut fresh = Vec::new();
                let ok = assign(st, u, st.gb.tail(d2), &mut fresh)
                    && assign(st, v, st.gb.head(d2), &mut fresh);
                if ok {
                    st.eused[e2] = true;
                    st.h[2 * e] = d2;
                    st.h[2 * e + 1] = rev(d2);
                    let stop = go(st, e + 1, f);
                    st.eused[e2] = false;
                    if stop {
                        return true;
                    }
                }
                for x in fresh {
                    let y = st.vmap[x].take().expect("assigned");
                    st.vused[y] = false;
                }
            }
        }
        false
    }
    let mut st = St {
        ga,
        gb,
        ma,
        mb,
        h: vec![0; ga.num_darts()],
        vmap: vec![None; ga.num_vertices()],
        vused: vec![false; gb.num_vertices()],
        eused: vec![false; gb.num_edges()],
    };
    go(&mut st, 0, f);
}

#[derive(Clone, Copy, Debug)]
pub struct BallConfig {
    pub radius: usize,
    /// Add the blow-ups and collapses of every orbit point.
    pub with_stars: bool,
}

/// Finite piece of the marked spine around a marked graph.
#[derive(Clone, Debug)]
pub struct MarkedBall {
    pub markings: Vec<Marking>,
    /// Indices of the orbit points of the centre.
    pub orbit: Vec<usize>,
    pub poset: Poset,
}

impl MarkedBall {
    pub fn complex(&self) -> SimplicialComplex {
        self.poset.order_complex()
    }

    /// Markings whose graph has no separating edge.
    pub fn reduced_indices(&self) -> Vec<usize> {
        (0..self.markings.len())
            .filter(|&i| !self.markings[i].graph.has_separating_edge())
            .collect()
    }

    pub fn reduced_complex(&self) -> SimplicialComplex {
        self.complex().induced(&self.reduced_indices())
    }
}

fn find_equivalent(found: &[Marking], m: &Marking) -> Option<usize> {
    found.iter().position(|x| x.equivalent(m))
}

/// Orbit of `centre` under words of length at most `radius` in the generators
/// and their inverses, optionally with the stars of the orbit points, ordered
/// by marked forest collapse.
pub fn spine_ball(
    centre: &Marking,
    gens: &[WitnessGenerator],
    config: BallConfig,
) -> Result<MarkedBall> {
    centre.check()?;
    let mut moves = Vec::new();
    for g in gens {
        for a in [&g.forward, &g.inverse] {
            if a.is_relative().is_none() {
                return Err(Error::NotRelative(g.name.clone()));
            }
            moves.push(a.clone());
        }
    }
    let mut markings = vec![centre.clone()];
    let mut frontier = vec![0usize];
    for _ in 0..config.radius {
        let mut next = Vec::new();
        for &i in &frontier {
            for a in &moves {
                let m = markings[i].act(a)?;
                if find_equivalent(&markings, &m).is_none() {
                    markings.push(m);
                    next.push(markings.len() - 1);
                }
            }
        }
        frontier = next;
    }
    let orbit: Vec<usize> = (0..markings.len()).collect();
    if config.with_stars {
        for &i in &orbit {
            let x = markings[i].clone();
            let star = star_families(&x)?;
            for fam in &star.families {
                let m = x.blow_up(fam)?;
                if find_equivalent(&markings, &m).is_none() {
                    markings.push(m);
                }
            }
            for f in forests(&x.graph).into_iter().filter(|f| !f.is_empty()) {
                if let Ok(m) = x.collapse(&f) {
                    if find_equivalent(&markings, &m).is_none() {
                        markings.push(m);
                    }
                }
            }
        }
    }
    let mut relations = BTreeSet::new();
    for (y, m) in markings.iter().enumerate() {
        for f in forests(&m.graph).into_iter().filter(|f| !f.is_empty()) {
            if let Ok(c) = m.collapse(&f) {
                if let Some(x) = find_equivalent(&markings, &c) {
                    relations.insert((x, y));
                }
            }
        }
    }
    let labels = markings
        .iter()
        .enumerate()
        .map(|(i, m)| format!("m{i} {}", canonical_form(&m.graph)))
        .collect();
    let relations: Vec<(usize, usize)> = relations.into_iter().collect();
    let poset = Poset::from_relations(labels, &relations)
        .ok_or_else(|| Error::InvalidGraph("marked collapse relation has a cycle".into()))?;
    Ok(MarkedBall { markings, orbit, poset })
}

fn star_families(m: &Marking) -> Result<Star> {
    super::star_of_rose(&m.graph)
}
