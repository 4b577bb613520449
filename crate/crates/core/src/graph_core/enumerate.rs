use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::canon::canonical_key;
use super::{edge_of, validate_agraph, AGraph, CanonKey, Dart, Graph, Wedge};
use crate::error::{Error, Result};
use crate::formulas::{max_edges, valence_edge_bound, FactorSignature};
use crate::free_group::BasisSpec;

/// Largest edge bound enumerated without `force`.
pub const DEFAULT_EDGE_GUARD: usize = 9;

#[derive(Clone, Copy, Debug)]
pub struct EnumerationConfig {
    /// Skip graphs with separating edges.
    pub reduced: bool,
    pub force: bool,
    pub guard: usize,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self { reduced: false, force: false, guard: DEFAULT_EDGE_GUARD }
    }
}

/// One representative per isomorphism type of graph with wedge cycles,
/// sorted by canonical key.
pub fn enumerate_agraph_types(basis: &BasisSpec, config: EnumerationConfig) -> Result<Vec<AGraph>> {
    let n = basis.n();
    if n == 1 {
        return Ok(vec![super::rose(basis)]);
    }
    let sig = FactorSignature::new(n, basis.s())?;
    let bound = if config.reduced { max_edges(&sig) } else { valence_edge_bound(&sig) };
    let bound = bound.max(0) as usize;
    if bound > config.guard && !config.force {
        return Err(Error::BoundExceeded { bound, guard: config.guard });
    }
    let mut plain: BTreeMap<CanonKey, Graph> = BTreeMap::new();
    for e in n..=bound {
        let v = e + 1 - n;
        for degs in degree_sequences(v, 2 * e) {
            for g in multigraphs(&degs) {
                if g.is_connected() {
                    let key = canonical_key(&g, &vec![0; g.num_edges()]);
                    plain.entry(key).or_insert(g);
                }
            }
        }
    }
    let found: Vec<(CanonKey, AGraph)> = plain
        .into_values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|g| wedge_systems(&g, basis, config.reduced))
        .collect();
    let mut types: BTreeMap<CanonKey, AGraph> = BTreeMap::new();
    for (k, g) in found {
        types.entry(k).or_insert(g);
    }
    Ok(types.into_values().collect())
}

fn degree_sequences(v: usize, total: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, slots: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if left < 3 * slots {
            return;
        }
        let hi = cap.min(left - 3 * (slots - 1));
        for d in (3..=hi).rev() {
            cur.push(d);
            go(left - d, slots - 1, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if total >= 3 * v {
        go(total, v, total, &mut Vec::new(), &mut out);
    }
    out
}

/// Every loopy multigraph on labelled vertices with the given degrees.
fn multigraphs(degs: &[usize]) -> Vec<Graph> {
    struct St<'a> {
        rem: Vec<usize>,
        edges: Vec<(usize, usize)>,
        out: &'a mut Vec<Graph>,
        nv: usize,
    }
    fn vertex(st: &mut St, i: usize) {
        if i == st.nv {
            st.out.push(Graph::new(st.nv, &st.edges));
            return;
        }
        let r = st.rem[i];
        for loops in 0..=r / 2 {
            st.rem[i] -= 2 * loops;
            for _ in 0..loops {
                st.edges.push((i, i));
            }
            spread(st, i, i + 1);
            for _ in 0..loops {
                st.edges.pop();
            }
            st.rem[i] += 2 * loops;
        }
    }
    fn spread(st: &mut St, i: usize, j: usize) {
        if st.rem[i] == 0 {
            vertex(st, i + 1);
            return;
        }
        if j == st.nv {
            return;
        }
        let most = st.rem[i].min(st.rem[j]);
        for m in (0..=most).rev() {
            st.rem[i] -= m;
            st.rem[j] -= m;
            for _ in 0..m {
                st.edges.push((i, j));
            }
            spread(st, i, j + 1);
            for _ in 0..m {
                st.edges.pop();
            }
            st.rem[i] += m;
            st.rem[j] += m;
        }
    }
    let mut out = Vec::new();
    let mut st = St { rem: degs.to_vec(), edges: Vec::new(), out: &mut out, nv: degs.len() };
    vertex(&mut st, 0);
    out
}

#[derive(Clone, Debug)]
struct Cycle {
    darts: Vec<Dart>,
    vertices: BTreeSet<usize>,
    edges: BTreeSet<usize>,
}

/// Embedded cycles, one per edge set.
fn simple_cycles(g: &Graph) -> Vec<Cycle> {
    fn dfs(
        g: &Graph,
        start: usize,
        path: &mut Vec<Dart>,
        on_path: &mut Vec<bool>,
        seen: &mut BTreeSet<BTreeSet<usize>>,
        out: &mut Vec<Cycle>,
    ) {
        let here = path.last().map_or(start, |&d| g.head(d));
        for d in g.darts_at(here) {
            if path.iter().any(|&p| edge_of(p) == edge_of(d)) {
                continue;
            }
            let w = g.head(d);
            if w == start {
                path.push(d);
                let edges: BTreeSet<usize> = path.iter().map(|&p| edge_of(p)).collect();
                if seen.insert(edges.clone()) {
                    out.push(Cycle {
                        darts: path.clone(),
                        vertices: path.iter().map(|&p| g.tail(p)).collect(),
                        edges,
                    });
                }
                path.pop();
            } else if w > start && !on_path[w] {
                on_path[w] = true;
                path.push(d);
                dfs(g, start, path, on_path, seen, out);
                path.pop();
                on_path[w] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for s in 0..g.num_vertices() {
        let mut on_path = vec![false; g.num_vertices()];
        on_path[s] = true;
        dfs(g, s, &mut Vec::new(), &mut on_path, &mut seen, &mut out);
    }
    out
}

fn rotate_to_base(g: &Graph, darts: &[Dart], base: usize) -> Vec<Dart> {
    let p = darts.iter().position(|&d| g.tail(d) == base).expect("base on cycle");
    let mut r = darts[p..].to_vec();
    r.extend_from_slice(&darts[..p]);
    r
}

fn wedge_systems(g: &Graph, basis: &BasisSpec, reduced: bool) -> Vec<(CanonKey, AGraph)> {
    if reduced && !g.separating_edges().is_empty() {
        return Vec::new();
    }
    let cycles = simple_cycles(g);
    let s = basis.s().to_vec();
    let mut out = Vec::new();
    let mut chosen: Vec<Wedge> = Vec::new();
    let mut used_edges = BTreeSet::new();
    let mut used_vertices: Vec<BTreeSet<usize>> = Vec::new();
    assign(
        g, basis, &s, &cycles, 0, &mut chosen, &mut used_edges, &mut used_vertices, &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn assign(
    g: &Graph,
    basis: &BasisSpec,
    s: &[usize],
    cycles: &[Cycle],
    j: usize,
    chosen: &mut Vec<Wedge>,
    used_edges: &mut BTreeSet<usize>,
    used_vertices: &mut Vec<BTreeSet<usize>>,
    out: &mut Vec<(CanonKey, AGraph)>,
) {
    if j == s.len() {
        let ag = AGraph::new(g.clone(), chosen.clone(), basis.clone());
        if validate_agraph(&ag).is_empty() {
            out.push((super::canonical_form(&ag), ag));
        }
        return;
    }
    let fits = |c: &Cycle, used_edges: &BTreeSet<usize>, used_vertices: &[BTreeSet<usize>]| {
        c.edges.is_disjoint(used_edges)
            && used_vertices.iter().all(|vs| vs.intersection(&c.vertices).count() <= 1)
    };
    let bases: Vec<usize> = if s[j] == 1 { vec![usize::MAX] } else { (0..g.num_vertices()).collect() };
    for base in bases {
        let through: Vec<usize> = (0..cycles.len())
            .filter(|&c| base == usize::MAX || cycles[c].vertices.contains(&base))
            .filter(|&c| fits(&cycles[c], used_edges, used_vertices))
            .collect();
        let mut pick = Vec::new();
        choose(&through, s[j], 0, &mut pick, &mut |pick: &[usize]| {
            for a in 0..pick.len() {
                for b in a + 1..pick.len() {
                    let (ca, cb) = (&cycles[pick[a]], &cycles[pick[b]]);
                    if !ca.edges.is_disjoint(&cb.edges)
                        || ca.vertices.intersection(&cb.vertices).count() != 1
                    {
                        return;
                    }
                }
            }
            let b = if base == usize::MAX {
                *cycles[pick[0]].vertices.iter().next().expect("nonempty")
            } else {
                base
            };
            let circles = pick.iter().map(|&c| rotate_to_base(g, &cycles[c].darts, b)).collect();
            let vs: BTreeSet<usize> = pick.iter().flat_map(|&c| cycles[c].vertices.clone()).collect();
            let es: BTreeSet<usize> = pick.iter().flat_map(|&c| cycles[c].edges.clone()).collect();
            chosen.push(Wedge { base: b, circles });
            let before = used_edges.clone();
            used_edges.extend(es);
            used_vertices.push(vs);
            assign(g, basis, s, cycles, j + 1, chosen, used_edges, used_vertices, out);
            used_vertices.pop();
            *used_edges = before;
            chosen.pop();
        });
    }
}

fn choose(
    items: &[usize],
    k: usize,
    from: usize,
    pick: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in from..items.len() {
        pick.push(items[i]);
        choose(items, k, i + 1, pick, f);
        pick.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(n: usize, s: &[usize], reduced: bool) -> usize {
        let b = BasisSpec::new(n, s).unwrap();
        let cfg = EnumerationConfig { reduced, ..Default::default() };
        enumerate_agraph_types(&b, cfg).unwrap().len()
    }

    #[test]
    fn rank_two_plain() {
        // rose, theta, barbell
        assert_eq!(count(2, &[], false), 3);
        assert_eq!(count(2, &[], true), 2);
    }

    #[test]
    fn rank_three_plain_count() {
        // connected multigraphs of rank 3, all valences >= 3
        let got = count(3, &[], false);
        let oracle = brute_force_rank3();
        assert_eq!(got, oracle);
    }

    /// Independent count: all labelled edge lists over up to 4 vertices,
    /// deduplicated by trying every vertex permutation.
    fn brute_force_rank3() -> usize {
        use std::collections::HashSet;
        let mut seen: HashSet<(usize, Vec<(usize, usize)>)> = HashSet::new();
        let mut types = 0;
        for v in 1..=4usize {
            let e = v + 2;
            let pairs: Vec<(usize, usize)> =
                (0..v).flat_map(|a| (a..v).map(move |b| (a, b))).collect();
            let mut idx = vec![0usize; e];
            loop {
                if idx.windows(2).all(|w| w[0] <= w[1]) {
                    let edges: Vec<(usize, usize)> = idx.iter().map(|&i| pairs[i]).collect();
                    let g = Graph::new(v, &edges);
                    if g.is_connected() && (0..v).all(|x| g.valence(x) >= 3) {
                        let forms = permutations(v).into_iter().map(|p| {
                            let mut es: Vec<(usize, usize)> = edges
                                .iter()
                                .map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b])))
                                .collect();
                            es.sort();
                            es
                        });
                        let min = forms.min().unwrap();
                        if seen.insert((v, min)) {
                            types += 1;
                        }
                    }
                }
                let mut i = 0;
                while i < e {
                    idx[i] += 1;
                    if idx[i] < pairs.len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == e {
                    break;
                }
            }
        }
        types
    }

    fn permutations(v: usize) -> Vec<Vec<usize>> {
        if v == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(v - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, v - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn guard_refuses_large_bounds() {
        let b = BasisSpec::new(5, &[]).unwrap();
        assert!(matches!(
            enumerate_agraph_types(&b, EnumerationConfig::default()),
            Err(Error::BoundExceeded { bound: 12, guard: 9 })
        ));
    }

    #[test]
    fn rank_one_is_a_loop() {
        let b = BasisSpec::new(1, &[]).unwrap();
        let t = enumerate_agraph_types(&b, EnumerationConfig::default()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].graph.num_edges(), 1);
    }
}
