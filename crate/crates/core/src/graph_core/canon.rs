use std::fmt;

use serde::Serialize;

use super::{AGraph, Graph};

/// Isomorphism invariant of an edge-labelled multigraph: the lexicographically
/// least relabelled edge list over canonical vertex orderings.
///
/// For graphs with wedge cycles the label of an edge is the bitmask of the
/// wedge cycles containing it, which determines the circles up to order and
/// orientation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CanonKey {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, u32)>,
}

impl fmt::Display for CanonKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{}", self.vertices)?;
        for (u, v, l) in &self.edges {
            write!(f, " {u}-{v}:{l}")?;
        }
        Ok(())
    }
}

pub fn canonical_form(g: &AGraph) -> CanonKey {
    canonical_key(&g.graph, &g.edge_masks())
}

/// Canonical key of a multigraph with one label per edge.
pub fn canonical_key(graph: &Graph, labels: &[u32]) -> CanonKey {
    let nv = graph.num_vertices();
    let adj: Vec<Vec<(usize, u32)>> = (0..nv)
        .map(|v| {
            graph
                .darts_at(v)
                .into_iter()
                .map(|d| (graph.head(d), labels[d / 2]))
                .collect()
        })
        .collect();
    let initial: Vec<(usize, Vec<(u32, bool)>)> = (0..nv)
        .map(|v| {
            let mut l: Vec<(u32, bool)> = adj[v].iter().map(|&(w, lab)| (lab, w == v)).collect();
            l.sort();
            (l.len(), l)
        })
        .collect();
    let colors = refine(&adj, rank_of(&initial));
    let mut best: Option<CanonKey> = None;
    search(graph, labels, &adj, colors, &mut best);
    best.unwrap_or(CanonKey { vertices: 0, edges: Vec::new() })
}

fn rank_of<T: Ord + Clone>(sigs: &[T]) -> Vec<usize> {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    sigs.iter()
        .map(|s| sorted.binary_search(s).expect("present"))
        .collect()
}

fn num_colors(colors: &[usize]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m + 1)
}

fn refine(adj: &[Vec<(usize, u32)>], mut colors: Vec<usize>) -> Vec<usize> {
    loop {
        let sigs: Vec<(usize, Vec<(usize, u32)>)> = (0..adj.len())
            .map(|v| {
                let mut nb: Vec<(usize, u32)> =
                    adj[v].iter().map(|&(w, l)| (colors[w], l)).collect();
                nb.sort();
                (colors[v], nb)
            })
            .collect();
        let next = rank_of(&sigs);
        if num_colors(&next) == num_colors(&colors) {
            return next;
        }
        colors = next;
    }
}

fn search(
    graph: &Graph,
    labels: &[u32],
    adj: &[Vec<(usize, u32)>],
    colors: Vec<usize>,
    best: &mut Option<CanonKey>,
) {
    let nv = colors.len();
    if num_colors(&colors) == nv {
        let mut edges: Vec<(usize, usize, u32)> = (0..graph.num_edges())
            .map(|e| {
                let (u, v) = graph.endpoints(e);
                let (a, b) = (colors[u], colors[v]);
                (a.min(b), a.max(b), labels[e])
            })
            .collect();
        edges.sort();
        let key = CanonKey { vertices: nv, edges };
        if best.as_ref().map_or(true, |b| key < *b) {
            *best = Some(key);
        }
        return;
    }
    // first smallest non-singleton cell
    let mut sizes = vec![0usize; num_colors(&colors)];
    for &c in &colors {
        sizes[c] += 1;
    }
    let target = (0..sizes.len())
        .filter(|&c| sizes[c] > 1)
        .min_by_key(|&c| (sizes[c], c))
        .expect("non-discrete colouring has a large cell");
    for x in (0..nv).filter(|&x| colors[x] == target) {
        let split: Vec<(usize, bool)> = (0..nv).map(|v| (colors[v], v != x)).collect();
        search(graph, labels, adj, refine(adj, rank_of(&split)), best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn relabel(graph: &Graph, perm: &[usize], edge_order: &[usize]) -> Graph {
        let edges: Vec<(usize, usize)> = edge_order
            .iter()
            .map(|&e| {
                let (u, v) = graph.endpoints(e);
                (perm[v], perm[u])
            })
            .collect();
        Graph::new(graph.num_vertices(), &edges)
    }

    #[test]
    fn distinguishes_small_graphs() {
        let theta = Graph::new(2, &[(0, 1), (0, 1), (0, 1)]);
        let barbell = Graph::new(2, &[(0, 0), (0, 1), (1, 1)]);
        assert_ne!(canonical_key(&theta, &[0; 3]), canonical_key(&barbell, &[0; 3]));
        assert_ne!(
            canonical_key(&theta, &[1, 0, 0]),
            canonical_key(&theta, &[1, 1, 0])
        );
        assert_eq!(
            canonical_key(&barbell, &[1, 0, 0]),
            canonical_key(&barbell, &[0, 0, 1])
        );
    }

    proptest! {
        #[test]
        fn invariant_under_relabelling(
            edges in prop::collection::vec((0usize..5, 0usize..5, 0u32..3), 1..9),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let ends: Vec<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
            let labels: Vec<u32> = edges.iter().map(|e| e.2).collect();
            let g = Graph::new(5, &ends);
            let mut perm: Vec<usize> = (0..5).collect();
            perm.shuffle(&mut rng);
            let mut order: Vec<usize> = (0..edges.len()).collect();
            order.shuffle(&mut rng);
            let h = relabel(&g, &perm, &order);
            let hl: Vec<u32> = order.iter().map(|&e| labels[e]).collect();
            prop_assert_eq!(canonical_key(&g, &labels), canonical_key(&h, &hl));
        }
    }
}
