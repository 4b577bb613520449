use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::Serialize;

use super::{lex_compare, max_stretch_subgraph, pair_words, turn_analysis, word_loop};
use super::{GraphMap, MetricAssignment, MetricGraph, TOLERANCE};
use crate::error::{Error, Result};
use crate::free_group::{Automorphism, BasisSpec, FreeWord, Letter};
use crate::graph_core::{reduce_path, rev, Dart};
use crate::spine_complex::Marking;

/// Largest competitor word length accepted by [`minset_check`].
pub const MINSET_GUARD: usize = 6;

/// Elementary Nielsen automorphisms of `F_s`: transpositions, inversions and
/// the transvections `y_i -> y_i y_l^e`, `y_i -> y_l^e y_i`.
pub fn nielsen_moves(s: usize) -> Result<Vec<Automorphism>> {
    let b = BasisSpec::new(s, &[])?;
    let y = |i: usize| i as Letter;
    let mut out = Vec::new();
    for i in 1..=s {
        for l in i + 1..=s {
            out.push(Automorphism::with_images(
                &b,
                &[(y(i), FreeWord::letter(y(l))), (y(l), FreeWord::letter(y(i)))],
            ));
        }
    }
    for i in 1..=s {
        out.push(Automorphism::with_images(&b, &[(y(i), FreeWord::letter(-y(i)))]));
    }
    for i in 1..=s {
        for l in (1..=s).filter(|&l| l != i) {
            for e in [1, -1] {
                out.push(Automorphism::with_images(&b, &[(y(i), FreeWord::new([y(i), e * y(l)]))]));
                out.push(Automorphism::with_images(&b, &[(y(i), FreeWord::new([e * y(l), y(i)]))]));
            }
        }
    }
    Ok(out)
}

/// Conjugates all loops at the base by the prefix path that makes them
/// shortest in total. Returns the new base vertex and the loops.
pub fn tighten(graph: &crate::graph_core::Graph, base: usize, loops: &[Vec<Dart>]) -> (usize, Vec<Vec<Dart>>) {
    let mut candidates: BTreeSet<Vec<Dart>> = BTreeSet::from([Vec::new()]);
    for p in loops {
        for k in 1..=p.len() {
            candidates.insert(p[..k].to_vec());
        }
    }
    let conj = |q: &[Dart], p: &[Dart]| {
        let all: Vec<Dart> = q.iter().rev().map(|&d| rev(d)).chain(p.iter().copied()).chain(q.iter().copied()).collect();
        reduce_path(&all)
    };
    let best = candidates
        .iter()
        .min_by_key(|q| (loops.iter().map(|p| conj(q, p).len()).sum::<usize>(), q.len(), (*q).clone()))
        .expect("empty prefix");
    let end = best.last().map_or(base, |&d| graph.head(d));
    (end, loops.iter().map(|p| conj(best, p)).collect())
}

/// Map from a rose whose marking sends each generator once around a petal to
/// the target marked graph, tightened at the base.
pub fn rose_comparison(source: &MetricGraph, m1: &Marking, target: &MetricGraph, m2: &Marking) -> Result<GraphMap> {
    let gs = &source.graph.graph;
    if gs.num_vertices() != 1 || m1.images.iter().any(|p| p.len() != 1) {
        return Err(Error::InvalidGraph("source must be a rose marked petal by petal".into()));
    }
    let (v, loops) = tighten(&target.graph.graph, m2.base, &m2.images);
    let mut edge_images = vec![Vec::new(); gs.num_edges()];
    for (p, img) in m1.images.iter().zip(loops) {
        let d = p[0];
        edge_images[d / 2] = if d % 2 == 0 { img } else { img.iter().rev().map(|&x| rev(x)).collect() };
    }
    GraphMap::new(source.clone(), target.clone(), vec![v], edge_images)
}

#[derive(Clone, Debug, Serialize)]
pub struct MinsetCompetitor {
    /// Images of the factor generators.
    pub images: Vec<String>,
    pub vector: Vec<f64>,
    pub lipschitz: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinsetReport {
    pub n: usize,
    pub j: usize,
    pub s: usize,
    pub bound: usize,
    pub competitors: usize,
    pub unit_vector: Vec<f64>,
    /// Competitors with a lexicographically smaller vector (must be empty).
    pub smaller: Vec<MinsetCompetitor>,
    /// Competitors with the same vector.
    pub ties: usize,
    /// Each tie is reached by an optimal map with Lipschitz constant 1, all
    /// edges maximally stretched and no illegal turns.
    pub ties_isometric: bool,
    /// The lexicographically smallest strictly larger competitor.
    pub closest: Option<MinsetCompetitor>,
    /// Smallest Lipschitz constant from the unit rose to a competitor.
    pub min_lipschitz: f64,
    pub passed: bool,
}

fn block_vector(m: &Marking, lengths: &MetricAssignment, words: &[FreeWord], n: usize) -> Vec<f64> {
    words.iter().map(|w| n as f64 * lengths.path_length(&word_loop(m, w))).collect()
}

/// Compares the unit rose of factor `j` with the roses obtained by
/// precomposing its marking with automorphisms of word length at most
/// `bound` in the elementary Nielsen moves.
pub fn minset_check(basis: &BasisSpec, j: usize, bound: usize) -> Result<MinsetReport> {
    if j == 0 || j > basis.k() {
        return Err(Error::InvalidSignature(format!("no factor {j}")));
    }
    if bound > MINSET_GUARD {
        return Err(Error::BoundExceeded { bound, guard: MINSET_GUARD });
    }
    let s = basis.s()[j - 1];
    let plain = BasisSpec::new(s, &[])?;
    let letters: Vec<Letter> = (1..=s as Letter).collect();
    let words = pair_words(&letters);
    let unit = Marking::identity_rose(&plain);
    let lengths = MetricAssignment::unit(s);
    let metric = MetricGraph { graph: unit.graph.clone(), lengths: lengths.clone() };
    let unit_vector = block_vector(&unit, &lengths, &words, basis.n());

    let moves = nielsen_moves(s)?;
    let identity = Automorphism::identity(&plain);
    let mut seen: BTreeSet<Vec<FreeWord>> = BTreeSet::from([identity.images().to_vec()]);
    let mut all = vec![identity.clone()];
    let mut frontier = vec![identity];
    for _ in 0..bound {
        let mut next = Vec::new();
        for a in &frontier {
            for m in &moves {
                let c = a.compose(m)?;
                if seen.insert(c.images().to_vec()) {
                    next.push(c.clone());
                    all.push(c);
                }
            }
        }
        frontier = next;
    }

    let names = |a: &Automorphism| -> Vec<String> {
        a.images().iter().map(|w| plain.format_word(w)).collect()
    };
    let mut smaller = Vec::new();
    let mut ties = 0;
    let mut ties_isometric = true;
    let mut closest: Option<MinsetCompetitor> = None;
    let mut min_lipschitz = f64::INFINITY;
    for a in &all {
        let m = unit.act(a)?;
        let vector = block_vector(&m, &lengths, &words, basis.n());
        let f = rose_comparison(&metric, &unit, &metric, &m)?;
        let lip = super::lipschitz(&f)?.constant;
        min_lipschitz = min_lipschitz.min(lip);
        let c = MinsetCompetitor { images: names(a), vector, lipschitz: lip };
        match lex_compare(&c.vector, &unit_vector) {
            Ordering::Less => smaller.push(c),
            Ordering::Equal => {
                ties += 1;
                let whole = max_stretch_subgraph(&f).len() == s;
                let legal = turn_analysis(&f).map_or(false, |t| t.illegal.is_empty());
                ties_isometric &= (lip - 1.0).abs() <= TOLERANCE && whole && legal && f.is_optimal().optimal;
            }
            Ordering::Greater => {
                if closest.as_ref().map_or(true, |b| lex_compare(&c.vector, &b.vector) == Ordering::Less) {
                    closest = Some(c);
                }
            }
        }
    }
    let passed = smaller.is_empty() && ties_isometric && min_lipschitz >= 1.0 - TOLERANCE;
    Ok(MinsetReport {
        n: basis.n(),
        j,
        s,
        bound,
        competitors: all.len(),
        unit_vector,
        smaller,
        ties,
        ties_isometric,
        closest,
        min_lipschitz,
        passed,
    })
}
