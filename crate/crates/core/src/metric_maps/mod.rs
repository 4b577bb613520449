//! Metric graphs, length functions, maps linear on edges and their Lipschitz
//! constants, turns, and rose-level minimality checks.

mod lipschitz;
mod minset;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::free_group::{BasisSpec, FreeWord};
use crate::graph_core::{agraph_from_json, agraph_to_json, cyclically_reduce_path, AGraph, Dart};
use crate::spine_complex::Marking;

pub use lipschitz::{
    brute_force_loops, candidate_loops, lipschitz, max_stretch_subgraph, turn_analysis,
    BruteForceEngine, CandidateEngine, GraphMap, LipschitzEngine, LipschitzReport, Optimality,
    TurnReport,
};
pub use minset::{
    minset_check, nielsen_moves, rose_comparison, tighten, MinsetCompetitor, MinsetReport,
    MINSET_GUARD,
};

/// Tolerance on stretch ratios and lexicographic comparisons.
pub const TOLERANCE: f64 = 1e-9;

/// Positive edge lengths of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricAssignment {
    lengths: Vec<f64>,
}

impl MetricAssignment {
    /// Takes lengths as given; only positivity is checked.
    pub fn raw(lengths: Vec<f64>) -> Result<Self> {
        if let Some((e, l)) = lengths.iter().enumerate().find(|(_, &l)| !(l > 0.0 && l.is_finite())) {
            return Err(Error::DegenerateMetric(format!("edge {e} has length {l}")));
        }
        Ok(Self { lengths })
    }

    pub fn unit(num_edges: usize) -> Self {
        Self { lengths: vec![1.0; num_edges] }
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn length(&self, e: usize) -> f64 {
        self.lengths[e]
    }

    pub fn path_length(&self, path: &[Dart]) -> f64 {
        path.iter().map(|d| self.lengths[d / 2]).sum()
    }

    pub fn to_json(&self) -> Value {
        let m: BTreeMap<String, f64> =
            self.lengths.iter().enumerate().map(|(e, &l)| (e.to_string(), l)).collect();
        json!(m)
    }

    pub fn from_json(v: &Value, num_edges: usize) -> Result<Self> {
        let perr = |loc: String, msg: &str| Error::Parse { location: loc, message: msg.into() };
        let obj = v.as_object().ok_or_else(|| perr("lengths".into(), "expected object"))?;
        let mut lengths = vec![None; num_edges];
        for (k, x) in obj {
            let loc = format!("lengths.{k}");
            let e: usize = k.parse().map_err(|_| perr(loc.clone(), "edge key is not an index"))?;
            if e >= num_edges {
                return Err(perr(loc, "no such edge"));
            }
            lengths[e] = Some(x.as_f64().ok_or_else(|| perr(loc, "expected number"))?);
        }
        let lengths = lengths
            .into_iter()
            .enumerate()
            .map(|(e, l)| l.ok_or_else(|| perr(format!("lengths.{e}"), "missing")))
            .collect::<Result<Vec<_>>>()?;
        Self::raw(lengths)
    }
}

/// Edges outside every wedge circle.
fn free_edges(g: &AGraph) -> Vec<usize> {
    (0..g.graph.num_edges()).filter(|&e| !g.in_any_wedge(e)).collect()
}

/// Scales the edges outside the wedges to total 1 and each circle to total 1.
/// A block with no edges imposes nothing.
pub fn normalize(g: &AGraph, raw: &[f64]) -> Result<MetricAssignment> {
    if raw.len() != g.graph.num_edges() {
        return Err(Error::DegenerateMetric(format!(
            "{} lengths for {} edges",
            raw.len(),
            g.graph.num_edges()
        )));
    }
    let mut out = MetricAssignment::raw(raw.to_vec())?.lengths;
    let mut blocks: Vec<Vec<usize>> = vec![free_edges(g)];
    for w in &g.wedges {
        for c in &w.circles {
            blocks.push(c.iter().map(|d| d / 2).collect());
        }
    }
    for block in blocks.iter().filter(|b| !b.is_empty()) {
        let total: f64 = block.iter().map(|&e| raw[e]).sum();
        for &e in block {
            out[e] = raw[e] / total;
        }
    }
    Ok(MetricAssignment { lengths: out })
}

/// Dimension of the open polysimplex of metrics on `g`.
pub fn polysimplex_dim(g: &AGraph) -> usize {
    let circles: usize = g.wedges.iter().flat_map(|w| &w.circles).map(|c| c.len() - 1).sum();
    circles + free_edges(g).len().saturating_sub(1)
}

/// Length of the reduced loop representing the conjugacy class of `w`.
pub fn loop_length(m: &Marking, lengths: &MetricAssignment, w: &FreeWord) -> Result<f64> {
    if w.is_identity() {
        return Err(Error::DegenerateMetric("length of the trivial word".into()));
    }
    Ok(lengths.path_length(&word_loop(m, w)))
}

/// The cyclically reduced loop of `w` under the marking.
pub fn word_loop(m: &Marking, w: &FreeWord) -> Vec<Dart> {
    let mut path = Vec::new();
    for &l in w.letters() {
        let p = &m.images[l.unsigned_abs() as usize - 1];
        if l > 0 {
            path.extend_from_slice(p);
        } else {
            path.extend(p.iter().rev().map(|&d| d ^ 1));
        }
    }
    cyclically_reduce_path(&path)
}

/// Test words on the given letters: each letter, then products `a b`, then
/// `a b^-1`, over pairs in order.
pub fn pair_words(letters: &[crate::free_group::Letter]) -> Vec<FreeWord> {
    let mut out: Vec<FreeWord> = letters.iter().map(|&a| FreeWord::letter(a)).collect();
    for sign in [1, -1] {
        for (i, &a) in letters.iter().enumerate() {
            for &b in &letters[i + 1..] {
                out.push(FreeWord::new([a, sign * b]));
            }
        }
    }
    out
}

/// Test words of factor `j` (1-based).
pub fn test_words(basis: &BasisSpec, j: usize) -> Vec<FreeWord> {
    pair_words(&basis.block(j))
}

/// `n` times the length of each test word of factor `j`.
pub fn f_vector_block(m: &Marking, lengths: &MetricAssignment, j: usize) -> Result<Vec<f64>> {
    let n = m.basis().n() as f64;
    test_words(m.basis(), j)
        .iter()
        .map(|w| loop_length(m, lengths, w).map(|l| n * l))
        .collect()
}

/// All factor blocks in order.
pub fn f_vector(m: &Marking, lengths: &MetricAssignment) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for j in 1..=m.basis().k() {
        out.extend(f_vector_block(m, lengths, j)?);
    }
    Ok(out)
}

/// Lexicographic order with entries within [`TOLERANCE`] treated as equal.
pub fn lex_compare(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > TOLERANCE {
            return if x < y { Ordering::Less } else { Ordering::Greater };
        }
    }
    a.len().cmp(&b.len())
}

/// A graph with a metric.
#[derive(Clone, Debug)]
pub struct MetricGraph {
    pub graph: AGraph,
    pub lengths: MetricAssignment,
}

impl MetricGraph {
    pub fn to_json(&self) -> Value {
        let mut v = agraph_to_json(&self.graph);
        v["lengths"] = self.lengths.to_json();
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let graph = agraph_from_json(v)?;
        let lengths = match v.get("lengths") {
            Some(l) => MetricAssignment::from_json(l, graph.graph.num_edges())?,
            None => MetricAssignment::unit(graph.graph.num_edges()),
        };
        Ok(Self { graph, lengths })
    }
}
