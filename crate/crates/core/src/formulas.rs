//! Closed-form dimension counts for the relative spine, the small spine, the
//! relative outer space and the virtual cohomological dimension.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorSignature {
    pub n: usize,
    pub s: Vec<usize>,
    /// Number of components the wedge cycles occupy (only for the count variant).
    pub c: Option<usize>,
}

impl FactorSignature {
    pub fn new(n: usize, s: &[usize]) -> Result<Self> {
        Self::with_components(n, s, None)
    }

    pub fn with_components(n: usize, s: &[usize], c: Option<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSignature("rank must be positive".into()));
        }
        if s.iter().any(|&r| r == 0) {
            return Err(Error::InvalidSignature("factor ranks must be >= 1".into()));
        }
        let total: usize = s.iter().sum();
        if total > n {
            return Err(Error::InvalidSignature(format!("sum s = {total} exceeds n = {n}")));
        }
        if n == 1 {
            return Err(Error::InvalidSignature(
                "rank 1: no graph with all valences >= 3 exists".into(),
            ));
        }
        if let Some(c) = c {
            if c == 0 || c > s.len() {
                return Err(Error::InvalidSignature(format!("component count {c} outside 1..=k")));
            }
            if total == n && c != 1 {
                return Err(Error::InvalidSignature("n = sum s forces c = 1".into()));
            }
        }
        Ok(Self { n, s: s.to_vec(), c })
    }

    pub fn k(&self) -> i64 {
        self.s.len() as i64
    }

    pub fn m(&self) -> i64 {
        self.s.iter().filter(|&&r| r == 1).count() as i64
    }

    pub fn sum_s(&self) -> i64 {
        self.s.iter().sum::<usize>() as i64
    }

    /// Sum of the ranks of factors with rank >= 2.
    fn sum_big(&self) -> i64 {
        self.s.iter().filter(|&&r| r > 1).sum::<usize>() as i64
    }

    fn n(&self) -> i64 {
        self.n as i64
    }

    fn is_tight(&self) -> bool {
        self.sum_s() == self.n()
    }

    pub fn label(&self) -> String {
        let s: Vec<String> = self.s.iter().map(|x| x.to_string()).collect();
        format!("({},({}))", self.n, s.join(","))
    }
}

fn require_factors(sig: &FactorSignature) -> Result<()> {
    if sig.s.is_empty() {
        return Err(Error::NoFactors);
    }
    Ok(())
}

/// `2n - 2 sum s + 2k - 2 - m`
pub fn vcd(sig: &FactorSignature) -> Result<i64> {
    require_factors(sig)?;
    Ok(2 * sig.n() - 2 * sig.sum_s() + 2 * sig.k() - 2 - sig.m())
}

/// `2n + 2k - 2 sum_{s>1} s - 3m - 2`; for `k = 0` the classical `2n - 3`.
pub fn dim_small_spine(sig: &FactorSignature) -> Result<i64> {
    if sig.s.is_empty() {
        return Ok(2 * sig.n() - 3);
    }
    Ok(2 * sig.n() + 2 * sig.k() - 2 * sig.sum_big() - 3 * sig.m() - 2)
}

/// Two branches, depending on whether free letters remain.
pub fn dim_relative_spine(sig: &FactorSignature) -> Result<i64> {
    let (n, k, m, s) = (sig.n(), sig.k(), sig.m(), sig.sum_s());
    if sig.s.is_empty() {
        return Ok(2 * n - 3);
    }
    Ok(if sig.is_tight() {
        2 * n + 2 * k - 2 * s - 2 - m
    } else {
        2 * n + 3 * k - 2 * s - 3 - m
    })
}

pub fn dim_cv(sig: &FactorSignature) -> Result<i64> {
    let (n, k, m, s) = (sig.n(), sig.k(), sig.m(), sig.sum_s());
    if sig.s.is_empty() {
        return Ok(3 * n - 4);
    }
    Ok(if sig.is_tight() {
        3 * n + 2 * k - 3 * s - 2 - m
    } else {
        3 * n + 3 * k - 3 * s - 4 - m
    })
}

/// Maximal edge count of a graph in the relative spine, per branch.
pub fn max_edges(sig: &FactorSignature) -> i64 {
    let (n, k, m, s) = (sig.n(), sig.k(), sig.m(), sig.sum_s());
    if sig.s.is_empty() {
        return 3 * n - 3;
    }
    if sig.is_tight() {
        3 * n + 2 * k - 2 * s - 2 - m
    } else {
        3 * n + 3 * k - 2 * s - 3 - m
    }
}

/// Edge bound from valence counting alone: all vertices trivalent except the
/// basepoints of factors of rank >= 2, separating edges allowed.
pub fn valence_edge_bound(sig: &FactorSignature) -> i64 {
    let (n, k, m, s) = (sig.n(), sig.k(), sig.m(), sig.sum_s());
    if sig.s.is_empty() {
        return 3 * n - 3;
    }
    3 * n + 3 * k - 2 * s - 3 - m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GraphCounts {
    pub vertices: i64,
    pub edges: i64,
}

/// Vertex and edge counts of a maximally blown-up graph.
///
/// Without `c`: the small-spine configuration (wedge cycles pairwise disjoint).
/// With `c`: wedge cycles spread over `c` components, `k - c` valence-4
/// meeting points. The edge count from the valence sum is cross-checked
/// against the Euler relation `V - E = 1 - n`.
pub fn max_graph_counts(sig: &FactorSignature) -> Result<GraphCounts> {
    let (n, k, m, sb) = (sig.n(), sig.k(), sig.m(), sig.sum_big());
    let (v, twice_e) = match sig.c {
        None => {
            let v = 2 * n + 3 * k - 2 * sb - 3 * m - 2;
            (v, 3 * v - 3 * k + 3 * m + 2 * sb)
        }
        Some(c) => {
            let c = c as i64;
            let v = 2 * n + 2 * k + c - 2 * sb - 3 * m - 2;
            (v, 3 * v - 2 * k - c + 3 * m + 2 * sb)
        }
    };
    if twice_e % 2 != 0 || v <= 0 {
        return Err(Error::InvalidSignature(format!(
            "{}: counts V = {v}, 2E = {twice_e} are infeasible",
            sig.label()
        )));
    }
    let e = twice_e / 2;
    if v - e != 1 - n {
        return Err(Error::InvalidSignature(format!(
            "{}: V - E = {} differs from 1 - n",
            sig.label(),
            v - e
        )));
    }
    Ok(GraphCounts { vertices: v, edges: e })
}

#[derive(Clone, Debug, Serialize)]
pub struct FormulaRow {
    pub signature: String,
    pub vcd: Option<i64>,
    pub dim_s: i64,
    pub dim_d: i64,
    pub dim_cv: i64,
    pub v: i64,
    pub e: i64,
}

pub fn row(sig: &FactorSignature) -> Result<FormulaRow> {
    let counts = max_graph_counts(sig)?;
    Ok(FormulaRow {
        signature: sig.label(),
        vcd: if sig.s.is_empty() { None } else { Some(vcd(sig)?) },
        dim_s: dim_relative_spine(sig)?,
        dim_d: dim_small_spine(sig)?,
        dim_cv: dim_cv(sig)?,
        v: counts.vertices,
        e: counts.edges,
    })
}

/// All non-degenerate signatures with `2 <= n <= n_max`, factor ranks
/// `<= s_max`, listed with non-increasing factor ranks.
pub fn signature_grid(n_max: usize, s_max: usize) -> Vec<FactorSignature> {
    fn parts(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        for r in (1..=max.min(rem)).rev() {
            cur.push(r);
            parts(rem - r, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for n in 2..=n_max {
        let mut all = Vec::new();
        parts(n, s_max, &mut Vec::new(), &mut all);
        all.sort();
        for s in all {
            if let Ok(sig) = FactorSignature::new(n, &s) {
                out.push(sig);
            }
        }
    }
    out
}

pub fn table_csv(n_max: usize, s_max: usize) -> String {
    let mut out = String::from("signature,vcd,dimS,dimD,dimCV,V,E\n");
    for sig in signature_grid(n_max, s_max) {
        if let Ok(r) = row(&sig) {
            out.push_str(&format!(
                "\"{}\",{},{},{},{},{},{}\n",
                r.signature,
                r.vcd.map(|v| v.to_string()).unwrap_or_default(),
                r.dim_s,
                r.dim_d,
                r.dim_cv,
                r.v,
                r.e
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(n: usize, s: &[usize]) -> FactorSignature {
        FactorSignature::new(n, s).unwrap()
    }

    #[test]
    fn vcd_values() {
        assert_eq!(vcd(&sig(2, &[1])).unwrap(), 1);
        for n in 3..=6 {
            assert_eq!(vcd(&sig(n, &vec![1; n])).unwrap(), n as i64 - 2);
        }
        assert_eq!(vcd(&sig(4, &[2, 2])).unwrap(), 2);
        assert_eq!(vcd(&sig(3, &[])).unwrap_err(), Error::NoFactors);
    }

    #[test]
    fn spine_dimensions() {
        assert_eq!(dim_small_spine(&sig(4, &[2, 2])).unwrap(), 2);
        assert_eq!(dim_small_spine(&sig(2, &[1])).unwrap(), 1);
        for n in 3..=6 {
            assert_eq!(dim_small_spine(&sig(n, &vec![1; n])).unwrap(), n as i64 - 2);
        }
        assert_eq!(dim_relative_spine(&sig(2, &[1])).unwrap(), 1);
        assert_eq!(dim_relative_spine(&sig(5, &[2, 2])).unwrap(), 5);
        assert_eq!(dim_relative_spine(&sig(3, &[])).unwrap(), 3);
        assert_eq!(dim_cv(&sig(5, &[2, 2])).unwrap(), 5);
        assert_eq!(dim_cv(&sig(2, &[])).unwrap(), 2);
        assert_eq!(dim_cv(&sig(2, &[1])).unwrap(), 1);
        assert_eq!(dim_cv(&sig(4, &[2, 2])).unwrap(), 2);
    }

    #[test]
    fn counts() {
        let c = max_graph_counts(&sig(4, &[2, 2])).unwrap();
        assert_eq!((c.vertices, c.edges), (4, 7));
        let c = max_graph_counts(&FactorSignature::with_components(2, &[1], Some(1)).unwrap()).unwrap();
        assert_eq!(c.vertices - c.edges, -1);
        let c = max_graph_counts(&sig(3, &[])).unwrap();
        assert_eq!((c.vertices, c.edges), (4, 6));
    }

    #[test]
    fn degenerate_signatures_rejected() {
        assert!(FactorSignature::new(1, &[1]).is_err());
        assert!(FactorSignature::new(1, &[]).is_err());
        assert!(FactorSignature::new(3, &[2, 2]).is_err());
        assert!(FactorSignature::with_components(4, &[2, 2], Some(2)).is_err());
        assert!(FactorSignature::with_components(5, &[2, 2], Some(3)).is_err());
    }

    #[test]
    fn grid_invariants() {
        for s in signature_grid(7, 3) {
            let d_small = dim_small_spine(&s).unwrap();
            let d_rel = dim_relative_spine(&s).unwrap();
            if !s.s.is_empty() {
                assert!(vcd(&s).unwrap() <= d_small, "{}", s.label());
                if s.sum_s() == s.n() {
                    assert_eq!(d_small, d_rel, "{}", s.label());
                }
            }
            if let Ok(c) = max_graph_counts(&s) {
                assert_eq!(c.vertices - c.edges, 1 - s.n as i64);
            }
        }
        let csv = table_csv(3, 2);
        assert!(csv.starts_with("signature,vcd,dimS,dimD,dimCV,V,E\n"));
        assert!(csv.contains("\"(2,(1))\",1,1,1,1,2,3"));
    }
}
