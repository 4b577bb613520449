use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use super::SimplicialComplex;
use crate::error::{Error, Result};

/// Integral homology: Betti numbers and, per degree, the torsion invariant
/// factors (only nontrivial ones).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyReport {
    pub betti: Vec<usize>,
    pub torsion: Vec<(usize, Vec<u64>)>,
}

impl HomologyReport {
    pub fn is_point_like(&self) -> bool {
        self.torsion.is_empty()
            && self.betti.first() == Some(&1)
            && self.betti.iter().skip(1).all(|&b| b == 0)
    }

    /// Equal homology, ignoring trailing zero Betti numbers.
    pub fn same_groups(&self, other: &HomologyReport) -> bool {
        let trim = |b: &[usize]| {
            let end = b.iter().rposition(|&x| x != 0).map_or(0, |i| i + 1);
            b[..end].to_vec()
        };
        trim(&self.betti) == trim(&other.betti) && self.torsion == other.torsion
    }

    pub fn to_json(&self) -> Value {
        json!({"betti": self.betti, "torsion": self.torsion})
    }
}

/// A way of computing simplicial homology.
pub trait HomologyEngine: Send + Sync {
    fn name(&self) -> &'static str;
    fn homology(&self, c: &SimplicialComplex) -> Result<HomologyReport>;
}

/// Smith normal form of the boundary maps over the integers.
pub struct SmithEngine;

/// Ranks of the boundary maps over the rationals; reports no torsion.
pub struct RationalEngine;

impl HomologyEngine for SmithEngine {
    fn name(&self) -> &'static str {
        "snf"
    }

    fn homology(&self, c: &SimplicialComplex) -> Result<HomologyReport> {
        let dim = c.dimension()?;
        let faces: Vec<Vec<Vec<usize>>> = (0..=dim).map(|d| c.faces(d)).collect();
        // diagonal of the Smith form of each boundary map d_k : C_k -> C_{k-1}
        let mut diag: Vec<Vec<i128>> = vec![Vec::new(); dim + 2];
        for k in 1..=dim {
            diag[k] = smith_diagonal(boundary_matrix(&faces[k], &faces[k - 1]));
        }
        let mut betti = Vec::new();
        let mut torsion = Vec::new();
        for k in 0..=dim {
            let r_in = diag[k + 1].len();
            let r_out = diag[k].len();
            betti.push(faces[k].len() - r_out - r_in);
            let t: Vec<u64> = diag[k + 1].iter().filter(|&&x| x > 1).map(|&x| x as u64).collect();
            if !t.is_empty() {
                torsion.push((k, t));
            }
        }
        Ok(HomologyReport { betti, torsion })
    }
}

impl HomologyEngine for RationalEngine {
    fn name(&self) -> &'static str {
        "rational"
    }

    fn homology(&self, c: &SimplicialComplex) -> Result<HomologyReport> {
        let dim = c.dimension()?;
        let faces: Vec<Vec<Vec<usize>>> = (0..=dim).map(|d| c.faces(d)).collect();
        let mut ranks = vec![0usize; dim + 2];
        for k in 1..=dim {
            ranks[k] = rational_rank(&boundary_matrix(&faces[k], &faces[k - 1]));
        }
        let betti = (0..=dim).map(|k| faces[k].len() - ranks[k] - ranks[k + 1]).collect();
        Ok(HomologyReport { betti, torsion: Vec::new() })
    }
}

pub fn homology(c: &SimplicialComplex) -> Result<HomologyReport> {
    if c.is_empty() {
        return Err(Error::EmptyComplex);
    }
    SmithEngine.homology(c)
}

/// Rows index `(k-1)`-faces, columns index `k`-faces.
fn boundary_matrix(upper: &[Vec<usize>], lower: &[Vec<usize>]) -> Vec<Vec<i128>> {
    let index: HashMap<&[usize], usize> =
        lower.iter().enumerate().map(|(i, f)| (f.as_slice(), i)).collect();
    let mut m = vec![vec![0i128; upper.len()]; lower.len()];
    for (j, f) in upper.iter().enumerate() {
        for skip in 0..f.len() {
            let face: Vec<usize> = f
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect();
            let i = index[face.as_slice()];
            m[i][j] = if skip % 2 == 0 { 1 } else { -1 };
        }
    }
    m
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Nonzero invariant factors of an integer matrix, in divisibility order.
pub fn smith_diagonal(mut a: Vec<Vec<i128>>) -> Vec<i128> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the remaining block
        let mut best: Option<(i128, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 && best.map_or(true, |(b, _, _)| x.abs() < b) {
                    best = Some((x.abs(), i, j));
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t];
            for i in t + 1..rows {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        let sub = q.checked_mul(a[t][j]).expect("coefficient overflow");
                        a[i][j] = a[i][j].checked_sub(sub).expect("coefficient overflow");
                    }
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        let sub = q.checked_mul(row[t]).expect("coefficient overflow");
                        row[j] = row[j].checked_sub(sub).expect("coefficient overflow");
                    }
                }
            }
            // a leftover remainder is smaller than the pivot: move it in
            let mut rem: Option<(i128, usize, bool)> = None;
            for i in t + 1..rows {
                let x = a[i][t];
                if x != 0 && rem.map_or(true, |(b, _, _)| x.abs() < b) {
                    rem = Some((x.abs(), i, true));
                }
            }
            for j in t + 1..cols {
                let x = a[t][j];
                if x != 0 && rem.map_or(true, |(b, _, _)| x.abs() < b) {
                    rem = Some((x.abs(), j, false));
                }
            }
            match rem {
                None => break,
                Some((_, i, true)) => a.swap(t, i),
                Some((_, j, false)) => {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                }
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    // (d_i, d_j) -> (gcd, lcm) until each divides the next
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            let g = gcd(diag[i], diag[j]);
            let l = diag[i] / g * diag[j];
            diag[i] = g;
            diag[j] = l;
        }
    }
    diag
}

/// Rank over the rationals by exact Gaussian elimination.
pub fn rational_rank(m: &[Vec<i128>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, p);
        let inv = BigRational::one() / a[rank][c].clone();
        for j in c..cols {
            a[rank][j] = &a[rank][j] * &inv;
        }
        for r in 0..rows {
            if r != rank && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in c..cols {
                    let sub = &f * &a[rank][j];
                    a[r][j] = &a[r][j] - sub;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spheres_and_simplices() {
        let h = homology(&SimplicialComplex::simplex_boundary(3)).unwrap();
        assert_eq!(h.betti, vec![1, 1]);
        let h = homology(&SimplicialComplex::simplex_boundary(4)).unwrap();
        assert_eq!(h.betti, vec![1, 0, 1]);
        assert!(homology(&SimplicialComplex::simplex(4)).unwrap().is_point_like());
        let two_points = SimplicialComplex::new(vec!["a".into(), "b".into()], vec![]);
        assert_eq!(homology(&two_points).unwrap().betti, vec![2]);
    }

    #[test]
    fn projective_plane_torsion() {
        // six-vertex triangulation of the real projective plane
        let faces = vec![
            vec![0, 1, 2],
            vec![0, 2, 3],
            vec![0, 3, 4],
            vec![0, 4, 5],
            vec![0, 5, 1],
            vec![1, 2, 4],
            vec![2, 3, 5],
            vec![3, 4, 1],
            vec![4, 5, 2],
            vec![5, 1, 3],
        ];
        let c = SimplicialComplex::new((0..6).map(|i| i.to_string()).collect(), faces);
        let h = homology(&c).unwrap();
        assert_eq!(h.betti, vec![1, 0, 0]);
        assert_eq!(h.torsion, vec![(1, vec![2])]);
        assert_eq!(RationalEngine.homology(&c).unwrap().betti, vec![1, 0, 0]);
    }

    #[test]
    fn smith_normalises() {
        assert_eq!(smith_diagonal(vec![vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert_eq!(smith_diagonal(vec![vec![4, 6]]), vec![2]);
    }
}
