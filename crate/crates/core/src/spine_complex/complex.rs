use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Finite simplicial complex given by its maximal faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertices: Vec<String>,
    maximal_faces: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    /// Faces are sorted and deduplicated; faces contained in others are dropped.
    /// Vertices not in any face become isolated points.
    pub fn new(vertices: Vec<String>, faces: Vec<Vec<usize>>) -> Self {
        let mut sets: Vec<BTreeSet<usize>> = faces
            .into_iter()
            .map(|f| f.into_iter().collect::<BTreeSet<_>>())
            .filter(|f| !f.is_empty())
            .collect();
        let covered: BTreeSet<usize> = sets.iter().flatten().copied().collect();
        for v in 0..vertices.len() {
            if !covered.contains(&v) {
                sets.push(BTreeSet::from([v]));
            }
        }
        sets.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        sets.dedup();
        let mut kept: Vec<BTreeSet<usize>> = Vec::new();
        for s in sets {
            if !kept.iter().any(|k| s.is_subset(k)) {
                kept.push(s);
            }
        }
        let mut maximal_faces: Vec<Vec<usize>> =
            kept.into_iter().map(|s| s.into_iter().collect()).collect();
        maximal_faces.sort();
        Self { vertices, maximal_faces }
    }

    /// Full simplex on `n` vertices.
    pub fn simplex(n: usize) -> Self {
        Self::new((0..n).map(|i| i.to_string()).collect(), vec![(0..n).collect()])
    }

    /// Boundary of the simplex on `n` vertices.
    pub fn simplex_boundary(n: usize) -> Self {
        let faces = (0..n).map(|skip| (0..n).filter(|&i| i != skip).collect()).collect();
        Self::new((0..n).map(|i| i.to_string()).collect(), faces)
    }

    /// Clique complex of a graph on `n` vertices.
    pub fn flag(vertices: Vec<String>, adjacent: &dyn Fn(usize, usize) -> bool) -> Self {
        let n = vertices.len();
        let nb: Vec<BTreeSet<usize>> = (0..n)
            .map(|a| (0..n).filter(|&b| b != a && adjacent(a, b)).collect())
            .collect();
        let mut cliques = Vec::new();
        bron_kerbosch(&nb, BTreeSet::new(), (0..n).collect(), BTreeSet::new(), &mut cliques);
        Self::new(vertices, cliques)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn maximal_faces(&self) -> &[Vec<usize>] {
        &self.maximal_faces
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dimension(&self) -> Result<usize> {
        self.maximal_faces
            .iter()
            .map(|f| f.len() - 1)
            .max()
            .ok_or(Error::EmptyComplex)
    }

    /// All faces of dimension `d`, sorted.
    pub fn faces(&self, d: usize) -> Vec<Vec<usize>> {
        let mut out = BTreeSet::new();
        for f in &self.maximal_faces {
            if f.len() > d {
                subsets(f, d + 1, 0, &mut Vec::new(), &mut out);
            }
        }
        out.into_iter().collect()
    }

    pub fn num_faces(&self) -> usize {
        match self.dimension() {
            Ok(d) => (0..=d).map(|i| self.faces(i).len()).sum(),
            Err(_) => 0,
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        match self.dimension() {
            Ok(d) => (0..=d)
                .map(|i| {
                    let c = self.faces(i).len() as i64;
                    if i % 2 == 0 {
                        c
                    } else {
                        -c
                    }
                })
                .sum(),
            Err(_) => 0,
        }
    }

    /// Subcomplex induced on the kept vertices.
    pub fn induced(&self, keep: &[usize]) -> Self {
        let keep: BTreeSet<usize> = keep.iter().copied().collect();
        let index: Vec<usize> = keep.iter().copied().collect();
        let pos = |v: usize| index.iter().position(|&x| x == v).expect("kept");
        let faces = self
            .maximal_faces
            .iter()
            .map(|f| f.iter().filter(|v| keep.contains(v)).map(|&v| pos(v)).collect())
            .collect();
        Self::new(index.iter().map(|&v| self.vertices[v].clone()).collect(), faces)
    }

    pub fn to_json(&self) -> Value {
        let faces: Vec<Vec<&str>> = self
            .maximal_faces
            .iter()
            .map(|f| f.iter().map(|&v| self.vertices[v].as_str()).collect())
            .collect();
        json!({"vertices": self.vertices, "maximal_faces": faces})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let perr = |loc: &str, m: &str| Error::Parse { location: loc.into(), message: m.into() };
        let vertices: Vec<String> = v
            .get("vertices")
            .and_then(Value::as_array)
            .ok_or_else(|| perr("vertices", "missing array"))?
            .iter()
            .map(|x| match x {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect();
        let faces = v
            .get("maximal_faces")
            .and_then(Value::as_array)
            .ok_or_else(|| perr("maximal_faces", "missing array"))?;
        let mut out = Vec::new();
        for (i, f) in faces.iter().enumerate() {
            let loc = format!("maximal_faces[{i}]");
            let arr = f.as_array().ok_or_else(|| perr(&loc, "expected an array"))?;
            let mut face = Vec::new();
            for x in arr {
                let key = match x {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                face.push(
                    vertices
                        .iter()
                        .position(|v| *v == key)
                        .ok_or_else(|| perr(&loc, &format!("unknown vertex {key}")))?,
                );
            }
            out.push(face);
        }
        Ok(Self::new(vertices, out))
    }
}

fn subsets(
    f: &[usize],
    k: usize,
    from: usize,
    cur: &mut Vec<usize>,
    out: &mut BTreeSet<Vec<usize>>,
) {
    if cur.len() == k {
        out.insert(cur.clone());
        return;
    }
    for i in from..f.len() {
        if f.len() - i < k - cur.len() {
            break;
        }
        cur.push(f[i]);
        subsets(f, k, i + 1, cur, out);
        cur.pop();
    }
}

fn bron_kerbosch(
    nb: &[BTreeSet<usize>],
    r: BTreeSet<usize>,
    mut p: BTreeSet<usize>,
    mut x: BTreeSet<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r.into_iter().collect());
        return;
    }
    let pivot = *p.union(&x).max_by_key(|&&u| nb[u].intersection(&p).count()).expect("nonempty");
    let candidates: Vec<usize> = p.difference(&nb[pivot]).copied().collect();
    for v in candidates {
        let mut r2 = r.clone();
        r2.insert(v);
        let p2 = p.intersection(&nb[v]).copied().collect();
        let x2 = x.intersection(&nb[v]).copied().collect();
        bron_kerbosch(nb, r2, p2, x2, out);
        p.remove(&v);
        x.insert(v);
    }
}
