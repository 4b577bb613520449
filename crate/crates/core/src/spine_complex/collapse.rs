use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::SimplicialComplex;

/// Outcome of greedy elementary collapses. Reaching a single vertex proves
/// contractibility; getting stuck proves nothing.
#[derive(Clone, Debug, Serialize)]
pub struct CollapseReport {
    pub collapsible: bool,
    /// Removed pairs `(free face, its unique coface)`, by vertex label.
    pub steps: Vec<(Vec<String>, Vec<String>)>,
    pub remaining_faces: usize,
}

pub fn collapsible(c: &SimplicialComplex) -> CollapseReport {
    let dim = match c.dimension() {
        Ok(d) => d,
        Err(_) => {
            return CollapseReport { collapsible: false, steps: Vec::new(), remaining_faces: 0 }
        }
    };
    let mut alive: BTreeSet<Vec<usize>> = (0..=dim).flat_map(|d| c.faces(d)).collect();
    let mut cofaces: BTreeMap<Vec<usize>, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for f in &alive {
        cofaces.entry(f.clone()).or_default();
        if f.len() > 1 {
            for skip in 0..f.len() {
                let mut g = f.clone();
                g.remove(skip);
                cofaces.entry(g).or_default().insert(f.clone());
            }
        }
    }
    let label = |f: &[usize]| f.iter().map(|&v| c.vertices()[v].clone()).collect::<Vec<_>>();
    let mut steps = Vec::new();
    loop {
        // highest-dimensional free pair first, then lexicographic
        let free = alive
            .iter()
            .filter(|f| cofaces[*f].len() == 1)
            .filter(|f| {
                let tau = cofaces[*f].iter().next().expect("one coface");
                cofaces[tau].is_empty()
            })
            .max_by(|a, b| a.len().cmp(&b.len()).then(b.cmp(a)))
            .cloned();
        let Some(sigma) = free else { break };
        let tau = cofaces[&sigma].iter().next().expect("one coface").clone();
        for f in [&tau, &sigma] {
            alive.remove(f);
            if f.len() > 1 {
                for skip in 0..f.len() {
                    let mut g = f.clone();
                    g.remove(skip);
                    if let Some(s) = cofaces.get_mut(&g) {
                        s.remove(f);
                    }
                }
            }
        }
        steps.push((label(&sigma), label(&tau)));
    }
    CollapseReport {
        collapsible: alive.len() == 1,
        steps,
        remaining_faces: alive.len(),
    }
}
