use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::SimplicialComplex;

/// Finite poset on labelled elements, stored as its strict order relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    labels: Vec<String>,
    /// `less[a][b]` iff `a < b`.
    less: Vec<Vec<bool>>,
}

impl Poset {
    /// Builds the order generated by `relations` (pairs `a < b`).
    /// Returns `None` if the relations contain a cycle.
    pub fn from_relations(labels: Vec<String>, relations: &[(usize, usize)]) -> Option<Self> {
        let n = labels.len();
        let mut less = vec![vec![false; n]; n];
        for &(a, b) in relations {
            less[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if less[i][k] {
                    for j in 0..n {
                        if less[k][j] {
                            less[i][j] = true;
                        }
                    }
                }
            }
        }
        if (0..n).any(|i| less[i][i]) {
            return None;
        }
        Some(Self { labels, less })
    }

    pub fn antichain(labels: Vec<String>) -> Self {
        Self::from_relations(labels, &[]).expect("no relations")
    }

    pub fn chain(len: usize) -> Self {
        let rel: Vec<(usize, usize)> = (1..len).map(|i| (i - 1, i)).collect();
        Self::from_relations((0..len).map(|i| i.to_string()).collect(), &rel).expect("acyclic")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.less[a][b]
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        a == b || self.less[a][b]
    }

    /// Covering pairs `(a, b)`: `a < b` with nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.less[a][b] && !(0..n).any(|c| self.less[a][c] && self.less[c][b]) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn relations(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.less[a][b])
            .collect()
    }

    /// Induced order on the kept elements, in their original order.
    pub fn subposet(&self, keep: &[usize]) -> (Poset, Vec<usize>) {
        let keep: Vec<usize> = keep.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        let less = keep
            .iter()
            .map(|&a| keep.iter().map(|&b| self.less[a][b]).collect())
            .collect();
        (Poset { labels, less }, keep)
    }

    /// All maximal chains, each listed bottom to top.
    pub fn maximal_chains(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let covers = self.covers();
        let mut up: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in &covers {
            up[a].push(b);
        }
        let minimal: Vec<usize> = (0..n).filter(|&b| !(0..n).any(|a| self.less[a][b])).collect();
        let mut out = Vec::new();
        let mut stack: Vec<Vec<usize>> = minimal.into_iter().map(|m| vec![m]).collect();
        while let Some(chain) = stack.pop() {
            let top = *chain.last().expect("nonempty");
            if up[top].is_empty() {
                out.push(chain);
                continue;
            }
            for &b in &up[top] {
                let mut c = chain.clone();
                c.push(b);
                stack.push(c);
            }
        }
        out.sort();
        out
    }

    /// Number of elements in a longest chain.
    pub fn height(&self) -> usize {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        // elements with fewer predecessors first is a linear extension
        order.sort_by_key(|&b| (0..n).filter(|&a| self.less[a][b]).count());
        let mut best = vec![1usize; n];
        for (i, &b) in order.iter().enumerate() {
            for &a in &order[..i] {
                if self.less[a][b] {
                    best[b] = best[b].max(best[a] + 1);
                }
            }
        }
        best.into_iter().max().unwrap_or(0)
    }

    pub fn order_complex(&self) -> SimplicialComplex {
        SimplicialComplex::new(self.labels.clone(), self.maximal_chains())
    }

    /// Hasse diagram in Graphviz syntax.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{name}\" {{");
        let _ = writeln!(out, "  rankdir=BT;");
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "  p{i} [label=\"{}\"];", l.replace('"', "'"));
        }
        for (a, b) in self.covers() {
            let _ = writeln!(out, "  p{a} -> p{b};");
        }
        out.push_str("}\n");
        out
    }
}
