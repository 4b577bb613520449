use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use super::{homology, HomologyReport, Poset, SimplicialComplex};
use crate::error::{Error, Result};
use crate::free_group::BasisSpec;
use crate::graph_core::{
    blow_up, canonical_form, compatible, contract_agraph, enumerate_agraph_types, forests,
    ideal_edges_at, is_legal, validate_agraph, validate_pre_agraph, AGraph, CanonKey,
    EnumerationConfig, IdealEdge,
};

/// Poset whose elements are graph types, with one representative each.
#[derive(Clone, Debug)]
pub struct TypePoset {
    pub poset: Poset,
    pub types: Vec<AGraph>,
    pub keys: Vec<CanonKey>,
}

impl TypePoset {
    fn build(types: Vec<AGraph>, keys: Vec<CanonKey>, relations: &[(usize, usize)]) -> Self {
        let labels = keys.iter().map(|k| k.to_string()).collect();
        let poset = Poset::from_relations(labels, relations).expect("collapses strictly lower the edge count");
        Self { poset, types, keys }
    }

    pub fn index_of(&self, key: &CanonKey) -> Option<usize> {
        self.keys.iter().position(|k| k == key)
    }

    pub fn dimension(&self) -> Result<usize> {
        if self.poset.is_empty() {
            return Err(Error::EmptyComplex);
        }
        Ok(self.poset.height() - 1)
    }

    pub fn restrict(&self, keep: &[usize]) -> TypePoset {
        let (poset, kept) = self.poset.subposet(keep);
        TypePoset {
            poset,
            types: kept.iter().map(|&i| self.types[i].clone()).collect(),
            keys: kept.iter().map(|&i| self.keys[i].clone()).collect(),
        }
    }
}

/// Keys of all valid proper forest collapses of `g`.
fn collapses(g: &AGraph, loose: bool) -> Vec<(CanonKey, AGraph)> {
    forests(g)
        .into_iter()
        .filter(|f| !f.is_empty())
        .filter_map(|f| {
            let (h, _) = contract_agraph(g, &f);
            let ok = if loose { validate_pre_agraph(&h) } else { validate_agraph(&h) };
            ok.is_empty().then(|| (canonical_form(&h), h))
        })
        .collect()
}

/// Types ordered by forest collapse: `x < y` iff collapsing a forest of `y`
/// gives `x`.
pub fn collapse_poset(basis: &BasisSpec, config: EnumerationConfig) -> Result<TypePoset> {
    let types = enumerate_agraph_types(basis, config)?;
    let keys: Vec<CanonKey> = types.iter().map(canonical_form).collect();
    let index: BTreeMap<&CanonKey, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let below: Vec<Vec<CanonKey>> = types
        .par_iter()
        .map(|g| collapses(g, false).into_iter().map(|(k, _)| k).collect())
        .collect();
    let mut relations = BTreeSet::new();
    for (y, ks) in below.iter().enumerate() {
        for k in ks {
            let x = *index.get(k).ok_or_else(|| {
                Error::InvalidGraph(format!("collapse {k} of an enumerated type is not enumerated"))
            })?;
            relations.insert((x, y));
        }
    }
    let relations: Vec<(usize, usize)> = relations.into_iter().collect();
    Ok(TypePoset::build(types, keys, &relations))
}

/// All types reachable from `roots` by forest collapses. With `loose`, wedge
/// cycles may overlap in trees.
pub fn downset_poset(roots: &[AGraph], loose: bool) -> Result<TypePoset> {
    let mut keys: Vec<CanonKey> = Vec::new();
    let mut types: Vec<AGraph> = Vec::new();
    let mut index: BTreeMap<CanonKey, usize> = BTreeMap::new();
    let mut relations = BTreeSet::new();
    let mut queue = VecDeque::new();
    for r in roots {
        let v = if loose { validate_pre_agraph(r) } else { validate_agraph(r) };
        if !v.is_empty() {
            return Err(Error::InvalidGraph(crate::graph_core::format_violations(&v)));
        }
        let k = canonical_form(r);
        if !index.contains_key(&k) {
            index.insert(k.clone(), keys.len());
            keys.push(k);
            types.push(r.clone());
            queue.push_back(keys.len() - 1);
        }
    }
    while let Some(y) = queue.pop_front() {
        for (k, h) in collapses(&types[y].clone(), loose) {
            let x = match index.get(&k) {
                Some(&x) => x,
                None => {
                    index.insert(k.clone(), keys.len());
                    keys.push(k);
                    types.push(h);
                    queue.push_back(keys.len() - 1);
                    keys.len() - 1
                }
            };
            relations.insert((x, y));
        }
    }
    let relations: Vec<(usize, usize)> = relations.into_iter().collect();
    Ok(TypePoset::build(types, keys, &relations))
}

/// Induced subposet on the types whose wedge cycles are pairwise disjoint.
pub fn small_spine(tp: &TypePoset) -> TypePoset {
    let keep: Vec<usize> = (0..tp.types.len()).filter(|&i| tp.types[i].is_small()).collect();
    tp.restrict(&keep)
}

pub fn ideal_edge_label(e: &IdealEdge) -> String {
    let side: Vec<String> = e.side.iter().map(|d| d.to_string()).collect();
    format!("v{}:{{{}}}", e.vertex, side.join(","))
}

/// `B(v)`: compatible families of ideal edges at `v`; `L(v)`: the part
/// spanned by legal ones.
pub fn link_complexes(g: &AGraph, v: usize) -> (SimplicialComplex, SimplicialComplex) {
    let all = ideal_edges_at(g, v);
    let labels: Vec<String> = all.iter().map(ideal_edge_label).collect();
    let b = SimplicialComplex::flag(labels.clone(), &|x, y| compatible(&all[x], &all[y]));
    let legal: Vec<usize> = (0..all.len()).filter(|&i| is_legal(g, &all[i])).collect();
    let l = b.induced(&legal);
    (b, l)
}

#[derive(Clone, Debug, Serialize)]
pub struct RetractReport {
    pub image: Vec<usize>,
    pub homology_before: HomologyReport,
    pub homology_after: HomologyReport,
    pub homology_equal: bool,
}

/// Checks `f(x) <= x` and monotonicity, then compares order-complex homology
/// of the poset and of the image.
pub fn poset_retract(p: &Poset, f: &[usize]) -> Result<RetractReport> {
    if f.len() != p.len() || f.iter().any(|&y| y >= p.len()) {
        return Err(Error::RetractHypothesis(0, 0, "map does not send the poset to itself".into()));
    }
    for x in 0..p.len() {
        if !p.le(f[x], x) {
            return Err(Error::RetractHypothesis(x, f[x], "f(x) is not below x".into()));
        }
    }
    for (x, y) in p.relations() {
        if !p.le(f[x], f[y]) {
            return Err(Error::RetractHypothesis(x, y, "f is not monotone".into()));
        }
    }
    let image: Vec<usize> = f.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let (sub, _) = p.subposet(&image);
    let before = homology(&p.order_complex())?;
    let after = homology(&sub.order_complex())?;
    Ok(RetractReport {
        homology_equal: before.same_groups(&after),
        image,
        homology_before: before,
        homology_after: after,
    })
}

/// Blow-ups of a graph: families of pairwise compatible legal ideal edges
/// whose joint blow-up is valid.
#[derive(Clone, Debug)]
pub struct Star {
    pub families: Vec<Vec<IdealEdge>>,
    /// Families that are pairwise compatible and legal but blow up invalidly.
    pub rejected: usize,
}

impl Star {
    pub fn max_family_size(&self) -> usize {
        self.families.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Inclusion order on the families.
    pub fn poset(&self) -> Poset {
        let labels: Vec<String> = self
            .families
            .iter()
            .map(|f| f.iter().map(ideal_edge_label).collect::<Vec<_>>().join(" "))
            .collect();
        let sets: Vec<BTreeSet<&IdealEdge>> = self.families.iter().map(|f| f.iter().collect()).collect();
        let mut rel = Vec::new();
        for a in 0..sets.len() {
            for b in 0..sets.len() {
                if a != b && sets[a].is_subset(&sets[b]) {
                    rel.push((a, b));
                }
            }
        }
        Poset::from_relations(labels, &rel).expect("inclusion is acyclic")
    }

    /// Distinct types among the blow-ups.
    pub fn types(&self, g: &AGraph) -> Result<BTreeSet<CanonKey>> {
        self.families.iter().map(|f| blow_up_family(g, f).map(|h| canonical_form(&h))).collect()
    }
}

/// Blows up each vertex in turn; old vertex ids and darts are preserved.
pub fn blow_up_family(g: &AGraph, family: &[IdealEdge]) -> Result<AGraph> {
    let mut by_vertex: BTreeMap<usize, Vec<IdealEdge>> = BTreeMap::new();
    for e in family {
        by_vertex.entry(e.vertex).or_default().push(e.clone());
    }
    let mut h = g.clone();
    for (v, es) in by_vertex {
        h = blow_up(&h, v, &es)?;
    }
    Ok(h)
}

pub fn star_of_rose(g: &AGraph) -> Result<Star> {
    let v = validate_agraph(g);
    if !v.is_empty() {
        return Err(Error::InvalidGraph(crate::graph_core::format_violations(&v)));
    }
    let legal: Vec<IdealEdge> = (0..g.graph.num_vertices())
        .flat_map(|v| ideal_edges_at(g, v))
        .filter(|e| is_legal(g, e))
        .collect();
    let ok = |a: &IdealEdge, b: &IdealEdge| a.vertex != b.vertex || compatible(a, b);
    let mut families = Vec::new();
    let mut rejected = 0;
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
    while let Some((fam, from)) = stack.pop() {
        for i in from..legal.len() {
            if fam.iter().all(|&j| ok(&legal[j], &legal[i])) {
                let mut next = fam.clone();
                next.push(i);
                stack.push((next, i + 1));
            }
        }
        if fam.is_empty() {
            continue;
        }
        let edges: Vec<IdealEdge> = fam.iter().map(|&i| legal[i].clone()).collect();
        if blow_up_family(g, &edges).is_ok() {
            families.push(edges);
        } else {
            rejected += 1;
        }
    }
    families.sort();
    Ok(Star { families, rejected })
}
