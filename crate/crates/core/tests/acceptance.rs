//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relspine::formulas::{dim_cv, dim_relative_spine, dim_small_spine, vcd, FactorSignature};
use relspine::free_group::{dihedral_generators, vcd_generators, verify_abelian_witness, Automorphism, BasisSpec};
use relspine::graph_core::{
    canonical_form, collapse_wedge_intersections, enumerate_agraph_types, ideal_edges_at, is_legal,
    refined_legal, remark_legal, AGraph, EnumerationConfig, Graph, Wedge,
};
use relspine::metric_maps::{
    minset_check, nielsen_moves, BruteForceEngine, CandidateEngine, GraphMap, LipschitzEngine,
    MetricAssignment, MetricGraph,
};
use relspine::spine_complex::{
    collapse_poset, collapsible, downset_poset, link_complexes, poset_retract, small_spine, spine_ball,
    BallConfig, HomologyEngine, Marking, RationalEngine, SimplicialComplex, SmithEngine, TypePoset,
};

/// Agreement tolerance for Lipschitz constants.
const LIP_TOLERANCE: f64 = 1e-9;
/// Seed for every randomized criterion.
const SEED: u64 = 0x5eed_2026;
const LIPSCHITZ_INSTANCES: usize = 120;
const HOMOLOGY_INSTANCES: usize = 50;
const MINSET_BOUND: usize = 4;
const WITNESS_EXPONENT: i64 = 2;

const SIGNATURES: [(usize, &[usize]); 4] = [(2, &[1]), (3, &[1]), (3, &[2]), (4, &[2, 2])];

type Outcome = (bool, String);

fn label(n: usize, s: &[usize]) -> String {
    let s: Vec<String> = s.iter().map(|x| x.to_string()).collect();
    format!("({n},({}))", s.join(","))
}

fn posets() -> Vec<(String, TypePoset)> {
    SIGNATURES
        .iter()
        .map(|&(n, s)| {
            let b = BasisSpec::new(n, s).unwrap();
            (label(n, s), collapse_poset(&b, EnumerationConfig::default()).unwrap())
        })
        .collect()
}

fn formulas() -> Outcome {
    let sig = |n: usize, s: &[usize]| FactorSignature::new(n, s).unwrap();
    let mut bad = Vec::new();
    let mut expect = |what: String, got: i64, want: i64| {
        if got != want {
            bad.push(format!("{what} = {got}, expected {want}"));
        }
    };
    expect("vcd(2,(1))".into(), vcd(&sig(2, &[1])).unwrap(), 1);
    for n in 3..=6 {
        expect(format!("vcd({n},1^{n})"), vcd(&sig(n, &vec![1; n])).unwrap(), n as i64 - 2);
    }
    expect("vcd(4,(2,2))".into(), vcd(&sig(4, &[2, 2])).unwrap(), 2);
    expect("dimD(4,(2,2))".into(), dim_small_spine(&sig(4, &[2, 2])).unwrap(), 2);
    expect("dimS(5,(2,2))".into(), dim_relative_spine(&sig(5, &[2, 2])).unwrap(), 5);
    expect("dimCV(5,(2,2))".into(), dim_cv(&sig(5, &[2, 2])).unwrap(), 5);
    for n in 2..=5 {
        expect(format!("dimS({n},())"), dim_relative_spine(&sig(n, &[])).unwrap(), 2 * n as i64 - 3);
        expect(format!("dimCV({n},())"), dim_cv(&sig(n, &[])).unwrap(), 3 * n as i64 - 4);
    }
    if bad.is_empty() {
        (true, "all 16 values exact".into())
    } else {
        (false, bad.join("; "))
    }
}

fn dimensions(all: &[(String, TypePoset)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for ((name, tp), &(n, s)) in all.iter().zip(&SIGNATURES) {
        let sig = FactorSignature::new(n, s).unwrap();
        let want_s = dim_relative_spine(&sig).unwrap();
        let want_d = dim_small_spine(&sig).unwrap();
        let got_s = tp.dimension().map(|d| d as i64).ok();
        let got_d = small_spine(tp).dimension().map(|d| d as i64).ok();
        let good = got_s == Some(want_s) && got_d == Some(want_d);
        ok &= good;
        let show = |x: Option<i64>| x.map_or("empty".to_string(), |d| d.to_string());
        parts.push(format!(
            "{name} S {}/{want_s} D {}/{want_d}{}",
            show(got_s),
            show(got_d),
            if good { "" } else { " MISMATCH" }
        ));
    }
    (ok, parts.join(", "))
}

fn legality(all: &[(String, TypePoset)]) -> Outcome {
    let (mut total, mut remark, mut refined) = (0usize, 0usize, 0usize);
    for (_, tp) in all {
        for g in &tp.types {
            for v in 0..g.graph.num_vertices() {
                for e in ideal_edges_at(g, v) {
                    let legal = is_legal(g, &e);
                    total += 1;
                    remark += usize::from(remark_legal(g, &e) == legal);
                    refined += usize::from(refined_legal(g, &e) == legal);
                }
            }
        }
    }
    (
        remark == total,
        format!("pair-count rule agrees on {remark}/{total} ideal edges (refined rule {refined}/{total})"),
    )
}

fn links(all: &[(String, TypePoset)]) -> Outcome {
    let (mut checked, mut failed, mut points, mut point_failures) = (0, Vec::new(), 0, 0);
    for (name, tp) in all {
        for (t, g) in tp.types.iter().enumerate() {
            for v in 0..g.graph.num_vertices() {
                if g.wedges_at(v).len() < 2 {
                    continue;
                }
                checked += 1;
                let (_, l) = link_complexes(g, v);
                if !collapsible(&l).collapsible {
                    failed.push(format!("{name} type {t} vertex {v}"));
                }
                if g.graph.valence(v) == 4 {
                    points += 1;
                    if !(l.vertices().len() == 1 && l.dimension().ok() == Some(0)) {
                        point_failures += 1;
                    }
                }
            }
        }
    }
    let ok = failed.is_empty() && checked > 0 && points > 0 && point_failures == 0;
    let mut msg = format!("{checked} multi-wedge vertices collapsible, {points} valence-4 links checked");
    if !ok {
        msg = format!("{msg}; non-collapsible: {failed:?}; non-point valence-4 links: {point_failures}");
    }
    (ok, msg)
}

fn random_metric(g: &AGraph, rng: &mut ChaCha8Rng) -> MetricGraph {
    let lengths = (0..g.graph.num_edges()).map(|_| rng.gen_range(0.1..1.0)).collect();
    MetricGraph { graph: g.clone(), lengths: MetricAssignment::raw(lengths).unwrap() }
}

/// A map between spanning-tree marked graphs representing a random
/// automorphism: tree edges collapse, the edge for letter `l` goes to the
/// target loop of `psi(l)`.
fn random_map(graphs: &[AGraph], rank: usize, rng: &mut ChaCha8Rng) -> GraphMap {
    let g1 = graphs.choose(rng).unwrap().clone();
    let g2 = graphs.choose(rng).unwrap().clone();
    let moves = nielsen_moves(rank).unwrap();
    let mut psi = Automorphism::identity(&BasisSpec::new(rank, &[]).unwrap());
    for _ in 0..rng.gen_range(0..=4) {
        psi = psi.compose(moves.choose(rng).unwrap()).unwrap();
    }
    let m1 = Marking::spanning_tree(g1.clone(), 0).unwrap();
    let m2 = Marking::spanning_tree(g2.clone(), 0).unwrap().act(&psi).unwrap();
    let edge_images = (0..g1.graph.num_edges())
        .map(|e| {
            let w = m1.loop_word(&[2 * e]);
            match w.letters() {
                [] => Vec::new(),
                [l] => m2.images[*l as usize - 1].clone(),
                _ => unreachable!("one letter per edge"),
            }
        })
        .collect();
    let vertex_images = vec![m2.base; g1.graph.num_vertices()];
    GraphMap::new(random_metric(&g1, rng), random_metric(&g2, rng), vertex_images, edge_images).unwrap()
}

fn lipschitz_candidates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let pools: Vec<(usize, Vec<AGraph>)> = [2usize, 3]
        .iter()
        .map(|&r| {
            let b = BasisSpec::new(r, &[]).unwrap();
            let gs = enumerate_agraph_types(&b, EnumerationConfig::default()).unwrap();
            (r, gs.into_iter().filter(|g| g.graph.num_edges() <= 6).collect())
        })
        .collect();
    let brute = BruteForceEngine { max_len: None };
    let mut worst = 0.0f64;
    let mut bad = 0;
    for i in 0..LIPSCHITZ_INSTANCES {
        let (rank, graphs) = &pools[i % pools.len()];
        let f = random_map(graphs, *rank, &mut rng);
        let a = CandidateEngine.lipschitz(&f).unwrap().constant;
        let b = brute.lipschitz(&f).unwrap().constant;
        let gap = (a - b).abs();
        worst = worst.max(gap);
        if gap > LIP_TOLERANCE {
            bad += 1;
        }
    }
    (bad == 0, format!("{LIPSCHITZ_INSTANCES} instances, {bad} disagreements, max gap {worst:.2e}"))
}

fn minset() -> Outcome {
    let b = BasisSpec::new(3, &[2]).unwrap();
    let r = minset_check(&b, 1, MINSET_BOUND).unwrap();
    (
        r.passed && r.smaller.is_empty() && r.ties_isometric,
        format!(
            "{} competitors, {} smaller, {} ties all isometric = {}, min Lip {:.3}",
            r.competitors,
            r.smaller.len(),
            r.ties,
            r.ties_isometric,
            r.min_lipschitz
        ),
    )
}

/// Three vertices: `e1: v1-v2`, `e2: v2-v3`, `A, B: v3-v1`, a loop at `v1`
/// and one at `v2`. The first wedge is `{e1 e2 A, loop}` and the second
/// `{e1 e2 B}`, so the two wedges share the arc `e1 e2`.
fn overlapping_wedges() -> AGraph {
    let graph = Graph::new(3, &[(0, 1), (1, 2), (2, 0), (2, 0), (0, 0), (1, 1)]);
    let wedges = vec![
        Wedge { base: 0, circles: vec![vec![0, 2, 4], vec![8]] },
        Wedge { base: 0, circles: vec![vec![0, 2, 6]] },
    ];
    AGraph::new(graph, wedges, BasisSpec::new(4, &[2, 1]).unwrap())
}

fn retraction() -> Outcome {
    let tp = match downset_poset(&[overlapping_wedges()], true) {
        Ok(tp) => tp,
        Err(e) => return (false, format!("downset failed: {e}")),
    };
    let f: Option<Vec<usize>> = tp
        .types
        .iter()
        .map(|g| collapse_wedge_intersections(g).ok().and_then(|h| tp.index_of(&canonical_form(&h))))
        .collect();
    let Some(f) = f else {
        return (false, "collapse leaves the poset".into());
    };
    match poset_retract(&tp.poset, &f) {
        Ok(r) => (
            r.homology_equal,
            format!(
                "{} types, image {} types, Betti {:?} -> {:?}",
                tp.types.len(),
                r.image.len(),
                r.homology_before.betti,
                r.homology_after.betti
            ),
        ),
        Err(e) => (false, format!("hypothesis fails: {e}")),
    }
}

fn witness() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, s) in [(5usize, [2usize, 2]), (4, [2, 2])] {
        let b = BasisSpec::new(n, &s).unwrap();
        let gens = vcd_generators(&b).unwrap();
        let r = verify_abelian_witness(&gens, WITNESS_EXPONENT).unwrap();
        let m = s.iter().filter(|&&x| x == 1).count() as i64;
        let want = 2 * n as i64 - 2 * s.iter().sum::<usize>() as i64 + 2 * s.len() as i64 - 2 - m;
        let good = r.passed()
            && r.commutators_trivial
            && r.non_inner == r.products_checked
            && r.generator_count as i64 == want;
        ok &= good;
        parts.push(format!(
            "{} {} generators (want {want}), {}/{} products non-inner",
            label(n, &s),
            r.generator_count,
            r.non_inner,
            r.products_checked
        ));
    }
    (ok, parts.join(", "))
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Kind {
    Rose,
    Theta,
    Dumbbell,
}

/// Canonical string of a labelled tree rooted at `v`.
fn tree_code(adj: &[Vec<usize>], kind: &[Kind], v: usize, parent: Option<usize>) -> String {
    let mut kids: Vec<String> =
        adj[v].iter().filter(|&&w| Some(w) != parent).map(|&w| tree_code(adj, kind, w, Some(v))).collect();
    kids.sort();
    format!("{:?}({})", kind[v], kids.join(""))
}

/// Canonical form of a labelled tree: minimum over all roots.
fn tree_canon(adj: &[Vec<usize>], kind: &[Kind]) -> Option<String> {
    let edges: usize = adj.iter().map(|a| a.len()).sum::<usize>() / 2;
    if edges + 1 != adj.len() {
        return None;
    }
    let codes: Vec<String> = (0..adj.len()).map(|v| tree_code(adj, kind, v, None)).collect();
    let reached = {
        let mut seen = vec![false; adj.len()];
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            if !std::mem::replace(&mut seen[v], true) {
                stack.extend(&adj[v]);
            }
        }
        seen.iter().all(|&s| s)
    };
    reached.then(|| codes.into_iter().min().unwrap())
}

/// Path theta-rose-...-theta with five roses, each carrying a dumbbell leaf.
fn expected_ball() -> (Vec<Vec<usize>>, Vec<Kind>) {
    let mut kind = Vec::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let add = |k: Kind, kind: &mut Vec<Kind>, adj: &mut Vec<Vec<usize>>| {
        kind.push(k);
        adj.push(Vec::new());
        kind.len() - 1
    };
    let mut prev = add(Kind::Theta, &mut kind, &mut adj);
    for _ in 0..5 {
        let r = add(Kind::Rose, &mut kind, &mut adj);
        let d = add(Kind::Dumbbell, &mut kind, &mut adj);
        let t = add(Kind::Theta, &mut kind, &mut adj);
        for (a, b) in [(prev, r), (r, d), (r, t)] {
            adj[a].push(b);
            adj[b].push(a);
        }
        prev = t;
    }
    (adj, kind)
}

fn ball() -> Outcome {
    let b = BasisSpec::new(2, &[1]).unwrap();
    let centre = Marking::identity_rose(&b);
    let gens = dihedral_generators(&b).unwrap();
    let ball = spine_ball(&centre, &gens, BallConfig { radius: 2, with_stars: true }).unwrap();
    let kind: Vec<Kind> = ball
        .markings
        .iter()
        .map(|m| match (m.graph.graph.num_vertices(), m.graph.has_separating_edge()) {
            (1, _) => Kind::Rose,
            (_, true) => Kind::Dumbbell,
            _ => Kind::Theta,
        })
        .collect();
    let mut adj = vec![Vec::new(); kind.len()];
    for (x, y) in ball.poset.relations() {
        adj[x].push(y);
        adj[y].push(x);
    }
    let complex = ball.complex();
    let counts: Vec<usize> = (0..=complex.dimension().unwrap()).map(|d| complex.faces(d).len()).collect();
    let (want_adj, want_kind) = expected_ball();
    let iso = tree_canon(&adj, &kind).is_some() && tree_canon(&adj, &kind) == tree_canon(&want_adj, &want_kind);

    let keep = ball.reduced_indices();
    let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut radj = vec![Vec::new(); keep.len()];
    for (&v, &i) in &pos {
        radj[i] = adj[v].iter().filter_map(|w| pos.get(w).copied()).collect();
    }
    let ends = radj.iter().filter(|a| a.len() == 1).count();
    let rkind = vec![Kind::Rose; keep.len()];
    let path = radj.iter().all(|a| a.len() <= 2) && ends == 2 && tree_canon(&radj, &rkind).is_some();
    (
        iso && path && counts == [16, 15],
        format!(
            "face counts {counts:?}, pattern isomorphic = {iso}, reduced part a path on {} vertices = {path}",
            keep.len()
        ),
    )
}

fn random_complex(rng: &mut ChaCha8Rng) -> SimplicialComplex {
    let n = rng.gen_range(3..=12);
    let mut faces: BTreeSet<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    for _ in 0..rng.gen_range(1..=10) {
        let size = rng.gen_range(2..=4.min(n));
        let mut f: Vec<usize> = rand::seq::index::sample(rng, n, size).into_vec();
        f.sort_unstable();
        faces.insert(f);
    }
    SimplicialComplex::new((0..n).map(|v| format!("v{v}")).collect(), faces.into_iter().collect())
}

fn homology_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xc0ff);
    let mut bad = 0;
    let mut torsion = 0;
    for _ in 0..HOMOLOGY_INSTANCES {
        let c = random_complex(&mut rng);
        let a = SmithEngine.homology(&c).unwrap();
        let b = RationalEngine.homology(&c).unwrap();
        if a.betti != b.betti {
            bad += 1;
        }
        torsion += usize::from(!a.torsion.is_empty());
    }
    (bad == 0, format!("{HOMOLOGY_INSTANCES} complexes, {bad} Betti disagreements, {torsion} with torsion"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let all = posets();
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("formula table", Box::new(formulas)),
        ("enumeration dimensions", Box::new(|| dimensions(&all))),
        ("legality equivalence", Box::new(|| legality(&all))),
        ("link collapsibility", Box::new(|| links(&all))),
        ("lipschitz candidates", Box::new(lipschitz_candidates)),
        ("unit rose minimality", Box::new(minset)),
        ("retraction harness", Box::new(retraction)),
        ("vcd witness", Box::new(witness)),
        ("dihedral ball", Box::new(ball)),
        ("homology oracle", Box::new(homology_oracle)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = check();
        failures += usize::from(!ok);
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed in {:.1}s", checks.len() - failures, checks.len(), start.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
