//! Words and automorphisms of a free group whose basis is split into
//! factor blocks `y_i^j` (one block per free factor `A_j`) followed by the
//! free letters `x_i`.
//!
//! Letters are signed 1-based generator indices; `-g` is the inverse of `g`.
//! Generator order is: block 1, block 2, ..., block k, then `x_1 .. x_{n - sum s}`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Letter = i32;

/// Rank `n` of the free group and the ranks `s(1..k)` of the free factors.
///
/// Factors of rank 1 are moved to the end (stable otherwise) so that the
/// `m` rank-1 factors carry the indices `k-m+1 .. k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    n: usize,
    s: Vec<usize>,
}

impl BasisSpec {
    pub fn new(n: usize, s: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSignature("rank must be positive".into()));
        }
        if s.iter().any(|&r| r == 0) {
            return Err(Error::InvalidSignature("factor ranks must be >= 1".into()));
        }
        let total: usize = s.iter().sum();
        if total > n {
            return Err(Error::InvalidSignature(format!(
                "sum of factor ranks {total} exceeds n = {n}"
            )));
        }
        let mut ordered: Vec<usize> = s.iter().copied().filter(|&r| r > 1).collect();
        ordered.extend(s.iter().copied().filter(|&r| r == 1));
        Ok(Self { n, s: ordered })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> &[usize] {
        &self.s
    }

    pub fn k(&self) -> usize {
        self.s.len()
    }

    /// Number of rank-1 factors.
    pub fn m(&self) -> usize {
        self.s.iter().filter(|&&r| r == 1).count()
    }

    pub fn sum_s(&self) -> usize {
        self.s.iter().sum()
    }

    /// Number of free letters `x_i`, i.e. `n - sum s`.
    pub fn free_rank(&self) -> usize {
        self.n - self.sum_s()
    }

    /// Generator index of `y_i^j` (both 1-based).
    pub fn y(&self, i: usize, j: usize) -> Letter {
        assert!(j >= 1 && j <= self.k() && i >= 1 && i <= self.s[j - 1]);
        let offset: usize = self.s[..j - 1].iter().sum();
        (offset + i) as Letter
    }

    /// Generator index of `x_i` (1-based).
    pub fn x(&self, i: usize) -> Letter {
        assert!(i >= 1 && i <= self.free_rank());
        (self.sum_s() + i) as Letter
    }

    /// Generators of the `j`-th factor block (1-based `j`).
    pub fn block(&self, j: usize) -> Vec<Letter> {
        (1..=self.s[j - 1]).map(|i| self.y(i, j)).collect()
    }

    pub fn free_letters(&self) -> Vec<Letter> {
        (1..=self.free_rank()).map(|i| self.x(i)).collect()
    }

    /// `Some(j)` if the generator belongs to factor block `j`.
    pub fn factor_of(&self, g: Letter) -> Option<usize> {
        let mut g = g.unsigned_abs() as usize;
        for (j, &r) in self.s.iter().enumerate() {
            if g <= r {
                return Some(j + 1);
            }
            g -= r;
        }
        None
    }

    pub fn generator_name(&self, g: Letter) -> String {
        let idx = g.unsigned_abs() as usize;
        let mut rest = idx;
        for (j, &r) in self.s.iter().enumerate() {
            if rest <= r {
                return format!("y{}_{}", rest, j + 1);
            }
            rest -= r;
        }
        format!("x{rest}")
    }

    pub fn letter_name(&self, l: Letter) -> String {
        if l < 0 {
            format!("{}^-1", self.generator_name(-l))
        } else {
            self.generator_name(l)
        }
    }

    fn check_letter(&self, l: Letter) -> Result<()> {
        if l == 0 || l.unsigned_abs() as usize > self.n {
            return Err(Error::UnknownGenerator(l.to_string()));
        }
        Ok(())
    }

    /// Parses `y<i>_<j>`, `x<i>`, optionally suffixed by `^-1`.
    pub fn parse_letter(&self, token: &str) -> Result<Letter> {
        let (body, inv) = match token.strip_suffix("^-1") {
            Some(b) => (b, true),
            None => (token, false),
        };
        let bad = || Error::UnknownGenerator(token.to_string());
        let g = if let Some(rest) = body.strip_prefix('y') {
            let (i, j) = rest.split_once('_').ok_or_else(bad)?;
            let i: usize = i.parse().map_err(|_| bad())?;
            let j: usize = j.parse().map_err(|_| bad())?;
            if j == 0 || j > self.k() || i == 0 || i > self.s[j - 1] {
                return Err(bad());
            }
            self.y(i, j)
        } else if let Some(rest) = body.strip_prefix('x') {
            let i: usize = rest.parse().map_err(|_| bad())?;
            if i == 0 || i > self.free_rank() {
                return Err(bad());
            }
            self.x(i)
        } else {
            return Err(bad());
        };
        Ok(if inv { -g } else { g })
    }

    /// Parses a whitespace-separated word; `1` or the empty string is the identity.
    pub fn parse_word(&self, text: &str) -> Result<FreeWord> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            letters.push(self.parse_letter(tok)?);
        }
        Ok(FreeWord::new(letters))
    }

    pub fn format_word(&self, w: &FreeWord) -> String {
        if w.is_identity() {
            return "1".to_string();
        }
        w.letters()
            .iter()
            .map(|&l| self.letter_name(l))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Freely reduces a letter sequence.
fn normalized<I: IntoIterator<Item = Letter>>(w: I) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else if l != 0 {
            out.push(l);
        }
    }
    out
}

/// A freely reduced word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct FreeWord(Vec<Letter>);

impl FreeWord {
    pub fn new<I: IntoIterator<Item = Letter>>(w: I) -> Self {
        FreeWord(normalized(w))
    }

    pub fn identity() -> Self {
        FreeWord(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        FreeWord::new([l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        FreeWord(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn mul(&self, other: &FreeWord) -> Self {
        FreeWord::new(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        (0..e.unsigned_abs()).fold(FreeWord::identity(), |acc, _| acc.mul(&base))
    }

    /// `self * w * self^-1`
    pub fn conjugate(&self, w: &FreeWord) -> Self {
        self.mul(w).mul(&self.inverse())
    }

    /// All prefixes, shortest first, including the empty word and the word itself.
    pub fn prefixes(&self) -> impl Iterator<Item = FreeWord> + '_ {
        (0..=self.0.len()).map(move |i| FreeWord(self.0[..i].to_vec()))
    }

    /// Splits `self = u c u^-1` with `c` cyclically reduced.
    pub fn cyclic_reduce(&self) -> (FreeWord, FreeWord) {
        let w = &self.0;
        let mut i = 0;
        while i < w.len() / 2 && w[i] == -w[w.len() - 1 - i] {
            i += 1;
        }
        (
            FreeWord(w[i..w.len() - i].to_vec()),
            FreeWord(w[..i].to_vec()),
        )
    }

    pub fn cyclic_len(&self) -> usize {
        self.cyclic_reduce().0.len()
    }

    /// Cyclic rotation of a cyclically reduced word.
    pub fn rotated(&self, by: usize) -> Self {
        let n = self.0.len();
        if n == 0 {
            return self.clone();
        }
        let by = by % n;
        FreeWord(self.0[by..].iter().chain(&self.0[..by]).copied().collect())
    }

    /// Substitutes `images[g-1]` for every generator `g`.
    pub fn substitute(&self, images: &[FreeWord]) -> FreeWord {
        let mut out = Vec::new();
        for &l in &self.0 {
            let img = &images[l.unsigned_abs() as usize - 1];
            if l > 0 {
                out.extend_from_slice(&img.0);
            } else {
                out.extend(img.0.iter().rev().map(|x| -x));
            }
        }
        FreeWord::new(out)
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Reduces a raw letter sequence after checking every letter against the basis.
pub fn reduce(basis: &BasisSpec, letters: &[Letter]) -> Result<FreeWord> {
    for &l in letters {
        basis.check_letter(l)?;
    }
    Ok(FreeWord::new(letters.iter().copied()))
}

/// Finds `w` with `w * v_i * w^-1 = u_i` for every pair `(u_i, v_i)`.
///
/// Exact for free groups: the solutions for the first non-trivial pair form a
/// coset `q <r>` of the centralizer of `v_1`, and the remaining pairs pin down
/// the power of the root `r` within a length-derived window.
pub fn simultaneous_conjugator(pairs: &[(FreeWord, FreeWord)]) -> Option<FreeWord> {
    let check = |w: &FreeWord| pairs.iter().all(|(u, v)| &w.conjugate(v) == u);
    let Some(first) = pairs.iter().position(|(_, v)| !v.is_identity()) else {
        return if pairs.iter().all(|(u, _)| u.is_identity()) {
            Some(FreeWord::identity())
        } else {
            None
        };
    };
    let (u1, v1) = &pairs[first];
    let (c, p) = v1.cyclic_reduce();
    let (d, q) = u1.cyclic_reduce();
    if c.len() != d.len() {
        return None;
    }
    let root = primitive_root(&c);
    let root_w = p.mul(&root).mul(&p.inverse());
    let window = pairs
        .iter()
        .map(|(u, v)| u.len() + v.len())
        .max()
        .unwrap_or(0) as i64
        + 2 * v1.len() as i64
        + 2;
    let mut seen = BTreeSet::new();
    for t in 0..c.len() {
        if c.rotated(t) != d {
            continue;
        }
        // c = a b, d = b a = a^-1 c a with a = c[..t]
        let a = FreeWord(c.0[..t].to_vec());
        let base = q.mul(&a.inverse()).mul(&p.inverse());
        for e in -window..=window {
            let w = base.mul(&root_w.pow(e));
            if seen.insert(w.clone()) && check(&w) {
                return Some(w);
            }
        }
    }
    None
}

/// Shortest `r` with `c = r^e` for a cyclically reduced `c`.
fn primitive_root(c: &FreeWord) -> FreeWord {
    let n = c.len();
    for d in 1..=n {
        if n % d == 0 && (0..n).all(|i| c.0[i] == c.0[i % d]) {
            return FreeWord(c.0[..d].to_vec());
        }
    }
    c.clone()
}

/// Endomorphism of `F_n` given by generator images.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Automorphism {
    basis: BasisSpec,
    images: Vec<FreeWord>,
}

impl Automorphism {
    pub fn identity(basis: &BasisSpec) -> Self {
        let images = (1..=basis.n() as Letter).map(FreeWord::letter).collect();
        Self { basis: basis.clone(), images }
    }

    pub fn from_images(basis: &BasisSpec, images: Vec<FreeWord>) -> Result<Self> {
        if images.len() != basis.n() {
            return Err(Error::InvalidSignature(format!(
                "expected {} images, got {}",
                basis.n(),
                images.len()
            )));
        }
        for w in &images {
            for &l in w.letters() {
                basis.check_letter(l)?;
            }
        }
        Ok(Self { basis: basis.clone(), images })
    }

    /// Identity except for the listed generator images.
    pub fn with_images(basis: &BasisSpec, changes: &[(Letter, FreeWord)]) -> Self {
        let mut a = Self::identity(basis);
        for (g, w) in changes {
            a.images[*g as usize - 1] = w.clone();
        }
        a
    }

    /// The inner automorphism `x -> w x w^-1`.
    pub fn conjugation(basis: &BasisSpec, w: &FreeWord) -> Self {
        let images = (1..=basis.n() as Letter)
            .map(|g| w.conjugate(&FreeWord::letter(g)))
            .collect();
        Self { basis: basis.clone(), images }
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn images(&self) -> &[FreeWord] {
        &self.images
    }

    pub fn image(&self, g: Letter) -> FreeWord {
        let w = &self.images[g.unsigned_abs() as usize - 1];
        if g > 0 {
            w.clone()
        } else {
            w.inverse()
        }
    }

    pub fn apply(&self, w: &FreeWord) -> FreeWord {
        w.substitute(&self.images)
    }

    pub fn apply_checked(&self, w: &FreeWord, basis: &BasisSpec) -> Result<FreeWord> {
        if basis != &self.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(self.apply(w))
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        let images = other.images.iter().map(|w| self.apply(w)).collect();
        Ok(Automorphism { basis: self.basis.clone(), images })
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, w)| w.letters() == [(i + 1) as Letter])
    }

    /// Searches a conjugator `w` with `f(g) = w g w^-1` for each `g` in `gens`.
    ///
    /// Candidates are the prefixes of `f(g)` and of `f(g) g^-1`. If `w = w' g^p`
    /// works, so does the prefix `w'` of `f(g)`, which makes the search complete.
    pub fn conjugator_on(&self, gens: &[Letter]) -> Option<FreeWord> {
        let mut candidates = BTreeSet::new();
        for &g in gens {
            let fg = self.image(g);
            candidates.extend(fg.prefixes());
            candidates.extend(fg.mul(&FreeWord::letter(-g)).prefixes());
        }
        let mut ordered: Vec<FreeWord> = candidates.into_iter().collect();
        ordered.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        ordered.into_iter().find(|w| {
            gens.iter()
                .all(|&g| w.conjugate(&FreeWord::letter(g)) == self.image(g))
        })
    }

    /// `Some(w)` iff `f` is conjugation by `w`.
    pub fn is_inner(&self) -> Option<FreeWord> {
        let gens: Vec<Letter> = (1..=self.basis.n() as Letter).collect();
        self.conjugator_on(&gens)
    }

    /// Per-factor conjugators `u_j` with `f(y) = u_j y u_j^-1` on block `j`.
    pub fn is_relative(&self) -> Option<Vec<FreeWord>> {
        (1..=self.basis.k())
            .map(|j| self.conjugator_on(&self.basis.block(j)))
            .collect()
    }

    pub fn format_images(&self) -> Vec<(String, String)> {
        (1..=self.basis.n() as Letter)
            .map(|g| {
                (
                    self.basis.generator_name(g),
                    self.basis.format_word(&self.images[g as usize - 1]),
                )
            })
            .collect()
    }

    /// JSON form: `{"n":..,"s":[..],"images":{"x1":"y1_1 x1",...}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let images: serde_json::Map<String, serde_json::Value> = self
            .format_images()
            .into_iter()
            .map(|(k, v)| (k, serde_json::Value::String(v)))
            .collect();
        serde_json::json!({ "n": self.basis.n(), "s": self.basis.s(), "images": images })
    }

    /// Parses the JSON form; generators missing from `images` map to themselves.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let perr = |loc: &str, msg: &str| Error::Parse {
            location: loc.to_string(),
            message: msg.to_string(),
        };
        let n = value["n"].as_u64().ok_or_else(|| perr("n", "expected integer"))? as usize;
        let s: Vec<usize> = value["s"]
            .as_array()
            .ok_or_else(|| perr("s", "expected array"))?
            .iter()
            .map(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| perr("s", "expected integer")))
            .collect::<Result<_>>()?;
        let basis = BasisSpec::new(n, &s)?;
        let mut changes = Vec::new();
        if let Some(map) = value["images"].as_object() {
            for (k, v) in map {
                let g = basis.parse_letter(k).map_err(|e| perr(&format!("images.{k}"), &e.to_string()))?;
                if g < 0 {
                    return Err(perr(&format!("images.{k}"), "key must be a generator"));
                }
                let text = v.as_str().ok_or_else(|| perr(&format!("images.{k}"), "expected string"))?;
                let w = basis
                    .parse_word(text)
                    .map_err(|e| perr(&format!("images.{k}"), &e.to_string()))?;
                changes.push((g, w));
            }
        } else {
            return Err(perr("images", "expected object"));
        }
        Ok(Self::with_images(&basis, &changes))
    }
}

/// Stallings folding of the images: they form a basis of `F_n` iff the folded
/// core graph is the rose on all `n` letters.
pub fn images_form_basis(f: &Automorphism) -> bool {
    // vertices are indices; edges (u, positive letter, v)
    let mut edges: Vec<(usize, Letter, usize)> = Vec::new();
    let mut next = 1usize;
    for w in f.images() {
        if w.is_identity() {
            return false;
        }
        let mut cur = 0usize;
        let ls = w.letters();
        for (i, &l) in ls.iter().enumerate() {
            let to = if i + 1 == ls.len() {
                0
            } else {
                next += 1;
                next - 1
            };
            if l > 0 {
                edges.push((cur, l, to));
            } else {
                edges.push((to, -l, cur));
            }
            cur = to;
        }
    }
    let mut parent: Vec<usize> = (0..next).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    loop {
        let mut changed = false;
        let mut out: std::collections::HashMap<(usize, Letter), usize> = Default::default();
        let mut merges = Vec::new();
        for &(u, l, v) in &edges {
            let (u, v) = (find(&mut parent, u), find(&mut parent, v));
            for (key, target) in [((u, l), v), ((v, -l), u)] {
                match out.get(&key) {
                    Some(&t) if t != target => merges.push((t, target)),
                    Some(_) => {}
                    None => {
                        out.insert(key, target);
                    }
                }
            }
        }
        for (a, b) in merges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
                changed = true;
            }
        }
        let mut canon: BTreeSet<(usize, Letter, usize)> = BTreeSet::new();
        for e in &edges {
            canon.insert((find(&mut parent, e.0), e.1, find(&mut parent, e.2)));
        }
        edges = canon.into_iter().collect();
        if !changed {
            break;
        }
    }
    let n = f.basis().n();
    edges.len() == n
        && edges.iter().all(|&(u, _, v)| u == 0 && v == 0)
        && edges.iter().map(|e| e.1).collect::<BTreeSet<_>>().len() == n
}

/// One generator of the witness abelian subgroup, with its explicit inverse.
#[derive(Clone, Debug)]
pub struct WitnessGenerator {
    pub name: String,
    pub forward: Automorphism,
    pub inverse: Automorphism,
}

impl WitnessGenerator {
    pub fn power(&self, e: i64) -> Automorphism {
        let base = if e < 0 { &self.inverse } else { &self.forward };
        let mut acc = Automorphism::identity(self.forward.basis());
        for _ in 0..e.unsigned_abs() {
            acc = acc.compose(base).expect("same basis");
        }
        acc
    }
}

/// The generators `alpha_i, beta_i, gamma_j, delta_r` of the free abelian
/// subgroup certifying the lower bound on the virtual cohomological dimension.
///
/// `alpha_i: x_i -> y x_i`, `beta_i: x_i -> x_i y^-1` with `y = y_1^1`;
/// `gamma_j` conjugates block `j` by `y_1^1` (`1 < j <= k`);
/// `delta_r` conjugates block `r` by `y_1^r` (`1 < r <= k - m`).
pub fn vcd_generators(basis: &BasisSpec) -> Result<Vec<WitnessGenerator>> {
    if basis.k() == 0 {
        return Err(Error::NoFactors);
    }
    let y = FreeWord::letter(basis.y(1, 1));
    let yi = y.inverse();
    let mut out = Vec::new();
    for i in 1..=basis.free_rank() {
        let x = FreeWord::letter(basis.x(i));
        out.push(WitnessGenerator {
            name: format!("alpha_{i}"),
            forward: Automorphism::with_images(basis, &[(basis.x(i), y.mul(&x))]),
            inverse: Automorphism::with_images(basis, &[(basis.x(i), yi.mul(&x))]),
        });
    }
    for i in 1..=basis.free_rank() {
        let x = FreeWord::letter(basis.x(i));
        out.push(WitnessGenerator {
            name: format!("beta_{i}"),
            forward: Automorphism::with_images(basis, &[(basis.x(i), x.mul(&yi))]),
            inverse: Automorphism::with_images(basis, &[(basis.x(i), x.mul(&y))]),
        });
    }
    let block_conj = |j: usize, c: &FreeWord| {
        let changes: Vec<(Letter, FreeWord)> = basis
            .block(j)
            .into_iter()
            .map(|g| (g, c.conjugate(&FreeWord::letter(g))))
            .collect();
        Automorphism::with_images(basis, &changes)
    };
    for j in 2..=basis.k() {
        out.push(WitnessGenerator {
            name: format!("gamma_{j}"),
            forward: block_conj(j, &y),
            inverse: block_conj(j, &yi),
        });
    }
    for r in 2..=basis.k().saturating_sub(basis.m()) {
        let c = FreeWord::letter(basis.y(1, r));
        out.push(WitnessGenerator {
            name: format!("delta_{r}"),
            forward: block_conj(r, &c),
            inverse: block_conj(r, &c.inverse()),
        });
    }
    Ok(out)
}

/// The generators of `Out(F_2; <a>)`, the infinite dihedral group:
/// `t: b -> a b` and the involution `r: b -> b^-1`, for the basis `(2, [1])`.
pub fn dihedral_generators(basis: &BasisSpec) -> Result<Vec<WitnessGenerator>> {
    if basis.n() != 2 || basis.s() != [1] {
        return Err(Error::InvalidSignature(
            "dihedral generators exist for n = 2, s = (1) only".into(),
        ));
    }
    let a = FreeWord::letter(basis.y(1, 1));
    let b = FreeWord::letter(basis.x(1));
    let bg = basis.x(1);
    Ok(vec![
        WitnessGenerator {
            name: "t".into(),
            forward: Automorphism::with_images(basis, &[(bg, a.mul(&b))]),
            inverse: Automorphism::with_images(basis, &[(bg, a.inverse().mul(&b))]),
        },
        WitnessGenerator {
            name: "r".into(),
            forward: Automorphism::with_images(basis, &[(bg, b.inverse())]),
            inverse: Automorphism::with_images(basis, &[(bg, b.inverse())]),
        },
    ])
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub generator_names: Vec<String>,
    pub generator_count: usize,
    pub exponent_bound: i64,
    pub commutators_trivial: bool,
    pub inverses_verified: bool,
    pub all_relative: bool,
    /// Exponent vector of the single known relation modulo inner automorphisms,
    /// present when the first factor has rank 1.
    pub relation: Option<Vec<i64>>,
    pub products_checked: usize,
    pub non_inner: usize,
    pub relation_multiples_inner: usize,
    /// Exponent vectors that are inner but not multiples of the known relation.
    pub unexpected_inner: Vec<Vec<i64>>,
    /// Multiples of the known relation that turned out non-inner.
    pub relation_failures: Vec<Vec<i64>>,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.commutators_trivial
            && self.inverses_verified
            && self.all_relative
            && self.unexpected_inner.is_empty()
            && self.relation_failures.is_empty()
    }
}

fn is_multiple_of(v: &[i64], r: &[i64]) -> bool {
    let Some(pos) = r.iter().position(|&x| x != 0) else {
        return v.iter().all(|&x| x == 0);
    };
    if v[pos] % r[pos] != 0 {
        return false;
    }
    let t = v[pos] / r[pos];
    v.iter().zip(r).all(|(a, b)| *a == t * b)
}

/// Checks commutation, relative membership and (up to `bound`) independence of
/// the witness generators modulo inner automorphisms.
pub fn verify_abelian_witness(gens: &[WitnessGenerator], bound: i64) -> Result<WitnessReport> {
    let names: Vec<String> = gens.iter().map(|g| g.name.clone()).collect();
    let mut report = WitnessReport {
        generator_names: names.clone(),
        generator_count: gens.len(),
        exponent_bound: bound,
        commutators_trivial: true,
        inverses_verified: true,
        all_relative: true,
        relation: None,
        products_checked: 0,
        non_inner: 0,
        relation_multiples_inner: 0,
        unexpected_inner: Vec::new(),
        relation_failures: Vec::new(),
    };
    let Some(first) = gens.first() else {
        return Ok(report);
    };
    let basis = first.forward.basis().clone();
    for g in gens {
        if g.forward.basis() != &basis || g.inverse.basis() != &basis {
            return Err(Error::BasisMismatch);
        }
        if g.forward.is_relative().is_none() {
            return Err(Error::NotRelative(g.name.clone()));
        }
        if !g.forward.compose(&g.inverse)?.is_identity() || !g.inverse.compose(&g.forward)?.is_identity() {
            report.inverses_verified = false;
        }
    }
    for (a, ga) in gens.iter().enumerate() {
        for gb in &gens[a + 1..] {
            if ga.forward.compose(&gb.forward)? != gb.forward.compose(&ga.forward)? {
                report.commutators_trivial = false;
            }
        }
    }
    if basis.k() >= 1 && basis.s()[0] == 1 {
        report.relation = Some(
            names
                .iter()
                .map(|nm| i64::from(!nm.starts_with("delta")))
                .collect(),
        );
    }
    let r = gens.len();
    let mut exps = vec![-bound; r];
    loop {
        if exps.iter().any(|&e| e != 0) {
            let mut prod = Automorphism::identity(&basis);
            for (g, &e) in gens.iter().zip(&exps) {
                if e != 0 {
                    prod = prod.compose(&g.power(e))?;
                }
            }
            report.products_checked += 1;
            let expected_inner = report
                .relation
                .as_ref()
                .is_some_and(|rel| is_multiple_of(&exps, rel));
            match (prod.is_inner().is_some(), expected_inner) {
                (false, false) => report.non_inner += 1,
                (true, true) => report.relation_multiples_inner += 1,
                (true, false) => report.unexpected_inner.push(exps.clone()),
                (false, true) => {
                    report.non_inner += 1;
                    report.relation_failures.push(exps.clone());
                }
            }
        }
        // odometer
        let mut i = 0;
        while i < r {
            if exps[i] < bound {
                exps[i] += 1;
                break;
            }
            exps[i] = -bound;
            i += 1;
        }
        if i == r {
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(ls: &[Letter]) -> FreeWord {
        FreeWord::new(ls.iter().copied())
    }

    #[test]
    fn reduce_examples() {
        let b = BasisSpec::new(2, &[]).unwrap();
        assert_eq!(reduce(&b, &[1, -1, 2]).unwrap(), w(&[2]));
        assert_eq!(reduce(&b, &[]).unwrap(), FreeWord::identity());
        assert_eq!(reduce(&b, &[1, 2, -2, 1]).unwrap(), w(&[1, 1]));
        assert!(matches!(reduce(&b, &[3]), Err(Error::UnknownGenerator(_))));
        assert!(reduce(&b, &[0]).is_err());
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (c, u) = w(&[1, 2, -1]).cyclic_reduce();
        assert_eq!((c, u), (w(&[2]), w(&[1])));
        let (c, u) = w(&[2]).cyclic_reduce();
        assert_eq!((c, u), (w(&[2]), FreeWord::identity()));
        let abab = w(&[1, 2, 1, 2]);
        assert_eq!(abab.cyclic_reduce(), (abab.clone(), FreeWord::identity()));
    }

    #[test]
    fn basis_reorders_rank_one_factors_last() {
        let b = BasisSpec::new(6, &[1, 2, 1, 2]).unwrap();
        assert_eq!(b.s(), &[2, 2, 1, 1]);
        assert_eq!(b.m(), 2);
        assert_eq!(b.generator_name(b.y(2, 2)), "y2_2");
        assert_eq!(b.parse_letter("y1_3^-1").unwrap(), -b.y(1, 3));
        assert!(BasisSpec::new(2, &[2, 1]).is_err());
        assert!(BasisSpec::new(2, &[0]).is_err());
    }

    #[test]
    fn alpha_applied_to_x() {
        let b = BasisSpec::new(3, &[2]).unwrap();
        let gens = vcd_generators(&b).unwrap();
        let alpha = &gens[0].forward;
        let x1 = FreeWord::letter(b.x(1));
        assert_eq!(alpha.apply(&x1), w(&[b.y(1, 1), b.x(1)]));
        let id = Automorphism::identity(&b);
        let word = w(&[1, 2, -3, 1]);
        assert_eq!(id.apply(&word), word);
    }

    #[test]
    fn gamma_delta_commutation_computation() {
        // gamma_i ∘ delta_i (y_j^i) = y_1^1 y_1^i y_j^i (y_1^i)^-1 (y_1^1)^-1
        let b = BasisSpec::new(5, &[2, 2]).unwrap();
        let gens = vcd_generators(&b).unwrap();
        let gamma = gens.iter().find(|g| g.name == "gamma_2").unwrap();
        let delta = gens.iter().find(|g| g.name == "delta_2").unwrap();
        let gd = gamma.forward.compose(&delta.forward).unwrap();
        let dg = delta.forward.compose(&gamma.forward).unwrap();
        let (y11, y12, y22) = (b.y(1, 1), b.y(1, 2), b.y(2, 2));
        let expected = w(&[y11, y12, y22, -y12, -y11]);
        assert_eq!(gd.apply(&FreeWord::letter(y22)), expected);
        assert_eq!(gd, dg);
        let alpha = &gens[0].forward;
        let beta = &gens[1].forward;
        assert_eq!(alpha.compose(beta).unwrap(), beta.compose(alpha).unwrap());
        let id = Automorphism::identity(&b);
        assert_eq!(alpha.compose(&id).unwrap(), *alpha);
    }

    #[test]
    fn inner_detection() {
        let b = BasisSpec::new(3, &[2]).unwrap();
        let ab = w(&[1, 2]);
        let f = Automorphism::conjugation(&b, &ab);
        let wit = f.is_inner().unwrap();
        assert_eq!(Automorphism::conjugation(&b, &wit), f);
        assert_eq!(Automorphism::identity(&b).is_inner(), Some(FreeWord::identity()));
        let alpha = vcd_generators(&b).unwrap()[0].forward.clone();
        assert!(alpha.is_inner().is_none());
        // conjugation by a power of a generator is found through another generator
        let f = Automorphism::conjugation(&b, &w(&[1, 1, 1]));
        assert_eq!(f.is_inner(), Some(w(&[1, 1, 1])));
    }

    #[test]
    fn relative_membership() {
        // Out(F_4; A_1, A_2) template with omega(a,a') = a a'^-1, omega(b,b') = b'
        let b = BasisSpec::new(4, &[2, 2]).unwrap();
        let (a, a2, bb, b2) = (b.y(1, 1), b.y(2, 1), b.y(1, 2), b.y(2, 2));
        let om1 = w(&[a, -a2]);
        let om2 = w(&[b2]);
        let f = Automorphism::with_images(
            &b,
            &[
                (a, om1.conjugate(&w(&[a]))),
                (a2, om1.conjugate(&w(&[a2]))),
                (bb, om2.conjugate(&w(&[bb]))),
                (b2, om2.conjugate(&w(&[b2]))),
            ],
        );
        let us = f.is_relative().unwrap();
        assert_eq!(Automorphism::conjugation(&b, &us[0]).apply(&w(&[a, a2])), f.apply(&w(&[a, a2])));
        assert_eq!(us[1], om2);
        assert!(Automorphism::identity(&b).is_relative().unwrap().iter().all(|u| u.is_identity()));

        let b = BasisSpec::new(2, &[1, 1]).unwrap();
        let swap = Automorphism::with_images(&b, &[(1, w(&[2])), (2, w(&[1]))]);
        assert!(swap.is_relative().is_none());
    }

    #[test]
    fn generator_counts() {
        for (n, s, count) in [(2, vec![1], 2), (4, vec![2, 2], 2), (5, vec![2, 2], 4)] {
            let b = BasisSpec::new(n, &s).unwrap();
            assert_eq!(vcd_generators(&b).unwrap().len(), count, "n={n} s={s:?}");
        }
        let b = BasisSpec::new(3, &[]).unwrap();
        assert_eq!(vcd_generators(&b).unwrap_err(), Error::NoFactors);
    }

    #[test]
    fn witness_small_cases() {
        assert!(verify_abelian_witness(&[], 1).unwrap().passed());
        let b = BasisSpec::new(4, &[2, 2]).unwrap();
        let rep = verify_abelian_witness(&vcd_generators(&b).unwrap(), 2).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.products_checked, 24);
        assert_eq!(rep.non_inner, 24);
        // n = 2, s = (1): alpha_1 beta_1 is conjugation by a
        let b = BasisSpec::new(2, &[1]).unwrap();
        let rep = verify_abelian_witness(&vcd_generators(&b).unwrap(), 2).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.relation_multiples_inner, 4);
    }

    #[test]
    fn json_round_trip() {
        let b = BasisSpec::new(5, &[2, 2]).unwrap();
        let g = &vcd_generators(&b).unwrap()[3].forward;
        let back = Automorphism::from_json(&g.to_json()).unwrap();
        assert_eq!(&back, g);
        assert!(Automorphism::from_json(&serde_json::json!({"n":2,"s":[1],"images":{"z1":"x1"}})).is_err());
    }

    #[test]
    fn stallings_basis_check() {
        let b = BasisSpec::new(3, &[1]).unwrap();
        for g in vcd_generators(&b).unwrap() {
            assert!(images_form_basis(&g.forward));
        }
        let f = Automorphism::with_images(&b, &[(2, w(&[1, 1]))]);
        assert!(!images_form_basis(&f));
        let f = Automorphism::with_images(&b, &[(2, w(&[2, 2]))]);
        assert!(!images_form_basis(&f));
    }

    #[test]
    fn simultaneous_conjugator_finds_powers_of_roots() {
        let c = w(&[1, 2, 1, 2, 1]);
        let pairs: Vec<(FreeWord, FreeWord)> = [w(&[1]), w(&[2]), w(&[1, 2])]
            .into_iter()
            .map(|v| (c.conjugate(&v), v))
            .collect();
        let found = simultaneous_conjugator(&pairs).unwrap();
        assert!(pairs.iter().all(|(u, v)| &found.conjugate(v) == u));
        assert!(simultaneous_conjugator(&[(w(&[1]), w(&[2]))]).is_none());
    }

    fn arb_word(n: i32, max: usize) -> impl Strategy<Value = FreeWord> {
        prop::collection::vec(prop_oneof![1..=n, -n..=-1], 0..max).prop_map(FreeWord::new)
    }

    fn arb_aut(basis: BasisSpec) -> impl Strategy<Value = Automorphism> {
        let n = basis.n();
        prop::collection::vec(arb_word(n as i32, 4), n)
            .prop_map(move |ims| Automorphism::from_images(&basis, ims).unwrap())
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent(ls in prop::collection::vec(prop_oneof![1..=3i32, -3..=-1i32], 0..20)) {
            let r = FreeWord::new(ls.clone());
            prop_assert_eq!(FreeWord::new(r.letters().iter().copied()), r.clone());
            prop_assert!(r.len() <= ls.len());
        }

        #[test]
        fn composition_matches_sequential_application(
            f in arb_aut(BasisSpec::new(3, &[1]).unwrap()),
            g in arb_aut(BasisSpec::new(3, &[1]).unwrap()),
            word in arb_word(3, 8),
        ) {
            prop_assert_eq!(f.compose(&g).unwrap().apply(&word), f.apply(&g.apply(&word)));
        }

        #[test]
        fn conjugations_are_detected(c in arb_word(3, 6)) {
            let b = BasisSpec::new(3, &[2]).unwrap();
            let f = Automorphism::conjugation(&b, &c);
            let wit = f.is_inner();
            prop_assert!(wit.is_some());
            prop_assert_eq!(Automorphism::conjugation(&b, &wit.unwrap()), f.clone());
            prop_assert!(f.is_relative().is_some());
        }

        #[test]
        fn cyclic_reduce_recomposes(word in arb_word(3, 10)) {
            let (c, u) = word.cyclic_reduce();
            prop_assert_eq!(u.conjugate(&c), word);
            if c.len() > 1 {
                prop_assert!(c.letters()[0] != -c.letters()[c.len() - 1]);
            }
        }
    }
}
