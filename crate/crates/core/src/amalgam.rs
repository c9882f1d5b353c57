//! The groups `B_0 = ⟨A, y_0⟩` and `B_1 = ⟨A, y_1⟩` inside the holomorph
//! of the elementary abelian 2-group `A = ⟨x_0, x_1, …⟩`, where `y_ε` acts
//! by `x_n ↦ x_n x_{n+1}` for `n ≡ ε (mod 2)` and fixes the other `x_n`.
//!
//! Both automorphisms commute with the shift `x_n ↦ x_{n+2}`, so every
//! element of `⟨g_0, g_1⟩` is determined by the images of `x_0` and `x_1`.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::blackbox::{BlackBoxGroup, Element};
use crate::error::{Error, Result};
use crate::report::{trial_rng, Check, Report, MAX_WITNESSES};

/// A finitely supported vector over GF(2) with basis `x_0, x_1, …`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Vector(Vec<u64>);

impl Gf2Vector {
    pub fn zero() -> Self {
        Gf2Vector(Vec::new())
    }

    pub fn basis(n: usize) -> Self {
        let mut v = Gf2Vector::zero();
        v.flip(n);
        v
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut v = Gf2Vector::zero();
        for n in it {
            v.flip(n);
        }
        v
    }

    fn trim(&mut self) {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
    }

    pub fn flip(&mut self, n: usize) {
        let (w, b) = (n / 64, n % 64);
        if self.0.len() <= w {
            self.0.resize(w + 1, 0);
        }
        self.0[w] ^= 1 << b;
        self.trim();
    }

    pub fn contains(&self, n: usize) -> bool {
        self.0.get(n / 64).is_some_and(|w| w >> (n % 64) & 1 == 1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_assign(&mut self, other: &Gf2Vector) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), 0);
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
        self.trim();
    }

    pub fn add(&self, other: &Gf2Vector) -> Gf2Vector {
        let mut v = self.clone();
        v.add_assign(other);
        v
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(w, &bits)| (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b))
    }

    pub fn max_index(&self) -> Option<usize> {
        let w = self.0.last()?;
        Some((self.0.len() - 1) * 64 + 63 - w.leading_zeros() as usize)
    }

    /// `x_n ↦ x_{n+by}`.
    pub fn shift(&self, by: usize) -> Gf2Vector {
        Gf2Vector::from_indices(self.indices().map(|n| n + by))
    }
}

impl fmt::Display for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.indices().map(|n| format!("x{n}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `x_n g_ε` for a single generator, straight from the definition.
fn apply_generator(eps: u8, v: &Gf2Vector) -> Gf2Vector {
    let mut out = v.clone();
    for n in v.indices() {
        if n % 2 == eps as usize {
            out.flip(n + 1);
        }
    }
    out
}

/// An element of `⟨g_0, g_1⟩`, kept as a reduced word in the involutions
/// together with the images of `x_0` and `x_1`. Equality and hashing use
/// the images only.
#[derive(Clone)]
pub struct AutWord {
    letters: Vec<u8>,
    images: [Gf2Vector; 2],
}

impl AutWord {
    pub fn identity() -> Self {
        AutWord { letters: Vec::new(), images: [Gf2Vector::basis(0), Gf2Vector::basis(1)] }
    }

    pub fn generator(eps: u8) -> Self {
        assert!(eps < 2, "generator index");
        AutWord::from_letters(&[eps])
    }

    pub fn from_letters(letters: &[u8]) -> Self {
        let mut w = AutWord::identity();
        for &l in letters {
            w = w.then(&AutWord::single(l));
        }
        w
    }

    fn single(eps: u8) -> Self {
        AutWord {
            letters: vec![eps],
            images: [apply_generator(eps, &Gf2Vector::basis(0)), apply_generator(eps, &Gf2Vector::basis(1))],
        }
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn images(&self) -> &[Gf2Vector; 2] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        *self == AutWord::identity()
    }

    /// `v·w`, using shift equivariance: `x_{2m+e} ↦ S^{2m}(x_e w)`.
    pub fn apply(&self, v: &Gf2Vector) -> Gf2Vector {
        let mut out = Gf2Vector::zero();
        for n in v.indices() {
            out.add_assign(&self.images[n % 2].shift(n - n % 2));
        }
        out
    }

    /// Applies the letters one at a time; the reference the cached images
    /// are checked against.
    pub fn apply_naive(&self, v: &Gf2Vector) -> Gf2Vector {
        self.letters.iter().fold(v.clone(), |acc, &l| apply_generator(l, &acc))
    }

    /// `self` followed by `other` (right action).
    pub fn then(&self, other: &AutWord) -> AutWord {
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last() == Some(&l) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        AutWord { letters, images: [other.apply(&self.images[0]), other.apply(&self.images[1])] }
    }

    pub fn inverse(&self) -> AutWord {
        let rev: Vec<u8> = self.letters.iter().rev().copied().collect();
        AutWord::from_letters(&rev)
    }
}

impl PartialEq for AutWord {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
    }
}

impl Eq for AutWord {}

impl Hash for AutWord {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.images.hash(state);
    }
}

impl fmt::Debug for AutWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.letters.iter().map(|l| format!("g{l}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// An element of the holomorph `A ⋊ ⟨g_0, g_1⟩`, acting on `A` by
/// `y ↦ y·aut + vector`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HolElement {
    pub aut: AutWord,
    pub vector: Gf2Vector,
}

impl HolElement {
    pub fn identity() -> Self {
        HolElement { aut: AutWord::identity(), vector: Gf2Vector::zero() }
    }

    /// The right regular translation by `x_n`.
    pub fn x(n: usize) -> Self {
        HolElement { aut: AutWord::identity(), vector: Gf2Vector::basis(n) }
    }

    pub fn translation(v: Gf2Vector) -> Self {
        HolElement { aut: AutWord::identity(), vector: v }
    }

    /// `y_ε`, the automorphism `g_ε` as a holomorph element.
    pub fn y(eps: u8) -> Self {
        HolElement { aut: AutWord::generator(eps), vector: Gf2Vector::zero() }
    }

    pub fn mul(&self, other: &HolElement) -> HolElement {
        HolElement { aut: self.aut.then(&other.aut), vector: other.aut.apply(&self.vector).add(&other.vector) }
    }

    pub fn inverse(&self) -> HolElement {
        let inv = self.aut.inverse();
        HolElement { vector: inv.apply(&self.vector), aut: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.vector.is_zero() && self.aut.is_identity()
    }

    /// `[a, b] = a⁻¹b⁻¹ab`.
    pub fn commutator(&self, other: &HolElement) -> HolElement {
        self.inverse().mul(&other.inverse()).mul(self).mul(other)
    }

    /// `a^b = b⁻¹ab`.
    pub fn conjugate(&self, by: &HolElement) -> HolElement {
        by.inverse().mul(self).mul(by)
    }

    /// The translation part when the automorphism part is trivial.
    pub fn as_vector(&self) -> Option<&Gf2Vector> {
        self.aut.is_identity().then_some(&self.vector)
    }
}

impl fmt::Debug for HolElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} | {})", self.aut, self.vector)
    }
}

/// Conjugation relations `x_n^{y_0}` and `x_n^{y_1}` for `n ≤ n_max`.
pub fn relations_check(n_max: usize) -> Report {
    let mut report = Report::new("conjugation relations", 0);
    let mut bad = Vec::new();
    for n in 0..=n_max {
        for eps in 0..2u8 {
            let got = HolElement::x(n).conjugate(&HolElement::y(eps));
            let expect = if n % 2 == eps as usize {
                Gf2Vector::from_indices([n, n + 1])
            } else {
                Gf2Vector::basis(n)
            };
            if got != HolElement::translation(expect) {
                bad.push(format!("x{n}^y{eps} = {got:?}"));
            }
        }
    }
    report.push(
        Check::new("relations", bad.is_empty(), 2 * (n_max + 1))
            .witnesses(bad.into_iter().take(MAX_WITNESSES).collect()),
    );
    report
}

/// `[x_k, y_{k mod 2}] = x_{k+1}` and `[x_k, y_{(k+1) mod 2}] = 1` for
/// `k < n_max`: the chain placing `x_n` in the `n`-th term of the lower
/// central series of `⟨x_0, y_0, y_1⟩`.
pub fn descent_chain(n_max: usize) -> Report {
    let mut report = Report::new("descent chain", 0);
    let mut bad = Vec::new();
    let mut trivial_bad = Vec::new();
    for k in 0..n_max {
        let eps = (k % 2) as u8;
        let c = HolElement::x(k).commutator(&HolElement::y(eps));
        if c != HolElement::x(k + 1) {
            bad.push(format!("[x{k}, y{eps}] = {c:?}"));
        }
        let c = HolElement::x(k).commutator(&HolElement::y(1 - eps));
        if !c.is_identity() {
            trivial_bad.push(format!("[x{k}, y{}] = {c:?}", 1 - eps));
        }
    }
    report.push(
        Check::new("commutator-descends", bad.is_empty(), n_max)
            .witnesses(bad.into_iter().take(MAX_WITNESSES).collect()),
    );
    report.push(
        Check::new("other-parity-commutes", trivial_bad.is_empty(), n_max)
            .witnesses(trivial_bad.into_iter().take(MAX_WITNESSES).collect()),
    );
    report
}

/// `p_k x_0 p'_k` with `p_{2n} = (y_1 y_0)^n`, `p'_{2n} = (y_0 y_1)^n`,
/// `p_{2n+1} = y_0 p_{2n}` and `p'_{2n+1} = p'_{2n} y_0`.
pub fn star_element(k: usize) -> HolElement {
    let (v0, v1) = (HolElement::y(0), HolElement::y(1));
    let n = k / 2;
    let mut p = HolElement::identity();
    let mut q = HolElement::identity();
    for _ in 0..n {
        p = p.mul(&v1).mul(&v0);
        q = q.mul(&v0).mul(&v1);
    }
    if k % 2 == 1 {
        p = v0.mul(&p);
        q = q.mul(&v0);
    }
    p.mul(&HolElement::x(0)).mul(&q)
}

/// Checks that `p_k x_0 p'_k = x_0^{e_0} … x_{k-1}^{e_{k-1}} x_k` for
/// `1 ≤ k ≤ k_max` and that `(y_0 y_1)^n ≠ 1` for `n ≤ max(k_max / 2, 50)`.
pub fn star_identity(k_max: usize) -> Report {
    let mut report = Report::new("star identity", 0);
    let mut bad = Vec::new();
    let mut values = Vec::new();
    for k in 1..=k_max {
        let e = star_element(k);
        let ok = e.as_vector().is_some_and(|v| v.max_index() == Some(k));
        if !ok {
            bad.push(format!("k={k}: {e:?}"));
        }
        if k <= 4 {
            values.push(format!("k={k}: {}", e.vector));
        }
    }
    report.push(
        Check::new("leading-term", bad.is_empty(), k_max)
            .detail(values.join("; "))
            .witnesses(bad.into_iter().take(MAX_WITNESSES).collect()),
    );
    let k1 = k_max >= 1 && star_element(1) == HolElement::translation(Gf2Vector::from_indices([0, 1]));
    report.push(Check::new("k1-value", k1 || k_max == 0, 1).detail("p_1 x_0 p'_1 = x_0 + x_1"));
    let n_max = (k_max / 2).max(50);
    let v = HolElement::y(0).mul(&HolElement::y(1));
    let mut acc = HolElement::identity();
    let mut torsion = Vec::new();
    for n in 1..=n_max {
        acc = acc.mul(&v);
        if acc.is_identity() {
            torsion.push(format!("(y0 y1)^{n} = 1"));
        }
    }
    report.push(
        Check::new("y0y1-infinite-order", torsion.is_empty(), n_max)
            .detail(format!("powers 1..={n_max} checked"))
            .witnesses(torsion),
    );
    report
}

/// `|⟨y_0, x_0, …, x_k⟩|` for odd `k`, by enumeration; also checks that
/// every element order is a power of two.
pub fn truncated_order(k: usize) -> Result<(usize, Report)> {
    if k % 2 == 0 {
        return Err(Error::Input(format!(
            "k = {k} is even: y0 moves x{k} out of the truncation; use an odd k"
        )));
    }
    let mut gens = vec![(String::from("y0"), Element::Hol(HolElement::y(0)))];
    gens.extend((0..=k).map(|i| (format!("x{i}"), Element::Hol(HolElement::x(i)))));
    let g = BlackBoxGroup::gf2auto(gens)?;
    let all = g.closure_of_generators()?;
    let mut report = Report::new(format!("truncation k={k}"), 0);
    let mut bad = Vec::new();
    for e in all.elements() {
        let o = g.element_order(e)?;
        if !o.is_power_of_two() {
            bad.push(format!("{e:?} has order {o}"));
        }
    }
    let expect = 1usize << (k + 2);
    report.push(
        Check::new("orders-are-powers-of-two", bad.is_empty(), all.len())
            .witnesses(bad.into_iter().take(MAX_WITNESSES).collect()),
    );
    report.push(Check::new("order", all.len() == expect, 1).detail(format!("|V| = {} (expected 2^{})", all.len(), k + 2)));
    Ok((all.len(), report))
}

/// Random words in `g_0, g_1`: equality through cached images agrees with
/// equality of the letter-by-letter action on `x_0, …, x_{64}`.
pub fn aut_equality_check(samples: usize, seed: u64) -> Report {
    use rand::Rng;
    let mut report = Report::new("automorphism equality", seed);
    let mut bad = Vec::new();
    let mut equal_pairs = 0;
    for i in 0..samples {
        let mut rng = trial_rng(seed, "autword", i as u64);
        let word = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<u8> {
            let len = rng.gen_range(0..12);
            (0..len).map(|_| rng.gen_range(0..2)).collect()
        };
        let a = AutWord::from_letters(&word(&mut rng));
        // bias towards equal pairs by reusing the first word half the time
        let b = if rng.gen_bool(0.3) { AutWord::from_letters(&a.letters.clone()) } else { AutWord::from_letters(&word(&mut rng)) };
        let by_action = (0..=64).all(|n| a.apply_naive(&Gf2Vector::basis(n)) == b.apply_naive(&Gf2Vector::basis(n)));
        if by_action {
            equal_pairs += 1;
        }
        if (a == b) != by_action {
            bad.push(format!("{a:?} vs {b:?}"));
        }
        let v = Gf2Vector::from_indices((0..8).filter(|_| rng.gen_bool(0.5)).map(|n| n * 3));
        if a.apply(&v) != a.apply_naive(&v) {
            bad.push(format!("{a:?} on {v}"));
        }
    }
    report.push(
        Check::new("cached-images-sound", bad.is_empty(), samples)
            .detail(format!("{equal_pairs} equal pairs"))
            .witnesses(bad.into_iter().take(MAX_WITNESSES).collect()),
    );
    report
}

/// An ultimately periodic branch `prefix · period^ω` of the labelled tree,
/// with the parity `ε` of its automorphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub prefix: Vec<String>,
    pub period: Vec<String>,
    pub epsilon: u8,
}

impl Branch {
    pub fn validate(&self) -> Result<()> {
        if self.period.is_empty() {
            return Err(Error::InvalidBranches("empty period".into()));
        }
        if self.epsilon > 1 {
            return Err(Error::InvalidBranches(format!("epsilon {} not in {{0,1}}", self.epsilon)));
        }
        Ok(())
    }

    pub fn label(&self, n: usize) -> &str {
        if n < self.prefix.len() {
            &self.prefix[n]
        } else {
            &self.period[(n - self.prefix.len()) % self.period.len()]
        }
    }

    /// The node `v↾n` as its label sequence.
    pub fn node(&self, n: usize) -> Vec<String> {
        (0..n).map(|i| self.label(i).to_string()).collect()
    }

    /// Least `n` with `v↾n ≠ w↾n`, or `None` when the branches coincide.
    pub fn divergence(&self, other: &Branch) -> Option<usize> {
        let horizon = self.prefix.len().max(other.prefix.len()) + self.period.len() * other.period.len();
        (0..horizon).find(|&i| self.label(i) != other.label(i)).map(|i| i + 1)
    }
}

pub fn parse_branches(text: &str) -> Result<Vec<Branch>> {
    let branches: Vec<Branch> =
        serde_json::from_str(text).map_err(|e| Error::InvalidBranches(format!("branch JSON: {e}")))?;
    for b in &branches {
        b.validate()?;
    }
    Ok(branches)
}

/// GF(2) matrices acting on row vectors of at most 64 coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Matrix(Vec<u64>);

impl Matrix {
    fn identity(n: usize) -> Self {
        Matrix((0..n).map(|i| 1u64 << i).collect())
    }

    fn apply(&self, v: u64) -> u64 {
        (0..self.0.len()).filter(|i| v >> i & 1 == 1).fold(0, |acc, i| acc ^ self.0[i])
    }

    /// `self` followed by `other`.
    fn then(&self, other: &Matrix) -> Matrix {
        Matrix(self.0.iter().map(|&r| other.apply(r)).collect())
    }

    fn order(&self, bound: usize) -> Option<usize> {
        let id = Matrix::identity(self.0.len());
        let mut acc = self.clone();
        for n in 1..=bound {
            if acc == id {
                return Some(n);
            }
            acc = acc.then(self);
        }
        None
    }
}

fn matrix_closure(gens: &[Matrix], dim: usize, bound: usize) -> Result<Vec<Matrix>> {
    let id = Matrix::identity(dim);
    let mut seen: HashSet<Matrix> = HashSet::from([id.clone()]);
    let mut order = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(m) = queue.pop_front() {
        for g in gens {
            let p = m.then(g);
            if seen.insert(p.clone()) {
                if seen.len() > bound {
                    return Err(Error::BoundExceeded { what: "matrix group order".into(), limit: bound });
                }
                order.push(p.clone());
                queue.push_back(p);
            }
        }
    }
    Ok(order)
}

/// Outcome of the local-finiteness argument for the subgroup generated by
/// the automorphisms `g_v` of finitely many branches.
#[derive(Clone, Debug)]
pub struct BranchAnalysis {
    pub report: Report,
    /// `|E'|`, the dimension of `C`.
    pub c_dim: usize,
    /// `|W*| = |⟨f_v⟩|`.
    pub w_star: usize,
    /// `|W*| · 2^{|F|}`.
    pub bound: u128,
    /// Order of `⟨g_v⟩` restricted to the window of the tree examined.
    pub window_order: usize,
}

/// Extra levels examined below the boundary of `C`, per branch.
const WINDOW: usize = 4;
const CLOSURE_BOUND: usize = 1 << 16;

/// Splits each `g_v` as `f_v h_v` with `f_v` supported on `C = ⟨x_τ : τ ∈ E'⟩`
/// and `h_v` on the tails, checks the commutation relations on a window of
/// the tree, and bounds `⟨g_v⟩` by `|W*| · 2^{|F|}`. Without `depth` the
/// least common divergence depth is used.
pub fn branch_group_check(branches: &[Branch], depth: Option<usize>) -> Result<BranchAnalysis> {
    for b in branches {
        b.validate()?;
    }
    let mut needed = 0;
    for (i, v) in branches.iter().enumerate() {
        for w in &branches[i + 1..] {
            let d = v
                .divergence(w)
                .ok_or_else(|| Error::InvalidBranches(format!("branches {v:?} and {w:?} coincide")))?;
            needed = needed.max(d);
        }
    }
    let k = depth.unwrap_or(needed);
    if k < needed {
        return Err(Error::InvalidBranches(format!("branches only diverge by depth {needed}, not {k}")));
    }
    let mut report = Report::new("branch local finiteness", 0);
    // boundary of C on each branch: the first level >= k fixed by g_v
    let boundary: Vec<usize> =
        branches.iter().map(|b| if k % 2 != b.epsilon as usize { k } else { k + 1 }).collect();
    let end: Vec<usize> = boundary.iter().map(|d| d + 2 * WINDOW).collect();

    let mut ids: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    let intern = |node: Vec<String>, ids: &mut BTreeMap<Vec<String>, usize>| -> usize {
        let n = ids.len();
        *ids.entry(node).or_insert(n)
    };
    for (b, &d) in branches.iter().zip(&boundary) {
        for n in 0..=d {
            intern(b.node(n), &mut ids);
        }
    }
    let c_dim = ids.len();
    for (b, &d) in branches.iter().zip(&end) {
        for n in 0..=d {
            intern(b.node(n), &mut ids);
        }
    }
    let dim = ids.len();
    if dim > 64 {
        return Err(Error::BoundExceeded { what: "tree window size".into(), limit: 64 });
    }
    let node_id = |b: &Branch, n: usize| ids[&b.node(n)];

    let c_mask: u64 = if c_dim == 64 { u64::MAX } else { (1u64 << c_dim) - 1 };
    let mut g = Vec::new();
    let mut f = Vec::new();
    let mut h = Vec::new();
    for (b, &e) in branches.iter().zip(&end) {
        let mut m = Matrix::identity(dim);
        for n in 0..e {
            if n % 2 == b.epsilon as usize {
                let i = node_id(b, n);
                m.0[i] ^= 1 << node_id(b, n + 1);
            }
        }
        let fm = Matrix((0..dim).map(|i| if c_mask >> i & 1 == 1 { m.0[i] } else { 1 << i }).collect());
        let hm = Matrix((0..dim).map(|i| if c_mask >> i & 1 == 1 { 1 << i } else { m.0[i] }).collect());
        g.push(m);
        f.push(fm);
        h.push(hm);
    }
    let id = Matrix::identity(dim);
    let mut problems = Vec::new();
    for (i, fm) in f.iter().enumerate() {
        if fm.0.iter().take(c_dim).any(|r| r & !c_mask != 0) {
            problems.push(format!("f{i} does not preserve C"));
        }
        if h[i].then(&h[i]) != id {
            problems.push(format!("h{i}^2 != 1"));
        }
        if fm.then(&h[i]) != g[i] || h[i].then(fm) != g[i] {
            problems.push(format!("g{i} != f{i} h{i}"));
        }
        for (j, hm) in h.iter().enumerate() {
            if fm.then(hm) != hm.then(fm) {
                problems.push(format!("f{i} h{j} != h{j} f{i}"));
            }
            if h[i].then(hm) != hm.then(&h[i]) {
                problems.push(format!("h{i} h{j} != h{j} h{i}"));
            }
        }
    }
    report.push(
        Check::new("factorization", problems.is_empty(), branches.len())
            .witnesses(problems.into_iter().take(MAX_WITNESSES).collect()),
    );

    let restricted: Vec<Matrix> = f.iter().map(|m| Matrix(m.0[..c_dim].to_vec())).collect();
    let w_star = matrix_closure(&restricted, c_dim, CLOSURE_BOUND)?;
    let bad: Vec<String> = w_star
        .iter()
        .filter_map(|m| m.order(CLOSURE_BOUND))
        .filter(|o| !o.is_power_of_two())
        .map(|o| format!("element of order {o}"))
        .collect();
    report.push(
        Check::new("w-star-is-2-group", bad.is_empty(), w_star.len())
            .detail(format!("|W*| = {} acting on C of dimension {c_dim}", w_star.len()))
            .witnesses(bad.into_iter().take(MAX_WITNESSES).collect()),
    );
    let bound = w_star.len() as u128 * (1u128 << branches.len());
    let window = matrix_closure(&g, dim, CLOSURE_BOUND)?;
    report.push(
        Check::new("window-group-within-bound", window.len() as u128 <= bound && window.len().is_power_of_two(), 1)
            .detail(format!("|<g_v>| on the window = {}, bound {bound}", window.len())),
    );
    report.note(format!("divergence depth {k}; C has dimension {c_dim}"));
    Ok(BranchAnalysis { report, c_dim, w_star: w_star.len(), bound, window_order: window.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(ix: &[usize]) -> Gf2Vector {
        Gf2Vector::from_indices(ix.iter().copied())
    }

    #[test]
    fn generator_action() {
        let g0 = AutWord::generator(0);
        assert_eq!(g0.apply(&v(&[2])), v(&[2, 3]));
        assert_eq!(g0.apply(&v(&[1])), v(&[1]));
        let gg = g0.then(&g0);
        assert!(gg.is_identity());
        assert!(gg.letters().is_empty());
        assert_eq!(gg.apply(&v(&[0, 5, 9])), v(&[0, 5, 9]));
    }

    #[test]
    fn holomorph_commutators() {
        assert_eq!(HolElement::x(0).commutator(&HolElement::y(0)), HolElement::x(1));
        assert_eq!(HolElement::x(1).commutator(&HolElement::y(1)), HolElement::x(2));
        assert!(HolElement::x(4).commutator(&HolElement::y(1)).is_identity());
        assert!(relations_check(64).passed());
        assert!(descent_chain(32).passed());
    }

    #[test]
    fn star_values() {
        assert_eq!(star_element(1), HolElement::translation(v(&[0, 1])));
        let e = star_element(2);
        assert_eq!(e.as_vector().unwrap().max_index(), Some(2));
        let r = star_identity(20);
        assert!(r.passed(), "{r:?}");
        // (y0 y1)^5 sends x0 to a vector reaching x10
        let mut p = HolElement::identity();
        for _ in 0..5 {
            p = p.mul(&HolElement::y(0)).mul(&HolElement::y(1));
        }
        assert!(p.aut.apply(&v(&[0])).contains(10) || p.inverse().aut.apply(&v(&[0])).contains(10));
    }

    #[test]
    fn truncations() {
        assert_eq!(truncated_order(1).unwrap().0, 8);
        assert_eq!(truncated_order(3).unwrap().0, 32);
        assert!(truncated_order(3).unwrap().1.passed());
        assert!(truncated_order(2).is_err());
    }

    #[test]
    fn cached_equality() {
        assert!(aut_equality_check(200, 0).passed());
    }

    fn branch(prefix: &[&str], period: &[&str], epsilon: u8) -> Branch {
        Branch {
            prefix: prefix.iter().map(|s| s.to_string()).collect(),
            period: period.iter().map(|s| s.to_string()).collect(),
            epsilon,
        }
    }

    #[test]
    fn branch_checks() {
        let r = branch_group_check(&[], None).unwrap();
        assert!(r.report.passed());
        assert_eq!(r.bound, 1);

        let one = branch_group_check(&[branch(&[], &["a"], 0)], Some(0)).unwrap();
        assert!(one.report.passed(), "{:?}", one.report);
        assert!(one.w_star <= 2);

        let two = branch_group_check(&[branch(&["a"], &["b"], 0), branch(&["c"], &["b"], 1)], None).unwrap();
        assert!(two.report.passed(), "{:?}", two.report);
        assert!(two.window_order as u128 <= two.bound);

        let three = branch_group_check(
            &[branch(&["a", "a"], &["b"], 0), branch(&["a", "c"], &["b", "d"], 1), branch(&["e"], &["e"], 0)],
            Some(3),
        )
        .unwrap();
        assert!(three.report.passed(), "{:?}", three.report);

        let same = branch_group_check(&[branch(&["a"], &["b"], 0), branch(&["a", "b"], &["b"], 1)], None);
        assert!(matches!(same, Err(Error::InvalidBranches(_))));
        let shallow = branch_group_check(&[branch(&["a", "a"], &["b"], 0), branch(&["a", "c"], &["b"], 1)], Some(1));
        assert!(matches!(shallow, Err(Error::InvalidBranches(_))));
    }
}
