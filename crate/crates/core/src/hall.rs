//! Basic commutators and Hall-basis rewriting of Lie brackets.
//!
//! Entries are ordered by weight; inside one weight, leaves follow the
//! generator order and nodes `[y1, y2]` are sorted by `(index(y1),
//! index(y2))`. Because the comparison only ever looks at indices, the
//! basis of a sub-alphabet is exactly the subsequence of entries supported
//! on it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::int::Int;
use crate::word::{Alphabet, GeneratorId, Word};

/// Limits applied during enumeration and rewriting.
#[derive(Clone, Copy, Debug)]
pub struct HallConfig {
    pub max_weight: usize,
    pub max_entries: usize,
    pub fuel: u64,
}

impl Default for HallConfig {
    fn default() -> Self {
        HallConfig { max_weight: 12, max_entries: 1_000_000, fuel: 1_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Leaf(GeneratorId),
    Node(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicCommutator {
    pub shape: Shape,
    pub weight: usize,
    /// Bitmask of the generators occurring in the bracket.
    pub support: u64,
}

#[derive(Clone, Debug)]
pub struct HallBasis {
    alphabet: Alphabet,
    max_weight: usize,
    entries: Vec<BasicCommutator>,
    /// `layer_start[w]` is the index of the first entry of weight `w`;
    /// `layer_start[max_weight + 1]` is the total length.
    layer_start: Vec<usize>,
    node_index: HashMap<(usize, usize), usize>,
    k_basic: Option<Vec<bool>>,
}

impl Eq for HallBasis {}

impl PartialEq for HallBasis {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet.same_as(&other.alphabet)
            && self.max_weight == other.max_weight
            && self.k_basic == other.k_basic
    }
}

/// Enumerates all basic commutators of weight at most `max_weight` on `r`
/// generators named `x0, x1, …`.
pub fn enumerate_basis(r: usize, max_weight: usize) -> Result<HallBasis> {
    if r == 0 {
        return Err(Error::Input("a Hall basis needs at least one generator".into()));
    }
    HallBasis::over(&Alphabet::standard(r), max_weight, &HallConfig::default())
}

impl HallBasis {
    pub fn over(alphabet: &Alphabet, max_weight: usize, cfg: &HallConfig) -> Result<HallBasis> {
        if max_weight == 0 {
            return Err(Error::Input("maximum weight must be at least 1".into()));
        }
        if max_weight > cfg.max_weight {
            return Err(Error::BoundExceeded {
                what: format!("maximum weight {max_weight}"),
                limit: cfg.max_weight,
            });
        }
        if alphabet.len() > 64 {
            return Err(Error::BoundExceeded { what: "alphabet size".into(), limit: 64 });
        }
        let mut entries: Vec<BasicCommutator> = (0..alphabet.len())
            .map(|g| BasicCommutator {
                shape: Shape::Leaf(GeneratorId(g as u32)),
                weight: 1,
                support: 1u64 << g,
            })
            .collect();
        let mut layer_start = vec![0, 0, entries.len()];
        let mut node_index = HashMap::new();
        for n in 2..=max_weight {
            let mut layer = Vec::new();
            for n1 in (n.div_ceil(2)..n).rev() {
                let n2 = n - n1;
                for i in layer_start[n1]..layer_start[n1 + 1] {
                    let lower = match entries[i].shape {
                        Shape::Leaf(_) => layer_start[n2],
                        Shape::Node(_, z2) => z2.max(layer_start[n2]),
                    };
                    for j in lower..layer_start[n2 + 1].min(i) {
                        layer.push((i, j));
                    }
                }
            }
            layer.sort_unstable();
            if entries.len() + layer.len() > cfg.max_entries {
                return Err(Error::BoundExceeded {
                    what: "number of basic commutators".into(),
                    limit: cfg.max_entries,
                });
            }
            for (i, j) in layer {
                node_index.insert((i, j), entries.len());
                entries.push(BasicCommutator {
                    shape: Shape::Node(i, j),
                    weight: n,
                    support: entries[i].support | entries[j].support,
                });
            }
            layer_start.push(entries.len());
        }
        Ok(HallBasis {
            alphabet: alphabet.clone(),
            max_weight,
            entries,
            layer_start,
            node_index,
            k_basic: None,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rank(&self) -> usize {
        self.alphabet.len()
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BasicCommutator] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &BasicCommutator {
        &self.entries[i]
    }

    /// Index range of the entries of weight `w`.
    pub fn layer(&self, w: usize) -> std::ops::Range<usize> {
        if w == 0 || w > self.max_weight {
            return 0..0;
        }
        self.layer_start[w]..self.layer_start[w + 1]
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        (1..=self.max_weight).map(|w| self.layer(w).len()).collect()
    }

    /// Number of entries of weight at most `w`.
    pub fn prefix_len(&self, w: usize) -> usize {
        self.layer_start[w.min(self.max_weight) + 1]
    }

    pub fn node(&self, left: usize, right: usize) -> Option<usize> {
        self.node_index.get(&(left, right)).copied()
    }

    pub fn leaf(&self, g: GeneratorId) -> usize {
        g.index()
    }

    pub fn k_basic(&self) -> Option<&[bool]> {
        self.k_basic.as_deref()
    }

    /// Flags the basic commutators for `K(M, c)`: `b` qualifies when its
    /// weight exceeds `c(support(b))`, or when `b = [y1, y2]` with both
    /// parts qualifying.
    pub fn with_k_basic_flags(mut self, c: impl Fn(u64) -> usize) -> HallBasis {
        let mut flags = vec![false; self.entries.len()];
        for (i, e) in self.entries.iter().enumerate() {
            flags[i] = e.weight > c(e.support)
                || matches!(e.shape, Shape::Node(a, b) if flags[a] && flags[b]);
        }
        self.k_basic = Some(flags);
        self
    }

    /// Bracket notation, e.g. `[[x1,x0],x0]`.
    pub fn bracket_string(&self, i: usize) -> String {
        match self.entries[i].shape {
            Shape::Leaf(g) => self.alphabet.name(g).to_string(),
            Shape::Node(a, b) => format!("[{},{}]", self.bracket_string(a), self.bracket_string(b)),
        }
    }

    /// The basic commutator as a group word.
    pub fn word(&self, i: usize) -> Word {
        match self.entries[i].shape {
            Shape::Leaf(g) => Word::generator(&self.alphabet, g),
            Shape::Node(a, b) => self.word(a).commutator_unchecked(&self.word(b)),
        }
    }

    pub fn support_names(&self, i: usize) -> Vec<String> {
        let s = self.entries[i].support;
        self.alphabet
            .names()
            .iter()
            .enumerate()
            .filter(|(g, _)| s >> g & 1 == 1)
            .map(|(_, n)| n.clone())
            .collect()
    }

    pub fn export(&self) -> Vec<BasisEntry> {
        (0..self.entries.len())
            .map(|i| BasisEntry {
                index: i,
                weight: self.entries[i].weight,
                shape: match self.entries[i].shape {
                    Shape::Leaf(g) => ShapeExport::Leaf(self.alphabet.name(g).to_string()),
                    Shape::Node(a, b) => ShapeExport::Node([a, b]),
                },
                bracket: self.bracket_string(i),
                support: self.support_names(i),
                k_basic: self.k_basic.as_ref().map(|f| f[i]),
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ShapeExport {
    Leaf(String),
    Node([usize; 2]),
}

/// One row of the JSON basis export.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BasisEntry {
    pub index: usize,
    pub weight: usize,
    pub shape: ShapeExport,
    pub bracket: String,
    pub support: Vec<String>,
    #[serde(rename = "kBasic")]
    pub k_basic: Option<bool>,
}

/// An integer combination of basis entries of a single weight.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LieVector {
    coeffs: BTreeMap<usize, Int>,
}

impl LieVector {
    pub fn zero() -> Self {
        LieVector::default()
    }

    pub fn unit(i: usize) -> Self {
        let mut v = LieVector::zero();
        v.coeffs.insert(i, Int::ONE);
        v
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: usize) -> Int {
        self.coeffs.get(&i).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Int)> {
        self.coeffs.iter().map(|(&i, c)| (i, c))
    }

    pub fn add_scaled(&mut self, other: &LieVector, k: &Int) {
        for (&i, c) in &other.coeffs {
            let slot = self.coeffs.entry(i).or_default();
            slot.add_mul(c, k);
            if slot.is_zero() {
                self.coeffs.remove(&i);
            }
        }
    }

    pub fn scaled(&self, k: &Int) -> LieVector {
        let mut v = LieVector::zero();
        v.add_scaled(self, k);
        v
    }
}

impl fmt::Debug for LieVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.coeffs.iter()).finish()
    }
}

/// A formal bracket of basis entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bracket {
    Basis(usize),
    Pair(Box<Bracket>, Box<Bracket>),
}

impl Bracket {
    pub fn pair(a: Bracket, b: Bracket) -> Bracket {
        Bracket::Pair(Box::new(a), Box::new(b))
    }

    pub fn weight(&self, basis: &HallBasis) -> usize {
        match self {
            Bracket::Basis(i) => basis.get(*i).weight,
            Bracket::Pair(a, b) => a.weight(basis) + b.weight(basis),
        }
    }
}

/// Rewrites Lie brackets into the Hall basis using antisymmetry,
/// alternation and the Jacobi identity. Results of basis pairs are memoized.
pub struct LieRewriter<'a> {
    basis: &'a HallBasis,
    memo: HashMap<(usize, usize), LieVector>,
    fuel: u64,
    used: u64,
}

impl<'a> LieRewriter<'a> {
    pub fn new(basis: &'a HallBasis, fuel: u64) -> Self {
        LieRewriter { basis, memo: HashMap::new(), fuel, used: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.used
    }

    pub fn rewrite(&mut self, tree: &Bracket) -> Result<LieVector> {
        match tree {
            Bracket::Basis(i) => {
                if *i >= self.basis.len() {
                    return Err(Error::Input(format!("basis index {i} out of range")));
                }
                Ok(LieVector::unit(*i))
            }
            Bracket::Pair(a, b) => {
                let w = tree.weight(self.basis);
                if w > self.basis.max_weight() {
                    return Err(Error::BoundExceeded {
                        what: format!("bracket weight {w}"),
                        limit: self.basis.max_weight(),
                    });
                }
                let u = self.rewrite(a)?;
                let v = self.rewrite(b)?;
                self.bracket_vectors(&u, &v)
            }
        }
    }

    pub fn bracket_vectors(&mut self, u: &LieVector, v: &LieVector) -> Result<LieVector> {
        let mut out = LieVector::zero();
        for (i, a) in u.iter() {
            for (j, b) in v.iter() {
                let ij = self.bracket(i, j)?;
                out.add_scaled(&ij, &(a * b));
            }
        }
        Ok(out)
    }

    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.fuel {
            Err(Error::FuelExhausted(self.fuel))
        } else {
            Ok(())
        }
    }

    /// `[b_i, b_j]` in the basis.
    pub fn bracket(&mut self, i: usize, j: usize) -> Result<LieVector> {
        self.tick()?;
        if i == j {
            return Ok(LieVector::zero());
        }
        if i < j {
            return Ok(self.bracket(j, i)?.scaled(&Int::from(-1)));
        }
        if let Some(v) = self.memo.get(&(i, j)) {
            return Ok(v.clone());
        }
        let w = self.basis.get(i).weight + self.basis.get(j).weight;
        if w > self.basis.max_weight() {
            return Err(Error::BoundExceeded {
                what: format!("bracket weight {w}"),
                limit: self.basis.max_weight(),
            });
        }
        let result = match self.basis.get(i).shape {
            Shape::Node(z1, z2) if j < z2 => {
                // [[z1,z2],j] = [[z1,j],z2] + [z1,[z2,j]]
                let a = self.bracket(z1, j)?;
                let first = self.bracket_vectors(&a, &LieVector::unit(z2))?;
                let b = self.bracket(z2, j)?;
                let mut second = self.bracket_vectors(&LieVector::unit(z1), &b)?;
                second.add_scaled(&first, &Int::ONE);
                second
            }
            _ => {
                let k = self.basis.node(i, j).ok_or_else(|| {
                    Error::Internal(format!("pair ({i},{j}) should be basic but is not indexed"))
                })?;
                LieVector::unit(k)
            }
        };
        self.memo.insert((i, j), result.clone());
        Ok(result)
    }
}

/// One-shot rewrite with the default fuel.
pub fn lie_rewrite(basis: &HallBasis, tree: &Bracket) -> Result<LieVector> {
    LieRewriter::new(basis, HallConfig::default().fuel).rewrite(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Witt dimension `(1/n) Σ_{d|n} μ(d) r^{n/d}`, computed from scratch.
    fn witt(r: u64, n: u64) -> u64 {
        fn mobius(mut d: u64) -> i64 {
            let mut res = 1;
            let mut p = 2;
            while p * p <= d {
                if d % p == 0 {
                    d /= p;
                    if d % p == 0 {
                        return 0;
                    }
                    res = -res;
                }
                p += 1;
            }
            if d > 1 {
                res = -res;
            }
            res
        }
        let s: i64 = (1..=n).filter(|d| n % d == 0).map(|d| mobius(d) * (r.pow((n / d) as u32) as i64)).sum();
        (s / n as i64) as u64
    }

    /// Re-checks clause (a)/(b) of the basic-commutator definition for every
    /// entry, independently of the enumerator's loop bounds.
    fn validate(b: &HallBasis) {
        let e = b.entries();
        for (k, c) in e.iter().enumerate() {
            if k > 0 {
                assert!(e[k - 1].weight <= c.weight, "weight-monotone");
            }
            if let Shape::Node(y1, y2) = c.shape {
                assert_eq!(e[y1].weight + e[y2].weight, c.weight);
                assert!(y1 > y2);
                if let Shape::Node(_, z2) = e[y1].shape {
                    assert!(y2 >= z2);
                }
            }
        }
    }

    #[test]
    fn small_bases() {
        let b = enumerate_basis(2, 1).unwrap();
        assert_eq!(b.len(), 2);
        let b = enumerate_basis(2, 3).unwrap();
        assert_eq!(b.layer_sizes(), vec![2, 1, 2]);
        let names: Vec<_> = (0..b.len()).map(|i| b.bracket_string(i)).collect();
        assert_eq!(names, ["x0", "x1", "[x1,x0]", "[[x1,x0],x0]", "[[x1,x0],x1]"]);
        let b = enumerate_basis(3, 2).unwrap();
        let names: Vec<_> = b.layer(2).map(|i| b.bracket_string(i)).collect();
        assert_eq!(names, ["[x1,x0]", "[x2,x0]", "[x2,x1]"]);
    }

    #[test]
    fn witt_oracle_values() {
        let r2: Vec<u64> = (1..=6).map(|n| witt(2, n)).collect();
        assert_eq!(r2, [2, 1, 2, 3, 6, 9]);
        let r3: Vec<u64> = (1..=4).map(|n| witt(3, n)).collect();
        assert_eq!(r3, [3, 3, 8, 18]);
    }

    #[test]
    fn layer_sizes_match_witt() {
        for r in 1..=4usize {
            let w = if r <= 2 { 8 } else { 6 };
            let b = enumerate_basis(r, w).unwrap();
            validate(&b);
            let expect: Vec<usize> = (1..=w as u64).map(|n| witt(r as u64, n) as usize).collect();
            assert_eq!(b.layer_sizes(), expect, "r={r}");
        }
    }

    #[test]
    fn weight_bound_is_enforced() {
        let cfg = HallConfig { max_weight: 4, ..HallConfig::default() };
        assert!(matches!(
            HallBasis::over(&Alphabet::standard(2), 5, &cfg),
            Err(Error::BoundExceeded { .. })
        ));
    }

    #[test]
    fn sub_alphabet_bases_are_subsequences() {
        let full = HallBasis::over(&Alphabet::standard(3), 5, &HallConfig::default()).unwrap();
        let sub = HallBasis::over(&Alphabet::new(["x0", "x2"]).unwrap(), 5, &HallConfig::default())
            .unwrap();
        let restricted: Vec<String> = (0..full.len())
            .filter(|&i| full.get(i).support & 0b010 == 0)
            .map(|i| full.bracket_string(i))
            .collect();
        let direct: Vec<String> = (0..sub.len()).map(|i| sub.bracket_string(i)).collect();
        assert_eq!(restricted, direct);
    }

    type Poly = BTreeMap<Vec<u32>, i64>;

    fn poly_bracket(a: &Poly, b: &Poly) -> Poly {
        let mut out = Poly::new();
        for (u, x) in a {
            for (v, y) in b {
                let mut uv = u.clone();
                uv.extend(v);
                let mut vu = v.clone();
                vu.extend(u);
                *out.entry(uv).or_default() += x * y;
                *out.entry(vu).or_default() -= x * y;
            }
        }
        out.retain(|_, c| *c != 0);
        out
    }

    /// Image in the free associative algebra, `[u,v] ↦ uv - vu`.
    fn basis_poly(b: &HallBasis, i: usize) -> Poly {
        match b.get(i).shape {
            Shape::Leaf(g) => Poly::from([(vec![g.0], 1)]),
            Shape::Node(l, r) => poly_bracket(&basis_poly(b, l), &basis_poly(b, r)),
        }
    }

    fn tree_poly(b: &HallBasis, t: &Bracket) -> Poly {
        match t {
            Bracket::Basis(i) => basis_poly(b, *i),
            Bracket::Pair(x, y) => poly_bracket(&tree_poly(b, x), &tree_poly(b, y)),
        }
    }

    fn vector_poly(b: &HallBasis, v: &LieVector) -> Poly {
        let mut out = Poly::new();
        for (i, c) in v.iter() {
            for (m, x) in basis_poly(b, i) {
                *out.entry(m).or_default() += x * c.to_i64().unwrap();
            }
        }
        out.retain(|_, c| *c != 0);
        out
    }

    fn tree_strategy(n: usize) -> impl Strategy<Value = Bracket> {
        let leaf = (0..n).prop_map(Bracket::Basis);
        leaf.prop_recursive(3, 8, 2, |inner| {
            (inner.clone(), inner).prop_map(|(a, b)| Bracket::pair(a, b))
        })
    }

    /// Trees of weight at most 2 over the r = 3 basis.
    fn small_tree() -> impl Strategy<Value = Bracket> {
        prop_oneof![
            (0..6usize).prop_map(Bracket::Basis),
            (0..3usize, 0..3usize).prop_map(|(a, b)| Bracket::pair(Bracket::Basis(a), Bracket::Basis(b))),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn rewrite_agrees_with_associative_image(t in tree_strategy(8)) {
            let b = enumerate_basis(3, 6).unwrap();
            prop_assume!(t.weight(&b) <= 6);
            let v = lie_rewrite(&b, &t).unwrap();
            prop_assert_eq!(vector_poly(&b, &v), tree_poly(&b, &t));
            for (i, _) in v.iter() {
                prop_assert_eq!(b.get(i).weight, t.weight(&b));
            }
        }

        #[test]
        fn jacobi_sums_vanish(u in small_tree(), v in small_tree(), w in small_tree()) {
            let b = enumerate_basis(3, 6).unwrap();
            let mut rw = LieRewriter::new(&b, 1_000_000);
            let p = |x: &Bracket, y: &Bracket, z: &Bracket| {
                Bracket::pair(Bracket::pair(x.clone(), y.clone()), z.clone())
            };
            let mut sum = rw.rewrite(&p(&u, &v, &w)).unwrap();
            sum.add_scaled(&rw.rewrite(&p(&v, &w, &u)).unwrap(), &Int::ONE);
            sum.add_scaled(&rw.rewrite(&p(&w, &u, &v)).unwrap(), &Int::ONE);
            prop_assert!(sum.is_zero());
        }
    }

    #[test]
    fn k_basic_examples() {
        // c(singletons) = 1, c({a,b}) = 2
        let b = HallBasis::over(&Alphabet::new(["a", "b"]).unwrap(), 2, &HallConfig::default())
            .unwrap()
            .with_k_basic_flags(|s| if s.count_ones() == 2 { 2 } else { 1 });
        assert!(b.k_basic().unwrap().iter().all(|f| !f));

        // M = {a,b,d}: c({a,b}) = 1, c(M) = 2, other pairs 2
        let c = |s: u64| match s {
            0 => 0,
            0b011 => 1,
            s if s.count_ones() == 1 => 1,
            _ => 2,
        };
        let b = HallBasis::over(&Alphabet::new(["a", "b", "d"]).unwrap(), 3, &HallConfig::default())
            .unwrap()
            .with_k_basic_flags(c);
        let flags = b.k_basic().unwrap();
        let ba = b.node(1, 0).unwrap();
        assert!(flags[ba]);
        assert!(!flags[b.node(2, 0).unwrap()]);
        assert!(b.layer(3).all(|i| flags[i]));
        assert!(b.layer(1).all(|i| !flags[i]));
    }

    #[test]
    fn rewrite_examples() {
        let b = enumerate_basis(2, 4).unwrap();
        let x0 = Bracket::Basis(0);
        let x1 = Bracket::Basis(1);
        let v = lie_rewrite(&b, &Bracket::pair(x0.clone(), x1.clone())).unwrap();
        let x10 = b.node(1, 0).unwrap();
        assert_eq!(v, LieVector::unit(x10).scaled(&Int::from(-1)));
        assert!(lie_rewrite(&b, &Bracket::pair(x0.clone(), x0.clone())).unwrap().is_zero());
        let c = Bracket::pair(x1.clone(), x0.clone());
        assert!(lie_rewrite(&b, &Bracket::pair(c.clone(), c)).unwrap().is_zero());
    }

    #[test]
    fn rewrite_overweight_is_reported() {
        let b = enumerate_basis(2, 2).unwrap();
        let t = Bracket::pair(Bracket::pair(Bracket::Basis(1), Bracket::Basis(0)), Bracket::Basis(0));
        assert!(matches!(lie_rewrite(&b, &t), Err(Error::BoundExceeded { .. })));
    }

    #[test]
    fn rewrite_fuel_is_reported() {
        let b = enumerate_basis(3, 5).unwrap();
        let mut rw = LieRewriter::new(&b, 3);
        let t = Bracket::pair(
            Bracket::pair(Bracket::Basis(0), Bracket::Basis(1)),
            Bracket::pair(Bracket::Basis(2), Bracket::pair(Bracket::Basis(0), Bracket::Basis(2))),
        );
        assert!(matches!(rw.rewrite(&t), Err(Error::FuelExhausted(3))));
    }
}
