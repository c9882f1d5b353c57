//! Finite groups given concretely: Cayley tables, permutation groups, and
//! subgroups of the GF(2) holomorph. Everything is computed on full element
//! sets, so groups are limited to a configurable size.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::Deserialize;

use crate::amalgam::{AutWord, Gf2Vector, HolElement};
use crate::error::{Error, Result};

pub const DEFAULT_BOUND: usize = 10_000;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Element {
    Idx(u32),
    /// Images of `0..degree`; `p * q` applies `p` first.
    Perm(Box<[u32]>),
    Hol(HolElement),
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Idx(i) => write!(f, "#{i}"),
            Element::Perm(p) => write!(f, "{p:?}"),
            Element::Hol(h) => write!(f, "{h:?}"),
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Cayley { table: Vec<Vec<u32>>, identity: u32, inverses: Vec<u32> },
    Permutation { degree: usize },
    Gf2Auto,
}

#[derive(Clone, Debug)]
pub struct BlackBoxGroup {
    kind: Kind,
    generators: Vec<(String, Element)>,
    bound: usize,
}

/// A subgroup given by its full element set, in discovery order.
#[derive(Clone, Debug)]
pub struct ElementSet {
    elements: Vec<Element>,
    index: HashSet<Element>,
    /// A generating set, greedily chosen so that each member enlarges the
    /// subgroup generated by the previous ones.
    generators: Vec<Element>,
}

impl ElementSet {
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.index.contains(e)
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }
}

/// Group files as read from JSON.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum GroupFile {
    Cayley {
        size: usize,
        table: Vec<Vec<u32>>,
        generators: Vec<GenRef>,
        #[serde(default)]
        names: Option<Vec<String>>,
    },
    Permutation {
        degree: usize,
        generators: Vec<Vec<u32>>,
        #[serde(default)]
        names: Option<Vec<String>>,
    },
    Gf2auto {
        generators: Vec<HolSpec>,
        #[serde(default)]
        names: Option<Vec<String>>,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GenRef {
    Index(u32),
    Named(u32, String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HolSpec {
    #[serde(default)]
    vector: Vec<usize>,
    #[serde(default)]
    aut: Vec<u8>,
}

fn name_generators(elems: Vec<Element>, names: Option<Vec<String>>) -> Result<Vec<(String, Element)>> {
    let names = match names {
        Some(n) if n.len() != elems.len() => {
            return Err(Error::InvalidGroup(format!("{} names for {} generators", n.len(), elems.len())))
        }
        Some(n) => n,
        None => (0..elems.len()).map(|i| format!("y{i}")).collect(),
    };
    Ok(names.into_iter().zip(elems).collect())
}

impl BlackBoxGroup {
    fn with_kind(kind: Kind, generators: Vec<(String, Element)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (n, _) in &generators {
            if n.is_empty() || !seen.insert(n.clone()) {
                return Err(Error::InvalidGroup(format!("generator name `{n}` empty or repeated")));
            }
        }
        Ok(BlackBoxGroup { kind, generators, bound: DEFAULT_BOUND })
    }

    /// A group from its multiplication table on `0..n`. The group axioms are
    /// checked exhaustively when `n³ ≤ 10⁶`, otherwise on a sample.
    pub fn cayley(table: Vec<Vec<u32>>, generators: Vec<(String, u32)>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if table.iter().any(|r| r.len() != n || r.iter().any(|&x| x as usize >= n)) {
            return Err(Error::InvalidGroup("table is not an n×n table over 0..n".into()));
        }
        let identity = (0..n as u32)
            .find(|&e| (0..n).all(|a| table[e as usize][a] == a as u32 && table[a][e as usize] == a as u32))
            .ok_or_else(|| Error::InvalidGroup("no identity".into()))?;
        let mut inverses = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n as u32)
                .find(|&b| table[a][b as usize] == identity && table[b as usize][a] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
            inverses.push(inv);
        }
        let step = if n * n * n <= 1_000_000 { 1 } else { n / 50 + 1 };
        for a in (0..n).step_by(step) {
            for b in 0..n {
                for c in (0..n).step_by(step) {
                    let l = table[table[a][b] as usize][c];
                    let r = table[a][table[b][c] as usize];
                    if l != r {
                        return Err(Error::InvalidGroup(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        if let Some((name, _)) = generators.iter().find(|(_, g)| *g as usize >= n) {
            return Err(Error::InvalidGroup(format!("generator `{name}` out of range")));
        }
        let gens = generators.into_iter().map(|(s, g)| (s, Element::Idx(g))).collect();
        Self::with_kind(Kind::Cayley { table, identity, inverses }, gens)
    }

    pub fn permutation(degree: usize, generators: Vec<(String, Vec<u32>)>) -> Result<Self> {
        let mut gens = Vec::new();
        for (name, p) in generators {
            let mut hit = vec![false; degree];
            if p.len() != degree || p.iter().any(|&i| i as usize >= degree || std::mem::replace(&mut hit[i as usize], true)) {
                return Err(Error::InvalidGroup(format!("generator `{name}` is not a permutation of 0..{degree}")));
            }
            gens.push((name, Element::Perm(p.into_boxed_slice())));
        }
        Self::with_kind(Kind::Permutation { degree }, gens)
    }

    pub fn gf2auto(generators: Vec<(String, Element)>) -> Result<Self> {
        if generators.iter().any(|(_, e)| !matches!(e, Element::Hol(_))) {
            return Err(Error::InvalidGroup("gf2auto generators must be holomorph elements".into()));
        }
        Self::with_kind(Kind::Gf2Auto, generators)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GroupFile = serde_json::from_str(text).map_err(|e| Error::InvalidGroup(format!("group JSON: {e}")))?;
        match file {
            GroupFile::Cayley { size, table, generators, names } => {
                if table.len() != size {
                    return Err(Error::InvalidGroup(format!("size {size} but table has {} rows", table.len())));
                }
                let has_inline = generators.iter().any(|g| matches!(g, GenRef::Named(..)));
                if has_inline && names.is_some() {
                    return Err(Error::InvalidGroup("generator names given twice".into()));
                }
                let mut idx = Vec::new();
                let mut inline = Vec::new();
                for (i, g) in generators.into_iter().enumerate() {
                    match g {
                        GenRef::Index(x) => {
                            idx.push(x);
                            inline.push(format!("y{i}"));
                        }
                        GenRef::Named(x, n) => {
                            idx.push(x);
                            inline.push(n);
                        }
                    }
                }
                let names = match names {
                    Some(n) if n.len() != idx.len() => {
                        return Err(Error::InvalidGroup(format!("{} names for {} generators", n.len(), idx.len())))
                    }
                    Some(n) => n,
                    None => inline,
                };
                Self::cayley(table, names.into_iter().zip(idx).collect())
            }
            GroupFile::Permutation { degree, generators, names } => {
                let elems: Vec<Element> = generators.iter().map(|p| Element::Perm(p.clone().into())).collect();
                let named = name_generators(elems, names)?;
                let perms = named.into_iter().zip(generators).map(|((n, _), p)| (n, p)).collect();
                Self::permutation(degree, perms)
            }
            GroupFile::Gf2auto { generators, names } => {
                if generators.iter().any(|g| g.aut.iter().any(|&l| l > 1)) {
                    return Err(Error::InvalidGroup("automorphism letters must be 0 or 1".into()));
                }
                let elems = generators
                    .into_iter()
                    .map(|g| {
                        Element::Hol(HolElement {
                            aut: AutWord::from_letters(&g.aut),
                            vector: Gf2Vector::from_indices(g.vector),
                        })
                    })
                    .collect();
                Self::gf2auto(name_generators(elems, names)?)
            }
        }
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = bound;
        self
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Cayley { .. } => "cayley",
            Kind::Permutation { .. } => "permutation",
            Kind::Gf2Auto => "gf2auto",
        }
    }

    /// Size of the ambient universe when it is given explicitly.
    pub fn universe_size(&self) -> Option<usize> {
        match &self.kind {
            Kind::Cayley { table, .. } => Some(table.len()),
            _ => None,
        }
    }

    pub fn generators(&self) -> &[(String, Element)] {
        &self.generators
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.generators.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn identity(&self) -> Element {
        match &self.kind {
            Kind::Cayley { identity, .. } => Element::Idx(*identity),
            Kind::Permutation { degree } => Element::Perm((0..*degree as u32).collect()),
            Kind::Gf2Auto => Element::Hol(HolElement::identity()),
        }
    }

    pub fn is_identity(&self, e: &Element) -> bool {
        match (&self.kind, e) {
            (Kind::Cayley { identity, .. }, Element::Idx(i)) => i == identity,
            (Kind::Permutation { .. }, Element::Perm(p)) => p.iter().enumerate().all(|(i, &x)| i as u32 == x),
            (Kind::Gf2Auto, Element::Hol(h)) => h.is_identity(),
            _ => false,
        }
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        match (&self.kind, a, b) {
            (Kind::Cayley { table, .. }, Element::Idx(x), Element::Idx(y)) => Element::Idx(table[*x as usize][*y as usize]),
            (Kind::Permutation { .. }, Element::Perm(p), Element::Perm(q)) => {
                Element::Perm(p.iter().map(|&i| q[i as usize]).collect())
            }
            (Kind::Gf2Auto, Element::Hol(x), Element::Hol(y)) => Element::Hol(x.mul(y)),
            _ => panic!("element does not belong to this {} group", self.kind_name()),
        }
    }

    pub fn inverse(&self, a: &Element) -> Element {
        match (&self.kind, a) {
            (Kind::Cayley { inverses, .. }, Element::Idx(x)) => Element::Idx(inverses[*x as usize]),
            (Kind::Permutation { .. }, Element::Perm(p)) => {
                let mut inv = vec![0u32; p.len()];
                for (i, &x) in p.iter().enumerate() {
                    inv[x as usize] = i as u32;
                }
                Element::Perm(inv.into())
            }
            (Kind::Gf2Auto, Element::Hol(h)) => Element::Hol(h.inverse()),
            _ => panic!("element does not belong to this {} group", self.kind_name()),
        }
    }

    /// `[a, b] = a⁻¹b⁻¹ab`.
    pub fn commutator(&self, a: &Element, b: &Element) -> Element {
        let ab = self.mul(a, b);
        let ba = self.mul(b, a);
        self.mul(&self.inverse(&ba), &ab)
    }

    /// `a^b = b⁻¹ab`.
    pub fn conjugate(&self, a: &Element, b: &Element) -> Element {
        self.mul(&self.mul(&self.inverse(b), a), b)
    }

    pub fn pow(&self, a: &Element, n: u64) -> Element {
        let mut acc = self.identity();
        let mut base = a.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    pub fn element_order(&self, a: &Element) -> Result<usize> {
        let mut acc = a.clone();
        for n in 1..=self.bound {
            if self.is_identity(&acc) {
                return Ok(n);
            }
            acc = self.mul(&acc, a);
        }
        Err(Error::BoundExceeded { what: "element order".into(), limit: self.bound })
    }

    /// Elements of the generators with the given indices.
    pub fn generator_elements(&self, indices: &[usize]) -> Result<Vec<Element>> {
        indices
            .iter()
            .map(|&i| {
                self.generators
                    .get(i)
                    .map(|(_, e)| e.clone())
                    .ok_or_else(|| Error::Input(format!("generator index {i} out of range")))
            })
            .collect()
    }

    /// Indices of the generators whose bits are set in `mask`.
    pub fn mask_elements(&self, mask: u64) -> Vec<Element> {
        self.generators
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, (_, e))| e.clone())
            .collect()
    }

    /// The subgroup generated by `subset`.
    pub fn subgroup_closure(&self, subset: &[Element]) -> Result<ElementSet> {
        let id = self.identity();
        let mut set = ElementSet {
            elements: vec![id.clone()],
            index: HashSet::from([id]),
            generators: Vec::new(),
        };
        for g in subset {
            self.extend(&mut set, g)?;
        }
        Ok(set)
    }

    pub fn closure_of_generators(&self) -> Result<ElementSet> {
        let gens: Vec<Element> = self.generators.iter().map(|(_, e)| e.clone()).collect();
        self.subgroup_closure(&gens)
    }

    /// Enlarges `set` to the subgroup generated by it and `g`. In a finite
    /// group, closure under right multiplication by generators suffices.
    fn extend(&self, set: &mut ElementSet, g: &Element) -> Result<()> {
        if set.contains(g) {
            return Ok(());
        }
        set.generators.push(g.clone());
        let mut queue: VecDeque<Element> = set.elements.iter().cloned().collect();
        while let Some(x) = queue.pop_front() {
            for s in &set.generators {
                let y = self.mul(&x, s);
                if !set.index.contains(&y) {
                    if set.elements.len() >= self.bound {
                        return Err(Error::BoundExceeded { what: "subgroup order".into(), limit: self.bound });
                    }
                    set.index.insert(y.clone());
                    set.elements.push(y.clone());
                    queue.push_back(y);
                }
            }
        }
        Ok(())
    }

    /// The normal closure of `seeds` under conjugation by `by`.
    pub fn normal_closure(&self, seeds: &[Element], by: &[Element]) -> Result<ElementSet> {
        let mut set = self.subgroup_closure(seeds)?;
        loop {
            let mut grew = false;
            let gens = set.generators.clone();
            for s in &gens {
                for h in by {
                    let c = self.conjugate(s, h);
                    if !set.contains(&c) {
                        self.extend(&mut set, &c)?;
                        grew = true;
                    }
                }
            }
            if !grew {
                return Ok(set);
            }
        }
    }

    /// `[N, H]` for a subgroup `N` normalized by `H = ⟨h_gens⟩`.
    pub fn commutator_subgroup(&self, n: &ElementSet, h_gens: &[Element]) -> Result<ElementSet> {
        let mut seeds = Vec::new();
        for x in n.elements() {
            for h in h_gens {
                seeds.push(self.commutator(x, h));
            }
        }
        // only keep seeds that enlarge what came before
        let mut acc = self.subgroup_closure(&[])?;
        for s in &seeds {
            self.extend(&mut acc, s)?;
        }
        self.normal_closure(acc.generators(), h_gens)
    }

    /// The lower central series `H⁰ = H ⊇ H¹ = [H, H] ⊇ …` of `⟨subset⟩`,
    /// stopping once a term repeats.
    pub fn lower_central_series(&self, subset: &[Element]) -> Result<Vec<ElementSet>> {
        let h = self.subgroup_closure(subset)?;
        let gens = h.generators().to_vec();
        let mut series = vec![h];
        loop {
            let last = series.last().unwrap();
            if last.is_trivial() {
                return Ok(series);
            }
            let next = self.commutator_subgroup(last, &gens)?;
            if next.len() == last.len() {
                return Ok(series);
            }
            series.push(next);
        }
    }

    /// Least `c` with `Hᶜ = 1`, where `H = ⟨subset⟩`.
    pub fn nilpotency_class(&self, subset: &[Element]) -> Result<usize> {
        let series = self.lower_central_series(subset)?;
        let last = series.last().unwrap();
        if last.is_trivial() {
            Ok(series.len() - 1)
        } else {
            Err(Error::NotNilpotent(format!("{subset:?}")))
        }
    }

    pub fn derived_series(&self, subset: &[Element]) -> Result<Vec<ElementSet>> {
        let mut series = vec![self.subgroup_closure(subset)?];
        loop {
            let last = series.last().unwrap();
            if last.is_trivial() {
                return Ok(series);
            }
            let gens = last.generators().to_vec();
            let next = self.commutator_subgroup(last, &gens)?;
            if next.len() == last.len() {
                return Ok(series);
            }
            series.push(next);
        }
    }

    pub fn derived_series_length(&self, subset: &[Element]) -> Result<usize> {
        let series = self.derived_series(subset)?;
        if series.last().unwrap().is_trivial() {
            Ok(series.len() - 1)
        } else {
            Err(Error::NotSolvable(format!("{subset:?}")))
        }
    }

    /// Evaluates a word given as `(generator index, exponent)` pairs.
    pub fn evaluate(&self, letters: &[(usize, i64)], values: &[Element]) -> Element {
        let mut acc = self.identity();
        for &(g, e) in letters {
            let base = if e < 0 { self.inverse(&values[g]) } else { values[g].clone() };
            acc = self.mul(&acc, &self.pow(&base, e.unsigned_abs()));
        }
        acc
    }
}
