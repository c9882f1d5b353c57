//! The pseudo-free locally nilpotent groups `Fr(M, c) = F_M / K(M, c)`,
//! where `K(M, c)` is normally generated by the terms `F_U^{c(U)}` of the
//! lower central series of the subgroups generated by finite `U ⊆ M`.
//!
//! Elements are reduced by collecting in `F / F^N` with `N = c(M)`. At
//! each weight `t` the image of `K ∩ F^{t-1}` in the layer is a lattice
//! spanned by left-normed brackets `[x_{i1}, …, x_{it}]` some prefix of
//! which already lies in `K`; the layer's coordinates are reduced modulo
//! that lattice in Hermite form, and the subtracted part is divided out by
//! an explicit element of `K`.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::collect::{Collector, NormalForm};
use crate::error::{Error, Result};
use crate::hall::{HallBasis, HallConfig};
use crate::lattice::Lattice;
use crate::magnus::{embed, TruncatedSeries};
use crate::report::{trial_rng, Check, Report, MAX_WITNESSES};
use crate::word::{Alphabet, Word};

/// Largest generator set accepted for a weight table.
pub const MAX_GENERATORS: usize = 16;

/// A monotone weight function `c` on the subsets of a finite alphabet,
/// stored as a table indexed by subset bitmask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFunction {
    alphabet: Alphabet,
    table: Vec<u32>,
    assigned: Vec<(u64, u32)>,
}

impl WeightFunction {
    /// Completes a partial table by max-closure: `c(U)` is the largest value
    /// assigned to a subset of `U`, and `c(∅) = 0`.
    pub fn new(alphabet: &Alphabet, assigned: &[(u64, u32)]) -> Result<WeightFunction> {
        let m = alphabet.len();
        if m > MAX_GENERATORS {
            return Err(Error::BoundExceeded { what: "preset alphabet size".into(), limit: MAX_GENERATORS });
        }
        let full = (1u64 << m) - 1;
        let mut given: BTreeMap<u64, u32> = BTreeMap::new();
        for &(mask, v) in assigned {
            if mask & !full != 0 {
                return Err(Error::InvalidPreset(format!("subset mask {mask:#b} outside alphabet")));
            }
            if mask == 0 && v != 0 {
                return Err(Error::InvalidPreset("the empty set must have weight 0".into()));
            }
            if let Some(old) = given.insert(mask, v) {
                if old != v {
                    return Err(Error::InvalidPreset(format!(
                        "subset {{{}}} assigned both {old} and {v}",
                        names_of(alphabet, mask).join(",")
                    )));
                }
            }
        }
        for g in 0..m {
            if !given.contains_key(&(1u64 << g)) {
                return Err(Error::MissingSingleton(alphabet.names()[g].clone()));
            }
        }
        let mut table = vec![0u32; 1usize << m];
        for (&mask, &v) in &given {
            table[mask as usize] = table[mask as usize].max(v);
        }
        // propagate upwards: c(U) = max over U minus one element
        for u in 1..table.len() {
            let mut best = table[u];
            let mut bits = u;
            while bits != 0 {
                let low = bits & bits.wrapping_neg();
                best = best.max(table[u ^ low]);
                bits ^= low;
            }
            table[u] = best;
        }
        for (&mask, &v) in &given {
            if table[mask as usize] > v {
                return Err(Error::Monotonicity(format!(
                    "c({{{}}}) = {v} but a subset has weight {}",
                    names_of(alphabet, mask).join(","),
                    table[mask as usize]
                )));
            }
        }
        let assigned = given.into_iter().collect();
        Ok(WeightFunction { alphabet: alphabet.clone(), table, assigned })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// `c(U)` for the subset with bitmask `mask`.
    pub fn value(&self, mask: u64) -> u32 {
        self.table[mask as usize]
    }

    pub fn full_mask(&self) -> u64 {
        (1u64 << self.alphabet.len()) - 1
    }

    pub fn mask_of<S: AsRef<str>>(&self, names: &[S]) -> Result<u64> {
        mask_of(&self.alphabet, names)
    }

    pub fn value_of<S: AsRef<str>>(&self, names: &[S]) -> Result<u32> {
        Ok(self.value(self.mask_of(names)?))
    }

    /// The explicitly assigned entries, in mask order.
    pub fn assigned(&self) -> &[(u64, u32)] {
        &self.assigned
    }
}

fn mask_of<S: AsRef<str>>(alphabet: &Alphabet, names: &[S]) -> Result<u64> {
    let mut mask = 0;
    for n in names {
        let g = alphabet
            .lookup(n.as_ref())
            .ok_or_else(|| Error::UnknownGenerator(n.as_ref().to_string()))?;
        mask |= 1u64 << g.0;
    }
    Ok(mask)
}

pub(crate) fn names_of(alphabet: &Alphabet, mask: u64) -> Vec<String> {
    (0..alphabet.len()).filter(|g| mask >> g & 1 == 1).map(|g| alphabet.names()[g].clone()).collect()
}

/// On-disk preset description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresetFile {
    pub generators: Vec<String>,
    pub weights: Vec<WeightEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub subset: Vec<String>,
    pub value: u32,
}

/// A validated `(M, c)` together with the machinery to compute in
/// `Fr(M, c)`.
#[derive(Clone, Debug)]
pub struct Preset {
    weights: WeightFunction,
    class: usize,
    basis: Arc<HallBasis>,
    collector: Arc<Collector>,
    layers: Arc<OnceLock<Result<Vec<KLayer>>>>,
}

/// The image of `K` in one weight layer, with an element of `K` realizing
/// each Hermite row.
#[derive(Clone, Debug)]
struct KLayer {
    lattice: Lattice,
    elements: Vec<TruncatedSeries>,
}

/// A normal form whose layers are reduced modulo the image of `K`. When
/// the `K`-basic commutators of a layer span that image, this just means
/// their coordinates are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedNormalForm(NormalForm);

impl ReducedNormalForm {
    pub fn normal_form(&self) -> &NormalForm {
        &self.0
    }

    pub fn into_inner(self) -> NormalForm {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn exponents(&self) -> &[BigInt] {
        self.0.exponents()
    }

    pub fn to_word(&self) -> Word {
        self.0.to_word()
    }
}

/// Validates a partial weight table given by generator names.
pub fn validate_preset<S: AsRef<str>>(
    generators: &[S],
    weights: &[(Vec<S>, u32)],
) -> Result<Preset> {
    let alphabet = Alphabet::new(generators.iter().map(|s| s.as_ref().to_string()))?;
    let mut assigned = Vec::with_capacity(weights.len());
    for (subset, v) in weights {
        assigned.push((mask_of(&alphabet, subset)?, *v));
    }
    Preset::new(WeightFunction::new(&alphabet, &assigned)?)
}

impl Preset {
    pub fn new(weights: WeightFunction) -> Result<Preset> {
        let class = weights.value(weights.full_mask()) as usize;
        let working = class.max(1);
        let cfg = HallConfig::default();
        let basis = HallBasis::over(weights.alphabet(), working + 1, &cfg)?;
        let w = weights.clone();
        let basis = Arc::new(basis.with_k_basic_flags(move |mask| w.value(mask) as usize));
        let collector = Arc::new(Collector::new(basis.clone(), working)?);
        Ok(Preset { weights, class, basis, collector, layers: Arc::new(OnceLock::new()) })
    }

    pub fn from_file(file: &PresetFile) -> Result<Preset> {
        let weights: Vec<(Vec<&str>, u32)> = file
            .weights
            .iter()
            .map(|e| (e.subset.iter().map(String::as_str).collect(), e.value))
            .collect();
        let gens: Vec<&str> = file.generators.iter().map(String::as_str).collect();
        validate_preset(&gens, &weights)
    }

    pub fn from_json(text: &str) -> Result<Preset> {
        let file: PresetFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidPreset(format!("preset JSON: {e}")))?;
        Preset::from_file(&file)
    }

    pub fn to_file(&self) -> PresetFile {
        let a = self.alphabet();
        PresetFile {
            generators: a.names().to_vec(),
            weights: self
                .weights
                .assigned()
                .iter()
                .filter(|(m, _)| *m != 0)
                .map(|&(m, v)| WeightEntry { subset: names_of(a, m), value: v })
                .collect(),
        }
    }

    pub fn weights(&self) -> &WeightFunction {
        &self.weights
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.weights.alphabet()
    }

    /// `N = c(M)`.
    pub fn class_bound(&self) -> usize {
        self.class
    }

    /// The class at which words are collected, `max(N, 1)`.
    pub fn working_class(&self) -> usize {
        self.collector.class()
    }

    /// Hall basis up to weight `working_class + 1`, with `K`-basic flags.
    pub fn basis(&self) -> &Arc<HallBasis> {
        &self.basis
    }

    pub fn collector(&self) -> &Collector {
        &self.collector
    }

    pub fn k_basic_flags(&self) -> &[bool] {
        self.basis.k_basic().expect("preset basis carries flags")
    }

    /// The preset on a subset of the generators with `c` restricted, which
    /// is below `self` in the order on presets.
    pub fn restrict<S: AsRef<str>>(&self, names: &[S]) -> Result<Preset> {
        let a = Alphabet::new(names.iter().map(|n| n.as_ref().to_string()))?;
        let mut assigned = Vec::new();
        for m in 1..(1u64 << a.len()) {
            assigned.push((m, self.weights.value_of(&names_of(&a, m))?));
        }
        Preset::new(WeightFunction::new(&a, &assigned)?)
    }

    pub fn parse(&self, text: &str) -> Result<Word> {
        Word::parse(text, self.alphabet())
    }

    /// Whether the left-normed bracket on `letters` lies in `K` because a
    /// prefix of length `m` spans a set `U` with `c(U) < m`.
    pub fn prefix_in_k(&self, letters: &[usize]) -> bool {
        let mut mask = 0u64;
        letters.iter().enumerate().any(|(m, &g)| {
            mask |= 1 << g;
            (self.weights.value(mask) as usize) < m + 1
        })
    }

    /// Qualifying letter sequences of length `t`, as offsets into a degree-`t`
    /// series layer.
    fn k_monomials(&self, t: usize) -> Vec<(usize, Vec<usize>)> {
        let r = self.alphabet().len();
        let mut out = Vec::new();
        for off in 0..r.pow(t as u32) {
            let mut letters = vec![0; t];
            let mut x = off;
            for slot in letters.iter_mut().rev() {
                *slot = x % r;
                x /= r;
            }
            if self.prefix_in_k(&letters) {
                out.push((off, letters));
            }
        }
        out
    }

    /// The image of `K ∩ F^{t-1}` in the weight-`t` layer, in the Hall
    /// coordinates of that layer. `collector` must reach class `t`.
    pub fn k_layer(&self, collector: &Collector, t: usize) -> Lattice {
        let range = self.basis.layer(t);
        let dynkin = collector.dynkin_layer(t);
        let gens = self
            .k_monomials(t)
            .into_iter()
            .map(|(off, _)| range.clone().map(|b| dynkin[off].coeff(b).to_bigint()).collect());
        Lattice::spanned_by(range.len(), gens)
    }

    fn k_layers(&self) -> Result<&[KLayer]> {
        let layers = self.layers.get_or_init(|| {
            let c = &self.collector;
            let (r, n) = (self.alphabet().len(), c.class());
            (1..=n)
                .map(|t| {
                    let monomials = self.k_monomials(t);
                    let lattice = self.k_layer(c, t);
                    let mut cache: BTreeMap<usize, TruncatedSeries> = BTreeMap::new();
                    let mut elements = Vec::with_capacity(lattice.rank());
                    for i in 0..lattice.rank() {
                        let mut e = TruncatedSeries::one(r, n);
                        for (g, k) in lattice.combination(i) {
                            let base = cache
                                .entry(*g)
                                .or_insert_with(|| left_normed_series(r, n, &monomials[*g].1));
                            e = e.mul(&base.pow(k));
                        }
                        elements.push(e);
                    }
                    Ok(KLayer { lattice, elements })
                })
                .collect()
        });
        layers.as_deref().map_err(Clone::clone)
    }

    /// Canonical representative of the coset `wK` in `F / F^N`.
    pub fn nf_fr(&self, w: &Word) -> Result<ReducedNormalForm> {
        if !w.alphabet().same_as(self.alphabet()) {
            return Err(Error::AlphabetMismatch(format!(
                "word over {:?}, preset over {:?}",
                w.alphabet(),
                self.alphabet()
            )));
        }
        self.reduce_series(embed(w, self.working_class()))
    }

    fn reduce_series(&self, mut s: TruncatedSeries) -> Result<ReducedNormalForm> {
        let c = &self.collector;
        let layers = self.k_layers()?;
        let mut out = Vec::with_capacity(c.len());
        for (t, layer) in (1..=c.class()).zip(layers) {
            let e = c.layer_coords(&s, t)?;
            let (rho, q) = layer.lattice.reduce(&e);
            for (b, x) in self.basis.layer(t).zip(&rho) {
                if !x.is_zero() {
                    s = c.basic_power(b, &-x).mul(&s);
                }
            }
            for (k, x) in layer.elements.iter().zip(&q) {
                if !x.is_zero() {
                    s = s.mul(&k.pow(&-x));
                }
            }
            if s.layer(t).iter().any(|x| !x.is_zero()) {
                return Err(Error::Internal(format!("layer {t} did not cancel")));
            }
            out.extend(rho);
        }
        Ok(ReducedNormalForm(c.nf(out)))
    }

    /// `nf_fr(w^k)` without expanding the word.
    pub fn nf_fr_power(&self, w: &Word, k: &BigInt) -> Result<ReducedNormalForm> {
        if !w.alphabet().same_as(self.alphabet()) {
            return Err(Error::AlphabetMismatch("word and preset alphabets differ".into()));
        }
        self.reduce_series(embed(w, self.working_class()).pow(k))
    }

    /// Random elements of `K(M, c)`.
    pub fn relator_generators(&self, samples: usize, length_bound: usize, seed: u64) -> Vec<Relator> {
        (0..samples)
            .map(|i| {
                let mut rng = trial_rng(seed, "relator", i as u64);
                let m = self.alphabet().len();
                let mask = if m == 0 { 0 } else { rng.gen_range(1..(1u64 << m)) };
                self.relator_on(mask, length_bound, &mut rng)
            })
            .collect()
    }

    /// `[k_0, …, k_n]^f` with `n = c(U)`, `k_i ∈ F_U` and `f ∈ F` random.
    pub fn relator_on<R: Rng + ?Sized>(&self, mask: u64, length_bound: usize, rng: &mut R) -> Relator {
        let a = self.alphabet();
        let n = self.weights.value(mask) as usize;
        let parts: Vec<Word> = (0..=n).map(|_| Word::random(a, mask, length_bound, rng)).collect();
        let f = Word::random(a, self.weights.full_mask(), length_bound, rng);
        let core = Word::left_normed(&parts).expect("nonempty");
        let word = core.conjugate(&f).expect("same alphabet");
        Relator { subset: names_of(a, mask), weight: n, word }
    }
}

/// Magnus image of the group commutator `[x_{i1}, …, x_{it}]`.
fn left_normed_series(r: usize, n: usize, letters: &[usize]) -> TruncatedSeries {
    let mut acc = TruncatedSeries::generator(r, n, letters[0]);
    for &g in &letters[1..] {
        let y = TruncatedSeries::generator(r, n, g);
        acc = acc.inverse().mul(&y.inverse()).mul(&acc).mul(&y);
    }
    acc
}

/// A sampled element of `K(M, c)` and the subset it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relator {
    pub subset: Vec<String>,
    /// `c(U)`; the commutator has `weight + 1` entries.
    pub weight: usize,
    pub word: Word,
}

/// Examines the image of `K ∩ F^n` in the weight-`(n+1)` layer: sampled
/// elements must vanish below it and fall in the span of the `K`-basic
/// commutators, the exact image must be a direct summand, and the `K`-basic
/// commutators must span it.
pub fn verify_summand(p: &Preset, n: usize, samples: usize, seed: u64) -> Result<Report> {
    let mut report = Report::new(format!("summand layer {n}"), seed);
    if n == 0 || n > p.class_bound() {
        return Err(Error::Input(format!("layer {n} outside 1..={}", p.class_bound())));
    }
    let flags = p.k_basic_flags();
    let collector = Collector::new(p.basis().clone(), n + 1)?;
    let layer = p.basis().layer(n + 1);
    let lattice = p.k_layer(&collector, n + 1);
    let a = p.alphabet();
    let full = p.weights.full_mask();
    let masks: Vec<u64> = (1..=full).filter(|&m| p.weights.value(m) as usize <= n).collect();

    let mut nontrivial = 0;
    let mut lower_bad = Vec::new();
    let mut outside = Vec::new();
    let mut off_basic = Vec::new();
    let mut prev: Option<Word> = None;
    for i in 0..samples {
        if masks.is_empty() {
            break;
        }
        let mut rng = trial_rng(seed, "summand", i as u64);
        let mask = masks[rng.gen_range(0..masks.len())];
        let g = match i % 4 {
            3 => {
                // a relator for U pushed down by commutators with arbitrary words
                let m = p.weights.value(mask) as usize;
                let mut parts: Vec<Word> = (0..=m).map(|_| Word::random(a, mask, 4, &mut rng)).collect();
                parts.extend((m..n).map(|_| Word::random(a, full, 3, &mut rng)));
                Word::left_normed(&parts)?
            }
            k => {
                let parts: Vec<Word> = (0..=n).map(|_| Word::random(a, mask, 4, &mut rng)).collect();
                let g = Word::left_normed(&parts)?;
                match (k, &prev) {
                    (1, _) => g.conjugate(&Word::random(a, full, 4, &mut rng))?,
                    (2, Some(q)) => g.multiply(q)?,
                    _ => g,
                }
            }
        };
        let nf = collector.normal_form(&g)?;
        if nf.exponents()[..layer.start].iter().any(|e| !e.is_zero()) {
            lower_bad.push(g.to_string());
        }
        let top = &nf.exponents()[layer.clone()];
        if top.iter().any(|e| !e.is_zero()) {
            nontrivial += 1;
        }
        if !lattice.contains(top) {
            outside.push(g.to_string());
        }
        let off: Vec<String> = layer
            .clone()
            .zip(top)
            .filter(|(b, e)| !e.is_zero() && !flags[*b])
            .map(|(b, _)| p.basis().bracket_string(b))
            .collect();
        if !off.is_empty() {
            off_basic.push(format!("{g} -> {}", off.join(" ")));
        }
        if i % 4 != 3 {
            prev = Some(g);
        }
    }
    let taken = |v: Vec<String>| v.into_iter().take(MAX_WITNESSES).collect();
    report.push(Check::new("lower-layers-vanish", lower_bad.is_empty(), samples).witnesses(taken(lower_bad)));
    report.push(Check::new("in-k-layer", outside.is_empty(), samples).witnesses(taken(outside)));
    report.push(
        Check::new("k-basic-support", off_basic.is_empty(), samples)
            .detail(format!("{nontrivial} samples nonzero in weight {}", n + 1))
            .witnesses(taken(off_basic)),
    );

    let sat = lattice.saturation_witness();
    report.push(
        Check::new("direct-summand", sat.is_none(), 1)
            .detail(format!("rank {} in a layer of {}", lattice.rank(), layer.len()))
            .witnesses(sat.map(|(_, k)| vec![format!("torsion of order {k} in the quotient")]).unwrap_or_default()),
    );
    let missing: Vec<String> = layer
        .clone()
        .enumerate()
        .filter(|&(j, b)| {
            let unit: Vec<BigInt> = (0..layer.len()).map(|i| BigInt::from((i == j) as i64)).collect();
            flags[b] != lattice.contains(&unit)
        })
        .map(|(_, b)| p.basis().bracket_string(b))
        .collect();
    let spans = missing.is_empty() && lattice.rank() == layer.clone().filter(|&b| flags[b]).count();
    report.push(
        Check::new("k-basic-spans-layer", spans, 1)
            .detail("the K-basic commutators form a basis of the layer image")
            .witnesses(taken(missing)),
    );
    if nontrivial == 0 {
        report.vacuous = true;
        report.note("every sample was trivial in this layer");
    }
    Ok(report)
}

/// Samples words with nonzero reduced form and checks their small powers
/// stay nonzero.
pub fn verify_torsion_free(p: &Preset, trials: usize, max_power: u32, seed: u64) -> Result<Report> {
    let mut report = Report::new("torsion-free", seed);
    let a = p.alphabet();
    let mut tested = 0;
    let mut skipped = 0;
    let mut bad = Vec::new();
    for i in 0..trials {
        let mut rng = trial_rng(seed, "torsion", i as u64);
        let w = Word::random(a, p.weights.full_mask(), 8, &mut rng);
        if p.nf_fr(&w)?.is_zero() {
            skipped += 1;
            continue;
        }
        tested += 1;
        for k in 2..=max_power {
            if p.nf_fr_power(&w, &BigInt::from(k))?.is_zero() {
                bad.push(format!("({w})^{k}"));
                break;
            }
        }
    }
    report.push(
        Check::new("powers-nonzero", bad.is_empty(), tested)
            .detail(format!("{skipped} samples reduced to the identity and were skipped"))
            .witnesses(bad.into_iter().take(MAX_WITNESSES).collect()),
    );
    report.vacuous = tested == 0;
    Ok(report)
}

/// Whether `(M1, c1) ≤ (M2, c2)`: `M1 ⊆ M2` and `c2` agrees with `c1` on
/// subsets of `M1`.
pub fn check_order(small: &Preset, big: &Preset) -> Result<()> {
    let a1 = small.alphabet();
    let a2 = big.alphabet();
    let embed_mask = |m: u64| -> u64 {
        names_of(a1, m)
            .iter()
            .map(|n| 1u64 << a2.lookup(n).expect("checked").0)
            .fold(0, |x, y| x | y)
    };
    for n in a1.names() {
        if a2.lookup(n).is_none() {
            return Err(Error::OrderViolation(format!("generator `{n}` missing from the larger preset")));
        }
    }
    for m in 0..=small.weights.full_mask() {
        let c1 = small.weights.value(m);
        let c2 = big.weights.value(embed_mask(m));
        if c1 != c2 {
            return Err(Error::OrderViolation(format!(
                "c({{{}}}) is {c1} in the smaller preset but {c2} in the larger",
                names_of(a1, m).join(",")
            )));
        }
    }
    Ok(())
}

/// Checks on samples that `Fr(M2, c2) = D ⋊ ι(Fr(M1, c1))` with `h`
/// killing the generators outside `M1` and `ι` the inclusion.
pub fn split(p2: &Preset, p1: &Preset, samples: usize, seed: u64) -> Result<Report> {
    check_order(p1, p2)?;
    let mut report = Report::new("split", seed);
    let a1 = p1.alphabet();
    let a2 = p2.alphabet();
    let h = |w: &Word| w.project(a1);
    let iota = |w: &Word| w.include(a2);

    let mut well_defined = Vec::new();
    let mut into_k1 = Vec::new();
    for (i, r) in p2.relator_generators(samples, 4, seed).into_iter().enumerate() {
        if !p1.nf_fr(&h(&r.word))?.is_zero() {
            into_k1.push(r.word.to_string());
        }
        let mut rng = trial_rng(seed, "split-wd", i as u64);
        let w = Word::random(a2, p2.weights.full_mask(), 6, &mut rng);
        if p1.nf_fr(&h(&w.multiply(&r.word)?))? != p1.nf_fr(&h(&w))? {
            well_defined.push(format!("{w} * {}", r.word));
        }
    }
    report.push(
        Check::new("relators-map-into-K1", into_k1.is_empty(), samples)
            .witnesses(into_k1.into_iter().take(MAX_WITNESSES).collect()),
    );
    report.push(
        Check::new("projection-well-defined", well_defined.is_empty(), samples)
            .witnesses(well_defined.into_iter().take(MAX_WITNESSES).collect()),
    );

    let compatible = order_compatible(a1, a2);
    let mut retract = Vec::new();
    let mut kernel = Vec::new();
    let mut faithful = Vec::new();
    for i in 0..samples {
        let mut rng = trial_rng(seed, "split", i as u64);
        let u = Word::random(a1, p1.weights.full_mask(), 6, &mut rng);
        let nu = p1.nf_fr(&u)?;
        if p1.nf_fr(&h(&iota(&u)?))? != nu {
            retract.push(u.to_string());
        }
        let nu2 = p2.nf_fr(&iota(&u)?)?;
        let same = if compatible {
            same_coordinates(&nu, &nu2)
        } else {
            nu.is_zero() == nu2.is_zero()
        };
        if !same {
            faithful.push(u.to_string());
        }
        let g = Word::random(a2, p2.weights.full_mask(), 6, &mut rng);
        let d = g.multiply(&iota(&h(&g))?.invert())?;
        if !p1.nf_fr(&h(&d))?.is_zero() {
            kernel.push(g.to_string());
        }
    }
    report.push(
        Check::new("h-after-iota-is-identity", retract.is_empty(), samples)
            .witnesses(retract.into_iter().take(MAX_WITNESSES).collect()),
    );
    report.push(
        Check::new("complement-in-kernel", kernel.is_empty(), samples)
            .witnesses(kernel.into_iter().take(MAX_WITNESSES).collect()),
    );
    report.push(
        Check::new("section-faithful", faithful.is_empty(), samples)
            .detail(if compatible { "coordinates compared" } else { "triviality compared" })
            .witnesses(faithful.into_iter().take(MAX_WITNESSES).collect()),
    );
    Ok(report)
}

/// True when the generators of `small` appear in `big` in the same relative
/// order, so the basis of `small` is a subsequence of the basis of `big`.
fn order_compatible(small: &Alphabet, big: &Alphabet) -> bool {
    let idx: Vec<u32> = small.names().iter().filter_map(|n| big.lookup(n).map(|g| g.0)).collect();
    idx.len() == small.len() && idx.windows(2).all(|w| w[0] < w[1])
}

fn same_coordinates(u: &ReducedNormalForm, v: &ReducedNormalForm) -> bool {
    let bu = u.normal_form().basis();
    let bv = v.normal_form().basis();
    let mut by_name: BTreeMap<String, &BigInt> = BTreeMap::new();
    for (i, e) in u.exponents().iter().enumerate() {
        if !e.is_zero() {
            by_name.insert(bu.bracket_string(i), e);
        }
    }
    let mut seen = 0;
    for (i, e) in v.exponents().iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        match by_name.get(&bv.bracket_string(i)) {
            Some(x) if *x == e => seen += 1,
            _ => return false,
        }
    }
    seen == by_name.len()
}

/// A preset containing each input as an initial segment-free sub-preset.
#[derive(Clone, Debug)]
pub struct JointEmbedding {
    pub preset: Preset,
    /// Generator names of each component inside the joint alphabet.
    pub components: Vec<Vec<String>>,
}

impl JointEmbedding {
    /// Component `i` renamed into the joint alphabet, as a preset of its own.
    pub fn component(&self, i: usize) -> Result<Preset> {
        let w = self.preset.weights();
        let names = &self.components[i];
        let a = Alphabet::new(names.iter().cloned())?;
        let full = w.mask_of(names)?;
        let mut assigned = Vec::new();
        for m in 1..(1u64 << names.len()) {
            let joint = w.mask_of(&names_of(&a, m))?;
            debug_assert_eq!(joint & !full, 0);
            assigned.push((m, w.value(joint)));
        }
        Preset::new(WeightFunction::new(&a, &assigned)?)
    }

    /// Moves a word over component `i`'s original alphabet into the joint one.
    pub fn lift(&self, i: usize, w: &Word) -> Result<Word> {
        let names = &self.components[i];
        let src = w.alphabet();
        if src.len() != names.len() {
            return Err(Error::AlphabetMismatch("word does not belong to this component".into()));
        }
        let target = self.preset.alphabet();
        let images: Vec<Word> = names
            .iter()
            .map(|n| Word::generator(target, target.lookup(n).expect("component name")))
            .collect();
        w.substitute(&images)
    }
}

/// Disjoint union of presets with `c(U) = Σ c_i(U ∩ M_i)`. When two inputs
/// share a generator name, every generator is renamed `p{i}_{name}`.
pub fn joint_embed(presets: &[Preset]) -> Result<JointEmbedding> {
    let mut names: Vec<String> = Vec::new();
    for p in presets {
        names.extend(p.alphabet().names().iter().cloned());
    }
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    let rename = sorted.len() != names.len();
    let mut components = Vec::new();
    let mut all = Vec::new();
    for (i, p) in presets.iter().enumerate() {
        let c: Vec<String> = p
            .alphabet()
            .names()
            .iter()
            .map(|n| if rename { format!("p{i}_{n}") } else { n.clone() })
            .collect();
        all.extend(c.iter().cloned());
        components.push(c);
    }
    let alphabet = Alphabet::new(all)?;
    if alphabet.len() > MAX_GENERATORS {
        return Err(Error::BoundExceeded { what: "joint alphabet size".into(), limit: MAX_GENERATORS });
    }
    let mut offsets = Vec::new();
    let mut off = 0;
    for p in presets {
        offsets.push(off);
        off += p.alphabet().len();
    }
    let mut assigned = Vec::new();
    for u in 1..(1u64 << alphabet.len()) {
        let v: u32 = presets
            .iter()
            .zip(&offsets)
            .map(|(p, &o)| p.weights.value((u >> o) & p.weights.full_mask()))
            .sum();
        assigned.push((u, v));
    }
    let preset = Preset::new(WeightFunction::new(&alphabet, &assigned)?)?;
    Ok(JointEmbedding { preset, components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn closure_and_errors() {
        let p = validate_preset(&["a", "b"], &[(vec!["a"], 1), (vec!["b"], 1), (vec!["a", "b"], 2)])
            .unwrap();
        assert_eq!(p.class_bound(), 2);
        assert!(p.k_basic_flags()[..p.basis().prefix_len(2)].iter().all(|f| !f));

        let e = validate_preset(&["a", "b"], &[(vec!["a"], 2), (vec!["b"], 2), (vec!["a", "b"], 1)]);
        assert!(matches!(e, Err(Error::Monotonicity(_))));
        let e = validate_preset(&["a", "b"], &[(vec!["a"], 1)]);
        assert_eq!(e.unwrap_err(), Error::MissingSingleton("b".into()));

        let p = validate_preset(
            &["a", "b", "d"],
            &[(vec!["a"], 1), (vec!["b"], 1), (vec!["d"], 1), (vec!["a", "b"], 1), (vec!["a", "b", "d"], 2)],
        )
        .unwrap();
        let w = p.weights();
        assert_eq!(w.value_of(&["a", "d"]).unwrap(), 1);
        assert_eq!(w.value_of(&["b", "d"]).unwrap(), 1);
        assert_eq!(w.value(0), 0);
        assert_eq!(p.class_bound(), 2);
    }

    #[test]
    fn p2_reductions() {
        let p = fixtures::preset("p2").unwrap();
        assert!(p.nf_fr(&p.parse("[b,a]").unwrap()).unwrap().is_zero());
        let nf = p.nf_fr(&p.parse("b a").unwrap()).unwrap();
        let basis = p.basis();
        for (i, e) in nf.exponents().iter().enumerate() {
            let expect = if i < 2 { 1 } else { 0 };
            assert_eq!(*e, BigInt::from(expect), "{}", basis.bracket_string(i));
        }
        let nf = p.nf_fr(&p.parse("[d,a]^3").unwrap()).unwrap();
        let da = (0..basis.len()).find(|&i| basis.bracket_string(i) == "[d,a]").unwrap();
        assert_eq!(*nf.exponents().get(da).unwrap(), BigInt::from(3));
    }

    #[test]
    fn free_preset_has_no_elimination() {
        let p = fixtures::preset("p1").unwrap();
        let c = Collector::new(p.basis().clone(), 2).unwrap();
        let w = p.parse("b a^2 b^-1 a").unwrap();
        assert_eq!(p.nf_fr(&w).unwrap().into_inner(), c.normal_form(&w).unwrap());
    }

    #[test]
    fn relators_vanish() {
        for name in fixtures::PRESETS {
            let p = fixtures::preset(name).unwrap();
            for r in p.relator_generators(60, 4, 7) {
                assert!(p.nf_fr(&r.word).unwrap().is_zero(), "{name}: {}", r.word);
            }
        }
    }

    #[test]
    fn relator_shapes() {
        let p = fixtures::preset("p2").unwrap();
        let mut rng = trial_rng(1, "t", 0);
        let a = p.weights().mask_of(&["a"]).unwrap();
        for _ in 0..20 {
            assert!(p.relator_on(a, 5, &mut rng).word.is_identity());
        }
        let full = p.weights().full_mask();
        assert_eq!(p.relator_on(full, 3, &mut rng).weight, 2);
    }

    #[test]
    fn summand_reports() {
        let p2 = fixtures::preset("p2").unwrap();
        let r = verify_summand(&p2, 1, 60, 3).unwrap();
        assert!(r.passed() && !r.vacuous, "{r:?}");
        let r = verify_summand(&p2, 2, 30, 3).unwrap();
        assert!(r.passed(), "{r:?}");
        let p1 = fixtures::preset("p1").unwrap();
        let r = verify_summand(&p1, 1, 30, 3).unwrap();
        assert!(r.passed() && r.vacuous, "{r:?}");
    }

    #[test]
    fn layer_image_exceeds_k_basic_span() {
        // c({a}) = 0 puts a, hence [b,a], into K, but [b,a] is not K-basic
        let p3 = fixtures::preset("p3").unwrap();
        let r = verify_summand(&p3, 1, 20, 0).unwrap();
        assert!(r.check("direct-summand").unwrap().status.passed());
        assert!(!r.check("k-basic-spans-layer").unwrap().status.passed());
        assert!(p3.nf_fr(&p3.parse("[b,a]").unwrap()).unwrap().is_zero());
        assert!(!p3.nf_fr(&p3.parse("b").unwrap()).unwrap().is_zero());

        // [[b,a,a],d] lies in K for P4 but no weight-4 K-basic commutator has
        // full support
        let p4 = fixtures::preset("p4").unwrap();
        let r = verify_summand(&p4, 3, 80, 0).unwrap();
        assert!(r.check("direct-summand").unwrap().status.passed());
        assert!(r.check("in-k-layer").unwrap().status.passed());
        assert!(!r.check("k-basic-spans-layer").unwrap().status.passed());
        assert!(p4.nf_fr(&p4.parse("[[b,a,a],d]").unwrap()).unwrap().is_zero());
        for n in 1..3 {
            assert!(verify_summand(&p4, n, 40, 0).unwrap().passed());
        }
    }

    #[test]
    fn torsion_free_samples() {
        for name in fixtures::PRESETS {
            let p = fixtures::preset(name).unwrap();
            let r = verify_torsion_free(&p, 20, 8, 11).unwrap();
            assert!(r.passed(), "{name}: {r:?}");
        }
    }

    #[test]
    fn split_p2_over_ab() {
        let p2 = fixtures::preset("p2").unwrap();
        let p1 = validate_preset(&["a", "b"], &[(vec!["a"], 1), (vec!["b"], 1), (vec!["a", "b"], 1)])
            .unwrap();
        let r = split(&p2, &p1, 40, 5).unwrap();
        assert!(r.passed(), "{r:?}");
        let r = split(&p2, &p2, 20, 5).unwrap();
        assert!(r.passed(), "{r:?}");
        let p1free = fixtures::preset("p1").unwrap();
        assert!(matches!(split(&p2, &p1free, 5, 0), Err(Error::OrderViolation(_))));
    }

    #[test]
    fn joint_sum_rule() {
        let p1 = fixtures::preset("p1").unwrap();
        let p2 = fixtures::preset("p2").unwrap();
        let j = joint_embed(&[p1.clone(), p2.clone()]).unwrap();
        assert_eq!(j.preset.class_bound(), 4);
        assert_eq!(j.components[0], ["p0_a", "p0_b"]);
        for (i, p) in [&p1, &p2].into_iter().enumerate() {
            let c = j.component(i).unwrap();
            for m in 0..=p.weights().full_mask() {
                assert_eq!(c.weights().value(m), p.weights().value(m));
            }
        }
        let a = validate_preset(&["a"], &[(vec!["a"], 1)]).unwrap();
        let b = validate_preset(&["b"], &[(vec!["b"], 1)]).unwrap();
        let j = joint_embed(&[a, b]).unwrap();
        assert_eq!(j.preset.weights().value_of(&["a", "b"]).unwrap(), 2);
    }
}
