//! Laws, descending chains of law sets, and the locally-`V` analogue of the
//! pseudo-free groups: relators are instances of the laws of `T_{c(U)}`
//! over `F_U` instead of left-normed commutators.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::blackbox::{BlackBoxGroup, Element};
use crate::epi::MAX_EPI_GENERATORS;
use crate::error::{Error, Result};
use crate::pseudofree::{check_order, Preset, WeightFunction};
use crate::report::{trial_rng, Check, Report, MAX_WITNESSES};
use crate::word::{Alphabet, Word};

/// Chains are examined, and relators drawn, up to this index.
pub const CHAIN_CAP: usize = 8;
/// Assignments tried exhaustively for laws without a recognized shape.
pub const ASSIGNMENT_LIMIT: u128 = 1_000_000;
const MAX_SAMPLED_ARITY: usize = 16;

/// How a law was built; recognized shapes are evaluated through value sets
/// instead of tuple enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Shape {
    /// `[X_0, …, X_m]`.
    LeftNormed(usize),
    /// `δ_m`, with `δ_0 = X_0` and `δ_{m+1} = [δ_m, δ_m']` on fresh variables.
    Derived(usize),
    /// `X_0^e`.
    Power(u64),
    General,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Law {
    word: Word,
    shape: Shape,
}

impl Law {
    pub fn left_normed(m: usize) -> Law {
        let a = Alphabet::variables(m + 1);
        let parts: Vec<Word> = (0..=m).map(|i| Word::generator(&a, crate::word::GeneratorId(i as u32))).collect();
        Law { word: Word::left_normed(&parts).expect("nonempty"), shape: Shape::LeftNormed(m) }
    }

    pub fn derived(m: usize) -> Law {
        let n = 1usize << m;
        let a = Alphabet::variables(n);
        let mut layer: Vec<Word> = (0..n).map(|i| Word::generator(&a, crate::word::GeneratorId(i as u32))).collect();
        while layer.len() > 1 {
            layer = layer.chunks(2).map(|p| p[0].commutator(&p[1]).expect("same alphabet")).collect();
        }
        Law { word: layer.pop().unwrap(), shape: Shape::Derived(m) }
    }

    pub fn power(e: u64) -> Law {
        let a = Alphabet::variables(1);
        let w = Word::generator(&a, crate::word::GeneratorId(0)).pow(&e.into());
        Law { word: w, shape: Shape::Power(e) }
    }

    /// A law written over `X0, X1, …`; the arity is one more than the largest
    /// index used.
    pub fn parse(text: &str) -> Result<Law> {
        const WIDE: usize = 64;
        let w = Word::parse(text, &Alphabet::variables(WIDE))?;
        let arity = if w.is_identity() { 1 } else { 64 - w.support_mask().leading_zeros() as usize };
        Ok(Law { word: w.project(&Alphabet::variables(arity)), shape: Shape::General })
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn arity(&self) -> usize {
        self.word.alphabet().len()
    }

    /// `τ(w_0, …, w_{n_τ})`.
    pub fn instantiate(&self, args: &[Word]) -> Result<Word> {
        if args.len() != self.arity() {
            return Err(Error::Arity { expected: self.arity(), got: args.len() });
        }
        self.word.substitute(args)
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.word)
    }
}

impl fmt::Debug for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `τ(g_0, …)` in `G`.
pub fn evaluate_law(law: &Law, g: &BlackBoxGroup, values: &[Element]) -> Result<Element> {
    if values.len() != law.arity() {
        return Err(Error::Arity { expected: law.arity(), got: values.len() });
    }
    Ok(law.word.evaluate(values, g.identity(), |a, b| g.mul(a, b), |a| g.inverse(a)))
}

/// Whether `τ` vanishes under every assignment from `elems`.
pub fn law_holds(law: &Law, g: &BlackBoxGroup, elems: &[Element]) -> Result<bool> {
    let all_trivial = |s: &HashSet<Element>| s.iter().all(|e| g.is_identity(e));
    match law.shape {
        Shape::LeftNormed(m) => {
            let mut vals: HashSet<Element> = elems.iter().cloned().collect();
            for _ in 0..m {
                vals = vals.iter().flat_map(|v| elems.iter().map(move |e| (v, e))).map(|(v, e)| g.commutator(v, e)).collect();
            }
            Ok(all_trivial(&vals))
        }
        Shape::Derived(m) => {
            let mut vals: HashSet<Element> = elems.iter().cloned().collect();
            for _ in 0..m {
                let v: Vec<Element> = vals.into_iter().collect();
                vals = v.iter().flat_map(|a| v.iter().map(move |b| (a, b))).map(|(a, b)| g.commutator(a, b)).collect();
            }
            Ok(all_trivial(&vals))
        }
        Shape::Power(e) => Ok(elems.iter().all(|x| g.is_identity(&g.pow(x, e)))),
        Shape::General => {
            let k = law.arity();
            let total = (elems.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
            if total > ASSIGNMENT_LIMIT {
                return Err(Error::BoundExceeded { what: "law assignments".into(), limit: ASSIGNMENT_LIMIT as usize });
            }
            let mut idx = vec![0usize; k];
            loop {
                let vals: Vec<Element> = idx.iter().map(|&i| elems[i].clone()).collect();
                if !g.is_identity(&evaluate_law(law, g, &vals)?) {
                    return Ok(false);
                }
                let mut p = 0;
                while p < k {
                    idx[p] += 1;
                    if idx[p] < elems.len() {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
                if p == k {
                    return Ok(true);
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChainSpec {
    Nilpotent,
    Solvable,
    Exponent { exponents: Vec<u64> },
    Custom { laws_by_index: Vec<Vec<String>> },
}

/// `T_0 ⊇ T_1 ⊇ …`, truncated at [`CHAIN_CAP`].
#[derive(Clone, Debug)]
pub struct VarietyChain {
    spec: ChainSpec,
    sets: Vec<Vec<Law>>,
}

impl VarietyChain {
    pub fn nilpotent() -> Self {
        Self::new(ChainSpec::Nilpotent).expect("built-in chain")
    }

    pub fn solvable() -> Self {
        Self::new(ChainSpec::Solvable).expect("built-in chain")
    }

    pub fn exponent(exponents: Vec<u64>) -> Result<Self> {
        Self::new(ChainSpec::Exponent { exponents })
    }

    pub fn new(spec: ChainSpec) -> Result<Self> {
        let sets: Vec<Vec<Law>> = match &spec {
            ChainSpec::Nilpotent => (0..=CHAIN_CAP).map(|n| (n..=CHAIN_CAP).map(Law::left_normed).collect()).collect(),
            ChainSpec::Solvable => (0..=CHAIN_CAP).map(|n| (n..=CHAIN_CAP).map(Law::derived).collect()).collect(),
            ChainSpec::Exponent { exponents } => {
                if exponents.is_empty() || exponents.contains(&0) {
                    return Err(Error::InvalidChain("exponents must be nonempty and positive".into()));
                }
                if let Some(w) = exponents.windows(2).find(|w| w[1] % w[0] != 0) {
                    return Err(Error::InvalidChain(format!("{} does not divide {}", w[0], w[1])));
                }
                let top = exponents.len().min(CHAIN_CAP + 1);
                (0..top).map(|n| exponents[n..top].iter().map(|&e| Law::power(e)).collect()).collect()
            }
            ChainSpec::Custom { laws_by_index } => {
                if laws_by_index.is_empty() {
                    return Err(Error::InvalidChain("no law sets".into()));
                }
                let mut sets = Vec::new();
                for set in laws_by_index.iter().take(CHAIN_CAP + 1) {
                    sets.push(set.iter().map(|t| Law::parse(t)).collect::<Result<Vec<_>>>()?);
                }
                sets
            }
        };
        let chain = VarietyChain { spec, sets };
        chain.validate_descent()?;
        Ok(chain)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ChainSpec = serde_json::from_str(text).map_err(|e| Error::InvalidChain(format!("chain JSON: {e}")))?;
        Self::new(spec)
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    /// `T_n`; indices past the defined range give the last set for custom
    /// chains and the empty set for exponent chains.
    pub fn laws(&self, n: usize) -> &[Law] {
        match (&self.spec, self.sets.get(n)) {
            (_, Some(s)) => s,
            (ChainSpec::Custom { .. }, None) => self.sets.last().unwrap(),
            (_, None) => &[],
        }
    }

    /// Checks `T_n ⊇ T_{n+1}` literally, as sets of reduced words.
    pub fn validate_descent(&self) -> Result<()> {
        for n in 0..self.sets.len().saturating_sub(1) {
            let here: HashSet<&Word> = self.sets[n].iter().map(|l| &l.word).collect();
            if let Some(l) = self.sets[n + 1].iter().find(|l| !here.contains(&l.word)) {
                return Err(Error::InvalidChain(format!("law {l} is in T_{} but not in T_{n}", n + 1)));
            }
        }
        Ok(())
    }
}

/// Least `n ≤ CHAIN_CAP` such that `⟨subset⟩` satisfies every law of `T_n`.
pub fn min_variety_index(g: &BlackBoxGroup, subset: &[Element], chain: &VarietyChain) -> Result<usize> {
    let h = g.subgroup_closure(subset)?;
    for n in 0..=CHAIN_CAP {
        let mut ok = true;
        for law in chain.laws(n) {
            if !law_holds(law, g, h.elements())? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(n);
        }
    }
    Err(Error::BoundExceeded { what: "variety index".into(), limit: CHAIN_CAP })
}

/// `U ↦ min_variety_index(⟨y_i : i ∈ U⟩)`.
pub fn variety_weights(g: &BlackBoxGroup, chain: &VarietyChain) -> Result<WeightFunction> {
    let r = g.generators().len();
    if r > MAX_EPI_GENERATORS {
        return Err(Error::BoundExceeded { what: "generator count".into(), limit: MAX_EPI_GENERATORS });
    }
    let alphabet = Alphabet::new(g.generator_names())?;
    let mut assigned = Vec::new();
    for mask in 1..(1u64 << r) {
        assigned.push((mask, min_variety_index(g, &g.mask_elements(mask), chain)? as u32));
    }
    WeightFunction::new(&alphabet, &assigned)
}

#[derive(Clone, Debug)]
pub struct LvRelator {
    pub mask: u64,
    /// `c(U)`.
    pub index: usize,
    /// `None` when `T_{c(U)}` is empty.
    pub law: Option<Law>,
    pub args: Vec<Word>,
    pub conjugator: Word,
    pub word: Word,
}

/// Random instances `τ(f_0, …)^f` with `τ ∈ T_{c(U)}`, `f_i ∈ F_U` and
/// `f ∈ F`.
pub fn lv_relators(
    weights: &WeightFunction,
    chain: &VarietyChain,
    length_bound: usize,
    samples: usize,
    seed: u64,
) -> Vec<LvRelator> {
    let a = weights.alphabet();
    (0..samples)
        .map(|i| {
            let mut rng = trial_rng(seed, "lv-relator", i as u64);
            let mask = if a.is_empty() { 0 } else { rng.gen_range(1..(1u64 << a.len())) };
            lv_relator_on(weights, chain, mask, length_bound, &mut rng)
        })
        .collect()
}

fn lv_relator_on<R: Rng + ?Sized>(
    weights: &WeightFunction,
    chain: &VarietyChain,
    mask: u64,
    length_bound: usize,
    rng: &mut R,
) -> LvRelator {
    let a = weights.alphabet();
    let index = weights.value(mask) as usize;
    let laws = chain.laws(index);
    let conjugator = Word::random(a, weights.full_mask(), length_bound, rng);
    if laws.is_empty() {
        return LvRelator { mask, index, law: None, args: Vec::new(), conjugator, word: Word::identity(a) };
    }
    // δ_m has 2^m variables, so only instantiate laws of small arity
    let small: Vec<&Law> = laws.iter().filter(|l| l.arity() <= MAX_SAMPLED_ARITY).collect();
    let law = if small.is_empty() || rng.gen_bool(0.5) { laws[0].clone() } else { small[rng.gen_range(0..small.len())].clone() };
    let args: Vec<Word> = (0..law.arity()).map(|_| Word::random(a, mask, length_bound, rng)).collect();
    let word = law.instantiate(&args).expect("arity").conjugate(&conjugator).expect("same alphabet");
    LvRelator { mask, index, law: Some(law), args, conjugator, word }
}

/// Projecting `F(M_2) → F(M_1)` sends every `K_2`-relator `τ(f_0, …)^f` to
/// `τ(f_0 h, …)^{f h}`, an instance over `U ∩ M_1` of a law that lies in
/// `T_{c_1(U ∩ M_1)}`.
pub fn projection_check(p2: &Preset, p1: &Preset, chain: &VarietyChain, samples: usize, seed: u64) -> Result<Report> {
    check_order(p1, p2)?;
    let mut report = Report::new("lv projection", seed);
    let a1 = p1.alphabet();
    let w1 = p1.weights();
    let w2 = p2.weights();
    let mut symbolic = Vec::new();
    let mut membership = Vec::new();
    let mut support = Vec::new();
    let mut nontrivial = 0;
    for (i, r) in lv_relators(w2, chain, 4, samples, seed).into_iter().enumerate() {
        let projected = r.word.project(a1);
        let Some(law) = &r.law else {
            if !projected.is_identity() {
                symbolic.push(format!("#{i}: empty law set but {projected}"));
            }
            continue;
        };
        let args: Vec<Word> = r.args.iter().map(|w| w.project(a1)).collect();
        let rebuilt = law.instantiate(&args)?.conjugate(&r.conjugator.project(a1))?;
        if rebuilt != projected {
            symbolic.push(format!("#{i}: {} vs {rebuilt}", projected));
        }
        let u1 = w1.mask_of(&p2_names(p2, r.mask).iter().filter(|n| a1.lookup(n).is_some()).collect::<Vec<_>>())?;
        if args.iter().any(|w| w.support_mask() & !u1 != 0) {
            support.push(format!("#{i}"));
        }
        let n1 = w1.value(u1) as usize;
        debug_assert!(n1 <= w2.value(r.mask) as usize);
        if !chain.laws(n1).contains(law) {
            membership.push(format!("#{i}: {law} not in T_{n1}"));
        }
        if !projected.is_identity() {
            nontrivial += 1;
        }
    }
    report.push(
        Check::new("projection-is-substitution", symbolic.is_empty(), samples)
            .witnesses(symbolic.into_iter().take(MAX_WITNESSES).collect()),
    );
    report.push(
        Check::new("arguments-over-intersection", support.is_empty(), samples)
            .witnesses(support.into_iter().take(MAX_WITNESSES).collect()),
    );
    report.push(
        Check::new("law-in-smaller-index", membership.is_empty(), samples)
            .detail(format!("{nontrivial} projections nontrivial"))
            .witnesses(membership.into_iter().take(MAX_WITNESSES).collect()),
    );
    report.vacuous = nontrivial == 0;
    Ok(report)
}

fn p2_names(p: &Preset, mask: u64) -> Vec<String> {
    let a = p.alphabet();
    a.names().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, n)| n.clone()).collect()
}

#[derive(Clone, Debug)]
pub struct LvEpiReport {
    pub weights: WeightFunction,
    pub report: Report,
}

/// `x_i ↦ y_i` from the locally-`V` pseudo-free group with `c_G(U)` the
/// least index of a variety containing `⟨y_i : i ∈ U⟩`.
pub fn epi_lv(g: &BlackBoxGroup, chain: &VarietyChain, samples: usize, seed: u64) -> Result<LvEpiReport> {
    let weights = variety_weights(g, chain)?;
    let mut report = Report::new("lv epimorphism", seed);
    let all = g.closure_of_generators()?;
    let onto = g.universe_size().is_none_or(|n| n == all.len());
    report.push(Check::new("surjective", onto, 1).detail(format!("{} elements", all.len())));
    let images: Vec<Element> = g.generators().iter().map(|(_, e)| e.clone()).collect();
    let mut bad = Vec::new();
    let mut instances = 0;
    for r in lv_relators(&weights, chain, 4, samples, seed) {
        if r.law.is_some() {
            instances += 1;
        }
        let v = r.word.evaluate(&images, g.identity(), |a, b| g.mul(a, b), |a| g.inverse(a));
        if !g.is_identity(&v) {
            bad.push(r.word.to_string());
        }
    }
    report.push(
        Check::new("sampled-relators-die", bad.is_empty(), samples)
            .detail(format!("{instances} law instances"))
            .witnesses(bad.into_iter().take(MAX_WITNESSES).collect()),
    );
    let mut sharp = Vec::new();
    let r = g.generators().len();
    for mask in 1..(1u64 << r) {
        let n = weights.value(mask) as usize;
        if n == 0 {
            continue;
        }
        let h = g.subgroup_closure(&g.mask_elements(mask))?;
        let mut fails = false;
        for law in chain.laws(n - 1) {
            if !law_holds(law, g, h.elements())? {
                fails = true;
                break;
            }
        }
        if !fails {
            sharp.push(format!("mask {mask:#b}"));
        }
    }
    report.push(Check::new("index-minimal", sharp.is_empty(), (1usize << r) - 1).witnesses(sharp));
    let summary: Vec<String> = (1..(1u64 << r)).map(|m| format!("{}", weights.value(m))).collect();
    report.note(format!("c_G by subset mask: {}", summary.join(" ")));
    Ok(LvEpiReport { weights, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn law_values() {
        let d4 = fixtures::group("d4").unwrap();
        let gens = d4.mask_elements(3);
        let (r, s) = (gens[0].clone(), gens[1].clone());
        let l = Law::left_normed(2);
        assert!(d4.is_identity(&evaluate_law(&l, &d4, &[r.clone(), s.clone(), r.clone()]).unwrap()));
        assert!(matches!(evaluate_law(&l, &d4, &[r.clone()]), Err(Error::Arity { expected: 3, got: 1 })));
        let all = d4.closure_of_generators().unwrap();
        assert!(law_holds(&l, &d4, all.elements()).unwrap());
        assert!(!law_holds(&Law::left_normed(1), &d4, all.elements()).unwrap());

        let s3 = fixtures::group("s3").unwrap();
        let all = s3.closure_of_generators().unwrap();
        assert!(law_holds(&Law::derived(2), &s3, all.elements()).unwrap());
        let parsed = Law::parse("[[X0,X1],[X2,X3]]").unwrap();
        assert_eq!(parsed.arity(), 4);
        assert_eq!(parsed.word(), Law::derived(2).word());
        assert!(law_holds(&parsed, &s3, all.elements()).unwrap());

        let c = fixtures::group("c2xc2").unwrap();
        let all = c.closure_of_generators().unwrap();
        assert!(law_holds(&Law::power(2), &c, all.elements()).unwrap());
    }

    #[test]
    fn chains_descend() {
        for chain in [VarietyChain::nilpotent(), VarietyChain::solvable(), VarietyChain::exponent(vec![1, 2, 4, 8]).unwrap()] {
            chain.validate_descent().unwrap();
        }
        assert!(matches!(VarietyChain::exponent(vec![2, 3]), Err(Error::InvalidChain(_))));
        let bad = ChainSpec::Custom { laws_by_index: vec![vec!["X0".into()], vec!["X0^2".into()]] };
        assert!(matches!(VarietyChain::new(bad), Err(Error::InvalidChain(_))));
        let ok = VarietyChain::from_json(r#"{"kind":"custom","laws_by_index":[["X0","X0^2"],["X0^2"]]}"#).unwrap();
        assert_eq!(ok.laws(5).len(), 1);
    }

    #[test]
    fn indices() {
        let idx = |name: &str, chain: &VarietyChain| {
            let g = fixtures::group(name).unwrap();
            min_variety_index(&g, &g.mask_elements(u64::MAX), chain).unwrap()
        };
        assert_eq!(idx("d4", &VarietyChain::nilpotent()), 2);
        assert_eq!(idx("s4", &VarietyChain::solvable()), 3);
        assert_eq!(idx("trivial", &VarietyChain::exponent(vec![1, 2, 4]).unwrap()), 0);
        assert_eq!(idx("c2xc2", &VarietyChain::exponent(vec![1, 2, 4]).unwrap()), 1);
    }

    #[test]
    fn lv_epimorphisms() {
        let s4 = fixtures::group("s4").unwrap();
        let r = epi_lv(&s4, &VarietyChain::solvable(), 100, 0).unwrap();
        assert!(r.report.passed(), "{:?}", r.report);
        assert_eq!(r.weights.value(3), 3);
        let c = fixtures::group("c2xc2").unwrap();
        let r = epi_lv(&c, &VarietyChain::exponent(vec![1, 2, 4, 8]).unwrap(), 100, 0).unwrap();
        assert!(r.report.passed());
        assert!((1..4).all(|m| r.weights.value(m) == 1));
    }

    #[test]
    fn projections() {
        let p2 = fixtures::preset("p2").unwrap();
        let a = Alphabet::new(["a", "b"]).unwrap();
        let p1 = Preset::new(WeightFunction::new(&a, &[(1, 1), (2, 1), (3, 1)]).unwrap()).unwrap();
        for chain in [VarietyChain::nilpotent(), VarietyChain::solvable(), VarietyChain::exponent(vec![1, 2, 4]).unwrap()] {
            let r = projection_check(&p2, &p1, &chain, 100, 0).unwrap();
            assert!(r.passed(), "{:?}", r);
        }
    }
}
