//! Collected normal forms in the free nilpotent quotients `F / F^N`.
//!
//! Every element has a unique expression `b_0^{e_0} b_1^{e_1} …` over the
//! basic commutators of weight at most `N`, taken in basis order. The
//! exponents are extracted one weight layer at a time from the Magnus
//! image: the lowest nonvanishing homogeneous component of the residual is
//! a Lie polynomial, the Dynkin map turns it into brackets of generators,
//! and the Hall rewriter expresses those brackets in the basis. Dividing the
//! layer out of the residual exposes the next one.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::hall::{HallBasis, HallConfig, LieRewriter, LieVector, Shape};
use crate::int::Int;
use crate::magnus::{embed, TruncatedSeries};
use crate::word::{Alphabet, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    basis: Arc<HallBasis>,
    class: usize,
    exponents: Vec<BigInt>,
}

impl NormalForm {
    pub fn basis(&self) -> &Arc<HallBasis> {
        &self.basis
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn exponents(&self) -> &[BigInt] {
        &self.exponents
    }

    pub fn exponent(&self, i: usize) -> &BigInt {
        &self.exponents[i]
    }

    pub fn is_zero(&self) -> bool {
        self.exponents.iter().all(Zero::is_zero)
    }

    /// Exponents of the entries of weight `w`.
    pub fn layer(&self, w: usize) -> &[BigInt] {
        &self.exponents[self.basis.layer(w)]
    }

    /// Indices with a nonzero exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.exponents.iter().enumerate().filter(|(_, e)| !e.is_zero()).map(|(i, _)| i)
    }

    /// `Π b_i^{e_i}` in basis order.
    pub fn to_word(&self) -> Word {
        let mut w = Word::identity(self.basis.alphabet());
        for (i, e) in self.exponents.iter().enumerate() {
            if !e.is_zero() {
                w = w.mul_unchecked(&self.basis.word(i).pow(e));
            }
        }
        w
    }
}

/// Precomputed data for collecting at one class bound: Magnus images of the
/// basic commutators and the Hall expansion of every left-normed bracket of
/// generators.
pub struct Collector {
    basis: Arc<HallBasis>,
    class: usize,
    /// `powers[b][k-1] = (E_b - 1)^k` for `k·weight(b) ≤ class`.
    powers: Vec<Vec<TruncatedSeries>>,
    /// `dynkin[t][off]` is the Hall expansion of `[X_{i1}, …, X_{it}]`
    /// where `off` encodes `i1…it` as in the series layout.
    dynkin: Vec<Vec<LieVector>>,
}

impl std::fmt::Debug for Collector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Collector")
            .field("rank", &self.basis.rank())
            .field("class", &self.class)
            .finish()
    }
}

impl Collector {
    pub fn new(basis: Arc<HallBasis>, class: usize) -> Result<Self> {
        Self::with_fuel(basis, class, HallConfig::default().fuel)
    }

    pub fn with_fuel(basis: Arc<HallBasis>, class: usize, fuel: u64) -> Result<Self> {
        if class > basis.max_weight() {
            return Err(Error::BasisMismatch(format!(
                "class {class} needs basic commutators up to weight {class}, basis stops at {}",
                basis.max_weight()
            )));
        }
        let r = basis.rank();
        let n = basis.prefix_len(class);
        let mut images: Vec<(TruncatedSeries, TruncatedSeries)> = Vec::with_capacity(n);
        for i in 0..n {
            let pair = match basis.get(i).shape {
                Shape::Leaf(g) => {
                    let e = TruncatedSeries::generator(r, class, g.index());
                    let inv = e.inverse();
                    (e, inv)
                }
                Shape::Node(a, b) => {
                    let (ea, ia) = &images[a];
                    let (eb, ib) = &images[b];
                    // [a,b] = a⁻¹b⁻¹ab and its inverse b⁻¹a⁻¹ba
                    (ia.mul(ib).mul(ea).mul(eb), ib.mul(ia).mul(eb).mul(ea))
                }
            };
            images.push(pair);
        }
        let powers = images
            .iter()
            .enumerate()
            .map(|(i, (e, _))| {
                let w = basis.get(i).weight;
                let mut y = e.clone();
                y.set_coeff(&[], Int::ZERO);
                let mut out = Vec::new();
                let mut acc = y.clone();
                for k in 1..=class / w {
                    if k > 1 {
                        acc = acc.mul(&y);
                    }
                    out.push(acc.clone());
                }
                out
            })
            .collect();

        let mut rw = LieRewriter::new(&basis, fuel);
        let mut dynkin: Vec<Vec<LieVector>> = vec![Vec::new()];
        if class >= 1 {
            dynkin.push((0..r).map(LieVector::unit).collect());
        }
        for t in 2..=class {
            let prev = &dynkin[t - 1];
            let mut layer = Vec::with_capacity(prev.len() * r);
            for v in prev {
                for g in 0..r {
                    layer.push(rw.bracket_vectors(v, &LieVector::unit(g))?);
                }
            }
            dynkin.push(layer);
        }
        Ok(Collector { basis, class, powers, dynkin })
    }

    pub fn basis(&self) -> &Arc<HallBasis> {
        &self.basis
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.basis.alphabet()
    }

    /// Length of normal-form vectors: basic commutators of weight ≤ class.
    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        if w.alphabet().same_as(self.basis.alphabet()) {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch(format!(
                "word over {:?}, basis over {:?}",
                w.alphabet(),
                self.basis.alphabet()
            )))
        }
    }

    fn check_nf(&self, u: &NormalForm) -> Result<()> {
        if u.class == self.class && *u.basis == *self.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch(format!(
                "normal form of class {} does not belong to this collector (class {})",
                u.class, self.class
            )))
        }
    }

    pub(crate) fn nf(&self, exponents: Vec<BigInt>) -> NormalForm {
        NormalForm { basis: self.basis.clone(), class: self.class, exponents }
    }

    /// Hall coordinates of the left-normed brackets of all degree-`t`
    /// monomials, indexed like the series layer.
    pub(crate) fn dynkin_layer(&self, t: usize) -> &[LieVector] {
        &self.dynkin[t]
    }

    pub fn zero(&self) -> NormalForm {
        self.nf(vec![BigInt::zero(); self.len()])
    }

    /// `(1 + Y_b)^e` as a series.
    pub(crate) fn basic_power(&self, b: usize, e: &BigInt) -> TruncatedSeries {
        let mut out = TruncatedSeries::one(self.basis.rank(), self.class);
        for (k, yk) in self.powers[b].iter().enumerate() {
            let c = Int::binomial(e, k + 1);
            if !c.is_zero() {
                out = out.add(&yk.scale(&c));
            }
        }
        out
    }

    pub fn series_of(&self, u: &NormalForm) -> TruncatedSeries {
        let mut s = TruncatedSeries::one(self.basis.rank(), self.class);
        for (i, e) in u.exponents.iter().enumerate() {
            if !e.is_zero() {
                s = s.mul(&self.basic_power(i, e));
            }
        }
        s
    }

    pub fn normal_form(&self, w: &Word) -> Result<NormalForm> {
        self.check_word(w)?;
        let e = self.extract(embed(w, self.class))?;
        Ok(self.nf(e))
    }

    /// Collected exponents of a unipotent series.
    pub(crate) fn extract(&self, mut s: TruncatedSeries) -> Result<Vec<BigInt>> {
        let mut out = Vec::with_capacity(self.len());
        for t in 1..=self.class {
            let exps = self.layer_coords(&s, t)?;
            for (b, e) in self.basis.layer(t).zip(&exps) {
                if !e.is_zero() {
                    s = self.basic_power(b, &-e).mul(&s);
                }
            }
            if s.layer(t).iter().any(|c| !c.is_zero()) {
                return Err(Error::Internal(format!("layer {t} did not cancel")));
            }
            out.extend(exps);
        }
        Ok(out)
    }

    /// Hall coordinates of the degree-`t` component of a series whose lower
    /// components vanish.
    pub(crate) fn layer_coords(&self, s: &TruncatedSeries, t: usize) -> Result<Vec<BigInt>> {
        let mut lie = LieVector::zero();
        for (off, c) in s.layer(t).iter().enumerate() {
            if !c.is_zero() {
                lie.add_scaled(&self.dynkin[t][off], c);
            }
        }
        let range = self.basis.layer(t);
        let mut exps = Vec::with_capacity(range.len());
        for b in range.clone() {
            let c = lie.coeff(b).div_exact(t as i64).ok_or_else(|| {
                Error::Internal(format!("degree-{t} component is not a Lie element"))
            })?;
            exps.push(c.to_bigint());
        }
        if let Some((i, _)) = lie.iter().find(|(i, _)| !range.contains(i)) {
            return Err(Error::Internal(format!("entry {i} leaked into layer {t}")));
        }
        Ok(exps)
    }

    fn extract_nf(&self, s: TruncatedSeries) -> Result<NormalForm> {
        Ok(self.nf(self.extract(s)?))
    }

    pub fn multiply(&self, u: &NormalForm, v: &NormalForm) -> Result<NormalForm> {
        self.check_nf(u)?;
        self.check_nf(v)?;
        self.extract_nf(self.series_of(u).mul(&self.series_of(v)))
    }

    pub fn power(&self, u: &NormalForm, k: &BigInt) -> Result<NormalForm> {
        self.check_nf(u)?;
        self.extract_nf(self.series_of(u).pow(k))
    }

    pub fn inverse(&self, u: &NormalForm) -> Result<NormalForm> {
        self.power(u, &BigInt::from(-1))
    }

    /// Builds a normal form from an explicit exponent vector.
    pub fn from_exponents(&self, exponents: Vec<BigInt>) -> Result<NormalForm> {
        if exponents.len() != self.len() {
            return Err(Error::BasisMismatch(format!(
                "expected {} exponents, got {}",
                self.len(),
                exponents.len()
            )));
        }
        Ok(self.nf(exponents))
    }

    /// Checks `nf_to_word(u) ≡ w` against the Magnus oracle.
    pub fn verify(&self, u: &NormalForm, w: &Word) -> bool {
        crate::magnus::equal_mod_gamma(&u.to_word(), w, self.class)
    }
}

/// One-shot normal form on the standard alphabet of the word.
pub fn normal_form(w: &Word, class: usize) -> Result<NormalForm> {
    let basis = HallBasis::over(w.alphabet(), class.max(1), &HallConfig::default())?;
    Collector::new(Arc::new(basis), class)?.normal_form(w)
}
