//! Truncated noncommutative power series over ℤ and the Magnus map
//! `x_i ↦ 1 + X_i`.
//!
//! Two words agree up to degree `d` exactly when they agree modulo the
//! `(d+1)`-st term of the lower central series, so series comparison is an
//! independent test for equality in free nilpotent quotients.
//!
//! Coefficients are stored densely per degree: a monomial `X_{i1}…X_{ik}`
//! lives at offset `i1·r^{k-1} + … + ik` of layer `k`.

use std::fmt;

use num_bigint::BigInt;

use crate::int::Int;
use crate::word::Word;

#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    rank: usize,
    degree: usize,
    layers: Vec<Vec<Int>>,
}

impl TruncatedSeries {
    pub fn zero(rank: usize, degree: usize) -> Self {
        let layers = (0..=degree).map(|k| vec![Int::ZERO; rank.pow(k as u32)]).collect();
        TruncatedSeries { rank, degree, layers }
    }

    pub fn one(rank: usize, degree: usize) -> Self {
        let mut s = Self::zero(rank, degree);
        s.layers[0][0] = Int::ONE;
        s
    }

    /// `1 + X_g`.
    pub fn generator(rank: usize, degree: usize, g: usize) -> Self {
        let mut s = Self::one(rank, degree);
        if degree >= 1 {
            s.layers[1][g] = Int::ONE;
        }
        s
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn layer(&self, k: usize) -> &[Int] {
        &self.layers[k]
    }

    pub fn coeff(&self, monomial: &[usize]) -> Int {
        if monomial.len() > self.degree {
            return Int::ZERO;
        }
        self.layers[monomial.len()][self.offset(monomial)].clone()
    }

    pub fn set_coeff(&mut self, monomial: &[usize], c: Int) {
        let off = self.offset(monomial);
        self.layers[monomial.len()][off] = c;
    }

    fn offset(&self, monomial: &[usize]) -> usize {
        monomial.iter().fold(0, |acc, &i| {
            assert!(i < self.rank, "variable out of range");
            acc * self.rank + i
        })
    }

    fn monomial_at(&self, k: usize, mut off: usize) -> Vec<usize> {
        let mut m = vec![0; k];
        for slot in m.iter_mut().rev() {
            *slot = off % self.rank;
            off /= self.rank;
        }
        m
    }

    /// Nonzero terms as `(monomial, coefficient)`, ordered by degree and then
    /// lexicographically.
    pub fn terms(&self) -> Vec<(Vec<usize>, Int)> {
        let mut out = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            for (off, c) in layer.iter().enumerate() {
                if !c.is_zero() {
                    out.push((self.monomial_at(k, off), c.clone()));
                }
            }
        }
        out
    }

    pub fn is_one(&self) -> bool {
        self.layers[0][0] == Int::ONE
            && self.layers[1..].iter().all(|l| l.iter().all(Int::is_zero))
    }

    /// Lowest positive degree with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        (1..=self.degree).find(|&k| self.layers[k].iter().any(|c| !c.is_zero()))
    }

    fn same_shape(&self, other: &Self) {
        assert_eq!(self.rank, other.rank, "series rank mismatch");
        assert_eq!(self.degree, other.degree, "series degree mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_shape(other);
        let mut out = self.clone();
        for (l, r) in out.layers.iter_mut().zip(&other.layers) {
            for (a, b) in l.iter_mut().zip(r) {
                *a += b;
            }
        }
        out
    }

    pub fn scale(&self, k: &Int) -> Self {
        let mut out = self.clone();
        for l in &mut out.layers {
            for a in l.iter_mut() {
                *a = &*a * k;
            }
        }
        out
    }

    /// Truncated product.
    pub fn mul(&self, other: &Self) -> Self {
        self.same_shape(other);
        let mut out = Self::zero(self.rank, self.degree);
        let r = self.rank;
        for a in 0..=self.degree {
            let left = &self.layers[a];
            if left.iter().all(Int::is_zero) {
                continue;
            }
            for b in 0..=self.degree - a {
                let right = &other.layers[b];
                let rb = r.pow(b as u32);
                let dst = &mut out.layers[a + b];
                for (i, x) in left.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let base = i * rb;
                    for (j, y) in right.iter().enumerate() {
                        if !y.is_zero() {
                            dst[base + j].add_mul(x, y);
                        }
                    }
                }
            }
        }
        out
    }

    /// `self · (1 + X_g)^e`, expanded as `Σ_k C(e, k) X_g^k`.
    pub fn mul_generator_power(&self, g: usize, e: &BigInt) -> Self {
        let r = self.rank;
        let coeffs: Vec<Int> = (0..=self.degree).map(|k| Int::binomial(e, k)).collect();
        let mut out = Self::zero(r, self.degree);
        for a in 0..=self.degree {
            for (i, x) in self.layers[a].iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                let mut off = i;
                for (k, c) in coeffs.iter().enumerate().take(self.degree - a + 1) {
                    if k > 0 {
                        off = off * r + g;
                    }
                    if !c.is_zero() {
                        out.layers[a + k][off].add_mul(x, c);
                    }
                }
            }
        }
        out
    }

    /// Inverse of a series with constant term 1: `Σ (1 - s)^k`.
    pub fn inverse(&self) -> Self {
        assert_eq!(self.layers[0][0], Int::ONE, "only unipotent series are inverted");
        let mut y = self.clone();
        y.layers[0][0] = Int::ZERO;
        self.binomial_power(&y, &BigInt::from(-1))
    }

    /// `(1 + y)^e` for `y` without constant term, any integer `e`.
    pub fn binomial_power(&self, y: &Self, e: &BigInt) -> Self {
        let valuation = y.valuation().unwrap_or(self.degree + 1);
        let mut out = Self::one(self.rank, self.degree);
        let mut term = Self::one(self.rank, self.degree);
        let mut k = 1;
        while k * valuation <= self.degree {
            term = term.mul(y);
            let c = Int::binomial(e, k);
            if !c.is_zero() {
                out = out.add(&term.scale(&c));
            }
            k += 1;
        }
        out
    }

    /// Integer power of a unipotent series.
    pub fn pow(&self, e: &BigInt) -> Self {
        let mut y = self.clone();
        y.layers[0][0] = Int::ZERO;
        self.binomial_power(&y, e)
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (m, c)) in terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}")?;
            for v in m {
                write!(f, "·X{v}")?;
            }
        }
        Ok(())
    }
}

/// Magnus image of `w`, truncated above degree `degree`.
pub fn embed(w: &Word, degree: usize) -> TruncatedSeries {
    let r = w.alphabet().len();
    let mut s = TruncatedSeries::one(r, degree);
    for syl in w.syllables() {
        s = s.mul_generator_power(syl.generator.index(), &syl.exponent);
    }
    s
}

/// Equality in `F / γ_{n+1}(F)`, i.e. modulo the `n`-th term of the lower
/// central series when the series is indexed from `F⁰ = F`.
pub fn equal_mod_gamma(u: &Word, v: &Word, n: usize) -> bool {
    assert!(u.alphabet().same_as(v.alphabet()), "alphabet mismatch");
    if n == 0 {
        return true;
    }
    embed(u, n) == embed(v, n)
}

/// Serializable coefficient list for the `oracle` subcommand.
pub fn coefficient_list(s: &TruncatedSeries, names: &[String]) -> Vec<(String, String)> {
    s.terms()
        .into_iter()
        .map(|(m, c)| {
            let mono = if m.is_empty() {
                "1".to_string()
            } else {
                m.iter().map(|&i| names[i].as_str()).collect::<Vec<_>>().join("*")
            };
            (mono, c.to_string())
        })
        .collect()
}

/// Number of stored coefficients for rank `r` and degree `d`: `Σ_{k≤d} r^k`.
pub fn monomial_count(r: usize, d: usize) -> usize {
    (0..=d).map(|k| r.pow(k as u32)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{Alphabet, GeneratorId};
    use proptest::prelude::*;

    fn w(text: &str, r: usize) -> Word {
        Word::parse(text, &Alphabet::standard(r)).unwrap()
    }

    fn coeffs(s: &TruncatedSeries) -> Vec<(Vec<usize>, i64)> {
        s.terms().into_iter().map(|(m, c)| (m, c.to_i64().unwrap())).collect()
    }

    #[test]
    fn embed_examples() {
        assert_eq!(coeffs(&embed(&w("x0", 2), 2)), vec![(vec![], 1), (vec![0], 1)]);
        assert_eq!(
            coeffs(&embed(&w("x0^-1", 2), 2)),
            vec![(vec![], 1), (vec![0], -1), (vec![0, 0], 1)]
        );
        assert_eq!(
            coeffs(&embed(&w("[x1,x0]", 2), 2)),
            vec![(vec![], 1), (vec![0, 1], -1), (vec![1, 0], 1)]
        );
    }

    #[test]
    fn equality_examples() {
        for n in 1..=5 {
            assert!(equal_mod_gamma(&w("x1 x0", 2), &w("x0 x1 [x1,x0]", 2), n));
        }
        assert!(!equal_mod_gamma(&w("x0 x1", 2), &w("x1 x0", 2), 2));
        assert!(equal_mod_gamma(&w("[x1,x0]", 2), &w("1", 2), 1));
        assert!(equal_mod_gamma(&w("x0 x1", 2), &w("x1 x0", 2), 1));
    }

    #[test]
    fn weight_n_commutators_vanish_below_degree_n() {
        let c = w("[x0,x1,x0,x1]", 2);
        assert!(embed(&c, 3).is_one());
        assert!(!embed(&c, 4).is_one());
        assert_eq!(monomial_count(3, 2), 13);
    }

    fn series_strategy(r: usize, d: usize) -> impl Strategy<Value = TruncatedSeries> {
        let n = monomial_count(r, d);
        prop::collection::vec(-4i64..=4, n).prop_map(move |v| {
            let mut s = TruncatedSeries::zero(r, d);
            let mut it = v.into_iter();
            for k in 0..=d {
                for c in s.layers[k].iter_mut() {
                    *c = Int::from(it.next().unwrap());
                }
            }
            s
        })
    }

    fn raw_word(r: usize) -> impl Strategy<Value = Vec<(u32, i64)>> {
        prop::collection::vec((0..r as u32, prop_oneof![-3i64..=-1, 1i64..=3]), 0..10)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms(a in series_strategy(2, 5), b in series_strategy(2, 5), c in series_strategy(2, 5)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        }

        #[test]
        fn embedding_is_multiplicative(x in raw_word(3), y in raw_word(3)) {
            let al = Alphabet::standard(3);
            let mk = |raw: &[(u32, i64)]| Word::from_syllables(&al, raw.iter().map(|&(g, e)| (GeneratorId(g), BigInt::from(e)))).unwrap();
            let (u, v) = (mk(&x), mk(&y));
            let d = 4;
            prop_assert_eq!(embed(&u.multiply(&v).unwrap(), d), embed(&u, d).mul(&embed(&v, d)));
            prop_assert!(embed(&u, d).mul(&embed(&u.invert(), d)).is_one());
            prop_assert_eq!(embed(&u, d).inverse(), embed(&u.invert(), d));
            prop_assert_eq!(embed(&u, d).pow(&BigInt::from(-3)), embed(&u.pow(&BigInt::from(-3)), d));
        }
    }
}
