//! Integer row lattices in Hermite normal form.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// A sublattice of `Z^dim`, kept as the nonzero rows of its Hermite normal
/// form: pivots strictly increase, pivot entries are positive and entries
/// above a pivot are reduced into `[0, pivot)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    rows: Vec<Vec<BigInt>>,
    /// Each row as an integer combination of the inserted generators.
    combos: Vec<Combo>,
    inserted: usize,
}

pub type Combo = BTreeMap<usize, BigInt>;

fn combine(a: &BigInt, x: &Combo, b: &BigInt, y: &Combo) -> Combo {
    let mut out = Combo::new();
    for (k, v) in x {
        out.insert(*k, a * v);
    }
    for (k, v) in y {
        let e = out.entry(*k).or_insert_with(BigInt::zero);
        *e += b * v;
    }
    out.retain(|_, v| !v.is_zero());
    out
}

impl Lattice {
    pub fn new(dim: usize) -> Lattice {
        Lattice { dim, rows: Vec::new(), combos: Vec::new(), inserted: 0 }
    }

    pub fn spanned_by<I: IntoIterator<Item = Vec<BigInt>>>(dim: usize, gens: I) -> Lattice {
        let mut l = Lattice::new(dim);
        for g in gens {
            l.push(g);
        }
        l.full_reduce();
        l
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    /// Row `i` written in terms of the generators, numbered by insertion.
    pub fn combination(&self, i: usize) -> &Combo {
        &self.combos[i]
    }

    fn pivot(row: &[BigInt]) -> Option<usize> {
        row.iter().position(|x| !x.is_zero())
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| Self::pivot(r).expect("nonzero row")).collect()
    }

    /// Adds a generator and restores Hermite form.
    pub fn insert(&mut self, v: Vec<BigInt>) {
        self.push(v);
        self.full_reduce();
    }

    /// Adds a generator keeping the rows in echelon form only.
    fn push(&mut self, mut v: Vec<BigInt>) {
        assert_eq!(v.len(), self.dim, "vector length");
        let mut combo = Combo::from([(self.inserted, BigInt::one())]);
        self.inserted += 1;
        let mut i = 0;
        while let Some(p) = Self::pivot(&v) {
            while i < self.rows.len() && Self::pivot(&self.rows[i]).unwrap() < p {
                i += 1;
            }
            if i == self.rows.len() || Self::pivot(&self.rows[i]).unwrap() > p {
                if v[p].is_negative() {
                    v.iter_mut().for_each(|x| *x = -&*x);
                    combo.values_mut().for_each(|x| *x = -&*x);
                }
                self.rows.insert(i, v);
                self.combos.insert(i, combo);
                break;
            }
            // combine row i and v on column p: new row gets the gcd
            let a = self.rows[i][p].clone();
            let b = v[p].clone();
            let e = a.extended_gcd(&b);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let (ag, bg) = (&a / &g, &b / &g);
            let row = &self.rows[i];
            let new_row: Vec<BigInt> = row.iter().zip(&v).map(|(r, x)| &s * r + &t * x).collect();
            let rest: Vec<BigInt> = row.iter().zip(&v).map(|(r, x)| &ag * x - &bg * r).collect();
            let old = &self.combos[i];
            let new_combo = combine(&s, old, &t, &combo);
            combo = combine(&-&bg, old, &ag, &combo);
            self.rows[i] = new_row;
            self.combos[i] = new_combo;
            if self.rows[i][p].is_negative() {
                self.rows[i].iter_mut().for_each(|x| *x = -&*x);
                self.combos[i].values_mut().for_each(|x| *x = -&*x);
            }
            v = rest;
            i += 1;
        }
    }

    /// Brings every row into the range `[0, pivot)` in the pivot columns
    /// of the rows below it.
    fn full_reduce(&mut self) {
        for j in (0..self.rows.len()).rev() {
            for k in j + 1..self.rows.len() {
                let p = Self::pivot(&self.rows[k]).unwrap();
                let q = self.rows[j][p].div_floor(&self.rows[k][p]);
                if !q.is_zero() {
                    let (head, tail) = self.rows.split_at_mut(k);
                    for (x, y) in head[j].iter_mut().zip(&tail[0]) {
                        *x -= &q * y;
                    }
                    self.combos[j] = combine(&BigInt::one(), &self.combos[j], &-q, &self.combos[k]);
                }
            }
        }
    }

    /// Canonical representative of `v` modulo the lattice, together with the
    /// coefficients (one per row) of the lattice vector subtracted.
    pub fn reduce(&self, v: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
        let mut v = v.to_vec();
        let mut coeffs = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let p = Self::pivot(row).unwrap();
            let q = v[p].div_floor(&row[p]);
            if !q.is_zero() {
                for (x, y) in v.iter_mut().zip(row) {
                    *x -= &q * y;
                }
            }
            coeffs.push(q);
        }
        (v, coeffs)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.reduce(v).0.iter().all(Zero::is_zero)
    }

    /// Whether the lattice is a direct summand of `Z^dim`, i.e. `Z^dim / L`
    /// is torsion-free. Returns a witness `v ∉ L` with `k v ∈ L` otherwise.
    pub fn saturation_witness(&self) -> Option<(Vec<BigInt>, BigInt)> {
        // Z^dim / L is torsion-free iff the gcd of maximal minors is 1. With
        // L in echelon form, test through the Smith form of the row matrix.
        let divisors = elementary_divisors(&self.rows, self.dim);
        let bad = divisors.iter().position(|d| !d.is_one())?;
        let k = divisors[bad].clone();
        // find an explicit witness: some row combination divisible by k
        for row in &self.rows {
            let g = row.iter().fold(BigInt::zero(), |a, x| a.gcd(x));
            if !g.is_one() {
                let v: Vec<BigInt> = row.iter().map(|x| x / &g).collect();
                return Some((v, g));
            }
        }
        Some((Vec::new(), k))
    }

    pub fn is_saturated(&self) -> bool {
        self.saturation_witness().is_none()
    }
}

/// Nonzero elementary divisors of an integer matrix.
pub fn elementary_divisors(rows: &[Vec<BigInt>], ncols: usize) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut out = Vec::new();
    let mut top = 0;
    let mut left = 0;
    while top < a.len() && left < ncols {
        // pick the smallest nonzero entry in the remaining block as pivot
        let mut best: Option<(usize, usize)> = None;
        for (i, r) in a.iter().enumerate().skip(top) {
            for (j, x) in r.iter().enumerate().skip(left) {
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(top, bi);
        for r in a.iter_mut() {
            r.swap(left, bj);
        }
        let mut done = true;
        let pv = a[top][left].clone();
        for i in top + 1..a.len() {
            let q = a[i][left].div_floor(&pv);
            if !q.is_zero() {
                let (head, tail) = a.split_at_mut(i);
                for (x, y) in tail[0].iter_mut().zip(&head[top]) {
                    *x -= &q * y;
                }
            }
            if !a[i][left].is_zero() {
                done = false;
            }
        }
        for j in left + 1..ncols {
            let q = a[top][j].div_floor(&pv);
            if !q.is_zero() {
                for r in a.iter_mut() {
                    let y = r[left].clone();
                    r[j] -= &q * y;
                }
            }
            if !a[top][j].is_zero() {
                done = false;
            }
        }
        if !done {
            continue;
        }
        // divisibility: pivot must divide the rest of the block
        let mut fix = None;
        'outer: for i in top + 1..a.len() {
            for j in left + 1..ncols {
                if !(&a[i][j] % &pv).is_zero() {
                    fix = Some(i);
                    break 'outer;
                }
            }
        }
        if let Some(i) = fix {
            let (head, tail) = a.split_at_mut(i);
            for (x, y) in head[top].iter_mut().zip(&tail[0]) {
                *x += y;
            }
            continue;
        }
        out.push(pv.abs());
        top += 1;
        left += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn hermite_examples() {
        let l = Lattice::spanned_by(2, [v(&[2, 1]), v(&[0, 3])]);
        assert_eq!(l.rows(), &[v(&[2, 1]), v(&[0, 3])]);
        assert!(l.contains(&v(&[4, 5])));
        assert!(!l.contains(&v(&[1, 0])));
        assert!(!l.is_saturated());
        let l = Lattice::spanned_by(3, [v(&[2, 1, 0]), v(&[3, 1, 0])]);
        assert_eq!(l.rank(), 2);
        assert!(l.contains(&v(&[1, 0, 0])) && l.contains(&v(&[0, 1, 0])));
        assert!(l.is_saturated());
        let l = Lattice::spanned_by(2, [v(&[2, 4])]);
        assert_eq!(l.saturation_witness().unwrap(), (v(&[1, 2]), BigInt::from(2)));
    }

    #[test]
    fn divisors() {
        let d = elementary_divisors(&[v(&[2, 0]), v(&[0, 3])], 2);
        assert_eq!(d, v(&[1, 6]));
        let d = elementary_divisors(&[v(&[2, 4, 4]), v(&[-6, 6, 12]), v(&[10, -4, -16])], 3);
        assert_eq!(d, v(&[2, 6, 12]));
    }

    proptest! {
        #[test]
        fn membership_matches_generators(
            gens in proptest::collection::vec(proptest::collection::vec(-6i64..6, 4), 1..5),
            coeffs in proptest::collection::vec(-3i64..3, 5),
        ) {
            let l = Lattice::spanned_by(4, gens.iter().map(|g| v(g)));
            let mut comb = vec![0i64; 4];
            for (g, c) in gens.iter().zip(&coeffs) {
                for (x, y) in comb.iter_mut().zip(g) {
                    *x += c * y;
                }
            }
            prop_assert!(l.contains(&v(&comb)));
            for i in 0..l.rank() {
                let mut acc = vec![BigInt::zero(); 4];
                for (g, c) in l.combination(i) {
                    for (x, y) in acc.iter_mut().zip(v(&gens[*g])) {
                        *x += c * y;
                    }
                }
                prop_assert_eq!(&acc, &l.rows()[i]);
            }
            for g in &gens {
                prop_assert!(l.contains(&v(g)));
            }
            let rank_oracle = elementary_divisors(&gens.iter().map(|g| v(g)).collect::<Vec<_>>(), 4).len();
            prop_assert_eq!(l.rank(), rank_oracle);
            // reduced representative is canonical
            let (r1, _) = l.reduce(&v(&[1, 2, 3, 4]));
            let shifted: Vec<BigInt> = v(&[1, 2, 3, 4]).iter().zip(&v(&comb)).map(|(a, b)| a + b).collect();
            let (r2, _) = l.reduce(&shifted);
            prop_assert_eq!(r1, r2);
        }
    }
}
