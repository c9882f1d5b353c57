//! Freely reduced words in a free group over a named alphabet.
//!
//! Text grammar:
//!
//! ```text
//! word    ::= term+ | "1"
//! term    ::= primary ("^" int)?
//! primary ::= name | "[" word ("," word)+ "]" | "(" word ")"
//! ```
//!
//! `[u,v]` expands to `u^-1 v^-1 u v`; `[u,v,w]` is the left-normed
//! `[[u,v],w]`. Whitespace separates syllables and is otherwise ignored.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorId(pub u32);

impl GeneratorId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An ordered table of distinct generator names, shared between words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Alphabet(Arc<[String]>);

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if !valid_name(n) {
                return Err(Error::InvalidAlphabet(format!("`{n}` is not an identifier")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidAlphabet(format!("duplicate name `{n}`")));
            }
        }
        Ok(Alphabet(names.into()))
    }

    /// `x0, x1, …, x{r-1}`.
    pub fn standard(r: usize) -> Self {
        Alphabet((0..r).map(|i| format!("x{i}")).collect::<Vec<_>>().into())
    }

    /// `X0, X1, …`, the variable alphabet used for laws.
    pub fn variables(r: usize) -> Self {
        Alphabet((0..r).map(|i| format!("X{i}")).collect::<Vec<_>>().into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, g: GeneratorId) -> &str {
        &self.0[g.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<GeneratorId> {
        self.0.iter().position(|n| n == name).map(|i| GeneratorId(i as u32))
    }

    pub fn same_as(&self, other: &Alphabet) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub generator: GeneratorId,
    pub exponent: BigInt,
}

/// A freely reduced word: adjacent syllables never share a generator and no
/// exponent is zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet: Alphabet,
    syllables: Vec<Syllable>,
}

impl Word {
    pub fn identity(alphabet: &Alphabet) -> Self {
        Word { alphabet: alphabet.clone(), syllables: Vec::new() }
    }

    pub fn generator(alphabet: &Alphabet, g: GeneratorId) -> Self {
        Self::power_of(alphabet, g, BigInt::one())
    }

    pub fn power_of(alphabet: &Alphabet, g: GeneratorId, e: BigInt) -> Self {
        assert!(g.index() < alphabet.len(), "generator out of range");
        let mut w = Word::identity(alphabet);
        w.push(g, e);
        w
    }

    /// Builds a word from raw `(generator, exponent)` pairs, reducing freely.
    pub fn from_syllables<I>(alphabet: &Alphabet, syllables: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GeneratorId, BigInt)>,
    {
        let mut w = Word::identity(alphabet);
        for (g, e) in syllables {
            if g.index() >= alphabet.len() {
                return Err(Error::AlphabetMismatch(format!(
                    "generator index {} outside alphabet of size {}",
                    g.0,
                    alphabet.len()
                )));
            }
            w.push(g, e);
        }
        Ok(w)
    }

    /// A random freely reduced word of at most `max_len` letters drawn from
    /// the generators in `mask`. Letters are `g^±1`.
    pub fn random<R: rand::Rng + ?Sized>(
        alphabet: &Alphabet,
        mask: u64,
        max_len: usize,
        rng: &mut R,
    ) -> Word {
        let gens: Vec<u32> =
            (0..alphabet.len() as u32).filter(|g| mask >> g & 1 == 1).collect();
        let mut w = Word::identity(alphabet);
        if gens.is_empty() || max_len == 0 {
            return w;
        }
        let len = rng.gen_range(1..=max_len);
        for _ in 0..len {
            let g = gens[rng.gen_range(0..gens.len())];
            let e = if rng.gen_bool(0.5) { 1 } else { -1 };
            w.push(GeneratorId(g), BigInt::from(e));
        }
        w
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Total letter length `Σ |e_i|`.
    pub fn length(&self) -> BigInt {
        self.syllables.iter().map(|s| s.exponent.abs()).sum()
    }

    /// Bitmask of generators that occur (alphabets are at most 64 wide
    /// wherever supports are used).
    pub fn support_mask(&self) -> u64 {
        self.syllables.iter().fold(0, |m, s| m | (1u64 << s.generator.0))
    }

    fn push(&mut self, g: GeneratorId, e: BigInt) {
        if e.is_zero() {
            return;
        }
        if let Some(last) = self.syllables.last_mut() {
            if last.generator == g {
                last.exponent += e;
                if last.exponent.is_zero() {
                    self.syllables.pop();
                }
                return;
            }
        }
        self.syllables.push(Syllable { generator: g, exponent: e });
    }

    fn check(&self, other: &Word) -> Result<()> {
        if self.alphabet.same_as(&other.alphabet) {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch(format!("{:?} vs {:?}", self.alphabet, other.alphabet)))
        }
    }

    pub fn multiply(&self, other: &Word) -> Result<Word> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for s in &other.syllables {
            w.push(s.generator, s.exponent.clone());
        }
        w
    }

    pub fn invert(&self) -> Word {
        Word {
            alphabet: self.alphabet.clone(),
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|s| Syllable { generator: s.generator, exponent: -&s.exponent })
                .collect(),
        }
    }

    /// `f⁻¹ k f`.
    pub fn conjugate(&self, f: &Word) -> Result<Word> {
        self.check(f)?;
        Ok(f.invert().mul_unchecked(self).mul_unchecked(f))
    }

    /// `u⁻¹ v⁻¹ u v`.
    pub fn commutator(&self, v: &Word) -> Result<Word> {
        self.check(v)?;
        Ok(self.commutator_unchecked(v))
    }

    pub(crate) fn commutator_unchecked(&self, v: &Word) -> Word {
        self.invert().mul_unchecked(&v.invert()).mul_unchecked(self).mul_unchecked(v)
    }

    /// Left-normed commutator `[g0, g1, …, gn] = [[…[g0, g1], …], gn]`.
    /// A single entry is returned as is.
    pub fn left_normed(parts: &[Word]) -> Result<Word> {
        let (first, rest) = parts
            .split_first()
            .ok_or_else(|| Error::Input("left-normed commutator of no entries".into()))?;
        rest.iter().try_fold(first.clone(), |acc, p| acc.commutator(p))
    }

    /// `w^e`. Panics if a word that is not a conjugate of a single
    /// syllable is raised to a power beyond `usize`.
    pub fn pow(&self, e: &BigInt) -> Word {
        if e.is_zero() || self.is_identity() {
            return Word::identity(&self.alphabet);
        }
        let base = if e.is_negative() { self.invert() } else { self.clone() };
        let n = e.abs();
        // w = u c u⁻¹ with c cyclically reduced
        let s = &base.syllables;
        let mut i = 0;
        let mut j = s.len() - 1;
        while i < j && s[i].generator == s[j].generator && s[i].exponent == -&s[j].exponent {
            i += 1;
            j -= 1;
        }
        let prefix = &s[..i];
        let core = &s[i..=j];
        let mut out = Word::identity(&self.alphabet);
        for p in prefix {
            out.push(p.generator, p.exponent.clone());
        }
        if core.len() == 1 {
            out.push(core[0].generator, &core[0].exponent * &n);
        } else {
            let reps = n.to_usize().expect("power too large to expand as a word");
            for _ in 0..reps {
                for c in core {
                    out.push(c.generator, c.exponent.clone());
                }
            }
        }
        for p in prefix.iter().rev() {
            out.push(p.generator, -&p.exponent);
        }
        out
    }

    /// Applies the substitution `x_i ↦ images[i]`.
    pub fn substitute(&self, images: &[Word]) -> Result<Word> {
        if images.len() != self.alphabet.len() {
            return Err(Error::Arity { expected: self.alphabet.len(), got: images.len() });
        }
        let target = match images.first() {
            Some(w) => w.alphabet.clone(),
            None => return Ok(self.clone()),
        };
        for img in images {
            if !img.alphabet.same_as(&target) {
                return Err(Error::AlphabetMismatch("substitution images disagree".into()));
            }
        }
        let mut out = Word::identity(&target);
        for s in &self.syllables {
            out = out.mul_unchecked(&images[s.generator.index()].pow(&s.exponent));
        }
        Ok(out)
    }

    /// Re-expresses the word over another alphabet by generator name;
    /// generators missing from the target are sent to the identity.
    pub fn project(&self, target: &Alphabet) -> Word {
        let map: Vec<Option<GeneratorId>> =
            self.alphabet.names().iter().map(|n| target.lookup(n)).collect();
        let mut out = Word::identity(target);
        for s in &self.syllables {
            if let Some(g) = map[s.generator.index()] {
                out.push(g, s.exponent.clone());
            }
        }
        out
    }

    /// Re-expresses the word over a larger alphabet containing every name.
    pub fn include(&self, target: &Alphabet) -> Result<Word> {
        for n in self.alphabet.names() {
            if target.lookup(n).is_none() {
                return Err(Error::AlphabetMismatch(format!("`{n}` missing from target")));
            }
        }
        Ok(self.project(target))
    }

    /// Evaluates the word under a homomorphism given by generator images.
    pub fn evaluate<T, M, I>(&self, images: &[T], identity: T, mul: M, inv: I) -> T
    where
        T: Clone,
        M: Fn(&T, &T) -> T,
        I: Fn(&T) -> T,
    {
        let mut acc = identity.clone();
        for s in &self.syllables {
            let base = if s.exponent.is_negative() {
                inv(&images[s.generator.index()])
            } else {
                images[s.generator.index()].clone()
            };
            let mut n = s.exponent.abs();
            let mut sq = base;
            let mut p = identity.clone();
            let two = BigInt::from(2);
            while !n.is_zero() {
                if (&n % &two).is_one() {
                    p = mul(&p, &sq);
                }
                n /= &two;
                if !n.is_zero() {
                    sq = mul(&sq, &sq);
                }
            }
            acc = mul(&acc, &p);
        }
        acc
    }

    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Word> {
        if text.trim() == "1" {
            return Ok(Word::identity(alphabet));
        }
        let mut p = Parser { src: text.as_bytes(), pos: 0, alphabet };
        let w = p.word()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(w)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return f.write_str("1");
        }
        for (i, s) in self.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(self.alphabet.name(s.generator))?;
            if !s.exponent.is_one() {
                write!(f, "^{}", s.exponent)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn word(&mut self) -> Result<Word> {
        let mut w = Word::identity(self.alphabet);
        let mut terms = 0;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_alphabetic() || c == b'_' || c == b'[' || c == b'(' => {
                    let t = self.term()?;
                    w = w.mul_unchecked(&t);
                    terms += 1;
                }
                _ => break,
            }
        }
        if terms == 0 {
            return Err(self.error("expected a term"));
        }
        Ok(w)
    }

    fn term(&mut self) -> Result<Word> {
        let base = match self.peek() {
            Some(b'[') => {
                self.pos += 1;
                let mut parts = vec![self.word()?];
                self.skip_ws();
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    parts.push(self.word()?);
                    self.skip_ws();
                }
                if parts.len() < 2 {
                    return Err(self.error("commutator needs at least two entries"));
                }
                if self.peek() != Some(b']') {
                    return Err(self.error("expected `]`"));
                }
                self.pos += 1;
                Word::left_normed(&parts)?
            }
            Some(b'(') => {
                self.pos += 1;
                let w = self.word()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                w
            }
            _ => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let g = self
                    .alphabet
                    .lookup(name)
                    .ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
                Word::generator(self.alphabet, g)
            }
        };
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            if matches!(self.peek(), Some(b'-') | Some(b'+')) {
                self.pos += 1;
            }
            let digits = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == digits {
                return Err(self.error("expected an integer exponent"));
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            let e: BigInt = text.parse().map_err(|_| self.error("bad integer"))?;
            if e.is_zero() {
                return Err(Error::ZeroExponent(start));
            }
            return Ok(base.pow(&e));
        }
        Ok(base)
    }
}
