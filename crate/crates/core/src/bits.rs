//! Binary words and eventually periodic binary sequences.
//!
//! Sequence-space points are stored as (preperiod, period) word pairs in a
//! canonical form: the period is primitive (not a power of a shorter word)
//! and the preperiod is as short as possible. Canonical forms make equality,
//! shift application and first-disagreement indices exactly computable.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A finite word over {0, 1}.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        Word(bits.to_vec())
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => return Err(Error::Invalid(format!("not a binary word: {s:?}"))),
            }
        }
        Ok(Word(bits))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn push(&mut self, b: u8) {
        debug_assert!(b <= 1);
        self.0.push(b);
    }

    pub fn extended(&self, b: u8) -> Word {
        let mut w = self.clone();
        w.push(b);
        w
    }

    /// Drop the first symbol (no-op on the empty word).
    pub fn tail(&self) -> Word {
        if self.0.is_empty() {
            self.clone()
        } else {
            Word(self.0[1..].to_vec())
        }
    }

    pub fn prepended(&self, b: u8) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(b);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// Left rotation by one (for periodic tails under the shift).
    pub fn rotated_left(&self) -> Word {
        if self.0.len() <= 1 {
            return self.clone();
        }
        let mut v = self.0[1..].to_vec();
        v.push(self.0[0]);
        Word(v)
    }

    pub fn rotated_right(&self) -> Word {
        if self.0.len() <= 1 {
            return self.clone();
        }
        let mut v = vec![self.0[self.0.len() - 1]];
        v.extend_from_slice(&self.0[..self.0.len() - 1]);
        Word(v)
    }

    /// Shortest word u with self = u^k.
    pub fn primitive_root(&self) -> Word {
        let n = self.0.len();
        for p in 1..=n {
            if n % p == 0 && (0..n).all(|i| self.0[i] == self.0[i % p]) {
                return Word(self.0[..p].to_vec());
            }
        }
        self.clone()
    }

    pub fn flipped(&self) -> Word {
        Word(self.0.iter().map(|b| 1 - b).collect())
    }

    pub fn repeated(&self, times: usize) -> Word {
        let mut v = Vec::with_capacity(self.0.len() * times);
        for _ in 0..times {
            v.extend_from_slice(&self.0);
        }
        Word(v)
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl TryFrom<String> for Word {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        Word::parse(&s)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

/// An eventually periodic binary sequence: preperiod word followed by an
/// infinitely repeated nonempty period word. Kept canonical (primitive
/// period, minimal preperiod) so equality is structural.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Seq {
    pre: Word,
    per: Word,
}

impl Seq {
    pub fn new(pre: Word, per: Word) -> Result<Self, Error> {
        if per.is_empty() {
            return Err(Error::Invalid("period word must be nonempty".into()));
        }
        let mut s = Seq { pre, per };
        s.canonicalize();
        Ok(s)
    }

    /// Purely periodic sequence w w w ...
    pub fn periodic(per: Word) -> Result<Self, Error> {
        Seq::new(Word::empty(), per)
    }

    pub fn pre(&self) -> &Word {
        &self.pre
    }

    pub fn per(&self) -> &Word {
        &self.per
    }

    fn canonicalize(&mut self) {
        self.per = self.per.primitive_root();
        // Absorb preperiod symbols that already agree with the rotated period.
        while let Some(&last) = self.pre.bits().last() {
            if last == *self.per.bits().last().unwrap() {
                self.per = self.per.rotated_right();
                let mut v = self.pre.bits().to_vec();
                v.pop();
                self.pre = Word(v);
            } else {
                break;
            }
        }
    }

    /// Symbol at index i.
    pub fn bit(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre.bit(i)
        } else {
            self.per.bit((i - self.pre.len()) % self.per.len())
        }
    }

    /// Word of the first n symbols.
    pub fn prefix(&self, n: usize) -> Word {
        Word((0..n).map(|i| self.bit(i)).collect())
    }

    /// Shift: drop the first symbol.
    pub fn shifted(&self) -> Seq {
        if self.pre.is_empty() {
            Seq::new(Word::empty(), self.per.rotated_left()).unwrap()
        } else {
            Seq::new(self.pre.tail(), self.per.clone()).unwrap()
        }
    }

    pub fn prepended(&self, b: u8) -> Seq {
        Seq::new(self.pre.prepended(b), self.per.clone()).unwrap()
    }

    /// Index of the first symbol where the sequences differ, if any.
    /// The comparison window `pre1 + pre2 + lcm(per1, per2)` is exhaustive:
    /// two eventually periodic sequences agreeing on it agree everywhere.
    pub fn first_diff(&self, other: &Seq) -> Option<usize> {
        let lcm = num_integer::lcm(self.per.len(), other.per.len());
        let bound = self.pre.len() + other.pre.len() + lcm;
        (0..bound).find(|&i| self.bit(i) != other.bit(i))
    }

    pub fn starts_with(&self, w: &Word) -> bool {
        (0..w.len()).all(|i| self.bit(i) == w.bit(i))
    }

    /// Pointwise complement (exchanges 0 and 1 everywhere).
    pub fn flipped(&self) -> Seq {
        Seq::new(self.pre.flipped(), self.per.flipped()).unwrap()
    }

    /// Number of distinct shifts of this sequence (preperiod + period).
    pub fn orbit_size(&self) -> usize {
        self.pre.len() + self.per.len()
    }
}

impl std::fmt::Display for Seq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({})*", self.pre, self.per)
    }
}

impl std::fmt::Debug for Seq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn word_basics() {
        assert!(w("01").is_prefix_of(&w("0110")));
        assert!(!w("10").is_prefix_of(&w("0110")));
        assert_eq!(w("0110").tail(), w("110"));
        assert_eq!(w("0101").primitive_root(), w("01"));
        assert_eq!(w("011").primitive_root(), w("011"));
        assert_eq!(w("01").flipped(), w("10"));
    }

    #[test]
    fn seq_canonical_forms() {
        // 10(1)* shifts to 0(1)*.
        let x = Seq::new(w("10"), w("1")).unwrap();
        let y = x.shifted();
        assert_eq!(y, Seq::new(w("0"), w("1")).unwrap());
        // 01(10)* is the same sequence as 0(11 0... ) canonicalized:
        // 011010... vs (011)* etc. Check absorption: 0(10)* == (01)*.
        let a = Seq::new(w("0"), w("10")).unwrap();
        let b = Seq::periodic(w("01")).unwrap();
        assert_eq!(a, b);
        // Period primitivity.
        let c = Seq::periodic(w("0101")).unwrap();
        assert_eq!(c.per(), &w("01"));
    }

    #[test]
    fn seq_first_diff() {
        let a = Seq::periodic(w("0")).unwrap();
        let b = Seq::periodic(w("1")).unwrap();
        assert_eq!(a.first_diff(&b), Some(0));
        let c = Seq::new(w("0"), w("1")).unwrap();
        assert_eq!(a.first_diff(&c), Some(1));
        assert_eq!(a.first_diff(&a), None);
        let d = Seq::periodic(w("01")).unwrap();
        let e = Seq::periodic(w("0011")).unwrap();
        assert_eq!(d.first_diff(&e), Some(1)); // 0101... vs 0011...
    }

    #[test]
    fn seq_shift_is_exact() {
        let x = Seq::new(w("1"), w("01")).unwrap();
        let mut cur = x.clone();
        for i in 1..10 {
            cur = cur.shifted();
            for j in 0..8 {
                assert_eq!(cur.bit(j), x.bit(i + j));
            }
        }
    }
}
