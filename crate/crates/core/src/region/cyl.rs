//! Set algebra on finite unions of cylinder sets of the full 2-shift.
//!
//! A cylinder [w] fixes the finite prefix w. A region is a canonical
//! antichain of words: no word is a prefix of another, sibling pairs (w0,
//! w1) are merged to w, and the list is sorted. The empty list is the empty
//! set; the singleton empty word is the whole space.

use crate::bits::{Seq, Word};

/// Canonicalize a list of cylinder words into a sorted, merged antichain.
pub fn normalize(words: Vec<Word>) -> Vec<Word> {
    let mut v = words;
    loop {
        v.sort();
        v.dedup();
        // Absorb words that extend an earlier (shorter) word.
        let mut absorbed: Vec<Word> = Vec::with_capacity(v.len());
        for w in v.into_iter() {
            if absorbed.iter().any(|u| u.is_prefix_of(&w)) {
                continue;
            }
            absorbed.push(w);
        }
        // Merge sibling pairs.
        let mut merged: Vec<Word> = Vec::with_capacity(absorbed.len());
        let mut changed = false;
        let mut i = 0;
        while i < absorbed.len() {
            if i + 1 < absorbed.len() {
                let a = &absorbed[i];
                let b = &absorbed[i + 1];
                if !a.is_empty()
                    && a.len() == b.len()
                    && a.bits()[..a.len() - 1] == b.bits()[..b.len() - 1]
                    && a.bits()[a.len() - 1] == 0
                    && b.bits()[b.len() - 1] == 1
                {
                    merged.push(a.prefix(a.len() - 1));
                    changed = true;
                    i += 2;
                    continue;
                }
            }
            merged.push(absorbed[i].clone());
            i += 1;
        }
        if !changed {
            return merged;
        }
        v = merged;
    }
}

/// Whole space: the empty-word cylinder.
pub fn is_full(a: &[Word]) -> bool {
    a.len() == 1 && a[0].is_empty()
}

pub fn intersect(a: &[Word], b: &[Word]) -> Vec<Word> {
    let mut out = Vec::new();
    for u in a {
        for v in b {
            if u.is_prefix_of(v) {
                out.push(v.clone());
            } else if v.is_prefix_of(u) {
                out.push(u.clone());
            }
        }
    }
    normalize(out)
}

/// [w] minus the union of b.
fn subtract_word(w: &Word, b: &[Word]) -> Vec<Word> {
    if b.iter().any(|u| u.is_prefix_of(w)) {
        return Vec::new();
    }
    if !b.iter().any(|u| w.is_prefix_of(u)) {
        return vec![w.clone()];
    }
    let mut out = subtract_word(&w.extended(0), b);
    out.extend(subtract_word(&w.extended(1), b));
    out
}

pub fn subtract(a: &[Word], b: &[Word]) -> Vec<Word> {
    let mut out = Vec::new();
    for w in a {
        out.extend(subtract_word(w, b));
    }
    normalize(out)
}

pub fn is_subset(a: &[Word], b: &[Word]) -> bool {
    subtract(a, b).is_empty()
}

pub fn contains_seq(a: &[Word], s: &Seq) -> bool {
    a.iter().any(|w| s.starts_with(w))
}
