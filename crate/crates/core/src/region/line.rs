//! Set algebra on finite unions of rational intervals with endpoint flags.
//!
//! A piece is a nonempty interval [lo, hi] with two booleans recording
//! whether each endpoint belongs to the set. The functions here are plain
//! one-dimensional set operations; circle semantics (wraparound) are layered
//! on top by the caller, which unrolls arcs into pieces of the fundamental
//! domain before calling in.

use crate::rat::Rat;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Iv {
    pub lo: Rat,
    pub hi: Rat,
    pub lo_in: bool,
    pub hi_in: bool,
}

impl Iv {
    pub fn new(lo: Rat, hi: Rat, lo_in: bool, hi_in: bool) -> Iv {
        Iv { lo, hi, lo_in, hi_in }
    }

    pub fn closed(lo: Rat, hi: Rat) -> Iv {
        Iv::new(lo, hi, true, true)
    }

    pub fn open(lo: Rat, hi: Rat) -> Iv {
        Iv::new(lo, hi, false, false)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_in && self.hi_in))
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rat) -> bool {
        (x > &self.lo || (x == &self.lo && self.lo_in))
            && (x < &self.hi || (x == &self.hi && self.hi_in))
    }
}

/// Can b be appended to a as one interval? Requires a.lo <= b.lo.
fn joinable(a: &Iv, b: &Iv) -> bool {
    b.lo < a.hi || (b.lo == a.hi && (a.hi_in || b.lo_in))
}

/// Sort, drop empty pieces and merge everything that joins. An included
/// lower endpoint at the same position sorts first (it covers more).
pub fn normalize(pieces: Vec<Iv>) -> Vec<Iv> {
    let mut v: Vec<Iv> = pieces.into_iter().filter(|p| !p.is_empty()).collect();
    v.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_in.cmp(&a.lo_in)));
    let mut out: Vec<Iv> = Vec::with_capacity(v.len());
    for p in v {
        match out.last_mut() {
            Some(last) if joinable(last, &p) => {
                if p.lo == last.lo {
                    last.lo_in = last.lo_in || p.lo_in;
                }
                if p.hi > last.hi {
                    last.hi = p.hi;
                    last.hi_in = p.hi_in;
                } else if p.hi == last.hi {
                    last.hi_in = last.hi_in || p.hi_in;
                }
            }
            _ => out.push(p),
        }
    }
    out
}

fn intersect_pair(a: &Iv, b: &Iv) -> Iv {
    let (lo, lo_in) = if a.lo > b.lo {
        (a.lo.clone(), a.lo_in)
    } else if b.lo > a.lo {
        (b.lo.clone(), b.lo_in)
    } else {
        (a.lo.clone(), a.lo_in && b.lo_in)
    };
    let (hi, hi_in) = if a.hi < b.hi {
        (a.hi.clone(), a.hi_in)
    } else if b.hi < a.hi {
        (b.hi.clone(), b.hi_in)
    } else {
        (a.hi.clone(), a.hi_in && b.hi_in)
    };
    Iv::new(lo, hi, lo_in, hi_in)
}

pub fn intersect(a: &[Iv], b: &[Iv]) -> Vec<Iv> {
    let mut out = Vec::new();
    for p in a {
        for q in b {
            let r = intersect_pair(p, q);
            if !r.is_empty() {
                out.push(r);
            }
        }
    }
    normalize(out)
}

/// p minus q, at most two pieces.
fn subtract_pair(p: &Iv, q: &Iv) -> Vec<Iv> {
    let mut out = Vec::new();
    // Left remainder: points of p strictly before q starts.
    let left = Iv::new(p.lo.clone(), q.lo.clone(), p.lo_in, !q.lo_in);
    let left = intersect_pair(p, &left);
    if !left.is_empty() {
        out.push(left);
    }
    // Right remainder.
    let right = Iv::new(q.hi.clone(), p.hi.clone(), !q.hi_in, p.hi_in);
    let right = intersect_pair(p, &right);
    if !right.is_empty() {
        out.push(right);
    }
    out
}

pub fn subtract(a: &[Iv], b: &[Iv]) -> Vec<Iv> {
    let mut cur: Vec<Iv> = a.to_vec();
    for q in b {
        let mut next = Vec::new();
        for p in &cur {
            next.extend(subtract_pair(p, q));
        }
        cur = next;
        if cur.is_empty() {
            break;
        }
    }
    normalize(cur)
}

pub fn is_subset(a: &[Iv], b: &[Iv]) -> bool {
    subtract(a, b).is_empty()
}

pub fn contains_point(a: &[Iv], x: &Rat) -> bool {
    a.iter().any(|p| p.contains(x))
}
