//! Incremental forward-orbit engine for regions.
//!
//! Iterating `Region::image` allocates and reduces rationals at every step.
//! For long chains the same images are computed here on integer state over
//! a fixed common denominator: one step costs a shift/add/compare on
//! integers bounded by the denominator, with no gcd reductions until the
//! region is materialized. Results are bit-identical to iterating
//! `Region::image` (cross-checked by tests).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::bits::Word;
use crate::rat::Rat;
use crate::region::{Flavor, Iv, Region};
use crate::systems::{MetricSystem, SystemId};

/// Integer state of one interval piece over denominator `den`.
#[derive(Clone, Debug)]
struct IvState {
    /// Circle: arc start A (0 <= A < den) and width W (0 < W <= den).
    /// Segment: endpoints A < B within [0, den] (W holds B).
    a: BigInt,
    w: BigInt,
    lo_in: bool,
    hi_in: bool,
}

#[derive(Clone, Debug)]
enum State {
    /// The whole space (fixed under all registered maps).
    Full,
    Empty,
    Circle { den: BigInt, rot_step: Option<BigInt>, pieces: Vec<IvState> },
    Segment { den: BigInt, pieces: Vec<IvState> },
    Shift { words: Vec<Word> },
}

/// Forward images of a region, advanced one exact step at a time.
pub struct FastOrbit {
    flavor: Flavor,
    system: SystemId,
    state: State,
    pub time: u64,
}

fn lcm_many(mut acc: BigInt, xs: impl Iterator<Item = BigInt>) -> BigInt {
    for x in xs {
        acc = acc.lcm(&x);
    }
    acc
}

impl FastOrbit {
    pub fn new(sys: &MetricSystem, region: &Region) -> FastOrbit {
        let flavor = region.flavor;
        let system = sys.id.clone();
        if region.is_empty() {
            return FastOrbit { flavor, system, state: State::Empty, time: 0 };
        }
        if region.is_full(sys) {
            return FastOrbit { flavor, system, state: State::Full, time: 0 };
        }
        let state = match (&sys.id, region.cyl_words()) {
            (SystemId::Shift2, Some(words)) => State::Shift { words: words.to_vec() },
            _ => {
                let pieces = region.iv_pieces().unwrap();
                let mut den = BigInt::one();
                den = lcm_many(
                    den,
                    pieces
                        .iter()
                        .flat_map(|p| [p.lo.denom().clone(), p.hi.denom().clone()].into_iter()),
                );
                if let SystemId::Rotation { q, .. } = &sys.id {
                    den = den.lcm(&BigInt::from(*q));
                }
                let scale = |x: &Rat| -> BigInt { x.numer() * (&den / x.denom()) };
                match sys.id {
                    SystemId::Tent => State::Segment {
                        pieces: pieces
                            .iter()
                            .map(|p| IvState {
                                a: scale(&p.lo),
                                w: scale(&p.hi),
                                lo_in: p.lo_in,
                                hi_in: p.hi_in,
                            })
                            .collect(),
                        den,
                    },
                    SystemId::Doubling | SystemId::Rotation { .. } => {
                        let rot_step = match &sys.id {
                            SystemId::Rotation { p, q } => {
                                Some(BigInt::from(*p) * (&den / BigInt::from(*q)))
                            }
                            _ => None,
                        };
                        State::Circle {
                            pieces: pieces
                                .iter()
                                .map(|p| IvState {
                                    a: scale(&p.lo),
                                    w: scale(&p.hi) - scale(&p.lo),
                                    lo_in: p.lo_in,
                                    hi_in: p.hi_in,
                                })
                                .collect(),
                            den,
                            rot_step,
                        }
                    }
                    SystemId::Shift2 => unreachable!(),
                }
            }
        };
        FastOrbit { flavor, system, state, time: 0 }
    }

    pub fn is_full(&self) -> bool {
        matches!(self.state, State::Full)
    }

    fn step(&mut self) {
        match &mut self.state {
            State::Full | State::Empty => {}
            State::Shift { words } => {
                for w in words.iter_mut() {
                    *w = w.tail();
                }
                if words.iter().any(|w| w.is_empty()) {
                    self.state = State::Full;
                }
            }
            State::Circle { den, rot_step, pieces } => {
                if let Some(stepv) = rot_step {
                    for p in pieces.iter_mut() {
                        p.a += &*stepv;
                        if p.a >= *den {
                            p.a -= &*den;
                        }
                    }
                    return;
                }
                let mut full = false;
                for p in pieces.iter_mut() {
                    p.a = (&p.a) << 1;
                    if p.a >= *den {
                        p.a -= &*den;
                    }
                    p.w = (&p.w) << 1;
                    if p.w > *den || (p.w == *den && self.flavor == Flavor::Compact) {
                        full = true;
                        break;
                    }
                }
                if full {
                    self.state = State::Full;
                }
            }
            State::Segment { den, pieces } => {
                let mut full = false;
                for p in pieces.iter_mut() {
                    let two_a = (&p.a) << 1;
                    let two_b = (&p.w) << 1;
                    if two_b <= *den {
                        p.a = two_a;
                        p.w = two_b;
                    } else if two_a >= *den {
                        let (na, nb) = ((&*den << 1) - &two_b, (&*den << 1) - &two_a);
                        p.a = na;
                        p.w = nb;
                        std::mem::swap(&mut p.lo_in, &mut p.hi_in);
                    } else {
                        // Fold interior: the top value is attained.
                        let left = two_a;
                        let right = (&*den << 1) - &two_b;
                        let (m, m_in) = match left.cmp(&right) {
                            std::cmp::Ordering::Less => (left, p.lo_in),
                            std::cmp::Ordering::Greater => (right, p.hi_in),
                            std::cmp::Ordering::Equal => (left, p.lo_in || p.hi_in),
                        };
                        p.a = m;
                        p.w = den.clone();
                        p.lo_in = m_in;
                        p.hi_in = true;
                    }
                    if p.a.is_zero() && p.w == *den && p.lo_in && p.hi_in {
                        full = true;
                        break;
                    }
                }
                if full {
                    self.state = State::Full;
                }
            }
        }
        if matches!(self.state, State::Full) {
            return;
        }
    }

    pub fn advance_to(&mut self, t: u64) {
        assert!(t >= self.time, "orbit cannot rewind");
        while self.time < t {
            if matches!(self.state, State::Full | State::Empty) {
                self.time = t;
                return;
            }
            self.step();
            self.time += 1;
        }
    }

    /// Materialize the current image as a canonical region.
    pub fn region(&self, sys: &MetricSystem) -> Region {
        match &self.state {
            State::Full => Region::full(sys, self.flavor),
            State::Empty => Region::empty(sys),
            State::Shift { words } => Region::cylinders(sys, self.flavor, words.clone()),
            State::Circle { den, pieces, .. } => {
                let raw: Vec<Iv> = pieces
                    .iter()
                    .map(|p| {
                        let lo = Rat::new(p.a.clone(), den.clone());
                        let hi = Rat::new(&p.a + &p.w, den.clone());
                        Iv::new(lo, hi, p.lo_in, p.hi_in)
                    })
                    .collect();
                Region::from_raw_intervals(sys, self.flavor, raw)
            }
            State::Segment { den, pieces } => {
                let raw: Vec<Iv> = pieces
                    .iter()
                    .map(|p| {
                        Iv::new(
                            Rat::new(p.a.clone(), den.clone()),
                            Rat::new(p.w.clone(), den.clone()),
                            p.lo_in,
                            p.hi_in,
                        )
                    })
                    .collect();
                Region::from_raw_intervals(sys, self.flavor, raw)
            }
        }
    }

    /// Does the current image meet the target? Avoids materializing when
    /// the state is saturated.
    pub fn meets(&self, sys: &MetricSystem, target: &Region) -> bool {
        match &self.state {
            State::Full => !target.is_empty(),
            State::Empty => false,
            _ => !self.region(sys).is_disjoint(sys, target),
        }
    }

    pub fn system(&self) -> &SystemId {
        &self.system
    }
}

impl std::fmt::Debug for FastOrbit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FastOrbit(t={}, full={})", self.time, self.is_full())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn sys(id: &str) -> MetricSystem {
        MetricSystem::parse(id).unwrap()
    }

    #[test]
    fn matches_iterated_image_on_intervals() {
        for id in ["doubling", "tent", "rot:1/3"] {
            let s = sys(id);
            let regions = vec![
                Region::interval_open(&s, rat(1, 48), rat(5, 48)),
                Region::interval_compact(&s, rat(3, 7), rat(4, 7)),
                Region::ball(&s, &crate::systems::Point::rational(5, 12), &rat(1, 100)),
            ];
            for r in regions {
                let mut orbit = FastOrbit::new(&s, &r);
                let mut slow = r.clone();
                for t in 1..=40u64 {
                    orbit.advance_to(t);
                    slow = slow.image(&s);
                    assert_eq!(orbit.region(&s), slow, "{id} at time {t}");
                }
            }
        }
    }

    #[test]
    fn matches_iterated_image_on_cylinders() {
        let s = sys("shift2");
        let r = Region::cylinders(
            &s,
            Flavor::Open,
            vec![Word::parse("0110").unwrap(), Word::parse("10").unwrap()],
        );
        let mut orbit = FastOrbit::new(&s, &r);
        let mut slow = r.clone();
        for t in 1..=8u64 {
            orbit.advance_to(t);
            slow = slow.image(&s);
            assert_eq!(orbit.region(&s), slow, "time {t}");
        }
    }

    #[test]
    fn tent_box_deep_chain_matches() {
        let s = sys("tent");
        let r = Region::interval_compact(&s, rat(1, 5) + rat(1, 1 << 20), rat(1, 5) + rat(2, 1 << 20));
        let mut orbit = FastOrbit::new(&s, &r);
        let mut slow = r.clone();
        for t in 1..=60u64 {
            orbit.advance_to(t);
            slow = slow.image(&s);
            assert_eq!(orbit.region(&s), slow, "time {t}");
        }
    }
}
