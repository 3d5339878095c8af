//! Exact set representation: finite unions of rational-endpoint intervals
//! (segment), arcs (circle, wraparound stored as a single piece crossing 0)
//! or cylinder sets (sequence space), with rigorous forward images,
//! preimages, refinement and shrinking.
//!
//! Open regions may be empty; compact regions always have nonempty interior.
//! All operations are exact; emptiness is data, not an error.

mod cyl;
mod fast;
mod line;

pub use fast::FastOrbit;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::{Seq, Word};
use crate::error::Error;
use crate::rat::{frac_mod1, half, one, pow2_inv, rat, zero, Rat};
use crate::systems::{MetricSystem, Point, SpaceKind, SystemId};

pub use line::Iv;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Open,
    Compact,
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Pieces {
    Intervals(Vec<Iv>),
    Cylinders(Vec<Word>),
}

/// A finite-description subset of one system's space.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Region {
    pub system: SystemId,
    pub flavor: Flavor,
    pieces: Pieces,
}

fn space_of(system: &SystemId) -> SpaceKind {
    system.space()
}

/// The full circle is stored as the closed arc from 0 to 1.
fn full_circle_piece() -> Iv {
    Iv::new(zero(), one(), true, true)
}

fn piece_is_full_circle(p: &Iv) -> bool {
    use num_traits::One as _;
    p.lo_in && p.hi_in && p.lo.is_zero() && p.hi.is_one()
}

fn is_full_circle(pieces: &[Iv]) -> bool {
    pieces.len() == 1 && piece_is_full_circle(&pieces[0])
}

/// x < 1, allocation-free, for nonnegative x.
fn lt_one(x: &Rat) -> bool {
    x.numer() < x.denom()
}

fn is_one(x: &Rat) -> bool {
    use num_traits::One as _;
    x.is_one()
}

/// Unroll canonical arcs into line pieces of the fundamental domain [0, 1),
/// where the point 0 exists and 1 does not (an endpoint at 1 is never
/// included; membership of the point 0 is explicit).
fn unroll(arcs: &[Iv]) -> Vec<Iv> {
    let mut out = Vec::new();
    for a in arcs {
        if piece_is_full_circle(a) {
            out.push(Iv::new(zero(), one(), true, false));
            continue;
        }
        if lt_one(&a.hi) {
            out.push(a.clone());
        } else if is_one(&a.hi) {
            out.push(Iv::new(a.lo.clone(), one(), a.lo_in, false));
            if a.hi_in {
                out.push(Iv::new(zero(), zero(), true, true));
            }
        } else {
            // Wrap piece: crosses the point 0, which is interior.
            out.push(Iv::new(a.lo.clone(), one(), a.lo_in, false));
            out.push(Iv::new(zero(), &a.hi - one(), true, a.hi_in));
        }
    }
    line::normalize(out)
}

/// Reassemble normalized line pieces of [0, 1) into canonical arcs.
fn rewrap(pieces: Vec<Iv>) -> Vec<Iv> {
    if pieces.len() == 1
        && pieces[0].lo_in
        && !pieces[0].hi_in
        && pieces[0].lo.is_zero()
        && is_one(&pieces[0].hi)
    {
        return vec![full_circle_piece()];
    }
    let mut v = pieces;
    let touches_end = v.last().map(|p| is_one(&p.hi)).unwrap_or(false);
    let starts_at_zero = v
        .first()
        .map(|p| p.lo.is_zero() && p.lo_in)
        .unwrap_or(false);
    if v.len() >= 2 && touches_end && starts_at_zero {
        let first = v.remove(0);
        let last = v.pop().unwrap();
        let arc = Iv::new(last.lo, one() + first.hi, last.lo_in, first.hi_in);
        if is_one(&arc.width()) && (arc.lo_in || arc.hi_in) {
            return vec![full_circle_piece()];
        }
        v.push(arc);
    }
    v
}

impl Region {
    // ------------------------------------------------------------------
    // Constructors
    // ------------------------------------------------------------------

    fn new_intervals(system: SystemId, flavor: Flavor, raw: Vec<Iv>) -> Region {
        let space = space_of(&system);
        let pieces = match space {
            SpaceKind::Segment => line::normalize(raw),
            SpaceKind::Circle => {
                // A single arc already in canonical position stays as-is;
                // this is the hot path for iterated box images.
                let fast = raw.len() == 1 && {
                    let p = &raw[0];
                    !p.lo.is_negative()
                        && lt_one(&p.lo)
                        && p.lo < p.hi
                        && lt_one(&p.width())
                };
                if fast {
                    raw
                } else {
                    rewrap(unroll(&normalize_raw_arcs(raw)))
                }
            }
            SpaceKind::SequenceSpace => panic!("interval pieces on a sequence space"),
        };
        let r = Region { system, flavor, pieces: Pieces::Intervals(pieces) };
        debug_assert!(r.validate().is_ok(), "invalid region: {r:?}");
        r
    }

    fn new_cylinders(system: SystemId, flavor: Flavor, words: Vec<Word>) -> Region {
        debug_assert_eq!(space_of(&system), SpaceKind::SequenceSpace);
        Region { system, flavor, pieces: Pieces::Cylinders(cyl::normalize(words)) }
    }

    /// One open interval / arc (lo, hi). On the circle, hi may exceed 1 to
    /// wrap across 0; on the segment endpoints are clamped to [0, 1] and
    /// become included where clamping occurred.
    pub fn interval_open(sys: &MetricSystem, lo: Rat, hi: Rat) -> Region {
        match sys.space {
            SpaceKind::Segment => {
                let (lo, lo_in) = if lo.is_negative() { (zero(), true) } else { (lo, false) };
                let (hi, hi_in) = if hi > one() { (one(), true) } else { (hi, false) };
                Region::new_intervals(
                    sys.id.clone(),
                    Flavor::Open,
                    vec![Iv::new(lo, hi, lo_in, hi_in)],
                )
            }
            SpaceKind::Circle => {
                if &hi - &lo >= one() {
                    // An open arc of length > 1 is the whole circle; exactly
                    // 1 leaves out the seam point.
                    if &hi - &lo > one() {
                        return Region::full(sys, Flavor::Open);
                    }
                    let l = frac_mod1(&lo);
                    return Region::new_intervals(
                        sys.id.clone(),
                        Flavor::Open,
                        vec![Iv::new(l.clone(), l + one(), false, false)],
                    );
                }
                let l = frac_mod1(&lo);
                let h = &l + (&hi - &lo);
                Region::new_intervals(sys.id.clone(), Flavor::Open, vec![Iv::new(l, h, false, false)])
            }
            SpaceKind::SequenceSpace => panic!("interval constructor on a sequence space"),
        }
    }

    /// One closed interval / arc [lo, hi].
    pub fn interval_compact(sys: &MetricSystem, lo: Rat, hi: Rat) -> Region {
        match sys.space {
            SpaceKind::Segment => Region::new_intervals(
                sys.id.clone(),
                Flavor::Compact,
                vec![Iv::new(lo.max(zero()), hi.min(one()), true, true)],
            ),
            SpaceKind::Circle => {
                if &hi - &lo >= one() {
                    return Region::full(sys, Flavor::Compact);
                }
                let l = frac_mod1(&lo);
                let h = &l + (&hi - &lo);
                Region::new_intervals(sys.id.clone(), Flavor::Compact, vec![Iv::new(l, h, true, true)])
            }
            SpaceKind::SequenceSpace => panic!("interval constructor on a sequence space"),
        }
    }

    /// Cylinder region from prefix words.
    pub fn cylinders(sys: &MetricSystem, flavor: Flavor, words: Vec<Word>) -> Region {
        Region::new_cylinders(sys.id.clone(), flavor, words)
    }

    /// Region from explicit flagged pieces (validated and canonicalized).
    pub fn from_pieces(sys: &MetricSystem, flavor: Flavor, raw: Vec<Iv>) -> Result<Region, Error> {
        let r = Region::new_intervals(sys.id.clone(), flavor, raw);
        r.validate()?;
        Ok(r)
    }

    /// Canonicalizing constructor for internal fast paths.
    pub(crate) fn from_raw_intervals(sys: &MetricSystem, flavor: Flavor, raw: Vec<Iv>) -> Region {
        Region::new_intervals(sys.id.clone(), flavor, raw)
    }

    pub fn empty(sys: &MetricSystem) -> Region {
        match sys.space {
            SpaceKind::SequenceSpace => {
                Region::new_cylinders(sys.id.clone(), Flavor::Open, vec![])
            }
            _ => Region { system: sys.id.clone(), flavor: Flavor::Open, pieces: Pieces::Intervals(vec![]) },
        }
    }

    pub fn full(sys: &MetricSystem, flavor: Flavor) -> Region {
        match sys.space {
            SpaceKind::SequenceSpace => {
                Region::new_cylinders(sys.id.clone(), flavor, vec![Word::empty()])
            }
            SpaceKind::Circle => Region {
                system: sys.id.clone(),
                flavor,
                pieces: Pieces::Intervals(vec![full_circle_piece()]),
            },
            SpaceKind::Segment => Region {
                system: sys.id.clone(),
                flavor,
                pieces: Pieces::Intervals(vec![Iv::new(zero(), one(), true, true)]),
            },
        }
    }

    /// Open metric ball of the given radius around a point.
    pub fn ball(sys: &MetricSystem, center: &Point, radius: &Rat) -> Region {
        assert!(radius.is_positive(), "ball radius must be positive");
        match (sys.space, center) {
            (SpaceKind::Circle, Point::Rational(c)) => {
                Region::interval_open(sys, c - radius, c + radius)
            }
            (SpaceKind::Segment, Point::Rational(c)) => {
                Region::interval_open(sys, c - radius, c + radius)
            }
            (SpaceKind::SequenceSpace, Point::Seq(s)) => {
                // Smallest t with 2^-t < radius; the prefix cylinder is the ball.
                let mut t = 0u64;
                while &pow2_inv(t) >= radius {
                    t += 1;
                }
                Region::new_cylinders(sys.id.clone(), Flavor::Open, vec![s.prefix(t as usize)])
            }
            _ => panic!("point kind does not match space"),
        }
    }

    // ------------------------------------------------------------------
    // Basic predicates and accessors
    // ------------------------------------------------------------------

    pub fn is_empty(&self) -> bool {
        match &self.pieces {
            Pieces::Intervals(v) => v.is_empty(),
            Pieces::Cylinders(v) => v.is_empty(),
        }
    }

    pub fn is_full(&self, sys: &MetricSystem) -> bool {
        match &self.pieces {
            Pieces::Intervals(v) => match sys.space {
                SpaceKind::Circle => is_full_circle(v),
                _ => v.len() == 1 && v[0] == Iv::new(zero(), one(), true, true),
            },
            Pieces::Cylinders(v) => cyl::is_full(v),
        }
    }

    pub fn iv_pieces(&self) -> Option<&[Iv]> {
        match &self.pieces {
            Pieces::Intervals(v) => Some(v),
            Pieces::Cylinders(_) => None,
        }
    }

    pub fn cyl_words(&self) -> Option<&[Word]> {
        match &self.pieces {
            Pieces::Cylinders(v) => Some(v),
            Pieces::Intervals(_) => None,
        }
    }

    pub fn piece_count(&self) -> usize {
        match &self.pieces {
            Pieces::Intervals(v) => v.len(),
            Pieces::Cylinders(v) => v.len(),
        }
    }

    /// Structural validity: piece kind matches the space, flags match the
    /// flavor, compact pieces have nonempty interior.
    pub fn validate(&self) -> Result<(), Error> {
        let space = space_of(&self.system);
        match (&self.pieces, space) {
            (Pieces::Intervals(v), SpaceKind::Segment) => {
                for p in v {
                    if p.lo.is_negative() || p.hi > one() {
                        return Err(Error::Invalid(format!("piece outside [0,1]: {p:?}")));
                    }
                    if p.lo >= p.hi {
                        return Err(Error::Invalid(format!("degenerate piece: {p:?}")));
                    }
                    match self.flavor {
                        Flavor::Compact => {
                            if !(p.lo_in && p.hi_in) {
                                return Err(Error::Invalid("compact piece with open end".into()));
                            }
                        }
                        Flavor::Open => {
                            if (p.lo_in && !p.lo.is_zero()) || (p.hi_in && p.hi != one()) {
                                return Err(Error::Invalid(
                                    "open piece closed away from the boundary".into(),
                                ));
                            }
                        }
                    }
                }
                Ok(())
            }
            (Pieces::Intervals(v), SpaceKind::Circle) => {
                for p in v {
                    if piece_is_full_circle(p) {
                        continue;
                    }
                    if p.lo.is_negative() || p.lo >= one() || p.hi <= p.lo || p.hi > &p.lo + one() {
                        return Err(Error::Invalid(format!("bad arc: {p:?}")));
                    }
                    let ok = match self.flavor {
                        Flavor::Compact => p.lo_in && p.hi_in && p.width() < one(),
                        Flavor::Open => !p.lo_in && !p.hi_in,
                    };
                    if !ok {
                        return Err(Error::Invalid(format!("arc flags do not match flavor: {p:?}")));
                    }
                }
                Ok(())
            }
            (Pieces::Cylinders(_), SpaceKind::SequenceSpace) => Ok(()),
            _ => Err(Error::Invalid("piece kind does not match space".into())),
        }
    }

    pub fn contains_point(&self, sys: &MetricSystem, p: &Point) -> bool {
        match (&self.pieces, p) {
            (Pieces::Intervals(v), Point::Rational(x)) => match sys.space {
                SpaceKind::Segment => line::contains_point(v, x),
                SpaceKind::Circle => {
                    if is_full_circle(v) {
                        return true;
                    }
                    line::contains_point(&unroll(v), x)
                }
                SpaceKind::SequenceSpace => unreachable!(),
            },
            (Pieces::Cylinders(v), Point::Seq(s)) => cyl::contains_seq(v, s),
            _ => false,
        }
    }

    // ------------------------------------------------------------------
    // Set operations
    // ------------------------------------------------------------------

    fn binary_iv<F>(&self, other: &Region, sys: &MetricSystem, f: F) -> Vec<Iv>
    where
        F: Fn(&[Iv], &[Iv]) -> Vec<Iv>,
    {
        let (a, b) = match (&self.pieces, &other.pieces) {
            (Pieces::Intervals(a), Pieces::Intervals(b)) => (a, b),
            _ => panic!("mixed piece kinds"),
        };
        match sys.space {
            SpaceKind::Segment => f(a, b),
            SpaceKind::Circle => rewrap(f(&unroll(a), &unroll(b))),
            SpaceKind::SequenceSpace => unreachable!(),
        }
    }

    /// Set intersection; the result carries the given flavor.
    pub fn intersect(&self, sys: &MetricSystem, other: &Region, flavor: Flavor) -> Region {
        match (&self.pieces, &other.pieces) {
            (Pieces::Cylinders(a), Pieces::Cylinders(b)) => {
                Region::new_cylinders(self.system.clone(), flavor, cyl::intersect(a, b))
            }
            _ => {
                let pieces = self.binary_iv(other, sys, line::intersect);
                Region { system: self.system.clone(), flavor, pieces: Pieces::Intervals(pieces) }
            }
        }
    }

    /// Set difference (used for seeding fresh families and for test oracles).
    /// The result carries the given flavor and is not flavor-validated:
    /// subtracting a compact set from an open set yields an open set, which
    /// is the only combination the builder uses.
    pub fn subtract(&self, sys: &MetricSystem, other: &Region, flavor: Flavor) -> Region {
        match (&self.pieces, &other.pieces) {
            (Pieces::Cylinders(a), Pieces::Cylinders(b)) => {
                Region::new_cylinders(self.system.clone(), flavor, cyl::subtract(a, b))
            }
            _ => {
                let pieces = self.binary_iv(other, sys, line::subtract);
                Region { system: self.system.clone(), flavor, pieces: Pieces::Intervals(pieces) }
            }
        }
    }

    pub fn is_subset(&self, sys: &MetricSystem, other: &Region) -> bool {
        match (&self.pieces, &other.pieces) {
            (Pieces::Cylinders(a), Pieces::Cylinders(b)) => cyl::is_subset(a, b),
            (Pieces::Intervals(a), Pieces::Intervals(b)) => match sys.space {
                SpaceKind::Segment => line::is_subset(a, b),
                SpaceKind::Circle => line::is_subset(&unroll(a), &unroll(b)),
                SpaceKind::SequenceSpace => unreachable!(),
            },
            _ => panic!("mixed piece kinds"),
        }
    }

    pub fn is_disjoint(&self, sys: &MetricSystem, other: &Region) -> bool {
        self.intersect(sys, other, Flavor::Open).is_empty()
    }

    /// Interior of a compact region, as an open region. Canonical compact
    /// pieces are pairwise separated, so the interior is taken piecewise.
    pub fn interior(&self, sys: &MetricSystem) -> Region {
        match &self.pieces {
            Pieces::Cylinders(v) => {
                Region::new_cylinders(self.system.clone(), Flavor::Open, v.clone())
            }
            Pieces::Intervals(v) => {
                let pieces: Vec<Iv> = match sys.space {
                    SpaceKind::Segment => v
                        .iter()
                        .map(|p| {
                            Iv::new(
                                p.lo.clone(),
                                p.hi.clone(),
                                p.lo_in && p.lo.is_zero(),
                                p.hi_in && p.hi == one(),
                            )
                        })
                        .collect(),
                    SpaceKind::Circle => v
                        .iter()
                        .map(|p| {
                            if piece_is_full_circle(p) {
                                p.clone()
                            } else {
                                Iv::new(p.lo.clone(), p.hi.clone(), false, false)
                            }
                        })
                        .collect(),
                    SpaceKind::SequenceSpace => unreachable!(),
                };
                Region {
                    system: self.system.clone(),
                    flavor: Flavor::Open,
                    pieces: Pieces::Intervals(pieces),
                }
            }
        }
    }

    // ------------------------------------------------------------------
    // Dynamics
    // ------------------------------------------------------------------

    /// Exact forward image under the system map; flavor is preserved.
    pub fn image(&self, sys: &MetricSystem) -> Region {
        match (&sys.id, &self.pieces) {
            (SystemId::Shift2, Pieces::Cylinders(v)) => {
                let words = v.iter().map(|w| w.tail()).collect();
                Region::new_cylinders(self.system.clone(), self.flavor, words)
            }
            (SystemId::Doubling, Pieces::Intervals(v)) => {
                let mut raw = Vec::new();
                for p in v {
                    if is_full_circle(std::slice::from_ref(p)) {
                        return Region::full(sys, self.flavor);
                    }
                    let w2 = p.width() * rat(2, 1);
                    if w2 > one() || (w2 == one() && self.flavor == Flavor::Compact) {
                        return Region::full(sys, self.flavor);
                    }
                    let lo = frac_mod1(&(&p.lo * rat(2, 1)));
                    raw.push(Iv::new(lo.clone(), lo + w2, p.lo_in, p.hi_in));
                }
                Region::new_intervals(self.system.clone(), self.flavor, raw)
            }
            (SystemId::Rotation { .. }, Pieces::Intervals(v)) => {
                let theta = match &sys.id {
                    SystemId::Rotation { p, q } => rat(*p as i64, *q as i64),
                    _ => unreachable!(),
                };
                let mut raw = Vec::new();
                for p in v {
                    if is_full_circle(std::slice::from_ref(p)) {
                        return Region::full(sys, self.flavor);
                    }
                    let lo = frac_mod1(&(&p.lo + &theta));
                    raw.push(Iv::new(lo.clone(), &lo + p.width(), p.lo_in, p.hi_in));
                }
                Region::new_intervals(self.system.clone(), self.flavor, raw)
            }
            (SystemId::Tent, Pieces::Intervals(v)) => {
                let mut raw = Vec::new();
                for p in v {
                    raw.extend(tent_image_piece(p));
                }
                Region::new_intervals(self.system.clone(), self.flavor, raw)
            }
            _ => panic!("piece kind does not match system"),
        }
    }

    /// n-fold forward image.
    pub fn image_pow(&self, sys: &MetricSystem, n: u64) -> Region {
        let mut cur = self.clone();
        for _ in 0..n {
            if cur.is_full(sys) {
                return cur; // surjective maps: full is a fixed point
            }
            cur = cur.image(sys);
        }
        cur
    }

    /// Exact one-step preimage; open regions stay open.
    pub fn preimage(&self, sys: &MetricSystem) -> Region {
        match (&sys.id, &self.pieces) {
            (SystemId::Shift2, Pieces::Cylinders(v)) => {
                let mut words = Vec::with_capacity(v.len() * 2);
                for w in v {
                    words.push(w.prepended(0));
                    words.push(w.prepended(1));
                }
                Region::new_cylinders(self.system.clone(), self.flavor, words)
            }
            (SystemId::Doubling, Pieces::Intervals(v)) => {
                if is_full_circle(v) {
                    return Region::full(sys, self.flavor);
                }
                let mut raw = Vec::new();
                for p in v {
                    let lo = &p.lo / rat(2, 1);
                    let w = p.width() / rat(2, 1);
                    raw.push(Iv::new(lo.clone(), &lo + &w, p.lo_in, p.hi_in));
                    let lo2 = lo + half();
                    raw.push(Iv::new(lo2.clone(), lo2 + w, p.lo_in, p.hi_in));
                }
                Region::new_intervals(self.system.clone(), self.flavor, raw)
            }
            (SystemId::Rotation { .. }, Pieces::Intervals(v)) => {
                if is_full_circle(v) {
                    return Region::full(sys, self.flavor);
                }
                let theta = match &sys.id {
                    SystemId::Rotation { p, q } => rat(*p as i64, *q as i64),
                    _ => unreachable!(),
                };
                let mut raw = Vec::new();
                for p in v {
                    let lo = frac_mod1(&(&p.lo - &theta));
                    raw.push(Iv::new(lo.clone(), &lo + p.width(), p.lo_in, p.hi_in));
                }
                Region::new_intervals(self.system.clone(), self.flavor, raw)
            }
            (SystemId::Tent, Pieces::Intervals(v)) => {
                let mut raw = Vec::new();
                for p in v {
                    // Rising branch x -> 2x, falling branch x -> 2 - 2x.
                    raw.push(Iv::new(
                        &p.lo / rat(2, 1),
                        &p.hi / rat(2, 1),
                        p.lo_in,
                        p.hi_in,
                    ));
                    raw.push(Iv::new(
                        one() - &p.hi / rat(2, 1),
                        one() - &p.lo / rat(2, 1),
                        p.hi_in,
                        p.lo_in,
                    ));
                }
                Region::new_intervals(self.system.clone(), self.flavor, raw)
            }
            _ => panic!("piece kind does not match system"),
        }
    }

    pub fn preimage_pow(&self, sys: &MetricSystem, n: u64) -> Region {
        let mut cur = self.clone();
        for _ in 0..n {
            cur = cur.preimage(sys);
        }
        cur
    }

    // ------------------------------------------------------------------
    // Metric quantities (computed on closures; exact)
    // ------------------------------------------------------------------

    /// Exact diameter sup{d(x, y) : x, y in the region}; 0 when empty.
    pub fn diameter(&self, sys: &MetricSystem) -> Rat {
        match (&self.pieces, sys.space) {
            (Pieces::Intervals(v), SpaceKind::Segment) => {
                if v.is_empty() {
                    return zero();
                }
                let lo = v.first().unwrap().lo.clone();
                let hi = v.last().unwrap().hi.clone();
                hi - lo
            }
            (Pieces::Intervals(v), SpaceKind::Circle) => {
                if v.is_empty() {
                    return zero();
                }
                if is_full_circle(v) {
                    return half();
                }
                // Antipodal containment forces the maximum 1/2.
                let shifted = self.rotate_arcs(&half());
                if !self
                    .closure_overlap(sys, &shifted)
                    .is_empty()
                {
                    return half();
                }
                let e = self.arc_endpoints();
                let mut best = zero();
                for x in &e {
                    for y in &e {
                        let d = circle_dist(x, y);
                        if d > best {
                            best = d;
                        }
                    }
                }
                best
            }
            (Pieces::Cylinders(v), _) => {
                let mut best = zero();
                for (i, u) in v.iter().enumerate() {
                    let du = pow2_inv(u.len() as u64);
                    if du > best {
                        best = du;
                    }
                    for w in &v[i + 1..] {
                        let d = cyl_pair_sup(u, w);
                        if d > best {
                            best = d;
                        }
                    }
                }
                best
            }
            _ => unreachable!(),
        }
    }

    /// Exact inf distance between two nonempty regions (0 if closures meet).
    pub fn dist_inf(&self, sys: &MetricSystem, other: &Region) -> Rat {
        assert!(!self.is_empty() && !other.is_empty());
        match (&self.pieces, &other.pieces) {
            (Pieces::Cylinders(a), Pieces::Cylinders(b)) => {
                let mut best: Option<Rat> = None;
                for u in a {
                    for w in b {
                        let d = if u.is_prefix_of(w) || w.is_prefix_of(u) {
                            zero()
                        } else {
                            cyl_pair_sup(u, w) // incompatible: distance is constant
                        };
                        if best.as_ref().map(|b| &d < b).unwrap_or(true) {
                            best = Some(d);
                        }
                    }
                }
                best.unwrap()
            }
            _ => {
                if !self.closure_overlap(sys, other).is_empty() {
                    return zero();
                }
                let (ea, eb) = (self.arc_or_segment_endpoints(sys), other.arc_or_segment_endpoints(sys));
                let mut best: Option<Rat> = None;
                for x in &ea {
                    for y in &eb {
                        let d = match sys.space {
                            SpaceKind::Circle => circle_dist(x, y),
                            _ => (x - y).abs(),
                        };
                        if best.as_ref().map(|b| &d < b).unwrap_or(true) {
                            best = Some(d);
                        }
                    }
                }
                best.unwrap()
            }
        }
    }

    /// Exact sup distance between two nonempty regions.
    pub fn dist_sup(&self, sys: &MetricSystem, other: &Region) -> Rat {
        assert!(!self.is_empty() && !other.is_empty());
        match (&self.pieces, &other.pieces) {
            (Pieces::Cylinders(a), Pieces::Cylinders(b)) => {
                let mut best = zero();
                for u in a {
                    for w in b {
                        let d = cyl_pair_sup(u, w);
                        if d > best {
                            best = d;
                        }
                    }
                }
                best
            }
            (Pieces::Intervals(_), Pieces::Intervals(_)) => match sys.space {
                SpaceKind::Segment => {
                    let a = self.iv_pieces().unwrap();
                    let b = other.iv_pieces().unwrap();
                    let (alo, ahi) = (&a.first().unwrap().lo, &a.last().unwrap().hi);
                    let (blo, bhi) = (&b.first().unwrap().lo, &b.last().unwrap().hi);
                    (ahi - blo).max(bhi - alo).max(zero())
                }
                SpaceKind::Circle => {
                    if self.is_full(sys) || other.is_full(sys) {
                        return half();
                    }
                    let shifted = other.rotate_arcs(&half());
                    if !self.closure_overlap(sys, &shifted).is_empty() {
                        return half();
                    }
                    let (ea, eb) = (self.arc_endpoints(), other.arc_endpoints());
                    let mut best = zero();
                    for x in &ea {
                        for y in &eb {
                            let d = circle_dist(x, y);
                            if d > best {
                                best = d;
                            }
                        }
                    }
                    best
                }
                SpaceKind::SequenceSpace => unreachable!(),
            },
            _ => panic!("mixed piece kinds"),
        }
    }

    /// Exact inf distance from a point to a nonempty region.
    pub fn dist_inf_point(&self, sys: &MetricSystem, p: &Point) -> Rat {
        self.point_region_dist(sys, p, false)
    }

    /// Exact sup distance from a point to a nonempty region.
    pub fn dist_sup_point(&self, sys: &MetricSystem, p: &Point) -> Rat {
        self.point_region_dist(sys, p, true)
    }

    fn point_region_dist(&self, sys: &MetricSystem, p: &Point, sup: bool) -> Rat {
        assert!(!self.is_empty());
        match (&self.pieces, p) {
            (Pieces::Cylinders(v), Point::Seq(s)) => {
                let mut best: Option<Rat> = None;
                for w in v {
                    let d = match (0..w.len()).find(|&i| s.bit(i) != w.bit(i)) {
                        Some(i) => pow2_inv(i as u64), // constant over the cylinder
                        None => {
                            if sup {
                                pow2_inv(w.len() as u64)
                            } else {
                                zero()
                            }
                        }
                    };
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            if sup {
                                &d > b
                            } else {
                                &d < b
                            }
                        }
                    };
                    if better {
                        best = Some(d);
                    }
                }
                best.unwrap()
            }
            (Pieces::Intervals(_), Point::Rational(x)) => {
                if !sup && self.contains_point_closure(sys, x) {
                    return zero();
                }
                if sup && sys.space == SpaceKind::Circle {
                    let anti = frac_mod1(&(x + half()));
                    if self.contains_point_closure(sys, &anti) || self.is_full(sys) {
                        return half();
                    }
                }
                let e = self.arc_or_segment_endpoints(sys);
                let mut best: Option<Rat> = None;
                for y in &e {
                    let d = match sys.space {
                        SpaceKind::Circle => circle_dist(x, y),
                        _ => (x - y).abs(),
                    };
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            if sup {
                                &d > b
                            } else {
                                &d < b
                            }
                        }
                    };
                    if better {
                        best = Some(d);
                    }
                }
                best.unwrap()
            }
            _ => panic!("point kind does not match region"),
        }
    }

    fn contains_point_closure(&self, sys: &MetricSystem, x: &Rat) -> bool {
        match &self.pieces {
            Pieces::Intervals(v) => {
                let closed: Vec<Iv> = v
                    .iter()
                    .map(|p| Iv::new(p.lo.clone(), p.hi.clone(), true, true))
                    .collect();
                match sys.space {
                    SpaceKind::Segment => line::contains_point(&closed, x),
                    SpaceKind::Circle => {
                        is_full_circle(v) || line::contains_point(&unroll(&closed), x)
                    }
                    SpaceKind::SequenceSpace => unreachable!(),
                }
            }
            Pieces::Cylinders(_) => unreachable!(),
        }
    }

    /// Intersection of closures (used for exact zero-distance tests).
    fn closure_overlap(&self, sys: &MetricSystem, other: &Region) -> Vec<Iv> {
        let close = |v: &[Iv]| -> Vec<Iv> {
            v.iter()
                .map(|p| Iv::new(p.lo.clone(), p.hi.clone(), true, true))
                .collect()
        };
        let a = close(self.iv_pieces().unwrap());
        let b = close(other.iv_pieces().unwrap());
        match sys.space {
            SpaceKind::Segment => line::intersect(&a, &b),
            SpaceKind::Circle => line::intersect(&unroll(&a), &unroll(&b)),
            SpaceKind::SequenceSpace => unreachable!(),
        }
    }

    /// Closure endpoints of all pieces, reduced mod 1 on the circle.
    fn arc_endpoints(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        for p in self.iv_pieces().unwrap() {
            out.push(frac_mod1(&p.lo));
            out.push(frac_mod1(&p.hi));
        }
        out
    }

    fn arc_or_segment_endpoints(&self, sys: &MetricSystem) -> Vec<Rat> {
        match sys.space {
            SpaceKind::Circle => self.arc_endpoints(),
            _ => {
                let mut out = Vec::new();
                for p in self.iv_pieces().unwrap() {
                    out.push(p.lo.clone());
                    out.push(p.hi.clone());
                }
                out
            }
        }
    }

    /// Arcs rotated by theta (circle only; closure flags irrelevant here).
    fn rotate_arcs(&self, theta: &Rat) -> Region {
        let v = self.iv_pieces().unwrap();
        if is_full_circle(v) {
            return self.clone();
        }
        let raw: Vec<Iv> = v
            .iter()
            .map(|p| {
                let lo = frac_mod1(&(&p.lo + theta));
                Iv::new(lo.clone(), &lo + p.width(), p.lo_in, p.hi_in)
            })
            .collect();
        Region::new_intervals(self.system.clone(), self.flavor, raw)
    }

    // ------------------------------------------------------------------
    // Sampling (test oracles)
    // ------------------------------------------------------------------

    /// Deterministic rational sample points inside the region, several per
    /// piece. Endpoints are included only where they belong to the set.
    pub fn sample_points(&self, per_piece: u32) -> Vec<Point> {
        let mut out = Vec::new();
        match &self.pieces {
            Pieces::Intervals(v) => {
                for p in v {
                    let w = p.width();
                    if w.is_zero() {
                        out.push(Point::Rational(frac_mod1(&p.lo)));
                        continue;
                    }
                    for i in 1..=per_piece {
                        let x = &p.lo + &w * rat(i as i64, per_piece as i64 + 1);
                        out.push(Point::Rational(frac_mod1(&x)));
                    }
                    if p.lo_in {
                        out.push(Point::Rational(frac_mod1(&p.lo)));
                    }
                    if p.hi_in {
                        out.push(Point::Rational(frac_mod1(&p.hi)));
                    }
                }
            }
            Pieces::Cylinders(v) => {
                for w in v {
                    for tail in ["0", "1", "01"] {
                        let per = Word::parse(tail).unwrap();
                        let seq = Seq::new(w.clone(), per).unwrap();
                        out.push(Point::Seq(seq));
                    }
                }
            }
        }
        out
    }
}

/// Image of one segment piece under the tent map, splitting at the fold.
fn tent_image_piece(p: &Iv) -> Vec<Iv> {
    let h = half();
    if p.hi <= h {
        vec![Iv::new(&p.lo * rat(2, 1), &p.hi * rat(2, 1), p.lo_in, p.hi_in)]
    } else if p.lo >= h {
        vec![Iv::new(
            rat(2, 1) - &p.hi * rat(2, 1),
            rat(2, 1) - &p.lo * rat(2, 1),
            p.hi_in,
            p.lo_in,
        )]
    } else {
        // Fold point interior: the maximum value 1 is attained.
        vec![
            Iv::new(&p.lo * rat(2, 1), one(), p.lo_in, true),
            Iv::new(rat(2, 1) - &p.hi * rat(2, 1), one(), p.hi_in, true),
        ]
    }
}

/// Wraparound distance between two circle points in [0, 1).
fn circle_dist(x: &Rat, y: &Rat) -> Rat {
    let d = (x - y).abs();
    let w = one() - &d;
    d.min(w)
}

/// Sup distance between points of two cylinders.
fn cyl_pair_sup(u: &Word, w: &Word) -> Rat {
    let n = u.len().min(w.len());
    match (0..n).find(|&i| u.bit(i) != w.bit(i)) {
        Some(i) => pow2_inv(i as u64),
        None => pow2_inv(n as u64),
    }
}

/// Normalize raw arcs (lo may be any rational, width in (0, 1]) into the
/// canonical form used by the circle constructors.
fn normalize_raw_arcs(raw: Vec<Iv>) -> Vec<Iv> {
    raw.into_iter()
        .filter(|p| !p.is_empty())
        .map(|p| {
            if piece_is_full_circle(&p) {
                return p;
            }
            let lo = frac_mod1(&p.lo);
            let w = p.width();
            debug_assert!(w <= one(), "arc wider than the circle: {p:?}");
            Iv::new(lo.clone(), lo + w, p.lo_in, p.hi_in)
        })
        .collect()
}

// ----------------------------------------------------------------------
// Refinement and shrinking
// ----------------------------------------------------------------------

/// base intersected with the exact t-step preimage of every (t, target)
/// constraint. Exactness makes emptiness decidable; an empty open result is
/// a valid value. Piece counts grow with the constraint times, so this is
/// meant for modest times; the steering engine uses pointwise pullbacks
/// instead.
pub fn preimage_refine(
    sys: &MetricSystem,
    base: &Region,
    constraints: &[(u64, Region)],
) -> Region {
    let mut cur = base.clone();
    for (t, target) in constraints {
        let pre = target.preimage_pow(sys, *t);
        cur = cur.intersect(sys, &pre, Flavor::Open);
        if cur.is_empty() {
            break;
        }
    }
    cur
}

/// A compact box inside `enclosing` with `c` interior, diameter at most
/// `cap`, whose `total_time`-step image lies inside `target`.
///
/// Candidates are tried in a fixed order: the enclosing box itself, then
/// boxes centered at `c` of radius r0 / 2^i (r0 = exact distance from c to
/// the enclosing piece's boundary; for cylinders, successive prefix
/// extensions of c). The first success is returned; success is monotone in
/// i, so the scan is implemented as a binary search for the same index.
pub fn shrink_around(
    sys: &MetricSystem,
    c: &Point,
    enclosing: &Region,
    target: &Region,
    total_time: u64,
    cap: &Rat,
    budget: u32,
) -> Result<Region, Error> {
    if enclosing.flavor != Flavor::Compact || enclosing.piece_count() != 1 {
        return Err(Error::Invalid("enclosing must be a single compact box".into()));
    }
    if !enclosing.interior(sys).contains_point(sys, c) {
        return Err(Error::Invalid("center not interior to the enclosing box".into()));
    }
    let ok = |b: &Region| -> bool {
        &b.diameter(sys) <= cap && b.image_pow(sys, total_time).is_subset(sys, target)
    };
    if ok(enclosing) {
        return Ok(enclosing.clone());
    }
    let candidate: Box<dyn Fn(u32) -> Region> = match (sys.space, c) {
        (SpaceKind::SequenceSpace, Point::Seq(s)) => {
            let base_len = enclosing.cyl_words().unwrap()[0].len();
            let s = s.clone();
            let sysc = sys.clone();
            Box::new(move |i: u32| {
                let w = s.prefix(base_len + 1 + i as usize);
                Region::cylinders(&sysc, Flavor::Compact, vec![w])
            })
        }
        (_, Point::Rational(x)) => {
            let piece = enclosing.iv_pieces().unwrap()[0].clone();
            // Radius to the nearest boundary; for the full space use a
            // quarter of the diameter.
            let r0 = if enclosing.is_full(sys) {
                sys.space_diameter() / rat(2, 1)
            } else {
                let xx = if sys.space == SpaceKind::Circle && *x < piece.lo {
                    x + one()
                } else {
                    x.clone()
                };
                (&xx - &piece.lo).min(&piece.hi - &xx)
            };
            if !r0.is_positive() {
                return Err(Error::Invalid("center not interior to the enclosing box".into()));
            }
            let x = x.clone();
            let sysc = sys.clone();
            Box::new(move |i: u32| {
                let r = &r0 / Rat::from_integer(num_bigint::BigInt::from(1) << i);
                Region::interval_compact(&sysc, &x - &r, &x + &r)
            })
        }
        _ => return Err(Error::Invalid("point kind does not match space".into())),
    };
    if !ok(&candidate(budget)) {
        return Err(Error::ShrinkFailure(format!(
            "no admissible box within {budget} halvings (time {total_time})"
        )));
    }
    let (mut lo, mut hi) = (0u32, budget);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(&candidate(mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidate(lo))
}

// ----------------------------------------------------------------------
// Serialization
// ----------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RegionRepr {
    system: SystemId,
    flavor: Flavor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pieces: Option<Vec<[String; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ends: Option<Vec<[bool; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cylinders: Option<Vec<String>>,
}

impl Serialize for Region {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match &self.pieces {
            Pieces::Intervals(v) => {
                let pieces: Vec<[String; 4]> = v
                    .iter()
                    .map(|p| {
                        [
                            p.lo.numer().to_string(),
                            p.lo.denom().to_string(),
                            p.hi.numer().to_string(),
                            p.hi.denom().to_string(),
                        ]
                    })
                    .collect();
                let default_in = self.flavor == Flavor::Compact;
                let ends_needed = v.iter().any(|p| p.lo_in != default_in || p.hi_in != default_in);
                RegionRepr {
                    system: self.system.clone(),
                    flavor: self.flavor,
                    pieces: Some(pieces),
                    ends: if ends_needed {
                        Some(v.iter().map(|p| [p.lo_in, p.hi_in]).collect())
                    } else {
                        None
                    },
                    cylinders: None,
                }
            }
            Pieces::Cylinders(v) => RegionRepr {
                system: self.system.clone(),
                flavor: self.flavor,
                pieces: None,
                ends: None,
                cylinders: Some(v.iter().map(|w| w.to_string()).collect()),
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Region {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = RegionRepr::deserialize(d)?;
        let space = space_of(&repr.system);
        match (space, repr.pieces, repr.cylinders) {
            (SpaceKind::SequenceSpace, None, Some(cs)) => {
                let words: Result<Vec<Word>, Error> = cs.iter().map(|s| Word::parse(s)).collect();
                let words = words.map_err(DeError::custom)?;
                Ok(Region::new_cylinders(repr.system, repr.flavor, words))
            }
            (SpaceKind::Segment | SpaceKind::Circle, Some(ps), None) => {
                let default_in = repr.flavor == Flavor::Compact;
                let mut raw = Vec::with_capacity(ps.len());
                for (i, quad) in ps.iter().enumerate() {
                    let parse = |s: &String| -> Result<num_bigint::BigInt, D::Error> {
                        s.parse().map_err(|_| DeError::custom(format!("bad integer {s:?}")))
                    };
                    let lo = Rat::new(parse(&quad[0])?, {
                        let d = parse(&quad[1])?;
                        if d.is_zero() {
                            return Err(DeError::custom("zero denominator"));
                        }
                        d
                    });
                    let hi = Rat::new(parse(&quad[2])?, {
                        let d = parse(&quad[3])?;
                        if d.is_zero() {
                            return Err(DeError::custom("zero denominator"));
                        }
                        d
                    });
                    let (lo_in, hi_in) = match &repr.ends {
                        Some(ends) => {
                            let e = ends
                                .get(i)
                                .ok_or_else(|| DeError::custom("ends shorter than pieces"))?;
                            (e[0], e[1])
                        }
                        None => (default_in, default_in),
                    };
                    if lo >= hi {
                        return Err(DeError::custom(format!("degenerate piece {quad:?}")));
                    }
                    raw.push(Iv::new(lo, hi, lo_in, hi_in));
                }
                let region = Region { system: repr.system, flavor: repr.flavor, pieces: Pieces::Intervals(raw) };
                region.validate().map_err(DeError::custom)?;
                // Canonical form is required of serialized regions.
                let canon = Region::new_intervals(
                    region.system.clone(),
                    region.flavor,
                    region.iv_pieces().unwrap().to_vec(),
                );
                Ok(canon)
            }
            _ => Err(DeError::custom("piece kind does not match the system's space")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(id: &str) -> MetricSystem {
        MetricSystem::parse(id).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn cylr(sysid: &str, flavor: Flavor, words: &[&str]) -> Region {
        Region::cylinders(&sys(sysid), flavor, words.iter().map(|s| w(s)).collect())
    }

    #[test]
    fn image_examples() {
        let d = sys("doubling");
        let u = Region::interval_open(&d, rat(0, 1), rat(1, 4));
        assert_eq!(u.image(&d), Region::interval_open(&d, rat(0, 1), rat(1, 2)));

        // Tent image of [1/4, 3/4] splits at the fold and merges to [1/2, 1].
        let t = sys("tent");
        let k = Region::interval_compact(&t, rat(1, 4), rat(3, 4));
        assert_eq!(k.image(&t), Region::interval_compact(&t, rat(1, 2), rat(1, 1)));

        let s = sys("shift2");
        let c = cylr("shift2", Flavor::Open, &["01"]);
        assert_eq!(c.image(&s), cylr("shift2", Flavor::Open, &["1"]));
    }

    #[test]
    fn doubling_saturates_to_full() {
        let d = sys("doubling");
        let u = Region::interval_open(&d, rat(0, 1), rat(1, 8));
        let mut cur = u;
        for _ in 0..2 {
            cur = cur.image(&d);
        }
        // (0, 1/2) -> (0, 1): the circle minus the seam point.
        cur = cur.image(&d);
        assert!(!cur.is_full(&d));
        assert!(!cur.contains_point(&d, &Point::rational(0, 1)));
        assert!(cur.contains_point(&d, &Point::rational(1, 2)));
        // One more step covers everything.
        cur = cur.image(&d);
        assert!(cur.is_full(&d));
    }

    #[test]
    fn tent_open_image_keeps_boundary_semantics() {
        let t = sys("tent");
        // t((1/4, 3/4)) = (1/2, 1]: 1 attained at the interior fold point.
        let u = Region::interval_open(&t, rat(1, 4), rat(3, 4));
        let img = u.image(&t);
        assert!(img.contains_point(&t, &Point::rational(1, 1)));
        assert!(!img.contains_point(&t, &Point::rational(1, 2)));
        // Next image contains 0 (closed end survives exactly).
        let img2 = img.image(&t);
        assert!(img2.contains_point(&t, &Point::rational(0, 1)));
    }

    #[test]
    fn wraparound_canonical_form() {
        let d = sys("doubling");
        // Arc crossing the seam stored as one wrapping piece.
        let a = Region::interval_open(&d, rat(7, 8), rat(9, 8));
        assert_eq!(a.piece_count(), 1);
        assert!(a.contains_point(&d, &Point::rational(0, 1)));
        assert!(a.contains_point(&d, &Point::rational(15, 16)));
        assert!(!a.contains_point(&d, &Point::rational(1, 8)));
        // Its doubling image is (7/4, 9/4) = (3/4, 1/4) wrapped.
        let img = a.image(&d);
        assert!(img.contains_point(&d, &Point::rational(0, 1)));
        assert!(img.contains_point(&d, &Point::rational(15, 16)));
        assert!(!img.contains_point(&d, &Point::rational(1, 2)));
    }

    #[test]
    fn preimage_refine_examples() {
        let d = sys("doubling");
        let base = Region::interval_open(&d, rat(0, 1), rat(1, 2));
        let refined = preimage_refine(&d, &base, &[(1, base.clone())]);
        assert_eq!(refined, Region::interval_open(&d, rat(0, 1), rat(1, 4)));

        // Empty constraint list returns the base.
        assert_eq!(preimage_refine(&d, &base, &[]), base);

        // Two-step shift preimages of a cylinder intersected with a cylinder.
        let s = sys("shift2");
        let b = cylr("shift2", Flavor::Open, &["0"]);
        let t = cylr("shift2", Flavor::Open, &["1"]);
        let refined = preimage_refine(&s, &b, &[(2, t)]);
        assert_eq!(refined, cylr("shift2", Flavor::Open, &["001", "011"]));
    }

    #[test]
    fn preimage_refine_may_be_empty() {
        let r = sys("rot:1/3");
        let base = Region::interval_open(&r, rat(0, 1), rat(1, 6));
        let target = Region::interval_open(&r, rat(1, 2), rat(2, 3));
        let refined = preimage_refine(&r, &base, &[(1, base.clone()), (2, target)]);
        assert!(refined.is_empty());
    }

    #[test]
    fn shrink_around_doubling_worked_example() {
        let d = sys("doubling");
        let c = Point::rational(1, 6);
        let enclosing = Region::interval_compact(&d, rat(0, 1), rat(1, 4));
        let target = Region::interval_open(&d, rat(7, 24), rat(3, 8));
        let got = shrink_around(&d, &c, &enclosing, &target, 1, &one(), 64).unwrap();
        let want = Region::interval_compact(&d, rat(1, 6) - rat(1, 96), rat(1, 6) + rat(1, 96));
        assert_eq!(got, want);
        // Postconditions, re-checked exactly.
        assert!(got.image_pow(&d, 1).is_subset(&d, &target));
        assert!(got.interior(&d).contains_point(&d, &c));
        assert!(got.is_subset(&d, &enclosing));
    }

    #[test]
    fn shrink_around_identity_time() {
        let t = sys("tent");
        let enclosing = Region::interval_compact(&t, rat(1, 8), rat(1, 4));
        let target = Region::interval_open(&t, rat(0, 1), rat(1, 2));
        let c = Point::rational(3, 16);
        let got = shrink_around(&t, &c, &enclosing, &target, 0, &one(), 64).unwrap();
        assert_eq!(got, enclosing);
    }

    #[test]
    fn shrink_around_shift_example() {
        let s = sys("shift2");
        let c = Point::Seq(Seq::periodic(w("01")).unwrap());
        let enclosing = cylr("shift2", Flavor::Compact, &["0"]);
        let target = cylr("shift2", Flavor::Open, &["10"]);
        let got = shrink_around(&s, &c, &enclosing, &target, 1, &one(), 64).unwrap();
        assert_eq!(got, cylr("shift2", Flavor::Compact, &["010"]));
    }

    #[test]
    fn shrink_around_fails_on_impossible_budget() {
        let d = sys("doubling");
        let c = Point::rational(1, 6);
        let enclosing = Region::interval_compact(&d, rat(0, 1), rat(1, 4));
        // Target disjoint from the reachable set at time 0.
        let target = Region::interval_open(&d, rat(1, 2), rat(5, 8));
        let err = shrink_around(&d, &c, &enclosing, &target, 0, &one(), 16);
        assert!(matches!(err, Err(Error::ShrinkFailure(_))));
    }

    #[test]
    fn diameters() {
        let d = sys("doubling");
        assert_eq!(Region::full(&d, Flavor::Open).diameter(&d), half());
        let a = Region::interval_open(&d, rat(0, 1), rat(1, 8));
        assert_eq!(a.diameter(&d), rat(1, 8));
        // Two arcs around the circle achieve the antipodal bound.
        let b = Region::interval_compact(&d, rat(0, 1), rat(1, 16));
        let c = Region::interval_compact(&d, rat(1, 2), rat(9, 16));
        let u = b.intersect(&d, &Region::full(&d, Flavor::Compact), Flavor::Compact);
        assert_eq!(u.dist_sup(&d, &c), half());

        let t = sys("tent");
        let r = Region::interval_compact(&t, rat(1, 8), rat(1, 4));
        assert_eq!(r.diameter(&t), rat(1, 8));

        let s = sys("shift2");
        let r = cylr("shift2", Flavor::Compact, &["010"]);
        assert_eq!(r.diameter(&s), rat(1, 8));
        let r2 = cylr("shift2", Flavor::Compact, &["010", "1"]);
        assert_eq!(r2.diameter(&s), one());
    }

    #[test]
    fn distances() {
        let t = sys("tent");
        let a = Region::interval_compact(&t, rat(0, 1), rat(1, 8));
        let b = Region::interval_compact(&t, rat(3, 4), rat(7, 8));
        assert_eq!(a.dist_inf(&t, &b), rat(5, 8));
        assert_eq!(a.dist_sup(&t, &b), rat(7, 8));
        assert_eq!(a.dist_inf_point(&t, &Point::rational(1, 2)), rat(3, 8));
        assert_eq!(a.dist_sup_point(&t, &Point::rational(1, 2)), rat(1, 2));

        let d = sys("doubling");
        let a = Region::interval_open(&d, rat(15, 16), rat(17, 16));
        let b = Region::interval_open(&d, rat(1, 8), rat(3, 16));
        assert_eq!(a.dist_inf(&d, &b), rat(1, 16));

        let s = sys("shift2");
        let a = cylr("shift2", Flavor::Open, &["00"]);
        let b = cylr("shift2", Flavor::Open, &["01"]);
        assert_eq!(a.dist_inf(&s, &b), half());
        assert_eq!(a.dist_sup(&s, &b), half());
        let c = cylr("shift2", Flavor::Open, &["0"]);
        assert_eq!(a.dist_inf(&s, &c), zero());
    }

    #[test]
    fn image_monotone_and_piecewise() {
        for id in ["doubling", "tent", "rot:1/3"] {
            let s = sys(id);
            let big = Region::interval_open(&s, rat(1, 8), rat(5, 8));
            let small = Region::interval_open(&s, rat(1, 4), rat(3, 8));
            assert!(small.is_subset(&s, &big));
            assert!(small.image(&s).is_subset(&s, &big.image(&s)), "system {id}");
        }
        let s = sys("shift2");
        let big = cylr("shift2", Flavor::Open, &["0"]);
        let small = cylr("shift2", Flavor::Open, &["010"]);
        assert!(small.image(&s).is_subset(&s, &big.image(&s)));
    }

    #[test]
    fn serde_round_trip() {
        let d = sys("doubling");
        let t = sys("tent");
        let cases = vec![
            Region::interval_open(&d, rat(7, 8), rat(9, 8)),
            Region::full(&d, Flavor::Open),
            Region::interval_compact(&t, rat(1, 3), rat(2, 3)),
            Region::ball(&t, &Point::rational(0, 1), &rat(1, 4)),
            cylr("shift2", Flavor::Compact, &["010", "110"]),
            Region::empty(&t),
        ];
        for r in cases {
            let j = serde_json::to_string(&r).unwrap();
            let back: Region = serde_json::from_str(&j).unwrap();
            assert_eq!(back, r, "json: {j}");
        }
        // Boundary-closed open region records its ends.
        let b = Region::ball(&t, &Point::rational(0, 1), &rat(1, 4));
        let j = serde_json::to_string(&b).unwrap();
        assert!(j.contains("\"ends\""), "json: {j}");
    }

    #[test]
    fn ball_semantics() {
        let d = sys("doubling");
        let b = Region::ball(&d, &Point::rational(0, 1), &rat(1, 4));
        assert!(b.contains_point(&d, &Point::rational(15, 16)));
        assert!(b.contains_point(&d, &Point::rational(3, 16)));
        assert!(!b.contains_point(&d, &Point::rational(1, 4)));
        assert!(b.diameter(&d) <= half());

        let t = sys("tent");
        let b = Region::ball(&t, &Point::rational(0, 1), &rat(1, 4));
        assert!(b.contains_point(&t, &Point::rational(0, 1)));
        assert!(!b.contains_point(&t, &Point::rational(1, 4)));

        let s = sys("shift2");
        let center = Point::Seq(Seq::periodic(w("01")).unwrap());
        let b = Region::ball(&s, &center, &rat(1, 4));
        assert!(b.contains_point(&s, &center));
        assert!(b.diameter(&s) < rat(1, 4));
    }

    #[test]
    fn subtract_open_minus_compact() {
        let t = sys("tent");
        let u = Region::interval_open(&t, rat(0, 1), rat(1, 2));
        let k = Region::interval_compact(&t, rat(1, 8), rat(1, 4));
        let diff = u.subtract(&t, &k, Flavor::Open);
        assert!(diff.validate().is_ok());
        assert!(!diff.contains_point(&t, &Point::rational(1, 8)));
        assert!(diff.contains_point(&t, &Point::rational(1, 16)));
        assert!(diff.contains_point(&t, &Point::rational(3, 8)));
    }
}
