//! Registry of exactly representable dynamical systems.
//!
//! Each system has closed, exact point arithmetic: rational points stay
//! rational under the map, eventually periodic sequences stay eventually
//! periodic under the shift. Only such systems are registered; there are no
//! floating-point code paths anywhere.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::{Seq, Word};
use crate::error::Error;
use crate::rat::{self, frac_mod1, pow2_inv, rat, Rat};

/// Stable system identifier ("doubling", "tent", "shift2", "rot:p/q").
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SystemId {
    Doubling,
    Tent,
    Shift2,
    Rotation { p: u64, q: u64 },
}

impl SystemId {
    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "doubling" => Ok(SystemId::Doubling),
            "tent" => Ok(SystemId::Tent),
            "shift2" => Ok(SystemId::Shift2),
            _ => {
                if let Some(frac) = s.strip_prefix("rot:") {
                    let (p, q) = frac
                        .split_once('/')
                        .ok_or_else(|| Error::Invalid(format!("bad rotation id: {s:?}")))?;
                    let p: u64 = p
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad rotation id: {s:?}")))?;
                    let q: u64 = q
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad rotation id: {s:?}")))?;
                    if q == 0 || p >= q {
                        return Err(Error::Invalid(format!(
                            "rotation angle must be p/q with 0 <= p < q, got {s:?}"
                        )));
                    }
                    Ok(SystemId::Rotation { p, q })
                } else {
                    Err(Error::Invalid(format!("unknown system id: {s:?}")))
                }
            }
        }
    }

    /// The built-in ids (rotation shown with its control angle).
    pub fn registry() -> Vec<SystemId> {
        vec![
            SystemId::Doubling,
            SystemId::Tent,
            SystemId::Shift2,
            SystemId::Rotation { p: 1, q: 3 },
        ]
    }

    /// The three weakly mixing members of the registry.
    pub fn mixing() -> Vec<SystemId> {
        vec![SystemId::Doubling, SystemId::Tent, SystemId::Shift2]
    }
}

impl SystemId {
    /// The kind of space this system acts on (allocation-free).
    pub fn space(&self) -> SpaceKind {
        match self {
            SystemId::Doubling | SystemId::Rotation { .. } => SpaceKind::Circle,
            SystemId::Tent => SpaceKind::Segment,
            SystemId::Shift2 => SpaceKind::SequenceSpace,
        }
    }
}

impl std::fmt::Display for SystemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SystemId::Doubling => write!(f, "doubling"),
            SystemId::Tent => write!(f, "tent"),
            SystemId::Shift2 => write!(f, "shift2"),
            SystemId::Rotation { p, q } => write!(f, "rot:{p}/{q}"),
        }
    }
}

impl TryFrom<String> for SystemId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        SystemId::parse(&s)
    }
}

impl From<SystemId> for String {
    fn from(id: SystemId) -> String {
        id.to_string()
    }
}

/// The kind of underlying space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceKind {
    /// [0, 1) with the wraparound metric min(|x-y|, 1-|x-y|).
    Circle,
    /// [0, 1] with |x-y|.
    Segment,
    /// {0,1}^N with d(x, y) = 2^-min{i: x_i != y_i}.
    SequenceSpace,
}

/// A point of one of the registered spaces.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    /// Exact rational in [0, 1) (circle) or [0, 1] (segment),
    /// serialized as "a/b".
    Rational(#[serde(with = "rat_string")] Rat),
    /// Eventually periodic binary sequence.
    Seq(Seq),
}

mod rat_string {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rat::fmt_rat(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        rat::parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

impl Point {
    pub fn rational(n: i64, d: i64) -> Point {
        Point::Rational(rat(n, d))
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Point::Rational(r) => Some(r),
            Point::Seq(_) => None,
        }
    }

    pub fn as_seq(&self) -> Option<&Seq> {
        match self {
            Point::Seq(s) => Some(s),
            Point::Rational(_) => None,
        }
    }
}

impl std::fmt::Debug for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Point::Rational(r) => write!(f, "{}", rat::fmt_rat(r)),
            Point::Seq(s) => write!(f, "{s}"),
        }
    }
}

/// A registered system: id, space kind, exact diameter, fixed points.
#[derive(Clone, Debug)]
pub struct MetricSystem {
    pub id: SystemId,
    pub space: SpaceKind,
    beta: Rat,
    fixed_points: Vec<Point>,
}

impl MetricSystem {
    pub fn from_id(id: &SystemId) -> MetricSystem {
        match id {
            SystemId::Doubling => MetricSystem {
                id: id.clone(),
                space: SpaceKind::Circle,
                beta: rat(1, 2),
                fixed_points: vec![Point::rational(0, 1)],
            },
            SystemId::Tent => MetricSystem {
                id: id.clone(),
                space: SpaceKind::Segment,
                beta: rat(1, 1),
                // 0 and 2/3 are both fixed; 0 is the canonical one.
                fixed_points: vec![Point::rational(0, 1), Point::rational(2, 3)],
            },
            SystemId::Shift2 => MetricSystem {
                id: id.clone(),
                space: SpaceKind::SequenceSpace,
                beta: rat(1, 1),
                fixed_points: vec![
                    Point::Seq(Seq::periodic(Word::parse("0").unwrap()).unwrap()),
                    Point::Seq(Seq::periodic(Word::parse("1").unwrap()).unwrap()),
                ],
            },
            // A nontrivial rotation has no fixed points.
            SystemId::Rotation { .. } => MetricSystem {
                id: id.clone(),
                space: SpaceKind::Circle,
                beta: rat(1, 2),
                fixed_points: vec![],
            },
        }
    }

    pub fn parse(s: &str) -> Result<MetricSystem, Error> {
        Ok(MetricSystem::from_id(&SystemId::parse(s)?))
    }

    pub fn space_diameter(&self) -> Rat {
        self.beta.clone()
    }

    pub fn fixed_points(&self) -> &[Point] {
        &self.fixed_points
    }

    /// The canonical fixed point (first in the registry list).
    pub fn fixed_point(&self) -> Option<Point> {
        self.fixed_points.first().cloned()
    }

    fn rotation_angle(&self) -> Option<Rat> {
        match &self.id {
            SystemId::Rotation { p, q } => Some(rat(*p as i64, *q as i64)),
            _ => None,
        }
    }

    /// Is p a valid point of this space?
    pub fn point_in_space(&self, p: &Point) -> bool {
        match (self.space, p) {
            (SpaceKind::Circle, Point::Rational(r)) => !r.is_negative() && r < &rat(1, 1),
            (SpaceKind::Segment, Point::Rational(r)) => !r.is_negative() && r <= &rat(1, 1),
            (SpaceKind::SequenceSpace, Point::Seq(_)) => true,
            _ => false,
        }
    }

    /// Exact image of a point under the system map.
    pub fn apply_point(&self, p: &Point) -> Point {
        debug_assert!(self.point_in_space(p), "{p:?} not in {}", self.id);
        match (&self.id, p) {
            (SystemId::Doubling, Point::Rational(x)) => {
                Point::Rational(frac_mod1(&(x * rat(2, 1))))
            }
            (SystemId::Tent, Point::Rational(x)) => {
                let y = rat(1, 1) - (x * rat(2, 1) - rat(1, 1)).abs();
                Point::Rational(y)
            }
            (SystemId::Shift2, Point::Seq(s)) => Point::Seq(s.shifted()),
            (SystemId::Rotation { .. }, Point::Rational(x)) => {
                Point::Rational(frac_mod1(&(x + self.rotation_angle().unwrap())))
            }
            _ => unreachable!("point kind does not match system"),
        }
    }

    /// n-fold exact iteration.
    pub fn iterate_point(&self, p: &Point, n: u64) -> Point {
        let mut cur = p.clone();
        for _ in 0..n {
            cur = self.apply_point(&cur);
        }
        cur
    }

    /// All exact one-step preimages of a point.
    pub fn point_preimages(&self, p: &Point) -> Vec<Point> {
        match (&self.id, p) {
            (SystemId::Doubling, Point::Rational(y)) => {
                vec![
                    Point::Rational(y / rat(2, 1)),
                    Point::Rational(y / rat(2, 1) + rat(1, 2)),
                ]
            }
            (SystemId::Tent, Point::Rational(y)) => {
                let a = y / rat(2, 1);
                let b = rat(1, 1) - y / rat(2, 1);
                if a == b {
                    vec![Point::Rational(a)]
                } else {
                    vec![Point::Rational(a), Point::Rational(b)]
                }
            }
            (SystemId::Shift2, Point::Seq(s)) => {
                vec![Point::Seq(s.prepended(0)), Point::Seq(s.prepended(1))]
            }
            (SystemId::Rotation { .. }, Point::Rational(y)) => {
                vec![Point::Rational(frac_mod1(
                    &(y - self.rotation_angle().unwrap()),
                ))]
            }
            _ => unreachable!("point kind does not match system"),
        }
    }

    /// A canonical m-step preimage of p (smallest branch at each step).
    pub fn preimage_point(&self, p: &Point, m: u64) -> Point {
        let mut cur = p.clone();
        for _ in 0..m {
            cur = self.point_preimages(&cur).into_iter().next().unwrap();
        }
        cur
    }

    /// Exact metric value per the space's metric.
    pub fn distance(&self, p: &Point, q: &Point) -> Rat {
        match (self.space, p, q) {
            (SpaceKind::Circle, Point::Rational(x), Point::Rational(y)) => {
                let d = (x - y).abs();
                let wrap = rat(1, 1) - &d;
                d.min(wrap)
            }
            (SpaceKind::Segment, Point::Rational(x), Point::Rational(y)) => (x - y).abs(),
            (SpaceKind::SequenceSpace, Point::Seq(a), Point::Seq(b)) => match a.first_diff(b) {
                None => Rat::zero(),
                Some(i) => pow2_inv(i as u64),
            },
            _ => panic!("point kinds do not match space"),
        }
    }

    /// Grid of sample points used by sup-style searches. For interval spaces
    /// this is {i/resolution}; for the sequence space, all periodic points
    /// with primitive period length <= log2(resolution).
    pub fn grid_points(&self, resolution: u64) -> Vec<Point> {
        match self.space {
            SpaceKind::Circle => (0..resolution)
                .map(|i| Point::Rational(rat(i as i64, resolution as i64)))
                .collect(),
            SpaceKind::Segment => (0..=resolution)
                .map(|i| Point::Rational(rat(i as i64, resolution as i64)))
                .collect(),
            SpaceKind::SequenceSpace => {
                let mut max_len = 0u32;
                while (1u64 << (max_len + 1)) <= resolution {
                    max_len += 1;
                }
                let max_len = max_len.max(1);
                let mut pts = Vec::new();
                for len in 1..=max_len {
                    for code in 0u64..(1 << len) {
                        let bits: Vec<u8> = (0..len)
                            .map(|i| ((code >> (len - 1 - i)) & 1) as u8)
                            .collect();
                        if let Ok(s) = Seq::periodic(Word::from_bits(&bits)) {
                            let p = Point::Seq(s);
                            if !pts.contains(&p) {
                                pts.push(p);
                            }
                        }
                    }
                }
                pts
            }
        }
    }

    /// A point achieving sup_x rho(f^n(x), x) exactly, for the registered map.
    pub fn rigidity_witness(&self, n: u64) -> Point {
        match &self.id {
            // f^n(x) - x = (2^n - 1) x (mod 1); x = 1/(2 (2^n - 1)) puts the
            // difference exactly at the antipode.
            SystemId::Doubling => {
                let denom = (num_bigint::BigInt::from(1) << n) - 1;
                Point::Rational(Rat::new(num_bigint::BigInt::from(1), denom * 2))
            }
            // f(1) = 0 and 0 is fixed, so f^n(1) = 0 for every n >= 1.
            SystemId::Tent => Point::rational(1, 1),
            // 0^n 1 repeated: the n-th shift flips the leading symbol.
            SystemId::Shift2 => {
                let mut bits = vec![0u8; n as usize];
                bits.push(1);
                Point::Seq(Seq::periodic(Word::from_bits(&bits)).unwrap())
            }
            // Displacement is constant: every point witnesses it.
            SystemId::Rotation { .. } => Point::rational(0, 1),
        }
    }

    /// Certified lower bound for delta_n = sup_x rho(f^n(x), x): the exact
    /// maximum of rho(f^n(x), x) over `resolution` grid points, the listed
    /// fixed points and the documented witness for n. Returns the bound and
    /// a maximizing point.
    pub fn rigidity_gap(&self, n: u64, resolution: u64) -> (Rat, Point) {
        assert!(n >= 1 && resolution >= 2);
        let mut candidates = self.grid_points(resolution);
        candidates.extend(self.fixed_points.iter().cloned());
        candidates.push(self.rigidity_witness(n));
        let mut best: Option<(Rat, Point)> = None;
        for p in candidates {
            let img = self.iterate_point(&p, n);
            let d = self.distance(&img, &p);
            match &best {
                Some((bd, _)) if *bd >= d => {}
                _ => best = Some((d, p)),
            }
        }
        best.expect("candidate set is nonempty")
    }

    /// The point of the space at maximal distance from `from`, exactly.
    pub fn farthest_point(&self, from: &Point) -> Point {
        match (self.space, from) {
            (SpaceKind::Circle, Point::Rational(x)) => {
                Point::Rational(frac_mod1(&(x + rat(1, 2))))
            }
            (SpaceKind::Segment, Point::Rational(x)) => {
                if *x <= rat(1, 2) {
                    Point::rational(1, 1)
                } else {
                    Point::rational(0, 1)
                }
            }
            (SpaceKind::SequenceSpace, Point::Seq(s)) => Point::Seq(s.flipped()),
            _ => panic!("point kind does not match space"),
        }
    }

    /// Distinct points of the forward orbit of an eventually periodic point
    /// (exact and finite: the orbit closure equals the orbit itself).
    pub fn orbit_points(&self, p: &Point) -> Vec<Point> {
        let mut pts = Vec::new();
        let mut cur = p.clone();
        loop {
            if pts.contains(&cur) {
                return pts;
            }
            pts.push(cur.clone());
            cur = self.apply_point(&cur);
            if pts.len() > 100_000 {
                panic!("orbit did not close; point is not eventually periodic");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(id: &str) -> MetricSystem {
        MetricSystem::parse(id).unwrap()
    }

    fn seq(pre: &str, per: &str) -> Point {
        Point::Seq(Seq::new(Word::parse(pre).unwrap(), Word::parse(per).unwrap()).unwrap())
    }

    #[test]
    fn id_round_trip() {
        for s in ["doubling", "tent", "shift2", "rot:1/3"] {
            assert_eq!(SystemId::parse(s).unwrap().to_string(), s);
        }
        assert!(SystemId::parse("rot:3/3").is_err());
        assert!(SystemId::parse("logistic").is_err());
    }

    #[test]
    fn apply_examples() {
        assert_eq!(
            sys("doubling").apply_point(&Point::rational(1, 3)),
            Point::rational(2, 3)
        );
        // Hand oracle: 1 - |2*1 - 1| = 0.
        assert_eq!(
            sys("tent").apply_point(&Point::rational(1, 1)),
            Point::rational(0, 1)
        );
        assert_eq!(sys("shift2").apply_point(&seq("10", "1")), seq("0", "1"));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            sys("doubling").distance(&Point::rational(1, 8), &Point::rational(7, 8)),
            rat(1, 4)
        );
        assert_eq!(
            sys("tent").distance(&Point::rational(0, 1), &Point::rational(1, 1)),
            rat(1, 1)
        );
        assert_eq!(sys("shift2").distance(&seq("", "0"), &seq("", "1")), rat(1, 1));
    }

    #[test]
    fn diameter_matches_grid_oracle() {
        for id in ["doubling", "tent", "shift2"] {
            let s = sys(id);
            let grid = s.grid_points(16);
            let sup = grid
                .iter()
                .flat_map(|p| grid.iter().map(|q| s.distance(p, q)))
                .max()
                .unwrap();
            assert_eq!(sup, s.space_diameter(), "system {id}");
        }
    }

    #[test]
    fn fixed_points_are_fixed() {
        for id in SystemId::registry() {
            let s = MetricSystem::from_id(&id);
            for p in s.fixed_points() {
                assert_eq!(&s.apply_point(p), p, "system {id}");
            }
        }
    }

    #[test]
    fn metric_axioms_on_grid() {
        for id in ["doubling", "tent", "shift2"] {
            let s = sys(id);
            let grid = s.grid_points(8);
            for p in &grid {
                assert!(s.distance(p, p).is_zero());
                for q in &grid {
                    assert_eq!(s.distance(p, q), s.distance(q, p));
                    for r in &grid {
                        assert!(s.distance(p, r) <= s.distance(p, q) + s.distance(q, r));
                    }
                }
            }
        }
    }

    #[test]
    fn rigidity_examples() {
        let (d, w) = sys("tent").rigidity_gap(1, 8);
        assert_eq!(d, rat(1, 1));
        assert_eq!(w, Point::rational(1, 1));

        let (d, w) = sys("doubling").rigidity_gap(1, 8);
        assert_eq!(d, rat(1, 2));
        assert_eq!(w, Point::rational(1, 2));

        let (d, _) = sys("shift2").rigidity_gap(3, 8);
        assert_eq!(d, rat(1, 1));
        let wit = sys("shift2").rigidity_witness(3);
        let img = sys("shift2").iterate_point(&wit, 3);
        assert_eq!(sys("shift2").distance(&img, &wit), rat(1, 1));
    }

    #[test]
    fn rigidity_monotone_in_resolution_and_bounded() {
        for id in ["doubling", "tent", "shift2"] {
            let s = sys(id);
            let mut prev = Rat::zero();
            for res in [2u64, 4, 8, 16] {
                let (d, _) = s.rigidity_gap(2, res);
                assert!(d >= prev);
                assert!(d <= s.space_diameter());
                prev = d;
            }
        }
    }

    #[test]
    fn rotation_is_periodic() {
        let s = sys("rot:1/3");
        for p in s.grid_points(7) {
            assert_eq!(s.iterate_point(&p, 3), p);
        }
        // Constant displacement: delta_3k = 0, delta elsewhere = d(n/3, 0).
        let (d, _) = s.rigidity_gap(3, 6);
        assert!(d.is_zero());
        let (d, _) = s.rigidity_gap(1, 6);
        assert_eq!(d, rat(1, 3));
    }

    #[test]
    fn step_distance_bounded_by_diameter() {
        for id in SystemId::registry() {
            let s = MetricSystem::from_id(&id);
            for p in s.grid_points(16) {
                let q = s.apply_point(&p);
                assert!(s.distance(&p, &q) <= s.space_diameter());
            }
        }
    }

    #[test]
    fn preimages_invert_the_map() {
        for id in SystemId::registry() {
            let s = MetricSystem::from_id(&id);
            for p in s.grid_points(8) {
                for pre in s.point_preimages(&p) {
                    assert_eq!(s.apply_point(&pre), p, "system {id}");
                }
            }
        }
    }
}
