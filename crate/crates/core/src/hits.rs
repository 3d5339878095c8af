//! Exact hit-time sets N(U, V) = {n : f^{n+s}(U) meets V} up to a horizon,
//! consecutive-run detection, and joint divisibility-filtered hit sets.
//!
//! Region images are exact, so membership of every n <= horizon is decided,
//! not sampled: the returned sets are complete at the horizon.

use serde::{Deserialize, Serialize};

use crate::region::{Flavor, Region};
use crate::systems::{MetricSystem, Point};

/// A hit-set source: an open region or a single point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source {
    Region(Region),
    Point(Point),
}

/// Incrementally grown forward-orbit cache for one source. Queries across
/// many targets at many times reuse the same image sequence.
pub struct OrbitCache<'a> {
    sys: &'a MetricSystem,
    region_images: Vec<Region>,
    point_images: Vec<Point>,
}

impl<'a> OrbitCache<'a> {
    pub fn new(sys: &'a MetricSystem, source: &Source) -> OrbitCache<'a> {
        match source {
            Source::Region(r) => OrbitCache {
                sys,
                region_images: vec![r.clone()],
                point_images: vec![],
            },
            Source::Point(p) => OrbitCache {
                sys,
                region_images: vec![],
                point_images: vec![p.clone()],
            },
        }
    }

    pub fn from_region(sys: &'a MetricSystem, r: &Region) -> OrbitCache<'a> {
        OrbitCache::new(sys, &Source::Region(r.clone()))
    }

    /// Does the n-step image of the source meet (for regions) or lie in
    /// (for points) the target?
    pub fn hits(&mut self, n: u64, target: &Region) -> bool {
        let n = n as usize;
        if !self.point_images.is_empty() {
            while self.point_images.len() <= n {
                let last = self.point_images.last().unwrap();
                self.point_images.push(self.sys.apply_point(last));
            }
            target.contains_point(self.sys, &self.point_images[n])
        } else {
            while self.region_images.len() <= n {
                let last = self.region_images.last().unwrap();
                // Full is a fixed point of the image map; stop growing.
                if last.is_full(self.sys) {
                    let full = last.clone();
                    self.region_images.push(full);
                    continue;
                }
                self.region_images.push(last.image(self.sys));
            }
            !self.region_images[n].is_disjoint(self.sys, target)
        }
    }

    /// The exact n-step image (regions only).
    pub fn image_at(&mut self, n: u64, probe: &Region) -> Region {
        self.hits(n, probe); // grow the cache
        self.region_images[n as usize].clone()
    }

    /// The exact n-step iterate (points only).
    pub fn point_at(&mut self, n: u64) -> Point {
        let n = n as usize;
        while self.point_images.len() <= n {
            let last = self.point_images.last().unwrap();
            self.point_images.push(self.sys.apply_point(last));
        }
        self.point_images[n].clone()
    }
}

/// A complete hit-time set at a horizon, with per-time image certificates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HitSet {
    pub source: Source,
    pub target: Region,
    pub shift: u64,
    pub horizon: u64,
    /// All n in [1, horizon] with f^{n+shift}(source) meeting the target.
    pub times: Vec<u64>,
    /// For each hit time, the exact image region (or iterated point).
    pub certificate: Vec<(u64, Source)>,
}

/// Compute the full hit set {n in [1, horizon] : f^{n+s}(source) meets
/// target} exactly.
pub fn hit_set(
    sys: &MetricSystem,
    source: &Source,
    target: &Region,
    s: u64,
    horizon: u64,
) -> HitSet {
    assert!(horizon >= 1);
    let mut cache = OrbitCache::new(sys, source);
    let mut times = Vec::new();
    let mut certificate = Vec::new();
    for n in 1..=horizon {
        if cache.hits(n + s, target) {
            times.push(n);
            let witness = match source {
                Source::Region(_) => Source::Region(
                    cache.image_at(n + s, target).intersect(sys, target, Flavor::Open),
                ),
                Source::Point(_) => Source::Point(cache.point_at(n + s)),
            };
            certificate.push((n, witness));
        }
    }
    HitSet {
        source: source.clone(),
        target: target.clone(),
        shift: s,
        horizon,
        times,
        certificate,
    }
}

/// Smallest start of a run of `len` consecutive members, if any.
pub fn longest_consecutive_run(times: &[u64], len: u64) -> Option<u64> {
    if len == 0 {
        return times.first().copied();
    }
    let mut start = None;
    let mut run = 0u64;
    let mut prev: Option<u64> = None;
    for &t in times {
        match prev {
            Some(p) if t == p + 1 => run += 1,
            _ => {
                run = 1;
                start = Some(t);
            }
        }
        prev = Some(t);
        if run >= len {
            return start;
        }
    }
    None
}

/// Length and start of the longest consecutive run in a sorted time list.
pub fn longest_run(times: &[u64]) -> (u64, Option<u64>) {
    let mut best = 0u64;
    let mut best_start = None;
    let mut run = 0u64;
    let mut start = None;
    let mut prev: Option<u64> = None;
    for &t in times {
        match prev {
            Some(p) if t == p + 1 => run += 1,
            _ => {
                run = 1;
                start = Some(t);
            }
        }
        prev = Some(t);
        if run > best {
            best = run;
            best_start = start;
        }
    }
    (best, best_start)
}

/// All n <= horizon divisible by `divisor` and lying in every pair's hit
/// set. Exact and complete at the horizon; may be empty.
pub fn joint_hit_set(
    sys: &MetricSystem,
    pairs: &[(Source, Region, u64)],
    divisor: u64,
    horizon: u64,
) -> Vec<u64> {
    assert!(!pairs.is_empty() && divisor >= 1);
    let mut caches: Vec<OrbitCache> = pairs
        .iter()
        .map(|(src, _, _)| OrbitCache::new(sys, src))
        .collect();
    let mut out = Vec::new();
    let mut n = divisor;
    while n <= horizon {
        if pairs
            .iter()
            .zip(caches.iter_mut())
            .all(|((_, target, s), cache)| cache.hits(n + s, target))
        {
            out.push(n);
        }
        n += divisor;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Word;
    use crate::rat::rat;
    use crate::region::Flavor;

    fn sys(id: &str) -> MetricSystem {
        MetricSystem::parse(id).unwrap()
    }

    fn cylr(sysid: &str, words: &[&str]) -> Region {
        Region::cylinders(
            &sys(sysid),
            Flavor::Open,
            words.iter().map(|s| Word::parse(s).unwrap()).collect(),
        )
    }

    #[test]
    fn doubling_interval_hits() {
        let d = sys("doubling");
        let u = Region::interval_open(&d, rat(0, 1), rat(1, 8));
        let v = Region::interval_open(&d, rat(1, 2), rat(5, 8));
        let h = hit_set(&d, &Source::Region(u), &v, 0, 10);
        assert_eq!(h.times, vec![3, 4, 5, 6, 7, 8, 9, 10]);
        // Every certificate is a nonempty exact overlap.
        for (_, w) in &h.certificate {
            match w {
                Source::Region(r) => assert!(!r.is_empty()),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn fixed_point_source_never_hits() {
        let d = sys("doubling");
        let v = Region::interval_open(&d, rat(1, 4), rat(3, 4));
        let h = hit_set(&d, &Source::Point(Point::rational(0, 1)), &v, 0, 10);
        assert!(h.times.is_empty());
    }

    #[test]
    fn shifted_cylinder_hits() {
        let s = sys("shift2");
        let u = cylr("shift2", &["0"]);
        let v = cylr("shift2", &["1"]);
        let h = hit_set(&s, &Source::Region(u), &v, 1, 5);
        assert_eq!(h.times, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn runs() {
        assert_eq!(longest_consecutive_run(&[3, 4, 5, 8], 3), Some(3));
        assert_eq!(longest_consecutive_run(&[2, 4, 6], 2), None);
        let d = sys("doubling");
        let u = Region::interval_open(&d, rat(0, 1), rat(1, 8));
        let v = Region::interval_open(&d, rat(1, 2), rat(5, 8));
        let h = hit_set(&d, &Source::Region(u), &v, 0, 10);
        assert_eq!(longest_consecutive_run(&h.times, 8), Some(3));
        assert_eq!(longest_run(&h.times), (8, Some(3)));
    }

    #[test]
    fn joint_hits_with_divisor() {
        let d = sys("doubling");
        let u = Region::interval_open(&d, rat(0, 1), rat(1, 8));
        let v = Region::interval_open(&d, rat(1, 2), rat(5, 8));
        let got = joint_hit_set(&d, &[(Source::Region(u), v, 0)], 2, 10);
        assert_eq!(got, vec![4, 6, 8, 10]);

        // Whole space hits itself at every time.
        let full = Region::full(&d, Flavor::Open);
        let got = joint_hit_set(&d, &[(Source::Region(full.clone()), full, 0)], 1, 5);
        assert_eq!(got, vec![1, 2, 3, 4, 5]);

        let s = sys("shift2");
        let got = joint_hit_set(
            &s,
            &[
                (Source::Region(cylr("shift2", &["0"])), cylr("shift2", &["1"]), 0),
                (Source::Region(cylr("shift2", &["1"])), cylr("shift2", &["0"]), 0),
            ],
            1,
            4,
        );
        assert_eq!(got, vec![1, 2, 3, 4]);
    }

    #[test]
    fn rotation_hits_are_periodic_and_runless() {
        let r = sys("rot:1/3");
        let u = Region::interval_open(&r, rat(0, 1), rat(1, 6));
        let h = hit_set(&r, &Source::Region(u.clone()), &u, 0, 60);
        assert!(h.times.iter().all(|t| t % 3 == 0));
        assert_eq!(h.times.len(), 20);
        assert_eq!(longest_consecutive_run(&h.times, 2), None);
    }

    #[test]
    fn completeness_against_pointwise_oracle() {
        // A reported miss at time n means no sample point of the source
        // lands in the target after n + s steps.
        for id in ["doubling", "tent", "shift2", "rot:1/3"] {
            let s = sys(id);
            let (u, v) = match id {
                "shift2" => (cylr("shift2", &["01"]), cylr("shift2", &["110"])),
                _ => (
                    Region::interval_open(&s, rat(1, 16), rat(3, 16)),
                    Region::interval_open(&s, rat(5, 8), rat(11, 16)),
                ),
            };
            let h = hit_set(&s, &Source::Region(u.clone()), &v, 1, 12);
            let samples = u.sample_points(5);
            for n in 1..=12u64 {
                if !h.times.contains(&n) {
                    for p in &samples {
                        let img = s.iterate_point(p, n + 1);
                        assert!(!v.contains_point(&s, &img), "{id}: stray hit at {n}");
                    }
                }
            }
        }
    }

    #[test]
    fn soundness_every_reported_time_reverifies() {
        let t = sys("tent");
        let u = Region::interval_open(&t, rat(1, 16), rat(1, 8));
        let v = Region::interval_open(&t, rat(3, 4), rat(13, 16));
        let h = hit_set(&t, &Source::Region(u.clone()), &v, 2, 16);
        assert!(!h.times.is_empty());
        for &n in &h.times {
            let img = u.image_pow(&t, n + 2);
            assert!(!img.is_disjoint(&t, &v));
        }
    }

    #[test]
    fn mixing_systems_become_cofinite() {
        // Small dyadic regions: hit sets are cofinite beyond a computable
        // bound (the time for the source image to cover the space).
        let cases: Vec<(MetricSystem, Region, Region)> = vec![
            (
                sys("doubling"),
                Region::interval_open(&sys("doubling"), rat(3, 32), rat(5, 32)),
                Region::interval_open(&sys("doubling"), rat(1, 2), rat(9, 16)),
            ),
            (
                sys("tent"),
                Region::interval_open(&sys("tent"), rat(3, 32), rat(5, 32)),
                Region::interval_open(&sys("tent"), rat(1, 2), rat(9, 16)),
            ),
            (sys("shift2"), cylr("shift2", &["0110"]), cylr("shift2", &["111"])),
        ];
        for (s, u, v) in cases {
            let h = hit_set(&s, &Source::Region(u), &v, 0, 40);
            // Beyond step 8 the image covers the space in all three cases.
            for n in 9..=40 {
                assert!(h.times.contains(&n), "{}: missing time {n}", s.id);
            }
        }
    }
}
