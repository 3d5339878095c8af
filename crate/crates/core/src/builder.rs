//! The staged construction: separation, synchronization, tracking and
//! enumeration steps over addressed families of nested compact boxes,
//! emitting a complete, independently re-verifiable trace.
//!
//! Stage l (l >= 1) runs (3l^2 + 4l) + E_l steps over the l * 2^(l+1) boxes
//! K^(j)_(a0..al), j <= l:
//!
//!   * l(l+1) separation steps: for rounds r = 0..l-1 and shifts s = 0..l,
//!     boxes steer into a small ball around a_l or b_l, keyed by the last
//!     address bit (r = 0) or by the family index (j <= r vs j > r). The
//!     very first step also splits every box into two disjoint children,
//!     extending addresses by one bit.
//!   * l sync steps: all boxes steer into a ball around v_m.
//!   * 2l(l+1) tracking steps: for each tracked point x_m and shift s, a
//!     G-step puts all shifted box images and f^k(x_m) into a chosen orbit
//!     cover member G, and a Ghat-step puts the box images into a far ball
//!     while x_m revisits G.
//!   * E_l enumeration steps: boxes steer into tuples of base opens,
//!     exhaustively (full policy) or sampled.
//!
//! Times increase strictly; stage-l separation, sync and enumeration times
//! are divisible by l! (or restricted to an explicit time filter); tracking
//! times are unconstrained. The derived admissible-time set M collects
//! exactly the separation/sync/enumeration times.

use serde::{Deserialize, Serialize};

use crate::bits::Word;
use crate::error::Error;
use crate::rat::{pow2_inv, rat, Rat};
use crate::region::{Flavor, Region};
use crate::steer::{
    self, Cover, HorizonPolicy, SteerItem, SteerRequest, TimeFilter, Tracked,
};
use crate::systems::{MetricSystem, Point, SpaceKind, SystemId};

pub const TRACE_SCHEMA: &str = "scramble-trace/1";

// ----------------------------------------------------------------------
// Configuration
// ----------------------------------------------------------------------

/// Enumeration-phase policy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum EnumPolicy {
    /// All (l+1)^(l * 2^(l+1)) tuples. Refused for stages >= 2 unless
    /// `override_scale` is set (the counts are astronomical).
    Full {
        #[serde(default)]
        override_scale: bool,
    },
    /// Explicit tuples of 1-based base-open indices; a length-1 tuple is
    /// broadcast to every box slot. `None` supplies the default: for each
    /// p <= l+1 one tuple sending every slot to U_p.
    Sampled {
        #[serde(default)]
        tuples: Option<Vec<Vec<u32>>>,
    },
}

/// Where a sync target point comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyncProvenance {
    Generic,
    FixedPoint,
    /// Exact rigidity witness: rho(f^n(f^m(v)), f^m(v)) = gap > delta_n - 1/k.
    RigidityWitness {
        n: u64,
        m: u64,
        k: u64,
        #[serde(with = "crate::rat::serde_str")]
        gap: Rat,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncPoint {
    pub point: Point,
    pub provenance: SyncProvenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizonConfig {
    pub start: u64,
    pub cap: u64,
}

impl From<HorizonConfig> for HorizonPolicy {
    fn from(h: HorizonConfig) -> Self {
        HorizonPolicy { start: h.start, cap: h.cap }
    }
}

impl Default for HorizonConfig {
    fn default() -> Self {
        HorizonConfig { start: 1 << 8, cap: 1 << 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuilderConfig {
    pub system: SystemId,
    pub max_stage: u32,
    /// Base opens U_1, U_2, ...; at least max_stage + 1 entries.
    pub base_opens: Vec<Region>,
    /// Separation target pairs (a_l, b_l) per stage, each at exact distance
    /// beta.
    pub sep_targets: Vec<(Point, Point)>,
    /// Sync target points v_1, v_2, ...; at least max_stage entries.
    pub sync_points: Vec<SyncPoint>,
    /// Tracked points x_1, x_2, ...; at least max_stage entries, each with
    /// an exactly known (finite) orbit.
    pub tracked_points: Vec<Point>,
    pub enum_policy: EnumPolicy,
    /// Explicit admissible-time set replacing the factorial divisibility
    /// constraints (mixing systems only).
    #[serde(default)]
    pub time_filter: Option<Vec<u64>>,
    #[serde(default)]
    pub horizon: HorizonConfig,
}

impl BuilderConfig {
    /// Canonical defaults for a system at a given depth: dyadic base opens,
    /// constant maximal-distance separation pair, generic sync points and
    /// periodic tracked points.
    pub fn defaults(sys: &MetricSystem, max_stage: u32) -> BuilderConfig {
        let n = max_stage.max(1) as usize;
        BuilderConfig {
            system: sys.id.clone(),
            max_stage,
            base_opens: default_base_opens(sys, n + 1),
            sep_targets: vec![default_sep_pair(sys); n],
            sync_points: default_generic_sync(sys, n),
            tracked_points: default_tracked(sys, n),
            enum_policy: EnumPolicy::Full { override_scale: false },
            time_filter: None,
            horizon: HorizonConfig::default(),
        }
    }

    /// Defaults with the fixed-point-led sync sequence: v_1 = a fixed point
    /// z, later v's exact rigidity witnesses c_{n,m,k} with k = 8.
    pub fn fixed_point_led(sys: &MetricSystem, max_stage: u32) -> Result<BuilderConfig, Error> {
        let mut cfg = BuilderConfig::defaults(sys, max_stage);
        cfg.sync_points = fixed_point_led_sync(sys, max_stage.max(1) as usize, 8)?;
        Ok(cfg)
    }

    pub fn is_fixed_point_led(&self) -> bool {
        matches!(
            self.sync_points.first(),
            Some(SyncPoint { provenance: SyncProvenance::FixedPoint, .. })
        )
    }
}

fn default_sep_pair(sys: &MetricSystem) -> (Point, Point) {
    match sys.id {
        SystemId::Doubling | SystemId::Rotation { .. } => {
            (Point::rational(0, 1), Point::rational(1, 2))
        }
        SystemId::Tent => (Point::rational(0, 1), Point::rational(1, 1)),
        SystemId::Shift2 => {
            let zero = crate::bits::Seq::periodic(Word::parse("0").unwrap()).unwrap();
            let one = crate::bits::Seq::periodic(Word::parse("1").unwrap()).unwrap();
            (Point::Seq(zero), Point::Seq(one))
        }
    }
}

/// Dyadic sweep of base opens: (0,1/2), (1/2,1), (0,1/4), (1/4,1/2), ...
/// For the sequence space, cylinder words by length then lexicographically.
pub fn default_base_opens(sys: &MetricSystem, count: usize) -> Vec<Region> {
    let mut out = Vec::with_capacity(count);
    match sys.space {
        SpaceKind::SequenceSpace => {
            let mut len = 1usize;
            'outer: loop {
                for code in 0..(1u64 << len) {
                    let bits: Vec<u8> =
                        (0..len).map(|i| ((code >> (len - 1 - i)) & 1) as u8).collect();
                    out.push(Region::cylinders(
                        sys,
                        Flavor::Open,
                        vec![Word::from_bits(&bits)],
                    ));
                    if out.len() == count {
                        break 'outer;
                    }
                }
                len += 1;
            }
        }
        _ => {
            let mut level = 1u64;
            'outer2: loop {
                let den = 1i64 << level;
                for i in 0..den {
                    out.push(Region::interval_open(sys, rat(i, den), rat(i + 1, den)));
                    if out.len() == count {
                        break 'outer2;
                    }
                }
                level += 1;
            }
        }
    }
    out
}

fn default_generic_sync(sys: &MetricSystem, count: usize) -> Vec<SyncPoint> {
    (1..=count as i64)
        .map(|m| {
            let point = match sys.space {
                SpaceKind::SequenceSpace => {
                    let mut bits = vec![0u8];
                    bits.extend(std::iter::repeat_n(1u8, m as usize));
                    Point::Seq(crate::bits::Seq::periodic(Word::from_bits(&bits)).unwrap())
                }
                _ => Point::Rational(rat(1, m + 2)),
            };
            SyncPoint { point, provenance: SyncProvenance::Generic }
        })
        .collect()
}

fn default_tracked(sys: &MetricSystem, count: usize) -> Vec<Point> {
    (1..=count as i64)
        .map(|m| match sys.id {
            SystemId::Doubling | SystemId::Rotation { .. } => Point::Rational(rat(1, 2 * m + 1)),
            SystemId::Tent => Point::Rational(rat(2, 2 * m + 3)),
            SystemId::Shift2 => {
                let mut bits = vec![0u8; m as usize];
                bits.push(1);
                Point::Seq(crate::bits::Seq::periodic(Word::from_bits(&bits)).unwrap())
            }
        })
        .collect()
}

/// v_1 = fixed point z; v_(1+t) = exact rigidity witness c_{n,m,8} for
/// (n, m) = (t/2 + 1, t mod 2): the m-step exact preimage of the documented
/// witness, so the recorded gap equals delta_n exactly.
fn fixed_point_led_sync(
    sys: &MetricSystem,
    count: usize,
    k: u64,
) -> Result<Vec<SyncPoint>, Error> {
    let z = sys
        .fixed_point()
        .ok_or_else(|| Error::Mode(format!("{} has no fixed point", sys.id)))?;
    let mut out = vec![SyncPoint { point: z, provenance: SyncProvenance::FixedPoint }];
    for t in 0..count.saturating_sub(1) as u64 {
        let (n, m) = (t / 2 + 1, t % 2);
        let witness = sys.rigidity_witness(n);
        let gap = sys.distance(&sys.iterate_point(&witness, n), &witness);
        let point = sys.preimage_point(&witness, m);
        out.push(SyncPoint {
            point,
            provenance: SyncProvenance::RigidityWitness { n, m, k, gap },
        });
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// Trace structures
// ----------------------------------------------------------------------

/// A compact box tagged by family index, stage, and binary address.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressedBox {
    pub j: u32,
    pub address: Word,
    pub geometry: Region,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepKind {
    /// Separation round r with shift s; r = 0 keys targets by the last
    /// address bit, r >= 1 by family index (j <= r vs j > r). The first
    /// step of a stage (r = 0, s = 0) also splits addresses.
    Separation { r: u32 },
    /// All boxes into a ball around sync point v_m.
    Sync { m: u32 },
    /// Tracked G-step for x_m.
    TrackG { m: u32 },
    /// Tracked far-target step for x_m.
    TrackGhat { m: u32 },
    /// Boxes into base opens per slot (1-based indices).
    Enumerate { tuple: Vec<u32> },
}

/// Claim attached to tracked steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackClaim {
    /// 1-based index into the config's tracked points.
    pub point_index: u32,
    /// The chosen cover member G (contains f^time(x_m), re-checkable).
    pub member: Region,
    /// For Ghat steps: the exact recorded distance between G and the far
    /// target.
    #[serde(default, with = "crate::rat::serde_str_opt", skip_serializing_if = "Option::is_none")]
    pub far_distance: Option<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index i within the stage (k_{l,i}).
    pub index: u32,
    pub kind: StepKind,
    pub time: u64,
    pub shift: u64,
    /// The divisibility requirement this step was searched under (l! for
    /// separation/sync/enumeration, 1 for tracking steps).
    pub divisor: u64,
    /// Post-step family snapshot in lexicographic (j, address) order.
    pub boxes: Vec<AddressedBox>,
    /// Per-box open targets, aligned with `boxes`.
    pub targets: Vec<Region>,
    pub tracked: Option<TrackClaim>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub ell: u32,
    pub n_ell: u64,
    /// Stage-entry boxes (addresses of length ell): the previous stage's
    /// final boxes plus the freshly seeded family j = ell.
    pub seeds: Vec<AddressedBox>,
    pub steps: Vec<StepRecord>,
}

impl StageRecord {
    pub fn final_boxes(&self) -> &[AddressedBox] {
        &self.steps.last().expect("stage has steps").boxes
    }

    pub fn last_time(&self) -> u64 {
        self.steps.last().expect("stage has steps").time
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GSelection {
    pub stage: u32,
    pub m: u32,
    pub s: u64,
    pub member_index: u32,
    pub center: Point,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMeta {
    /// Relabelling order of box slots in enumeration tuples.
    pub slot_order: String,
    /// Chosen orbit-cover members per (stage, m, s).
    pub g_selections: Vec<GSelection>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub schema: String,
    pub config: BuilderConfig,
    pub stages: Vec<StageRecord>,
    /// Derived admissible-time set: all separation, sync and enumeration
    /// times, in increasing order.
    pub m_times: Vec<u64>,
    pub meta: TraceMeta,
}

impl ConstructionTrace {
    pub fn to_json(&self) -> String {
        // Via Value: object keys serialize sorted, making output canonical.
        let v = serde_json::to_value(self).expect("trace serializes");
        serde_json::to_string_pretty(&v).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> Result<ConstructionTrace, Error> {
        let t: ConstructionTrace =
            serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        if t.schema != TRACE_SCHEMA {
            return Err(Error::Schema(format!("unknown trace schema {:?}", t.schema)));
        }
        Ok(t)
    }

    pub fn last_time(&self) -> u64 {
        self.stages.last().map(|s| s.last_time()).unwrap_or(0)
    }
}

// ----------------------------------------------------------------------
// Schedule bookkeeping
// ----------------------------------------------------------------------

pub fn factorial(n: u32) -> u64 {
    (1..=n as u64).product::<u64>().max(1)
}

/// Scheduled (non-enumeration) step count of stage l: l(l+1) + l + 2l(l+1).
pub fn scheduled_steps(ell: u32) -> u32 {
    let l = ell;
    l * (l + 1) + l + 2 * l * (l + 1)
}

/// Number of box slots at stage l: l * 2^(l+1).
pub fn slot_count(ell: u32) -> usize {
    (ell as usize) << (ell as usize + 1)
}

/// Full enumeration tuple count (l+1)^(l * 2^(l+1)), if it fits in u128.
pub fn full_tuple_count(ell: u32) -> Option<u128> {
    let base = (ell + 1) as u128;
    let exp = slot_count(ell);
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Is step index i (1-based) within stage l's admissible-time ranges
/// (separation + sync, or the enumeration phase)?
pub fn in_m_range(ell: u32, i: u32, enum_len: u32) -> bool {
    let sep_sync = ell * (ell + 1) + ell;
    let sched = scheduled_steps(ell);
    i <= sep_sync || (i > sched && i <= sched + enum_len)
}

// ----------------------------------------------------------------------
// Breve addresses and candidate extraction
// ----------------------------------------------------------------------

/// Concatenation of the prefixes of lengths 1..=m of the input.
pub fn breve_address(prefix: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(prefix.len() * (prefix.len() + 1) / 2);
    for t in 1..=prefix.len() {
        out.extend_from_slice(&prefix[..t]);
    }
    out
}

/// All length-`len` prefixes of breve images of binary sequences.
pub fn breve_prefixes(len: usize) -> Vec<Word> {
    let mut out: Vec<Word> = Vec::new();
    for code in 0..(1u64 << len.min(20)) {
        let alpha: Vec<u8> = (0..len).map(|i| ((code >> (len - 1 - i)) & 1) as u8).collect();
        let breve = breve_address(&alpha);
        let w = Word::from_bits(&breve[..len]);
        if !out.contains(&w) {
            out.push(w);
        }
    }
    out.sort();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    Raw,
    Breve,
}

/// Deepest-stage boxes of family j matching the selection: all addresses,
/// or only those that are prefixes of breve images.
pub fn extract_candidates(
    trace: &ConstructionTrace,
    selection: Selection,
    j: u32,
) -> Vec<AddressedBox> {
    let Some(last) = trace.stages.last() else {
        return Vec::new();
    };
    let depth = last.ell as usize + 1;
    let wanted = match selection {
        Selection::Raw => None,
        Selection::Breve => Some(breve_prefixes(depth)),
    };
    last.final_boxes()
        .iter()
        .filter(|b| b.j == j)
        .filter(|b| match &wanted {
            None => true,
            Some(ws) => ws.contains(&b.address),
        })
        .cloned()
        .collect()
}

// ----------------------------------------------------------------------
// The build
// ----------------------------------------------------------------------

struct StageCtx<'a> {
    sys: &'a MetricSystem,
    cfg: &'a BuilderConfig,
    ell: u32,
    n_ell: u64,
    cap: Rat,
    last_time: u64,
    boxes: Vec<AddressedBox>,
    steps: Vec<StepRecord>,
    g_selections: Vec<GSelection>,
}

impl<'a> StageCtx<'a> {
    fn ball_radius(&self) -> Rat {
        rat(1, 2 * self.n_ell as i64 + 2)
    }

    fn m_filter(&self, divisor: u64) -> TimeFilter {
        match (&self.cfg.time_filter, divisor) {
            (Some(times), d) if d > 1 => TimeFilter::Explicit(times.clone()),
            (_, d) => TimeFilter::Divisor(d),
        }
    }

    fn record(&mut self, kind: StepKind, time: u64, shift: u64, divisor: u64,
              targets: Vec<Region>, tracked: Option<TrackClaim>) {
        self.steps.push(StepRecord {
            index: self.steps.len() as u32 + 1,
            kind,
            time,
            shift,
            divisor,
            boxes: self.boxes.clone(),
            targets,
            tracked,
        });
        self.last_time = time;
    }

    /// Run one non-splitting steered step over all boxes.
    fn run_step(
        &mut self,
        kind: StepKind,
        shift: u64,
        divisor: u64,
        targets: Vec<Region>,
        tracked: Option<Tracked>,
        claim: Option<TrackClaim>,
    ) -> Result<(), Error> {
        let items: Vec<SteerItem> = self
            .boxes
            .iter()
            .zip(targets.iter())
            .map(|(b, t)| SteerItem { boxed: b.geometry.clone(), target: t.clone() })
            .collect();
        let req = SteerRequest {
            s: shift,
            filter: self.m_filter(divisor),
            items,
            shrink_cap: self.cap.clone(),
            tracked: tracked.clone(),
            floor: self.last_time,
            horizon: self.cfg.horizon.into(),
        };
        let step = if tracked.is_some() {
            steer::tracked_steer(self.sys, &req)?
        } else {
            steer::steer(self.sys, &req)?
        };
        for (b, refined) in self.boxes.iter_mut().zip(step.refined.into_iter()) {
            b.geometry = refined;
        }
        self.record(kind, step.time, shift, divisor, targets, claim);
        Ok(())
    }
}

/// Execute the construction.
pub fn build(sys: &MetricSystem, cfg: &BuilderConfig) -> Result<ConstructionTrace, Error> {
    validate_config(sys, cfg)?;
    let mut stages: Vec<StageRecord> = Vec::new();
    let mut boxes: Vec<AddressedBox> = Vec::new();
    let mut last_time = 0u64;
    let mut g_selections = Vec::new();

    for ell in 1..=cfg.max_stage {
        let n_ell = last_time + 1;
        seed_stage(sys, cfg, ell, &mut boxes)?;
        sort_boxes(&mut boxes);
        let seeds = boxes.clone();

        let mut ctx = StageCtx {
            sys,
            cfg,
            ell,
            n_ell,
            cap: pow2_inv(2 * ell as u64 + 2),
            last_time: n_ell, // k_{l,1} > n_l
            boxes,
            steps: Vec::new(),
            g_selections: Vec::new(),
        };
        run_stage(&mut ctx)?;

        let StageCtx { boxes: out_boxes, steps, last_time: t, g_selections: gs, .. } = ctx;
        boxes = out_boxes;
        last_time = t;
        g_selections.extend(gs);
        stages.push(StageRecord { ell, n_ell, seeds, steps });

        // The next base open must have room left over.
        let next_open = &cfg.base_opens[ell as usize];
        if remaining_room(sys, next_open, &boxes).is_empty() {
            return Err(Error::SeedFailure(format!(
                "base open {} is exhausted by the stage-{ell} boxes",
                ell + 1
            )));
        }
    }

    let m_times = collect_m_times(&stages);
    Ok(ConstructionTrace {
        schema: TRACE_SCHEMA.into(),
        config: cfg.clone(),
        stages,
        m_times,
        meta: TraceMeta {
            slot_order: "lexicographic (j, address)".into(),
            g_selections,
        },
    })
}

fn validate_config(sys: &MetricSystem, cfg: &BuilderConfig) -> Result<(), Error> {
    if cfg.system != sys.id {
        return Err(Error::Invalid("config system does not match".into()));
    }
    let l = cfg.max_stage as usize;
    if cfg.base_opens.len() < l + 1 && l > 0 {
        return Err(Error::Invalid("need max_stage + 1 base opens".into()));
    }
    for (i, u) in cfg.base_opens.iter().enumerate() {
        if u.is_empty() || u.flavor != Flavor::Open {
            return Err(Error::Invalid(format!("base open {} must be nonempty open", i + 1)));
        }
        for v in &cfg.base_opens[..i] {
            if u == v {
                return Err(Error::Invalid("base opens must be pairwise distinct".into()));
            }
        }
    }
    if cfg.sep_targets.len() < l || cfg.sync_points.len() < l || cfg.tracked_points.len() < l {
        return Err(Error::Invalid(
            "need max_stage separation pairs, sync points and tracked points".into(),
        ));
    }
    let beta = sys.space_diameter();
    for (a, b) in &cfg.sep_targets[..l] {
        if sys.distance(a, b) != beta {
            return Err(Error::Invalid(
                "separation pair must be at exact distance beta".into(),
            ));
        }
    }
    if let EnumPolicy::Full { override_scale: false } = cfg.enum_policy {
        if cfg.max_stage >= 2 {
            return Err(Error::Invalid(format!(
                "full enumeration at stage 2 already has {} steps; pass the scale override \
                 or use the sampled policy",
                full_tuple_count(2).unwrap()
            )));
        }
    }
    if let Some(times) = &cfg.time_filter {
        if times.is_empty() {
            return Err(Error::Invalid("explicit time filter must be nonempty".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("explicit time filter must be strictly increasing".into()));
        }
    }
    Ok(())
}

fn sort_boxes(boxes: &mut [AddressedBox]) {
    boxes.sort_by(|a, b| (a.j, a.address.clone()).cmp(&(b.j, b.address.clone())));
}

/// Open room left in `open` after removing the given boxes.
fn remaining_room(sys: &MetricSystem, open: &Region, boxes: &[AddressedBox]) -> Region {
    let mut avail = open.clone();
    for b in boxes {
        avail = avail.subtract(sys, &b.geometry, Flavor::Open);
        if avail.is_empty() {
            break;
        }
    }
    avail
}

/// Stage-1 initial boxes, or a fresh family j = ell packed into the room
/// left inside U_ell.
fn seed_stage(
    sys: &MetricSystem,
    cfg: &BuilderConfig,
    ell: u32,
    boxes: &mut Vec<AddressedBox>,
) -> Result<(), Error> {
    if ell == 1 {
        let u1 = &cfg.base_opens[0];
        let seeds = seed_initial_pair(sys, u1)?;
        boxes.clear();
        for (bit, geom) in seeds.into_iter().enumerate() {
            boxes.push(AddressedBox {
                j: 1,
                address: Word::from_bits(&[bit as u8]),
                geometry: geom,
            });
        }
        return Ok(());
    }
    let u = &cfg.base_opens[ell as usize - 1];
    let avail = remaining_room(sys, u, boxes);
    if avail.is_empty() {
        return Err(Error::SeedFailure(format!(
            "no room in base open {ell} for the fresh family"
        )));
    }
    let n = 1usize << ell; // 2^ell boxes with addresses of length ell
    let cap = pow2_inv(2 * ell as u64 + 2);
    let fresh = pack_boxes(sys, &avail, n, &cap)?;
    for (code, geom) in fresh.into_iter().enumerate() {
        let bits: Vec<u8> = (0..ell).map(|i| ((code >> (ell - 1 - i)) & 1) as u8).collect();
        boxes.push(AddressedBox { j: ell, address: Word::from_bits(&bits), geometry: geom });
    }
    Ok(())
}

/// Two disjoint compact seeds in U1: the closed left and right thirds of
/// the largest piece, pulled inside by a sixth (intervals), or the two
/// one-bit extensions of the shortest cylinder word.
fn seed_initial_pair(sys: &MetricSystem, u1: &Region) -> Result<[Region; 2], Error> {
    if let Some(words) = u1.cyl_words() {
        let base = words.iter().min_by_key(|w| w.len()).unwrap();
        let mk = |b: u8| Region::cylinders(sys, Flavor::Compact, vec![base.extended(b)]);
        return Ok([mk(0), mk(1)]);
    }
    let pieces = u1.iv_pieces().unwrap();
    let piece = pieces.iter().max_by(|a, b| a.width().cmp(&b.width())).unwrap();
    let (lo, w) = (piece.lo.clone(), piece.width());
    let sixth = &w / rat(6, 1);
    let k0 = Region::interval_compact(sys, &lo + &sixth, &lo + &sixth * rat(2, 1));
    let k1 = Region::interval_compact(
        sys,
        &lo + &sixth * rat(4, 1),
        &lo + &sixth * rat(5, 1),
    );
    Ok([k0, k1])
}

/// Pack n equal disjoint compact boxes of diameter <= cap into the largest
/// piece of an open region.
fn pack_boxes(sys: &MetricSystem, avail: &Region, n: usize, cap: &Rat) -> Result<Vec<Region>, Error> {
    if let Some(words) = avail.cyl_words() {
        let base = words.iter().min_by_key(|w| (w.len(), w.bits().to_vec())).unwrap();
        // Pad with zeros so the children meet the diameter cap.
        let bits_needed = n.next_power_of_two().trailing_zeros() as usize;
        let mut stem = base.clone();
        while pow2_inv((stem.len() + bits_needed) as u64) > *cap {
            stem.push(0);
        }
        let mut out = Vec::with_capacity(n);
        for code in 0..n {
            let mut w = stem.clone();
            for i in (0..bits_needed).rev() {
                w.push(((code >> i) & 1) as u8);
            }
            out.push(Region::cylinders(sys, Flavor::Compact, vec![w]));
        }
        return Ok(out);
    }
    let pieces = avail.iv_pieces().unwrap();
    let piece = pieces.iter().max_by(|a, b| a.width().cmp(&b.width())).unwrap();
    let unit = piece.width() / rat(2 * n as i64 + 1, 1);
    let w = unit.clone().min(cap.clone() / rat(2, 1));
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let x = &piece.lo + &unit * rat(2 * t as i64 + 1, 1);
        out.push(Region::interval_compact(sys, x.clone(), &x + &w));
    }
    Ok(out)
}

fn run_stage(ctx: &mut StageCtx) -> Result<(), Error> {
    let ell = ctx.ell;
    let fact = factorial(ell);
    let radius = ctx.ball_radius();
    let (a, b) = &ctx.cfg.sep_targets[ell as usize - 1];
    let va = Region::ball(ctx.sys, a, &radius);
    let vb = Region::ball(ctx.sys, b, &radius);
    debug_assert!(va.is_disjoint(ctx.sys, &vb));

    // Separation rounds.
    for r in 0..ell {
        for s in 0..=ell as u64 {
            if r == 0 && s == 0 {
                split_step(ctx, &va, &vb, fact)?;
                continue;
            }
            let targets: Vec<Region> = ctx
                .boxes
                .iter()
                .map(|bx| {
                    let into_a = if r == 0 {
                        *bx.address.bits().last().unwrap() == 0
                    } else {
                        bx.j <= r
                    };
                    if into_a { va.clone() } else { vb.clone() }
                })
                .collect();
            ctx.run_step(StepKind::Separation { r }, s, fact, targets, None, None)?;
        }
    }

    // Sync steps.
    for m in 1..=ell {
        let v = &ctx.cfg.sync_points[m as usize - 1].point;
        let ball = Region::ball(ctx.sys, v, &radius);
        let targets = vec![ball; ctx.boxes.len()];
        ctx.run_step(StepKind::Sync { m }, 0, fact, targets, None, None)?;
    }

    // Tracking steps.
    for m in 1..=ell {
        let xm = ctx.cfg.tracked_points[m as usize - 1].clone();
        let orbit = ctx.sys.orbit_points(&xm);
        let cover = Cover::of_orbit(ctx.sys, &xm, &radius);
        let probe = &ctx.cfg.base_opens[0];
        let horizon = ctx.cfg.horizon.cap;
        let mut members: Vec<(usize, Region)> = Vec::new();
        for s in 0..=ell as u64 {
            let idx = steer::select_cover_member(ctx.sys, &xm, s, &cover, (probe, probe), horizon)?;
            ctx.g_selections.push(GSelection {
                stage: ell,
                m,
                s,
                member_index: idx as u32,
                center: orbit[idx].clone(),
            });
            members.push((idx, cover.members[idx].clone()));
        }
        for s in 0..=ell as u64 {
            let (_, g) = &members[s as usize];
            let claim = TrackClaim { point_index: m, member: g.clone(), far_distance: None };
            let targets = vec![g.clone(); ctx.boxes.len()];
            let tracked = Tracked { point: xm.clone(), member: g.clone() };
            ctx.run_step(StepKind::TrackG { m }, s, 1, targets, Some(tracked), Some(claim))?;
        }
        for s in 0..=ell as u64 {
            let (idx, g) = &members[s as usize];
            let far_center = ctx.sys.farthest_point(&orbit[*idx]);
            let ghat = Region::ball(ctx.sys, &far_center, &radius);
            let dist = g.dist_inf(ctx.sys, &ghat);
            let claim = TrackClaim {
                point_index: m,
                member: g.clone(),
                far_distance: Some(dist),
            };
            let targets = vec![ghat.clone(); ctx.boxes.len()];
            let tracked = Tracked { point: xm.clone(), member: g.clone() };
            ctx.run_step(StepKind::TrackGhat { m }, s, 1, targets, Some(tracked), Some(claim))?;
        }
    }

    // Enumeration phase.
    for tuple in enumeration_tuples(ctx.cfg, ell)? {
        let targets: Vec<Region> = tuple
            .iter()
            .map(|&p| ctx.cfg.base_opens[p as usize - 1].clone())
            .collect();
        ctx.run_step(StepKind::Enumerate { tuple }, 0, fact, targets, None, None)?;
    }
    Ok(())
}

/// The stage's first step: split every box into two disjoint children,
/// steering child a0..al_0 into va and child a0..al_1 into vb.
fn split_step(ctx: &mut StageCtx, va: &Region, vb: &Region, fact: u64) -> Result<(), Error> {
    let parents: Vec<Region> = ctx.boxes.iter().map(|b| b.geometry.clone()).collect();
    let outcome = steer::split_steer(
        ctx.sys,
        &parents,
        va,
        vb,
        0,
        &ctx.m_filter(fact),
        &ctx.cap,
        ctx.last_time,
        ctx.cfg.horizon.into(),
    )?;
    let mut new_boxes = Vec::with_capacity(ctx.boxes.len() * 2);
    let mut targets = Vec::with_capacity(ctx.boxes.len() * 2);
    for (parent, (c0, c1)) in ctx.boxes.iter().zip(outcome.children.into_iter()) {
        new_boxes.push(AddressedBox {
            j: parent.j,
            address: parent.address.extended(0),
            geometry: c0,
        });
        targets.push(va.clone());
        new_boxes.push(AddressedBox {
            j: parent.j,
            address: parent.address.extended(1),
            geometry: c1,
        });
        targets.push(vb.clone());
    }
    ctx.boxes = new_boxes;
    sort_boxes(&mut ctx.boxes);
    // Sorting by (j, address) preserves the child interleaving, so targets
    // stay aligned: child addresses differ only in the last bit.
    let targets: Vec<Region> = ctx
        .boxes
        .iter()
        .map(|bx| {
            if *bx.address.bits().last().unwrap() == 0 {
                va.clone()
            } else {
                vb.clone()
            }
        })
        .collect();
    ctx.record(StepKind::Separation { r: 0 }, outcome.time, 0, fact, targets, None);
    Ok(())
}

/// Enumeration tuples for stage l under the configured policy.
fn enumeration_tuples(cfg: &BuilderConfig, ell: u32) -> Result<Vec<Vec<u32>>, Error> {
    let slots = slot_count(ell);
    match &cfg.enum_policy {
        EnumPolicy::Full { override_scale } => {
            if ell >= 2 && !override_scale {
                return Err(Error::Invalid(format!(
                    "full enumeration at stage {ell} has {} steps; pass the scale override \
                     or use the sampled policy",
                    full_tuple_count(ell)
                        .map(|c| c.to_string())
                        .unwrap_or_else(|| "too many".into())
                )));
            }
            let count = full_tuple_count(ell).ok_or_else(|| {
                Error::Invalid(format!("full enumeration at stage {ell} overflows"))
            })?;
            let base = (ell + 1) as u128;
            let mut out = Vec::new();
            for e in 0..count {
                let mut digits = vec![1u32; slots];
                let mut rem = e;
                for slot in (0..slots).rev() {
                    digits[slot] = (rem % base) as u32 + 1;
                    rem /= base;
                }
                out.push(digits);
            }
            Ok(out)
        }
        EnumPolicy::Sampled { tuples } => match tuples {
            None => Ok((1..=ell + 1).map(|p| vec![p; slots]).collect()),
            Some(list) => {
                let mut out = Vec::with_capacity(list.len());
                for t in list {
                    let t = if t.len() == 1 {
                        vec![t[0]; slots]
                    } else if t.len() == slots {
                        t.clone()
                    } else {
                        return Err(Error::Invalid(format!(
                            "enumeration tuple length {} does not match {} slots at stage {ell}",
                            t.len(),
                            slots
                        )));
                    };
                    if t.iter().any(|&p| p == 0 || p as usize > cfg.base_opens.len()) {
                        return Err(Error::Invalid("enumeration tuple index out of range".into()));
                    }
                    out.push(t);
                }
                Ok(out)
            }
        },
    }
}

fn collect_m_times(stages: &[StageRecord]) -> Vec<u64> {
    let mut out = Vec::new();
    for st in stages {
        let enum_len = st
            .steps
            .iter()
            .filter(|s| matches!(s.kind, StepKind::Enumerate { .. }))
            .count() as u32;
        for step in &st.steps {
            if in_m_range(st.ell, step.index, enum_len) {
                out.push(step.time);
            }
        }
    }
    out
}
