//! Exact finite-depth construction and certification of scrambled Cantor
//! sets for concrete piecewise-linear dynamical systems.
//!
//! The crate works entirely in exact rational / symbolic arithmetic: points
//! are rationals or eventually periodic binary sequences, sets are finite
//! unions of rational-endpoint intervals or cylinder sets, and every forward
//! image, hit time, steering step and nested-box containment is computed and
//! re-checked exactly. The main pipeline is
//!
//! 1. [`systems`]: the registry of exactly representable systems (doubling
//!    map on the circle, tent map on the interval, the full 2-shift, and a
//!    rational rotation as a non-mixing control);
//! 2. [`region`]: the exact set algebra (images, preimages, refinement,
//!    shrinking) underpinning everything else;
//! 3. [`hits`]: hit-time sets N(U, V) up to a horizon, run detection, joint
//!    divisibility-filtered hit sets;
//! 4. [`steer`]: finding times at which prescribed compact boxes can be
//!    shrunk so their images land in prescribed open targets, optionally
//!    while a tracked point revisits a chosen cover member;
//! 5. [`builder`]: the staged schedule that maintains addressed families of
//!    nested compact boxes and emits a complete, replayable construction
//!    trace;
//! 6. [`verify`]: independent re-verification of traces and finite-horizon
//!    certificates for scrambling, tracking, invariant scrambling,
//!    transitivity, weak-mixing signatures and chaoticity samples.

pub mod bits;
pub mod builder;
pub mod error;
pub mod hits;
pub mod rat;
pub mod region;
pub mod steer;
pub mod systems;
// pub mod verify;

pub use error::Error;
pub use systems::{MetricSystem, Point, SystemId};

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
