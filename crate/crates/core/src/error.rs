use thiserror::Error;

/// Errors surfaced by the construction and verification pipeline.
///
/// Emptiness of a computed set is data, not an error; these variants cover
/// genuine failures: exhausted search horizons, infeasible shrink budgets,
/// malformed traces and inconsistent requests.
#[derive(Debug, Error)]
pub enum Error {
    /// No admissible time was found below the configured horizon cap.
    #[error("horizon exhausted at cap {cap}")]
    HorizonExhausted { cap: u64 },

    /// Every cover member had an empty joint hit set at the horizon cap.
    #[error("no cover member with a nonempty joint hit set at horizon {horizon}")]
    NoMember { horizon: u64 },

    /// No positive-diameter box achieved containment within the bisection budget.
    #[error("shrink failed: {0}")]
    ShrinkFailure(String),

    /// A fresh box family could not be packed into the designated open set.
    #[error("seed failure: {0}")]
    SeedFailure(String),

    /// The trace (or another serialized artifact) failed schema validation.
    #[error("schema error: {0}")]
    Schema(String),

    /// The request requires a trace mode the trace was not built with.
    #[error("mode error: {0}")]
    Mode(String),

    /// The compared objects do not come from the same trace.
    #[error("not comparable: {0}")]
    NotComparable(String),

    /// A requested enumeration target never appears in the trace's schedule.
    #[error("target not scheduled: {0}")]
    TargetNotScheduled(String),

    /// Malformed input (bad region, bad point, bad configuration).
    #[error("invalid input: {0}")]
    Invalid(String),
}
