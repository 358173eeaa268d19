//! Size caps. Everything in this crate is exact, so runaway inputs are
//! rejected up front instead of silently truncated.

/// Largest F_p-dimension a ring handle may have.
pub const MAX_RING_DIM: usize = 1 << 20;

/// Largest group-ring index set (basis has `2^|S|` subsets).
pub const MAX_GROUP_RING_INDEX: usize = 16;

/// `|R| = p^dim` bound below which `is_pboolean` enumerates every element.
pub const PBOOL_EXHAUST: u128 = 1 << 16;

/// `|R|` bound below which ring axioms are checked on all basis tuples.
pub const AXIOM_EXHAUST: u128 = 1 << 12;

/// `|R|^|S|` bound for the exhaustive injectivity oracle.
pub const KERNEL_EXHAUST: u128 = 1 << 16;

/// Number of random samples used when an exhaustive check is out of range.
pub const SAMPLE_COUNT: usize = 10_000;

/// Largest tuple space `prod |S_i|` enumerated by indivisibility checks.
pub const TUPLE_CAP: usize = 1 << 20;

/// Largest tuple space scanned by the exhaustive avoidance search.
pub const AVOID_SCAN_CAP: usize = 1_000_000;

/// Default truncation degree for polynomial-ring kernel slices.
pub const DEFAULT_DEGREE_BOUND: usize = 8;
