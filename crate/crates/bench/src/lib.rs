//! Benchmarks live in `benches/`; this crate has no library surface beyond
//! the fixed pitch grid they share.

/// Pitches used across the benchmark groups.
pub const PITCHES: [f64; 4] = [0.05, 0.5, 1.0, 5.0];
