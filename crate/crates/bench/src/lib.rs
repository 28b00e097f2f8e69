//! Criterion benchmarks for the roomsim core; see `benches/`.
