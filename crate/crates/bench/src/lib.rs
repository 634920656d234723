//! Criterion benchmarks for `bmcm-core` live in `benches/`.
