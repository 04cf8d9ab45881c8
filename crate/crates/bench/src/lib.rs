//! Criterion benchmarks for risfocus-core; see `benches/`.
