//! Criterion benchmarks for the analysis engine; see `benches/core.rs`.
