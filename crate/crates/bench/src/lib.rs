//! Criterion benchmarks for the kernel evaluations; see `benches/`.
