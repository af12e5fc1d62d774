//! Criterion benchmarks for the sfbm kernels; see `benches/`.
