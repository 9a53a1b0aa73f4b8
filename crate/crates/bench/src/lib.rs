//! Criterion benchmarks for the monoflux kernels live in `benches/`.
