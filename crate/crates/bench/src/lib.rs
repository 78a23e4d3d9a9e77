//! Criterion benchmarks for `gauss-means`; see `benches/`.
