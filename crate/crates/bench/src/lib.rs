//! Criterion benchmarks for `lrphase`; see `benches/`.
