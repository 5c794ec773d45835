//! Criterion benchmarks for senseprobe live under `benches/`.
