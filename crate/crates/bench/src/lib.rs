//! Benchmark harness for the cavity library; see `benches/`.
