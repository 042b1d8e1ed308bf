//! Criterion benchmarks for the polar coding kernels; see `benches/codec.rs`.
//! Run with `cargo bench -p awtc-bench`.
