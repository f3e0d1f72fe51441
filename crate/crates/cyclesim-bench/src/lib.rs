//! Benchmarks live in `benches/`; see `cargo bench -p cyclesim-bench`.
