// Benchmark-only crate; see benches/flow.rs.
