//! Holds the `acceptance` test target. It is a separate package so that
//! `cargo test --workspace` runs it after every other test binary: a red
//! criterion stops cargo, and the unit and property tests should still run.
