//! Holds the `acceptance` test target, which prints one PASS/FAIL line per
//! acceptance criterion. It lives in its own package so that `cargo test
//! --workspace` runs it after every other test binary.
