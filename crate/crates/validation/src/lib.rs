//! Holds the end-to-end acceptance suite in `tests/acceptance.rs`. Kept as a
//! separate package so that a failing criterion does not stop cargo from
//! running the library and CLI test binaries.
