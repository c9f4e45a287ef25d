//! File formats, report plumbing and verification suites behind the
//! `nonfree` binary.

pub mod error;
pub mod report;
pub mod statefile;
pub mod verify;
