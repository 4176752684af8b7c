//! Command-line front end for `tcd-core`: JSON documents, reports and the `tcd` binary.

pub mod commands;
pub mod document;
pub mod error;
pub mod report;
