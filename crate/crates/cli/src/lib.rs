//! Probe oracle, problem files, reports and the self-test suites behind the
//! `neutrix-opt` command.

pub mod probe;
pub mod problem;
pub mod commands;
pub mod report;
pub mod selftest;
