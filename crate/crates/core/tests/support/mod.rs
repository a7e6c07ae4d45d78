//! Independent oracles shared by the integration tests and the acceptance
//! suite.
#![allow(dead_code)]

pub mod cost;
pub mod graphs;
pub mod metric;
pub mod programs;
pub mod reference;
pub mod targets;
