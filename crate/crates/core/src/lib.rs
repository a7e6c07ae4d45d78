//! Target-aware compilation of real-number expressions into floating-point
//! programs: equality saturation over mixed real/float e-graphs, typed
//! extraction, and an accuracy/cost search guided by local error and cost
//! opportunity.

pub mod costing;
pub mod egraph;
pub mod extract;
pub mod ir;
pub mod oracle;
pub mod par;
pub mod rules;
pub mod search;
pub mod target;
