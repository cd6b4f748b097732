//! Structural and strong structural controllability of leader-follower
//! networks with a layered (hierarchical) structure.

pub mod classify;
pub mod corpus;
pub mod dims;
pub mod dot;
pub mod fixed;
pub mod fixtures;
pub mod flow;
pub mod graph;
pub mod oracle;
pub mod report;
pub mod symcm;
