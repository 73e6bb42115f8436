//! Independent reference implementations used by the integration tests and
//! by the acceptance suite (which includes this module by path).
#![allow(dead_code)]

pub mod durability;
pub mod facets;
pub mod lifecycle;
pub mod metrics;
pub mod ranking;
