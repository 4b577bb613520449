//! Combinatorial engine for the relative outer space of a free group with a
//! free factor system.

pub mod error;
pub mod formulas;
pub mod free_group;
pub mod graph_core;
pub mod metric_maps;
pub mod registry;
pub mod spine_complex;

pub use error::{Error, Result};
