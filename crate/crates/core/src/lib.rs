//! Fenestration design optimization.
//!
//! Candidate windows and shading are generated from a product catalog and
//! construction rules, scored with a penalty/satisfaction weighted fitness on
//! top of an hourly single-zone thermal model, and searched with SHADE hybridised
//! with a bound-constrained quasi-Newton local search.

pub mod catalog;
pub mod building;
pub mod fitness;
pub mod thermal;
pub mod encoding;
pub mod optimize;
pub mod campaign;
pub mod analysis;
