//! Diffusion cascade reconstruction, bridging scores and well-being analysis
//! for social event logs.

pub mod bridging;
pub mod cascade;
pub mod centrality;
pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod pipeline;
pub mod regression;
pub mod scores;
pub mod swb;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{SocialGraph, UserId};
