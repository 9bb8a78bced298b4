//! Latent variable representations for reinforcement learning in tabular
//! MDPs.
//!
//! Transitions are modeled as `T(s'|s,a) = sum_z p(z|s,a) p(s'|z)` and learned
//! by maximizing the evidence lower bound. The conditional `p(.|s,a)` doubles
//! as a linear-MDP feature, which drives an elliptical-potential bonus for
//! optimistic exploration ([`agent::run_online`]) or a penalty for pessimistic
//! offline planning ([`agent::run_offline`]). [`harness`] hosts the CLI and a
//! suite of numerical checks for the supporting lemmas.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod env;
pub mod error;
pub mod explore;
pub mod features;
pub mod harness;
pub mod latent_model;
pub mod planner;
pub mod util;

pub use error::{Error, Result};
