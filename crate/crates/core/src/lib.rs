//! Line flows, social costs and the price of anarchy for the common-lines
//! problem with flow-dependent effective frequencies.
//!
//! Passengers waiting at a stop choose a set of attractive lines and board
//! whichever arrives first. As a line gets loaded its effective frequency
//! drops, so the choice of one passenger affects the waiting time of all.
//! This crate computes the social optimum and the Wardrop equilibrium of a
//! single stop in closed form, the costs of both, and their ratio.

pub mod charac;
pub mod cli;
pub mod cost;
pub mod error;
pub mod model;
mod roots;
pub mod strategy;
pub mod wfun;

pub use charac::{
    alpha_for_demand, equilibrium_flows, lambda_bar, psi_eval, social_optimum_flows, t_hat,
    thresholds, ThresholdReport,
};
pub use cost::{
    cost_report, optimal_social_cost, price_of_anarchy, wardrop_social_cost, CostReport,
};
pub use error::{Result, SolverError};
pub use model::{Assignment, FrequencyModel, Line, Network};
