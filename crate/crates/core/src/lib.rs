//! A model-learning workbench that recovers the STRIPS-like action model of
//! a black-box agent purely by posing interventional queries (plan-outcome
//! and action-precondition), then materializes and verifies the causal
//! structure of the learned model as a dynamic causal decision network.

pub mod agent;
pub mod baseline;
pub mod causal;
pub mod fixtures;
pub mod interrogation;
pub mod pddl;
pub mod planner;
pub mod strips;
