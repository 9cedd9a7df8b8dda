//! Steering no-regret learners toward target equilibria in extensive-form games.

pub mod benchmarks;
pub mod game;
pub mod harness;
pub mod learners;
pub mod mediator;
pub mod rng;
pub mod steering;
