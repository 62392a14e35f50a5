pub mod causal;
pub mod classifier;
pub mod error;
pub mod explanation;
pub mod tabular;
pub mod shapley;
pub mod fico;
pub mod fixtures;
pub mod compare;
pub mod engine;
pub mod selftest;
