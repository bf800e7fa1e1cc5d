pub mod baselines;
pub mod cli;
pub mod corpus;
pub mod crf;
pub mod embed;
pub mod eval;
pub mod features;
pub mod identify;
pub mod mapping;
pub mod synthetic;
