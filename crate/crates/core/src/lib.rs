pub mod cli;
pub mod config;
pub mod dataset;
pub mod image;
pub mod mask;
pub mod metrics;
pub mod scenegen;
pub mod wavesim;
