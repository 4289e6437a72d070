pub mod calibration;
pub mod cli;
pub mod copula_grid;
pub mod error;
pub mod models;
pub mod power;
pub mod ranks;
pub mod rng;
pub mod stats;

