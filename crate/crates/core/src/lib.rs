pub mod cli;
pub mod harness;
pub mod kernel;
pub mod ode;
pub mod params;
pub mod predictor;
pub mod solver;
pub mod specfun;

pub use params::{ModelParams, ParamError};
