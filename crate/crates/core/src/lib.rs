pub mod cauchy;
pub mod cli;
pub mod error;
pub mod fit;
pub mod kernel;
pub mod spectral;
pub mod spreading;
pub mod stability;
pub mod steady_state;
