pub mod algebra;
pub mod calculus;
pub mod chart;
pub mod error;
pub mod frame_spec;
pub mod jordan;
pub mod linalg;
pub mod sampling;
pub mod symmetry;
pub mod variation;
