pub mod auxiliary;
pub mod expansion;
pub mod graph;
pub mod instance;
pub mod partition;
pub mod model;
pub mod upper_bound;
pub mod ddd;
pub mod generate;
