pub mod dynamics;
pub mod effective;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod pipeline;
pub mod steady;
pub mod sweep;
