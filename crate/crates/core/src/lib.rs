pub mod env;
pub mod error;
pub mod experiment;
pub mod memory;
pub mod nelder_mead;
pub mod reaching;
pub mod sagg;
pub mod teacher;
