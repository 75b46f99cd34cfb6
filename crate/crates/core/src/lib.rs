pub mod arith;
pub mod characters;
pub mod cyclotomic;
pub mod error;
pub mod jointerg;
pub mod phase;
pub mod pretend;
pub mod reduce;
pub mod systems;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil;
