//! Economic model of two-party payment channels and the blockchain fee market
//! they feed into.

pub mod channel;
pub mod error;
pub mod io;
pub mod market;
pub mod model;
pub mod numerics;
pub mod report;
pub mod sim;
pub mod star;

pub use error::{Error, Result};
