pub mod bits;
pub mod channel;
pub mod codec;
pub mod consensus;
pub mod error;
pub mod experiment;
pub mod gf;
pub mod layout;
pub mod pipeline;
pub mod priority;
pub mod quality;
pub mod rs;
pub mod testimage;

pub use error::{Error, Result};
