pub mod assemblage;
pub mod channels;
pub mod criteria;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod region;
pub mod sample;
pub mod sdp;

pub use error::{Error, Result};
