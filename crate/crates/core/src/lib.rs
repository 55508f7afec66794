pub mod arima;
pub mod diagnostics;
pub mod error;
pub mod forecast;
pub mod pipeline;
pub mod selection;
pub mod series;

pub use error::{Error, ErrorKind, Result};
