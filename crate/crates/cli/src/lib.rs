//! Library side of the `biz` experiment runner: the experiment-file schema,
//! the three built-in figure reproductions, and the CSV emitter. The binary
//! in `main.rs` is a thin dispatcher over these.

pub mod error;
pub mod experiment;
pub mod figures;
pub mod output;

pub use error::{AppError, AppResult};
