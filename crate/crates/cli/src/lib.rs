//! Command implementations behind the `visfore` binary: batch evaluation,
//! forecast-quality tables, observation dumps and bridge sessions.

mod error;
pub mod eval;
pub mod forecast_eval;
pub mod output;
pub mod render_dump;

pub use error::{CliError, EXIT_INTERNAL, EXIT_INVALID_SPEC, EXIT_IO, EXIT_PROTOCOL};
