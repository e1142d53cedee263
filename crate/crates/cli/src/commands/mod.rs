//! One module per subcommand; each exposes an `Args` struct and a `run`
//! returning the finished artifact plus its delivery target.

pub mod bound;
pub mod build;
pub mod interaction;
pub mod jc;
pub mod mixed;
pub mod partition;
pub mod plan;
pub mod resources;
pub mod simulate;
mod support;
