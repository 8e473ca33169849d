//! Command-line front end for [`trijm_core`], with its file formats and
//! parallel drivers.

pub mod cli;
pub mod expr;
pub mod format;
pub mod parallel;
pub mod plan;
pub mod table;
