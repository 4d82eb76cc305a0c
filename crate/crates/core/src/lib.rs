//! Analysis of two-user computation broadcast instances.

pub mod binning;
pub mod distributions;
pub mod gf_linalg;
pub mod io;
pub mod lcb;
pub mod library;
pub mod matching;
pub mod oracle;
