//! IO companion to `fracprox-core`: the plain-text instance format, CSV/JSON
//! report rendering, and a thread-pool driver for sweeps.

pub mod instance;
pub mod parallel;
pub mod report;
