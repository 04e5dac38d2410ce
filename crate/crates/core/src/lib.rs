//! Grouped people tracking and counting with a MIMO FMCW radar.
//!
//! The crate covers the whole chain: radar cube processing and CFAR
//! detection, a scenario simulator, DBSCAN clustering, an EKF tracker with
//! GNN association, wavelet and spatial feature extraction, people-counting
//! classifiers and a counting-aware OSPA evaluation.

pub mod assign;
pub mod classify;
pub mod cluster;
pub mod datacube;
pub mod error;
pub mod features;
pub mod metrics;
pub mod pipeline;
pub mod sim;
pub mod track;

pub use error::{Error, Result};
