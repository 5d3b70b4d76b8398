//! Command-line front end for `rrmcv-core`: CSV ingestion of Phase II data,
//! table reproduction and report output.

pub mod app;
pub mod error;
pub mod ingest;
pub mod report;
pub mod tables;

pub use rrmcv_core as core;
