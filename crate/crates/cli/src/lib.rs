//! Pipeline around the scimap library: configuration, tab-separated file
//! ingestion, end-to-end orchestration, and report/plot emission.

pub mod config;
pub mod ingest;
pub mod pipeline;
pub mod plot;
pub mod report;
