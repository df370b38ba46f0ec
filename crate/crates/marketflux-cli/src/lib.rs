//! Command-line front end: run configurations, series ingestion, artifact
//! output with checksummed manifests, and the pipelines behind each subcommand.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;
