//! Command-line front end: CSV ingestion, model files and the fit/predict/evaluate/transform commands.

pub mod args;
pub mod commands;
pub mod dataset;
pub mod error;
pub mod model_file;
pub mod models;
