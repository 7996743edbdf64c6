//! Command-line front end and HTTP session service for the keytrack engine.

pub mod commands;
pub mod config;
pub mod service;
