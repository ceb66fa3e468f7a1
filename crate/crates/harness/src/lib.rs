//! Experiment catalog, configuration and report emission for the FMM/BEM
//! Helmholtz preconditioner.

pub mod catalog;
pub mod config;
pub mod matrix_market;
pub mod report;
pub mod runner;
pub mod selftest;
pub mod spectrum;
