//! Library surface of the `ellipcert` command-line tool: configuration
//! parsing, the approximation-file format, and the command
//! implementations.  The binary in `main.rs` is a thin argument-parsing
//! wrapper around [`commands`].

pub mod approx;
pub mod commands;
pub mod config;
