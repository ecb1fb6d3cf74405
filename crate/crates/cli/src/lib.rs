//! Program files, CSV data, generators and SQL text for the difference engine.

pub mod bench;
pub mod corpus;
pub mod csv_io;
pub mod dsl;
pub mod error;
pub mod gen;
pub mod run;
pub mod sql;
