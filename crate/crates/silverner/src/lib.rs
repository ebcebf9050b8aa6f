//! File formats, process plumbing and orchestration around
//! [`silverner_core`]: streaming dump and catalog readers, the auxiliary
//! tagger client, the ordered parallel build, reports and the CLI.

pub mod aux;
pub mod catalog_io;
pub mod cli;
pub mod config;
pub mod corpus_io;
pub mod digest;
pub mod dump;
pub mod ordered;
pub mod pipeline;
pub mod report;

pub use silverner_core as core;
