//! Homomorphism-based SPARQL basic graph pattern matching over RDF data.
//!
//! The pipeline: parse N-Triples ([`ingest`]), transform them into a labeled
//! graph ([`transform`]), index it ([`graph_store`]), and match query graphs
//! against it with the candidate-region engine ([`engine`]).

pub mod csr;
pub mod engine;
pub mod graph_store;
pub mod ingest;
pub mod oracle;
pub mod parallel;
pub mod query;
pub mod sparql_ext;
pub mod transform;

pub use engine::{EngineConfig, MatchMode, Solution};
pub use sparql_ext::{Database, ExecOptions, ResultSet};
pub use transform::TransformMode;
