//! Query model: the SPARQL subset AST and parser, FILTER expressions, and the
//! query graph / query tree structures consumed by the matcher.

pub mod ast;
mod filter;
mod graph;
mod parser;

pub use ast::{ArithOp, CompareOp, Expr, GroupPattern, Projection, Query, TermPattern, TriplePattern};
pub use filter::{FilterCost, FilterExpr};
pub use graph::{build_query_tree, GroupId, OptionalGroup, QueryEdge, QueryGraph, QueryTree, QueryVertex, TreeLink};
pub use parser::{parse_query, parse_query_with_warnings, ParseWarning, QueryError};
