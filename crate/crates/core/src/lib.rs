//! Loop algebras over finite bipartite graphs, their traces, a layered tangle
//! evaluator, and two operator oracles: a truncated path Fock space and a
//! Gaussian block random-matrix model.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod algebra;
pub mod element;
pub mod error;
pub mod fock;
pub mod graph;
pub mod loops;
pub mod matrix_model;
pub mod nc;
pub mod par;
pub mod report;
pub mod tangle;
pub mod trace;

pub use element::Element;
pub use error::{Error, Result};
pub use graph::{BipartiteGraph, Edge, PfData, Shading, VertexId, WeightedGraph};
pub use loops::Loop;
pub use nc::NcPairing;
pub use par::ExecMode;
