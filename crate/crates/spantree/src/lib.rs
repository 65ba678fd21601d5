//! Graph algorithms around vertex expansion and spanning-tree
//! universality: an `(n, d)`-expander checker with exact and sampled
//! modes, seeded random-graph constructions, labeled-tree machinery, a
//! staged spanning-tree embedding engine (Hamilton paths, star matchings,
//! greedy tree placement), and a Maker-Breaker game engine with the
//! Erdős–Selfridge potential strategy.
//!
//! Everything randomized takes a 64-bit seed and is bit-reproducible;
//! independent substreams are derived per trial. The narrative guide
//! lives in `book/` and its code snippets compile and run as doc-tests
//! (see [`guide`]).

mod combos;

pub mod embed;
pub mod expansion;
pub mod games;
pub mod generators;
pub mod graph;
pub mod guide;
pub mod trees;

pub use graph::{Embedding, Graph, GraphError, VertexSet};
