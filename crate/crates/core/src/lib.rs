//! Toolkit for structured workflow definitions: a JSON data model, seeded
//! synthetic generation, Graphviz rendering and tree-based similarity
//! scoring of candidate workflows against references.

pub mod flow;
pub mod harness;
pub mod metrics;
pub mod render;
pub mod synth;
pub mod tree;
