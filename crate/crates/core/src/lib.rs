//! Stallings folds, Whitehead graphs and certified tameness for subsets of
//! free groups.

pub mod check;
pub mod cli;
pub mod error;
pub mod folding;
pub mod graph;
pub mod oracles;
pub mod tameness;
pub mod whitehead;
pub mod words;

pub use error::{Error, Result};
pub use folding::{
    factor_through_almost_rose, fold_once, fold_to_completion, FoldSequence, FoldStep,
};
pub use graph::{BasedGraph, DirEdge, EdgeId, GraphMorphism, LabeledGraph, VertexId};
pub use tameness::{
    decide_tame, theta, verify_certificate, wh_of_theta, AlmostRose, SignedRelabeling,
    TamenessCertificate, Verdict,
};
pub use whitehead::{wh_of_graph, wh_of_set, WhiteheadGraph};
pub use words::{CyclicWord, Letter, Word};
