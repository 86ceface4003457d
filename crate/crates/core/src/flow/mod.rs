//! Interprocedural flow graph and the two path-confirmation queries:
//! sensitive data reaching an exit API, and untrusted data reaching a
//! consumer without passing a sanitizer.

mod catalog;
mod graph;
mod taint;

pub use catalog::{Category, Pattern, PatternSet, SourceSinkCatalog};
pub use graph::{build_flow_graph, EdgeKinds, FlowGraph, FlowNode, NodeOp, NodeRef, Slot};
pub use taint::{
    call_nodes, confirm_injection, confirm_leak, sanitizer_mask, sensitive_source_nodes,
    shortest_paths, FlowPath,
};

#[cfg(test)]
mod tests;
