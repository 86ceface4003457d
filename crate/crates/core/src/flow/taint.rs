use serde::{Deserialize, Serialize};

use super::catalog::{Category, SourceSinkCatalog};
use super::graph::{FlowGraph, NodeOp, NodeRef};

/// Witness that a value moves from a source site to a target site.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowPath {
    pub nodes: Vec<NodeRef>,
    pub source_category: Category,
    pub sink_category: Category,
}

impl FlowPath {
    pub fn source(&self) -> &NodeRef {
        &self.nodes[0]
    }

    pub fn target(&self) -> &NodeRef {
        self.nodes.last().expect("paths are never empty")
    }
}

/// Sensitive-source nodes, in node order.
pub fn sensitive_source_nodes(g: &FlowGraph, cat: &SourceSinkCatalog) -> Vec<(usize, Category)> {
    g.nodes()
        .iter()
        .enumerate()
        .filter_map(|(i, n)| match &n.op {
            NodeOp::Call(id) => cat.source_category(id).map(|c| (i, c)),
            NodeOp::ConstString(v) if cat.personal_string(v) => {
                Some((i, Category::HardcodedPersonalString))
            }
            _ => None,
        })
        .collect()
}

/// Call nodes whose callee is classified by `classify`.
pub fn call_nodes(
    g: &FlowGraph,
    mut classify: impl FnMut(&crate::sir::MethodId) -> Option<Category>,
) -> Vec<(usize, Category)> {
    g.nodes()
        .iter()
        .enumerate()
        .filter_map(|(i, n)| match &n.op {
            NodeOp::Call(id) => classify(id).map(|c| (i, c)),
            _ => None,
        })
        .collect()
}

/// One shortest path per reachable `(source, target)` pair, following
/// value-carrying edges and never entering a blocked node. Among equally
/// short paths the lexicographically smallest node sequence wins.
/// Output is sorted by source, then target.
pub fn shortest_paths(
    g: &FlowGraph,
    sources: &[(usize, Category)],
    targets: &[(usize, Category)],
    blocked: &[bool],
) -> Vec<FlowPath> {
    let n = g.len();
    let mut target_cat: Vec<Option<Category>> = vec![None; n];
    for &(t, c) in targets {
        target_cat[t].get_or_insert(c);
    }
    let mut sources = sources.to_vec();
    sources.sort();
    sources.dedup_by_key(|(s, _)| *s);

    let mut out = Vec::new();
    let mut pred = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    for &(s, source_cat) in &sources {
        if blocked.get(s).copied().unwrap_or(false) {
            continue;
        }
        pred.iter_mut().for_each(|p| *p = usize::MAX);
        seen.iter_mut().for_each(|v| *v = false);
        seen[s] = true;
        let mut reached: Vec<usize> = Vec::new();
        // Each layer is kept in lexicographic order of the best path to it.
        let mut layer = vec![s];
        while !layer.is_empty() {
            let mut next: Vec<(usize, usize)> = Vec::new();
            for (rank, &u) in layer.iter().enumerate() {
                for &v in g.flow_successors(u) {
                    if seen[v] || blocked.get(v).copied().unwrap_or(false) {
                        continue;
                    }
                    seen[v] = true;
                    pred[v] = u;
                    next.push((rank, v));
                }
            }
            next.sort_unstable();
            layer = next.into_iter().map(|(_, v)| v).collect();
            reached.extend(layer.iter().copied().filter(|&v| target_cat[v].is_some()));
        }
        reached.sort_unstable();
        for t in reached {
            let mut path = vec![t];
            let mut cur = t;
            while cur != s {
                cur = pred[cur];
                path.push(cur);
            }
            path.reverse();
            out.push(FlowPath {
                nodes: path.into_iter().map(|i| g.node(i).site.clone()).collect(),
                source_category: source_cat,
                sink_category: target_cat[t].expect("reached nodes are targets"),
            });
        }
    }
    out
}

/// Every sensitive-source to sink pair that a value can travel between,
/// with its shortest witness path.
pub fn confirm_leak(g: &FlowGraph, cat: &SourceSinkCatalog) -> Vec<FlowPath> {
    let sources = sensitive_source_nodes(g, cat);
    let sinks = call_nodes(g, |id| cat.sink_category(id));
    shortest_paths(g, &sources, &sinks, &[])
}

/// Untrusted-input to consumer pairs connected by a path that avoids
/// every sanitizer call.
pub fn confirm_injection(g: &FlowGraph, cat: &SourceSinkCatalog) -> Vec<FlowPath> {
    let sources = call_nodes(g, |id| cat.untrusted_category(id));
    let consumers = call_nodes(g, |id| cat.consumer_category(id));
    shortest_paths(g, &sources, &consumers, &sanitizer_mask(g, cat))
}

pub fn sanitizer_mask(g: &FlowGraph, cat: &SourceSinkCatalog) -> Vec<bool> {
    g.nodes()
        .iter()
        .map(|n| matches!(&n.op, NodeOp::Call(id) if cat.is_sanitizer(id)))
        .collect()
}
