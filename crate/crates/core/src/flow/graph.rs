use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::BitOr;

use serde::{Deserialize, Serialize};

use crate::package::AppPackage;
use crate::sir::{DefSite, FieldRef, Instruction, MethodId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slot {
    Entry,
    Instr(usize),
}

/// An instruction site or a synthetic method entry.
/// Ordered by (class, method, arity), then entry before instructions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeRef {
    pub method: MethodId,
    pub slot: Slot,
}

impl NodeRef {
    pub fn instr(method: MethodId, index: usize) -> Self {
        NodeRef {
            method,
            slot: Slot::Instr(index),
        }
    }

    pub fn entry(method: MethodId) -> Self {
        NodeRef {
            method,
            slot: Slot::Entry,
        }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slot {
            Slot::Entry => write!(f, "{}@entry", self.method),
            Slot::Instr(i) => write!(f, "{}@{i}", self.method),
        }
    }
}

/// What a node does, as far as pattern matching is concerned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeOp {
    Entry,
    Call(MethodId),
    /// String constant, with `@string/` references already resolved.
    ConstString(String),
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNode {
    pub site: NodeRef,
    pub op: NodeOp,
}

/// Set of edge kinds carried by one `(from, to)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct EdgeKinds(u8);

impl EdgeKinds {
    pub const SEQUENTIAL: EdgeKinds = EdgeKinds(1);
    pub const BRANCH: EdgeKinds = EdgeKinds(1 << 1);
    pub const DATA: EdgeKinds = EdgeKinds(1 << 2);
    pub const CALL: EdgeKinds = EdgeKinds(1 << 3);
    pub const RETURN: EdgeKinds = EdgeKinds(1 << 4);
    pub const FIELD: EdgeKinds = EdgeKinds(1 << 5);
    /// Kinds that move a value; taint follows only these.
    pub const FLOW: EdgeKinds = EdgeKinds(Self::DATA.0 | Self::CALL.0 | Self::RETURN.0 | Self::FIELD.0);

    pub fn contains(self, other: EdgeKinds) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn intersects(self, other: EdgeKinds) -> bool {
        self.0 & other.0 != 0
    }

    pub fn names(self) -> Vec<&'static str> {
        [
            (Self::SEQUENTIAL, "sequential"),
            (Self::BRANCH, "branch"),
            (Self::DATA, "data"),
            (Self::CALL, "call"),
            (Self::RETURN, "return"),
            (Self::FIELD, "field"),
        ]
        .into_iter()
        .filter(|(k, _)| self.contains(*k))
        .map(|(_, n)| n)
        .collect()
    }
}

impl BitOr for EdgeKinds {
    type Output = EdgeKinds;

    fn bitor(self, rhs: EdgeKinds) -> EdgeKinds {
        EdgeKinds(self.0 | rhs.0)
    }
}

/// Interprocedural graph over every instruction site of a package.
#[derive(Debug, Clone)]
pub struct FlowGraph {
    nodes: Vec<FlowNode>,
    index: HashMap<NodeRef, usize>,
    edges: BTreeMap<(usize, usize), EdgeKinds>,
    flow_succ: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn from_nodes(nodes: Vec<FlowNode>) -> Self {
        let index = nodes.iter().enumerate().map(|(i, n)| (n.site.clone(), i)).collect();
        let n = nodes.len();
        FlowGraph {
            nodes,
            index,
            edges: BTreeMap::new(),
            flow_succ: vec![Vec::new(); n],
        }
    }

    pub fn nodes(&self) -> &[FlowNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &FlowNode {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, site: &NodeRef) -> Option<usize> {
        self.index.get(site).copied()
    }

    /// All edges as `(from, to, kinds)`, sorted by endpoints.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeKinds)> + '_ {
        self.edges.iter().map(|(&(a, b), &k)| (a, b, k))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<EdgeKinds> {
        self.edges.get(&(from, to)).copied()
    }

    /// Value-carrying successors of `i`, ascending.
    pub fn flow_successors(&self, i: usize) -> &[usize] {
        &self.flow_succ[i]
    }

    /// Adds an edge; existing kinds on the same pair are kept.
    pub fn insert_edge(&mut self, from: usize, to: usize, kinds: EdgeKinds) {
        let slot = self.edges.entry((from, to)).or_default();
        *slot = *slot | kinds;
        if kinds.intersects(EdgeKinds::FLOW) {
            let succ = &mut self.flow_succ[from];
            if let Err(pos) = succ.binary_search(&to) {
                succ.insert(pos, to);
            }
        }
    }

    /// True when every consecutive pair of sites is joined by a
    /// value-carrying edge.
    pub fn is_flow_path(&self, sites: &[NodeRef]) -> bool {
        if sites.is_empty() {
            return false;
        }
        let Some(idx) = sites.iter().map(|s| self.index_of(s)).collect::<Option<Vec<_>>>() else {
            return false;
        };
        idx.windows(2)
            .all(|w| self.edge(w[0], w[1]).is_some_and(|k| k.intersects(EdgeKinds::FLOW)))
    }
}

/// Builds the flow graph of a package.
///
/// Nodes: one per instruction, plus an entry node for each method that
/// has parameters, is the target of a resolved call, or has no
/// instructions. Edges: fall-through and branch control flow,
/// def-use data flow (parameters are defined at the entry node),
/// call-site to callee entry, callee return to call-site, and
/// `field-put` to every `field-get` of the same `Class.field`.
/// Calls to methods outside the package stay leaf nodes.
pub fn build_flow_graph(pkg: &AppPackage) -> FlowGraph {
    let mut methods: Vec<_> = pkg.methods().map(|(_, m)| m).collect();
    methods.sort_by(|a, b| a.id.cmp(&b.id));
    let defined: BTreeSet<&MethodId> = methods.iter().map(|m| &m.id).collect();
    let called: BTreeSet<&MethodId> = methods
        .iter()
        .flat_map(|m| m.call_sites())
        .map(|(_, c)| c)
        .filter(|c| defined.contains(c))
        .collect();
    let has_entry = |m: &crate::sir::MethodBody| {
        m.id.arity > 0 || called.contains(&m.id) || m.instructions.is_empty()
    };

    let mut nodes = Vec::new();
    for m in &methods {
        if has_entry(m) {
            nodes.push(FlowNode {
                site: NodeRef::entry(m.id.clone()),
                op: NodeOp::Entry,
            });
        }
        for (i, ins) in m.instructions.iter().enumerate() {
            let op = match ins {
                Instruction::Call { callee, .. } => NodeOp::Call(callee.clone()),
                Instruction::ConstString { value, .. } => {
                    NodeOp::ConstString(pkg.resolve_string(value).to_string())
                }
                _ => NodeOp::Other,
            };
            nodes.push(FlowNode {
                site: NodeRef::instr(m.id.clone(), i),
                op,
            });
        }
    }
    let mut g = FlowGraph::from_nodes(nodes);
    let at = |g: &FlowGraph, id: &MethodId, i: usize| g.index[&NodeRef::instr(id.clone(), i)];
    let entry_of = |g: &FlowGraph, id: &MethodId| g.index_of(&NodeRef::entry(id.clone()));

    let mut puts: BTreeMap<&FieldRef, Vec<usize>> = BTreeMap::new();
    let mut gets: BTreeMap<&FieldRef, Vec<usize>> = BTreeMap::new();
    let mut returns: BTreeMap<&MethodId, Vec<usize>> = BTreeMap::new();
    let mut call_sites: Vec<(usize, &MethodId)> = Vec::new();

    for m in &methods {
        let entry = entry_of(&g, &m.id);
        if let Some(e) = entry {
            if !m.instructions.is_empty() {
                g.insert_edge(e, at(&g, &m.id, 0), EdgeKinds::SEQUENTIAL);
            }
        }
        for (i, ins) in m.instructions.iter().enumerate() {
            let here = at(&g, &m.id, i);
            if ins.falls_through() && i + 1 < m.instructions.len() {
                g.insert_edge(here, here + 1, EdgeKinds::SEQUENTIAL);
            }
            if let Some(label) = ins.branch_target() {
                let target = at(&g, &m.id, m.labels[label]);
                g.insert_edge(here, target, EdgeKinds::BRANCH);
            }
            match ins {
                Instruction::FieldPut { field, .. } => puts.entry(field).or_default().push(here),
                Instruction::FieldGet { field, .. } => gets.entry(field).or_default().push(here),
                Instruction::Call { callee, .. } if defined.contains(callee) => {
                    call_sites.push((here, callee))
                }
                Instruction::Return { .. } | Instruction::ReturnVoid => {
                    returns.entry(&m.id).or_default().push(here)
                }
                _ => {}
            }
        }
        for (def, use_idx) in m.reaching_defs().def_use_pairs(m) {
            let from = match def {
                DefSite::Param(_) => entry.expect("methods with parameters have entry nodes"),
                DefSite::Instr(d) => at(&g, &m.id, d),
            };
            g.insert_edge(from, at(&g, &m.id, use_idx), EdgeKinds::DATA);
        }
    }

    for (site, callee) in call_sites {
        let entry = entry_of(&g, callee).expect("called methods have entry nodes");
        g.insert_edge(site, entry, EdgeKinds::CALL);
        for &r in returns.get(callee).into_iter().flatten() {
            g.insert_edge(r, site, EdgeKinds::RETURN);
        }
    }
    for (field, put_sites) in &puts {
        for &p in put_sites {
            for &q in gets.get(field).into_iter().flatten() {
                g.insert_edge(p, q, EdgeKinds::FIELD);
            }
        }
    }
    g
}
