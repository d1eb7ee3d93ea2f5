use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{CallEdge, EdgeKind, Frame, FunctionNode, JumpRecord, Layer, NodeId, Role, RoleMap};
use crate::detect::CandidateFunction;
use crate::trace::{RecordKind, TraceLog};

/// A jump whose branch or destination offset falls in no known function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedJump {
    pub jump: JumpRecord,
    pub branch_resolved: bool,
    pub dest_resolved: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CallGraph {
    nodes: BTreeMap<NodeId, FunctionNode>,
    edges: BTreeMap<(NodeId, NodeId, EdgeKind), u64>,
    pub unresolved_jumps: Vec<UnresolvedJump>,
    succ: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pred: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

/// Flat, serializable form of a [`CallGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub nodes: Vec<FunctionNode>,
    pub edges: Vec<CallEdge>,
    pub unresolved_jumps: Vec<UnresolvedJump>,
}

impl CallGraph {
    pub fn dump(&self) -> GraphDump {
        GraphDump {
            nodes: self.nodes.values().cloned().collect(),
            edges: self.edges().collect(),
            unresolved_jumps: self.unresolved_jumps.clone(),
        }
    }

    pub fn node(&self, id: &NodeId) -> Option<&FunctionNode> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &FunctionNode> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Edges ordered by (from, to, kind).
    pub fn edges(&self) -> impl Iterator<Item = CallEdge> + '_ {
        self.edges.iter().map(|((from, to, kind), &support)| CallEdge {
            from: from.clone(),
            to: to.clone(),
            kind: *kind,
            support,
        })
    }

    pub fn edge_support(&self, from: &NodeId, to: &NodeId, kind: EdgeKind) -> Option<u64> {
        self.edges.get(&(from.clone(), to.clone(), kind)).copied()
    }

    pub fn has_edge(&self, from: &NodeId, to: &NodeId) -> bool {
        self.succ.get(from).is_some_and(|s| s.contains(to))
    }

    pub fn successors(&self, id: &NodeId) -> impl Iterator<Item = &NodeId> {
        self.succ.get(id).into_iter().flatten()
    }

    pub fn predecessors(&self, id: &NodeId) -> impl Iterator<Item = &NodeId> {
        self.pred.get(id).into_iter().flatten()
    }

    /// Nodes carrying `role`, in id order.
    pub fn with_role(&self, role: Role) -> Vec<NodeId> {
        self.nodes.values().filter(|n| n.roles.contains(&role)).map(|n| n.id.clone()).collect()
    }

    /// Merges a role map; returns ids that name no node.
    pub fn apply_roles(&mut self, roles: &RoleMap) -> Vec<NodeId> {
        let mut unknown = Vec::new();
        for (id, rs) in roles {
            match self.nodes.get_mut(id) {
                Some(n) => n.roles.extend(rs.iter().copied()),
                None => unknown.push(id.clone()),
            }
        }
        unknown
    }

    /// Marks detector candidates as the place model output surfaces.
    pub fn mark_candidates(&mut self, candidates: &[CandidateFunction]) {
        for c in candidates {
            let id = NodeId::new(&c.function_name, c.library.as_deref());
            if let Some(n) = self.nodes.get_mut(&id) {
                n.roles.insert(Role::OutputRegister);
            }
        }
    }

    /// Total observation count over StackObserved edges.
    pub fn stack_observations(&self) -> u64 {
        self.edges
            .iter()
            .filter(|((_, _, k), _)| *k == EdgeKind::StackObserved)
            .map(|(_, s)| s)
            .sum()
    }

    /// Every node reachable from `starts` along edges (`forward`) or against
    /// them, including the starts themselves.
    pub fn reachable<'a>(&self, starts: impl IntoIterator<Item = &'a NodeId>, forward: bool) -> BTreeSet<NodeId> {
        let adj = if forward { &self.succ } else { &self.pred };
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<NodeId> = VecDeque::new();
        for s in starts {
            if self.nodes.contains_key(s) && seen.insert(s.clone()) {
                queue.push_back(s.clone());
            }
        }
        while let Some(n) = queue.pop_front() {
            for m in adj.get(&n).into_iter().flatten() {
                if seen.insert(m.clone()) {
                    queue.push_back(m.clone());
                }
            }
        }
        seen
    }

    fn touch(&mut self, frame: &Frame, ts: Option<u64>, exported: bool) -> NodeId {
        let id = frame.id();
        let node = self.nodes.entry(id.clone()).or_insert_with(|| FunctionNode {
            id: id.clone(),
            name: frame.name.clone(),
            library: frame.library.clone(),
            layer: if frame.library.is_some() { Layer::Native } else { Layer::Java },
            exported: false,
            roles: BTreeSet::new(),
            offset: None,
            first_seen_ts: None,
        });
        node.exported |= exported;
        if node.offset.is_none() {
            node.offset = frame.offset;
        }
        if let Some(ts) = ts {
            node.first_seen_ts = Some(node.first_seen_ts.map_or(ts, |t| t.min(ts)));
        }
        id
    }

    fn add_edge(&mut self, from: NodeId, to: NodeId, kind: EdgeKind, support: u64) {
        self.succ.entry(from.clone()).or_default().insert(to.clone());
        self.pred.entry(to.clone()).or_default().insert(from.clone());
        *self.edges.entry((from, to, kind)).or_insert(0) += support;
    }

    /// Function in `library` whose entry is the greatest one not above `offset`.
    fn containing(&self, index: &BTreeMap<&str, BTreeMap<u64, NodeId>>, library: &str, offset: u64) -> Option<NodeId> {
        index.get(library)?.range(..=offset).next_back().map(|(_, id)| id.clone())
    }
}

/// Builds the hybrid graph. Stack frames are innermost first, so each
/// adjacent pair `(callee, caller)` yields the edge caller → callee.
pub fn build_call_graph(log: &TraceLog, static_edges: &[CallEdge], jumps: &[JumpRecord]) -> CallGraph {
    let mut g = CallGraph::default();
    for r in &log.records {
        let own = Frame { name: r.function_name.clone(), library: r.library.clone(), offset: r.offset };
        g.touch(&own, Some(r.timestamp_ns), r.kind == RecordKind::JniTrampoline);
        if let Some(stack) = &r.stack {
            let ids: Vec<NodeId> =
                stack.iter().map(|s| g.touch(&Frame::parse(s), Some(r.timestamp_ns), false)).collect();
            for pair in ids.windows(2) {
                g.add_edge(pair[1].clone(), pair[0].clone(), EdgeKind::StackObserved, 1);
            }
        }
    }
    for e in static_edges {
        for id in [&e.from, &e.to] {
            if !g.contains(id) {
                g.touch(&Frame::parse(id.as_str()), None, false);
            }
        }
        g.add_edge(e.from.clone(), e.to.clone(), e.kind, e.support);
    }

    let mut index: BTreeMap<&str, BTreeMap<u64, NodeId>> = BTreeMap::new();
    for n in g.nodes.values() {
        if let (Some(lib), Some(off)) = (n.library.as_deref(), n.offset) {
            index.entry(lib).or_default().insert(off, n.id.clone());
        }
    }
    let mut jump_edges = Vec::new();
    let mut unresolved = Vec::new();
    for j in jumps {
        let from = g.containing(&index, &j.library, j.branch_offset);
        let to = g.containing(&index, &j.library, j.dest_offset);
        match (from, to) {
            (Some(from), Some(to)) if from != to => {
                jump_edges.push((from, to, j.observations.max(1)));
            }
            // a jump inside one function carries no call-graph information
            (Some(_), Some(_)) => {}
            (from, to) => unresolved.push(UnresolvedJump {
                jump: j.clone(),
                branch_resolved: from.is_some(),
                dest_resolved: to.is_some(),
            }),
        }
    }
    for (from, to, n) in jump_edges {
        g.add_edge(from, to, EdgeKind::DynamicJump, n);
    }
    g.unresolved_jumps = unresolved;
    g
}

/// All recorded destinations of one branch, ascending and deduplicated.
pub fn resolve_jump(jumps: &[JumpRecord], library: &str, branch_offset: u64) -> Vec<u64> {
    let dests: BTreeSet<u64> = jumps
        .iter()
        .filter(|j| j.library == library && j.branch_offset == branch_offset)
        .map(|j| j.dest_offset)
        .collect();
    dests.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceRecord;

    fn rec(name: &str, lib: Option<&str>, off: Option<u64>, ts: u64, stack: &[&str]) -> TraceRecord {
        let mut r = TraceRecord::new(RecordKind::Callback, name, ts);
        r.payload = Some("{}".into());
        r.library = lib.map(str::to_owned);
        r.offset = off;
        if !stack.is_empty() {
            r.stack = Some(stack.iter().map(|s| s.to_string()).collect());
        }
        r
    }

    fn id(s: &str) -> NodeId {
        NodeId::from(s)
    }

    #[test]
    fn stack_adjacency_is_caller_to_callee() {
        let log = TraceLog::from_records(vec![rec("C", None, None, 5, &["C", "B", "A"])]);
        let g = build_call_graph(&log, &[], &[]);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_support(&id("A"), &id("B"), EdgeKind::StackObserved), Some(1));
        assert_eq!(g.edge_support(&id("B"), &id("C"), EdgeKind::StackObserved), Some(1));
        assert!(!g.has_edge(&id("C"), &id("B")));
        assert_eq!(g.stack_observations(), 2);
    }

    #[test]
    fn support_accumulates() {
        let log = TraceLog::from_records(vec![
            rec("C", None, None, 1, &["C", "B"]),
            rec("C", None, None, 2, &["C", "B"]),
        ]);
        let g = build_call_graph(&log, &[], &[]);
        assert_eq!(g.edge_support(&id("B"), &id("C"), EdgeKind::StackObserved), Some(2));
        assert_eq!(g.node(&id("C")).unwrap().first_seen_ts, Some(1));
    }

    fn native_log() -> TraceLog {
        TraceLog::from_records(vec![
            rec("pre", Some("libeffect.so"), Some(0x100), 1, &[]),
            rec("m1", Some("libeffect.so"), Some(0x400), 2, &[]),
            rec("m2", Some("libeffect.so"), Some(0x800), 3, &[]),
        ])
    }

    fn jump(branch: u64, dest: u64) -> JumpRecord {
        JumpRecord { library: "libeffect.so".into(), branch_offset: branch, dest_offset: dest, observations: 1 }
    }

    #[test]
    fn multi_destination_jump() {
        let jumps = [jump(0x120, 0x400), jump(0x120, 0x800), jump(0x120, 0x400)];
        let g = build_call_graph(&native_log(), &[], &jumps);
        let pre = id("pre@libeffect.so");
        let out: Vec<_> = g.successors(&pre).cloned().collect();
        assert_eq!(out, [id("m1@libeffect.so"), id("m2@libeffect.so")]);
        assert_eq!(g.edge_support(&pre, &id("m1@libeffect.so"), EdgeKind::DynamicJump), Some(2));
        assert!(g.unresolved_jumps.is_empty());
    }

    #[test]
    fn unresolved_and_intra_function_jumps() {
        let jumps = [
            jump(0x10, 0x400),
            JumpRecord { library: "libother.so".into(), ..jump(0x120, 0x400) },
            jump(0x120, 0x140),
        ];
        let g = build_call_graph(&native_log(), &[], &jumps);
        assert_eq!(g.unresolved_jumps.len(), 2);
        assert!(!g.unresolved_jumps[0].branch_resolved);
        assert!(g.unresolved_jumps[0].dest_resolved);
        assert_eq!(g.edges().count(), 0);
    }

    #[test]
    fn static_edges_have_zero_support() {
        let e = CallEdge { from: id("x"), to: id("y@libz.so"), kind: EdgeKind::Static, support: 0 };
        let g = build_call_graph(&TraceLog::default(), &[e], &[]);
        assert_eq!(g.edge_support(&id("x"), &id("y@libz.so"), EdgeKind::Static), Some(0));
        assert_eq!(g.node(&id("y@libz.so")).unwrap().layer, Layer::Native);
        assert_eq!(g.node(&id("x")).unwrap().first_seen_ts, None);
    }

    #[test]
    fn resolve_jump_sorted() {
        let jumps = [jump(0x20, 0x40), jump(0x20, 0x10), jump(0x30, 0x99)];
        assert_eq!(resolve_jump(&jumps, "libeffect.so", 0x20), [0x10, 0x40]);
        assert_eq!(resolve_jump(&jumps, "libeffect.so", 0x30), [0x99]);
        assert!(resolve_jump(&jumps, "libeffect.so", 0x50).is_empty());
    }

    #[test]
    fn offsets_index_frames() {
        let log = TraceLog::from_records(vec![rec("f", None, None, 1, &["g@libq.so+0x40", "h@libq.so+0x10"])]);
        let g = build_call_graph(&log, &[], &[jump(0x18, 0x44)]);
        assert_eq!(
            g.edge_support(&id("h@libq.so"), &id("g@libq.so"), EdgeKind::DynamicJump),
            None,
            "library mismatch must not resolve"
        );
        let jumps = [JumpRecord { library: "libq.so".into(), branch_offset: 0x18, dest_offset: 0x44, observations: 3 }];
        let g = build_call_graph(&log, &[], &jumps);
        assert_eq!(g.edge_support(&id("h@libq.so"), &id("g@libq.so"), EdgeKind::DynamicJump), Some(3));
    }
}
