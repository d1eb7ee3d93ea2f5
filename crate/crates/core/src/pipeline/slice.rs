use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{CallEdge, CallGraph, NodeId, PipelineError, Role};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSlice {
    pub anchor: NodeId,
    /// Ordered by first observation, then id.
    pub nodes: Vec<NodeId>,
    pub edges: Vec<CallEdge>,
    pub roles: BTreeMap<NodeId, BTreeSet<Role>>,
    pub complete: bool,
    pub missing_inputs: Vec<NodeId>,
}

impl PipelineSlice {
    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.nodes.iter().cloned().collect()
    }
}

/// The part of the graph that carries data from input sources through the
/// anchor to sinks.
///
/// Upstream, only nodes on some input → anchor path are kept; when such paths
/// pass through model entries, nodes on paths that bypass every model are
/// dropped too. Downstream, only nodes on some anchor → sink path are kept.
/// If no input source reaches the anchor, the slice keeps every ancestor and
/// reports the root ancestors as missing inputs.
pub fn slice_pipeline(graph: &CallGraph, anchor: &NodeId) -> Result<PipelineSlice, PipelineError> {
    if !graph.contains(anchor) {
        return Err(PipelineError::AnchorNotFound(anchor.clone()));
    }
    let inputs = graph.with_role(Role::InputSource);
    let sinks = graph.with_role(Role::Sink);
    let ancestors = graph.reachable([anchor], false);

    let from_inputs = graph.reachable(&inputs, true);
    let upstream: BTreeSet<NodeId> = ancestors.intersection(&from_inputs).cloned().collect();
    let (upstream, missing_inputs) = if upstream.is_empty() {
        let mut roots: Vec<NodeId> =
            ancestors.iter().filter(|n| graph.predecessors(n).next().is_none()).cloned().collect();
        if roots.is_empty() {
            // anchor sits on a cycle with no entry
            roots.push(anchor.clone());
        }
        (ancestors.clone(), roots)
    } else {
        (through_models(graph, &upstream, &from_inputs, anchor), Vec::new())
    };

    let descendants = graph.reachable([anchor], true);
    let to_sinks = graph.reachable(&sinks, false);
    let mut set: BTreeSet<NodeId> = upstream;
    set.extend(descendants.intersection(&to_sinks).cloned());
    set.insert(anchor.clone());

    let mut nodes: Vec<NodeId> = set.iter().cloned().collect();
    nodes.sort_by_key(|id| (graph.node(id).and_then(|n| n.first_seen_ts).unwrap_or(u64::MAX), id.clone()));
    let edges = graph.edges().filter(|e| set.contains(&e.from) && set.contains(&e.to)).collect();
    let roles = nodes
        .iter()
        .filter_map(|id| graph.node(id).filter(|n| !n.roles.is_empty()).map(|n| (id.clone(), n.roles.clone())))
        .collect();
    Ok(PipelineSlice {
        anchor: anchor.clone(),
        nodes,
        edges,
        roles,
        complete: missing_inputs.is_empty(),
        missing_inputs,
    })
}

/// Restricts `upstream` to flows that pass through a model entry, if any
/// model entry lies upstream of the anchor.
fn through_models(
    graph: &CallGraph,
    upstream: &BTreeSet<NodeId>,
    from_inputs: &BTreeSet<NodeId>,
    anchor: &NodeId,
) -> BTreeSet<NodeId> {
    let models: Vec<NodeId> = upstream
        .iter()
        .filter(|id| graph.node(id).is_some_and(|n| n.roles.contains(&Role::ModelEntry)))
        .cloned()
        .collect();
    if models.is_empty() {
        return upstream.clone();
    }
    let before: BTreeSet<NodeId> =
        graph.reachable(&models, false).intersection(from_inputs).cloned().collect();
    let after = graph.reachable(&models, true);
    let ancestors = graph.reachable([anchor], false);
    let mut out: BTreeSet<NodeId> = before;
    out.extend(after.intersection(&ancestors).cloned());
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub model_nodes: Vec<NodeId>,
    /// Edges into a model entry whose source the declared inputs never reach.
    pub extra_inflows: Vec<CallEdge>,
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        self.extra_inflows.is_empty()
    }
}

/// Checks that every model entry in the slice is fed only from what the
/// declared inputs reach. In-edges are read from `graph`, because a foreign
/// feed is by construction outside the slice.
pub fn completeness_check(
    slice: &PipelineSlice,
    graph: &CallGraph,
    declared_inputs: &BTreeSet<NodeId>,
) -> CompletenessReport {
    let model_nodes: Vec<NodeId> = slice
        .nodes
        .iter()
        .filter(|id| graph.node(id).is_some_and(|n| n.roles.contains(&Role::ModelEntry)))
        .cloned()
        .collect();
    let reached = graph.reachable(declared_inputs, true);
    let models: BTreeSet<&NodeId> = model_nodes.iter().collect();
    let extra_inflows = graph
        .edges()
        .filter(|e| models.contains(&e.to) && !reached.contains(&e.from))
        .collect();
    CompletenessReport { model_nodes, extra_inflows }
}
