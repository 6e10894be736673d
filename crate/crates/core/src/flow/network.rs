use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{Digraph, Node};

/// Upper bound on `(k+1)(m + nq)` left nodes of the lifted network.
pub const MAX_LIFTED_LEFT: u128 = 1 << 22;
/// Upper bound on arcs of the lifted network.
pub const MAX_LIFTED_ARCS: u128 = 1 << 24;

/// Node roles. `layer` is the segment index ℓ and `copy` the ensemble
/// member p (both 0-based; always 0 in the small network).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeRole {
    Source,
    Sink,
    /// λ: copy of control node `index`.
    Control {
        layer: usize,
        index: usize,
    },
    /// ν: left (out-)copy of state node `index`.
    StateOut {
        layer: usize,
        copy: usize,
        index: usize,
    },
    /// μ: right (in-)copy of state node `index`.
    StateIn {
        copy: usize,
        index: usize,
    },
}

impl NodeRole {
    /// Image under the homomorphism onto the small network: forget layer and copy.
    pub fn project(self) -> NodeRole {
        match self {
            NodeRole::Control { index, .. } => NodeRole::Control { layer: 0, index },
            NodeRole::StateOut { index, .. } => NodeRole::StateOut {
                layer: 0,
                copy: 0,
                index,
            },
            NodeRole::StateIn { index, .. } => NodeRole::StateIn { copy: 0, index },
            other => other,
        }
    }
}

/// The rule that produced an arc, expressed in terms of `G`. Arcs of the
/// lifted network carry the origin of their image in the small network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArcOrigin {
    SourceControl { control: usize },
    SourceState { state: usize },
    ControlEdge { control: usize, state: usize },
    StateEdge { from: usize, to: usize },
    StateSink { state: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcLayer {
    SourceLeft,
    LeftRight,
    RightSink,
}

impl ArcOrigin {
    pub fn layer(self) -> ArcLayer {
        match self {
            ArcOrigin::SourceControl { .. } | ArcOrigin::SourceState { .. } => ArcLayer::SourceLeft,
            ArcOrigin::ControlEdge { .. } | ArcOrigin::StateEdge { .. } => ArcLayer::LeftRight,
            ArcOrigin::StateSink { .. } => ArcLayer::RightSink,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: i64,
    pub origin: ArcOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkKind {
    /// The 3-layer network with capacities in multiples of `k+1` and `q`.
    Small { witness_mode: bool },
    /// The unit-capacity expansion over segments and ensemble members.
    Lifted,
}

/// A capacitated 3-layer digraph `s → L → R → t`, immutable once built.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    kind: NetworkKind,
    k: u64,
    q: u64,
    graph: Digraph,
    nodes: Vec<NodeRole>,
    arcs: Vec<FlowArc>,
    node_index: HashMap<NodeRole, usize>,
    arc_index: HashMap<(usize, usize), usize>,
}

impl FlowNetwork {
    fn assemble(
        kind: NetworkKind,
        k: u64,
        q: u64,
        graph: &Digraph,
        nodes: Vec<NodeRole>,
        arcs: Vec<FlowArc>,
    ) -> Self {
        let node_index = nodes.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let arc_index = arcs
            .iter()
            .enumerate()
            .map(|(i, a)| ((a.from, a.to), i))
            .collect();
        Self {
            kind,
            k,
            q,
            graph: graph.clone(),
            nodes,
            arcs,
            node_index,
            arc_index,
        }
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// The digraph this network was built from.
    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn nodes(&self) -> &[NodeRole] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node_of(&self, role: NodeRole) -> Option<usize> {
        self.node_index.get(&role).copied()
    }

    pub fn arc_between(&self, from: usize, to: usize) -> Option<usize> {
        self.arc_index.get(&(from, to)).copied()
    }

    /// Total capacity into the sink, `n · q` for both constructions.
    pub fn sink_capacity(&self) -> i128 {
        self.arcs
            .iter()
            .filter(|a| a.origin.layer() == ArcLayer::RightSink)
            .map(|a| a.capacity as i128)
            .sum()
    }

    /// Human-readable 1-based node label, also used as the DOT/JSON id.
    pub fn label(&self, node: usize) -> String {
        let lifted = self.kind == NetworkKind::Lifted;
        match self.nodes[node] {
            NodeRole::Source => "s".into(),
            NodeRole::Sink => "t".into(),
            NodeRole::Control { layer, index } if lifted => {
                format!("lambda_{}_{}", layer + 1, index + 1)
            }
            NodeRole::Control { index, .. } => format!("lambda_{}", index + 1),
            NodeRole::StateOut { layer, copy, index } if lifted => {
                format!("nu_{}_{}_{}", layer + 1, copy + 1, index + 1)
            }
            NodeRole::StateOut { index, .. } => format!("nu_{}", index + 1),
            NodeRole::StateIn { copy, index } if lifted => format!("mu_{}_{}", copy + 1, index + 1),
            NodeRole::StateIn { index, .. } => format!("mu_{}", index + 1),
        }
    }

    /// True iff `other` was built from the same digraph and `(k, q)`.
    pub fn same_provenance(&self, other: &FlowNetwork) -> bool {
        self.k == other.k && self.q == other.q && self.graph == other.graph
    }
}

fn capacity(v: i128, what: &str) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Range(format!("{what} = {v} does not fit in 64 bits")))
}

/// Small network: left layer `λ_1..λ_m, ν_1..ν_n`, right layer `μ_1..μ_n`,
/// with capacities `c(s,λ)=k+1`, `c(s,ν)=q(k+1)`, `c(λ,μ)=k+1`,
/// `c(ν,μ)=q(k+1)`, `c(μ,t)=q`.
///
/// In witness mode every left-right capacity becomes
/// `C∞ = 1 + Σ c(s, ·)`, so no minimum cut can use a left-right arc. The
/// max-flow value does not change because each left node is already limited
/// by its single source arc.
pub fn build_small_network(g: &Digraph, k: u64, q: u64, witness_mode: bool) -> Result<FlowNetwork> {
    if q == 0 {
        return Err(Error::Domain("ensemble size q must be at least 1".into()));
    }
    let (n, m) = (g.n_state(), g.n_control());
    let k1 = k as i128 + 1;
    let qk1 = q as i128 * k1;
    let c_control = capacity(k1, "k + 1")?;
    let c_state = capacity(qk1, "q(k + 1)")?;
    let c_sink = capacity(q as i128, "q")?;
    let source_total = m as i128 * k1 + n as i128 * qk1;
    let infinite = capacity(source_total + 1, "witness-mode capacity")?;
    let lr_control_total = g
        .edges()
        .iter()
        .filter(|(f, _)| matches!(f, Node::Control(_)))
        .count() as i128;
    let lr_state_total = g.edge_count() as i128 - lr_control_total;
    let total = if witness_mode {
        source_total + g.edge_count() as i128 * (source_total + 1) + n as i128 * q as i128
    } else {
        source_total + lr_control_total * k1 + lr_state_total * qk1 + n as i128 * q as i128
    };
    capacity(total, "total network capacity")?;

    let mut nodes = vec![NodeRole::Source];
    nodes.extend((0..m).map(|index| NodeRole::Control { layer: 0, index }));
    nodes.extend((0..n).map(|index| NodeRole::StateOut {
        layer: 0,
        copy: 0,
        index,
    }));
    nodes.extend((0..n).map(|index| NodeRole::StateIn { copy: 0, index }));
    nodes.push(NodeRole::Sink);
    let lambda = |i: usize| 1 + i;
    let nu = |i: usize| 1 + m + i;
    let mu = |j: usize| 1 + m + n + j;
    let sink = nodes.len() - 1;

    let mut arcs = Vec::with_capacity(2 * n + m + g.edge_count());
    for i in 0..m {
        arcs.push(FlowArc {
            from: 0,
            to: lambda(i),
            capacity: c_control,
            origin: ArcOrigin::SourceControl { control: i },
        });
    }
    for j in 0..n {
        arcs.push(FlowArc {
            from: 0,
            to: nu(j),
            capacity: c_state,
            origin: ArcOrigin::SourceState { state: j },
        });
    }
    for &(from, to) in g.edges() {
        let Node::State(j) = to else { unreachable!() };
        let arc = match from {
            Node::Control(i) => FlowArc {
                from: lambda(i),
                to: mu(j),
                capacity: if witness_mode { infinite } else { c_control },
                origin: ArcOrigin::ControlEdge {
                    control: i,
                    state: j,
                },
            },
            Node::State(i) => FlowArc {
                from: nu(i),
                to: mu(j),
                capacity: if witness_mode { infinite } else { c_state },
                origin: ArcOrigin::StateEdge { from: i, to: j },
            },
        };
        arcs.push(arc);
    }
    // Edges iterate State sources before Control sources; order λ-arcs first.
    arcs[m + n..].sort_by_key(|a| match a.origin {
        ArcOrigin::ControlEdge { control, state } => (0, control, state),
        ArcOrigin::StateEdge { from, to } => (1, from, to),
        _ => unreachable!(),
    });
    for j in 0..n {
        arcs.push(FlowArc {
            from: mu(j),
            to: sink,
            capacity: c_sink,
            origin: ArcOrigin::StateSink { state: j },
        });
    }
    Ok(FlowNetwork::assemble(
        NetworkKind::Small { witness_mode },
        k,
        q,
        g,
        nodes,
        arcs,
    ))
}

/// Unit-capacity network over segments `ℓ ∈ 0..=k` and members `p ∈ 0..q`:
/// left layer `λ_{ℓi}` and `ν_{ℓpi}`, right layer `μ_{pj}`; arcs
/// `λ_{ℓi} → μ_{pj}` for every `(β_i, α_j) ∈ E` and every ℓ, p, and
/// `ν_{ℓpi} → μ_{pj}` for every `(α_i, α_j) ∈ E` (same p on both ends).
pub fn build_lifted_network(g: &Digraph, k: u64, q: u64) -> Result<FlowNetwork> {
    if q == 0 {
        return Err(Error::Domain("ensemble size q must be at least 1".into()));
    }
    let (n, m) = (g.n_state(), g.n_control());
    let k1 = k as u128 + 1;
    let qn = q as u128 * n as u128;
    let left = k1 * (m as u128 + qn);
    if left > MAX_LIFTED_LEFT {
        return Err(Error::Size(format!(
            "lifted network would have {left} left nodes, limit is {MAX_LIFTED_LEFT}"
        )));
    }
    let arc_total = left + qn + k1 * q as u128 * g.edge_count() as u128;
    if arc_total > MAX_LIFTED_ARCS {
        return Err(Error::Size(format!(
            "lifted network would have {arc_total} arcs, limit is {MAX_LIFTED_ARCS}"
        )));
    }
    let (layers, copies) = (k as usize + 1, q as usize);

    let mut nodes = vec![NodeRole::Source];
    for layer in 0..layers {
        for index in 0..m {
            nodes.push(NodeRole::Control { layer, index });
        }
    }
    for layer in 0..layers {
        for copy in 0..copies {
            for index in 0..n {
                nodes.push(NodeRole::StateOut { layer, copy, index });
            }
        }
    }
    for copy in 0..copies {
        for index in 0..n {
            nodes.push(NodeRole::StateIn { copy, index });
        }
    }
    nodes.push(NodeRole::Sink);
    let lambda = |l: usize, i: usize| 1 + l * m + i;
    let nu = |l: usize, p: usize, i: usize| 1 + layers * m + (l * copies + p) * n + i;
    let mu = |p: usize, j: usize| 1 + layers * m + layers * copies * n + p * n + j;
    let sink = nodes.len() - 1;

    let mut arcs = Vec::with_capacity(arc_total as usize);
    for l in 0..layers {
        for i in 0..m {
            arcs.push(FlowArc {
                from: 0,
                to: lambda(l, i),
                capacity: 1,
                origin: ArcOrigin::SourceControl { control: i },
            });
        }
    }
    for l in 0..layers {
        for p in 0..copies {
            for i in 0..n {
                arcs.push(FlowArc {
                    from: 0,
                    to: nu(l, p, i),
                    capacity: 1,
                    origin: ArcOrigin::SourceState { state: i },
                });
            }
        }
    }
    let control_edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter_map(|&(f, t)| match (f, t) {
            (Node::Control(i), Node::State(j)) => Some((i, j)),
            _ => None,
        })
        .collect();
    let state_edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter_map(|&(f, t)| match (f, t) {
            (Node::State(i), Node::State(j)) => Some((i, j)),
            _ => None,
        })
        .collect();
    for l in 0..layers {
        for &(i, j) in &control_edges {
            for p in 0..copies {
                arcs.push(FlowArc {
                    from: lambda(l, i),
                    to: mu(p, j),
                    capacity: 1,
                    origin: ArcOrigin::ControlEdge {
                        control: i,
                        state: j,
                    },
                });
            }
        }
    }
    for l in 0..layers {
        for p in 0..copies {
            for &(i, j) in &state_edges {
                arcs.push(FlowArc {
                    from: nu(l, p, i),
                    to: mu(p, j),
                    capacity: 1,
                    origin: ArcOrigin::StateEdge { from: i, to: j },
                });
            }
        }
    }
    for p in 0..copies {
        for j in 0..n {
            arcs.push(FlowArc {
                from: mu(p, j),
                to: sink,
                capacity: 1,
                origin: ArcOrigin::StateSink { state: j },
            });
        }
    }
    Ok(FlowNetwork::assemble(
        NetworkKind::Lifted,
        k,
        q,
        g,
        nodes,
        arcs,
    ))
}
