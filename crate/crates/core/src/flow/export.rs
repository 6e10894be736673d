use std::fmt::Write as _;

use num_rational::BigRational;
use serde_json::{json, Value};

use super::maxflow::FlowAssignment;
use super::network::FlowNetwork;

fn rational_json(v: &BigRational) -> Value {
    if v.is_integer() {
        if let Ok(i) = i64::try_from(v.to_integer()) {
            return json!(i);
        }
    }
    Value::String(format!("{}/{}", v.numer(), v.denom()))
}

fn rational_text(v: &BigRational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Graphviz rendering. Edges are labeled with the capacity, or with
/// `flow/capacity` when a flow is given.
pub fn network_to_dot(net: &FlowNetwork, flow: Option<&FlowAssignment>) -> String {
    let mut s = String::from("digraph N {\n  rankdir=LR;\n");
    for v in 0..net.node_count() {
        let _ = writeln!(s, "  {};", net.label(v));
    }
    for (i, a) in net.arcs().iter().enumerate() {
        let label = match flow {
            Some(f) => format!("{}/{}", rational_text(&f.values[i]), a.capacity),
            None => a.capacity.to_string(),
        };
        let _ = writeln!(
            s,
            "  {} -> {} [label=\"{label}\"];",
            net.label(a.from),
            net.label(a.to)
        );
    }
    s.push_str("}\n");
    s
}

/// `{nodes: [..], arcs: [{from, to, cap, flow}]}`; `flow` is null without a
/// flow, an integer when integral and a `"p/q"` string otherwise.
pub fn network_to_json(net: &FlowNetwork, flow: Option<&FlowAssignment>) -> Value {
    let nodes: Vec<Value> = (0..net.node_count()).map(|v| json!(net.label(v))).collect();
    let arcs: Vec<Value> = net
        .arcs()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            json!({
                "from": net.label(a.from),
                "to": net.label(a.to),
                "cap": a.capacity,
                "flow": flow.map_or(Value::Null, |f| rational_json(&f.values[i])),
            })
        })
        .collect();
    let mut doc = json!({ "nodes": nodes, "arcs": arcs });
    if let Some(f) = flow {
        doc["value"] = rational_json(&f.value);
    }
    doc
}
