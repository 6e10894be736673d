use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::network::FlowNetwork;
use crate::error::{Error, Result};

/// A flow on the arcs of one network, stored as exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowAssignment {
    /// Per-arc values, indexed like [`FlowNetwork::arcs`].
    pub values: Vec<BigRational>,
    /// `|f|`: net flow out of the source.
    pub value: BigRational,
}

impl FlowAssignment {
    pub fn zero(net: &FlowNetwork) -> Self {
        Self {
            values: vec![BigRational::zero(); net.arc_count()],
            value: BigRational::zero(),
        }
    }

    pub fn from_integers(values: &[i64], value: i64) -> Self {
        Self {
            values: values.iter().map(|&v| int(v)).collect(),
            value: int(value),
        }
    }

    /// The value as an integer, if it is one.
    pub fn integral_value(&self) -> Option<i64> {
        if self.value.is_integer() {
            i64::try_from(self.value.to_integer()).ok()
        } else {
            None
        }
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Dinic's algorithm on an integral residual graph. Adjacency lists are
/// built in arc order and every phase restarts from the same state, so the
/// returned flow depends only on the network.
struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(net: &FlowNetwork) -> Self {
        let nodes = net.node_count();
        let mut d = Dinic {
            head: vec![Vec::new(); nodes],
            to: Vec::with_capacity(2 * net.arc_count()),
            cap: Vec::with_capacity(2 * net.arc_count()),
            level: vec![-1; nodes],
            iter: vec![0; nodes],
        };
        for a in net.arcs() {
            d.head[a.from].push(d.to.len());
            d.to.push(a.to);
            d.cap.push(a.capacity);
            d.head[a.to].push(d.to.len());
            d.to.push(a.from);
            d.cap.push(0);
        }
        d
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.head[v] {
                let w = self.to[e];
                if self.cap[e] > 0 && self.level[w] < 0 {
                    self.level[w] = self.level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        self.level[t] >= 0
    }

    /// Iterative blocking-flow DFS; returns the amount pushed along one path.
    fn augment(&mut self, s: usize, t: usize) -> i64 {
        let mut path: Vec<usize> = Vec::new();
        let mut v = s;
        loop {
            if v == t {
                let push = path.iter().map(|&e| self.cap[e]).min().unwrap_or(0);
                for &e in &path {
                    self.cap[e] -= push;
                    self.cap[e ^ 1] += push;
                }
                return push;
            }
            let mut advanced = false;
            while self.iter[v] < self.head[v].len() {
                let e = self.head[v][self.iter[v]];
                let w = self.to[e];
                if self.cap[e] > 0 && self.level[w] == self.level[v] + 1 {
                    path.push(e);
                    v = w;
                    advanced = true;
                    break;
                }
                self.iter[v] += 1;
            }
            if !advanced {
                // dead end: retreat and skip the arc that led here
                self.level[v] = -1;
                match path.pop() {
                    Some(e) => {
                        v = self.to[e ^ 1];
                        self.iter[v] += 1;
                    }
                    None => return 0,
                }
            }
        }
    }

    fn run(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0i64;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let pushed = self.augment(s, t);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }
}

/// Integral maximum flow: per-arc values and the total.
pub fn max_flow_integral(net: &FlowNetwork) -> (Vec<i64>, i64) {
    let mut d = Dinic::new(net);
    let value = d.run(net.source(), net.sink());
    let flows = net
        .arcs()
        .iter()
        .enumerate()
        .map(|(i, a)| a.capacity - d.cap[2 * i])
        .collect();
    (flows, value)
}

/// Exact maximum flow. Capacities are integral, so the returned flow is too.
pub fn max_flow(net: &FlowNetwork) -> FlowAssignment {
    let (flows, value) = max_flow_integral(net);
    FlowAssignment::from_integers(&flows, value)
}

/// Source side of the minimum cut induced by `f`: every node that cannot
/// reach the sink in the residual graph. This is the largest source side
/// over all minimum cuts, so the sink side is as small as possible. Fails if
/// the cut capacity differs from `|f|`, which means `f` was not maximum.
pub fn min_cut(net: &FlowNetwork, f: &FlowAssignment) -> Result<BTreeSet<usize>> {
    if f.values.len() != net.arc_count() {
        return Err(Error::ArcMismatch(format!(
            "flow has {} arc values, network has {} arcs",
            f.values.len(),
            net.arc_count()
        )));
    }
    let nodes = net.node_count();
    // residual predecessors: v -> w is residual if a forward arc v -> w has
    // spare capacity or an arc w -> v carries flow
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (i, a) in net.arcs().iter().enumerate() {
        if f.values[i] < int(a.capacity) {
            preds[a.to].push(a.from);
        }
        if f.values[i].is_positive() {
            preds[a.from].push(a.to);
        }
    }
    let mut reaches_sink = vec![false; nodes];
    reaches_sink[net.sink()] = true;
    let mut queue = VecDeque::from([net.sink()]);
    while let Some(w) = queue.pop_front() {
        for &v in &preds[w] {
            if !reaches_sink[v] {
                reaches_sink[v] = true;
                queue.push_back(v);
            }
        }
    }
    let side: BTreeSet<usize> = (0..nodes).filter(|&v| !reaches_sink[v]).collect();
    let cut = cut_capacity(net, &side);
    if !side.contains(&net.source()) || BigRational::from_integer(BigInt::from(cut)) != f.value {
        return Err(Error::Internal(format!(
            "flow of value {} is not maximum (residual cut capacity {cut})",
            f.value
        )));
    }
    Ok(side)
}

/// Total capacity of arcs leaving `source_side`.
pub fn cut_capacity(net: &FlowNetwork, source_side: &BTreeSet<usize>) -> i128 {
    net.arcs()
        .iter()
        .filter(|a| source_side.contains(&a.from) && !source_side.contains(&a.to))
        .map(|a| a.capacity as i128)
        .sum()
}

/// Exact check of `0 ≤ f(e) ≤ c(e)`, conservation at every inner node, and
/// that the stored value equals the net outflow of the source.
pub fn verify_flow(net: &FlowNetwork, f: &FlowAssignment) -> Result<bool> {
    if f.values.len() != net.arc_count() {
        return Err(Error::ArcMismatch(format!(
            "flow has {} arc values, network has {} arcs",
            f.values.len(),
            net.arc_count()
        )));
    }
    let mut balance = vec![BigRational::zero(); net.node_count()];
    for (a, v) in net.arcs().iter().zip(&f.values) {
        if v.is_negative() || *v > int(a.capacity) {
            return Ok(false);
        }
        balance[a.from] -= v;
        balance[a.to] += v;
    }
    let (s, t) = (net.source(), net.sink());
    let inner_ok = balance
        .iter()
        .enumerate()
        .all(|(v, b)| v == s || v == t || b.is_zero());
    Ok(inner_ok && -balance[s].clone() == f.value)
}
