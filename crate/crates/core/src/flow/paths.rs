use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cmcf::CmcfSolution;
use super::FlowError;
use crate::graph::{CapacitatedGraph, EdgeId, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub flow: u64,
    /// Arc id in the originating [`super::FlowNetwork`].
    pub arc: usize,
}

/// Integral single-commodity flow. Only arcs with positive flow are listed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowAssignment {
    pub nodes: usize,
    pub source: usize,
    pub sink: usize,
    pub value: u64,
    pub arcs: Vec<FlowArc>,
}

impl FlowAssignment {
    /// Net outflow minus inflow per node.
    pub fn excess(&self) -> Vec<i128> {
        let mut ex = vec![0i128; self.nodes];
        for a in &self.arcs {
            ex[a.from] += a.flow as i128;
            ex[a.to] -= a.flow as i128;
        }
        ex
    }

    /// Exact conservation at non-terminals and `value` leaving the source.
    pub fn is_conserving(&self) -> bool {
        let ex = self.excess();
        ex.iter().enumerate().all(|(v, &e)| {
            if v == self.source {
                e == self.value as i128
            } else if v == self.sink {
                e == -(self.value as i128)
            } else {
                e == 0
            }
        })
    }

    pub fn out_flow(&self, node: usize) -> u64 {
        self.arcs
            .iter()
            .filter(|a| a.from == node)
            .map(|a| a.flow)
            .sum()
    }

    pub fn in_flow(&self, node: usize) -> u64 {
        self.arcs
            .iter()
            .filter(|a| a.to == node)
            .map(|a| a.flow)
            .sum()
    }

    /// Flow on the arc `from -> to` (summed over parallel arcs).
    pub fn flow_between(&self, from: usize, to: usize) -> u64 {
        self.arcs
            .iter()
            .filter(|a| a.from == from && a.to == to)
            .map(|a| a.flow)
            .sum()
    }

    pub fn is_acyclic(&self) -> bool {
        find_cycle(self).is_none()
    }
}

/// Returns indices into `f.arcs` forming a directed cycle of positive flow.
fn find_cycle(f: &FlowAssignment) -> Option<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); f.nodes];
    for (i, a) in f.arcs.iter().enumerate() {
        if a.flow > 0 {
            out[a.from].push(i);
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; f.nodes];
    let mut parent_arc = vec![usize::MAX; f.nodes];
    for root in 0..f.nodes {
        if color[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        color[root] = 1;
        while let Some(&mut (x, ref mut next)) = stack.last_mut() {
            if *next < out[x].len() {
                let ai = out[x][*next];
                *next += 1;
                let y = f.arcs[ai].to;
                match color[y] {
                    0 => {
                        color[y] = 1;
                        parent_arc[y] = ai;
                        stack.push((y, 0));
                    }
                    1 => {
                        let mut cycle = vec![ai];
                        let mut z = x;
                        while z != y {
                            let pa = parent_arc[z];
                            cycle.push(pa);
                            z = f.arcs[pa].from;
                        }
                        cycle.reverse();
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                color[x] = 2;
                stack.pop();
            }
        }
    }
    None
}

/// Removes every directed cycle of positive flow (antiparallel pairs first).
/// Value and terminals are unchanged and no arc gains flow.
pub fn cancel_cycles(f: &FlowAssignment) -> FlowAssignment {
    let mut out = f.clone();
    let mut by_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for i in 0..out.arcs.len() {
        let (a, b) = (out.arcs[i].from, out.arcs[i].to);
        if let Some(&j) = by_pair.get(&(b, a)) {
            let m = out.arcs[i].flow.min(out.arcs[j].flow);
            out.arcs[i].flow -= m;
            out.arcs[j].flow -= m;
        }
        by_pair.entry((a, b)).or_insert(i);
    }
    out.arcs.retain(|a| a.flow > 0);
    while let Some(cycle) = find_cycle(&out) {
        let m = cycle.iter().map(|&i| out.arcs[i].flow).min().unwrap_or(0);
        for &i in &cycle {
            out.arcs[i].flow -= m;
        }
        out.arcs.retain(|a| a.flow > 0);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Follow outgoing arcs until the sink.
    Forward,
    /// Follow incoming arcs until the source.
    Backward,
}

/// A walk produced by [`FlowSampler`]: visited nodes in travel order
/// (terminals excluded) and the indices of the non-terminal arcs traversed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledWalk {
    pub nodes: Vec<usize>,
    pub arcs: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
struct Choices {
    /// (arc index, neighbor node, cumulative flow)
    entries: Vec<(usize, usize, u64)>,
}

impl Choices {
    fn total(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.2)
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let r = rng.gen_range(0..self.total());
        let k = self.entries.partition_point(|e| e.2 <= r);
        (self.entries[k].0, self.entries[k].1)
    }
}

/// Precomputed per-node link choices for repeated random walks on one flow.
#[derive(Debug, Clone)]
pub struct FlowSampler {
    source: usize,
    sink: usize,
    out: Vec<Choices>,
    inc: Vec<Choices>,
    max_steps: usize,
}

impl FlowSampler {
    pub fn new(f: &FlowAssignment) -> Self {
        let mut out = vec![Choices::default(); f.nodes];
        let mut inc = vec![Choices::default(); f.nodes];
        for (i, a) in f.arcs.iter().enumerate() {
            if a.flow == 0 {
                continue;
            }
            let c = out[a.from].total() + a.flow;
            out[a.from].entries.push((i, a.to, c));
            let c = inc[a.to].total() + a.flow;
            inc[a.to].entries.push((i, a.from, c));
        }
        FlowSampler {
            source: f.source,
            sink: f.sink,
            out,
            inc,
            max_steps: f.nodes.max(1) * (f.arcs.len() + 1) * 4,
        }
    }

    /// Total flow leaving (forward) or entering (backward) `node`.
    pub fn throughput(&self, node: usize, direction: Direction) -> u64 {
        match direction {
            Direction::Forward => self.out[node].total(),
            Direction::Backward => self.inc[node].total(),
        }
    }

    /// Random-link walk: each link is taken with probability proportional to
    /// its flow until the link reaches the super-terminal.
    pub fn walk<R: Rng + ?Sized>(
        &self,
        start: usize,
        direction: Direction,
        rng: &mut R,
    ) -> Result<SampledWalk, FlowError> {
        let (table, terminal) = match direction {
            Direction::Forward => (&self.out, self.sink),
            Direction::Backward => (&self.inc, self.source),
        };
        if table[start].total() == 0 {
            return Err(FlowError::NoFlowAt {
                node: start,
                direction,
            });
        }
        let mut walk = SampledWalk {
            nodes: vec![start],
            arcs: Vec::new(),
        };
        let mut x = start;
        for _ in 0..self.max_steps {
            let (arc, y) = table[x].pick(rng);
            if y == terminal {
                return Ok(walk);
            }
            walk.nodes.push(y);
            walk.arcs.push(arc);
            x = y;
        }
        Err(FlowError::WalkDidNotTerminate(start))
    }
}

pub fn sample_path<R: Rng + ?Sized>(
    f: &FlowAssignment,
    start: usize,
    direction: Direction,
    rng: &mut R,
) -> Result<SampledWalk, FlowError> {
    FlowSampler::new(f).walk(start, direction, rng)
}

/// Exact law of the node at which the random-link walk exits to the
/// super-terminal, given a start law over nodes. Propagates probability mass
/// along a topological order of the (acyclic) flow.
pub fn endpoint_distribution(
    f: &FlowAssignment,
    start: &[f64],
    direction: Direction,
) -> Result<Vec<f64>, FlowError> {
    let (terminal, origin) = match direction {
        Direction::Forward => (f.sink, f.source),
        Direction::Backward => (f.source, f.sink),
    };
    // orient arcs in the walking direction
    let oriented: Vec<(usize, usize, u64)> = f
        .arcs
        .iter()
        .filter(|a| a.flow > 0)
        .map(|a| match direction {
            Direction::Forward => (a.from, a.to, a.flow),
            Direction::Backward => (a.to, a.from, a.flow),
        })
        .collect();
    let mut through = vec![0u64; f.nodes];
    let mut indeg = vec![0usize; f.nodes];
    let mut succ: Vec<Vec<(usize, u64)>> = vec![Vec::new(); f.nodes];
    for &(x, y, w) in &oriented {
        through[x] += w;
        succ[x].push((y, w));
        indeg[y] += 1;
    }
    let mut order = Vec::with_capacity(f.nodes);
    let mut ready: Vec<usize> = (0..f.nodes).filter(|&v| indeg[v] == 0).collect();
    while let Some(x) = ready.pop() {
        order.push(x);
        for &(y, _) in &succ[x] {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                ready.push(y);
            }
        }
    }
    if order.len() != f.nodes {
        return Err(FlowError::WalkDidNotTerminate(origin));
    }
    let mut mass = start.to_vec();
    mass.resize(f.nodes, 0.0);
    let mut exit = vec![0.0; f.nodes];
    for &x in &order {
        if x == terminal || x == origin || mass[x] == 0.0 {
            continue;
        }
        if through[x] == 0 {
            return Err(FlowError::NoFlowAt { node: x, direction });
        }
        for &(y, w) in &succ[x] {
            let p = mass[x] * w as f64 / through[x] as f64;
            if y == terminal {
                exit[x] += p;
            } else {
                mass[y] += p;
            }
        }
    }
    Ok(exit)
}

/// A path in the graph: `vertices[k]` and `vertices[k+1]` are joined by
/// `edges[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowPath {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

impl FlowPath {
    pub fn trivial(v: VertexId) -> Self {
        FlowPath {
            vertices: vec![v],
            edges: Vec::new(),
        }
    }

    pub fn reversed(&self) -> FlowPath {
        let mut p = self.clone();
        p.vertices.reverse();
        p.edges.reverse();
        p
    }

    pub fn start(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn end(&self) -> VertexId {
        *self.vertices.last().expect("paths are non-empty")
    }
}

/// Weighted set of paths for one ordered pair; weights sum to the pair's
/// routed amount.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDistribution {
    pub paths: Vec<FlowPath>,
    pub weights: Vec<f64>,
}

impl PathDistribution {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &FlowPath {
        let total = self.total();
        let mut r = rng.gen::<f64>() * total;
        for (p, &w) in self.paths.iter().zip(&self.weights) {
            if r < w {
                return p;
            }
            r -= w;
        }
        self.paths.last().expect("non-empty distribution")
    }

    /// Fractional flow per edge, with the total normalized to `scale`.
    pub fn edge_flow(&self, edge_count: usize, scale: f64) -> Vec<f64> {
        let total = self.total();
        let mut f = vec![0.0; edge_count];
        for (p, &w) in self.paths.iter().zip(&self.weights) {
            for &e in &p.edges {
                f[e] += w / total * scale;
            }
        }
        f
    }
}

/// Per ordered pair path decomposition of a CMCF solution.
pub type PairPaths = BTreeMap<(VertexId, VertexId), PathDistribution>;

#[derive(PartialEq)]
struct Widest(f64, usize);

impl Eq for Widest {}

impl PartialOrd for Widest {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Widest {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Decomposes each source-aggregated flow into flow-paths by repeatedly
/// extracting a widest path to a sink with remaining demand. Paths ending at
/// `t` form the `(source, t)` commodity.
pub fn decompose_solution(g: &CapacitatedGraph, sol: &CmcfSolution) -> PairPaths {
    let mut table = PairPaths::new();
    let local: BTreeMap<VertexId, usize> = sol
        .vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let k = sol.vertices.len();
    for com in &sol.commodities {
        let total: f64 = com.sinks.iter().map(|s| s.1).sum();
        let eps = 1e-12 * total.max(1.0);
        // directed residual arcs: (from, to, edge, flow)
        let mut arcs: Vec<(usize, usize, EdgeId, f64)> = Vec::new();
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (j, &e) in sol.edges.iter().enumerate() {
            let edge = g.edge(e);
            let (lu, lv) = (local[&edge.u], local[&edge.v]);
            let net = com.forward[j] - com.backward[j];
            let (a, b, f) = if net >= 0.0 {
                (lu, lv, net)
            } else {
                (lv, lu, -net)
            };
            if f > eps {
                out[a].push(arcs.len());
                arcs.push((a, b, e, f));
            }
        }
        let mut remaining = vec![0.0; k];
        for &(t, d) in &com.sinks {
            remaining[local[&t]] += d;
        }
        let s = local[&com.source];
        loop {
            if remaining.iter().all(|&r| r <= eps) {
                break;
            }
            // widest path tree from s
            let mut width = vec![f64::NEG_INFINITY; k];
            let mut pred = vec![usize::MAX; k];
            width[s] = f64::INFINITY;
            let mut heap = BinaryHeap::from([Widest(f64::INFINITY, s)]);
            while let Some(Widest(w, x)) = heap.pop() {
                if w < width[x] {
                    continue;
                }
                for &ai in &out[x] {
                    let (_, y, _, f) = arcs[ai];
                    let nw = w.min(f);
                    if f > eps && nw > width[y] {
                        width[y] = nw;
                        pred[y] = ai;
                        heap.push(Widest(nw, y));
                    }
                }
            }
            let best = (0..k)
                .filter(|&t| t != s && remaining[t] > eps && width[t] > eps)
                .map(|t| (width[t].min(remaining[t]), t))
                .max_by(|a, b| a.0.total_cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
            let Some((amount, t)) = best else { break };
            let mut vs = vec![t];
            let mut es = Vec::new();
            let mut z = t;
            while z != s {
                let ai = pred[z];
                arcs[ai].3 -= amount;
                es.push(arcs[ai].2);
                z = arcs[ai].0;
                vs.push(z);
            }
            vs.reverse();
            es.reverse();
            remaining[t] -= amount;
            let path = FlowPath {
                vertices: vs.into_iter().map(|l| sol.vertices[l]).collect(),
                edges: es,
            };
            let entry = table
                .entry((com.source, sol.vertices[t]))
                .or_insert_with(|| PathDistribution {
                    paths: Vec::new(),
                    weights: Vec::new(),
                });
            entry.paths.push(path);
            entry.weights.push(amount);
        }
    }
    table
}
