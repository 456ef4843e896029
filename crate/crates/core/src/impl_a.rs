//! Flow-table implementation: one integral single-commodity flow per cluster
//! and child index, stored per vertex, and random-link forwarding on it.
//!
//! For cluster `S` with children `S_1..S_r` (and `S_0 = S`), flow `f_i` runs
//! in `G[S]` from a super-source joined to each `v` with capacity
//! `w_S(v) * out_i(S_i)` to a super-sink reached from each `v` with capacity
//! `out_i(v) * w_S(S)`; graph edges get `cap * w_S(S) * C`.
//!
//! # Per-vertex blob layout
//!
//! For each non-singleton cluster holding the vertex (root first) and each
//! stored flow of positive value:
//!
//! | field | width |
//! |---|---|
//! | level | `ceil_log2(h + 1)` |
//! | child index `i` | `ceil_log2(deg(T) + 1)` |
//! | amount width `B` | 7 |
//! | super-source amount | `B` |
//! | super-sink amount | `B` |
//! | entry count | `width_for(deg(v))` |
//! | per entry: port | `ceil_log2(deg(v))` |
//! | per entry: direction (1 = out) | 1 |
//! | per entry: amount | `B` |
//!
//! `B = width_for(value of f_i)`: no arc of an acyclic flow carries more than
//! its value. Entries cover the incident edges of `G[S]` with nonzero flow, in
//! port order.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{ceil_log2, width_for, BitWriter, TableBits};
use crate::decomposition::{ClusterId, DecompositionTree};
use crate::flow::{
    cancel_cycles, endpoint_distribution, max_flow_integral, Direction, FlowAssignment, FlowError,
    FlowNetwork, FlowPath, FlowSampler,
};
use crate::graph::{CapacitatedGraph, EdgeId, VertexId};
use crate::routing::{RoutingError, SchemeBackend};

const AMOUNT_WIDTH_BITS: u32 = 7;
const MAX_DOUBLINGS: u32 = 48;

/// Flow `f_i` of one cluster. Local node `p < k` is the cluster's `p`-th
/// vertex; `k` is the super-source and `k + 1` the super-sink.
#[derive(Debug, Clone)]
pub struct ClusterFlow {
    pub index: usize,
    pub value: u64,
    pub flow: FlowAssignment,
    /// Graph edge behind each network arc (`None` for terminal arcs).
    pub arc_edge: Vec<Option<EdgeId>>,
    sampler: FlowSampler,
}

impl ClusterFlow {
    /// Flow on the super-source arc into local node `p`.
    pub fn source_amount(&self, p: usize) -> u64 {
        self.flow.flow_between(self.flow.source, p)
    }

    /// Flow on the arc from local node `p` to the super-sink.
    pub fn sink_amount(&self, p: usize) -> u64 {
        self.flow.flow_between(p, self.flow.sink)
    }
}

#[derive(Debug, Clone)]
pub struct ClusterTables {
    pub cluster: ClusterId,
    pub level: usize,
    pub vertices: Vec<VertexId>,
    /// Capacity scaling factor actually used (the certified `C`, doubled on
    /// every failed saturation).
    pub scale: u64,
    pub doublings: u32,
    /// `flows[i]` is `f_i`.
    pub flows: Vec<ClusterFlow>,
}

#[derive(Debug, Clone)]
pub struct FlowTables {
    pub c: u64,
    pub height: usize,
    pub tree_degree: usize,
    /// Indexed by cluster id; `None` for singletons.
    pub clusters: Vec<Option<ClusterTables>>,
}

impl FlowTables {
    pub fn cluster(&self, id: ClusterId) -> Option<&ClusterTables> {
        self.clusters[id].as_ref()
    }

    pub fn total_doublings(&self) -> u32 {
        self.clusters.iter().flatten().map(|t| t.doublings).sum()
    }

    pub fn max_scale(&self) -> u64 {
        self.clusters
            .iter()
            .flatten()
            .map(|t| t.scale)
            .max()
            .unwrap_or(self.c)
    }
}

/// Builds every `f_i` for every non-singleton cluster. Flows that do not
/// saturate the terminals at scale `C` are rebuilt with `C` doubled for that
/// cluster; each doubling is logged.
pub fn build_flow_tables(
    g: &CapacitatedGraph,
    tree: &DecompositionTree,
    c: u64,
) -> Result<FlowTables, FlowError> {
    assert!(c >= 1, "capacity scale must be at least 1");
    let clusters = tree
        .clusters
        .par_iter()
        .map(|cl| {
            if cl.is_singleton() {
                return Ok(None);
            }
            let mut scale = c;
            for doublings in 0..=MAX_DOUBLINGS {
                if let Some(flows) = cluster_flows(g, tree, cl.id, scale)? {
                    return Ok(Some(ClusterTables {
                        cluster: cl.id,
                        level: cl.level,
                        vertices: cl.vertices.clone(),
                        scale,
                        doublings,
                        flows,
                    }));
                }
                log::warn!(
                    "cluster {}: flow does not saturate at scale {scale}; doubling",
                    cl.id
                );
                scale *= 2;
            }
            unreachable!("large enough scale always saturates a connected cluster")
        })
        .collect::<Result<Vec<_>, FlowError>>()?;
    Ok(FlowTables {
        c,
        height: tree.height,
        tree_degree: tree.degree,
        clusters,
    })
}

/// All flows of one cluster at `scale`, or `None` if one fails to saturate.
fn cluster_flows(
    g: &CapacitatedGraph,
    tree: &DecompositionTree,
    id: ClusterId,
    scale: u64,
) -> Result<Option<Vec<ClusterFlow>>, FlowError> {
    let cl = tree.cluster(id);
    let k = cl.len();
    let total_w = cl.total_weight();
    let mut local_edges = Vec::new();
    for (a, &u) in cl.vertices.iter().enumerate() {
        for &(v, e) in g.neighbors(u) {
            if u < v {
                if let Some(b) = cl.position(v) {
                    local_edges.push((a, b, e));
                }
            }
        }
    }
    let mut borders: Vec<&[u64]> = vec![&cl.border_weight];
    let child_borders: Vec<Vec<u64>> = cl
        .children
        .iter()
        .map(|&ch| {
            cl.vertices
                .iter()
                .map(|&v| tree.cluster(ch).out(v))
                .collect()
        })
        .collect();
    borders.extend(child_borders.iter().map(|b| b.as_slice()));

    let mut flows = Vec::with_capacity(borders.len());
    for (index, out) in borders.into_iter().enumerate() {
        let out_total: u64 = out.iter().sum();
        let (source, sink) = (k, k + 1);
        let mut net = FlowNetwork::new(k + 2);
        let mut arc_edge = Vec::new();
        for p in 0..k {
            net.add_arc(source, p, cl.cluster_weight[p] * out_total);
            arc_edge.push(None);
        }
        for (p, &o) in out.iter().enumerate() {
            net.add_arc(p, sink, o * total_w);
            arc_edge.push(None);
        }
        for &(a, b, e) in &local_edges {
            net.add_edge(a, b, g.edge(e).cap * total_w * scale);
            arc_edge.push(Some(e));
        }
        let target = total_w * out_total;
        let flow = if target == 0 {
            FlowAssignment {
                nodes: k + 2,
                source,
                sink,
                value: 0,
                arcs: Vec::new(),
            }
        } else {
            let f = max_flow_integral(&net, source, sink)?;
            if f.value < target {
                return Ok(None);
            }
            cancel_cycles(&f)
        };
        flows.push(ClusterFlow {
            index,
            value: flow.value,
            sampler: FlowSampler::new(&flow),
            flow,
            arc_edge,
        });
    }
    Ok(Some(flows))
}

fn walk(
    tables: &FlowTables,
    cluster: ClusterId,
    index: usize,
    start: VertexId,
    direction: Direction,
    rng: &mut ChaCha8Rng,
) -> Result<FlowPath, RoutingError> {
    let Some(t) = tables.cluster(cluster) else {
        // singleton: the only vertex is both start and end
        return Ok(FlowPath::trivial(start));
    };
    let p = t
        .vertices
        .binary_search(&start)
        .map_err(|_| RoutingError::NotInCluster { v: start, cluster })?;
    let f = t
        .flows
        .get(index)
        .ok_or(RoutingError::NoSuchChild { cluster, index })?;
    let w = f.sampler.walk(p, direction, rng)?;
    Ok(FlowPath {
        vertices: w.nodes.iter().map(|&x| t.vertices[x]).collect(),
        edges: w
            .arcs
            .iter()
            .map(|&a| f.arc_edge[f.flow.arcs[a].arc].expect("walks avoid terminal arcs"))
            .collect(),
    })
}

/// Forward random-link walk on `f_i` from `start` to the super-sink.
pub fn route_to_border(
    tables: &FlowTables,
    cluster: ClusterId,
    index: usize,
    start: VertexId,
    rng: &mut ChaCha8Rng,
) -> Result<FlowPath, RoutingError> {
    walk(tables, cluster, index, start, Direction::Forward, rng)
}

/// Backward random-link walk on `f_i` from `start` to the super-source.
pub fn route_from_border(
    tables: &FlowTables,
    cluster: ClusterId,
    index: usize,
    start: VertexId,
    rng: &mut ChaCha8Rng,
) -> Result<FlowPath, RoutingError> {
    walk(tables, cluster, index, start, Direction::Backward, rng)
}

/// Exact endpoint law of the walk on `f_i` started from `start_law` (over the
/// cluster's vertices, in order), over the cluster's vertices.
pub fn exact_endpoint_law(
    tables: &FlowTables,
    cluster: ClusterId,
    index: usize,
    start_law: &[f64],
    direction: Direction,
) -> Result<Vec<f64>, FlowError> {
    let t = tables.cluster(cluster).expect("non-singleton cluster");
    let f = &t.flows[index];
    let mut law = endpoint_distribution(&f.flow, start_law, direction)?;
    law.truncate(t.vertices.len());
    Ok(law)
}

impl SchemeBackend for FlowTables {
    fn name(&self) -> &'static str {
        "impl-a"
    }

    fn to_border(
        &self,
        cluster: ClusterId,
        index: usize,
        start: VertexId,
        rng: &mut ChaCha8Rng,
    ) -> Result<FlowPath, RoutingError> {
        route_to_border(self, cluster, index, start, rng)
    }

    fn from_border(
        &self,
        cluster: ClusterId,
        index: usize,
        start: VertexId,
        rng: &mut ChaCha8Rng,
    ) -> Result<FlowPath, RoutingError> {
        route_from_border(self, cluster, index, start, rng)
    }
}

/// Child positions (0-based) from the root to the vertex's leaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexLabel {
    pub path: Vec<usize>,
}

/// Bits per tree level in a label.
pub fn label_field_width(tree: &DecompositionTree) -> u32 {
    ceil_log2(tree.degree.max(2) as u64)
}

impl VertexLabel {
    pub fn encode(&self, out: &mut BitWriter, field: u32) {
        for &c in &self.path {
            out.push(c as u64, field);
        }
    }

    pub fn bit_len(&self, field: u32) -> usize {
        self.path.len() * field as usize
    }
}

pub fn assign_labels(tree: &DecompositionTree) -> Vec<VertexLabel> {
    (0..tree.vertex_count())
        .map(|v| VertexLabel {
            path: tree.chain(v)[1..]
                .iter()
                .map(|&c| tree.child_index(c) - 1)
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Lower,
    Upper,
}

/// Where on the tree path a packet currently is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marker {
    pub level: usize,
    pub phase: Phase,
    pub ascending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingHeader {
    pub source: VertexLabel,
    pub target: VertexLabel,
    pub marker: Marker,
}

impl RoutingHeader {
    /// Header of a fresh packet at the source leaf.
    pub fn new(labels: &[VertexLabel], tree: &DecompositionTree, s: VertexId, t: VertexId) -> Self {
        RoutingHeader {
            source: labels[s].clone(),
            target: labels[t].clone(),
            marker: Marker {
                level: tree.height,
                phase: Phase::Lower,
                ascending: true,
            },
        }
    }

    pub fn encode(&self, tree: &DecompositionTree) -> BitWriter {
        let field = label_field_width(tree);
        let mut out = BitWriter::new();
        self.source.encode(&mut out, field);
        self.target.encode(&mut out, field);
        out.push(self.marker.level as u64, ceil_log2(tree.height as u64 + 1));
        out.push((self.marker.phase == Phase::Upper) as u64, 1);
        out.push(self.marker.ascending as u64, 1);
        out
    }
}

pub fn vertex_blob(g: &CapacitatedGraph, tables: &FlowTables, v: VertexId) -> BitWriter {
    let mut out = BitWriter::new();
    let deg = g.degree(v) as u64;
    let level_width = ceil_log2(tables.height as u64 + 1);
    let index_width = ceil_log2(tables.tree_degree as u64 + 1);
    let mut mine: Vec<(usize, &ClusterTables)> = Vec::new();
    for t in tables.clusters.iter().flatten() {
        if let Ok(p) = t.vertices.binary_search(&v) {
            mine.push((p, t));
        }
    }
    mine.sort_by_key(|(_, t)| t.level);
    for (p, t) in mine {
        for f in &t.flows {
            if f.value == 0 {
                continue;
            }
            let b = width_for(f.value);
            out.push(t.level as u64, level_width);
            out.push(f.index as u64, index_width);
            out.push(b as u64, AMOUNT_WIDTH_BITS);
            out.push(f.source_amount(p), b);
            out.push(f.sink_amount(p), b);
            let mut entries: Vec<(usize, bool, u64)> = f
                .flow
                .arcs
                .iter()
                .filter_map(|a| {
                    let e = f.arc_edge[a.arc]?;
                    let port = g.port(v, e)?;
                    if a.from == p {
                        Some((port, true, a.flow))
                    } else if a.to == p {
                        Some((port, false, a.flow))
                    } else {
                        None
                    }
                })
                .collect();
            entries.sort_unstable();
            out.push(entries.len() as u64, width_for(deg));
            for (port, outgoing, amount) in entries {
                out.push(port as u64, ceil_log2(deg));
                out.push(outgoing as u64, 1);
                out.push(amount, b);
            }
        }
    }
    out
}

pub fn measure_table_bits_a(g: &CapacitatedGraph, tables: &FlowTables) -> TableBits {
    let per_vertex: Vec<usize> = (0..g.vertex_count())
        .map(|v| vertex_blob(g, tables, v).bit_len())
        .collect();
    TableBits::new(per_vertex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{build_tree, certify_congestion, Cluster};
    use crate::graph::{generate_graph, parse_graph, GraphKind};
    use rand::SeedableRng;

    fn single_edge() -> (CapacitatedGraph, DecompositionTree, FlowTables) {
        let g = parse_graph("2 1\n0 1 1").unwrap();
        let t = build_tree(&g, 2, 0);
        let tables = build_flow_tables(&g, &t, 1).unwrap();
        (g, t, tables)
    }

    fn grid(r: usize) -> CapacitatedGraph {
        generate_graph(
            &GraphKind::Grid {
                rows: r,
                cols: r,
                cap_range: None,
            },
            0,
        )
        .unwrap()
    }

    #[test]
    fn single_edge_augmented_network() {
        let (_, t, tables) = single_edge();
        let root = tables.cluster(t.root).unwrap();
        assert_eq!(root.flows.len(), 3);
        assert_eq!(root.flows[0].value, 0);
        // child holding vertex 0
        let i = t.child_index(t.leaf_of[0]);
        let f = &root.flows[i];
        assert_eq!(f.value, 2);
        assert_eq!((f.source_amount(0), f.source_amount(1)), (1, 1));
        assert_eq!((f.sink_amount(0), f.sink_amount(1)), (2, 0));
        assert_eq!(f.flow.flow_between(1, 0), 1);
        for leaf in t.leaf_of.iter() {
            assert!(tables.cluster(*leaf).is_none());
        }
    }

    #[test]
    fn single_edge_blob_bits_by_hand() {
        let (g, _, tables) = single_edge();
        // per table: level 1 + index 2 + width field 7 + source 2 + sink 2
        // + count 1 + one entry (port 0 + direction 1 + amount 2) = 18;
        // two tables with positive value
        let bits = measure_table_bits_a(&g, &tables);
        assert_eq!(bits.per_vertex, vec![36, 36]);
        assert_eq!(bits.max, 36);
        let empty = FlowTables {
            c: 1,
            height: 0,
            tree_degree: 0,
            clusters: vec![None],
        };
        let one = CapacitatedGraph::new(1, []).unwrap();
        assert_eq!(measure_table_bits_a(&one, &empty).max, 0);
    }

    #[test]
    fn root_flow_of_cycle_is_empty() {
        let g = parse_graph("4 4\n0 1 1\n1 2 1\n2 3 1\n3 0 1").unwrap();
        let t = build_tree(&g, 2, 0);
        let tables = build_flow_tables(&g, &t, 1).unwrap();
        let f0 = &tables.cluster(t.root).unwrap().flows[0];
        assert_eq!(f0.value, 0);
        assert!(f0.flow.arcs.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            route_from_border(&tables, t.root, 0, 0, &mut rng),
            Err(RoutingError::Flow(FlowError::NoFlowAt { .. }))
        ));
    }

    #[test]
    fn unique_paths_are_deterministic() {
        let (_, t, tables) = single_edge();
        let i = t.child_index(t.leaf_of[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = route_to_border(&tables, t.root, i, 1, &mut rng).unwrap();
            assert_eq!(p.vertices, vec![1, 0]);
            let q = route_to_border(&tables, t.root, i, 0, &mut rng).unwrap();
            assert_eq!(q.vertices, vec![0]);
        }
        // the mirror: from the border vertex back to the source side
        let mut ends = [0usize; 2];
        for _ in 0..2000 {
            ends[route_from_border(&tables, t.root, i, 0, &mut rng)
                .unwrap()
                .end()] += 1;
        }
        assert!(ends[0] > 800 && ends[1] > 800, "{ends:?}");
    }

    #[test]
    fn grid_flows_saturate_and_laws_are_exact() {
        let g = grid(4);
        let t = build_tree(&g, 2, 5);
        let cert = certify_congestion(&g, &t).unwrap();
        let tables = build_flow_tables(&g, &t, cert.integral()).unwrap();
        for cl in t.clusters.iter().filter(|c| !c.is_singleton()) {
            let ct = tables.cluster(cl.id).unwrap();
            let w_total = cl.total_weight();
            let w_law: Vec<f64> = cl
                .cluster_weight
                .iter()
                .map(|&w| w as f64 / w_total as f64)
                .collect();
            for f in &ct.flows {
                let border: Vec<u64> = if f.index == 0 {
                    cl.border_weight.clone()
                } else {
                    let ch = t.cluster(cl.children[f.index - 1]);
                    cl.vertices.iter().map(|&v| ch.out(v)).collect()
                };
                let o: u64 = border.iter().sum();
                assert_eq!(f.value, w_total * o);
                assert!(f.flow.is_conserving());
                assert!(f.flow.is_acyclic());
                if o == 0 {
                    continue;
                }
                let out_law: Vec<f64> = border.iter().map(|&b| b as f64 / o as f64).collect();
                let fwd = exact_endpoint_law(&tables, cl.id, f.index, &w_law, Direction::Forward)
                    .unwrap();
                let bwd =
                    exact_endpoint_law(&tables, cl.id, f.index, &out_law, Direction::Backward)
                        .unwrap();
                for p in 0..cl.len() {
                    assert!((fwd[p] - out_law[p]).abs() < 1e-9);
                    assert!((bwd[p] - w_law[p]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn sampled_border_law_on_cycle_child() {
        let g = parse_graph("4 4\n0 1 1\n1 2 1\n2 3 1\n3 0 1").unwrap();
        let t = build_tree(&g, 2, 0);
        let tables = build_flow_tables(&g, &t, 1).unwrap();
        let child = t.cluster(t.cluster(t.root).children[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pick = crate::routing::WeightedPick::new(&child.vertices, &child.cluster_weight);
        let n = 100_000;
        let mut hits = vec![0usize; child.len()];
        for _ in 0..n {
            let v = pick.sample(&mut rng).unwrap();
            let end = route_to_border(&tables, child.id, 0, v, &mut rng)
                .unwrap()
                .end();
            hits[child.position(end).unwrap()] += 1;
        }
        let o = child.total_border() as f64;
        let tv: f64 = hits
            .iter()
            .zip(&child.border_weight)
            .map(|(&h, &b)| (h as f64 / n as f64 - b as f64 / o).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "tv {tv}");
    }

    fn hand_tree(shape: &[(usize, Vec<usize>)], n: usize) -> DecompositionTree {
        // shape[i] = (level, children) for cluster i; leaves are listed in
        // vertex order
        let mut clusters: Vec<Cluster> = shape
            .iter()
            .enumerate()
            .map(|(id, (level, children))| Cluster {
                id,
                level: *level,
                vertices: Vec::new(),
                parent: None,
                children: children.clone(),
                cluster_weight: Vec::new(),
                border_weight: Vec::new(),
            })
            .collect();
        for id in 0..clusters.len() {
            for c in clusters[id].children.clone() {
                clusters[c].parent = Some(id);
            }
        }
        let leaves: Vec<usize> = (0..clusters.len())
            .filter(|&c| clusters[c].children.is_empty())
            .collect();
        assert_eq!(leaves.len(), n);
        for (v, &leaf) in leaves.iter().enumerate() {
            let mut c = Some(leaf);
            while let Some(x) = c {
                clusters[x].vertices.push(v);
                c = clusters[x].parent;
            }
        }
        let height = clusters.iter().map(|c| c.level).max().unwrap();
        let degree = clusters.iter().map(|c| c.children.len()).max().unwrap();
        DecompositionTree {
            clusters,
            root: 0,
            height,
            degree,
            leaf_of: leaves,
        }
    }

    #[test]
    fn labels_follow_child_numbering() {
        // binary tree of depth 2
        let t = hand_tree(
            &[
                (0, vec![1, 2]),
                (1, vec![3, 4]),
                (1, vec![5, 6]),
                (2, vec![]),
                (2, vec![]),
                (2, vec![]),
                (2, vec![]),
            ],
            4,
        );
        let labels = assign_labels(&t);
        assert_eq!(labels[0].path, vec![0, 0]);
        assert_eq!(labels[0].bit_len(label_field_width(&t)), 2);

        // degree 3, height 2: the middle child's last leaf
        let mut shape = vec![(0, vec![1, 2, 3])];
        let mut next = 4;
        for _ in 0..3 {
            shape.push((1, vec![next, next + 1, next + 2]));
            next += 3;
        }
        shape.extend((0..9).map(|_| (2, vec![])));
        let t = hand_tree(&shape, 9);
        let labels = assign_labels(&t);
        assert_eq!(labels[5].path, vec![1, 2]);
        assert_eq!(labels[5].bit_len(label_field_width(&t)), 4);
        let unique: std::collections::BTreeSet<_> = labels.iter().map(|l| l.path.clone()).collect();
        assert_eq!(unique.len(), 9);
    }

    #[test]
    fn label_prefixes_identify_ancestors() {
        let g = grid(4);
        let t = build_tree(&g, 3, 2);
        let labels = assign_labels(&t);
        for (v, label) in labels.iter().enumerate() {
            assert_eq!(label.path.len(), t.height);
            let mut c = t.root;
            for level in 0..=t.height {
                assert_eq!(c, t.ancestor(v, level));
                if level < t.height {
                    c = t.cluster(c).children[label.path[level]];
                }
            }
        }
    }

    #[test]
    fn header_layout() {
        let g = grid(4);
        let t = build_tree(&g, 2, 0);
        let labels = assign_labels(&t);
        let h = RoutingHeader::new(&labels, &t, 0, 15);
        let field = label_field_width(&t) as usize;
        assert_eq!(
            h.encode(&t).bit_len(),
            2 * t.height * field + ceil_log2(t.height as u64 + 1) as usize + 2
        );
    }
}
