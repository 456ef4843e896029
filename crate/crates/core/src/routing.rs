//! Hierarchical path selection over a pluggable backend, and Monte-Carlo
//! estimation of expected edge loads.
//!
//! A path from `s` to `t` climbs the tree from the leaf of `s` to the lowest
//! common ancestor and descends to the leaf of `t`. Every tree edge between a
//! parent `P` and its `i`-th child `C` is crossed by two hops meeting at an
//! intermediate vertex drawn from the border distribution of `C`:
//!
//! * upwards: `to_border(C, 0)` then `from_border(P, i)`;
//! * downwards: `to_border(P, i)` then `from_border(C, 0)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::{ClusterId, CongestionCertificate, DecompositionTree};
use crate::flow::{decompose_solution, FlowError, FlowPath, PairPaths};
use crate::graph::{CapacitatedGraph, DemandMatrix, EdgeId, VertexId};

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("vertex {v} is not in cluster {cluster}")]
    NotInCluster { v: VertexId, cluster: ClusterId },
    #[error("cluster {cluster} has no child {index}")]
    NoSuchChild { cluster: ClusterId, index: usize },
    #[error("cluster {cluster} has no flow between {s} and {t}")]
    MissingPairFlow {
        cluster: ClusterId,
        s: VertexId,
        t: VertexId,
    },
    #[error("vertex {v} has no hypercube node in cluster {cluster}")]
    Unmapped { v: VertexId, cluster: ClusterId },
    #[error("demand endpoint {0} is out of range")]
    DemandOutOfRange(VertexId),
    #[error("backend produced an invalid path from {s} to {t}")]
    InvalidPath { s: VertexId, t: VertexId },
    #[error("sample count must be at least 1")]
    NoSamples,
}

/// One implementation of the two basic routing hops inside a cluster.
/// `index` 0 denotes the cluster itself, `index >= 1` its child at that
/// 1-based position.
pub trait SchemeBackend: Sync {
    fn name(&self) -> &'static str;

    /// From `start` (a cluster-distribution sample of `cluster`) to a vertex
    /// drawn from the border distribution of the indexed cluster.
    fn to_border(
        &self,
        cluster: ClusterId,
        index: usize,
        start: VertexId,
        rng: &mut ChaCha8Rng,
    ) -> Result<FlowPath, RoutingError>;

    /// From `start` (a border-distribution sample of the indexed cluster) to
    /// a vertex drawn from the cluster distribution of `cluster`.
    fn from_border(
        &self,
        cluster: ClusterId,
        index: usize,
        start: VertexId,
        rng: &mut ChaCha8Rng,
    ) -> Result<FlowPath, RoutingError>;
}

/// Cumulative integer weights for sampling.
#[derive(Debug, Clone, Default)]
pub(crate) struct WeightedPick {
    items: Vec<VertexId>,
    cumulative: Vec<u64>,
}

impl WeightedPick {
    pub(crate) fn new(items: &[VertexId], weights: &[u64]) -> Self {
        let mut acc = 0;
        let mut pick = WeightedPick::default();
        for (&v, &w) in items.iter().zip(weights) {
            if w > 0 {
                acc += w;
                pick.items.push(v);
                pick.cumulative.push(acc);
            }
        }
        pick
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<VertexId> {
        let total = *self.cumulative.last()?;
        let r = rng.gen_range(0..total);
        Some(self.items[self.cumulative.partition_point(|&c| c <= r)])
    }
}

/// Samples every hop from the decomposed per-cluster CMCF solutions.
#[derive(Debug, Clone)]
pub struct ReferenceBackend {
    /// Per cluster: cluster-weight sampler, border-weight sampler, pair paths.
    cluster_pick: Vec<WeightedPick>,
    border_pick: Vec<WeightedPick>,
    children: Vec<Vec<ClusterId>>,
    pairs: Vec<Option<PairPaths>>,
}

impl ReferenceBackend {
    pub fn new(
        g: &CapacitatedGraph,
        tree: &DecompositionTree,
        cert: &CongestionCertificate,
    ) -> Self {
        ReferenceBackend {
            cluster_pick: tree
                .clusters
                .iter()
                .map(|c| WeightedPick::new(&c.vertices, &c.cluster_weight))
                .collect(),
            border_pick: tree
                .clusters
                .iter()
                .map(|c| WeightedPick::new(&c.vertices, &c.border_weight))
                .collect(),
            children: tree.clusters.iter().map(|c| c.children.clone()).collect(),
            pairs: cert
                .solutions
                .par_iter()
                .map(|s| s.as_ref().map(|s| decompose_solution(g, s)))
                .collect(),
        }
    }

    /// A vertex of `cluster` with probability `w_S(v) / w_S(S)`.
    pub fn sample_cluster_vertex(
        &self,
        cluster: ClusterId,
        rng: &mut ChaCha8Rng,
    ) -> Option<VertexId> {
        self.cluster_pick[cluster].sample(rng)
    }

    fn pair_path(
        &self,
        cluster: ClusterId,
        s: VertexId,
        t: VertexId,
        rng: &mut ChaCha8Rng,
    ) -> Result<FlowPath, RoutingError> {
        if s == t {
            return Ok(FlowPath::trivial(s));
        }
        let dist = self.pairs[cluster]
            .as_ref()
            .and_then(|p| p.get(&(s, t)))
            .ok_or(RoutingError::MissingPairFlow { cluster, s, t })?;
        Ok(dist.sample(rng).clone())
    }

    fn indexed(&self, cluster: ClusterId, index: usize) -> Result<ClusterId, RoutingError> {
        if index == 0 {
            Ok(cluster)
        } else {
            self.children[cluster]
                .get(index - 1)
                .copied()
                .ok_or(RoutingError::NoSuchChild { cluster, index })
        }
    }
}

impl SchemeBackend for ReferenceBackend {
    fn name(&self) -> &'static str {
        "reference"
    }

    fn to_border(
        &self,
        cluster: ClusterId,
        index: usize,
        start: VertexId,
        rng: &mut ChaCha8Rng,
    ) -> Result<FlowPath, RoutingError> {
        let target = self.indexed(cluster, index)?;
        let alpha = self.border_pick[target]
            .sample(rng)
            .ok_or(RoutingError::NoSuchChild { cluster, index })?;
        self.pair_path(cluster, start, alpha, rng)
    }

    fn from_border(
        &self,
        cluster: ClusterId,
        _index: usize,
        start: VertexId,
        rng: &mut ChaCha8Rng,
    ) -> Result<FlowPath, RoutingError> {
        let v = self.cluster_pick[cluster]
            .sample(rng)
            .ok_or(RoutingError::NotInCluster { v: start, cluster })?;
        self.pair_path(cluster, start, v, rng)
    }
}

fn append(path: &mut FlowPath, hop: FlowPath) -> Result<(), RoutingError> {
    if hop.start() != path.end() {
        return Err(RoutingError::InvalidPath {
            s: path.start(),
            t: hop.start(),
        });
    }
    path.vertices.extend_from_slice(&hop.vertices[1..]);
    path.edges.extend(hop.edges);
    Ok(())
}

/// Number of hops `select_path` performs between `s` and `t`: two per tree
/// edge on the leaf-to-leaf tree path.
pub fn tree_hops(tree: &DecompositionTree, s: VertexId, t: VertexId) -> usize {
    4 * (tree.height - tree.cluster(tree.lca(s, t)).level)
}

/// One random `s`-`t` path. `s == t` yields the empty path at `s`.
pub fn select_path<B: SchemeBackend + ?Sized>(
    tree: &DecompositionTree,
    backend: &B,
    s: VertexId,
    t: VertexId,
    rng: &mut ChaCha8Rng,
) -> Result<FlowPath, RoutingError> {
    let mut path = FlowPath::trivial(s);
    if s == t {
        return Ok(path);
    }
    let (up, down) = (tree.chain(s), tree.chain(t));
    let shared = up.iter().zip(&down).take_while(|(a, b)| a == b).count();
    for level in (shared..up.len()).rev() {
        let (child, parent) = (up[level], up[level - 1]);
        let i = tree.child_index(child);
        let hop = backend.to_border(child, 0, path.end(), rng)?;
        append(&mut path, hop)?;
        let hop = backend.from_border(parent, i, path.end(), rng)?;
        append(&mut path, hop)?;
    }
    for level in shared..down.len() {
        let (parent, child) = (down[level - 1], down[level]);
        let i = tree.child_index(child);
        let hop = backend.to_border(parent, i, path.end(), rng)?;
        append(&mut path, hop)?;
        let hop = backend.from_border(child, 0, path.end(), rng)?;
        append(&mut path, hop)?;
    }
    if path.end() != t {
        return Err(RoutingError::InvalidPath { s, t });
    }
    Ok(path)
}

/// Whether `path` is a contiguous walk in `g` from `s` to `t`.
pub fn is_valid_path(g: &CapacitatedGraph, path: &FlowPath, s: VertexId, t: VertexId) -> bool {
    path.vertices.first() == Some(&s)
        && path.vertices.last() == Some(&t)
        && path.edges.len() + 1 == path.vertices.len()
        && path.edges.iter().enumerate().all(|(k, &e)| {
            e < g.edge_count() && {
                let edge = g.edge(e);
                let (a, b) = (path.vertices[k], path.vertices[k + 1]);
                (edge.u == a && edge.v == b) || (edge.u == b && edge.v == a)
            }
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeLoad {
    pub edge: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub cap: u64,
    pub load: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub scheme: String,
    pub edges: Vec<EdgeLoad>,
    pub congestion: f64,
    pub c_opt: Option<f64>,
    pub competitive_ratio: Option<f64>,
    pub max_table_bits: Option<usize>,
    pub label_bits: Option<usize>,
    pub header_bits: Option<usize>,
    pub samples: usize,
    pub seed: u64,
}

impl LoadReport {
    pub fn loads(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.load).collect()
    }

    pub fn max_load(&self) -> f64 {
        self.edges.iter().map(|e| e.load).fold(0.0, f64::max)
    }
}

/// `max_e load(e) / cap(e)`.
pub fn congestion(report: &LoadReport) -> f64 {
    report
        .edges
        .iter()
        .map(|e| e.load / e.cap as f64)
        .fold(0.0, f64::max)
}

/// Per-pair random stream: the master seed keys the generator, the pair's
/// position in the demand matrix selects the stream.
pub fn pair_rng(seed: u64, pair: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pair as u64);
    rng
}

/// Estimates the expected load of every edge when each pair `(s, t)` routes
/// `d_st` along a path drawn by [`select_path`], averaging `samples`
/// independent draws per pair. Every drawn path is checked for validity.
pub fn route_demands<B: SchemeBackend + ?Sized>(
    g: &CapacitatedGraph,
    tree: &DecompositionTree,
    backend: &B,
    demands: &DemandMatrix,
    samples: usize,
    seed: u64,
) -> Result<LoadReport, RoutingError> {
    if samples == 0 {
        return Err(RoutingError::NoSamples);
    }
    let n = g.vertex_count();
    let pairs: Vec<(VertexId, VertexId, f64)> = demands.iter().collect();
    for &(s, t, _) in &pairs {
        for x in [s, t] {
            if x >= n {
                return Err(RoutingError::DemandOutOfRange(x));
            }
        }
    }
    let m = g.edge_count();
    // per pair: sparse (edge, mean traversals, variance of the mean)
    let partials: Vec<Vec<(EdgeId, f64, f64)>> = pairs
        .par_iter()
        .enumerate()
        .map(|(k, &(s, t, d))| {
            let mut rng = pair_rng(seed, k);
            let mut sum = vec![0u64; m];
            let mut sum_sq = vec![0u64; m];
            let mut touched = Vec::new();
            let mut count = vec![0u64; m];
            for _ in 0..samples {
                let path = select_path(tree, backend, s, t, &mut rng)?;
                if !is_valid_path(g, &path, s, t) {
                    return Err(RoutingError::InvalidPath { s, t });
                }
                for &e in &path.edges {
                    if count[e] == 0 {
                        touched.push(e);
                    }
                    count[e] += 1;
                }
                for &e in &touched {
                    sum[e] += count[e];
                    sum_sq[e] += count[e] * count[e];
                    count[e] = 0;
                }
                touched.clear();
            }
            let ns = samples as f64;
            Ok((0..m)
                .filter(|&e| sum[e] > 0)
                .map(|e| {
                    let mean = sum[e] as f64 / ns;
                    let var = if samples > 1 {
                        (sum_sq[e] as f64 - ns * mean * mean).max(0.0) / (ns - 1.0)
                    } else {
                        0.0
                    };
                    (e, d * mean, d * d * var / ns)
                })
                .collect())
        })
        .collect::<Result<_, RoutingError>>()?;

    let mut load = vec![0.0; m];
    let mut var = vec![0.0; m];
    for partial in partials {
        for (e, l, v) in partial {
            load[e] += l;
            var[e] += v;
        }
    }
    let edges: Vec<EdgeLoad> = (0..m)
        .map(|e| {
            let edge = g.edge(e);
            EdgeLoad {
                edge: e,
                u: edge.u,
                v: edge.v,
                cap: edge.cap,
                load: load[e],
                std_error: var[e].sqrt(),
            }
        })
        .collect();
    let mut report = LoadReport {
        scheme: backend.name().to_string(),
        edges,
        congestion: 0.0,
        c_opt: None,
        competitive_ratio: None,
        max_table_bits: None,
        label_bits: None,
        header_bits: None,
        samples,
        seed,
    };
    report.congestion = congestion(&report);
    Ok(report)
}
