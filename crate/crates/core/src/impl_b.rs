//! Hypercube implementation for uniform capacities.
//!
//! Every non-singleton cluster `S` embeds a hypercube whose node ids are cut
//! into consecutive ranges, one per `S_i` (`S_0 = S`, then the children by
//! ascending rounded size). Range `i` has `||S_i||` nodes, the border weight
//! of `S_i` rounded up to a power of two, and maps to the border vertices of
//! `S_i`. Each hypercube edge is realized by one graph path, picked by
//! randomized rounding of a multicommodity flow. Packets move between cube
//! nodes by two-phase bit fixing through a random intermediate node. A second
//! cube per cluster, the re-randomization cube, restores the exact cluster
//! distribution after each hop into a cluster.
//!
//! # Per-vertex blob layout
//!
//! For each non-singleton cluster holding the vertex (root first):
//!
//! 1. rounded sizes: for every exponent `e` in `0..E` the number of children
//!    with `||S_i|| = 2^e` (`width_for(r)` bits each), the code of `||S_0||`
//!    (0 for size 0, `e + 1` otherwise; `ceil_log2(E + 1)` bits) and `w_S(S)`
//!    (`width_for(2 m W)` bits), where `E = ceil_log2(2 m W) + 1`;
//! 2. for the embedding cube and then the re-randomization cube: a 16-bit
//!    entry count followed by one entry per traversal of a stored path
//!    through the vertex (every path vertex except the last): outgoing port
//!    (`ceil_log2(deg(v))` bits) and the path's id on that edge
//!    (`ceil_log2(max(d C, L))` bits, `d` the cube dimension and `L` the
//!    largest number of paths sharing an edge of the cluster).

use std::collections::BTreeMap;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{ceil_log2, width_for, BitWriter, TableBits};
use crate::decomposition::{Cluster, ClusterId, DecompositionTree};
use crate::flow::{
    decompose_solution, round_paths, solve_cmcf_short_paths, FlowError, FlowPath, UnitCommodity,
};
use crate::graph::{CapacitatedGraph, DemandMatrix, EdgeId, VertexId};
use crate::routing::{RoutingError, SchemeBackend};

const COUNT_BITS: u32 = 16;

#[derive(Debug, Error, PartialEq)]
pub enum ImplBError {
    #[error("hypercube scheme requires uniform capacities (found capacities up to {max} but not all equal)")]
    NonUniformCapacities { max: u64 },
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Smallest power of two `>= x`; 0 stays 0.
pub fn round_up_pow2(x: u64) -> u64 {
    if x == 0 {
        0
    } else {
        x.next_power_of_two()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundedSizes {
    /// `||S_i||` by index `i` (0 is the cluster itself, then the children in
    /// tree order).
    pub sizes: Vec<u64>,
    /// Range order: index 0, then children by ascending `(size, index)`.
    pub order: Vec<usize>,
    pub total_weight: u64,
}

pub fn round_and_order(tree: &DecompositionTree, cluster: ClusterId) -> RoundedSizes {
    let c = tree.cluster(cluster);
    let mut sizes = vec![round_up_pow2(c.total_border())];
    sizes.extend(
        c.children
            .iter()
            .map(|&ch| round_up_pow2(tree.cluster(ch).total_border())),
    );
    let mut order: Vec<usize> = (1..sizes.len()).collect();
    order.sort_by_key(|&i| (sizes[i], i));
    order.insert(0, 0);
    RoundedSizes {
        sizes,
        order,
        total_weight: c.total_weight(),
    }
}

impl RoundedSizes {
    pub fn total(&self) -> u64 {
        self.sizes.iter().sum()
    }

    /// `ceil(log2(sum of sizes))`.
    pub fn dimension(&self) -> u32 {
        ceil_log2(self.total())
    }

    /// Node range of each index.
    pub fn ranges(&self) -> Vec<Range<u64>> {
        let mut ranges = vec![0..0; self.sizes.len()];
        let mut at = 0;
        for &i in &self.order {
            ranges[i] = at..at + self.sizes[i];
            at += self.sizes[i];
        }
        ranges
    }

    /// Writes the compact form; `max_border` bounds every border weight.
    pub fn encode(&self, out: &mut BitWriter, max_border: u64) {
        let exponents = ceil_log2(max_border) as usize + 1;
        let children = self.sizes.len() as u64 - 1;
        let mut counts = vec![0u64; exponents];
        for &s in &self.sizes[1..] {
            counts[s.trailing_zeros() as usize] += 1;
        }
        for c in counts {
            out.push(c, width_for(children));
        }
        let s0 = if self.sizes[0] == 0 {
            0
        } else {
            self.sizes[0].trailing_zeros() as u64 + 1
        };
        out.push(s0, ceil_log2(exponents as u64 + 1));
        out.push(self.total_weight, width_for(max_border));
    }
}

/// Hypercube nodes mapped onto cluster vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeMap {
    pub dim: u32,
    pub owner: Vec<VertexId>,
    pub nodes_of: BTreeMap<VertexId, Vec<u64>>,
}

impl CubeMap {
    fn from_owner(dim: u32, owner: Vec<VertexId>) -> Self {
        let mut nodes_of: BTreeMap<VertexId, Vec<u64>> = BTreeMap::new();
        for (x, &v) in owner.iter().enumerate() {
            nodes_of.entry(v).or_default().push(x as u64);
        }
        CubeMap {
            dim,
            owner,
            nodes_of,
        }
    }

    pub fn node_count(&self) -> u64 {
        self.owner.len() as u64
    }

    pub fn count(&self, v: VertexId) -> usize {
        self.nodes_of.get(&v).map_or(0, |n| n.len())
    }

    /// Nodes of `range` owned by `v`.
    pub fn count_in(&self, v: VertexId, range: &Range<u64>) -> usize {
        self.nodes_of
            .get(&v)
            .map_or(0, |n| n.iter().filter(|x| range.contains(x)).count())
    }

    fn random_node_of<R: Rng + ?Sized>(&self, v: VertexId, rng: &mut R) -> Option<u64> {
        let nodes = self.nodes_of.get(&v)?;
        Some(nodes[rng.gen_range(0..nodes.len())])
    }
}

/// Maps range nodes to border vertices and the leftover nodes to vertices of
/// positive cluster weight.
pub fn range_mapping(
    tree: &DecompositionTree,
    cluster: ClusterId,
    sizes: &RoundedSizes,
) -> CubeMap {
    let c = tree.cluster(cluster);
    let dim = sizes.dimension();
    let mut owner = vec![usize::MAX; 1usize << dim];
    let ranges = sizes.ranges();
    for (i, range) in ranges.iter().enumerate() {
        let border: Vec<(VertexId, u64)> = if i == 0 {
            c.vertices
                .iter()
                .copied()
                .zip(c.border_weight.iter().copied())
                .collect()
        } else {
            let ch = tree.cluster(c.children[i - 1]);
            ch.vertices
                .iter()
                .copied()
                .zip(ch.border_weight.iter().copied())
                .collect()
        };
        let border: Vec<(VertexId, u64)> = border.into_iter().filter(|&(_, o)| o > 0).collect();
        let mut next = range.start;
        let mut given = vec![0u64; border.len()];
        for (k, &(v, o)) in border.iter().enumerate() {
            for _ in 0..o {
                owner[next as usize] = v;
                next += 1;
            }
            given[k] = o;
        }
        let mut k = 0;
        while next < range.end {
            if given[k] < 2 * border[k].1 {
                owner[next as usize] = border[k].0;
                given[k] += 1;
                next += 1;
            }
            k = (k + 1) % border.len();
        }
    }
    // leftovers: round-robin by descending quota 4 w(v)
    let mut quota: Vec<(VertexId, u64)> = c
        .vertices
        .iter()
        .zip(&c.cluster_weight)
        .filter(|(_, &w)| w > 0)
        .map(|(&v, &w)| (v, 4 * w))
        .collect();
    quota.sort_by_key(|&(v, q)| (std::cmp::Reverse(q), v));
    let mut k = 0;
    for x in sizes.total() as usize..owner.len() {
        while quota[k].1 == 0 {
            k = (k + 1) % quota.len();
        }
        owner[x] = quota[k].0;
        quota[k].1 -= 1;
        k = (k + 1) % quota.len();
    }
    CubeMap::from_owner(dim, owner)
}

/// The re-randomization cube map: the first `w_S(S)` nodes give each vertex
/// exactly `w_S(v)` nodes in consecutive blocks; the rest are dealt
/// round-robin without giving any vertex more than `2 w_S(v)` in total.
pub fn rerand_mapping(cluster: &Cluster) -> CubeMap {
    let total = cluster.total_weight();
    let dim = ceil_log2(total);
    let mut owner = Vec::with_capacity(1usize << dim);
    let weighted: Vec<(VertexId, u64)> = cluster
        .vertices
        .iter()
        .copied()
        .zip(cluster.cluster_weight.iter().copied())
        .filter(|&(_, w)| w > 0)
        .collect();
    for &(v, w) in &weighted {
        owner.extend(std::iter::repeat(v).take(w as usize));
    }
    let mut extra = vec![0u64; weighted.len()];
    let mut k = 0;
    while owner.len() < 1usize << dim {
        if extra[k] < weighted[k].1 {
            owner.push(weighted[k].0);
            extra[k] += 1;
        }
        k = (k + 1) % weighted.len();
    }
    CubeMap::from_owner(dim, owner)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingStats {
    /// Max fractional load of the rounded commodities.
    pub mu: f64,
    pub max_load: u32,
    /// Edges of the induced subgraph.
    pub local_edges: usize,
}

/// A cube mapped into a cluster with one graph path per hypercube edge.
#[derive(Debug, Clone)]
pub struct EmbeddedCube {
    pub cluster: ClusterId,
    pub map: CubeMap,
    /// Path of hypercube edge `(x, x + 2^b)` (bit `b` of `x` clear), from the
    /// owner of `x`; index `x * dim + b`. `None` when both ends share a
    /// vertex.
    pub paths: Vec<Option<FlowPath>>,
    /// Congestion of the fractional embedding flow, fake traffic included.
    pub lp_congestion: f64,
    pub fake_demand: f64,
    pub rounding: RoundingStats,
    /// The unit commodities the paths were rounded from, with their
    /// hypercube edge `(x, b)`.
    pub commodities: Vec<UnitCommodity>,
    pub commodity_edges: Vec<(u64, u32)>,
}

/// Pairs up vertices with remaining deficit, largest first, adding
/// symmetric fake demand. At most one vertex keeps a deficit.
fn fake_traffic(deficit: &mut BTreeMap<VertexId, u64>) -> Vec<(VertexId, VertexId, u64)> {
    let mut fake = Vec::new();
    loop {
        let mut open: Vec<(u64, VertexId)> = deficit
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(&v, &d)| (d, v))
            .collect();
        if open.len() < 2 {
            return fake;
        }
        open.sort_by_key(|&(d, v)| (std::cmp::Reverse(d), v));
        let ((da, a), (db, b)) = (open[0], open[1]);
        let amount = da.min(db);
        fake.push((a, b, amount));
        *deficit.get_mut(&a).unwrap() -= amount;
        *deficit.get_mut(&b).unwrap() -= amount;
    }
}

/// Realizes every hypercube edge of `map` by a path in `G[S]`: unit demand in
/// both directions per edge, balanced up to `target(v)` per vertex by fake
/// traffic, solved as a min-congestion flow and rounded to one path each.
fn embed_cube(
    g: &CapacitatedGraph,
    cluster: &Cluster,
    map: CubeMap,
    target: impl Fn(u64) -> u64,
    rng: &mut ChaCha8Rng,
) -> Result<EmbeddedCube, FlowError> {
    let dim = map.dim;
    let mut real = DemandMatrix::new();
    let mut edges = Vec::new();
    for x in 0..map.node_count() {
        for b in 0..dim {
            let y = x | (1 << b);
            if y == x {
                continue;
            }
            let (vx, vy) = (map.owner[x as usize], map.owner[y as usize]);
            if vx != vy {
                real.add(vx, vy, 1.0).expect("unit demand");
                real.add(vy, vx, 1.0).expect("unit demand");
                edges.push((x, b));
            }
        }
    }
    let mut sent: BTreeMap<VertexId, u64> = BTreeMap::new();
    for (s, _, d) in real.iter() {
        *sent.entry(s).or_default() += d as u64;
    }
    let mut deficit: BTreeMap<VertexId, u64> = BTreeMap::new();
    for (&v, &w) in cluster.vertices.iter().zip(&cluster.cluster_weight) {
        if w > 0 {
            let s = sent.get(&v).copied().unwrap_or(0);
            let t = target(w);
            assert!(s <= t, "vertex {v} sends {s} above its balance target {t}");
            deficit.insert(v, t - s);
        }
    }
    let mut demands = real.clone();
    let mut fake_demand = 0.0;
    for (a, b, amount) in fake_traffic(&mut deficit) {
        demands.add(a, b, amount as f64).expect("finite");
        demands.add(b, a, amount as f64).expect("finite");
        fake_demand += 2.0 * amount as f64;
    }
    let mut paths = vec![None; map.node_count() as usize * dim as usize];
    if edges.is_empty() {
        return Ok(EmbeddedCube {
            cluster: cluster.id,
            map,
            paths,
            lp_congestion: 0.0,
            fake_demand,
            rounding: RoundingStats {
                mu: 0.0,
                max_load: 0,
                local_edges: 0,
            },
            commodities: Vec::new(),
            commodity_edges: Vec::new(),
        });
    }
    let sol = solve_cmcf_short_paths(g, &demands, &cluster.vertices)?;
    let pairs = decompose_solution(g, &sol);
    let commodities: Vec<UnitCommodity> = edges
        .iter()
        .map(|&(x, b)| {
            let (vx, vy) = (map.owner[x as usize], map.owner[(x | 1 << b) as usize]);
            UnitCommodity::from_pair(&pairs, vx, vy).expect("every demanded pair carries flow")
        })
        .collect();
    let rounded = round_paths(&commodities, g.edge_count(), rng)?;
    for (&(x, b), p) in edges.iter().zip(rounded.paths) {
        paths[(x * dim as u64 + b as u64) as usize] = Some(p);
    }
    Ok(EmbeddedCube {
        cluster: cluster.id,
        map,
        paths,
        lp_congestion: sol.congestion,
        fake_demand,
        rounding: RoundingStats {
            mu: rounded.mu,
            max_load: rounded.max_load,
            local_edges: sol.edges.len(),
        },
        commodities,
        commodity_edges: edges,
    })
}

/// Embedding cube of one cluster together with its range layout.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub sizes: RoundedSizes,
    pub ranges: Vec<Range<u64>>,
    pub cube: EmbeddedCube,
}

pub fn build_embedding(
    g: &CapacitatedGraph,
    tree: &DecompositionTree,
    cluster: ClusterId,
    rng: &mut ChaCha8Rng,
) -> Result<Embedding, FlowError> {
    let sizes = round_and_order(tree, cluster);
    let map = range_mapping(tree, cluster, &sizes);
    let d = map.dim as u64;
    let cube = embed_cube(g, tree.cluster(cluster), map, |w| 8 * d * w, rng)?;
    Ok(Embedding {
        ranges: sizes.ranges(),
        sizes,
        cube,
    })
}

pub fn build_rerand_cube(
    g: &CapacitatedGraph,
    tree: &DecompositionTree,
    cluster: ClusterId,
    rng: &mut ChaCha8Rng,
) -> Result<EmbeddedCube, FlowError> {
    let c = tree.cluster(cluster);
    let map = rerand_mapping(c);
    let d = map.dim as u64;
    embed_cube(g, c, map, |w| 2 * d * w, rng)
}

/// Bit-fixing route from `from` to `to`, lowest dimension first; includes
/// both ends.
pub fn bit_fix(from: u64, to: u64, dim: u32) -> Vec<u64> {
    let mut nodes = vec![from];
    let mut x = from;
    for b in 0..dim {
        if (x ^ to) >> b & 1 == 1 {
            x ^= 1 << b;
            nodes.push(x);
        }
    }
    nodes
}

/// Two-phase route `from -> via -> to` and the concatenated graph path.
pub fn hypercube_route_via(
    cube: &EmbeddedCube,
    from: u64,
    to: u64,
    via: u64,
) -> (Vec<u64>, FlowPath) {
    let dim = cube.map.dim;
    let mut nodes = bit_fix(from, via, dim);
    nodes.extend(bit_fix(via, to, dim).into_iter().skip(1));
    let mut path = FlowPath::trivial(cube.map.owner[from as usize]);
    for w in nodes.windows(2) {
        let (x, y) = (w[0], w[1]);
        let lo = x.min(y);
        let b = (x ^ y).trailing_zeros();
        if let Some(p) = &cube.paths[(lo * dim as u64 + b as u64) as usize] {
            let hop = if x == lo { p.clone() } else { p.reversed() };
            debug_assert_eq!(hop.start(), path.end());
            path.vertices.extend_from_slice(&hop.vertices[1..]);
            path.edges.extend(hop.edges);
        }
    }
    (nodes, path)
}

/// Valiant's two-phase routing through a uniformly random node.
pub fn hypercube_route<R: Rng + ?Sized>(
    cube: &EmbeddedCube,
    from: u64,
    to: u64,
    rng: &mut R,
) -> (Vec<u64>, FlowPath) {
    let via = rng.gen_range(0..cube.map.node_count());
    hypercube_route_via(cube, from, to, via)
}

#[derive(Debug, Clone)]
pub struct ClusterCubes {
    pub embedding: Embedding,
    pub rerand: EmbeddedCube,
}

#[derive(Debug, Clone)]
pub struct HypercubeScheme {
    pub c: u64,
    pub max_border: u64,
    /// Indexed by cluster id; `None` for singletons.
    pub clusters: Vec<Option<ClusterCubes>>,
}

impl HypercubeScheme {
    pub fn cluster(&self, id: ClusterId) -> Option<&ClusterCubes> {
        self.clusters[id].as_ref()
    }

    /// Largest embedding-cube dimension.
    pub fn max_dimension(&self) -> u32 {
        self.clusters
            .iter()
            .flatten()
            .map(|c| c.embedding.cube.map.dim)
            .max()
            .unwrap_or(0)
    }

    /// Largest fractional embedding congestion over both cube kinds.
    pub fn max_lp_congestion(&self) -> f64 {
        self.clusters
            .iter()
            .flatten()
            .map(|c| c.embedding.cube.lp_congestion.max(c.rerand.lp_congestion))
            .fold(0.0, f64::max)
    }
}

/// Builds both cubes for every non-singleton cluster. Cluster `k` draws its
/// rounding randomness from stream `2k` (embedding) and `2k + 1`
/// (re-randomization cube) of the seed.
pub fn build_hypercube_scheme(
    g: &CapacitatedGraph,
    tree: &DecompositionTree,
    c: u64,
    seed: u64,
) -> Result<HypercubeScheme, ImplBError> {
    if !g.is_uniform() {
        return Err(ImplBError::NonUniformCapacities {
            max: g.max_capacity(),
        });
    }
    let stream = |k: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k);
        rng
    };
    let clusters = tree
        .clusters
        .par_iter()
        .map(|cl| {
            if cl.is_singleton() {
                return Ok(None);
            }
            let k = cl.id as u64;
            let embedding = build_embedding(g, tree, cl.id, &mut stream(2 * k))?;
            let rerand = build_rerand_cube(g, tree, cl.id, &mut stream(2 * k + 1))?;
            Ok(Some(ClusterCubes { embedding, rerand }))
        })
        .collect::<Result<Vec<_>, FlowError>>()?;
    Ok(HypercubeScheme {
        c,
        max_border: 2 * g.edge_count() as u64 * g.max_capacity(),
        clusters,
    })
}

/// Checks the node-count bounds of an embedding cube: each range has its
/// rounded size, range `i` gives each vertex between `out_i(v)` and
/// `2 out_i(v)` nodes, leftovers give at most `4 w(v)` and the total is at
/// most `8 w(v)`.
pub fn audit_embedding(
    tree: &DecompositionTree,
    cluster: ClusterId,
    emb: &Embedding,
) -> Vec<String> {
    let c = tree.cluster(cluster);
    let map = &emb.cube.map;
    let mut bad = Vec::new();
    if map.node_count() > 8 * c.total_weight() {
        bad.push(format!(
            "cluster {cluster}: 2^d = {} > 8 w(S)",
            map.node_count()
        ));
    }
    let mut at = 0;
    for &i in &emb.sizes.order {
        let r = &emb.ranges[i];
        if r.start != at || r.end - r.start != emb.sizes.sizes[i] {
            bad.push(format!("cluster {cluster}: range {i} misplaced"));
        }
        at = r.end;
    }
    if map.owner.iter().any(|&v| c.w(v) == 0) {
        bad.push(format!(
            "cluster {cluster}: node mapped to a vertex of zero weight"
        ));
    }
    let leftover = emb.sizes.total()..map.node_count();
    for (&v, &w) in c.vertices.iter().zip(&c.cluster_weight) {
        for (i, r) in emb.ranges.iter().enumerate() {
            let out = if i == 0 {
                c.out(v)
            } else {
                tree.cluster(c.children[i - 1]).out(v)
            };
            let got = map.count_in(v, r) as u64;
            if got < out || got > 2 * out {
                bad.push(format!(
                    "cluster {cluster}: vertex {v} has {got} nodes in range {i}, out {out}"
                ));
            }
        }
        let extra = map.count_in(v, &leftover) as u64;
        if extra > 4 * w {
            bad.push(format!(
                "cluster {cluster}: vertex {v} has {extra} leftover nodes > 4w = {}",
                4 * w
            ));
        }
        let total = map.count(v) as u64;
        if total > 8 * w {
            bad.push(format!(
                "cluster {cluster}: vertex {v} has {total} nodes > 8w = {}",
                8 * w
            ));
        }
    }
    bad
}

/// Checks that the first `w(S)` nodes give every vertex exactly `w(v)`.
pub fn audit_rerand(
    tree: &DecompositionTree,
    cluster: ClusterId,
    cube: &EmbeddedCube,
) -> Vec<String> {
    let c = tree.cluster(cluster);
    let first = 0..c.total_weight();
    let mut bad = Vec::new();
    if cube.map.dim != ceil_log2(c.total_weight()) {
        bad.push(format!(
            "cluster {cluster}: re-randomization cube has dimension {}",
            cube.map.dim
        ));
    }
    for (&v, &w) in c.vertices.iter().zip(&c.cluster_weight) {
        let got = cube.map.count_in(v, &first) as u64;
        if got != w {
            bad.push(format!(
                "cluster {cluster}: vertex {v} owns {got} of the first nodes, w = {w}"
            ));
        }
        if cube.map.count(v) as u64 > 2 * w {
            bad.push(format!(
                "cluster {cluster}: vertex {v} owns more than 2w nodes"
            ));
        }
    }
    bad
}

/// Exact endpoint law of a hop into range `i`: the share of range nodes
/// owned by each vertex.
pub fn range_endpoint_law(emb: &Embedding, i: usize) -> BTreeMap<VertexId, f64> {
    let r = &emb.ranges[i];
    let size = (r.end - r.start) as f64;
    let mut law = BTreeMap::new();
    for x in r.clone() {
        *law.entry(emb.cube.map.owner[x as usize]).or_insert(0.0) += 1.0 / size;
    }
    law
}

/// From a random node of `start` to a uniform node of range `index`.
pub fn route_to_border_b(
    scheme: &HypercubeScheme,
    cluster: ClusterId,
    index: usize,
    start: VertexId,
    rng: &mut ChaCha8Rng,
) -> Result<FlowPath, RoutingError> {
    let Some(cc) = scheme.cluster(cluster) else {
        return Ok(FlowPath::trivial(start));
    };
    let cube = &cc.embedding.cube;
    let range = cc
        .embedding
        .ranges
        .get(index)
        .ok_or(RoutingError::NoSuchChild { cluster, index })?;
    let from = cube
        .map
        .random_node_of(start, rng)
        .ok_or(RoutingError::Unmapped { v: start, cluster })?;
    let to = rng.gen_range(range.clone());
    Ok(hypercube_route(cube, from, to, rng).1)
}

/// From a random node of `v` to a uniform node among the first `w(S)` nodes
/// of the re-randomization cube.
pub fn rerandomize(
    scheme: &HypercubeScheme,
    cluster: ClusterId,
    v: VertexId,
    rng: &mut ChaCha8Rng,
) -> Result<FlowPath, RoutingError> {
    let Some(cc) = scheme.cluster(cluster) else {
        return Ok(FlowPath::trivial(v));
    };
    let cube = &cc.rerand;
    let from = cube
        .map
        .random_node_of(v, rng)
        .ok_or(RoutingError::Unmapped { v, cluster })?;
    let to = rng.gen_range(0..cc.embedding.sizes.total_weight);
    Ok(hypercube_route(cube, from, to, rng).1)
}

/// From a random node of `start` to a uniform node of the whole embedding
/// cube, then through the re-randomization cube.
pub fn route_from_border_b(
    scheme: &HypercubeScheme,
    cluster: ClusterId,
    start: VertexId,
    rng: &mut ChaCha8Rng,
) -> Result<FlowPath, RoutingError> {
    let Some(cc) = scheme.cluster(cluster) else {
        return Ok(FlowPath::trivial(start));
    };
    let cube = &cc.embedding.cube;
    let from = cube
        .map
        .random_node_of(start, rng)
        .ok_or(RoutingError::Unmapped { v: start, cluster })?;
    let to = rng.gen_range(0..cube.map.node_count());
    let mut path = hypercube_route(cube, from, to, rng).1;
    let tail = rerandomize(scheme, cluster, path.end(), rng)?;
    path.vertices.extend_from_slice(&tail.vertices[1..]);
    path.edges.extend(tail.edges);
    Ok(path)
}

impl SchemeBackend for HypercubeScheme {
    fn name(&self) -> &'static str {
        "impl-b"
    }

    fn to_border(
        &self,
        cluster: ClusterId,
        index: usize,
        start: VertexId,
        rng: &mut ChaCha8Rng,
    ) -> Result<FlowPath, RoutingError> {
        route_to_border_b(self, cluster, index, start, rng)
    }

    fn from_border(
        &self,
        cluster: ClusterId,
        _index: usize,
        start: VertexId,
        rng: &mut ChaCha8Rng,
    ) -> Result<FlowPath, RoutingError> {
        route_from_border_b(self, cluster, start, rng)
    }
}

/// Bits of one path-table entry.
pub fn path_entry_bits(degree: usize, dim: u32, c: u64, max_sharing: usize) -> u32 {
    ceil_log2(degree as u64) + ceil_log2((dim as u64 * c).max(max_sharing as u64))
}

/// Path traversals of a cube at each vertex, with the largest number of
/// paths on any single edge.
fn traversals(cube: &EmbeddedCube, edge_count: usize) -> (BTreeMap<VertexId, Vec<EdgeId>>, usize) {
    let mut at: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
    let mut sharing = vec![0usize; edge_count];
    for p in cube.paths.iter().flatten() {
        for (k, &e) in p.edges.iter().enumerate() {
            at.entry(p.vertices[k]).or_default().push(e);
            sharing[e] += 1;
        }
    }
    (at, sharing.into_iter().max().unwrap_or(0))
}

pub fn vertex_blob_b(
    g: &CapacitatedGraph,
    tree: &DecompositionTree,
    scheme: &HypercubeScheme,
    v: VertexId,
) -> BitWriter {
    let mut out = BitWriter::new();
    let deg = g.degree(v);
    for &cid in &tree.chain(v) {
        let Some(cc) = scheme.cluster(cid) else {
            continue;
        };
        cc.embedding.sizes.encode(&mut out, scheme.max_border);
        for cube in [&cc.embedding.cube, &cc.rerand] {
            let (at, sharing) = traversals(cube, g.edge_count());
            let width = ceil_log2((cube.map.dim as u64 * scheme.c).max(sharing as u64));
            let mine = at.get(&v).map_or(&[][..], |x| x.as_slice());
            out.push(mine.len() as u64, COUNT_BITS);
            let mut ids: BTreeMap<EdgeId, u64> = BTreeMap::new();
            for &e in mine {
                let id = ids.entry(e).or_insert(0);
                out.push(
                    g.port(v, e).expect("incident edge") as u64,
                    ceil_log2(deg as u64),
                );
                out.push(*id, width);
                *id += 1;
            }
        }
    }
    out
}

pub fn measure_table_bits_b(
    g: &CapacitatedGraph,
    tree: &DecompositionTree,
    scheme: &HypercubeScheme,
) -> TableBits {
    TableBits::new(
        (0..g.vertex_count())
            .into_par_iter()
            .map(|v| vertex_blob_b(g, tree, scheme, v).bit_len())
            .collect(),
    )
}
