//! Hierarchical decomposition trees, the per-level weight system, and the
//! per-cluster CMCF instances used to certify the congestion parameter.
//!
//! Levels count from the root (level 0) down to the leaves (level `height`).
//! For a vertex `v` and level `l`, `a_l(v)` is the level-`l` cluster holding
//! `v`, and the level weight of `v` is the capacity of edges at `v` leaving
//! `a_l(v)`. A cluster `S` at level `l` stores its border weight (level `l`)
//! and its cluster weight (level `l + 1`, or level `l` for leaves).

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flow::{solve_cmcf_min_congestion, CmcfSolution, FlowError};
use crate::graph::{CapacitatedGraph, DemandMatrix, VertexId};

pub type ClusterId = usize;

/// Allowed overshoot of a part over the balanced size `ceil(|S| / arity)`.
const BALANCE_SLACK: f64 = 0.25;
const REFINE_PASSES: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: ClusterId,
    pub level: usize,
    /// Sorted.
    pub vertices: Vec<VertexId>,
    pub parent: Option<ClusterId>,
    pub children: Vec<ClusterId>,
    /// `w_S(v)` aligned with `vertices`.
    pub cluster_weight: Vec<u64>,
    /// `out_S(v)` aligned with `vertices`.
    pub border_weight: Vec<u64>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.position(v).is_some()
    }

    /// Cluster weight of `v`, 0 outside the cluster.
    pub fn w(&self, v: VertexId) -> u64 {
        self.position(v).map_or(0, |p| self.cluster_weight[p])
    }

    /// Border weight of `v`, 0 outside the cluster.
    pub fn out(&self, v: VertexId) -> u64 {
        self.position(v).map_or(0, |p| self.border_weight[p])
    }

    pub fn total_weight(&self) -> u64 {
        self.cluster_weight.iter().sum()
    }

    pub fn total_border(&self) -> u64 {
        self.border_weight.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionTree {
    pub clusters: Vec<Cluster>,
    pub root: ClusterId,
    pub height: usize,
    /// Maximum number of children of any cluster.
    pub degree: usize,
    /// Leaf cluster of each vertex.
    pub leaf_of: Vec<ClusterId>,
}

impl DecompositionTree {
    pub fn cluster(&self, id: ClusterId) -> &Cluster {
        &self.clusters[id]
    }

    pub fn vertex_count(&self) -> usize {
        self.leaf_of.len()
    }

    /// Clusters containing `v`, from the root (index 0) to its leaf.
    pub fn chain(&self, v: VertexId) -> Vec<ClusterId> {
        let mut chain = vec![self.leaf_of[v]];
        while let Some(p) = self.clusters[*chain.last().unwrap()].parent {
            chain.push(p);
        }
        chain.reverse();
        chain
    }

    /// `a_level(v)`.
    pub fn ancestor(&self, v: VertexId, level: usize) -> ClusterId {
        let mut c = self.leaf_of[v];
        while self.clusters[c].level > level {
            c = self.clusters[c]
                .parent
                .expect("levels decrease towards the root");
        }
        c
    }

    /// 1-based position of `c` among its parent's children; 0 for the root.
    pub fn child_index(&self, c: ClusterId) -> usize {
        match self.clusters[c].parent {
            None => 0,
            Some(p) => {
                1 + self.clusters[p]
                    .children
                    .iter()
                    .position(|&x| x == c)
                    .expect("child listed at its parent")
            }
        }
    }

    /// Deepest common cluster of `u` and `v`.
    pub fn lca(&self, u: VertexId, v: VertexId) -> ClusterId {
        let (cu, cv) = (self.chain(u), self.chain(v));
        let shared = cu.iter().zip(&cv).take_while(|(a, b)| a == b).count();
        cu[shared - 1]
    }

    /// Extends every leaf with unary singleton clusters until all leaves sit
    /// at depth `height`. Weight tables of new clusters copy the leaf's.
    pub fn pad_to_height(&mut self, height: usize) {
        assert!(height >= self.height, "cannot shrink a tree");
        for v in 0..self.leaf_of.len() {
            while self.clusters[self.leaf_of[v]].level < height {
                let leaf = self.leaf_of[v];
                let id = self.clusters.len();
                let mut child = self.clusters[leaf].clone();
                child.id = id;
                child.level += 1;
                child.parent = Some(leaf);
                child.children.clear();
                self.clusters[leaf].children.push(id);
                self.clusters.push(child);
                self.leaf_of[v] = id;
            }
        }
        self.height = height;
        self.degree = self
            .clusters
            .iter()
            .map(|c| c.children.len())
            .max()
            .unwrap_or(0);
    }
}

/// Builds a decomposition tree by recursive balanced partitioning into at
/// most `arity` connected parts, then pads all leaves to a uniform depth and
/// fills the weight tables. Deterministic for a fixed seed.
pub fn build_tree(g: &CapacitatedGraph, arity: usize, seed: u64) -> DecompositionTree {
    assert!(arity >= 2, "arity must be at least 2");
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tree = DecompositionTree {
        clusters: vec![Cluster {
            id: 0,
            level: 0,
            vertices: (0..n).collect(),
            parent: None,
            children: Vec::new(),
            cluster_weight: Vec::new(),
            border_weight: Vec::new(),
        }],
        root: 0,
        height: 0,
        degree: 0,
        leaf_of: vec![0; n],
    };
    let mut queue = VecDeque::from([0usize]);
    let mut part_of = vec![usize::MAX; n];
    while let Some(id) = queue.pop_front() {
        let vertices = tree.clusters[id].vertices.clone();
        if vertices.len() == 1 {
            tree.leaf_of[vertices[0]] = id;
            continue;
        }
        let parts = partition(
            g,
            &vertices,
            arity.min(vertices.len()),
            &mut part_of,
            &mut rng,
        );
        for mut part in parts {
            part.sort_unstable();
            let cid = tree.clusters.len();
            tree.clusters.push(Cluster {
                id: cid,
                level: tree.clusters[id].level + 1,
                vertices: part,
                parent: Some(id),
                children: Vec::new(),
                cluster_weight: Vec::new(),
                border_weight: Vec::new(),
            });
            tree.clusters[id].children.push(cid);
            queue.push_back(cid);
        }
    }
    tree.height = tree.clusters.iter().map(|c| c.level).max().unwrap_or(0);
    tree.degree = tree
        .clusters
        .iter()
        .map(|c| c.children.len())
        .max()
        .unwrap_or(0);
    compute_weights(g, &mut tree);
    let h = tree.height;
    tree.pad_to_height(h);
    tree
}

/// Splits `vertices` (inducing a connected subgraph) into `k` connected,
/// nonempty parts of roughly equal size with small cut capacity.
fn partition(
    g: &CapacitatedGraph,
    vertices: &[VertexId],
    k: usize,
    part_of: &mut [usize],
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<VertexId>> {
    const FREE: usize = usize::MAX - 1;
    for &v in vertices {
        part_of[v] = FREE;
    }
    let cap = ((vertices.len().div_ceil(k)) as f64 * (1.0 + BALANCE_SLACK)).ceil() as usize;

    // farthest-point seeds (hop distance inside the cluster)
    let mut seeds = vec![vertices[rng.gen_range(0..vertices.len())]];
    let mut dist = bfs_inside(g, seeds[0], part_of, FREE);
    while seeds.len() < k {
        let &far = vertices
            .iter()
            .filter(|v| !seeds.contains(v))
            .max_by_key(|&&v| (dist[v], std::cmp::Reverse(v)))
            .expect("k <= |S|");
        seeds.push(far);
        let d = bfs_inside(g, far, part_of, FREE);
        for &v in vertices {
            dist[v] = dist[v].min(d[v]);
        }
    }
    let mut parts: Vec<Vec<VertexId>> = seeds.iter().map(|&s| vec![s]).collect();
    for (p, &s) in seeds.iter().enumerate() {
        part_of[s] = p;
    }

    // greedy region growing: the smallest part that can still grow absorbs
    // its most strongly attached free neighbor
    let mut assigned = k;
    while assigned < vertices.len() {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&p| (parts[p].len(), p));
        let mut grew = false;
        for &p in &order {
            let limit = if parts[p].len() < cap { Some(p) } else { None };
            if let Some(p) = limit {
                if let Some(v) = best_frontier(g, &parts[p], p, part_of, FREE) {
                    part_of[v] = p;
                    parts[p].push(v);
                    assigned += 1;
                    grew = true;
                    break;
                }
            }
        }
        if !grew {
            // every part with free neighbors is full: overflow the smallest
            let p = order
                .iter()
                .copied()
                .find(|&p| best_frontier(g, &parts[p], p, part_of, FREE).is_some())
                .expect("free vertices are reachable from some part");
            let v = best_frontier(g, &parts[p], p, part_of, FREE).unwrap();
            part_of[v] = p;
            parts[p].push(v);
            assigned += 1;
        }
    }

    refine(g, &mut parts, part_of, cap);
    for &v in vertices {
        part_of[v] = usize::MAX;
    }
    parts
}

fn bfs_inside(g: &CapacitatedGraph, s: VertexId, part_of: &[usize], free: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.vertex_count()];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        for &(y, _) in g.neighbors(x) {
            if part_of[y] == free && dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Free neighbor of part `p` maximizing capacity into `p` minus capacity to
/// other free vertices; ties to the smallest id.
fn best_frontier(
    g: &CapacitatedGraph,
    part: &[VertexId],
    p: usize,
    part_of: &[usize],
    free: usize,
) -> Option<VertexId> {
    let mut best: Option<(i64, VertexId)> = None;
    for &x in part {
        for &(y, _) in g.neighbors(x) {
            if part_of[y] != free {
                continue;
            }
            let mut score = 0i64;
            for &(z, e) in g.neighbors(y) {
                let c = g.edge(e).cap as i64;
                if part_of[z] == p {
                    score += c;
                } else if part_of[z] == free {
                    score -= c;
                }
            }
            let better = match best {
                None => true,
                Some((s, v)) => score > s || (score == s && y < v),
            };
            if better {
                best = Some((score, y));
            }
        }
    }
    best.map(|(_, v)| v)
}

/// Boundary moves with positive cut gain that keep sizes within `cap` and
/// both affected parts connected.
fn refine(g: &CapacitatedGraph, parts: &mut [Vec<VertexId>], part_of: &mut [usize], cap: usize) {
    let k = parts.len();
    for _ in 0..REFINE_PASSES {
        let mut moved = false;
        let mut candidates: Vec<VertexId> = parts.iter().flatten().copied().collect();
        candidates.sort_unstable();
        for v in candidates {
            let a = part_of[v];
            if parts[a].len() == 1 {
                continue;
            }
            let mut conn = vec![0i64; k];
            for &(u, e) in g.neighbors(v) {
                if part_of[u] < k {
                    conn[part_of[u]] += g.edge(e).cap as i64;
                }
            }
            let target = (0..k)
                .filter(|&b| b != a && conn[b] > 0 && parts[b].len() < cap)
                .max_by_key(|&b| (conn[b], std::cmp::Reverse(b)));
            let Some(b) = target else { continue };
            if conn[b] <= conn[a] {
                continue;
            }
            let rest: Vec<VertexId> = parts[a].iter().copied().filter(|&x| x != v).collect();
            if !g.induced_connected(&rest) {
                continue;
            }
            parts[a] = rest;
            parts[b].push(v);
            part_of[v] = b;
            moved = true;
        }
        if !moved {
            break;
        }
    }
}

/// Fills `cluster_weight` and `border_weight` of every cluster.
pub fn compute_weights(g: &CapacitatedGraph, tree: &mut DecompositionTree) {
    let chains: Vec<Vec<ClusterId>> = (0..tree.vertex_count()).map(|v| tree.chain(v)).collect();
    // level weight of v: capacity of edges at v whose other end lies outside a_level(v)
    let level_weight = |v: VertexId, level: usize| -> u64 {
        g.neighbors(v)
            .iter()
            .filter(|&&(u, _)| chains[u].get(level) != chains[v].get(level))
            .map(|&(_, e)| g.edge(e).cap)
            .sum()
    };
    for c in tree.clusters.iter_mut() {
        let below = if c.children.is_empty() {
            c.level
        } else {
            c.level + 1
        };
        c.border_weight = c
            .vertices
            .iter()
            .map(|&v| level_weight(v, c.level))
            .collect();
        c.cluster_weight = c.vertices.iter().map(|&v| level_weight(v, below)).collect();
    }
}

/// Demand `w(u) w(v) / w(S)` for every ordered pair of distinct vertices of
/// positive cluster weight.
pub fn cmcf_instance(cluster: &Cluster) -> DemandMatrix {
    let mut d = DemandMatrix::new();
    let total = cluster.total_weight() as f64;
    if total == 0.0 {
        return d;
    }
    for (a, &u) in cluster.vertices.iter().enumerate() {
        for (b, &v) in cluster.vertices.iter().enumerate() {
            let (wu, wv) = (cluster.cluster_weight[a], cluster.cluster_weight[b]);
            if u != v && wu > 0 && wv > 0 {
                d.set(u, v, wu as f64 * wv as f64 / total)
                    .expect("finite positive demand");
            }
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongestionCertificate {
    /// Max over clusters of the CMCF congestion, at least 1.
    pub c: f64,
    /// Indexed by cluster id.
    pub per_cluster: Vec<f64>,
    /// CMCF solutions of the non-singleton clusters, indexed by cluster id.
    pub solutions: Vec<Option<CmcfSolution>>,
}

impl CongestionCertificate {
    /// `C` rounded up to an integer for capacity scaling.
    pub fn integral(&self) -> u64 {
        self.c.ceil().max(1.0) as u64
    }
}

/// Solves every cluster's CMCF instance inside its induced subgraph.
pub fn certify_congestion(
    g: &CapacitatedGraph,
    tree: &DecompositionTree,
) -> Result<CongestionCertificate, FlowError> {
    let solutions: Vec<Option<CmcfSolution>> = tree
        .clusters
        .par_iter()
        .map(|c| {
            if c.is_singleton() {
                return Ok(None);
            }
            solve_cmcf_min_congestion(g, &cmcf_instance(c), &c.vertices).map(Some)
        })
        .collect::<Result<_, _>>()?;
    let per_cluster: Vec<f64> = solutions
        .iter()
        .map(|s| s.as_ref().map_or(0.0, |s| s.congestion))
        .collect();
    let c = per_cluster.iter().copied().fold(1.0, f64::max);
    Ok(CongestionCertificate {
        c,
        per_cluster,
        solutions,
    })
}

/// Checks laminarity, uniform leaf depth, connectivity of clusters and the
/// weight identities. Returns one message per violation.
pub fn audit_tree(g: &CapacitatedGraph, tree: &DecompositionTree) -> Vec<String> {
    let mut bad = Vec::new();
    let root = tree.cluster(tree.root);
    if root.vertices != (0..g.vertex_count()).collect::<Vec<_>>() {
        bad.push("root does not cover all vertices".to_string());
    }
    if root.border_weight.iter().any(|&x| x != 0) {
        bad.push("root has positive border weight".to_string());
    }
    for c in &tree.clusters {
        if !g.induced_connected(&c.vertices) {
            bad.push(format!("cluster {} is disconnected", c.id));
        }
        for (p, (&w, &o)) in c.cluster_weight.iter().zip(&c.border_weight).enumerate() {
            if o > w {
                bad.push(format!(
                    "cluster {}: out({}) = {o} > w = {w}",
                    c.id, c.vertices[p]
                ));
            }
        }
        if c.children.is_empty() {
            if !c.is_singleton() {
                bad.push(format!("leaf cluster {} is not a singleton", c.id));
            }
            if c.level != tree.height {
                bad.push(format!(
                    "leaf cluster {} at depth {} != {}",
                    c.id, c.level, tree.height
                ));
            }
            continue;
        }
        let mut union: Vec<VertexId> = Vec::new();
        let mut border_sum = 0u64;
        for &ch in &c.children {
            let child = tree.cluster(ch);
            if child.parent != Some(c.id) || child.level != c.level + 1 {
                bad.push(format!("cluster {ch} has inconsistent parent or level"));
            }
            union.extend(&child.vertices);
            border_sum += child.total_border();
            for (p, &v) in child.vertices.iter().enumerate() {
                if c.w(v) != child.border_weight[p] {
                    bad.push(format!(
                        "cluster {}: w({v}) = {} differs from child {ch} out = {}",
                        c.id,
                        c.w(v),
                        child.border_weight[p]
                    ));
                }
            }
        }
        union.sort_unstable();
        if union != c.vertices {
            bad.push(format!("children of cluster {} do not partition it", c.id));
        }
        if border_sum != c.total_weight() {
            bad.push(format!(
                "cluster {}: children border total {border_sum} != w(S) {}",
                c.id,
                c.total_weight()
            ));
        }
    }
    bad
}
