//! Capacitated undirected graphs, demand matrices, generators and the
//! edge-list file format.
//!
//! File format: the first non-comment line is `n m`, followed by `m` lines
//! `u v cap` with `0 <= u, v < n` and integer `cap >= 1`. Lines starting with
//! `#` and blank lines are ignored.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: malformed input: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: capacity must be a positive integer, got `{value}`")]
    NonPositiveCapacity { line: usize, value: String },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: VertexId },
    #[error("line {line}: vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange {
        line: usize,
        vertex: VertexId,
        n: usize,
    },
    #[error("line {line}: duplicate edge {{{u}, {v}}}")]
    DuplicateEdge {
        line: usize,
        u: VertexId,
        v: VertexId,
    },
    #[error("header declares {declared} edges but {found} were given")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("graph is disconnected: vertex {unreached} not reachable from 0")]
    Disconnected { unreached: VertexId },
    #[error("graph has no vertices")]
    Empty,
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub cap: u64,
}

impl Edge {
    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Validated, connected, simple undirected graph with positive integer
/// capacities. Edges are stored once in `(min, max)` orientation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct CapacitatedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(VertexId, EdgeId)>>,
    max_cap: u64,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<(VertexId, VertexId, u64)>,
}

impl TryFrom<RawGraph> for CapacitatedGraph {
    type Error = GraphError;
    fn try_from(raw: RawGraph) -> Result<Self, GraphError> {
        CapacitatedGraph::new(raw.n, raw.edges)
    }
}

impl From<CapacitatedGraph> for RawGraph {
    fn from(g: CapacitatedGraph) -> Self {
        RawGraph {
            n: g.n,
            edges: g.edges.iter().map(|e| (e.u, e.v, e.cap)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    /// Maximum edge capacity.
    pub w: u64,
    pub max_degree: usize,
}

impl CapacitatedGraph {
    /// Builds and validates a graph from `(u, v, cap)` triples.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId, u64)>,
    ) -> Result<Self, GraphError> {
        let numbered = edges
            .into_iter()
            .enumerate()
            .map(|(i, (u, v, c))| (i + 1, u, v, c));
        Self::from_numbered(n, numbered)
    }

    fn from_numbered(
        n: usize,
        edges: impl IntoIterator<Item = (usize, VertexId, VertexId, u64)>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut adj = vec![Vec::new(); n];
        let mut max_cap = 0;
        for (line, u, v, cap) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { line, vertex: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { line, vertex: u });
            }
            if cap == 0 {
                return Err(GraphError::NonPositiveCapacity {
                    line,
                    value: "0".into(),
                });
            }
            let (a, b) = (u.min(v), u.max(v));
            if !seen.insert((a, b)) {
                return Err(GraphError::DuplicateEdge { line, u: a, v: b });
            }
            let id = out.len();
            out.push(Edge { u: a, v: b, cap });
            adj[a].push((b, id));
            adj[b].push((a, id));
            max_cap = max_cap.max(cap);
        }
        let g = CapacitatedGraph {
            n,
            edges: out,
            adj,
            max_cap,
        };
        if let Some(unreached) = g.first_unreachable() {
            return Err(GraphError::Disconnected { unreached });
        }
        Ok(g)
    }

    fn first_unreachable(&self) -> Option<VertexId> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    /// Incident `(neighbor, edge id)` pairs in insertion order; the position
    /// of an edge in this list is its port number at `v`.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn max_capacity(&self) -> u64 {
        self.max_cap
    }

    pub fn is_uniform(&self) -> bool {
        self.edges.iter().all(|e| e.cap == self.max_cap)
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].iter().find(|&&(x, _)| x == b).map(|&(_, e)| e)
    }

    /// Port number of edge `e` at endpoint `v`.
    pub fn port(&self, v: VertexId, e: EdgeId) -> Option<usize> {
        self.adj[v].iter().position(|&(_, id)| id == e)
    }

    pub fn stats(&self) -> GraphStats {
        graph_stats(self)
    }

    /// Whether the subgraph induced by `vertices` is connected.
    pub fn induced_connected(&self, vertices: &[VertexId]) -> bool {
        if vertices.len() <= 1 {
            return true;
        }
        let inside: HashSet<VertexId> = vertices.iter().copied().collect();
        let mut seen = HashSet::from([vertices[0]]);
        let mut queue = VecDeque::from([vertices[0]]);
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adj[x] {
                if inside.contains(&y) && seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.len() == inside.len()
    }

    /// Edge-list text in the documented file format.
    pub fn serialize(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e.u, e.v, e.cap);
        }
        s
    }
}

pub fn graph_stats(g: &CapacitatedGraph) -> GraphStats {
    GraphStats {
        n: g.n,
        m: g.edges.len(),
        w: g.max_cap,
        max_degree: g.adj.iter().map(Vec::len).max().unwrap_or(0),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_field<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, GraphError> {
    tok.parse().map_err(|_| GraphError::Malformed {
        line,
        msg: format!("cannot parse {what} from `{tok}`"),
    })
}

pub fn parse_graph(text: &str) -> Result<CapacitatedGraph, GraphError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(GraphError::Malformed {
        line: 1,
        msg: "missing `n m` header".into(),
    })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(GraphError::Malformed {
            line: hline,
            msg: "header must be `n m`".into(),
        });
    }
    let n: usize = parse_field(hline, toks[0], "vertex count")?;
    let m: usize = parse_field(hline, toks[1], "edge count")?;
    let mut edges = Vec::with_capacity(m);
    for (line, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(GraphError::Malformed {
                line,
                msg: "edge line must be `u v cap`".into(),
            });
        }
        let u = parse_field(line, toks[0], "vertex")?;
        let v = parse_field(line, toks[1], "vertex")?;
        let cap = match toks[2].parse::<i128>() {
            Ok(c) if c >= 1 && c <= u64::MAX as i128 => c as u64,
            _ => {
                return Err(GraphError::NonPositiveCapacity {
                    line,
                    value: toks[2].into(),
                })
            }
        };
        edges.push((line, u, v, cap));
    }
    if edges.len() != m {
        return Err(GraphError::EdgeCountMismatch {
            declared: m,
            found: edges.len(),
        });
    }
    CapacitatedGraph::from_numbered(n, edges)
}

/// Graph generator families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GraphKind {
    Grid {
        rows: usize,
        cols: usize,
        /// Inclusive capacity range; unit capacities when absent.
        cap_range: Option<(u64, u64)>,
    },
    Torus {
        rows: usize,
        cols: usize,
    },
    Hypercube {
        dim: u32,
    },
    RandomRegular {
        n: usize,
        degree: usize,
    },
}

impl std::str::FromStr for GraphKind {
    type Err = GraphError;

    /// Accepts `grid:RxC`, `grid:RxC:lo-hi`, `torus:RxC`, `hypercube:D`,
    /// `random_regular:N:DEG`.
    fn from_str(s: &str) -> Result<Self, GraphError> {
        let bad = || GraphError::InvalidParams(format!("unrecognized generator `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let dims = |t: &str| -> Result<(usize, usize), GraphError> {
            let (r, c) = t.split_once('x').ok_or_else(bad)?;
            Ok((r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?))
        };
        match parts.as_slice() {
            ["grid", d] => {
                let (rows, cols) = dims(d)?;
                Ok(GraphKind::Grid {
                    rows,
                    cols,
                    cap_range: None,
                })
            }
            ["grid", d, range] => {
                let (rows, cols) = dims(d)?;
                let (lo, hi) = range.split_once('-').ok_or_else(bad)?;
                let lo = lo.parse().map_err(|_| bad())?;
                let hi = hi.parse().map_err(|_| bad())?;
                Ok(GraphKind::Grid {
                    rows,
                    cols,
                    cap_range: Some((lo, hi)),
                })
            }
            ["torus", d] => {
                let (rows, cols) = dims(d)?;
                Ok(GraphKind::Torus { rows, cols })
            }
            ["hypercube", d] => Ok(GraphKind::Hypercube {
                dim: d.parse().map_err(|_| bad())?,
            }),
            ["random_regular", n, k] => Ok(GraphKind::RandomRegular {
                n: n.parse().map_err(|_| bad())?,
                degree: k.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

pub fn generate_graph(kind: &GraphKind, seed: u64) -> Result<CapacitatedGraph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *kind {
        GraphKind::Grid {
            rows,
            cols,
            cap_range,
        } => {
            if rows == 0 || cols == 0 {
                return Err(GraphError::InvalidParams(
                    "grid needs rows, cols >= 1".into(),
                ));
            }
            if let Some((lo, hi)) = cap_range {
                if lo == 0 || lo > hi {
                    return Err(GraphError::InvalidParams(format!(
                        "capacity range {lo}-{hi} must satisfy 1 <= lo <= hi"
                    )));
                }
            }
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        edges.push((v, v + cols));
                    }
                }
            }
            let caps: Vec<u64> = match cap_range {
                Some((lo, hi)) => edges.iter().map(|_| rng.gen_range(lo..=hi)).collect(),
                None => vec![1; edges.len()],
            };
            CapacitatedGraph::new(
                rows * cols,
                edges.into_iter().zip(caps).map(|((u, v), c)| (u, v, c)),
            )
        }
        GraphKind::Torus { rows, cols } => {
            if rows < 3 || cols < 3 {
                return Err(GraphError::InvalidParams(
                    "torus needs rows, cols >= 3".into(),
                ));
            }
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    edges.push((v, r * cols + (c + 1) % cols, 1));
                    edges.push((v, ((r + 1) % rows) * cols + c, 1));
                }
            }
            CapacitatedGraph::new(rows * cols, edges)
        }
        GraphKind::Hypercube { dim } => {
            if dim > 20 {
                return Err(GraphError::InvalidParams("hypercube dimension > 20".into()));
            }
            let n = 1usize << dim;
            let edges = (0..n).flat_map(|x| {
                (0..dim)
                    .filter(move |b| x & (1 << b) == 0)
                    .map(move |b| (x, x | (1 << b), 1))
            });
            CapacitatedGraph::new(n, edges)
        }
        GraphKind::RandomRegular { n, degree } => random_regular(n, degree, &mut rng),
    }
}

/// Configuration-model sampling with restarts until the multigraph is
/// simple and connected.
fn random_regular(
    n: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<CapacitatedGraph, GraphError> {
    if n == 0 || k >= n || (n * k) % 2 != 0 || (k == 0 && n > 1) || (k == 1 && n > 2) {
        return Err(GraphError::InvalidParams(format!(
            "no connected simple {k}-regular graph on {n} vertices"
        )));
    }
    const ATTEMPTS: usize = 10_000;
    let mut stubs: Vec<VertexId> = (0..n).flat_map(|v| std::iter::repeat(v).take(k)).collect();
    'attempt: for _ in 0..ATTEMPTS {
        stubs.shuffle(rng);
        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(stubs.len() / 2);
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v, 1));
        }
        match CapacitatedGraph::new(n, edges) {
            Ok(g) => return Ok(g),
            Err(GraphError::Disconnected { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GraphError::InvalidParams(format!(
        "failed to sample a connected {k}-regular graph on {n} vertices"
    )))
}

#[derive(Debug, Error, PartialEq)]
pub enum DemandError {
    #[error("demand ({s}, {t}) references a vertex outside 0..{n}")]
    OutOfRange { s: VertexId, t: VertexId, n: usize },
    #[error("demand ({s}, {s}) on the diagonal must be zero")]
    Diagonal { s: VertexId },
    #[error("demand ({s}, {t}) = {value} is not finite and nonnegative")]
    InvalidValue {
        s: VertexId,
        t: VertexId,
        value: f64,
    },
    #[error("line {line}: malformed demand line: {msg}")]
    Malformed { line: usize, msg: String },
}

/// Sparse nonnegative demand matrix; zero entries are not stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DemandMatrix {
    entries: BTreeMap<(VertexId, VertexId), f64>,
}

impl DemandMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, s: VertexId, t: VertexId, value: f64) -> Result<(), DemandError> {
        if !value.is_finite() || value < 0.0 {
            return Err(DemandError::InvalidValue { s, t, value });
        }
        if s == t {
            if value == 0.0 {
                return Ok(());
            }
            return Err(DemandError::Diagonal { s });
        }
        if value == 0.0 {
            self.entries.remove(&(s, t));
        } else {
            self.entries.insert((s, t), value);
        }
        Ok(())
    }

    pub fn add(&mut self, s: VertexId, t: VertexId, value: f64) -> Result<(), DemandError> {
        let cur = self.get(s, t);
        self.set(s, t, cur + value)
    }

    pub fn get(&self, s: VertexId, t: VertexId) -> f64 {
        self.entries.get(&(s, t)).copied().unwrap_or(0.0)
    }

    /// Nonzero entries in `(s, t)` lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.entries.iter().map(|(&(s, t), &d)| (s, t, d))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn scaled(&self, factor: f64) -> DemandMatrix {
        DemandMatrix {
            entries: self
                .entries
                .iter()
                .map(|(&k, &d)| (k, d * factor))
                .filter(|&(_, d)| d > 0.0)
                .collect(),
        }
    }

    pub fn validate_for(&self, n: usize) -> Result<(), DemandError> {
        for (s, t, _) in self.iter() {
            if s >= n || t >= n {
                return Err(DemandError::OutOfRange { s, t, n });
            }
        }
        Ok(())
    }

    /// Parses `s t d` lines (comments with `#`).
    pub fn parse(text: &str) -> Result<DemandMatrix, DemandError> {
        let mut dm = DemandMatrix::new();
        for (line, l) in content_lines(text) {
            let toks: Vec<&str> = l.split_whitespace().collect();
            let malformed = |msg: &str| DemandError::Malformed {
                line,
                msg: msg.into(),
            };
            if toks.len() != 3 {
                return Err(malformed("expected `s t d`"));
            }
            let s = toks[0].parse().map_err(|_| malformed("bad source"))?;
            let t = toks[1].parse().map_err(|_| malformed("bad target"))?;
            let d: f64 = toks[2].parse().map_err(|_| malformed("bad demand"))?;
            dm.add(s, t, d)?;
        }
        Ok(dm)
    }
}
