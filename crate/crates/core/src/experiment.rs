//! Config-driven experiment runs: graph, tree, certificate, demand battery,
//! one routing pass per scheme, and report files.
//!
//! Config files are flat `key = value` lines (`#` starts a comment):
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `graph` | path to a graph file | |
//! | `generate` | generator spec such as `grid:4x4` | |
//! | `schemes` | comma list of `reference`, `impl-a`, `impl-b` | `reference` |
//! | `demands` | `permutation`, `uniform_pairs:K`, `gravity`, `file:PATH` | `permutation` |
//! | `seed` | master seed | `1` |
//! | `samples` | path draws per demand pair | `1000` |
//! | `arity` | target tree arity | `2` |
//! | `assert_bounds` | check each scheme's load bound | `true` |
//! | `assert_max_ratio` | fail when a competitive ratio exceeds this | |
//!
//! Exactly one of `graph` and `generate` is required. Every random choice is
//! drawn from `derive_seed(seed, stream)` with the stream ids in [`Stream`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::TableBits;
use crate::decomposition::{
    audit_tree, build_tree, certify_congestion, CongestionCertificate, DecompositionTree,
};
use crate::flow::FlowError;
use crate::graph::{
    generate_graph, parse_graph, CapacitatedGraph, DemandError, DemandMatrix, GraphError,
    GraphKind, GraphStats,
};
use crate::impl_a::{
    assign_labels, build_flow_tables, label_field_width, measure_table_bits_a, RoutingHeader,
};
use crate::impl_b::{build_hypercube_scheme, measure_table_bits_b, ImplBError};
use crate::oracle::{optimal_congestion, ratio, OracleError};
use crate::routing::{route_demands, LoadReport, ReferenceBackend, RoutingError, SchemeBackend};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("config: {0}")]
    Invalid(String),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("demands: {0}")]
    Demand(#[from] DemandError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("impl-b is limited to uniform capacities")]
    Scope(#[from] ImplBError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Reference,
    ImplA,
    ImplB,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Reference => "reference",
            Scheme::ImplA => "impl-a",
            Scheme::ImplB => "impl-b",
        }
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reference" => Ok(Scheme::Reference),
            "impl-a" => Ok(Scheme::ImplA),
            "impl-b" => Ok(Scheme::ImplB),
            _ => Err(format!(
                "unknown scheme `{s}` (expected reference, impl-a or impl-b)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DemandKind {
    Permutation,
    UniformPairs { k: usize },
    Gravity,
    File { path: PathBuf },
}

impl FromStr for DemandKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "permutation" => Ok(DemandKind::Permutation),
            None if s == "gravity" => Ok(DemandKind::Gravity),
            Some(("uniform_pairs", k)) => k
                .parse()
                .map(|k| DemandKind::UniformPairs { k })
                .map_err(|_| format!("bad pair count `{k}`")),
            Some(("file", p)) => Ok(DemandKind::File { path: p.into() }),
            _ => Err(format!("unknown demand kind `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    File(PathBuf),
    Generate(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub graph: GraphSource,
    pub schemes: Vec<Scheme>,
    pub demands: DemandKind,
    pub seed: u64,
    pub samples: usize,
    pub arity: usize,
    pub assert_bounds: bool,
    pub assert_max_ratio: Option<f64>,
}

impl Config {
    pub fn new(graph: GraphSource) -> Self {
        Config {
            graph,
            schemes: vec![Scheme::Reference],
            demands: DemandKind::Permutation,
            seed: 1,
            samples: 1000,
            arity: 2,
            assert_bounds: true,
            assert_max_ratio: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut values: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ExperimentError::Config { line: i + 1, msg };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let key = k.trim().to_string();
            if values
                .insert(key.clone(), (i + 1, v.trim().to_string()))
                .is_some()
            {
                return Err(err(format!("duplicate key `{key}`")));
            }
        }
        let graph = match (values.remove("graph"), values.remove("generate")) {
            (Some((_, p)), None) => GraphSource::File(p.into()),
            (None, Some((_, g))) => GraphSource::Generate(g),
            _ => {
                return Err(ExperimentError::Invalid(
                    "exactly one of `graph` and `generate` is required".into(),
                ))
            }
        };
        let mut cfg = Config::new(graph);
        for (key, (line, v)) in values {
            let err = |msg: String| ExperimentError::Config { line, msg };
            let num = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| err(format!("`{key}` needs an integer, got `{v}`")))
            };
            match key.as_str() {
                "schemes" => {
                    cfg.schemes = v
                        .split(',')
                        .map(|s| s.trim().parse())
                        .collect::<Result<_, _>>()
                        .map_err(err)?;
                }
                "demands" => cfg.demands = v.parse().map_err(err)?,
                "seed" => cfg.seed = num(&v)?,
                "samples" => cfg.samples = num(&v)? as usize,
                "arity" => cfg.arity = num(&v)? as usize,
                "assert_bounds" => {
                    cfg.assert_bounds = v
                        .parse()
                        .map_err(|_| err(format!("`{key}` needs true or false")))?;
                }
                "assert_max_ratio" => {
                    cfg.assert_max_ratio = Some(
                        v.parse()
                            .map_err(|_| err(format!("`{key}` needs a number")))?,
                    );
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        if cfg.arity < 2 {
            return Err(ExperimentError::Invalid("arity must be at least 2".into()));
        }
        if cfg.samples == 0 {
            return Err(ExperimentError::Invalid("samples must be positive".into()));
        }
        Ok(cfg)
    }
}

/// Random stream ids under the master seed.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    Graph = 0,
    Tree = 1,
    Demands = 2,
    Hypercube = 3,
    Routing = 4,
}

/// First word of stream `stream` of a ChaCha8 generator keyed by `master`.
pub fn derive_seed(master: u64, stream: Stream) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream as u64);
    rng.next_u64()
}

/// Demand matrix of the given battery kind. Permutations are random cyclic
/// shifts (every vertex sends one unit, none to itself); uniform pairs add
/// one unit to `k` random ordered pairs; gravity puts `deg(u) deg(v)` on
/// every unordered pair `u < v`, directed from `u` to `v`.
pub fn demand_battery(
    kind: &DemandKind,
    g: &CapacitatedGraph,
    seed: u64,
) -> Result<DemandMatrix, ExperimentError> {
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = DemandMatrix::new();
    match kind {
        DemandKind::Permutation => {
            // Sattolo's algorithm gives a single n-cycle
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..i);
                perm.swap(i, j);
            }
            if n > 1 {
                for (s, &t) in perm.iter().enumerate() {
                    d.set(s, t, 1.0)?;
                }
            }
        }
        DemandKind::UniformPairs { k } => {
            if n < 2 && *k > 0 {
                return Err(ExperimentError::Invalid(
                    "uniform pairs need at least two vertices".into(),
                ));
            }
            for _ in 0..*k {
                let s = rng.gen_range(0..n);
                let t = (s + rng.gen_range(1..n)) % n;
                d.add(s, t, 1.0)?;
            }
        }
        DemandKind::Gravity => {
            for u in 0..n {
                for v in u + 1..n {
                    d.set(u, v, (g.degree(u) * g.degree(v)) as f64)?;
                }
            }
        }
        DemandKind::File { path } => {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            d = DemandMatrix::parse(&text)?;
            d.validate_for(n)?;
        }
    }
    Ok(d)
}

pub fn load_graph(source: &GraphSource, seed: u64) -> Result<CapacitatedGraph, ExperimentError> {
    match source {
        GraphSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            Ok(parse_graph(&text)?)
        }
        GraphSource::Generate(spec) => {
            let kind: GraphKind = spec.parse()?;
            Ok(generate_graph(&kind, derive_seed(seed, Stream::Graph))?)
        }
    }
}

/// Tree, certificate and derived quantities shared by all schemes.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: CapacitatedGraph,
    pub tree: DecompositionTree,
    pub certificate: CongestionCertificate,
}

pub fn prepare(g: CapacitatedGraph, arity: usize, seed: u64) -> Result<Prepared, ExperimentError> {
    let tree = build_tree(&g, arity, derive_seed(seed, Stream::Tree));
    let problems = audit_tree(&g, &tree);
    if !problems.is_empty() {
        return Err(ExperimentError::Invalid(format!(
            "tree audit failed: {}",
            problems.join("; ")
        )));
    }
    let certificate = certify_congestion(&g, &tree)?;
    Ok(Prepared {
        graph: g,
        tree,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub height: usize,
    pub degree: usize,
    pub clusters: usize,
    pub c_cert: f64,
    pub c_int: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandSummary {
    pub kind: DemandKind,
    pub pairs: usize,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub congestion: f64,
    pub max_load: f64,
    pub competitive_ratio: f64,
    /// Load bound of the scheme: `2 h C` for the reference backend,
    /// `2 h deg(T) C` for impl-a and `16 h d^2 C` for impl-b, each times
    /// `C_opt`, with `C` the certified congestion and `d` the largest cube
    /// dimension.
    pub bound: f64,
    pub max_table_bits: Option<usize>,
    pub label_bits: usize,
    pub header_bits: usize,
    /// impl-b only.
    pub max_cube_dimension: Option<u32>,
    /// impl-a only: total capacity doublings over all clusters.
    pub flow_doublings: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub generated_at: u64,
    pub config: Config,
    pub graph: GraphStats,
    pub tree: TreeSummary,
    pub demands: DemandSummary,
    pub c_opt: f64,
    pub results: Vec<SchemeResult>,
    pub assertions: Vec<Assertion>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

/// Everything a run produces before it is written out.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub report: ExperimentReport,
    pub loads: Vec<LoadReport>,
    pub tables: Vec<(Scheme, TableBits)>,
}

fn unix_time() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

pub fn run_experiment(cfg: &Config) -> Result<Experiment, ExperimentError> {
    let g = load_graph(&cfg.graph, cfg.seed)?;
    if cfg.schemes.contains(&Scheme::ImplB) && !g.is_uniform() {
        return Err(ImplBError::NonUniformCapacities {
            max: g.max_capacity(),
        }
        .into());
    }
    let demands = demand_battery(&cfg.demands, &g, derive_seed(cfg.seed, Stream::Demands))?;
    let prep = prepare(g, cfg.arity, cfg.seed)?;
    let (g, tree, cert) = (&prep.graph, &prep.tree, &prep.certificate);
    let c_opt = optimal_congestion(g, &demands)?;
    let c_int = cert.integral();
    let h = tree.height as f64;

    let labels = assign_labels(tree);
    let field = label_field_width(tree);
    let label_bits = labels.iter().map(|l| l.bit_len(field)).max().unwrap_or(0);
    let header_bits = if g.vertex_count() > 1 {
        RoutingHeader::new(&labels, tree, 0, 1)
            .encode(tree)
            .bit_len()
    } else {
        0
    };
    let route_seed = derive_seed(cfg.seed, Stream::Routing);

    let mut results = Vec::new();
    let mut loads = Vec::new();
    let mut tables = Vec::new();
    let mut assertions = Vec::new();
    for &scheme in &cfg.schemes {
        log::info!("routing {} pairs with {}", demands.len(), scheme.name());
        let route = |backend: &dyn SchemeBackend| {
            route_demands(g, tree, backend, &demands, cfg.samples, route_seed)
        };
        let (report, bits, bound, dim, doublings) = match scheme {
            Scheme::Reference => {
                let backend = ReferenceBackend::new(g, tree, cert);
                (route(&backend)?, None, 2.0 * h * cert.c * c_opt, None, None)
            }
            Scheme::ImplA => {
                let t = build_flow_tables(g, tree, c_int)?;
                let bound = 2.0 * h * tree.degree as f64 * cert.c * c_opt;
                (
                    route(&t)?,
                    Some(measure_table_bits_a(g, &t)),
                    bound,
                    None,
                    Some(t.total_doublings()),
                )
            }
            Scheme::ImplB => {
                let s = build_hypercube_scheme(
                    g,
                    tree,
                    c_int,
                    derive_seed(cfg.seed, Stream::Hypercube),
                )?;
                let d = s.max_dimension();
                let bound = 16.0 * h * (d as f64).powi(2) * cert.c * c_opt;
                (
                    route(&s)?,
                    Some(measure_table_bits_b(g, tree, &s)),
                    bound,
                    Some(d),
                    None,
                )
            }
        };
        let competitive_ratio = ratio(report.congestion, c_opt)?;
        let mut report = report;
        report.c_opt = Some(c_opt);
        report.competitive_ratio = Some(competitive_ratio);
        report.max_table_bits = bits.as_ref().map(|b| b.max);
        report.label_bits = Some(label_bits);
        report.header_bits = Some(header_bits);
        if cfg.assert_bounds {
            assertions.push(Assertion {
                name: format!("{}: load bound", scheme.name()),
                passed: report.congestion <= bound + 1e-9,
                detail: format!("congestion {:.6} vs bound {:.6}", report.congestion, bound),
            });
        }
        if let Some(max) = cfg.assert_max_ratio {
            assertions.push(Assertion {
                name: format!("{}: competitive ratio", scheme.name()),
                passed: competitive_ratio <= max,
                detail: format!("ratio {competitive_ratio:.6} vs limit {max}"),
            });
        }
        results.push(SchemeResult {
            scheme,
            congestion: report.congestion,
            max_load: report.max_load(),
            competitive_ratio,
            bound,
            max_table_bits: report.max_table_bits,
            label_bits,
            header_bits,
            max_cube_dimension: dim,
            flow_doublings: doublings,
        });
        if let Some(b) = bits {
            tables.push((scheme, b));
        }
        loads.push(report);
    }

    let report = ExperimentReport {
        generated_at: unix_time(),
        config: cfg.clone(),
        graph: g.stats(),
        tree: TreeSummary {
            height: tree.height,
            degree: tree.degree,
            clusters: tree.clusters.len(),
            c_cert: cert.c,
            c_int,
        },
        demands: DemandSummary {
            kind: cfg.demands.clone(),
            pairs: demands.len(),
            total: demands.total(),
        },
        c_opt,
        results,
        assertions,
    };
    Ok(Experiment {
        report,
        loads,
        tables,
    })
}

impl Experiment {
    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes")
    }

    pub fn loads_csv(&self) -> String {
        let mut out = String::from("scheme,edge,u,v,cap,load,std_error\n");
        for r in &self.loads {
            for e in &r.edges {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.scheme, e.edge, e.u, e.v, e.cap, e.load, e.std_error
                )
                .unwrap();
            }
        }
        out
    }

    pub fn tables_csv(&self) -> String {
        let mut out = String::from("scheme,vertex,bits\n");
        for (scheme, bits) in &self.tables {
            for (v, b) in bits.per_vertex.iter().enumerate() {
                writeln!(out, "{},{},{}", scheme.name(), v, b).unwrap();
            }
        }
        out
    }

    /// Writes `report.json`, `loads.csv` and `tables.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), ExperimentError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (name, body) in [
            ("report.json", self.report_json()),
            ("loads.csv", self.loads_csv()),
            ("tables.csv", self.tables_csv()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io_err(&path))?;
        }
        Ok(())
    }
}
