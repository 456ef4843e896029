use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use obroute::decomposition::audit_tree;
use obroute::experiment::{
    load_graph, prepare, run_experiment, Config, DemandKind, ExperimentReport, GraphSource, Scheme,
};
use obroute::impl_a::build_flow_tables;
use obroute::impl_b::{audit_embedding, audit_rerand, build_hypercube_scheme};

#[derive(Parser)]
#[command(
    name = "obroute",
    version,
    about = "Compact oblivious routing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the decomposition tree and its congestion certificate.
    Build(BuildArgs),
    /// Route a demand battery with one or more schemes and write reports.
    Route(RouteArgs),
    /// Check tree, flow-table and hypercube invariants.
    Audit(BuildArgs),
    /// Summarize a report written by `route`.
    Report {
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct GraphArgs {
    /// Graph file (`n m` header, then `u v cap` lines).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Generator spec: grid:RxC[:lo-hi], torus:RxC, hypercube:D, random_regular:N:DEG.
    #[arg(long)]
    generate: Option<String>,
}

impl GraphArgs {
    fn source(&self) -> Option<GraphSource> {
        match (&self.graph, &self.generate) {
            (Some(p), _) => Some(GraphSource::File(p.clone())),
            (_, Some(g)) => Some(GraphSource::Generate(g.clone())),
            _ => None,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value_t = 2)]
    arity: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the summary as JSON here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct RouteArgs {
    /// Flat key = value config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    /// reference, impl-a or impl-b; repeatable.
    #[arg(long = "scheme")]
    schemes: Vec<Scheme>,
    /// permutation, uniform_pairs:K, gravity or file:PATH.
    #[arg(long)]
    demands: Option<DemandKind>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    arity: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

fn route_config(args: &RouteArgs) -> Result<Config> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let mut cfg = Config::parse(&text)?;
            if let (GraphSource::File(p), Some(dir)) = (&cfg.graph, path.parent()) {
                cfg.graph = GraphSource::File(dir.join(p));
            }
            cfg
        }
        None => match args.graph.source() {
            Some(src) => Config::new(src),
            None => bail!("either --config or one of --graph/--generate is required"),
        },
    };
    if let Some(src) = args.graph.source() {
        cfg.graph = src;
    }
    if !args.schemes.is_empty() {
        cfg.schemes = args.schemes.clone();
    }
    if let Some(d) = &args.demands {
        cfg.demands = d.clone();
    }
    if let Some(s) = args.samples {
        cfg.samples = s;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(a) = args.arity {
        cfg.arity = a;
    }
    Ok(cfg)
}

fn build(args: &BuildArgs) -> Result<ExitCode> {
    let src = args
        .graph
        .source()
        .context("one of --graph/--generate is required")?;
    let g = load_graph(&src, args.seed)?;
    let prep = prepare(g, args.arity, args.seed)?;
    let summary = serde_json::json!({
        "graph": prep.graph.stats(),
        "height": prep.tree.height,
        "degree": prep.tree.degree,
        "clusters": prep.tree.clusters.len(),
        "c_cert": prep.certificate.c,
        "c_int": prep.certificate.integral(),
        "per_cluster": prep.certificate.per_cluster,
    });
    let text = serde_json::to_string_pretty(&summary)?;
    println!("{text}");
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("build.json"), text)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn print_summary(r: &ExperimentReport) {
    println!(
        "n={} m={} h={} deg(T)={} C_cert={:.4} C_opt={:.4}",
        r.graph.n, r.graph.m, r.tree.height, r.tree.degree, r.tree.c_cert, r.c_opt
    );
    for s in &r.results {
        let bits = s.max_table_bits.map_or("-".to_string(), |b| b.to_string());
        println!(
            "{:<10} congestion {:.4}  ratio {:.4}  bound {:.4}  table bits {}  label {}  header {}",
            s.scheme.name(),
            s.congestion,
            s.competitive_ratio,
            s.bound,
            bits,
            s.label_bits,
            s.header_bits
        );
    }
    for a in &r.assertions {
        println!(
            "{} {}: {}",
            if a.passed { "PASS" } else { "FAIL" },
            a.name,
            a.detail
        );
    }
}

fn route(args: &RouteArgs) -> Result<ExitCode> {
    let cfg = route_config(args)?;
    let exp = run_experiment(&cfg)?;
    exp.write(&args.out_dir)?;
    print_summary(&exp.report);
    Ok(if exp.report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn audit(args: &BuildArgs) -> Result<ExitCode> {
    let src = args
        .graph
        .source()
        .context("one of --graph/--generate is required")?;
    let g = load_graph(&src, args.seed)?;
    let prep = prepare(g, args.arity, args.seed)?;
    let (g, tree) = (&prep.graph, &prep.tree);
    let mut problems = audit_tree(g, tree);
    println!(
        "tree: {} clusters, h = {}",
        tree.clusters.len(),
        tree.height
    );
    let tables = build_flow_tables(g, tree, prep.certificate.integral())?;
    println!(
        "impl-a: flows saturate, {} capacity doublings",
        tables.total_doublings()
    );
    if g.is_uniform() {
        let scheme = build_hypercube_scheme(g, tree, prep.certificate.integral(), args.seed)?;
        for c in &tree.clusters {
            if let Some(cc) = scheme.cluster(c.id) {
                problems.extend(audit_embedding(tree, c.id, &cc.embedding));
                problems.extend(audit_rerand(tree, c.id, &cc.rerand));
            }
        }
        println!("impl-b: largest cube dimension {}", scheme.max_dimension());
    } else {
        println!("impl-b: skipped (capacities not uniform)");
    }
    for p in &problems {
        println!("VIOLATION {p}");
    }
    println!("{} violations", problems.len());
    Ok(if problems.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn report(out_dir: &Path) -> Result<ExitCode> {
    let path = out_dir.join("report.json");
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let r: ExperimentReport =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    print_summary(&r);
    Ok(if r.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(a) => build(a),
        Command::Route(a) => route(a),
        Command::Audit(a) => audit(a),
        Command::Report { out_dir } => report(out_dir),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
