//! Minimum-congestion concurrent multicommodity flow as a linear program.
//!
//! Commodities are aggregated by source vertex: for every source `s` and
//! every directed arc of the induced subgraph there is one flow variable,
//! conservation holds per `(s, v)`, and one shared row per edge bounds the
//! total flow by `cap(e) * lambda`. The objective minimizes `lambda`.

use highs::{ColProblem, HighsModelStatus, Sense};
use serde::{Deserialize, Serialize};

use super::FlowError;
use crate::graph::{CapacitatedGraph, DemandMatrix, EdgeId, VertexId};

/// Flow of all commodities that share one source. `forward[j]` runs from
/// `edge.u` to `edge.v` of the `j`-th edge in [`CmcfSolution::edges`],
/// `backward[j]` the other way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceFlow {
    pub source: VertexId,
    pub sinks: Vec<(VertexId, f64)>,
    pub forward: Vec<f64>,
    pub backward: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmcfSolution {
    /// Restriction set, sorted.
    pub vertices: Vec<VertexId>,
    /// Edges of the induced subgraph.
    pub edges: Vec<EdgeId>,
    /// Max over edges of total flow / capacity, recomputed from the flows.
    pub congestion: f64,
    /// Optimal objective reported by the LP solver.
    pub lp_objective: f64,
    pub commodities: Vec<SourceFlow>,
}

impl CmcfSolution {
    /// Total flow per edge of [`Self::edges`].
    pub fn edge_loads(&self) -> Vec<f64> {
        let mut load = vec![0.0; self.edges.len()];
        for c in &self.commodities {
            for (j, l) in load.iter_mut().enumerate() {
                *l += c.forward[j] + c.backward[j];
            }
        }
        load
    }

    pub fn recompute_congestion(&self, g: &CapacitatedGraph) -> f64 {
        self.edge_loads()
            .iter()
            .zip(&self.edges)
            .map(|(l, &e)| l / g.edge(e).cap as f64)
            .fold(0.0, f64::max)
    }

    /// Largest absolute conservation violation over all commodities.
    pub fn conservation_residual(&self, g: &CapacitatedGraph) -> f64 {
        let pos = |v: VertexId| {
            self.vertices
                .binary_search(&v)
                .expect("vertex in restriction")
        };
        let mut worst: f64 = 0.0;
        for c in &self.commodities {
            let mut bal = vec![0.0; self.vertices.len()];
            for (j, &e) in self.edges.iter().enumerate() {
                let edge = g.edge(e);
                let net = c.forward[j] - c.backward[j];
                bal[pos(edge.u)] += net;
                bal[pos(edge.v)] -= net;
            }
            for &(t, d) in &c.sinks {
                bal[pos(c.source)] -= d;
                bal[pos(t)] += d;
            }
            worst = bal.iter().fold(worst, |w, b| w.max(b.abs()));
        }
        worst
    }
}

/// Solves the min-congestion CMCF of `demands` inside the subgraph induced by
/// `restrict_to`. Zero demand yields congestion 0 without calling the solver.
pub fn solve_cmcf_min_congestion(
    g: &CapacitatedGraph,
    demands: &DemandMatrix,
    restrict_to: &[VertexId],
) -> Result<CmcfSolution, FlowError> {
    solve(g, demands, restrict_to, false)
}

/// Like [`solve_cmcf_min_congestion`], followed by a second solve that keeps
/// the optimal congestion and minimizes total flow volume, so the solution
/// uses short paths.
pub fn solve_cmcf_short_paths(
    g: &CapacitatedGraph,
    demands: &DemandMatrix,
    restrict_to: &[VertexId],
) -> Result<CmcfSolution, FlowError> {
    solve(g, demands, restrict_to, true)
}

fn solve(
    g: &CapacitatedGraph,
    demands: &DemandMatrix,
    restrict_to: &[VertexId],
    short_paths: bool,
) -> Result<CmcfSolution, FlowError> {
    let mut vertices = restrict_to.to_vec();
    vertices.sort_unstable();
    vertices.dedup();
    let mut local = vec![usize::MAX; g.vertex_count()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = i;
    }
    for (s, t, _) in demands.iter() {
        if s >= local.len() || t >= local.len() || local[s] == usize::MAX || local[t] == usize::MAX
        {
            return Err(FlowError::DemandOutsideRestriction { s, t });
        }
    }
    if !g.induced_connected(&vertices) {
        return Err(FlowError::Disconnected);
    }
    let edges: Vec<EdgeId> = (0..g.edge_count())
        .filter(|&e| {
            let edge = g.edge(e);
            local[edge.u] != usize::MAX && local[edge.v] != usize::MAX
        })
        .collect();

    let mut commodities: Vec<SourceFlow> = Vec::new();
    for (s, t, d) in demands.iter() {
        match commodities.last_mut() {
            Some(c) if c.source == s => c.sinks.push((t, d)),
            _ => commodities.push(SourceFlow {
                source: s,
                sinks: vec![(t, d)],
                forward: vec![0.0; edges.len()],
                backward: vec![0.0; edges.len()],
            }),
        }
    }
    if commodities.is_empty() {
        return Ok(CmcfSolution {
            vertices,
            edges,
            congestion: 0.0,
            lp_objective: 0.0,
            commodities,
        });
    }

    let solve_with = |objective: Objective| {
        let build = || build_problem(g, &local, vertices.len(), &edges, &commodities, objective);
        run_highs(build(), "ipm").or_else(|err| {
            log::warn!("interior point failed on CMCF instance ({err}); retrying with simplex");
            run_highs(build(), "simplex")
        })
    };
    let (objective, mut columns) = solve_with(Objective::Congestion)?;
    if short_paths {
        let cap = objective * (1.0 + 1e-7) + 1e-9;
        columns = solve_with(Objective::Volume(cap))?.1;
    }

    let ne = edges.len();
    for (ci, c) in commodities.iter_mut().enumerate() {
        for j in 0..ne {
            c.forward[j] = columns[ci * 2 * ne + 2 * j].max(0.0);
            c.backward[j] = columns[ci * 2 * ne + 2 * j + 1].max(0.0);
        }
    }
    let mut sol = CmcfSolution {
        vertices,
        edges,
        congestion: 0.0,
        lp_objective: objective,
        commodities,
    };
    sol.congestion = sol.recompute_congestion(g);
    Ok(sol)
}

fn run_highs(pb: ColProblem, solver: &str) -> Result<(f64, Vec<f64>), FlowError> {
    let mut model = pb.optimise(Sense::Minimise);
    model.make_quiet();
    model.set_option("solver", solver);
    model.set_option("parallel", "off");
    model.set_option("primal_feasibility_tolerance", 1e-10);
    model.set_option("dual_feasibility_tolerance", 1e-10);
    let solved = model
        .try_solve()
        .map_err(|s| FlowError::Solver(format!("{s:?}")))?;
    match solved.status() {
        HighsModelStatus::Optimal => {
            let sol = solved.get_solution();
            Ok((solved.objective_value(), sol.columns().to_vec()))
        }
        other => Err(FlowError::Solver(format!("model status {other:?}"))),
    }
}

#[derive(Debug, Clone, Copy)]
enum Objective {
    Congestion,
    /// Total flow, with congestion capped at the given value.
    Volume(f64),
}

fn build_problem(
    g: &CapacitatedGraph,
    local: &[usize],
    k: usize,
    edges: &[EdgeId],
    commodities: &[SourceFlow],
    objective: Objective,
) -> ColProblem {
    let (flow_cost, lambda_cost, lambda_max) = match objective {
        Objective::Congestion => (0.0, 1.0, f64::INFINITY),
        Objective::Volume(cap) => (1.0, 0.0, cap),
    };
    let mut pb = ColProblem::default();
    let mut conservation = Vec::with_capacity(commodities.len() * k);
    for c in commodities {
        let mut supply = vec![0.0; k];
        for &(t, d) in &c.sinks {
            supply[local[c.source]] += d;
            supply[local[t]] -= d;
        }
        for b in supply {
            conservation.push(pb.add_row(b..=b));
        }
    }
    let capacity: Vec<_> = edges.iter().map(|_| pb.add_row(..=0.0)).collect();
    for ci in 0..commodities.len() {
        let row = |v: VertexId| conservation[ci * k + local[v]];
        for (j, &e) in edges.iter().enumerate() {
            let edge = g.edge(e);
            let (ru, rv) = (row(edge.u), row(edge.v));
            pb.add_column(
                flow_cost,
                0.0..,
                [(ru, 1.0), (rv, -1.0), (capacity[j], 1.0)],
            );
            pb.add_column(
                flow_cost,
                0.0..,
                [(rv, 1.0), (ru, -1.0), (capacity[j], 1.0)],
            );
        }
    }
    let lambda: Vec<_> = edges
        .iter()
        .enumerate()
        .map(|(j, &e)| (capacity[j], -(g.edge(e).cap as f64)))
        .collect();
    pb.add_column(lambda_cost, 0.0..=lambda_max, lambda);
    pb
}
