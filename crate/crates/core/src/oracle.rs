//! Optimal congestion of a demand matrix, by LP and by brute force.

use thiserror::Error;

use crate::flow::{solve_cmcf_min_congestion, FlowError};
use crate::graph::{CapacitatedGraph, DemandMatrix, EdgeId, VertexId};
use crate::routing::LoadReport;

pub const BRUTE_MAX_VERTICES: usize = 6;
pub const BRUTE_MAX_COMMODITIES: usize = 3;
const GRID_BUDGET: usize = 200_000;
const FINEST_STEP: f64 = 1e-5;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("instance too large for brute force ({vertices} vertices, {commodities} commodities)")]
    TooLarge { vertices: usize, commodities: usize },
    #[error("congestion {congestion} against an optimum of 0")]
    Inconsistent { congestion: f64 },
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Minimum fractional congestion over the whole graph.
pub fn optimal_congestion(
    g: &CapacitatedGraph,
    demands: &DemandMatrix,
) -> Result<f64, OracleError> {
    let all: Vec<VertexId> = (0..g.vertex_count()).collect();
    Ok(solve_cmcf_min_congestion(g, demands, &all)?.congestion)
}

/// `congestion / c_opt`, with `0 / 0 = 1`.
pub fn competitive_ratio(report: &LoadReport, c_opt: f64) -> Result<f64, OracleError> {
    ratio(report.congestion, c_opt)
}

pub fn ratio(congestion: f64, c_opt: f64) -> Result<f64, OracleError> {
    if c_opt > 0.0 {
        Ok(congestion / c_opt)
    } else if congestion == 0.0 {
        Ok(1.0)
    } else {
        Err(OracleError::Inconsistent { congestion })
    }
}

fn simple_paths(g: &CapacitatedGraph, s: VertexId, t: VertexId) -> Vec<Vec<EdgeId>> {
    fn walk(
        g: &CapacitatedGraph,
        v: VertexId,
        t: VertexId,
        seen: &mut Vec<bool>,
        edges: &mut Vec<EdgeId>,
        out: &mut Vec<Vec<EdgeId>>,
    ) {
        if v == t {
            out.push(edges.clone());
            return;
        }
        for &(u, e) in g.neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                edges.push(e);
                walk(g, u, t, seen, edges, out);
                edges.pop();
                seen[u] = false;
            }
        }
    }
    let mut seen = vec![false; g.vertex_count()];
    seen[s] = true;
    let mut out = Vec::new();
    walk(g, s, t, &mut seen, &mut Vec::new(), &mut out);
    out
}

struct Instance {
    caps: Vec<f64>,
    /// Per commodity: demand and its simple paths.
    commodities: Vec<(f64, Vec<Vec<EdgeId>>)>,
}

impl Instance {
    /// Congestion when commodity `k` sends share `split[k][j]` on path `j`.
    fn congestion(&self, split: &[Vec<f64>]) -> f64 {
        let mut load = vec![0.0; self.caps.len()];
        for ((d, paths), shares) in self.commodities.iter().zip(split) {
            for (p, &x) in paths.iter().zip(shares) {
                for &e in p {
                    load[e] += d * x;
                }
            }
        }
        load.iter()
            .zip(&self.caps)
            .map(|(l, c)| l / c)
            .fold(0.0, f64::max)
    }
}

fn compositions(units: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![units]];
    }
    let mut out = Vec::new();
    for first in 0..=units {
        for mut rest in compositions(units - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Minimum congestion over splits of each commodity across its simple
/// paths: exhaustive grid over the product of split simplices at the finest
/// resolution the budget allows, then a local search that shifts share
/// between two paths of one or two commodities at once, halving the step
/// down to `1e-5`.
pub fn brute_force_congestion(
    g: &CapacitatedGraph,
    demands: &DemandMatrix,
) -> Result<f64, OracleError> {
    let pairs: Vec<(VertexId, VertexId, f64)> =
        demands.iter().filter(|&(_, _, d)| d > 0.0).collect();
    if g.vertex_count() > BRUTE_MAX_VERTICES || pairs.len() > BRUTE_MAX_COMMODITIES {
        return Err(OracleError::TooLarge {
            vertices: g.vertex_count(),
            commodities: pairs.len(),
        });
    }
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let inst = Instance {
        caps: g.edges().iter().map(|e| e.cap as f64).collect(),
        commodities: pairs
            .iter()
            .map(|&(s, t, d)| {
                let paths = simple_paths(g, s, t);
                if paths.is_empty() {
                    Err(FlowError::Disconnected)
                } else {
                    Ok((d, paths))
                }
            })
            .collect::<Result<_, _>>()?,
    };
    let arity: Vec<usize> = inst.commodities.iter().map(|(_, p)| p.len()).collect();
    let points = |units: usize| -> f64 {
        arity
            .iter()
            .map(|&k| binomial(units + k - 1, k - 1))
            .product()
    };
    let mut units = 1;
    while points(units * 2) <= GRID_BUDGET as f64 && units < 1024 {
        units *= 2;
    }

    let grids: Vec<Vec<Vec<usize>>> = arity.iter().map(|&k| compositions(units, k)).collect();
    let mut best = f64::INFINITY;
    let mut best_split: Vec<Vec<f64>> = Vec::new();
    let mut index = vec![0usize; grids.len()];
    loop {
        let split: Vec<Vec<f64>> = index
            .iter()
            .zip(&grids)
            .map(|(&i, grid)| grid[i].iter().map(|&u| u as f64 / units as f64).collect())
            .collect();
        let c = inst.congestion(&split);
        if c < best {
            best = c;
            best_split = split;
        }
        let mut k = 0;
        while k < index.len() {
            index[k] += 1;
            if index[k] < grids[k].len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
        if k == index.len() {
            break;
        }
    }

    let moves: Vec<(usize, usize, usize)> = arity
        .iter()
        .enumerate()
        .flat_map(|(c, &k)| {
            (0..k).flat_map(move |a| (0..k).filter(move |&b| b != a).map(move |b| (c, a, b)))
        })
        .collect();
    let apply =
        |split: &mut Vec<Vec<f64>>, &(c, a, b): &(usize, usize, usize), step: f64| -> bool {
            let amount = step.min(split[c][a]);
            if amount <= 0.0 {
                return false;
            }
            split[c][a] -= amount;
            split[c][b] += amount;
            true
        };
    let mut step = 1.0 / units as f64;
    while step >= FINEST_STEP {
        let mut improved = true;
        while improved {
            improved = false;
            for (i, m) in moves.iter().enumerate() {
                for m2 in std::iter::once(None)
                    .chain(moves[i + 1..].iter().filter(|m2| m2.0 != m.0).map(Some))
                {
                    let mut split = best_split.clone();
                    if !apply(&mut split, m, step) {
                        continue;
                    }
                    if let Some(m2) = m2 {
                        if !apply(&mut split, m2, step) {
                            continue;
                        }
                    }
                    let c = inst.congestion(&split);
                    if c < best - 1e-12 {
                        best = c;
                        best_split = split;
                        improved = true;
                    }
                }
            }
        }
        step /= 2.0;
    }
    Ok(best)
}
