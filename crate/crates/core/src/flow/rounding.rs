use rand::Rng;
use serde::{Deserialize, Serialize};

use super::paths::{FlowPath, PairPaths, PathDistribution};
use super::FlowError;
use crate::graph::VertexId;

/// A commodity shipping exactly one unit, already decomposed into weighted
/// flow-paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCommodity {
    pub source: VertexId,
    pub target: VertexId,
    pub flow: PathDistribution,
}

impl UnitCommodity {
    /// The `(source, target)` pair flow of a decomposed solution, normalized to
    /// one unit. Pairs with `source == target` get the trivial path.
    pub fn from_pair(table: &PairPaths, source: VertexId, target: VertexId) -> Option<Self> {
        if source == target {
            return Some(UnitCommodity {
                source,
                target,
                flow: PathDistribution {
                    paths: vec![FlowPath::trivial(source)],
                    weights: vec![1.0],
                },
            });
        }
        let dist = table.get(&(source, target))?;
        let total = dist.total();
        Some(UnitCommodity {
            source,
            target,
            flow: PathDistribution {
                paths: dist.paths.clone(),
                weights: dist.weights.iter().map(|w| w / total).collect(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundedPaths {
    /// Chosen path per commodity.
    pub paths: Vec<FlowPath>,
    /// Number of chosen paths using each edge.
    pub load: Vec<u32>,
    /// Fractional load per edge: sum over commodities of their flow.
    pub fractional: Vec<f64>,
    /// Max fractional edge load.
    pub mu: f64,
    pub max_load: u32,
}

/// Picks one flow-path per unit commodity with probability equal to its
/// weight, so each edge's expected load equals its fractional load.
pub fn round_paths<R: Rng + ?Sized>(
    commodities: &[UnitCommodity],
    edge_count: usize,
    rng: &mut R,
) -> Result<RoundedPaths, FlowError> {
    for (index, c) in commodities.iter().enumerate() {
        let value = c.flow.total();
        if (value - 1.0).abs() > 1e-9 {
            return Err(FlowError::NonUnitCommodity { index, value });
        }
    }
    let mut fractional = vec![0.0; edge_count];
    for c in commodities {
        for (p, &w) in c.flow.paths.iter().zip(&c.flow.weights) {
            for &e in &p.edges {
                fractional[e] += w;
            }
        }
    }
    let mut load = vec![0u32; edge_count];
    let paths: Vec<FlowPath> = commodities
        .iter()
        .map(|c| {
            let p = c.flow.sample(rng).clone();
            for &e in &p.edges {
                load[e] += 1;
            }
            p
        })
        .collect();
    Ok(RoundedPaths {
        paths,
        max_load: load.iter().copied().max().unwrap_or(0),
        mu: fractional.iter().copied().fold(0.0, f64::max),
        load,
        fractional,
    })
}
