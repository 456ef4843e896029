use std::collections::VecDeque;

use super::paths::{FlowArc, FlowAssignment};
use super::FlowError;

#[derive(Debug, Clone, Copy)]
struct NetArc {
    from: usize,
    to: usize,
    cap: u64,
    undirected: bool,
}

/// Network with integer capacities for single-commodity max-flow. Arc ids are
/// insertion indices and are carried through to [`FlowArc::arc`].
#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    nodes: usize,
    arcs: Vec<NetArc>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            nodes,
            arcs: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Directed arc `from -> to`.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: u64) -> usize {
        self.push(from, to, cap, false)
    }

    /// Undirected edge usable in either direction up to `cap`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: u64) -> usize {
        self.push(u, v, cap, true)
    }

    fn push(&mut self, from: usize, to: usize, cap: u64, undirected: bool) -> usize {
        assert!(
            from < self.nodes && to < self.nodes,
            "arc endpoint out of range"
        );
        self.arcs.push(NetArc {
            from,
            to,
            cap,
            undirected,
        });
        self.arcs.len() - 1
    }

    pub fn capacity(&self, arc: usize) -> u64 {
        self.arcs[arc].cap
    }
}

struct Residual {
    head: Vec<usize>,
    cap: Vec<u64>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(net: &FlowNetwork) -> Self {
        let mut r = Residual {
            head: Vec::with_capacity(2 * net.arcs.len()),
            cap: Vec::with_capacity(2 * net.arcs.len()),
            adj: vec![Vec::new(); net.nodes],
        };
        for a in &net.arcs {
            r.adj[a.from].push(r.head.len());
            r.head.push(a.to);
            r.cap.push(a.cap);
            r.adj[a.to].push(r.head.len());
            r.head.push(a.from);
            r.cap.push(if a.undirected { a.cap } else { 0 });
        }
        r
    }

    fn levels(&self, s: usize) -> Vec<u32> {
        let mut level = vec![u32::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &id in &self.adj[x] {
                let y = self.head[id];
                if self.cap[id] > 0 && level[y] == u32::MAX {
                    level[y] = level[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        level
    }

    /// Blocking-flow augmentation along one level-graph path (iterative DFS).
    fn augment(&mut self, s: usize, t: usize, level: &[u32], iter: &mut [usize]) -> u64 {
        let mut stack: Vec<usize> = Vec::new();
        let mut x = s;
        loop {
            if x == t {
                let pushed = stack.iter().map(|&id| self.cap[id]).min().unwrap_or(0);
                for &id in &stack {
                    self.cap[id] -= pushed;
                    self.cap[id ^ 1] += pushed;
                }
                return pushed;
            }
            let mut advanced = false;
            while iter[x] < self.adj[x].len() {
                let id = self.adj[x][iter[x]];
                let y = self.head[id];
                if self.cap[id] > 0 && level[y] == level[x] + 1 {
                    stack.push(id);
                    x = y;
                    advanced = true;
                    break;
                }
                iter[x] += 1;
            }
            if !advanced {
                match stack.pop() {
                    Some(id) => {
                        x = self.head[id ^ 1];
                        iter[x] += 1;
                    }
                    None => return 0,
                }
            }
        }
    }
}

/// Maximum `s`-`t` flow by Dinic's algorithm. All arithmetic is on `u64`, so
/// the result is integral. Each undirected edge reports its net flow in the
/// direction it is used.
pub fn max_flow_integral(
    net: &FlowNetwork,
    s: usize,
    t: usize,
) -> Result<FlowAssignment, FlowError> {
    if s == t {
        return Err(FlowError::SameTerminals(s));
    }
    let mut res = Residual::new(net);
    let mut value = 0u64;
    loop {
        let level = res.levels(s);
        if level[t] == u32::MAX {
            break;
        }
        let mut iter = vec![0usize; net.nodes];
        loop {
            let pushed = res.augment(s, t, &level, &mut iter);
            if pushed == 0 {
                break;
            }
            value += pushed;
        }
    }
    let mut arcs = Vec::new();
    for (i, a) in net.arcs.iter().enumerate() {
        let residual = res.cap[2 * i];
        if residual <= a.cap {
            let f = a.cap - residual;
            if f > 0 {
                arcs.push(FlowArc {
                    from: a.from,
                    to: a.to,
                    flow: f,
                    arc: i,
                });
            }
        } else {
            // only undirected edges can gain residual capacity above cap
            arcs.push(FlowArc {
                from: a.to,
                to: a.from,
                flow: residual - a.cap,
                arc: i,
            });
        }
    }
    Ok(FlowAssignment {
        nodes: net.nodes,
        source: s,
        sink: t,
        value,
        arcs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimum cut by enumerating every s-side vertex subset.
    fn brute_min_cut(net: &FlowNetwork, s: usize, t: usize) -> u64 {
        let n = net.node_count();
        let mut best = u64::MAX;
        for mask in 0u32..(1 << n) {
            if mask & (1 << s) == 0 || mask & (1 << t) != 0 {
                continue;
            }
            let side = |v: usize| mask & (1 << v) != 0;
            let cut: u64 = net
                .arcs
                .iter()
                .map(|a| {
                    let fwd = if side(a.from) && !side(a.to) {
                        a.cap
                    } else {
                        0
                    };
                    let bwd = if a.undirected && side(a.to) && !side(a.from) {
                        a.cap
                    } else {
                        0
                    };
                    fwd + bwd
                })
                .sum();
            best = best.min(cut);
        }
        best
    }

    #[test]
    fn single_edge() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, 3);
        assert_eq!(max_flow_integral(&net, 0, 1).unwrap().value, 3);
    }

    #[test]
    fn two_disjoint_paths_split_integrally() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 2);
        net.add_arc(1, 3, 2);
        net.add_arc(0, 2, 1);
        net.add_arc(2, 3, 1);
        let f = max_flow_integral(&net, 0, 3).unwrap();
        assert_eq!(f.value, 3);
        let on = |arc| f.arcs.iter().find(|a| a.arc == arc).map_or(0, |a| a.flow);
        assert_eq!((on(0), on(2)), (2, 1));
        assert!(f.is_conserving());
    }

    #[test]
    fn bottleneck() {
        let mut net = FlowNetwork::new(3);
        net.add_arc(0, 1, 5);
        net.add_arc(1, 2, 2);
        assert_eq!(max_flow_integral(&net, 0, 2).unwrap().value, 2);
    }

    #[test]
    fn same_terminals_rejected() {
        let net = FlowNetwork::new(2);
        assert_eq!(
            max_flow_integral(&net, 1, 1),
            Err(FlowError::SameTerminals(1))
        );
    }

    #[test]
    fn undirected_edges_carry_flow_backwards() {
        let mut net = FlowNetwork::new(3);
        net.add_arc(0, 2, 4);
        net.add_edge(1, 2, 3);
        net.add_arc(1, 0, 9);
        // only path 0 -> 2 -> 1 uses the undirected edge against its orientation
        let f = max_flow_integral(&net, 0, 1).unwrap();
        assert_eq!(f.value, 3);
        let a = f.arcs.iter().find(|a| a.arc == 1).unwrap();
        assert_eq!((a.from, a.to, a.flow), (2, 1, 3));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn value_equals_min_cut_and_flows_are_integral(
                arcs in proptest::collection::vec((0usize..6, 0usize..6, 0u64..7, any::<bool>()), 1..14)
            ) {
                let mut net = FlowNetwork::new(6);
                for (u, v, c, und) in arcs {
                    if u != v {
                        if und { net.add_edge(u, v, c); } else { net.add_arc(u, v, c); }
                    }
                }
                let f = max_flow_integral(&net, 0, 5).unwrap();
                prop_assert_eq!(f.value, brute_min_cut(&net, 0, 5));
                prop_assert!(f.is_conserving());
                for a in &f.arcs {
                    prop_assert!(a.flow <= net.capacity(a.arc));
                }
            }
        }
    }
}
