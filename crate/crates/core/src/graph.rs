//! A bare directed graph with integer transit times. Both the physical
//! network and the auxiliary network are expanded in time through this type.

use crate::instance::{ArcId, Instance, NodeId, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatArc {
    pub tail: NodeId,
    pub head: NodeId,
    pub transit: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatGraph {
    n_nodes: usize,
    arcs: Vec<FlatArc>,
    out: Vec<Vec<ArcId>>,
    inc: Vec<Vec<ArcId>>,
}

impl FlatGraph {
    pub fn new(n_nodes: usize, arcs: Vec<FlatArc>) -> FlatGraph {
        let mut out = vec![Vec::new(); n_nodes];
        let mut inc = vec![Vec::new(); n_nodes];
        for (a, arc) in arcs.iter().enumerate() {
            assert!(arc.tail < n_nodes && arc.head < n_nodes, "arc {a} out of range");
            assert!(arc.transit >= 1, "arc {a} has zero transit");
            out[arc.tail].push(a);
            inc[arc.head].push(a);
        }
        FlatGraph { n_nodes, arcs, out, inc }
    }

    pub fn of_instance(inst: &Instance) -> FlatGraph {
        let arcs = inst
            .arcs
            .iter()
            .map(|a| FlatArc {
                tail: a.tail,
                head: a.head,
                transit: a.transit,
            })
            .collect();
        FlatGraph::new(inst.nodes, arcs)
    }

    pub fn num_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc(&self, a: ArcId) -> &FlatArc {
        &self.arcs[a]
    }

    pub fn arcs(&self) -> &[FlatArc] {
        &self.arcs
    }

    pub fn out_arcs(&self, v: NodeId) -> &[ArcId] {
        &self.out[v]
    }

    pub fn in_arcs(&self, v: NodeId) -> &[ArcId] {
        &self.inc[v]
    }

    /// True when `arcs` chain head to tail starting at `start`.
    pub fn is_walk(&self, start: NodeId, arcs: &[ArcId]) -> bool {
        let mut at = start;
        for &a in arcs {
            if a >= self.arcs.len() || self.arcs[a].tail != at {
                return false;
            }
            at = self.arcs[a].head;
        }
        true
    }

    pub fn walk_end(&self, start: NodeId, arcs: &[ArcId]) -> NodeId {
        arcs.last().map_or(start, |&a| self.arcs[a].head)
    }
}

/// The part of a graph one commodity may use. A commodity normally has a
/// single source node; several appear only when their balance rows are to
/// be merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommodityNet {
    pub nodes: Vec<NodeId>,
    pub arcs: Vec<ArcId>,
    pub sources: Vec<NodeId>,
    pub sink: NodeId,
}

impl CommodityNet {
    /// The designated flat network of commodity `k`.
    pub fn flat(inst: &Instance, k: usize) -> CommodityNet {
        let c = &inst.commodities[k];
        let mut nodes: Vec<NodeId> = inst.commodity_nodes(k).into_iter().collect();
        for v in [c.origin, c.dest] {
            if let Err(p) = nodes.binary_search(&v) {
                nodes.insert(p, v);
            }
        }
        let mut arcs = inst.commodity_arcs(k);
        arcs.sort_unstable();
        CommodityNet {
            nodes,
            arcs,
            sources: vec![c.origin],
            sink: c.dest,
        }
    }
}
