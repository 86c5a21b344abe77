//! The auxiliary network: one copy of each node per part of its outgoing
//! arcs plus a terminal copy with no outgoing arcs. Copy 0 of every node is
//! the terminal copy; copy `i >= 1` departs along the arcs of part `i - 1`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expansion::{PartialNetwork, TimedArc, Trajectory};
use crate::graph::{CommodityNet, FlatArc, FlatGraph};
use crate::instance::{ArcId, Instance, NodeId, Time};
use crate::partition::ArcPartition;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuxError {
    #[error("commodity {k}: node {node} needs reduction (outgoing arcs missing or leaving the destination)")]
    Unreduced { k: usize, node: NodeId },
    #[error("commodity {k}: outgoing arcs at node {node} span several parts")]
    InvalidPartition { k: usize, node: NodeId },
    #[error("arc sequence is not a walk")]
    NotAWalk,
    #[error("auxiliary walk does not end at a terminal copy")]
    NotTerminal,
}

#[derive(Debug, Clone)]
pub struct AuxGraph {
    graph: FlatGraph,
    copies: Vec<Vec<NodeId>>,
    node_origin: Vec<(NodeId, usize)>,
    arc_flat: Vec<ArcId>,
    arc_base: Vec<usize>,
    part_copy: Vec<usize>,
}

impl AuxGraph {
    pub fn new(inst: &Instance, partition: &ArcPartition) -> AuxGraph {
        let mut copies = Vec::with_capacity(inst.nodes);
        let mut node_origin = Vec::new();
        for v in 0..inst.nodes {
            let ids: Vec<NodeId> = (0..=partition.num_parts(v)).map(|i| node_origin.len() + i).collect();
            for i in 0..ids.len() {
                node_origin.push((v, i));
            }
            copies.push(ids);
        }
        let part_copy: Vec<usize> = (0..inst.arcs.len()).map(|a| partition.part_of(a) + 1).collect();
        let mut arcs = Vec::new();
        let mut arc_flat = Vec::new();
        let mut arc_base = Vec::with_capacity(inst.arcs.len());
        for (a, arc) in inst.arcs.iter().enumerate() {
            arc_base.push(arcs.len());
            let tail = copies[arc.tail][part_copy[a]];
            for &head in &copies[arc.head] {
                arcs.push(FlatArc {
                    tail,
                    head,
                    transit: arc.transit,
                });
                arc_flat.push(a);
            }
        }
        AuxGraph {
            graph: FlatGraph::new(node_origin.len(), arcs),
            copies,
            node_origin,
            arc_flat,
            arc_base,
            part_copy,
        }
    }

    pub fn graph(&self) -> &FlatGraph {
        &self.graph
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn num_arcs(&self) -> usize {
        self.graph.num_arcs()
    }

    /// Aux ids of the copies of flat node `v`, terminal first.
    pub fn copies(&self, v: NodeId) -> &[NodeId] {
        &self.copies[v]
    }

    pub fn terminal(&self, v: NodeId) -> NodeId {
        self.copies[v][0]
    }

    pub fn is_terminal(&self, u: NodeId) -> bool {
        self.node_origin[u].1 == 0
    }

    /// `(flat node, copy index)` of an aux node.
    pub fn origin(&self, u: NodeId) -> (NodeId, usize) {
        self.node_origin[u]
    }

    pub fn flat_node(&self, u: NodeId) -> NodeId {
        self.node_origin[u].0
    }

    pub fn flat_arc(&self, e: ArcId) -> ArcId {
        self.arc_flat[e]
    }

    pub fn arc_flat_map(&self) -> &[ArcId] {
        &self.arc_flat
    }

    /// The copy of `v` that departs along flat arc `a`.
    pub fn departure_copy(&self, a: ArcId, inst_tail: NodeId) -> NodeId {
        self.copies[inst_tail][self.part_copy[a]]
    }

    /// The aux copy of flat arc `a` entering head copy `j`.
    pub fn aux_arc(&self, a: ArcId, j: usize) -> ArcId {
        self.arc_base[a] + j
    }

    pub fn label(&self, u: NodeId) -> String {
        let (v, i) = self.node_origin[u];
        format!("{v}.{i}")
    }

    /// The commodity's subgraph: one copy per node of its designated network
    /// (the copy housing its outgoing arcs, the terminal copy for the
    /// destination) and one aux arc per designated arc.
    pub fn commodity_net(&self, inst: &Instance, partition: &ArcPartition, k: usize) -> Result<CommodityNet, AuxError> {
        let c = &inst.commodities[k];
        let arcs = inst.commodity_arcs(k);
        let mut out: BTreeMap<NodeId, Vec<ArcId>> = BTreeMap::new();
        for &a in &arcs {
            out.entry(inst.arcs[a].tail).or_default().push(a);
        }
        let mut chosen: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
        for v in inst.commodity_nodes(k) {
            if v == c.dest {
                if out.contains_key(&v) {
                    return Err(AuxError::Unreduced { k, node: v });
                }
                chosen.insert(v, vec![0]);
                continue;
            }
            let Some(leaving) = out.get(&v) else {
                return Err(AuxError::Unreduced { k, node: v });
            };
            let mut idx: Vec<usize> = leaving.iter().map(|&a| self.part_copy[a]).collect();
            idx.sort_unstable();
            idx.dedup();
            if idx.len() > 1 && !(partition.is_relaxed(v) && v == c.origin) {
                return Err(AuxError::InvalidPartition { k, node: v });
            }
            chosen.insert(v, idx);
        }
        if !chosen.contains_key(&c.origin) {
            return Err(AuxError::Unreduced { k, node: c.origin });
        }
        let mut nodes: Vec<NodeId> = chosen
            .iter()
            .flat_map(|(&v, idx)| idx.iter().map(move |&i| self.copies[v][i]))
            .collect();
        nodes.sort_unstable();
        let mut aux_arcs: Vec<ArcId> = arcs
            .iter()
            .map(|&a| {
                let head = inst.arcs[a].head;
                let j = chosen[&head][0];
                self.aux_arc(a, j)
            })
            .collect();
        aux_arcs.sort_unstable();
        Ok(CommodityNet {
            nodes,
            arcs: aux_arcs,
            sources: chosen[&c.origin].iter().map(|&i| self.copies[c.origin][i]).collect(),
            sink: self.terminal(c.dest),
        })
    }

    pub fn commodity_nets(&self, inst: &Instance, partition: &ArcPartition) -> Result<Vec<CommodityNet>, AuxError> {
        (0..inst.commodities.len()).map(|k| self.commodity_net(inst, partition, k)).collect()
    }

    /// Lifts a flat walk: each arc leaves the copy housing it and enters the
    /// copy housing the next arc, the last one entering the terminal copy.
    /// Returns the start copy and the aux arcs.
    pub fn phi(&self, flat: &FlatGraph, start: NodeId, arcs: &[ArcId]) -> Result<(NodeId, Vec<ArcId>), AuxError> {
        if !flat.is_walk(start, arcs) {
            return Err(AuxError::NotAWalk);
        }
        if arcs.is_empty() {
            return Ok((self.terminal(start), Vec::new()));
        }
        let lifted = arcs
            .iter()
            .enumerate()
            .map(|(p, &a)| {
                let j = arcs.get(p + 1).map_or(0, |&b| self.part_copy[b]);
                self.aux_arc(a, j)
            })
            .collect();
        Ok((self.departure_copy(arcs[0], start), lifted))
    }

    pub fn phi_inverse(&self, start: NodeId, arcs: &[ArcId]) -> Result<(NodeId, Vec<ArcId>), AuxError> {
        if !self.graph.is_walk(start, arcs) {
            return Err(AuxError::NotAWalk);
        }
        if !self.is_terminal(self.graph.walk_end(start, arcs)) {
            return Err(AuxError::NotTerminal);
        }
        Ok((self.flat_node(start), arcs.iter().map(|&e| self.arc_flat[e]).collect()))
    }

    /// Lifts a full-network trajectory: the lifted walk keeps every departure
    /// time, and waits happen at whichever copy the walk occupies.
    pub fn phi_t(&self, flat: &FlatGraph, traj: &Trajectory, release: Time, deadline: Time) -> Result<Trajectory, AuxError> {
        let start = traj.start().ok_or(AuxError::NotAWalk)?.node;
        let deps = traj.departures();
        let flat_arcs: Vec<ArcId> = deps.iter().map(|d| d.0).collect();
        let (s, lifted) = self.phi(flat, start, &flat_arcs)?;
        let legs: Vec<(ArcId, Time)> = lifted.into_iter().zip(deps.iter().map(|d| d.1)).collect();
        Ok(Trajectory::in_full(traj.commodity, &self.graph, s, release, &legs, deadline))
    }

    pub fn phi_t_inverse(&self, flat: &FlatGraph, traj: &Trajectory, release: Time, deadline: Time) -> Result<Trajectory, AuxError> {
        let start = traj.start().ok_or(AuxError::NotAWalk)?.node;
        let deps = traj.departures();
        let aux_arcs: Vec<ArcId> = deps.iter().map(|d| d.0).collect();
        let (s, arcs) = self.phi_inverse(start, &aux_arcs)?;
        let legs: Vec<(ArcId, Time)> = arcs.into_iter().zip(deps.iter().map(|d| d.1)).collect();
        Ok(Trajectory::in_full(traj.commodity, flat, s, release, &legs, deadline))
    }

    /// Time sets of the minimal aux discretisation: every copy at 0, every
    /// terminal copy at T, each commodity's source copies at its release
    /// and its terminal sink at its deadline.
    pub fn initial_times(&self, inst: &Instance, nets: &[CommodityNet]) -> Vec<Vec<Time>> {
        let mut times = vec![vec![0]; self.num_nodes()];
        for v in 0..inst.nodes {
            times[self.terminal(v)].push(inst.horizon);
        }
        for (c, net) in inst.commodities.iter().zip(nets) {
            for &s in &net.sources {
                times[s].push(c.release);
            }
            times[net.sink].push(c.deadline);
        }
        for ts in &mut times {
            ts.sort_unstable();
            ts.dedup();
        }
        times
    }

    /// Aux movement arcs grouped by underlying flat arc and departure time.
    pub fn classes(&self, net: &PartialNetwork) -> BTreeMap<(ArcId, Time), Vec<TimedArc>> {
        let mut out: BTreeMap<(ArcId, Time), Vec<TimedArc>> = BTreeMap::new();
        for e in net.movement_arcs() {
            out.entry((self.arc_flat[e.arc.expect("movement")], e.tail.time)).or_default().push(e);
        }
        out
    }

    /// Time sets of the flat partial network induced by an aux one: a flat
    /// node is present at `t` when any of its copies is.
    pub fn projected_times(&self, net: &PartialNetwork) -> Vec<Vec<Time>> {
        let mut times: Vec<Vec<Time>> = Vec::with_capacity(self.copies.len());
        for ids in &self.copies {
            let mut ts: Vec<Time> = ids.iter().flat_map(|&u| net.times(u).iter().copied()).collect();
            ts.sort_unstable();
            ts.dedup();
            times.push(ts);
        }
        times
    }

    pub fn project<'g>(&self, flat: &'g FlatGraph, net: &PartialNetwork) -> PartialNetwork<'g> {
        PartialNetwork::from_times(flat, net.horizon(), self.projected_times(net)).expect("copies all carry time 0")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::{arc, commodity};

    /// v1 -> v2, v2 -> v3, v2 -> v4 (nodes 0..4).
    fn fork() -> Instance {
        Instance {
            nodes: 4,
            arcs: vec![arc(0, 1, 1), arc(1, 2, 1), arc(1, 3, 1)],
            commodities: vec![],
            horizon: 6,
            regions: None,
            critical_times: None,
        }
    }

    #[test]
    fn fork_with_singletons() {
        let inst = fork();
        let aux = AuxGraph::new(&inst, &ArcPartition::singleton(&inst));
        assert_eq!(aux.num_nodes(), 7);
        assert_eq!(aux.num_arcs(), 5);
        let mut arcs: Vec<(String, String)> = aux
            .graph()
            .arcs()
            .iter()
            .map(|a| (aux.label(a.tail), aux.label(a.head)))
            .collect();
        arcs.sort();
        let expected = [("0.1", "1.0"), ("0.1", "1.1"), ("0.1", "1.2"), ("1.1", "2.0"), ("1.2", "3.0")];
        assert_eq!(arcs, expected.map(|(a, b)| (a.to_string(), b.to_string())));
    }

    #[test]
    fn trivial_partition_doubles_nodes() {
        let inst = fork();
        let aux = AuxGraph::new(&inst, &ArcPartition::trivial(&inst));
        for v in 0..2 {
            assert_eq!(aux.copies(v).len(), 2);
        }
    }

    #[test]
    fn arcless_graph_has_terminals_only() {
        let mut inst = fork();
        inst.arcs.clear();
        let aux = AuxGraph::new(&inst, &ArcPartition::trivial(&inst));
        assert_eq!((aux.num_nodes(), aux.num_arcs()), (4, 0));
    }

    #[test]
    fn path_commodity_maps_to_housing_copies() {
        let mut inst = fork();
        let mut k = commodity(0, 0, 3, 0, 6);
        k.subgraph = Some(vec![0, 2]);
        inst.commodities = vec![k];
        let part = ArcPartition::singleton(&inst);
        let aux = AuxGraph::new(&inst, &part);
        let net = aux.commodity_net(&inst, &part, 0).unwrap();
        let labels: Vec<String> = net.nodes.iter().map(|&u| aux.label(u)).collect();
        assert_eq!(labels, ["0.1", "1.2", "3.0"]);
        assert_eq!(net.arcs.len(), 2);
        assert_eq!(aux.label(net.sources[0]), "0.1");
        assert_eq!(aux.label(net.sink), "3.0");
    }

    #[test]
    fn phi_routes_through_part_copies() {
        let inst = fork();
        let flat = FlatGraph::of_instance(&inst);
        let aux = AuxGraph::new(&inst, &ArcPartition::singleton(&inst));
        let (s, arcs) = aux.phi(&flat, 0, &[0, 2]).unwrap();
        let mut nodes = vec![aux.label(s)];
        nodes.extend(arcs.iter().map(|&e| aux.label(aux.graph().arc(e).head)));
        assert_eq!(nodes, ["0.1", "1.2", "3.0"]);
        assert_eq!(aux.phi_inverse(s, &arcs).unwrap(), (0, vec![0, 2]));
        assert_eq!(aux.phi(&flat, 2, &[]).unwrap(), (aux.terminal(2), vec![]));
        assert_eq!(aux.phi(&flat, 0, &[1]), Err(AuxError::NotAWalk));
    }

    #[test]
    fn unreduced_subgraph_rejected() {
        let mut inst = fork();
        inst.commodities = vec![commodity(0, 0, 1, 0, 6)];
        let part = ArcPartition::trivial(&inst);
        let aux = AuxGraph::new(&inst, &part);
        assert_eq!(aux.commodity_net(&inst, &part, 0), Err(AuxError::Unreduced { k: 0, node: 1 }));
    }

    #[test]
    fn class_holds_both_head_copies() {
        let mut inst = fork();
        inst.arcs.truncate(2);
        let part = ArcPartition::trivial(&inst);
        let aux = AuxGraph::new(&inst, &part);
        let net = PartialNetwork::full(aux.graph(), 6);
        let classes = aux.classes(&net);
        assert_eq!(classes[&(0, 3)].len(), 2);
        assert!(classes.values().all(|c| c.len() <= 2));
    }
}
