//! Full and partial time-expanded networks.
//!
//! A partial network is determined by its per-node time sets; movement arcs
//! are always derived from them. Every node carries time 0, and a flat arc
//! `vw` departing `(v,t)` with `t + τ <= T` lands on the latest present copy
//! of `w` no later than `t + τ`, which may underestimate the transit.

use std::fmt::Write;

use thiserror::Error;

use crate::graph::FlatGraph;
use crate::instance::{ArcId, Instance, NodeId, Time};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExpansionError {
    #[error("node {0} has no copy at time 0")]
    MissingZero(NodeId),
    #[error("time {time} at node {node} lies beyond the horizon")]
    OutOfHorizon { node: NodeId, time: Time },
    #[error("timed node ({node}, {time}) is already present")]
    Duplicate { node: NodeId, time: Time },
    #[error("refinement time must lie in (0, T]; got {0}")]
    BadRefineTime(Time),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedNode {
    pub node: NodeId,
    pub time: Time,
}

impl TimedNode {
    pub fn new(node: NodeId, time: Time) -> Self {
        TimedNode { node, time }
    }
}

/// Movement arc when `arc` is set, holdover otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedArc {
    pub tail: TimedNode,
    pub head: TimedNode,
    pub arc: Option<ArcId>,
}

impl TimedArc {
    pub fn movement(arc: ArcId, tail: TimedNode, head: TimedNode) -> Self {
        TimedArc { tail, head, arc: Some(arc) }
    }

    pub fn holdover(node: NodeId, from: Time, to: Time) -> Self {
        TimedArc {
            tail: TimedNode::new(node, from),
            head: TimedNode::new(node, to),
            arc: None,
        }
    }

    pub fn is_holdover(&self) -> bool {
        self.arc.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialNetwork<'g> {
    graph: &'g FlatGraph,
    horizon: Time,
    times: Vec<Vec<Time>>,
    /// Per flat arc, `(tail time, head time)` sorted by tail time.
    movement: Vec<Vec<(Time, Time)>>,
}

fn floor_in(times: &[Time], t: Time) -> Option<Time> {
    match times.binary_search(&t) {
        Ok(i) => Some(times[i]),
        Err(0) => None,
        Err(i) => Some(times[i - 1]),
    }
}

impl<'g> PartialNetwork<'g> {
    /// The full network: every node at every time in `0..=T`.
    pub fn full(graph: &'g FlatGraph, horizon: Time) -> Self {
        let times = vec![(0..=horizon).collect(); graph.num_nodes()];
        PartialNetwork::from_times(graph, horizon, times).expect("full time sets are well formed")
    }

    /// Builds the network forced by the given time sets. Sets may be unsorted
    /// and contain repeats.
    pub fn from_times(graph: &'g FlatGraph, horizon: Time, mut times: Vec<Vec<Time>>) -> Result<Self, ExpansionError> {
        assert_eq!(times.len(), graph.num_nodes());
        for (v, ts) in times.iter_mut().enumerate() {
            ts.sort_unstable();
            ts.dedup();
            if ts.first() != Some(&0) {
                return Err(ExpansionError::MissingZero(v));
            }
            if let Some(&t) = ts.last().filter(|&&t| t > horizon) {
                return Err(ExpansionError::OutOfHorizon { node: v, time: t });
            }
        }
        let mut net = PartialNetwork {
            graph,
            horizon,
            times,
            movement: vec![Vec::new(); graph.num_arcs()],
        };
        for a in 0..graph.num_arcs() {
            net.movement[a] = net.derive_arc(a);
        }
        Ok(net)
    }

    fn derive_arc(&self, a: ArcId) -> Vec<(Time, Time)> {
        let arc = self.graph.arc(a);
        self.times[arc.tail]
            .iter()
            .filter(|&&t| t + arc.transit <= self.horizon)
            .map(|&t| (t, floor_in(&self.times[arc.head], t + arc.transit).expect("time 0 present")))
            .collect()
    }

    pub fn graph(&self) -> &'g FlatGraph {
        self.graph
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn times(&self, v: NodeId) -> &[Time] {
        &self.times[v]
    }

    pub fn time_sets(&self) -> &[Vec<Time>] {
        &self.times
    }

    pub fn contains(&self, v: NodeId, t: Time) -> bool {
        self.times[v].binary_search(&t).is_ok()
    }

    /// Latest present time of `v` not after `t`.
    pub fn floor(&self, v: NodeId, t: Time) -> Time {
        floor_in(&self.times[v], t).expect("time 0 present")
    }

    pub fn num_timed_nodes(&self) -> usize {
        self.times.iter().map(Vec::len).sum()
    }

    pub fn num_movement_arcs(&self) -> usize {
        self.movement.iter().map(Vec::len).sum()
    }

    pub fn num_holdover_arcs(&self) -> usize {
        self.times.iter().map(|ts| ts.len() - 1).sum()
    }

    /// `(tail time, head time)` pairs of the copies of flat arc `a`.
    pub fn copies(&self, a: ArcId) -> &[(Time, Time)] {
        &self.movement[a]
    }

    /// Head time of the copy of `a` departing at `t`, if that copy exists.
    pub fn head_time(&self, a: ArcId, t: Time) -> Option<Time> {
        let copies = &self.movement[a];
        copies.binary_search_by_key(&t, |&(s, _)| s).ok().map(|i| copies[i].1)
    }

    pub fn movement_arcs(&self) -> impl Iterator<Item = TimedArc> + '_ {
        self.movement.iter().enumerate().flat_map(move |(a, copies)| {
            let arc = self.graph.arc(a);
            copies
                .iter()
                .map(move |&(t, h)| TimedArc::movement(a, TimedNode::new(arc.tail, t), TimedNode::new(arc.head, h)))
        })
    }

    pub fn holdover_arcs(&self) -> impl Iterator<Item = TimedArc> + '_ {
        self.times
            .iter()
            .enumerate()
            .flat_map(|(v, ts)| ts.windows(2).map(move |w| TimedArc::holdover(v, w[0], w[1])))
    }

    pub fn is_short(&self, arc: &TimedArc) -> bool {
        match arc.arc {
            Some(a) => arc.head.time < arc.tail.time + self.graph.arc(a).transit,
            None => false,
        }
    }

    /// Rounds a movement arc of the full network down into this network:
    /// the tail time drops to the latest present copy, and the head follows
    /// from the rounded tail rather than from the original head.
    pub fn map_mu(&self, a: ArcId, t: Time) -> TimedArc {
        let arc = self.graph.arc(a);
        let t_hat = self.floor(arc.tail, t);
        let head = self.floor(arc.head, t_hat + arc.transit);
        TimedArc::movement(a, TimedNode::new(arc.tail, t_hat), TimedNode::new(arc.head, head))
    }

    /// Adds `(v, t)` and updates only the arcs leaving or entering `v`.
    pub fn refine(&mut self, v: NodeId, t: Time) -> Result<(), ExpansionError> {
        if t == 0 || t > self.horizon {
            return Err(ExpansionError::BadRefineTime(t));
        }
        let pos = match self.times[v].binary_search(&t) {
            Ok(_) => return Err(ExpansionError::Duplicate { node: v, time: t }),
            Err(p) => p,
        };
        self.times[v].insert(pos, t);
        let graph = self.graph;
        for &a in graph.out_arcs(v) {
            let arc = graph.arc(a);
            if t + arc.transit <= self.horizon {
                let head = self.floor(arc.head, t + arc.transit);
                let copies = &mut self.movement[a];
                let at = copies.partition_point(|&(s, _)| s < t);
                copies.insert(at, (t, head));
            }
        }
        for &a in graph.in_arcs(v) {
            let transit = graph.arc(a).transit;
            for copy in self.movement[a].iter_mut() {
                if copy.0 + transit >= t && copy.1 < t {
                    copy.1 = t;
                }
            }
        }
        Ok(())
    }

    /// Text listing of time sets and arcs; short arcs are flagged.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "horizon {}", self.horizon);
        for (v, ts) in self.times.iter().enumerate() {
            let list: Vec<String> = ts.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "node {v}: {}", list.join(" "));
        }
        for a in self.movement_arcs() {
            let flag = if self.is_short(&a) { " short" } else { "" };
            let _ = writeln!(
                out,
                "arc {} ({},{}) -> ({},{}){flag}",
                a.arc.expect("movement"),
                a.tail.node,
                a.tail.time,
                a.head.node,
                a.head.time
            );
        }
        for h in self.holdover_arcs() {
            let _ = writeln!(out, "hold ({},{}) -> ({},{})", h.tail.node, h.tail.time, h.head.node, h.head.time);
        }
        out
    }
}

/// Time sets holding exactly `(v,0)`, `(v,T)`, `(o_k,r_k)` and `(d_k,l_k)`.
pub fn initial_timed_nodes(inst: &Instance) -> Vec<Vec<Time>> {
    let mut times = vec![vec![0, inst.horizon]; inst.nodes];
    for c in &inst.commodities {
        times[c.origin].push(c.release);
        times[c.dest].push(c.deadline);
    }
    for ts in &mut times {
        ts.sort_unstable();
        ts.dedup();
    }
    times
}

/// A commodity's route through a time-expanded network, holdovers included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub commodity: usize,
    pub arcs: Vec<TimedArc>,
}

impl Trajectory {
    /// Builds a trajectory in a network whose time sets are given by
    /// `times`: wait at `start` from `release`, traverse each `(arc, departure)`
    /// leg, then wait at the end until `deadline`. Waits step through every
    /// present time in between.
    pub fn from_legs(
        commodity: usize,
        graph: &FlatGraph,
        times: &dyn Fn(NodeId) -> Vec<Time>,
        start: NodeId,
        release: Time,
        legs: &[(ArcId, Time, Time)],
        deadline: Time,
    ) -> Trajectory {
        let mut arcs = Vec::new();
        let mut at = TimedNode::new(start, release);
        let hold = |arcs: &mut Vec<TimedArc>, v: NodeId, from: Time, to: Time| {
            let ts = times(v);
            let mut prev = from;
            for &t in ts.iter().filter(|&&t| t > from && t <= to) {
                arcs.push(TimedArc::holdover(v, prev, t));
                prev = t;
            }
        };
        for &(a, dep, arr) in legs {
            let arc = graph.arc(a);
            debug_assert_eq!(arc.tail, at.node);
            hold(&mut arcs, at.node, at.time, dep);
            let head = TimedNode::new(arc.head, arr);
            arcs.push(TimedArc::movement(a, TimedNode::new(arc.tail, dep), head));
            at = head;
        }
        hold(&mut arcs, at.node, at.time, deadline);
        Trajectory { commodity, arcs }
    }

    /// Full-network trajectory with exact transits.
    pub fn in_full(
        commodity: usize,
        graph: &FlatGraph,
        start: NodeId,
        release: Time,
        departures: &[(ArcId, Time)],
        deadline: Time,
    ) -> Trajectory {
        let legs: Vec<(ArcId, Time, Time)> = departures.iter().map(|&(a, t)| (a, t, t + graph.arc(a).transit)).collect();
        let all = |_: NodeId| (0..=deadline.max(release)).collect::<Vec<Time>>();
        Trajectory::from_legs(commodity, graph, &all, start, release, &legs, deadline)
    }

    pub fn legs(&self) -> impl Iterator<Item = &TimedArc> + '_ {
        self.arcs.iter().filter(|a| !a.is_holdover())
    }

    pub fn flat_path(&self) -> Vec<ArcId> {
        self.legs().map(|a| a.arc.expect("movement")).collect()
    }

    pub fn departures(&self) -> Vec<(ArcId, Time)> {
        self.legs().map(|a| (a.arc.expect("movement"), a.tail.time)).collect()
    }

    pub fn start(&self) -> Option<TimedNode> {
        self.arcs.first().map(|a| a.tail)
    }

    pub fn end(&self) -> Option<TimedNode> {
        self.arcs.last().map(|a| a.head)
    }

    /// Earliest-departing short movement arc.
    pub fn first_short(&self, net: &PartialNetwork) -> Option<TimedArc> {
        self.legs().filter(|a| net.is_short(a)).min_by_key(|a| a.tail.time).copied()
    }

    /// Checks head-to-tail chaining, forward holdovers and that every arc
    /// belongs to `net`.
    pub fn is_well_formed(&self, net: &PartialNetwork) -> bool {
        for w in self.arcs.windows(2) {
            if w[0].head != w[1].tail {
                return false;
            }
        }
        self.arcs.iter().all(|a| match a.arc {
            None => {
                a.tail.node == a.head.node
                    && a.tail.time < a.head.time
                    && net.contains(a.tail.node, a.tail.time)
                    && net.contains(a.head.node, a.head.time)
                    && net.times(a.tail.node).iter().all(|&t| t <= a.tail.time || t >= a.head.time)
            }
            Some(f) => net.head_time(f, a.tail.time) == Some(a.head.time) && net.graph().arc(f).tail == a.tail.node,
        })
    }

    /// Maps a full-network trajectory into `net` arc by arc and reconnects
    /// the pieces with holdovers.
    pub fn map_into(&self, net: &PartialNetwork, release: Time, deadline: Time) -> Option<Trajectory> {
        let start = self.start()?;
        let legs: Vec<(ArcId, Time, Time)> = self
            .legs()
            .map(|a| {
                let m = net.map_mu(a.arc.expect("movement"), a.tail.time);
                (m.arc.expect("movement"), m.tail.time, m.head.time)
            })
            .collect();
        let mut at = release;
        for &(_, dep, arr) in &legs {
            if dep < at {
                return None;
            }
            at = arr;
        }
        if at > deadline {
            return None;
        }
        let times = |v: NodeId| net.times(v).to_vec();
        Some(Trajectory::from_legs(self.commodity, net.graph(), &times, start.node, release, &legs, deadline))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FlatArc;

    fn star(m: usize) -> FlatGraph {
        let arcs = (1..=m).map(|i| FlatArc { tail: 0, head: i, transit: 1 }).collect();
        FlatGraph::new(m + 1, arcs)
    }

    fn two_nodes(transit: Time) -> FlatGraph {
        FlatGraph::new(2, vec![FlatArc { tail: 0, head: 1, transit }])
    }

    #[test]
    fn full_star_counts() {
        let g = star(2);
        let net = PartialNetwork::full(&g, 3);
        assert_eq!(net.num_timed_nodes(), 12);
        assert_eq!(net.num_movement_arcs(), 6);
        assert_eq!(net.num_holdover_arcs(), 9);
    }

    #[test]
    fn single_node_has_only_holdovers() {
        let g = FlatGraph::new(1, vec![]);
        let net = PartialNetwork::full(&g, 2);
        assert_eq!((net.num_timed_nodes(), net.num_movement_arcs(), net.num_holdover_arcs()), (3, 0, 2));
    }

    #[test]
    fn full_network_has_horizon_plus_one_copies() {
        let g = FlatGraph::new(
            4,
            vec![
                FlatArc { tail: 0, head: 1, transit: 1 },
                FlatArc { tail: 1, head: 2, transit: 2 },
                FlatArc { tail: 1, head: 3, transit: 2 },
            ],
        );
        let net = PartialNetwork::full(&g, 4);
        for v in 0..4 {
            assert_eq!(net.times(v).len(), 5);
        }
    }

    #[test]
    fn head_rounds_down() {
        let g = two_nodes(3);
        let net = PartialNetwork::from_times(&g, 4, vec![vec![0], vec![0, 2]]).unwrap();
        assert_eq!(net.copies(0), &[(0, 2)]);
    }

    #[test]
    fn second_copy_is_short() {
        let g = two_nodes(1);
        let net = PartialNetwork::from_times(&g, 2, vec![vec![0, 1], vec![0]]).unwrap();
        let arcs: Vec<TimedArc> = net.movement_arcs().collect();
        assert_eq!(arcs.len(), 2);
        assert_eq!(arcs[1].tail.time, 1);
        assert_eq!(arcs[1].head.time, 0);
        assert!(net.is_short(&arcs[0]) && net.is_short(&arcs[1]));
    }

    #[test]
    fn refine_lengthens_one_arc() {
        let g = two_nodes(1);
        let mut net = PartialNetwork::from_times(&g, 2, vec![vec![0, 1], vec![0]]).unwrap();
        net.refine(1, 1).unwrap();
        assert_eq!(net.copies(0), &[(0, 1), (1, 1)]);
        let arcs: Vec<TimedArc> = net.movement_arcs().collect();
        assert!(!net.is_short(&arcs[0]));
        assert!(net.is_short(&arcs[1]));
        assert_eq!(net.refine(1, 1), Err(ExpansionError::Duplicate { node: 1, time: 1 }));
    }

    #[test]
    fn short_flag_on_underestimate() {
        let g = two_nodes(3);
        let arc = TimedArc::movement(0, TimedNode::new(0, 0), TimedNode::new(1, 2));
        let net = PartialNetwork::full(&g, 4);
        assert!(net.is_short(&arc));
    }

    #[test]
    fn mu_follows_rounded_tail() {
        let g = two_nodes(2);
        let net = PartialNetwork::from_times(&g, 6, vec![vec![0, 3], vec![0, 2]]).unwrap();
        let m = net.map_mu(0, 4);
        assert_eq!((m.tail.time, m.head.time), (3, 2));
    }

    #[test]
    fn mu_is_identity_on_full() {
        let g = star(3);
        let net = PartialNetwork::full(&g, 5);
        for a in net.movement_arcs().collect::<Vec<_>>() {
            assert_eq!(net.map_mu(a.arc.unwrap(), a.tail.time), a);
        }
    }

    #[test]
    fn initial_star_sets() {
        use crate::instance::{Arc, Commodity};
        let arc = |head| Arc {
            tail: 0,
            head,
            transit: 1,
            fixed_cost: 1.0,
            capacity: 1,
            var_cost: 1.0,
        };
        let com = |id, dest, release, deadline| Commodity {
            id,
            origin: 0,
            dest,
            demand: 1.0,
            release,
            deadline,
            subgraph: None,
        };
        let mut inst = Instance {
            nodes: 3,
            arcs: vec![arc(1), arc(2)],
            commodities: vec![com(0, 1, 1, 2), com(1, 2, 2, 3)],
            horizon: 3,
            regions: None,
            critical_times: None,
        };
        assert_eq!(initial_timed_nodes(&inst), vec![vec![0, 1, 2, 3], vec![0, 2, 3], vec![0, 3]]);
        inst.commodities.clear();
        assert_eq!(initial_timed_nodes(&inst), vec![vec![0, 3]; 3]);
    }

    #[test]
    fn refining_everything_reaches_full() {
        let g = star(2);
        let mut net = PartialNetwork::from_times(&g, 3, vec![vec![0]; 3]).unwrap();
        for v in 0..3 {
            for t in 1..=3 {
                net.refine(v, t).unwrap();
            }
        }
        assert_eq!(net, PartialNetwork::full(&g, 3));
    }

    #[test]
    fn dump_flags_short_arcs() {
        let g = two_nodes(1);
        let net = PartialNetwork::from_times(&g, 2, vec![vec![0, 1, 2], vec![0, 2]]).unwrap();
        let text = net.dump();
        assert_eq!(
            text,
            "horizon 2\nnode 0: 0 1 2\nnode 1: 0 2\narc 0 (0,0) -> (1,0) short\narc 0 (0,1) -> (1,2)\n\
             hold (0,0) -> (0,1)\nhold (0,1) -> (0,2)\nhold (1,0) -> (1,2)\n"
        );
    }

    #[test]
    fn full_trajectory_waits_in_unit_steps() {
        let g = two_nodes(1);
        let tr = Trajectory::in_full(0, &g, 0, 0, &[(0, 1)], 3);
        let net = PartialNetwork::full(&g, 3);
        assert!(tr.is_well_formed(&net));
        assert_eq!(tr.arcs.len(), 3);
        assert_eq!(tr.end(), Some(TimedNode::new(1, 3)));
    }
}
