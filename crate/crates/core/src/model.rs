//! Time-indexed formulations over full or partial networks, flat or
//! auxiliary, and recovery of trajectories from their solutions.

use std::collections::{BTreeMap, HashMap};

use sndrr_milp::{Model, Sense, VarId, VarKind};
use thiserror::Error;

use crate::auxiliary::AuxGraph;
use crate::expansion::{PartialNetwork, TimedArc, TimedNode, Trajectory};
use crate::graph::{CommodityNet, FlatGraph};
use crate::instance::{ArcId, Instance, NodeId, Time};

pub const FLOW_BALANCE: &str = "flow_balance";
pub const CAPACITY: &str = "capacity";
pub const TRANSIT_BUDGET: &str = "transit_budget";

const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error("commodity {k}: fractional flow {value} on a timed arc")]
    Fractional { k: usize, value: f64 },
    #[error("commodity {k}: flow does not connect source to sink")]
    Disconnected { k: usize },
}

/// A formulation together with the meaning of its columns.
#[derive(Debug, Clone)]
pub struct TimeIndexed {
    pub model: Model,
    /// Per commodity, each flow column and the timed arc it routes over.
    pub flows: Vec<Vec<(TimedArc, VarId)>>,
    /// Truck columns keyed by flat arc and departure time.
    pub trucks: Vec<((ArcId, Time), VarId)>,
    pub sources: Vec<Vec<TimedNode>>,
    pub sinks: Vec<TimedNode>,
}

impl TimeIndexed {
    /// Movement-arc flow columns only.
    pub fn movement_flow_vars(&self) -> usize {
        self.flows.iter().flatten().filter(|(a, _)| !a.is_holdover()).count()
    }

    /// The route of commodity `k`: follow unit flow from its source, dropping
    /// any loops and any cycles detached from the route.
    pub fn extract(&self, k: usize, values: &[f64]) -> Result<Trajectory, ExtractError> {
        let mut out: HashMap<TimedNode, Vec<TimedArc>> = HashMap::new();
        for &(arc, var) in &self.flows[k] {
            let v = values[var.0];
            if (v - v.round()).abs() > INTEGRALITY_TOL {
                return Err(ExtractError::Fractional { k, value: v });
            }
            if v.round() >= 1.0 {
                out.entry(arc.tail).or_default().push(arc);
            }
        }
        for list in out.values_mut() {
            list.sort();
            list.reverse();
        }
        let sink = self.sinks[k];
        let mut at = *self.sources[k]
            .iter()
            .find(|s| out.get(s).is_some_and(|l| !l.is_empty()))
            .ok_or(ExtractError::Disconnected { k })?;
        let mut route: Vec<TimedArc> = Vec::new();
        let mut seen: HashMap<TimedNode, usize> = HashMap::from([(at, 0)]);
        while at != sink {
            let next = out.get_mut(&at).and_then(Vec::pop).ok_or(ExtractError::Disconnected { k })?;
            route.push(next);
            at = next.head;
            if let Some(&pos) = seen.get(&at) {
                for dropped in route.drain(pos..) {
                    seen.remove(&dropped.head);
                }
            }
            seen.insert(at, route.len());
        }
        Ok(Trajectory { commodity: k, arcs: route })
    }

    pub fn extract_all(&self, values: &[f64]) -> Result<Vec<Trajectory>, ExtractError> {
        (0..self.flows.len()).map(|k| self.extract(k, values)).collect()
    }
}

struct Formulation<'a, 'g> {
    inst: &'a Instance,
    net: &'a PartialNetwork<'g>,
    /// Instance arc behind each arc of the network's graph.
    flat_of: &'a [ArcId],
    commodities: &'a [CommodityNet],
    budget: bool,
    label: &'a dyn Fn(NodeId) -> String,
}

impl Formulation<'_, '_> {
    fn build(&self, name: &str) -> TimeIndexed {
        let inst = self.inst;
        let net = self.net;
        let graph = net.graph();
        let mut model = Model::new(name);
        let movement: Vec<TimedArc> = net.movement_arcs().collect();
        let holdover: Vec<TimedArc> = net.holdover_arcs().collect();
        let arc_name = |k: usize, a: &TimedArc| {
            format!(
                "x_{k}_{}_{}_{}_{}",
                (self.label)(a.tail.node),
                a.tail.time,
                (self.label)(a.head.node),
                a.head.time
            )
        };

        let mut flows = Vec::with_capacity(self.commodities.len());
        let mut sources = Vec::new();
        let mut sinks = Vec::new();
        for (k, cn) in self.commodities.iter().enumerate() {
            let c = &inst.commodities[k];
            let mut node_in = vec![false; graph.num_nodes()];
            for &v in &cn.nodes {
                node_in[v] = true;
            }
            let mut arc_in = vec![false; graph.num_arcs()];
            for &a in &cn.arcs {
                arc_in[a] = true;
            }
            let mut cols = Vec::new();
            for a in movement.iter().filter(|a| arc_in[a.arc.expect("movement")]) {
                let cost = inst.arcs[self.flat_of[a.arc.expect("movement")]].var_cost * c.demand;
                cols.push((*a, model.add_binary(arc_name(k, a), cost)));
            }
            for a in holdover.iter().filter(|a| node_in[a.tail.node]) {
                cols.push((*a, model.add_binary(arc_name(k, a), 0.0)));
            }
            flows.push(cols);
            sources.push(cn.sources.iter().map(|&s| TimedNode::new(s, c.release)).collect::<Vec<_>>());
            sinks.push(TimedNode::new(cn.sink, c.deadline));
        }

        let mut trucks: Vec<((ArcId, Time), VarId)> = Vec::new();
        let mut truck_of: BTreeMap<(ArcId, Time), usize> = BTreeMap::new();
        for a in &movement {
            let key = (self.flat_of[a.arc.expect("movement")], a.tail.time);
            truck_of.entry(key).or_insert(0);
        }
        for (i, (&key, slot)) in truck_of.iter_mut().enumerate() {
            let arc = &inst.arcs[key.0];
            let y = model.add_var(format!("y_{}_{}", key.0, key.1), VarKind::Integer, 0.0, f64::INFINITY, arc.fixed_cost);
            trucks.push((key, y));
            *slot = i;
        }

        for (k, cn) in self.commodities.iter().enumerate() {
            let mut rows: BTreeMap<TimedNode, Vec<(VarId, f64)>> = BTreeMap::new();
            for &v in &cn.nodes {
                for &t in net.times(v) {
                    rows.insert(TimedNode::new(v, t), Vec::new());
                }
            }
            for &(a, var) in &flows[k] {
                rows.get_mut(&a.tail).expect("tail in commodity net").push((var, 1.0));
                rows.get_mut(&a.head).expect("head in commodity net").push((var, -1.0));
            }
            for s in &sources[k] {
                assert!(rows.contains_key(s), "source ({}, {}) missing from the network", s.node, s.time);
            }
            assert!(rows.contains_key(&sinks[k]), "sink missing from the network");
            let merged = sources[k].len() > 1;
            let mut source_row: Vec<(VarId, f64)> = Vec::new();
            for (node, coeffs) in rows {
                let is_source = sources[k].contains(&node);
                if merged && is_source {
                    source_row.extend(coeffs);
                    continue;
                }
                let rhs = if is_source {
                    1.0
                } else if node == sinks[k] {
                    -1.0
                } else {
                    0.0
                };
                let name = format!("bal_{k}_{}_{}", (self.label)(node.node), node.time);
                model.add_row(name, FLOW_BALANCE, coeffs, Sense::Eq, rhs);
            }
            if merged {
                model.add_row(format!("bal_{k}_source"), FLOW_BALANCE, source_row, Sense::Eq, 1.0);
            }
        }

        let mut capacity: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); trucks.len()];
        for (k, cols) in flows.iter().enumerate() {
            let q = inst.commodities[k].demand;
            for &(a, var) in cols {
                if let Some(e) = a.arc {
                    capacity[truck_of[&(self.flat_of[e], a.tail.time)]].push((var, q));
                }
            }
        }
        for (i, mut coeffs) in capacity.into_iter().enumerate() {
            let ((a, t), y) = trucks[i];
            coeffs.push((y, -(inst.arcs[a].capacity as f64)));
            model.add_row(format!("cap_{a}_{t}"), CAPACITY, coeffs, Sense::Le, 0.0);
        }

        if self.budget {
            for (k, cols) in flows.iter().enumerate() {
                let c = &inst.commodities[k];
                let coeffs: Vec<(VarId, f64)> = cols
                    .iter()
                    .filter_map(|&(a, var)| a.arc.map(|e| (var, graph.arc(e).transit as f64)))
                    .collect();
                model.add_row(
                    format!("budget_{k}"),
                    TRANSIT_BUDGET,
                    coeffs,
                    Sense::Le,
                    (c.deadline - c.release) as f64,
                );
            }
        }

        TimeIndexed {
            model,
            flows,
            trucks,
            sources,
            sinks,
        }
    }
}

fn flat_nets(inst: &Instance) -> Vec<CommodityNet> {
    (0..inst.commodities.len()).map(|k| CommodityNet::flat(inst, k)).collect()
}

fn identity(n: usize) -> Vec<ArcId> {
    (0..n).collect()
}

/// The exact model on the full network; no transit-budget rows.
pub fn build_full_model(inst: &Instance) -> TimeIndexed {
    let graph = FlatGraph::of_instance(inst);
    let net = PartialNetwork::full(&graph, inst.horizon);
    let nets = flat_nets(inst);
    let flat_of = identity(inst.arcs.len());
    Formulation {
        inst,
        net: &net,
        flat_of: &flat_of,
        commodities: &nets,
        budget: false,
        label: &|v| v.to_string(),
    }
    .build("full")
}

/// The relaxation on a partial flat network, with transit-budget rows.
pub fn build_partial_model(inst: &Instance, net: &PartialNetwork) -> TimeIndexed {
    let nets = flat_nets(inst);
    let flat_of = identity(inst.arcs.len());
    Formulation {
        inst,
        net,
        flat_of: &flat_of,
        commodities: &nets,
        budget: true,
        label: &|v| v.to_string(),
    }
    .build("partial")
}

/// The relaxation on a partial auxiliary network. Truck columns and
/// capacity rows exist per consolidation class.
pub fn build_aux_partial_model(inst: &Instance, aux: &AuxGraph, nets: &[CommodityNet], net: &PartialNetwork) -> TimeIndexed {
    Formulation {
        inst,
        net,
        flat_of: aux.arc_flat_map(),
        commodities: nets,
        budget: true,
        label: &|u| aux.label(u),
    }
    .build("aux_partial")
}

/// The exact model on the full auxiliary network; no transit-budget rows.
pub fn build_aux_full_model(inst: &Instance, aux: &AuxGraph, nets: &[CommodityNet]) -> TimeIndexed {
    let net = PartialNetwork::full(aux.graph(), inst.horizon);
    Formulation {
        inst,
        net: &net,
        flat_of: aux.arc_flat_map(),
        commodities: nets,
        budget: false,
        label: &|u| aux.label(u),
    }
    .build("aux_full")
}

/// Cost of full-network routes: variable cost of every leg plus one fixed
/// charge per truck needed on each used flat arc at each departure time.
pub fn price(inst: &Instance, routes: &[Trajectory]) -> f64 {
    let mut variable = 0.0;
    let mut load: BTreeMap<(ArcId, Time), f64> = BTreeMap::new();
    for r in routes {
        let q = inst.commodities[r.commodity].demand;
        for (a, t) in r.departures() {
            variable += inst.arcs[a].var_cost * q;
            *load.entry((a, t)).or_insert(0.0) += q;
        }
    }
    let fixed: f64 = load
        .iter()
        .map(|(&(a, _), &l)| {
            let arc = &inst.arcs[a];
            arc.fixed_cost * (l / arc.capacity as f64 - 1e-9).ceil().max(0.0)
        })
        .sum();
    variable + fixed
}

/// Checks that full-network routes start at `(o_k, r_k)`, end at `(d_k, l_k)`,
/// use designated arcs with exact transits and wait only forward in time.
pub fn routes_feasible(inst: &Instance, routes: &[Trajectory]) -> Result<(), String> {
    if routes.len() != inst.commodities.len() {
        return Err(format!("{} routes for {} commodities", routes.len(), inst.commodities.len()));
    }
    for (k, r) in routes.iter().enumerate() {
        let c = &inst.commodities[k];
        if r.commodity != k {
            return Err(format!("route {k} is labelled {}", r.commodity));
        }
        if r.start() != Some(TimedNode::new(c.origin, c.release)) {
            return Err(format!("commodity {k} does not start at its origin and release"));
        }
        if r.end() != Some(TimedNode::new(c.dest, c.deadline)) {
            return Err(format!("commodity {k} does not reach its destination by its deadline"));
        }
        let allowed = inst.commodity_arcs(k);
        for w in r.arcs.windows(2) {
            if w[0].head != w[1].tail {
                return Err(format!("commodity {k} route is broken"));
            }
        }
        for a in &r.arcs {
            match a.arc {
                None => {
                    if a.tail.node != a.head.node || a.head.time <= a.tail.time {
                        return Err(format!("commodity {k} has a bad wait"));
                    }
                }
                Some(e) => {
                    let arc = &inst.arcs[e];
                    if !allowed.contains(&e) {
                        return Err(format!("commodity {k} uses arc {e} outside its subgraph"));
                    }
                    if a.tail.node != arc.tail || a.head.node != arc.head || a.head.time != a.tail.time + arc.transit {
                        return Err(format!("commodity {k} traverses arc {e} with the wrong timing"));
                    }
                    if a.head.time > inst.horizon {
                        return Err(format!("commodity {k} runs past the horizon"));
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::{arc, commodity};
    use sndrr_milp::{NativeBackend, SolveParams, SolverBackend};

    fn one_arc(demand: f64) -> Instance {
        let mut a = arc(0, 1, 1);
        a.var_cost = 0.0;
        let mut k = commodity(0, 0, 1, 0, 1);
        k.demand = demand;
        Instance {
            nodes: 2,
            arcs: vec![a],
            commodities: vec![k],
            horizon: 1,
            regions: None,
            critical_times: None,
        }
    }

    fn exact() -> SolveParams {
        SolveParams {
            rel_gap: 0.0,
            time_limit: None,
        }
    }

    #[test]
    fn one_truck_for_unit_demand() {
        let tm = build_full_model(&one_arc(1.0));
        let sol = NativeBackend.solve(&tm.model, &exact()).unwrap();
        assert!((sol.objective - 5.0).abs() < 1e-9);
        assert_eq!(sol.value(tm.trucks[0].1).round(), 1.0);
    }

    #[test]
    fn three_trucks_for_demand_25() {
        let tm = build_full_model(&one_arc(25.0));
        let sol = NativeBackend.solve(&tm.model, &exact()).unwrap();
        assert!((sol.objective - 15.0).abs() < 1e-9);
        assert_eq!(sol.value(tm.trucks[0].1).round(), 3.0);
    }

    #[test]
    fn consolidation_shares_a_truck() {
        let mut inst = one_arc(4.0);
        let mut k1 = inst.commodities[0].clone();
        k1.id = 1;
        inst.commodities.push(k1);
        let tm = build_full_model(&inst);
        let sol = NativeBackend.solve(&tm.model, &exact()).unwrap();
        assert!((sol.objective - 5.0).abs() < 1e-9);
    }

    #[test]
    fn rows_come_in_three_families() {
        let inst = one_arc(1.0);
        let full = build_full_model(&inst);
        let counts = full.model.family_counts();
        assert_eq!(counts.get(FLOW_BALANCE), Some(&4));
        assert_eq!(counts.get(CAPACITY), Some(&1));
        assert_eq!(counts.get(TRANSIT_BUDGET), None);
        let graph = FlatGraph::of_instance(&inst);
        let net = PartialNetwork::full(&graph, 1);
        let partial = build_partial_model(&inst, &net);
        assert_eq!(partial.model.num_vars(), full.model.num_vars());
        assert_eq!(partial.model.family_counts().get(TRANSIT_BUDGET), Some(&1));
    }

    #[test]
    fn budget_row_blocks_a_too_long_short_route() {
        // 0 -> 1 -> 2 takes 2+2 while the window is 3; 0 -> 2 directly takes 3
        let mut inst = Instance {
            nodes: 3,
            arcs: vec![arc(0, 1, 2), arc(1, 2, 2), arc(0, 2, 3)],
            commodities: vec![commodity(0, 0, 2, 0, 3)],
            horizon: 3,
            regions: None,
            critical_times: None,
        };
        inst.arcs[2].fixed_cost = 50.0;
        let graph = FlatGraph::of_instance(&inst);
        let net = PartialNetwork::from_times(&graph, 3, vec![vec![0, 3], vec![0], vec![0, 3]]).unwrap();
        let tm = build_partial_model(&inst, &net);
        let sol = NativeBackend.solve(&tm.model, &exact()).unwrap();
        let route = tm.extract(0, &sol.values).unwrap();
        assert_eq!(route.flat_path(), vec![2]);
    }

    #[test]
    fn extraction_keeps_waits_and_reprices() {
        let mut inst = one_arc(1.0);
        inst.commodities[0].deadline = 3;
        inst.horizon = 3;
        let tm = build_full_model(&inst);
        let sol = NativeBackend.solve(&tm.model, &exact()).unwrap();
        let routes = tm.extract_all(&sol.values).unwrap();
        assert_eq!(routes[0].legs().count(), 1);
        assert!(routes[0].arcs.iter().any(|a| a.is_holdover()));
        routes_feasible(&inst, &routes).unwrap();
        assert!((price(&inst, &routes) - sol.objective).abs() < 1e-9);
    }

    #[test]
    fn fractional_flow_is_rejected() {
        let tm = build_full_model(&one_arc(1.0));
        let mut values = vec![0.0; tm.model.num_vars()];
        values[tm.flows[0][0].1 .0] = 0.5;
        assert!(matches!(tm.extract(0, &values), Err(ExtractError::Fractional { .. })));
    }
}
