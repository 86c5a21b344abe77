//! Departure-time repair: given the routes of a relaxation, choose true
//! departure times that keep as many observed consolidations as possible.
//! The result is always a feasible full-network solution; commodities whose
//! consolidations cannot be kept are reported for refinement.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use sndrr_milp::{Model, Sense, SolveParams, SolverBackend, SolverError, Status, VarId, VarKind};
use thiserror::Error;

use crate::auxiliary::AuxGraph;
use crate::expansion::{PartialNetwork, Trajectory};
use crate::graph::FlatGraph;
use crate::instance::{ArcId, Instance, Time};
use crate::model::price;

const TIME_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum UbError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("departure-time program is {0:?}; some route breaks its transit budget")]
    NotSolved(Status),
    #[error("commodity {0}: relaxed route does not end at a terminal copy")]
    BadRoute(usize),
}

/// Two commodities that shared a truck: position `p1` of `k1`'s path and
/// position `p2` of `k2`'s path both use flat arc `arc`, and `k1 < k2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pair {
    pub arc: ArcId,
    pub k1: usize,
    pub p1: usize,
    pub k2: usize,
    pub p2: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UbInput {
    /// Flat path of every commodity.
    pub paths: Vec<Vec<ArcId>>,
    pub pairs: Vec<Pair>,
    /// Departure times of commodities whose routes had only exact transits.
    pub fixed: Vec<Option<Vec<Time>>>,
}

impl UbInput {
    /// Relaxed legs per commodity as `(flat arc, departure, exact)`.
    fn from_legs(legs: Vec<Vec<(ArcId, Time, bool)>>) -> UbInput {
        let mut groups: BTreeMap<(ArcId, Time), Vec<(usize, usize)>> = BTreeMap::new();
        for (k, route) in legs.iter().enumerate() {
            for (p, &(a, t, _)) in route.iter().enumerate() {
                groups.entry((a, t)).or_default().push((k, p));
            }
        }
        let mut pairs = BTreeSet::new();
        for ((a, _), members) in groups {
            for (i, &(k1, p1)) in members.iter().enumerate() {
                for &(k2, p2) in &members[i + 1..] {
                    if k1 != k2 {
                        let ((k1, p1), (k2, p2)) = if k1 < k2 { ((k1, p1), (k2, p2)) } else { ((k2, p2), (k1, p1)) };
                        pairs.insert(Pair { arc: a, k1, p1, k2, p2 });
                    }
                }
            }
        }
        let fixed = legs
            .iter()
            .map(|route| route.iter().all(|l| l.2).then(|| route.iter().map(|l| l.1).collect()))
            .collect();
        UbInput {
            paths: legs.iter().map(|r| r.iter().map(|l| l.0).collect()).collect(),
            pairs: pairs.into_iter().collect(),
            fixed,
        }
    }

    pub fn is_fixed(&self, k: usize) -> bool {
        self.fixed[k].is_some()
    }

    /// Commodity pairs per flat arc.
    pub fn pairs_by_arc(&self) -> BTreeMap<ArcId, BTreeSet<(usize, usize)>> {
        let mut out: BTreeMap<ArcId, BTreeSet<(usize, usize)>> = BTreeMap::new();
        for p in &self.pairs {
            out.entry(p.arc).or_default().insert((p.k1, p.k2));
        }
        out
    }
}

/// Input from routes in a partial flat network: commodities consolidate when
/// they share a timed arc.
pub fn ub_input_node_based(net: &PartialNetwork, routes: &[Trajectory]) -> UbInput {
    let legs = routes
        .iter()
        .map(|r| r.legs().map(|a| (a.arc.expect("movement"), a.tail.time, !net.is_short(a))).collect())
        .collect();
    UbInput::from_legs(legs)
}

/// Input from routes in a partial auxiliary network: commodities consolidate
/// when they leave along copies of the same flat arc at the same time.
pub fn ub_input_arc_based(aux: &AuxGraph, net: &PartialNetwork, routes: &[Trajectory]) -> Result<UbInput, UbError> {
    let mut legs = Vec::with_capacity(routes.len());
    for r in routes {
        let start = r.start().ok_or(UbError::BadRoute(r.commodity))?.node;
        let aux_arcs = r.flat_path();
        let (_, flat) = aux.phi_inverse(start, &aux_arcs).map_err(|_| UbError::BadRoute(r.commodity))?;
        legs.push(
            r.legs()
                .zip(flat)
                .map(|(a, f)| (f, a.tail.time, !net.is_short(a)))
                .collect(),
        );
    }
    Ok(UbInput::from_legs(legs))
}

#[derive(Debug, Clone)]
pub struct UbResult {
    /// Feasible routes in the full flat network.
    pub routes: Vec<Trajectory>,
    /// Exact cost of `routes`.
    pub objective: f64,
    /// Total departure mismatch over consolidated pairs.
    pub delta: f64,
    /// Commodities to refine, ascending.
    pub infeasible: Vec<usize>,
    /// The continuous program returned fractional times and was re-solved
    /// with integral times.
    pub integer_fallback: bool,
}

struct Program {
    model: Model,
    times: Vec<Vec<VarId>>,
}

fn program(inst: &Instance, graph: &FlatGraph, input: &UbInput, integral: bool) -> Program {
    let mut model = Model::new("lp_ub");
    let kind = if integral { VarKind::Integer } else { VarKind::Continuous };
    let horizon = inst.horizon as f64;
    let times: Vec<Vec<VarId>> = input
        .paths
        .iter()
        .enumerate()
        .map(|(k, path)| (0..path.len()).map(|p| model.add_var(format!("t_{k}_{p}"), kind, 0.0, horizon, 0.0)).collect())
        .collect();
    for (k, path) in input.paths.iter().enumerate() {
        let c = &inst.commodities[k];
        let t = &times[k];
        for p in 0..path.len().saturating_sub(1) {
            let tau = graph.arc(path[p]).transit as f64;
            model.add_row(format!("chain_{k}_{p}"), "chain", vec![(t[p], 1.0), (t[p + 1], -1.0)], Sense::Le, -tau);
        }
        if let (Some(&first), Some(&last)) = (t.first(), t.last()) {
            model.add_row(format!("release_{k}"), "release", vec![(first, 1.0)], Sense::Ge, c.release as f64);
            let tau = graph.arc(*path.last().expect("nonempty")).transit as f64;
            model.add_row(format!("deadline_{k}"), "deadline", vec![(last, 1.0)], Sense::Le, c.deadline as f64 - tau);
        }
        if let Some(fixed) = &input.fixed[k] {
            for (p, &dep) in fixed.iter().enumerate() {
                model.add_row(format!("fix_{k}_{p}"), "fixed", vec![(t[p], 1.0)], Sense::Eq, dep as f64);
            }
        }
    }
    for (i, pair) in input.pairs.iter().enumerate() {
        let d = model.add_var(format!("d_{}_{}_{}", pair.arc, pair.k1, pair.k2), VarKind::Continuous, 0.0, f64::INFINITY, 1.0);
        let (a, b) = (times[pair.k1][pair.p1], times[pair.k2][pair.p2]);
        model.add_row(format!("gap_{i}_a"), "mismatch", vec![(d, 1.0), (a, -1.0), (b, 1.0)], Sense::Ge, 0.0);
        model.add_row(format!("gap_{i}_b"), "mismatch", vec![(d, 1.0), (a, 1.0), (b, -1.0)], Sense::Ge, 0.0);
    }
    Program { model, times }
}

fn integral_times(prog: &Program, values: &[f64]) -> Option<Vec<Vec<Time>>> {
    prog.times
        .iter()
        .map(|vars| {
            vars.iter()
                .map(|v| {
                    let x = values[v.0];
                    ((x - x.round()).abs() <= TIME_TOL).then(|| x.round().max(0.0) as Time)
                })
                .collect()
        })
        .collect()
}

/// Solves the departure-time program and turns its times into full-network
/// routes with exact pricing.
pub fn solve_lp_ub(inst: &Instance, graph: &FlatGraph, input: &UbInput, backend: &dyn SolverBackend) -> Result<UbResult, UbError> {
    let params = SolveParams {
        rel_gap: 0.0,
        time_limit: None,
    };
    let mut prog = program(inst, graph, input, false);
    let mut sol = backend.solve(&prog.model, &params)?;
    if sol.status != Status::Optimal {
        return Err(UbError::NotSolved(sol.status));
    }
    let mut integer_fallback = false;
    let times = match integral_times(&prog, &sol.values) {
        Some(t) => t,
        None => {
            warn!("departure-time program returned fractional times; re-solving with integral times");
            integer_fallback = true;
            prog = program(inst, graph, input, true);
            sol = backend.solve(&prog.model, &params)?;
            if sol.status != Status::Optimal {
                return Err(UbError::NotSolved(sol.status));
            }
            integral_times(&prog, &sol.values).expect("integer columns are integral")
        }
    };
    let mut infeasible = BTreeSet::new();
    let mut delta = 0.0;
    for pair in &input.pairs {
        let d = (times[pair.k1][pair.p1] as f64 - times[pair.k2][pair.p2] as f64).abs();
        delta += d;
        if d > 0.0 {
            for k in [pair.k1, pair.k2] {
                if !input.is_fixed(k) {
                    infeasible.insert(k);
                }
            }
        }
    }
    let routes: Vec<Trajectory> = input
        .paths
        .iter()
        .enumerate()
        .map(|(k, path)| {
            let c = &inst.commodities[k];
            let deps: Vec<(ArcId, Time)> = path.iter().copied().zip(times[k].iter().copied()).collect();
            Trajectory::in_full(k, graph, c.origin, c.release, &deps, c.deadline)
        })
        .collect();
    let objective = price(inst, &routes);
    Ok(UbResult {
        routes,
        objective,
        delta,
        infeasible: infeasible.into_iter().collect(),
        integer_fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::{arc, commodity};
    use crate::model::routes_feasible;
    use sndrr_milp::NativeBackend;

    /// Arc 0 -> 1 (τ 1) then 1 -> 2 (τ 2).
    fn chain() -> Instance {
        Instance {
            nodes: 3,
            arcs: vec![arc(0, 1, 1), arc(1, 2, 2)],
            commodities: vec![commodity(0, 0, 2, 0, 6), commodity(1, 1, 2, 0, 6)],
            horizon: 6,
            regions: None,
            critical_times: None,
        }
    }

    #[test]
    fn single_commodity_has_no_pairs() {
        let mut inst = chain();
        inst.commodities.truncate(1);
        let graph = FlatGraph::of_instance(&inst);
        let input = UbInput {
            paths: vec![vec![0, 1]],
            pairs: vec![],
            fixed: vec![None],
        };
        let res = solve_lp_ub(&inst, &graph, &input, &NativeBackend).unwrap();
        assert_eq!(res.delta, 0.0);
        assert!(res.infeasible.is_empty());
        routes_feasible(&inst, &res.routes).unwrap();
    }

    #[test]
    fn forced_mismatch_flags_the_free_commodity() {
        // k0 is fixed to leave 0 at time 0 and so reaches 1 at time 1; k1 was
        // seen sharing arc 1 -> 2 with k0 at time 0, which no schedule allows
        let inst = chain();
        let graph = FlatGraph::of_instance(&inst);
        let input = UbInput {
            paths: vec![vec![0, 1], vec![1]],
            pairs: vec![Pair {
                arc: 1,
                k1: 0,
                p1: 1,
                k2: 1,
                p2: 0,
            }],
            fixed: vec![Some(vec![0, 1]), None],
        };
        let res = solve_lp_ub(&inst, &graph, &input, &NativeBackend).unwrap();
        assert_eq!(res.delta, 0.0);
        let input = UbInput {
            fixed: vec![Some(vec![0, 2]), Some(vec![0])],
            ..input
        };
        let res = solve_lp_ub(&inst, &graph, &input, &NativeBackend).unwrap();
        assert_eq!(res.delta, 2.0);
        assert!(res.infeasible.is_empty());
        let input = UbInput {
            fixed: vec![Some(vec![0, 1]), None],
            paths: vec![vec![0, 1], vec![1]],
            pairs: vec![Pair {
                arc: 1,
                k1: 0,
                p1: 1,
                k2: 1,
                p2: 0,
            }],
        };
        let mut inst2 = inst.clone();
        inst2.commodities[1].deadline = 2;
        let res = solve_lp_ub(&inst2, &graph, &input, &NativeBackend).unwrap();
        assert_eq!(res.delta, 1.0);
        assert_eq!(res.infeasible, vec![1]);
        routes_feasible(&inst2, &res.routes).unwrap();
    }

    #[test]
    fn pairs_are_canonical() {
        let input = UbInput::from_legs(vec![vec![(1, 3, true)], vec![(1, 3, false)], vec![(1, 3, true), (2, 5, true)]]);
        assert_eq!(input.pairs.len(), 3);
        assert!(input.pairs.iter().all(|p| p.k1 < p.k2));
        assert_eq!(input.fixed[1], None);
        assert_eq!(input.fixed[2], Some(vec![3, 5]));
        assert_eq!(input.pairs_by_arc()[&1].len(), 3);
    }
}
