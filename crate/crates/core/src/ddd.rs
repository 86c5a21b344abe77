//! Dynamic discretization discovery on the flat network (node-based) or on
//! the auxiliary network (arc-based), and the direct full-network solve.

use std::time::{Duration, Instant};

use log::{debug, info};
use serde::{Deserialize, Serialize};
use sndrr_milp::{relative_gap, SolveParams, SolverBackend, SolverError, Status};
use thiserror::Error;

use crate::auxiliary::{AuxError, AuxGraph};
use crate::expansion::{initial_timed_nodes, ExpansionError, PartialNetwork, TimedArc, Trajectory};
use crate::graph::{CommodityNet, FlatGraph};
use crate::instance::{Instance, NodeId, Time};
use crate::model::{build_aux_partial_model, build_full_model, build_partial_model, price, ExtractError, TimeIndexed};
use crate::partition::{ArcPartition, PartitionError, PartitionKind};
use crate::upper_bound::{solve_lp_ub, ub_input_arc_based, ub_input_node_based, UbError, UbInput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Node,
    Arc,
    Direct,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Node => "node",
            Method::Arc => "arc",
            Method::Direct => "direct",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "node" => Some(Method::Node),
            "arc" => Some(Method::Arc),
            "direct" => Some(Method::Direct),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DddConfig {
    pub method: Method,
    /// Relative optimality gap; also passed to every relaxation solve.
    pub gap: f64,
    pub time_limit: Option<Duration>,
    pub partition: PartitionKind,
    /// Recorded with results; the algorithms themselves are deterministic.
    pub seed: u64,
    /// Leave nodes without incoming arcs unmerged in the finest partition.
    pub relax_sourceless: bool,
}

impl Default for DddConfig {
    fn default() -> Self {
        DddConfig {
            method: Method::Arc,
            gap: 0.01,
            time_limit: None,
            partition: PartitionKind::Finest,
            seed: 0,
            relax_sourceless: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum DddError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Aux(#[from] AuxError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    UpperBound(#[from] UbError),
    #[error("relaxation is {0:?}")]
    Relaxation(Status),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Bounds closed to within the gap.
    Optimal,
    TimeLimit,
    /// No timed node could be added although the gap stayed open.
    Stalled,
    IterationLimit,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Optimal => "optimal",
            RunStatus::TimeLimit => "time_limit",
            RunStatus::Stalled => "stalled",
            RunStatus::IterationLimit => "iteration_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    /// Best lower bound so far.
    pub lower_bound: f64,
    /// Best upper bound so far.
    pub upper_bound: f64,
    pub iteration_lower: f64,
    pub iteration_upper: f64,
    pub variables: usize,
    pub constraints: usize,
    pub movement_flow_vars: usize,
    pub timed_nodes: usize,
    /// Commodities whose relaxed routes could not be realised.
    pub infeasible: Vec<usize>,
    pub delta: f64,
    pub added: usize,
    pub safeguard: bool,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct DddResult {
    pub method: Method,
    pub status: RunStatus,
    pub objective: f64,
    pub lower_bound: f64,
    /// Routes in the full flat network, one per commodity.
    pub routes: Vec<Trajectory>,
    pub iterations: Vec<IterationStats>,
    /// Largest iteration count the algorithm may need.
    pub iteration_bound: usize,
    pub safeguard_events: usize,
    pub wall: Duration,
}

impl DddResult {
    pub fn gap(&self) -> f64 {
        relative_gap(self.objective, self.lower_bound)
    }

    pub fn last(&self) -> Option<&IterationStats> {
        self.iterations.last()
    }
}

pub fn gap_closed(upper: f64, lower: f64, gap: f64) -> bool {
    upper.is_finite() && lower.is_finite() && upper - lower <= (gap * upper.abs()).max(1e-9 * upper.abs().max(1.0))
}

/// What the loop needs from a discretisation.
trait Discretization {
    fn timed_nodes(&self) -> usize;
    fn model(&self) -> TimeIndexed;
    fn ub_input(&self, routes: &[Trajectory]) -> Result<UbInput, DddError>;
    fn network(&self) -> &PartialNetwork<'_>;
    fn refine(&mut self, node: NodeId, time: Time) -> Result<(), ExpansionError>;
}

struct NodeBased<'a, 'g> {
    inst: &'a Instance,
    net: PartialNetwork<'g>,
}

impl Discretization for NodeBased<'_, '_> {
    fn timed_nodes(&self) -> usize {
        self.net.num_timed_nodes()
    }

    fn model(&self) -> TimeIndexed {
        build_partial_model(self.inst, &self.net)
    }

    fn ub_input(&self, routes: &[Trajectory]) -> Result<UbInput, DddError> {
        Ok(ub_input_node_based(&self.net, routes))
    }

    fn network(&self) -> &PartialNetwork<'_> {
        &self.net
    }

    fn refine(&mut self, node: NodeId, time: Time) -> Result<(), ExpansionError> {
        self.net.refine(node, time)
    }
}

struct ArcBased<'a, 'g> {
    inst: &'a Instance,
    aux: &'g AuxGraph,
    nets: Vec<CommodityNet>,
    net: PartialNetwork<'g>,
}

impl Discretization for ArcBased<'_, '_> {
    fn timed_nodes(&self) -> usize {
        self.net.num_timed_nodes()
    }

    fn model(&self) -> TimeIndexed {
        build_aux_partial_model(self.inst, self.aux, &self.nets, &self.net)
    }

    fn ub_input(&self, routes: &[Trajectory]) -> Result<UbInput, DddError> {
        Ok(ub_input_arc_based(self.aux, &self.net, routes)?)
    }

    fn network(&self) -> &PartialNetwork<'_> {
        &self.net
    }

    fn refine(&mut self, node: NodeId, time: Time) -> Result<(), ExpansionError> {
        self.net.refine(node, time)
    }
}

/// Short arcs of a route in departure order.
fn short_arcs(net: &PartialNetwork, route: &Trajectory) -> Vec<TimedArc> {
    let mut arcs: Vec<TimedArc> = route.legs().filter(|a| net.is_short(a)).copied().collect();
    arcs.sort_by_key(|a| a.tail.time);
    arcs
}

fn lengthened(net: &PartialNetwork, a: &TimedArc) -> (NodeId, Time) {
    let tau = net.graph().arc(a.arc.expect("movement")).transit;
    (a.head.node, a.tail.time + tau)
}

fn run_loop(
    inst: &Instance,
    flat: &FlatGraph,
    disc: &mut dyn Discretization,
    method: Method,
    iteration_bound: usize,
    config: &DddConfig,
    backend: &dyn SolverBackend,
) -> Result<DddResult, DddError> {
    let start = Instant::now();
    let deadline = config.time_limit.map(|d| start + d);
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut best: Vec<Trajectory> = Vec::new();
    let mut iterations = Vec::new();
    let mut safeguard_events = 0;
    let mut status = RunStatus::IterationLimit;

    for iteration in 1..=iteration_bound {
        let remaining = match deadline {
            Some(d) => match d.checked_duration_since(Instant::now()) {
                Some(r) if !r.is_zero() => Some(r),
                _ => {
                    status = RunStatus::TimeLimit;
                    break;
                }
            },
            None => None,
        };
        let tm = disc.model();
        let params = SolveParams {
            rel_gap: config.gap,
            time_limit: remaining,
        };
        let sol = backend.solve(&tm.model, &params)?;
        match sol.status {
            Status::Optimal => {}
            Status::TimeLimit => {
                lower = lower.max(sol.bound);
                status = RunStatus::TimeLimit;
                break;
            }
            s => return Err(DddError::Relaxation(s)),
        }
        lower = lower.max(sol.bound.min(sol.objective));
        let relaxed = tm.extract_all(&sol.values)?;
        let input = disc.ub_input(&relaxed)?;
        let ub = solve_lp_ub(inst, flat, &input, backend)?;
        if ub.objective < upper {
            upper = ub.objective;
            best = ub.routes.clone();
        }
        let mut stats = IterationStats {
            iteration,
            lower_bound: lower,
            upper_bound: upper,
            iteration_lower: sol.bound,
            iteration_upper: ub.objective,
            variables: tm.model.num_vars(),
            constraints: tm.model.num_rows(),
            movement_flow_vars: tm.movement_flow_vars(),
            timed_nodes: disc.timed_nodes(),
            infeasible: ub.infeasible.clone(),
            delta: ub.delta,
            added: 0,
            safeguard: false,
            wall_seconds: start.elapsed().as_secs_f64(),
        };
        debug!(
            "{} iteration {iteration}: lb {lower} ub {upper} |C| {} nodes {}",
            method.name(),
            ub.infeasible.len(),
            stats.timed_nodes
        );
        if gap_closed(upper, lower, config.gap) {
            iterations.push(stats);
            status = RunStatus::Optimal;
            break;
        }

        let mut additions: Vec<(NodeId, Time)> = Vec::new();
        for &k in &ub.infeasible {
            if let Some(a) = short_arcs(disc.network(), &relaxed[k]).first() {
                let target = lengthened(disc.network(), a);
                if !additions.contains(&target) {
                    additions.push(target);
                }
            }
        }
        if additions.is_empty() {
            // nothing proposed: lengthen the earliest short arc that adds a node,
            // preferring the flagged commodities
            let order = ub.infeasible.iter().copied().chain(0..relaxed.len());
            'outer: for k in order {
                for a in short_arcs(disc.network(), &relaxed[k]) {
                    let target = lengthened(disc.network(), &a);
                    if !disc.network().contains(target.0, target.1) {
                        additions.push(target);
                        stats.safeguard = true;
                        safeguard_events += 1;
                        break 'outer;
                    }
                }
            }
        }
        for &(v, t) in &additions {
            disc.refine(v, t)?;
        }
        stats.added = additions.len();
        iterations.push(stats);
        if additions.is_empty() {
            status = RunStatus::Stalled;
            break;
        }
    }

    let wall = start.elapsed();
    info!(
        "{} finished: {} after {} iterations, objective {upper}, bound {lower}",
        method.name(),
        status.name(),
        iterations.len()
    );
    Ok(DddResult {
        method,
        status,
        objective: upper,
        lower_bound: lower,
        routes: best,
        iterations,
        iteration_bound,
        safeguard_events,
        wall,
    })
}

/// Node-based discretization discovery on the flat network.
pub fn solve_node_based(inst: &Instance, config: &DddConfig, backend: &dyn SolverBackend) -> Result<DddResult, DddError> {
    let flat = FlatGraph::of_instance(inst);
    let net = PartialNetwork::from_times(&flat, inst.horizon, initial_timed_nodes(inst))?;
    let bound = inst.nodes * inst.horizon as usize;
    let mut disc = NodeBased { inst, net };
    run_loop(inst, &flat, &mut disc, Method::Node, bound.max(1), config, backend)
}

/// Arc-based discretization discovery on the auxiliary network of the
/// configured partition.
pub fn solve_arc_based(inst: &Instance, config: &DddConfig, backend: &dyn SolverBackend) -> Result<DddResult, DddError> {
    let partition = ArcPartition::build(inst, config.partition, config.relax_sourceless)?;
    solve_arc_based_with(inst, &partition, config, backend)
}

pub fn solve_arc_based_with(
    inst: &Instance,
    partition: &ArcPartition,
    config: &DddConfig,
    backend: &dyn SolverBackend,
) -> Result<DddResult, DddError> {
    let flat = FlatGraph::of_instance(inst);
    let aux = AuxGraph::new(inst, partition);
    let nets = aux.commodity_nets(inst, partition)?;
    let net = PartialNetwork::from_times(aux.graph(), inst.horizon, aux.initial_times(inst, &nets))?;
    let bound = aux.num_nodes() * inst.horizon as usize;
    let mut disc = ArcBased {
        inst,
        aux: &aux,
        nets,
        net,
    };
    run_loop(inst, &flat, &mut disc, Method::Arc, bound.max(1), config, backend)
}

/// The full-network model solved directly.
pub fn solve_direct(inst: &Instance, config: &DddConfig, backend: &dyn SolverBackend) -> Result<DddResult, DddError> {
    let start = Instant::now();
    let tm = build_full_model(inst);
    let params = SolveParams {
        rel_gap: config.gap,
        time_limit: config.time_limit,
    };
    let sol = backend.solve(&tm.model, &params)?;
    let status = match sol.status {
        Status::Optimal => RunStatus::Optimal,
        Status::TimeLimit => RunStatus::TimeLimit,
        s => return Err(DddError::Relaxation(s)),
    };
    let (routes, objective) = if sol.has_point() {
        let routes = tm.extract_all(&sol.values)?;
        let objective = price(inst, &routes);
        (routes, objective)
    } else {
        (Vec::new(), f64::INFINITY)
    };
    let wall = start.elapsed();
    let stats = IterationStats {
        iteration: 1,
        lower_bound: sol.bound,
        upper_bound: objective,
        iteration_lower: sol.bound,
        iteration_upper: objective,
        variables: tm.model.num_vars(),
        constraints: tm.model.num_rows(),
        movement_flow_vars: tm.movement_flow_vars(),
        timed_nodes: inst.nodes * (inst.horizon as usize + 1),
        infeasible: Vec::new(),
        delta: 0.0,
        added: 0,
        safeguard: false,
        wall_seconds: wall.as_secs_f64(),
    };
    Ok(DddResult {
        method: Method::Direct,
        status,
        objective,
        lower_bound: sol.bound,
        routes,
        iterations: vec![stats],
        iteration_bound: 1,
        safeguard_events: 0,
        wall,
    })
}

pub fn solve(inst: &Instance, config: &DddConfig, backend: &dyn SolverBackend) -> Result<DddResult, DddError> {
    match config.method {
        Method::Node => solve_node_based(inst, config, backend),
        Method::Arc => solve_arc_based(inst, config, backend),
        Method::Direct => solve_direct(inst, config, backend),
    }
}
