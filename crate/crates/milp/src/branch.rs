//! LP-based branch-and-bound on top of the dense simplex.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::backend::{SolveParams, SolverError};
use crate::model::{Model, Solution, Status, VarKind};
use crate::simplex::{LpOutcome, Simplex};

const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    /// Tightened bounds `(column, lower, upper)` relative to the root.
    fixes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: smallest bound first, then deepest, then newest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.seq.cmp(&other.seq))
    }
}

struct Search<'m> {
    model: &'m Model,
    lp: Simplex,
    root_bounds: Vec<(f64, f64)>,
    applied: Vec<usize>,
    integral_objective: bool,
    incumbent: Option<(f64, Vec<f64>)>,
    nodes: usize,
    seq: usize,
}

impl<'m> Search<'m> {
    fn cutoff(&self, rel_gap: f64) -> f64 {
        match &self.incumbent {
            Some((obj, _)) => obj - (rel_gap * obj.abs()).max(1e-9),
            None => f64::INFINITY,
        }
    }

    fn strengthen(&self, bound: f64) -> f64 {
        if self.integral_objective {
            (bound - 1e-6).ceil()
        } else {
            bound
        }
    }

    fn load(&mut self, fixes: &[(usize, f64, f64)]) {
        for &j in &self.applied {
            let (lo, hi) = self.root_bounds[j];
            self.lp.set_bounds(j, lo, hi);
        }
        self.applied.clear();
        for &(j, lo, hi) in fixes {
            self.lp.set_bounds(j, lo, hi);
            self.applied.push(j);
        }
    }

    fn solve_lp(&mut self) -> Result<LpOutcome, SolverError> {
        let out = self.lp.solve();
        if out != LpOutcome::IterationLimit {
            return Ok(out);
        }
        log::debug!("simplex iteration limit hit; refactoring and retrying");
        self.lp.refactor();
        self.lp.iterations = 0;
        match self.lp.solve() {
            LpOutcome::IterationLimit => Err(SolverError::Numerical("simplex failed to converge".into())),
            other => Ok(other),
        }
    }

    /// Most fractional binary, else most fractional general integer.
    fn branching_variable(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, bool, f64)> = None;
        for (j, v) in self.model.vars.iter().enumerate() {
            if !v.kind.is_integral() {
                continue;
            }
            let frac = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
            if frac <= INT_TOL {
                continue;
            }
            let binary = v.kind == VarKind::Binary;
            let better = match best {
                None => true,
                Some((_, b, f)) => (binary && !b) || (binary == b && frac > f + 1e-12),
            };
            if better {
                best = Some((j, binary, frac));
            }
        }
        best.map(|(j, _, _)| j)
    }

    fn rounded(&self, x: &[f64]) -> Vec<f64> {
        self.model
            .vars
            .iter()
            .zip(x)
            .map(|(v, &xi)| if v.kind.is_integral() { xi.round() } else { xi })
            .collect()
    }
}

pub(crate) fn branch_and_bound(model: &Model, params: &SolveParams) -> Result<Solution, SolverError> {
    let started = Instant::now();
    let deadline = params.time_limit.map(|d| started + d);
    let mut lp = Simplex::from_model(model);
    lp.deadline = deadline;
    let root_bounds = (0..model.num_vars()).map(|j| lp.bounds(j)).collect();
    let integral_objective = model.vars.iter().all(|v| {
        v.obj == 0.0 || (v.kind.is_integral() && (v.obj - v.obj.round()).abs() < 1e-12)
    }) && model.is_mip();
    let mut search = Search {
        model,
        lp,
        root_bounds,
        applied: Vec::new(),
        integral_objective,
        incumbent: None,
        nodes: 0,
        seq: 0,
    };

    let mut heap = BinaryHeap::new();
    // diving stack; emptied into the heap whenever a dive ends
    let mut dive: Vec<Node> = vec![Node {
        bound: f64::NEG_INFINITY,
        depth: 0,
        seq: 0,
        fixes: Vec::new(),
    }];
    let mut timed_out = false;
    let mut root_bound = f64::NEG_INFINITY;
    // smallest bound among nodes discarded because of the gap tolerance
    let mut pruned_floor = f64::INFINITY;

    loop {
        let node = match dive.pop() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => n,
                None => break,
            },
        };
        if node.bound >= search.cutoff(params.rel_gap) {
            pruned_floor = pruned_floor.min(node.bound);
            continue;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            heap.push(node);
            heap.extend(dive.drain(..));
            timed_out = true;
            break;
        }
        search.nodes += 1;
        search.load(&node.fixes);
        let outcome = search.solve_lp()?;
        match outcome {
            LpOutcome::TimeLimit => {
                heap.push(node);
                heap.extend(dive.drain(..));
                timed_out = true;
                break;
            }
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => {
                if search.incumbent.is_none() && node.depth == 0 {
                    return Ok(Solution {
                        status: Status::Unbounded,
                        objective: f64::NEG_INFINITY,
                        bound: f64::NEG_INFINITY,
                        values: Vec::new(),
                        nodes: search.nodes,
                    });
                }
                return Err(SolverError::Numerical("unbounded subproblem".into()));
            }
            LpOutcome::IterationLimit => unreachable!("handled by solve_lp"),
            LpOutcome::Optimal => {}
        }
        let lp_obj = search.lp.objective();
        let bound = search.strengthen(lp_obj).max(node.bound);
        if node.depth == 0 {
            root_bound = bound;
        }
        if bound >= search.cutoff(params.rel_gap) {
            pruned_floor = pruned_floor.min(bound);
            heap.extend(dive.drain(..));
            continue;
        }
        let x = search.lp.structural_values();
        let Some(j) = search.branching_variable(&x) else {
            let point = search.rounded(&x);
            let obj = model.objective_value(&point);
            if search.incumbent.as_ref().is_none_or(|(best, _)| obj < *best) {
                log::trace!("incumbent {obj} at node {}", search.nodes);
                search.incumbent = Some((obj, point));
            }
            heap.extend(dive.drain(..));
            continue;
        };
        let xj = x[j];
        let (lo, hi) = node
            .fixes
            .iter()
            .rev()
            .find(|f| f.0 == j)
            .map(|f| (f.1, f.2))
            .unwrap_or(search.root_bounds[j]);
        let mut down = node.fixes.clone();
        down.retain(|f| f.0 != j);
        let mut up = down.clone();
        down.push((j, lo, xj.floor()));
        up.push((j, xj.ceil(), hi));
        let binary = model.vars[j].kind == VarKind::Binary;
        let up_first = if binary { xj - xj.floor() >= 0.5 } else { true };
        let mut make = |fixes| {
            search.seq += 1;
            Node {
                bound,
                depth: node.depth + 1,
                seq: search.seq,
                fixes,
            }
        };
        let (first, second) = if up_first { (make(up), make(down)) } else { (make(down), make(up)) };
        // the second child waits in the heap; the first continues the dive
        heap.push(second);
        dive.push(first);
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let nodes = search.nodes;
    match search.incumbent {
        Some((obj, values)) => {
            let bound = open_bound.min(pruned_floor).min(obj).max(root_bound.min(obj));
            let status = if !timed_out || crate::model::relative_gap(obj, bound) <= params.rel_gap {
                Status::Optimal
            } else {
                Status::TimeLimit
            };
            Ok(Solution {
                status,
                objective: obj,
                bound,
                values,
                nodes,
            })
        }
        None if timed_out => Ok(Solution {
            status: Status::TimeLimit,
            objective: f64::INFINITY,
            bound: open_bound.max(root_bound),
            values: Vec::new(),
            nodes,
        }),
        None => Ok(Solution {
            status: Status::Infeasible,
            objective: f64::INFINITY,
            bound: f64::INFINITY,
            values: Vec::new(),
            nodes,
        }),
    }
}

/// Solve a model without integrality restrictions.
pub(crate) fn solve_lp(model: &Model, params: &SolveParams) -> Result<Solution, SolverError> {
    let mut lp = Simplex::from_model(model);
    lp.deadline = params.time_limit.map(|d| Instant::now() + d);
    let mut out = lp.solve();
    if out == LpOutcome::IterationLimit {
        lp.refactor();
        lp.iterations = 0;
        out = lp.solve();
    }
    let sol = |status, objective, bound, values| Solution {
        status,
        objective,
        bound,
        values,
        nodes: 0,
    };
    Ok(match out {
        LpOutcome::Optimal => {
            let obj = lp.objective();
            sol(Status::Optimal, obj, obj, lp.structural_values())
        }
        LpOutcome::Infeasible => sol(Status::Infeasible, f64::INFINITY, f64::INFINITY, Vec::new()),
        LpOutcome::Unbounded => sol(Status::Unbounded, f64::NEG_INFINITY, f64::NEG_INFINITY, Vec::new()),
        LpOutcome::TimeLimit => sol(Status::TimeLimit, f64::INFINITY, f64::NEG_INFINITY, Vec::new()),
        LpOutcome::IterationLimit => return Err(SolverError::Numerical("simplex failed to converge".into())),
    })
}
