//! Invariant checks shared by the property suite and the acceptance run.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use sndrr::auxiliary::AuxGraph;
use sndrr::expansion::{PartialNetwork, TimedArc, Trajectory};
use sndrr::graph::FlatGraph;
use sndrr::instance::{Arc, Instance, NodeId, Time};
use sndrr::partition::ArcPartition;

#[derive(Debug, Clone)]
pub struct Net {
    pub nodes: usize,
    pub arcs: Vec<(NodeId, NodeId, Time)>,
    pub horizon: Time,
}

impl Net {
    fn instance(&self) -> Instance {
        Instance {
            nodes: self.nodes,
            arcs: self
                .arcs
                .iter()
                .map(|&(tail, head, transit)| Arc {
                    tail,
                    head,
                    transit,
                    fixed_cost: 1.0,
                    capacity: 1,
                    var_cost: 1.0,
                })
                .collect(),
            commodities: Vec::new(),
            horizon: self.horizon,
            regions: None,
            critical_times: None,
        }
    }

    fn graph(&self) -> FlatGraph {
        FlatGraph::of_instance(&self.instance())
    }
}

pub fn net() -> impl Strategy<Value = Net> {
    (2usize..=6, 3u32..=14).prop_flat_map(|(n, horizon)| {
        let pairs: Vec<(NodeId, NodeId)> = (0..n)
            .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        let len = pairs.len();
        (
            prop::collection::vec(any::<bool>(), len),
            prop::collection::vec(1u32..=4, len),
        )
            .prop_map(move |(keep, transit)| Net {
                nodes: n,
                arcs: pairs
                    .iter()
                    .zip(keep.iter().zip(&transit))
                    .filter(|(_, (k, _))| **k)
                    .map(|(&(u, v), (_, &t))| (u, v, t))
                    .collect(),
                horizon,
            })
    })
}

/// Time sets: 0 plus a random subset of `1..=T` at every node.
fn times_for(nodes: usize, horizon: Time) -> impl Strategy<Value = Vec<Vec<Time>>> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), horizon as usize), nodes).prop_map(|masks| {
        masks
            .into_iter()
            .map(|m| {
                std::iter::once(0)
                    .chain(m.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as Time + 1))
                    .collect()
            })
            .collect()
    })
}

pub fn net_with_times() -> impl Strategy<Value = (Net, Vec<Vec<Time>>)> {
    net().prop_flat_map(|n| {
        let times = times_for(n.nodes, n.horizon);
        (Just(n), times)
    })
}

/// A walk picked by `choices` with waits `waits`, departing no earlier
/// than `t0`, stopping when the horizon would be exceeded.
fn walk(graph: &FlatGraph, horizon: Time, start: NodeId, t0: Time, choices: &[usize], waits: &[Time]) -> Vec<(usize, Time)> {
    let mut out = Vec::new();
    let (mut v, mut t) = (start, t0);
    for (c, w) in choices.iter().zip(waits) {
        let leaving = graph.out_arcs(v);
        if leaving.is_empty() {
            break;
        }
        let a = leaving[c % leaving.len()];
        let dep = t + w;
        let arr = dep + graph.arc(a).transit;
        if arr > horizon {
            break;
        }
        out.push((a, dep));
        v = graph.arc(a).head;
        t = arr;
    }
    out
}

fn latest_at_most(ts: &[Time], t: Time) -> Time {
    ts.iter().copied().filter(|&s| s <= t).max().expect("0 present")
}

/// Arc copies recomputed from time sets alone.
fn rebuilt_copies(graph: &FlatGraph, horizon: Time, times: &[Vec<Time>]) -> Vec<BTreeSet<(Time, Time)>> {
    graph
        .arcs()
        .iter()
        .map(|arc| {
            times[arc.tail]
                .iter()
                .filter(|&&t| t + arc.transit <= horizon)
                .map(|&t| (t, latest_at_most(&times[arc.head], t + arc.transit)))
                .collect()
        })
        .collect()
}

fn copies_of(net: &PartialNetwork) -> Vec<BTreeSet<(Time, Time)>> {
    (0..net.graph().num_arcs()).map(|a| net.copies(a).iter().copied().collect()).collect()
}

fn sorted(times: &[Vec<Time>]) -> Vec<Vec<Time>> {
    times
        .iter()
        .map(|ts| {
            let mut ts = ts.clone();
            ts.sort_unstable();
            ts.dedup();
            ts
        })
        .collect()
}

/// Each node's outgoing arcs dealt into parts by `labels`.
fn partition(inst: &Instance, labels: &[usize]) -> ArcPartition {
    let mut parts = vec![BTreeMap::<usize, Vec<usize>>::new(); inst.nodes];
    for (a, arc) in inst.arcs.iter().enumerate() {
        parts[arc.tail].entry(labels[a % labels.len()] % 3).or_default().push(a);
    }
    ArcPartition::from_parts(inst, parts.into_iter().map(|p| p.into_values().collect()).collect()).unwrap()
}

pub type MuCase = ((Net, Vec<Vec<Time>>), usize, Vec<usize>, Vec<Time>);

pub fn mu_case() -> impl Strategy<Value = MuCase> {
    (
        net_with_times(),
        0usize..6,
        prop::collection::vec(0usize..8, 0..6),
        prop::collection::vec(0u32..3, 6),
    )
}

/// Mapping a full-network trajectory into a partial network keeps it well
/// formed and rounds every departure down to the latest present time.
pub fn check_mu(((n, times), start, choices, waits): MuCase) -> Result<(), TestCaseError> {
    let graph = n.graph();
    let start = start % n.nodes;
    let partial = PartialNetwork::from_times(&graph, n.horizon, times.clone()).unwrap();
    let legs = walk(&graph, n.horizon, start, 0, &choices, &waits);
    let full = Trajectory::in_full(0, &graph, start, 0, &legs, n.horizon);
    let mapped = full.map_into(&partial, 0, n.horizon);
    prop_assert!(mapped.is_some(), "rounding down must keep departures ordered");
    let mapped = mapped.unwrap();
    prop_assert!(mapped.is_well_formed(&partial));
    prop_assert_eq!(mapped.flat_path(), full.flat_path());
    let times = sorted(&times);
    for (orig, got) in full.legs().zip(mapped.legs()) {
        let a = orig.arc.unwrap();
        let tail = latest_at_most(&times[orig.tail.node], orig.tail.time);
        prop_assert_eq!(got.tail.time, tail);
        prop_assert!(got.tail.time <= orig.tail.time);
        prop_assert!(got.head.time <= orig.head.time);
        prop_assert_eq!(got.head.time, latest_at_most(&times[orig.head.node], tail + graph.arc(a).transit));
    }
    Ok(())
}

pub type LiftCase = (Net, Vec<usize>, usize, Vec<usize>, Vec<Time>, Time);

pub fn lift_case() -> impl Strategy<Value = LiftCase> {
    (
        net(),
        prop::collection::vec(0usize..3, 1..12),
        0usize..6,
        prop::collection::vec(0usize..8, 0..6),
        prop::collection::vec(0u32..3, 6),
        0u32..3,
    )
}

/// Flat paths and trajectories survive a lift to the auxiliary network and
/// back unchanged.
pub fn check_lift((n, labels, start, choices, waits, release): LiftCase) -> Result<(), TestCaseError> {
    let inst = n.instance();
    let graph = n.graph();
    let part = partition(&inst, &labels);
    let aux = AuxGraph::new(&inst, &part);
    let start = start % n.nodes;
    let release = release.min(n.horizon);
    let legs = walk(&graph, n.horizon, start, release, &choices, &waits);
    let path: Vec<usize> = legs.iter().map(|l| l.0).collect();

    let (s, lifted) = aux.phi(&graph, start, &path).unwrap();
    prop_assert!(aux.graph().is_walk(s, &lifted));
    prop_assert!(aux.is_terminal(aux.graph().walk_end(s, &lifted)));
    prop_assert_eq!(aux.phi_inverse(s, &lifted).unwrap(), (start, path.clone()));

    let traj = Trajectory::in_full(0, &graph, start, release, &legs, n.horizon);
    let up = aux.phi_t(&graph, &traj, release, n.horizon).unwrap();
    prop_assert_eq!(
        up.departures().iter().map(|d| d.1).collect::<Vec<_>>(),
        legs.iter().map(|l| l.1).collect::<Vec<_>>()
    );
    prop_assert_eq!(aux.phi_t_inverse(&graph, &up, release, n.horizon).unwrap(), traj);
    Ok(())
}

pub type LowerCase = (Net, Vec<usize>, usize, Vec<usize>);

pub fn lower_case() -> impl Strategy<Value = LowerCase> {
    (
        net(),
        prop::collection::vec(0usize..3, 1..12),
        0usize..40,
        prop::collection::vec(0usize..8, 0..6),
    )
}

/// Auxiliary walks ending at a terminal copy come back from the flat
/// network unchanged; other walks are rejected.
pub fn check_lower((n, labels, start, choices): LowerCase) -> Result<(), TestCaseError> {
    let inst = n.instance();
    let part = partition(&inst, &labels);
    let aux = AuxGraph::new(&inst, &part);
    let g = aux.graph();
    let s = start % aux.num_nodes();
    let mut path = Vec::new();
    let mut at = s;
    for c in choices {
        let leaving = g.out_arcs(at);
        if leaving.is_empty() {
            break;
        }
        let e = leaving[c % leaving.len()];
        path.push(e);
        at = g.arc(e).head;
    }
    match aux.phi_inverse(s, &path) {
        Ok((v, flat)) => prop_assert_eq!(aux.phi(&n.graph(), v, &flat).unwrap(), (s, path)),
        Err(_) => prop_assert!(!aux.is_terminal(at)),
    }
    Ok(())
}

pub type RefineCase = ((Net, Vec<Vec<Time>>), Vec<(usize, Time)>);

pub fn refine_case() -> impl Strategy<Value = RefineCase> {
    (net_with_times(), prop::collection::vec((0usize..6, 1u32..=14), 1..10))
}

/// Rebuilding from a network's own time sets is the identity, and each
/// refinement step matches a rebuild while only lengthening arcs.
pub fn check_refine(((n, times), steps): RefineCase) -> Result<(), TestCaseError> {
    let graph = n.graph();
    let mut partial = PartialNetwork::from_times(&graph, n.horizon, times.clone()).unwrap();
    let again = PartialNetwork::from_times(&graph, n.horizon, partial.time_sets().to_vec()).unwrap();
    prop_assert_eq!(&again, &partial);

    let mut current = sorted(&times);
    for (v, t) in steps {
        let v = v % n.nodes;
        let t = t.min(n.horizon);
        let before = copies_of(&partial);
        let count = partial.num_timed_nodes();
        match partial.refine(v, t) {
            Ok(()) => {
                prop_assert!(!current[v].contains(&t));
                current[v].push(t);
                current[v].sort_unstable();
                prop_assert_eq!(partial.num_timed_nodes(), count + 1);
            }
            Err(_) => {
                prop_assert!(current[v].contains(&t));
                continue;
            }
        }
        prop_assert_eq!(partial.time_sets(), &current[..]);
        prop_assert_eq!(copies_of(&partial), rebuilt_copies(&graph, n.horizon, &current));
        let rebuilt = PartialNetwork::from_times(&graph, n.horizon, current.clone()).unwrap();
        prop_assert_eq!(&rebuilt, &partial);
        for (a, old) in before.iter().enumerate() {
            let transit = graph.arc(a).transit;
            for &(tail, head) in old {
                let now = partial.head_time(a, tail);
                prop_assert!(now.is_some_and(|h| h >= head && h <= tail + transit));
            }
        }
    }
    Ok(())
}

pub type ClassCase = (Net, Vec<usize>, Vec<Vec<bool>>);

pub fn class_case() -> impl Strategy<Value = ClassCase> {
    (
        net(),
        prop::collection::vec(0usize..3, 1..12),
        prop::collection::vec(prop::collection::vec(any::<bool>(), 14), 40),
    )
}

/// Consolidation classes cover every auxiliary movement arc exactly once,
/// keyed by underlying flat arc and departure time.
pub fn check_classes((n, labels, masks): ClassCase) -> Result<(), TestCaseError> {
    let inst = n.instance();
    let part = partition(&inst, &labels);
    let aux = AuxGraph::new(&inst, &part);
    let times: Vec<Vec<Time>> = (0..aux.num_nodes())
        .map(|u| {
            std::iter::once(0)
                .chain((1..=n.horizon).filter(|&t| masks[u % masks.len()][t as usize - 1]))
                .collect()
        })
        .collect();
    let partial = PartialNetwork::from_times(aux.graph(), n.horizon, times).unwrap();
    let classes = aux.classes(&partial);
    let all: Vec<TimedArc> = partial.movement_arcs().collect();

    let mut seen = BTreeSet::new();
    let mut total = 0;
    for (&(a, t), members) in &classes {
        prop_assert!(!members.is_empty());
        for e in members {
            prop_assert_eq!(aux.flat_arc(e.arc.unwrap()), a);
            prop_assert_eq!(e.tail.time, t);
            prop_assert!(seen.insert((e.arc, e.tail.time)));
            total += 1;
        }
    }
    prop_assert_eq!(total, all.len());
    for e in &all {
        prop_assert!(seen.contains(&(e.arc, e.tail.time)));
    }
    let keys: BTreeSet<(usize, Time)> = all.iter().map(|e| (aux.flat_arc(e.arc.unwrap()), e.tail.time)).collect();
    prop_assert_eq!(keys.len(), classes.len());
    Ok(())
}

/// Runs `check` on `cases` samples from a fixed-seed generator.
#[allow(dead_code)]
pub fn sample<S: Strategy>(cases: u32, strategy: S, check: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha);
    TestRunner::new_with_rng(config, rng).run(&strategy, check).map_err(|e| e.to_string())
}
