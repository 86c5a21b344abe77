//! Random instance families: uniform flat networks with target cost and
//! capacity ratios, timed attributes, designated shortest paths, geometric
//! hub-and-spoke networks and node critical times.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::instance::{Arc, ArcId, Commodity, Instance, InstanceError, NodeId, Regions, Time};

const MAX_RETRIES: usize = 1000;
const DRAW_LOW: f64 = 1.0;
const DRAW_HIGH: f64 = 100.0;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatParams {
    pub nodes: usize,
    pub arcs: usize,
    pub commodities: usize,
    pub cost_ratio: f64,
    pub capacity_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HubParams {
    pub nodes: usize,
    pub hubs: usize,
    pub arcs: usize,
    pub commodities: usize,
    pub cost_ratio: f64,
    pub capacity_ratio: f64,
    pub grid: usize,
}

/// A spread given either absolutely or as a multiple of the average
/// shortest commodity transit `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Absolute(f64),
    OfL(f64),
}

impl Scale {
    pub fn resolve(self, l: f64) -> f64 {
        match self {
            Scale::Absolute(v) => v,
            Scale::OfL(f) => f * l,
        }
    }

    /// Parses `2.5`, `L`, `L/3` or `3L/8`.
    pub fn parse(s: &str) -> Option<Scale> {
        let s = s.trim();
        if let Ok(v) = s.parse::<f64>() {
            return Some(Scale::Absolute(v));
        }
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
            None => (s, 1.0),
        };
        let coef = num.strip_suffix('L')?.trim();
        let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
        Some(Scale::OfL(coef / den))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedParams {
    pub sigma_r: Scale,
    pub mu_p: Scale,
    /// Largest transit time after scaling fixed costs.
    pub tau_max: Time,
}

impl Default for TimedParams {
    fn default() -> Self {
        TimedParams {
            sigma_r: Scale::OfL(1.0 / 6.0),
            mu_p: Scale::OfL(0.25),
            tau_max: 10,
        }
    }
}

fn uniform_costs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(DRAW_LOW..=DRAW_HIGH)).collect()
}

/// Draws capacities, demands, fixed and variable costs, then rescales them
/// so that the capacity and cost ratios hold.
fn assign_costs(rng: &mut ChaCha8Rng, inst: &mut Instance, cost_ratio: f64, capacity_ratio: f64) {
    let m = inst.arcs.len();
    let caps = uniform_costs(rng, m);
    let demands = uniform_costs(rng, inst.commodities.len());
    let fixed = uniform_costs(rng, m);
    let var = uniform_costs(rng, m);

    let q: f64 = demands.iter().sum();
    let scale_u = m as f64 * q / (capacity_ratio * caps.iter().sum::<f64>());
    let caps: Vec<u32> = caps.iter().map(|u| (u * scale_u).round().max(1.0) as u32).collect();
    let sum_u: f64 = caps.iter().map(|&u| u as f64).sum();
    let scale_q = capacity_ratio * sum_u / (m as f64 * q);
    let demands: Vec<f64> = demands.iter().map(|d| d * scale_q).collect();
    let q: f64 = demands.iter().sum();
    let scale_f = cost_ratio * q * var.iter().sum::<f64>() / fixed.iter().sum::<f64>();

    for (a, arc) in inst.arcs.iter_mut().enumerate() {
        arc.capacity = caps[a];
        arc.fixed_cost = fixed[a] * scale_f;
        arc.var_cost = var[a];
    }
    for (c, d) in inst.commodities.iter_mut().zip(demands) {
        c.demand = d;
    }
}

fn reachable_from(nodes: usize, arcs: &[Arc], root: NodeId) -> Vec<bool> {
    let mut adj = vec![Vec::new(); nodes];
    for a in arcs {
        adj[a.tail].push(a.head);
    }
    let mut seen = vec![false; nodes];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

fn placeholder_arc(tail: NodeId, head: NodeId, transit: Time) -> Arc {
    Arc {
        tail,
        head,
        transit,
        fixed_cost: 1.0,
        capacity: 1,
        var_cost: 1.0,
    }
}

/// Uniform random network with uniform random O-D pairs. Times are left at
/// unit transits and a window `[0, |N|]`; see [`timed_attributes`].
pub fn crainic_flat(p: &FlatParams, seed: u64) -> Result<Instance, InstanceError> {
    if p.nodes < 2 || p.arcs > p.nodes * (p.nodes - 1) || p.arcs == 0 {
        return Err(InstanceError::Generation(format!("{} arcs do not fit on {} nodes", p.arcs, p.nodes)));
    }
    let mut rng = rng(seed);
    let n = p.nodes;
    let mut chosen: Vec<usize> = index::sample(&mut rng, n * (n - 1), p.arcs).into_vec();
    chosen.sort_unstable();
    let arcs: Vec<Arc> = chosen
        .into_iter()
        .map(|i| {
            let tail = i / (n - 1);
            let mut head = i % (n - 1);
            if head >= tail {
                head += 1;
            }
            placeholder_arc(tail, head, 1)
        })
        .collect();
    let reach: Vec<Vec<bool>> = (0..n).map(|v| reachable_from(n, &arcs, v)).collect();
    let commodities = sample_pairs(&mut rng, n, p.commodities, |o, d| reach[o][d])?
        .into_iter()
        .enumerate()
        .map(|(id, (origin, dest))| Commodity {
            id,
            origin,
            dest,
            demand: 1.0,
            release: 0,
            deadline: n as Time,
            subgraph: None,
        })
        .collect();
    let mut inst = Instance {
        nodes: n,
        arcs,
        commodities,
        horizon: n as Time,
        regions: None,
        critical_times: None,
    };
    assign_costs(&mut rng, &mut inst, p.cost_ratio, p.capacity_ratio);
    Ok(inst)
}

/// Distinct O-D pairs accepted by `ok`, each found within a bounded number
/// of draws.
fn sample_pairs(
    rng: &mut ChaCha8Rng,
    n: usize,
    count: usize,
    mut ok: impl FnMut(NodeId, NodeId) -> bool,
) -> Result<Vec<(NodeId, NodeId)>, InstanceError> {
    let mut taken = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut found = None;
        for _ in 0..MAX_RETRIES {
            let o = rng.random_range(0..n);
            let d = rng.random_range(0..n);
            if o != d && !taken.contains(&(o, d)) && ok(o, d) {
                found = Some((o, d));
                break;
            }
        }
        let pair = found.ok_or_else(|| {
            InstanceError::Generation(format!("no usable O-D pair after {MAX_RETRIES} draws for commodity {}", out.len()))
        })?;
        taken.insert(pair);
        out.push(pair);
    }
    Ok(out)
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    if sd > 0.0 {
        Normal::new(mean, sd).expect("finite parameters").sample(rng)
    } else {
        mean
    }
}

/// Transit times from fixed costs (unless the instance carries geometric
/// transits), then releases and deadlines around the average shortest
/// commodity transit `L`.
pub fn timed_attributes(inst: &Instance, p: &TimedParams, seed: u64) -> Result<Instance, InstanceError> {
    let mut rng = rng(seed);
    let mut out = inst.clone();
    if out.regions.is_none() {
        let max_f = out.arcs.iter().map(|a| a.fixed_cost).fold(0.0, f64::max);
        for a in &mut out.arcs {
            a.transit = ((a.fixed_cost * p.tau_max as f64 / max_f).round() as Time).max(1);
        }
    }
    let mut shortest = Vec::with_capacity(out.commodities.len());
    for k in 0..out.commodities.len() {
        let c = &out.commodities[k];
        let d = out
            .shortest_transit(&out.commodity_arcs(k), c.origin, c.dest)
            .ok_or(InstanceError::InfeasibleCommodity(k))?;
        shortest.push(d);
    }
    let l = shortest.iter().map(|&d| d as f64).sum::<f64>() / shortest.len().max(1) as f64;
    let sigma_r = p.sigma_r.resolve(l);
    let mu_p = p.mu_p.resolve(l);
    let releases: Vec<i64> = (0..out.commodities.len())
        .map(|_| (normal(&mut rng, l, sigma_r).round() as i64).max(0))
        .collect();
    let shift = releases.iter().copied().min().unwrap_or(0);
    for (k, c) in out.commodities.iter_mut().enumerate() {
        let r = (releases[k] - shift) as Time;
        let flex = normal(&mut rng, mu_p, mu_p / 6.0);
        let window = (l + flex).round().max(0.0) as Time;
        c.release = r;
        c.deadline = r + window.max(shortest[k]).max(1);
    }
    out.horizon = out.commodities.iter().map(|c| c.deadline).max().unwrap_or(1);
    Ok(out)
}

/// Each commodity keeps a single shortest path by transit time; among
/// shortest paths the lexicographically smallest node sequence wins.
pub fn designated_paths(inst: &Instance) -> Result<Instance, InstanceError> {
    let mut out = inst.clone();
    for k in 0..inst.commodities.len() {
        let c = &inst.commodities[k];
        let allowed = inst.commodity_arcs(k);
        let to_dest = inst.transit_distances(&allowed, c.dest, true);
        if to_dest[c.origin].is_none() {
            return Err(InstanceError::InfeasibleCommodity(k));
        }
        let mut by_tail: Vec<Vec<ArcId>> = vec![Vec::new(); inst.nodes];
        for &a in &allowed {
            by_tail[inst.arcs[a].tail].push(a);
        }
        let mut path = Vec::new();
        let mut v = c.origin;
        while v != c.dest {
            let here = to_dest[v].expect("on a shortest path");
            let next = by_tail[v]
                .iter()
                .copied()
                .filter(|&a| {
                    let arc = &inst.arcs[a];
                    to_dest[arc.head].is_some_and(|d| d + arc.transit == here)
                })
                .min_by_key(|&a| inst.arcs[a].head)
                .expect("a shortest-path successor exists");
            path.push(next);
            v = inst.arcs[next].head;
        }
        path.sort_unstable();
        out.commodities[k].subgraph = Some(path);
    }
    Ok(out)
}

fn l1(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

/// Arcs a hub-and-spoke commodity may use: regional arcs of its two regions
/// and national arcs except those leaving its destination hub or entering its
/// origin hub. Between different regions, regional arcs leaving the origin
/// hub are dropped as well.
pub fn hub_spoke_subgraph(inst: &Instance, regions: &Regions, origin: NodeId, dest: NodeId) -> Vec<ArcId> {
    let (ho, hd) = (regions.region[origin], regions.region[dest]);
    inst.arcs
        .iter()
        .enumerate()
        .filter(|(_, arc)| {
            if regions.is_national(arc) {
                arc.tail != hd && arc.head != ho
            } else {
                let r = regions.region[arc.tail];
                (r == ho || r == hd) && !(ho != hd && arc.tail == ho)
            }
        })
        .map(|(a, _)| a)
        .collect()
}

/// Nodes on distinct points of an `l x l` grid, hubs a uniform subset, every
/// node in the region of its nearest hub by L1 distance, all hub-to-hub arcs
/// plus uniformly chosen arcs inside regions. Transit is the L1 distance.
pub fn hub_spoke_flat(p: &HubParams, seed: u64) -> Result<Instance, InstanceError> {
    let national = p.hubs * p.hubs.saturating_sub(1);
    if p.hubs == 0 || p.hubs > p.nodes || p.arcs < national || p.nodes > p.grid * p.grid {
        return Err(InstanceError::Generation("hub-and-spoke parameters are inconsistent".into()));
    }
    let mut rng = rng(seed);
    let points: Vec<(usize, usize)> = index::sample(&mut rng, p.grid * p.grid, p.nodes)
        .into_iter()
        .map(|i| (i / p.grid, i % p.grid))
        .collect();
    let mut hubs: Vec<NodeId> = index::sample(&mut rng, p.nodes, p.hubs).into_vec();
    hubs.sort_unstable();
    let region: Vec<NodeId> = (0..p.nodes)
        .map(|v| *hubs.iter().min_by_key(|&&h| (l1(points[v], points[h]), h)).expect("at least one hub"))
        .collect();
    let regions = Regions { hubs: hubs.clone(), region };

    let transit = |u: NodeId, v: NodeId| (l1(points[u], points[v]) as Time).max(1);
    let mut arcs = Vec::new();
    for &g in &hubs {
        for &h in &hubs {
            if g != h {
                arcs.push(placeholder_arc(g, h, transit(g, h)));
            }
        }
    }
    let regional: Vec<(NodeId, NodeId)> = (0..p.nodes)
        .flat_map(|u| (0..p.nodes).map(move |v| (u, v)))
        .filter(|&(u, v)| u != v && regions.region[u] == regions.region[v])
        .collect();
    let extra = p.arcs - national;
    if extra > regional.len() {
        return Err(InstanceError::Generation(format!(
            "only {} regional arcs available, {extra} requested",
            regional.len()
        )));
    }
    let mut picked = index::sample(&mut rng, regional.len(), extra).into_vec();
    picked.sort_unstable();
    arcs.extend(picked.into_iter().map(|i| placeholder_arc(regional[i].0, regional[i].1, transit(regional[i].0, regional[i].1))));
    arcs.sort_by_key(|a| (a.tail, a.head));

    let mut inst = Instance {
        nodes: p.nodes,
        arcs,
        commodities: Vec::new(),
        horizon: 1,
        regions: Some(regions.clone()),
        critical_times: None,
    };
    let pairs = sample_pairs(&mut rng, p.nodes, p.commodities, |o, d| {
        let sub = hub_spoke_subgraph(&inst, &regions, o, d);
        inst.shortest_transit(&sub, o, d).is_some()
    })?;
    let mut horizon = 1;
    for (id, (origin, dest)) in pairs.into_iter().enumerate() {
        let sub = hub_spoke_subgraph(&inst, &regions, origin, dest);
        let sp = inst.shortest_transit(&sub, origin, dest).expect("accepted pair");
        horizon = horizon.max(sp);
        inst.commodities.push(Commodity {
            id,
            origin,
            dest,
            demand: 1.0,
            release: 0,
            deadline: sp,
            subgraph: Some(sub),
        });
    }
    for c in &mut inst.commodities {
        c.deadline = horizon;
    }
    inst.horizon = horizon;
    assign_costs(&mut rng, &mut inst, p.cost_ratio, p.capacity_ratio);
    inst.preprocessed()
}

/// Splits `[0, T]` into `alpha` near-equal intervals, draws one critical
/// time per node in each, then widens every window to critical times.
pub fn critical_times(inst: &Instance, alpha: usize, seed: u64) -> Instance {
    assert!(alpha >= 1, "at least one interval");
    let mut rng = rng(seed);
    let span = inst.horizon as usize + 1;
    let mut out = inst.clone();
    let mut table = Vec::with_capacity(inst.nodes);
    for _ in 0..inst.nodes {
        let mut times = Vec::with_capacity(alpha);
        for i in 0..alpha {
            let lo = i * span / alpha;
            let hi = (i + 1) * span / alpha;
            if hi > lo {
                times.push(rng.random_range(lo..hi) as Time);
            }
        }
        table.push(times);
    }
    for c in &mut out.commodities {
        c.release = table[c.origin].iter().copied().filter(|&t| t <= c.release).max().unwrap_or(0);
        c.deadline = table[c.dest]
            .iter()
            .copied()
            .filter(|&t| t >= c.deadline)
            .min()
            .unwrap_or(inst.horizon);
    }
    out.critical_times = Some(table);
    out
}

/// Node 0 with leaves `1..=m`; commodity `i - 1` ships from 0 to leaf `i`,
/// released at `i - 1` and due at `i`. Unit transits, capacities and demands.
pub fn star(m: usize) -> Instance {
    let arcs = (1..=m)
        .map(|i| Arc {
            tail: 0,
            head: i,
            transit: 1,
            fixed_cost: 10.0,
            capacity: 1,
            var_cost: 1.0,
        })
        .collect();
    let commodities = (1..=m)
        .map(|i| Commodity {
            id: i - 1,
            origin: 0,
            dest: i,
            demand: 1.0,
            release: i as Time - 1,
            deadline: i as Time,
            subgraph: Some(vec![i - 1]),
        })
        .collect();
    Instance {
        nodes: m + 1,
        arcs,
        commodities,
        horizon: m as Time,
        regions: None,
        critical_times: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Uniform network, every commodity restricted to one shortest path.
    Paths,
    HubSpoke,
    /// Uniform network with node critical times.
    Critical,
    /// Uniform network, unrestricted commodities.
    Crainic,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Paths => "paths",
            Family::HubSpoke => "hubspoke",
            Family::Critical => "critical",
            Family::Crainic => "crainic",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "paths" => Some(Family::Paths),
            "hubspoke" | "hub-spoke" => Some(Family::HubSpoke),
            "critical" => Some(Family::Critical),
            "crainic" => Some(Family::Crainic),
            _ => None,
        }
    }
}

/// Everything needed to draw one instance of any family.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSpec {
    pub family: Family,
    pub nodes: usize,
    pub arcs: usize,
    pub commodities: usize,
    pub hubs: usize,
    pub grid: usize,
    pub cost_ratio: f64,
    pub capacity_ratio: f64,
    pub timed: TimedParams,
    pub alpha: usize,
}

impl Default for GenerateSpec {
    fn default() -> Self {
        GenerateSpec {
            family: Family::Paths,
            nodes: 6,
            arcs: 12,
            commodities: 5,
            hubs: 2,
            grid: 6,
            cost_ratio: 0.1,
            capacity_ratio: 1.0,
            timed: TimedParams {
                tau_max: 4,
                ..TimedParams::default()
            },
            alpha: 5,
        }
    }
}

/// Draws a complete, preprocessed instance; stages use derived seeds.
pub fn generate(spec: &GenerateSpec, seed: u64) -> Result<Instance, InstanceError> {
    let flat = FlatParams {
        nodes: spec.nodes,
        arcs: spec.arcs,
        commodities: spec.commodities,
        cost_ratio: spec.cost_ratio,
        capacity_ratio: spec.capacity_ratio,
    };
    let timed_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
    let inst = match spec.family {
        Family::Paths => designated_paths(&timed_attributes(&crainic_flat(&flat, seed)?, &spec.timed, timed_seed)?)?,
        Family::Crainic => timed_attributes(&crainic_flat(&flat, seed)?, &spec.timed, timed_seed)?,
        Family::Critical => {
            let timed = timed_attributes(&crainic_flat(&flat, seed)?, &spec.timed, timed_seed)?;
            critical_times(&timed, spec.alpha, timed_seed.wrapping_add(1))
        }
        Family::HubSpoke => {
            let hub = HubParams {
                nodes: spec.nodes,
                hubs: spec.hubs,
                arcs: spec.arcs,
                commodities: spec.commodities,
                cost_ratio: spec.cost_ratio,
                capacity_ratio: spec.capacity_ratio,
                grid: spec.grid,
            };
            timed_attributes(&hub_spoke_flat(&hub, seed)?, &spec.timed, timed_seed)?
        }
    };
    inst.preprocessed()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::arc;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn table_row_hits_ratios() {
        let p = FlatParams {
            nodes: 20,
            arcs: 230,
            commodities: 150,
            cost_ratio: 0.05,
            capacity_ratio: 1.0,
        };
        let inst = crainic_flat(&p, 3).unwrap();
        assert_eq!(inst.arcs.len(), 230);
        assert_eq!(inst.commodities.len(), 150);
        assert!(rel(inst.cost_ratio(), 0.05) < 0.01);
        assert!(rel(inst.capacity_ratio(), 1.0) < 0.01);
    }

    #[test]
    fn small_row_hits_ratios() {
        let p = FlatParams {
            nodes: 5,
            arcs: 10,
            commodities: 3,
            cost_ratio: 0.1,
            capacity_ratio: 8.0,
        };
        for seed in 0..20 {
            let inst = crainic_flat(&p, seed).unwrap();
            let sum_u: f64 = inst.arcs.iter().map(|a| a.capacity as f64).sum();
            let c = inst.arcs.len() as f64 * inst.total_demand() / sum_u;
            assert!(rel(c, 8.0) < 0.01);
            assert!(rel(inst.cost_ratio(), 0.1) < 0.01);
        }
    }

    #[test]
    fn parses_scales() {
        assert_eq!(Scale::parse("L/3"), Some(Scale::OfL(1.0 / 3.0)));
        assert_eq!(Scale::parse("3L/8"), Some(Scale::OfL(3.0 / 8.0)));
        assert_eq!(Scale::parse("L"), Some(Scale::OfL(1.0)));
        assert_eq!(Scale::parse("2.5"), Some(Scale::Absolute(2.5)));
        assert_eq!(Scale::parse("x"), None);
    }

    #[test]
    fn zero_spread_gives_equal_releases() {
        let p = FlatParams {
            nodes: 6,
            arcs: 14,
            commodities: 5,
            cost_ratio: 0.1,
            capacity_ratio: 1.0,
        };
        let flat = crainic_flat(&p, 1).unwrap();
        let t = TimedParams {
            sigma_r: Scale::Absolute(0.0),
            mu_p: Scale::Absolute(0.0),
            tau_max: 5,
        };
        let inst = timed_attributes(&flat, &t, 2).unwrap();
        assert!(inst.commodities.iter().all(|c| c.release == 0));
    }

    #[test]
    fn shorter_route_is_designated() {
        let inst = Instance {
            nodes: 4,
            arcs: vec![arc(0, 1, 2), arc(1, 3, 1), arc(0, 2, 1), arc(2, 3, 4)],
            commodities: vec![crate::instance::tests::commodity(0, 0, 3, 0, 9)],
            horizon: 9,
            regions: None,
            critical_times: None,
        };
        assert_eq!(designated_paths(&inst).unwrap().commodities[0].subgraph, Some(vec![0, 1]));
    }

    #[test]
    fn ties_go_to_smaller_sequence() {
        let inst = Instance {
            nodes: 4,
            arcs: vec![arc(0, 2, 1), arc(2, 3, 2), arc(0, 1, 2), arc(1, 3, 1)],
            commodities: vec![crate::instance::tests::commodity(0, 0, 3, 0, 9)],
            horizon: 9,
            regions: None,
            critical_times: None,
        };
        assert_eq!(designated_paths(&inst).unwrap().commodities[0].subgraph, Some(vec![2, 3]));
    }

    #[test]
    fn all_hubs_means_national_only() {
        let p = HubParams {
            nodes: 4,
            hubs: 4,
            arcs: 12,
            commodities: 3,
            cost_ratio: 0.1,
            capacity_ratio: 1.0,
            grid: 10,
        };
        let inst = hub_spoke_flat(&p, 5).unwrap();
        let regions = inst.regions.as_ref().unwrap();
        assert!(inst.arcs.iter().all(|a| regions.is_national(a)));
    }

    #[test]
    fn table_hub_row_is_accepted() {
        let p = HubParams {
            nodes: 20,
            hubs: 4,
            arcs: 55,
            commodities: 100,
            cost_ratio: 0.05,
            capacity_ratio: 1.0,
            grid: 30,
        };
        let inst = hub_spoke_flat(&p, 11).unwrap();
        assert_eq!(inst.arcs.len(), 55);
        assert!(inst.validate().is_empty(), "{:?}", inst.validate());
    }

    #[test]
    fn accepts_alpha_values() {
        let spec = GenerateSpec {
            family: Family::Critical,
            ..GenerateSpec::default()
        };
        for alpha in [5, 10] {
            let inst = generate(&GenerateSpec { alpha, ..spec.clone() }, 4).unwrap();
            assert!(inst.validate().is_empty());
            assert_eq!(inst.critical_times.as_ref().unwrap()[0].len(), alpha.min(inst.horizon as usize + 1));
        }
    }
}
