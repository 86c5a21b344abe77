//! Benchmark campaigns: a grid of generated instances solved by several
//! methods on a bounded pool of worker threads.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use sndrr::ddd::{solve, DddConfig, DddResult, Method};
use sndrr::generate::{generate, Family, GenerateSpec};
use sndrr::instance::Instance;
use sndrr::partition::PartitionKind;
use sndrr_milp::backend_by_name;

/// One grid point; `hubs` only matters for hub-and-spoke instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Size {
    pub nodes: usize,
    pub arcs: usize,
    pub commodities: usize,
    pub hubs: usize,
}

impl Size {
    /// Parses `N:A:K` or `N:H:A:K`.
    pub fn parse(s: &str) -> Option<Size> {
        let parts: Vec<usize> = s.split(':').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
        match parts[..] {
            [nodes, arcs, commodities] => Some(Size {
                nodes,
                arcs,
                commodities,
                hubs: 2,
            }),
            [nodes, hubs, arcs, commodities] => Some(Size {
                nodes,
                arcs,
                commodities,
                hubs,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub family: Family,
    pub sizes: Vec<Size>,
    /// Instances drawn per grid point.
    pub replicates: usize,
    pub seed: u64,
    /// Everything except the sizes and family.
    pub base: GenerateSpec,
    pub methods: Vec<Method>,
    pub partition: PartitionKind,
    pub gap: f64,
    pub time_limit: Option<Duration>,
    pub backend: String,
    pub jobs: usize,
}

/// Desk-scale grid for a family: small enough that a whole campaign runs
/// in minutes with the built-in solver.
pub fn desk_sizes(family: Family) -> Vec<Size> {
    let s = |nodes, hubs, arcs, commodities| Size {
        nodes,
        arcs,
        commodities,
        hubs,
    };
    match family {
        Family::Paths => vec![s(6, 2, 12, 5), s(7, 2, 14, 5), s(8, 2, 16, 6)],
        Family::HubSpoke => vec![s(8, 2, 14, 5), s(9, 3, 16, 5)],
        Family::Critical => vec![s(6, 2, 12, 5), s(7, 2, 14, 5)],
        Family::Crainic => vec![s(5, 2, 10, 4), s(6, 2, 12, 4)],
    }
}

pub fn default_partition(family: Family) -> PartitionKind {
    match family {
        Family::HubSpoke => PartitionKind::HubSpoke,
        _ => PartitionKind::Finest,
    }
}

impl CampaignSpec {
    pub fn desk(family: Family, seed: u64) -> CampaignSpec {
        CampaignSpec {
            family,
            sizes: desk_sizes(family),
            replicates: 3,
            seed,
            base: GenerateSpec {
                family,
                grid: 4,
                ..GenerateSpec::default()
            },
            methods: vec![Method::Node, Method::Arc],
            partition: default_partition(family),
            gap: 0.01,
            time_limit: Some(Duration::from_secs(60)),
            backend: "native".into(),
            jobs: 1,
        }
    }

    /// `(name, seed, instance)` for every grid point and replicate. Draws
    /// the generator rejects are skipped with a warning.
    pub fn instances(&self) -> Vec<(String, u64, Instance)> {
        let mut out = Vec::new();
        for (i, size) in self.sizes.iter().enumerate() {
            for r in 0..self.replicates {
                let seed = self.seed + (i * self.replicates + r) as u64;
                let spec = GenerateSpec {
                    family: self.family,
                    nodes: size.nodes,
                    arcs: size.arcs,
                    commodities: size.commodities,
                    hubs: size.hubs,
                    ..self.base.clone()
                };
                let name = format!("{}-n{}-a{}-k{}-s{seed}", self.family.name(), size.nodes, size.arcs, size.commodities);
                match generate(&spec, seed) {
                    Ok(inst) => out.push((name, seed, inst)),
                    Err(e) => warn!("skipping {name}: {e}"),
                }
            }
        }
        out
    }
}

/// One solve of one instance, in the columnar result format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance: String,
    pub family: String,
    pub seed: u64,
    pub nodes: usize,
    pub arcs: usize,
    pub commodities: usize,
    pub horizon: u32,
    pub method: String,
    pub partition: String,
    pub status: String,
    pub objective: f64,
    pub lower_bound: f64,
    pub gap: f64,
    pub iterations: usize,
    pub iteration_bound: usize,
    pub variables: usize,
    pub constraints: usize,
    pub movement_flow_vars: usize,
    pub timed_nodes: usize,
    pub safeguard_events: usize,
    /// Lower bounds never fell and every upper bound covered its lower bound.
    pub bounds_ok: bool,
    /// Every non-final iteration added at least one timed node.
    pub progress_ok: bool,
    pub runtime: f64,
}

impl RunRow {
    pub fn solved(&self) -> bool {
        self.status == "optimal"
    }
}

pub fn bounds_ok(r: &DddResult) -> bool {
    let tol = |v: f64| 1e-6 * v.abs().max(1.0);
    r.iterations.windows(2).all(|w| w[1].lower_bound >= w[0].lower_bound - tol(w[0].lower_bound))
        && r.iterations.iter().all(|it| it.upper_bound >= it.lower_bound - tol(it.lower_bound))
}

pub fn progress_ok(r: &DddResult) -> bool {
    r.iterations.len() <= r.iteration_bound && r.iterations.windows(2).all(|w| w[1].timed_nodes > w[0].timed_nodes)
}

pub fn row_for(name: &str, family: Family, seed: u64, inst: &Instance, partition: PartitionKind, r: &DddResult) -> RunRow {
    let last = r.last();
    RunRow {
        instance: name.to_string(),
        family: family.name().to_string(),
        seed,
        nodes: inst.nodes,
        arcs: inst.arcs.len(),
        commodities: inst.commodities.len(),
        horizon: inst.horizon,
        method: r.method.name().to_string(),
        partition: if r.method == Method::Arc { partition.name() } else { "-" }.to_string(),
        status: r.status.name().to_string(),
        objective: r.objective,
        lower_bound: r.lower_bound,
        gap: r.gap(),
        iterations: r.iterations.len(),
        iteration_bound: r.iteration_bound,
        variables: last.map_or(0, |s| s.variables),
        constraints: last.map_or(0, |s| s.constraints),
        movement_flow_vars: last.map_or(0, |s| s.movement_flow_vars),
        timed_nodes: last.map_or(0, |s| s.timed_nodes),
        safeguard_events: r.safeguard_events,
        bounds_ok: bounds_ok(r),
        progress_ok: progress_ok(r),
        runtime: r.wall.as_secs_f64(),
    }
}

fn failed_row(name: &str, family: Family, seed: u64, inst: &Instance, method: Method, message: &str) -> RunRow {
    RunRow {
        instance: name.to_string(),
        family: family.name().to_string(),
        seed,
        nodes: inst.nodes,
        arcs: inst.arcs.len(),
        commodities: inst.commodities.len(),
        horizon: inst.horizon,
        method: method.name().to_string(),
        partition: "-".into(),
        status: format!("error: {message}"),
        objective: f64::NAN,
        lower_bound: f64::NAN,
        gap: f64::NAN,
        iterations: 0,
        iteration_bound: 0,
        variables: 0,
        constraints: 0,
        movement_flow_vars: 0,
        timed_nodes: 0,
        safeguard_events: 0,
        bounds_ok: false,
        progress_ok: false,
        runtime: 0.0,
    }
}

/// Runs every (instance, method) pair; rows come back in grid order.
pub fn run_campaign(spec: &CampaignSpec) -> Vec<RunRow> {
    let instances = spec.instances();
    let jobs: Vec<(usize, Method)> = (0..instances.len())
        .flat_map(|i| spec.methods.iter().map(move |&m| (i, m)))
        .collect();
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<RunRow>>> = Mutex::new(vec![None; jobs.len()]);
    let workers = spec.jobs.clamp(1, jobs.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, method)) = jobs.get(j) else { break };
                let (name, seed, inst) = &instances[i];
                let config = DddConfig {
                    method,
                    gap: spec.gap,
                    time_limit: spec.time_limit,
                    partition: spec.partition,
                    seed: *seed,
                    relax_sourceless: false,
                };
                let row = match backend_by_name(&spec.backend) {
                    Ok(backend) => match solve(inst, &config, backend.as_ref()) {
                        Ok(r) => row_for(name, spec.family, *seed, inst, spec.partition, &r),
                        Err(e) => failed_row(name, spec.family, *seed, inst, method, &e.to_string()),
                    },
                    Err(e) => failed_row(name, spec.family, *seed, inst, method, &e.to_string()),
                };
                info!("{} {}: {} in {:.2}s", row.instance, row.method, row.status, row.runtime);
                rows.lock().expect("no worker panicked")[j] = Some(row);
            });
        }
    });
    rows.into_inner().expect("no worker panicked").into_iter().flatten().collect()
}

pub fn write_rows(rows: &[RunRow], out: impl std::io::Write) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(input: impl std::io::Read) -> csv::Result<Vec<RunRow>> {
    csv::ReaderBuilder::new().delimiter(b'\t').from_reader(input).deserialize().collect()
}
