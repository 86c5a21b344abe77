use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use log::info;

use sndrr::auxiliary::AuxGraph;
use sndrr::ddd::{solve, DddConfig, DddError, DddResult, Method, RunStatus};
use sndrr::expansion::{initial_timed_nodes, PartialNetwork};
use sndrr::generate::{generate, Family, GenerateSpec, Scale, TimedParams};
use sndrr::graph::FlatGraph;
use sndrr::instance::{Instance, InstanceError};
use sndrr::model::{build_aux_partial_model, build_partial_model};
use sndrr::partition::{ArcPartition, PartitionKind};
use sndrr_cli::campaign::{default_partition, desk_sizes, read_rows, row_for, run_campaign, write_rows, CampaignSpec, RunRow, Size};
use sndrr_cli::report;
use sndrr_milp::{backend_by_name, write_lp, BACKEND_ENV};

const EXIT_INPUT: u8 = 1;
const EXIT_VALIDATION: u8 = 3;
const EXIT_BACKEND: u8 = 4;
const EXIT_TIME_LIMIT: u8 = 5;

#[derive(Parser)]
#[command(name = "sndrr", version, about = "Service network design with restricted routes")]
struct Cli {
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw random instances.
    Generate(GenerateArgs),
    /// Solve one instance file.
    Solve(SolveArgs),
    /// Generate a grid of instances and compare methods on it.
    Bench(BenchArgs),
    /// Summarise result rows into decile, ratio and solved-fraction tables.
    Report(ReportArgs),
    /// Print an instance summary, its partition and first relaxation size.
    Inspect(InspectArgs),
}

#[derive(Args, Clone)]
struct InstanceFlags {
    /// paths | hubspoke | critical | crainic
    #[arg(long, default_value = "paths", value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    arcs: Option<usize>,
    #[arg(long)]
    commodities: Option<usize>,
    #[arg(long)]
    hubs: Option<usize>,
    /// Side of the square grid hub-and-spoke nodes are placed on.
    #[arg(long)]
    grid: Option<usize>,
    /// F: total fixed cost over total demand times total variable cost.
    #[arg(long)]
    cost_ratio: Option<f64>,
    /// C: arc count times total demand over total capacity.
    #[arg(long)]
    capacity_ratio: Option<f64>,
    #[arg(long)]
    tau_max: Option<u32>,
    /// Release spread: a number or a multiple of L such as `L/6`.
    #[arg(long, value_parser = parse_scale)]
    sigma_r: Option<Scale>,
    /// Mean flexibility: a number or a multiple of L such as `3L/8`.
    #[arg(long, value_parser = parse_scale)]
    mu_p: Option<Scale>,
    /// Critical-time intervals per node.
    #[arg(long)]
    alpha: Option<usize>,
}

impl InstanceFlags {
    fn spec(&self) -> GenerateSpec {
        let d = GenerateSpec {
            family: self.family,
            ..GenerateSpec::default()
        };
        GenerateSpec {
            nodes: self.nodes.unwrap_or(d.nodes),
            arcs: self.arcs.unwrap_or(d.arcs),
            commodities: self.commodities.unwrap_or(d.commodities),
            hubs: self.hubs.unwrap_or(d.hubs),
            grid: self.grid.unwrap_or(d.grid),
            cost_ratio: self.cost_ratio.unwrap_or(d.cost_ratio),
            capacity_ratio: self.capacity_ratio.unwrap_or(d.capacity_ratio),
            timed: TimedParams {
                sigma_r: self.sigma_r.unwrap_or(d.timed.sigma_r),
                mu_p: self.mu_p.unwrap_or(d.timed.mu_p),
                tau_max: self.tau_max.unwrap_or(d.timed.tau_max),
            },
            alpha: self.alpha.unwrap_or(d.alpha),
            ..d
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    instance: InstanceFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of instances, seeds `seed..seed+count`.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output file, or directory when `--count` exceeds 1; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverFlags {
    #[arg(long, default_value_t = 0.01)]
    gap: f64,
    /// Seconds per solve.
    #[arg(long)]
    time_limit: Option<f64>,
    /// finest | hubspoke | trivial | singleton
    #[arg(long, value_parser = parse_partition)]
    partition: Option<PartitionKind>,
    /// native | scipy; defaults to $SNDRR_SOLVER, then native.
    #[arg(long)]
    backend: Option<String>,
}

impl SolverFlags {
    fn backend_name(&self) -> String {
        self.backend.clone().or_else(|| std::env::var(BACKEND_ENV).ok()).unwrap_or_else(|| "native".into())
    }

    fn time_limit(&self) -> Option<Duration> {
        self.time_limit.map(Duration::from_secs_f64)
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// node | arc | direct
    #[arg(long, default_value = "arc", value_parser = parse_method)]
    method: Method,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result row file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-iteration trace file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Final routes, one row per leg.
    #[arg(long)]
    routes: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    instance: InstanceFlags,
    /// Grid point `N:A:K` or `N:H:A:K`; repeatable. Defaults to a desk-scale grid.
    #[arg(long = "size", value_parser = parse_size)]
    sizes: Vec<Size>,
    #[arg(long, default_value_t = 3)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of node,arc,direct.
    #[arg(long, default_value = "node,arc", value_delimiter = ',', value_parser = parse_method)]
    methods: Vec<Method>,
    #[command(flatten)]
    solver: SolverFlags,
    /// Parallel solves.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Directory for rows and report tables.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Row files written by `bench` or `solve`.
    #[arg(required = true)]
    rows: Vec<PathBuf>,
    /// Directory for the table and plot-data files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    instance: PathBuf,
    #[arg(long, value_parser = parse_partition)]
    partition: Option<PartitionKind>,
    /// Print the time sets and arcs of the first partial network.
    #[arg(long)]
    network: bool,
    /// Write the first relaxation in LP format: `<path>.node.lp`, `<path>.arc.lp`.
    #[arg(long)]
    lp: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    Family::parse(s).ok_or_else(|| format!("unknown family `{s}`"))
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).ok_or_else(|| format!("unknown method `{s}`"))
}

fn parse_partition(s: &str) -> Result<PartitionKind, String> {
    PartitionKind::parse(s).ok_or_else(|| format!("unknown partition `{s}`"))
}

fn parse_scale(s: &str) -> Result<Scale, String> {
    Scale::parse(s).ok_or_else(|| format!("cannot read `{s}` as a number or multiple of L"))
}

fn parse_size(s: &str) -> Result<Size, String> {
    Size::parse(s).ok_or_else(|| format!("expected N:A:K or N:H:A:K, got `{s}`"))
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Failure {
        Failure::new(EXIT_INPUT, format!("{}: {e}", path.display()))
    }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Failure {
        let code = match e {
            InstanceError::Io(_) | InstanceError::Json(_) => EXIT_INPUT,
            _ => EXIT_VALIDATION,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<DddError> for Failure {
    fn from(e: DddError) -> Failure {
        let code = match e {
            DddError::Partition(_) | DddError::Aux(_) => EXIT_VALIDATION,
            _ => EXIT_BACKEND,
        };
        Failure::new(code, e.to_string())
    }
}

fn write_to(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
            }
            fs::write(p, text).map_err(|e| Failure::io(p, e))
        }
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_INPUT, e.to_string())),
    }
}

fn load_valid(path: &Path) -> Result<Instance, Failure> {
    let inst = Instance::load(path).map_err(|e| match e {
        InstanceError::Io(e) => Failure::io(path, e),
        other => Failure::from(other),
    })?;
    let problems = inst.validate();
    if !problems.is_empty() {
        return Err(Failure::new(EXIT_VALIDATION, problems.join("\n")));
    }
    Ok(inst.preprocessed()?)
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), Failure> {
    let spec = args.instance.spec();
    for i in 0..args.count {
        let seed = args.seed + i;
        let text = generate(&spec, seed)?.to_json();
        let target = match &args.out {
            Some(dir) if args.count > 1 => Some(dir.join(format!("{}-{seed}.json", spec.family.name()))),
            other => other.clone(),
        };
        write_to(target.as_deref(), &text)?;
    }
    Ok(())
}

fn rows_text(rows: &[RunRow]) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    Ok(String::from_utf8(buf).expect("rows are utf-8"))
}

fn trace_text(r: &DddResult) -> String {
    let mut rows = vec![[
        "iteration",
        "lower_bound",
        "upper_bound",
        "iteration_lower",
        "iteration_upper",
        "variables",
        "constraints",
        "movement_flow_vars",
        "timed_nodes",
        "delta",
        "infeasible",
        "added",
        "safeguard",
        "wall_seconds",
    ]
    .map(String::from)
    .to_vec()];
    for it in &r.iterations {
        let members: Vec<String> = it.infeasible.iter().map(usize::to_string).collect();
        rows.push(vec![
            it.iteration.to_string(),
            it.lower_bound.to_string(),
            it.upper_bound.to_string(),
            it.iteration_lower.to_string(),
            it.iteration_upper.to_string(),
            it.variables.to_string(),
            it.constraints.to_string(),
            it.movement_flow_vars.to_string(),
            it.timed_nodes.to_string(),
            it.delta.to_string(),
            if members.is_empty() { "-".into() } else { members.join(",") },
            it.added.to_string(),
            it.safeguard.to_string(),
            format!("{:.4}", it.wall_seconds),
        ]);
    }
    report::tsv(&rows)
}

fn routes_text(r: &DddResult) -> String {
    let mut rows = vec![["commodity", "leg", "arc", "tail", "depart", "head", "arrive"].map(String::from).to_vec()];
    for route in &r.routes {
        for (i, leg) in route.legs().enumerate() {
            rows.push(vec![
                route.commodity.to_string(),
                i.to_string(),
                leg.arc.expect("movement").to_string(),
                leg.tail.node.to_string(),
                leg.tail.time.to_string(),
                leg.head.node.to_string(),
                leg.head.time.to_string(),
            ]);
        }
    }
    report::tsv(&rows)
}

/// Best guess at the family an instance file came from.
fn family_of(inst: &Instance) -> Family {
    if inst.regions.is_some() {
        Family::HubSpoke
    } else if inst.critical_times.is_some() {
        Family::Critical
    } else if inst.commodities.iter().all(|c| c.subgraph.as_ref().is_some_and(|s| is_single_path(inst, s))) {
        Family::Paths
    } else {
        Family::Crainic
    }
}

fn is_single_path(inst: &Instance, arcs: &[usize]) -> bool {
    let mut tails: Vec<usize> = arcs.iter().map(|&a| inst.arcs[a].tail).collect();
    tails.sort_unstable();
    tails.windows(2).all(|w| w[0] != w[1])
}

fn cmd_solve(args: &SolveArgs) -> Result<(), Failure> {
    let inst = load_valid(&args.instance)?;
    let backend = backend_by_name(&args.solver.backend_name()).map_err(|e| Failure::new(EXIT_BACKEND, e.to_string()))?;
    let partition = args.solver.partition.unwrap_or_default();
    let config = DddConfig {
        method: args.method,
        gap: args.solver.gap,
        time_limit: args.solver.time_limit(),
        partition,
        seed: args.seed,
        relax_sourceless: false,
    };
    let result = solve(&inst, &config, backend.as_ref())?;
    let name = args.instance.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
    let family = family_of(&inst);
    let row = row_for(&name, family, args.seed, &inst, partition, &result);
    write_to(args.out.as_deref(), &rows_text(&[row])?)?;
    if let Some(p) = &args.trace {
        write_to(Some(p), &trace_text(&result))?;
    }
    if let Some(p) = &args.routes {
        write_to(Some(p), &routes_text(&result))?;
    }
    info!("{}: {} objective {}", args.method.name(), result.status.name(), result.objective);
    if result.status == RunStatus::TimeLimit {
        return Err(Failure::new(EXIT_TIME_LIMIT, format!("time limit reached; gap {:.4}", result.gap())));
    }
    Ok(())
}

fn report_files(rows: &[RunRow], out: Option<&Path>) -> Result<String, Failure> {
    let deciles = report::decile_table(&report::deciles(rows));
    let solved = report::solved_table(&report::solved_fraction(rows));
    let ratios = report::ratios(rows).map(|s| (s.instances, report::ratio_table(&s)));
    let mut text = format!("runtime (s) and final gap by decile\n{}", report::columns(&deciles));
    match &ratios {
        Some((n, table)) => text += &format!("\nfinal iteration, {n} instances solved by both\n{}", report::columns(table)),
        None => text += "\nno instance was solved by both methods\n",
    }
    if let Some(dir) = out {
        write_to(Some(&dir.join("deciles.tsv")), &report::tsv(&deciles))?;
        write_to(Some(&dir.join("solved.tsv")), &report::tsv(&solved))?;
        if let Some((_, table)) = &ratios {
            write_to(Some(&dir.join("ratios.tsv")), &report::tsv(table))?;
        }
    }
    Ok(text)
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    let family = args.instance.family;
    let spec = CampaignSpec {
        family,
        sizes: if args.sizes.is_empty() { desk_sizes(family) } else { args.sizes.clone() },
        replicates: args.replicates,
        seed: args.seed,
        base: args.instance.spec(),
        methods: args.methods.clone(),
        partition: args.solver.partition.unwrap_or(default_partition(family)),
        gap: args.solver.gap,
        time_limit: args.solver.time_limit().or(Some(Duration::from_secs(60))),
        backend: args.solver.backend_name(),
        jobs: args.jobs,
    };
    backend_by_name(&spec.backend).map_err(|e| Failure::new(EXIT_BACKEND, e.to_string()))?;
    let rows = run_campaign(&spec);
    write_to(Some(&args.out.join("rows.tsv")), &rows_text(&rows)?)?;
    let table: Vec<Vec<String>> = std::iter::once(
        ["instance", "method", "status", "objective", "gap", "iterations", "variables", "constraints", "seconds"]
            .map(String::from)
            .to_vec(),
    )
    .chain(rows.iter().map(|r| {
        vec![
            r.instance.clone(),
            r.method.clone(),
            r.status.clone(),
            format!("{:.3}", r.objective),
            format!("{:.4}", r.gap),
            r.iterations.to_string(),
            r.variables.to_string(),
            r.constraints.to_string(),
            format!("{:.3}", r.runtime),
        ]
    }))
    .collect();
    let summary = report_files(&rows, Some(&args.out))?;
    write_to(None, &format!("{}\n{summary}", report::columns(&table)))
}

fn cmd_report(args: &ReportArgs) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for p in &args.rows {
        let file = fs::File::open(p).map_err(|e| Failure::io(p, e))?;
        rows.extend(read_rows(file).map_err(|e| Failure::io(p, e))?);
    }
    let text = report_files(&rows, args.out.as_deref())?;
    write_to(None, &text)
}

fn cmd_inspect(args: &InspectArgs) -> Result<(), Failure> {
    let inst = Instance::load(&args.instance).map_err(Failure::from)?;
    let mut text = format!(
        "nodes {}  arcs {}  commodities {}  horizon {}\ncost ratio F {:.6}  capacity ratio C {:.6}\n",
        inst.nodes,
        inst.arcs.len(),
        inst.commodities.len(),
        inst.horizon,
        inst.cost_ratio(),
        inst.capacity_ratio()
    );
    let problems = inst.validate();
    if !problems.is_empty() {
        text += &format!("invalid:\n  {}\n", problems.join("\n  "));
        write_to(None, &text)?;
        return Err(Failure::new(EXIT_VALIDATION, "instance failed validation"));
    }
    let inst = inst.preprocessed()?;
    let kind = args
        .partition
        .unwrap_or(if inst.regions.is_some() { PartitionKind::HubSpoke } else { PartitionKind::Finest });
    let part = ArcPartition::build(&inst, kind, false).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
    text += &format!("{} partition ({})\n{}", kind.name(), if part.is_valid(&inst) { "valid" } else { "not valid" }, part.dump());

    let flat = FlatGraph::of_instance(&inst);
    let node_net = PartialNetwork::from_times(&flat, inst.horizon, initial_timed_nodes(&inst)).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
    let node_model = build_partial_model(&inst, &node_net);
    let aux = AuxGraph::new(&inst, &part);
    let nets = aux.commodity_nets(&inst, &part).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
    let aux_net = PartialNetwork::from_times(aux.graph(), inst.horizon, aux.initial_times(&inst, &nets))
        .map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
    let arc_model = build_aux_partial_model(&inst, &aux, &nets, &aux_net);
    let sizes = vec![
        ["first relaxation", "timed_nodes", "variables", "constraints", "movement_flow_vars"].map(String::from).to_vec(),
        vec![
            "node".into(),
            node_net.num_timed_nodes().to_string(),
            node_model.model.num_vars().to_string(),
            node_model.model.num_rows().to_string(),
            node_model.movement_flow_vars().to_string(),
        ],
        vec![
            "arc".into(),
            aux_net.num_timed_nodes().to_string(),
            arc_model.model.num_vars().to_string(),
            arc_model.model.num_rows().to_string(),
            arc_model.movement_flow_vars().to_string(),
        ],
    ];
    text += &report::columns(&sizes);
    if args.network {
        text += &format!("node-based network\n{}arc-based network\n{}", node_net.dump(), aux_net.dump());
    }
    if let Some(base) = &args.lp {
        let stem = base.to_string_lossy();
        write_to(Some(Path::new(&format!("{stem}.node.lp"))), &write_lp(&node_model.model))?;
        write_to(Some(Path::new(&format!("{stem}.arc.lp"))), &write_lp(&arc_model.model))?;
    }
    write_to(None, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let outcome = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Report(a) => cmd_report(a),
        Command::Inspect(a) => cmd_inspect(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("sndrr: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
