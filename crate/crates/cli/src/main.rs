use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dbp::bench::{
    connected_network, gen_instance, rho_sweep, scale_experiment, solve_bp_centralized,
    InstanceSpec, ScaleConfig, TYPE_TWO_GRID,
};
use dbp::engine::{run, Problem, RunTrace, StopRule};
use dbp::graph::{greedy_coloring, Coloring, Graph, NetworkModel};
use dbp::io::{format_instance, format_network, parse_instance, parse_network, InstanceFile};
use dbp::linalg::{norm1, PartitionKind, PartitionSpec};
use dbp::solvers::{SolverConfig, SolverKind};
use dbp::Error;

/// Distributed basis pursuit on simulated networks.
#[derive(Parser)]
#[command(name = "dbp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Gaussian instance and write it with its certified solution.
    GenInstance {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Number of nodes the instance must split evenly over.
        #[arg(long = "P", default_value_t = 1)]
        parts: usize,
        /// Nonzeros of the planted vector [default: m/8].
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Partition::Row)]
        partition: Partition,
        /// Skip the centralized solve and store the planted vector instead.
        #[arg(long)]
        no_oracle: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a connected network and write it with a greedy coloring.
    GenNetwork {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long = "P")]
        nodes: usize,
        /// Edge probability (er, ws) or connection radius (geometric).
        #[arg(long)]
        param: Option<f64>,
        /// Ring neighbors of the Watts–Strogatz model.
        #[arg(long, default_value_t = 4)]
        neighbors: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seeds tried until the graph is connected.
        #[arg(long, default_value_t = 100)]
        tries: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one algorithm and report communication steps to each target.
    Run {
        #[command(flatten)]
        common: RunArgs,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
    },
    /// Run one algorithm for every rho of a grid and keep the best.
    SweepRho {
        #[command(flatten)]
        common: RunArgs,
        /// Comma-separated rho values [default: 1e-3,1e-2,1e-1,1,10].
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
    },
    /// Steps of D-ADMM and D-Lasso versus network size, with a power-law fit.
    Scale {
        /// Largest network size; sizes are the powers of two from 2.
        #[arg(long, default_value_t = 64)]
        pmax: usize,
        #[arg(long, default_value_t = 128)]
        m: usize,
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 32)]
        k: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        target: f64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance centrally and check the optimality certificate.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Write the instance back with the certified solution.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    algo: String,
    /// Regularization of column D-ADMM.
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    /// Defaults to the partition the algorithm needs.
    #[arg(long, value_enum)]
    partition: Option<Partition>,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    network: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    /// Comma-separated, strictly decreasing relative-error targets.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-5])]
    targets: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// CSV trace of the (best) run.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Partition {
    Row,
    Column,
}

impl From<Partition> for PartitionKind {
    fn from(p: Partition) -> Self {
        match p {
            Partition::Row => PartitionKind::Row,
            Partition::Column => PartitionKind::Column,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Er,
    Ws,
    Ba,
    Geometric,
    Lattice,
}

enum Failure {
    Input(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } | Error::OracleTolerance { .. } => {
                Failure::Budget(e.to_string())
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn gen_instance_cmd(spec: InstanceSpec, no_oracle: bool, out: &Path) -> CmdResult {
    let inst = gen_instance::<f64>(&spec)?;
    let x_ref = if no_oracle {
        inst.x0.clone()
    } else {
        solve_bp_centralized(&inst.a, &inst.b, 1e-10)?.x
    };
    write(out, &format_instance(&inst.a, &inst.b, Some(&x_ref)))?;
    println!(
        "wrote {}x{} instance, k={}, to {}",
        spec.m,
        spec.n,
        spec.k,
        out.display()
    );
    Ok(())
}

fn gen_network_cmd(
    model: Model,
    nodes: usize,
    param: Option<f64>,
    neighbors: usize,
    seed: u64,
    tries: usize,
    out: &Path,
) -> CmdResult {
    let need = |what: &str| {
        param.ok_or_else(|| Failure::Input(format!("--param ({what}) is required for this model")))
    };
    let model = match model {
        Model::Er => NetworkModel::ErdosRenyi {
            p: need("edge probability")?,
        },
        Model::Ws => NetworkModel::WattsStrogatz {
            neighbors,
            p: need("rewiring probability")?,
        },
        Model::Ba => NetworkModel::BarabasiAlbert,
        Model::Geometric => NetworkModel::Geometric {
            radius: need("radius")?,
        },
        Model::Lattice => NetworkModel::Lattice,
    };
    let (g, used) = connected_network(model, nodes, seed, tries)?;
    let c = greedy_coloring(&g);
    write(out, &format_network(&g, Some(&c)))?;
    println!(
        "wrote {} with {} edges, {} colors (seed {used}) to {}",
        model.name(),
        g.edge_count(),
        c.count(),
        out.display()
    );
    Ok(())
}

struct Loaded {
    file: InstanceFile<f64>,
    x_ref: Vec<f64>,
    graph: Graph,
    coloring: Coloring,
    spec: PartitionSpec,
}

fn load(args: &RunArgs, kind: &SolverKind<f64>) -> Result<Loaded, Failure> {
    let file = parse_instance::<f64>(&read(&args.instance)?)?;
    let (graph, coloring) = parse_network(&read(&args.network)?)?;
    let coloring = coloring.unwrap_or_else(|| greedy_coloring(&graph));
    let part = args
        .partition
        .map_or_else(|| kind.partition_kind(), PartitionKind::from);
    if part != kind.partition_kind() {
        return Err(Failure::Input(format!(
            "{} needs a {:?} partition",
            kind.name(),
            kind.partition_kind()
        )));
    }
    let total = match part {
        PartitionKind::Row => file.a.rows(),
        PartitionKind::Column => file.a.cols(),
    };
    let spec = PartitionSpec::even(part, total, graph.node_count())?;
    let x_ref = match &file.x_ref {
        Some(x) => x.clone(),
        None => solve_bp_centralized(&file.a, &file.b, 1e-10)?.x,
    };
    Ok(Loaded {
        file,
        x_ref,
        graph,
        coloring,
        spec,
    })
}

fn report(trace: &RunTrace<f64>) {
    for (t, s) in &trace.steps_to_accuracy {
        match s {
            Some(s) => println!("  {t:e}: {s} steps"),
            None => println!("  {t:e}: not reached"),
        }
    }
    println!(
        "  final error {:e} after {} steps, {} inner failures",
        trace.final_error(),
        trace.comm_steps,
        trace.inner_failures
    );
}

fn finish(trace: &RunTrace<f64>, out: Option<&PathBuf>) -> CmdResult {
    if let Some(path) = out {
        trace.write_csv(path)?;
    }
    if trace.converged {
        Ok(())
    } else {
        Err(Failure::Budget(format!(
            "finest target not reached within {} steps",
            trace.comm_steps
        )))
    }
}

fn run_cmd(args: &RunArgs, rho: f64, grid: Option<&[f64]>) -> CmdResult {
    let kind = SolverKind::from_name(&args.algo, rho, args.delta)?;
    let l = load(args, &kind)?;
    let rule = StopRule::new(args.targets.clone(), args.max_steps)?;
    let cfg = SolverConfig {
        threads: args.threads,
        ..SolverConfig::default()
    };
    let pr = Problem {
        a: &l.file.a,
        b: &l.file.b,
        spec: &l.spec,
        graph: &l.graph,
        coloring: Some(&l.coloring),
    };
    match grid {
        None => {
            let trace = run(kind, pr, &rule, &l.x_ref, cfg)?;
            println!("{} rho={rho}", kind.name());
            report(&trace);
            finish(&trace, args.trace_out.as_ref())
        }
        Some(grid) => {
            let sweep = rho_sweep(grid, kind, pr, &rule, &l.x_ref, cfg)?;
            for (r, t) in &sweep.traces {
                let cell = t.finest_reached().map_or_else(
                    || "none".to_string(),
                    |(e, s)| format!("{e:e} in {s} steps"),
                );
                println!("rho={r}: {cell}");
            }
            println!("best rho={}", sweep.best_rho);
            report(&sweep.best);
            finish(&sweep.best, args.trace_out.as_ref())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn scale_cmd(
    pmax: usize,
    m: usize,
    n: usize,
    k: usize,
    seed: u64,
    target: f64,
    max_steps: usize,
    out: Option<&PathBuf>,
) -> CmdResult {
    if pmax < 2 {
        return Err(Failure::Input("--pmax must be at least 2".into()));
    }
    let sizes: Vec<usize> = std::iter::successors(Some(2usize), |p| Some(p * 2))
        .take_while(|&p| p <= pmax)
        .collect();
    let mut cfg = ScaleConfig::<f64>::desk(sizes);
    cfg.instance = InstanceSpec {
        m,
        n,
        k,
        seed,
        ..cfg.instance
    };
    cfg.target = target;
    cfg.max_comm_steps = max_steps;
    let table = scale_experiment(&cfg)?;
    let csv = table.to_csv();
    print!("{csv}");
    if let Some(path) = out {
        write(path, &csv)?;
    }
    for (name, fit) in [("d-admm", table.d_admm_fit), ("d-lasso", table.d_lasso_fit)] {
        match fit {
            Some((c, e)) => println!("{name}: {c:.3} P^{e:.3}"),
            None => println!("{name}: no fit"),
        }
    }
    let missing = table.nonconvergent();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Budget(format!(
            "target not reached for P in {missing:?}"
        )))
    }
}

fn oracle_cmd(instance: &Path, tol: f64, out: Option<&PathBuf>) -> CmdResult {
    let file = parse_instance::<f64>(&read(instance)?)?;
    let cert = solve_bp_centralized(&file.a, &file.b, tol)?;
    let c = &cert.check;
    println!(
        "objective {:e}, feasibility {:e}, dual infeasibility {:e}, gap {:e}, {} iterations",
        norm1(&cert.x),
        c.feasibility,
        c.dual_infeasibility,
        c.gap,
        cert.iterations
    );
    if let Some(path) = out {
        write(path, &format_instance(&file.a, &file.b, Some(&cert.x)))?;
    }
    Ok(())
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::GenInstance {
            m,
            n,
            parts,
            k,
            seed,
            partition,
            no_oracle,
            out,
        } => {
            let mut spec = InstanceSpec::new(m, n, parts, seed);
            spec.partition = partition.into();
            if let Some(k) = k {
                spec.k = k;
            }
            gen_instance_cmd(spec, no_oracle, &out)
        }
        Command::GenNetwork {
            model,
            nodes,
            param,
            neighbors,
            seed,
            tries,
            out,
        } => gen_network_cmd(model, nodes, param, neighbors, seed, tries, &out),
        Command::Run { common, rho } => run_cmd(&common, rho, None),
        Command::SweepRho { common, grid } => {
            let grid = if grid.is_empty() {
                TYPE_TWO_GRID.to_vec()
            } else {
                grid
            };
            run_cmd(&common, 1.0, Some(&grid))
        }
        Command::Scale {
            pmax,
            m,
            n,
            k,
            seed,
            target,
            max_steps,
            out,
        } => scale_cmd(pmax, m, n, k, seed, target, max_steps, out.as_ref()),
        Command::Oracle { instance, tol, out } => oracle_cmd(&instance, tol, out.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
