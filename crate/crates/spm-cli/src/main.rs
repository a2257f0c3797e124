//! `spm` — build, verify, count and export sand pile lattices.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spm::counting::{
    p_recursion, reconcile, spm_size_via_p, spm_size_via_tree, CVariant, DeltaVariant, TreeSizeMode,
};
use spm::diagram::{
    self, build_bfs_budgeted, compare, infimum, supremum, Coords, Diagram, DiagramError, OrderRel,
    DEFAULT_NODE_BUDGET,
};
use spm::incremental::build_incremental_budgeted;
use spm::infinite::{
    build_upto_with, compare_infinite, inf_infinite, sup_infinite, InfinitePartition, UptoMode,
};
use spm::partition::Partition;
use spm::sptree::{build_tree_budgeted, chain_decomposition, n_memberships, n_root_of, x_max};
use spm::verify::run_suite;

#[derive(Parser)]
#[command(
    name = "spm",
    version,
    about = "Sand pile lattices: construction, verification, counting, export"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BuildMethod {
    Bfs,
    Incremental,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoordsArg {
    Finite,
    Infinite,
}

impl From<CoordsArg> for Coords {
    fn from(c: CoordsArg) -> Coords {
        match c {
            CoordsArg::Finite => Coords::Finite,
            CoordsArg::Infinite => Coords::Infinite,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UptoModeArg {
    Direct,
    Extract,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CountMethod {
    Bfs,
    #[value(name = "p-rec")]
    PRec,
    Tree,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CountVariant {
    #[value(name = "printed-corollary")]
    PrintedCorollary,
    #[value(name = "printed-theorem3")]
    PrintedTheorem3,
    Corrected,
    #[value(name = "printed-c")]
    PrintedC,
    #[value(name = "structural-c")]
    StructuralC,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QueryOp {
    Inf,
    Sup,
    Leq,
}

#[derive(Args)]
struct OutArgs {
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the lattice of piles reachable from a single column.
    Build {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value = "bfs")]
        method: BuildMethod,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build the stacked filter of all lattices up to a grain bound.
    BuildUpto {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value = "infinite")]
        coords: CoordsArg,
        #[arg(long, value_enum, default_value = "direct")]
        mode: UptoModeArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Print a lattice size computed by the chosen route.
    Count {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum)]
        method: CountMethod,
        /// Recurrence variant (p-rec: printed-corollary|printed-theorem3|
        /// corrected; tree: printed-c|structural-c).
        #[arg(long, value_enum)]
        variant: Option<CountVariant>,
    },
    /// Run the invariant suites at scale n; non-zero exit on failure.
    Verify {
        #[arg(long)]
        n: u64,
    },
    /// Compare every recurrence against its brute-force oracle.
    Reconcile {
        #[arg(long)]
        max_n: u64,
        #[arg(long, default_value_t = 15)]
        max_l: usize,
        #[arg(long, default_value_t = 6)]
        max_k: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: ReportFormat,
    },
    /// Export a diagram or the tree without rebuilding options.
    Export {
        #[command(subcommand)]
        what: ExportCmd,
    },
    /// Order queries on two piles (equal grain counts), or on two
    /// infinite-column states written as ~,tail.
    Query {
        #[arg(value_enum)]
        op: QueryOp,
        a: String,
        b: String,
    },
    /// Tree inspection commands.
    Tree {
        #[command(subcommand)]
        sub: TreeCmd,
    },
    /// Time the stacked-filter construction per node and edge.
    Bench {
        #[arg(long)]
        max_n: u64,
    },
}

#[derive(Subcommand)]
enum ExportCmd {
    /// Export a single-n lattice.
    Single {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Export the stacked filter up to n.
    Upto {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value = "infinite")]
        coords: CoordsArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Export the grain-addition tree to a depth (DOT only).
    Tree {
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Subcommand)]
enum TreeCmd {
    /// Print the subtree annotations and successor labels of one pile.
    Classify { partition: String },
    /// Print the rightmost chain with its attachments as CSV rows.
    Chain {
        #[arg(long)]
        depth: usize,
    },
    /// Materialize the tree and print per-level node counts as CSV.
    Build {
        #[arg(long)]
        depth: usize,
    },
}

enum Failure {
    /// Bad arguments or violated preconditions: exit 2.
    Usage(String),
    /// Node budget exceeded: exit 3.
    Budget(String),
    /// Verification failure or runtime error: exit 1.
    Run(String),
}

impl From<DiagramError> for Failure {
    fn from(e: DiagramError) -> Failure {
        match e {
            DiagramError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            DiagramError::GrainMismatch { .. } | DiagramError::NodeNotFound(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

fn budget_from_env() -> Result<usize, Failure> {
    match std::env::var("SPM_BUDGET") {
        Ok(v) => v
            .parse::<usize>()
            .map_err(|_| Failure::Usage(format!("SPM_BUDGET must be a node count, got {v:?}"))),
        Err(_) => Ok(DEFAULT_NODE_BUDGET),
    }
}

fn parse_partition(s: &str) -> Result<Partition, Failure> {
    s.parse().map_err(|e| Failure::Usage(format!("{e}")))
}

fn emit(text: &str, out: &OutArgs) -> Result<(), Failure> {
    match &out.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(d: &Diagram, format: Format, coords: Coords) -> String {
    match format {
        Format::Json => {
            let mut s = diagram::to_json(d, coords);
            s.push('\n');
            s
        }
        Format::Dot => diagram::to_dot(d, coords),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let budget = budget_from_env()?;
    match cli.cmd {
        Cmd::Build {
            n,
            method,
            format,
            out,
        } => {
            let d = match method {
                BuildMethod::Bfs => build_bfs_budgeted(n, budget)?,
                BuildMethod::Incremental => build_incremental_budgeted(n, budget)?,
            };
            emit(&render(&d, format, Coords::Finite), &out)
        }
        Cmd::BuildUpto {
            n,
            coords,
            mode,
            format,
            out,
        } => {
            let mode = match mode {
                UptoModeArg::Direct => UptoMode::Direct,
                UptoModeArg::Extract => UptoMode::Extract,
            };
            let d = build_upto_with(n, mode, budget)?;
            emit(&render(&d, format, coords.into()), &out)
        }
        Cmd::Count { n, method, variant } => {
            let value = count_value(n, method, variant, budget)?;
            println!("{value}");
            Ok(())
        }
        Cmd::Verify { n } => {
            let outcomes = run_suite(n);
            let mut failed = false;
            for o in &outcomes {
                if o.passed {
                    println!("PASS {} ({})", o.name, o.detail);
                } else {
                    failed = true;
                    println!("FAIL {}: {}", o.name, o.detail);
                }
            }
            if failed {
                Err(Failure::Run(format!("verification failed at n={n}")))
            } else {
                Ok(())
            }
        }
        Cmd::Reconcile {
            max_n,
            max_l,
            max_k,
            out,
            format,
        } => {
            let report = reconcile(max_n, max_l, max_k).map_err(|e| Failure::Run(e.to_string()))?;
            let text = match format {
                ReportFormat::Csv => report.to_csv(),
                ReportFormat::Json => report.to_json(),
            };
            fs::write(&out, text)
                .map_err(|e| Failure::Run(format!("cannot write {}: {e}", out.display())))?;
            let mismatches = report.mismatches().count();
            println!(
                "{} rows, {} mismatches -> {}",
                report.rows.len(),
                mismatches,
                out.display()
            );
            Ok(())
        }
        Cmd::Export { what } => match what {
            ExportCmd::Single { n, format, out } => {
                let d = build_bfs_budgeted(n, budget)?;
                emit(&render(&d, format, Coords::Finite), &out)
            }
            ExportCmd::Upto {
                n,
                coords,
                format,
                out,
            } => {
                let d = build_upto_with(n, UptoMode::Direct, budget)?;
                emit(&render(&d, format, coords.into()), &out)
            }
            ExportCmd::Tree { depth, out } => {
                let t =
                    build_tree_budgeted(depth, budget).map_err(|e| Failure::Run(e.to_string()))?;
                emit(&spm::sptree::to_dot(&t), &out)
            }
        },
        Cmd::Query { op, a, b } => {
            let line = query(op, &a, &b, budget)?;
            println!("{line}");
            Ok(())
        }
        Cmd::Tree { sub } => match sub {
            TreeCmd::Classify { partition } => {
                let s = parse_partition(&partition)?;
                if !s.is_spm() {
                    return Err(Failure::Usage(format!(
                        "({s}) is not reachable in any lattice"
                    )));
                }
                println!("partition: {s}");
                match n_root_of(&s) {
                    Some(k) => println!("n_root: N{k}"),
                    None => println!("n_root: -"),
                }
                let x = x_max(&s);
                if x >= 1 {
                    println!("x_root: X{x}");
                } else {
                    println!("x_root: -");
                }
                let mem = n_memberships(&s);
                let mem_str = mem
                    .iter()
                    .map(|k| format!("N{k}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                println!(
                    "in_subtrees: {}",
                    if mem.is_empty() { "-".into() } else { mem_str }
                );
                let mut labels = vec![1usize];
                labels.extend(mem.iter().map(|&k| k + 1));
                println!(
                    "successor_labels: {}",
                    labels
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                );
                Ok(())
            }
            TreeCmd::Chain { depth } => {
                let c = chain_decomposition(depth);
                println!("level,node,attachment");
                for node in &c.chain {
                    let attach = c
                        .attachments
                        .iter()
                        .find(|a| a.level == node.level)
                        .map(|a| format!("X{}", a.k))
                        .unwrap_or_else(|| "-".to_string());
                    println!("{},\"{}\",{}", node.level, node.partition, attach);
                }
                Ok(())
            }
            TreeCmd::Build { depth } => {
                let t =
                    build_tree_budgeted(depth, budget).map_err(|e| Failure::Run(e.to_string()))?;
                println!("level,nodes");
                for lvl in 0..=depth {
                    println!("{},{}", lvl, t.level(lvl).len());
                }
                Ok(())
            }
        },
        Cmd::Bench { max_n } => {
            print!("{}", bench(max_n, budget)?);
            Ok(())
        }
    }
}

fn count_value(
    n: u64,
    method: CountMethod,
    variant: Option<CountVariant>,
    budget: usize,
) -> Result<u64, Failure> {
    match method {
        CountMethod::Bfs => {
            if variant.is_some() {
                return Err(Failure::Usage("--variant does not apply to bfs".into()));
            }
            Ok(build_bfs_budgeted(n, budget)?.node_count() as u64)
        }
        CountMethod::PRec => {
            let delta = match variant.unwrap_or(CountVariant::Corrected) {
                CountVariant::PrintedCorollary => DeltaVariant::PrintedCorollary,
                CountVariant::PrintedTheorem3 => DeltaVariant::PrintedTheorem3,
                CountVariant::Corrected => DeltaVariant::Corrected,
                other => {
                    return Err(Failure::Usage(format!(
                        "variant {:?} is a tree variant; p-rec takes printed-corollary, \
                         printed-theorem3 or corrected",
                        variant_name(other)
                    )))
                }
            };
            let table = p_recursion(n.max(1), delta);
            Ok(spm_size_via_p(n, &table))
        }
        CountMethod::Tree => match variant.unwrap_or(CountVariant::StructuralC) {
            CountVariant::StructuralC => Ok(spm_size_via_tree(
                n,
                TreeSizeMode::Structural,
                CVariant::Structural,
            )),
            CountVariant::PrintedC => Ok(spm_size_via_tree(
                n,
                TreeSizeMode::Printed,
                CVariant::Printed,
            )),
            other => Err(Failure::Usage(format!(
                "variant {:?} is a p-rec variant; tree takes printed-c or structural-c",
                variant_name(other)
            ))),
        },
    }
}

fn variant_name(v: CountVariant) -> &'static str {
    match v {
        CountVariant::PrintedCorollary => "printed-corollary",
        CountVariant::PrintedTheorem3 => "printed-theorem3",
        CountVariant::Corrected => "corrected",
        CountVariant::PrintedC => "printed-c",
        CountVariant::StructuralC => "structural-c",
    }
}

fn rel_name(rel: OrderRel) -> &'static str {
    match rel {
        OrderRel::Equal => "equal",
        OrderRel::Greater => "above",
        OrderRel::Less => "below",
        OrderRel::Incomparable => "incomparable",
    }
}

fn query(op: QueryOp, a: &str, b: &str, budget: usize) -> Result<String, Failure> {
    let infinite = a.trim_start().starts_with('~') || b.trim_start().starts_with('~');
    if infinite {
        let pa: InfinitePartition = a.parse().map_err(|e| Failure::Usage(format!("{e}")))?;
        let pb: InfinitePartition = b.parse().map_err(|e| Failure::Usage(format!("{e}")))?;
        return Ok(match op {
            QueryOp::Inf => inf_infinite(&pa, &pb).to_string(),
            QueryOp::Sup => sup_infinite(&pa, &pb).to_string(),
            QueryOp::Leq => rel_name(compare_infinite(&pa, &pb)).to_string(),
        });
    }
    let pa = parse_partition(a)?;
    let pb = parse_partition(b)?;
    if !pa.is_spm() || !pb.is_spm() {
        return Err(Failure::Usage(
            "both arguments must be reachable piles".into(),
        ));
    }
    Ok(match op {
        QueryOp::Inf => infimum(&pa, &pb)?.to_string(),
        QueryOp::Sup => {
            let d = build_bfs_budgeted(pa.grains(), budget)?;
            supremum(&pa, &pb, &d)?.to_string()
        }
        QueryOp::Leq => rel_name(compare(&pa, &pb)?).to_string(),
    })
}

/// Times the stacked-filter construction; the minimum over several runs
/// keeps scheduling noise out of the per-element figure.
fn bench(max_n: u64, budget: usize) -> Result<String, Failure> {
    let mut out = String::new();
    out.push_str("n,nodes,edges,best_ns,ns_per_element\n");
    for n in 1..=max_n {
        let d = build_upto_with(n, UptoMode::Direct, budget)?;
        let elements = (d.node_count() + d.edge_count()) as u64;
        let mut best = u64::MAX;
        for _ in 0..5 {
            let start = Instant::now();
            let built = build_upto_with(n, UptoMode::Direct, budget)?;
            let ns = start.elapsed().as_nanos() as u64;
            assert_eq!(built.node_count(), d.node_count());
            best = best.min(ns);
        }
        let _ = writeln!(
            out,
            "{n},{},{},{best},{:.1}",
            d.node_count(),
            d.edge_count(),
            best as f64 / elements as f64
        );
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
