use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use rlt_core::bench::{self, BenchConfig, Variant};
use rlt_core::cutloop::{branch_and_bound, solve_root};
use rlt_core::detect::detect_with_sources;
use rlt_core::generate::{corpus, CorpusKind};
use rlt_core::instance_io::{read_instance_file, write_instance, INSTANCE_EXTENSION};
use rlt_core::{Problem, ProductRelation, RelationSense, VarId};

#[derive(Parser)]
#[command(
    name = "rlt",
    version,
    about = "RLT cuts for bilinear products: solver and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve every instance under every variant and write CSV tables.
    Bench {
        #[arg(long)]
        instances: PathBuf,
        /// Comma-separated: off, erlt, ierlt, each optionally suffixed -nomark / -noproj
        #[arg(long, default_value = "off,erlt,ierlt", value_delimiter = ',')]
        variants: Vec<String>,
        #[arg(long, value_enum, default_value = "on")]
        marking: Switch,
        #[arg(long, value_enum, default_value = "on")]
        projection: Switch,
        /// Seconds per run
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        node_limit: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        serial: bool,
        /// Include wall-clock columns in the runs CSV
        #[arg(long)]
        with_times: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lower ends of the [x, time limit] subsets, in seconds
        #[arg(long, value_delimiter = ',')]
        brackets: Option<Vec<f64>>,
    },
    /// Print implicit product relations and the rows they come from.
    Detect { file: PathBuf },
    /// Run the root cut loop and print its trajectory.
    Root {
        file: PathBuf,
        #[arg(long, default_value = "ierlt")]
        variant: String,
        #[arg(long, value_enum, default_value = "on")]
        marking: Switch,
        #[arg(long, value_enum, default_value = "on")]
        projection: Switch,
        /// Also list the cuts
        #[arg(long)]
        cuts: bool,
    },
    /// Branch and bound one instance.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "ierlt")]
        variant: String,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        node_limit: Option<usize>,
    },
    /// Write a seeded random corpus.
    Gen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "mixed")]
        kind: String,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

enum Failure {
    Config(String),
    Runs(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runs(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<Problem, Failure> {
    read_instance_file(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Bench {
            instances,
            variants,
            marking,
            projection,
            time_limit,
            node_limit,
            out,
            serial,
            with_times,
            seed,
            brackets,
        } => {
            let paths = if instances.is_dir() {
                bench::discover_instances(&instances).map_err(|e| Failure::Config(e.to_string()))?
            } else {
                return Err(Failure::Config(format!(
                    "{} is not a directory",
                    instances.display()
                )));
            };
            let variants = variants
                .iter()
                .map(|t| Variant::parse(t, marking.on(), projection.on()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Config(e.to_string()))?;
            let mut config = BenchConfig::new(paths, variants);
            if let Some(t) = time_limit {
                config.time_limit_s = t;
            }
            if let Some(n) = node_limit {
                config.node_limit = n;
            }
            if let Some(b) = brackets {
                config.brackets = b;
            }
            config.serial = serial;
            config.seed = seed;
            let report =
                bench::run_benchmark(&config).map_err(|e| Failure::Config(e.to_string()))?;
            let written = bench::write_outputs(&report, &out, with_times)
                .map_err(|e| Failure::Config(e.to_string()))?;
            for p in &written {
                println!("wrote {}", p.display());
            }
            let fails: Vec<String> = report
                .runs
                .iter()
                .filter(|r| r.is_fail())
                .map(|r| {
                    format!(
                        "fail: {} / {}: {}",
                        r.instance,
                        r.variant,
                        r.message.as_deref().unwrap_or("")
                    )
                })
                .collect();
            if fails.is_empty() {
                Ok(())
            } else {
                Err(Failure::Runs(fails.join("\n")))
            }
        }
        Command::Detect { file } => {
            let p = load(&file)?;
            let found = detect_with_sources(&p);
            println!("{} implicit product relation(s)", found.len());
            for d in found {
                let row_name = |c: &rlt_core::detect::CandidateRelation| match c.row {
                    Some(r) => p.rows[r.index()].name.clone(),
                    None => format!("bounds of {}", p.var(c.w).name),
                };
                println!(
                    "{}    [from {}, {}]",
                    format_relation(&p, &d.relation),
                    row_name(&d.first),
                    row_name(&d.second)
                );
            }
            Ok(())
        }
        Command::Root {
            file,
            variant,
            marking,
            projection,
            cuts,
        } => {
            let p = load(&file)?;
            let v = Variant::parse(&variant, marking.on(), projection.on())
                .map_err(|e| Failure::Config(e.to_string()))?;
            let r = solve_root(&p, &v.settings).map_err(|e| Failure::Runs(e.to_string()))?;
            println!("variant {}", v.name);
            println!("relations detected {}", r.relations_detected);
            for (round, bound) in &r.bound_trajectory {
                let added = if *round == 0 {
                    0
                } else {
                    r.cuts_added[round - 1]
                };
                println!("round {round:>3}  bound {bound:.10}  cuts {added}");
            }
            println!("final bound {:.10}", r.final_bound);
            println!(
                "lp iterations {}  lp solves {}",
                r.lp_iterations, r.lp_solves
            );
            let c = &r.counters;
            println!(
                "candidates {}  projection rejected {}  built {}  kept {}",
                c.candidates, c.projection_rejected, c.cuts_built, c.cuts_kept
            );
            println!(
                "separation {:.6}s  detection {:.6}s",
                r.separation_time.as_secs_f64(),
                r.detection_time.as_secs_f64()
            );
            if cuts {
                for cut in &r.cuts {
                    let terms: Vec<String> = cut
                        .expr
                        .terms()
                        .map(|(v, c)| format!("{c:+} {}", p.var(v).name))
                        .collect();
                    println!("cut {} <= {}", terms.join(" "), cut.rhs);
                }
            }
            Ok(())
        }
        Command::Solve {
            file,
            variant,
            time_limit,
            node_limit,
        } => {
            let p = load(&file)?;
            let v =
                Variant::parse(&variant, true, true).map_err(|e| Failure::Config(e.to_string()))?;
            let mut settings = v.settings;
            if let Some(t) = time_limit {
                settings.time_limit_s = t;
            }
            if let Some(n) = node_limit {
                settings.node_limit = n;
            }
            let r = branch_and_bound(&p, &settings).map_err(|e| Failure::Runs(e.to_string()))?;
            println!("status {}", r.status.name());
            println!("primal {}", r.primal_bound);
            println!("dual {}", r.dual_bound);
            println!(
                "nodes {}  lp iterations {}  cuts {}",
                r.nodes, r.lp_iterations, r.cuts_added
            );
            if let Some(x) = &r.incumbent {
                for (k, val) in x.iter().enumerate() {
                    println!("  {} = {val}", p.var(VarId(k)).name);
                }
            }
            Ok(())
        }
        Command::Gen {
            out,
            kind,
            count,
            seed,
        } => {
            let kind = CorpusKind::parse(&kind)
                .ok_or_else(|| Failure::Config(format!("unknown kind `{kind}`")))?;
            std::fs::create_dir_all(&out).map_err(|e| Failure::Config(e.to_string()))?;
            for (name, p) in corpus(kind, count, seed) {
                let path = out.join(format!("{name}{INSTANCE_EXTENSION}"));
                std::fs::write(&path, write_instance(&p))
                    .map_err(|e| Failure::Config(e.to_string()))?;
            }
            println!("wrote {count} instance(s) to {}", out.display());
            Ok(())
        }
    }
}

fn format_relation(p: &Problem, r: &ProductRelation) -> String {
    let name = |v: VarId| p.var(v).name.as_str();
    let sense = match r.sense {
        RelationSense::Le => "<=",
        RelationSense::Ge => ">=",
        RelationSense::Eq => "=",
    };
    // adding 0.0 turns -0 into 0
    format!(
        "{:+} {} {:+} {} {:+} {} {:+} {sense} {}*{}",
        r.a + 0.0,
        name(r.i),
        r.b + 0.0,
        name(r.w),
        r.c + 0.0,
        name(r.j),
        r.d + 0.0,
        name(r.i),
        name(r.j)
    )
}
