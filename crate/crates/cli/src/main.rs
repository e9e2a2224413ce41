use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pathcover::exact::{exact_opt, SearchBudget};
use pathcover::gen::{generate, Model};
use pathcover::graph::{parse_graph, Graph, Solution};
use pathcover::harness::{Campaign, Checks, Fault, ReplayCase, Report};
use pathcover::pipeline::{inspect, solve_report, AlgoConfig};
use pathcover::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

/// Cover vertices with vertex-disjoint paths of at least five vertices.
#[derive(Parser)]
#[command(name = "pathcover", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the approximation algorithm on an edge-list file.
    Solve {
        /// Edge-list file, `-` for stdin.
        input: PathBuf,
        #[arg(long)]
        json: bool,
        /// Print per-level phase traces.
        #[arg(long)]
        trace: bool,
    },
    /// Compute an optimal cover by exhaustive search.
    Exact {
        input: PathBuf,
        /// Minimum number of vertices per path.
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Vertex cap; defaults to PATHCOVER_ORACLE_CAP or 18.
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Compare the algorithm with the exact oracle on random instances.
    Verify {
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Skip the matching-size checks.
        #[arg(long)]
        no_matched: bool,
        /// Corrupt every solution with a 4-vertex path.
        #[arg(long)]
        inject_fault: bool,
        /// Re-run a replay file instead of a campaign.
        #[arg(long, conflicts_with = "inject_fault")]
        replay: Option<PathBuf>,
    },
    /// Time the algorithm on random instances without the oracle.
    Bench {
        #[command(flatten)]
        campaign: CampaignArgs,
    },
    /// Dump components, anchors and metrics of the top level.
    Inspect { input: PathBuf },
    /// Print a random instance as an edge list.
    Gen {
        /// `gnp:P`, `planted:L1,L2,...:NOISE`, `clusters:NOISE` or `mixed:K`.
        #[arg(long, default_value = "gnp:0.2")]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Instance sizes, cycled through.
    #[arg(long, value_delimiter = ',', default_value = "12")]
    n: Vec<usize>,
    /// Edge probabilities for G(n, p) models.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3")]
    p_grid: Vec<f64>,
    /// Extra models; repeatable.
    #[arg(long)]
    model: Vec<Model>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Directory for the CSV, JSON and replay files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
}

impl CampaignArgs {
    fn campaign(&self, checks: Checks) -> Result<Campaign, Error> {
        let mut models = Vec::new();
        for &p in &self.p_grid {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Precondition(format!("probability {p} outside [0, 1]")));
            }
            models.push(Model::Gnp { p });
        }
        models.extend(self.model.iter().cloned());
        Ok(Campaign { trials: self.trials, sizes: self.n.clone(), models, seed: self.seed, checks })
    }
}

enum Failure {
    Exit(u8, String),
    Violations,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } => EXIT_PARSE,
            Error::Budget(_) => EXIT_BUDGET,
            _ => EXIT_FAILURE,
        };
        Failure::Exit(code, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Exit(EXIT_FAILURE, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violations) => ExitCode::from(EXIT_VIOLATION),
        Err(Failure::Exit(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Exit(EXIT_FAILURE, format!("{}: {e}", path.display())))?
    };
    parse_graph(&text).map_err(|e| match e {
        Error::Parse { .. } => Failure::Exit(EXIT_PARSE, format!("{}: {e}", path.display())),
        other => other.into(),
    })
}

fn print_solution(out: &mut impl Write, s: &Solution) -> io::Result<()> {
    for p in &s.paths {
        let line: Vec<String> = p.iter().map(usize::to_string).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    writeln!(out, "covered={}", s.covered)
}

fn run(command: Command) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Solve { input, json, trace } => {
            let g = read_graph(&input)?;
            let r = solve_report(&g, &AlgoConfig { trace })?;
            if json {
                let mut v = json!({
                    "n": g.vertex_count(),
                    "m": g.edge_count(),
                    "covered": r.solution.covered,
                    "paths": r.solution.paths,
                    "levels": r.levels,
                });
                if trace {
                    v["trace"] = json!(r.trace);
                    v["audit"] = json!(r.audit);
                }
                writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
            } else {
                for line in &r.trace {
                    writeln!(out, "# {line}")?;
                }
                print_solution(&mut out, &r.solution)?;
            }
        }
        Command::Exact { input, k, max_n, json } => {
            let g = read_graph(&input)?;
            let mut budget = SearchBudget::from_env();
            if let Some(cap) = max_n {
                budget.max_vertices = cap;
            }
            let s = exact_opt(&g, k, &budget)?;
            if json {
                let v = json!({ "n": g.vertex_count(), "m": g.edge_count(), "k": k, "covered": s.covered, "paths": s.paths });
                writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
            } else {
                print_solution(&mut out, &s)?;
            }
        }
        Command::Verify { campaign, no_matched, inject_fault, replay } => {
            if let Some(path) = replay {
                let text = fs::read_to_string(&path)?;
                let case: ReplayCase = serde_json::from_str(&text)
                    .map_err(|e| Failure::Exit(EXIT_PARSE, format!("{}: {e}", path.display())))?;
                let t = case.replay()?;
                for v in &t.violations {
                    writeln!(out, "violation: {v}")?;
                }
                writeln!(out, "seed={} alg={} opt={}", t.record.seed, t.record.alg, opt_text(t.record.opt))?;
                return if t.violations.is_empty() { Ok(()) } else { Err(Failure::Violations) };
            }
            let checks = Checks {
                oracle: Some(SearchBudget::from_env()),
                matched: !no_matched,
                fault: inject_fault.then_some(Fault::ShortPath),
            };
            let report = campaign.campaign(checks)?.run()?;
            persist(&campaign.out, "verify", &report)?;
            summarize(&mut out, &report, campaign.json)?;
            if report.summary.violations > 0 {
                return Err(Failure::Violations);
            }
        }
        Command::Bench { campaign } => {
            let checks = Checks { oracle: None, matched: false, fault: None };
            let report = campaign.campaign(checks)?.run()?;
            persist(&campaign.out, "bench", &report)?;
            summarize(&mut out, &report, campaign.json)?;
            if report.summary.violations > 0 {
                return Err(Failure::Violations);
            }
        }
        Command::Inspect { input } => {
            let g = read_graph(&input)?;
            write!(out, "{}", inspect(&g)?)?;
        }
        Command::Gen { model, n, seed, output } => {
            let inst = generate(&model, n, seed);
            let text = format!("# model {model} n {n} seed {seed} planted {}\n{}", inst.planted, inst.graph.to_edge_list());
            match output {
                Some(path) => fs::write(path, text)?,
                None => out.write_all(text.as_bytes())?,
            }
        }
    }
    Ok(())
}

fn opt_text(opt: Option<usize>) -> String {
    opt.map_or_else(|| "-".into(), |o| o.to_string())
}

fn persist(dir: &Path, stem: &str, report: &Report) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    report.write_csv(fs::File::create(dir.join(format!("{stem}.csv")))?)?;
    fs::write(dir.join(format!("{stem}.json")), report.to_json())?;
    for case in &report.violations {
        let path = dir.join(format!("replay-{}.json", case.seed));
        fs::write(&path, serde_json::to_string_pretty(case).expect("json"))?;
        eprintln!("violation on seed {}: {}", case.seed, case.violations.join("; "));
        eprintln!("replay with: pathcover verify --replay {}", path.display());
    }
    Ok(())
}

fn summarize(out: &mut impl Write, report: &Report, json: bool) -> io::Result<()> {
    let s = &report.summary;
    if json {
        return writeln!(out, "{}", serde_json::to_string_pretty(s).expect("json"));
    }
    let ratio = |r: Option<f64>| r.map_or_else(|| "-".into(), |r| format!("{r:.4}"));
    writeln!(out, "trials={} with_opt={} violations={}", s.trials, s.with_opt, s.violations)?;
    writeln!(out, "max_ratio={} mean_ratio={} optimal={} zero_alg={}", ratio(s.max_ratio), ratio(s.mean_ratio), s.optimal, s.zero_alg)?;
    writeln!(out, "recursive={} ops={:?} total_ms={:.1}", s.recursive, s.ops, s.total_ms)?;
    if s.max_ratio.is_some() {
        writeln!(out, "worst_seed={}", s.worst_seed.unwrap_or_default())?;
    }
    Ok(())
}
