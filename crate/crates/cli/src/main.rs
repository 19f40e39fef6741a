use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use superport::forest::{is_relatively_valid, is_valid};
use superport::network::to_pretty_json;
use superport::random::{rng, NetworkShape};
use superport::verify::{
    box_h, cayley, generalized_cayley, run_campaign, run_theorems, CampaignOptions, TreePart,
};
use superport::{
    format_rational, parse_rational, Circuit, Execution, ForestEnumerator, Matrix, Relabeling,
    ResponseMatrices, SuperportNetwork, Theorem, Verifier, DEFAULT_CAP,
};

#[derive(Parser, Debug)]
#[command(
    name = "superport",
    version,
    about = "Exact responses and matrix-tree checks for superport networks"
)]
struct Cli {
    /// Largest edge count accepted by forest enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Sum the conductances of parallel edges instead of rejecting them.
    #[arg(long, global = true)]
    merge_parallel: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Run enumeration and campaigns on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Show {
    #[value(name = "K")]
    K,
    #[value(name = "C")]
    C,
    #[value(name = "L")]
    L,
    #[value(name = "Lext")]
    Lext,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a network file and print it in canonical form.
    Validate { network: PathBuf },
    /// Solve a circuit file exactly.
    Solve { circuit: PathBuf },
    /// Print a response matrix.
    Response {
        network: PathBuf,
        #[arg(long, value_enum, default_value_t = Show::L)]
        show: Show,
    },
    /// List spanning forests as edge-index lists.
    Forests {
        network: PathBuf,
        /// trees, valid, relative:<i>, or all.
        #[arg(long, default_value = "all")]
        kind: String,
        /// Append the forest weight to each line.
        #[arg(long)]
        weights: bool,
    },
    /// Check theorems on a network, or on random networks with --campaign.
    Verify {
        network: Option<PathBuf>,
        /// kirchhoff, kw, entries, detl, minorsum, signedsum, gluing,
        /// solution, routes, singleton, or all.
        #[arg(long, default_value = "all")]
        theorem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random networks to check instead of a file.
        #[arg(long)]
        campaign: Option<usize>,
        /// Comma-separated X for a Kenyon-Wilson minor.
        #[arg(long, value_delimiter = ',')]
        x: Vec<u64>,
        /// Comma-separated Y for a Kenyon-Wilson minor.
        #[arg(long, value_delimiter = ',')]
        y: Vec<u64>,
        /// Comma-separated Z for a Kenyon-Wilson minor.
        #[arg(long, value_delimiter = ',')]
        z: Vec<u64>,
    },
    /// Count trees against the closed forms.
    #[command(group(clap::ArgGroup::new("what").required(true).args(["cayley", "gencayley"])))]
    Count {
        #[arg(long)]
        cayley: Option<usize>,
        /// JSON file: {"parts": [{"size": k, "edges": [[1, 2], ...]}, ...]}.
        #[arg(long)]
        gencayley: Option<PathBuf>,
    },
    /// Box-H transformation of resistances a, b, c, d.
    Boxh {
        a: String,
        b: String,
        c: String,
        d: String,
    },
}

/// Input or usage problem; exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Outcome = Result<bool, InputError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Validate { network } => validate(cli, network),
        Command::Solve { circuit } => solve(cli, circuit),
        Command::Response { network, show } => response(cli, network, *show),
        Command::Forests {
            network,
            kind,
            weights,
        } => forests(cli, network, kind, *weights, execution),
        Command::Verify {
            network,
            theorem,
            seed,
            campaign,
            x,
            y,
            z,
        } => {
            let theorems = parse_theorems(theorem)?;
            match (network, campaign) {
                (_, Some(count)) => campaign_cmd(cli, &theorems, *seed, *count, execution),
                (Some(path), None) => {
                    verify_file(cli, path, &theorems, *seed, [x, y, z], execution)
                }
                (None, None) => Err(InputError(
                    "verify needs a network file or --campaign N".into(),
                )),
            }
        }
        Command::Count { cayley, gencayley } => {
            count(cli, *cayley, gencayley.as_deref(), execution)
        }
        Command::Boxh { a, b, c, d } => boxh(cli, [a, b, c, d]),
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_network(cli: &Cli, path: &Path) -> Result<(SuperportNetwork, Relabeling), InputError> {
    SuperportNetwork::from_json(&read(path)?, cli.merge_parallel)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn mapping_json(map: &Relabeling) -> Value {
    json!(map
        .mapping
        .iter()
        .map(|&(o, c)| [o as usize, c])
        .collect::<Vec<_>>())
}

fn print_mapping(map: &Relabeling) {
    if !map.is_identity() {
        let parts: Vec<String> = map
            .mapping
            .iter()
            .map(|(o, c)| format!("{o}->{c}"))
            .collect();
        println!("relabeled: {}", parts.join(" "));
    }
}

fn emit(value: &Value) {
    print!("{}", to_pretty_json(value));
}

fn validate(cli: &Cli, path: &Path) -> Outcome {
    let (net, map) = load_network(cli, path)?;
    match cli.format {
        Format::Json => emit(&json!({"network": net.to_file(), "mapping": mapping_json(&map)})),
        Format::Text => {
            println!(
                "valid: {} vertices, {} boundary, {} superports, {} edges",
                net.n(),
                net.m(),
                net.p(),
                net.edges().len()
            );
            print_mapping(&map);
            print!("{}", net.to_json());
        }
    }
    Ok(true)
}

fn solve(cli: &Cli, path: &Path) -> Outcome {
    let (circuit, map) = Circuit::from_json(&read(path)?, cli.merge_parallel)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let net = circuit.network();
    let sol = superport::solve(&circuit)?;
    match cli.format {
        Format::Json => emit(&json!({"solution": sol.to_json(net), "mapping": mapping_json(&map)})),
        Format::Text => {
            print_mapping(&map);
            for (v, u) in sol.voltages.iter().enumerate() {
                println!("U{} = {}", v + 1, format_rational(u));
            }
            for e in net.edges() {
                println!(
                    "I{}->{} = {}",
                    e.u + 1,
                    e.v + 1,
                    format_rational(&sol.currents[e.u][e.v])
                );
            }
            for (v, i) in sol.incoming.iter().enumerate() {
                println!("incoming {} = {}", v + 1, format_rational(i));
            }
        }
    }
    Ok(true)
}

fn response(cli: &Cli, path: &Path, show: Show) -> Outcome {
    let (net, map) = load_network(cli, path)?;
    let matrix: Matrix = match show {
        Show::K => superport::kirchhoff_matrix(&net),
        Show::C => superport::electrical_response(&net)?,
        Show::L => superport::superport_response(&net)?,
        Show::Lext => ResponseMatrices::compute(&net, true)?
            .l_ext
            .expect("requested"),
    };
    match cli.format {
        Format::Json => emit(&serde_json::to_value(&matrix)?),
        Format::Text => {
            print_mapping(&map);
            print!("{matrix}");
        }
    }
    Ok(true)
}

fn forests(cli: &Cli, path: &Path, kind: &str, weights: bool, execution: Execution) -> Outcome {
    let (net, map) = load_network(cli, path)?;
    let relative = |i: u64| -> Result<usize, InputError> {
        let v = map
            .to_canonical(i)
            .ok_or_else(|| InputError(format!("unknown vertex {i}")))?;
        if !net.is_boundary(v) {
            return Err(InputError(format!("vertex {i} is not a boundary vertex")));
        }
        Ok(v)
    };
    let enumerator = ForestEnumerator::new(&net)
        .cap(cli.cap)
        .execution(execution);
    let list = match kind {
        "all" => enumerator.collect()?,
        "trees" => enumerator.collect_filtered(|f| f.num_components() == 1)?,
        "valid" => enumerator.collect_filtered(|f| is_valid(&net, f))?,
        other => match other.strip_prefix("relative:") {
            Some(i) => {
                let i = relative(
                    i.parse()
                        .map_err(|_| InputError(format!("bad vertex in {other:?}")))?,
                )?;
                enumerator.collect_filtered(|f| is_relatively_valid(&net, f, i))?
            }
            None => return Err(InputError(format!("unknown forest kind {other:?}"))),
        },
    };
    if cli.format == Format::Text {
        print_mapping(&map);
    }
    for f in &list {
        match cli.format {
            Format::Json => {
                let mut line =
                    json!({"edges": f.edges().iter().map(|e| e + 1).collect::<Vec<_>>()});
                if weights {
                    line["weight"] = json!(format_rational(&f.weight(&net)));
                }
                println!("{line}");
            }
            Format::Text if weights => println!("{f}\t{}", format_rational(&f.weight(&net))),
            Format::Text => println!("{f}"),
        }
    }
    Ok(true)
}

fn parse_theorems(name: &str) -> Result<Vec<Theorem>, InputError> {
    if name == "all" {
        Ok(Theorem::ALL.to_vec())
    } else {
        Ok(vec![name.parse::<Theorem>()?])
    }
}

/// Failing reports first, each with its witness.
fn print_reports(cli: &Cli, reports: &[superport::Report]) -> bool {
    let (fail, pass): (Vec<_>, Vec<_>) = reports.iter().partition(|r| !r.passed());
    match cli.format {
        Format::Json => {
            let all: Vec<Value> = fail.iter().chain(&pass).map(|r| r.to_json()).collect();
            emit(&json!(all));
        }
        Format::Text => {
            for r in fail.iter().chain(&pass) {
                println!("{r}");
            }
        }
    }
    fail.is_empty()
}

fn verify_file(
    cli: &Cli,
    path: &Path,
    theorems: &[Theorem],
    seed: u64,
    [x, y, z]: [&Vec<u64>; 3],
    execution: Execution,
) -> Outcome {
    let (net, map) = load_network(cli, path)?;
    if theorems.len() == 1 && theorems[0].needs_non_root() && net.m() <= net.p() {
        return Err(InputError(superport::VerifyError::NeedsNonRoot.to_string()));
    }
    let verifier = Verifier::new(&net, cli.cap, execution)?;
    let reports = if !(x.is_empty() && y.is_empty() && z.is_empty()) {
        let canon = |s: &[u64]| -> Result<Vec<usize>, InputError> {
            s.iter()
                .map(|&v| {
                    map.to_canonical(v)
                        .ok_or_else(|| InputError(format!("unknown vertex {v}")))
                })
                .collect()
        };
        vec![verifier.kw_minor(&canon(x)?, &canon(y)?, &canon(z)?, true)?]
    } else {
        run_theorems(&verifier, theorems, &mut rng(seed), 3)?
    };
    if cli.format == Format::Text {
        print_mapping(&map);
    }
    Ok(print_reports(cli, &reports))
}

fn campaign_cmd(
    cli: &Cli,
    theorems: &[Theorem],
    seed: u64,
    count: usize,
    execution: Execution,
) -> Outcome {
    let opts = CampaignOptions {
        seed,
        count,
        shape: NetworkShape::default(),
        cap: cli.cap,
        execution,
        theorems: theorems.to_vec(),
        kw_samples: 3,
    };
    let outcomes = run_campaign(&opts)?;
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed()).collect();
    let checks: usize = outcomes.iter().map(|o| o.reports.len()).sum();
    match cli.format {
        Format::Json => {
            let failures: Vec<Value> = failed
                .iter()
                .map(|o| {
                    json!({
                        "index": o.index,
                        "seed": o.seed,
                        "reports": o.reports.iter().filter(|r| !r.passed()).map(|r| r.to_json()).collect::<Vec<_>>(),
                        "cancellation_failures": o.cancellation.as_ref().map(|c| c.failures.clone()),
                    })
                })
                .collect();
            let networks: Vec<Value> = outcomes
                .iter()
                .map(|o| {
                    json!({
                        "index": o.index,
                        "seed": o.seed,
                        "n": o.network.n(),
                        "m": o.network.m(),
                        "p": o.network.p(),
                        "edges": o.network.edges().len(),
                        "checks": o.reports.len(),
                        "status": if o.passed() { "pass" } else { "fail" },
                    })
                })
                .collect();
            emit(&json!({
                "seed": seed,
                "networks": count,
                "checks": checks,
                "failed": failed.len(),
                "failures": failures,
                "results": networks,
            }));
        }
        Format::Text => {
            for o in &failed {
                for r in o.reports.iter().filter(|r| !r.passed()) {
                    println!("network {} (seed {}): {r}", o.index, o.seed);
                }
                if let Some(c) = &o.cancellation {
                    for f in &c.failures {
                        println!("network {} (seed {}): cancellation: {f}", o.index, o.seed);
                    }
                }
            }
            for o in &outcomes {
                println!(
                    "network {:>4} seed {:>20} n={} m={} p={} |E|={:>2} checks={:>2} {}",
                    o.index,
                    o.seed,
                    o.network.n(),
                    o.network.m(),
                    o.network.p(),
                    o.network.edges().len(),
                    o.reports.len(),
                    if o.passed() { "pass" } else { "FAIL" }
                );
            }
            println!(
                "{} networks, {checks} checks, {} failed",
                outcomes.len(),
                failed.len()
            );
        }
    }
    Ok(failed.is_empty())
}

fn count(cli: &Cli, m: Option<usize>, parts_file: Option<&Path>, execution: Execution) -> Outcome {
    let result = match (m, parts_file) {
        (Some(m), _) => cayley(m, cli.cap, execution)?,
        (None, Some(path)) => {
            let value: Value = serde_json::from_str(&read(path)?)?;
            generalized_cayley(&parse_parts(&value)?, cli.cap, execution)?
        }
        (None, None) => unreachable!("clap requires one of the flags"),
    };
    match cli.format {
        Format::Json => emit(&serde_json::to_value(&result)?),
        Format::Text => {
            if !result.report.passed() {
                println!("{}", result.report);
            }
            let counts: Vec<String> = result.counts.iter().map(u64::to_string).collect();
            println!("{}", counts.join(" "));
            println!("formula: {}", result.formula);
        }
    }
    Ok(result.report.passed())
}

fn parse_parts(value: &Value) -> Result<Vec<TreePart>, InputError> {
    let parts = value
        .get("parts")
        .and_then(Value::as_array)
        .ok_or_else(|| InputError("expected {\"parts\": [...]}".into()))?;
    parts
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let size =
                p.get("size").and_then(Value::as_u64).ok_or_else(|| {
                    InputError(format!("parts[{k}].size must be a positive integer"))
                })? as usize;
            match p.get("edges") {
                None => Ok(TreePart::path(size)),
                Some(edges) => {
                    let pairs: Vec<[u64; 2]> = serde_json::from_value(edges.clone())
                        .map_err(|e| InputError(format!("parts[{k}].edges: {e}")))?;
                    if pairs.iter().flatten().any(|&v| v == 0) {
                        return Err(InputError(format!("parts[{k}].edges: labels start at 1")));
                    }
                    Ok(TreePart {
                        size,
                        edges: pairs
                            .iter()
                            .map(|[a, b]| (*a as usize - 1, *b as usize - 1))
                            .collect(),
                    })
                }
            }
        })
        .collect()
}

fn boxh(cli: &Cli, values: [&String; 4]) -> Outcome {
    let [a, b, c, d] = values.map(|s| parse_rational(s));
    let (a, b, c, d) = (a?, b?, c?, d?);
    let result = box_h(&a, &b, &c, &d)?;
    let names = ["A", "B", "C", "D", "E"];
    let equal = result.report.passed();
    match cli.format {
        Format::Json => {
            let mut out = json!({
                "box_response": result.box_response,
                "h_response": result.h_response,
                "responses_equal": equal,
            });
            for (n, v) in names.iter().zip(&result.h_values) {
                out[n] = json!(format_rational(v));
            }
            emit(&out);
        }
        Format::Text => {
            for (n, v) in names.iter().zip(&result.h_values) {
                println!("{n} = {}", format_rational(v));
            }
            if equal {
                println!("responses equal");
            } else {
                println!("{}", result.report);
            }
        }
    }
    Ok(equal)
}
