//! `sandlab`: sandpile-chain spectra, mixing curves and the verification suite.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Number, Value};

use sandlab::analysis::Profile;
use sandlab::characters::{find_gadgets, DEFAULT_ENUM_BUDGET};
use sandlab::families;
use sandlab::mixing::{
    counting_lower_bound, cutoff_report, exact_evolution, exact_l2_curve, integer_times, monte_carlo_tv,
    sparse_evolution, ChainTime, MixingCurve, DEFAULT_EVOLUTION_BUDGET,
};
use sandlab::sandpile::{GroupModel, VertexDistribution};
use sandlab::spectral::{
    gap_lower_bound, inverse_relationship_check, mixing_bounds, smoothing_continuous, smoothing_discrete,
    BoundInputs,
};
use sandlab::verify::{run_checks, Context, Tolerances};
use sandlab::{Error, Graph};

const SCHEMA: u64 = 1;
const GADGET_LIST_CAP: usize = 20;

const SPEC_HELP: &str = "Graph specs have the form name:params[:sink=label]:
  cycle:n  complete:n  path:n  star:n  torus:m  petersen
  bipartite:m,n  tail:m  sierpinski:k
  regular:n,d,seed  er:n,p,seed
  rooted:base/part/part/...
Examples: complete:6, torus:4, bipartite:2,7:sink=u1";

#[derive(Parser)]
#[command(name = "sandlab", version, about = "Spectral and mixing-time analysis of the abelian sandpile chain", after_help = SPEC_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Group structure, spectral gaps, smoothing parameters and mixing bounds.
    #[command(after_help = SPEC_HELP)]
    Analyze(AnalyzeArgs),
    /// Distance-to-uniform curves and lower-bound reports.
    #[command(after_help = SPEC_HELP)]
    Mix(MixArgs),
    /// Run the theorem checks over the built-in corpus.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GraphSource {
    /// Family spec such as complete:6.
    spec: Option<String>,
    #[arg(long, value_name = "SPEC")]
    family: Option<String>,
    /// JSON file {"n", "edges", "sink"} with 1-based vertices.
    #[arg(long, value_name = "PATH")]
    graph: Option<PathBuf>,
    /// Sink vertex label, overriding the source's sink.
    #[arg(long)]
    sink: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.25)]
    c: f64,
    #[arg(long, default_value_t = DEFAULT_ENUM_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    budget_enum: u64,
    /// Lattice point cap for the discrete smoothing enumeration.
    #[arg(long, default_value_t = 2_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget_lattice: u64,
    /// Largest gadget interior searched.
    #[arg(long, default_value_t = 3)]
    gadget_size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Spectral,
    Evolution,
    Montecarlo,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Chain {
    Discrete,
    Continuous,
}

#[derive(Args)]
struct MixArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, value_enum, default_value_t = Mode::Spectral)]
    mode: Mode,
    /// Time parametrization for spectral curves.
    #[arg(long, value_enum, default_value_t = Chain::Discrete)]
    chain: Chain,
    #[arg(long, default_value_t = 20)]
    tmax: u64,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.25)]
    c: f64,
    /// Cutoff window report on a complete graph.
    #[arg(long, conflicts_with = "lower_bound")]
    cutoff: bool,
    /// Support-counting lower bound rows with exact TV.
    #[arg(long)]
    lower_bound: bool,
    #[arg(long, default_value_t = DEFAULT_ENUM_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    budget_enum: u64,
    #[arg(long, default_value_t = DEFAULT_EVOLUTION_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    budget_evolve: u64,
    /// Support cap for sparse evolution in --lower-bound.
    #[arg(long, default_value_t = 5_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget_support: u64,
    #[arg(long, default_value_t = 20_000, value_parser = clap::value_parser!(u64).range(1..))]
    trajectories: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; the JSON summary then goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only these checks (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    random_graphs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Lib(Error),
    Input(String),
    Checks,
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Lib(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = std::env::var("SANDLAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Mix(m) => mix(m),
        Command::Verify(v) => verify(v),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            print_error("input", &msg, None);
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) if e.is_budget() => {
            let hint = "raise --budget-enum, --budget-evolve or --budget-support, or use --mode montecarlo";
            print_error(e.kind(), &e.to_string(), Some(hint));
            ExitCode::from(3)
        }
        Err(Failure::Lib(e)) => {
            print_error(e.kind(), &e.to_string(), None);
            ExitCode::from(2)
        }
    }
}

fn print_error(kind: &str, message: &str, guidance: Option<&str>) {
    let mut err = json!({ "kind": kind, "message": message });
    if let Some(g) = guidance {
        err["guidance"] = json!(g);
    }
    let v = json!({ "schema": SCHEMA, "error": err });
    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
}

/// Rewrites every float as a 17-significant-digit literal.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => match n.as_f64() {
            Some(x) if x.is_finite() => Value::Number(float(x)),
            _ => Value::Null,
        },
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

fn float(x: f64) -> Number {
    format!("{x:.16e}").parse().expect("valid number literal")
}

fn emit(v: Value, out: Option<&PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(&normalize(v)).expect("json") + "\n";
    write_text(&text, out)
}

fn write_text(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string()))
        }
    }
}

fn load_graph(src: &GraphSource) -> Result<(Graph, String), Failure> {
    let (g, name) = match (&src.spec, &src.family, &src.graph) {
        (Some(s), None, None) | (None, Some(s), None) => (families::from_spec(s)?, s.clone()),
        (None, None, Some(p)) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Input(format!("cannot read {}: {e}", p.display())))?;
            (Graph::from_json(&text)?, p.display().to_string())
        }
        (None, None, None) => return Err(Failure::Input("no graph given: pass a spec, --family or --graph".into())),
        _ => return Err(Failure::Input("give exactly one of a spec, --family or --graph".into())),
    };
    match &src.sink {
        Some(label) => {
            let v = g.vertex_by_label(label)?;
            Ok((g.with_sink(v)?, name))
        }
        None => Ok((g, name)),
    }
}

fn graph_json(g: &Graph, name: &str) -> Value {
    json!({
        "source": name,
        "n": g.n(),
        "edges": g.edges().len(),
        "sink": g.label(g.sink()),
    })
}

fn check_epsilon(eps: f64) -> Result<(), Failure> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Failure::Input(format!("--epsilon must lie in (0, 1), got {eps}")))
    }
}

fn analyze(a: &AnalyzeArgs) -> Result<(), Failure> {
    check_epsilon(a.epsilon)?;
    let (g, name) = load_graph(&a.source)?;
    let profile = Profile::new(&g, a.budget_enum)?;
    let model = &profile.model;
    let degrees = g.degree_stats();
    let mut report = json!({
        "schema": SCHEMA,
        "command": "analyze",
        "graph": graph_json(&g, &name),
        "order": model.order().to_string(),
        "spanning_trees": g.spanning_tree_count().to_string(),
        "invariant_factors": model.moduli(),
        "trivial": model.is_trivial(),
        "degrees": { "min": degrees.min, "second_largest": degrees.star, "max": degrees.max },
        "girth": g.girth(),
    });

    let Some(summary) = profile.summary else {
        let table = mixing_bounds(&BoundInputs {
            n: g.n(),
            order: model.order(),
            degrees,
            summary: None,
            eta_continuous: None,
            eta_discrete: None,
            epsilon: a.epsilon,
            c: a.c,
        });
        report["bounds"] = serde_json::to_value(&table).expect("json");
        return emit(report, a.out.as_ref());
    };

    let witness = |index: u64| {
        let h = profile.table.character(index);
        json!({ "index": index, "modulus": h.modulus(), "residues": h.residues() })
    };
    report["spectrum"] = json!({
        "gamma_d": summary.gamma_d,
        "gamma_c": summary.gamma_c,
        "lambda_star": summary.lambda_star,
        "t_rel": summary.t_rel,
        "eigenvalues": summary.count,
        "witness_d": witness(summary.witness_d),
        "witness_c": witness(summary.witness_c),
    });
    let d_bound = gap_lower_bound(g.n(), degrees.star);
    report["d_star_bound"] = json!({
        "bound": d_bound,
        "gamma_d": summary.gamma_d,
        "holds": summary.gamma_d >= d_bound,
        "source": "second-largest degree gap lower bound",
    });
    let inv = inverse_relationship_check(&summary, &profile.beta()?, &profile.theta()?, degrees, g.n(), 1e-9);
    report["beta1_bound"] = json!({
        "beta1": inv.beta1,
        "discrete": inv.discrete,
        "continuous_unproved": inv.continuous_unproved,
        "degree_sandwich_slack": inv.degree_sandwich_slack,
        "violations": inv.violations,
        "source": "inverse relationship with the algebraic connectivity",
    });

    let (discrete, gadgets) = rayon::join(
        || smoothing_discrete(&g, a.epsilon, a.budget_lattice as usize),
        || find_gadgets(&g, a.gadget_size),
    );
    let continuous = smoothing_continuous(&profile.table, a.epsilon);
    let smoothing_entry = |r: &Result<sandlab::spectral::SmoothingResult, sandlab::spectral::SpectralError>| match r {
        Ok(s) => serde_json::to_value(s).expect("json"),
        Err(e) => json!({ "skipped": e.to_string() }),
    };
    report["smoothing"] = json!({
        "continuous": smoothing_entry(&continuous),
        "discrete": smoothing_entry(&discrete),
    });
    let labels = |vs: &[usize]| vs.iter().map(|&v| g.label(v).to_string()).collect::<Vec<_>>();
    report["gadgets"] = json!({
        "max_interior": a.gadget_size,
        "found": gadgets.len(),
        "listed": gadgets.iter().take(GADGET_LIST_CAP).map(|f| json!({
            "interior": labels(&f.interior),
            "vertices": labels(&f.vertices),
            "phases": f.phases.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });

    let table = mixing_bounds(&BoundInputs {
        n: g.n(),
        order: model.order(),
        degrees,
        summary: Some(&summary),
        eta_continuous: continuous.as_ref().ok().map(|s| s.eta),
        eta_discrete: discrete.as_ref().ok().map(|s| s.eta),
        epsilon: a.epsilon,
        c: a.c,
    });
    report["bounds"] = serde_json::to_value(&table).expect("json");
    emit(report, a.out.as_ref())
}

fn opt_time(t: Option<f64>) -> Value {
    t.map_or(Value::Null, |x| json!(x as u64))
}

fn mix(m: &MixArgs) -> Result<(), Failure> {
    check_epsilon(m.epsilon)?;
    let (g, name) = load_graph(&m.source)?;
    if m.cutoff {
        return mix_cutoff(m, &g, &name);
    }
    if m.lower_bound {
        return mix_lower_bound(m, &g, &name);
    }
    let mu = VertexDistribution::uniform(g.n());
    let mut summary = json!({
        "schema": SCHEMA,
        "command": "mix",
        "graph": graph_json(&g, &name),
        "tmax": m.tmax,
        "epsilon": m.epsilon,
    });
    let curve: MixingCurve = match m.mode {
        Mode::Spectral => {
            let p = Profile::new(&g, m.budget_enum)?;
            let chain = match m.chain {
                Chain::Discrete => ChainTime::Discrete,
                Chain::Continuous => ChainTime::Continuous,
            };
            let curve = exact_l2_curve(&p.eigs, p.model.order(), &integer_times(m.tmax), chain)?;
            summary["order"] = json!(p.model.order().to_string());
            summary["t_l2"] = opt_time(curve.t_l2(m.epsilon));
            curve
        }
        Mode::Evolution => {
            let model = GroupModel::new(&g)?;
            let ev = exact_evolution(&model, m.tmax, &mu, m.budget_evolve)?;
            summary["order"] = json!(model.order().to_string());
            summary["t_mix_quarter"] = opt_time(ev.curve.t_mix(0.25));
            summary["t_mix"] = opt_time(ev.curve.t_mix(m.epsilon));
            summary["t_l2"] = opt_time(ev.curve.t_l2(m.epsilon));
            ev.curve
        }
        Mode::Montecarlo => {
            let model = GroupModel::new(&g)?;
            let grid: Vec<u64> = (0..=m.tmax).collect();
            let rep = monte_carlo_tv(&model, &mu, m.trajectories as usize, &grid, m.seed)?;
            summary["order"] = json!(model.order().to_string());
            summary["trajectories"] = json!(rep.trajectories);
            summary["seed"] = json!(m.seed);
            summary["noise_floor"] = json!(rep.noise_floor);
            summary["bias_warning"] = json!(rep.bias_warning);
            rep.curve
        }
    };
    summary["mode"] = json!(curve.mode.as_str());
    summary["chain"] = json!(curve.chain);
    let csv = curve.to_csv();
    match &m.out {
        Some(p) => {
            write_text(&csv, Some(p))?;
            summary["csv"] = json!(p.display().to_string());
            emit(summary, None)
        }
        None => {
            write_text(&csv, None)?;
            let text = serde_json::to_string_pretty(&normalize(summary)).expect("json");
            eprintln!("{text}");
            Ok(())
        }
    }
}

fn mix_cutoff(m: &MixArgs, g: &Graph, name: &str) -> Result<(), Failure> {
    let n = g.n();
    if g.edges().len() != n * (n - 1) / 2 {
        return Err(Failure::Input("--cutoff needs a complete graph".into()));
    }
    let exact = GroupModel::new(g)?.size().is_some_and(|s| s <= m.budget_evolve);
    let rep = cutoff_report(n, m.c, exact)?;
    let v = json!({
        "schema": SCHEMA,
        "command": "mix",
        "graph": graph_json(g, name),
        "cutoff": rep,
        "exact": exact,
        "source": "complete graph cutoff theorem",
    });
    emit(v, m.out.as_ref())
}

fn mix_lower_bound(m: &MixArgs, g: &Graph, name: &str) -> Result<(), Failure> {
    let model = GroupModel::new(g)?;
    let n = g.n();
    let mu = VertexDistribution::uniform(n);
    let probe = counting_lower_bound(n, model.order(), m.epsilon, None);
    let t_max = probe.t_bound.max(0.0).floor() as u64;
    let (ev, method) = if model.size().is_some_and(|s| s <= m.budget_evolve) {
        (exact_evolution(&model, t_max, &mu, m.budget_evolve)?, "dense")
    } else {
        (sparse_evolution(&model, t_max, &mu, m.budget_support as usize)?, "sparse")
    };
    let tv: Vec<f64> = ev.curve.tv.iter().map(|x| x.unwrap_or(f64::NAN)).collect();
    let rep = counting_lower_bound(n, model.order(), m.epsilon, Some(&tv));
    let v = json!({
        "schema": SCHEMA,
        "command": "mix",
        "graph": graph_json(g, name),
        "lower_bound": rep,
        "evolution": method,
        "source": "support-counting lower bound lemma",
    });
    emit(v, m.out.as_ref())
}

fn verify(v: &VerifyArgs) -> Result<(), Failure> {
    let ctx = Context::new(v.seed, v.random_graphs, Tolerances::default())?;
    let report = run_checks(&ctx, &v.only, |r| eprintln!("{}", r.line())).map_err(Failure::Input)?;
    let passed = report.passed;
    let mut value = serde_json::to_value(&report).expect("json");
    value["schema"] = json!(SCHEMA);
    value["command"] = json!("verify");
    emit(value, v.out.as_ref())?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}
