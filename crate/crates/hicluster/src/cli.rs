//! `hicluster` command line: gen, perturb, cluster, eval, opt, check, bench.

use std::{
    ffi::OsString,
    fs,
    io::{self, Write},
    path::{Path, PathBuf},
    process::ExitCode,
    time::Instant,
};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use hicluster_core::{
    exact::{self, Direction},
    ground_truth::{self, Generating, PerturbationSpec, TreeShape, WeightProfile},
    hsbm,
    instances::{self, Family},
    linkage::{LinkageKind, TieBreak},
    objective::{self, Condition},
    ClusterTree, CostFunction, Mode, WeightedGraph,
};
use serde_json::json;

use crate::{
    bench::{self, BenchSpec},
    formats::{self, HsbmConfig},
    run::{self, Algo, FinderSpec},
    CliError, CliResult,
};

/// Environment variable raising the exact-oracle size guard.
pub const MAX_N_VAR: &str = "HICLUSTER_MAX_N";

#[derive(Debug, Parser)]
#[command(name = "hicluster", version, about = "Hierarchical clustering objectives, algorithms and exact oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate graphs, generating trees, HSBM samples or tie scripts.
    #[command(subcommand)]
    Gen(Gen),
    /// Multiply every weight by an independent factor in [1, δ].
    Perturb {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Build a tree with one of the clustering algorithms.
    Cluster(ClusterArgs),
    /// Objective value of a tree.
    Eval {
        #[arg(long)]
        input: PathBuf,
        /// Tree file, or the tree text itself.
        #[arg(long)]
        tree: String,
        #[arg(long, default_value = "dasgupta")]
        objective: String,
        #[arg(long)]
        per_node: bool,
    },
    /// Exact optimum by subset dynamic programming.
    Opt {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "dasgupta")]
        objective: String,
    },
    /// Generating-tree, ultrametric or admissibility verdicts.
    Check(CheckArgs),
    /// Run an experiment spec and print its table.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Measure wall_ms (otherwise 0, keeping output reproducible).
        #[arg(long)]
        timing: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Shape {
    Uniform,
    Balanced,
    Caterpillar,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyName {
    Path,
    Spine,
    Star,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Merge {
    Max,
    Min,
}

#[derive(Debug, Subcommand)]
enum Gen {
    /// Unit path on n vertices.
    Path {
        #[arg(long)]
        n: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Spine of k vertices carrying k paths of k vertices each.
    Spine {
        #[arg(long)]
        k: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Unit dissimilarity star with one heavy pair (W defaults to n³).
    Star {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        heavy: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Random integer-weight graph.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "sim")]
        mode: String,
        #[arg(long, default_value_t = 0.7)]
        p: f64,
        #[arg(long, default_value_t = 9)]
        max_weight: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Random generating tree; `--graph` also writes the realized graph.
    Ultrametric {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum, default_value_t = Shape::Uniform)]
        shape: Shape,
        #[arg(long, default_value = "sim")]
        mode: String,
        #[arg(long, default_value_t = 2)]
        max_step: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// HSBM sample: the graph at OUT, hidden labels at OUT.labels.
    Hsbm {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Adversarial tie script of a worst-case family.
    Script {
        #[arg(long, value_enum)]
        family: FamilyName,
        /// n for paths and stars, k for spines.
        #[arg(long)]
        size: usize,
        #[arg(long)]
        algo: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long)]
    input: PathBuf,
    /// single, complete, average, sparsest, densest-ls, bisect2c, pivot, robust
    #[arg(long)]
    algo: String,
    /// Reinterpret the graph as similarity or dissimilarity.
    #[arg(long)]
    mode: Option<String>,
    /// Linkage merge direction (defaults to max for sim, min for dis).
    #[arg(long, value_enum)]
    merge: Option<Merge>,
    /// lowest, priority:<seed> or script:<file>
    #[arg(long, default_value = "lowest")]
    ties: String,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// brute, gt-fast or plugin:<command>
    #[arg(long, default_value = "brute")]
    cutfinder: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "dasgupta")]
    objective: String,
    /// Print a JSON stats line.
    #[arg(long)]
    stats: bool,
    #[arg(long)]
    per_node: bool,
    /// Print the merge trace as JSON lines.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    timing: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("verdict").required(true).args(["generating", "admissible", "ultrametric"])))]
struct CheckArgs {
    /// Is TREE a generating tree of the graph?
    #[arg(long)]
    generating: bool,
    /// Is the objective admissible (up to --n-max)?
    #[arg(long)]
    admissible: bool,
    /// Is the graph generated by an ultrametric?
    #[arg(long)]
    ultrametric: bool,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    tree: Option<String>,
    #[arg(long, default_value = "dasgupta")]
    objective: String,
    #[arg(long, default_value_t = 8)]
    n_max: usize,
}

/// Process entry point: parses `std::env::args`, prints errors to stderr.
pub fn main() -> ExitCode {
    let stdout = io::stdout();
    let code = run_with(std::env::args_os(), &mut stdout.lock());
    ExitCode::from(code)
}

/// Runs one invocation against `out` and returns the exit code.
pub fn run_with(args: impl IntoIterator<Item = OsString>, out: &mut dyn Write) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write_file(path: &Path, text: &str, out: &mut dyn Write) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })?;
    say(out, format!("{} sha256:{}", path.display(), formats::content_hash(text.as_bytes())))
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) -> CliResult<()> {
    writeln!(out, "{}", line.as_ref()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

/// Writes to `path` (printing its hash) or prints the text itself.
fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text, out),
        None => out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    s.into()
}

fn mode_arg(s: &str) -> CliResult<Mode> {
    Mode::parse(s).ok_or_else(|| CliError::usage(format!("mode must be `sim` or `dis`, got {s:?}")))
}

fn load_graph(path: &Path) -> CliResult<WeightedGraph> {
    Ok(formats::read_graph(&read(path)?)?)
}

/// A tree file (plain or generating-tree format) or literal tree text.
fn load_tree(arg: &str) -> CliResult<ClusterTree> {
    let p = Path::new(arg);
    let text = if p.is_file() { read(p)? } else { arg.to_string() };
    if text.trim_start().starts_with(formats::GENTREE_MAGIC) {
        return Ok(formats::read_gentree(&text)?.tree().clone());
    }
    let (tree, _) = ClusterTree::parse_annotated(text.trim())?;
    Ok(tree)
}

fn load_objective(spec: &str) -> CliResult<CostFunction> {
    if spec == "dasgupta" {
        return Ok(CostFunction::dasgupta());
    }
    match spec.strip_prefix("file:") {
        Some(path) => Ok(formats::read_cost_function(&read(Path::new(path))?, path)?),
        None => Err(CliError::usage(format!("objective must be `dasgupta` or `file:<path>`, got {spec:?}"))),
    }
}

/// Exact-oracle size limit: the built-in default unless overridden by the
/// environment.
fn oracle_limit() -> CliResult<usize> {
    match std::env::var(MAX_N_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::usage(format!("{MAX_N_VAR} must be an integer, got {v:?}"))),
        Err(_) => Ok(exact::DEFAULT_OPT_LIMIT),
    }
}

fn optimum(cf: &CostFunction, g: &WeightedGraph) -> CliResult<exact::OptResult> {
    Ok(exact::exact_opt_with(cf, g, Direction::for_mode(g.mode()), oracle_limit()?, false)?)
}

/// `priority:<seed>` ranks the `n` vertices by a seeded permutation.
fn parse_ties(s: &str, n: usize) -> CliResult<TieBreak> {
    if s == "lowest" {
        return Ok(TieBreak::LowestIndex);
    }
    if let Some(seed) = s.strip_prefix("priority:") {
        let seed: u64 = seed.parse().map_err(|_| CliError::usage(format!("bad priority seed {seed:?}")))?;
        return Ok(TieBreak::Priority(seeded_ranks(n, seed)));
    }
    if let Some(path) = s.strip_prefix("script:") {
        return Ok(TieBreak::Script(formats::read_ties(&read(Path::new(path))?)?));
    }
    Err(CliError::usage(format!("ties must be lowest, priority:<seed> or script:<file>, got {s:?}")))
}

fn seeded_ranks(n: usize, seed: u64) -> Vec<usize> {
    let order = exact::random_tree(n, seed).leaves();
    let mut ranks = vec![0; n];
    for (r, v) in order.into_iter().enumerate() {
        ranks[v] = r;
    }
    ranks
}

type NodeCosts = Vec<(Vec<usize>, f64)>;

fn per_node_lines(cf: &CostFunction, g: &WeightedGraph, t: &ClusterTree) -> CliResult<(f64, NodeCosts)> {
    let report = cf.evaluate(g, t)?;
    let sets = t.leaf_sets();
    let rows = report
        .per_node
        .iter()
        .map(|(&id, &c)| {
            let mut s = sets[id].clone();
            s.sort_unstable();
            (s, c)
        })
        .collect();
    Ok((report.total, rows))
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Gen(g) => gen(g, out),
        Command::Perturb { input, delta, seed, out: path } => {
            let g = load_graph(&input)?;
            let p = ground_truth::perturb(&g, PerturbationSpec { delta, seed })?;
            emit(path.as_deref(), &formats::write_graph(&p), out)
        }
        Command::Cluster(a) => cluster(a, out),
        Command::Eval { input, tree, objective, per_node } => {
            let g = load_graph(&input)?;
            let t = load_tree(&tree)?;
            let cf = load_objective(&objective)?;
            let (total, rows) = per_node_lines(&cf, &g, &t)?;
            say(out, format!("value {total}"))?;
            if per_node {
                for (set, c) in rows {
                    say(out, format!("node {c} {{{}}}", join(&set)))?;
                }
            }
            Ok(())
        }
        Command::Opt { input, objective } => {
            let g = load_graph(&input)?;
            let cf = load_objective(&objective)?;
            let r = optimum(&cf, &g)?;
            say(out, format!("value {}", r.value))?;
            say(out, r.tree.to_string())
        }
        Command::Check(a) => check(a, out),
        Command::Bench { spec, format, timing, out: path } => {
            let spec = BenchSpec::from_toml(&read(&spec)?)?;
            let rows = bench::run_spec(&spec, timing)?;
            let mut buf = Vec::new();
            match format {
                Format::Csv => bench::write_csv(&rows, &mut buf),
                Format::Json => bench::write_json(&rows, &mut buf),
            }
            .map_err(|source| CliError::Io { path: "<bench output>".into(), source })?;
            emit(path.as_deref(), &String::from_utf8(buf).expect("utf-8 table"), out)
        }
    }
}

fn gen(cmd: Gen, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Gen::Path { n, out: path } => emit(path.as_deref(), &formats::write_graph(&instances::make_path(n)?), out),
        Gen::Spine { k, out: path } => emit(path.as_deref(), &formats::write_graph(&instances::make_spine(k)?), out),
        Gen::Star { n, heavy, out: path } => {
            let w = heavy.unwrap_or((n * n * n) as f64);
            emit(path.as_deref(), &formats::write_graph(&instances::make_star(n, w)?), out)
        }
        Gen::Random { n, mode, p, max_weight, seed, out: path } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::usage("--p must lie in [0, 1]"));
            }
            let g = exact::random_graph(n, mode_arg(&mode)?, seed, p, max_weight);
            emit(path.as_deref(), &formats::write_graph(&g), out)
        }
        Gen::Ultrametric { n, strict, shape, mode, max_step, seed, out: path, graph } => {
            let shape = match shape {
                Shape::Uniform => TreeShape::UniformSplit,
                Shape::Balanced => TreeShape::Balanced,
                Shape::Caterpillar => TreeShape::Caterpillar,
            };
            let gt = ground_truth::random_generating_tree(n, shape, WeightProfile { max_step, strict }, mode_arg(&mode)?, seed)?;
            emit(path.as_deref(), &formats::write_gentree(&gt), out)?;
            if let Some(gp) = graph {
                write_file(&gp, &formats::write_graph(&ground_truth::realize(&gt)?), out)?;
            }
            Ok(())
        }
        Gen::Hsbm { config, seed, out: path } => {
            let cfg = HsbmConfig::from_toml(&read(&config)?)?;
            let params = cfg.params(seed)?;
            let s = hsbm::sample(&params)?;
            write_file(&path, &formats::write_graph(&s.graph), out)?;
            write_file(&sidecar(&path, "labels"), &formats::write_labels(&s.labels, params.k), out)
        }
        Gen::Script { family, size, algo, out: path } => {
            let fam = Family::sized(
                match family {
                    FamilyName::Path => "path",
                    FamilyName::Spine => "spine",
                    FamilyName::Star => "star",
                },
                size,
            )?;
            let kind = match algo.as_str() {
                "single" => LinkageKind::Single,
                "complete" => LinkageKind::Complete,
                "average" => LinkageKind::Average,
                _ => return Err(CliError::usage(format!("scripts exist for linkage algorithms only, got {algo:?}"))),
            };
            let script = match fam.adversarial_policy(kind)?.map(|p| p.tie_break) {
                Some(TieBreak::Script(s)) => s,
                Some(_) => Vec::new(),
                None => return Err(CliError::usage(format!("no adversarial schedule for {algo} on {}", fam.name()))),
            };
            emit(path.as_deref(), &formats::write_ties(&script), out)
        }
    }
}

fn cluster(a: ClusterArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut g = load_graph(&a.input)?;
    if let Some(m) = &a.mode {
        g = g.with_mode(mode_arg(m)?);
    }
    let cf = load_objective(&a.objective)?;
    let algo = match a.algo.as_str() {
        "single" | "complete" | "average" => {
            let kind = match a.algo.as_str() {
                "single" => LinkageKind::Single,
                "complete" => LinkageKind::Complete,
                _ => LinkageKind::Average,
            };
            let ties = parse_ties(&a.ties, g.n())?;
            let merge = a.merge.map(|m| match m {
                Merge::Max => Mode::Similarity,
                Merge::Min => Mode::Dissimilarity,
            });
            Algo::Linkage { kind, merge, ties }
        }
        "sparsest" => Algo::Sparsest { finder: a.cutfinder.parse::<FinderSpec>().map_err(CliError::Usage)? },
        "densest-ls" => Algo::DensestLs { epsilon: a.epsilon },
        "bisect2c" => Algo::Bisect2c,
        "pivot" => Algo::Pivot { seed: a.seed },
        "robust" => Algo::Robust { delta: a.delta },
        other => return Err(CliError::usage(format!("unknown algorithm {other:?}"))),
    };
    let start = a.timing.then(Instant::now);
    let result = run::run(&g, &algo)?;
    let wall_ms = start.map_or(0, |t| t.elapsed().as_millis() as u64);
    let (total, nodes) = per_node_lines(&cf, &g, &result.tree)?;
    let text = format!("{}\n", result.tree);
    emit(a.out.as_deref(), &text, out)?;
    say(out, format!("value {total}"))?;
    if a.per_node {
        for (set, c) in &nodes {
            say(out, format!("node {c} {{{}}}", join(set)))?;
        }
    }
    if a.stats {
        let mut stats = json!({
            "schema": bench::SCHEMA,
            "algo": algo.name(),
            "n": g.n(),
            "mode": g.mode().as_str(),
            "objective": cf.name(),
            "value": total,
            "iterations": result.iterations,
            "wall_ms": wall_ms,
        });
        if a.per_node {
            stats["per_node"] = nodes.iter().map(|(s, c)| json!({ "cluster": s, "cost": c })).collect();
        }
        say(out, stats.to_string())?;
    }
    if a.trace {
        if let Some(trace) = &result.trace {
            for (i, s) in trace.steps.iter().enumerate() {
                say(out, json!({ "step": i, "a": s.a, "b": s.b, "value": s.value }).to_string())?;
            }
        }
    }
    Ok(())
}

fn check(a: CheckArgs, out: &mut dyn Write) -> CliResult<()> {
    let need_input = || a.input.as_deref().ok_or_else(|| CliError::usage("--input is required"));
    if a.admissible {
        let cf = load_objective(&a.objective)?;
        let r = objective::check_admissibility(&cf, a.n_max)?;
        for (name, c) in [("clique-invariant", &r.clique_invariant), ("symmetric", &r.symmetric), ("increasing", &r.increasing)] {
            match c {
                Condition::Pass => say(out, format!("{name} pass"))?,
                Condition::Fail(w) => say(out, format!("{name} fail {}", admissibility_witness(w)))?,
            }
        }
        return say(out, if r.all_passed() { "admissible yes" } else { "admissible no" });
    }
    let g = load_graph(need_input()?)?;
    if a.ultrametric {
        return match ground_truth::ultrametric_violation(&g) {
            None => say(out, "yes"),
            Some((x, y, z)) => {
                say(out, "no")?;
                say(out, format!("witness triple {x} {y} {z}: w({x},{y}) = {} below min(w({x},{z}) = {}, w({y},{z}) = {})", g.weight(x, y), g.weight(x, z), g.weight(y, z)))
            }
        };
    }
    let tree = a.tree.as_deref().ok_or_else(|| CliError::usage("--generating needs --tree"))?;
    let t = load_tree(tree)?;
    match ground_truth::is_generating(&t, &g)? {
        Generating::Yes(gt) => {
            say(out, "yes")?;
            say(out, gt.to_text())
        }
        Generating::No(w) => {
            say(out, "no")?;
            say(out, generating_witness(&t, &w))
        }
    }
}

fn generating_witness(t: &ClusterTree, w: &ground_truth::Witness) -> String {
    let sets = t.leaf_sets();
    let cluster = |id: usize| {
        let mut s = sets[id].clone();
        s.sort_unstable();
        format!("{{{}}}", join(&s))
    };
    match *w {
        ground_truth::Witness::NonUniform { node, first: (a, b, wa), second: (c, d, wc) } => {
            format!("witness node {}: w({a},{b}) = {wa} but w({c},{d}) = {wc}", cluster(node))
        }
        ground_truth::Witness::NotMonotone { parent, child, parent_weight, child_weight } => format!(
            "witness node {} weight {parent_weight} vs child {} weight {child_weight}",
            cluster(parent),
            cluster(child)
        ),
    }
}

fn admissibility_witness(w: &objective::Witness) -> String {
    match w {
        objective::Witness::CliqueCost { n, cheap, cheap_cost, dear, dear_cost } => {
            format!("K{n}: {cheap} costs {cheap_cost}, {dear} costs {dear_cost}")
        }
        objective::Witness::Asymmetric { n1, n2, g12, g21 } => format!("g({n1},{n2}) = {g12} but g({n2},{n1}) = {g21}"),
        objective::Witness::NotIncreasing { n1, n2 } => format!("g not increasing at ({n1},{n2})"),
    }
}
