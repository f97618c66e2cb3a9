//! Experiment specs (TOML) and their result tables (CSV or JSON).

use std::{io::Write, time::Instant};

use hicluster_core::{
    exact::{self, Direction},
    ground_truth::{self, PerturbationSpec, TreeShape, WeightProfile},
    hsbm,
    instances::{self, ExperimentAlgo},
    linkage::{self, LinkageKind},
    CostFunction, Error, Mode, Result, WeightedGraph,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{
    formats::HsbmConfig,
    run::{self, Algo},
};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<Experiment>,
}

/// A seed count `s` (seeds 0..s) or an explicit list.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn list(&self) -> Vec<u64> {
        match self {
            Seeds::Count(c) => (0..*c).collect(),
            Seeds::List(l) => l.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    Random,
    GroundTruth,
    Perturbed,
}

fn default_p() -> f64 {
    0.7
}
fn default_max_weight() -> u32 {
    9
}
fn yes() -> bool {
    true
}
fn one_seed() -> Seeds {
    Seeds::List(vec![0])
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    /// Average linkage on random dissimilarity graphs against n·Σw/2, for
    /// every n in the inclusive range and every seed.
    AvgBound {
        n: [usize; 2],
        seeds: Seeds,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "default_max_weight")]
        max_weight: u32,
    },
    /// A worst-case family against its closed-form reference.
    Ratio {
        family: String,
        algo: String,
        #[serde(default = "yes")]
        adversarial: bool,
        sizes: Vec<usize>,
        #[serde(default = "one_seed")]
        seeds: Seeds,
    },
    /// Any algorithm against `exact_opt` on generated inputs.
    Oracle {
        algo: String,
        input: InputKind,
        mode: String,
        n: [usize; 2],
        seeds: Seeds,
        #[serde(default)]
        epsilon: Option<f64>,
        #[serde(default)]
        delta: Option<f64>,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "default_max_weight")]
        max_weight: u32,
    },
    /// HSBM samples recovered by the spectral pipeline, one row per seed and
    /// a summary row (recovered count, seed count, recovery rate).
    HsbmRecovery {
        hsbm: HsbmConfig,
        seeds: Seeds,
        #[serde(default)]
        repetitions: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub instance: String,
    pub n: usize,
    pub seed: Option<u64>,
    pub algo: String,
    pub objective_value: f64,
    pub oracle_or_bound: f64,
    pub ratio: f64,
    pub ok: Option<bool>,
    pub wall_ms: u64,
}

pub const COLUMNS: [&str; 9] = ["instance", "n", "seed", "algo", "objective_value", "oracle_or_bound", "ratio", "ok", "wall_ms"];

impl BenchSpec {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse { offset: e.span().map_or(0, |r| r.start), msg: e.message().to_string() })
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else {
        a / b
    }
}

struct Timer(Option<Instant>);

impl Timer {
    fn start(on: bool) -> Self {
        Timer(on.then(Instant::now))
    }

    fn ms(&self) -> u64 {
        self.0.map_or(0, |t| t.elapsed().as_millis() as u64)
    }
}

fn grid(n: [usize; 2], seeds: &Seeds) -> Vec<(usize, u64)> {
    let seeds = seeds.list();
    (n[0]..=n[1]).flat_map(|n| seeds.iter().map(move |&s| (n, s))).collect()
}

fn oracle_input(input: InputKind, mode: Mode, n: usize, seed: u64, p: f64, max_weight: u32, delta: Option<f64>) -> Result<WeightedGraph> {
    Ok(match input {
        InputKind::Random => exact::random_graph(n, mode, seed, p, max_weight),
        InputKind::GroundTruth | InputKind::Perturbed => {
            let gt = ground_truth::random_generating_tree(n, TreeShape::UniformSplit, WeightProfile::default(), mode, seed)?;
            let g = ground_truth::realize(&gt)?;
            match input {
                InputKind::Perturbed => ground_truth::perturb(&g, PerturbationSpec { delta: delta.unwrap_or(1.0), seed })?,
                _ => g,
            }
        }
    })
}

fn configured(algo: &str, epsilon: Option<f64>, delta: Option<f64>, seed: u64) -> Result<Algo> {
    let mut a = Algo::named(algo).map_err(Error::InvalidArgument)?;
    match &mut a {
        Algo::DensestLs { epsilon: e } => *e = epsilon.unwrap_or(*e),
        Algo::Robust { delta: d } => *d = delta.unwrap_or(*d),
        Algo::Pivot { seed: s } => *s = seed,
        _ => {}
    }
    Ok(a)
}

fn experiment_algo(algo: &str, adversarial: bool) -> Result<ExperimentAlgo> {
    Ok(match algo {
        "single" => ExperimentAlgo::Linkage { kind: LinkageKind::Single, adversarial },
        "complete" => ExperimentAlgo::Linkage { kind: LinkageKind::Complete, adversarial },
        "average" => ExperimentAlgo::Linkage { kind: LinkageKind::Average, adversarial },
        "bisect2c" => ExperimentAlgo::BisectionTwoCenter,
        "sparsest" => ExperimentAlgo::ExactSparsestCut,
        _ => return Err(Error::InvalidArgument(format!("unknown ratio algorithm {algo:?}"))),
    })
}

/// Runs every experiment; rows come out in spec order whatever the
/// execution order. `wall_ms` is measured only when `timing` is set.
pub fn run_spec(spec: &BenchSpec, timing: bool) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for e in &spec.experiments {
        rows.extend(run_experiment(e, timing)?);
    }
    Ok(rows)
}

pub fn run_experiment(e: &Experiment, timing: bool) -> Result<Vec<Row>> {
    let cf = CostFunction::dasgupta();
    match e {
        Experiment::AvgBound { n, seeds, p, max_weight } => grid(*n, seeds)
            .into_par_iter()
            .map(|(n, seed)| {
                let t = Timer::start(timing);
                let g = exact::random_graph(n, Mode::Dissimilarity, seed, *p, *max_weight);
                let r = linkage::average_linkage_value_bound_check(&g)?;
                Ok(Row {
                    instance: "random-dis".into(),
                    n,
                    seed: Some(seed),
                    algo: "average".into(),
                    objective_value: r.val,
                    oracle_or_bound: r.bound,
                    ratio: ratio(r.val, r.bound),
                    ok: Some(r.ok),
                    wall_ms: t.ms(),
                })
            })
            .collect(),
        Experiment::Ratio { family, algo, adversarial, sizes, seeds } => {
            let a = experiment_algo(algo, *adversarial)?;
            let seeds = seeds.list();
            sizes
                .par_iter()
                .map(|&size| {
                    let t = Timer::start(timing);
                    let out = instances::ratio_experiment(family, a, &[size], &seeds)?;
                    let ms = t.ms();
                    Ok(out
                        .into_iter()
                        .map(|r| Row {
                            instance: r.instance.into(),
                            n: r.n,
                            seed: Some(r.seed),
                            algo: r.algo.into(),
                            objective_value: r.objective,
                            oracle_or_bound: r.reference,
                            ratio: r.ratio,
                            ok: None,
                            wall_ms: ms,
                        })
                        .collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>>>()
                .map(|v| v.into_iter().flatten().collect())
        }
        Experiment::Oracle { algo, input, mode, n, seeds, epsilon, delta, p, max_weight } => {
            let mode = Mode::parse(mode).ok_or_else(|| Error::InvalidArgument(format!("unknown mode {mode:?}")))?;
            let instance = match input {
                InputKind::Random => "random",
                InputKind::GroundTruth => "ground-truth",
                InputKind::Perturbed => "perturbed",
            };
            grid(*n, seeds)
                .into_par_iter()
                .map(|(n, seed)| {
                    let t = Timer::start(timing);
                    let g = oracle_input(*input, mode, n, seed, *p, *max_weight, *delta)?;
                    let a = configured(algo, *epsilon, *delta, seed)?;
                    let tree = run::run(&g, &a)?.tree;
                    let value = cf.evaluate(&g, &tree)?.total;
                    let opt = exact::exact_opt(&cf, &g, Direction::for_mode(mode))?.value;
                    Ok(Row {
                        instance: format!("{instance}-{}", mode.as_str()),
                        n,
                        seed: Some(seed),
                        algo: a.name().into(),
                        objective_value: value,
                        oracle_or_bound: opt,
                        ratio: ratio(value, opt),
                        ok: None,
                        wall_ms: t.ms(),
                    })
                })
                .collect()
        }
        Experiment::HsbmRecovery { hsbm: config, seeds, repetitions } => {
            let seeds = seeds.list();
            let instance = format!("hsbm-k{}", config.k);
            let mut rows = seeds
                .par_iter()
                .map(|&seed| {
                    let t = Timer::start(timing);
                    let params = config.params(seed)?;
                    let s = hsbm::sample(&params)?;
                    let rec = hsbm::recover_tree(&s.graph, params.k, &cf, *repetitions, seed)?;
                    let (_, truth) = hsbm::expected_graph(&params, &s.labels)?;
                    let value = cf.evaluate(&s.graph, &rec.tree)?.total;
                    let reference = cf.evaluate(&s.graph, truth.tree())?.total;
                    Ok(Row {
                        instance: instance.clone(),
                        n: params.n,
                        seed: Some(seed),
                        algo: "recover".into(),
                        objective_value: value,
                        oracle_or_bound: reference,
                        ratio: ratio(value, reference),
                        ok: Some(hsbm::exact_recovery(&rec.clusters, &s.labels)),
                        wall_ms: t.ms(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let hits = rows.iter().filter(|r| r.ok == Some(true)).count() as f64;
            let total = rows.len() as f64;
            let wall_ms = rows.iter().map(|r| r.wall_ms).sum();
            rows.push(Row {
                instance: format!("{instance}-summary"),
                n: config.n,
                seed: None,
                algo: "recover".into(),
                objective_value: hits,
                oracle_or_bound: total,
                ratio: if total > 0.0 { hits / total } else { 0.0 },
                ok: None,
                wall_ms,
            });
            Ok(rows)
        }
    }
}

pub fn write_csv(rows: &[Row], out: impl Write) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

#[derive(Serialize)]
struct Table<'a> {
    schema: u32,
    rows: &'a [Row],
}

pub fn write_json(rows: &[Row], mut out: impl Write) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, &Table { schema: SCHEMA, rows })?;
    writeln!(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(rows: &[Row]) -> String {
        let mut buf = Vec::new();
        write_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_spec_is_header_only() {
        let spec = BenchSpec::from_toml("").unwrap();
        let rows = run_spec(&spec, false).unwrap();
        assert_eq!(csv(&rows), "instance,n,seed,algo,objective_value,oracle_or_bound,ratio,ok,wall_ms\n");
    }

    #[test]
    fn avg_bound_sweep() {
        let spec = BenchSpec::from_toml("[[experiment]]\nkind = \"avg-bound\"\nn = [3, 40]\nseeds = 100\n").unwrap();
        let rows = run_spec(&spec, false).unwrap();
        assert_eq!(rows.len(), 3800);
        assert!(rows.iter().all(|r| r.ok == Some(true)));
        assert_eq!((rows[0].n, rows[0].seed, rows[100].n), (3, Some(0), 4));
        assert_eq!(csv(&rows), csv(&run_spec(&spec, false).unwrap()));
    }

    #[test]
    fn oracle_and_ratio_rows() {
        let spec = BenchSpec::from_toml(
            r#"
[[experiment]]
kind = "oracle"
algo = "pivot"
input = "ground-truth"
mode = "sim"
n = [4, 6]
seeds = [1, 2]

[[experiment]]
kind = "ratio"
family = "path"
algo = "complete"
sizes = [8, 16]
"#,
        )
        .unwrap();
        let rows = run_spec(&spec, false).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows[..6].iter().all(|r| r.ratio == 1.0));
        assert!(rows[7].ratio > rows[6].ratio);
        let mut buf = Vec::new();
        write_json(&rows, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["rows"].as_array().unwrap().len(), 8);
    }

    #[test]
    fn hsbm_summary_row() {
        let spec = BenchSpec::from_toml(
            r#"
[[experiment]]
kind = "hsbm-recovery"
seeds = 2
repetitions = 3
[experiment.hsbm]
k = 2
n = 60
alpha = 1.0
f = [0.5, 0.5]
p = [0.9, 0.9]
top_tree = "(0,1):0.1"
"#,
        )
        .unwrap();
        let rows = run_spec(&spec, false).unwrap();
        assert_eq!(rows.len(), 3);
        let s = &rows[2];
        assert_eq!((s.instance.as_str(), s.seed, s.oracle_or_bound), ("hsbm-k2-summary", None, 2.0));
    }

    #[test]
    fn bad_specs_fail_to_parse() {
        assert!(BenchSpec::from_toml("[[experiment]]\nkind = \"nope\"\n").is_err());
        assert!(BenchSpec::from_toml("[[experiment]]\nkind = \"avg-bound\"\n").is_err());
        assert!(BenchSpec::from_toml("bogus = 1\n").is_err());
    }
}
