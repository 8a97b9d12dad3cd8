//! `ndopt`: train, evaluate, and benchmark linear classifiers under
//! non-decomposable performance measures, plus the numeric verification
//! suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 data
//! error. All randomness flows from one seed, resolved in order: `--seed`
//! flag, `seed=` config entry, `NDOPT_SEED` env var, default 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use ndopt_core::baselines::{plugin_curve, sgd_logistic, SgdConfig};
use ndopt_core::data::{
    load_libsvm, split_stratified, synth_gaussian, DatasetMeta, Sample, SynthConfig,
};
use ndopt_core::eval::{rates_at, trace_to_csv, TraceRecord};
use ndopt_core::measure::{MeasureKind, MeasureSpec};
use ndopt_core::model::LinearModel;
use ndopt_core::oracle::{verify_contraction, verify_fenchel, verify_lemma1, verify_noise};
use ndopt_core::reward::RewardKind;
use ndopt_core::spade::{spade_run, SpadeConfig};
use ndopt_core::stamp::{am_train, stamp_run, AmTrainConfig, Schedule, StampConfig};
use ndopt_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "ndopt", version, about = "Streaming optimization of non-decomposable measures")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a solver; writes a model file and a trace CSV.
    Train(TrainArgs),
    /// Evaluate a saved model on a dataset; prints JSON {P, N, value}.
    Evaluate(EvalArgs),
    /// Solver vs baselines on one task; writes a combined time-vs-metric CSV.
    Bench(BenchArgs),
    /// Numeric verification suites; exit code 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct DataOpts {
    /// LIBSVM data file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Synthetic Gaussian task: comma-separated n=,dim=,p=,sep= entries.
    #[arg(long)]
    synth: Option<String>,
    /// Stratified split fractions train,tune,test (e.g. 0.7,0.1,0.2).
    #[arg(long)]
    split: Option<String>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// key=value config file; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SolverOpts {
    /// Solver: spade | stamp | am | sgd | plugin.
    #[arg(long)]
    solver: Option<String>,
    /// Measure token: min | hmean | qmean | gmean | fbeta:<b> | jaccard | gl:<s>.
    #[arg(long)]
    measure: Option<String>,
    /// Passes over the training data.
    #[arg(long)]
    passes: Option<usize>,
    /// Weight-ball radius R_W.
    #[arg(long)]
    rw: Option<f64>,
    /// Step-size multiplier (primal step for spade, model stage for stamp/sgd).
    #[arg(long = "step-scale")]
    step_scale: Option<f64>,
    /// Dual step-size multiplier (spade only).
    #[arg(long = "dual-scale")]
    dual_scale: Option<f64>,
    /// Initial epoch length for stamp's doubling schedule.
    #[arg(long)]
    epoch0: Option<usize>,
    /// Epoch schedule: doubling | theoretical:<eta>,<c>.
    #[arg(long)]
    schedule: Option<String>,
    /// Reward-range bound m for pseudo-linear measures.
    #[arg(long)]
    m: Option<f64>,
    /// Reward function: truncated | zeroone.
    #[arg(long)]
    reward: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataOpts,
    #[command(flatten)]
    solver: SolverOpts,
    /// Model output path.
    #[arg(long = "out-model")]
    out_model: Option<PathBuf>,
    /// Trace CSV output path.
    #[arg(long = "out-trace")]
    out_trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataOpts,
    /// Saved model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Measure token.
    #[arg(long)]
    measure: Option<String>,
    /// Reward-range bound m for pseudo-linear measures.
    #[arg(long)]
    m: Option<f64>,
    /// Decision threshold (default 0).
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataOpts,
    #[command(flatten)]
    solver: SolverOpts,
    /// Combined CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite: fenchel | lemma1 | contraction | noise | all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Rate-grid resolution per axis (fenchel, lemma1).
    #[arg(long)]
    grid: Option<usize>,
    /// Random classifier sets (contraction).
    #[arg(long)]
    sets: Option<usize>,
    /// Random noise sequences (noise).
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// A failure with its process exit code (2 usage, 3 data).
struct Fail {
    code: u8,
    msg: String,
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Fail> {
    Err(Fail { code: 2, msg: msg.into() })
}

impl From<CoreError> for Fail {
    fn from(e: CoreError) -> Fail {
        let code = match &e {
            CoreError::Parse { .. }
            | CoreError::EmptyData(_)
            | CoreError::SingleClass(_)
            | CoreError::EmptyStream
            | CoreError::Io(_) => 3,
            _ => 2,
        };
        Fail { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Fail {
        Fail { code: 3, msg: e.to_string() }
    }
}

// ---------------------------------------------------------------------------
// Config file and option resolution.

struct FileCfg(BTreeMap<String, String>);

impl FileCfg {
    fn load(path: Option<&Path>) -> Result<Self, Fail> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Fail { code: 3, msg: format!("config {}: {e}", path.display()) })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return usage(format!(
                        "config {}:{}: expected key=value, got {line:?}",
                        path.display(),
                        lineno + 1
                    ));
                };
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(FileCfg(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Fail> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(_) => usage(format!("config entry {key}={raw}: cannot parse")),
            },
        }
    }
}

/// flag > config entry > (seed only) NDOPT_SEED env > default.
fn resolve<T: FromStr>(flag: Option<T>, file: &FileCfg, key: &str) -> Result<Option<T>, Fail> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

fn resolve_seed(flag: Option<u64>, file: &FileCfg) -> Result<u64, Fail> {
    if let Some(s) = resolve(flag, file, "seed")? {
        return Ok(s);
    }
    match std::env::var("NDOPT_SEED") {
        Ok(raw) => raw
            .parse()
            .map_err(|_| Fail { code: 2, msg: format!("NDOPT_SEED={raw}: cannot parse") }),
        Err(_) => Ok(0),
    }
}

fn parse_synth(desc: &str, seed: u64) -> Result<SynthConfig, Fail> {
    let mut cfg = SynthConfig { seed, ..Default::default() };
    for part in desc.split(',').filter(|p| !p.is_empty()) {
        let Some((k, v)) = part.split_once('=') else {
            return usage(format!("--synth entry {part:?}: expected key=value"));
        };
        let fail = |k: &str, v: &str| Fail {
            code: 2,
            msg: format!("--synth {k}={v}: cannot parse"),
        };
        match k {
            "n" => cfg.n = v.parse().map_err(|_| fail(k, v))?,
            "dim" => cfg.dim = v.parse().map_err(|_| fail(k, v))?,
            "p" => cfg.p = v.parse().map_err(|_| fail(k, v))?,
            "sep" => cfg.separation = v.parse().map_err(|_| fail(k, v))?,
            _ => return usage(format!("--synth key {k:?}: expected n, dim, p, or sep")),
        }
    }
    Ok(cfg)
}

fn parse_split(desc: &str) -> Result<(f64, f64, f64), Fail> {
    let parts: Vec<&str> = desc.split(',').collect();
    if parts.len() != 3 {
        return usage(format!("--split {desc:?}: expected three comma-separated fractions"));
    }
    let mut f = [0.0; 3];
    for (slot, raw) in f.iter_mut().zip(&parts) {
        *slot = raw
            .parse()
            .map_err(|_| Fail { code: 2, msg: format!("--split fraction {raw:?}: cannot parse") })?;
    }
    Ok((f[0], f[1], f[2]))
}

struct Splits {
    train: Vec<Sample>,
    tune: Vec<Sample>,
    test: Vec<Sample>,
}

fn load_dataset(opts: &DataOpts, file: &FileCfg, seed: u64) -> Result<Splits, Fail> {
    let data: Option<PathBuf> = resolve(opts.data.clone(), file, "data")?;
    let synth: Option<String> = resolve(opts.synth.clone(), file, "synth")?;
    let all = match (data, synth) {
        (Some(_), Some(_)) => return usage("pass either --data or --synth, not both"),
        (Some(path), None) => load_libsvm(&path)?,
        (None, Some(desc)) => synth_gaussian(&parse_synth(&desc, seed)?)?,
        (None, None) => return usage("one of --data or --synth is required"),
    };
    match resolve(opts.split.clone(), file, "split")? {
        Some(desc) => {
            let (train, tune, test) = split_stratified(&all, parse_split(&desc)?, seed)?;
            Ok(Splits { train, tune, test })
        }
        None => Ok(Splits { train: all, tune: Vec::new(), test: Vec::new() }),
    }
}

fn parse_reward(tok: &str) -> Result<RewardKind, Fail> {
    match tok {
        "truncated" => Ok(RewardKind::TruncatedLinear),
        "zeroone" => Ok(RewardKind::ZeroOne),
        other => usage(format!("unknown reward {other:?}; expected truncated or zeroone")),
    }
}

/// Solver knobs after merging flags, config entries, and defaults.
struct Knobs {
    solver: String,
    kind: MeasureKind,
    passes: usize,
    r_w: f64,
    step_scale: f64,
    dual_scale: f64,
    m: f64,
    reward: RewardKind,
    schedule: Schedule,
}

fn resolve_knobs(opts: &SolverOpts, file: &FileCfg) -> Result<Knobs, Fail> {
    let solver = match resolve(opts.solver.clone(), file, "solver")? {
        Some(s) => s,
        None => return usage("--solver is required (spade | stamp | am | sgd | plugin)"),
    };
    let token: String = match resolve(opts.measure.clone(), file, "measure")? {
        Some(t) => t,
        None => return usage("--measure is required"),
    };
    let kind = MeasureKind::from_str(&token).map_err(Fail::from)?;
    let epoch0 = resolve(opts.epoch0, file, "epoch0")?.unwrap_or(100);
    let schedule = match resolve(opts.schedule.clone(), file, "schedule")?.as_deref() {
        None | Some("doubling") => Schedule::Doubling { initial: epoch0 },
        Some(desc) => match desc.strip_prefix("theoretical:").map(parse_eta_c) {
            Some(Ok((eta, c))) => Schedule::Theoretical { eta, c },
            Some(Err(f)) => return Err(f),
            None => {
                return usage(format!(
                    "unknown schedule {desc:?}; expected doubling or theoretical:<eta>,<c>"
                ))
            }
        },
    };
    let reward = match resolve(opts.reward.clone(), file, "reward")? {
        Some(tok) => parse_reward(&tok)?,
        None => RewardKind::TruncatedLinear,
    };
    Ok(Knobs {
        solver,
        kind,
        passes: resolve(opts.passes, file, "passes")?.unwrap_or(25),
        r_w: resolve(opts.rw, file, "rw")?.unwrap_or(100.0),
        step_scale: resolve(opts.step_scale, file, "step-scale")?.unwrap_or(1.0),
        dual_scale: resolve(opts.dual_scale, file, "dual-scale")?.unwrap_or(1.0),
        m: resolve(opts.m, file, "m")?.unwrap_or(1.0),
        reward,
        schedule,
    })
}

fn parse_eta_c(desc: &str) -> Result<(f64, f64), Fail> {
    let Some((eta, c)) = desc.split_once(',') else {
        return usage(format!("theoretical schedule {desc:?}: expected <eta>,<c>"));
    };
    let parse = |raw: &str| {
        raw.parse::<f64>()
            .map_err(|_| Fail { code: 2, msg: format!("schedule number {raw:?}: cannot parse") })
    };
    Ok((parse(eta)?, parse(c)?))
}

// ---------------------------------------------------------------------------
// JSON emission (flat objects of preformatted values).

fn json_line(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("{");
    for (i, (k, v)) in pairs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "\"{k}\":{v}");
    }
    out.push('}');
    out
}

fn json_str(s: impl AsRef<str>) -> String {
    format!("\"{}\"", s.as_ref().replace('\\', "\\\\").replace('"', "\\\""))
}

// ---------------------------------------------------------------------------
// Subcommands.

fn cmd_train(args: &TrainArgs) -> Result<u8, Fail> {
    let file = FileCfg::load(args.data.config.as_deref())?;
    let seed = resolve_seed(args.data.seed, &file)?;
    let knobs = resolve_knobs(&args.solver, &file)?;
    let splits = load_dataset(&args.data, &file, seed)?;
    let meta = DatasetMeta::compute(&splits.train)?;
    let spec = MeasureSpec::build(knobs.kind, meta.theta(), knobs.m)?;
    let out_model: PathBuf =
        resolve(args.out_model.clone(), &file, "out-model")?.unwrap_or_else(|| "model.txt".into());
    let out_trace: PathBuf =
        resolve(args.out_trace.clone(), &file, "out-trace")?.unwrap_or_else(|| "trace.csv".into());

    let mut extra: Vec<(&str, String)> = Vec::new();
    let (model, trace_csv) = match knobs.solver.as_str() {
        "spade" => {
            let MeasureKind::Concave(kind) = knobs.kind else {
                return usage("spade optimizes concave measures (min, hmean, qmean, gmean)");
            };
            let cfg = SpadeConfig {
                passes: knobs.passes,
                seed,
                r_w: knobs.r_w,
                primal_scale: knobs.step_scale,
                dual_scale: knobs.dual_scale,
                reward: knobs.reward,
                ..Default::default()
            };
            let run = spade_run(&splits.train, &splits.test, kind, &cfg)?;
            push_final_metrics(&mut extra, &run.trace);
            (run.model, trace_to_csv(&run.trace))
        }
        "stamp" => {
            let MeasureKind::PseudoLinear(kind) = knobs.kind else {
                return usage("stamp optimizes pseudo-linear measures (fbeta:<b>, jaccard, gl:<s>)");
            };
            let cfg = StampConfig {
                passes: knobs.passes,
                seed,
                r_w: knobs.r_w,
                step_scale: knobs.step_scale,
                reward: knobs.reward,
                schedule: knobs.schedule,
                m: knobs.m,
            };
            let run = stamp_run(&splits.train, &splits.test, kind, &cfg)?;
            extra.push(("final_level", format!("{}", run.final_level)));
            push_final_metrics(&mut extra, &run.trace);
            (run.model, trace_to_csv(&run.trace))
        }
        "am" => {
            let MeasureKind::PseudoLinear(kind) = knobs.kind else {
                return usage("am optimizes pseudo-linear measures (fbeta:<b>, jaccard, gl:<s>)");
            };
            let cfg = AmTrainConfig {
                m: knobs.m,
                r_w: knobs.r_w,
                inner_scale: knobs.step_scale,
                reward: knobs.reward,
                ..Default::default()
            };
            let (model, levels) = am_train(&splits.train, kind, &cfg)?;
            let mut csv = String::from("sweep,level\n");
            for (i, v) in levels.iter().enumerate() {
                let _ = writeln!(csv, "{i},{v}");
            }
            extra.push(("final_level", format!("{}", levels.last().copied().unwrap_or(0.0))));
            (model, csv)
        }
        "sgd" => {
            let cfg = SgdConfig {
                passes: knobs.passes,
                seed,
                r_w: knobs.r_w,
                step_scale: knobs.step_scale,
                ..Default::default()
            };
            let run = sgd_logistic(&splits.train, &splits.test, &spec, &cfg)?;
            push_final_metrics(&mut extra, &run.trace);
            (run.model, trace_to_csv(&run.trace))
        }
        "plugin" => {
            let cfg = SgdConfig {
                passes: knobs.passes,
                seed,
                r_w: knobs.r_w,
                step_scale: knobs.step_scale,
                ..Default::default()
            };
            let run = plugin_curve(&splits.train, &splits.tune, &splits.test, &spec, &cfg)?;
            extra.push(("threshold", format!("{}", run.threshold)));
            extra.push(("tuned_value", format!("{}", run.value)));
            push_final_metrics(&mut extra, &run.trace);
            (run.model, trace_to_csv(&run.trace))
        }
        other => {
            return usage(format!(
                "unknown solver {other:?}; expected spade, stamp, am, sgd, or plugin"
            ))
        }
    };

    model.save(&out_model)?;
    std::fs::write(&out_trace, trace_csv)?;
    let mut pairs = vec![
        ("solver", json_str(&knobs.solver)),
        ("measure", json_str(knobs.kind.to_string())),
        ("seed", seed.to_string()),
        ("n_train", splits.train.len().to_string()),
        ("model", json_str(out_model.display().to_string())),
        ("trace", json_str(out_trace.display().to_string())),
    ];
    pairs.extend(extra);
    println!("{}", json_line(&pairs));
    Ok(0)
}

fn push_final_metrics(extra: &mut Vec<(&str, String)>, trace: &[TraceRecord]) {
    if let Some(last) = trace.last() {
        extra.push(("final_train_metric", format!("{}", last.train_metric)));
        extra.push(("final_test_metric", format!("{}", last.test_metric)));
    }
}

fn cmd_evaluate(args: &EvalArgs) -> Result<u8, Fail> {
    let file = FileCfg::load(args.data.config.as_deref())?;
    let seed = resolve_seed(args.data.seed, &file)?;
    let model_path: PathBuf = match resolve(args.model.clone(), &file, "model")? {
        Some(p) => p,
        None => return usage("--model is required"),
    };
    let token: String = match resolve(args.measure.clone(), &file, "measure")? {
        Some(t) => t,
        None => return usage("--measure is required"),
    };
    let kind = MeasureKind::from_str(&token).map_err(Fail::from)?;
    let m = resolve(args.m, &file, "m")?.unwrap_or(1.0);
    let threshold = resolve(args.threshold, &file, "threshold")?.unwrap_or(0.0);

    let splits = load_dataset(&args.data, &file, seed)?;
    // With a split, score the held-out test part; otherwise the whole set.
    let eval_set = if splits.test.is_empty() { &splits.train } else { &splits.test };
    let meta = DatasetMeta::compute(eval_set)?;
    let spec = MeasureSpec::build(kind, meta.theta(), m)?;
    let model = LinearModel::load(&model_path)?;
    let r = rates_at(&model, threshold, eval_set)?;
    let value = spec.value(r)?;
    println!(
        "{}",
        json_line(&[
            ("P", format!("{}", r.p)),
            ("N", format!("{}", r.n)),
            ("value", format!("{value}")),
        ])
    );
    Ok(0)
}

fn cmd_bench(args: &BenchArgs) -> Result<u8, Fail> {
    let file = FileCfg::load(args.data.config.as_deref())?;
    let seed = resolve_seed(args.data.seed, &file)?;
    let knobs = {
        // Bench picks the solver from the measure class; --solver is ignored.
        let mut opts = args.solver.clone();
        if opts.solver.is_none() {
            opts.solver = Some(String::from("bench"));
        }
        resolve_knobs(&opts, &file)?
    };
    let splits = load_dataset(&args.data, &file, seed)?;
    let meta = DatasetMeta::compute(&splits.train)?;
    let spec = MeasureSpec::build(knobs.kind, meta.theta(), knobs.m)?;
    let out: PathBuf = resolve(args.out.clone(), &file, "out")?.unwrap_or_else(|| "bench.csv".into());

    let mut rows: Vec<(&str, Vec<TraceRecord>)> = Vec::new();
    match knobs.kind {
        MeasureKind::Concave(kind) => {
            let cfg = SpadeConfig {
                passes: knobs.passes,
                seed,
                r_w: knobs.r_w,
                primal_scale: knobs.step_scale,
                dual_scale: knobs.dual_scale,
                reward: knobs.reward,
                ..Default::default()
            };
            let run = spade_run(&splits.train, &splits.test, kind, &cfg)?;
            rows.push(("spade", run.trace));
        }
        MeasureKind::PseudoLinear(kind) => {
            let cfg = StampConfig {
                passes: knobs.passes,
                seed,
                r_w: knobs.r_w,
                step_scale: knobs.step_scale,
                reward: knobs.reward,
                schedule: knobs.schedule,
                m: knobs.m,
            };
            let run = stamp_run(&splits.train, &splits.test, kind, &cfg)?;
            rows.push(("stamp", run.trace));
        }
    }
    let sgd_cfg = SgdConfig { passes: knobs.passes, seed, r_w: knobs.r_w, ..Default::default() };
    rows.push(("sgd", sgd_logistic(&splits.train, &splits.test, &spec, &sgd_cfg)?.trace));
    rows.push((
        "plugin",
        plugin_curve(&splits.train, &splits.tune, &splits.test, &spec, &sgd_cfg)?.trace,
    ));

    let mut csv = String::from("method,checkpoint,t,elapsed_ms,train_metric,test_metric\n");
    let mut finals: Vec<(&str, String)> = vec![("measure", json_str(knobs.kind.to_string()))];
    for (method, trace) in &rows {
        for (i, rec) in trace.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{method},{i},{},{},{},{}",
                rec.t, rec.elapsed_ms, rec.train_metric, rec.test_metric
            );
        }
        if let Some(last) = trace.last() {
            finals.push((method, format!("{}", last.test_metric)));
        }
    }
    std::fs::write(&out, csv)?;
    finals.push(("out", json_str(out.display().to_string())));
    println!("{}", json_line(&finals));
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, Fail> {
    let file = FileCfg::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &file)?;
    let grid = resolve(args.grid, &file, "grid")?.unwrap_or(21);
    let sets = resolve(args.sets, &file, "sets")?.unwrap_or(200);
    let runs = resolve(args.runs, &file, "runs")?.unwrap_or(100);
    let suite: String = resolve(Some(args.suite.clone()), &file, "suite")?.unwrap();
    let all = suite == "all";
    let mut ran = false;
    let mut ok = true;

    if all || suite == "fenchel" {
        ran = true;
        let rep = verify_fenchel(grid);
        let pass = rep.max_err <= 1e-3;
        ok &= pass;
        println!(
            "fenchel: {} (grid {grid}x{grid}, max err {:.3e}, {:.0} ms)",
            pass_str(pass),
            rep.max_err,
            rep.elapsed_ms
        );
    }
    if all || suite == "lemma1" {
        ran = true;
        let rep = verify_lemma1(grid);
        ok &= rep.ok;
        let detail: Vec<String> =
            rep.rows.iter().map(|(l, n, b)| format!("{l} {n:.4}<={b:.4}")).collect();
        println!("lemma1: {} ({})", pass_str(rep.ok), detail.join(", "));
    }
    if all || suite == "contraction" {
        ran = true;
        let rep = verify_contraction(sets, seed)?;
        let pass = rep.violations == 0;
        ok &= pass;
        println!(
            "contraction: {} ({} sets, {} violations, max excess {:.3e})",
            pass_str(pass),
            rep.sets,
            rep.violations,
            rep.max_excess
        );
    }
    if all || suite == "noise" {
        ran = true;
        let rep = verify_noise(runs, seed)?;
        let pass = rep.violations == 0;
        ok &= pass;
        println!(
            "noise: {} ({} runs, {} violations, max excess {:.3e})",
            pass_str(pass),
            rep.runs,
            rep.violations,
            rep.max_excess
        );
    }
    if !ran {
        return usage(format!(
            "unknown suite {suite:?}; expected fenchel, lemma1, contraction, noise, or all"
        ));
    }
    Ok(if ok { 0 } else { 1 })
}

fn pass_str(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Train(a) => cmd_train(a),
        Cmd::Evaluate(a) => cmd_evaluate(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(code) => std::process::exit(i32::from(code)),
        Err(fail) => {
            eprintln!("error: {}", fail.msg);
            std::process::exit(i32::from(fail.code));
        }
    }
}
