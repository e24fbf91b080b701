//! `airylab`: command-line front end.
//!
//! Every subcommand takes its parameters from flags, from a TOML file given
//! with `--config` (keys named like the long flags), or both; flags win.
//! Results go to stdout or `--output PATH` as newline-delimited JSON or CSV.
//! With `--output`, `PATH.manifest.json` records the resolved parameters so
//! `airylab replay PATH.manifest.json` regenerates the same bytes.

use airylab::acceptance::{self, Tier};
use airylab::blocks::lbeta::{epsilon_extrapolate, l_beta_truncated, LQuery};
use airylab::bridges::{f0_kernel, f00_kernel, f_kernel, i0_mc, i00_mc, i_mc, McOptions};
use airylab::dunkl::moments::{corners_moment, dbm_moment, scaled_edge_moment, MomentQuery};
use airylab::ensembles::{corners_samples, dbm_samples, sample_gbe_top};
use airylab::paths::{count_paths, weighted_sum_i, FloorMode, PathCountQuery, WeightedPathQuery};
use airylab::scalar::{format_rational, parse_rational, to_f64};
use airylab::walks::{expansion_check, TauMode, WalkShape};
use airylab::LabError;
use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "airylab", version, about = "Exact moments, path kernels, blocks integrals and samplers for the Airy beta line ensemble")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML file with the subcommand's parameters
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// defaults to $AIRYLAB_SEED, then 0
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact joint moments of corners or DBM
    Moments(MomentsArgs),
    /// Walk expansion against the operator expansion
    Walks(WalksArgs),
    /// Path counts and weighted path sums
    Paths(PathsArgs),
    /// Closed-form and Monte Carlo bridge kernels
    Bridges(BridgesArgs),
    /// Truncated L_beta with its strata and the epsilon extrapolation
    Lbeta(LbetaArgs),
    /// Matrix-model samples as CSV
    Sample(SampleArgs),
    /// Exact edge moments along a list of N
    Convergence(ConvergenceArgs),
    /// The acceptance suite
    Selftest(SelftestArgs),
    /// Re-run from a manifest
    Replay { manifest: PathBuf },
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct MomentsArgs {
    /// corners or dbm
    #[arg(long)]
    mode: Option<String>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: Option<usize>,
    /// corners rows N_1 ≥ … ≥ N_m
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<u32>>,
    /// rational, e.g. 3/2
    #[arg(long)]
    beta: Option<String>,
    /// corners: top-row variance; dbm: comma-separated times
    #[arg(long)]
    tau: Option<String>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct WalksArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    marked: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<usize>>,
    #[arg(long)]
    beta: Option<String>,
    /// a rational variance, or `edge` for 2N/β
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct PathsArgs {
    #[arg(long = "X")]
    #[serde(rename = "X")]
    x: Option<u32>,
    #[arg(long = "H")]
    #[serde(rename = "H")]
    h: Option<u32>,
    #[arg(long = "G")]
    #[serde(rename = "G")]
    g: Option<u32>,
    /// count paths that stay at or above the start
    #[arg(long)]
    above_start: Option<bool>,
    /// with --N, also the weighted sum I (or I⁺); `inf` allowed
    #[arg(long)]
    beta: Option<String>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: Option<u64>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct BridgesArgs {
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    /// `inf` gives the closed form alone
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    mesh: Option<usize>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct LbetaArgs {
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    tau: Option<Vec<f64>>,
    /// `inf` allowed
    #[arg(long)]
    beta: Option<String>,
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    #[arg(long)]
    delta_max: Option<usize>,
    /// draws per stratum
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    mesh: Option<usize>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct SampleArgs {
    /// gbe, corners or dbm
    #[arg(long)]
    model: Option<String>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// GβE / corners variance
    #[arg(long)]
    variance: Option<f64>,
    /// corners rows to keep (default: the top row)
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<usize>>,
    /// DBM output times
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ConvergenceArgs {
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N")]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    tau: Option<Vec<f64>>,
    #[arg(long)]
    beta: Option<String>,
}

#[derive(Args, Debug, Serialize, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct SelftestArgs {
    /// fast or full
    #[arg(long)]
    tier: Option<String>,
    /// comma-separated criterion ids
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
}

/// Overlays the flags on the config file and fills defaults.
fn merge<T: Serialize + DeserializeOwned>(cli: &T, config: Option<&Path>, defaults: Value) -> anyhow::Result<T> {
    let mut base = match defaults {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    if let Some(p) = config {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let file: T = toml::from_str(&text).map_err(|e| anyhow!(LabError::Argument(format!("config {}: {e}", p.display()))))?;
        overlay(&mut base, serde_json::to_value(file)?);
    }
    overlay(&mut base, serde_json::to_value(cli)?);
    Ok(serde_json::from_value(Value::Object(base))?)
}

fn overlay(base: &mut Map<String, Value>, top: Value) {
    if let Value::Object(m) = top {
        for (k, v) in m {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> anyhow::Result<T> {
    v.clone().ok_or_else(|| anyhow!(LabError::Argument(format!("missing --{name}"))))
}

fn lab<T>(r: airylab::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| anyhow!(e))
}

struct Run {
    records: Vec<Value>,
    format: Format,
    /// also print a plain-text line to stdout
    text: Option<String>,
    ok: bool,
}

impl Run {
    fn json(records: Vec<Value>) -> Self {
        Run { records, format: Format::Json, text: None, ok: true }
    }
}

fn rat_json(q: &airylab::Rational) -> Value {
    json!({ "exact": format_rational(q), "value": to_f64(q) })
}

fn moments(a: &MomentsArgs) -> anyhow::Result<Run> {
    let mode = need(&a.mode, "mode")?;
    let n = need(&a.n, "N")?;
    let k = need(&a.k, "k")?;
    let beta = lab(parse_rational(&need(&a.beta, "beta")?))?;
    let tau = need(&a.tau, "tau")?;
    let (q, v) = match mode.as_str() {
        "corners" => {
            let rows = a.rows.clone().unwrap_or_else(|| vec![n; k.len()]);
            let q = MomentQuery::corners(n, rows, k.clone(), beta, lab(parse_rational(&tau))?);
            let v = lab(corners_moment(&q))?;
            (q, v)
        }
        "dbm" => {
            let times = tau.split(',').map(|t| lab(parse_rational(t.trim()))).collect::<anyhow::Result<Vec<_>>>()?;
            let q = MomentQuery::dbm(n, times, k.clone(), beta);
            let v = lab(dbm_moment(&q))?;
            (q, v)
        }
        other => bail!(LabError::Argument(format!("--mode must be corners or dbm, got {other}"))),
    };
    let _ = q;
    Ok(Run::json(vec![json!({ "mode": mode, "N": n, "rows": a.rows, "k": k, "beta": a.beta, "tau": tau, "moment": rat_json(&v) })]))
}

/// Accepts `inf`, which JSON cannot carry as a number.
fn real(s: &str) -> anyhow::Result<f64> {
    s.trim().parse().map_err(|_| anyhow!(LabError::Argument(format!("not a number: {s}"))))
}

fn tau_mode(s: &str) -> anyhow::Result<TauMode> {
    Ok(if s == "edge" { TauMode::Edge } else { TauMode::Fixed(lab(parse_rational(s))?) })
}

fn walks(a: &WalksArgs) -> anyhow::Result<Run> {
    let n = need(&a.n, "N")?;
    let k = need(&a.k, "k")?;
    let marked = a.marked.clone().unwrap_or_else(|| vec![1; k.len()]);
    let rows = a.rows.clone().unwrap_or_else(|| vec![n; k.len()]);
    let shape = lab(WalkShape::new(n, marked.clone(), k.clone(), rows.clone()))?;
    let beta = lab(parse_rational(&need(&a.beta, "beta")?))?;
    let c = lab(expansion_check(&shape, &beta, &tau_mode(&need(&a.tau, "tau")?)?, a.budget.unwrap_or(1_000_000)))?;
    Ok(Run::json(vec![json!({
        "N": n, "marked": marked, "k": k, "rows": rows, "walks": c.walks,
        "walk_sum": rat_json(&c.walk_sum), "operator_value": rat_json(&c.operator_value), "equal": c.equal
    })]))
}

fn paths(a: &PathsArgs) -> anyhow::Result<Run> {
    let mut q = PathCountQuery::new(need(&a.x, "X")?, need(&a.h, "H")?, need(&a.g, "G")?);
    if a.above_start == Some(true) {
        q.floor_mode = FloorMode::StayAboveStart;
    }
    let count = count_paths(&q);
    let mut rec = json!({ "X": q.x, "H": q.h, "G": q.g, "floor_mode": format!("{:?}", q.floor_mode), "count": count.to_string() });
    if let (Some(beta), Some(n)) = (a.beta.as_deref(), a.n) {
        let w = lab(weighted_sum_i(&WeightedPathQuery { query: q.clone(), beta: real(beta)?, n }))?;
        rec["beta"] = json!(beta);
        rec["weighted_sum"] = json!(w);
        return Ok(Run::json(vec![rec]));
    }
    Ok(Run { text: Some(count.to_string()), ..Run::json(vec![rec]) })
}

fn bridges(a: &BridgesArgs, seed: u64) -> anyhow::Result<Run> {
    let x = need(&a.x, "x")?;
    let h = a.h.unwrap_or(0.0);
    let g = a.g.unwrap_or(0.0);
    let beta = real(&need(&a.beta, "beta")?)?;
    let opts = McOptions { budget: a.budget.unwrap_or(100_000), seed, mesh: a.mesh.unwrap_or(64), refine: true };
    // h = g = 0 is the excursion kernel, g = 0 alone the one-sided kernel
    let (kernel, closed, est) = if h == 0.0 && g == 0.0 {
        ("I00", lab(f00_kernel(x))?, lab(i00_mc(x, beta, &opts))?)
    } else if g == 0.0 || h == 0.0 {
        ("I0", lab(f0_kernel(x, h.max(g)))?, lab(i0_mc(x, h.max(g), beta, &opts))?)
    } else {
        ("I", lab(f_kernel(x, h, g))?, lab(i_mc(x, h, g, beta, &opts))?)
    };
    Ok(Run::json(vec![json!({ "kernel": kernel, "x": x, "h": h, "g": g, "beta": a.beta, "closed_form_F": closed, "estimate": est })]))
}

fn lbeta(a: &LbetaArgs, seed: u64) -> anyhow::Result<Run> {
    let kappa = need(&a.kappa, "kappa")?;
    let tau = a.tau.clone().unwrap_or_else(|| vec![0.0; kappa.len()]);
    let eps = a.epsilon.clone().unwrap_or_else(|| vec![0.4, 0.2, 0.1]);
    let mut reports = vec![];
    let mut pts = vec![];
    for &e in &eps {
        let mut q = LQuery::new(kappa.clone(), tau.clone(), real(&need(&a.beta, "beta")?)?, e);
        q.delta_max = a.delta_max.unwrap_or(2);
        q.mc_budget = a.budget.unwrap_or(20_000);
        q.mesh = a.mesh.unwrap_or(32);
        q.seed = seed;
        let r = lab(l_beta_truncated(&q))?;
        pts.push((e, r.total, r.stderr));
        reports.push(r);
    }
    let extrapolated = if pts.len() >= 2 { Some(lab(epsilon_extrapolate(&pts))?) } else { None };
    let records = reports
        .iter()
        .map(|r| {
            json!({
                "query": r.query,
                "strata": r.strata.iter().map(|s| json!({
                    "u": s.stratum.u, "delta_pattern": s.stratum.delta_pattern, "virtual_mask": s.stratum.virtual_mask,
                    "delta": s.delta, "dimension": s.dimension, "estimate": s.estimate, "stderr": s.stderr,
                    "n": s.n, "nonzero": s.nonzero, "flagged": s.flagged
                })).collect::<Vec<_>>(),
                "beta": a.beta, "total": r.total, "stderr": r.stderr, "extrapolated": extrapolated
            })
        })
        .collect();
    Ok(Run::json(records))
}

fn sample(a: &SampleArgs, seed: u64) -> anyhow::Result<Run> {
    let model = need(&a.model, "model")?;
    let n = need(&a.n, "N")?;
    let beta = need(&a.beta, "beta")?;
    let count = a.count.unwrap_or(1000);
    let variance = a.variance.unwrap_or(1.0);
    let mut records = vec![];
    let mut push = |s: usize, label: &str, at: f64, vals: &[f64]| {
        for (i, v) in vals.iter().enumerate() {
            records.push(json!({ "sample": s, label: at, "index": i + 1, "value": v }));
        }
    };
    match model.as_str() {
        "gbe" => {
            for (s, v) in lab(sample_gbe_top(n, beta, variance, n, count, seed))?.iter().enumerate() {
                push(s, "row", n as f64, v);
            }
        }
        "corners" => {
            let rows = a.rows.clone().unwrap_or_else(|| vec![n]);
            if let airylab::ensembles::SampleSet::Corners { values, .. } = lab(corners_samples(n, beta, variance, &rows, count, seed))? {
                for (s, per) in values.iter().enumerate() {
                    for (r, v) in rows.iter().zip(per) {
                        push(s, "row", *r as f64, v);
                    }
                }
            }
        }
        "dbm" => {
            let times = need(&a.times, "times")?;
            let dt = a.dt.unwrap_or(1e-3);
            if let airylab::ensembles::SampleSet::Dbm { values, .. } = lab(dbm_samples(n, beta, &times, dt, count, seed))? {
                for (s, per) in values.iter().enumerate() {
                    for (t, v) in times.iter().zip(per) {
                        push(s, "time", *t, v);
                    }
                }
            }
        }
        other => bail!(LabError::Argument(format!("--model must be gbe, corners or dbm, got {other}"))),
    }
    Ok(Run { format: Format::Csv, ..Run::json(records) })
}

fn convergence(a: &ConvergenceArgs) -> anyhow::Result<Run> {
    let ns = a.n.clone().unwrap_or_else(|| vec![16, 32, 64]);
    let kappa = a.kappa.clone().unwrap_or_else(|| vec![1.0]);
    let tau = a.tau.clone().unwrap_or_else(|| vec![0.0; kappa.len()]);
    let beta_s = a.beta.clone().unwrap_or_else(|| "2".into());
    let beta = lab(parse_rational(&beta_s))?;
    let reference = (beta_s == "2" && kappa.len() == 1).then(|| acceptance::airy2_laplace_moment(kappa[0] / 2.0));
    let mut prev: Option<f64> = None;
    let mut records = vec![];
    for n in ns {
        let e = lab(scaled_edge_moment(n, &kappa, &tau, &beta))?;
        records.push(json!({
            "N": n, "k": e.powers, "rows": e.rows, "value": e.value, "exact": e.exact_value,
            "difference": prev.map(|p| e.value - p), "airy2_reference": reference,
        }));
        prev = Some(e.value);
    }
    Ok(Run::json(records))
}

fn selftest(a: &SelftestArgs) -> anyhow::Result<Run> {
    let tier = match a.tier.as_deref().unwrap_or("fast") {
        "fast" => Tier::Fast,
        "full" => Tier::Full,
        t => bail!(LabError::Argument(format!("--tier must be fast or full, got {t}"))),
    };
    let mut records = vec![];
    let mut lines = vec![];
    let mut ok = true;
    for (id, _) in acceptance::CRITERIA {
        if a.only.as_ref().is_some_and(|o| !o.iter().any(|x| x == id)) {
            continue;
        }
        let v = lab(acceptance::run(id, tier))?;
        ok &= v.pass;
        lines.push(format!("{} {} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.id, v.title, v.detail));
        records.push(serde_json::to_value(&v)?);
    }
    Ok(Run { text: Some(lines.join("\n")), ok, ..Run::json(records) })
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    command: String,
    params: Value,
    seed: u64,
    format: Format,
    version: String,
}

fn dispatch(command: &str, params: &Value, seed: u64) -> anyhow::Result<Run> {
    fn p<T: DeserializeOwned>(v: &Value) -> anyhow::Result<T> {
        serde_json::from_value(v.clone()).map_err(|e| anyhow!(LabError::Argument(e.to_string())))
    }
    match command {
        "moments" => moments(&p(params)?),
        "walks" => walks(&p(params)?),
        "paths" => paths(&p(params)?),
        "bridges" => bridges(&p(params)?, seed),
        "lbeta" => lbeta(&p(params)?, seed),
        "sample" => sample(&p(params)?, seed),
        "convergence" => convergence(&p(params)?),
        "selftest" => selftest(&p(params)?),
        c => bail!(LabError::Argument(format!("unknown command {c}"))),
    }
}

fn flatten(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn render(run: &Run, format: Format) -> anyhow::Result<Vec<u8>> {
    let mut out = vec![];
    match format {
        Format::Json => {
            for r in &run.records {
                serde_json::to_writer(&mut out, r)?;
                out.push(b'\n');
            }
        }
        Format::Csv => {
            let mut header: Vec<String> = vec![];
            for r in &run.records {
                if let Value::Object(m) = r {
                    for k in m.keys() {
                        if !header.contains(k) {
                            header.push(k.clone());
                        }
                    }
                }
            }
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&header)?;
            for r in &run.records {
                w.write_record(header.iter().map(|k| flatten(r.get(k).unwrap_or(&Value::Null))))?;
            }
            w.flush()?;
        }
    }
    Ok(out)
}

fn execute(command: &str, params: Value, seed: u64, format: Option<Format>, output: Option<&Path>) -> anyhow::Result<bool> {
    let run = dispatch(command, &params, seed)?;
    let format = format.unwrap_or(run.format);
    let bytes = render(&run, format)?;
    match output {
        Some(path) => {
            std::fs::write(path, &bytes).with_context(|| format!("writing {}", path.display()))?;
            let manifest = Manifest { command: command.into(), params, seed, format, version: env!("CARGO_PKG_VERSION").into() };
            let mpath = PathBuf::from(format!("{}.manifest.json", path.display()));
            std::fs::write(&mpath, serde_json::to_string_pretty(&manifest)?)?;
            if let Some(t) = &run.text {
                println!("{t}");
            }
        }
        None => {
            if let Some(t) = &run.text {
                println!("{t}");
            }
            if run.text.is_none() {
                std::io::stdout().write_all(&bytes)?;
            }
        }
    }
    Ok(run.ok)
}

fn real_main() -> anyhow::Result<bool> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(true);
            }
            bail!(LabError::Argument(e.to_string()));
        }
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => match std::env::var("AIRYLAB_SEED") {
            Ok(s) => s.parse().map_err(|_| anyhow!(LabError::Argument(format!("AIRYLAB_SEED is not an integer: {s}"))))?,
            Err(_) => 0,
        },
    };
    let cfg = cli.config.as_deref();
    let (name, params) = match &cli.command {
        Command::Moments(a) => ("moments", serde_json::to_value(merge(a, cfg, json!({}))?)?),
        Command::Walks(a) => ("walks", serde_json::to_value(merge(a, cfg, json!({ "tau": "edge", "budget": 1_000_000 }))?)?),
        Command::Paths(a) => ("paths", serde_json::to_value(merge(a, cfg, json!({ "above-start": false }))?)?),
        Command::Bridges(a) => ("bridges", serde_json::to_value(merge(a, cfg, json!({ "h": 0.0, "g": 0.0, "budget": 100_000, "mesh": 64 }))?)?),
        Command::Lbeta(a) => (
            "lbeta",
            serde_json::to_value(merge(a, cfg, json!({ "epsilon": [0.4, 0.2, 0.1], "delta-max": 2, "budget": 20_000, "mesh": 32 }))?)?,
        ),
        Command::Sample(a) => ("sample", serde_json::to_value(merge(a, cfg, json!({ "variance": 1.0, "count": 1000, "dt": 1e-3 }))?)?),
        Command::Convergence(a) => (
            "convergence",
            serde_json::to_value(merge(a, cfg, json!({ "N": [16, 32, 64], "kappa": [1.0], "beta": "2" }))?)?,
        ),
        Command::Selftest(a) => ("selftest", serde_json::to_value(merge(a, cfg, json!({ "tier": "fast" }))?)?),
        Command::Replay { manifest } => {
            let text = std::fs::read_to_string(manifest).with_context(|| format!("reading {}", manifest.display()))?;
            let m: Manifest = serde_json::from_str(&text).map_err(|e| anyhow!(LabError::Argument(format!("manifest: {e}"))))?;
            let out = cli.output.clone();
            return execute(&m.command, m.params, m.seed, Some(m.format), out.as_deref());
        }
    };
    execute(name, params, seed, cli.format, cli.output.as_deref())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<LabError>() {
                Some(LabError::Resource(_)) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
