use crate::config::{parse_pair, parse_serde, resolve};
use crate::output::Run;
use crate::{svg, CliError};
use clap::Args;
use gffi_core::acceptance::{self, AcceptanceConfig, Runner, GFF_PROBES, IDS};
use gffi_core::asymptotics::{
    d_action, density, frozen_boundary as boundary, green as green_fn, omega as omega_fn, saddle_data, MacroPoint,
};
use gffi_core::dynamics::{simulate as run_plan, SimPlan};
use gffi_core::kernel::{
    check_far_right_limits, check_triangle_identities, conjugation, kernel_eval, KernelQuery, Method, QuadratureSpec,
};
use gffi_core::lattice::{LevelIndex, LozengeEntry};
use gffi_core::montecarlo::{gff_comparison_report, ObservationPlan, DEFAULT_BATCHES};
use gffi_core::specialfn::JacobiParam;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

pub struct Context {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
}

fn finish(ctx: &Context, run: Run, result: serde_json::Value) -> Result<ExitCode, CliError> {
    run.commit(&ctx.out)?;
    // a closed pipe on stdout is not an error once the artifacts exist
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&result).expect("json value"));
    Ok(ExitCode::SUCCESS)
}

fn parse_lozenge(s: &str) -> Result<LozengeEntry, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [x, l, k] = parts[..] else { return Err(format!("expected X,LEVEL,TYPE, got {s:?}")) };
    Ok(LozengeEntry {
        x: x.parse().map_err(|_| format!("bad position {x:?}"))?,
        level: l.parse().map_err(|_| format!("bad level {l:?}"))?,
        kind: parse_serde(k)?,
    })
}

fn parse_param(s: &str) -> Result<JacobiParam, String> {
    match s {
        "-1/2" | "-0.5" => Ok(JacobiParam::MinusHalf),
        "1/2" | "+1/2" | "0.5" | "+0.5" => Ok(JacobiParam::PlusHalf),
        _ => Err(format!("a must be -1/2 or +1/2, got {s:?}")),
    }
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    /// Level cutoff M
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Independent trajectories (streams 0..runs)
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long = "sample-time")]
    sample_times: Option<Vec<f64>>,
    /// Height probe X,LEVEL (repeatable)
    #[arg(long = "height-probe", value_parser = parse_pair::<i64, usize>)]
    height_probes: Option<Vec<(i64, usize)>>,
    /// Lozenge probe X,LEVEL,TYPE with TYPE in I, II, III (repeatable)
    #[arg(long = "lozenge-probe", value_parser = parse_lozenge)]
    lozenge_probes: Option<Vec<LozengeEntry>>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulateConfig {
    m: usize,
    t_end: f64,
    seed: u64,
    runs: u64,
    sample_times: Vec<f64>,
    height_probes: Vec<(i64, usize)>,
    lozenge_probes: Vec<LozengeEntry>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            m: 6,
            t_end: 2.0,
            seed: 42,
            runs: 1,
            sample_times: Vec::new(),
            height_probes: Vec::new(),
            lozenge_probes: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct ObservationCsv {
    trajectory_id: u64,
    time: f64,
    probe_id: String,
    value: i64,
}

pub fn simulate(ctx: &Context, args: SimulateArgs) -> Result<ExitCode, CliError> {
    let c: SimulateConfig = resolve("simulate", ctx.config.as_deref(), &args)?;
    if c.runs == 0 {
        return Err(CliError::config("runs must be >= 1"));
    }
    let times = if c.sample_times.is_empty() { vec![c.t_end] } else { c.sample_times.clone() };
    let plan = |stream| SimPlan {
        m_max: c.m,
        t_end: c.t_end,
        seed: c.seed,
        stream,
        sample_times: times.clone(),
        height_probes: c.height_probes.clone(),
        lozenge_probes: c.lozenge_probes.clone(),
    };
    plan(0).validate()?;
    let records = (0..c.runs).into_par_iter().map(|r| run_plan(&plan(r))).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (id, rec) in records.iter().enumerate() {
        for (prefix, list) in [("h", &rec.heights), ("z", &rec.lozenges)] {
            rows.extend(list.iter().map(|o| ObservationCsv {
                trajectory_id: id as u64,
                time: o.time,
                probe_id: format!("{prefix}{}", o.probe),
                value: o.value,
            }));
        }
    }
    let first = &records[0].final_configuration;
    let mut run = Run::new("simulate", &c, Some(c.seed))?;
    run.add_csv("observations.csv", &rows)?;
    run.add_json("final_configuration.json", first)?;
    run.add("tiling.svg", svg::tiling(first).into_bytes());
    finish(ctx, run, json!({ "trajectories": c.runs, "observation_rows": rows.len(), "final_configuration": first }))
}

#[derive(Args, Serialize)]
pub struct KernelArgs {
    #[arg(long)]
    n1: Option<u32>,
    /// -1/2 or +1/2
    #[arg(long, allow_hyphen_values = true, value_parser = parse_param)]
    a1: Option<JacobiParam>,
    #[arg(long)]
    s1: Option<u32>,
    #[arg(long)]
    n2: Option<u32>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_param)]
    a2: Option<JacobiParam>,
    #[arg(long)]
    s2: Option<u32>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    vradius: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_doublings: Option<u32>,
    /// double-contour or reduced
    #[arg(long, value_parser = parse_serde::<Method>)]
    method: Option<Method>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct QuadratureConfig {
    nodes: usize,
    vradius: f64,
    tol: f64,
    max_doublings: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let d = QuadratureSpec::default();
        QuadratureConfig { nodes: d.nodes, vradius: d.v_radius, tol: d.tol, max_doublings: d.max_doublings }
    }
}

impl QuadratureConfig {
    fn spec(&self, method: Method) -> Result<QuadratureSpec, CliError> {
        let s = QuadratureSpec {
            nodes: self.nodes,
            v_radius: self.vradius,
            tol: self.tol,
            max_doublings: self.max_doublings,
            method,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct KernelConfig {
    n1: u32,
    a1: JacobiParam,
    s1: u32,
    n2: u32,
    a2: JacobiParam,
    s2: u32,
    t: f64,
    method: Method,
    #[serde(flatten)]
    quadrature: QuadratureConfig,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            n1: 1,
            a1: JacobiParam::MinusHalf,
            s1: 0,
            n2: 1,
            a2: JacobiParam::MinusHalf,
            s2: 0,
            t: 1.0,
            method: Method::DoubleContour,
            quadrature: QuadratureConfig::default(),
        }
    }
}

pub fn kernel(ctx: &Context, args: KernelArgs) -> Result<ExitCode, CliError> {
    let c: KernelConfig = resolve("kernel", ctx.config.as_deref(), &args)?;
    let spec = c.quadrature.spec(c.method)?;
    let (lv1, lv2) = (LevelIndex::new(c.n1, c.a1)?, LevelIndex::new(c.n2, c.a2)?);
    let q = KernelQuery { lv1, s1: c.s1, lv2, s2: c.s2, t: c.t };
    let e = kernel_eval(&q, &spec)?;
    let result = json!({
        "value": e.value,
        "imag": e.imag,
        "nodes": e.nodes,
        "last_change": e.last_change,
        "conjugated_value": e.value * conjugation(lv1, c.s1 as i64, lv2, c.s2 as i64),
        "linear_levels": [lv1.linear(), lv2.linear()],
    });
    let mut run = Run::new("kernel", &c, None)?;
    run.add_json("kernel.json", &result)?;
    finish(ctx, run, result)
}

#[derive(Args, Serialize)]
pub struct IdentityArgs {
    /// Number of sampled (x, ℓ, x′, ℓ′) tuples
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    lo: Option<i64>,
    #[arg(long)]
    hi: Option<i64>,
    #[arg(long = "t")]
    times: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    far_level: Option<usize>,
    #[arg(long)]
    far_t: Option<f64>,
    #[arg(long = "far-x")]
    far_grid: Option<Vec<i64>>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    vradius: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct IdentityConfig {
    samples: usize,
    lo: i64,
    hi: i64,
    times: Vec<f64>,
    seed: u64,
    far_level: usize,
    far_t: f64,
    far_grid: Vec<i64>,
    #[serde(flatten)]
    quadrature: QuadratureConfig,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig {
            samples: 60,
            lo: 2,
            hi: 12,
            times: vec![0.5, 2.0],
            seed: 3,
            far_level: 1,
            far_t: 1.0,
            far_grid: vec![10, 20, 40],
            quadrature: QuadratureConfig::default(),
        }
    }
}

pub fn identities(ctx: &Context, args: IdentityArgs) -> Result<ExitCode, CliError> {
    let c: IdentityConfig = resolve("verify-kernel-identities", ctx.config.as_deref(), &args)?;
    let spec = c.quadrature.spec(Method::DoubleContour)?;
    if c.lo > c.hi {
        return Err(CliError::config("lo must not exceed hi"));
    }
    let samples = acceptance::triangle_samples(c.samples, c.lo, c.hi, c.seed);
    let mut triangle = Vec::new();
    for &t in &c.times {
        let r = check_triangle_identities(&samples, t, &spec)?;
        triangle.push(
            json!({ "t": t, "max_black_sum": r.max_black_sum, "max_white_sum": r.max_white_sum, "samples": r.samples }),
        );
    }
    let far = check_far_right_limits(c.far_level, c.far_t, &c.far_grid, &spec)?;
    let result = json!({ "triangle": triangle, "far_right": far });
    let mut run = Run::new("verify-kernel-identities", &c, Some(c.seed))?;
    run.add_json("identities.json", &result)?;
    run.add_csv("far_right.csv", &far)?;
    finish(ctx, run, result)
}

#[derive(Args, Serialize)]
pub struct OmegaArgs {
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PointConfig {
    nu: f64,
    eta: f64,
    tau: f64,
}

impl Default for PointConfig {
    fn default() -> Self {
        PointConfig { nu: 0.5, eta: 1.0, tau: 1.0 }
    }
}

pub fn omega(ctx: &Context, args: OmegaArgs) -> Result<ExitCode, CliError> {
    let c: PointConfig = resolve("omega", ctx.config.as_deref(), &args)?;
    let p = MacroPoint::new(c.nu, c.eta, c.tau);
    let (q1, q2) = boundary(c.eta, c.tau);
    let sd = saddle_data(&p)?;
    let result = json!({
        "point": p,
        "q1": q1,
        "q2": q2,
        "omega": sd.omega,
        "density": density(&p)?,
        "theta": sd.theta,
        "action": sd.g,
        "action_second_derivative": sd.g2,
        "abs_action_derivative": d_action(&p, sd.omega)?.norm(),
    });
    let mut run = Run::new("omega", &c, None)?;
    run.add_json("omega.json", &result)?;
    finish(ctx, run, result)
}

#[derive(Args, Serialize)]
pub struct BoundaryArgs {
    #[arg(long)]
    eta_min: Option<f64>,
    #[arg(long)]
    eta_max: Option<f64>,
    #[arg(long)]
    eta_steps: Option<usize>,
    #[arg(long = "tau")]
    taus: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BoundaryConfig {
    eta_min: f64,
    eta_max: f64,
    eta_steps: usize,
    taus: Vec<f64>,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig { eta_min: 0.1, eta_max: 2.0, eta_steps: 20, taus: vec![0.5, 1.0, 2.0] }
    }
}

#[derive(Serialize)]
struct BoundaryRow {
    eta: f64,
    tau: f64,
    q1: f64,
    q2: f64,
}

pub fn frozen_boundary(ctx: &Context, args: BoundaryArgs) -> Result<ExitCode, CliError> {
    let c: BoundaryConfig = resolve("frozen-boundary", ctx.config.as_deref(), &args)?;
    if !(c.eta_min > 0.0 && c.eta_max >= c.eta_min) || c.eta_steps < 2 || c.taus.iter().any(|&t| !(t > 0.0)) {
        return Err(CliError::config("need 0 < eta_min <= eta_max, eta_steps >= 2 and positive taus"));
    }
    let mut rows = Vec::new();
    for &tau in &c.taus {
        for i in 0..c.eta_steps {
            let eta = c.eta_min + (c.eta_max - c.eta_min) * i as f64 / (c.eta_steps - 1) as f64;
            let eta = (eta * 1e12).round() / 1e12;
            let (q1, q2) = boundary(eta, tau);
            rows.push(BoundaryRow { eta, tau, q1, q2 });
        }
    }
    let pts: Vec<_> = rows.iter().map(|r| (r.eta, r.tau, r.q1, r.q2)).collect();
    let mut run = Run::new("frozen-boundary", &c, None)?;
    run.add_csv("frozen_boundary.csv", &rows)?;
    run.add("frozen_boundary.svg", svg::frozen_boundary(&pts).into_bytes());
    finish(ctx, run, json!({ "rows": rows }))
}

#[derive(Args, Serialize)]
pub struct GreenArgs {
    /// Direct argument RE,IM (with --w; skips the critical-point map)
    #[arg(long, value_parser = parse_pair::<f64, f64>, allow_hyphen_values = true)]
    z: Option<(f64, f64)>,
    #[arg(long, value_parser = parse_pair::<f64, f64>, allow_hyphen_values = true)]
    w: Option<(f64, f64)>,
    #[arg(long)]
    nu1: Option<f64>,
    #[arg(long)]
    eta1: Option<f64>,
    #[arg(long)]
    nu2: Option<f64>,
    #[arg(long)]
    eta2: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GreenConfig {
    z: Option<(f64, f64)>,
    w: Option<(f64, f64)>,
    nu1: f64,
    eta1: f64,
    nu2: f64,
    eta2: f64,
    tau: f64,
}

impl Default for GreenConfig {
    fn default() -> Self {
        let (a, b) = (GFF_PROBES[0], GFF_PROBES[1]);
        GreenConfig { z: None, w: None, nu1: a.0, eta1: a.1, nu2: b.0, eta2: b.1, tau: 1.0 }
    }
}

pub fn green(ctx: &Context, args: GreenArgs) -> Result<ExitCode, CliError> {
    let c: GreenConfig = resolve("green", ctx.config.as_deref(), &args)?;
    let (z, w, source) = match (c.z, c.w) {
        (Some(z), Some(w)) => (Complex64::new(z.0, z.1), Complex64::new(w.0, w.1), "direct"),
        (None, None) => (
            omega_fn(&MacroPoint::new(c.nu1, c.eta1, c.tau))?,
            omega_fn(&MacroPoint::new(c.nu2, c.eta2, c.tau))?,
            "critical-points",
        ),
        _ => return Err(CliError::config("give both z and w, or neither")),
    };
    let result = json!({ "source": source, "z": z, "w": w, "green": green_fn(z, w)? });
    let mut run = Run::new("green", &c, None)?;
    run.add_json("green.json", &result)?;
    finish(ctx, run, result)
}

#[derive(Args, Serialize)]
pub struct GffArgs {
    /// Scale N
    #[arg(long = "n")]
    n_scale: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    /// Probe NU,ETA (repeatable)
    #[arg(long = "probe", value_parser = parse_pair::<f64, f64>)]
    probes: Option<Vec<(f64, f64)>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batches: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GffConfig {
    n_scale: usize,
    tau: f64,
    probes: Vec<(f64, f64)>,
    runs: usize,
    seed: u64,
    batches: usize,
}

impl Default for GffConfig {
    fn default() -> Self {
        GffConfig {
            n_scale: 48,
            tau: 1.0,
            probes: GFF_PROBES.to_vec(),
            runs: 20_000,
            seed: 7,
            batches: DEFAULT_BATCHES,
        }
    }
}

#[derive(Serialize)]
struct GffCsv {
    nu1: f64,
    eta1: f64,
    nu2: f64,
    eta2: f64,
    cov_hat: f64,
    se: f64,
    prediction: f64,
    zscore: f64,
}

pub fn gff_verify(ctx: &Context, args: GffArgs) -> Result<ExitCode, CliError> {
    let c: GffConfig = resolve("gff-verify", ctx.config.as_deref(), &args)?;
    let plan = ObservationPlan {
        n_scale: c.n_scale,
        tau: c.tau,
        probes: c.probes.clone(),
        runs: c.runs,
        seed: c.seed,
        batches: c.batches,
    };
    let report = gff_comparison_report(&plan)?;
    let rows: Vec<GffCsv> = report
        .pairs
        .iter()
        .map(|p| GffCsv {
            nu1: p.nu1,
            eta1: p.eta1,
            nu2: p.nu2,
            eta2: p.eta2,
            cov_hat: p.cov_hat,
            se: p.se,
            prediction: p.prediction,
            zscore: p.zscore,
        })
        .collect();
    let mut run = Run::new("gff-verify", &c, Some(c.seed))?;
    run.add_csv("gff_pairs.csv", &rows)?;
    run.add_json("gff_report.json", &report)?;
    finish(ctx, run, json!({ "pairs": rows, "fitted_ratio": report.fitted_ratio }))
}

#[derive(Args, Serialize)]
pub struct SaddleArgs {
    #[arg(long)]
    nu1: Option<f64>,
    #[arg(long)]
    nu2: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_parser = parse_serde::<Method>)]
    method: Option<Method>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SaddleConfig {
    nu1: f64,
    nu2: f64,
    eta: f64,
    tau: f64,
    n_min: usize,
    n_max: usize,
    method: Method,
    #[serde(flatten)]
    quadrature: QuadratureConfig,
}

impl Default for SaddleConfig {
    fn default() -> Self {
        let (nu1, nu2) = acceptance::SADDLE_PAIR;
        SaddleConfig {
            nu1,
            nu2,
            eta: 1.0,
            tau: 1.0,
            n_min: 40,
            n_max: 60,
            method: Method::Reduced,
            quadrature: QuadratureConfig::default(),
        }
    }
}

pub fn saddle_compare(ctx: &Context, args: SaddleArgs) -> Result<ExitCode, CliError> {
    let c: SaddleConfig = resolve("saddle-compare", ctx.config.as_deref(), &args)?;
    if c.n_min == 0 || c.n_min > c.n_max {
        return Err(CliError::config("need 1 <= n_min <= n_max"));
    }
    let spec = c.quadrature.spec(c.method)?;
    let rows = acceptance::saddle_rows((c.nu1, c.nu2), c.eta, c.tau, c.n_min..=c.n_max, &spec)?;
    let ratio = acceptance::rms_ratio(&rows);
    let mut run = Run::new("saddle-compare", &c, None)?;
    run.add_csv("saddle.csv", &rows)?;
    finish(ctx, run, json!({ "rms_ratio": ratio, "rows": rows }))
}

#[derive(Args, Serialize)]
pub struct AcceptArgs {
    /// Criterion to run (repeatable; default all)
    #[arg(long = "id")]
    ids: Option<Vec<u8>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mc_runs: Option<usize>,
    #[arg(long)]
    gff_runs: Option<usize>,
    #[arg(long)]
    density_runs: Option<usize>,
    /// Exit with status 3 if any criterion fails
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    strict: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AcceptConfig {
    ids: Vec<u8>,
    strict: bool,
    #[serde(flatten)]
    run: AcceptanceConfig,
}

impl Default for AcceptConfig {
    fn default() -> Self {
        AcceptConfig { ids: IDS.to_vec(), strict: false, run: AcceptanceConfig::default() }
    }
}

pub fn accept(ctx: &Context, args: AcceptArgs) -> Result<ExitCode, CliError> {
    let c: AcceptConfig = resolve("accept", ctx.config.as_deref(), &args)?;
    if let Some(bad) = c.ids.iter().find(|i| !IDS.contains(i)) {
        return Err(CliError::config(format!("no criterion {bad}")));
    }
    let mut runner = Runner::new(c.run.clone());
    let mut outcomes = Vec::new();
    for &id in &c.ids {
        let o = runner.run(id)?;
        eprintln!("{} criterion {id:>2} ({}): {}", if o.pass { "PASS" } else { "FAIL" }, o.title, o.summary);
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let result = json!({ "passed": passed, "total": outcomes.len(), "outcomes": outcomes });
    let mut run = Run::new("accept", &c, Some(c.run.seed))?;
    run.add_json("acceptance.json", &result)?;
    finish(ctx, run, result)?;
    Ok(if c.strict && passed < outcomes.len() { ExitCode::from(3) } else { ExitCode::SUCCESS })
}
