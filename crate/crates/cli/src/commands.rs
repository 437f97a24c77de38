use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use twopatch::analytic::{delta_closed, p_plus, threshold_m_star};
use twopatch::applications::{
    classify_persistence, cumulative_cases_sweep, predict_persistence, simulate_density_dependent, simulate_sir,
    sir_linearized_growth, HoltParams, SwitchingMode, Verdict, DEFAULT_BURN_IN, DEFAULT_EXTINCTION_THRESHOLD,
};
use twopatch::matrix::{delta_spectral, phase_shift_map};
use twopatch::pdmp::{delta_pdmp_quadrature, simulate_sape, simulate_switching, InvariantDensity};
use twopatch::switched::{delta_quadrature, periodic_orbit};
use twopatch::{EnvironmentKind, EnvironmentSignal, Error, GrowthReport};

use crate::config::{GridSpec, RunConfig};
use crate::error::{CliError, CliResult};

const QUAD_NODES: usize = 64;

/// Scalar overrides given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub m: Option<f64>,
    pub t: Option<f64>,
    pub alpha: Option<f64>,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Config and flags merged; flags win.
pub struct Ctx {
    pub cfg: RunConfig,
    pub over: Overrides,
    pub check: bool,
}

/// Result of a `--check` run.
#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub command: &'static str,
    pub ok: bool,
    #[serde(flatten)]
    pub detail: serde_json::Value,
}

impl Ctx {
    fn param(&self, flag: Option<f64>, pick: impl Fn(&twopatch::ModelParams) -> f64, default: f64) -> f64 {
        flag.or_else(|| self.cfg.params.as_ref().map(pick)).unwrap_or(default)
    }

    pub fn epsilon(&self, default: f64) -> f64 {
        self.param(self.over.epsilon, |p| p.epsilon, default)
    }

    pub fn m(&self, default: f64) -> f64 {
        self.param(self.over.m, |p| p.m, default)
    }

    pub fn t(&self, default: f64) -> f64 {
        self.param(self.over.t, |p| p.half_period, default)
    }

    pub fn alpha(&self, default: f64) -> f64 {
        self.param(self.over.alpha, |p| p.alpha, default)
    }

    pub fn seed(&self) -> u64 {
        self.over.seed.or(self.cfg.seed).unwrap_or(0)
    }

    pub fn horizon(&self, default: f64) -> CliResult<f64> {
        positive("horizon", self.over.horizon.or(self.cfg.horizon).unwrap_or(default))
    }

    pub fn dt(&self, default: f64) -> CliResult<f64> {
        positive("dt", self.over.dt.or(self.cfg.dt).unwrap_or(default))
    }

    pub fn out(&self) -> Option<&Path> {
        self.over.out.as_deref().or(self.cfg.out.as_deref())
    }

    /// A scalar flag pins the grid to that single value.
    fn grid(&self, name: &str, flag: Option<f64>, spec: Option<&GridSpec>, default: GridSpec) -> CliResult<Vec<f64>> {
        match flag {
            Some(v) => Ok(vec![v]),
            None => spec.unwrap_or(&default).points(name),
        }
    }

    fn m_grid(&self, default: GridSpec) -> CliResult<Vec<f64>> {
        self.grid("m", self.over.m, self.cfg.grid.m.as_ref(), default)
    }

    fn t_grid(&self, default: GridSpec) -> CliResult<Vec<f64>> {
        self.grid("t", self.over.t, self.cfg.grid.t.as_ref(), default)
    }

    fn open(&self) -> CliResult<Box<dyn Write>> {
        open_sink(self.out())
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!(
            "`{name}` must be positive and finite, got {v}"
        )))
    }
}

fn open_sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn sink_name(path: Option<&Path>) -> PathBuf {
    path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf)
}

fn write_csv<R: Serialize>(ctx: &Ctx, rows: &[R]) -> CliResult<()> {
    write_csv_to(ctx.out(), rows)
}

fn write_csv_to<R: Serialize>(path: Option<&Path>, rows: &[R]) -> CliResult<()> {
    let io_err = |e: io::Error| CliError::io(sink_name(path), e);
    let mut w = csv::Writer::from_writer(open_sink(path)?);
    for r in rows {
        w.serialize(r).map_err(|e| io_err(e.into()))?;
    }
    w.flush().map_err(io_err)
}

fn write_jsonl<R: Serialize>(ctx: &Ctx, rows: &[R]) -> CliResult<()> {
    let io_err = |e: io::Error| CliError::io(sink_name(ctx.out()), e);
    let mut w = ctx.open()?;
    for r in rows {
        serde_json::to_writer(&mut w, r).map_err(|e| io_err(e.into()))?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Maps in grid order on the global pool.
fn par_map<P: Sync, R: Send>(points: &[P], f: impl Fn(usize, &P) -> CliResult<R> + Sync) -> CliResult<Vec<R>> {
    points.par_iter().enumerate().map(|(i, p)| f(i, p)).collect()
}

fn finish(check: CheckReport) -> CliResult<Option<CheckReport>> {
    Ok(Some(check))
}

pub type Outcome = CliResult<Option<CheckReport>>;

#[derive(Serialize)]
struct SurfaceRow {
    m: f64,
    #[serde(rename = "T")]
    t: f64,
    delta_closed: f64,
    delta_spectral: f64,
    delta_quadrature: f64,
    max_discrepancy: f64,
}

pub fn delta_surface(ctx: &Ctx) -> Outcome {
    let eps = ctx.epsilon(0.5);
    let ms = ctx.m_grid(GridSpec::linear(0.0, 4.0, 40))?;
    let ts = ctx.t_grid(GridSpec::linear(0.1, 20.0, 40))?;
    let points: Vec<(f64, f64)> = ms.iter().flat_map(|&m| ts.iter().map(move |&t| (m, t))).collect();
    let rows = par_map(&points, |_, &(m, t)| {
        let c = delta_closed(eps, m, t)?;
        let s = delta_spectral(eps, m, t)?.value;
        let q = delta_quadrature(eps, m, t, QUAD_NODES)?.value;
        let disc = (c - s).abs().max((c - q).abs()).max((s - q).abs());
        Ok(SurfaceRow {
            m,
            t,
            delta_closed: c,
            delta_spectral: s,
            delta_quadrature: q,
            max_discrepancy: disc,
        })
    })?;
    if ctx.check {
        let worst = rows.iter().map(|r| r.max_discrepancy).fold(0.0, f64::max);
        let tol = ctx.cfg.tolerances.discrepancy;
        return finish(CheckReport {
            command: "delta-surface",
            ok: worst < tol,
            detail: json!({"epsilon": eps, "points": rows.len(), "max_discrepancy": worst, "tolerance": tol}),
        });
    }
    write_csv(ctx, &rows)?;
    Ok(None)
}

#[derive(Serialize)]
struct ThresholdRow {
    #[serde(rename = "T")]
    t: f64,
    m_star: Option<f64>,
    asymptote: f64,
    ratio: Option<f64>,
    log_slope: Option<f64>,
    status: &'static str,
}

pub fn threshold(ctx: &Ctx) -> Outcome {
    let eps = ctx.epsilon(0.5);
    let ts = ctx.t_grid(GridSpec::values(&[5.0, 10.0, 20.0, 40.0, 80.0]))?;
    let rows = par_map(&ts, |_, &t| {
        let asymptote = (-(1.0 - eps) * t).exp();
        Ok(match threshold_m_star(eps, t) {
            Ok(r) => ThresholdRow {
                t,
                m_star: Some(r.m_star),
                asymptote: r.asymptote,
                ratio: Some(r.m_star / r.asymptote),
                log_slope: Some(r.log_slope),
                status: "ok",
            },
            Err(Error::NoRoot(_)) => ThresholdRow {
                t,
                m_star: None,
                asymptote,
                ratio: None,
                log_slope: None,
                status: "no_root",
            },
            Err(e) => return Err(e.into()),
        })
    })?;
    if ctx.check {
        // the threshold must be a root of Δ(ε, ·, T)
        let mut residual = 0.0f64;
        for r in &rows {
            if let Some(m) = r.m_star {
                residual = residual.max(delta_closed(eps, m, r.t)?.abs());
            }
        }
        let slope_err: Vec<f64> = rows
            .iter()
            .filter_map(|r| r.log_slope.map(|s| (s + 1.0 - eps).abs() / (1.0 - eps)))
            .collect();
        let tol = ctx.cfg.tolerances.discrepancy;
        return finish(CheckReport {
            command: "threshold",
            ok: residual < tol,
            detail: json!({"epsilon": eps, "max_root_residual": residual, "tolerance": tol,
                           "relative_slope_error": slope_err}),
        });
    }
    write_csv(ctx, &rows)?;
    Ok(None)
}

#[derive(Serialize)]
struct PdmpRow {
    epsilon: f64,
    m: f64,
    t: f64,
    seed: u64,
    environment: EnvironmentSignal,
    monte_carlo: GrowthReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadrature: Option<GrowthReport>,
}

/// Mean sojourn time if the signal is symmetric Markov switching.
fn markov_mean(sig: &EnvironmentSignal) -> Option<f64> {
    match sig.kind {
        EnvironmentKind::MarkovSwitch { rate } => Some(1.0 / rate),
        _ => None,
    }
}

pub fn pdmp(ctx: &Ctx) -> Outcome {
    let eps = ctx.epsilon(0.5);
    let ms = ctx.m_grid(GridSpec::values(&[ctx.m(0.2)]))?;
    let ts = ctx.t_grid(GridSpec::values(&[ctx.t(2.5)]))?;
    let horizon = ctx.horizon(1e5)?;
    let base = ctx.seed();
    let points: Vec<(f64, f64)> = ms.iter().flat_map(|&m| ts.iter().map(move |&t| (m, t))).collect();
    let rows = par_map(&points, |i, &(m, t)| {
        let sig = ctx
            .cfg
            .environment
            .clone()
            .unwrap_or_else(|| EnvironmentSignal::markov(1.0 / t));
        let seed = base.wrapping_add(i as u64);
        let run = simulate_switching(eps, m, &sig, horizon, seed)?;
        let quadrature = match markov_mean(&sig) {
            Some(mean) if m > 0.0 => Some(delta_pdmp_quadrature(eps, m, mean)?),
            _ => None,
        };
        Ok(PdmpRow {
            epsilon: eps,
            m,
            t: sig.mean_sojourn(),
            seed,
            environment: sig,
            monte_carlo: run.report,
            quadrature,
        })
    })?;
    if ctx.check {
        let sigmas = ctx.cfg.tolerances.sigmas;
        let z: Vec<f64> = rows
            .iter()
            .filter_map(|r| {
                let q = r.quadrature.as_ref()?;
                Some((r.monte_carlo.value - q.value).abs() / r.monte_carlo.stderr_or_zero().max(f64::MIN_POSITIVE))
            })
            .collect();
        let worst = z.iter().copied().fold(0.0, f64::max);
        return finish(CheckReport {
            command: "pdmp",
            ok: worst <= sigmas,
            detail: json!({"compared": z.len(), "max_z": worst, "sigmas": sigmas, "seed": base}),
        });
    }
    write_jsonl(ctx, &rows)?;
    Ok(None)
}

#[derive(Serialize)]
struct DensityRow {
    v: f64,
    rho: f64,
    rho_plus: f64,
    rho_minus: f64,
}

pub fn density(ctx: &Ctx) -> Outcome {
    let m = ctx.m(0.2);
    let t = ctx.t(2.5);
    let n = ctx.cfg.points.unwrap_or(2001);
    if n < 3 {
        return Err(CliError::Validation(format!("`points` must be >= 3, got {n}")));
    }
    let d = InvariantDensity::new(m, t)?;
    let rows: Vec<DensityRow> = d
        .graded_grid(n)
        .into_iter()
        .map(|v| {
            let (p, q) = d.rho_parts(v);
            DensityRow {
                v,
                rho: p + q,
                rho_plus: p,
                rho_minus: q,
            }
        })
        .collect();
    if ctx.check {
        let trapezoid: f64 = rows
            .windows(2)
            .map(|w| 0.5 * (w[1].v - w[0].v) * (w[0].rho + w[1].rho))
            .sum();
        let vp = d.v_plus();
        let mass = d.mass(-vp, vp);
        let tol = ctx.cfg.tolerances.normalization;
        return finish(CheckReport {
            command: "density",
            ok: (mass - 1.0).abs() < tol,
            detail: json!({
                "m": m, "t": t, "quadrature_mass": mass, "trapezoid_mass": trapezoid,
                "tail_exponent": d.tail_exponent, "bounded_at_endpoints": d.bounded_at_endpoints(),
                "tolerance": tol,
            }),
        });
    }
    write_csv(ctx, &rows)?;
    Ok(None)
}

#[derive(Serialize)]
struct SapeRow {
    epsilon: f64,
    m: f64,
    t: f64,
    eta: f64,
    seed: u64,
    estimate: GrowthReport,
    delta_closed: f64,
    bias: f64,
}

pub fn sape(ctx: &Ctx) -> Outcome {
    let eps = ctx.epsilon(0.5);
    let m = ctx.m(0.2);
    let t = ctx.t(4.0);
    let horizon = ctx.horizon(1e5)?;
    let base = ctx.seed();
    let etas = match &ctx.cfg.grid.eta {
        Some(g) => g.points("eta")?,
        None => vec![0.4, 0.2, 0.1, 0.05, 0.0],
    };
    let closed = delta_closed(eps, m, t)?;
    let rows = par_map(&etas, |i, &eta| {
        let seed = base.wrapping_add(i as u64);
        let estimate = simulate_sape(eps, m, t, eta, horizon, seed)?;
        Ok(SapeRow {
            epsilon: eps,
            m,
            t,
            eta,
            seed,
            bias: estimate.value - closed,
            estimate,
            delta_closed: closed,
        })
    })?;
    if ctx.check {
        // η = 0 is the periodic schedule and must reproduce the closed form
        let periodic = rows
            .iter()
            .filter(|r| r.eta == 0.0)
            .map(|r| r.bias.abs())
            .fold(None, |a: Option<f64>, b| Some(a.map_or(b, |a| a.max(b))));
        let tol = ctx.cfg.tolerances.discrepancy.max(1e-6);
        let biases: Vec<f64> = rows.iter().map(|r| r.bias).collect();
        return finish(CheckReport {
            command: "sape",
            ok: periodic.is_none_or(|e| e < tol),
            detail: json!({"periodic_error": periodic, "tolerance": tol, "biases": biases, "seed": base}),
        });
    }
    write_jsonl(ctx, &rows)?;
    Ok(None)
}

#[derive(Serialize)]
struct PersistenceRow {
    m: f64,
    delta: Option<f64>,
    predicted: Option<Verdict>,
    verdict: Verdict,
    min: f64,
    max: f64,
    final_max: f64,
    seed: u64,
}

pub fn persistence(ctx: &Ctx) -> Outcome {
    let eps = ctx.epsilon(0.1);
    let alpha = ctx.alpha(0.1);
    let t = ctx.t(5.0);
    let sig = ctx
        .cfg
        .environment
        .clone()
        .unwrap_or_else(|| EnvironmentSignal::periodic(t));
    let mean = sig.mean_sojourn();
    let horizon = ctx.horizon(2e3 * mean)?;
    let dt = ctx.dt(mean / 100.0)?;
    let x0 = ctx.cfg.x0.unwrap_or([1.0, 1.0]);
    let seed = ctx.seed();
    let mode = match sig.kind {
        EnvironmentKind::PeriodicSquare { .. } => Some(SwitchingMode::Periodic),
        EnvironmentKind::MarkovSwitch { .. } => Some(SwitchingMode::Markov),
        EnvironmentKind::RenewalSwitch { .. } => None,
    };
    let ms = ctx.m_grid(GridSpec::log(1e-4, 1e2, 15))?;
    let rows = par_map(&ms, |_, &m| {
        let tr = simulate_density_dependent(eps, alpha, m, &sig, x0, horizon, dt, seed)?;
        let v = classify_persistence(&tr, DEFAULT_EXTINCTION_THRESHOLD, DEFAULT_BURN_IN)?;
        let pred = mode.map(|md| predict_persistence(eps, m, mean, md)).transpose()?;
        Ok(PersistenceRow {
            m,
            delta: pred.map(|p| p.delta),
            predicted: pred.map(|p| p.verdict),
            verdict: v.verdict,
            min: v.evidence.min,
            max: v.evidence.max,
            final_max: v.evidence.final_max,
            seed,
        })
    })?;
    if ctx.check {
        let mismatches: Vec<f64> = rows
            .iter()
            .filter(|r| r.predicted.is_some_and(|p| p != r.verdict))
            .map(|r| r.m)
            .collect();
        let changes = rows.windows(2).filter(|w| w[0].predicted != w[1].predicted).count();
        return finish(CheckReport {
            command: "persistence",
            ok: mode.is_some() && mismatches.len() <= changes,
            detail: json!({"mismatched_m": mismatches, "sign_changes": changes, "seed": seed}),
        });
    }
    write_csv(ctx, &rows)?;
    Ok(None)
}

#[derive(Serialize)]
struct SirRow {
    m: f64,
    cumulative_cases: f64,
    growth_exponent: f64,
}

/// `<stem>_trajectory.csv` next to the sweep file.
fn trajectory_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sir");
    out.with_file_name(format!("{stem}_trajectory.csv"))
}

pub fn sir(ctx: &Ctx) -> Outcome {
    let holt: HoltParams = ctx.cfg.holt.unwrap_or_default();
    holt.validate()?;
    let horizon = ctx.horizon(1500.0)?;
    let dt = ctx.dt(0.05)?;
    let ms = ctx.m_grid(GridSpec::linear(0.0, 0.5, 51))?;
    if ctx.check {
        // linearization at the disease-free state against the rescaled (±1) map
        let e = holt.pm1_equivalent();
        let mut worst = 0.0f64;
        for &m in &ms {
            let direct = sir_linearized_growth(&holt, m)?;
            let pm1 = phase_shift_map(e.epsilon, m / e.scale, e.t, e.shift / e.t)?.lyapunov_exponent()?;
            worst = worst.max((direct - e.scale * pm1).abs());
        }
        let tol = ctx.cfg.tolerances.discrepancy;
        return finish(CheckReport {
            command: "sir",
            ok: worst < tol,
            detail: json!({"max_linearization_discrepancy": worst, "tolerance": tol}),
        });
    }
    let totals = cumulative_cases_sweep(&holt, &ms, horizon, dt)?;
    let rows = par_map(&totals, |_, &(m, total)| {
        Ok(SirRow {
            m,
            cumulative_cases: total,
            growth_exponent: sir_linearized_growth(&holt, m)?,
        })
    })?;
    write_csv(ctx, &rows)?;
    match ctx.out() {
        Some(out) => {
            let m = ctx.m(0.1);
            let stride = (1.0 / dt).round().max(1.0) as usize;
            let run = simulate_sir(&holt, m, horizon, dt, stride)?;
            let path = trajectory_path(out);
            let mut w = open_sink(Some(&path))?;
            run.trajectory
                .write_csv(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(&path, e))?;
            log::info!("trajectory at m = {m} written to {}", path.display());
        }
        None => log::info!("trajectory skipped: needs --out"),
    }
    Ok(None)
}

#[derive(Serialize)]
struct OrbitRow {
    m: f64,
    #[serde(rename = "T")]
    t: f64,
    p_plus_closed: f64,
    p_plus: f64,
    p_minus: f64,
    v_plus: f64,
    iterations: usize,
    discrepancy: f64,
}

pub fn orbit(ctx: &Ctx) -> Outcome {
    let ms = ctx.m_grid(GridSpec::log(0.01, 10.0, 10))?;
    let ts = ctx.t_grid(GridSpec::log(0.01, 10.0, 10))?;
    let points: Vec<(f64, f64)> = ms.iter().flat_map(|&m| ts.iter().map(move |&t| (m, t))).collect();
    let rows = par_map(&points, |_, &(m, t)| {
        let closed = p_plus(m, t)?;
        let o = periodic_orbit(m, t)?;
        Ok(OrbitRow {
            m,
            t,
            p_plus_closed: closed,
            p_plus: o.p_plus,
            p_minus: o.p_minus,
            v_plus: (1.0 / m).asinh(),
            iterations: o.iterations,
            discrepancy: (closed - o.p_plus).abs(),
        })
    })?;
    if ctx.check {
        let worst = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
        let tol = ctx.cfg.tolerances.discrepancy;
        return finish(CheckReport {
            command: "orbit",
            ok: worst < tol,
            detail: json!({"points": rows.len(), "max_discrepancy": worst, "tolerance": tol}),
        });
    }
    write_csv(ctx, &rows)?;
    Ok(None)
}
