//! Logistic switching with persistence classification, and the two-patch
//! SIR epidemic with periodic distancing.

use serde::{Deserialize, Serialize};

use crate::analytic::delta_closed;
use crate::error::{check, Result};
use crate::matrix::phase_shift_rates_map;
use crate::model::{Coords, EnvironmentSignal, ModelParams, Realization, Sign, Trajectory};
use crate::ode::{integrate_pieces, Piece, StepControl, SwitchedField};
use crate::pdmp::delta_pdmp_quadrature;
use crate::switched::PatchField;

/// States below this are treated as numerically extinct and the run ends.
const UNDERFLOW_STOP: f64 = 1e-250;

/// Logistic two-patch model x' = (u − ε)x − αx² + dispersal along a
/// realization of `env` over [0, horizon].
#[allow(clippy::too_many_arguments)]
pub fn simulate_density_dependent(
    epsilon: f64,
    alpha: f64,
    m: f64,
    env: &EnvironmentSignal,
    x0: [f64; 2],
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    check(alpha > 0.0, "alpha", alpha, "must be > 0")?;
    check(x0[0] > 0.0, "x0[0]", x0[0], "must be > 0")?;
    check(x0[1] > 0.0, "x0[1]", x0[1], "must be > 0")?;
    check(dt > 0.0, "dt", dt, "must be > 0")?;
    let p = ModelParams::new(epsilon, m, env.mean_sojourn())?.with_alpha(alpha);
    let field = PatchField::from_params(&p);
    let real = Realization::new(env, horizon, seed)?;
    let pieces: Vec<Piece<Sign>> = real
        .segments()
        .into_iter()
        .map(|(start, end, mode)| Piece { start, end, mode })
        .collect();
    let mut traj = Trajectory::new(Coords::X);
    traj.env_trace = real.switch_times();
    integrate_pieces(
        &field,
        &pieces,
        x0,
        &StepControl::new(dt),
        |x| x[0] > 0.0 && x[1] > 0.0 && x[0].is_finite() && x[1].is_finite(),
        |t, u, x| traj.push(t, x, u),
        |x| x[0].max(x[1]) < UNDERFLOW_STOP,
    )?;
    Ok(traj)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Extinct,
    Persistent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// Smallest component over the window after burn-in.
    pub min: f64,
    /// Largest component over the same window.
    pub max: f64,
    /// Largest component at the final time.
    pub final_max: f64,
    pub horizon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceVerdict {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

pub const DEFAULT_EXTINCTION_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_BURN_IN: f64 = 0.5;
/// Upper bound for "bounded" in the persistence test.
const BOUNDED: f64 = 1e12;

/// Extinct if every component is below `threshold` at the end (or the run
/// stopped early on underflow); Persistent if after the burn-in all
/// components stay in [10·threshold, bound]; Inconclusive otherwise.
pub fn classify_persistence(traj: &Trajectory, threshold: f64, burn_in: f64) -> Result<PersistenceVerdict> {
    check(threshold > 0.0, "threshold", threshold, "must be > 0")?;
    check((0.0..1.0).contains(&burn_in), "burn_in", burn_in, "must lie in [0, 1)")?;
    let horizon = traj.times.last().copied().unwrap_or(0.0);
    let final_max = traj.last_state().map_or(0.0, |s| s.iter().copied().fold(0.0, f64::max));
    let t0 = traj.times.first().copied().unwrap_or(0.0);
    let start = t0 + burn_in * (horizon - t0);
    let (mut min, mut max) = (f64::INFINITY, 0.0f64);
    for (t, s) in traj.rows() {
        if t >= start {
            for &x in s {
                min = min.min(x);
                max = max.max(x);
            }
        }
    }
    let verdict = if final_max < threshold {
        Verdict::Extinct
    } else if min >= 10.0 * threshold && max <= BOUNDED {
        Verdict::Persistent
    } else {
        Verdict::Inconclusive
    };
    Ok(PersistenceVerdict {
        verdict,
        evidence: Evidence {
            min,
            max,
            final_max,
            horizon,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchingMode {
    Periodic,
    Markov,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub verdict: Verdict,
    /// Δ (periodic) or bold Δ (Markov) of the linearization at 0.
    pub delta: f64,
}

/// Verdict from the sign of the linearized growth exponent; Δ ≤ 0 counts as
/// extinction.
pub fn predict_persistence(epsilon: f64, m: f64, t: f64, mode: SwitchingMode) -> Result<Prediction> {
    let delta = match mode {
        SwitchingMode::Periodic => delta_closed(epsilon, m, t)?,
        SwitchingMode::Markov if m == 0.0 => -2.0 * epsilon,
        SwitchingMode::Markov => delta_pdmp_quadrature(epsilon, m, t)?.value,
    };
    let verdict = if delta > 0.0 {
        Verdict::Persistent
    } else {
        Verdict::Extinct
    };
    Ok(Prediction { verdict, delta })
}

fn default_holt_t() -> f64 {
    30.0
}
fn default_shift() -> f64 {
    4.0
}

/// Two-patch SIR parameters, per day, with N normalized to 1. Each patch
/// alternates T days of normal contact (β_n, γ_n) with T days of distancing
/// (β_s, γ_s); patch 2 runs `phase_shift` days behind patch 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HoltParams {
    pub beta_n: f64,
    pub gamma_n: f64,
    pub mu: f64,
    pub beta_s: f64,
    pub gamma_s: f64,
    #[serde(default = "default_holt_t")]
    pub t: f64,
    #[serde(default = "default_shift")]
    pub phase_shift: f64,
    pub s0: f64,
    pub i1_0: f64,
    pub i2_0: f64,
}

impl Default for HoltParams {
    fn default() -> Self {
        HoltParams {
            beta_n: 0.1988,
            gamma_n: 0.098,
            mu: 0.002,
            beta_s: 0.0288,
            gamma_s: 0.128,
            t: 30.0,
            phase_shift: 4.0,
            s0: 1.0,
            i1_0: 1e-5,
            i2_0: 0.0,
        }
    }
}

/// Equivalent (±1) model of the linearization after rescaling time by
/// 1/(rate scale).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pm1Equivalent {
    pub epsilon: f64,
    pub t: f64,
    /// Phase shift in rescaled time.
    pub shift: f64,
    /// Factor k with rates ≈ k·(±1 − ε); migration maps to m/k.
    pub scale: f64,
}

impl HoltParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beta_n", self.beta_n),
            ("gamma_n", self.gamma_n),
            ("mu", self.mu),
            ("beta_s", self.beta_s),
            ("gamma_s", self.gamma_s),
            ("s0", self.s0),
            ("i1_0", self.i1_0),
            ("i2_0", self.i2_0),
        ] {
            check(v >= 0.0, name, v, "must be >= 0")?;
        }
        check(self.t > 0.0, "t", self.t, "must be > 0")?;
        check(
            (0.0..=self.t).contains(&self.phase_shift),
            "phase_shift",
            self.phase_shift,
            "must lie in [0, t]",
        )
    }

    /// Net growth rates of I near the disease-free state, (normal, distancing).
    pub fn net_rates(&self) -> (f64, f64) {
        (
            self.beta_n * self.s0 - (self.gamma_n + self.mu),
            self.beta_s * self.s0 - (self.gamma_s + self.mu),
        )
    }

    pub fn pm1_equivalent(&self) -> Pm1Equivalent {
        let (hi, lo) = self.net_rates();
        let scale = 0.5 * (hi - lo);
        let epsilon = -0.5 * (hi + lo) / scale;
        Pm1Equivalent {
            epsilon,
            t: self.t * scale,
            shift: self.phase_shift * scale,
            scale,
        }
    }

    fn normal(&self, patch: usize, t: f64) -> bool {
        let s = if patch == 0 { t } else { t - self.phase_shift };
        (s / self.t).floor().rem_euclid(2.0) == 0.0
    }
}

/// Contact regime of both patches (true = normal).
type SirMode = (bool, bool);

struct SirField {
    holt: HoltParams,
    m: f64,
}

impl SwitchedField<7> for SirField {
    type Mode = SirMode;

    /// State (S₁, I₁, S₂, I₂, C₁, C₂, R).
    fn rhs(&self, _t: f64, mode: SirMode, y: &[f64; 7]) -> [f64; 7] {
        let h = &self.holt;
        let rate = |normal: bool| {
            if normal {
                (h.beta_n, h.gamma_n)
            } else {
                (h.beta_s, h.gamma_s)
            }
        };
        let (b1, g1) = rate(mode.0);
        let (b2, g2) = rate(mode.1);
        let (s1, i1, s2, i2) = (y[0], y[1], y[2], y[3]);
        let inf1 = b1 * s1 * i1;
        let inf2 = b2 * s2 * i2;
        let rem1 = (g1 + h.mu) * i1;
        let rem2 = (g2 + h.mu) * i2;
        [
            -inf1 + self.m * (s2 - s1),
            inf1 - rem1 + self.m * (i2 - i1),
            -inf2 + self.m * (s1 - s2),
            inf2 - rem2 + self.m * (i1 - i2),
            inf1,
            inf2,
            rem1 + rem2,
        ]
    }
}

fn sir_pieces(holt: &HoltParams, horizon: f64) -> Vec<Piece<SirMode>> {
    let mut cuts = vec![0.0, horizon];
    let mut k = 0.0;
    while k * holt.t < horizon {
        for c in [k * holt.t, k * holt.t + holt.phase_shift] {
            if c > 0.0 && c < horizon {
                cuts.push(c);
            }
        }
        k += 1.0;
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            Piece {
                start: w[0],
                end: w[1],
                mode: (holt.normal(0, mid), holt.normal(1, mid)),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SirRun {
    /// (S₁, I₁, S₂, I₂).
    pub trajectory: Trajectory,
    /// Cumulative infections per patch, ∫βSᵢIᵢ dt.
    pub cumulative: (f64, f64),
    pub total: f64,
    /// Cumulative removals ∫(γ+μ)(I₁+I₂) dt.
    pub removed: f64,
}

/// RK4 with steps aligned to every regime change. Samples are recorded
/// every `stride` steps.
pub fn simulate_sir(holt: &HoltParams, m: f64, horizon: f64, dt: f64, stride: usize) -> Result<SirRun> {
    holt.validate()?;
    check(m >= 0.0, "m", m, "must be >= 0")?;
    check(horizon > 0.0, "horizon", horizon, "must be > 0")?;
    check(dt > 0.0, "dt", dt, "must be > 0")?;
    let field = SirField { holt: *holt, m };
    let pieces = sir_pieces(holt, horizon);
    let y0 = [holt.s0, holt.i1_0, holt.s0, holt.i2_0, 0.0, 0.0, 0.0];
    let mut traj = Trajectory::new(Coords::Sir);
    let out = integrate_pieces(
        &field,
        &pieces,
        y0,
        &StepControl::new(dt).with_stride(stride),
        |y| y.iter().all(|&x| x >= 0.0 && x.is_finite()),
        |t, mode: SirMode, y| traj.push(t, &y[..4], if mode.0 { Sign::Plus } else { Sign::Minus }),
        |_| false,
    )?;
    traj.env_trace = pieces.iter().skip(1).map(|p| p.start).collect();
    let y = out.y;
    Ok(SirRun {
        trajectory: traj,
        cumulative: (y[4], y[5]),
        total: y[4] + y[5],
        removed: y[6],
    })
}

/// Top Lyapunov exponent (per day) of the infected compartments linearized
/// at S = s0.
pub fn sir_linearized_growth(holt: &HoltParams, m: f64) -> Result<f64> {
    holt.validate()?;
    let (hi, lo) = holt.net_rates();
    phase_shift_rates_map(hi, lo, m, holt.t, holt.phase_shift / holt.t)?.lyapunov_exponent()
}

/// (m, total cumulative cases) for every m in `m_grid`.
pub fn cumulative_cases_sweep(holt: &HoltParams, m_grid: &[f64], horizon: f64, dt: f64) -> Result<Vec<(f64, f64)>> {
    check(!m_grid.is_empty(), "m_grid", 0.0, "must be nonempty")?;
    m_grid
        .iter()
        .map(|&m| Ok((m, simulate_sir(holt, m, horizon, dt, usize::MAX)?.total)))
        .collect()
}
