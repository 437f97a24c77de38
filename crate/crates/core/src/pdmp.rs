//! Markov and renewal switching: event-driven simulation with the exact
//! V-flow, the explicit invariant density of V and its quadrature.

use crate::error::{check, Error, Result};
use crate::model::{
    seed_rng, Coords, EnvironmentSignal, GrowthReport, Method, Sign, SojournDistribution, Switch, SwitchStream,
    Trajectory,
};
use crate::quadrature::GaussLegendre;
use crate::stats::RatioRecords;
use crate::switched::{growth_integrand, ScalarFlow};

pub const BATCHES: usize = 32;
pub const BURN_IN_FRACTION: f64 = 0.05;

/// Stationary density of V under Markov switching with mean sojourn T,
/// ρ = ρ⁺ + ρ⁻ on (V⁻, V⁺), with
/// ρ^h(v) = C/|F^h(v)| · [(e^{V⁺}−e^v)/(e^v+e^{V⁻}) · (e^v−e^{V⁻})/(e^v+e^{V⁺})]^κ,
/// κ = 1/(2T√(1+m²)).
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantDensity {
    pub m: f64,
    pub t: f64,
    /// C, scaled so that the bracket term equals 1 at v = 0.
    pub normalizer: f64,
    /// κ − 1: ρ behaves like (e^{V⁺} − e^v)^{κ−1} near V⁺.
    pub tail_exponent: f64,
    /// Relative change of the normalization between the last two
    /// quadrature refinements.
    pub achieved_tolerance: f64,
    kappa: f64,
    v_plus: f64,
    /// e^{V⁺}
    e: f64,
    /// e^{V⁻}
    ei: f64,
    /// κ ln b(0), subtracted in the exponent to keep large κ in range.
    log_ref: f64,
    gl: GaussLegendre,
}

const TARGET_TOL: f64 = 1e-10;
const MAX_TOL: f64 = 1e-8;

impl InvariantDensity {
    pub fn new(m: f64, t: f64) -> Result<Self> {
        check(m > 0.0, "m", m, "must be > 0")?;
        check(t > 0.0, "t", t, "must be > 0")?;
        let a = m.hypot(1.0);
        let kappa = 1.0 / (2.0 * t * a);
        let v_plus = (1.0 / m).asinh();
        let mut d = InvariantDensity {
            m,
            t,
            normalizer: 1.0,
            tail_exponent: kappa - 1.0,
            achieved_tolerance: f64::NAN,
            kappa,
            v_plus,
            e: v_plus.exp(),
            ei: (-v_plus).exp(),
            log_ref: 0.0,
            gl: GaussLegendre::new(16),
        };
        d.log_ref = d.kappa * d.log_base(0.0);
        let mut prev = 2.0 * d.half_integral(&|_| 1.0, 0.0, v_plus, 1);
        let mut achieved = f64::INFINITY;
        for res in [2, 4, 8] {
            let z = 2.0 * d.half_integral(&|_| 1.0, 0.0, v_plus, res);
            achieved = ((z - prev) / z).abs();
            prev = z;
            if achieved <= TARGET_TOL {
                break;
            }
        }
        if !(achieved <= MAX_TOL) {
            return Err(Error::QuadratureNonConvergence { achieved });
        }
        d.normalizer = 1.0 / prev;
        d.achieved_tolerance = achieved;
        Ok(d)
    }

    pub fn v_plus(&self) -> f64 {
        self.v_plus
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// ρ stays bounded at V^± iff 2T√(1+m²) ≤ 1.
    pub fn bounded_at_endpoints(&self) -> bool {
        2.0 * self.t * self.m.hypot(1.0) <= 1.0
    }

    /// (ρ⁺(v), ρ⁻(v)), zero outside (V⁻, V⁺).
    pub fn rho_parts(&self, v: f64) -> (f64, f64) {
        if !(v > -self.v_plus && v < self.v_plus) {
            return (0.0, 0.0);
        }
        let (rp, rm) = self.raw_parts(v);
        (self.normalizer * rp, self.normalizer * rm)
    }

    pub fn rho(&self, v: f64) -> f64 {
        let (p, m) = self.rho_parts(v);
        p + m
    }

    /// Unnormalized parts, in v. Differences to the endpoints are formed with
    /// expm1 so that both ends keep full relative precision.
    fn raw_parts(&self, v: f64) -> (f64, f64) {
        let ev = v.exp();
        let up = (self.v_plus - v).exp_m1(); // e^{V⁺−v} − 1
        let dn = (v + self.v_plus).exp_m1(); // e^{v−V⁻} − 1
        let bk = (self.kappa * self.log_base(v) - self.log_ref).exp();
        let fp = self.m * up * (ev + self.ei);
        let fm = self.m * dn * (1.0 / ev + self.ei);
        (bk / fp, bk / fm)
    }

    /// ln of the bracket raised to κ in the density.
    fn log_base(&self, v: f64) -> f64 {
        let ev = v.exp();
        let up = (self.v_plus - v).exp_m1();
        let dn = (v + self.v_plus).exp_m1();
        ((ev * up) / (ev + self.ei)).ln() + ((self.ei * dn) / (ev + self.e)).ln()
    }

    /// ∫_a^b h(v)(ρ⁺+ρ⁻)(v) dv without normalization, 0 ≤ a < b ≤ V⁺.
    /// Plain v-quadrature away from V⁺, then w = ln(e^{V⁺} − e^v) on the last
    /// stretch, with the integrable singularity's far tail in closed form.
    fn half_integral(&self, h: &dyn Fn(f64) -> f64, a: f64, b: f64, res: usize) -> f64 {
        let vp = self.v_plus;
        let cut = vp - 1.0f64.min(0.5 * vp);
        let mut total = 0.0;

        if a < cut {
            let hi = b.min(cut);
            let width = 0.25f64.min(0.25 / self.kappa.sqrt()).min(vp / 8.0);
            let panels = ((hi - a) / width).ceil().max(1.0) as usize * res;
            total += self.gl.integrate_composite(a, hi, panels, |v| {
                let (p, m) = self.raw_parts(v);
                h(v) * (p + m)
            });
        }

        if b > cut {
            let lo = a.max(cut);
            let w_top = lo + (vp - lo).exp_m1().ln();
            let open_end = b >= vp;
            let w_bot = if open_end {
                w_top - 45.0 / self.kappa.max(1.0)
            } else {
                b + (vp - b).exp_m1().ln()
            };
            let k = self.kappa;
            let (e, ei) = (self.e, self.ei);
            let integrand = |w: f64| {
                let y = w.exp();
                let p = e - y;
                let v = vp + (-y / e).ln_1p();
                let q = (p - ei) / ((p + ei) * (p + e));
                let common = (k * (w + q.ln()) - self.log_ref).exp();
                let fm = self.m * (v + vp).exp_m1() * (1.0 / p + ei);
                h(v) * (common / (self.m * (p + ei)) + common * (y / p) / fm)
            };
            let panels = 96 * res;
            total += self.gl.integrate_composite(w_bot, w_top, panels, integrand);
            if open_end {
                let qe = (e - ei) / ((e + ei) * 2.0 * e);
                let hv = h(vp);
                let qk = (k * (qe.ln() + w_bot) - self.log_ref).exp();
                let plus = qk / (self.m * (e + ei)) / k;
                let minus = qk / (e * 4.0) * w_bot.exp() / (k + 1.0);
                total += hv * (plus + minus);
            }
        }
        total
    }

    /// ∫ f ρ over (V⁻, V⁺).
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        let sym = |v: f64| f(v) + f(-v);
        self.normalizer * self.half_integral(&sym, 0.0, self.v_plus, 2)
    }

    /// Probability of (a, b).
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let vp = self.v_plus;
        let (a, b) = (a.max(-vp), b.min(vp));
        if a >= b {
            return 0.0;
        }
        let one = |_: f64| 1.0;
        let mut s = 0.0;
        if b > 0.0 {
            s += self.half_integral(&one, a.max(0.0), b, 2);
        }
        if a < 0.0 {
            s += self.half_integral(&one, (-b).max(0.0), -a, 2);
        }
        self.normalizer * s
    }

    /// Probabilities of `bins` equal bins on (V⁻, V⁺).
    pub fn bin_masses(&self, bins: usize) -> Vec<f64> {
        let vp = self.v_plus;
        let w = 2.0 * vp / bins as f64;
        (0..bins)
            .map(|i| {
                let lo = -vp + i as f64 * w;
                let hi = if i + 1 == bins { vp } else { lo + w };
                self.mass(lo, hi)
            })
            .collect()
    }

    /// Grid on (V⁻, V⁺) for tabulating ρ: `n` uniform points plus `n`
    /// points whose distance to the nearer endpoint shrinks geometrically
    /// down to about 1e−15·V⁺. Sorted, endpoints excluded.
    pub fn graded_grid(&self, n: usize) -> Vec<f64> {
        let vp = self.v_plus;
        let half = (n / 2).max(2);
        let mut pos: Vec<f64> = (0..half).map(|i| vp * i as f64 / half as f64).collect();
        pos.extend((1..=half).map(|j| vp - vp * 10f64.powf(-15.0 * j as f64 / half as f64)));
        pos.retain(|&v| (0.0..vp).contains(&v));
        pos.sort_by(f64::total_cmp);
        pos.dedup();
        let mut out: Vec<f64> = pos.iter().rev().filter(|&&v| v > 0.0).map(|&v| -v).collect();
        out.extend(pos);
        out
    }
}

/// Bold Δ: the stationary average of g(V) = 2(m cosh V − m − ε).
pub fn delta_pdmp_quadrature(epsilon: f64, m: f64, t: f64) -> Result<GrowthReport> {
    check((0.0..=1.0).contains(&epsilon), "epsilon", epsilon, "must lie in [0, 1]")?;
    let d = InvariantDensity::new(m, t)?;
    let value = d.expectation(|v| growth_integrand(epsilon, m, v));
    Ok(GrowthReport::exact(value, Method::DensityQuadrature))
}

/// One inter-switch piece of the V process.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub duration: f64,
    pub u: Sign,
    pub v0: f64,
    pub v1: f64,
    /// Whether the segment ends at a switch (false for the final piece cut
    /// by the horizon).
    pub ends_in_switch: bool,
}

/// Walks the V process through `sig` on [0, horizon], calling `visit` on
/// every constant-environment segment.
pub fn run_segments<F: FnMut(&Segment) -> Result<()>>(
    m: f64,
    sig: &EnvironmentSignal,
    horizon: f64,
    seed: u64,
    v0: f64,
    visit: F,
) -> Result<()> {
    walk_segments(m, sig.initial_state, sig.switches(seed)?, horizon, v0, visit)
}

fn walk_segments<I, F>(m: f64, u0: Sign, switches: I, horizon: f64, v0: f64, mut visit: F) -> Result<()>
where
    I: IntoIterator<Item = Switch>,
    F: FnMut(&Segment) -> Result<()>,
{
    check(m >= 0.0, "m", m, "must be >= 0")?;
    check(horizon > 0.0, "horizon", horizon, "must be > 0")?;
    let flows = [ScalarFlow::new(m, Sign::Plus), ScalarFlow::new(m, Sign::Minus)];
    let mut t = 0.0;
    let mut v = v0;
    let mut u = u0;
    for s in switches {
        let end = s.time.min(horizon);
        let dur = end - t;
        let v1 = flows[(u == Sign::Minus) as usize].advance(v, dur);
        visit(&Segment {
            t0: t,
            duration: dur,
            u,
            v0: v,
            v1,
            ends_in_switch: s.time <= horizon,
        })?;
        if s.time >= horizon {
            break;
        }
        t = s.time;
        v = v1;
        u = s.state;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdmpRun {
    /// (U, V) at t = 0, at every switch and at the horizon.
    pub trajectory: Trajectory,
    pub report: GrowthReport,
    /// U(horizon)/horizon.
    pub raw_average: f64,
}

/// Event-driven simulation of (U, V) under an arbitrary switching signal.
/// V follows the exact flow; U integrates g(V) per segment by composite
/// Gauss–Legendre. The estimate is a ratio over complete environment cycles
/// (a + sojourn and the following − sojourn) after a 5% burn-in, with a
/// 32-batch batch-means standard error.
pub fn simulate_switching(epsilon: f64, m: f64, sig: &EnvironmentSignal, horizon: f64, seed: u64) -> Result<PdmpRun> {
    let stream = sig.switches(seed)?;
    simulate_stream(epsilon, m, sig, stream, horizon, seed)
}

fn simulate_stream(
    epsilon: f64,
    m: f64,
    sig: &EnvironmentSignal,
    stream: SwitchStream,
    horizon: f64,
    seed: u64,
) -> Result<PdmpRun> {
    check((0.0..=1.0).contains(&epsilon), "epsilon", epsilon, "must lie in [0, 1]")?;
    check(m > 0.0, "m", m, "must be > 0")?;
    sig.validate()?;
    let min_h = 20.0 * sig.mean_sojourn();
    check(
        horizon >= min_h,
        "horizon",
        horizon,
        "must be at least 20 mean sojourns",
    )?;

    let flows = [ScalarFlow::new(m, Sign::Plus), ScalarFlow::new(m, Sign::Minus)];
    let a = flows[0].a;
    let gl = GaussLegendre::new(8);
    let vp = (1.0 / m).asinh();
    let burn = BURN_IN_FRACTION * horizon;

    let mut traj = Trajectory::new(Coords::UV);
    traj.push(0.0, &[0.0, 0.0], sig.initial_state);
    let mut big_u = 0.0;
    let mut records = RatioRecords::new();
    let mut cycle: Option<(f64, f64)> = None; // (start time, U at start)
    let mut inside = true;

    walk_segments(m, sig.initial_state, stream, horizon, 0.0, |seg| {
        let flow = &flows[(seg.u == Sign::Minus) as usize];
        let panels = (seg.duration * a).ceil().max(1.0) as usize;
        let du = gl.integrate_composite(0.0, seg.duration, panels, |s| {
            growth_integrand(epsilon, m, flow.advance(seg.v0, s))
        });
        if seg.u == Sign::Plus && seg.t0 >= burn {
            cycle = Some((seg.t0, big_u));
        }
        big_u += du;
        let t1 = seg.t0 + seg.duration;
        if seg.u == Sign::Minus && seg.ends_in_switch {
            if let Some((c0, u0)) = cycle.take() {
                records.push(big_u - u0, t1 - c0);
            }
        }
        if inside && seg.v1.abs() > vp + 1e-9 {
            inside = false;
        }
        if !inside {
            return Err(Error::InvariantViolation(format!(
                "V = {} left [V-, V+] at t = {t1}",
                seg.v1
            )));
        }
        let next_u = if seg.ends_in_switch { seg.u.flip() } else { seg.u };
        if t1 > traj.times[traj.len() - 1] {
            traj.push(t1, &[big_u, seg.v1], next_u);
        }
        Ok(())
    })?;
    traj.env_trace = traj.times[1..traj.len() - 1].to_vec();
    let est = records.estimate(BATCHES).ok_or(Error::InvalidParameter {
        name: "horizon",
        value: horizon,
        reason: "too short: fewer than two complete cycles after burn-in",
    })?;
    Ok(PdmpRun {
        trajectory: traj,
        report: GrowthReport::monte_carlo(est.value, est.stderr, horizon, est.records as u64, seed),
        raw_average: big_u / horizon,
    })
}

/// Markov switching at rate σ.
pub fn simulate_pdmp(epsilon: f64, m: f64, rate: f64, horizon: f64, seed: u64) -> Result<(Trajectory, GrowthReport)> {
    check(rate > 0.0, "rate", rate, "must be > 0")?;
    let run = simulate_switching(epsilon, m, &EnvironmentSignal::markov(rate), horizon, seed)?;
    Ok((run.trajectory, run.report))
}

/// Renewal switching with uniform sojourns on [T − η, T + η] (exactly
/// periodic for η = 0).
pub fn simulate_sape(epsilon: f64, m: f64, t: f64, eta: f64, horizon: f64, seed: u64) -> Result<GrowthReport> {
    let d = if eta == 0.0 {
        SojournDistribution::Dirac { t }
    } else {
        SojournDistribution::Uniform { t, eta }
    };
    let sig = EnvironmentSignal::renewal(d, d);
    Ok(simulate_switching(epsilon, m, &sig, horizon, seed)?.report)
}

/// Top Lyapunov exponent Λ from the projective system
/// θ' = 2uθ(1−θ) + m(1−2θ), (ln ρ)' = u(2θ−1) − ε, θ = x₁/(x₁+x₂),
/// by RK4 between switches.
pub fn lyapunov_polar(epsilon: f64, m: f64, rate: f64, horizon: f64, seed: u64) -> Result<GrowthReport> {
    check((0.0..=1.0).contains(&epsilon), "epsilon", epsilon, "must lie in [0, 1]")?;
    check(m >= 0.0, "m", m, "must be >= 0")?;
    check(rate > 0.0, "rate", rate, "must be > 0")?;
    check(horizon >= 20.0 / rate, "horizon", horizon, "must be at least 20/rate")?;
    const H_MAX: f64 = 0.02;
    let sig = EnvironmentSignal::markov(rate);
    let burn = BURN_IN_FRACTION * horizon;
    let rhs = |u: f64, th: f64| {
        (
            2.0 * u * th * (1.0 - th) + m * (1.0 - 2.0 * th),
            u * (2.0 * th - 1.0) - epsilon,
        )
    };

    let mut theta = 0.5;
    let mut log_norm = 0.0;
    let mut records = RatioRecords::new();
    let mut cycle: Option<(f64, f64)> = None;
    run_segments(m, &sig, horizon, seed, 0.0, |seg| {
        if seg.u == Sign::Plus && seg.t0 >= burn {
            cycle = Some((seg.t0, log_norm));
        }
        let u = seg.u.value();
        let n = (seg.duration / H_MAX).ceil().max(1.0) as usize;
        let h = seg.duration / n as f64;
        for _ in 0..n {
            let (k1, l1) = rhs(u, theta);
            let (k2, l2) = rhs(u, theta + 0.5 * h * k1);
            let (k3, l3) = rhs(u, theta + 0.5 * h * k2);
            let (k4, l4) = rhs(u, theta + h * k3);
            theta += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            log_norm += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        }
        if !(-1e-9..=1.0 + 1e-9).contains(&theta) {
            return Err(Error::InvariantViolation(format!(
                "theta = {theta} left [0, 1] at t = {}",
                seg.t0 + seg.duration
            )));
        }
        if seg.u == Sign::Minus && seg.ends_in_switch {
            if let Some((c0, l0)) = cycle.take() {
                records.push(log_norm - l0, seg.t0 + seg.duration - c0);
            }
        }
        Ok(())
    })?;
    let est = records.estimate(BATCHES).ok_or(Error::InvalidParameter {
        name: "horizon",
        value: horizon,
        reason: "too short: fewer than two complete cycles after burn-in",
    })?;
    Ok(GrowthReport::monte_carlo(
        est.value,
        est.stderr,
        horizon,
        est.records as u64,
        seed,
    ))
}

/// Equal-width histogram on (lo, hi).
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// Samples falling outside (lo, hi).
    pub outside: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(hi > lo && bins > 0);
        Histogram {
            lo,
            hi,
            counts: vec![0; bins],
            outside: 0,
        }
    }

    pub fn from_samples(samples: impl IntoIterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Self {
        let mut h = Histogram::new(lo, hi, bins);
        for x in samples {
            h.add(x);
        }
        h
    }

    pub fn add(&mut self, x: f64) {
        let n = self.counts.len();
        let f = (x - self.lo) / (self.hi - self.lo);
        if (0.0..=1.0).contains(&f) {
            let i = ((f * n as f64) as usize).min(n - 1);
            self.counts[i] += 1;
        } else {
            self.outside += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.counts.len();
        (0..=n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64)
            .collect()
    }

    /// Σ |p̂ᵢ − pᵢ| against reference bin probabilities.
    pub fn l1_distance(&self, reference: &[f64]) -> f64 {
        assert_eq!(reference.len(), self.counts.len());
        let out = self.outside as f64 / self.total().max(1) as f64;
        self.probabilities()
            .iter()
            .zip(reference)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
            + out
    }
}

/// Occupation-time histogram of V under Markov switching at rate 1/T,
/// sampled every `dt` after a 5% burn-in, on `bins` bins over (V⁻, V⁺).
pub fn occupation_histogram(m: f64, t: f64, horizon: f64, dt: f64, bins: usize, seed: u64) -> Result<Histogram> {
    check(m > 0.0, "m", m, "must be > 0")?;
    check(t > 0.0, "t", t, "must be > 0")?;
    check(dt > 0.0, "dt", dt, "must be > 0")?;
    check(bins > 0, "bins", bins as f64, "must be > 0")?;
    let vp = (1.0 / m).asinh();
    let flows = [ScalarFlow::new(m, Sign::Plus), ScalarFlow::new(m, Sign::Minus)];
    let burn = BURN_IN_FRACTION * horizon;
    let mut hist = Histogram::new(-vp, vp, bins);
    let mut k = (burn / dt).ceil() as u64;
    run_segments(m, &EnvironmentSignal::markov(1.0 / t), horizon, seed, 0.0, |seg| {
        let flow = &flows[(seg.u == Sign::Minus) as usize];
        let end = seg.t0 + seg.duration;
        loop {
            let ts = k as f64 * dt;
            if ts >= end || ts > horizon {
                break;
            }
            if ts >= seg.t0 {
                hist.add(flow.advance(seg.v0, ts - seg.t0));
            }
            k += 1;
        }
        Ok(())
    })?;
    Ok(hist)
}

/// Independent replica estimates of bold Δ under Markov switching; replica
/// r draws its switches from stream r + 1 of the master seed.
pub fn replica_estimates(
    epsilon: f64,
    m: f64,
    rate: f64,
    horizon: f64,
    seed: u64,
    replicas: u64,
) -> Result<Vec<GrowthReport>> {
    let sig = EnvironmentSignal::markov(rate);
    (0..replicas)
        .map(|r| {
            let stream = sig.switches_with_rng(seed_rng(seed, r + 1))?;
            Ok(simulate_stream(epsilon, m, &sig, stream, horizon, seed)?.report)
        })
        .collect()
}
