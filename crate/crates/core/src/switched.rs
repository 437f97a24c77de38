//! Deterministic switched dynamics: the exact scalar V-flow, the periodic
//! orbit, Δ by orbit quadrature and trajectory integration.

use crate::error::{check, Error, Result};
use crate::model::{Coords, GrowthReport, Method, ModelParams, Realization, Sign, SquareRates, Trajectory};
use crate::ode::{integrate_pieces, Piece, StepControl, SwitchedField};
use crate::quadrature::GaussLegendre;
use crate::roots::bisect;

/// Exact flow of dV/dt = 2(u − m sinh V) for fixed u and m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarFlow {
    pub m: f64,
    pub sign: Sign,
    /// √(1+m²)
    pub a: f64,
    /// e^{V⁻} = e^{−V⁺}
    em: f64,
    /// e^{V⁺} + e^{V⁻} = 2A/m
    k: f64,
}

impl ScalarFlow {
    pub fn new(m: f64, sign: Sign) -> Self {
        let a = m.hypot(1.0);
        let (em, k) = if m > 0.0 {
            ((-(1.0 / m).asinh()).exp(), 2.0 * a / m)
        } else {
            (0.0, f64::INFINITY)
        };
        ScalarFlow { m, sign, a, em, k }
    }

    /// V after time `t` from `v0`.
    pub fn advance(&self, v0: f64, t: f64) -> f64 {
        match self.sign {
            Sign::Plus => self.advance_plus(v0, t),
            Sign::Minus => -self.advance_plus(-v0, t),
        }
    }

    /// u = +1. With y = e^V the equation is the Riccati equation
    /// y' = −m(y − y₊)(y − y₋), y₊ = e^{V⁺}, y₋ = −e^{V⁻}, whose solution is
    /// (y − y₊)/(y − y₋) = r₀e^{−2At}.
    fn advance_plus(&self, v0: f64, t: f64) -> f64 {
        if self.m == 0.0 {
            return v0 + 2.0 * t;
        }
        let d0 = v0.exp() + self.em;
        // 1 − r(t) as a sum of nonnegative terms
        let e = (-2.0 * self.a * t).exp();
        let one_minus_r = -(-2.0 * self.a * t).exp_m1() + e * self.k / d0;
        (self.k / one_minus_r - self.em).ln()
    }

    /// Right-hand side 2(u − m sinh V).
    pub fn velocity(&self, v: f64) -> f64 {
        2.0 * (self.sign.value() - self.m * v.sinh())
    }
}

pub fn flow_exact(v0: f64, sign: Sign, m: f64, t: f64) -> f64 {
    ScalarFlow::new(m, sign).advance(v0, t)
}

/// Φ(V): one full period, T under u = +1 then T under u = −1.
pub fn period_map_v(v: f64, m: f64, t: f64) -> f64 {
    let up = flow_exact(v, Sign::Plus, m, t);
    flow_exact(up, Sign::Minus, m, t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicOrbit {
    pub p_minus: f64,
    pub p_plus: f64,
    /// Fixed point of Φ (value at the start of a + phase).
    pub v_e: f64,
    /// Evaluations of Φ used.
    pub iterations: usize,
}

/// Periodic V-orbit as the fixed point of Φ. Φ(V) − V is decreasing and
/// changes sign on [V⁻ − 1, V⁺ + 1] (Φ maps this into (V⁻, V⁺)), so the fixed point is bracketed and found by
/// bisection to full precision. (Plain iteration contracts at rate
/// 1 − O(mT) and stalls for short periods.)
pub fn periodic_orbit(m: f64, t: f64) -> Result<PeriodicOrbit> {
    check(m > 0.0, "m", m, "must be > 0")?;
    check(t > 0.0, "t", t, "must be > 0")?;
    let vp = (1.0 / m).asinh();
    let mut evals = 0;
    let v_e = bisect(
        |v| {
            evals += 1;
            period_map_v(v, m, t) - v
        },
        -vp - 1.0,
        vp + 1.0,
        0.0,
    )?;
    finish_orbit(v_e, m, t, evals)
}

fn finish_orbit(v_e: f64, m: f64, t: f64, iterations: usize) -> Result<PeriodicOrbit> {
    let p_plus = flow_exact(v_e, Sign::Plus, m, t);
    if (v_e + p_plus).abs() > 1e-9 {
        return Err(Error::InvariantViolation(format!(
            "periodic orbit not symmetric: P- = {v_e}, P+ = {p_plus}"
        )));
    }
    Ok(PeriodicOrbit {
        p_minus: v_e,
        p_plus,
        v_e,
        iterations,
    })
}

/// g(V) = 2(m cosh V − m − ε), written to avoid cancellation near V = 0.
pub fn growth_integrand(epsilon: f64, m: f64, v: f64) -> f64 {
    let s = (0.5 * v).sinh();
    4.0 * m * s * s - 2.0 * epsilon
}

/// Δ as the orbit average of g(V), by composite Gauss–Legendre with
/// `n_nodes` per panel and panels no longer than 1/√(1+m²).
pub fn delta_quadrature(epsilon: f64, m: f64, t: f64, n_nodes: usize) -> Result<GrowthReport> {
    check((0.0..=1.0).contains(&epsilon), "epsilon", epsilon, "must lie in [0, 1]")?;
    check(m >= 0.0, "m", m, "must be >= 0")?;
    check(t > 0.0, "t", t, "must be > 0")?;
    check(n_nodes >= 16, "n_nodes", n_nodes as f64, "must be >= 16")?;
    if m == 0.0 {
        return Ok(GrowthReport::exact(-2.0 * epsilon, Method::OrbitQuadrature));
    }
    let orbit = periodic_orbit(m, t)?;
    let flow = ScalarFlow::new(m, Sign::Plus);
    let gl = GaussLegendre::new(n_nodes);
    let panels = (t * flow.a).ceil().max(1.0) as usize;
    // the u = −1 half mirrors the u = +1 half and g is even
    let integral = gl.integrate_composite(0.0, t, panels, |s| {
        growth_integrand(epsilon, m, flow.advance(orbit.v_e, s))
    });
    Ok(GrowthReport::exact(integral / t, Method::OrbitQuadrature))
}

/// Two-patch linear (α = 0) or logistic (α > 0) field in X coordinates.
/// Dispersal leaves patch 1 at rate 2m(1−β) and patch 2 at rate 2mβ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchField {
    pub rates: SquareRates,
    pub m: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl PatchField {
    pub fn from_params(p: &ModelParams) -> Self {
        PatchField {
            rates: p.patch_rates(),
            m: p.m,
            beta: p.beta_disp,
            alpha: p.alpha,
        }
    }

    fn outflow(&self) -> (f64, f64) {
        (2.0 * self.m * (1.0 - self.beta), 2.0 * self.m * self.beta)
    }

    /// ln√(β/(1−β)): the offset between ln(x₁/x₂) and V.
    pub fn v_shift(&self) -> f64 {
        0.5 * (self.beta / (1.0 - self.beta)).ln()
    }

    /// (dU/dt, dV/dt) in closed form at V (α = 0).
    pub fn uv_rates(&self, u: Sign, v: f64) -> (f64, f64) {
        let (a1, a2) = self.rates.at(u);
        if self.m == 0.0 {
            return (a1 + a2, a1 - a2);
        }
        let mm = 2.0 * self.m;
        let c = (self.beta * (1.0 - self.beta)).sqrt();
        let s = (0.5 * v).sinh();
        let du = a1 + a2 + mm * (2.0 * c - 1.0) + 2.0 * mm * c * (2.0 * s * s);
        let dv = a1 - a2 - mm * (1.0 - 2.0 * self.beta) - 2.0 * mm * c * v.sinh();
        (du, dv)
    }
}

impl SwitchedField<2> for PatchField {
    type Mode = Sign;

    fn rhs(&self, _t: f64, u: Sign, x: &[f64; 2]) -> [f64; 2] {
        let (a1, a2) = self.rates.at(u);
        let (o1, o2) = self.outflow();
        [
            a1 * x[0] - self.alpha * x[0] * x[0] - o1 * x[0] + o2 * x[1],
            a2 * x[1] - self.alpha * x[1] * x[1] - o2 * x[1] + o1 * x[0],
        ]
    }
}

/// The same linear field in (U, V).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchFieldUV(pub PatchField);

impl SwitchedField<2> for PatchFieldUV {
    type Mode = Sign;

    fn rhs(&self, _t: f64, u: Sign, y: &[f64; 2]) -> [f64; 2] {
        let (du, dv) = self.0.uv_rates(u, y[1]);
        [du, dv]
    }
}

/// Scalar V equation for a fixed u; used to cross-check the exact flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VField {
    pub m: f64,
}

impl SwitchedField<1> for VField {
    type Mode = Sign;

    fn rhs(&self, _t: f64, u: Sign, v: &[f64; 1]) -> [f64; 1] {
        [2.0 * (u.value() - self.m * v[0].sinh())]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrateOptions {
    /// Step size; defaults to T/200.
    pub dt: Option<f64>,
    pub coords: Coords,
    pub stride: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            dt: None,
            coords: Coords::X,
            stride: 1,
        }
    }
}

impl IntegrateOptions {
    pub fn uv() -> Self {
        IntegrateOptions {
            coords: Coords::UV,
            ..Default::default()
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }
}

/// X coordinates are abandoned for (U, V) above this size.
pub const X_OVERFLOW_GUARD: f64 = 1e150;

pub(crate) fn pieces_of(env: &Realization) -> Vec<Piece<Sign>> {
    env.segments()
        .into_iter()
        .map(|(start, end, mode)| Piece { start, end, mode })
        .collect()
}

/// RK4 integration of the two-patch system along a realized environment.
/// In X coordinates the run switches to (U, V) once max(x) exceeds
/// [`X_OVERFLOW_GUARD`] and the whole trajectory is then returned in (U, V).
pub fn integrate_switched(
    p: &ModelParams,
    env: &Realization,
    x0: [f64; 2],
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    p.validate()?;
    check(x0[0] > 0.0, "x0[0]", x0[0], "must be > 0")?;
    check(x0[1] > 0.0, "x0[1]", x0[1], "must be > 0")?;
    let dt = opts.dt.unwrap_or(p.half_period / 200.0);
    check(dt > 0.0, "dt", dt, "must be > 0")?;
    if opts.coords == Coords::Sir {
        return Err(Error::InvalidParameter {
            name: "coords",
            value: f64::NAN,
            reason: "SIR coordinates do not apply to the two-patch model",
        });
    }
    let field = PatchField::from_params(p);
    let ctl = StepControl::new(dt).with_stride(opts.stride);
    let pieces = pieces_of(env);
    let shift = field.v_shift();
    let to_uv = |x: &[f64; 2]| {
        let (l1, l2) = (x[0].ln(), x[1].ln());
        [l1 + l2, l1 - l2 - shift]
    };

    let mut traj = Trajectory::new(opts.coords);
    traj.env_trace = env.switch_times();
    if opts.coords == Coords::UV {
        integrate_uv(&field, &pieces, to_uv(&x0), &ctl, &mut traj)?;
        return Ok(traj);
    }

    let out = integrate_pieces(
        &field,
        &pieces,
        x0,
        &ctl,
        |x| x[0] > 0.0 && x[1] > 0.0 && x[0].is_finite() && x[1].is_finite(),
        |t, u, x| traj.push(t, x, u),
        |x| p.alpha == 0.0 && x[0].max(x[1]) > X_OVERFLOW_GUARD,
    )?;
    if let Some(next) = out.stopped_at {
        log::warn!(
            "state exceeded {X_OVERFLOW_GUARD:e} at t = {}; continuing in (U, V) coordinates",
            out.t
        );
        let mut traj_uv = traj.to_uv(shift);
        let mut rest: Vec<Piece<Sign>> = pieces[next..].to_vec();
        if let Some(first) = rest.first_mut() {
            first.start = first.start.max(out.t);
        }
        let mut tail = Trajectory::new(Coords::UV);
        integrate_uv(&field, &rest, to_uv(&out.y), &ctl, &mut tail)?;
        for (i, (t, s)) in tail.rows().enumerate().skip(1) {
            traj_uv.push(t, s, tail.signs[i]);
        }
        return Ok(traj_uv);
    }
    Ok(traj)
}

fn integrate_uv(
    field: &PatchField,
    pieces: &[Piece<Sign>],
    y0: [f64; 2],
    ctl: &StepControl,
    traj: &mut Trajectory,
) -> Result<()> {
    if field.alpha != 0.0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: field.alpha,
            reason: "(U, V) coordinates need a linear system",
        });
    }
    integrate_pieces(
        &PatchFieldUV(*field),
        pieces,
        y0,
        ctl,
        |y| y[0].is_finite() && y[1].is_finite(),
        |t, u, y| traj.push(t, y, u),
        |_| false,
    )?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymmetricRun {
    /// X coordinates.
    pub trajectory: Trajectory,
    /// Max over samples of |(U', V') from the X field − (U', V') closed form|.
    pub identity_residual: f64,
}

/// Integrates with asymmetric dispersal in X coordinates and verifies the
/// closed-form (U, V) rates against the chain rule at every sample.
pub fn integrate_asymmetric(
    p: &ModelParams,
    env: &Realization,
    x0: [f64; 2],
    opts: &IntegrateOptions,
) -> Result<AsymmetricRun> {
    let opts = IntegrateOptions {
        coords: Coords::X,
        ..*opts
    };
    let trajectory = integrate_switched(p, env, x0, &opts)?;
    let field = PatchField::from_params(p);
    let mut residual = 0.0f64;
    if trajectory.coords == Coords::X {
        for (i, (t, x)) in trajectory.rows().enumerate() {
            let u = trajectory.signs[i];
            let d = field.rhs(t, u, &[x[0], x[1]]);
            let du = d[0] / x[0] + d[1] / x[1];
            let dv = d[0] / x[0] - d[1] / x[1];
            let v = (x[0] / x[1]).ln() - field.v_shift();
            let (cu, cv) = field.uv_rates(u, v);
            residual = residual.max((du - cu).abs()).max((dv - cv).abs());
        }
    }
    if residual > 1e-6 {
        return Err(Error::InvariantViolation(format!(
            "(U, V) identity residual {residual:e} exceeds 1e-6"
        )));
    }
    Ok(AsymmetricRun {
        trajectory,
        identity_residual: residual,
    })
}

/// Large-m limit: both patches follow ((x₁(0)+x₂(0))/2)e^{−εt}.
pub fn perfect_mixing(x0: [f64; 2], epsilon: f64, t: f64) -> f64 {
    0.5 * (x0[0] + x0[1]) * (-epsilon * t).exp()
}

/// Field with continuous patch rates r(t) = (α₁(t), α₂(t)).
pub struct ContinuousField<F: Fn(f64) -> (f64, f64)> {
    pub rates: F,
    pub m: f64,
}

impl<F: Fn(f64) -> (f64, f64)> SwitchedField<2> for ContinuousField<F> {
    type Mode = ();

    fn rhs(&self, t: f64, _: (), x: &[f64; 2]) -> [f64; 2] {
        let (a1, a2) = (self.rates)(t);
        [a1 * x[0] + self.m * (x[1] - x[0]), a2 * x[1] + self.m * (x[0] - x[1])]
    }
}

/// Integrates the two-patch system with smooth time-dependent rates.
pub fn integrate_continuous<F: Fn(f64) -> (f64, f64)>(
    rates: F,
    m: f64,
    x0: [f64; 2],
    horizon: f64,
    dt: f64,
) -> Result<Trajectory> {
    check(horizon > 0.0, "horizon", horizon, "must be > 0")?;
    check(dt > 0.0, "dt", dt, "must be > 0")?;
    let field = ContinuousField { rates, m };
    let mut traj = Trajectory::new(Coords::X);
    integrate_pieces(
        &field,
        &[Piece {
            start: 0.0,
            end: horizon,
            mode: (),
        }],
        x0,
        &StepControl::new(dt),
        |x| x[0] > 0.0 && x[1] > 0.0,
        |t, _, x| traj.push(t, x, Sign::Plus),
        |_| false,
    )?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{delta_closed, p_plus, v_star};
    use crate::model::EnvironmentSignal;

    #[test]
    fn equilibrium_is_fixed() {
        for m in [0.01, 0.2, 1.0, 5.0] {
            let vp = v_star(m).unwrap();
            for t in [0.1, 1.0, 100.0] {
                assert!((flow_exact(vp, Sign::Plus, m, t) - vp).abs() < 1e-14 * vp.max(1.0));
                assert!((flow_exact(-vp, Sign::Minus, m, t) + vp).abs() < 1e-14 * vp.max(1.0));
            }
        }
    }

    #[test]
    fn initial_slope_is_two() {
        let t = 1e-6;
        assert!((flow_exact(0.0, Sign::Plus, 0.01, t) / t - 2.0).abs() < 1e-6);
        assert!((flow_exact(0.0, Sign::Minus, 0.01, t) / t + 2.0).abs() < 1e-6);
    }

    #[test]
    fn semigroup() {
        for m in [0.05, 0.2, 1.0, 3.0] {
            let vp = v_star(m).unwrap();
            for v in [-vp, -0.3 * vp, 0.0, 0.7 * vp, vp] {
                for sign in [Sign::Plus, Sign::Minus] {
                    let a = flow_exact(flow_exact(v, sign, m, 0.7), sign, m, 1.9);
                    let b = flow_exact(v, sign, m, 2.6);
                    assert!((a - b).abs() < 1e-12, "m={m} v={v}");
                }
            }
        }
    }

    #[test]
    fn wide_basin_contracts() {
        let m = 0.2;
        let vp = v_star(m).unwrap();
        let v = flow_exact(vp + 10.0, Sign::Plus, m, 5.0);
        assert!(v.is_finite() && (v - vp).abs() < 1e-3);
        let v = flow_exact(-vp - 10.0, Sign::Plus, m, 20.0);
        assert!(v.is_finite() && (v - vp).abs() < 1e-6);
    }

    #[test]
    fn orbit_matches_closed_form() {
        for (m, t) in [(0.2, 10.0), (0.01, 3.0), (2.0, 0.5), (0.5, 1e-3)] {
            let o = periodic_orbit(m, t).unwrap();
            assert!((o.p_plus - p_plus(m, t).unwrap()).abs() < 1e-9, "m={m} t={t}");
        }
        // the orbit is still 4.118e-5 short of the equilibrium (50-digit value)
        let o = periodic_orbit(0.01, 10.0).unwrap();
        assert!((v_star(0.01).unwrap() - o.p_plus - 4.118_223_403e-5).abs() < 1e-12);
        let o = periodic_orbit(0.2, 1e-4).unwrap();
        assert!((o.p_plus / 1e-4 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let q = delta_quadrature(0.5, 0.2, 10.0, 64).unwrap();
        assert_eq!(q.method, Method::OrbitQuadrature);
        assert!((q.value - delta_closed(0.5, 0.2, 10.0).unwrap()).abs() < 1e-8);
        assert_eq!(delta_quadrature(0.3, 0.0, 2.0, 16).unwrap().value, -0.6);
        assert!(delta_quadrature(0.5, 0.2, 2.0, 64).unwrap().value < 0.0);
        assert!(delta_quadrature(0.5, 0.2, 10.0, 64).unwrap().value > 0.0);
        assert!(delta_quadrature(0.5, 0.2, 10.0, 8).is_err());
    }

    #[test]
    fn rk4_matches_exact_flow() {
        let pieces = |u| {
            [Piece {
                start: 0.0,
                end: 20.0,
                mode: u,
            }]
        };
        for m in [0.05, 0.5, 2.0] {
            for u in [Sign::Plus, Sign::Minus] {
                let mut worst = 0.0f64;
                integrate_pieces(
                    &VField { m },
                    &pieces(u),
                    [0.3],
                    &StepControl::new(1e-4).with_stride(1000),
                    |_| true,
                    |t, _, v| worst = worst.max((v[0] - flow_exact(0.3, u, m, t)).abs()),
                    |_| false,
                )
                .unwrap();
                assert!(worst < 1e-9, "m={m} worst={worst}");
            }
        }
    }

    #[test]
    fn product_decreases_without_dispersal() {
        let p = ModelParams::new(0.1, 0.0, 2.0).unwrap();
        let env = Realization::new(&EnvironmentSignal::periodic(2.0), 20.0, 0).unwrap();
        let tr = integrate_switched(&p, &env, [1.0, 8.0], &IntegrateOptions::default()).unwrap();
        tr.check_invariants().unwrap();
        let mut prod = Vec::new();
        for (t, x) in tr.rows() {
            if (t / 4.0 - (t / 4.0).round()).abs() < 1e-12 {
                prod.push(x[0] * x[1]);
            }
        }
        assert!(prod.len() >= 5);
        assert!(prod.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn log_product_slope_is_delta() {
        let (eps, m, t) = (0.1, 0.2, 2.0);
        let p = ModelParams::new(eps, m, t).unwrap();
        let env = Realization::new(&EnvironmentSignal::periodic(t), 400.0, 0).unwrap();
        let tr = integrate_switched(&p, &env, [1.0, 8.0], &IntegrateOptions::uv()).unwrap();
        let at = |time: f64| {
            let i = tr.times.iter().position(|&s| (s - time).abs() < 1e-9).unwrap();
            tr.state(i)[0]
        };
        let slope = (at(400.0) - at(200.0)) / 200.0;
        let d = delta_closed(eps, m, t).unwrap();
        assert!(d > 0.0);
        assert!((slope - d).abs() < 1e-8, "{slope} vs {d}");
    }

    #[test]
    fn perfect_mixing_limit() {
        let (eps, m) = (0.5, 1e4);
        let p = ModelParams::new(eps, m, 1.0).unwrap();
        let env = Realization::new(&EnvironmentSignal::periodic(1.0), 2.0, 0).unwrap();
        let x0 = [1.0, 3.0];
        let tr = integrate_switched(&p, &env, x0, &IntegrateOptions::default().with_dt(2e-5)).unwrap();
        for (t, x) in tr.rows() {
            if t >= 0.01 {
                let want = perfect_mixing(x0, eps, t);
                assert!((x[0] / want - 1.0).abs() < 0.01 && (x[1] / want - 1.0).abs() < 0.01);
            }
        }
    }

    #[test]
    fn coordinate_consistency() {
        let p = ModelParams::new(0.25, 0.4, 1.5).unwrap();
        let env = Realization::new(&EnvironmentSignal::markov(0.5), 30.0, 11).unwrap();
        let x = integrate_switched(&p, &env, [2.0, 0.5], &IntegrateOptions::default()).unwrap();
        let uv = integrate_switched(&p, &env, [2.0, 0.5], &IntegrateOptions::uv()).unwrap();
        let conv = x.to_uv(0.0);
        assert_eq!(conv.len(), uv.len());
        for i in 0..uv.len() {
            for k in 0..2 {
                assert!((conv.state(i)[k] - uv.state(i)[k]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn overflow_switches_to_uv() {
        let p = ModelParams::new(0.0, 0.0, 10.0).unwrap();
        let env = Realization::new(&EnvironmentSignal::periodic(500.0), 800.0, 0).unwrap();
        let tr = integrate_switched(&p, &env, [1.0, 1.0], &IntegrateOptions::default().with_dt(0.01)).unwrap();
        assert_eq!(tr.coords, Coords::UV);
        tr.check_invariants().unwrap();
        // U is conserved at ε = m = 0; V rises to 1000 then falls to 400
        let last = tr.last_state().unwrap();
        assert!(last[0].abs() < 1e-9);
        assert!((last[1] - 400.0).abs() < 1e-6);
    }

    #[test]
    fn asymmetric_half_is_symmetric() {
        let p = ModelParams::new(0.5, 0.2, 2.0).unwrap();
        let env = Realization::new(&EnvironmentSignal::periodic(2.0), 20.0, 0).unwrap();
        let a = integrate_asymmetric(&p, &env, [1.0, 2.0], &IntegrateOptions::default()).unwrap();
        let b = integrate_switched(&p, &env, [1.0, 2.0], &IntegrateOptions::default()).unwrap();
        assert_eq!(a.trajectory, b);
        assert!(a.identity_residual < 1e-12);
    }

    #[test]
    fn asymmetric_no_dispersal_slope() {
        let p = ModelParams::new(0.5, 0.0, 10.0).unwrap().with_beta(0.3);
        let env = Realization::new(&EnvironmentSignal::periodic(10.0), 200.0, 0).unwrap();
        let r = integrate_asymmetric(&p, &env, [1.0, 1.0], &IntegrateOptions::default().with_dt(0.01)).unwrap();
        let uv = r.trajectory.to_uv(0.0);
        let u_end = uv.last_state().unwrap()[0];
        assert!((u_end / 200.0 + 1.0).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_slope_stabilizes() {
        let p = ModelParams::new(0.5, 0.2, 10.0).unwrap().with_beta(0.3);
        let run = |h: f64| {
            let env = Realization::new(&EnvironmentSignal::periodic(10.0), h, 0).unwrap();
            let r = integrate_asymmetric(&p, &env, [1.0, 1.0], &IntegrateOptions::default().with_stride(100)).unwrap();
            let tr = if r.trajectory.coords == Coords::X {
                r.trajectory.to_uv(0.0)
            } else {
                r.trajectory
            };
            tr.last_state().unwrap()[0] / h
        };
        let (s1, s2) = (run(2000.0), run(4000.0));
        assert!(s1.is_finite() && (s1 - s2).abs() < 1e-3, "{s1} {s2}");
    }

    #[test]
    fn continuous_rates_demo_runs() {
        let tr = integrate_continuous(|t| (t.sin() - 0.1, -t.sin() - 0.1), 0.3, [1.0, 1.0], 20.0, 0.01).unwrap();
        tr.check_invariants().unwrap();
    }
}
