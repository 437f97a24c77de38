//! Closed-form quantities of the periodic (±1) model.

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::model::{GrowthReport, Method};
use crate::roots::bisect;

const ROOT_TOL: f64 = 1e-12;

/// Default search limit for [`threshold_t_star`].
pub const DEFAULT_T_MAX: f64 = 1e8;

fn check_eps(epsilon: f64) -> Result<()> {
    check((0.0..=1.0).contains(&epsilon), "epsilon", epsilon, "must lie in [0, 1]")
}

/// √(1+m²) − m without cancellation.
pub(crate) fn a_minus_m(m: f64) -> f64 {
    1.0 / (m.hypot(1.0) + m)
}

/// Stable equilibrium V⁺ = sinh⁻¹(1/m) of the `u = +1` vector field.
pub fn v_star(m: f64) -> Result<f64> {
    check(m > 0.0, "m", m, "must be > 0")?;
    Ok((1.0 / m).asinh())
}

/// Zero A⁺ = cosh⁻¹(1 + ε/m) of g(V) = 2(m cosh V − m − ε).
pub fn a_plus(epsilon: f64, m: f64) -> Result<f64> {
    check(epsilon >= 0.0, "epsilon", epsilon, "must be >= 0")?;
    check(m > 0.0, "m", m, "must be > 0")?;
    // cosh⁻¹(1 + x) = ln(1 + x + √(x(2 + x)))
    let x = epsilon / m;
    Ok((x + (x * (2.0 + x)).sqrt()).ln_1p())
}

/// Migration rate above which Δ < 0 for every half-period.
pub fn critical_migration(epsilon: f64) -> Result<f64> {
    check(
        epsilon > 0.0 && epsilon <= 1.0,
        "epsilon",
        epsilon,
        "must lie in (0, 1]",
    )?;
    Ok((1.0 - epsilon * epsilon) / (2.0 * epsilon))
}

/// Half-periods below this value never show inflation, whatever m.
pub fn no_inflation_period(epsilon: f64) -> Result<f64> {
    check(epsilon > 0.0 && epsilon < 1.0, "epsilon", epsilon, "must lie in (0, 1)")?;
    Ok((2.0 * epsilon / (1.0 - epsilon * epsilon)).asinh())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitAmplitude {
    pub p_plus: f64,
    pub v_plus: f64,
    pub a_plus: f64,
    /// √(1+m²)
    pub a: f64,
    /// tanh(TA)
    pub b_tanh: f64,
    /// e^{TA}; may be infinite
    pub b_exp: f64,
}

pub fn orbit_amplitude(epsilon: f64, m: f64, t: f64) -> Result<OrbitAmplitude> {
    let a = m.hypot(1.0);
    Ok(OrbitAmplitude {
        p_plus: p_plus(m, t)?,
        v_plus: v_star(m)?,
        a_plus: a_plus(epsilon, m)?,
        a,
        b_tanh: (t * a).tanh(),
        b_exp: (t * a).exp(),
    })
}

/// Upper extreme P⁺ of the periodic V-orbit.
pub fn p_plus(m: f64, t: f64) -> Result<f64> {
    check(m > 0.0, "m", m, "must be > 0")?;
    check(t > 0.0, "t", t, "must be > 0")?;
    let a = m.hypot(1.0);
    let e = (-2.0 * t * a).exp();
    let one_minus_b = 2.0 * e / (1.0 + e);
    let b = (1.0 - e) / (1.0 + e);
    // A − B = (A − 1) + (1 − B), both terms nonnegative.
    let a_minus_b = m * m / (a + 1.0) + one_minus_b;
    let s = (a_minus_b * (a + b)).sqrt();
    // P⁺ = 2 atanh(x) with x = B / (A + s), written as ln((1+x)/(1−x)).
    Ok(((a + b + s) / (a_minus_b + s)).ln())
}

/// Δ(ε, m, T), the mean velocity of U = ln(x₁x₂) along the periodic orbit.
pub fn delta_closed(epsilon: f64, m: f64, t: f64) -> Result<f64> {
    check_eps(epsilon)?;
    check(m >= 0.0, "m", m, "must be >= 0")?;
    check(t > 0.0, "t", t, "must be > 0")?;
    if m == 0.0 {
        return Ok(-2.0 * epsilon);
    }
    let a2 = 1.0 + m * m;
    let a = a2.sqrt();
    // b⁴ factored out of the log argument, q = b⁻².
    let q = (-2.0 * t * a).exp();
    let m2 = m * m;
    let c = m2 + 2.0 * m2 * q + 4.0 * q + m2 * q * q;
    let n = (m2 + 2.0 * q + m2 * q * q + m * (-(-2.0 * t * a).exp_m1()) * c.sqrt()) / (2.0 * a2);
    Ok(2.0 * a_minus_m(m) - 2.0 * epsilon + n.ln() / t)
}

pub fn delta_closed_report(epsilon: f64, m: f64, t: f64) -> Result<GrowthReport> {
    Ok(GrowthReport::exact(delta_closed(epsilon, m, t)?, Method::ClosedForm))
}

/// Δ through P⁺: (1/T) ln[(1 + m sinh P⁺)/(1 − m sinh P⁺)] − 2(m + ε).
/// 1 − m sinh P⁺ = 2m cosh((V⁺+P⁺)/2) sinh((V⁺−P⁺)/2), with V⁺ − P⁺ formed
/// from nonnegative terms since P⁺ → V⁺ exponentially fast in T.
pub fn delta_from_p_plus(epsilon: f64, m: f64, t: f64) -> Result<f64> {
    check_eps(epsilon)?;
    let p = p_plus(m, t)?;
    let a = m.hypot(1.0);
    let e = (-2.0 * t * a).exp();
    let one_minus_b = 2.0 * e / (1.0 + e);
    let b = (1.0 - e) / (1.0 + e);
    let s = ((m * m / (a + 1.0) + one_minus_b) * (a + b)).sqrt();
    // s − m = (1 − B²)/(s + m)
    let sigma = one_minus_b * (1.0 + b) / (s + m);
    let d = sigma * (1.0 + a - m) + (1.0 + a + m) * one_minus_b;
    let gap = (d / (m * (a + b + s))).ln_1p();
    let vp = (1.0 / m).asinh();
    let plus = 1.0 + m * p.sinh();
    let minus = 2.0 * m * (0.5 * (vp + p)).cosh() * (0.5 * gap).sinh();
    Ok((plus / minus).ln() / t - 2.0 * (m + epsilon))
}

pub fn delta_limit_t_inf(epsilon: f64, m: f64) -> Result<f64> {
    check_eps(epsilon)?;
    check(m >= 0.0, "m", m, "must be >= 0")?;
    Ok(2.0 * (a_minus_m(m) - epsilon))
}

pub fn delta_limit_t_zero(epsilon: f64) -> Result<f64> {
    check_eps(epsilon)?;
    Ok(-2.0 * epsilon)
}

pub fn delta_limit_m(epsilon: f64) -> Result<f64> {
    check_eps(epsilon)?;
    Ok(-2.0 * epsilon)
}

/// Half-period T* above which the coupled system inflates.
pub fn threshold_t_star(epsilon: f64, m: f64, t_max: f64) -> Result<f64> {
    check(epsilon > 0.0 && epsilon < 1.0, "epsilon", epsilon, "must lie in (0, 1)")?;
    check(m > 0.0, "m", m, "must be > 0")?;
    let mc = critical_migration(epsilon)?;
    if m >= mc {
        return Err(Error::NoRoot(format!(
            "m = {m} >= critical migration {mc}: delta < 0 for every T"
        )));
    }
    let f = |t: f64| delta_closed(epsilon, m, t).unwrap_or(f64::NAN);
    let mut lo = no_inflation_period(epsilon)?;
    while f(lo) >= 0.0 {
        lo *= 0.5;
    }
    let mut hi = 2.0 * lo;
    while f(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > t_max {
            return Err(Error::BracketFailure { limit: t_max });
        }
    }
    bisect(f, lo, hi, ROOT_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MigrationThreshold {
    pub m_star: f64,
    /// e^{−(1−ε)T}
    pub asymptote: f64,
    /// ln(m*)/T
    pub log_slope: f64,
}

/// Smallest migration rate m*(ε, T) giving inflation.
pub fn threshold_m_star(epsilon: f64, t: f64) -> Result<MigrationThreshold> {
    check(epsilon > 0.0 && epsilon < 1.0, "epsilon", epsilon, "must lie in (0, 1)")?;
    check(t > 0.0, "t", t, "must be > 0")?;
    let f = |x: f64| delta_closed(epsilon, x.exp(), t).unwrap_or(f64::NAN);
    let lo = -(1.0 + epsilon) * t * 1.5;
    let hi = critical_migration(epsilon)?.ln();
    const SCAN: usize = 400;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for k in 1..=SCAN {
        let x1 = lo + (hi - lo) * k as f64 / SCAN as f64;
        let f1 = f(x1);
        if f0 < 0.0 && f1 >= 0.0 {
            let x = bisect(f, x0, x1, ROOT_TOL)?;
            return Ok(MigrationThreshold {
                m_star: x.exp(),
                asymptote: (-(1.0 - epsilon) * t).exp(),
                log_slope: x / t,
            });
        }
        x0 = x1;
        f0 = f1;
    }
    Err(Error::NoRoot(format!(
        "delta({epsilon}, m, {t}) < 0 on the whole bracket"
    )))
}
