//! 2×2 matrix exponentials, period maps and spectral radii.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{check, Error, Result};
use crate::model::{GrowthReport, Method, Sign};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub const fn diag(d1: f64, d2: f64) -> Self {
        Mat2::new(d1, 0.0, 0.0, d2)
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(s * self.a11, s * self.a12, s * self.a21, s * self.a22)
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Max-abs entry.
    pub fn norm_max(&self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }

    pub fn is_metzler(&self) -> bool {
        self.a12 >= 0.0 && self.a21 >= 0.0
    }

    pub fn mul_vec(&self, x: [f64; 2]) -> [f64; 2] {
        [self.a11 * x[0] + self.a12 * x[1], self.a21 * x[0] + self.a22 * x[1]]
    }

    /// (a11 − a22)² + 4 a12 a21, the eigenvalue discriminant without the
    /// cancellation of tr² − 4 det.
    pub fn discriminant(&self) -> f64 {
        let d = self.a11 - self.a22;
        d * d + 4.0 * self.a12 * self.a21
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

/// e^{tM} in closed form. With M = μI + N (N trace-free, N² = δI):
/// e^{tM} = e^{tμ}(c(t)I + s(t)N), c = cosh(t√δ), s = sinh(t√δ)/√δ, continued
/// to trigonometric functions for δ < 0.
pub fn expm2(m: &Mat2, t: f64) -> Mat2 {
    let mu = 0.5 * m.trace();
    let n = Mat2::new(m.a11 - mu, m.a12, m.a21, m.a22 - mu);
    let delta = 0.25 * m.discriminant();
    let (c, s) = if delta > 0.0 {
        let w = delta.sqrt();
        let x = t * w;
        if x < 1e-3 {
            let x2 = x * x;
            let e = (t * mu).exp();
            (
                e * (1.0 + x2 / 2.0 * (1.0 + x2 / 12.0 * (1.0 + x2 / 30.0))),
                e * t * (1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0))),
            )
        } else {
            // spectral projectors (wI ± N)/2w; w ∓ n₁₁ rewritten as
            // a₁₂a₂₁/(w ± n₁₁) so the decaying mode keeps full precision
            let ep = (t * mu + x).exp();
            let em = (t * mu - x).exp();
            let off = n.a12 * n.a21;
            let split = |d: f64| {
                let (hi, lo) = if d >= 0.0 {
                    (w + d, off / (w + d))
                } else {
                    (off / (w - d), w - d)
                };
                (ep * hi + em * lo) / (2.0 * w)
            };
            let diff = em * (2.0 * x).exp_m1() / (2.0 * w);
            return Mat2::new(split(n.a11), diff * n.a12, diff * n.a21, split(n.a22));
        }
    } else if delta < 0.0 {
        let w = (-delta).sqrt();
        let x = t * w;
        let e = (t * mu).exp();
        let s = if x < 1e-3 {
            let x2 = x * x;
            t * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0)))
        } else {
            x.sin() / w
        };
        (e * x.cos(), e * s)
    } else {
        let e = (t * mu).exp();
        (e, e * t)
    };
    Mat2::new(c + s * n.a11, s * n.a12, s * n.a21, c + s * n.a22)
}

/// Largest eigenvalue modulus; real spectrum required.
pub fn spectral_radius(m: &Mat2) -> Result<f64> {
    let disc = m.discriminant();
    let scale = m.norm_max().max(f64::MIN_POSITIVE);
    if disc < -1e-10 * scale * scale {
        return Err(Error::ComplexSpectrum { discriminant: disc });
    }
    let r = disc.max(0.0).sqrt();
    let tr = m.trace();
    // pair the roots to avoid cancellation: λ₁ = (tr ± r)/2 with the sign of
    // tr, λ₂ = det/λ₁
    let l1 = 0.5 * (tr + if tr >= 0.0 { r } else { -r });
    let l2 = if l1 != 0.0 { m.det() / l1 } else { 0.0 };
    Ok(l1.abs().max(l2.abs()))
}

/// Generator of the (±1) model in state u: diag(u−m−ε, −u−m−ε) + m·offdiag.
pub fn generator(epsilon: f64, m: f64, u: Sign) -> Mat2 {
    let s = u.value();
    Mat2::new(s - m - epsilon, m, m, -s - m - epsilon)
}

/// Generator for patch growth rates (α₁, α₂) with dispersal asymmetry β
/// (β = ½ is symmetric dispersal at rate m).
pub fn dispersal_generator(alpha1: f64, alpha2: f64, m: f64, beta: f64) -> Mat2 {
    let out1 = 2.0 * m * (1.0 - beta);
    let out2 = 2.0 * m * beta;
    Mat2::new(alpha1 - out1, out2, out1, alpha2 - out2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// ln(radius)/period: the top Lyapunov exponent.
    Lyapunov,
    /// 2·ln(radius)/period = ln(radius)/T for 2T-periodic maps: the growth
    /// rate of U = ln(x₁x₂), comparable with Δ.
    HalfPeriod,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodMap {
    pub matrix: Mat2,
    pub period: f64,
    /// `(generator, duration)` in order of application.
    pub factors: Vec<(Mat2, f64)>,
}

impl PeriodMap {
    pub fn from_factors(factors: Vec<(Mat2, f64)>) -> Self {
        let period = factors.iter().map(|f| f.1).sum();
        let matrix = compose(&factors);
        PeriodMap {
            matrix,
            period,
            factors,
        }
    }

    /// Product of the factor exponentials, recomputed.
    pub fn recompute(&self) -> Mat2 {
        compose(&self.factors)
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        spectral_radius(&self.matrix)
    }

    pub fn exponent(&self, convention: Convention) -> Result<f64> {
        let l = self.spectral_radius()?.ln() / self.period;
        Ok(match convention {
            Convention::Lyapunov => l,
            Convention::HalfPeriod => 2.0 * l,
        })
    }

    /// Growth exponent in units of Δ (rate of ln(x₁x₂)).
    pub fn growth_exponent(&self) -> Result<f64> {
        self.exponent(Convention::HalfPeriod)
    }

    pub fn lyapunov_exponent(&self) -> Result<f64> {
        self.exponent(Convention::Lyapunov)
    }
}

fn compose(factors: &[(Mat2, f64)]) -> Mat2 {
    factors.iter().fold(Mat2::IDENTITY, |acc, (g, d)| expm2(g, *d) * acc)
}

fn check_basic(epsilon: f64, m: f64, t: f64) -> Result<()> {
    check((0.0..=1.0).contains(&epsilon), "epsilon", epsilon, "must lie in [0, 1]")?;
    check(m >= 0.0, "m", m, "must be >= 0")?;
    check(t > 0.0, "t", t, "must be > 0")
}

/// e^{TM⁻}·e^{TM⁺}.
pub fn period_map(epsilon: f64, m: f64, t: f64) -> Result<PeriodMap> {
    check_basic(epsilon, m, t)?;
    Ok(PeriodMap::from_factors(vec![
        (generator(epsilon, m, Sign::Plus), t),
        (generator(epsilon, m, Sign::Minus), t),
    ]))
}

pub fn delta_spectral(epsilon: f64, m: f64, t: f64) -> Result<GrowthReport> {
    Ok(GrowthReport::exact(
        period_map(epsilon, m, t)?.growth_exponent()?,
        Method::Spectral,
    ))
}

/// Square-wave rates `high`/`low` with patch 2 lagging patch 1 by (1−φ)T:
/// e^{(1−φ)T M⁻⁻}·e^{φT M⁻⁺}·e^{(1−φ)T M⁺⁺}·e^{φT M⁺⁻}. φ = 1 is the fully
/// out-of-phase schedule, φ = 0 the synchronized one.
pub fn phase_shift_rates_map(high: f64, low: f64, m: f64, t: f64, phi: f64) -> Result<PeriodMap> {
    check(m >= 0.0, "m", m, "must be >= 0")?;
    check(t > 0.0, "t", t, "must be > 0")?;
    check((0.0..=1.0).contains(&phi), "phi", phi, "must lie in [0, 1]")?;
    let g = |a1: f64, a2: f64| dispersal_generator(a1, a2, m, 0.5);
    let factors = vec![
        (g(high, low), phi * t),
        (g(high, high), (1.0 - phi) * t),
        (g(low, high), phi * t),
        (g(low, low), (1.0 - phi) * t),
    ];
    Ok(PeriodMap::from_factors(factors))
}

/// Phase-shift map of the (±1) model.
pub fn phase_shift_map(epsilon: f64, m: f64, t: f64, phi: f64) -> Result<PeriodMap> {
    check_basic(epsilon, m, t)?;
    phase_shift_rates_map(1.0 - epsilon, -1.0 - epsilon, m, t, phi)
}

/// Period map with per-patch rates: (α₁, α₂) = (r₁, −d₂) on [0, T) and
/// (−d₁, r₂) on [T, 2T).
pub fn general_rate_map(r1: f64, d1: f64, r2: f64, d2: f64, m: f64, t: f64) -> Result<PeriodMap> {
    for (name, v) in [("r1", r1), ("d1", d1), ("r2", r2), ("d2", d2)] {
        check(v.is_finite(), name, v, "must be finite")?;
    }
    check(m >= 0.0, "m", m, "must be >= 0")?;
    check(t > 0.0, "t", t, "must be > 0")?;
    Ok(PeriodMap::from_factors(vec![
        (dispersal_generator(r1, -d2, m, 0.5), t),
        (dispersal_generator(-d1, r2, m, 0.5), t),
    ]))
}

/// Period map for general rates and dispersal asymmetry.
pub fn params_period_map(p: &crate::model::ModelParams) -> Result<PeriodMap> {
    p.validate()?;
    let r = p.patch_rates();
    let mk = |u| {
        let (a1, a2) = r.at(u);
        dispersal_generator(a1, a2, p.m, p.beta_disp)
    };
    Ok(PeriodMap::from_factors(vec![
        (mk(Sign::Plus), p.half_period),
        (mk(Sign::Minus), p.half_period),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::delta_closed;

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        let d = Mat2::new(a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22);
        d.norm_max() <= tol * b.norm_max().max(1.0)
    }

    #[test]
    fn expm_diagonal() {
        let (eps, t) = (0.1, 2.0);
        let e = expm2(&Mat2::diag(1.0 - eps, -1.0 - eps), t);
        let want = Mat2::diag((t * (1.0 - eps)).exp(), (-t * (1.0 + eps)).exp());
        assert!(close(&e, &want, 1e-15));
        assert_eq!(expm2(&Mat2::ZERO, 3.0), Mat2::IDENTITY);
    }

    #[test]
    fn expm_rotation_and_nilpotent() {
        let r = expm2(&Mat2::new(0.0, -1.0, 1.0, 0.0), 0.7);
        assert!(close(
            &r,
            &Mat2::new(0.7f64.cos(), -(0.7f64).sin(), 0.7f64.sin(), 0.7f64.cos()),
            1e-15
        ));
        let n = expm2(&Mat2::new(0.0, 1.0, 0.0, 0.0), 2.5);
        assert!(close(&n, &Mat2::new(1.0, 2.5, 0.0, 1.0), 1e-15));
    }

    #[test]
    fn spectral_radius_examples() {
        assert_eq!(spectral_radius(&Mat2::diag(2.0, 3.0)).unwrap(), 3.0);
        assert_eq!(spectral_radius(&Mat2::new(0.0, 1.0, 1.0, 0.0)).unwrap(), 1.0);
        assert!(matches!(
            spectral_radius(&Mat2::new(0.0, -1.0, 1.0, 0.0)),
            Err(Error::ComplexSpectrum { .. })
        ));
    }

    #[test]
    fn period_map_examples() {
        let pm = period_map(0.3, 0.0, 1.5).unwrap();
        let e = (-2.0f64 * 0.3 * 1.5).exp();
        assert!(close(&pm.matrix, &Mat2::diag(e, e), 1e-14));
        let pm = period_map(0.0, 0.0, 1.0).unwrap();
        assert!(close(&pm.matrix, &Mat2::IDENTITY, 1e-15));
    }

    #[test]
    fn radius_matches_closed_form() {
        let pm = period_map(0.1, 0.2, 3.0).unwrap();
        let d = delta_closed(0.1, 0.2, 3.0).unwrap();
        assert!((pm.growth_exponent().unwrap() - d).abs() < 1e-10);
        let pm = period_map(0.5, 0.2, 10.0).unwrap();
        let r = pm.spectral_radius().unwrap();
        let want = (10.0 * delta_closed(0.5, 0.2, 10.0).unwrap()).exp();
        assert!((r / want - 1.0).abs() < 1e-8);
    }

    #[test]
    fn phase_shift_reductions() {
        let (eps, m, t) = (0.1, 0.5, 5.0);
        let full = phase_shift_map(eps, m, t, 1.0).unwrap();
        let pm = period_map(eps, m, t).unwrap();
        assert!(close(&full.matrix, &pm.matrix, 1e-14));
        let sync = phase_shift_map(eps, m, t, 0.0).unwrap();
        let r = sync.spectral_radius().unwrap();
        assert!((r / (-2.0 * eps * t).exp() - 1.0).abs() < 1e-12);
        let g: Vec<f64> = [0.25, 0.5, 1.0]
            .iter()
            .map(|&phi| phase_shift_map(eps, m, t, phi).unwrap().lyapunov_exponent().unwrap())
            .collect();
        assert!(g[0] < g[1] && g[1] < g[2], "{g:?}");
    }

    #[test]
    fn general_rates_reduce_to_symmetric() {
        for m in [0.0, 0.1, 0.7, 3.0] {
            let a = general_rate_map(0.9, 1.1, 0.9, 1.1, m, 2.0).unwrap();
            let b = period_map(0.1, m, 2.0).unwrap();
            assert!(close(&a.matrix, &b.matrix, 1e-14));
        }
    }

    #[test]
    fn general_rates_decoupled() {
        let (r1, d1, r2, d2, t) = (0.9, 1.1, -0.1, 0.1, 5.0);
        let pm = general_rate_map(r1, d1, r2, d2, 0.0, t).unwrap();
        let want = (t * (r1 - d1)).exp().max((t * (r2 - d2)).exp());
        assert!((pm.spectral_radius().unwrap() / want - 1.0).abs() < 1e-14);
    }

    #[test]
    fn general_rates_inflation_persists() {
        let any_positive = (1..=40).any(|k| {
            let m = 0.025 * k as f64;
            general_rate_map(0.9, 1.1, -0.1, 0.1, m, 5.0)
                .unwrap()
                .growth_exponent()
                .unwrap()
                > 0.0
        });
        assert!(any_positive);
    }

    #[test]
    fn params_map_matches_symmetric() {
        let p = crate::model::ModelParams::new(0.25, 0.4, 3.0).unwrap();
        let a = params_period_map(&p).unwrap().growth_exponent().unwrap();
        let b = period_map(0.25, 0.4, 3.0).unwrap().growth_exponent().unwrap();
        assert!((a - b).abs() < 1e-12);
        let pr = p.clone().with_rates(crate::model::SquareRates::symmetric(0.25));
        let c = params_period_map(&pr).unwrap().growth_exponent().unwrap();
        assert!((c - b).abs() < 1e-10);
    }
}
