//! Independent oracles for the closed forms: brute-force matrix exponential,
//! direct ODE integration and plain root finding.

use twopatch::analytic::{a_plus, critical_migration, delta_closed, delta_from_p_plus, p_plus, v_star};
use twopatch::matrix::{delta_spectral, expm2, generator, period_map, Mat2};
use twopatch::switched::{delta_quadrature, flow_exact, periodic_orbit};
use twopatch::Sign;

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Taylor series of e^{tM/2^s} followed by s squarings.
fn expm_taylor(m: &Mat2, t: f64) -> [[f64; 2]; 2] {
    let a = [[m.a11 * t, m.a12 * t], [m.a21 * t, m.a22 * t]];
    let norm = a.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let s = (norm.log2().ceil() as i32 + 4).max(0);
    let h = 0.5f64.powi(s);
    let a = [[a[0][0] * h, a[0][1] * h], [a[1][0] * h, a[1][1] * h]];
    let mut term = [[1.0, 0.0], [0.0, 1.0]];
    let mut sum = term;
    for k in 1..30 {
        term = mat_mul(term, a);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        sum = mat_mul(sum, sum);
    }
    sum
}

fn rel_entry_err(e: &Mat2, r: [[f64; 2]; 2]) -> f64 {
    let got = [[e.a11, e.a12], [e.a21, e.a22]];
    let scale = r.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let mut err = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            err = err.max((got[i][j] - r[i][j]).abs() / scale);
        }
    }
    err
}

#[test]
fn expm2_matches_taylor_squaring() {
    let cases = [
        Mat2::new(0.3, 0.7, 0.2, -1.1),
        Mat2::new(-0.4, 2.0, -3.0, 0.1),
        Mat2::new(1.0, 0.0, 0.0, 1.0),
        Mat2::new(0.5, 1.0, 0.0, 0.5),
        generator(0.1, 0.3, Sign::Plus),
        generator(0.25, 4.0, Sign::Minus),
    ];
    for m in &cases {
        for t in [1e-4, 0.1, 1.0, 3.0] {
            let err = rel_entry_err(&expm2(m, t), expm_taylor(m, t));
            assert!(err < 1e-12, "{m:?} t={t}: {err:e}");
        }
    }
}

#[test]
fn expm2_keeps_decaying_mode_without_coupling() {
    // diagonal entries must be exact exponentials, even the tiny one
    let g = generator(0.1, 0.0, Sign::Plus);
    for t in [1.0, 10.0, 18.0, 40.0] {
        let e = expm2(&g, t);
        let want = (-1.1f64 * t).exp();
        assert!(((e.a22 - want) / want).abs() < 1e-13, "t={t}: {} vs {want}", e.a22);
        assert!(((e.a11 - (0.9f64 * t).exp()) / e.a11).abs() < 1e-13);
        assert_eq!((e.a12, e.a21), (0.0, 0.0));
    }
}

#[test]
fn delta_three_ways_on_grid() {
    for eps in [0.05, 0.3, 0.7] {
        for m in [0.01, 0.2, 1.0, 3.0] {
            for t in [0.05, 0.7, 3.0, 12.0] {
                let c = delta_closed(eps, m, t).unwrap();
                let s = delta_spectral(eps, m, t).unwrap().value;
                let q = delta_quadrature(eps, m, t, 64).unwrap().value;
                let p = delta_from_p_plus(eps, m, t).unwrap();
                assert!((c - s).abs() < 1e-10, "spectral {eps} {m} {t}: {c} {s}");
                assert!((c - q).abs() < 1e-7, "quadrature {eps} {m} {t}: {c} {q}");
                assert!((c - p).abs() < 1e-10, "orbit chain {eps} {m} {t}: {c} {p}");
            }
        }
    }
}

#[test]
fn delta_vanishes_at_critical_migration_for_long_periods() {
    for eps in [0.1, 0.4] {
        let mc = critical_migration(eps).unwrap();
        let d = delta_closed(eps, mc, 200.0).unwrap();
        // residual is the ln(n(T))/T correction
        assert!(d < 0.0 && d > -0.02, "eps={eps}: {d}");
    }
}

fn bisect_plain(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn v_star_is_zero_of_plus_field() {
    for m in [1e-3, 0.1, 1.0, 50.0] {
        let root = bisect_plain(|v| 1.0 - m * v.sinh(), 0.0, 20.0);
        assert!((v_star(m).unwrap() - root).abs() < 1e-12 * root.max(1.0));
    }
}

#[test]
fn a_plus_is_zero_of_growth_integrand() {
    for (eps, m) in [(0.1, 0.3), (0.5, 0.01), (0.9, 5.0), (0.0, 1.0)] {
        let a = a_plus(eps, m).unwrap();
        assert!((m * a.cosh() - m - eps).abs() < 1e-12 * (m + eps).max(1e-300));
        let root = if eps == 0.0 {
            0.0
        } else {
            bisect_plain(|v| m * v.cosh() - m - eps, 0.0, 30.0)
        };
        assert!((a - root).abs() < 1e-10);
    }
}

fn rk4_flow(v0: f64, s: f64, m: f64, t: f64, n: usize) -> f64 {
    let f = |v: f64| 2.0 * (s - m * v.sinh());
    let h = t / n as f64;
    let mut v = v0;
    for _ in 0..n {
        let k1 = f(v);
        let k2 = f(v + 0.5 * h * k1);
        let k3 = f(v + 0.5 * h * k2);
        let k4 = f(v + h * k3);
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    v
}

#[test]
fn exact_flow_matches_rk4() {
    for (m, v0, t) in [(0.3, 0.0, 2.0), (0.3, -3.0, 5.0), (2.0, 1.5, 0.7), (0.01, 2.0, 3.0)] {
        for (sign, s) in [(Sign::Plus, 1.0), (Sign::Minus, -1.0)] {
            let want = rk4_flow(v0, s, m, t, 20_000);
            let got = flow_exact(v0, sign, m, t);
            assert!((got - want).abs() < 1e-10, "m={m} v0={v0} t={t}: {got} {want}");
        }
    }
}

#[test]
fn p_plus_matches_iterated_ode() {
    for (m, t) in [(0.5, 1.0), (1.0, 0.3), (0.2, 4.0)] {
        let mut v = 0.0;
        for _ in 0..200 {
            v = rk4_flow(rk4_flow(v, 1.0, m, t, 2000), -1.0, m, t, 2000);
        }
        let top = rk4_flow(v, 1.0, m, t, 2000);
        let closed = p_plus(m, t).unwrap();
        assert!((closed - top).abs() < 1e-9, "m={m} t={t}: {closed} {top}");
        assert!((periodic_orbit(m, t).unwrap().p_plus - closed).abs() < 1e-10);
    }
}

#[test]
fn p_plus_small_period_is_linear() {
    // the orbit crosses [-P, P] at speed ~2 in time T
    for m in [0.1, 1.0, 10.0] {
        for t in [1e-3, 1e-5, 1e-7] {
            let p = p_plus(m, t).unwrap();
            assert!((p / t - 1.0).abs() < 10.0 * m * t, "m={m} t={t}: {p}");
        }
    }
}

#[test]
fn period_map_entries_match_taylor_product() {
    for (eps, m, t) in [(0.1, 0.3, 2.0), (0.5, 1.5, 0.4), (0.2, 0.05, 6.0)] {
        let pm = period_map(eps, m, t).unwrap().matrix;
        let r = mat_mul(
            expm_taylor(&generator(eps, m, Sign::Minus), t),
            expm_taylor(&generator(eps, m, Sign::Plus), t),
        );
        assert!(rel_entry_err(&pm, r) < 1e-11);
    }
}
