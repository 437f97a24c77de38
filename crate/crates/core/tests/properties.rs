use proptest::prelude::*;

use twopatch::analytic::delta_closed;
use twopatch::matrix::{expm2, period_map, Mat2};
use twopatch::model::{EnvironmentSignal, ModelParams, Realization, SojournDistribution};
use twopatch::pdmp::delta_pdmp_quadrature;
use twopatch::switched::{flow_exact, integrate_switched, period_map_v, periodic_orbit, IntegrateOptions};
use twopatch::{realize_environment, Sign};

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    let scale = a.norm_max().max(b.norm_max()).max(1.0);
    [a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22]
        .iter()
        .all(|d| d.abs() <= tol * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn expm2_semigroup(
        a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, d in -2.0..2.0f64,
        s in 0.0..2.0f64, t in 0.0..2.0f64,
    ) {
        let m = Mat2::new(a, b, c, d);
        let lhs = expm2(&m, s) * expm2(&m, t);
        prop_assert!(close(&lhs, &expm2(&m, s + t), 1e-11));
    }

    #[test]
    fn flow_semigroup(m in 1e-3..5.0f64, frac in -0.999..0.999f64, u in sign(), s in 0.0..5.0f64, t in 0.0..5.0f64) {
        let v = frac * (1.0 / m).asinh();
        let two = flow_exact(flow_exact(v, u, m, s), u, m, t);
        prop_assert!((two - flow_exact(v, u, m, s + t)).abs() < 1e-11);
    }

    #[test]
    fn flow_sign_symmetry(m in 1e-3..5.0f64, v in -5.0..5.0f64, t in 0.0..5.0f64) {
        let plus = flow_exact(v, Sign::Plus, m, t);
        let minus = flow_exact(-v, Sign::Minus, m, t);
        prop_assert!((plus + minus).abs() < 1e-12 * plus.abs().max(1.0));
    }

    #[test]
    fn period_map_persymmetric_and_positive(eps in 0.0..1.0f64, m in 0.0..5.0f64, t in 0.01..10.0f64) {
        let pm = period_map(eps, m, t).unwrap().matrix;
        prop_assert!((pm.a11 - pm.a22).abs() <= 1e-12 * pm.norm_max());
        prop_assert!(pm.a11 > 0.0 && pm.a22 > 0.0 && pm.a12 >= 0.0 && pm.a21 >= 0.0);
        prop_assert!(pm.discriminant() >= 0.0);
    }

    #[test]
    fn environment_is_deterministic_and_ordered(seed in any::<u64>(), kind in 0u8..3, t in 0.2..5.0f64) {
        let sig = match kind {
            0 => EnvironmentSignal::periodic(t),
            1 => EnvironmentSignal::markov(1.0 / t),
            _ => EnvironmentSignal::renewal(
                SojournDistribution::Uniform { t, eta: 0.5 * t },
                SojournDistribution::Exponential { mean: t },
            ),
        };
        let a = realize_environment(&sig, 40.0, seed).unwrap();
        prop_assert_eq!(&a, &realize_environment(&sig, 40.0, seed).unwrap());
        prop_assert!(a.windows(2).all(|w| w[1].time > w[0].time && w[1].state != w[0].state));
    }

    #[test]
    fn orbit_attracts(m in 0.05..3.0f64, t in 0.1..5.0f64, frac in -0.99..0.99f64) {
        let orbit = periodic_orbit(m, t).unwrap();
        let vp = (1.0 / m).asinh();
        let mut v = frac * vp;
        let d0 = (v - orbit.v_e).abs();
        for _ in 0..5 {
            v = period_map_v(v, m, t);
        }
        prop_assert!((v - orbit.v_e).abs() <= d0 + 1e-12);
        prop_assert!(orbit.p_plus < vp && orbit.p_minus > -vp);
    }
}

#[test]
fn u_over_t_converges_to_delta() {
    for eps in [0.05, 0.2, 0.5] {
        for m in [0.1, 0.5, 2.0] {
            for t in [0.5, 2.0] {
                let p = ModelParams::new(eps, m, t).unwrap();
                let horizon = 400.0 * t;
                let env = Realization::new(&EnvironmentSignal::periodic(t), horizon, 0).unwrap();
                let opts = IntegrateOptions::uv().with_dt(t / 200.0).with_stride(usize::MAX);
                let tr = integrate_switched(&p, &env, [1.0, 1.0], &opts).unwrap();
                let u = tr.last_state().unwrap()[0];
                let want = delta_closed(eps, m, t).unwrap();
                // transient and orbit phase contribute O(V⁺) to U
                let tol = 4.0 * (1.0 / m).asinh() / horizon + 1e-6;
                assert!(
                    (u / horizon - want).abs() < tol,
                    "{eps} {m} {t}: {} vs {want}",
                    u / horizon
                );
            }
        }
    }
}

#[test]
fn markov_delta_increases_with_sojourn_time() {
    for (eps, m) in [(0.1, 0.3), (0.3, 1.0)] {
        let ds: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&t| delta_pdmp_quadrature(eps, m, t).unwrap().value)
            .collect();
        assert!(ds.windows(2).all(|w| w[1] > w[0]), "eps={eps} m={m}: {ds:?}");
    }
}
