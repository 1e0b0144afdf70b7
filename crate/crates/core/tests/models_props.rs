use proptest::prelude::*;
use qdep::bounds::hoeffding_cov;
use qdep::copula::{fgm_upper_mixture, frechet_mixture};
use qdep::models::{qde_value, regression_curve, threshold_cov, DiscreteMarginal};
use qdep::numerics::{integrate, integrate_with_breaks};
use qdep::{Copula, Distortion, JointModel, Marginal, Tolerance};

fn families() -> Vec<Copula> {
    vec![
        Copula::frechet_lower(),
        Copula::frechet_upper(),
        Copula::independence(),
        Copula::fgm(-1.0).unwrap(),
        Copula::fgm(0.6).unwrap(),
        Copula::gg_archimedean(0.5).unwrap(),
        Copula::gg_archimedean(0.7).unwrap(),
        frechet_mixture(0.75).unwrap(),
        fgm_upper_mixture(0.3).unwrap(),
    ]
}

#[test]
fn threshold_cov_vanishes_outside_support() {
    let marginal = Marginal::discrete(vec![-1.0, 0.5, 2.0], vec![0.3, 0.3, 0.4]).unwrap();
    for c in families() {
        let jm = JointModel::new(c.clone(), Marginal::UniformUnit, marginal.clone());
        assert_eq!(threshold_cov(&jm, -1.5).unwrap(), 0.0);
        assert_eq!(threshold_cov(&jm, 2.0).unwrap(), 0.0);
        assert_eq!(threshold_cov(&jm, 7.0).unwrap(), 0.0);
        let jm = JointModel::uniform(c);
        assert_eq!(threshold_cov(&jm, -0.1).unwrap(), 0.0);
        assert_eq!(threshold_cov(&jm, 1.0).unwrap(), 0.0);
    }
}

#[test]
fn threshold_cov_matches_indicator_covariance_integral() {
    // Cov[1{U > x}, 1{V > y}] = C(x, y) - xy, integrated over x without kink hints
    let tol = Tolerance::default().with_abs(1e-9).with_subdivisions(2000);
    for c in families() {
        let jm = JointModel::uniform(c.clone());
        for k in 1..=9 {
            let y = k as f64 / 10.0;
            let direct = integrate(|x| c.value(x, y) - x * y, 0.0, 1.0, tol).unwrap();
            let got = threshold_cov(&jm, y).unwrap();
            assert!(
                (got - direct).abs() <= 1e-6,
                "{} y={y}: {got} vs {direct}",
                c.label()
            );
        }
    }
}

#[test]
fn regression_curve_has_zero_mean() {
    for c in families() {
        let jm = JointModel::uniform(c.clone());
        let mean = integrate_with_breaks(
            |v| {
                if v <= 0.0 || v >= 1.0 {
                    0.0
                } else {
                    regression_curve(&jm, v).unwrap()
                }
            },
            0.0,
            1.0,
            &[0.5],
            Tolerance::default().with_subdivisions(400),
        )
        .unwrap();
        assert!(mean.abs() <= 1e-8, "{}: {mean}", c.label());
    }
}

#[test]
fn covariance_two_ways() {
    let betas = [
        Distortion::identity(),
        Distortion::power(2.0).unwrap(),
        Distortion::piecewise_linear(vec![0.0, 0.4, 1.0], vec![0.0, 1.0, 0.2]).unwrap(),
    ];
    for c in families() {
        let jm = JointModel::uniform(c.clone());
        for beta in &betas {
            let via_regression = integrate_with_breaks(
                |v| {
                    if v <= 0.0 || v >= 1.0 {
                        0.0
                    } else {
                        regression_curve(&jm, v).unwrap() * beta.eval(v)
                    }
                },
                0.0,
                1.0,
                &[0.4, 0.5],
                Tolerance::default().with_subdivisions(400),
            )
            .unwrap();
            let via_hoeffding = hoeffding_cov(&jm, beta).unwrap();
            assert!(
                (via_regression - via_hoeffding).abs() <= 1e-6,
                "{} {beta}: {via_regression} vs {via_hoeffding}",
                c.label()
            );
        }
    }
}

#[test]
fn known_qde_curves() {
    for k in 1..20 {
        let v = k as f64 / 20.0;
        let base = v * (1.0 - v);
        let fl = qde_value(&Copula::frechet_lower(), v).unwrap();
        assert!((fl + base / 2.0).abs() < 1e-13);
        let fu = qde_value(&Copula::frechet_upper(), v).unwrap();
        assert!((fu - base / 2.0).abs() < 1e-13);
        for t in [-1.0, 0.3] {
            let f = qde_value(&Copula::fgm(t).unwrap(), v).unwrap();
            assert!((f - t * base / 6.0).abs() < 1e-13);
        }
        for a in [0.1, 0.5, 0.9] {
            let f = qde_value(&frechet_mixture(a).unwrap(), v).unwrap();
            assert!((f - base * (a - 0.5)).abs() < 1e-13);
            let g = qde_value(&fgm_upper_mixture(a).unwrap(), v).unwrap();
            assert!((g - base / 2.0 * (4.0 * a / 3.0 - 1.0 / 3.0)).abs() < 1e-13);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrete_cdf_quantile_galois(
        raw in prop::collection::vec(0.05f64..1.0, 1..8),
        w in 0.0001f64..0.9999,
        y in -2.0f64..10.0,
    ) {
        let total: f64 = raw.iter().sum();
        let mut probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let drift = 1.0 - probs.iter().sum::<f64>();
        *probs.last_mut().unwrap() += drift;
        let points: Vec<f64> = (0..probs.len()).map(|i| i as f64 * 1.5).collect();
        let m = Marginal::FiniteDiscrete(DiscreteMarginal::new(points, probs).unwrap());
        // Q(w) <= y  iff  w <= F(y)
        prop_assert_eq!(m.quantile(w) <= y, w <= m.cdf(y));
        prop_assert_eq!(m.cdf(m.support().1), 1.0);
    }

    #[test]
    fn piecewise_decomposition_is_monotone(
        values in prop::collection::vec(-3.0f64..3.0, 2..7),
        a in -0.5f64..1.5,
        b in -0.5f64..1.5,
    ) {
        let knots: Vec<f64> = (0..values.len()).map(|i| i as f64 / (values.len() - 1) as f64).collect();
        let beta = Distortion::piecewise_linear(knots, values).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(beta.increasing_part(hi) >= beta.increasing_part(lo) - 1e-12);
        prop_assert!(beta.decreasing_part(hi) >= beta.decreasing_part(lo) - 1e-12);
        prop_assert!((beta.increasing_part(hi) - beta.decreasing_part(hi) - beta.eval(hi)).abs() < 1e-12);
        prop_assert!(beta.total_variation(lo, hi) >= (beta.eval(hi) - beta.eval(lo)).abs() - 1e-12);
    }
}
