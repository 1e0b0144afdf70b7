//! Covariance of `X` and a distortion `β(Y)`, and upper bounds for it.
//!
//! The exact value follows the Hoeffding route
//! `Cov[X, β(Y)] = ∫ Cov[X, τ_y(Y)] dβ(y)`. Bounds come in three flavors:
//! the classical Cauchy–Schwarz / Grüss inequalities, the QDE bound
//! `D_p · G_p`, and the regression bound `Δ_p · Γ_p`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremal::kappa;
use crate::models::{
    regression_curve, threshold_cov_at_level, Distortion, JointModel, Marginal, OUTER_TOL,
};
use crate::numerics::{integrate_with_breaks, linspace, maximize_unimodal, Tolerance};

/// Hölder conjugates `1/p + 1/q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
}

impl ExponentPair {
    /// The pair with the given `p > 1`.
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("p must be in (1, ∞), got {p}")));
        }
        Ok(Self {
            p,
            q: p / (p - 1.0),
        })
    }

    pub fn from_pair(p: f64, q: f64) -> Result<Self> {
        if !(p > 1.0 && q > 1.0) || (1.0 / p + 1.0 / q - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "({p}, {q}) are not conjugate exponents"
            )));
        }
        Ok(Self { p, q })
    }
}

/// `A_p[Z] = (E|Z - EZ|^p)^{1/p}`.
pub fn abs_central_moment(m: &Marginal, p: f64) -> f64 {
    match m {
        Marginal::UniformUnit => 0.5 / (p + 1.0).powf(1.0 / p),
        Marginal::FiniteDiscrete(d) => {
            let mu = m.mean();
            let s: f64 = d
                .points()
                .iter()
                .zip(d.probs())
                .map(|(x, w)| w * (x - mu).abs().powf(p))
                .sum();
            s.powf(1.0 / p)
        }
    }
}

/// `A_q[τ_y(Y)] = κ_q(G(y))^{1/q}`.
pub fn indicator_moment(g_at_y: f64, q: f64) -> f64 {
    kappa(q, g_at_y).powf(1.0 / q)
}

fn unit_breaks(beta: &Distortion) -> Vec<f64> {
    beta.breakpoints()
        .into_iter()
        .filter(|b| *b > 0.0 && *b < 1.0)
        .collect()
}

/// `Cov[X, β(Y)]` via the Hoeffding representation.
pub fn hoeffding_cov(jm: &JointModel, beta: &Distortion) -> Result<f64> {
    match &jm.marginal_y {
        Marginal::UniformUnit => {
            let val = integrate_with_breaks(
                |v| {
                    let d = beta.derivative(v);
                    if d == 0.0 {
                        0.0
                    } else {
                        threshold_cov_at_level(jm, v).unwrap_or(f64::NAN) * d
                    }
                },
                0.0,
                1.0,
                &unit_breaks(beta),
                OUTER_TOL,
            )?;
            Ok(val)
        }
        Marginal::FiniteDiscrete(d) => {
            let pts = d.points();
            let cum = d.cumulative();
            let mut total = 0.0;
            for k in 0..pts.len() - 1 {
                let jump = beta.eval(pts[k + 1]) - beta.eval(pts[k]);
                total += threshold_cov_at_level(jm, cum[k])? * jump;
            }
            Ok(total)
        }
    }
}

/// `D_p = sup |Cov[X, τ_y(Y)]| / (A_p[X] κ_q(G(y))^{1/q})` over `G(y) ∈ (0, 1)`.
pub fn qde_dependence_coefficient(jm: &JointModel, pq: ExponentPair) -> Result<f64> {
    let a_x = abs_central_moment(&jm.marginal_x, pq.p);
    if a_x == 0.0 {
        return Ok(0.0);
    }
    let ratio = |g: f64| -> f64 {
        let den = indicator_moment(g, pq.q);
        if den <= 0.0 {
            return 0.0;
        }
        threshold_cov_at_level(jm, g).map_or(f64::NAN, |c| c.abs() / (a_x * den))
    };
    match &jm.marginal_y {
        Marginal::UniformUnit => {
            let grid = linspace(1e-6, 1.0 - 1e-6, 2001);
            let vals: Vec<f64> = grid.iter().map(|&g| ratio(g)).collect();
            if let Some(bad) = vals.iter().position(|v| !v.is_finite()) {
                return Err(Error::domain(format!(
                    "ratio is not finite at G = {}",
                    grid[bad]
                )));
            }
            let mut best = vals.iter().copied().fold(0.0, f64::max);
            // refine every local maximum that could beat the grid value
            let tol = Tolerance::default();
            for i in 0..grid.len() {
                let left = if i == 0 {
                    f64::NEG_INFINITY
                } else {
                    vals[i - 1]
                };
                let right = vals.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
                if vals[i] >= left
                    && vals[i] >= right
                    && vals[i] > 0.0
                    && vals[i] >= best * (1.0 - 1e-4)
                {
                    let lo = grid[i.saturating_sub(1)];
                    let hi = grid[(i + 1).min(grid.len() - 1)];
                    let (_, m) = maximize_unimodal(ratio, lo, hi, tol)?;
                    best = best.max(m);
                }
            }
            Ok(best)
        }
        Marginal::FiniteDiscrete(d) => {
            let cum = d.cumulative();
            Ok(cum[..cum.len() - 1]
                .iter()
                .map(|&g| ratio(g))
                .fold(0.0, f64::max))
        }
    }
}

/// `G_p = A_p[X] ∫ κ_q(G(y))^{1/q} d|β|(y)`.
pub fn qde_gruss_factor(jm: &JointModel, beta: &Distortion, pq: ExponentPair) -> Result<f64> {
    let a_x = abs_central_moment(&jm.marginal_x, pq.p);
    let integral = match &jm.marginal_y {
        Marginal::UniformUnit => integrate_with_breaks(
            |v| indicator_moment(v, pq.q) * beta.derivative(v).abs(),
            0.0,
            1.0,
            &unit_breaks(beta),
            OUTER_TOL.with_subdivisions(2000),
        )?,
        Marginal::FiniteDiscrete(d) => {
            let pts = d.points();
            let cum = d.cumulative();
            (0..pts.len() - 1)
                .map(|k| indicator_moment(cum[k], pq.q) * beta.total_variation(pts[k], pts[k + 1]))
                .sum()
        }
    };
    Ok(a_x * integral)
}

/// Bounds that ignore the dependence structure beyond second moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalBounds {
    /// `√Var[X] √Var[β(Y)]`
    pub cauchy_schwarz: f64,
    /// `(A-a)(B-b)/4`
    pub gruss: f64,
    /// `|Corr[X,Y]| (A-a)(B-b)/4`; only meaningful under a linear-regression model.
    pub corr_form: f64,
}

/// `(a, A, b, B)` with `X ∈ [a, A]` and `β(Y) ∈ [b, B]`.
pub type BoundingBox = (f64, f64, f64, f64);

/// Mean and variance of `β(Y)`.
fn distortion_moments(m: &Marginal, beta: &Distortion) -> Result<(f64, f64)> {
    match m {
        Marginal::UniformUnit => {
            let br = unit_breaks(beta);
            let mean = integrate_with_breaks(|v| beta.eval(v), 0.0, 1.0, &br, OUTER_TOL)?;
            let var =
                integrate_with_breaks(|v| (beta.eval(v) - mean).powi(2), 0.0, 1.0, &br, OUTER_TOL)?;
            Ok((mean, var))
        }
        Marginal::FiniteDiscrete(d) => {
            let mean: f64 = d
                .points()
                .iter()
                .zip(d.probs())
                .map(|(y, w)| w * beta.eval(*y))
                .sum();
            let var = d
                .points()
                .iter()
                .zip(d.probs())
                .map(|(y, w)| w * (beta.eval(*y) - mean).powi(2))
                .sum();
            Ok((mean, var))
        }
    }
}

/// `[min β(Y), max β(Y)]` over the support of `Y`.
fn distortion_range(m: &Marginal, beta: &Distortion) -> (f64, f64) {
    let pts: Vec<f64> = match m {
        Marginal::UniformUnit => {
            let mut p = vec![0.0, 1.0];
            p.extend(unit_breaks(beta));
            p
        }
        Marginal::FiniteDiscrete(d) => d.points().to_vec(),
    };
    pts.iter()
        .map(|y| beta.eval(*y))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
            (lo.min(b), hi.max(b))
        })
}

/// Smallest box containing the supports of `X` and `β(Y)`.
pub fn natural_box(jm: &JointModel, beta: &Distortion) -> BoundingBox {
    let (a, big_a) = jm.marginal_x.support();
    let (b, big_b) = distortion_range(&jm.marginal_y, beta);
    (a, big_a, b, big_b)
}

fn pearson_corr(jm: &JointModel) -> Result<f64> {
    let cov = hoeffding_cov(jm, &Distortion::identity())?;
    if jm.is_uniform() {
        return Ok(12.0 * cov);
    }
    let den = (jm.marginal_x.variance() * jm.marginal_y.variance()).sqrt();
    if den == 0.0 {
        return Err(Error::domain(
            "correlation undefined for a degenerate marginal",
        ));
    }
    Ok(cov / den)
}

pub fn classical_bounds(
    jm: &JointModel,
    beta: &Distortion,
    bx: BoundingBox,
) -> Result<ClassicalBounds> {
    let (a, big_a, b, big_b) = bx;
    if !(a <= big_a && b <= big_b) {
        return Err(Error::domain(format!("malformed box {bx:?}")));
    }
    let (xa, x_hi) = jm.marginal_x.support();
    let (ba, b_hi) = distortion_range(&jm.marginal_y, beta);
    let slack = 1e-9;
    if xa < a - slack || x_hi > big_a + slack {
        return Err(Error::BoxViolation(format!(
            "X ranges over [{xa}, {x_hi}], box is [{a}, {big_a}]"
        )));
    }
    if ba < b - slack || b_hi > big_b + slack {
        return Err(Error::BoxViolation(format!(
            "β(Y) ranges over [{ba}, {b_hi}], box is [{b}, {big_b}]"
        )));
    }
    let (_, var_beta) = distortion_moments(&jm.marginal_y, beta)?;
    let gruss = (big_a - a) * (big_b - b) / 4.0;
    Ok(ClassicalBounds {
        cauchy_schwarz: (jm.marginal_x.variance() * var_beta).sqrt(),
        gruss,
        corr_form: pearson_corr(jm)?.abs() * gruss,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionBound {
    /// `Δ_p = A_p[r(V)] / A_p[U]`
    pub delta: f64,
    /// `Γ_p = A_p[U] A_q[β(V)]`
    pub gamma: f64,
    pub bound: f64,
}

/// Bound from Hölder's inequality applied to `Cov[U, β(V)] = E[r(V)(β(V) - Eβ(V))]`,
/// where `r` is the centered regression function. Requires uniform marginals.
pub fn regression_bound(
    jm: &JointModel,
    beta: &Distortion,
    pq: ExponentPair,
) -> Result<RegressionBound> {
    if !jm.is_uniform() {
        return Err(Error::Precondition(
            "regression_bound requires uniform marginals".into(),
        ));
    }
    let a_u = abs_central_moment(&Marginal::UniformUnit, pq.p);
    let mut breaks = unit_breaks(beta);
    breaks.push(0.5);
    let r_norm = integrate_with_breaks(
        |v| {
            if v <= 0.0 || v >= 1.0 {
                return 0.0;
            }
            regression_curve(jm, v).map_or(f64::NAN, |r| r.abs().powf(pq.p))
        },
        0.0,
        1.0,
        &breaks,
        OUTER_TOL,
    )?
    .powf(1.0 / pq.p);
    let (mean_beta, _) = distortion_moments(&jm.marginal_y, beta)?;
    let beta_norm = integrate_with_breaks(
        |v| (beta.eval(v) - mean_beta).abs().powf(pq.q),
        0.0,
        1.0,
        &breaks,
        OUTER_TOL,
    )?
    .powf(1.0 / pq.q);
    let delta = r_norm / a_u;
    let gamma = a_u * beta_norm;
    Ok(RegressionBound {
        delta,
        gamma,
        bound: delta * gamma,
    })
}

/// `Cov[X, β(Y)] = Corr[X,Y] · G₀` split, which holds under linear regression of `X` on `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrussFormReport {
    pub corr: f64,
    /// `√(Var[X]/Var[Y]) Cov[Y, β(Y)]`
    pub g0: f64,
    pub product: f64,
    pub exact_cov: f64,
    /// Whether `corr · g0` reproduces the exact covariance for this model.
    pub consistent: bool,
}

pub fn gruss_form(jm: &JointModel, beta: &Distortion) -> Result<GrussFormReport> {
    let var_y = jm.marginal_y.variance();
    if var_y == 0.0 || jm.marginal_x.variance() == 0.0 {
        return Err(Error::domain("Grüss form needs non-degenerate marginals"));
    }
    let (mean_beta, _) = distortion_moments(&jm.marginal_y, beta)?;
    let mean_y = jm.marginal_y.mean();
    let cov_y_beta = match &jm.marginal_y {
        Marginal::UniformUnit => integrate_with_breaks(
            |v| (v - mean_y) * (beta.eval(v) - mean_beta),
            0.0,
            1.0,
            &unit_breaks(beta),
            OUTER_TOL,
        )?,
        Marginal::FiniteDiscrete(d) => d
            .points()
            .iter()
            .zip(d.probs())
            .map(|(y, w)| w * (y - mean_y) * (beta.eval(*y) - mean_beta))
            .sum(),
    };
    let corr = pearson_corr(jm)?;
    let g0 = (jm.marginal_x.variance() / var_y).sqrt() * cov_y_beta;
    let exact_cov = hoeffding_cov(jm, beta)?;
    let product = corr * g0;
    Ok(GrussFormReport {
        corr,
        g0,
        product,
        exact_cov,
        consistent: (product - exact_cov).abs() <= 1e-8,
    })
}

/// Exact covariance next to every bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub exact_cov: f64,
    pub cauchy_schwarz: f64,
    pub gruss: f64,
    pub corr_form: f64,
    pub qde_dependence: f64,
    pub qde_factor: f64,
    pub qde_bound: f64,
    pub regression_dependence: f64,
    pub regression_factor: f64,
    pub regression_bound: f64,
}

/// Assembles a [`BoundReport`]; the box defaults to the natural supports.
/// Regression quantities are `NaN` unless both marginals are uniform.
pub fn bound_report(
    jm: &JointModel,
    beta: &Distortion,
    pq: ExponentPair,
    bx: Option<BoundingBox>,
) -> Result<BoundReport> {
    let bx = bx.unwrap_or_else(|| natural_box(jm, beta));
    let (left, right) = rayon::join(
        || -> Result<_> { Ok((hoeffding_cov(jm, beta)?, classical_bounds(jm, beta, bx)?)) },
        || -> Result<_> {
            Ok((
                qde_dependence_coefficient(jm, pq)?,
                qde_gruss_factor(jm, beta, pq)?,
            ))
        },
    );
    let ((exact_cov, classical), (d, g)) = (left?, right?);
    let reg = if jm.is_uniform() {
        regression_bound(jm, beta, pq)?
    } else {
        RegressionBound {
            delta: f64::NAN,
            gamma: f64::NAN,
            bound: f64::NAN,
        }
    };
    Ok(BoundReport {
        exact_cov,
        cauchy_schwarz: classical.cauchy_schwarz,
        gruss: classical.gruss,
        corr_form: classical.corr_form,
        qde_dependence: d,
        qde_factor: g,
        qde_bound: d * g,
        regression_dependence: reg.delta,
        regression_factor: reg.gamma,
        regression_bound: reg.bound,
    })
}
