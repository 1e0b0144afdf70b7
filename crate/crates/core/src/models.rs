//! Marginals, joint models, distortions, and threshold covariances.
//!
//! A [`JointModel`] couples a copula with two marginals so that
//! `P[X ≤ x, Y ≤ y] = C(F(x), G(y))`. The central derived quantity is the
//! threshold covariance `Cov[X, τ_y(Y)]` with `τ_y(Y) = 1{Y > y}`:
//!
//! ```text
//! Cov[X, τ_y(Y)] = ∫ (C(F(x), G(y)) - F(x)G(y)) dx.
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::copula::Copula;
use crate::error::{Error, Result};
use crate::numerics::{find_root, integrate_with_breaks, linspace, Tolerance};

/// Tolerance for integrals nested inside other integrals or ratios.
pub(crate) const INNER_TOL: Tolerance = Tolerance {
    abs_tol: 1e-13,
    rel_tol: 1e-13,
    max_subdivisions: 400,
};

/// Tolerance for outermost integrals.
pub(crate) const OUTER_TOL: Tolerance = Tolerance {
    abs_tol: 1e-10,
    rel_tol: 1e-10,
    max_subdivisions: 400,
};

/// Finite discrete law: `P[Y = points[k]] = probs[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiscrete")]
pub struct DiscreteMarginal {
    points: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDiscrete {
    points: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawDiscrete> for DiscreteMarginal {
    type Error = Error;

    fn try_from(raw: RawDiscrete) -> Result<Self> {
        DiscreteMarginal::new(raw.points, raw.probs)
    }
}

impl DiscreteMarginal {
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::Marginal(format!(
                "{} points for {} probabilities",
                points.len(),
                probs.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) || points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Marginal(
                "points must be finite and strictly increasing".into(),
            ));
        }
        if probs.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::Marginal("probabilities must be positive".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Marginal(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self { points, probs })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `G(y_k)` for every atom; the last entry is 1.
    pub fn cumulative(&self) -> Vec<f64> {
        let k = self.probs.len();
        let mut acc = 0.0;
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                acc += p;
                if i + 1 == k {
                    1.0
                } else {
                    acc
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    UniformUnit,
    FiniteDiscrete(DiscreteMarginal),
}

impl Marginal {
    pub fn discrete(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        DiscreteMarginal::new(points, probs).map(Marginal::FiniteDiscrete)
    }

    /// Right-continuous cdf.
    pub fn cdf(&self, y: f64) -> f64 {
        match self {
            Marginal::UniformUnit => y.clamp(0.0, 1.0),
            Marginal::FiniteDiscrete(d) => {
                let below = d.points.partition_point(|p| *p <= y);
                if below == 0 {
                    0.0
                } else {
                    d.cumulative()[below - 1]
                }
            }
        }
    }

    /// Generalized inverse `inf{y : F(y) ≥ w}`.
    pub fn quantile(&self, w: f64) -> f64 {
        match self {
            Marginal::UniformUnit => w.clamp(0.0, 1.0),
            Marginal::FiniteDiscrete(d) => {
                let cum = d.cumulative();
                let k = cum.partition_point(|c| *c < w).min(cum.len() - 1);
                d.points[k]
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Marginal::UniformUnit => 0.5,
            Marginal::FiniteDiscrete(d) => d.points.iter().zip(&d.probs).map(|(x, p)| x * p).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Marginal::UniformUnit => 1.0 / 12.0,
            Marginal::FiniteDiscrete(d) => {
                let m = self.mean();
                d.points
                    .iter()
                    .zip(&d.probs)
                    .map(|(x, p)| p * (x - m).powi(2))
                    .sum()
            }
        }
    }

    /// Smallest closed interval carrying the law.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Marginal::UniformUnit => (0.0, 1.0),
            Marginal::FiniteDiscrete(d) => (d.points[0], d.points[d.points.len() - 1]),
        }
    }
}

/// Copula plus marginals of `X` and `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    pub copula: Copula,
    pub marginal_x: Marginal,
    pub marginal_y: Marginal,
}

impl JointModel {
    pub fn new(copula: Copula, marginal_x: Marginal, marginal_y: Marginal) -> Self {
        Self {
            copula,
            marginal_x,
            marginal_y,
        }
    }

    /// Both marginals uniform on `[0, 1]`, i.e. `(X, Y) = (U, V)`.
    pub fn uniform(copula: Copula) -> Self {
        Self::new(copula, Marginal::UniformUnit, Marginal::UniformUnit)
    }

    pub fn is_uniform(&self) -> bool {
        self.marginal_x == Marginal::UniformUnit && self.marginal_y == Marginal::UniformUnit
    }
}

/// `𝒞(v) = ∫₀¹ (C(u, v) - uv) du`, with the family's kinks declared.
pub fn qde_value(copula: &Copula, v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::domain(format!("v = {v} is outside [0, 1]")));
    }
    if v == 0.0 || v == 1.0 {
        return Ok(0.0);
    }
    let kinks = copula.kinks_in_u(v);
    Ok(integrate_with_breaks(
        |u| copula.value(u, v) - u * v,
        0.0,
        1.0,
        &kinks,
        INNER_TOL,
    )?)
}

/// `Cov[X, τ_y(Y)]` as a function of the level `g = G(y)`.
pub fn threshold_cov_at_level(jm: &JointModel, g: f64) -> Result<f64> {
    if g <= 0.0 || g >= 1.0 {
        return Ok(0.0);
    }
    match &jm.marginal_x {
        Marginal::UniformUnit => qde_value(&jm.copula, g),
        Marginal::FiniteDiscrete(d) => {
            // F is a step function: constant F(x_i) on [x_i, x_{i+1}).
            let cum = d.cumulative();
            Ok(d.points
                .windows(2)
                .zip(&cum)
                .map(|(w, f)| (w[1] - w[0]) * (jm.copula.value(*f, g) - f * g))
                .sum())
        }
    }
}

/// `Cov[X, τ_y(Y)]` with `τ_y(Y) = 1{Y > y}`.
pub fn threshold_cov(jm: &JointModel, y: f64) -> Result<f64> {
    threshold_cov_at_level(jm, jm.marginal_y.cdf(y))
}

/// Centered regression function `E[U | V = y] - 1/2` for uniform marginals.
pub fn regression_curve(jm: &JointModel, y: f64) -> Result<f64> {
    if !jm.is_uniform() {
        return Err(Error::Precondition(
            "regression_curve requires uniform marginals".into(),
        ));
    }
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::domain(format!("y = {y} is outside (0, 1)")));
    }
    let kinks = jm.copula.kinks_in_u(y);
    let mass_below = integrate_with_breaks(
        |u| jm.copula.partial_v_value(u, y),
        0.0,
        1.0,
        &kinks,
        INNER_TOL,
    )?;
    // E[U | V=y] = ∫ (1 - ∂C/∂v) du
    Ok(0.5 - mass_below)
}

/// Bounded-variation distortion `β`, with its monotone split `β = β₁ - β₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distortion {
    kind: DistortionKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistortionKind {
    Identity,
    /// `sign(y)|y|^k`, `k ≥ 1`.
    Power(f64),
    /// Linear interpolation through `(knots, values)`, constant outside.
    PiecewiseLinear {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Distortion {
    pub fn identity() -> Self {
        Self {
            kind: DistortionKind::Identity,
        }
    }

    pub fn power(k: f64) -> Result<Self> {
        if !(k >= 1.0) || !k.is_finite() {
            return Err(Error::domain(format!(
                "power exponent must be >= 1, got {k}"
            )));
        }
        Ok(Self {
            kind: DistortionKind::Power(k),
        })
    }

    pub fn piecewise_linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::domain(
                "piecewise-linear distortion needs >= 2 matching knots and values",
            ));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1]))
            || values.iter().chain(&knots).any(|x| !x.is_finite())
        {
            return Err(Error::domain(
                "knots must be finite and strictly increasing",
            ));
        }
        Ok(Self {
            kind: DistortionKind::PiecewiseLinear { knots, values },
        })
    }

    pub fn kind(&self) -> &DistortionKind {
        &self.kind
    }

    pub fn eval(&self, y: f64) -> f64 {
        match &self.kind {
            DistortionKind::Identity => y,
            DistortionKind::Power(k) => y.abs().powf(*k).copysign(y),
            DistortionKind::PiecewiseLinear { knots, values } => {
                let n = knots.len();
                if y <= knots[0] {
                    return values[0];
                }
                if y >= knots[n - 1] {
                    return values[n - 1];
                }
                let i = knots.partition_point(|k| *k <= y) - 1;
                let t = (y - knots[i]) / (knots[i + 1] - knots[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        }
    }

    /// Right derivative `β′(y)`.
    pub fn derivative(&self, y: f64) -> f64 {
        match &self.kind {
            DistortionKind::Identity => 1.0,
            DistortionKind::Power(k) => k * y.abs().powf(k - 1.0),
            DistortionKind::PiecewiseLinear { knots, values } => {
                let n = knots.len();
                if y < knots[0] || y >= knots[n - 1] {
                    return 0.0;
                }
                let i = knots.partition_point(|k| *k <= y) - 1;
                (values[i + 1] - values[i]) / (knots[i + 1] - knots[i])
            }
        }
    }

    /// Non-decreasing part `β₁`.
    pub fn increasing_part(&self, y: f64) -> f64 {
        match &self.kind {
            DistortionKind::PiecewiseLinear { .. } => self.signed_variation(y, true),
            _ => self.eval(y),
        }
    }

    /// Non-decreasing part `β₂` with `β = β₁ - β₂`.
    pub fn decreasing_part(&self, y: f64) -> f64 {
        match &self.kind {
            DistortionKind::PiecewiseLinear { .. } => self.signed_variation(y, false),
            _ => 0.0,
        }
    }

    fn signed_variation(&self, y: f64, positive: bool) -> f64 {
        let DistortionKind::PiecewiseLinear { knots, values } = &self.kind else {
            unreachable!()
        };
        let start = if positive { values[0] } else { 0.0 };
        let mut acc = start;
        for i in 0..knots.len() - 1 {
            if y <= knots[i] {
                break;
            }
            let frac = ((y.min(knots[i + 1]) - knots[i]) / (knots[i + 1] - knots[i])).min(1.0);
            let delta = (values[i + 1] - values[i]) * frac;
            if positive {
                acc += delta.max(0.0);
            } else {
                acc += (-delta).max(0.0);
            }
        }
        acc
    }

    /// Total variation of `β` over `[a, b]`, i.e. `∫_a^b d|β|`.
    pub fn total_variation(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        (self.increasing_part(b) - self.increasing_part(a))
            + (self.decreasing_part(b) - self.decreasing_part(a))
    }

    /// Points where `β′` jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            DistortionKind::Identity => Vec::new(),
            DistortionKind::Power(_) => vec![0.0],
            DistortionKind::PiecewiseLinear { knots, .. } => knots.clone(),
        }
    }
}

impl fmt::Display for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DistortionKind::Identity => write!(f, "identity"),
            DistortionKind::Power(k) => write!(f, "power:{k}"),
            DistortionKind::PiecewiseLinear { knots, values } => {
                let pts: Vec<String> = knots
                    .iter()
                    .zip(values)
                    .map(|(k, v)| format!("{k}:{v}"))
                    .collect();
                write!(f, "piecewise:{}", pts.join(","))
            }
        }
    }
}

impl FromStr for Distortion {
    type Err = Error;

    /// `identity`, `power:K`, or `piecewise:x0:y0,x1:y1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "identity" {
            return Ok(Distortion::identity());
        }
        if let Some(k) = s.strip_prefix("power:") {
            let k: f64 = k
                .parse()
                .map_err(|_| Error::domain(format!("bad power exponent '{k}'")))?;
            return Distortion::power(k);
        }
        if let Some(rest) = s.strip_prefix("piecewise:") {
            let mut knots = Vec::new();
            let mut values = Vec::new();
            for pair in rest.split(',') {
                let (x, y) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::domain(format!("bad knot '{pair}'")))?;
                knots.push(
                    x.parse()
                        .map_err(|_| Error::domain(format!("bad knot '{x}'")))?,
                );
                values.push(
                    y.parse()
                        .map_err(|_| Error::domain(format!("bad value '{y}'")))?,
                );
            }
            return Distortion::piecewise_linear(knots, values);
        }
        Err(Error::domain(format!("unknown distortion '{s}'")))
    }
}

/// Discrete marginal built so that `U` is PQDE on `Y` under a copula that is
/// itself not QDE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructedMarginal {
    pub marginal: DiscreteMarginal,
    /// Interval `[v*, v**]` on which the QDE curve is strictly positive.
    pub interval: (f64, f64),
    /// Interior partial sums `v₁, v₁+v₂, …`.
    pub partial_sums: Vec<f64>,
}

/// Builds a `k`-atom marginal for `Y` whose interior cdf levels all fall where
/// `𝒞_α(v) > 0` for the Archimedean copula with parameter `alpha`.
///
/// The positive interval is the widest run of a 2001-point scan with
/// `𝒞_α > 1e-9`, its ends refined by root finding. Equal probabilities are
/// used when their partial sums fit inside; otherwise the interior partial
/// sums are spread evenly over the interval. Atoms sit at `y_k = k`.
pub fn construct_pqde_marginal(alpha: f64, k: usize) -> Result<ConstructedMarginal> {
    if k < 2 {
        return Err(Error::domain(format!("need at least 2 atoms, got {k}")));
    }
    let copula = Copula::gg_archimedean(alpha)?;
    let threshold = 10.0 * Tolerance::default().abs_tol;

    let grid = linspace(0.0, 1.0, 2001);
    let curve: Vec<f64> = grid
        .iter()
        .map(|&v| qde_value(&copula, v))
        .collect::<Result<_>>()?;

    // widest run of consecutive scan points above the threshold
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < grid.len() {
        if curve[i] > threshold {
            let start = i;
            while i + 1 < grid.len() && curve[i + 1] > threshold {
                i += 1;
            }
            let wider = best.is_none_or(|(s, e)| grid[i] - grid[start] > grid[e] - grid[s]);
            if wider {
                best = Some((start, i));
            }
        }
        i += 1;
    }
    let (start, end) = best.ok_or(Error::NoPositiveInterval { alpha })?;

    let f = |v: f64| qde_value(&copula, v).unwrap_or(f64::NAN);
    let root_tol = Tolerance::default().with_abs(1e-12);
    let lo = if start == 0 {
        0.0
    } else {
        find_root(f, grid[start - 1], grid[start], root_tol)?
    };
    let hi = if end + 1 == grid.len() {
        1.0
    } else {
        find_root(f, grid[end], grid[end + 1], root_tol)?
    };

    let equal: Vec<f64> = (1..k).map(|i| i as f64 / k as f64).collect();
    let partial_sums = if equal.iter().all(|s| *s > lo && *s < hi && f(*s) > 0.0) {
        equal
    } else {
        (1..k)
            .map(|i| lo + (hi - lo) * i as f64 / k as f64)
            .collect::<Vec<_>>()
    };
    if let Some(bad) = partial_sums.iter().find(|s| !(f(**s) > 0.0)) {
        return Err(Error::Precondition(format!(
            "partial sum {bad} has non-positive QDE value"
        )));
    }

    let mut probs = Vec::with_capacity(k);
    let mut prev = 0.0;
    for s in &partial_sums {
        probs.push(s - prev);
        prev = *s;
    }
    probs.push(1.0 - prev);
    // absorb rounding so the probabilities sum to one exactly
    let drift: f64 = 1.0 - probs.iter().sum::<f64>();
    probs[k - 1] += drift;
    let points = (1..=k).map(|i| i as f64).collect();

    Ok(ConstructedMarginal {
        marginal: DiscreteMarginal::new(points, probs)?,
        interval: (lo, hi),
        partial_sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{fgm_upper_mixture, frechet_mixture};

    fn d123() -> Marginal {
        Marginal::discrete(vec![1.0, 2.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap()
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(Marginal::UniformUnit.cdf(0.3), 0.3);
        assert_eq!(Marginal::UniformUnit.cdf(-1.0), 0.0);
        assert!((d123().cdf(2.0) - 0.7).abs() < 1e-15);
        assert_eq!(d123().cdf(0.5), 0.0);
        assert_eq!(d123().cdf(3.0), 1.0);
        assert!((d123().cdf(2.5) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let m = d123();
        assert_eq!(m.quantile(0.1), 1.0);
        assert_eq!(m.quantile(0.2), 1.0);
        assert_eq!(m.quantile(0.21), 2.0);
        assert_eq!(m.quantile(0.99), 3.0);
    }

    #[test]
    fn discrete_validation() {
        assert!(Marginal::discrete(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(Marginal::discrete(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(Marginal::discrete(vec![1.0, 2.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn discrete_json_shape() {
        let d = DiscreteMarginal::new(vec![1.0, 2.0], vec![0.25, 0.75]).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"points":[1.0,2.0],"probs":[0.25,0.75]}"#);
        let back: DiscreteMarginal = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert!(
            serde_json::from_str::<DiscreteMarginal>(r#"{"points":[1.0],"probs":[0.5]}"#).is_err()
        );
    }

    #[test]
    fn threshold_cov_independence_is_zero() {
        let jm = JointModel::new(Copula::independence(), d123(), Marginal::UniformUnit);
        for y in [0.1, 0.5, 0.9] {
            assert!(threshold_cov(&jm, y).unwrap().abs() < 1e-15);
        }
        let jm = JointModel::uniform(Copula::independence());
        assert!(threshold_cov(&jm, 0.4).unwrap().abs() < 1e-15);
    }

    #[test]
    fn threshold_cov_frechet_mixture() {
        let jm = JointModel::uniform(frechet_mixture(0.75).unwrap());
        assert!((threshold_cov(&jm, 0.5).unwrap() - 0.0625).abs() < 1e-12);
        assert_eq!(threshold_cov(&jm, -0.5).unwrap(), 0.0);
        assert_eq!(threshold_cov(&jm, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn threshold_cov_discrete_x_matches_direct_sum() {
        // Cov[X, 1{V > v}] = E[X 1{V>v}] - E[X](1-v) computed from the joint pmf.
        let c = fgm_upper_mixture(0.3).unwrap();
        let xs = vec![0.0, 1.0, 4.0];
        let ps = vec![0.3, 0.3, 0.4];
        let jm = JointModel::new(
            c.clone(),
            Marginal::discrete(xs.clone(), ps).unwrap(),
            Marginal::UniformUnit,
        );
        let v = 0.35;
        let cum = [0.3, 0.6, 1.0];
        let mut e_xt = 0.0;
        let mut prev = 0.0;
        for (x, f) in xs.iter().zip(cum) {
            // P[X = x, V > v] = (F_i - F_{i-1}) - (C(F_i, v) - C(F_{i-1}, v))
            let p = (f - prev) - (c.value(f, v) - c.value(prev, v));
            e_xt += x * p;
            prev = f;
        }
        let mean = jm.marginal_x.mean();
        let direct = e_xt - mean * (1.0 - v);
        assert!((threshold_cov(&jm, v).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn regression_curve_examples() {
        let fu = JointModel::uniform(Copula::frechet_upper());
        assert!((regression_curve(&fu, 0.3).unwrap() + 0.2).abs() < 1e-12);
        let fgm = JointModel::uniform(Copula::fgm(-1.0).unwrap());
        // E[U|V=v] - 1/2 = -theta(1-2v)/6
        assert!((regression_curve(&fgm, 1e-9).unwrap() - 1.0 / 6.0).abs() < 1e-8);
        assert!((regression_curve(&fgm, 0.25).unwrap() - 1.0 / 12.0).abs() < 1e-12);
        let ind = JointModel::uniform(Copula::independence());
        assert!(regression_curve(&ind, 0.77).unwrap().abs() < 1e-14);
        assert!(matches!(regression_curve(&ind, 0.0), Err(Error::Domain(_))));
        assert!(matches!(regression_curve(&ind, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn distortion_decomposition() {
        let b = Distortion::piecewise_linear(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.25]).unwrap();
        for y in [-0.1, 0.0, 0.2, 0.5, 0.7, 1.0, 1.3] {
            assert!((b.increasing_part(y) - b.decreasing_part(y) - b.eval(y)).abs() < 1e-15);
        }
        assert!((b.total_variation(0.0, 1.0) - 1.75).abs() < 1e-15);
        assert!((b.derivative(0.7) + 1.5).abs() < 1e-15);
        let p = Distortion::power(2.0).unwrap();
        assert!((p.total_variation(0.0, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(p.eval(-0.5), -0.25);
        assert!(Distortion::power(0.5).is_err());
    }

    #[test]
    fn distortion_parsing() {
        assert_eq!(
            "identity".parse::<Distortion>().unwrap(),
            Distortion::identity()
        );
        assert_eq!(
            "power:3".parse::<Distortion>().unwrap(),
            Distortion::power(3.0).unwrap()
        );
        let pl: Distortion = "piecewise:0:0,1:2".parse().unwrap();
        assert_eq!(pl.eval(0.5), 1.0);
        assert!("log".parse::<Distortion>().is_err());
        assert_eq!(Distortion::power(2.0).unwrap().to_string(), "power:2");
    }

    #[test]
    fn constructed_marginal_alpha_07_two_atoms() {
        let c = construct_pqde_marginal(0.7, 2).unwrap();
        let copula = Copula::gg_archimedean(0.7).unwrap();
        assert_eq!(c.partial_sums.len(), 1);
        assert!(qde_value(&copula, c.partial_sums[0]).unwrap() > 0.0);
        // scan oracle: the curve changes sign near v = 0.5669
        assert!(
            (c.interval.0 - 0.566_869_003_450_275_7).abs() < 1e-9,
            "{:?}",
            c.interval
        );
        assert_eq!(c.interval.1, 1.0);
    }

    #[test]
    fn constructed_marginal_alpha_05_three_atoms() {
        let c = construct_pqde_marginal(0.5, 3).unwrap();
        let copula = Copula::gg_archimedean(0.5).unwrap();
        assert_eq!(c.marginal.points(), &[1.0, 2.0, 3.0]);
        for s in &c.partial_sums {
            assert!(qde_value(&copula, *s).unwrap() > 0.0);
            assert!(*s > c.interval.0 && *s < c.interval.1);
        }
        assert!((c.interval.0 - 0.037_108_635_164_277_02).abs() < 1e-9);
    }

    #[test]
    fn constructed_marginal_threshold_covs() {
        let c = construct_pqde_marginal(0.7, 3).unwrap();
        let jm = JointModel::new(
            Copula::gg_archimedean(0.7).unwrap(),
            Marginal::UniformUnit,
            Marginal::FiniteDiscrete(c.marginal.clone()),
        );
        for y in c.marginal.points() {
            assert!(threshold_cov(&jm, *y).unwrap() >= 0.0);
        }
        assert!(threshold_cov(&jm, 0.5).unwrap().abs() == 0.0);
        assert!(threshold_cov(&jm, 3.5).unwrap().abs() == 0.0);
        assert!(threshold_cov(&jm, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn construction_rejects_single_atom() {
        assert!(construct_pqde_marginal(0.7, 1).is_err());
    }
}
