//! Quadrant dependence (QD) and quadrant dependence in expectation (QDE).
//!
//! A copula is PQD (NQD) when `C(u,v) - uv` is everywhere non-negative
//! (non-positive), and PQDE (NQDE) when the averaged curve
//! `𝒞(v) = ∫₀¹ (C(u,v) - uv) du` has that sign. QD implies QDE.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{convex_combine, Copula};
use crate::error::{Error, Result};
use crate::models::qde_value;
use crate::numerics::{find_root, linspace, Tolerance};

/// Default zero band for `C - uv` and `𝒞`.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default lattice resolution for classification.
pub const DEFAULT_GRID: usize = 200;

/// Depth of the dyadic refinement towards the edges of the unit square.
const EDGE_DEPTH: i32 = 26;
/// Shallower edge refinement for ratios of quadrature values, which lose
/// relative accuracy where `𝒞` itself is tiny.
const CURVE_EDGE_DEPTH: i32 = 12;

/// Uniform grid `i/n` plus dyadic points `2^-k` and `1 - 2^-k`.
///
/// Several families only reveal their sign structure within a thin band near
/// an edge (e.g. the Archimedean family with parameter near 1), which a uniform
/// lattice alone misses.
fn refined_axis(n: usize, depth: i32) -> Vec<f64> {
    let mut pts = linspace(0.0, 1.0, n + 1);
    for k in 1..=depth {
        let e = 2f64.powi(-k);
        pts.push(e);
        pts.push(1.0 - e);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Lattice of `sign(C(u,v) - uv)` at `(i/n, j/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignGrid {
    pub grid_n: usize,
    signs: Vec<i8>,
}

impl SignGrid {
    /// Sign at `(u, v) = (i/n, j/n)`.
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.signs[i * (self.grid_n + 1) + j]
    }

    /// Number of `(-1, 0, +1)` cells.
    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for s in &self.signs {
            c[(*s + 1) as usize] += 1;
        }
        c
    }

    /// `u,v,sign` rows, with `u` varying slowest.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let n = self.grid_n;
        writeln!(out, "u,v,sign")?;
        for i in 0..=n {
            for j in 0..=n {
                writeln!(
                    out,
                    "{},{},{}",
                    fmt17(i as f64 / n as f64),
                    fmt17(j as f64 / n as f64),
                    self.get(i, j)
                )?;
            }
        }
        Ok(())
    }

    /// Plain PGM with `u` along columns and `v` increasing upwards;
    /// gray levels 0, 128, 255 encode -1, 0, +1.
    pub fn write_pgm<W: Write>(&self, out: &mut W, comment: Option<&str>) -> io::Result<()> {
        let side = self.grid_n + 1;
        writeln!(out, "P2")?;
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{side} {side}")?;
        writeln!(out, "255")?;
        for j in (0..side).rev() {
            let row: Vec<&str> = (0..side)
                .map(|i| match self.get(i, j) {
                    -1 => "0",
                    0 => "128",
                    _ => "255",
                })
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Formats with 17 significant digits, trimming nothing.
pub(crate) fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn sign_of(x: f64, tol: f64) -> i8 {
    if x > tol {
        1
    } else if x < -tol {
        -1
    } else {
        0
    }
}

pub fn sign_surface(c: &Copula, grid_n: usize, tol: f64) -> Result<SignGrid> {
    if grid_n < 2 {
        return Err(Error::domain(format!("grid_n must be >= 2, got {grid_n}")));
    }
    let n = grid_n;
    let signs: Vec<i8> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let u = i as f64 / n as f64;
            (0..=n).map(move |j| {
                if i == 0 || j == 0 || i == n || j == n {
                    return 0;
                }
                let v = j as f64 / n as f64;
                sign_of(c.value(u, v) - u * v, tol)
            })
        })
        .collect();
    Ok(SignGrid { grid_n, signs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QdVerdict {
    #[serde(rename = "NQD")]
    Nqd,
    #[serde(rename = "PQD")]
    Pqd,
    /// `C = uv` within tolerance everywhere, i.e. both NQD and PQD.
    #[serde(rename = "Both")]
    Both,
    #[serde(rename = "Neither")]
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QdClassification {
    pub verdict: QdVerdict,
    /// Location of the largest positive `C - uv`, if above tolerance.
    pub witness_pos: Option<(f64, f64)>,
    pub witness_neg: Option<(f64, f64)>,
    pub max_pos: f64,
    pub max_neg: f64,
    /// The deciding violation is within ten times the tolerance.
    pub marginal: bool,
}

/// Verdict from the extreme values of `C - uv` on a lattice refined towards the edges.
pub fn classify_qd(c: &Copula, grid_n: usize, tol: f64) -> Result<QdClassification> {
    if grid_n < 2 {
        return Err(Error::domain(format!("grid_n must be >= 2, got {grid_n}")));
    }
    let axis = refined_axis(grid_n, EDGE_DEPTH);
    let inner = &axis[1..axis.len() - 1];
    let identity = ((0.0, (0.5, 0.5)), (0.0, (0.5, 0.5)));
    let ((max_pos, at_pos), (min_neg, at_neg)) = inner
        .par_iter()
        .map(|&u| {
            let mut acc = identity;
            for &v in inner {
                let d = c.value(u, v) - u * v;
                if d > acc.0 .0 {
                    acc.0 = (d, (u, v));
                }
                if d < acc.1 .0 {
                    acc.1 = (d, (u, v));
                }
            }
            acc
        })
        .reduce(
            || identity,
            |a, b| {
                // ties resolve to the first operand so the reduction is order independent
                let pos = if b.0 .0 > a.0 .0 || (b.0 .0 == a.0 .0 && b.0 .1 < a.0 .1) {
                    b.0
                } else {
                    a.0
                };
                let neg = if b.1 .0 < a.1 .0 || (b.1 .0 == a.1 .0 && b.1 .1 < a.1 .1) {
                    b.1
                } else {
                    a.1
                };
                (pos, neg)
            },
        );

    let has_pos = max_pos > tol;
    let has_neg = min_neg < -tol;
    let verdict = match (has_pos, has_neg) {
        (true, true) => QdVerdict::Neither,
        (true, false) => QdVerdict::Pqd,
        (false, true) => QdVerdict::Nqd,
        (false, false) => QdVerdict::Both,
    };
    let marginal = match verdict {
        QdVerdict::Neither => max_pos.min(-min_neg) <= 10.0 * tol,
        QdVerdict::Pqd => min_neg < 0.0 || max_pos <= 10.0 * tol,
        QdVerdict::Nqd => max_pos > 0.0 || -min_neg <= 10.0 * tol,
        QdVerdict::Both => max_pos.max(-min_neg) > 0.0,
    };
    Ok(QdClassification {
        verdict,
        witness_pos: has_pos.then_some(at_pos),
        witness_neg: has_neg.then_some(at_neg),
        max_pos,
        max_neg: min_neg,
        marginal,
    })
}

/// `(v, 𝒞(v))` pairs.
pub fn qde_curve(c: &Copula, v_points: &[f64]) -> Result<Vec<(f64, f64)>> {
    v_points
        .par_iter()
        .map(|&v| Ok((v, qde_value(c, v)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QdeVerdict {
    #[serde(rename = "NQDE")]
    Nqde,
    #[serde(rename = "PQDE")]
    Pqde,
    /// `𝒞 ≡ 0` within tolerance.
    #[serde(rename = "Both")]
    Both,
    #[serde(rename = "Neither")]
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QdeClassification {
    pub verdict: QdeVerdict,
    pub witness_pos: Option<f64>,
    pub witness_neg: Option<f64>,
    pub max_pos: f64,
    pub max_neg: f64,
    /// Interior zeros of `𝒞` located between grid points of opposite sign.
    pub sign_changes: Vec<f64>,
    pub marginal: bool,
}

/// Verdict from the sign pattern of `𝒞` on a uniform grid of `n_points`
/// refined towards both edges.
pub fn classify_qde(c: &Copula, n_points: usize, tol: f64) -> Result<QdeClassification> {
    if n_points < 3 {
        return Err(Error::domain(format!(
            "n_points must be >= 3, got {n_points}"
        )));
    }
    let axis = refined_axis(n_points - 1, EDGE_DEPTH);
    let curve = qde_curve(c, &axis)?;

    let mut max_pos = (0.0, None);
    let mut min_neg = (0.0, None);
    for &(v, y) in &curve {
        if y > max_pos.0 {
            max_pos = (y, Some(v));
        }
        if y < min_neg.0 {
            min_neg = (y, Some(v));
        }
    }

    let mut sign_changes = Vec::new();
    let mut last: Option<(f64, i8)> = None;
    for &(v, y) in &curve {
        let s = sign_of(y, tol);
        if s == 0 {
            continue;
        }
        if let Some((v0, s0)) = last {
            if s0 != s {
                let root = find_root(
                    |t| qde_value(c, t).unwrap_or(f64::NAN),
                    v0,
                    v,
                    Tolerance::default().with_abs(1e-12),
                )?;
                sign_changes.push(root);
            }
        }
        last = Some((v, s));
    }

    let has_pos = max_pos.0 > tol;
    let has_neg = min_neg.0 < -tol;
    let verdict = match (has_pos, has_neg) {
        (true, true) => QdeVerdict::Neither,
        (true, false) => QdeVerdict::Pqde,
        (false, true) => QdeVerdict::Nqde,
        (false, false) => QdeVerdict::Both,
    };
    let marginal = match verdict {
        QdeVerdict::Neither => max_pos.0.min(-min_neg.0) <= 10.0 * tol,
        QdeVerdict::Pqde => min_neg.0 < 0.0 || max_pos.0 <= 10.0 * tol,
        QdeVerdict::Nqde => max_pos.0 > 0.0 || -min_neg.0 <= 10.0 * tol,
        QdeVerdict::Both => false,
    };
    Ok(QdeClassification {
        verdict,
        witness_pos: if has_pos { max_pos.1 } else { None },
        witness_neg: if has_neg { min_neg.1 } else { None },
        max_pos: max_pos.0,
        max_neg: min_neg.0,
        sign_changes,
        marginal,
    })
}

/// Mixing-weight thresholds for `(1-α)C₀ + αC₁`:
/// NQD iff `α ≤ m`, NQDE iff `α ≤ m′`, PQDE iff `α ≥ M′`, PQD iff `α ≥ M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub m: f64,
    pub m_prime: f64,
    #[serde(rename = "M_prime")]
    pub big_m_prime: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

/// Rounds to the resolution `tol`, matching a bisection stopped at width `tol`.
fn quantize(x: f64, tol: f64) -> f64 {
    let scale = (1.0 / tol).round();
    if scale.is_finite() && scale >= 1.0 {
        (x * scale).round() / scale
    } else {
        x
    }
}

/// Thresholds for the mixture of an NQD copula `c0` and a PQD copula `c1`.
///
/// Because `C_α - uv = (C₀ - uv) + α(C₁ - C₀)` is affine in `α`, the mixture is
/// NQD exactly for `α ≤ inf T` and PQD exactly for `α ≥ sup T`, where
/// `T = (uv - C₀)/(C₁ - C₀)`. The same holds for the QDE curves with
/// `ρ(v) = 𝒞₀/(𝒞₀ - 𝒞₁)`. The extremes are taken over refined lattices and
/// reported at resolution `tol`.
pub fn qd_qde_thresholds(c0: &Copula, c1: &Copula, tol: f64) -> Result<ThresholdReport> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::domain(format!("tol must be in (0, 0.5), got {tol}")));
    }
    check_qd_pair(c0, c1)?;

    let t_surface = |u: f64, v: f64| {
        let (a, b) = (c0.value(u, v), c1.value(u, v));
        (u * v - a) / (b - a)
    };
    let probes = [
        (0.25, 0.25),
        (0.25, 0.75),
        (0.5, 0.5),
        (0.75, 0.25),
        (0.75, 0.75),
    ];
    let vals: Vec<f64> = probes.iter().map(|&(u, v)| t_surface(u, v)).collect();
    if vals.iter().all(|t| (t - vals[0]).abs() <= 1e-12) {
        return Err(Error::Precondition(
            "(uv - C0)/(C1 - C0) is constant; the mixture thresholds are degenerate".into(),
        ));
    }

    let axis = refined_axis(DEFAULT_GRID, EDGE_DEPTH);
    let inner = &axis[1..axis.len() - 1];
    let (t_min, t_max) = inner
        .par_iter()
        .map(|&u| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &v in inner {
                let (a, b) = (c0.value(u, v), c1.value(u, v));
                if b - a > 1e-14 {
                    let t = (u * v - a) / (b - a);
                    lo = lo.min(t);
                    hi = hi.max(t);
                }
            }
            (lo, hi)
        })
        .reduce(
            || (f64::INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.min(b.0), a.1.max(b.1)),
        );

    let vs = refined_axis(DEFAULT_GRID, CURVE_EDGE_DEPTH);
    let rho: Vec<f64> = vs[1..vs.len() - 1]
        .par_iter()
        .map(|&v| -> Result<Option<f64>> {
            let (a, b) = (qde_value(c0, v)?, qde_value(c1, v)?);
            Ok((b - a > 1e-12).then(|| a / (a - b)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let r_min = rho.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let m = quantize(t_min.clamp(0.0, 1.0), tol);
    let m_prime = quantize(r_min.clamp(0.0, 1.0), tol).max(m);
    let big_m = quantize(t_max.clamp(0.0, 1.0), tol);
    let big_m_prime = quantize(r_max.clamp(0.0, 1.0), tol).min(big_m);
    Ok(ThresholdReport {
        m,
        m_prime,
        big_m_prime,
        big_m,
    })
}

fn check_qd_pair(c0: &Copula, c1: &Copula) -> Result<()> {
    let q0 = classify_qd(c0, DEFAULT_GRID, DEFAULT_TOL)?;
    if q0.verdict != QdVerdict::Nqd {
        return Err(Error::Precondition(format!(
            "{} is {:?}, expected NQD",
            c0.label(),
            q0.verdict
        )));
    }
    let q1 = classify_qd(c1, DEFAULT_GRID, DEFAULT_TOL)?;
    if q1.verdict != QdVerdict::Pqd {
        return Err(Error::Precondition(format!(
            "{} is {:?}, expected PQD",
            c1.label(),
            q1.verdict
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaReport {
    /// The constant ratio, when the spread is within tolerance.
    pub kappa: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

/// Tests whether `𝒞₀(v)/(𝒞₀(v) - 𝒞₁(v))` is constant on `n_points` interior
/// grid points. If it is, the mixture at that weight has `𝒞 ≡ 0`.
pub fn kappa_constant(c0: &Copula, c1: &Copula, n_points: usize, tol: f64) -> Result<KappaReport> {
    if n_points < 2 {
        return Err(Error::domain(format!(
            "n_points must be >= 2, got {n_points}"
        )));
    }
    check_qd_pair(c0, c1)?;
    let grid: Vec<f64> = (1..=n_points)
        .map(|i| i as f64 / (n_points + 1) as f64)
        .collect();
    let ratios: Vec<f64> = grid
        .par_iter()
        .map(|&v| {
            let (a, b) = (qde_value(c0, v)?, qde_value(c1, v)?);
            let gap = (a - b).abs();
            if gap <= tol {
                return Err(Error::DegenerateRatio { v, gap });
            }
            Ok(a / (a - b))
        })
        .collect::<Result<_>>()?;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = max - min;
    Ok(KappaReport {
        // reported at the resolution `tol`, like the thresholds it is compared with
        kappa: (spread <= tol).then(|| quantize(0.5 * (min + max), tol)),
        min,
        max,
        spread,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroCurveVerdict {
    Intersect,
    Tangent,
    None,
}

/// Relative position of the two zero-curves of `C_α - uv` for the
/// `(1-α)FGM(-1) + α·FU` mixture.
///
/// Writing `c = α/(1-α)`, the surface vanishes on `v_U(u) = c/(1-u)` (above the
/// diagonal) and `v_L(u) = 1 - c/u` (below it). The curves meet inside the
/// square where the gap `v_U - v_L` becomes non-positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroCurveReport {
    pub alpha: f64,
    pub c: f64,
    pub min_gap: f64,
    pub argmin_u: f64,
    pub verdict: ZeroCurveVerdict,
    /// Points where the curves cross (or touch, for a tangency).
    pub points: Vec<(f64, f64)>,
}

/// Tangency band for [`zero_curve_analysis`].
pub const ZERO_CURVE_TOL: f64 = 1e-3;

pub fn zero_curve_analysis(alpha: f64) -> Result<ZeroCurveReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    let c = alpha / (1.0 - alpha);
    let upper = |u: f64| c / (1.0 - u);
    let gap = |u: f64| c / (1.0 - u) - 1.0 + c / u;
    let slope = |u: f64| c / (1.0 - u).powi(2) - c / (u * u);
    let tol = Tolerance::default().with_abs(1e-14);
    let argmin_u = find_root(slope, 1e-6, 1.0 - 1e-6, tol)?;
    let min_gap = gap(argmin_u);

    let (verdict, points) = if min_gap < -ZERO_CURVE_TOL {
        let left = find_root(gap, 1e-12, argmin_u, tol)?;
        let right = find_root(gap, argmin_u, 1.0 - 1e-12, tol)?;
        (
            ZeroCurveVerdict::Intersect,
            vec![(left, upper(left)), (right, upper(right))],
        )
    } else if min_gap.abs() <= ZERO_CURVE_TOL {
        (ZeroCurveVerdict::Tangent, vec![(argmin_u, upper(argmin_u))])
    } else {
        (ZeroCurveVerdict::None, Vec::new())
    };
    Ok(ZeroCurveReport {
        alpha,
        c,
        min_gap,
        argmin_u,
        verdict,
        points,
    })
}

/// `(1-α)C₀ + αC₁`.
pub fn mix_pair(c0: &Copula, c1: &Copula, alpha: f64) -> Result<Copula> {
    convex_combine(&[1.0 - alpha, alpha], vec![c0.clone(), c1.clone()])
}
