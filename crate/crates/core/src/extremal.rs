//! The extremal central-moment problem on a bounded support.
//!
//! `κ_p(x) = x(1-x)^p + (1-x)x^p` is the `p`-th absolute central moment of a
//! Bernoulli(`x`) variable. Its maximum `K_p` over `[0, 1]` gives the sharp
//! bound `E|X - EX|^p ≤ (A-a)^p K_p` for any `X` supported in `[a, A]`.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{find_root, Tolerance};

/// Above this exponent `κ_p` is evaluated in the log domain.
const LOG_DOMAIN_P: f64 = 50.0;

/// `κ_p(x) = x(1-x)^p + (1-x)x^p`.
pub fn kappa(p: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    if p > LOG_DOMAIN_P {
        ln_kappa(p, x).exp()
    } else {
        x * (1.0 - x).powf(p) + (1.0 - x) * x.powf(p)
    }
}

/// `ln κ_p(x)`; `-∞` at the endpoints.
pub fn ln_kappa(p: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return f64::NEG_INFINITY;
    }
    let a = x.ln() + p * (-x).ln_1p();
    let b = (-x).ln_1p() + p * x.ln();
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Maximizer and maximum of `κ_p` together with their analytic brackets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalMomentResult {
    pub p: f64,
    /// Maximizer in `(0, 1/2]`; `1 - x_p` is the mirror maximizer.
    pub x_p: f64,
    /// `K_p = κ_p(x_p)`; underflows to 0 for huge `p`, see `ln_k_p`.
    pub k_p: f64,
    pub ln_k_p: f64,
    /// `(1/(p+1)) (p/(p+1))^p`
    pub bracket_lo: f64,
    /// `bracket_lo + 2^{-(1+p)}`
    pub bracket_hi: f64,
    pub x_bracket_lo: f64,
    pub x_bracket_hi: f64,
    /// Point in `(1/(p+1), 1/2)` where the derivative of the critical-point ratio
    /// changes sign; only defined for `p > 3`.
    pub xp_star: Option<f64>,
    /// `2 / (1 + √((p-3)/(p+1)))` for `p > 3`, so that `x_p ≤ bracket_const/(p+1)`.
    pub bracket_const: f64,
}

/// `ln R` at `x = (1 + e^s)/(p + 1)`, where `R(x) = 1` characterizes the
/// critical points of `κ_p` other than `1/2`.
fn ln_ratio(p: f64, s: f64) -> f64 {
    let t = s.exp();
    s - (p - 1.0 - t).ln() + (p - 1.0) * ((p - t).ln() - t.ln_1p())
}

/// Solves `max κ_p` for `p ≥ 1`.
pub fn solve_extremum(p: f64) -> Result<ExtremalMomentResult> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain(format!(
            "p must be a finite number >= 1, got {p}"
        )));
    }
    let ln_lo = -(p).ln_1p() - p * (1.0 / p).ln_1p();
    let bracket_lo = ln_lo.exp();
    let bracket_hi = bracket_lo + (-(1.0 + p) * std::f64::consts::LN_2).exp();
    let x_bracket_lo = 1.0 / (p + 1.0);

    if p <= 3.0 {
        let k_p = 0.5f64.powf(p);
        return Ok(ExtremalMomentResult {
            p,
            x_p: 0.5,
            k_p,
            ln_k_p: k_p.ln(),
            bracket_lo,
            bracket_hi,
            x_bracket_lo,
            x_bracket_hi: 0.5,
            xp_star: None,
            bracket_const: (p + 1.0) / 2.0,
        });
    }

    let r = ((p - 3.0) / (p + 1.0)).sqrt();
    let xp_star = 0.5 * (1.0 - r);
    let bracket_const = 2.0 / (1.0 + r);

    // On (1/(p+1), x_p*] the ratio rises from 0 through 1 exactly once.
    let s_hi = ((p + 1.0) * xp_star - 1.0).ln();
    let mut s_lo = (p - 1.0).ln() - (p - 1.0) * p.ln() - 8.0;
    s_lo = s_lo.min(s_hi - 1.0);
    while ln_ratio(p, s_lo) > 0.0 {
        s_lo -= 8.0;
    }
    let tol = Tolerance::default().with_abs(1e-15);
    let s = find_root(|s| ln_ratio(p, s), s_lo, s_hi, tol)?;
    let x_p = (1.0 + s.exp()) / (p + 1.0);
    let ln_k_p = ln_kappa(p, x_p);
    let k_p = if p > LOG_DOMAIN_P {
        ln_k_p.exp()
    } else {
        kappa(p, x_p)
    };

    Ok(ExtremalMomentResult {
        p,
        x_p,
        k_p,
        ln_k_p,
        bracket_lo,
        bracket_hi,
        x_bracket_lo,
        x_bracket_hi: bracket_const / (p + 1.0),
        xp_star: Some(xp_star),
        bracket_const,
    })
}

/// Edmundson–Madansky upper bound for `E f(X)` with `f` convex, `X ∈ [a, A]`, `EX = μ`.
pub fn em_bound(f_at_a: f64, f_at_upper: f64, a: f64, upper: f64, mu: f64) -> Result<f64> {
    if !(a < upper) {
        return Err(Error::domain(format!("need a < A, got [{a}, {upper}]")));
    }
    if !(a..=upper).contains(&mu) {
        return Err(Error::domain(format!("mean {mu} outside [{a}, {upper}]")));
    }
    Ok(((upper - mu) * f_at_a + (mu - a) * f_at_upper) / (upper - a))
}

/// What is known about the mean of `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanInfo {
    Exact(f64),
    Interval(f64, f64),
    Unknown,
    Symmetric,
}

/// Sharp upper bound on `E|X - EX|^p` for `X ∈ [a, A]`.
pub fn central_moment_bound(a: f64, upper: f64, p: f64, mean: MeanInfo) -> Result<f64> {
    if !(a < upper) || !a.is_finite() || !upper.is_finite() {
        return Err(Error::domain(format!(
            "need finite a < A, got [{a}, {upper}]"
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::domain(format!("p must be >= 1, got {p}")));
    }
    let width = upper - a;
    let scale = width.powf(p);
    match mean {
        MeanInfo::Exact(mu) => {
            if !(a..=upper).contains(&mu) {
                return Err(Error::domain(format!("mean {mu} outside [{a}, {upper}]")));
            }
            Ok(scale * kappa(p, (mu - a) / width))
        }
        MeanInfo::Unknown => Ok(scale * solve_extremum(p)?.k_p),
        MeanInfo::Symmetric => Ok(scale / 2f64.powf(p)),
        MeanInfo::Interval(lo, hi) => {
            if !(a <= lo && lo <= hi && hi <= upper) {
                return Err(Error::domain(format!(
                    "mean interval [{lo}, {hi}] is not inside [{a}, {upper}]"
                )));
            }
            let (l, h) = ((lo - a) / width, (hi - a) / width);
            // κ_p is unimodal on each side of 1/2 with peaks at x_p and 1 - x_p,
            // so the maximum over [l, h] sits at an endpoint or an interior peak.
            let x_p = solve_extremum(p)?.x_p;
            let best = [l, h, x_p, 1.0 - x_p]
                .into_iter()
                .filter(|x| (l..=h).contains(x))
                .map(|x| kappa(p, x))
                .fold(0.0, f64::max);
            Ok(scale * best)
        }
    }
}

/// Writes `p,x_p,K_p,bracket_lo,bracket_hi` rows with 20 significant digits.
pub fn write_kp_table<W: Write>(out: &mut W, rows: &[ExtremalMomentResult]) -> io::Result<()> {
    writeln!(out, "p,x_p,K_p,bracket_lo,bracket_hi")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.19e},{:.19e},{:.19e},{:.19e}",
            r.p, r.x_p, r.k_p, r.bracket_lo, r.bracket_hi
        )?;
    }
    Ok(())
}
