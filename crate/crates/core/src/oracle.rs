//! Seeded Monte Carlo sampling from joint models.
//!
//! Samples are drawn by conditional inversion: `V` is uniform and `U` solves
//! `∂C/∂v(U, V) = W` for an independent uniform `W`. Streams are split into
//! fixed-size partitions whose generators are derived from `(seed, index)`, so
//! the output does not depend on the number of worker threads.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::copula::{Copula, Family};
use crate::error::{Error, Result};
use crate::models::{Distortion, JointModel, Marginal};
use crate::numerics::{find_root, Tolerance};

/// Samples per independently seeded partition.
pub const PARTITION: usize = 1 << 16;

/// SplitMix64 generator (Steele, Lea & Flood).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

/// Seed for partition `index` of the stream started from `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    SplitMix64::new(seed ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03)).next_u64()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleSpec {
    pub n: usize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, seed }
    }
}

const INVERSION_TOL: Tolerance = Tolerance {
    abs_tol: 1e-10,
    rel_tol: 0.0,
    max_subdivisions: 60,
};

/// `u` with `∂C/∂v(u, v) = w`; `select` picks mixture components.
pub fn conditional_inverse(c: &Copula, v: f64, w: f64, select: f64) -> Result<f64> {
    match c.family() {
        Family::FrechetUpper => Ok(v),
        Family::FrechetLower => Ok(1.0 - v),
        Family::Independence => Ok(w),
        Family::Fgm { theta } => {
            // u(1 + a(1-u)) = w with a = θ(1-2v), in cancellation-free form
            let a = theta * (1.0 - 2.0 * v);
            let b = 1.0 + a;
            Ok(2.0 * w / (b + (b * b - 4.0 * a * w).sqrt()))
        }
        Family::GgArchimedean { .. } => {
            let lo = c.kinks_in_u(v).first().copied().unwrap_or(0.0);
            let f = |u: f64| c.partial_v_value(u, v) - w;
            let (f_lo, f_hi) = (f(lo), f(1.0));
            if !(f_lo <= 0.0 && f_hi >= 0.0) {
                return Err(Error::InversionFailure {
                    v,
                    w,
                    reason: format!("conditional cdf spans [{}, {}]", f_lo + w, f_hi + w),
                });
            }
            find_root(f, lo, 1.0, INVERSION_TOL).map_err(|e| Error::InversionFailure {
                v,
                w,
                reason: e.to_string(),
            })
        }
        Family::Mixture(parts) => {
            let mut acc = 0.0;
            let last = parts.iter().rposition(|(wt, _)| *wt > 0.0).unwrap_or(0);
            for (i, (wt, part)) in parts.iter().enumerate() {
                if *wt <= 0.0 {
                    continue;
                }
                if select < acc + wt || i == last {
                    let inner = ((select - acc) / wt).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
                    return conditional_inverse(part, v, w, inner);
                }
                acc += wt;
            }
            unreachable!("mixture has a positive weight")
        }
    }
}

fn transform(m: &Marginal, u: f64) -> f64 {
    match m {
        Marginal::UniformUnit => u,
        _ => m.quantile(u),
    }
}

/// Draws `spec.n` pairs `(x, y)`; identical inputs give bit-identical output.
pub fn sample(jm: &JointModel, spec: SampleSpec) -> Result<Vec<(f64, f64)>> {
    let parts = spec.n.div_ceil(PARTITION);
    let chunks: Vec<Vec<(f64, f64)>> = (0..parts)
        .into_par_iter()
        .map(|k| {
            let len = PARTITION.min(spec.n - k * PARTITION);
            let mut rng = SplitMix64::new(derive_seed(spec.seed, k as u64));
            (0..len)
                .map(|_| {
                    let select = rng.next_open01();
                    let v = rng.next_open01();
                    let w = rng.next_open01();
                    let u = conditional_inverse(&jm.copula, v, w, select)?;
                    Ok((transform(&jm.marginal_x, u), transform(&jm.marginal_y, v)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(chunks.concat())
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Estimate {
    /// `(value - estimate) / std_error`.
    pub fn z_score(&self, value: f64) -> f64 {
        (self.estimate - value) / self.std_error
    }
}

/// Sample covariance of `(a_i, b_i)` with the plug-in standard error of the
/// mean of centered products.
pub fn covariance_estimate(a: &[f64], b: &[f64]) -> Estimate {
    let n = a.len();
    let nf = n as f64;
    let ma = a.iter().sum::<f64>() / nf;
    let mb = b.iter().sum::<f64>() / nf;
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let cov = prods.iter().sum::<f64>() / nf;
    let var = prods.iter().map(|p| (p - cov).powi(2)).sum::<f64>() / nf;
    Estimate {
        estimate: cov,
        std_error: (var / nf).sqrt(),
        n,
    }
}

/// MC estimate of `Cov[X, β(Y)]`.
pub fn estimate_cov(jm: &JointModel, beta: &Distortion, spec: SampleSpec) -> Result<Estimate> {
    let s = sample(jm, spec)?;
    let xs: Vec<f64> = s.iter().map(|p| p.0).collect();
    let zs: Vec<f64> = s.iter().map(|p| beta.eval(p.1)).collect();
    Ok(covariance_estimate(&xs, &zs))
}

/// MC estimate of `Cov[X, 1{Y > y}]`.
pub fn estimate_threshold_cov(jm: &JointModel, y: f64, spec: SampleSpec) -> Result<Estimate> {
    let s = sample(jm, spec)?;
    let xs: Vec<f64> = s.iter().map(|p| p.0).collect();
    let zs: Vec<f64> = s.iter().map(|p| if p.1 > y { 1.0 } else { 0.0 }).collect();
    Ok(covariance_estimate(&xs, &zs))
}

/// `x,y` rows.
pub fn write_samples_csv<W: Write>(out: &mut W, samples: &[(f64, f64)]) -> io::Result<()> {
    writeln!(out, "x,y")?;
    for (x, y) in samples {
        writeln!(out, "{x:.16e},{y:.16e}")?;
    }
    Ok(())
}
