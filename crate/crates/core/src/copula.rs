//! Bivariate copula families and their convex combinations.
//!
//! Families: Fréchet lower bound `max{0, u+v-1}`, Fréchet upper bound
//! `min{u, v}`, independence `uv`, Farlie–Gumbel–Morgenstern
//! `uv(1 + θ(1-u)(1-v))`, and the Genest–Ghoudi Archimedean family
//!
//! ```text
//! C_α(u, v) = max{0, P(u, v)}^{1/α},
//! P(u, v)   = 1 - ((1 - u^α)^{1/α} + (1 - v^α)^{1/α})^α,   α ∈ (0, 1).
//! ```

use serde::Serialize;

use crate::error::{Error, Result};

/// Axiom-check threshold: a lattice violation larger than this fails.
pub const AXIOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    FrechetLower,
    FrechetUpper,
    Independence,
    Fgm { theta: f64 },
    GgArchimedean { alpha: f64 },
    Mixture(Vec<(f64, Copula)>),
}

/// A validated copula. Construct through the family constructors or
/// [`convex_combine`].
#[derive(Debug, Clone, PartialEq)]
pub struct Copula {
    family: Family,
}

impl Copula {
    pub fn frechet_lower() -> Self {
        Self {
            family: Family::FrechetLower,
        }
    }

    pub fn frechet_upper() -> Self {
        Self {
            family: Family::FrechetUpper,
        }
    }

    pub fn independence() -> Self {
        Self {
            family: Family::Independence,
        }
    }

    pub fn fgm(theta: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&theta) {
            return Err(Error::domain(format!(
                "FGM theta must lie in [-1, 1], got {theta}"
            )));
        }
        Ok(Self {
            family: Family::Fgm { theta },
        })
    }

    /// The Archimedean family; `alpha` must lie in the open interval (0, 1).
    pub fn gg_archimedean(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!(
                "gg-archimedean alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(Self {
            family: Family::GgArchimedean { alpha },
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Family identifier as used on the command line.
    pub fn id(&self) -> &'static str {
        match self.family {
            Family::FrechetLower => "frechet-lower",
            Family::FrechetUpper => "frechet-upper",
            Family::Independence => "independence",
            Family::Fgm { .. } => "fgm",
            Family::GgArchimedean { .. } => "gg-archimedean",
            Family::Mixture(_) => "mix",
        }
    }

    /// Human-readable description including parameters.
    pub fn label(&self) -> String {
        match &self.family {
            Family::Fgm { theta } => format!("fgm(theta={theta})"),
            Family::GgArchimedean { alpha } => format!("gg-archimedean(alpha={alpha})"),
            Family::Mixture(parts) => {
                let inner: Vec<String> = parts
                    .iter()
                    .map(|(w, c)| format!("{w}*{}", c.label()))
                    .collect();
                format!("mix({})", inner.join(" + "))
            }
            _ => self.id().to_string(),
        }
    }

    /// `C(u, v)`; errors outside the unit square.
    pub fn eval(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.value(u, v))
    }

    /// `C(u, v)` with arguments clamped into `[0, 1]`. Used on hot paths where
    /// the caller already guarantees the domain.
    pub fn value(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
        match &self.family {
            Family::FrechetLower => (u + v - 1.0).max(0.0),
            Family::FrechetUpper => u.min(v),
            Family::Independence => u * v,
            Family::Fgm { theta } => u * v * (1.0 + theta * (1.0 - u) * (1.0 - v)),
            Family::GgArchimedean { alpha } => gg::value(*alpha, u, v),
            Family::Mixture(parts) => parts.iter().map(|(w, c)| w * c.value(u, v)).sum(),
        }
    }

    /// `∂C/∂v (u, v)`, the conditional cdf `P[U ≤ u | V = v]`.
    ///
    /// At a kink of the family the right derivative is returned.
    pub fn partial_v(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.partial_v_value(u, v))
    }

    /// Unchecked [`Copula::partial_v`]; arguments are clamped.
    pub fn partial_v_value(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
        match &self.family {
            Family::FrechetLower => {
                if u + v >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Family::FrechetUpper => {
                if v < u {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Independence => u,
            Family::Fgm { theta } => u * (1.0 + theta * (1.0 - u) * (1.0 - 2.0 * v)),
            Family::GgArchimedean { alpha } => gg::partial_v(*alpha, u, v),
            Family::Mixture(parts) => parts.iter().map(|(w, c)| w * c.partial_v_value(u, v)).sum(),
        }
    }

    /// Finite-difference estimate of `∂C/∂v` with step `1e-6`: central in the
    /// interior, one-sided at `v ∈ {0, 1}` and where the stencil would cross the
    /// zero boundary of the Archimedean family.
    pub fn partial_v_fd(&self, u: f64, v: f64) -> f64 {
        const H: f64 = 1e-6;
        let lo = (v - H).max(0.0);
        let hi = (v + H).min(1.0);
        let (lo, hi) = match self.family {
            Family::GgArchimedean { alpha } => {
                let boundary_v = gg::boundary(alpha, u);
                if lo < boundary_v && boundary_v < hi {
                    if v >= boundary_v {
                        (v, hi)
                    } else {
                        (lo, v)
                    }
                } else {
                    (lo, hi)
                }
            }
            _ => (lo, hi),
        };
        ((self.value(u, hi) - self.value(u, lo)) / (hi - lo)).clamp(0.0, 1.0)
    }

    /// Points `u ∈ (0, 1)` where `u ↦ C(u, v)` or `u ↦ ∂C/∂v(u, v)` is not
    /// smooth. Quadrature over `u` splits at these.
    pub fn kinks_in_u(&self, v: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_kinks(v, &mut out);
        out.retain(|k| *k > 0.0 && *k < 1.0);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn collect_kinks(&self, v: f64, out: &mut Vec<f64>) {
        match &self.family {
            Family::FrechetLower => out.push(1.0 - v),
            Family::FrechetUpper => out.push(v),
            Family::Independence | Family::Fgm { .. } => {}
            // The boundary is symmetric in (u, v).
            Family::GgArchimedean { alpha } => out.push(gg::boundary(*alpha, v)),
            Family::Mixture(parts) => parts.iter().for_each(|(_, c)| c.collect_kinks(v, out)),
        }
    }

    /// Checks groundedness, uniform margins, the Fréchet–Hoeffding envelope
    /// and the 2-increasing property on a `(grid_n+1)²` lattice.
    pub fn check_axioms(&self, grid_n: usize) -> AxiomReport {
        check_surface_axioms(|u, v| self.value(u, v), grid_n)
    }
}

/// Convex combination `Σ wᵢ Cᵢ`.
pub fn convex_combine(weights: &[f64], parts: Vec<Copula>) -> Result<Copula> {
    if weights.len() != parts.len() || weights.is_empty() {
        return Err(Error::Weight(format!(
            "{} weights for {} copulas",
            weights.len(),
            parts.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::Weight(format!(
            "weight {w} is negative or not finite"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::Weight(format!("weights sum to {sum}, expected 1")));
    }
    Ok(Copula {
        family: Family::Mixture(weights.iter().copied().zip(parts).collect()),
    })
}

/// `(1-α)·FL + α·FU`.
pub fn frechet_mixture(alpha: f64) -> Result<Copula> {
    check_unit("mixture weight", alpha)?;
    convex_combine(
        &[1.0 - alpha, alpha],
        vec![Copula::frechet_lower(), Copula::frechet_upper()],
    )
}

/// `(1-α)·FGM(-1) + α·FU`.
pub fn fgm_upper_mixture(alpha: f64) -> Result<Copula> {
    check_unit("mixture weight", alpha)?;
    convex_combine(
        &[1.0 - alpha, alpha],
        vec![Copula::fgm(-1.0)?, Copula::frechet_upper()],
    )
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {x} is outside [0, 1]")))
    }
}

/// Outcome of [`Copula::check_axioms`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomReport {
    pub pass: bool,
    pub grid_n: usize,
    /// Most negative rectangle volume (0 when none is negative).
    pub worst_rect_volume: f64,
    /// Largest deviation from `C(u,0)=C(0,v)=0`, `C(u,1)=u`, `C(1,v)=v`.
    pub worst_margin_error: f64,
    /// Largest excursion outside `[max(0,u+v-1), min(u,v)]`.
    pub worst_envelope_error: f64,
}

/// Axiom check for an arbitrary surface on the unit square.
pub fn check_surface_axioms<F: Fn(f64, f64) -> f64>(surface: F, grid_n: usize) -> AxiomReport {
    let grid_n = grid_n.max(2);
    let n = grid_n + 1;
    let node = |i: usize| i as f64 / grid_n as f64;
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = surface(node(i), node(j));
        }
    }
    let at = |i: usize, j: usize| values[i * n + j];

    let mut margin: f64 = 0.0;
    let mut envelope: f64 = 0.0;
    for i in 0..n {
        let t = node(i);
        margin = margin
            .max(at(i, 0).abs())
            .max(at(0, i).abs())
            .max((at(i, grid_n) - t).abs())
            .max((at(grid_n, i) - t).abs());
    }
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (node(i), node(j));
            let c = at(i, j);
            envelope = envelope.max((u + v - 1.0).max(0.0) - c).max(c - u.min(v));
        }
    }
    let mut volume: f64 = 0.0;
    for i in 0..grid_n {
        for j in 0..grid_n {
            let vol = at(i + 1, j + 1) - at(i, j + 1) - at(i + 1, j) + at(i, j);
            volume = volume.min(vol);
        }
    }
    AxiomReport {
        pass: margin <= AXIOM_TOL && envelope <= AXIOM_TOL && volume >= -AXIOM_TOL,
        grid_n,
        worst_rect_volume: volume,
        worst_margin_error: margin,
        worst_envelope_error: envelope.max(0.0),
    }
}

/// Genest–Ghoudi family, evaluated in the log domain.
mod gg {
    /// `ln(1 - t^α)` for `t ∈ [0, 1]`.
    fn ln_one_minus_pow(alpha: f64, t: f64) -> f64 {
        (-(alpha * t.ln()).exp_m1()).ln()
    }

    /// Generator `φ(t) = (1 - t^α)^{1/α}` in log form.
    fn ln_generator(alpha: f64, t: f64) -> f64 {
        ln_one_minus_pow(alpha, t) / alpha
    }

    /// Inner expression `P(u, v)` together with `ln s`, `s = φ(u) + φ(v)`.
    fn inner(alpha: f64, u: f64, v: f64) -> (f64, f64) {
        let s = ln_generator(alpha, u).exp() + ln_generator(alpha, v).exp();
        let ln_s = s.ln();
        (-(alpha * ln_s).exp_m1(), ln_s)
    }

    pub(super) fn value(alpha: f64, u: f64, v: f64) -> f64 {
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        if u == 1.0 {
            return v;
        }
        if v == 1.0 {
            return u;
        }
        let (p, _) = inner(alpha, u, v);
        if p <= 0.0 {
            0.0
        } else {
            (p.ln() / alpha).exp().min(u.min(v))
        }
    }

    /// Analytic `∂C/∂v = P^{1/α-1} s^{α-1} (1-v^α)^{1/α-1} v^{α-1}` on `P > 0`.
    pub(super) fn partial_v(alpha: f64, u: f64, v: f64) -> f64 {
        if u == 1.0 {
            return 1.0;
        }
        if u == 0.0 || v == 0.0 || v == 1.0 {
            return 0.0;
        }
        let (p, ln_s) = inner(alpha, u, v);
        if p <= 0.0 {
            return 0.0;
        }
        let k = 1.0 / alpha - 1.0;
        let ln_d = k * p.ln()
            + (alpha - 1.0) * ln_s
            + k * ln_one_minus_pow(alpha, v)
            + (alpha - 1.0) * v.ln();
        ln_d.exp().clamp(0.0, 1.0)
    }

    /// The `u` at which `P(u, v) = 0`; `C(·, v)` vanishes to its left.
    pub(super) fn boundary(alpha: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 1.0;
        }
        if v >= 1.0 {
            return 0.0;
        }
        // φ(u) = 1 - φ(v)  ⇔  u = (1 - (1 - φ(v))^α)^{1/α}
        let one_minus_b = -ln_generator(alpha, v).exp_m1();
        let inner = -(alpha * one_minus_b.ln()).exp_m1();
        (inner.ln() / alpha).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn builtins() -> Vec<Copula> {
        vec![
            Copula::frechet_lower(),
            Copula::frechet_upper(),
            Copula::independence(),
            Copula::fgm(-1.0).unwrap(),
            Copula::fgm(0.6).unwrap(),
            Copula::gg_archimedean(0.3).unwrap(),
            Copula::gg_archimedean(0.7).unwrap(),
            frechet_mixture(0.25).unwrap(),
            fgm_upper_mixture(0.2).unwrap(),
        ]
    }

    #[test]
    fn eval_examples() {
        assert!(close(
            Copula::frechet_lower().eval(0.3, 0.9).unwrap(),
            0.2,
            1e-15
        ));
        assert!(close(
            Copula::fgm(-1.0).unwrap().eval(0.5, 0.5).unwrap(),
            0.1875,
            1e-15
        ));
        let mix = convex_combine(
            &[0.25, 0.75],
            vec![Copula::frechet_lower(), Copula::frechet_upper()],
        )
        .unwrap();
        assert!(close(mix.eval(0.5, 0.5).unwrap(), 0.375, 1e-15));
    }

    #[test]
    fn eval_rejects_outside_unit_square() {
        assert!(matches!(
            Copula::independence().eval(1.2, 0.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            Copula::independence().partial_v(0.5, -0.1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn parameter_validation() {
        assert!(Copula::fgm(1.5).is_err());
        assert!(Copula::gg_archimedean(0.0).is_err());
        assert!(Copula::gg_archimedean(1.0).is_err());
        assert!(Copula::gg_archimedean(0.999).is_ok());
    }

    #[test]
    fn partial_v_examples() {
        assert!(close(
            Copula::independence().partial_v(0.4, 0.77).unwrap(),
            0.4,
            1e-15
        ));
        let fgm = Copula::fgm(-1.0).unwrap();
        assert!(close(fgm.partial_v(0.5, 0.25).unwrap(), 0.375, 1e-15));
        assert!(close(fgm.partial_v_fd(0.5, 0.25), 0.375, 1e-8));
        assert_eq!(Copula::frechet_upper().partial_v(0.3, 0.6).unwrap(), 0.0);
        assert_eq!(Copula::frechet_upper().partial_v(0.6, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn gg_analytic_derivative_matches_finite_difference() {
        for alpha in [0.2, 0.5, 0.7, 0.9] {
            let c = Copula::gg_archimedean(alpha).unwrap();
            for i in 1..20 {
                for j in 1..20 {
                    let (u, v) = (i as f64 / 20.0, j as f64 / 20.0);
                    let a = c.partial_v_value(u, v);
                    let fd = c.partial_v_fd(u, v);
                    assert!(close(a, fd, 1e-5), "alpha={alpha} u={u} v={v}: {a} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn convex_combine_examples() {
        let half = convex_combine(
            &[0.5, 0.5],
            vec![Copula::frechet_lower(), Copula::frechet_upper()],
        )
        .unwrap();
        assert!(close(half.eval(0.25, 0.75).unwrap(), 0.125, 1e-15));
        let m = convex_combine(
            &[0.75, 0.25],
            vec![Copula::fgm(-1.0).unwrap(), Copula::frechet_upper()],
        )
        .unwrap();
        assert!(close(m.eval(0.5, 0.5).unwrap(), 0.265625, 1e-15));
        let bad = convex_combine(
            &[0.5, 0.6],
            vec![Copula::frechet_lower(), Copula::frechet_upper()],
        );
        assert!(matches!(bad, Err(Error::Weight(_))));
        let neg = convex_combine(
            &[1.5, -0.5],
            vec![Copula::frechet_lower(), Copula::frechet_upper()],
        );
        assert!(matches!(neg, Err(Error::Weight(_))));
    }

    #[test]
    fn singleton_combination_is_identity() {
        for c in builtins() {
            let single = convex_combine(&[1.0], vec![c.clone()]).unwrap();
            for i in 0..=10 {
                for j in 0..=10 {
                    let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                    assert_eq!(single.value(u, v), c.value(u, v));
                }
            }
        }
    }

    #[test]
    fn axioms_hold_for_builtins() {
        for c in builtins() {
            let r = c.check_axioms(101);
            assert!(r.pass, "{}: {r:?}", c.label());
        }
    }

    #[test]
    fn corrupted_surface_fails_axioms() {
        let r = check_surface_axioms(|u, v| u * v + 0.1, 101);
        assert!(!r.pass);
        assert!(close(r.worst_margin_error, 0.1, 1e-12));
    }

    #[test]
    fn envelope_on_lattice() {
        for c in builtins() {
            for i in 0..=50 {
                for j in 0..=50 {
                    let (u, v) = (i as f64 / 50.0, j as f64 / 50.0);
                    let x = c.value(u, v);
                    assert!(x >= (u + v - 1.0).max(0.0) - 1e-12 && x <= u.min(v) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn gg_margins_are_exact() {
        let c = Copula::gg_archimedean(0.7).unwrap();
        for i in 0..100 {
            let t = i as f64 / 99.0;
            assert_eq!(c.value(1.0, t), t);
            assert_eq!(c.value(t, 1.0), t);
            assert_eq!(c.value(0.0, t), 0.0);
        }
    }

    #[test]
    fn gg_vanishes_left_of_boundary() {
        let alpha = 0.7;
        let c = Copula::gg_archimedean(alpha).unwrap();
        for v in [0.2, 0.5, 0.8] {
            let b = gg::boundary(alpha, v);
            assert!(b > 0.0 && b < 1.0);
            assert_eq!(c.value(b * 0.999, v), 0.0);
            assert!(c.value((b * 1.001).min(1.0), v) > 0.0);
        }
    }

    #[test]
    fn identifiers() {
        assert_eq!(Copula::gg_archimedean(0.5).unwrap().id(), "gg-archimedean");
        assert_eq!(frechet_mixture(0.5).unwrap().id(), "mix");
    }
}
