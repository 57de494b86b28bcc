//! Cubic nonlinearities for the Dirac pair and the constants their
//! estimates depend on.
//!
//! A model is the right-hand side pair (N1, N2) of
//!
//! ```text
//! i(u_t + u_x) = -m v + N1(u, v)
//! i(v_t - v_x) = -m u + N2(u, v)
//! ```
//!
//! restricted to the cubic family where N1 is bilinear in (u, conj u) and
//! quadratic in (v, conj v) and N2 is the mirror image.  Every estimate the
//! diagnostics check assumes the null-structure identity
//! `Re(i conj(u) N1 + i conj(v) N2) = 0`, so models are validated by
//! sampling that residual before anything is evolved.
//!
//! Two presets are built in:
//!
//! * `thirring`:    N1 = a u |v|^2,              N2 = a v |u|^2
//! * `gross_neveu`: N1 = 2a v (conj(u) v + u conj(v)), N2 = 2a u (conj(u) v + u conj(v))
//!
//! The Gross-Neveu pair is *not* expressible as a single product
//! `(a1 u + a2 conj u)(a3 |v|^2 + a4 v^2 + a5 conj(v)^2)` (matching the two
//! needed monomials forces a third one in), so evaluation dispatches on the
//! preset tag and uses the closed form for that model.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative residual above which a model is rejected as violating the
/// null-structure identity.
pub const A2_REJECT_REL: f64 = 1e-12;

/// Cap for the small-data threshold when the model is linear (c = 0).
pub const DELTA_CAP: f64 = 1e6;

/// Half-width of the sampling box for constant estimation (real and
/// imaginary parts drawn uniformly from [-BOX, BOX]).  The sampled ratios
/// are scale invariant, so the box just needs to stay away from 0.
pub const SAMPLE_BOX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Thirring,
    GrossNeveu,
    Custom,
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Preset::Thirring => write!(f, "thirring"),
            Preset::GrossNeveu => write!(f, "gross_neveu"),
            Preset::Custom => write!(f, "custom"),
        }
    }
}

/// Coefficients of the cubic model plus the mass coupling.
///
/// `alpha`/`beta` hold the product-form coefficients
/// `(a1 u + a2 conj u)(a3 |v|^2 + a4 v^2 + a5 conj(v)^2)` used for the
/// Thirring preset and for custom models.  For the Gross-Neveu preset the
/// closed form above is used instead and `alpha[0]` carries the single real
/// coupling.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    pub alpha: [Complex64; 5],
    pub beta: [Complex64; 5],
    pub mass: f64,
    pub preset: Preset,
}

/// Constants derived from a model: the cubic bound c, the small-data
/// threshold delta, the pair-difference Lipschitz constant c_star and the
/// Lyapunov weight K.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelConstants {
    pub c: f64,
    pub delta: f64,
    pub c_star: f64,
    pub k: f64,
    /// Seed used for the sampling runs that produced `c`/`c_star`.
    pub seed: u64,
}

/// Outcome of sampling the null-structure residual over a random box.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct A2Report {
    pub max_abs: f64,
    pub max_rel: f64,
    pub n_points: usize,
    pub seed: u64,
}

impl ModelParams {
    /// Preset constructor; `alpha` is the single real coupling of either
    /// closed-form model.
    pub fn preset(name: Preset, alpha: f64, mass: f64) -> Result<ModelParams> {
        if mass < 0.0 {
            return Err(Error::Config {
                key: "model.mass".into(),
                reason: format!("mass must be nonnegative, got {mass}"),
            });
        }
        if !alpha.is_finite() || !mass.is_finite() {
            return Err(Error::Config {
                key: "model.alpha".into(),
                reason: "alpha and mass must be finite".into(),
            });
        }
        let a = Complex64::new(alpha, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match name {
            Preset::Thirring => Ok(ModelParams {
                alpha: [a, zero, one, zero, zero],
                beta: [a, zero, one, zero, zero],
                mass,
                preset: Preset::Thirring,
            }),
            Preset::GrossNeveu => Ok(ModelParams {
                // Evaluation dispatches on the tag; the first slot records
                // the coupling for reporting.
                alpha: [a, zero, zero, zero, zero],
                beta: [a, zero, zero, zero, zero],
                mass,
                preset: Preset::GrossNeveu,
            }),
            Preset::Custom => Err(Error::Config {
                key: "model.preset".into(),
                reason: "custom models must supply explicit coefficients".into(),
            }),
        }
    }

    /// Custom product-form model from explicit coefficient sets.
    pub fn custom(alpha: [Complex64; 5], beta: [Complex64; 5], mass: f64) -> Result<ModelParams> {
        if mass < 0.0 {
            return Err(Error::Config {
                key: "model.mass".into(),
                reason: format!("mass must be nonnegative, got {mass}"),
            });
        }
        if alpha.iter().chain(beta.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Config {
                key: "model.custom".into(),
                reason: "coefficients must be finite".into(),
            });
        }
        Ok(ModelParams { alpha, beta, mass, preset: Preset::Custom })
    }

    /// Single real coupling of a preset model.
    pub fn coupling(&self) -> f64 {
        self.alpha[0].re
    }

    /// Evaluate the nonlinear pair (N1, N2) at a point value.  Exact
    /// polynomial arithmetic, total on C^2.
    #[inline]
    pub fn eval_n(&self, u: Complex64, v: Complex64) -> (Complex64, Complex64) {
        match self.preset {
            Preset::GrossNeveu => {
                let a = self.alpha[0].re;
                // rho = conj(u) v + u conj(v) is real.
                let rho = 2.0 * (u.conj() * v).re;
                let s = Complex64::new(2.0 * a * rho, 0.0);
                (s * v, s * u)
            }
            Preset::Thirring | Preset::Custom => {
                let [a1, a2, a3, a4, a5] = self.alpha;
                let [b1, b2, b3, b4, b5] = self.beta;
                let vv = Complex64::new(v.norm_sqr(), 0.0);
                let uu = Complex64::new(u.norm_sqr(), 0.0);
                let n1 = (a1 * u + a2 * u.conj()) * (a3 * vv + a4 * v * v + a5 * v.conj() * v.conj());
                let n2 = (b1 * v + b2 * v.conj()) * (b3 * uu + b4 * u * u + b5 * u.conj() * u.conj());
                (n1, n2)
            }
        }
    }

    /// Null-structure residual Re(i conj(u) N1 + i conj(v) N2).  Zero for
    /// every admissible model.
    #[inline]
    pub fn a2_residual(&self, u: Complex64, v: Complex64) -> f64 {
        let (n1, n2) = self.eval_n(u, v);
        (Complex64::i() * (u.conj() * n1 + v.conj() * n2)).re
    }

    /// The two summands of the residual separately.  The Thirring model
    /// kills each one on its own; the identity only requires their sum to
    /// vanish, so this is exposed as an extra diagnostic.
    pub fn a2_residual_terms(&self, u: Complex64, v: Complex64) -> (f64, f64) {
        let (n1, n2) = self.eval_n(u, v);
        (
            (Complex64::i() * u.conj() * n1).re,
            (Complex64::i() * v.conj() * n2).re,
        )
    }

    /// Sample the residual over `n_points` pseudo-random points and report
    /// the worst absolute and relative values.  Relative means against the
    /// magnitude |conj(u) N1| + |conj(v) N2| of the terms that are supposed
    /// to cancel.
    pub fn a2_max_residual(&self, n_points: usize, seed: u64) -> A2Report {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut max_abs: f64 = 0.0;
        let mut max_rel: f64 = 0.0;
        for _ in 0..n_points {
            let (u, v) = sample_pair(&mut rng);
            let (n1, n2) = self.eval_n(u, v);
            let res = (Complex64::i() * (u.conj() * n1 + v.conj() * n2)).re.abs();
            let scale = (u.conj() * n1).norm() + (v.conj() * n2).norm();
            max_abs = max_abs.max(res);
            if scale > 0.0 {
                max_rel = max_rel.max(res / scale);
            }
        }
        A2Report { max_abs, max_rel, n_points, seed }
    }

    /// Cubic-bound ratio (|N1| |u| + |N2| |v|) / (|u|^2 |v|^2) at one point.
    #[inline]
    fn cubic_ratio(&self, u: Complex64, v: Complex64) -> Option<f64> {
        let denom = u.norm_sqr() * v.norm_sqr();
        if denom < 1e-12 {
            return None;
        }
        let (n1, n2) = self.eval_n(u, v);
        Some((n1.norm() * u.norm() + n2.norm() * v.norm()) / denom)
    }

    /// Pair-difference ratio 4 (|dN1||U| + |dN2||V|) / r2 at one quadruple,
    /// where r2 is the diagonal interaction density of the two pairs.
    #[inline]
    fn pair_ratio(
        &self,
        u: Complex64,
        v: Complex64,
        u2: Complex64,
        v2: Complex64,
    ) -> Option<f64> {
        let big_u = u - u2;
        let big_v = v - v2;
        let r2 = big_u.norm_sqr() * (v.norm_sqr() + v2.norm_sqr())
            + (u.norm_sqr() + u2.norm_sqr()) * big_v.norm_sqr();
        if r2 < 1e-12 {
            return None;
        }
        let (n1, n2) = self.eval_n(u, v);
        let (n1p, n2p) = self.eval_n(u2, v2);
        let num = (n1 - n1p).norm() * big_u.norm() + (n2 - n2p).norm() * big_v.norm();
        Some(4.0 * num / r2)
    }

    /// Derive (c, delta, c_star, K).
    ///
    /// `c` is the best cubic-bound constant: the preset closed forms
    /// (2|a| for Thirring, 8|a| for Gross-Neveu) when available, otherwise
    /// the maximum of the sampled ratio over `n_samples` box points.
    /// `c_star` is the sampled pair-difference constant, floored at `2c`
    /// so that `c_star >= c` always holds (setting the second pair to zero
    /// shows the true suprema satisfy `c <= c_star / 2`).  Then
    /// `delta = 1 / (4 c_star)` (capped for linear models) and
    /// `K = 2 c_star + 1`, which makes the dissipation coefficient in the
    /// Lyapunov budget at most -1.
    pub fn derive_constants(&self, n_samples: usize, seed: u64) -> Result<ModelConstants> {
        let a2 = self.a2_max_residual(10_000, seed);
        if a2.max_rel > A2_REJECT_REL {
            return Err(Error::ModelRejected { max_rel: a2.max_rel, limit: A2_REJECT_REL, seed });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
        let mut c_sampled: f64 = 0.0;
        let mut c_star_sampled: f64 = 0.0;
        // Line probes u' = t u, v' = t v approach the pair-ratio supremum
        // as t -> 1; the box sampler alone stays well below it.
        const LINE_PROBES: [f64; 6] = [0.9, 0.99, 0.999, 0.9999, 1.0001, 1.01];
        for _ in 0..n_samples {
            let (u, v) = sample_pair(&mut rng);
            let (u2, v2) = sample_pair(&mut rng);
            if let Some(r) = self.cubic_ratio(u, v) {
                c_sampled = c_sampled.max(r);
            }
            if let Some(r) = self.pair_ratio(u, v, u2, v2) {
                c_star_sampled = c_star_sampled.max(r);
            }
            if let Some(r) = self.pair_ratio(u, v, Complex64::ZERO, Complex64::ZERO) {
                c_star_sampled = c_star_sampled.max(r);
            }
            for t in LINE_PROBES {
                if let Some(r) = self.pair_ratio(u, v, t * u, t * v) {
                    c_star_sampled = c_star_sampled.max(r);
                }
            }
        }
        if !c_sampled.is_finite() || !c_star_sampled.is_finite() {
            return Err(Error::DegenerateConstants);
        }

        let c = match self.preset {
            Preset::Thirring => 2.0 * self.coupling().abs(),
            Preset::GrossNeveu => 8.0 * self.coupling().abs(),
            Preset::Custom => c_sampled,
        };
        let c_star = c_star_sampled.max(2.0 * c);
        let delta = if c_star > 0.0 { (1.0 / (4.0 * c_star)).min(DELTA_CAP) } else { DELTA_CAP };
        let k = 2.0 * c_star + 1.0;
        Ok(ModelConstants { c, delta, c_star, k, seed })
    }

    /// Sampled cubic-bound maximum alone (used to cross-check the preset
    /// closed forms).
    pub fn sample_cubic_bound(&self, n_samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
        let mut best: f64 = 0.0;
        for _ in 0..n_samples {
            let (u, v) = sample_pair(&mut rng);
            let _ = sample_pair(&mut rng); // keep the stream aligned with derive_constants
            if let Some(r) = self.cubic_ratio(u, v) {
                best = best.max(r);
            }
        }
        best
    }
}

#[inline]
fn sample_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(
        rng.random_range(-SAMPLE_BOX..SAMPLE_BOX),
        rng.random_range(-SAMPLE_BOX..SAMPLE_BOX),
    )
}

#[inline]
fn sample_pair(rng: &mut ChaCha8Rng) -> (Complex64, Complex64) {
    (sample_complex(rng), sample_complex(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = f64::EPSILON;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn thirring_closed_form_values() {
        let p = ModelParams::preset(Preset::Thirring, 1.0, 1.0).unwrap();
        let (n1, n2) = p.eval_n(c64(2.0, 0.0), c64(1.0, 0.0));
        assert_eq!(n1, c64(2.0, 0.0));
        assert_eq!(n2, c64(4.0, 0.0));
        let (n1, n2) = p.eval_n(Complex64::ZERO, Complex64::ZERO);
        assert_eq!((n1, n2), (Complex64::ZERO, Complex64::ZERO));
    }

    #[test]
    fn thirring_zero_coupling_is_linear() {
        let p = ModelParams::preset(Preset::Thirring, 0.0, 1.0).unwrap();
        let (n1, n2) = p.eval_n(c64(1.3, -0.4), c64(0.2, 2.0));
        assert_eq!((n1, n2), (Complex64::ZERO, Complex64::ZERO));
    }

    #[test]
    fn gross_neveu_closed_form_values() {
        let p = ModelParams::preset(Preset::GrossNeveu, 1.0, 0.0).unwrap();
        // At u = v = 1 the interaction scalar is 2, so N1 = 4.
        let (n1, _) = p.eval_n(c64(1.0, 0.0), c64(1.0, 0.0));
        assert!((n1 - c64(4.0, 0.0)).norm() < 8.0 * EPS);
        // Orthogonal phases kill the scalar.
        let (n1, n2) = p.eval_n(c64(1.0, 0.0), c64(0.0, 1.0));
        assert!(n1.norm() < 8.0 * EPS && n2.norm() < 8.0 * EPS);
    }

    #[test]
    fn a2_residual_custom_violation() {
        // a1 = i, a3 = 1, everything else zero: residual at (1,1) is -1.
        let mut alpha = [Complex64::ZERO; 5];
        alpha[0] = Complex64::i();
        alpha[2] = c64(1.0, 0.0);
        let beta = [Complex64::ZERO; 5];
        let p = ModelParams::custom(alpha, beta, 0.0).unwrap();
        let r = p.a2_residual(c64(1.0, 0.0), c64(1.0, 0.0));
        assert!((r + 1.0).abs() < 8.0 * EPS);
        let err = p.derive_constants(1000, 7).unwrap_err();
        assert!(matches!(err, Error::ModelRejected { .. }));
    }

    #[test]
    fn a2_residual_gross_neveu_example() {
        let p = ModelParams::preset(Preset::GrossNeveu, 1.0, 1.0).unwrap();
        let r = p.a2_residual(c64(1.0, 1.0), c64(2.0, 0.0));
        // Scale of the cancelling terms here is ~ |rho|^2 = 16.
        assert!(r.abs() <= 8.0 * EPS * 16.0, "residual {r}");
    }

    #[test]
    fn thirring_per_term_residuals_vanish() {
        let p = ModelParams::preset(Preset::Thirring, -1.7, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (u, v) = sample_pair(&mut rng);
            let (t1, t2) = p.a2_residual_terms(u, v);
            let scale = u.norm_sqr() * v.norm_sqr() * p.coupling().abs() + 1e-300;
            assert!(t1.abs() <= 8.0 * EPS * scale);
            assert!(t2.abs() <= 8.0 * EPS * scale);
        }
    }

    #[test]
    fn sampled_a2_residual_presets() {
        for (preset, alpha) in [(Preset::Thirring, 1.0), (Preset::GrossNeveu, 1.0)] {
            let p = ModelParams::preset(preset, alpha, 1.0).unwrap();
            let rep = p.a2_max_residual(10_000, 42);
            assert!(rep.max_rel <= 1e-12, "{preset}: {}", rep.max_rel);
        }
    }

    #[test]
    fn constants_thirring() {
        let p = ModelParams::preset(Preset::Thirring, 1.0, 1.0).unwrap();
        let k = p.derive_constants(100_000, 42).unwrap();
        assert_eq!(k.c, 2.0);
        assert!(k.c_star >= k.c);
        assert!((k.delta - 1.0 / (4.0 * k.c_star)).abs() < 1e-15);
        assert_eq!(k.k, 2.0 * k.c_star + 1.0);
        assert!(-2.0 + 2.0 * k.delta * k.c < -1.0);
        // Sampled maximum must approach the closed form.
        let sampled = p.sample_cubic_bound(1_000_000, 42);
        assert!(sampled <= 2.0 + 1e-9);
        assert!(sampled > 2.0 * 0.99, "sampled {sampled}");
    }

    #[test]
    fn constants_gross_neveu() {
        let p = ModelParams::preset(Preset::GrossNeveu, 1.0, 1.0).unwrap();
        let k = p.derive_constants(100_000, 42).unwrap();
        assert_eq!(k.c, 8.0);
        assert!(k.c_star >= k.c);
        assert!(-2.0 + 2.0 * k.delta * k.c < -1.0);
        let sampled = p.sample_cubic_bound(1_000_000, 42);
        assert!(sampled <= 8.0 + 1e-9);
        assert!(sampled > 8.0 * 0.99, "sampled {sampled}");
    }

    #[test]
    fn constants_zero_coupling_caps_delta() {
        let p = ModelParams::preset(Preset::Thirring, 0.0, 1.0).unwrap();
        let k = p.derive_constants(10_000, 3).unwrap();
        assert_eq!(k.c, 0.0);
        assert_eq!(k.c_star, 0.0);
        assert_eq!(k.delta, DELTA_CAP);
        assert_eq!(k.k, 1.0);
    }

    #[test]
    fn constants_are_deterministic_in_the_seed() {
        let p = ModelParams::preset(Preset::GrossNeveu, 0.7, 0.3).unwrap();
        let a = p.derive_constants(50_000, 9).unwrap();
        let b = p.derive_constants(50_000, 9).unwrap();
        assert_eq!(a.c_star, b.c_star);
        assert_eq!(a.delta, b.delta);
    }

    #[test]
    fn negative_mass_rejected() {
        assert!(ModelParams::preset(Preset::Thirring, 1.0, -1.0).is_err());
    }

    proptest! {
        // The cubic-bound ratio is invariant under real scaling of both
        // components, which is what lets a fixed sampling box stand in for
        // all of C^2.
        #[test]
        fn cubic_ratio_scale_invariant(
            ur in -5.0f64..5.0, ui in -5.0f64..5.0,
            vr in -5.0f64..5.0, vi in -5.0f64..5.0,
            s in 0.1f64..30.0,
        ) {
            let p = ModelParams::preset(Preset::GrossNeveu, 1.3, 0.0).unwrap();
            let u = c64(ur, ui);
            let v = c64(vr, vi);
            if let (Some(r0), Some(r1)) = (p.cubic_ratio(u, v), p.cubic_ratio(s * u, s * v)) {
                prop_assert!((r0 - r1).abs() <= 1e-10 * r0.max(1.0));
            }
        }

        #[test]
        fn preset_a2_identity_random(
            ur in -10.0f64..10.0, ui in -10.0f64..10.0,
            vr in -10.0f64..10.0, vi in -10.0f64..10.0,
            alpha in -3.0f64..3.0,
        ) {
            for preset in [Preset::Thirring, Preset::GrossNeveu] {
                let p = ModelParams::preset(preset, alpha, 1.0).unwrap();
                let u = c64(ur, ui);
                let v = c64(vr, vi);
                let (n1, n2) = p.eval_n(u, v);
                let scale = (u.conj() * n1).norm() + (v.conj() * n2).norm() + 1e-300;
                prop_assert!(p.a2_residual(u, v).abs() <= 8.0 * EPS * scale);
            }
        }
    }
}
