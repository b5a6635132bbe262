//! Scalar and matrix Fourier multipliers of the damped elastic system:
//! characteristic roots, damped-wave kernels, diffusion waves, undamped wave
//! multipliers, Helmholtz projector, Riesz factors and the three-band smooth
//! cutoff partition.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::VectorField;

/// Lamé constants and viscosity, with the derived shear and pressure wave
/// speeds. Validity: `μ > 0`, `λ + 2μ > 0`, `ν > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
}

impl MaterialParams {
    pub fn new(lambda: f64, mu: f64, nu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "shear modulus must satisfy mu > 0, got {mu}"
            )));
        }
        if !(lambda + 2.0 * mu > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Lame constants must satisfy lambda + 2 mu > 0, got lambda = {lambda}, mu = {mu}"
            )));
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "viscosity must satisfy nu > 0, got {nu}"
            )));
        }
        Ok(Self { lambda, mu, nu })
    }

    /// Shear (slow) wave speed `√μ`.
    pub fn slow_speed(&self) -> f64 {
        self.mu.sqrt()
    }

    /// Pressure (fast) wave speed `√(λ + 2μ)`.
    pub fn fast_speed(&self) -> f64 {
        (self.lambda + 2.0 * self.mu).sqrt()
    }
}

/// Roots of `σ² + ν r² σ + β² r² = 0` for one Fourier mode of radius `r`.
#[derive(Debug, Clone, Copy)]
pub struct CharacteristicRoots {
    pub sigma_plus: Complex64,
    pub sigma_minus: Complex64,
    /// Principal value of `√(ν² r⁴ - 4 β² r²)`.
    pub discriminant: Complex64,
}

/// Characteristic roots `σ± = (-ν r² ± √(ν² r⁴ - 4 β² r²)) / 2`.
///
/// Complex-conjugate pair for `0 < r < 2β/ν`, real pair for `r > 2β/ν`,
/// double root `-ν r²/2` at the threshold. `Re σ± ≤ 0` always. In the real
/// regime `σ₊` is computed by rationalizing, `σ₊ = -2b/(a + d)`, which keeps
/// both root identities accurate when `b ≪ a²`.
pub fn characteristic_roots(nu: f64, beta: f64, r: f64) -> CharacteristicRoots {
    let a = nu * r * r;
    let b = beta * beta * r * r;
    let disc2 = a * a - 4.0 * b;
    if disc2 >= 0.0 {
        let d = disc2.sqrt();
        let sigma_minus = -(a + d) / 2.0;
        let sigma_plus = if a + d > 0.0 { -2.0 * b / (a + d) } else { 0.0 };
        CharacteristicRoots {
            sigma_plus: Complex64::new(sigma_plus, 0.0),
            sigma_minus: Complex64::new(sigma_minus, 0.0),
            discriminant: Complex64::new(d, 0.0),
        }
    } else {
        let d = (-disc2).sqrt();
        CharacteristicRoots {
            sigma_plus: Complex64::new(-a / 2.0, d / 2.0),
            sigma_minus: Complex64::new(-a / 2.0, -d / 2.0),
            discriminant: Complex64::new(0.0, d),
        }
    }
}

/// Kernel multiplier values for one mode at one time, together with their
/// exact time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub k0: f64,
    pub k1: f64,
    pub dt_k0: f64,
    pub dt_k1: f64,
}

/// Damped-wave kernels `K₀ = (-σ₋ e^{σ₊t} + σ₊ e^{σ₋t}) / (σ₊ - σ₋)` and
/// `K₁ = (e^{σ₊t} - e^{σ₋t}) / (σ₊ - σ₋)`, the propagators of initial
/// displacement and velocity of `ẅ + ν r² ẇ + β² r² w = 0`.
///
/// Evaluated in the uniformly stable form built on `z = t √(ν²r⁴ - 4β²r²)/2`:
/// a Taylor branch covers `|z| < 1e-4` (so the degenerate root `r = 2β/ν`
/// never needs a regime split), and elsewhere everything is assembled from
/// `e^{σ± t}`, whose magnitudes never exceed one. Time derivatives use the
/// exact identities `∂ₜK₀ = -β²r² K₁` and `∂ₜK₁ = K₀ - νr² K₁`.
pub fn kernel_multipliers(nu: f64, beta: f64, r: f64, t: f64) -> KernelValues {
    debug_assert!(t >= 0.0 && r >= 0.0);
    let a = nu * r * r; // -(σ₊ + σ₋)
    let b2 = beta * beta * r * r; // σ₊ σ₋
    let disc2 = a * a - 4.0 * b2;
    let z2 = disc2 * t * t / 4.0;

    let (k0, k1) = if z2.abs() < 1e-8 {
        // |z| < 1e-4: sinhc(z) and cosh(z) as even series in z², valid for
        // either sign of the discriminant.
        let sinhc = 1.0 + z2 / 6.0 + z2 * z2 / 120.0;
        let cosh = 1.0 + z2 / 2.0 + z2 * z2 / 24.0;
        let e = (-a * t / 2.0).exp();
        (e * (cosh + 0.5 * a * t * sinhc), t * e * sinhc)
    } else {
        let roots = characteristic_roots(nu, beta, r);
        let d = roots.discriminant;
        let ep = (roots.sigma_plus * t).exp();
        let em = (roots.sigma_minus * t).exp();
        // e^{-at/2} cosh(z) and e^{-at/2} sinh(z)/d stay bounded because
        // Re σ± ≤ 0; no large cosh is ever formed.
        let k1 = (ep - em) / d;
        let k0 = (ep + em) / 2.0 + (0.5 * a) * k1;
        debug_assert!(k0.im.abs() <= 1e-12 * (1.0 + k0.re.abs()));
        debug_assert!(k1.im.abs() <= 1e-12 * (1.0 + k1.re.abs()));
        (k0.re, k1.re)
    };

    KernelValues {
        k0,
        k1,
        dt_k0: -b2 * k1,
        dt_k1: k0 - a * k1,
    }
}

#[inline]
fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-5 {
        1.0 - y * y / 6.0
    } else {
        y.sin() / y
    }
}

/// Diffusion-wave multipliers `G₀ = e^{-νr²t/2} cos(βrt)` and
/// `G₁ = e^{-νr²t/2} sin(βrt)/(βr)`, with `G₁(r=0) = t`.
pub fn diffusion_multipliers(nu: f64, beta: f64, r: f64, t: f64) -> (f64, f64) {
    let damp = (-nu * r * r * t / 2.0).exp();
    let phase = beta * r * t;
    (damp * phase.cos(), damp * t * sinc(phase))
}

/// Undamped wave multipliers `W₀ = cos(βrt)` and `W₁ = sin(βrt)/(βr)`,
/// with `W₁(r=0) = t`.
pub fn wave_multipliers(beta: f64, r: f64, t: f64) -> (f64, f64) {
    let phase = beta * r * t;
    (phase.cos(), t * sinc(phase))
}

/// Which part of the Helmholtz split to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HelmholtzPart {
    /// Curl-free part `𝒫 v = ξ (ξ·v)/|ξ|²` (carried at the fast speed).
    Parallel,
    /// Divergence-free part `(I - 𝒫) v` (carried at the slow speed).
    Orthogonal,
}

/// Apply the Helmholtz projector per mode (built on the unbiased direction
/// vector, so Nyquist rows keep real fields real). At the zero mode the
/// projector is defined as 0, so the mean lands entirely in the orthogonal
/// part.
pub fn helmholtz_project(f: &VectorField, part: HelmholtzPart) -> VectorField {
    f.mode_map(|_, e, v| {
        let r2 = e[0] * e[0] + e[1] * e[1] + e[2] * e[2];
        if r2 == 0.0 {
            return match part {
                HelmholtzPart::Parallel => [Complex64::default(); 3],
                HelmholtzPart::Orthogonal => v,
            };
        }
        let dot = v[0] * e[0] + v[1] * e[1] + v[2] * e[2];
        let par = [dot * (e[0] / r2), dot * (e[1] / r2), dot * (e[2] / r2)];
        match part {
            HelmholtzPart::Parallel => par,
            HelmholtzPart::Orthogonal => [v[0] - par[0], v[1] - par[1], v[2] - par[2]],
        }
    })
}

/// Apply the composed Riesz transform `ℛ_a ℛ_b`, the multiplier
/// `ξ_a ξ_b / |ξ|²` (unbiased direction vector; the zero mode maps to 0).
pub fn riesz_apply(f: &VectorField, a: usize, b: usize) -> VectorField {
    assert!(a < 3 && b < 3, "axis indices must be 0..3");
    f.mode_map(|_, e, v| {
        let s = riesz_symbol(e, a, b);
        [v[0] * s, v[1] * s, v[2] * s]
    })
}

/// Scalar Riesz-pair symbol `ξ_a ξ_b / |ξ|²` (0 at the zero mode; callers
/// pass the unbiased frequency vector).
pub fn riesz_symbol(xi: [f64; 3], a: usize, b: usize) -> f64 {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    if r2 == 0.0 {
        0.0
    } else {
        xi[a] * xi[b] / r2
    }
}

/// The three frequency bands of the smooth partition of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Low,
    Middle,
    High,
}

/// Smooth three-band cutoff partition: `χ_L = 1` on `r ≤ c0/2` and `0` on
/// `r ≥ c0`; `χ_H = 0` on `r ≤ c1` and `1` on `r ≥ 2 c1`;
/// `χ_M = 1 - χ_L - χ_H`. Profiles are the standard mollified step built
/// from `e^{-1/s}` bump primitives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCutoffs {
    c0: f64,
    c1: f64,
}

impl BandCutoffs {
    pub fn new(c0: f64, c1: f64) -> Result<Self> {
        if !(c0 > 0.0 && c1 > c0) {
            return Err(Error::InvalidParameter(format!(
                "cutoffs must satisfy 0 < c0 < c1, got c0 = {c0}, c1 = {c1}"
            )));
        }
        Ok(Self { c0, c1 })
    }

    /// Default constants for a material: `c0 = √μ/ν` (half the smallest
    /// oscillatory-regime threshold `2√μ/ν`) and `c1 = 4√(λ+2μ)/ν` (past the
    /// largest threshold), so the low band sits where both speeds give
    /// complex roots and the high band where both give real roots.
    pub fn for_material(m: &MaterialParams) -> Self {
        Self {
            c0: m.slow_speed() / m.nu,
            c1: 4.0 * m.fast_speed() / m.nu,
        }
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// Evaluate one band's cutoff at radius `r`.
    pub fn evaluate(&self, band: Band, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        let lo = 1.0 - smooth_step((r - self.c0 / 2.0) / (self.c0 / 2.0));
        let hi = smooth_step((r - self.c1) / self.c1);
        match band {
            Band::Low => lo,
            Band::High => hi,
            Band::Middle => 1.0 - lo - hi,
        }
    }
}

/// `C^∞` monotone step: 0 for `s ≤ 0`, 1 for `s ≥ 1`.
fn smooth_step(s: f64) -> f64 {
    let a = bump(s);
    let b = bump(1.0 - s);
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        1.0
    } else {
        a / (a + b)
    }
}

#[inline]
fn bump(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn material_validation() {
        assert!(MaterialParams::new(0.0, 1.0, 1.0).is_ok());
        // λ + 2μ > 0 admits negative λ.
        assert!(MaterialParams::new(-1.0, 1.0, 1.0).is_ok());
        assert!(MaterialParams::new(0.0, -1.0, 1.0).is_err());
        assert!(MaterialParams::new(-3.0, 1.0, 1.0).is_err());
        assert!(MaterialParams::new(0.0, 1.0, 0.0).is_err());
        let m = MaterialParams::new(2.0, 1.0, 0.5).unwrap();
        assert_eq!(m.slow_speed(), 1.0);
        assert_eq!(m.fast_speed(), 2.0);
    }

    #[test]
    fn roots_at_threshold_and_origin() {
        // r = 2β/ν is the double root -1 for β = 1, ν = 2, r = 1.
        let roots = characteristic_roots(2.0, 1.0, 1.0);
        assert!((roots.sigma_plus - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((roots.sigma_minus - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert_eq!(roots.discriminant, Complex64::default());

        let origin = characteristic_roots(1.0, 1.0, 0.0);
        assert_eq!(origin.sigma_plus, Complex64::default());
        assert_eq!(origin.sigma_minus, Complex64::default());
    }

    #[test]
    fn roots_satisfy_the_quadratic() {
        // β = ν = r = 1: σ± = (-1 ± i√3)/2; verify by substitution.
        let roots = characteristic_roots(1.0, 1.0, 1.0);
        let expect = Complex64::new(-0.5, 3.0_f64.sqrt() / 2.0);
        assert!((roots.sigma_plus - expect).norm() < 1e-14);
        for s in [roots.sigma_plus, roots.sigma_minus] {
            let residual = s * s + s + Complex64::new(1.0, 0.0);
            assert!(residual.norm() < 1e-13);
        }
    }

    #[test]
    fn root_identities_over_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let nu = rng.gen_range(0.05..4.0);
            let beta = rng.gen_range(0.05..4.0);
            let r = rng.gen_range(0.0..60.0_f64);
            let roots = characteristic_roots(nu, beta, r);
            let sum = roots.sigma_plus + roots.sigma_minus;
            let prod = roots.sigma_plus * roots.sigma_minus;
            let a = nu * r * r;
            let b2 = beta * beta * r * r;
            assert!((sum.re + a).abs() <= 1e-13 * (1.0 + a));
            assert!(sum.im.abs() <= 1e-13 * (1.0 + a));
            assert!((prod.re - b2).abs() <= 1e-13 * (1.0 + b2));
            assert!(prod.im.abs() <= 1e-13 * (1.0 + b2));
            assert!(roots.sigma_plus.re <= 0.0 && roots.sigma_minus.re <= 0.0);
        }
    }

    #[test]
    fn kernels_at_t_zero() {
        for (nu, beta, r) in [(1.0, 1.0, 0.7), (2.0, 0.3, 10.0), (0.5, 2.0, 0.0)] {
            let k = kernel_multipliers(nu, beta, r, 0.0);
            assert_eq!((k.k0, k.k1, k.dt_k0, k.dt_k1), (1.0, 0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn kernels_at_the_double_root() {
        // β = 1, ν = 2, r = 1, t = 1: σ = -1 double, so K₁ = t e^{σt} = e⁻¹
        // and K₀ = (1 - σt) e^{σt} = 2 e⁻¹.
        let k = kernel_multipliers(2.0, 1.0, 1.0, 1.0);
        let e = (-1.0_f64).exp();
        assert!((k.k1 - e).abs() < 1e-14);
        assert!((k.k0 - 2.0 * e).abs() < 1e-14);
    }

    #[test]
    fn kernels_have_no_nan_up_to_extreme_arguments() {
        for &r in &[0.0, 1e-8, 0.5, 2.0, 50.0, 500.0] {
            for &t in &[0.0, 1e-6, 1.0, 100.0, 1e4] {
                let k = kernel_multipliers(1.0, 1.0, r, t);
                for v in [k.k0, k.k1, k.dt_k0, k.dt_k1] {
                    assert!(v.is_finite(), "non-finite kernel at r = {r}, t = {t}");
                }
            }
        }
    }

    #[test]
    fn kernel_stays_close_to_diffusion_wave_at_low_frequency() {
        // At fixed small r the gap |K₁ - G₁| shrinks along t-doubling.
        let (nu, beta, r) = (1.0, 1.0, 0.2);
        let mut last = f64::INFINITY;
        for &t in &[64.0, 128.0, 256.0, 512.0] {
            let k = kernel_multipliers(nu, beta, r, t);
            let (_, g1) = diffusion_multipliers(nu, beta, r, t);
            let gap = (k.k1 - g1).abs() / (g1.abs() + 1.0);
            assert!(gap < last, "gap {gap} did not shrink at t = {t}");
            last = gap;
        }
    }

    #[test]
    fn diffusion_multiplier_examples() {
        let (g0, g1) = diffusion_multipliers(1.0, 1.0, 0.0, 5.0);
        assert_eq!((g0, g1), (1.0, 5.0));

        let (g0, _) = diffusion_multipliers(2.0, 1.0, 1.0, std::f64::consts::PI);
        let expect = -(-std::f64::consts::PI).exp();
        assert!((g0 - expect).abs() < 1e-15);
        assert!((expect - (-0.0432139)).abs() < 1e-7);

        let (_, g1) = diffusion_multipliers(1.0, 2.0, 1.0, std::f64::consts::FRAC_PI_2);
        assert!(g1.abs() < 1e-15);
    }

    #[test]
    fn wave_multiplier_examples() {
        assert_eq!(wave_multipliers(1.0, 0.7, 0.0), (1.0, 0.0));
        let (w0, w1) = wave_multipliers(1.0, std::f64::consts::PI, 1.0);
        assert!((w0 + 1.0).abs() < 1e-15);
        assert!(w1.abs() < 1e-15);
        // W₁(r = 0) = t.
        assert_eq!(wave_multipliers(2.0, 0.0, 3.5).1, 3.5);
    }

    #[test]
    fn wave_difference_obeys_mean_value_bound() {
        // |W₀^(β) - W₀^(γ)| ≤ |β - γ| r t pointwise.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let beta = rng.gen_range(0.1..3.0);
            let gamma = rng.gen_range(0.1..3.0);
            let r = rng.gen_range(0.0..20.0);
            let t = rng.gen_range(0.0..50.0);
            let diff = (wave_multipliers(beta, r, t).0 - wave_multipliers(gamma, r, t).0).abs();
            assert!(diff <= (beta - gamma).abs() * r * t + 1e-12);
        }
    }

    #[test]
    fn cutoff_partition_properties() {
        let cuts = BandCutoffs::new(1.0, 4.0).unwrap();
        assert_eq!(cuts.evaluate(Band::Low, 0.3), 1.0);
        assert_eq!(cuts.evaluate(Band::Low, 0.5), 1.0);
        assert_eq!(cuts.evaluate(Band::Low, 1.0), 0.0);
        assert_eq!(cuts.evaluate(Band::High, 4.0), 0.0);
        assert_eq!(cuts.evaluate(Band::High, 8.0), 1.0);
        assert_eq!(cuts.evaluate(Band::High, 11.0), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5000 {
            let r = rng.gen_range(0.0..12.0);
            let l = cuts.evaluate(Band::Low, r);
            let m = cuts.evaluate(Band::Middle, r);
            let h = cuts.evaluate(Band::High, r);
            for v in [l, m, h] {
                assert!((-1e-14..=1.0 + 1e-14).contains(&v));
            }
            assert!((l + m + h - 1.0).abs() < 1e-14);
        }
        assert!(BandCutoffs::new(2.0, 1.0).is_err());
    }

    #[test]
    fn default_cutoffs_respect_regime_separation() {
        let m = MaterialParams::new(1.0, 1.0, 0.5).unwrap();
        let cuts = BandCutoffs::for_material(&m);
        // χ_L support ends below both oscillatory thresholds 2β/ν; χ_H
        // support starts above both.
        assert!(cuts.c0() < 2.0 * m.slow_speed() / m.nu);
        assert!(cuts.c1() > 2.0 * m.fast_speed() / m.nu);
    }

    use crate::lattice::{FrequencyLattice, Representation};
    use std::sync::Arc;

    /// Deterministic band-limited (|k| ≤ 3 per axis) mean-zero field, so
    /// Nyquist rows never participate.
    fn band_limited_field(lat: &Arc<FrequencyLattice>, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<([f64; 3], [f64; 3], f64)> = (0..12)
            .map(|_| {
                let k = [
                    rng.gen_range(-3i64..=3) as f64,
                    rng.gen_range(-3i64..=3) as f64,
                    rng.gen_range(-3i64..=3) as f64,
                ];
                let amps = [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ];
                (k, amps, rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .filter(|(k, _, _)| k[0] != 0.0 || k[1] != 0.0 || k[2] != 0.0)
            .collect();
        let l = lat.box_length();
        let scale = std::f64::consts::TAU / l;
        VectorField::from_physical_fn(lat, move |x| {
            let mut v = [0.0; 3];
            for (k, amps, phase) in &modes {
                let arg = scale * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]) + phase;
                let c = arg.cos();
                for d in 0..3 {
                    v[d] += amps[d] * c;
                }
            }
            v
        })
    }

    fn max_mode_dev(a: &VectorField, b: &VectorField) -> f64 {
        let mut worst: f64 = 0.0;
        let mut peak: f64 = 0.0;
        for k in 0..3 {
            for (x, y) in a.component(k).iter().zip(b.component(k)) {
                worst = worst.max((x - y).norm());
                peak = peak.max(x.norm());
            }
        }
        worst / peak.max(1e-300)
    }

    #[test]
    fn helmholtz_split_of_a_single_mode() {
        // Mode ξ = (s, 0, 0) with v = (a, b, c): parallel part (a, 0, 0),
        // orthogonal part (0, b, c).
        let lat = FrequencyLattice::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let (a, b, c) = (1.3, -0.7, 0.4);
        let f = VectorField::from_physical_fn(&lat, |x| {
            let m = (2.0 * x[0]).cos();
            [a * m, b * m, c * m]
        })
        .to_spectral()
        .unwrap();
        let par = helmholtz_project(&f, HelmholtzPart::Parallel).to_physical().unwrap();
        let ort = helmholtz_project(&f, HelmholtzPart::Orthogonal).to_physical().unwrap();
        for i in 0..lat.len() {
            let x = lat.position(i);
            let m = (2.0 * x[0]).cos();
            assert!((par.component(0)[i].re - a * m).abs() < 1e-12);
            assert!(par.component(1)[i].norm() < 1e-12);
            assert!(par.component(2)[i].norm() < 1e-12);
            assert!((ort.component(1)[i].re - b * m).abs() < 1e-12);
            assert!((ort.component(2)[i].re - c * m).abs() < 1e-12);
            assert!(ort.component(0)[i].norm() < 1e-12);
        }
    }

    #[test]
    fn projector_is_idempotent_and_partitions() {
        let lat = FrequencyLattice::new(16, 5.0).unwrap();
        let f = band_limited_field(&lat, 21).to_spectral().unwrap();
        let p = helmholtz_project(&f, HelmholtzPart::Parallel);
        let pp = helmholtz_project(&p, HelmholtzPart::Parallel);
        assert!(max_mode_dev(&pp, &p) < 1e-13, "projector not idempotent");
        let q = helmholtz_project(&f, HelmholtzPart::Orthogonal);
        let sum = p.add(&q).unwrap();
        assert!(max_mode_dev(&sum, &f) < 1e-15, "split is not a partition");
    }

    #[test]
    fn riesz_pair_examples() {
        let lat = FrequencyLattice::new(16, 2.0 * std::f64::consts::PI).unwrap();
        // Σ_a ℛ_aℛ_a = identity on mean-zero (band-limited) fields.
        let f = band_limited_field(&lat, 5).to_spectral().unwrap();
        let mut sum = VectorField::zeros(&lat, Representation::Spectral);
        for a in 0..3 {
            sum = sum.add(&riesz_apply(&f, a, a)).unwrap();
        }
        assert!(max_mode_dev(&sum, &f) < 1e-13);

        // Single mode along the first axis: ℛ₁ℛ₁ is the identity there.
        let g = VectorField::from_physical_fn(&lat, |x| [(3.0 * x[0]).cos(), 0.0, 0.0])
            .to_spectral()
            .unwrap();
        let r11 = riesz_apply(&g, 0, 0);
        assert!(max_mode_dev(&r11, &g) < 1e-13);

        // Mode ξ = (s, s, 0): the (1,2) pair scales by ξ₁ξ₂/|ξ|² = 1/2.
        let h = VectorField::from_physical_fn(&lat, |x| [(x[0] + x[1]).cos(), 0.0, 0.0])
            .to_spectral()
            .unwrap();
        let r12 = riesz_apply(&h, 0, 1);
        assert!(max_mode_dev(&r12, &h.scale(0.5)) < 1e-13);
    }

    #[test]
    fn differentiation_commutes_with_the_projector() {
        let lat = FrequencyLattice::new(16, 5.0).unwrap();
        let f = band_limited_field(&lat, 9).to_spectral().unwrap();
        for alpha in [[1, 0, 0], [0, 2, 1]] {
            let a = helmholtz_project(&f.spectral_derivative(alpha), HelmholtzPart::Parallel);
            let b = helmholtz_project(&f, HelmholtzPart::Parallel).spectral_derivative(alpha);
            assert!(max_mode_dev(&a, &b) < 1e-14);
        }
    }
}
