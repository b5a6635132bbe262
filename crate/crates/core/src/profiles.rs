//! Moment functionals and the asymptotic profile fields built from
//! diffusion-wave multipliers, used to verify that the solution approaches
//! its large-time profile faster than the profile itself decays.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::duhamel::{acceleration_field, Trajectory};
use crate::error::{Error, Result};
use crate::lattice::{
    FrequencyLattice, Representation, ScalarField, VectorField, CHUNK, FOURIER_NORM,
};
use crate::metrology::{fit_rate, sobolev_seminorm, zero_out_mean, Lp};
use crate::symbols::{diffusion_multipliers, riesz_symbol, Band, BandCutoffs, MaterialParams};

/// Moment data of a run: `m0[k][a] = ∫ ∂_a f0_k dx`, `m1[k] = ∫ f1_k dx`,
/// and the space-time moment `M[k] = ∫₀^∞ ∫ F_k(u) dx dτ` truncated at
/// `t_max` with a power-law tail bound.
#[derive(Debug, Clone, Default)]
pub struct Moments {
    pub m0: [[f64; 3]; 3],
    pub m1: [f64; 3],
    pub nonlinear: [f64; 3],
    /// Bound on the truncated `|∫_{t_max}^∞ ∫ F dx dτ|`, from the fitted
    /// power law of `‖F(t)‖₁`.
    pub tail_bound: f64,
    pub t_max: f64,
}

impl Moments {
    pub fn combined_m1(&self) -> [f64; 3] {
        [
            self.m1[0] + self.nonlinear[0],
            self.m1[1] + self.nonlinear[1],
            self.m1[2] + self.nonlinear[2],
        ]
    }
}

/// Compute the moments of a run by lattice quadrature; the time integral is
/// the midpoint sum over the recorded steps, and the tail of `‖F‖₁` must fit
/// a power law with slope at most -1.5 (otherwise the truncation is not
/// trustworthy and an error is returned).
pub fn compute_moments(
    f0: &VectorField,
    f1: &VectorField,
    trajectory: &Trajectory,
) -> Result<Moments> {
    let cellvol = f0.lattice().cell_volume();

    let mut m0 = [[0.0; 3]; 3];
    if f0.physical().max_abs() > 0.0 {
        for a in 0..3 {
            let mut alpha = [0usize; 3];
            alpha[a] = 1;
            let d = f0.spectral_derivative(alpha).to_physical()?;
            for (k, row) in m0.iter_mut().enumerate() {
                row[a] = d.component(k).iter().map(|v| v.re).sum::<f64>() * cellvol;
            }
        }
    }

    let f1_phys = f1.physical();
    let mut m1 = [0.0; 3];
    for (k, v) in m1.iter_mut().enumerate() {
        *v = f1_phys.component(k).iter().map(|x| x.re).sum::<f64>() * cellvol;
    }

    let mut nonlinear = [0.0; 3];
    let mut tail_bound = 0.0;
    let t_max = trajectory.samples.last().map(|s| s.t).unwrap_or(0.0);
    if !trajectory.steps.is_empty() {
        let peak_l1 = trajectory.steps.iter().map(|s| s.f_l1).fold(0.0_f64, f64::max);
        if peak_l1 > 1e-300 {
            for rec in &trajectory.steps {
                for k in 0..3 {
                    nonlinear[k] += rec.h * rec.f_integral[k];
                }
            }
            let series: Vec<(f64, f64)> = trajectory
                .steps
                .iter()
                .filter(|s| s.f_l1 > 0.0)
                .map(|s| (s.t_mid, s.f_l1))
                .collect();
            let t_hi = series.last().map(|s| s.0).unwrap_or(0.0);
            let fit = fit_rate(&series, (t_hi / 10.0, t_hi))?;
            if fit.slope > -1.5 {
                return Err(Error::InsufficientHorizon { slope: fit.slope });
            }
            // ∫_T^∞ A t^s dt = (A T^s) · T / (-1 - s) with the fitted law.
            let value_at_end = (fit.intercept + fit.slope * t_hi.ln()).exp();
            tail_bound = value_at_end * t_hi / (-1.0 - fit.slope);
        }
    }

    Ok(Moments { m0, m1, nonlinear, tail_bound, t_max })
}

/// Diffusion-wave kernel field `𝓕^{-1}[𝒢_j^{(β)}(t, ·)]`, optionally with a
/// composed Riesz pair `ξ_a ξ_b/|ξ|²` and a band cutoff in the symbol.
/// Returned in the physical representation.
pub fn diffusion_wave_field(
    nu: f64,
    beta: f64,
    j: usize,
    t: f64,
    lattice: &Arc<FrequencyLattice>,
    riesz_pair: Option<(usize, usize)>,
    band: Option<(BandCutoffs, Band)>,
) -> Result<ScalarField> {
    assert!(j <= 1, "diffusion-wave index must be 0 or 1");
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "diffusion-wave field requires t > 0, got {t}"
        )));
    }
    let spectral = ScalarField::from_symbol(lattice, |xi, e| {
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        let (g0, g1) = diffusion_multipliers(nu, beta, r, t);
        let mut v = if j == 0 { g0 } else { g1 };
        if let Some((a, b)) = riesz_pair {
            v *= riesz_symbol(e, a, b);
        }
        if let Some((cuts, band)) = band {
            v *= cuts.evaluate(band, r);
        }
        Complex64::new(v, 0.0)
    });
    spectral.to_physical()
}

/// Convolution under the pinned transform normalization:
/// `(f ∗ g)^ = (2π)^{3/2} f̂ ĝ`. Returns the physical field.
pub fn convolve(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    let fs = f.spectral();
    let gs = g.spectral();
    let mut out = fs.clone();
    let scale = 1.0 / FOURIER_NORM;
    out.values_mut()
        .par_iter_mut()
        .zip(gs.values().par_iter())
        .for_each(|(a, b)| *a *= scale * b);
    out.to_physical()
}

/// Which asymptotic profile to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Profile of the displacement `u`.
    Displacement,
    /// Profile of the velocity `∂ₜu`.
    Velocity,
    /// Profile of the acceleration `∂ₜ²u`.
    Acceleration,
}

/// Assemble a profile field at time `t` as a spectral [`VectorField`].
///
/// Per mode, with `g_j^{f,s}` the diffusion multipliers at the fast and slow
/// speeds, `A_j v = (g_j^f - g_j^s) 𝒫v + g_j^s v` and
/// `B_j v = ((λ+2μ) g_j^f - μ g_j^s) 𝒫v + μ g_j^s v`:
///
/// - displacement: `A_0 w + A_1 v₁`
/// - velocity:     `B_1 w + A_0 v₁`
/// - acceleration: `-|ξ|² (B_0 w + B_1 v₁)`
///
/// where `v₁ = (2π)^{-3/2} (m₁ + M)` and `w_j(ξ) = Σ_a (-iξ_a/|ξ|²)
/// (2π)^{-3/2} m0[j][a]` reconstructs the low-frequency part of `f̂₀` from
/// the gradient moments. The `(2π)^{-3/2}` factors carry the convention
/// `ĝ(0) = (2π)^{-3/2} ∫g`; the zero mode is set to 0.
pub fn profile_field(
    moments: &Moments,
    material: &MaterialParams,
    kind: ProfileKind,
    t: f64,
    lattice: &Arc<FrequencyLattice>,
) -> Result<VectorField> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "profile fields require t > 0, got {t}"
        )));
    }
    let nu = material.nu;
    let fast = material.fast_speed();
    let slow = material.slow_speed();
    let b2f = material.lambda + 2.0 * material.mu;
    let b2s = material.mu;
    let v1: [f64; 3] = {
        let c = moments.combined_m1();
        [FOURIER_NORM * c[0], FOURIER_NORM * c[1], FOURIER_NORM * c[2]]
    };
    let m0 = moments.m0;
    let has_m0 = m0.iter().flatten().any(|&v| v != 0.0);

    let mut out = VectorField::zeros(lattice, Representation::Spectral);
    let lat = Arc::clone(lattice);
    let [o0, o1, o2] = out.components_mut();
    (
        o0.par_chunks_mut(CHUNK),
        o1.par_chunks_mut(CHUNK),
        o2.par_chunks_mut(CHUNK),
    )
        .into_par_iter()
        .enumerate()
        .for_each(|(chunk, (c0, c1, c2))| {
            let base = chunk * CHUNK;
            for i in 0..c0.len() {
                let idx = base + i;
                let xi = lat.xi(idx);
                let e = lat.xi_unbiased(idx);
                let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                if r2 == 0.0 {
                    continue;
                }
                let e2 = e[0] * e[0] + e[1] * e[1] + e[2] * e[2];
                let r = r2.sqrt();
                let (g0f, g1f) = diffusion_multipliers(nu, fast, r, t);
                let (g0s, g1s) = diffusion_multipliers(nu, slow, r, t);

                let w: [Complex64; 3] = if has_m0 && e2 > 0.0 {
                    let mut w = [Complex64::default(); 3];
                    for (j, wj) in w.iter_mut().enumerate() {
                        let mut acc = Complex64::default();
                        for a in 0..3 {
                            acc += Complex64::new(0.0, -e[a] / e2) * m0[j][a];
                        }
                        *wj = acc * FOURIER_NORM;
                    }
                    w
                } else {
                    [Complex64::default(); 3]
                };
                let v1c = [
                    Complex64::new(v1[0], 0.0),
                    Complex64::new(v1[1], 0.0),
                    Complex64::new(v1[2], 0.0),
                ];

                let apply = |pcoef: f64, icoef: f64, v: [Complex64; 3]| -> [Complex64; 3] {
                    if e2 == 0.0 {
                        return [v[0] * icoef, v[1] * icoef, v[2] * icoef];
                    }
                    let dot = v[0] * e[0] + v[1] * e[1] + v[2] * e[2];
                    [
                        dot * (e[0] / e2) * pcoef + v[0] * icoef,
                        dot * (e[1] / e2) * pcoef + v[1] * icoef,
                        dot * (e[2] / e2) * pcoef + v[2] * icoef,
                    ]
                };

                let add = |a: [Complex64; 3], b: [Complex64; 3]| {
                    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
                };

                let value = match kind {
                    ProfileKind::Displacement => add(
                        apply(g0f - g0s, g0s, w),
                        apply(g1f - g1s, g1s, v1c),
                    ),
                    ProfileKind::Velocity => add(
                        apply(b2f * g1f - b2s * g1s, b2s * g1s, w),
                        apply(g0f - g0s, g0s, v1c),
                    ),
                    ProfileKind::Acceleration => {
                        let v = add(
                            apply(b2f * g0f - b2s * g0s, b2s * g0s, w),
                            apply(b2f * g1f - b2s * g1s, b2s * g1s, v1c),
                        );
                        [-r2 * v[0], -r2 * v[1], -r2 * v[2]]
                    }
                };
                c0[i] = value[0];
                c1[i] = value[1];
                c2[i] = value[2];
            }
        });
    Ok(out)
}

/// Gap time series `(t, ‖∇^α (x(t) - profile(t))‖_p)` along a trajectory,
/// with the zero mode removed on both sides (box means carry no decay
/// information).
pub fn profile_gap(
    trajectory: &Trajectory,
    moments: &Moments,
    kind: ProfileKind,
    alpha: u32,
    p: Lp,
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(trajectory.samples.len());
    for sample in &trajectory.samples {
        if sample.t <= 0.0 {
            continue;
        }
        let (u, ut) = sample.load()?;
        let target = match kind {
            ProfileKind::Displacement => u,
            ProfileKind::Velocity => ut,
            ProfileKind::Acceleration => {
                acceleration_field(&trajectory.material, &u, &ut, &trajectory.form)?
            }
        };
        let prof = profile_field(moments, &trajectory.material, kind, sample.t, &trajectory.lattice)?;
        let mut gap = target.sub(&prof)?;
        zero_out_mean(&mut gap);
        let value = sobolev_seminorm(&gap, alpha, p)?;
        out.push((sample.t, value));
    }
    Ok(out)
}
