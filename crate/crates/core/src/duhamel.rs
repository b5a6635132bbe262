//! Nonlinear solver: pseudo-spectral evaluation of the quadratic
//! gradient-coupled nonlinearity and time stepping by an exponential
//! midpoint rule on the Duhamel representation
//! `u(t) = u_lin(t) + ∫₀ᵗ {K₁^{fast}𝒫 + K₁^{slow}(I-𝒫)}(t-τ) F(u)(τ) dτ`.
//!
//! Per step: a linear half-step predicts the midpoint, `F` is evaluated
//! there pseudo-spectrally with 2/3-rule dealiasing, and the update is the
//! exact linear full step plus `h · K₁-split(h/2)` applied to the midpoint
//! `F̂` (the time-derivative field uses the `∂ₜK₁` multipliers of the same
//! split, keeping `ut` consistent).

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{FrequencyLattice, Representation, VectorField, CHUNK, FOURIER_NORM};
use crate::propagator::LinearFlow;
use crate::snapshot;
use crate::symbols::MaterialParams;

/// Which second factor the quadratic form contracts against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearityKind {
    /// `F_k = Σ c[k][a][b][j] (∂_a u_j)(∂_a ∂_b u_k)`
    GradGrad2,
    /// `F_k = Σ c[k][a][b][j] (∂_a u_j)(∂_b ∂ₜ u_k)`
    GradGradT,
}

/// Contraction tensor `c[k][a][b][j]`.
pub type ContractionTensor = [[[[f64; 3]; 3]; 3]; 3];

/// The quadratic nonlinearity. The paper-level form `∇u ∇Du` is schematic;
/// the concrete contraction is explicit configuration, with the default
/// tensor `c[k][a][b][j] = δ_{jb}` giving
/// `F_k = Σ_{a,b} (∂_a u_b)(∂_a ∂_b u_k)` (resp. `(∂_a u_b)(∂_b ∂ₜ u_k)`).
#[derive(Debug, Clone)]
pub enum NonlinearityForm {
    /// `F ≡ 0` (linear evolution).
    None,
    /// A kind with the default contraction.
    Standard(NonlinearityKind),
    /// A kind with an explicit contraction tensor.
    Custom {
        kind: NonlinearityKind,
        coeffs: Box<ContractionTensor>,
    },
}

impl NonlinearityForm {
    pub fn grad_grad2() -> Self {
        Self::Standard(NonlinearityKind::GradGrad2)
    }

    pub fn grad_gradt() -> Self {
        Self::Standard(NonlinearityKind::GradGradT)
    }

    pub fn custom(kind: NonlinearityKind, coeffs: ContractionTensor) -> Result<Self> {
        for k in &coeffs {
            for a in k {
                for b in a {
                    for &v in b {
                        if !v.is_finite() {
                            return Err(Error::InvalidParameter(
                                "contraction tensor must be finite".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(Self::Custom { kind, coeffs: Box::new(coeffs) })
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Self::None)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Standard(NonlinearityKind::GradGrad2) => "grad_grad2",
            Self::Standard(NonlinearityKind::GradGradT) => "grad_gradt",
            Self::Custom { kind: NonlinearityKind::GradGrad2, .. } => "custom(grad_grad2)",
            Self::Custom { kind: NonlinearityKind::GradGradT, .. } => "custom(grad_gradt)",
        }
    }
}

/// Spectral state of a run at one instant.
#[derive(Clone)]
pub struct SolverState {
    pub t: f64,
    pub u_hat: VectorField,
    pub ut_hat: VectorField,
    pub steps: usize,
    pub diagnostics: Diagnostics,
}

/// Cheap per-run health counters.
#[derive(Debug, Clone, Copy, Default)]
pub struct Diagnostics {
    pub max_abs_u: f64,
    pub dealias_loss_last: f64,
    pub dealias_loss_peak: f64,
    pub hermitian_error: f64,
}

/// Per-step record of the nonlinearity as evaluated at the step midpoint:
/// `∫F_k dx` (cell quadrature) and `‖F‖₁`, the inputs of the space-time
/// moment and its tail bound.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub t_mid: f64,
    pub h: f64,
    pub f_integral: [f64; 3],
    pub f_l1: f64,
}

enum StateStorage {
    Memory { u: VectorField, ut: VectorField },
    Disk { u: PathBuf, ut: PathBuf },
}

/// One stored snapshot of a trajectory.
pub struct TrajectorySample {
    pub t: f64,
    storage: StateStorage,
}

impl TrajectorySample {
    pub fn in_memory(t: f64, u: VectorField, ut: VectorField) -> Self {
        Self { t, storage: StateStorage::Memory { u, ut } }
    }

    pub fn on_disk_paths(t: f64, u: PathBuf, ut: PathBuf) -> Self {
        Self { t, storage: StateStorage::Disk { u, ut } }
    }

    /// Fetch the spectral fields `(û, ∂ₜû)` for this snapshot.
    pub fn load(&self) -> Result<(VectorField, VectorField)> {
        match &self.storage {
            StateStorage::Memory { u, ut } => Ok((u.clone(), ut.clone())),
            StateStorage::Disk { u, ut } => {
                let (fu, _) = snapshot::read_field(u)?;
                let (fut, _) = snapshot::read_field(ut)?;
                Ok((fu, fut))
            }
        }
    }

    pub fn on_disk(&self) -> Option<(&PathBuf, &PathBuf)> {
        match &self.storage {
            StateStorage::Disk { u, ut } => Some((u, ut)),
            StateStorage::Memory { .. } => None,
        }
    }
}

/// A completed run: snapshots at the scheduled times plus the per-step
/// nonlinearity records and enough context to re-derive fields from states.
pub struct Trajectory {
    pub material: MaterialParams,
    pub lattice: Arc<FrequencyLattice>,
    pub form: NonlinearityForm,
    pub samples: Vec<TrajectorySample>,
    pub steps: Vec<StepRecord>,
    /// No-wrap horizon of the run, when the harness computed one.
    pub horizon: Option<f64>,
}

/// Default step size `min(0.1, 0.5/(ν ξ_max²)) · 0.9`; the linear part is
/// exact, so the bound only limits the frozen-nonlinearity error.
pub fn default_step(material: &MaterialParams, lattice: &FrequencyLattice) -> f64 {
    let ximax = lattice.max_axis_frequency();
    (0.1_f64).min(0.5 / (material.nu * ximax * ximax)) * 0.9
}

/// Driver for nonlinear (and, with `NonlinearityForm::None`, linear) runs.
pub struct NonlinearSolver {
    flow: LinearFlow,
    form: NonlinearityForm,
    h: f64,
    blowup_factor: f64,
    guard_interval: usize,
    snapshot_dir: Option<PathBuf>,
    horizon: Option<f64>,
}

impl NonlinearSolver {
    pub fn new(
        material: MaterialParams,
        lattice: &Arc<FrequencyLattice>,
        form: NonlinearityForm,
    ) -> Self {
        let h = default_step(&material, lattice);
        Self {
            flow: LinearFlow::new(material, lattice),
            form,
            h,
            blowup_factor: 1e6,
            guard_interval: 25,
            snapshot_dir: None,
            horizon: None,
        }
    }

    pub fn with_step(mut self, h: f64) -> Self {
        assert!(h > 0.0, "step must be positive");
        self.h = h;
        self
    }

    /// Restrict the linear flow (and so the whole run) to one band.
    pub fn with_band(mut self, band: crate::propagator::BandRestriction) -> Self {
        self.flow = self.flow.with_band(band);
        self
    }

    pub fn with_blowup_factor(mut self, factor: f64) -> Self {
        self.blowup_factor = factor;
        self
    }

    /// Spill snapshots to disk (one EWSP file per field) instead of RAM.
    pub fn with_snapshot_dir(mut self, dir: PathBuf) -> Self {
        self.snapshot_dir = Some(dir);
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn flow(&self) -> &LinearFlow {
        &self.flow
    }

    /// Advance one step of size `h`.
    pub fn step(&self, state: &SolverState, h: f64) -> Result<SolverState> {
        Ok(self.advance(state, h)?.0)
    }

    fn advance(&self, state: &SolverState, h: f64) -> Result<(SolverState, Option<StepRecord>)> {
        let mut diag = state.diagnostics;
        let (u_new, ut_new, record) = if self.form.is_none() {
            let (u, ut) = self.flow.step(&state.u_hat, &state.ut_hat, h)?;
            (u, ut, None)
        } else {
            // Predictor: exact linear half-step; then one fused pass applies
            // the second half-step and injects h·K₁-split(h/2) F̂(midpoint).
            let (u_mid, ut_mid) = self.flow.step(&state.u_hat, &state.ut_hat, h / 2.0)?;
            let (f_hat, fd) = eval_nonlinearity(&self.form, &u_mid, &ut_mid)?;
            diag.dealias_loss_last = fd.dealias_loss;
            diag.dealias_loss_peak = diag.dealias_loss_peak.max(fd.dealias_loss);
            let (u, ut) =
                self.flow
                    .evolve_with_source(&u_mid, &ut_mid, Some(&f_hat), h, h / 2.0)?;
            let record = StepRecord {
                t_mid: state.t + h / 2.0,
                h,
                f_integral: fd.integral,
                f_l1: fd.l1,
            };
            (u, ut, Some(record))
        };
        Ok((
            SolverState {
                t: state.t + h,
                u_hat: u_new,
                ut_hat: ut_new,
                steps: state.steps + 1,
                diagnostics: diag,
            },
            record,
        ))
    }

    /// Run from data `(f₀, f₁)` through an increasing schedule of output
    /// times, landing on each exactly by shortening the last substep.
    pub fn run(
        &self,
        f0: &VectorField,
        f1: &VectorField,
        schedule: &[f64],
    ) -> Result<Trajectory> {
        f0.check_same_lattice(f1)?;
        for w in schedule.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParameter(format!(
                    "schedule must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(first) = schedule.first() {
            if *first < 0.0 {
                return Err(Error::InvalidParameter("schedule times must be >= 0".into()));
            }
        }

        let lattice = Arc::clone(self.flow.lattice());
        let guard_base = f0.physical().max_abs().max(f1.physical().max_abs());
        let guard = self.blowup_factor * guard_base.max(f64::MIN_POSITIVE);

        let mut state = SolverState {
            t: 0.0,
            u_hat: f0.spectral(),
            ut_hat: f1.spectral(),
            steps: 0,
            diagnostics: Diagnostics::default(),
        };
        let mut traj = Trajectory {
            material: *self.flow.material(),
            lattice: Arc::clone(&lattice),
            form: self.form.clone(),
            samples: Vec::new(),
            steps: Vec::new(),
            horizon: self.horizon,
        };

        let mut snapshot_index = 0usize;
        for &target in schedule {
            if self.form.is_none() {
                // The linear flow restarts exactly; jump straight to the
                // target from the initial data.
                let (u, ut) = self.flow.evolve(f0, f1, target)?;
                state = SolverState {
                    t: target,
                    u_hat: u,
                    ut_hat: ut,
                    steps: state.steps + 1,
                    diagnostics: state.diagnostics,
                };
            } else {
                while state.t < target - 1e-9 {
                    let remaining = target - state.t;
                    let h = if remaining > self.h * (1.0 + 1e-9) {
                        self.h
                    } else {
                        remaining
                    };
                    let (next, record) = self.advance(&state, h)?;
                    state = next;
                    if let Some(rec) = record {
                        traj.steps.push(rec);
                    }
                    if state.steps % self.guard_interval == 0 {
                        self.guard_check(&mut state, guard)?;
                    }
                }
            }
            self.guard_check(&mut state, guard)?;
            state.diagnostics.hermitian_error =
                state.diagnostics.hermitian_error.max(state.u_hat.hermitian_error());
            traj.samples.push(self.store_sample(&state, snapshot_index)?);
            snapshot_index += 1;
        }
        Ok(traj)
    }

    fn guard_check(&self, state: &mut SolverState, guard: f64) -> Result<()> {
        let max_abs = state.u_hat.physical().max_abs();
        state.diagnostics.max_abs_u = state.diagnostics.max_abs_u.max(max_abs);
        if max_abs > guard || !max_abs.is_finite() {
            return Err(Error::BlowUp { t: state.t, max_abs, guard });
        }
        Ok(())
    }

    fn store_sample(&self, state: &SolverState, index: usize) -> Result<TrajectorySample> {
        let storage = match &self.snapshot_dir {
            None => StateStorage::Memory {
                u: state.u_hat.clone(),
                ut: state.ut_hat.clone(),
            },
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let up = dir.join(format!("u_{index:04}.ewsp"));
                let tp = dir.join(format!("ut_{index:04}.ewsp"));
                snapshot::write_field(&up, &state.u_hat, self.flow.material(), state.t)?;
                snapshot::write_field(&tp, &state.ut_hat, self.flow.material(), state.t)?;
                StateStorage::Disk { u: up, ut: tp }
            }
        };
        Ok(TrajectorySample { t: state.t, storage })
    }
}

/// Summary of one nonlinearity evaluation.
pub struct NonlinearityDiag {
    /// Cell quadrature of each component of `F` (before dealiasing).
    pub integral: [f64; 3],
    /// `‖F‖₁` (vector magnitude, before dealiasing).
    pub l1: f64,
    /// Relative spectral L² mass removed by the 2/3-rule output mask.
    pub dealias_loss: f64,
}

/// Evaluate `F̂(u)` pseudo-spectrally: derivatives in spectral space,
/// products in physical space, transformed back with the 2/3-rule mask on
/// both the derivative inputs and the product output.
pub fn eval_nonlinearity(
    form: &NonlinearityForm,
    u_hat: &VectorField,
    ut_hat: &VectorField,
) -> Result<(VectorField, NonlinearityDiag)> {
    let lattice = Arc::clone(u_hat.lattice());
    match form {
        NonlinearityForm::None => Ok((
            VectorField::zeros(&lattice, Representation::Spectral),
            NonlinearityDiag { integral: [0.0; 3], l1: 0.0, dealias_loss: 0.0 },
        )),
        NonlinearityForm::Standard(kind) => eval_standard(*kind, u_hat, ut_hat),
        NonlinearityForm::Custom { kind, coeffs } => eval_custom(*kind, coeffs, u_hat, ut_hat),
    }
}

fn dealias_keep(lat: &FrequencyLattice, idx: usize) -> bool {
    let (ix, iy, iz) = lat.decompose(idx);
    let n = lat.points_per_axis() as i64;
    for i in [ix, iy, iz] {
        if lat.wavenumber(i).abs() * 3 > n {
            return false;
        }
    }
    true
}

/// Masked spectral scalar -> physical values.
fn masked_physical(
    lat: &Arc<FrequencyLattice>,
    build: impl Fn(usize, [f64; 3]) -> Complex64 + Sync,
) -> Vec<Complex64> {
    let mut data = vec![Complex64::default(); lat.len()];
    data.par_chunks_mut(CHUNK).enumerate().for_each(|(chunk, vals)| {
        let base = chunk * CHUNK;
        for (i, v) in vals.iter_mut().enumerate() {
            let idx = base + i;
            *v = if dealias_keep(lat, idx) {
                build(idx, lat.xi(idx))
            } else {
                Complex64::default()
            };
        }
    });
    crate::lattice::fft3_inverse(lat, &mut data);
    data
}

fn eval_standard(
    kind: NonlinearityKind,
    u_hat: &VectorField,
    ut_hat: &VectorField,
) -> Result<(VectorField, NonlinearityDiag)> {
    let lat = Arc::clone(u_hat.lattice());
    let uc = u_hat.components();
    let mut f_phys = VectorField::zeros(&lat, Representation::Physical);

    match kind {
        NonlinearityKind::GradGrad2 => {
            // Σ_{a,b} (∂_a u_b)(∂_a ∂_b u_k) grouped over unordered (a,b):
            // the second factor is symmetric, so the pair contributes
            // (∂_a u_b + ∂_b u_a) (∂_a ∂_b u_k) once for a < b.
            for a in 0..3 {
                for b in a..3 {
                    let w = masked_physical(&lat, |idx, xi| {
                        let ga = Complex64::new(0.0, xi[a]) * uc[b][idx];
                        if a == b {
                            ga
                        } else {
                            ga + Complex64::new(0.0, xi[b]) * uc[a][idx]
                        }
                    });
                    for k in 0..3 {
                        let s = masked_physical(&lat, |idx, xi| {
                            uc[k][idx] * (-xi[a] * xi[b])
                        });
                        accumulate_product(f_phys.component_mut(k), &w, &s);
                    }
                }
            }
        }
        NonlinearityKind::GradGradT => {
            // Σ_{a,b} (∂_a u_b)(∂_b ∂ₜ u_k) = Σ_b (Σ_a ∂_a u_b)(∂_b ∂ₜ u_k).
            let vc = ut_hat.components();
            for b in 0..3 {
                let w = masked_physical(&lat, |idx, xi| {
                    Complex64::new(0.0, xi[0] + xi[1] + xi[2]) * uc[b][idx]
                });
                for k in 0..3 {
                    let s = masked_physical(&lat, |idx, xi| {
                        Complex64::new(0.0, xi[b]) * vc[k][idx]
                    });
                    accumulate_product(f_phys.component_mut(k), &w, &s);
                }
            }
        }
    }

    finalize_nonlinearity(&lat, f_phys)
}

fn eval_custom(
    kind: NonlinearityKind,
    c: &ContractionTensor,
    u_hat: &VectorField,
    ut_hat: &VectorField,
) -> Result<(VectorField, NonlinearityDiag)> {
    let lat = Arc::clone(u_hat.lattice());
    let uc = u_hat.components();
    let vc = ut_hat.components();
    let mut f_phys = VectorField::zeros(&lat, Representation::Physical);

    // First derivatives ∂_a u_j, computed once each.
    let mut first: Vec<Option<Vec<Complex64>>> = vec![None; 9];
    let mut first_of = |a: usize, j: usize, lat: &Arc<FrequencyLattice>| -> Vec<Complex64> {
        if first[3 * a + j].is_none() {
            first[3 * a + j] = Some(masked_physical(lat, |idx, xi| {
                Complex64::new(0.0, xi[a]) * uc[j][idx]
            }));
        }
        first[3 * a + j].clone().unwrap()
    };

    for a in 0..3 {
        for b in 0..3 {
            for k in 0..3 {
                if (0..3).all(|j| c[k][a][b][j] == 0.0) {
                    continue;
                }
                let s = match kind {
                    NonlinearityKind::GradGrad2 => masked_physical(&lat, |idx, xi| {
                        uc[k][idx] * (-xi[a] * xi[b])
                    }),
                    NonlinearityKind::GradGradT => masked_physical(&lat, |idx, xi| {
                        Complex64::new(0.0, xi[b]) * vc[k][idx]
                    }),
                };
                for j in 0..3 {
                    let w = c[k][a][b][j];
                    if w == 0.0 {
                        continue;
                    }
                    let p = first_of(a, j, &lat);
                    let fk = f_phys.component_mut(k);
                    fk.par_iter_mut()
                        .zip(p.par_iter().zip(s.par_iter()))
                        .for_each(|(acc, (x, y))| *acc += w * x * y);
                }
            }
        }
    }

    finalize_nonlinearity(&lat, f_phys)
}

fn accumulate_product(acc: &mut [Complex64], w: &[Complex64], s: &[Complex64]) {
    acc.par_iter_mut()
        .zip(w.par_iter().zip(s.par_iter()))
        .for_each(|(a, (x, y))| *a += x * y);
}

fn finalize_nonlinearity(
    lat: &Arc<FrequencyLattice>,
    f_phys: VectorField,
) -> Result<(VectorField, NonlinearityDiag)> {
    // Physical-space records before masking.
    let cellvol = lat.cell_volume();
    let mut integral = [0.0; 3];
    for (k, acc) in integral.iter_mut().enumerate() {
        *acc = f_phys.component(k).iter().map(|v| v.re).sum::<f64>() * cellvol;
    }
    let l1 = {
        let [c0, c1, c2] = f_phys.components();
        (0..c0.len())
            .map(|i| (c0[i].norm_sqr() + c1[i].norm_sqr() + c2[i].norm_sqr()).sqrt())
            .sum::<f64>()
            * cellvol
    };

    let mut f_hat = f_phys;
    f_hat.transform_forward_in_place();
    let mut kept = 0.0f64;
    let mut removed = 0.0f64;
    for k in 0..3 {
        let comp = f_hat.component_mut(k);
        let (kp, rm) = comp
            .par_iter_mut()
            .enumerate()
            .map(|(idx, v)| {
                if dealias_keep(lat, idx) {
                    (v.norm_sqr(), 0.0)
                } else {
                    let m = v.norm_sqr();
                    *v = Complex64::default();
                    (0.0, m)
                }
            })
            .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
        kept += kp;
        removed += rm;
    }
    let total = kept + removed;
    let dealias_loss = if total > 0.0 { (removed / total).sqrt() } else { 0.0 };
    Ok((f_hat, NonlinearityDiag { integral, l1, dealias_loss }))
}

/// Spatial mean of `F` read off the spectral zero mode:
/// `∫F dx = (2π)^{3/2} F̂(0)`.
pub fn integral_from_zero_mode(f_hat: &VectorField) -> [f64; 3] {
    let s = 1.0 / FOURIER_NORM;
    [
        f_hat.component(0)[0].re * s,
        f_hat.component(1)[0].re * s,
        f_hat.component(2)[0].re * s,
    ]
}

/// Second time derivative reconstructed from the equation itself:
/// `∂ₜ²û = -μ|ξ|²û - (λ+μ)ξ(ξ·û) - ν|ξ|²ût + F̂(u)`,
/// exact modulo the solver's own error (no second finite differences).
pub fn acceleration_field(
    material: &MaterialParams,
    u_hat: &VectorField,
    ut_hat: &VectorField,
    form: &NonlinearityForm,
) -> Result<VectorField> {
    let mu = material.mu;
    let lam_mu = material.lambda + material.mu;
    let nu = material.nu;
    // The gradient-of-divergence term carries the same unbiased direction
    // vector as the propagator's split, so the reconstruction matches the
    // dynamics actually evolved: -((λ+2μ) P° + μ(I - P°)) r² û per mode.
    let ut = ut_hat.components();
    let mut out = u_hat.mode_map(|xi, e, v| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let e2 = e[0] * e[0] + e[1] * e[1] + e[2] * e[2];
        let dot = if e2 == 0.0 {
            Complex64::default()
        } else {
            (v[0] * e[0] + v[1] * e[1] + v[2] * e[2]) * (r2 / e2)
        };
        [
            -mu * r2 * v[0] - lam_mu * dot * e[0],
            -mu * r2 * v[1] - lam_mu * dot * e[1],
            -mu * r2 * v[2] - lam_mu * dot * e[2],
        ]
    });
    {
        let lat = Arc::clone(u_hat.lattice());
        let [o0, o1, o2] = out.components_mut();
        (
            o0.par_chunks_mut(CHUNK),
            o1.par_chunks_mut(CHUNK),
            o2.par_chunks_mut(CHUNK),
        )
            .into_par_iter()
            .enumerate()
            .for_each(|(chunk, (a, b, c))| {
                let base = chunk * CHUNK;
                for i in 0..a.len() {
                    let idx = base + i;
                    let xi = lat.xi(idx);
                    let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                    a[i] -= nu * r2 * ut[0][idx];
                    b[i] -= nu * r2 * ut[1][idx];
                    c[i] -= nu * r2 * ut[2][idx];
                }
            });
    }
    if !form.is_none() {
        let (f_hat, _) = eval_nonlinearity(form, u_hat, ut_hat)?;
        out = out.add(&f_hat)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FrequencyLattice;

    fn material() -> MaterialParams {
        MaterialParams::new(0.0, 1.0, 1.0).unwrap()
    }

    fn small_lattice() -> Arc<FrequencyLattice> {
        FrequencyLattice::new(16, 2.0 * std::f64::consts::PI).unwrap()
    }

    fn gaussianish(lat: &Arc<FrequencyLattice>, amp: f64) -> (VectorField, VectorField) {
        let f0 = VectorField::from_physical_fn(lat, move |x| {
            let g = amp * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp();
            [g, 0.7 * g, -0.4 * g]
        });
        let f1 = VectorField::from_physical_fn(lat, move |x| {
            let g = amp * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 1.4).exp();
            [0.3 * g, g, 0.5 * g]
        });
        (f0, f1)
    }

    fn rel_dev(a: &VectorField, b: &VectorField) -> f64 {
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
    fn constant_field_has_zero_nonlinearity() {
        let lat = small_lattice();
        let u = VectorField::from_physical_fn(&lat, |_| [0.3, -0.2, 0.7])
            .to_spectral()
            .unwrap();
        let ut = VectorField::zeros(&lat, Representation::Spectral);
        for form in [NonlinearityForm::grad_grad2(), NonlinearityForm::grad_gradt()] {
            let (f, d) = eval_nonlinearity(&form, &u, &ut).unwrap();
            let mass: f64 = (0..3)
                .map(|k| f.component(k).iter().map(|v| v.norm()).sum::<f64>())
                .sum();
            assert!(mass < 1e-12);
            assert!(d.l1 < 1e-12);
        }
    }

    #[test]
    fn single_mode_nonlinearity_lands_on_dc_and_double_frequency() {
        let lat = small_lattice();
        let u = VectorField::from_physical_fn(&lat, |x| {
            [(x[0] + 2.0 * x[1]).cos(), 0.0, 0.0]
        })
        .to_spectral()
        .unwrap();
        let ut = VectorField::zeros(&lat, Representation::Spectral);
        let (f, _) = eval_nonlinearity(&NonlinearityForm::grad_grad2(), &u, &ut).unwrap();
        // k = (1, 2, 0): allowed supports are 0 and ±2k = ±(2, 4, 0).
        let n = 16i64;
        let to_idx = |k: [i64; 3]| -> usize {
            let w = |v: i64| -> usize { v.rem_euclid(n) as usize };
            w(k[0]) + 16 * w(k[1]) + 256 * w(k[2])
        };
        let allowed = [to_idx([0, 0, 0]), to_idx([2, 4, 0]), to_idx([-2, -4, 0])];
        for k in 0..3 {
            let c = f.component(k);
            let total: f64 = c.iter().map(|v| v.norm()).sum();
            let on: f64 = allowed.iter().map(|&i| c[i].norm()).sum();
            if total > 1e-14 {
                assert!((total - on) / total < 1e-12, "stray spectral mass");
            }
        }
    }

    #[test]
    fn nonlinearity_is_quadratically_homogeneous() {
        let lat = small_lattice();
        let (f0, f1) = gaussianish(&lat, 1.0);
        let u = f0.to_spectral().unwrap();
        let ut = f1.to_spectral().unwrap();
        let eps = 0.5;
        for form in [NonlinearityForm::grad_grad2(), NonlinearityForm::grad_gradt()] {
            let (f, _) = eval_nonlinearity(&form, &u, &ut).unwrap();
            let (fs, _) = eval_nonlinearity(&form, &u.scale(eps), &ut.scale(eps)).unwrap();
            assert!(rel_dev(&fs, &f.scale(eps * eps)) < 1e-13);
        }
    }

    #[test]
    fn custom_default_tensor_matches_standard_path() {
        let lat = small_lattice();
        let (f0, f1) = gaussianish(&lat, 0.1);
        let u = f0.to_spectral().unwrap();
        let ut = f1.to_spectral().unwrap();
        let mut delta = [[[[0.0; 3]; 3]; 3]; 3];
        for k in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    delta[k][a][b][b] = 1.0;
                }
            }
        }
        for kind in [NonlinearityKind::GradGrad2, NonlinearityKind::GradGradT] {
            let standard = NonlinearityForm::Standard(kind);
            let custom = NonlinearityForm::custom(kind, delta).unwrap();
            let (fstd, _) = eval_nonlinearity(&standard, &u, &ut).unwrap();
            let (fcus, _) = eval_nonlinearity(&custom, &u, &ut).unwrap();
            assert!(rel_dev(&fcus, &fstd) < 1e-12);
        }
    }

    #[test]
    fn zero_tensor_step_reduces_to_linear_step() {
        let lat = small_lattice();
        let (f0, f1) = gaussianish(&lat, 0.2);
        let zero_form =
            NonlinearityForm::custom(NonlinearityKind::GradGrad2, [[[[0.0; 3]; 3]; 3]; 3]).unwrap();
        let solver = NonlinearSolver::new(material(), &lat, zero_form).with_step(0.05);
        let linear = NonlinearSolver::new(material(), &lat, NonlinearityForm::None);
        let s0 = SolverState {
            t: 0.0,
            u_hat: f0.to_spectral().unwrap(),
            ut_hat: f1.to_spectral().unwrap(),
            steps: 0,
            diagnostics: Diagnostics::default(),
        };
        let a = solver.step(&s0, 0.05).unwrap();
        let b = linear.step(&s0, 0.05).unwrap();
        assert!(rel_dev(&a.u_hat, &b.u_hat) < 1e-12);
        assert!(rel_dev(&a.ut_hat, &b.ut_hat) < 1e-12);
    }

    #[test]
    fn step_halving_converges_at_second_order() {
        let lat = small_lattice();
        let (f0, f1) = gaussianish(&lat, 0.05);
        let t_end = 1.0;
        let run_with = |h: f64| -> VectorField {
            let solver =
                NonlinearSolver::new(material(), &lat, NonlinearityForm::grad_grad2()).with_step(h);
            let traj = solver.run(&f0, &f1, &[t_end]).unwrap();
            traj.samples[0].load().unwrap().0
        };
        let reference = run_with(0.0125);
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| rel_dev(&run_with(h), &reference))
            .collect();
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        for order in [order1, order2] {
            assert!(
                (1.8..=2.2).contains(&order),
                "observed order {order} outside 2.0 ± 0.2 (errors {errs:?})"
            );
        }
    }

    #[test]
    fn small_data_stays_near_the_linear_solution() {
        let lat = small_lattice();
        let eps = 1e-3;
        let (f0, f1) = gaussianish(&lat, eps);
        let schedule = [2.0, 5.0, 10.0];
        let nonlinear = NonlinearSolver::new(material(), &lat, NonlinearityForm::grad_grad2())
            .with_step(0.1)
            .run(&f0, &f1, &schedule)
            .unwrap();
        let linear = NonlinearSolver::new(material(), &lat, NonlinearityForm::None)
            .run(&f0, &f1, &schedule)
            .unwrap();
        let norm2 = |f: &VectorField| -> f64 {
            let phys = f.physical();
            let [c0, c1, c2] = phys.components();
            ((0..c0.len())
                .map(|i| c0[i].norm_sqr() + c1[i].norm_sqr() + c2[i].norm_sqr())
                .sum::<f64>()
                * lat.cell_volume())
            .sqrt()
        };
        let mut peak_lin: f64 = 0.0;
        let mut peak_gap: f64 = 0.0;
        for (a, b) in nonlinear.samples.iter().zip(&linear.samples) {
            let (ua, _) = a.load().unwrap();
            let (ub, _) = b.load().unwrap();
            peak_gap = peak_gap.max(norm2(&ua.sub(&ub).unwrap()));
            peak_lin = peak_lin.max(norm2(&ub));
        }
        assert!(
            peak_gap <= 2.0 * eps * peak_lin,
            "nonlinear deviation {peak_gap} vs linear scale {peak_lin}"
        );
    }

    #[test]
    fn empty_and_zero_schedules() {
        let lat = small_lattice();
        let (f0, f1) = gaussianish(&lat, 0.1);
        let solver = NonlinearSolver::new(material(), &lat, NonlinearityForm::grad_grad2());
        let traj = solver.run(&f0, &f1, &[]).unwrap();
        assert!(traj.samples.is_empty());
        let traj = solver.run(&f0, &f1, &[0.0]).unwrap();
        assert_eq!(traj.samples.len(), 1);
        let (u, ut) = traj.samples[0].load().unwrap();
        assert!(rel_dev(&u, &f0.to_spectral().unwrap()) < 1e-13);
        assert!(rel_dev(&ut, &f1.to_spectral().unwrap()) < 1e-13);
    }

    #[test]
    fn linear_regime_run_matches_direct_evolution() {
        let lat = small_lattice();
        let (f0, f1) = gaussianish(&lat, 0.1);
        let solver = NonlinearSolver::new(material(), &lat, NonlinearityForm::None);
        let traj = solver.run(&f0, &f1, &[1.0, 3.0, 7.0]).unwrap();
        let flow = LinearFlow::new(material(), &lat);
        for sample in &traj.samples {
            let (u, ut) = sample.load().unwrap();
            let (du, dut) = flow.evolve(&f0, &f1, sample.t).unwrap();
            assert!(rel_dev(&u, &du) < 1e-6);
            assert!(rel_dev(&ut, &dut) < 1e-6);
        }
    }

    #[test]
    fn reality_is_preserved_along_a_run() {
        let lat = small_lattice();
        let (f0, f1) = gaussianish(&lat, 0.3);
        let solver = NonlinearSolver::new(material(), &lat, NonlinearityForm::grad_grad2())
            .with_step(0.1);
        let traj = solver.run(&f0, &f1, &[1.0, 4.0]).unwrap();
        for sample in &traj.samples {
            let (u, _) = sample.load().unwrap();
            assert!(u.hermitian_error() < 1e-10);
            assert!(u.physical().max_imag_ratio() < 1e-10);
        }
    }

    #[test]
    fn blowup_guard_aborts_when_the_bound_is_exceeded() {
        let lat = small_lattice();
        let (f0, f1) = gaussianish(&lat, 0.5);
        // A guard far below the solution scale must abort the run with a
        // diagnostic rather than keep stepping.
        let solver = NonlinearSolver::new(material(), &lat, NonlinearityForm::grad_grad2())
            .with_step(0.1)
            .with_blowup_factor(1e-3);
        match solver.run(&f0, &f1, &[5.0]) {
            Err(Error::BlowUp { max_abs, guard, .. }) => {
                assert!(max_abs > guard);
            }
            other => panic!("expected blow-up abort, got {:?}", other.map(|_| ())),
        }
    }
}
