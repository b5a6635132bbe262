//! Periodic computational domain standing in for free space: frequency
//! lattice construction, vector/scalar field containers, forward/inverse
//! transforms and spectral differentiation.
//!
//! The transform pair emulates the symmetric continuum convention
//! `ĝ(ξ) = (2π)^{-3/2} ∫ e^{-ix·ξ} g(x) dx` on a cube of side `L` centered
//! at the origin: the discrete forward transform is scaled by
//! `(2π)^{-3/2} (L/n)³` so that `ĝ(0)` equals `(2π)^{-3/2}` times the cell
//! quadrature of `g`, and the inverse is scaled by `(2π)^{-3/2} (2π/L)³`.
//! The pair is an exact identity.

use std::sync::Arc;

pub use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// `(2π)^{-3/2}`, the normalization of the symmetric Fourier convention.
pub const FOURIER_NORM: f64 = 0.06349363593424097;

/// Which space a field currently lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Spectral,
}

/// Cubic periodic lattice with `n` points per axis on a box of side
/// `box_length`, plus the centered discrete frequencies `ξ = 2πk/L`,
/// `k ∈ [-n/2, n/2)`.
pub struct FrequencyLattice {
    n: usize,
    box_length: f64,
    freq: Vec<f64>,
    pos: Vec<f64>,
    parity: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FrequencyLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FrequencyLattice")
            .field("n", &self.n)
            .field("box_length", &self.box_length)
            .finish()
    }
}

impl FrequencyLattice {
    /// Build a lattice with `n` points per axis (even, at least 8; powers of
    /// two are the intended resolutions) on a box of side `box_length`.
    pub fn new(n: usize, box_length: f64) -> Result<Arc<Self>> {
        if n % 2 != 0 || n < 8 {
            return Err(Error::InvalidParameter(format!(
                "lattice size must be even and >= 8, got {n}"
            )));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        let half = (n / 2) as i64;
        let mut freq = Vec::with_capacity(n);
        let mut pos = Vec::with_capacity(n);
        let mut parity = Vec::with_capacity(n);
        let dx = box_length / n as f64;
        for j in 0..n {
            let k = if (j as i64) < half { j as i64 } else { j as i64 - n as i64 };
            freq.push(2.0 * std::f64::consts::PI * k as f64 / box_length);
            pos.push(-0.5 * box_length + j as f64 * dx);
            parity.push(if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 });
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Arc::new(Self { n, box_length, freq, pos, parity, fwd, inv }))
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Total mode count `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        let dx = self.box_length / self.n as f64;
        dx * dx * dx
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    /// Frequency spacing `Δξ = 2π/L`.
    pub fn freq_spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_length
    }

    /// Largest per-axis frequency magnitude, `π n / L` (the Nyquist value).
    pub fn max_axis_frequency(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / self.box_length
    }

    /// Centered integer wavenumber for an axis index.
    pub fn wavenumber(&self, axis_index: usize) -> i64 {
        let half = (self.n / 2) as i64;
        let j = axis_index as i64;
        if j < half {
            j
        } else {
            j - self.n as i64
        }
    }

    /// The Nyquist row `k = -n/2` has no partner under `k → -k`.
    pub fn is_nyquist(&self, axis_index: usize) -> bool {
        axis_index == self.n / 2
    }

    pub fn frequency_axis(&self, axis_index: usize) -> f64 {
        self.freq[axis_index]
    }

    pub fn position_axis(&self, axis_index: usize) -> f64 {
        self.pos[axis_index]
    }

    /// Decompose a flat index (x-fastest ordering) into per-axis indices.
    #[inline]
    pub fn decompose(&self, idx: usize) -> (usize, usize, usize) {
        let ix = idx % self.n;
        let iy = (idx / self.n) % self.n;
        let iz = idx / (self.n * self.n);
        (ix, iy, iz)
    }

    #[inline]
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.decompose(idx);
        [self.freq[ix], self.freq[iy], self.freq[iz]]
    }

    /// Frequency vector with Nyquist components zeroed. The Nyquist row has
    /// no sign (k and -k coincide mod n), so any multiplier that is odd in a
    /// single axis — projector and Riesz cross terms — must read 0 there to
    /// stay unbiased and keep real fields real.
    #[inline]
    pub fn xi_unbiased(&self, idx: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.decompose(idx);
        let half = self.n / 2;
        [
            if ix == half { 0.0 } else { self.freq[ix] },
            if iy == half { 0.0 } else { self.freq[iy] },
            if iz == half { 0.0 } else { self.freq[iz] },
        ]
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.decompose(idx);
        [self.pos[ix], self.pos[iy], self.pos[iz]]
    }

    /// Integer squared wavenumber `kx² + ky² + kz²` of a mode. Radial
    /// symbols depend on the mode only through this value, so per-radius
    /// tables indexed by it cover the whole lattice.
    #[inline]
    pub fn ksq(&self, idx: usize) -> usize {
        let (ix, iy, iz) = self.decompose(idx);
        let k = |i: usize| {
            let v = self.wavenumber(i);
            (v * v) as usize
        };
        k(ix) + k(iy) + k(iz)
    }

    /// Largest possible [`Self::ksq`] value, `3 (n/2)²`.
    pub fn max_ksq(&self) -> usize {
        3 * (self.n / 2) * (self.n / 2)
    }

    /// Frequency radius for an integer squared wavenumber.
    #[inline]
    pub fn radius_of_ksq(&self, ksq: usize) -> f64 {
        self.freq_spacing() * (ksq as f64).sqrt()
    }

    /// Flat index of the mode `-k` (modular negation; Nyquist rows map to
    /// themselves). This is the partner a real field's spectrum must
    /// conjugate-match.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let (ix, iy, iz) = self.decompose(idx);
        let neg = |i: usize| if i == 0 { 0 } else { self.n - i };
        neg(ix) + self.n * neg(iy) + self.n * self.n * neg(iz)
    }

    fn same_lattice(&self, other: &Self) -> bool {
        self.n == other.n && self.box_length == other.box_length
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_lattice(other) {
            Ok(())
        } else {
            Err(Error::LatticeMismatch(self.n, other.n))
        }
    }
}

// ---------------------------------------------------------------------------
// 3D transform kernels (one scalar array, x-fastest layout)
// ---------------------------------------------------------------------------

/// Reusable whole-array work buffers (a 3D transform needs one gather
/// buffer per call; allocating 16-260 MB per transform would dominate).
fn with_work_buffer<R>(len: usize, f: impl FnOnce(&mut [Complex64]) -> R) -> R {
    use std::sync::Mutex;
    static POOL: Mutex<Vec<Vec<Complex64>>> = Mutex::new(Vec::new());
    let mut buf = POOL.lock().unwrap().pop().unwrap_or_default();
    if buf.len() != len {
        buf.clear();
        buf.resize(len, Complex64::default());
    }
    let out = f(&mut buf);
    let mut pool = POOL.lock().unwrap();
    if pool.len() < 4 {
        pool.push(buf);
    }
    out
}

#[inline]
fn line_is_zero(line: &[Complex64]) -> bool {
    line.iter().all(|v| v.re == 0.0 && v.im == 0.0)
}

/// Transform every contiguous `n`-line of a slab, skipping all-zero lines
/// (band-limited and dealiased spectra have many).
fn fft_lines(fft: &Arc<dyn Fft<f64>>, slab: &mut [Complex64], n: usize, scratch: &mut [Complex64]) {
    for line in slab.chunks_exact_mut(n) {
        if !line_is_zero(line) {
            fft.process_with_scratch(line, scratch);
        }
    }
}

fn fft_pass_all_axes(n: usize, fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
    let nn = n * n;
    let scratch_len = fft.get_inplace_scratch_len();

    // Axis 0: lines are contiguous; process whole z-slabs at once.
    data.par_chunks_mut(nn).for_each_init(
        || vec![Complex64::default(); scratch_len],
        |scratch, slab| fft_lines(fft, slab, n, scratch),
    );

    // Axis 1: transpose the (x, y) square inside each slab, transform, undo.
    data.par_chunks_mut(nn).for_each_init(
        || vec![Complex64::default(); scratch_len],
        |scratch, slab| {
            transpose_square(slab, n);
            fft_lines(fft, slab, n, scratch);
            transpose_square(slab, n);
        },
    );

    // Axis 2: gather z-lines into a contiguous buffer, transform, scatter.
    with_work_buffer(data.len(), |tmp| {
        {
            let src: &[Complex64] = data;
            tmp.par_chunks_mut(n).enumerate().for_each(|(q, line)| {
                for (z, v) in line.iter_mut().enumerate() {
                    *v = src[q + nn * z];
                }
            });
        }
        tmp.par_chunks_mut(nn).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, chunk| fft_lines(fft, chunk, n, scratch),
        );
        {
            let src: &[Complex64] = tmp;
            data.par_chunks_mut(nn).enumerate().for_each(|(z, slab)| {
                for (q, v) in slab.iter_mut().enumerate() {
                    *v = src[q * n + z];
                }
            });
        }
    });
}

fn transpose_square(slab: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            slab.swap(i * n + j, j * n + i);
        }
    }
}

/// Physical -> spectral, in place, under the pinned normalization.
pub(crate) fn fft3_forward(lat: &FrequencyLattice, data: &mut [Complex64]) {
    let n = lat.n;
    fft_pass_all_axes(n, &lat.fwd, data);
    let dx = lat.box_length / n as f64;
    let scale = FOURIER_NORM * dx * dx * dx;
    let parity = &lat.parity;
    data.par_chunks_mut(n * n).enumerate().for_each(|(iz, slab)| {
        let pz = parity[iz];
        for iy in 0..n {
            let pyz = parity[iy] * pz * scale;
            let row = &mut slab[iy * n..(iy + 1) * n];
            for (ix, v) in row.iter_mut().enumerate() {
                *v *= parity[ix] * pyz;
            }
        }
    });
}

/// Spectral -> physical, in place; exact inverse of [`fft3_forward`].
pub(crate) fn fft3_inverse(lat: &FrequencyLattice, data: &mut [Complex64]) {
    let n = lat.n;
    let dxi = lat.freq_spacing();
    let scale = FOURIER_NORM * dxi * dxi * dxi;
    let parity = &lat.parity;
    data.par_chunks_mut(n * n).enumerate().for_each(|(iz, slab)| {
        let pz = parity[iz];
        for iy in 0..n {
            let pyz = parity[iy] * pz * scale;
            let row = &mut slab[iy * n..(iy + 1) * n];
            for (ix, v) in row.iter_mut().enumerate() {
                *v *= parity[ix] * pyz;
            }
        }
    });
    fft_pass_all_axes(n, &lat.inv, data);
}

// ---------------------------------------------------------------------------
// Field containers
// ---------------------------------------------------------------------------

/// Relative imaginary residue above which a physical field triggers a log
/// warning (real data should transform back with negligible imaginary part).
const IMAG_WATCHDOG: f64 = 1e-10;

/// Three-component field on a [`FrequencyLattice`], stored as complex arrays
/// in either representation.
#[derive(Clone)]
pub struct VectorField {
    lattice: Arc<FrequencyLattice>,
    repr: Representation,
    data: [Vec<Complex64>; 3],
}

impl VectorField {
    pub fn zeros(lattice: &Arc<FrequencyLattice>, repr: Representation) -> Self {
        let len = lattice.len();
        Self {
            lattice: Arc::clone(lattice),
            repr,
            data: [
                vec![Complex64::default(); len],
                vec![Complex64::default(); len],
                vec![Complex64::default(); len],
            ],
        }
    }

    /// Sample a real-valued function of position into a physical field.
    pub fn from_physical_fn<F>(lattice: &Arc<FrequencyLattice>, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [f64; 3] + Sync,
    {
        let mut out = Self::zeros(lattice, Representation::Physical);
        let lat = Arc::clone(lattice);
        let [c0, c1, c2] = &mut out.data;
        (
            c0.par_chunks_mut(CHUNK),
            c1.par_chunks_mut(CHUNK),
            c2.par_chunks_mut(CHUNK),
        )
            .into_par_iter()
            .enumerate()
            .for_each(|(chunk, (a, b, c))| {
                let base = chunk * CHUNK;
                for i in 0..a.len() {
                    let v = f(lat.position(base + i));
                    a[i] = Complex64::new(v[0], 0.0);
                    b[i] = Complex64::new(v[1], 0.0);
                    c[i] = Complex64::new(v[2], 0.0);
                }
            });
        out
    }

    pub fn from_components(
        lattice: &Arc<FrequencyLattice>,
        repr: Representation,
        data: [Vec<Complex64>; 3],
    ) -> Result<Self> {
        for c in &data {
            if c.len() != lattice.len() {
                return Err(Error::InvalidParameter(format!(
                    "component length {} does not match lattice size {}",
                    c.len(),
                    lattice.len()
                )));
            }
        }
        Ok(Self { lattice: Arc::clone(lattice), repr, data })
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice> {
        &self.lattice
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn component(&self, k: usize) -> &[Complex64] {
        &self.data[k]
    }

    pub fn component_mut(&mut self, k: usize) -> &mut Vec<Complex64> {
        &mut self.data[k]
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.data
    }

    pub fn components_mut(&mut self) -> [&mut Vec<Complex64>; 3] {
        let [a, b, c] = &mut self.data;
        [a, b, c]
    }

    pub fn check_same_lattice(&self, other: &Self) -> Result<()> {
        self.lattice.check_same(&other.lattice)
    }

    /// Forward transform. Errors when the field is already spectral.
    pub fn to_spectral(&self) -> Result<Self> {
        if self.repr == Representation::Spectral {
            return Err(Error::RepresentationMismatch("spectral"));
        }
        let mut out = self.clone();
        out.transform_forward_in_place();
        Ok(out)
    }

    /// Inverse transform. Errors when the field is already physical.
    pub fn to_physical(&self) -> Result<Self> {
        if self.repr == Representation::Physical {
            return Err(Error::RepresentationMismatch("physical"));
        }
        let mut out = self.clone();
        out.transform_inverse_in_place();
        Ok(out)
    }

    pub(crate) fn transform_forward_in_place(&mut self) {
        debug_assert_eq!(self.repr, Representation::Physical);
        for c in &mut self.data {
            fft3_forward(&self.lattice, c);
        }
        self.repr = Representation::Spectral;
    }

    pub(crate) fn transform_inverse_in_place(&mut self) {
        debug_assert_eq!(self.repr, Representation::Spectral);
        for c in &mut self.data {
            fft3_inverse(&self.lattice, c);
        }
        self.repr = Representation::Physical;
        let ratio = self.max_imag_ratio();
        if ratio > IMAG_WATCHDOG {
            log::warn!("physical field carries imaginary residue {ratio:.3e}");
        }
    }

    /// Return a spectral copy, transforming only if needed.
    pub fn spectral(&self) -> Self {
        match self.repr {
            Representation::Spectral => self.clone(),
            Representation::Physical => {
                let mut out = self.clone();
                out.transform_forward_in_place();
                out
            }
        }
    }

    /// Return a physical copy, transforming only if needed.
    pub fn physical(&self) -> Self {
        match self.repr {
            Representation::Physical => self.clone(),
            Representation::Spectral => {
                let mut out = self.clone();
                out.transform_inverse_in_place();
                out
            }
        }
    }

    /// Multiply each mode by `(iξ)^α`; the Nyquist row of axis `d` is zeroed
    /// whenever `α_d` is odd (that derivative has no unbiased sign there).
    /// Physical input is transformed first; the result is spectral.
    pub fn spectral_derivative(&self, alpha: [usize; 3]) -> Self {
        let f = self.spectral();
        let lat = Arc::clone(&f.lattice);
        let mut out = f;
        let n = lat.n;
        for c in &mut out.data {
            c.par_chunks_mut(CHUNK).enumerate().for_each(|(chunk, vals)| {
                let base = chunk * CHUNK;
                for (i, v) in vals.iter_mut().enumerate() {
                    let idx = base + i;
                    let (ix, iy, iz) = lat.decompose(idx);
                    let xi = [lat.freq[ix], lat.freq[iy], lat.freq[iz]];
                    let nyq = [ix == n / 2, iy == n / 2, iz == n / 2];
                    let mut m = Complex64::new(1.0, 0.0);
                    let mut kill = false;
                    for d in 0..3 {
                        if alpha[d] == 0 {
                            continue;
                        }
                        if nyq[d] && alpha[d] % 2 == 1 {
                            kill = true;
                            break;
                        }
                        m *= Complex64::new(0.0, xi[d]).powu(alpha[d] as u32);
                    }
                    *v = if kill { Complex64::default() } else { *v * m };
                }
            });
        }
        out
    }

    /// Apply a per-mode map `(ξ, ξ°, v) -> v'` to a spectral field, where
    /// `ξ°` is the Nyquist-zeroed frequency vector (see
    /// [`FrequencyLattice::xi_unbiased`]); anisotropic factors must be built
    /// from `ξ°`, radial ones from `ξ`.
    pub fn mode_map<F>(&self, f: F) -> Self
    where
        F: Fn([f64; 3], [f64; 3], [Complex64; 3]) -> [Complex64; 3] + Sync,
    {
        let src = self.spectral();
        let lat = Arc::clone(&src.lattice);
        let mut out = VectorField::zeros(&lat, Representation::Spectral);
        let [s0, s1, s2] = &src.data;
        let [o0, o1, o2] = &mut out.data;
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
                    let v = f(
                        lat.xi(idx),
                        lat.xi_unbiased(idx),
                        [s0[idx], s1[idx], s2[idx]],
                    );
                    a[i] = v[0];
                    b[i] = v[1];
                    c[i] = v[2];
                }
            });
        out
    }

    /// Multiply every mode of every component by a radial scalar symbol.
    pub fn scalar_multiplier<F>(&self, sym: F) -> Self
    where
        F: Fn(f64) -> f64 + Sync,
    {
        self.mode_map(|xi, _, v| {
            let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
            let s = sym(r);
            [v[0] * s, v[1] * s, v[2] * s]
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.binary(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.binary(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.data {
            c.par_iter_mut().for_each(|v| *v *= s);
        }
        out
    }

    fn binary(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64 + Sync) -> Result<Self> {
        self.check_same_lattice(other)?;
        if self.repr != other.repr {
            return Err(Error::RepresentationMismatch(match self.repr {
                Representation::Physical => "physical",
                Representation::Spectral => "spectral",
            }));
        }
        let mut out = self.clone();
        for k in 0..3 {
            let src = &other.data[k];
            out.data[k]
                .par_iter_mut()
                .zip(src.par_iter())
                .for_each(|(a, b)| *a = op(*a, *b));
        }
        Ok(out)
    }

    /// Max over points of the Euclidean vector magnitude.
    pub fn max_abs(&self) -> f64 {
        let [c0, c1, c2] = &self.data;
        (0..c0.len())
            .into_par_iter()
            .map(|i| (c0[i].norm_sqr() + c1[i].norm_sqr() + c2[i].norm_sqr()).sqrt())
            .reduce(|| 0.0, f64::max)
    }

    /// Largest imaginary magnitude relative to the largest real magnitude.
    pub fn max_imag_ratio(&self) -> f64 {
        let mut max_im: f64 = 0.0;
        let mut max_re: f64 = 0.0;
        for c in &self.data {
            let (im, re) = c
                .par_iter()
                .map(|v| (v.im.abs(), v.re.abs()))
                .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
            max_im = max_im.max(im);
            max_re = max_re.max(re);
        }
        if max_re == 0.0 {
            if max_im == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            max_im / max_re
        }
    }

    /// Worst deviation from the Hermitian symmetry `ĝ(-ξ) = conj ĝ(ξ)`
    /// (with modular negation, so Nyquist rows pair with themselves),
    /// relative to the largest mode magnitude.
    pub fn hermitian_error(&self) -> f64 {
        let f = self.spectral();
        let lat = &f.lattice;
        let mut worst: f64 = 0.0;
        let mut peak: f64 = 0.0;
        for c in &f.data {
            let (w, p) = (0..c.len())
                .into_par_iter()
                .map(|idx| {
                    let j = lat.conjugate_index(idx);
                    ((c[j] - c[idx].conj()).norm(), c[idx].norm())
                })
                .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
            worst = worst.max(w);
            peak = peak.max(p);
        }
        if peak == 0.0 {
            0.0
        } else {
            worst / peak
        }
    }
}

pub(crate) const CHUNK: usize = 8192;

/// Single-component field sharing the [`VectorField`] transform machinery.
#[derive(Clone)]
pub struct ScalarField {
    lattice: Arc<FrequencyLattice>,
    repr: Representation,
    data: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(lattice: &Arc<FrequencyLattice>, repr: Representation) -> Self {
        Self {
            lattice: Arc::clone(lattice),
            repr,
            data: vec![Complex64::default(); lattice.len()],
        }
    }

    pub fn from_physical_fn<F>(lattice: &Arc<FrequencyLattice>, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync,
    {
        let mut out = Self::zeros(lattice, Representation::Physical);
        let lat = Arc::clone(lattice);
        out.data.par_chunks_mut(CHUNK).enumerate().for_each(|(chunk, vals)| {
            let base = chunk * CHUNK;
            for (i, v) in vals.iter_mut().enumerate() {
                *v = Complex64::new(f(lat.position(base + i)), 0.0);
            }
        });
        out
    }

    /// Build a spectral field directly from a symbol evaluated per mode;
    /// the closure receives `(ξ, ξ°)` as in [`VectorField::mode_map`].
    pub fn from_symbol<F>(lattice: &Arc<FrequencyLattice>, sym: F) -> Self
    where
        F: Fn([f64; 3], [f64; 3]) -> Complex64 + Sync,
    {
        let mut out = Self::zeros(lattice, Representation::Spectral);
        let lat = Arc::clone(lattice);
        out.data.par_chunks_mut(CHUNK).enumerate().for_each(|(chunk, vals)| {
            let base = chunk * CHUNK;
            for (i, v) in vals.iter_mut().enumerate() {
                *v = sym(lat.xi(base + i), lat.xi_unbiased(base + i));
            }
        });
        out
    }

    pub fn lattice(&self) -> &Arc<FrequencyLattice> {
        &self.lattice
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn values(&self) -> &[Complex64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.data
    }

    pub fn to_spectral(&self) -> Result<Self> {
        if self.repr == Representation::Spectral {
            return Err(Error::RepresentationMismatch("spectral"));
        }
        let mut out = self.clone();
        fft3_forward(&out.lattice, &mut out.data);
        out.repr = Representation::Spectral;
        Ok(out)
    }

    pub fn to_physical(&self) -> Result<Self> {
        if self.repr == Representation::Physical {
            return Err(Error::RepresentationMismatch("physical"));
        }
        let mut out = self.clone();
        fft3_inverse(&out.lattice, &mut out.data);
        out.repr = Representation::Physical;
        Ok(out)
    }

    pub fn spectral(&self) -> Self {
        match self.repr {
            Representation::Spectral => self.clone(),
            Representation::Physical => self.to_spectral().expect("physical input"),
        }
    }

    pub fn physical(&self) -> Self {
        match self.repr {
            Representation::Physical => self.clone(),
            Representation::Spectral => self.to_physical().expect("spectral input"),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lattice.check_same(&other.lattice)?;
        let mut out = self.clone();
        out.data
            .par_iter_mut()
            .zip(other.data.par_iter())
            .for_each(|(a, b)| *a -= b);
        Ok(out)
    }

    /// Cell-volume quadrature of the (real part of the) field.
    pub fn integral(&self) -> f64 {
        let f = self.physical();
        let sum: f64 = f.data.iter().map(|v| v.re).sum();
        sum * f.lattice.cell_volume()
    }
}
