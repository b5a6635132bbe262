//! Experiment configuration: a flat `key = value` text format with dotted
//! sections, its parser/validator, and the initial-data generators.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{FrequencyLattice, Representation, VectorField};
use crate::metrology::Claim;
use crate::snapshot;
use crate::symbols::{Band, MaterialParams};

/// Initial-data generator. Gaussians and finite mode sets are spectrally
/// localized by construction, which is what keeps the integrability
/// hypotheses meaningful on the periodic surrogate.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Zero,
    Gaussian {
        width: f64,
        amplitude: f64,
        components: [bool; 3],
    },
    Mode {
        wavevector: [i64; 3],
        amplitude: f64,
        components: [bool; 3],
    },
    /// Seeded random field filtered by a Gaussian spectral envelope of the
    /// given width, rescaled to the requested amplitude. Fills the whole
    /// box, so it has no wrap-free horizon.
    Broadband {
        amplitude: f64,
        spectral_width: f64,
        components: [bool; 3],
    },
    File(PathBuf),
}

impl DataSpec {
    /// Diameter of the effective support, for the no-wrap bound.
    pub fn support_diameter(&self, box_length: f64) -> f64 {
        match self {
            DataSpec::Zero => 0.0,
            DataSpec::Gaussian { width, .. } => 9.0 * width,
            DataSpec::Mode { .. } => box_length,
            DataSpec::Broadband { .. } => box_length,
            DataSpec::File(_) => box_length,
        }
    }

    pub fn generate(&self, lattice: &Arc<FrequencyLattice>, seed: u64) -> Result<VectorField> {
        match self {
            DataSpec::Zero => Ok(VectorField::zeros(lattice, Representation::Physical)),
            DataSpec::Gaussian { width, amplitude, components } => {
                let w2 = width * width;
                let amp = *amplitude;
                let mask = *components;
                Ok(VectorField::from_physical_fn(lattice, move |x| {
                    let g = amp * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / w2).exp();
                    [
                        if mask[0] { g } else { 0.0 },
                        if mask[1] { g } else { 0.0 },
                        if mask[2] { g } else { 0.0 },
                    ]
                }))
            }
            DataSpec::Mode { wavevector, amplitude, components } => {
                let l = lattice.box_length();
                let xi = [
                    2.0 * std::f64::consts::PI * wavevector[0] as f64 / l,
                    2.0 * std::f64::consts::PI * wavevector[1] as f64 / l,
                    2.0 * std::f64::consts::PI * wavevector[2] as f64 / l,
                ];
                let amp = *amplitude;
                let mask = *components;
                Ok(VectorField::from_physical_fn(lattice, move |x| {
                    let g = amp * (xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]).cos();
                    [
                        if mask[0] { g } else { 0.0 },
                        if mask[1] { g } else { 0.0 },
                        if mask[2] { g } else { 0.0 },
                    ]
                }))
            }
            DataSpec::Broadband { amplitude, spectral_width, components } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut f = VectorField::zeros(lattice, Representation::Physical);
                for k in 0..3 {
                    let comp = f.component_mut(k);
                    if components[k] {
                        for v in comp.iter_mut() {
                            *v = num_complex::Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
                        }
                    } else {
                        // Keep the RNG stream position independent of the mask.
                        for _ in 0..comp.len() {
                            let _: f64 = rng.gen_range(-1.0..1.0);
                        }
                    }
                }
                let sw = *spectral_width;
                let mut filtered = f
                    .to_spectral()?
                    .scalar_multiplier(|r| (-r * r / (2.0 * sw * sw)).exp());
                for k in 0..3 {
                    filtered.component_mut(k)[0] = num_complex::Complex64::default();
                }
                let phys = filtered.to_physical()?;
                let peak = phys.max_abs();
                if peak == 0.0 {
                    return Ok(phys);
                }
                Ok(phys.scale(amplitude / peak))
            }
            DataSpec::File(path) => {
                let (field, header) = snapshot::read_field(path)?;
                if header.n as usize != lattice.points_per_axis()
                    || header.box_length != lattice.box_length()
                {
                    return Err(Error::ConfigValidation(format!(
                        "snapshot {path:?} has lattice {}/{} but the run uses {}/{}",
                        header.n,
                        header.box_length,
                        lattice.points_per_axis(),
                        lattice.box_length()
                    )));
                }
                Ok(field)
            }
        }
    }
}

/// Nonlinearity selector in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    None,
    GradGrad2,
    GradGradT,
}

impl FormKind {
    pub fn to_form(self) -> crate::duhamel::NonlinearityForm {
        match self {
            FormKind::None => crate::duhamel::NonlinearityForm::None,
            FormKind::GradGrad2 => crate::duhamel::NonlinearityForm::grad_grad2(),
            FormKind::GradGradT => crate::duhamel::NonlinearityForm::grad_gradt(),
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            FormKind::None => "none",
            FormKind::GradGrad2 => "grad_grad2",
            FormKind::GradGradT => "grad_gradt",
        }
    }
}

/// One claim to verify, with an optional per-claim tolerance override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimRequest {
    pub claim: Claim,
    pub tolerance: Option<f64>,
}

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub material: MaterialParams,
    pub n: usize,
    pub box_length: f64,
    pub f0: DataSpec,
    pub f1: DataSpec,
    pub form: FormKind,
    pub band: Option<Band>,
    pub schedule: Vec<f64>,
    pub step: Option<f64>,
    pub allow_wrap: bool,
    pub claims: Vec<ClaimRequest>,
    pub fit_window: Option<(f64, f64)>,
    pub tolerance: Option<f64>,
    pub cutoffs: Option<(f64, f64)>,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    pub store_snapshots: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            material: MaterialParams::new(0.0, 1.0, 1.0).expect("default material"),
            n: 64,
            box_length: 128.0,
            f0: DataSpec::Zero,
            f1: DataSpec::Gaussian {
                width: 2.0,
                amplitude: 1e-3,
                components: [true; 3],
            },
            form: FormKind::GradGrad2,
            band: None,
            schedule: default_schedule(),
            step: None,
            allow_wrap: false,
            claims: Vec::new(),
            fit_window: None,
            tolerance: None,
            cutoffs: None,
            output_dir: None,
            seed: 0,
            store_snapshots: true,
        }
    }
}

fn default_schedule() -> Vec<f64> {
    // Eight geometric samples over [4, 32], inside the no-wrap bound of the
    // default box.
    let (t0, t1, count) = (4.0_f64, 32.0_f64, 8usize);
    (0..count)
        .map(|i| t0 * (t1 / t0).powf(i as f64 / (count - 1) as f64))
        .collect()
}

impl ExperimentConfig {
    /// Largest propagation speed times two, the denominator of the no-wrap
    /// bound.
    pub fn no_wrap_bound(&self) -> f64 {
        let support = self
            .f0
            .support_diameter(self.box_length)
            .max(self.f1.support_diameter(self.box_length));
        ((self.box_length - support) / (2.0 * self.material.fast_speed())).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n % 2 != 0 || self.n < 8 {
            return Err(Error::ConfigValidation(format!(
                "lattice.n must be even and >= 8, got {}",
                self.n
            )));
        }
        if !(self.box_length > 0.0) {
            return Err(Error::ConfigValidation(format!(
                "lattice.box_length must be positive, got {}",
                self.box_length
            )));
        }
        for w in self.schedule.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::ConfigValidation(
                    "time.schedule must be strictly increasing".into(),
                ));
            }
        }
        if let Some(h) = self.step {
            if !(h > 0.0) {
                return Err(Error::ConfigValidation(format!(
                    "time.step must be positive, got {h}"
                )));
            }
        }
        if self.band.is_some() && self.form != FormKind::None {
            return Err(Error::ConfigValidation(
                "band restriction only applies to linear runs (nonlinearity.kind = none)".into(),
            ));
        }
        let bound = self.no_wrap_bound();
        let horizon = self.schedule.last().copied().unwrap_or(0.0);
        if !self.allow_wrap && horizon > bound {
            let support = self
                .f0
                .support_diameter(self.box_length)
                .max(self.f1.support_diameter(self.box_length));
            return Err(Error::HorizonExceeded {
                requested: horizon,
                bound,
                box_length: self.box_length,
                support,
                speed: self.material.fast_speed(),
            });
        }
        Ok(())
    }

    /// Canonical `key = value` echo of this configuration (sorted keys);
    /// parsing the echo reproduces the configuration.
    pub fn echo(&self) -> String {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        kv.insert("material.lambda".into(), fmt_f64(self.material.lambda));
        kv.insert("material.mu".into(), fmt_f64(self.material.mu));
        kv.insert("material.nu".into(), fmt_f64(self.material.nu));
        kv.insert("lattice.n".into(), self.n.to_string());
        kv.insert("lattice.box_length".into(), fmt_f64(self.box_length));
        echo_data(&mut kv, "data.f0", &self.f0);
        echo_data(&mut kv, "data.f1", &self.f1);
        kv.insert("nonlinearity.kind".into(), self.form.as_str().into());
        if let Some(band) = self.band {
            kv.insert(
                "band".into(),
                match band {
                    Band::Low => "low".into(),
                    Band::Middle => "middle".into(),
                    Band::High => "high".into(),
                },
            );
        }
        kv.insert(
            "time.schedule".into(),
            self.schedule.iter().map(|t| fmt_f64(*t)).collect::<Vec<_>>().join(","),
        );
        if let Some(h) = self.step {
            kv.insert("time.step".into(), fmt_f64(h));
        }
        kv.insert("time.allow_wrap".into(), self.allow_wrap.to_string());
        if !self.claims.is_empty() {
            kv.insert(
                "claims".into(),
                self.claims
                    .iter()
                    .map(|c| match c.tolerance {
                        Some(tol) => format!("{}:tol={}", c.claim.id(), fmt_f64(tol)),
                        None => c.claim.id(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        if let Some((lo, hi)) = self.fit_window {
            kv.insert("fit.t_lo".into(), fmt_f64(lo));
            kv.insert("fit.t_hi".into(), fmt_f64(hi));
        }
        if let Some(tol) = self.tolerance {
            kv.insert("fit.tolerance".into(), fmt_f64(tol));
        }
        if let Some((c0, c1)) = self.cutoffs {
            kv.insert("cutoffs.c0".into(), fmt_f64(c0));
            kv.insert("cutoffs.c1".into(), fmt_f64(c1));
        }
        if let Some(dir) = &self.output_dir {
            kv.insert("output.dir".into(), dir.display().to_string());
        }
        kv.insert("seed".into(), self.seed.to_string());
        kv.insert("snapshots.store".into(), self.store_snapshots.to_string());
        kv.insert(
            "derived.no_wrap_horizon".into(),
            fmt_f64(self.no_wrap_bound()),
        );
        let mut out = String::new();
        for (k, v) in kv {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

fn fmt_f64(v: f64) -> String {
    // Shortest round-trip formatting; stable across runs.
    format!("{v}")
}

fn echo_data(kv: &mut BTreeMap<String, String>, prefix: &str, spec: &DataSpec) {
    let comp = |mask: &[bool; 3]| -> String {
        let mut s = String::new();
        for (i, c) in ["x", "y", "z"].iter().enumerate() {
            if mask[i] {
                s.push_str(c);
            }
        }
        s
    };
    match spec {
        DataSpec::Zero => {
            kv.insert(format!("{prefix}.kind"), "zero".into());
        }
        DataSpec::Gaussian { width, amplitude, components } => {
            kv.insert(format!("{prefix}.kind"), "gaussian".into());
            kv.insert(format!("{prefix}.width"), fmt_f64(*width));
            kv.insert(format!("{prefix}.amplitude"), fmt_f64(*amplitude));
            kv.insert(format!("{prefix}.components"), comp(components));
        }
        DataSpec::Mode { wavevector, amplitude, components } => {
            kv.insert(format!("{prefix}.kind"), "mode".into());
            kv.insert(
                format!("{prefix}.wavevector"),
                format!("{},{},{}", wavevector[0], wavevector[1], wavevector[2]),
            );
            kv.insert(format!("{prefix}.amplitude"), fmt_f64(*amplitude));
            kv.insert(format!("{prefix}.components"), comp(components));
        }
        DataSpec::Broadband { amplitude, spectral_width, components } => {
            kv.insert(format!("{prefix}.kind"), "broadband".into());
            kv.insert(format!("{prefix}.amplitude"), fmt_f64(*amplitude));
            kv.insert(format!("{prefix}.spectral_width"), fmt_f64(*spectral_width));
            kv.insert(format!("{prefix}.components"), comp(components));
        }
        DataSpec::File(path) => {
            kv.insert(format!("{prefix}.kind"), "file".into());
            kv.insert(format!("{prefix}.path"), path.display().to_string());
        }
    }
}

/// Raw parse result: the validated config plus any sweep axes
/// (`sweep.<key> = v1, v2, ...`).
#[derive(Debug)]
pub struct ParsedConfig {
    pub base: ExperimentConfig,
    pub sweeps: Vec<(String, Vec<String>)>,
}

/// Parse and validate configuration text.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut sweeps = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(Error::ConfigParse {
            line: lineno + 1,
            msg: format!("expected key = value, got {line:?}"),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if let Some(target) = key.strip_prefix("sweep.") {
            let values: Vec<String> =
                value.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
            if values.is_empty() {
                return Err(Error::ConfigParse {
                    line: lineno + 1,
                    msg: format!("sweep over {target:?} has no values"),
                });
            }
            sweeps.push((target.to_string(), values));
        } else {
            entries.insert(key, (lineno + 1, value));
        }
    }
    let base = build_config(&entries)?;
    Ok(ParsedConfig { base, sweeps })
}

/// Re-parse with one key overridden (sweep expansion).
pub fn override_key(text: &str, key: &str, value: &str) -> String {
    let mut out = String::new();
    let mut replaced = false;
    for raw in text.lines() {
        let stripped = raw.split('#').next().unwrap_or("").trim();
        let is_target = stripped
            .split_once('=')
            .map(|(k, _)| k.trim() == key)
            .unwrap_or(false);
        if is_target {
            out.push_str(&format!("{key} = {value}\n"));
            replaced = true;
        } else if !stripped.starts_with("sweep.") {
            out.push_str(raw);
            out.push('\n');
        }
    }
    if !replaced {
        out.push_str(&format!("{key} = {value}\n"));
    }
    out
}

fn build_config(entries: &BTreeMap<String, (usize, String)>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut schedule_geom: Option<(f64, f64, usize)> = None;
    let mut fit_lo = None;
    let mut fit_hi = None;
    let mut cut0 = None;
    let mut cut1 = None;
    let mut lambda = cfg.material.lambda;
    let mut mu = cfg.material.mu;
    let mut nu = cfg.material.nu;
    let mut f0 = DataBuilder::new("zero");
    let mut f1 = DataBuilder::new("gaussian");

    for (key, (line, value)) in entries {
        let line = *line;
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse().map_err(|_| Error::ConfigParse {
                line,
                msg: format!("cannot parse number {v:?} for {key}"),
            })
        };
        let parse_bool = |v: &str| -> Result<bool> {
            match v {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                other => Err(Error::ConfigParse {
                    line,
                    msg: format!("cannot parse boolean {other:?} for {key}"),
                }),
            }
        };
        match key.as_str() {
            "material.lambda" => lambda = parse_f64(value)?,
            "material.mu" => mu = parse_f64(value)?,
            "material.nu" => nu = parse_f64(value)?,
            "lattice.n" => {
                cfg.n = value.parse().map_err(|_| Error::ConfigParse {
                    line,
                    msg: format!("cannot parse lattice.n {value:?}"),
                })?
            }
            "lattice.box_length" => cfg.box_length = parse_f64(value)?,
            "nonlinearity.kind" => {
                cfg.form = match value.as_str() {
                    "none" => FormKind::None,
                    "grad_grad2" => FormKind::GradGrad2,
                    "grad_gradt" => FormKind::GradGradT,
                    other => {
                        return Err(Error::ConfigParse {
                            line,
                            msg: format!(
                                "unknown nonlinearity {other:?} (none | grad_grad2 | grad_gradt)"
                            ),
                        })
                    }
                }
            }
            "band" => {
                cfg.band = match value.as_str() {
                    "all" => None,
                    "low" => Some(Band::Low),
                    "middle" => Some(Band::Middle),
                    "high" => Some(Band::High),
                    other => {
                        return Err(Error::ConfigParse {
                            line,
                            msg: format!("unknown band {other:?} (all | low | middle | high)"),
                        })
                    }
                }
            }
            "time.schedule" => {
                let mut sched = Vec::new();
                for v in value.split(',') {
                    sched.push(parse_f64(v.trim())?);
                }
                cfg.schedule = sched;
            }
            "time.schedule_geom" => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::ConfigParse {
                        line,
                        msg: "time.schedule_geom needs t0,t1,count".into(),
                    });
                }
                let t0 = parse_f64(parts[0])?;
                let t1 = parse_f64(parts[1])?;
                let count: usize = parts[2].parse().map_err(|_| Error::ConfigParse {
                    line,
                    msg: format!("bad count {:?}", parts[2]),
                })?;
                if count < 2 || !(t1 > t0) || !(t0 > 0.0) {
                    return Err(Error::ConfigParse {
                        line,
                        msg: "time.schedule_geom needs 0 < t0 < t1 and count >= 2".into(),
                    });
                }
                schedule_geom = Some((t0, t1, count));
            }
            "time.step" => cfg.step = Some(parse_f64(value)?),
            "time.allow_wrap" => cfg.allow_wrap = parse_bool(value)?,
            "claims" => {
                let mut claims = Vec::new();
                for part in value.split([',', ' ']).filter(|s| !s.trim().is_empty()) {
                    claims.push(parse_claim_request(part.trim(), line)?);
                }
                cfg.claims = claims;
            }
            "fit.t_lo" => fit_lo = Some(parse_f64(value)?),
            "fit.t_hi" => fit_hi = Some(parse_f64(value)?),
            "fit.tolerance" => cfg.tolerance = Some(parse_f64(value)?),
            "cutoffs.c0" => cut0 = Some(parse_f64(value)?),
            "cutoffs.c1" => cut1 = Some(parse_f64(value)?),
            "output.dir" => cfg.output_dir = Some(PathBuf::from(value)),
            "seed" => {
                cfg.seed = value.parse().map_err(|_| Error::ConfigParse {
                    line,
                    msg: format!("cannot parse seed {value:?}"),
                })?
            }
            "snapshots.store" => cfg.store_snapshots = parse_bool(value)?,
            "derived.no_wrap_horizon" => {} // echo-only, ignored on input
            _ => {
                if let Some(rest) = key.strip_prefix("data.f0.") {
                    f0.set(rest, value, line)?;
                } else if let Some(rest) = key.strip_prefix("data.f1.") {
                    f1.set(rest, value, line)?;
                } else {
                    return Err(Error::ConfigParse {
                        line,
                        msg: format!("unknown key {key:?}"),
                    });
                }
            }
        }
    }

    cfg.material = MaterialParams::new(lambda, mu, nu).map_err(|e| {
        Error::ConfigValidation(format!(
            "material violates the admissibility conditions mu > 0, lambda + 2 mu > 0, nu > 0: {e}"
        ))
    })?;
    cfg.f0 = f0.build()?;
    cfg.f1 = f1.build()?;
    if let Some((t0, t1, count)) = schedule_geom {
        cfg.schedule = (0..count)
            .map(|i| t0 * (t1 / t0).powf(i as f64 / (count - 1) as f64))
            .collect();
    }
    cfg.fit_window = match (fit_lo, fit_hi) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        (None, None) => None,
        _ => {
            return Err(Error::ConfigValidation(
                "fit.t_lo and fit.t_hi must be given together".into(),
            ))
        }
    };
    cfg.cutoffs = match (cut0, cut1) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => {
            return Err(Error::ConfigValidation(
                "cutoffs.c0 and cutoffs.c1 must be given together".into(),
            ))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn parse_claim_request(s: &str, line: usize) -> Result<ClaimRequest> {
    let mut claim_part = String::new();
    let mut tolerance = None;
    for piece in s.split(':') {
        if let Some(tol) = piece.strip_prefix("tol=") {
            tolerance = Some(tol.parse().map_err(|_| Error::ConfigParse {
                line,
                msg: format!("bad tolerance in claim {s:?}"),
            })?);
        } else {
            if !claim_part.is_empty() {
                claim_part.push(':');
            }
            claim_part.push_str(piece);
        }
    }
    let claim = Claim::parse(&claim_part)?;
    Ok(ClaimRequest { claim, tolerance })
}

struct DataBuilder {
    kind: String,
    width: f64,
    amplitude: f64,
    components: [bool; 3],
    wavevector: [i64; 3],
    spectral_width: f64,
    path: Option<PathBuf>,
}

impl DataBuilder {
    fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            width: 2.0,
            amplitude: 1e-3,
            components: [true; 3],
            wavevector: [1, 0, 0],
            spectral_width: 1.0,
            path: None,
        }
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "kind" => self.kind = value.to_string(),
            "width" => self.width = parse_num(value, line)?,
            "amplitude" => self.amplitude = parse_num(value, line)?,
            "spectral_width" => self.spectral_width = parse_num(value, line)?,
            "components" => {
                let mut mask = [false; 3];
                for ch in value.chars() {
                    match ch {
                        'x' => mask[0] = true,
                        'y' => mask[1] = true,
                        'z' => mask[2] = true,
                        other => {
                            return Err(Error::ConfigParse {
                                line,
                                msg: format!("bad component letter {other:?} (use xyz)"),
                            })
                        }
                    }
                }
                self.components = mask;
            }
            "wavevector" => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::ConfigParse {
                        line,
                        msg: "wavevector needs three integers".into(),
                    });
                }
                for (i, p) in parts.iter().enumerate() {
                    self.wavevector[i] = p.parse().map_err(|_| Error::ConfigParse {
                        line,
                        msg: format!("bad wavevector entry {p:?}"),
                    })?;
                }
            }
            "path" => self.path = Some(PathBuf::from(value)),
            other => {
                return Err(Error::ConfigParse {
                    line,
                    msg: format!("unknown data key {other:?}"),
                })
            }
        }
        Ok(())
    }

    fn build(self) -> Result<DataSpec> {
        Ok(match self.kind.as_str() {
            "zero" | "none" => DataSpec::Zero,
            "gaussian" => DataSpec::Gaussian {
                width: self.width,
                amplitude: self.amplitude,
                components: self.components,
            },
            "mode" => DataSpec::Mode {
                wavevector: self.wavevector,
                amplitude: self.amplitude,
                components: self.components,
            },
            "broadband" => DataSpec::Broadband {
                amplitude: self.amplitude,
                spectral_width: self.spectral_width,
                components: self.components,
            },
            "file" => DataSpec::File(self.path.ok_or_else(|| {
                Error::ConfigValidation("file data needs a path".into())
            })?),
            other => {
                return Err(Error::ConfigValidation(format!(
                    "unknown data kind {other:?} (zero | gaussian | mode | broadband | file)"
                )))
            }
        })
    }
}

fn parse_num(value: &str, line: usize) -> Result<f64> {
    value.parse().map_err(|_| Error::ConfigParse {
        line,
        msg: format!("cannot parse number {value:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let parsed = parse_config("material.mu = 1.0\n").unwrap();
        let cfg = parsed.base;
        assert_eq!(cfg.material.lambda, 0.0);
        assert_eq!(cfg.material.nu, 1.0);
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.box_length, 128.0);
        assert_eq!(cfg.form, FormKind::GradGrad2);
        assert!(matches!(cfg.f0, DataSpec::Zero));
        assert!(matches!(cfg.f1, DataSpec::Gaussian { .. }));
        assert_eq!(cfg.schedule.len(), 8);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn invalid_material_is_rejected_with_the_constraint() {
        let err = parse_config("material.mu = -1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mu > 0"), "unexpected message: {msg}");
    }

    #[test]
    fn horizon_past_the_no_wrap_bound_is_rejected() {
        let text = "lattice.box_length = 32\ntime.schedule = 10, 100\n";
        let err = parse_config(text).unwrap_err();
        match err {
            Error::HorizonExceeded { requested, bound, .. } => {
                assert_eq!(requested, 100.0);
                assert!(bound < 100.0);
            }
            other => panic!("expected horizon error, got {other}"),
        }
        let with_override = format!("{text}time.allow_wrap = true\n");
        assert!(parse_config(&with_override).is_ok());
    }

    #[test]
    fn echo_round_trips() {
        let text = "\
material.lambda = 1.5
material.mu = 2
lattice.n = 32
lattice.box_length = 64
data.f1.kind = gaussian
data.f1.width = 3
data.f1.amplitude = 0.01
nonlinearity.kind = grad_gradt
time.schedule = 1,2,4
time.step = 0.05
claims = u:p=2:a=1, ut:p=2:a=0:tol=0.2
fit.t_lo = 1
fit.t_hi = 4
seed = 7
";
        let cfg = parse_config(text).unwrap().base;
        let echoed = parse_config(&cfg.echo()).unwrap().base;
        assert_eq!(cfg, echoed);
    }

    #[test]
    fn unknown_keys_carry_line_numbers() {
        let err = parse_config("material.mu = 1\nbogus.key = 3\n").unwrap_err();
        match err {
            Error::ConfigParse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn sweeps_are_collected() {
        let parsed = parse_config("sweep.data.f1.amplitude = 1e-3, 5e-4\n").unwrap();
        assert_eq!(parsed.sweeps.len(), 1);
        assert_eq!(parsed.sweeps[0].0, "data.f1.amplitude");
        assert_eq!(parsed.sweeps[0].1.len(), 2);
    }

    #[test]
    fn generators_produce_expected_shapes() {
        let lat = FrequencyLattice::new(16, 20.0).unwrap();
        let g = DataSpec::Gaussian { width: 2.0, amplitude: 0.5, components: [true, false, true] }
            .generate(&lat, 0)
            .unwrap();
        // Peak at the origin-adjacent grid point, masked component empty.
        assert!(g.component(1).iter().all(|v| v.norm() == 0.0));
        assert!(g.max_abs() <= 0.5 * 2.0_f64.sqrt() + 1e-12);

        let m = DataSpec::Mode { wavevector: [2, 0, 0], amplitude: 1.0, components: [true; 3] }
            .generate(&lat, 0)
            .unwrap();
        let s = m.to_spectral().unwrap();
        // Mass only at the requested lattice mode.
        let total: f64 = s.component(0).iter().map(|v| v.norm()).sum();
        let on = s.component(0)[2].norm() + s.component(0)[16 - 2].norm();
        assert!((total - on) / total < 1e-12);

        let b = DataSpec::Broadband { amplitude: 0.1, spectral_width: 1.0, components: [true; 3] }
            .generate(&lat, 42)
            .unwrap();
        assert!((b.max_abs() - 0.1).abs() < 1e-12);
        let b2 = DataSpec::Broadband { amplitude: 0.1, spectral_width: 1.0, components: [true; 3] }
            .generate(&lat, 42)
            .unwrap();
        for k in 0..3 {
            assert_eq!(b.component(k), b2.component(k), "seeded generator must be deterministic");
        }
    }
}
