//! Experiment orchestration: deterministic runs, artifact persistence with
//! a content-hash manifest, parameter sweeps, kernel selftests and report
//! re-rendering.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::duhamel::NonlinearSolver;
use crate::error::{Error, Result};
use crate::harness::config::{parse_config, ExperimentConfig, ParsedConfig};
use crate::lattice::FrequencyLattice;
use crate::metrology::{
    verify_estimate, write_claim_csv, write_summary_csv, Claim, DecayReport, VerifyOptions,
    DEFAULT_TOLERANCE, DEFAULT_T_MIN,
};
use crate::oracle::{fundamental_matrix, relative_error, rk45_mode_ode};
use crate::profiles::compute_moments;
use crate::propagator::BandRestriction;
use crate::symbols::{characteristic_roots, kernel_multipliers, Band, BandCutoffs};

/// Everything a finished run (or sweep) hands back.
pub struct RunArtifacts {
    pub reports: Vec<DecayReport>,
    pub all_pass: bool,
    pub output_dir: Option<PathBuf>,
}

/// Execute configuration text: a single run, or a sweep when `sweep.<key>`
/// axes are present (independent runs in `run_NNN/` subdirectories with a
/// merged summary).
pub fn execute_config_text(text: &str, output_override: Option<PathBuf>) -> Result<RunArtifacts> {
    let ParsedConfig { mut base, sweeps } = parse_config(text)?;
    if let Some(dir) = &output_override {
        base.output_dir = Some(dir.clone());
    } else if base.output_dir.is_none() {
        if let Ok(dir) = std::env::var("VISCOWAVE_OUTPUT_DIR") {
            base.output_dir = Some(PathBuf::from(dir));
        }
    }
    if sweeps.is_empty() {
        return run_single(&base);
    }

    // Cartesian expansion of the sweep axes over the raw text.
    let mut variants: Vec<(String, String)> = vec![(String::new(), text.to_string())];
    for (key, values) in &sweeps {
        let mut next = Vec::new();
        for (label, t) in &variants {
            for v in values {
                let new_label = if label.is_empty() {
                    format!("{key}={v}")
                } else {
                    format!("{label}, {key}={v}")
                };
                next.push((new_label, super::config::override_key(t, key, v)));
            }
        }
        variants = next;
    }

    let base_out = base.output_dir.clone();
    let runs: Vec<Result<(usize, String, RunArtifacts)>> = variants
        .par_iter()
        .enumerate()
        .map(|(i, (label, text))| {
            let mut cfg = parse_config(text)?.base;
            cfg.output_dir = base_out.as_ref().map(|d| d.join(format!("run_{i:03}")));
            let artifacts = run_single(&cfg)?;
            Ok((i, label.clone(), artifacts))
        })
        .collect();

    let mut reports = Vec::new();
    let mut all_pass = true;
    let mut sweep_lines = String::new();
    let mut merged: Vec<DecayReport> = Vec::new();
    for run in runs {
        let (i, label, artifacts) = run?;
        let _ = writeln!(sweep_lines, "run_{i:03}: {label}");
        all_pass &= artifacts.all_pass;
        merged.extend(artifacts.reports.iter().cloned());
        reports.extend(artifacts.reports);
    }
    if let Some(dir) = &base_out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("sweep_manifest.txt"), sweep_lines)?;
        write_summary_csv(dir.join("summary.csv"), &merged)?;
    }
    Ok(RunArtifacts { reports, all_pass, output_dir: base_out })
}

/// Run one experiment to completion: simulate, verify the requested claims,
/// and persist snapshots, per-claim CSVs, the summary and a manifest.
pub fn run_single(config: &ExperimentConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let lattice = FrequencyLattice::new(config.n, config.box_length)?;
    let f0 = config.f0.generate(&lattice, config.seed.wrapping_mul(2))?;
    let f1 = config.f1.generate(&lattice, config.seed.wrapping_mul(2).wrapping_add(1))?;

    let mut solver = NonlinearSolver::new(config.material, &lattice, config.form.to_form());
    if let Some(h) = config.step {
        solver = solver.with_step(h);
    }
    if !config.allow_wrap {
        solver = solver.with_horizon(config.no_wrap_bound());
    }
    if let Some(band) = config.band {
        let cuts = match config.cutoffs {
            Some((c0, c1)) => BandCutoffs::new(c0, c1)?,
            None => BandCutoffs::for_material(&config.material),
        };
        solver = solver.with_band(BandRestriction::One(cuts, band));
    }
    let mut written: Vec<PathBuf> = Vec::new();
    if let Some(dir) = &config.output_dir {
        fs::create_dir_all(dir)?;
        if config.store_snapshots {
            solver = solver.with_snapshot_dir(dir.join("snapshots"));
        }
    }

    let trajectory = solver.run(&f0, &f1, &config.schedule)?;
    for sample in &trajectory.samples {
        if let Some((u, ut)) = sample.on_disk() {
            written.push(u.clone());
            written.push(ut.clone());
        }
    }

    let needs_moments = config.claims.iter().any(|c| c.claim.family.is_gap());
    let moments = if needs_moments {
        Some(compute_moments(&f0, &f1, &trajectory)?)
    } else {
        None
    };

    let mut reports = Vec::new();
    for request in &config.claims {
        let opts = VerifyOptions {
            window: config.fit_window,
            tolerance: request
                .tolerance
                .or(config.tolerance)
                .unwrap_or(DEFAULT_TOLERANCE),
            t_min: DEFAULT_T_MIN,
        };
        reports.push(verify_estimate(
            &trajectory,
            moments.as_ref(),
            request.claim,
            &opts,
        )?);
    }

    if let Some(dir) = &config.output_dir {
        for report in &reports {
            let path = dir.join(claim_file_name(&report.claim));
            write_claim_csv(&path, report)?;
            written.push(path);
        }
        if !reports.is_empty() {
            let path = dir.join("summary.csv");
            write_summary_csv(&path, &reports)?;
            written.push(path);
        }
        write_manifest(dir, config, &written)?;
    }

    let all_pass = reports.iter().all(|r| r.pass);
    Ok(RunArtifacts {
        reports,
        all_pass,
        output_dir: config.output_dir.clone(),
    })
}

pub fn claim_file_name(claim: &Claim) -> String {
    let id = claim.id().replace(':', "_").replace('=', "").replace('.', "p");
    format!("claim_{id}.csv")
}

fn write_manifest(dir: &Path, config: &ExperimentConfig, written: &[PathBuf]) -> Result<()> {
    let echo = config.echo();
    let mut out = String::new();
    out.push_str("[config]\n");
    out.push_str(&echo);
    out.push_str("\n[inputs]\n");
    let _ = writeln!(out, "{}  config", hex_digest(echo.as_bytes()));
    out.push_str("\n[outputs]\n");
    let mut entries: Vec<(String, String)> = Vec::new();
    for path in written {
        let rel = path.strip_prefix(dir).unwrap_or(path);
        let bytes = fs::read(path)?;
        entries.push((rel.display().to_string(), hex_digest(&bytes)));
    }
    entries.sort();
    for (name, digest) in entries {
        let _ = writeln!(out, "{digest}  {name}");
    }
    fs::write(dir.join("manifest.txt"), out)?;
    Ok(())
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

// ---------------------------------------------------------------------------
// Report re-rendering
// ---------------------------------------------------------------------------

/// Re-render the summary of a finished run directory from its stored claim
/// series, reprinting the verdict table and rewriting `summary.csv`.
pub fn report_dir(dir: &Path) -> Result<bool> {
    let manifest = fs::read_to_string(dir.join("manifest.txt"))?;
    let config_text: String = manifest
        .lines()
        .skip_while(|l| l.trim() != "[config]")
        .skip(1)
        .take_while(|l| !l.trim().starts_with('['))
        .map(|l| format!("{l}\n"))
        .collect();
    let config = parse_config(&config_text)?.base;

    let summary = fs::read_to_string(dir.join("summary.csv"))?;
    let mut reports = Vec::new();
    for line in summary.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 8 {
            return Err(Error::SnapshotFormat(format!("bad summary row {line:?}")));
        }
        let claim = Claim::parse(&format!("{}:p={}:a={}", cols[0], cols[1], cols[2]))?;
        let tolerance: f64 = cols[6].parse().unwrap_or(DEFAULT_TOLERANCE);

        let series_text = fs::read_to_string(dir.join(claim_file_name(&claim)))?;
        let mut samples = Vec::new();
        for row in series_text.lines().skip(1) {
            let vals: Vec<&str> = row.split(',').collect();
            if vals.len() >= 2 {
                let t: f64 = vals[0].parse().map_err(|_| {
                    Error::SnapshotFormat(format!("bad claim row {row:?}"))
                })?;
                let v: f64 = vals[1].parse().map_err(|_| {
                    Error::SnapshotFormat(format!("bad claim row {row:?}"))
                })?;
                samples.push((t, v));
            }
        }
        let horizon = if config.allow_wrap {
            None
        } else {
            Some(config.no_wrap_bound())
        };
        reports.push(crate::metrology::report_from_series(
            claim,
            samples,
            &VerifyOptions {
                window: config.fit_window,
                tolerance,
                t_min: DEFAULT_T_MIN,
            },
            horizon,
        )?);
    }

    println!("{:<18} {:>4} {:>3} {:>3} {:>12} {:>12} {:>10} {:>8}",
        "claim", "p", "a", "ell", "fitted", "theoretical", "tolerance", "verdict");
    for r in &reports {
        println!(
            "{:<18} {:>4} {:>3} {:>3} {:>12.5} {:>12.5} {:>10.3} {:>8}",
            r.claim.family.short_name(),
            r.claim.p.to_string(),
            r.claim.alpha,
            r.claim.family.ell(),
            r.fitted_slope,
            r.theoretical_slope,
            r.tolerance,
            r.verdict_str()
        );
    }
    write_summary_csv(dir.join("summary.csv"), &reports)?;
    Ok(reports.iter().all(|r| r.pass))
}

// ---------------------------------------------------------------------------
// Kernel selftest
// ---------------------------------------------------------------------------

/// Oracle suite for the multiplier module: root identities, the kernel
/// against the matrix-exponential and Runge-Kutta oracles (including draws
/// hugging the degenerate-root locus), the per-mode semigroup property and
/// the cutoff partition. Prints one verdict line per check.
pub fn kernels_selftest() -> bool {
    let mut all = true;
    let mut check = |name: &str, worst: f64, tol: f64| {
        let ok = worst <= tol && worst.is_finite();
        println!(
            "{} {name} (worst {worst:.3e}, tolerance {tol:.1e})",
            if ok { "PASS" } else { "FAIL" }
        );
        all &= ok;
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0xE1A57);

    // Characteristic-root identities.
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let nu = rng.gen_range(0.3..3.0);
        let beta = rng.gen_range(0.3..3.0);
        let r = rng.gen_range(0.0..50.0);
        let roots = characteristic_roots(nu, beta, r);
        let a = nu * r * r;
        let b = beta * beta * r * r;
        let sum = roots.sigma_plus + roots.sigma_minus;
        let prod = roots.sigma_plus * roots.sigma_minus;
        worst = worst
            .max((sum.re + a).abs() / (1.0 + a))
            .max(sum.im.abs() / (1.0 + a))
            .max((prod.re - b).abs() / (1.0 + b))
            .max(prod.im.abs() / (1.0 + b));
    }
    check("characteristic-root identities (10000 draws)", worst, 1e-13);

    // Kernel vs matrix-exponential oracle, bulk + degenerate-locus draws.
    let mut worst: f64 = 0.0;
    let mut draws: Vec<(f64, f64, f64, f64)> = (0..10_000)
        .map(|_| {
            (
                rng.gen_range(0.3..3.0),
                rng.gen_range(0.3..3.0),
                rng.gen_range(0.0..50.0),
                rng.gen_range(0.0..100.0),
            )
        })
        .collect();
    for _ in 0..100 {
        let nu = rng.gen_range(0.3..3.0);
        let beta = rng.gen_range(0.3..3.0);
        let r = 2.0 * beta / nu + rng.gen_range(-1e-6..1e-6);
        draws.push((nu, beta, r.max(0.0), rng.gen_range(0.0..100.0)));
    }
    for &(nu, beta, r, t) in &draws {
        let k = kernel_multipliers(nu, beta, r, t);
        let e = fundamental_matrix(nu * r * r, beta * beta * r * r, t);
        worst = worst
            .max(relative_error(k.k0, e[0][0], 1e-12))
            .max(relative_error(k.k1, e[0][1], 1e-12))
            .max(relative_error(k.dt_k0, e[1][0], 1e-12))
            .max(relative_error(k.dt_k1, e[1][1], 1e-12));
    }
    check(
        "kernel vs matrix-exponential oracle (10000 draws + 100 degenerate)",
        worst,
        1e-8,
    );

    // Matrix exponential vs adaptive Runge-Kutta on a non-stiff subset.
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &(nu, beta, r, t) in &draws {
        let a = nu * r * r;
        let b = beta * beta * r * r;
        if a * t > 2000.0 || b.sqrt() * t > 2000.0 || count >= 200 {
            continue;
        }
        count += 1;
        let e = fundamental_matrix(a, b, t);
        // The explicit integrator's absolute accuracy bottoms out near its
        // atol; compare with a floor above that noise level.
        if let Ok((w, wd)) = rk45_mode_ode(a, b, t, 1.0, 0.0, 1e-12, 5_000_000) {
            worst = worst
                .max(relative_error(w, e[0][0], 1e-6))
                .max(relative_error(wd, e[1][0], 1e-6));
        }
        if let Ok((w, wd)) = rk45_mode_ode(a, b, t, 0.0, 1.0, 1e-12, 5_000_000) {
            worst = worst
                .max(relative_error(w, e[0][1], 1e-6))
                .max(relative_error(wd, e[1][1], 1e-6));
        }
    }
    check("matrix exponential vs adaptive Runge-Kutta (200 spot draws)", worst, 1e-8);

    // Per-mode semigroup property E(t+s) = E(t)E(s).
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let nu = rng.gen_range(0.3..3.0);
        let beta = rng.gen_range(0.3..3.0);
        let r = rng.gen_range(0.0..10.0);
        let t = rng.gen_range(0.0..20.0);
        let s = rng.gen_range(0.0..20.0);
        worst = worst.max(semigroup_deviation(nu, beta, r, t, s));
    }
    check("per-mode semigroup property (1000 draws)", worst, 1e-10);

    // Cutoff partition of unity.
    let cuts = BandCutoffs::new(0.7, 3.1).expect("valid cutoffs");
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let r = rng.gen_range(0.0..10.0);
        let l = cuts.evaluate(Band::Low, r);
        let m = cuts.evaluate(Band::Middle, r);
        let h = cuts.evaluate(Band::High, r);
        worst = worst.max((l + m + h - 1.0).abs());
        for v in [l, m, h] {
            worst = worst.max((-v).max(v - 1.0).max(0.0));
        }
    }
    check("cutoff partition of unity (10000 radii)", worst, 1e-14);

    all
}

/// Entrywise deviation of `E(t+s)` from `E(t)E(s)`, relative to the matrix
/// scale.
pub fn semigroup_deviation(nu: f64, beta: f64, r: f64, t: f64, s: f64) -> f64 {
    let m = |t: f64| -> [[f64; 2]; 2] {
        let k = kernel_multipliers(nu, beta, r, t);
        [[k.k0, k.k1], [k.dt_k0, k.dt_k1]]
    };
    let a = m(t);
    let b = m(s);
    let direct = m(t + s);
    let mut prod = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            prod[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    let scale = direct
        .iter()
        .flatten()
        .fold(1.0f64, |acc, v| acc.max(v.abs()));
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((direct[i][j] - prod[i][j]).abs() / scale);
        }
    }
    worst
}

/// Fit an exponential decay constant for band-restricted evolutions:
/// least-squares slope of `log value` against `t` (not `log t`).
pub fn fit_exponential(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 4 {
        return Err(Error::TooFewSamples { needed: 4, found: samples.len() });
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut ys = Vec::with_capacity(samples.len());
    for &(_, v) in samples {
        if v <= 0.0 {
            return Err(Error::NonPositiveSample(v));
        }
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (my + slope * (x - mx));
            e * e
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok((slope, r2))
}
