use std::sync::Arc;
use std::time::Instant;
use viscowave::duhamel::{NonlinearityForm, NonlinearSolver};
use viscowave::harness::config::DataSpec;
use viscowave::harness::fit_exponential;
use viscowave::lattice::FrequencyLattice;
use viscowave::metrology::*;
use viscowave::profiles::*;
use viscowave::propagator::{BandRestriction, LinearFlow};
use viscowave::symbols::*;

fn geom(t0: f64, t1: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| t0 * (t1 / t0).powf(i as f64 / (k - 1) as f64)).collect()
}

fn main() {
    let which: u32 = std::env::args().nth(1).unwrap().parse().unwrap();
    match which {
        3 => criterion3(),
        4 => criterion4(),
        7 => criterion7(),
        8 => criterion8(),
        10 => criterion10(),
        5 => criterion5(),
        55 => preset_alphas(),
        _ => panic!(),
    }
}

fn criterion3() {
    let t0 = Instant::now();
    let lat = FrequencyLattice::new(128, 128.0).unwrap();
    let m = MaterialParams::new(0.0, 1.0, 1.0).unwrap();
    let f0 = DataSpec::Zero.generate(&lat, 0).unwrap();
    let f1 = DataSpec::Gaussian { width: 2.0, amplitude: 1.0, components: [true; 3] }
        .generate(&lat, 0).unwrap();
    let solver = NonlinearSolver::new(m, &lat, NonlinearityForm::None);
    let traj = solver.run(&f0, &f1, &geom(10.0, 50.0, 10)).unwrap();
    for remove_mean in [true, false] {
        let mut series = Vec::new();
        for s in &traj.samples {
            let (u, _) = s.load().unwrap();
            let mut u = u;
            if remove_mean { zero_out_mean(&mut u); }
            series.push((s.t, lp_norm(&u, Lp::Infinity).unwrap()));
        }
        let fit = fit_rate(&series, (10.0, 50.0)).unwrap();
        println!("criterion3 mean_removed={remove_mean}: slope {:.4} (target -1.5 ± 0.15) r2={:.5}", fit.slope, fit.r_squared);
    }
    println!("  elapsed {:.1?}", t0.elapsed());
}

fn criterion4() {
    let lat = FrequencyLattice::new(32, 7.7).unwrap();
    let m = MaterialParams::new(0.0, 1.0, 1.0).unwrap();
    let cuts = BandCutoffs::for_material(&m);
    println!("c0={} c1={} ximax={}", cuts.c0(), cuts.c1(), lat.max_axis_frequency());
    let f0 = DataSpec::Broadband { amplitude: 1.0, spectral_width: 6.0, components: [true; 3] }
        .generate(&lat, 7).unwrap();
    let f1 = DataSpec::Zero.generate(&lat, 0).unwrap();
    let flow = LinearFlow::new(m, &lat).with_band(BandRestriction::One(cuts, Band::High));
    let mut series = Vec::new();
    for i in 0..=10 {
        let t = 0.2 + 0.4 * i as f64;
        let (u, _) = flow.evolve(&f0.spectral(), &f1.spectral(), t).unwrap();
        series.push((t, lp_norm(&u, Lp::Finite(2.0)).unwrap()));
    }
    let (slope, r2) = fit_exponential(&series).unwrap();
    let pred = characteristic_roots(m.nu, m.slow_speed(), cuts.c1()).sigma_plus.re
        .max(characteristic_roots(m.nu, m.fast_speed(), cuts.c1()).sigma_plus.re);
    println!("criterion4: slope {slope:.4} vs -0.9*|pred| = {:.4}, R2 = {r2:.5}", 0.9 * pred);
}

fn criterion7() {
    let t0 = Instant::now();
    let lat = FrequencyLattice::new(128, 208.0).unwrap();
    let m = MaterialParams::new(0.0, 1.0, 1.0).unwrap();
    let f0 = DataSpec::Zero.generate(&lat, 0).unwrap();
    let f1 = DataSpec::Gaussian { width: 2.5, amplitude: 1e-3, components: [true; 3] }
        .generate(&lat, 1).unwrap();
    let solver = NonlinearSolver::new(m, &lat, NonlinearityForm::grad_grad2()).with_step(0.25);
    let traj = solver.run(&f0, &f1, &[8.0, 16.0, 32.0, 64.0]).unwrap();
    let moments = compute_moments(&f0, &f1, &traj).unwrap();
    println!("m1 = {:?}, M = {:?}, tail={:.3e}", moments.m1, moments.nonlinear, moments.tail_bound);
    let gap_u = profile_gap(&traj, &moments, ProfileKind::Displacement, 1, Lp::Finite(2.0)).unwrap();
    let gap_ut = profile_gap(&traj, &moments, ProfileKind::Velocity, 0, Lp::Finite(2.0)).unwrap();
    let gap_utt = profile_gap(&traj, &moments, ProfileKind::Acceleration, 0, Lp::Finite(2.0)).unwrap();
    for (name, gaps, rate) in [("u-G a=1", gap_u, -0.75), ("ut-H a=0", gap_ut, -0.75), ("utt-Gt", gap_utt, -1.25)] {
        print!("criterion7 {name}: ratios");
        for (t, v) in &gaps {
            print!(" {:.4e}", v / t.powf(rate));
        }
        println!();
    }
    println!("  elapsed {:.1?}", t0.elapsed());
}

fn criterion8() {
    let lat = FrequencyLattice::new(128, 256.0).unwrap();
    let nu = 1.0;
    let (beta, gamma) = ((3.0f64).sqrt(), 1.0);
    let cuts = BandCutoffs::new(1.0, 4.0 * (3.0f64).sqrt()).unwrap();
    let g = viscowave::lattice::ScalarField::from_physical_fn(&lat, |x| {
        (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 4.0).exp()
    });
    let g_l1 = lp_norm_scalar(&g, Lp::Finite(1.0)).unwrap();
    print!("criterion8 ratios:");
    for &t in &[4.0, 8.0, 16.0, 32.0, 64.0] {
        let kb = diffusion_wave_field(nu, beta, 0, t, &lat, Some((0, 1)), Some((cuts, Band::Low))).unwrap();
        let kg = diffusion_wave_field(nu, gamma, 0, t, &lat, Some((0, 1)), Some((cuts, Band::Low))).unwrap();
        let diff = kb.sub(&kg).unwrap();
        let conv = convolve(&diff, &g).unwrap();
        let ratio = lp_norm_scalar(&conv, Lp::Finite(1.0)).unwrap() / (t.sqrt() * g_l1);
        print!(" {ratio:.5}");
    }
    println!();
}

fn criterion10() {
    let t0 = Instant::now();
    let lat = FrequencyLattice::new(64, 64.0).unwrap();
    let m = MaterialParams::new(0.0, 1.0, 1.0).unwrap();
    let f0 = DataSpec::Zero.generate(&lat, 0).unwrap();
    let mk = |eps: f64| DataSpec::Gaussian { width: 2.0, amplitude: eps, components: [true; 3] }
        .generate(&lat, 1).unwrap();
    let mut deltas = Vec::new();
    for eps in [1e-3, 5e-4, 2.5e-4] {
        let f1 = mk(eps);
        let nl = NonlinearSolver::new(m, &lat, NonlinearityForm::grad_grad2()).with_step(0.1)
            .run(&f0, &f1, &[10.0]).unwrap();
        let lin = NonlinearSolver::new(m, &lat, NonlinearityForm::None)
            .run(&f0, &f1, &[10.0]).unwrap();
        let (un, _) = nl.samples[0].load().unwrap();
        let (ul, _) = lin.samples[0].load().unwrap();
        let gap = lp_norm(&un.sub(&ul).unwrap(), Lp::Finite(2.0)).unwrap();
        let base = lp_norm(&ul, Lp::Finite(2.0)).unwrap();
        deltas.push(gap / base);
    }
    println!("criterion10 deltas: {deltas:?} ratios: {:.3} {:.3}", deltas[0]/deltas[1], deltas[1]/deltas[2]);
    println!("  elapsed {:.1?}", t0.elapsed());
}

fn criterion5() {
    let t0 = Instant::now();
    let lat = FrequencyLattice::new(128, 128.0).unwrap();
    let m = MaterialParams::new(0.0, 1.0, 1.0).unwrap();
    let f0 = DataSpec::Zero.generate(&lat, 0).unwrap();
    let f1 = DataSpec::Gaussian { width: 2.0, amplitude: 1e-3, components: [true; 3] }
        .generate(&lat, 1).unwrap();
    let solver = NonlinearSolver::new(m, &lat, NonlinearityForm::grad_grad2()).with_step(0.2);
    let mut sched = geom(5.0, 40.0, 10);
    sched.insert(0, 2.0);
    let traj = solver.run(&f0, &f1, &sched).unwrap();
    for (label, alpha, p, ell) in [("grad u L2", 1u32, 2.0, 0u32), ("ut L2", 0, 2.0, 1), ("grad u L1", 1, 1.0, 0)] {
        for remove in [true, false] {
            let mut series = Vec::new();
            for s in &traj.samples {
                let (u, ut) = s.load().unwrap();
                let mut f = if ell == 0 { u } else { ut };
                if remove { zero_out_mean(&mut f); }
                series.push((s.t, sobolev_seminorm(&f, alpha, Lp::Finite(p)).unwrap()));
            }
            let fit = fit_rate(&series, (5.0, 40.0)).unwrap();
            println!("criterion5 {label} mean_removed={remove}: slope {:.4} r2={:.4}", fit.slope, fit.r_squared);
        }
    }
    println!("  elapsed {:.1?}", t0.elapsed());
}

fn preset_alphas() {
    let t0 = Instant::now();
    let lat = FrequencyLattice::new(128, 128.0).unwrap();
    let m = MaterialParams::new(0.0, 1.0, 1.0).unwrap();
    let f0 = DataSpec::Zero.generate(&lat, 0).unwrap();
    let f1 = DataSpec::Gaussian { width: 2.0, amplitude: 1e-3, components: [true; 3] }
        .generate(&lat, 1).unwrap();
    let solver = NonlinearSolver::new(m, &lat, NonlinearityForm::grad_grad2()).with_step(0.2);
    let traj = solver.run(&f0, &f1, &geom(5.0, 40.0, 8)).unwrap();
    for (alpha, ell) in [(2u32, 0u32), (3, 0), (1, 1)] {
        let mut series = Vec::new();
        for s in &traj.samples {
            let (u, ut) = s.load().unwrap();
            let mut f = if ell == 0 { u } else { ut };
            zero_out_mean(&mut f);
            series.push((s.t, sobolev_seminorm(&f, alpha, Lp::Finite(2.0)).unwrap()));
        }
        let fit = fit_rate(&series, (5.0, 40.0)).unwrap();
        println!("preset ell={ell} alpha={alpha}: slope {:.4} r2={:.4}", fit.slope, fit.r_squared);
    }
    println!("  elapsed {:.1?}", t0.elapsed());
}
