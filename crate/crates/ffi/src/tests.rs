//! Exercise the C entry points from Rust, including error paths and
//! round trips through the interleaved buffer layout.

use super::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error_string() -> String {
    unsafe { CStr::from_ptr(vw_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn version_is_non_empty() {
    let v = unsafe { CStr::from_ptr(vw_version()) };
    assert!(!v.to_bytes().is_empty());
}

#[test]
fn lattice_lifecycle_and_validation() {
    let lat = vw_lattice_new(16, 4.0);
    assert!(!lat.is_null());
    assert_eq!(unsafe { vw_lattice_len(lat) }, 4096);
    unsafe { vw_lattice_free(lat) };

    let bad = vw_lattice_new(7, 4.0);
    assert!(bad.is_null());
    assert!(last_error_string().contains("even"));
}

#[test]
fn field_round_trip_through_interleaved_buffers() {
    let lat = vw_lattice_new(8, 2.0);
    let len = unsafe { vw_lattice_len(lat) } as usize;
    let mut data = vec![0.0f64; 3 * len * 2];
    for (i, v) in data.iter_mut().enumerate() {
        *v = (i % 17) as f64 * 0.25 - 1.0;
    }
    let field = unsafe { vw_field_from_interleaved(lat, 0, data.as_ptr()) };
    assert!(!field.is_null());
    assert_eq!(unsafe { vw_field_representation(field) }, 0);

    let mut out = vec![0.0f64; 3 * len * 2];
    assert_eq!(
        unsafe { vw_field_copy_interleaved(field, out.as_mut_ptr()) },
        VwStatus::Ok
    );
    assert_eq!(data, out);

    assert_eq!(unsafe { vw_field_to_spectral(field) }, VwStatus::Ok);
    assert_eq!(unsafe { vw_field_representation(field) }, 1);
    // Double transform errors out.
    assert_eq!(unsafe { vw_field_to_spectral(field) }, VwStatus::InvalidArgument);
    assert_eq!(unsafe { vw_field_to_physical(field) }, VwStatus::Ok);

    let mut back = vec![0.0f64; 3 * len * 2];
    assert_eq!(
        unsafe { vw_field_copy_interleaved(field, back.as_mut_ptr()) },
        VwStatus::Ok
    );
    for (a, b) in data.iter().zip(&back) {
        assert!((a - b).abs() < 1e-12);
    }
    unsafe {
        vw_field_free(field);
        vw_lattice_free(lat);
    }
}

#[test]
fn kernel_values_match_the_core_library() {
    let mut out = [0.0f64; 4];
    assert_eq!(
        unsafe { vw_kernel_multipliers(1.0, 1.0, 0.5, 2.0, out.as_mut_ptr()) },
        VwStatus::Ok
    );
    let k = kernel_multipliers(1.0, 1.0, 0.5, 2.0);
    assert_eq!(out, [k.k0, k.k1, k.dt_k0, k.dt_k1]);

    assert_eq!(
        unsafe { vw_kernel_multipliers(-1.0, 1.0, 0.5, 2.0, out.as_mut_ptr()) },
        VwStatus::InvalidArgument
    );

    let mut g = [0.0f64; 2];
    assert_eq!(
        unsafe { vw_diffusion_multipliers(1.0, 1.0, 0.0, 5.0, g.as_mut_ptr()) },
        VwStatus::Ok
    );
    assert_eq!(g, [1.0, 5.0]);
}

#[test]
fn linear_evolve_matches_the_core_flow() {
    let lat = vw_lattice_new(16, 6.0);
    let len = unsafe { vw_lattice_len(lat) } as usize;
    // Gaussian velocity data in component 0.
    let core_lat = FrequencyLattice::new(16, 6.0).unwrap();
    let f1_core = VectorField::from_physical_fn(&core_lat, |x| {
        [(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(), 0.0, 0.0]
    });
    let mut buf = vec![0.0f64; 3 * len * 2];
    for k in 0..3 {
        for (i, v) in f1_core.component(k).iter().enumerate() {
            buf[2 * (k * len + i)] = v.re;
        }
    }
    let f1 = unsafe { vw_field_from_interleaved(lat, 0, buf.as_ptr()) };
    let f0 = unsafe { vw_field_zeros(lat, 0) };

    let mut u: *mut VwField = std::ptr::null_mut();
    let mut ut: *mut VwField = std::ptr::null_mut();
    assert_eq!(
        unsafe { vw_linear_evolve(0.0, 1.0, 1.0, f0, f1, 1.5, &mut u, &mut ut) },
        VwStatus::Ok
    );

    let material = MaterialParams::new(0.0, 1.0, 1.0).unwrap();
    let flow = LinearFlow::new(material, &core_lat);
    let zero = VectorField::zeros(&core_lat, Representation::Physical);
    let (u_core, _) = flow.evolve(&zero, &f1_core, 1.5).unwrap();

    let mut got = vec![0.0f64; 3 * len * 2];
    assert_eq!(unsafe { vw_field_copy_interleaved(u, got.as_mut_ptr()) }, VwStatus::Ok);
    for k in 0..3 {
        for (i, v) in u_core.component(k).iter().enumerate() {
            assert!((got[2 * (k * len + i)] - v.re).abs() < 1e-12);
        }
    }

    let mut norm = 0.0;
    assert_eq!(unsafe { vw_field_lp_norm(u, f64::INFINITY, &mut norm) }, VwStatus::Ok);
    assert!(norm > 0.0);
    assert_eq!(
        unsafe { vw_field_lp_norm(u, 0.5, &mut norm) },
        VwStatus::InvalidArgument
    );

    unsafe {
        vw_field_free(u);
        vw_field_free(ut);
        vw_field_free(f0);
        vw_field_free(f1);
        vw_lattice_free(lat);
    }
}

#[test]
fn snapshot_save_and_load_via_ffi() {
    let dir = tempfile::tempdir().unwrap();
    let path = c(dir.path().join("f.ewsp").to_str().unwrap());
    let lat = vw_lattice_new(8, 2.0);
    let f = unsafe { vw_field_zeros(lat, 1) };
    assert_eq!(
        unsafe { vw_field_save(f, 0.0, 1.0, 1.0, 3.25, path.as_ptr()) },
        VwStatus::Ok
    );
    let mut loaded: *mut VwField = std::ptr::null_mut();
    let mut time = 0.0;
    assert_eq!(
        unsafe { vw_field_load(path.as_ptr(), &mut loaded, &mut time) },
        VwStatus::Ok
    );
    assert_eq!(time, 3.25);
    assert_eq!(unsafe { vw_field_representation(loaded) }, 1);
    unsafe {
        vw_field_free(loaded);
        vw_field_free(f);
        vw_lattice_free(lat);
    }
}

#[test]
fn run_experiment_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.conf");
    std::fs::write(
        &cfg_path,
        "lattice.n = 16\nlattice.box_length = 24\nnonlinearity.kind = none\n\
         data.f1.width = 1.5\ntime.schedule = 1, 2\nsnapshots.store = false\n",
    )
    .unwrap();
    let cfg = c(cfg_path.to_str().unwrap());
    let out = c(dir.path().join("out").to_str().unwrap());
    assert_eq!(
        unsafe { vw_run_experiment(cfg.as_ptr(), out.as_ptr()) },
        VwStatus::Ok
    );
    assert!(dir.path().join("out/manifest.txt").exists());

    let missing = c("definitely_not_a_preset");
    assert_eq!(
        unsafe { vw_run_experiment(missing.as_ptr(), std::ptr::null()) },
        VwStatus::InvalidArgument
    );
}
