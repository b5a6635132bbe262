//! Independent reference solutions for the per-mode ODE
//! `ẅ + a ẇ + b w = 0` (`a = ν r²`, `b = β² r²`).
//!
//! Nothing here touches the closed-form kernel evaluation: the matrix
//! exponential is computed by Taylor series with scaling and squaring on the
//! companion matrix, and the Runge-Kutta integrator is a plain adaptive
//! Dormand-Prince 5(4). These are the oracles the kernel implementation is
//! checked against, both in the test suites and in `kernels selftest`.

use crate::error::{Error, Result};

/// Fundamental matrix `E(t) = exp(t [[0, 1], [-b, -a]])`; its columns
/// propagate the initial pairs `(1, 0)` and `(0, 1)`, so
/// `E = [[K₀, K₁], [∂ₜK₀, ∂ₜK₁]]`.
pub fn fundamental_matrix(a: f64, b: f64, t: f64) -> [[f64; 2]; 2] {
    let m = [[0.0, t], [-b * t, -a * t]];
    let norm = (m[0][0].abs() + m[0][1].abs()).max(m[1][0].abs() + m[1][1].abs());
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = (0.5f64).powi(squarings as i32);
    let b0 = [
        [m[0][0] * scale, m[0][1] * scale],
        [m[1][0] * scale, m[1][1] * scale],
    ];

    // exp(B) by Taylor; ||B|| ≤ 1/2 so ~20 terms reach machine precision.
    let mut result = [[1.0, 0.0], [0.0, 1.0]];
    let mut term = [[1.0, 0.0], [0.0, 1.0]];
    for k in 1..=24 {
        term = mat_mul(term, b0);
        let inv = 1.0 / k as f64;
        for row in &mut term {
            for v in row.iter_mut() {
                *v *= inv;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mat_mul(result, result);
    }
    result
}

fn mat_mul(x: [[f64; 2]; 2], y: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

/// Adaptive Dormand-Prince 5(4) integration of the mode ODE from `(w0, w1)`
/// to time `t_end`. Explicit, so the step count grows with the stiffness
/// `a·t`; `max_steps` bounds the work.
pub fn rk45_mode_ode(
    a: f64,
    b: f64,
    t_end: f64,
    w0: f64,
    w1: f64,
    rtol: f64,
    max_steps: usize,
) -> Result<(f64, f64)> {
    let f = |y: [f64; 2]| [y[1], -b * y[0] - a * y[1]];

    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = 35.0 / 384.0 - 5179.0 / 57600.0;
    const E3: f64 = 500.0 / 1113.0 - 7571.0 / 16695.0;
    const E4: f64 = 125.0 / 192.0 - 393.0 / 640.0;
    const E5: f64 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
    const E6: f64 = 11.0 / 84.0 - 187.0 / 2100.0;
    const E7: f64 = -1.0 / 40.0;

    let atol = rtol * 1e-3;
    let mut t = 0.0;
    let mut y = [w0, w1];
    if t_end == 0.0 {
        return Ok((y[0], y[1]));
    }
    // Stability-aware initial step for the explicit method.
    let stiff = a.max(b.sqrt()).max(1e-8);
    let mut h = (t_end / 10.0).min(1.0 / stiff).max(1e-12);
    let mut steps = 0;
    while t < t_end {
        if steps > max_steps {
            return Err(Error::InvalidParameter(format!(
                "RK45 exceeded {max_steps} steps at stiffness {a}"
            )));
        }
        steps += 1;
        if t + h > t_end {
            h = t_end - t;
        }
        let k1 = f(y);
        let k2 = f([y[0] + h * A21 * k1[0], y[1] + h * A21 * k1[1]]);
        let k3 = f([
            y[0] + h * (A31 * k1[0] + A32 * k2[0]),
            y[1] + h * (A31 * k1[1] + A32 * k2[1]),
        ]);
        let k4 = f([
            y[0] + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
            y[1] + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
        ]);
        let k5 = f([
            y[0] + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
            y[1] + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
        ]);
        let k6 = f([
            y[0] + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
            y[1] + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
        ]);
        let ynew = [
            y[0] + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0]),
            y[1] + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1]),
        ];
        let k7 = f(ynew);
        let err = [
            h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0]),
            h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1]),
        ];
        let mut en: f64 = 0.0;
        for i in 0..2 {
            let sc = atol + rtol * y[i].abs().max(ynew[i].abs());
            en = en.max((err[i] / sc).abs());
        }
        if en <= 1.0 {
            t += h;
            y = ynew;
        }
        let factor = if en > 0.0 {
            (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h * factor).min(t_end - t + 1e-300).max(1e-14);
    }
    Ok((y[0], y[1]))
}

/// Relative deviation with an absolute floor, `|x - y| / max(|x|, |y|, floor)`.
pub fn relative_error(x: f64, y: f64, floor: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(floor)
}
