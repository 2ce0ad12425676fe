//! Adaptive Dormand–Prince 5(4) for the linear system `y' = Q y`.

use super::RateGenerator;
use crate::error::{Error, Result};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Difference between the 5th and embedded 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

pub(super) fn integrate(
    gen: &RateGenerator,
    y0: &[f64],
    taus: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<Vec<f64>>> {
    let d = y0.len();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; d]; 7];
    let mut stage = vec![0.0; d];
    let mut y_new = vec![0.0; d];
    let mut out = Vec::with_capacity(taus.len());

    let radius = 2.0 * gen.max_outflow();
    let mut h = if radius > 0.0 { 1.0 / radius } else { 1.0 };
    let mut t = 0.0;
    gen.apply_into(&y, &mut k[0]);

    for &target in taus {
        while t < target {
            let mut step = h.min(target - t);
            let last = step >= target - t;
            if step <= 1e-14 * t.max(1.0) && !last {
                return Err(Error::NumericFailure {
                    what: "explicit integration step-size underflow",
                    residual: step,
                    at: t,
                });
            }
            if last {
                step = target - t;
            }
            for s in 1..7 {
                stage.copy_from_slice(&y);
                for (r, &a) in A[s][..s].iter().enumerate() {
                    if a != 0.0 {
                        let w = step * a;
                        stage.iter_mut().zip(&k[r]).for_each(|(x, kr)| *x += w * kr);
                    }
                }
                gen.apply_into(&stage, &mut k[s]);
                if s == 6 {
                    y_new.copy_from_slice(&stage);
                }
            }
            // y_new came from the 7th stage input, which is the 5th order solution.
            let mut err = 0.0;
            for idx in 0..d {
                let mut e = 0.0;
                for (r, w) in E.iter().enumerate() {
                    e += w * k[r][idx];
                }
                e *= step;
                let scale = atol + rtol * y[idx].abs().max(y_new[idx].abs());
                err += (e / scale) * (e / scale);
            }
            let err = (err / d as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::NumericFailure {
                    what: "explicit integration",
                    residual: err,
                    at: t,
                });
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                // FSAL: the last stage derivative is f(y_new).
                k.swap(0, 6);
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || grow < 1.0 {
                    h = step * grow;
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h <= 1e-14 * t.max(1.0) {
                    return Err(Error::NumericFailure {
                        what: "explicit integration step-size underflow",
                        residual: err,
                        at: t,
                    });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
