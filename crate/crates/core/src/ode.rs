//! Adaptive Dormand-Prince 5(4) integration with steps clamped onto the
//! requested output times.

use crate::error::{FinslerError, Result};
use crate::tensor::Vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step magnitude before the integration is abandoned.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            h_min: 1e-13,
            max_steps: 2_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol * 1e-2,
            ..Self::default()
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `ż = f(t, z)` from `(t_out[0], z0)` and returns the state at
/// every entry of `t_out`, which must be strictly monotone.
///
/// Errors from `f` are treated as leaving the domain: the step is retried
/// with half the size, and [`FinslerError::DomainExit`] is reported once
/// the step would fall below `h_min`.
pub fn integrate<F>(f: F, z0: &Vector, t_out: &[f64], opts: &OdeOptions) -> Result<Vec<Vector>>
where
    F: Fn(f64, &Vector) -> Result<Vector>,
{
    if t_out.is_empty() {
        return Ok(Vec::new());
    }
    let dir = if t_out.len() > 1 && t_out[1] < t_out[0] { -1.0 } else { 1.0 };
    if t_out.windows(2).any(|w| (w[1] - w[0]) * dir <= 0.0) {
        return Err(FinslerError::Grid("output times must be strictly monotone".into()));
    }
    let mut t = t_out[0];
    let mut z = z0.clone();
    let mut out = Vec::with_capacity(t_out.len());
    out.push(z.clone());
    let mut k0 = f(t, &z).map_err(|_| FinslerError::DomainExit { t })?;
    let span = (t_out[t_out.len() - 1] - t).abs();
    let mut h = dir * (span * 1e-3).clamp(1e-6, 1e-2).min(span.max(opts.h_min));
    let mut steps = 0usize;
    for &target in &t_out[1..] {
        while (target - t) * dir > 0.0 {
            steps += 1;
            if steps > opts.max_steps {
                return Err(FinslerError::StepFailure { t });
            }
            let remaining = target - t;
            let landing = h.abs() >= remaining.abs();
            let step = if landing { remaining } else { h };
            match try_step(&f, t, &z, &k0, step, opts) {
                Ok((z_new, k_new, err)) if err <= 1.0 => {
                    t = if landing { target } else { t + step };
                    z = z_new;
                    k0 = k_new;
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    if !landing || grow < 1.0 {
                        h = step * grow;
                    }
                }
                Ok((_, _, err)) => {
                    h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                    if h.abs() < opts.h_min {
                        return Err(FinslerError::StepFailure { t });
                    }
                }
                Err(_) => {
                    h = step * 0.5;
                    if h.abs() < opts.h_min {
                        return Err(FinslerError::DomainExit { t });
                    }
                }
            }
        }
        out.push(z.clone());
    }
    Ok(out)
}

type StepResult = (Vector, Vector, f64);

fn try_step<F>(f: &F, t: f64, z: &Vector, k0: &Vector, h: f64, opts: &OdeOptions) -> Result<StepResult>
where
    F: Fn(f64, &Vector) -> Result<Vector>,
{
    let mut k: Vec<Vector> = Vec::with_capacity(7);
    k.push(k0.clone());
    for s in 1..7 {
        let mut zs = z.clone();
        for (j, kj) in k.iter().enumerate() {
            if A[s][j] != 0.0 {
                zs += kj * (h * A[s][j]);
            }
        }
        let ks = f(t + C[s] * h, &zs)?;
        if ks.iter().any(|v| !v.is_finite()) {
            return Err(FinslerError::Domain("non-finite derivative".into()));
        }
        k.push(ks);
    }
    // the seventh stage is evaluated at the fifth-order solution
    let mut z_new = z.clone();
    for (j, kj) in k.iter().enumerate().take(6) {
        z_new += kj * (h * A[6][j]);
    }
    let mut err_sq = 0.0;
    for i in 0..z.len() {
        let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * h;
        let sc = opts.atol + opts.rtol * z[i].abs().max(z_new[i].abs());
        err_sq += (e / sc).powi(2);
    }
    let err = (err_sq / z.len() as f64).sqrt();
    let k_last = k.pop().expect("seven stages");
    Ok((z_new, k_last, err))
}
