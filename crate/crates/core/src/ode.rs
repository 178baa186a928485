//! Dormand–Prince 5(4) integrator with step-size control and continuous
//! (dense) output of order 4.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed step; `f64::INFINITY` for none.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, calling `observe(t, y)` at
/// every time in `samples` (ascending, inside `[t0, t_end]`).
pub fn integrate<F, O>(mut f: F, t0: f64, y0: &[f64], t_end: f64, samples: &[f64], opts: &OdeOptions, mut observe: O) -> Result<OdeStats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64]),
{
    if !(t_end > t0) {
        return Err(Error::domain("integration interval must have positive length"));
    }
    if samples.windows(2).any(|w| w[1] < w[0]) || samples.iter().any(|&s| s < t0 || s > t_end) {
        return Err(Error::domain("sample times must be ascending and inside the interval"));
    }
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut y = y0.to_vec();
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut y_stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut rcont: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    let mut y_out = vec![0.0; n];

    let mut next_sample = 0;
    while next_sample < samples.len() && samples[next_sample] <= t0 {
        observe(samples[next_sample], &y);
        next_sample += 1;
    }

    f(t0, &y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t0, &y, &k[0], opts, (t_end - t0).min(opts.h_max));
    stats.evaluations += 1;
    let mut t = t0;
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::numerical(format!("integrator exceeded {} steps at t = {t}", opts.max_steps)));
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::numerical(format!("step size underflow at t = {t}")));
        }
        h = h.min(opts.h_max);
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        for i in 0..n {
            y_stage[i] = y[i] + h * A21 * k[0][i];
        }
        f(t + C2 * h, &y_stage, &mut k[1]);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        f(t + C3 * h, &y_stage, &mut k[2]);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        f(t + C4 * h, &y_stage, &mut k[3]);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        f(t + C5 * h, &y_stage, &mut k[4]);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
        }
        f(t + h, &y_stage, &mut k[5]);
        for i in 0..n {
            y_new[i] = y[i] + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        f(t + h, &y_new, &mut k[6]);
        stats.evaluations += 6;

        let mut err_norm = 0.0;
        for i in 0..n {
            err[i] = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err_norm += (err[i] / sc).powi(2);
        }
        err_norm = (err_norm / n as f64).sqrt();
        if !err_norm.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            stats.rejected += 1;
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        // PI step-size controller.
        let fac11 = err_norm.powf(0.17);
        let mut fac = fac11 / fac_old.powf(0.04);
        fac = (fac / 0.9).clamp(0.1, 5.0);
        let h_new = h / fac;

        if err_norm <= 1.0 {
            fac_old = err_norm.max(1e-4);
            stats.accepted += 1;
            for i in 0..n {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k[6][i] - bspl;
                rcont[4][i] = h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
            }
            let t_new = if last { t_end } else { t + h };
            while next_sample < samples.len() && samples[next_sample] <= t_new {
                let ts = samples[next_sample];
                let theta = (ts - t) / h;
                let theta1 = 1.0 - theta;
                for i in 0..n {
                    y_out[i] = rcont[0][i] + theta * (rcont[1][i] + theta1 * (rcont[2][i] + theta * (rcont[3][i] + theta1 * rcont[4][i])));
                }
                if ts == t_new {
                    observe(ts, &y_new);
                } else {
                    observe(ts, &y_out);
                }
                next_sample += 1;
            }
            let (k0, rest) = k.split_at_mut(1);
            k0[0].copy_from_slice(&rest[5]);
            y.copy_from_slice(&y_new);
            t = t_new;
            h = if last_rejected { h_new.min(h) } else { h_new };
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h /= (fac11 / 0.9).min(5.0);
            last_rejected = true;
        }
    }
    Ok(stats)
}

fn initial_step<F>(f: &mut F, t0: f64, y0: &[f64], f0: &[f64], opts: &OdeOptions, h_cap: f64) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len() as f64;
    let sc: Vec<f64> = y0.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let d0 = (y0.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(h_cap);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, d)| y + h0 * d).collect();
    let mut f1 = vec![0.0; y0.len()];
    f(t0 + h0, &y1, &mut f1);
    let d2 = (f1.iter().zip(f0).zip(&sc).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>() / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(h_cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_dense_output() {
        let samples: Vec<f64> = (0..=100).map(|i| 0.2 * i as f64).collect();
        let mut max_err: f64 = 0.0;
        let opts = OdeOptions {
            rtol: 1e-11,
            atol: 1e-13,
            ..Default::default()
        };
        integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            20.0,
            &samples,
            &opts,
            |t, y| max_err = max_err.max((y[0] - t.cos()).abs()).max((y[1] + t.sin()).abs()),
        )
        .unwrap();
        assert!(max_err < 1e-9, "{max_err}");
    }

    #[test]
    fn exponential_growth_endpoint() {
        let mut end = 0.0;
        integrate(
            |_, y, dy| dy[0] = y[0],
            0.0,
            &[1.0],
            2.0,
            &[2.0],
            &OdeOptions::default(),
            |_, y| end = y[0],
        )
        .unwrap();
        assert!((end - 2f64.exp()).abs() < 1e-7);
    }

    #[test]
    fn rejects_samples_outside_interval() {
        let r = integrate(|_, _, dy| dy[0] = 0.0, 0.0, &[0.0], 1.0, &[2.0], &OdeOptions::default(), |_, _| {});
        assert!(r.is_err());
    }
}
