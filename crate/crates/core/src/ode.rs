//! Explicit Runge-Kutta drivers: classic RK4 with a fixed step and the
//! Dormand-Prince 5(4) pair with adaptive step control.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest step the adaptive driver accepts before giving up.
pub const DT_MIN: f64 = 1e-12;
/// Upper bound on steps per run.
pub const MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Integrator {
    Rk4 {
        dt: f64,
    },
    Dopri45 {
        rtol: f64,
        atol: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_step: Option<f64>,
    },
}

impl Integrator {
    pub fn rk4(dt: f64) -> Self {
        Integrator::Rk4 { dt }
    }

    pub fn dopri45(rtol: f64, atol: f64) -> Self {
        Integrator::Dopri45 {
            rtol,
            atol,
            max_step: None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Integrator::Rk4 { .. } => "rk4",
            Integrator::Dopri45 { .. } => "dopri45",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Integrator::Rk4 { dt } => dt > 0.0 && dt.is_finite(),
            Integrator::Dopri45 {
                rtol,
                atol,
                max_step,
            } => rtol > 0.0 && atol > 0.0 && max_step.is_none_or(|h| h > 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "integrator settings must be positive: {self:?}"
            )))
        }
    }
}

/// Step counts of a finished run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..y.len() {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] = y[i] + h * s;
    }
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t1`, calling `on_step` with the
/// initial state and after every accepted step.
pub fn solve<F, S>(
    integrator: &Integrator,
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    mut on_step: S,
) -> Result<StepStats>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    S: FnMut(f64, &[f64]) -> Result<()>,
{
    integrator.validate()?;
    if !(t1 > t0) {
        return Err(Error::InvalidArgument(format!(
            "t1 must exceed t0 (t0 = {t0}, t1 = {t1})"
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: t0 });
    }
    on_step(t0, y0)?;
    match *integrator {
        Integrator::Rk4 { dt } => rk4(&mut rhs, t0, t1, y0, dt, &mut on_step),
        Integrator::Dopri45 {
            rtol,
            atol,
            max_step,
        } => dopri45(
            &mut rhs,
            t0,
            t1,
            y0,
            rtol,
            atol,
            max_step.unwrap_or(f64::INFINITY),
            &mut on_step,
        ),
    }
}

fn rk4<F, S>(rhs: &mut F, t0: f64, t1: f64, y0: &[f64], dt: f64, on_step: &mut S) -> Result<StepStats>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    S: FnMut(f64, &[f64]) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let ratio = (t1 - t0) / dt;
    let steps = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round().max(1.0) as usize
    } else {
        ratio.ceil() as usize
    };
    if steps > MAX_STEPS {
        return Err(Error::StepLimit { t: t0, steps: MAX_STEPS });
    }
    let mut t = t0;
    for step in 1..=steps {
        // fixed grid t0 + k·dt; the last step lands exactly on t1
        let t_next = if step == steps { t1 } else { t0 + step as f64 * dt };
        let h = t_next - t;
        rhs(t, &y, &mut k1)?;
        axpy(&mut tmp, &y, 0.5 * h, &[(1.0, &k1)]);
        rhs(t + 0.5 * h, &tmp, &mut k2)?;
        axpy(&mut tmp, &y, 0.5 * h, &[(1.0, &k2)]);
        rhs(t + 0.5 * h, &tmp, &mut k3)?;
        axpy(&mut tmp, &y, h, &[(1.0, &k3)]);
        rhs(t_next, &tmp, &mut k4)?;
        axpy(
            &mut tmp,
            &y,
            h / 6.0,
            &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
        );
        if tmp.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: t_next });
        }
        y.copy_from_slice(&tmp);
        t = t_next;
        on_step(t, &y)?;
    }
    Ok(StepStats {
        accepted: steps,
        rejected: 0,
    })
}

// Dormand-Prince 5(4) tableau.
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
// error coefficients: 5th-order weights minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[allow(clippy::too_many_arguments)]
fn dopri45<F, S>(
    rhs: &mut F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    rtol: f64,
    atol: f64,
    max_step: f64,
    on_step: &mut S,
) -> Result<StepStats>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    S: FnMut(f64, &[f64]) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut stats = StepStats::default();
    let span = t1 - t0;
    let max_step = max_step.min(span);

    rhs(t0, &y, &mut k[0])?;
    let mut h = initial_step(&y, &k[0], rtol, atol).min(max_step);
    let mut t = t0;
    let mut last_nonfinite = false;

    while t < t1 {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(Error::StepLimit { t, steps: MAX_STEPS });
        }
        if h < DT_MIN {
            return Err(if last_nonfinite {
                Error::NonFiniteState { t }
            } else {
                Error::StepSizeUnderflow { t, dt: h }
            });
        }
        let last = t + h >= t1 || (t1 - (t + h)) < DT_MIN;
        if last {
            h = t1 - t;
        }

        let (head, tail) = k.split_at_mut(1);
        let k1 = &head[0];
        let [k2, k3, k4, k5, k6, k7] = <&mut [Vec<f64>; 6]>::try_from(tail).unwrap();
        axpy(&mut tmp, &y, h, &[(A21, k1)]);
        rhs(t + C2 * h, &tmp, k2)?;
        axpy(&mut tmp, &y, h, &[(A31, k1), (A32, k2)]);
        rhs(t + C3 * h, &tmp, k3)?;
        axpy(&mut tmp, &y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
        rhs(t + C4 * h, &tmp, k4)?;
        axpy(&mut tmp, &y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
        rhs(t + C5 * h, &tmp, k5)?;
        axpy(
            &mut tmp,
            &y,
            h,
            &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
        );
        rhs(t + h, &tmp, k6)?;
        axpy(
            &mut y_new,
            &y,
            h,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
        );
        let t_new = if last { t1 } else { t + h };
        let finite = y_new.iter().all(|v| v.is_finite());
        let err = if finite {
            rhs(t_new, &y_new, k7)?;
            let mut acc = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
                acc += (e / sc) * (e / sc);
            }
            (acc / n as f64).sqrt()
        } else {
            f64::INFINITY
        };

        if err <= 1.0 && k7.iter().all(|v| v.is_finite()) {
            last_nonfinite = false;
            t = t_new;
            y.copy_from_slice(&y_new);
            k.swap(0, 6);
            stats.accepted += 1;
            on_step(t, &y)?;
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(max_step);
        } else {
            last_nonfinite = !err.is_finite();
            stats.rejected += 1;
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h *= fac;
        }
    }
    Ok(stats)
}

/// Starting step from the size of the state and its derivative.
fn initial_step(y: &[f64], f: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = y.len() as f64;
    let (mut d0, mut d1) = (0.0, 0.0);
    for i in 0..y.len() {
        let sc = atol + rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.max(1e-6)
}
