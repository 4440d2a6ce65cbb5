//! Post-processing checks on computed trajectories.
//!
//! Every check is a deterministic function of its inputs and returns a
//! [`CheckResult`]. Trajectory-based checks need at least
//! [`MIN_SAMPLES`] interior samples, otherwise they are `inconclusive`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynSystem, EnergyRecord, SystemKind, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{FlowGeometry, JacobiStructure};
use crate::ode::Integrator;

pub const MIN_SAMPLES: usize = 10;
pub const EQUATION_TOL: f64 = 1e-5;
pub const GEOMETRIC_TOL: f64 = 1e-4;
pub const CONSERVATION_TOL: f64 = 1e-7;
pub const GRAD_F_TOL: f64 = 1e-8;
/// Smallest `|⟨v,v⟩_ḡ|` for which reparametrization is meaningful.
pub const VELOCITY_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub status: Status,
    pub samples_used: usize,
    pub notes: Vec<String>,
}

impl CheckResult {
    /// Build from per-sample residuals; fewer than `min_samples` residuals
    /// give an inconclusive result.
    pub fn from_residuals(
        name: &str,
        residuals: &[f64],
        tolerance: f64,
        min_samples: usize,
        notes: Vec<String>,
    ) -> Self {
        let n = residuals.len();
        let max = residuals.iter().copied().fold(0.0_f64, |a, b| {
            if b.is_nan() || a.is_nan() {
                f64::NAN
            } else {
                a.max(b)
            }
        });
        let mean = if n == 0 {
            0.0
        } else {
            residuals.iter().sum::<f64>() / n as f64
        };
        let status = if n < min_samples {
            Status::Inconclusive
        } else if max <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        let mut notes = notes;
        if status == Status::Inconclusive {
            notes.push(format!("only {n} samples usable, need {min_samples}"));
        }
        CheckResult {
            name: name.to_string(),
            max_residual: max,
            mean_residual: mean,
            tolerance,
            pass: status == Status::Pass,
            status,
            samples_used: n,
            notes,
        }
    }
}

/// Ordered collection of check results.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub checks: Vec<CheckResult>,
}

impl DiagnosticsReport {
    pub fn push(&mut self, c: CheckResult) {
        self.checks.push(c);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// First-derivative weights at `z` for the nodes `xs` (Fornberg's recursion).
pub fn derivative_weights(z: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![[0.0_f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

/// Time derivative of sampled vectors at interior samples `2..len-2`, from
/// the degree-4 polynomial through the five surrounding samples.
pub fn interior_derivatives(ts: &[f64], ys: &[&[f64]]) -> Vec<(usize, Vec<f64>)> {
    let n = ts.len();
    if n < 5 {
        return Vec::new();
    }
    (2..n - 2)
        .map(|k| {
            let w = derivative_weights(ts[k], &ts[k - 2..=k + 2]);
            let dim = ys[k].len();
            let d = (0..dim)
                .map(|i| (0..5).map(|m| w[m] * ys[k - 2 + m][i]).sum())
                .collect();
            (k, d)
        })
        .collect()
}

fn velocity_derivatives(traj: &Trajectory) -> Vec<(usize, Vec<f64>)> {
    let ts = traj.times();
    let vs: Vec<&[f64]> = traj.samples.iter().map(|s| s.v.as_slice()).collect();
    interior_derivatives(&ts, &vs)
}

fn norm_in(g: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    w.dot(&(g * w)).abs().sqrt()
}

fn kind_note(traj: &Trajectory, expected: &[SystemKind]) -> Option<String> {
    (!expected.contains(&traj.kind)).then(|| {
        format!(
            "trajectory comes from system {}, the check assumes {}",
            traj.kind,
            expected.iter().map(|k| k.name()).collect::<Vec<_>>().join(" or ")
        )
    })
}

/// Normalized `ḡ`-component of `ā = v̇ + Γ̄(v,v) − deflection` orthogonal
/// to `v`, at every interior sample where `ḡ` is defined.
fn pregeodesic_residuals(
    traj: &Trajectory,
    js: &JacobiStructure,
    subtract_helicity: bool,
) -> Result<(Vec<f64>, usize)> {
    let mut out = Vec::new();
    let mut excluded = 0;
    for (k, vdot) in velocity_derivatives(traj) {
        let s = &traj.samples[k];
        if js.factor(&s.x).is_err() {
            excluded += 1;
            continue;
        }
        let (p, jet, gamma_bar) = js.point(&s.x)?;
        let v = DVector::from_column_slice(&s.v);
        let vv = v.dot(&(&jet.g * &v));
        if vv.abs() < VELOCITY_CUTOFF {
            return Err(Error::VanishingVelocity { t: s.t });
        }
        let mut a = DVector::from_vec(vdot) + gamma_bar.contract(&s.v, &s.v);
        if subtract_helicity {
            a -= &p.helicity * &v;
        }
        let along = a.dot(&(&jet.g * &v)) / vv;
        let perp = &a - &v * along;
        out.push(norm_in(&jet.g, &perp) / norm_in(&jet.g, &a).max(1.0));
    }
    Ok((out, excluded))
}

fn exclusion_note(excluded: usize) -> Option<String> {
    (excluded > 0).then(|| format!("{excluded} samples skipped where H0 + f is degenerate"))
}

/// Whether the curve is a pregeodesic of `ḡ = (H₀ + f) g`: its
/// `ḡ`-acceleration must be parallel to its velocity.
pub fn check_pregeodesic(traj: &Trajectory, js: &JacobiStructure) -> Result<CheckResult> {
    let (res, excluded) = pregeodesic_residuals(traj, js, false)?;
    let notes = [
        kind_note(traj, &[SystemKind::Potential]),
        exclusion_note(excluded),
        Some(format!("H0 = {}", js.h0())),
    ];
    Ok(CheckResult::from_residuals(
        "pregeodesic",
        &res,
        GEOMETRIC_TOL,
        MIN_SAMPLES,
        notes.into_iter().flatten().collect(),
    ))
}

/// Two results: the equation residual of `∇_t v = grad f + F(v)` along the
/// samples, and the `ḡ`-pregeodesic residual after removing the helicity
/// deflection `F(v)`.
pub fn check_horizontal(traj: &Trajectory, js: &JacobiStructure) -> Result<[CheckResult; 2]> {
    let base = js.base();
    let mut eq_res = Vec::new();
    for (k, vdot) in velocity_derivatives(traj) {
        let s = &traj.samples[k];
        let p = base.point(&s.x)?;
        let v = DVector::from_column_slice(&s.v);
        let r = DVector::from_vec(vdot) + p.gamma.contract(&s.v, &s.v)
            - p.grad_f()
            - &p.helicity * &v;
        eq_res.push(r.amax());
    }
    let kind = kind_note(traj, &[SystemKind::Gd, SystemKind::Sys3]);
    let equation = CheckResult::from_residuals(
        "horizontal_equation",
        &eq_res,
        EQUATION_TOL,
        MIN_SAMPLES,
        kind.iter().cloned().collect(),
    );
    let (geo_res, excluded) = pregeodesic_residuals(traj, js, true)?;
    let notes = [
        kind,
        exclusion_note(excluded),
        Some(format!("H0 = {}", js.h0())),
        Some(
            "operational reading: helicity force F(v) treated as the nonlinear-connection deflection"
                .to_string(),
        ),
    ];
    let geometric = CheckResult::from_residuals(
        "horizontal_pregeodesic",
        &geo_res,
        GEOMETRIC_TOL,
        MIN_SAMPLES,
        notes.into_iter().flatten().collect(),
    );
    Ok([equation, geometric])
}

/// Hamiltonian drift `max |H(t) − H(t₀)| / max(1, |H(t₀)|)`.
pub fn check_conservation(traj: &Trajectory, record: &EnergyRecord) -> CheckResult {
    let h = &record.hamiltonian;
    let mut notes = Vec::new();
    if !traj.kind.is_conservative() && traj.kind != SystemKind::Kinematic {
        notes.push(format!(
            "system {} is not claimed to be conservative",
            traj.kind
        ));
    }
    let Some(&h0) = h.first() else {
        return CheckResult::from_residuals("conservation", &[], CONSERVATION_TOL, MIN_SAMPLES, notes);
    };
    let scale = h0.abs().max(1.0);
    let res: Vec<f64> = h.iter().map(|v| (v - h0).abs() / scale).collect();
    notes.push(format!("H(t0) = {h0}"));
    CheckResult::from_residuals("conservation", &res, CONSERVATION_TOL, MIN_SAMPLES, notes)
}

/// Residual of `d/dt ∂L/∂v − ∂L/∂x`, per sample normalized by
/// `max(1, |∂L/∂x|∞)`, with the time derivative taken from the samples.
pub fn check_euler_lagrange(traj: &Trajectory, geo: &FlowGeometry) -> Result<CheckResult> {
    let gd = match traj.kind {
        SystemKind::Gd | SystemKind::Sys3 => true,
        SystemKind::Potential => false,
        k => {
            return Err(Error::UnsupportedSystem {
                kind: k.name(),
                op: "euler_lagrange",
            })
        }
    };
    let n = traj.dim;
    let mut momenta = Vec::with_capacity(traj.len());
    let mut forces = Vec::with_capacity(traj.len());
    for s in &traj.samples {
        let p = geo.point(&s.x)?;
        let v = DVector::from_column_slice(&s.v);
        let w = if gd { &v - &p.field } else { v };
        momenta.push((&p.g * &w).as_slice().to_vec());
        let force: Vec<f64> = (0..n)
            .map(|k| {
                let metric_term = 0.5 * w.dot(&(&p.dg[k] * &w));
                if gd {
                    metric_term - w.dot(&(&p.g * p.jacobian.column(k)))
                } else {
                    metric_term + p.df[k]
                }
            })
            .collect();
        forces.push(force);
    }
    let ts = traj.times();
    let refs: Vec<&[f64]> = momenta.iter().map(Vec::as_slice).collect();
    let res: Vec<f64> = interior_derivatives(&ts, &refs)
        .into_iter()
        .map(|(k, dp)| {
            let f = &forces[k];
            let scale = f.iter().fold(1.0_f64, |a, b| a.max(b.abs()));
            dp.iter()
                .zip(f)
                .fold(0.0_f64, |a, (d, b)| a.max((d - b).abs()))
                / scale
        })
        .collect();
    Ok(CheckResult::from_residuals(
        "euler_lagrange",
        &res,
        EQUATION_TOL,
        MIN_SAMPLES,
        Vec::new(),
    ))
}

/// `|g⁻¹ df − g⁻¹ g(∇X)ᵀ X|∞` at the given points.
pub fn check_grad_f_identity(geo: &FlowGeometry, points: &[Vec<f64>]) -> Result<CheckResult> {
    let mut res = Vec::with_capacity(points.len());
    for x in points {
        let a = geo.grad_f(x)?;
        let b = geo.grad_f_via_adjoint(x)?;
        let scale = a.amax().max(1.0);
        res.push((a - b).amax() / scale);
    }
    Ok(CheckResult::from_residuals(
        "grad_f_identity",
        &res,
        GRAD_F_TOL,
        1,
        vec!["residual relative to max(1, |grad f|)".into()],
    ))
}

/// Fixed-endpoint boundary-value problem with free arrival time, solved by
/// shooting over the initial direction at prescribed initial speeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValueProblem {
    pub x0: Vec<f64>,
    pub target: Vec<f64>,
    /// Largest arrival time searched.
    pub t_max: f64,
    /// Candidate initial speeds below, at and above `|X(x0)|`, tried in order.
    pub speeds_negative: Vec<f64>,
    pub speeds_zero: Vec<f64>,
    pub speeds_positive: Vec<f64>,
    pub directions: usize,
}

impl BoundaryValueProblem {
    /// From `(1, 0)` to `(0, 1)` for the planar pendulum flow.
    pub fn pendulum_default() -> Self {
        BoundaryValueProblem {
            x0: vec![1.0, 0.0],
            target: vec![0.0, 1.0],
            t_max: 4.0,
            speeds_negative: vec![0.85, 0.8, 0.9, 0.75],
            speeds_zero: vec![1.0],
            speeds_positive: vec![1.25, 1.5, 2.0],
            directions: 72,
        }
    }
}

/// One converged shooting solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub v0: Vec<f64>,
    pub arrival_time: f64,
    pub hamiltonian: f64,
    pub miss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeRegimes {
    pub negative: Option<Shot>,
    pub zero: Option<Shot>,
    pub positive: Option<Shot>,
    /// Scan log: for each tried speed, the closest approach seen in the scan.
    pub scan: Vec<(f64, f64)>,
}

const SHOOT_TOL: f64 = 1e-9;

fn end_state(sys: &DynSystem, x0: &[f64], v0: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (traj, _) = sys.integrate(x0, v0, 0.0, t, Integrator::dopri45(1e-11, 1e-13))?;
    let s = traj.last();
    Ok((s.x.clone(), s.v.clone()))
}

fn direction(speed: f64, theta: f64) -> [f64; 2] {
    [speed * theta.cos(), speed * theta.sin()]
}

/// Find `(θ, T)` with `x(T; v0 = speed·(cos θ, sin θ)) = target`.
fn shoot(sys: &DynSystem, bvp: &BoundaryValueProblem, speed: f64) -> Result<(Option<Shot>, f64)> {
    let x0 = &bvp.x0;
    let target = DVector::from_column_slice(&bvp.target);
    let scan = Integrator::Dopri45 {
        rtol: 1e-9,
        atol: 1e-12,
        max_step: Some(0.02),
    };
    let mut starts = Vec::new();
    let mut closest = f64::INFINITY;
    for m in 0..bvp.directions {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / bvp.directions as f64;
        let v0 = direction(speed, theta);
        let Ok((traj, _)) = sys.integrate(x0, &v0, 0.0, bvp.t_max, scan) else {
            continue;
        };
        let (d, t) = traj
            .samples
            .iter()
            .skip(1)
            .map(|s| ((DVector::from_column_slice(&s.x) - &target).norm(), s.t))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
        closest = closest.min(d);
        if d < 0.25 {
            starts.push((d, theta, t));
        }
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(_, theta0, t0) in starts.iter().take(6) {
        if let Some(shot) = newton_shoot(sys, bvp, speed, theta0, t0)? {
            return Ok((Some(shot), closest));
        }
    }
    Ok((None, closest))
}

fn newton_shoot(
    sys: &DynSystem,
    bvp: &BoundaryValueProblem,
    speed: f64,
    mut theta: f64,
    mut t: f64,
) -> Result<Option<Shot>> {
    let target = DVector::from_column_slice(&bvp.target);
    let h = 1e-6;
    for _ in 0..40 {
        if !(t > 1e-3 && t <= 2.0 * bvp.t_max) {
            return Ok(None);
        }
        let Ok((x, v)) = end_state(sys, &bvp.x0, &direction(speed, theta), t) else {
            return Ok(None);
        };
        let r = DVector::from_vec(x) - &target;
        let miss = r.norm();
        if miss < SHOOT_TOL {
            let v0 = direction(speed, theta).to_vec();
            let hamiltonian = sys.hamiltonian(&bvp.x0, &v0)?;
            return Ok(Some(Shot {
                v0,
                arrival_time: t,
                hamiltonian,
                miss,
            }));
        }
        let Ok((xp, _)) = end_state(sys, &bvp.x0, &direction(speed, theta + h), t) else {
            return Ok(None);
        };
        let Ok((xm, _)) = end_state(sys, &bvp.x0, &direction(speed, theta - h), t) else {
            return Ok(None);
        };
        let d_theta = (DVector::from_vec(xp) - DVector::from_vec(xm)) / (2.0 * h);
        let jac = DMatrix::from_columns(&[d_theta, DVector::from_vec(v)]);
        let Some(step) = jac.lu().solve(&r) else {
            return Ok(None);
        };
        let scale = (1.0_f64).min(0.5 / step.amax().max(1e-300));
        theta -= scale * step[0];
        t -= scale * step[1];
    }
    Ok(None)
}

/// Search for boundary-value solutions of the geometric dynamics with
/// negative, zero and positive Hamiltonian.
pub fn find_three_energy_regimes(
    geo: &FlowGeometry,
    bvp: &BoundaryValueProblem,
) -> Result<ThreeRegimes> {
    if geo.dim() != 2 || bvp.x0.len() != 2 || bvp.target.len() != 2 {
        return Err(Error::InvalidArgument(
            "three-regime shooting is implemented for planar flows".into(),
        ));
    }
    if !geo.metric.signature().is_riemannian() {
        return Err(Error::InvalidArgument(
            "three-regime shooting needs a Riemannian metric".into(),
        ));
    }
    let sys = DynSystem::new(SystemKind::Gd, geo.clone());
    let base_speed = {
        let x = geo.field_at(&bvp.x0)?;
        let g = geo.metric_at(&bvp.x0)?;
        x.dot(&(&g * &x)).sqrt()
    };
    let mut out = ThreeRegimes {
        negative: None,
        zero: None,
        positive: None,
        scan: Vec::new(),
    };
    // speeds are given in units of |X(x0)| so that 1 is the H = 0 level
    let mut out_scan = Vec::new();
    let mut attempt = |speeds: &[f64], want: fn(f64) -> bool| -> Result<Option<Shot>> {
        for &rel in speeds {
            let (shot, closest) = shoot(&sys, bvp, rel * base_speed)?;
            out_scan.push((rel * base_speed, closest));
            if let Some(s) = shot {
                if want(s.hamiltonian) {
                    return Ok(Some(s));
                }
            }
        }
        Ok(None)
    };
    out.negative = attempt(&bvp.speeds_negative, |h| h < -1e-12)?;
    out.zero = attempt(&bvp.speeds_zero, |h| h.abs() <= 1e-12)?;
    out.positive = attempt(&bvp.speeds_positive, |h| h > 1e-12)?;
    out.scan = out_scan;
    Ok(out)
}

/// Pass when all three regimes are found, inconclusive otherwise.
pub fn check_three_energy_regimes(geo: &FlowGeometry, bvp: &BoundaryValueProblem) -> Result<CheckResult> {
    let found = find_three_energy_regimes(geo, bvp)?;
    let mut notes = Vec::new();
    let mut misses = Vec::new();
    for (label, shot) in [
        ("H<0", &found.negative),
        ("H=0", &found.zero),
        ("H>0", &found.positive),
    ] {
        match shot {
            Some(s) => {
                notes.push(format!(
                    "{label}: H = {:.6}, v0 = ({:.6}, {:.6}), T = {:.6}",
                    s.hamiltonian, s.v0[0], s.v0[1], s.arrival_time
                ));
                misses.push(s.miss);
            }
            None => notes.push(format!("{label}: not found")),
        }
    }
    for (speed, d) in &found.scan {
        notes.push(format!("scan speed {speed:.4}: closest approach {d:.3e}"));
    }
    let all = misses.len() == 3;
    let mut r = CheckResult::from_residuals(
        "three_energy_regimes",
        &misses,
        SHOOT_TOL,
        3,
        notes,
    );
    if !all {
        r.status = Status::Inconclusive;
        r.pass = false;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::VectorField;
    use crate::vfexpr::Bindings;

    #[test]
    fn uniform_weights_are_the_five_point_stencil() {
        let h = 0.1;
        let xs: Vec<f64> = (0..5).map(|i| i as f64 * h).collect();
        let w = derivative_weights(xs[2], &xs);
        let expected = [1.0, -8.0, 0.0, 8.0, -1.0].map(|c| c / (12.0 * h));
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10, "{w:?}");
        }
    }

    #[test]
    fn derivatives_exact_for_quartics_on_uneven_grids() {
        let ts = [0.0, 0.13, 0.2, 0.41, 0.5, 0.77, 0.9];
        let p = |t: f64| 1.0 - 2.0 * t + 3.0 * t.powi(3) - t.powi(4);
        let dp = |t: f64| -2.0 + 9.0 * t * t - 4.0 * t.powi(3);
        let ys: Vec<Vec<f64>> = ts.iter().map(|&t| vec![p(t)]).collect();
        let refs: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
        let d = interior_derivatives(&ts, &refs);
        assert_eq!(d.len(), 3);
        for (k, v) in d {
            assert!((v[0] - dp(ts[k])).abs() < 1e-11);
        }
    }

    #[test]
    fn too_few_samples_is_inconclusive() {
        let r = CheckResult::from_residuals("x", &[0.0; 9], 1.0, MIN_SAMPLES, vec![]);
        assert_eq!(r.status, Status::Inconclusive);
        assert!(!r.pass);
        let r = CheckResult::from_residuals("x", &[0.0; 10], 1.0, MIN_SAMPLES, vec![]);
        assert!(r.pass);
        let r = CheckResult::from_residuals("x", &[0.5, 2.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1.0, MIN_SAMPLES, vec![]);
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.max_residual, 2.0);
    }

    #[test]
    fn straight_lines_are_pregeodesics() {
        let geo = FlowGeometry::euclidean(VectorField::parse(&["1", "0"], &[]).unwrap(), Bindings::new());
        let sys = DynSystem::new(SystemKind::Potential, geo.clone());
        let (traj, _) = sys
            .integrate(&[0.0, 0.0], &[0.3, 0.4], 0.0, 2.0, Integrator::rk4(0.05))
            .unwrap();
        let h0 = sys.hamiltonian(&[0.0, 0.0], &[0.3, 0.4]).unwrap();
        let js = geo.jacobi_structure(h0).unwrap();
        let r = check_pregeodesic(&traj, &js).unwrap();
        assert!(r.pass && r.max_residual < 1e-10, "{r:?}");
    }

    #[test]
    fn kinematic_flow_is_exactly_conservative() {
        let geo = FlowGeometry::euclidean(VectorField::parse(&["-x2", "x1"], &[]).unwrap(), Bindings::new());
        let sys = DynSystem::new(SystemKind::Kinematic, geo);
        let (traj, rec) = sys
            .integrate(&[1.0, 0.0], &[], 0.0, 3.0, Integrator::rk4(0.1))
            .unwrap();
        let r = check_conservation(&traj, &rec);
        assert!(r.pass);
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn vanishing_velocity_is_an_error() {
        let geo = FlowGeometry::euclidean(VectorField::parse(&["1", "0"], &[]).unwrap(), Bindings::new());
        let sys = DynSystem::new(SystemKind::Potential, geo.clone());
        let (traj, _) = sys
            .integrate(&[0.0, 0.0], &[0.0, 0.0], 0.0, 1.0, Integrator::rk4(0.05))
            .unwrap();
        let js = geo.jacobi_structure(0.0).unwrap();
        assert!(matches!(
            check_pregeodesic(&traj, &js),
            Err(Error::VanishingVelocity { .. })
        ));
    }
}
