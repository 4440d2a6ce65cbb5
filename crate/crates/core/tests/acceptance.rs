//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use geodyn_core::dynamics::{perturb_parallel, DynSystem, SystemKind};
use geodyn_core::flows::{self, FlowSpec};
use geodyn_core::geometry::{FlowGeometry, MetricField, Signature, VectorField};
use geodyn_core::ode::Integrator;
use geodyn_core::tbundle::{self, Form, TBPoint};
use geodyn_core::verify::{self, BoundaryValueProblem, Status};
use geodyn_core::vfexpr::Bindings;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<Vec<String>, String>;

const TIGHT: Integrator = Integrator::Dopri45 {
    rtol: 1e-10,
    atol: 1e-12,
    max_step: None,
};

const DENSE: Integrator = Integrator::Dopri45 {
    rtol: 1e-10,
    atol: 1e-12,
    max_step: Some(1e-3),
};

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn lorenz() -> FlowSpec {
    flows::lorenz(10.0, 28.0, 8.0 / 3.0).unwrap()
}

fn abc() -> FlowSpec {
    flows::abc(1.0, 1.0, 1.0)
}

fn radial() -> FlowGeometry {
    FlowGeometry::euclidean(VectorField::parse(&["x1", "x2"], &[]).unwrap(), Bindings::new())
}

fn pendulum_on_jacobi_metric() -> FlowGeometry {
    let phi = "(0.5 + (x1^2 + x2^2)/2)";
    let metric = MetricField::parse(2, &[phi, "0", "0", phi], &[], Signature::riemannian(2)).unwrap();
    FlowGeometry::new(metric, VectorField::parse(&["-x2", "x1"], &[]).unwrap(), Bindings::new()).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn box_points(r: &mut ChaCha8Rng, count: usize, lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| lo.iter().zip(hi).map(|(a, b)| r.gen_range(*a..*b)).collect())
        .collect()
}

fn criterion_1() -> Outcome {
    let spec = flows::pendulum();
    let mut lines = Vec::new();
    let cases: [(SystemKind, [f64; 2], [f64; 2]); 3] = [
        (SystemKind::Kinematic, [1.0, 0.0], [0.0, 0.0]),
        (SystemKind::Prolonged, [1.0, 0.0], [0.0, 1.0]),
        (SystemKind::Gd, [0.0, 0.0], [1.0, 0.0]),
    ];
    for (kind, x0, v0) in cases {
        let start = Instant::now();
        let sys = DynSystem::new(kind, spec.geometry.clone());
        let (traj, _) = sys.integrate(&x0, &v0, 0.0, 10.0, TIGHT).map_err(|e| e.to_string())?;
        let fam = spec.family(kind).unwrap();
        let fit = fam.fit(&traj).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        lines.push(format!(
            "{kind} ({}): residual {:.2e}, coefficients {:?}, {:.0} ms",
            fam.name,
            fit.max_residual,
            fit.coefficients.iter().map(|c| format!("{c:.6}")).collect::<Vec<_>>(),
            elapsed.as_secs_f64() * 1e3
        ));
        ensure!(fit.max_residual < 1e-6, "{kind}: fit residual {:.3e}", fit.max_residual);
        ensure!(elapsed < Duration::from_secs(1), "{kind}: took {elapsed:?}");
    }
    // parallel perturbation Y = (1, 0): circles centred at (0, 1)
    let base = DynSystem::new(SystemKind::Prolonged, spec.geometry.clone());
    let y = VectorField::parse(&["1", "0"], &[]).unwrap();
    let (sys, warning) = perturb_parallel(&base, y, &[vec![1.0, 0.0], vec![0.0, 1.0]]).map_err(|e| e.to_string())?;
    ensure!(warning.is_none(), "constant field flagged as non-parallel");
    let (traj, _) = sys.integrate(&[1.0, 0.0], &[1.0, 1.0], 0.0, 10.0, TIGHT).map_err(|e| e.to_string())?;
    let fit = spec.family(SystemKind::Prolonged).unwrap().fit(&traj).map_err(|e| e.to_string())?;
    let (h, k) = (fit.coefficients[2], fit.coefficients[3]);
    lines.push(format!(
        "prolonged X+Y, Y=(1,0): residual {:.2e}, centre ({h:.9}, {k:.9})",
        fit.max_residual
    ));
    ensure!(fit.max_residual < 1e-7, "perturbed fit residual {:.3e}", fit.max_residual);
    ensure!(h.abs() < 1e-7 && (k - 1.0).abs() < 1e-7, "perturbed centre ({h}, {k})");
    Ok(lines)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let pend = flows::pendulum();
    let lor = lorenz();
    let abc = abc();
    let lorenz_axis = [0.0, 0.0, 1.0];
    let lorenz_v = lor.geometry.field_at(&lorenz_axis).unwrap();
    let abc_x = [0.1, 0.2, 0.3];
    let abc_v = abc.geometry.field_at(&abc_x).unwrap();
    let cases: Vec<(&str, &FlowSpec, SystemKind, Vec<f64>, Vec<f64>)> = vec![
        ("pendulum", &pend, SystemKind::Gd, vec![0.0, 0.0], vec![1.0, 0.0]),
        ("pendulum", &pend, SystemKind::Gd, vec![1.0, 0.0], vec![0.0, 1.0]),
        ("pendulum", &pend, SystemKind::Potential, vec![1.0, 0.0], vec![0.0, 0.0]),
        ("pendulum", &pend, SystemKind::Potential, vec![1.0, 0.0], vec![-1.0, 0.0]),
        ("lorenz", &lor, SystemKind::Gd, lorenz_axis.to_vec(), lorenz_v.as_slice().to_vec()),
        ("lorenz", &lor, SystemKind::Potential, lorenz_axis.to_vec(), lorenz_v.as_slice().to_vec()),
        ("abc", &abc, SystemKind::Gd, abc_x.to_vec(), abc_v.as_slice().to_vec()),
        ("abc", &abc, SystemKind::Potential, abc_x.to_vec(), abc_v.as_slice().to_vec()),
        ("abc", &abc, SystemKind::Gd, abc_x.to_vec(), vec![0.5, -1.0, 0.25]),
        ("abc", &abc, SystemKind::Potential, abc_x.to_vec(), vec![0.5, -1.0, 0.25]),
    ];
    let mut lines = Vec::new();
    for (name, spec, kind, x0, v0) in cases {
        let sys = DynSystem::new(kind, spec.geometry.clone());
        let (traj, rec) = sys.integrate(&x0, &v0, 0.0, 10.0, TIGHT).map_err(|e| format!("{name} {kind}: {e}"))?;
        let c = verify::check_conservation(&traj, &rec);
        lines.push(format!(
            "{name} {kind} x0={x0:?} v0={:?}: relative drift {:.2e} over {} samples",
            v0.iter().map(|c| (c * 1e6).round() / 1e6).collect::<Vec<_>>(),
            c.max_residual,
            c.samples_used
        ));
        ensure!(c.pass, "{name} {kind}: drift {:.3e}", c.max_residual);
    }
    // informational: a generic Lorenz start stays bounded but drives the step size down
    let sys = DynSystem::new(SystemKind::Gd, lor.geometry.clone());
    let x0 = [1.0, 1.0, 1.0];
    let v0 = lor.geometry.field_at(&x0).unwrap();
    match sys.integrate(&x0, v0.as_slice(), 0.0, 1.0, TIGHT) {
        Ok((traj, rec)) => {
            let c = verify::check_conservation(&traj, &rec);
            lines.push(format!(
                "info: lorenz gd from (1,1,1), v0 = X, t in [0,1]: drift {:.2e}, {} accepted steps",
                c.max_residual, traj.stats.accepted
            ));
        }
        Err(e) => lines.push(format!("info: lorenz gd from (1,1,1), v0 = X: {e}")),
    }
    let elapsed = start.elapsed();
    lines.push(format!("total {:.2} s", elapsed.as_secs_f64()));
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(lines)
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut lines = Vec::new();
    let sets: Vec<(&str, FlowGeometry, Vec<Vec<f64>>)> = vec![
        ("pendulum", flows::pendulum().geometry, box_points(&mut r, 100, &[-5.0; 2], &[5.0; 2])),
        ("lorenz", lorenz().geometry, box_points(&mut r, 100, &[-20.0, -20.0, 0.0], &[20.0, 20.0, 45.0])),
        ("abc", abc().geometry, box_points(&mut r, 100, &[-7.0; 3], &[7.0; 3])),
        ("pendulum on Jacobi metric", pendulum_on_jacobi_metric(), box_points(&mut r, 100, &[-3.0; 2], &[3.0; 2])),
    ];
    for (name, geo, pts) in sets {
        let mut abs: f64 = 0.0;
        for x in &pts {
            let a = geo.grad_f(x).map_err(|e| e.to_string())?;
            let b = geo.grad_f_via_adjoint(x).map_err(|e| e.to_string())?;
            abs = abs.max((a - b).amax());
        }
        lines.push(format!("{name}: max |g^-1 df - A*(X)| = {abs:.2e} over {} points", pts.len()));
        ensure!(abs < 1e-8, "{name}: {abs:.3e}");
    }
    Ok(lines)
}

fn criterion_4() -> Outcome {
    let geo = radial();
    let sys = DynSystem::new(SystemKind::Potential, geo.clone());
    let (x0, v0) = ([1.0, 0.0], [0.0, 1.0]);
    let (traj, _) = sys.integrate(&x0, &v0, 0.0, 3.0, TIGHT).map_err(|e| e.to_string())?;
    let h0 = sys.hamiltonian(&x0, &v0).unwrap();
    let good = verify::check_pregeodesic(&traj, &geo.jacobi_structure(h0).unwrap()).map_err(|e| e.to_string())?;
    let bad = verify::check_pregeodesic(&traj, &geo.jacobi_structure(h0 + 1.0).unwrap()).map_err(|e| e.to_string())?;
    let lines = vec![
        format!("H0 = {h0}: residual {:.2e} ({} samples)", good.max_residual, good.samples_used),
        format!("control H0 + 1: residual {:.2e}", bad.max_residual),
    ];
    ensure!(good.status == Status::Pass && good.max_residual < 1e-4, "residual {:.3e}", good.max_residual);
    ensure!(bad.max_residual > 1e-2, "control residual {:.3e}", bad.max_residual);
    Ok(lines)
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    let pend = flows::pendulum().geometry;
    let sys = DynSystem::new(SystemKind::Gd, pend.clone());
    let (traj, rec) = sys.integrate(&[0.0, 0.0], &[1.0, 0.0], 0.0, 10.0, TIGHT).map_err(|e| e.to_string())?;
    let [eq, geom] = verify::check_horizontal(&traj, &pend.jacobi_structure(rec.hamiltonian[0]).unwrap())
        .map_err(|e| e.to_string())?;
    lines.push(format!(
        "pendulum spiral: (a) {:.2e}, (b) {:.2e}",
        eq.max_residual, geom.max_residual
    ));
    ensure!(eq.max_residual < 1e-5 && eq.status == Status::Pass, "pendulum (a) {:.3e}", eq.max_residual);

    let lor = lorenz().geometry;
    let x0 = [-8.0, -8.0, 27.0];
    let v0 = lor.field_at(&x0).unwrap();
    let sys = DynSystem::new(SystemKind::Gd, lor.clone());
    let (traj, rec) = sys.integrate(&x0, v0.as_slice(), 0.0, 2.0, DENSE).map_err(|e| e.to_string())?;
    let [eq, geom] = verify::check_horizontal(&traj, &lor.jacobi_structure(rec.hamiltonian[0]).unwrap())
        .map_err(|e| e.to_string())?;
    lines.push(format!(
        "lorenz gd t in [0,2]: (a) {:.2e}, (b) {:.2e} ({} samples)",
        eq.max_residual, geom.max_residual, eq.samples_used
    ));
    ensure!(eq.max_residual < 1e-5 && eq.status == Status::Pass, "lorenz (a) {:.3e}", eq.max_residual);

    let geo = radial();
    let sys = DynSystem::new(SystemKind::Gd, geo.clone());
    let (traj, rec) = sys.integrate(&[1.0, 0.0], &[0.0, 1.0], 0.0, 3.0, TIGHT).map_err(|e| e.to_string())?;
    let js = geo.jacobi_structure(rec.hamiltonian[0]).unwrap();
    let [_, geom] = verify::check_horizontal(&traj, &js).map_err(|e| e.to_string())?;
    let pre = verify::check_pregeodesic(&traj, &js).map_err(|e| e.to_string())?;
    let d = (geom.max_residual - pre.max_residual).abs();
    lines.push(format!("F = 0 flow: |horizontal (b) - pregeodesic| = {d:.2e}"));
    ensure!(d < 1e-10, "F = 0 consistency {d:.3e}");
    Ok(lines)
}

fn criterion_6() -> Outcome {
    let mut lines = Vec::new();
    let h = tbundle::FD_STEP;
    let geos: Vec<(&str, FlowGeometry, f64)> = vec![
        ("pendulum on Jacobi metric", pendulum_on_jacobi_metric(), 1.5),
        ("pendulum", flows::pendulum().geometry, 3.0),
        ("lorenz", lorenz().geometry, 3.0),
        ("abc", abc().geometry, 3.0),
    ];
    for (idx, (name, geo, radius)) in geos.iter().enumerate() {
        let n = geo.dim();
        let mut r = rng(60 + idx as u64);
        let pts = box_points(&mut r, 50, &vec![-radius; 2 * n], &vec![*radius; 2 * n]);
        let (mut e1, mut e2, mut c1, mut c2, mut l1, mut l2) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        let pot = DynSystem::new(SystemKind::Potential, geo.clone());
        let gd = DynSystem::new(SystemKind::Gd, geo.clone());
        for z in &pts {
            let at = TBPoint::from_coords(z);
            let w1 = tbundle::omega1(geo, &at).map_err(|e| e.to_string())?;
            let w2 = tbundle::omega2(geo, &at).map_err(|e| e.to_string())?;
            let d1 = tbundle::exterior_derivative_1form(|p| tbundle::eta1(geo, p), z, h).map_err(|e| e.to_string())?;
            let d2 = tbundle::exterior_derivative_1form(|p| tbundle::eta2(geo, p), z, h).map_err(|e| e.to_string())?;
            e1 = e1.max((d1 + &w1.m).amax());
            e2 = e2.max((d2 + &w2.m).amax());
            c1 = c1.max(
                tbundle::closedness_defect(|p| Ok(tbundle::omega1(geo, &TBPoint::from_coords(p))?.m), z, h)
                    .map_err(|e| e.to_string())?,
            );
            c2 = c2.max(
                tbundle::closedness_defect(|p| Ok(tbundle::omega2(geo, &TBPoint::from_coords(p))?.m), z, h)
                    .map_err(|e| e.to_string())?,
            );
            for (form, sys, slot) in [(Form::Omega1, &pot, &mut l1), (Form::Omega2, &gd, &mut l2)] {
                let xh = tbundle::hamilton_vector(geo, form, z).map_err(|e| e.to_string())?;
                let (dx, dv) = sys.rhs(0.0, &at.x, &at.y).map_err(|e| e.to_string())?;
                let lift: Vec<f64> = dx.iter().chain(dv.iter()).copied().collect();
                // relative to the size of the lift for the fast 3-D flows
                let scale = lift.iter().fold(1.0_f64, |a, b| a.max(b.abs()));
                *slot = slot.max(max_abs_diff(xh.as_slice(), &lift) / scale);
            }
        }
        lines.push(format!(
            "{name}: |dη1+Ω1| {e1:.1e}, |dη2+Ω2| {e2:.1e}, |dΩ1| {c1:.1e}, |dΩ2| {c2:.1e}, X_H(Ω1) vs potential lift {l1:.1e}, X_H(Ω2) vs gd lift {l2:.1e}"
        ));
        ensure!(e1 < 1e-6 && e2 < 1e-6, "{name}: dη defects {e1:.3e} {e2:.3e}");
        ensure!(c1 < 1e-6 && c2 < 1e-6, "{name}: closedness {c1:.3e} {c2:.3e}");
        ensure!(l1 < 1e-8 && l2 < 1e-8, "{name}: lift defects {l1:.3e} {l2:.3e}");
    }
    let integ = Integrator::dopri45(1e-11, 1e-13);
    let flows_at: Vec<(&str, FlowGeometry, Vec<f64>, Vec<f64>)> = vec![
        ("pendulum on Jacobi metric", pendulum_on_jacobi_metric(), vec![0.7, -0.3], vec![0.2, 0.9]),
        ("pendulum", flows::pendulum().geometry, vec![0.0, 0.0], vec![1.0, 0.0]),
        ("abc", abc().geometry, vec![0.1, 0.2, 0.3], vec![0.5, -1.0, 0.25]),
    ];
    for (name, geo, x0, v0) in flows_at {
        let z0: Vec<f64> = x0.iter().chain(&v0).copied().collect();
        let end = tbundle::hamiltonian_flow(&geo, Form::Omega2, &z0, 0.0, 1.0, integ).map_err(|e| e.to_string())?;
        let (traj, _) = DynSystem::new(SystemKind::Gd, geo)
            .integrate(&x0, &v0, 0.0, 1.0, integ)
            .map_err(|e| e.to_string())?;
        let s = traj.last();
        let other: Vec<f64> = s.x.iter().chain(&s.v).copied().collect();
        let err = max_abs_diff(&end, &other);
        lines.push(format!("{name}: X_H(Ω2) flow vs gd at t=1 differ by {err:.2e}"));
        ensure!(err < 1e-6, "{name}: flow mismatch {err:.3e}");
    }
    Ok(lines)
}

fn criterion_7() -> Outcome {
    let spec = lorenz();
    let r0 = spec.chaos_threshold.as_ref().unwrap().value;
    let mut lines = vec![format!("r0(10, 8/3) = {r0:.6}")];
    ensure!((r0 - 24.7368).abs() < 5e-4, "r0 = {r0}");
    let seeds = vec![
        vec![8.0, 8.0, 27.0],
        vec![-8.0, -8.0, 27.0],
        vec![8.5, 7.5, 26.0],
        vec![-7.5, -8.5, 28.0],
        vec![0.5, -0.5, 1.0],
    ];
    let found = flows::find_equilibria(&spec.geometry, &seeds);
    lines.push(format!("Newton: {} points, {} seeds dropped", found.points.len(), found.dropped));
    for expected in &spec.equilibria {
        let best = found
            .points
            .iter()
            .map(|p| max_abs_diff(p, expected))
            .fold(f64::INFINITY, f64::min);
        lines.push(format!("equilibrium {expected:?}: Newton error {best:.2e}"));
        ensure!(best < 1e-9, "equilibrium {expected:?} missed by {best:.3e}");
    }
    let mut r = rng(7);
    let xs = box_points(&mut r, 100, &[-20.0, -20.0, 0.0], &[20.0, 20.0, 45.0]);
    let vs = box_points(&mut r, 100, &[-30.0; 3], &[30.0; 3]);
    let gd = DynSystem::new(SystemKind::Gd, spec.geometry.clone());
    let mut worst: f64 = 0.0;
    for (x, v) in xs.iter().zip(&vs) {
        let (_, dv) = gd.rhs(0.0, x, v).map_err(|e| e.to_string())?;
        let printed = spec.printed_gd(x, v).unwrap().map_err(|e| e.to_string())?;
        worst = worst.max(max_abs_diff(dv.as_slice(), &printed));
    }
    lines.push(format!("gd rhs vs printed component form: {worst:.2e}"));
    ensure!(worst < 1e-10, "component form mismatch {worst:.3e}");
    Ok(lines)
}

fn criterion_8() -> Outcome {
    let spec = abc();
    let mut r = rng(8);
    let xs = box_points(&mut r, 100, &[-7.0; 3], &[7.0; 3]);
    let (mut rot, mut div) = (0.0_f64, 0.0_f64);
    for x in &xs {
        let (val, jac) = spec.geometry.field.jacobian(x, spec.bindings()).map_err(|e| e.to_string())?;
        let c = geodyn_core::geometry::curl(&jac).map_err(|e| e.to_string())?;
        rot = rot.max(max_abs_diff(&c, val.as_slice()));
        div = div.max(geodyn_core::geometry::divergence(&jac).abs());
    }
    let mut lines = vec![format!("|rot X - X| {rot:.2e}, |div X| {div:.2e}")];
    ensure!(rot < 1e-10 && div < 1e-10, "rot {rot:.3e} div {div:.3e}");
    let seeds = box_points(&mut r, 60, &[-3.2; 3], &[3.2; 3]);
    let found = flows::find_equilibria(&spec.geometry, &seeds);
    let mut surf: f64 = 0.0;
    for p in &found.points {
        surf = surf.max(spec.surface_value(p).unwrap().map_err(|e| e.to_string())?.abs());
    }
    lines.push(format!(
        "{} equilibria from {} seeds ({} dropped), max surface value {surf:.2e}",
        found.points.len(),
        seeds.len(),
        found.dropped
    ));
    ensure!(!found.points.is_empty(), "no equilibria found");
    ensure!(surf < 1e-8, "surface residual {surf:.3e}");
    let vs = box_points(&mut r, 100, &[-3.0; 3], &[3.0; 3]);
    let gd = DynSystem::new(SystemKind::Gd, spec.geometry.clone());
    let mut worst: f64 = 0.0;
    for (x, v) in xs.iter().zip(&vs) {
        let (_, dv) = gd.rhs(0.0, x, v).map_err(|e| e.to_string())?;
        let printed = spec.printed_gd(x, v).unwrap().map_err(|e| e.to_string())?;
        worst = worst.max(max_abs_diff(dv.as_slice(), &printed));
    }
    lines.push(format!("gd rhs vs printed component form: {worst:.2e}"));
    ensure!(worst < 1e-10, "component form mismatch {worst:.3e}");
    Ok(lines)
}

fn criterion_9() -> Outcome {
    let spec = flows::pendulum();
    let r = verify::check_three_energy_regimes(&spec.geometry, &BoundaryValueProblem::pendulum_default())
        .map_err(|e| e.to_string())?;
    let mut lines = r.notes.clone();
    lines.push(format!("status {:?}", r.status));
    ensure!(r.status != Status::Fail, "shooting failed: {:?}", r.notes);
    if r.status == Status::Inconclusive {
        lines.push("inconclusive: regimes not all found, scan evidence above".into());
    }
    Ok(lines)
}

fn criterion_10() -> Outcome {
    let mut lines = Vec::new();
    let exprs = draw(arb_expr(3, vec!["sigma".into()]), 300);
    let bad = exprs.iter().filter(|e| round_trip(e, 3, &["sigma"]).is_err()).count();
    lines.push(format!("parser round-trip: {} ASTs, {bad} failures", exprs.len()));
    ensure!(bad == 0, "round-trip failures {bad}");

    let smooth = draw((arb_smooth_expr(3), arb_point(3, 1.0)), 300);
    let worst = smooth
        .iter()
        .filter_map(|(e, x)| autodiff_vs_fd(e, x))
        .fold(0.0_f64, f64::max);
    lines.push(format!("autodiff vs finite differences: worst error/tolerance {worst:.2e}"));
    ensure!(worst <= 1.0, "autodiff ratio {worst}");

    let geos = draw(
        (proptest::collection::vec(-1.5..1.5f64, 12), 2usize..=3, arb_point(3, 2.0)),
        100,
    );
    let (mut sym, mut compat, mut conf, mut anti) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for (coeffs, dim, x) in &geos {
        let geo = random_geometry(*dim, coeffs);
        let p = &x[..*dim];
        let (s, c) = christoffel_defects(&geo, p);
        sym = sym.max(s);
        compat = compat.max(c);
        conf = conf.max(conformal_defect(&geo, 0.7, p));
        anti = anti.max(omega_antisymmetry(&geo, p));
    }
    for spec in [flows::pendulum(), lorenz(), abc()] {
        let mut r = rng(10);
        for x in box_points(&mut r, 100, &vec![-10.0; spec.dim()], &vec![10.0; spec.dim()]) {
            anti = anti.max(omega_antisymmetry(&spec.geometry, &x));
        }
    }
    lines.push(format!(
        "Christoffel symmetry {sym:.1e}, compatibility {compat:.1e}, conformal identity {conf:.1e}, ω antisymmetry {anti:.1e}"
    ));
    ensure!(sym == 0.0 && compat < 1e-8, "Christoffel defects {sym} {compat}");
    ensure!(conf < 1e-7, "conformal identity {conf}");
    ensure!(anti < 1e-10, "antisymmetry {anti}");

    let e = rk4_circle_errors(0.1);
    let ratios: Vec<f64> = e.windows(2).map(|w| w[0] / w[1]).collect();
    lines.push(format!("rk4 error ratios per halving {ratios:.3?}"));
    ensure!(ratios.iter().all(|r| (r - 16.0).abs() < 3.2), "rk4 ratios {ratios:?}");
    lines.push("proptest suites run as the `properties` test target".into());
    Ok(lines)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 pendulum closed forms", criterion_1),
        ("2 Hamiltonian conservation", criterion_2),
        ("3 grad f identity", criterion_3),
        ("4 pregeodesics of the Jacobi metric", criterion_4),
        ("5 horizontal pregeodesics (operational)", criterion_5),
        ("6 symplectic lifts", criterion_6),
        ("7 Lorenz data", criterion_7),
        ("8 ABC data", criterion_8),
        ("9 three energy regimes", criterion_9),
        ("10 property suites", criterion_10),
    ];
    let suite = Instant::now();
    let (mut passed, mut failed) = (0, 0);
    let only = std::env::var("ACCEPTANCE_ONLY").ok();
    for (name, run) in criteria {
        if let Some(o) = &only {
            if !name.starts_with(&format!("{o} ")) {
                continue;
            }
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(lines) => {
                passed += 1;
                println!("PASS criterion {name} ({secs:.2} s)");
                for l in lines {
                    println!("    {l}");
                }
            }
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.2} s): {msg}");
            }
        }
    }
    println!(
        "acceptance: {passed} passed, {failed} failed in {:.2} s",
        suite.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
