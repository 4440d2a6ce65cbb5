//! Generators shared by the property suites and the acceptance run.
#![allow(dead_code)]

use geodyn_core::geometry::{FlowGeometry, MetricField, Signature, VectorField};
use geodyn_core::vfexpr::{Bindings, Expr, Func};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

pub const FUNCS: [Func; 7] = [
    Func::Sin,
    Func::Cos,
    Func::Tan,
    Func::Exp,
    Func::Log,
    Func::Sqrt,
    Func::Abs,
];

/// Arbitrary ASTs over `x1..x{dim}` and the given parameters. Literals are
/// non-negative, since a leading minus parses as negation.
pub fn arb_expr(dim: usize, params: Vec<String>) -> impl Strategy<Value = Expr> {
    let params_leaf = params.clone();
    let leaf = prop_oneof![
        (0.0..1e3f64).prop_map(Expr::num),
        (0u32..20).prop_map(|k| Expr::num(k as f64)),
        (1..=dim).prop_map(Expr::var),
        Just(Expr::Pi),
        (0..params_leaf.len().max(1)).prop_map(move |i| match params_leaf.get(i) {
            Some(p) => Expr::param(p.clone()),
            None => Expr::var(1),
        }),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| -e),
            (inner.clone(), inner.clone(), 0..4usize).prop_map(|(a, b, op)| match op {
                0 => a + b,
                1 => a - b,
                2 => a * b,
                _ => a / b,
            }),
            (inner.clone(), 0u32..6).prop_map(|(e, k)| e.powi(k)),
            (inner, 0..FUNCS.len()).prop_map(|(e, f)| Expr::call(FUNCS[f], e)),
        ]
    })
}

/// Smooth, moderately growing expressions: no division, logs or roots.
pub fn arb_smooth_expr(dim: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-2.0..2.0f64).prop_map(|c| if c < 0.0 { -Expr::num(-c) } else { Expr::num(c) }),
        (1..=dim).prop_map(Expr::var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| -e),
            (inner.clone(), inner.clone(), 0..3usize).prop_map(|(a, b, op)| match op {
                0 => a + b,
                1 => a - b,
                _ => a * b,
            }),
            (inner.clone(), 1u32..4).prop_map(|(e, k)| e.powi(k)),
            (inner, 0..3usize).prop_map(|(e, f)| {
                let func = [Func::Sin, Func::Cos, Func::Exp][f];
                // keep exp arguments bounded
                let arg = if func == Func::Exp { Expr::call(Func::Sin, e) } else { e };
                Expr::call(func, arg)
            }),
        ]
    })
}

pub fn arb_point(dim: usize, radius: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-radius..radius, dim)
}

/// Position-dependent positive-definite metric with random coefficients:
/// diagonal entries at least 2, off-diagonal entries bounded by 0.5.
pub fn random_metric(dim: usize, coeffs: &[f64]) -> MetricField {
    let mut entries = vec![String::new(); dim * dim];
    let mut c = coeffs.iter().copied().cycle();
    for i in 0..dim {
        for j in i..dim {
            let (a, b) = (c.next().unwrap(), c.next().unwrap());
            let (xi, xj) = (i + 1, (j + 1) % dim + 1);
            let s = if i == j {
                format!("2 + {:.6}*sin(x{xi} + {:.6}*x{xj})^2", a.abs(), b)
            } else {
                format!("{:.6}*sin({:.6}*x{xi} - x{xj})", 0.5 * a.clamp(-1.0, 1.0) / dim as f64, b)
            };
            entries[i * dim + j] = s.clone();
            entries[j * dim + i] = s;
        }
    }
    let refs: Vec<&str> = entries.iter().map(String::as_str).collect();
    MetricField::parse(dim, &refs, &[], Signature::riemannian(dim)).expect("random metric parses")
}

/// A smooth vector field with random coefficients.
pub fn random_field(dim: usize, coeffs: &[f64]) -> VectorField {
    let mut c = coeffs.iter().copied().cycle();
    let comps: Vec<String> = (0..dim)
        .map(|i| {
            let (a, b, d) = (c.next().unwrap(), c.next().unwrap(), c.next().unwrap());
            let k = (i + 1) % dim + 1;
            format!(
                "{a:.6}*x{k} + {b:.6}*sin(x{}) * x{k} + {d:.6}*cos(x{k})",
                i + 1
            )
        })
        .collect();
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    VectorField::parse(&refs, &[]).expect("random field parses")
}

pub fn random_geometry(dim: usize, coeffs: &[f64]) -> FlowGeometry {
    FlowGeometry::new(random_metric(dim, coeffs), random_field(dim, coeffs), Bindings::new())
        .expect("random geometry")
}

/// Draw `count` values from a strategy with a fixed-seed runner.
pub fn draw<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).expect("strategy draws").current())
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// `parse(print(e)) == e`.
pub fn round_trip(e: &Expr, dim: usize, params: &[&str]) -> Result<(), String> {
    let printed = e.to_string();
    let again = geodyn_core::vfexpr::parse(&printed, dim, params).map_err(|err| format!("{printed}: {err}"))?;
    if &again == e {
        Ok(())
    } else {
        Err(format!("{printed} reparsed as {again:?}"))
    }
}

/// Largest ratio of `|autodiff − central difference|` to the allowed
/// `max(1e-6, 1e-6·|value|)`, or `None` if evaluation fails at `x`.
pub fn autodiff_vs_fd(e: &Expr, x: &[f64]) -> Option<f64> {
    let b = Bindings::new();
    let jet = e.eval_jet2(x, &b).ok()?;
    let dual = e.eval_jet1(x, &b).ok()?;
    let h = 1e-5;
    let tol = (1e-6 * jet.value.abs()).max(1e-6);
    let mut worst: f64 = 0.0;
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let fp = e.eval(&xp, &b).ok()?;
        xp[j] = x[j] - h;
        let fm = e.eval(&xp, &b).ok()?;
        xp[j] = x[j];
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((jet.grad[j] - fd).abs() / tol);
        worst = worst.max((dual.grad[j] - jet.grad[j]).abs() / tol);
        for k in 0..x.len() {
            if jet.hess(j, k) != jet.hess(k, j) {
                return Some(f64::INFINITY);
            }
        }
    }
    Some(worst)
}

/// `(symmetry defect, compatibility defect)` of the Christoffel symbols.
pub fn christoffel_defects(geo: &FlowGeometry, x: &[f64]) -> (f64, f64) {
    let n = geo.dim();
    let jet = geo.metric_jet(x).unwrap();
    let gamma = geo.christoffel(x).unwrap();
    let (mut sym, mut compat) = (0.0_f64, 0.0_f64);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                sym = sym.max((gamma.get(i, j, k) - gamma.get(i, k, j)).abs());
                let mut c = jet.dg[k][(i, j)];
                for l in 0..n {
                    c -= gamma.get(l, k, i) * jet.g[(l, j)] + gamma.get(l, k, j) * jet.g[(i, l)];
                }
                compat = compat.max(c.abs());
            }
        }
    }
    (sym, compat)
}

/// Generic Christoffels of `ḡ` built as composed expressions
/// `(H₀ + ½ g_ij X^i X^j) g_ij`, against the conformal-change formula.
pub fn conformal_defect(geo: &FlowGeometry, h0: f64, x: &[f64]) -> f64 {
    let n = geo.dim();
    let comps = geo.field.components();
    let mut f = Expr::num(0.0);
    for i in 0..n {
        for j in 0..n {
            f = f + geo.metric.entry(i, j).clone() * comps[i].clone() * comps[j].clone();
        }
    }
    let phi = Expr::num(h0) + Expr::num(0.5) * f;
    let entries = (0..n * n)
        .map(|k| phi.clone() * geo.metric.entry(k / n, k % n).clone())
        .collect();
    let bar = MetricField::from_exprs(n, entries, geo.metric.signature()).unwrap();
    let composed = FlowGeometry::new(bar, geo.field.clone(), geo.bindings.clone()).unwrap();
    let generic = composed.christoffel(x).unwrap();
    let js = geo.jacobi_structure(h0).unwrap();
    let formula = js.christoffel_conformal(x).unwrap();
    let via_jet = js.christoffel(x).unwrap();
    generic.max_abs_diff(&formula).max(via_jet.max_abs_diff(&formula))
}

pub fn omega_antisymmetry(geo: &FlowGeometry, x: &[f64]) -> f64 {
    let w = geo.helicity(x).unwrap().omega;
    (&w + w.transpose()).amax()
}

/// Errors at `t = 2π` of RK4 on the pendulum circle for `dt, dt/2, dt/4`.
pub fn rk4_circle_errors(dt: f64) -> Vec<f64> {
    use geodyn_core::dynamics::{DynSystem, SystemKind};
    use geodyn_core::ode::Integrator;
    let geo = FlowGeometry::euclidean(VectorField::parse(&["-x2", "x1"], &[]).unwrap(), Bindings::new());
    let sys = DynSystem::new(SystemKind::Kinematic, geo);
    let t1 = 2.0 * std::f64::consts::PI;
    [dt, dt / 2.0, dt / 4.0]
        .iter()
        .map(|&h| {
            let (traj, _) = sys.integrate(&[1.0, 0.0], &[], 0.0, t1, Integrator::rk4(h)).unwrap();
            let e = traj.last();
            ((e.x[0] - t1.cos()).powi(2) + (e.x[1] - t1.sin()).powi(2)).sqrt()
        })
        .collect()
}
