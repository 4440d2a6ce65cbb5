//! Built-in flows with their known closed-form data.
//!
//! Stored formulas are claims to be checked against the generic pipeline,
//! never inputs to it.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dynamics::{DynSystem, SystemKind, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{FlowGeometry, VectorField};
use crate::vfexpr::{parse, Bindings, Expr};

/// One basis function of a linear solution family: position, velocity and
/// acceleration at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTerm {
    pub pos: Vec<f64>,
    pub vel: Vec<f64>,
    pub acc: Vec<f64>,
}

/// Closed-form solutions `x(t) = Σ c_k φ_k(t)` of one of the systems.
#[derive(Debug, Clone)]
pub struct SolutionFamily {
    pub name: &'static str,
    pub system: SystemKind,
    pub coefficients: &'static [&'static str],
    basis: fn(f64) -> Vec<BasisTerm>,
}

/// Coefficients and residual of a least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyFit {
    pub coefficients: Vec<f64>,
    /// Largest absolute misfit over fitted positions and velocities.
    pub max_residual: f64,
}

impl SolutionFamily {
    pub fn basis(&self, t: f64) -> Vec<BasisTerm> {
        (self.basis)(t)
    }

    /// `(x, ẋ, ẍ)` at time `t` for the given coefficients.
    pub fn eval(&self, coeffs: &[f64], t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let terms = self.basis(t);
        let n = terms[0].pos.len();
        let mut out = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for (c, b) in coeffs.iter().zip(&terms) {
            for i in 0..n {
                out.0[i] += c * b.pos[i];
                out.1[i] += c * b.vel[i];
                out.2[i] += c * b.acc[i];
            }
        }
        out
    }

    /// Least-squares fit of positions and velocities of all samples.
    pub fn fit(&self, traj: &Trajectory) -> Result<FamilyFit> {
        if traj.is_empty() {
            return Err(Error::EmptySample);
        }
        let k = self.coefficients.len();
        let n = traj.dim;
        let rows = traj.len() * 2 * n;
        let mut a = DMatrix::zeros(rows, k);
        let mut b = DVector::zeros(rows);
        for (s_idx, s) in traj.samples.iter().enumerate() {
            let terms = self.basis(s.t);
            if terms[0].pos.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "solution family",
                    expected: n,
                    found: terms[0].pos.len(),
                });
            }
            for i in 0..n {
                let rp = s_idx * 2 * n + i;
                let rv = rp + n;
                for (c, term) in terms.iter().enumerate() {
                    a[(rp, c)] = term.pos[i];
                    a[(rv, c)] = term.vel[i];
                }
                b[rp] = s.x[i];
                b[rv] = s.v[i];
            }
        }
        let svd = a.clone().svd(true, true);
        let c = svd
            .solve(&b, 1e-12)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let max_residual = (&a * &c - &b).amax();
        Ok(FamilyFit {
            coefficients: c.as_slice().to_vec(),
            max_residual,
        })
    }

    /// Largest ODE residual of the family member `coeffs` at `times`:
    /// `|ẋ − X(x)|` for the kinematic system, `|ẍ − rhs(x, ẋ)|` otherwise.
    pub fn ode_residual(&self, geo: &FlowGeometry, coeffs: &[f64], times: &[f64]) -> Result<f64> {
        let sys = DynSystem::new(self.system, geo.clone());
        let mut worst: f64 = 0.0;
        for &t in times {
            let (x, v, a) = self.eval(coeffs, t);
            let r = if self.system == SystemKind::Kinematic {
                DVector::from_vec(v) - geo.field_at(&x)?
            } else {
                let (_, dv) = sys.rhs(t, &x, &v)?;
                DVector::from_vec(a) - dv
            };
            worst = worst.max(r.amax());
        }
        Ok(worst)
    }
}

fn term(pos: [f64; 2], vel: [f64; 2], acc: [f64; 2]) -> BasisTerm {
    BasisTerm {
        pos: pos.to_vec(),
        vel: vel.to_vec(),
        acc: acc.to_vec(),
    }
}

/// `(cos t, sin t)` and `(sin t, −cos t)`.
fn circle_terms(t: f64) -> [BasisTerm; 2] {
    let (s, c) = t.sin_cos();
    [
        term([c, s], [-s, c], [-c, -s]),
        term([s, -c], [c, s], [-s, c]),
    ]
}

fn kinematic_basis(t: f64) -> Vec<BasisTerm> {
    circle_terms(t).to_vec()
}

fn prolonged_basis(t: f64) -> Vec<BasisTerm> {
    let mut v = circle_terms(t).to_vec();
    v.push(term([1.0, 0.0], [0.0; 2], [0.0; 2]));
    v.push(term([0.0, 1.0], [0.0; 2], [0.0; 2]));
    v
}

fn spiral_basis(t: f64) -> Vec<BasisTerm> {
    let (s, c) = t.sin_cos();
    let mut v = circle_terms(t).to_vec();
    v.push(term(
        [t * c, t * s],
        [c - t * s, s + t * c],
        [-2.0 * s - t * c, 2.0 * c - t * s],
    ));
    v.push(term(
        [t * s, -t * c],
        [s + t * c, -c + t * s],
        [2.0 * c - t * s, 2.0 * s + t * c],
    ));
    v
}

/// Component form of the geometric dynamics as printed for a flow, given
/// the parameters, `x`, `v` and `∂f`.
pub type ComponentForm = fn(&Bindings, &[f64], &[f64], &[f64]) -> Vec<f64>;

/// Chaos onset `r₀` of the Lorenz family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub formula: &'static str,
    pub value: f64,
}

/// A named flow with stored closed-form knowledge.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub name: &'static str,
    pub params: Vec<(&'static str, f64)>,
    pub geometry: FlowGeometry,
    pub energy: Expr,
    pub curl: [Expr; 3],
    pub divergence: Expr,
    pub equilibria: Vec<Vec<f64>>,
    pub families: Vec<SolutionFamily>,
    pub chaos_threshold: Option<Threshold>,
    /// Expression vanishing on a surface containing all equilibria.
    pub equilibrium_surface: Option<Expr>,
    pub component_form: Option<ComponentForm>,
    pub notes: Vec<String>,
}

fn exprs<const N: usize>(src: [&str; N], dim: usize, params: &[&str]) -> [Expr; N] {
    src.map(|s| parse(s, dim, params).expect("built-in expression parses"))
}

impl FlowSpec {
    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn bindings(&self) -> &Bindings {
        &self.geometry.bindings
    }

    /// Stored energy formula at `x`.
    pub fn stored_energy(&self, x: &[f64]) -> Result<f64> {
        Ok(self.energy.eval(x, self.bindings())?)
    }

    pub fn stored_curl(&self, x: &[f64]) -> Result<[f64; 3]> {
        let b = self.bindings();
        Ok([
            self.curl[0].eval(x, b)?,
            self.curl[1].eval(x, b)?,
            self.curl[2].eval(x, b)?,
        ])
    }

    pub fn stored_divergence(&self, x: &[f64]) -> Result<f64> {
        Ok(self.divergence.eval(x, self.bindings())?)
    }

    pub fn family(&self, system: SystemKind) -> Option<&SolutionFamily> {
        self.families.iter().find(|f| f.system == system)
    }

    /// Printed component form of the geometric dynamics at `(x, v)`, with
    /// `∂f` supplied by forward-mode differentiation.
    pub fn printed_gd(&self, x: &[f64], v: &[f64]) -> Option<Result<Vec<f64>>> {
        let form = self.component_form?;
        Some(
            self.geometry
                .point(x)
                .map(|p| form(self.bindings(), x, v, p.df.as_slice())),
        )
    }

    pub fn surface_value(&self, x: &[f64]) -> Option<Result<f64>> {
        let e = self.equilibrium_surface.as_ref()?;
        Some(e.eval(x, self.bindings()).map_err(Error::from))
    }
}

/// `X = (−x2, x1)` on the Euclidean plane.
pub fn pendulum() -> FlowSpec {
    let field = VectorField::parse(&["-x2", "x1"], &[]).expect("pendulum field");
    let geometry = FlowGeometry::euclidean(field, Bindings::new());
    FlowSpec {
        name: "pendulum",
        params: Vec::new(),
        geometry,
        energy: parse("(x1^2 + x2^2)/2", 2, &[]).expect("pendulum energy"),
        curl: exprs(["0", "0", "2"], 2, &[]),
        divergence: parse("0", 2, &[]).expect("literal"),
        equilibria: vec![vec![0.0, 0.0]],
        families: vec![
            SolutionFamily {
                name: "circles about the origin",
                system: SystemKind::Kinematic,
                coefficients: &["c1", "c2"],
                basis: kinematic_basis,
            },
            SolutionFamily {
                name: "circles with centre (h, k)",
                system: SystemKind::Prolonged,
                coefficients: &["a1", "a2", "h", "k"],
                basis: prolonged_basis,
            },
            SolutionFamily {
                name: "spirals",
                system: SystemKind::Gd,
                coefficients: &["b1", "b2", "b3", "b4"],
                basis: spiral_basis,
            },
        ],
        chaos_threshold: None,
        equilibrium_surface: None,
        component_form: Some(|_, x, v, _| vec![x[0] - 2.0 * v[1], x[1] + 2.0 * v[0]]),
        notes: vec!["the flow conserves areas: div X = 0".into()],
    }
}

/// `r₀ = σ(σ + b + 3)/(σ − b − 1)`.
pub fn lorenz_threshold(sigma: f64, b: f64) -> Result<f64> {
    let den = sigma - b - 1.0;
    if den == 0.0 {
        return Err(Error::ThresholdUndefined);
    }
    Ok(sigma * (sigma + b + 3.0) / den)
}

pub const LORENZ_DEFAULTS: [(&str, f64); 3] = [("sigma", 10.0), ("r", 28.0), ("b", 8.0 / 3.0)];

fn lorenz_gd_printed(p: &Bindings, x: &[f64], v: &[f64], df: &[f64]) -> Vec<f64> {
    let (s, r) = (p.get("sigma").unwrap_or(0.0), p.get("r").unwrap_or(0.0));
    vec![
        df[0] + (s + x[2] - r) * v[1] - x[1] * v[2],
        df[1] + (r - x[2] - s) * v[0] - 2.0 * x[0] * v[2],
        df[2] + x[1] * v[0] + 2.0 * x[0] * v[1],
    ]
}

/// The Lorenz system on Euclidean 3-space.
pub fn lorenz(sigma: f64, r: f64, b: f64) -> Result<FlowSpec> {
    let names = ["sigma", "r", "b"];
    let field = VectorField::parse(
        &["-sigma*x1 + sigma*x2", "-x1*x3 + r*x1 - x2", "x1*x2 - b*x3"],
        &names,
    )?;
    let bindings = Bindings::new().with("sigma", sigma).with("r", r).with("b", b);
    let threshold = lorenz_threshold(sigma, b)?;
    let mut equilibria = vec![vec![0.0; 3]];
    let q = b * (r - 1.0);
    if sigma != 0.0 && q > 0.0 {
        let s = q.sqrt();
        equilibria.push(vec![s, s, r - 1.0]);
        equilibria.push(vec![-s, -s, r - 1.0]);
    }
    Ok(FlowSpec {
        name: "lorenz",
        params: vec![("sigma", sigma), ("r", r), ("b", b)],
        geometry: FlowGeometry::euclidean(field, bindings),
        energy: parse(
            "((-sigma*x1 + sigma*x2)^2 + (-x1*x3 + r*x1 - x2)^2 + (x1*x2 - b*x3)^2)/2",
            3,
            &names,
        )?,
        curl: exprs(["2*x1", "-x2", "r - x3 - sigma"], 3, &names),
        divergence: parse("-sigma - 1 - b", 3, &names)?,
        equilibria,
        families: Vec::new(),
        chaos_threshold: Some(Threshold {
            formula: "r0 = sigma*(sigma + b + 3)/(sigma - b - 1)",
            value: threshold,
        }),
        equilibrium_surface: None,
        component_form: Some(lorenz_gd_printed),
        notes: vec![
            "nonzero equilibria (±sqrt(b(r-1)), ±sqrt(b(r-1)), r-1) with matching signs, when sigma != 0 and b(r-1) > 0".into(),
        ],
    })
}

pub const ABC_DEFAULTS: [(&str, f64); 3] = [("A", 1.0), ("B", 1.0), ("C", 1.0)];

fn abc_gd_printed(p: &Bindings, x: &[f64], v: &[f64], _df: &[f64]) -> Vec<f64> {
    let (a, b, c) = (
        p.get("A").unwrap_or(0.0),
        p.get("B").unwrap_or(0.0),
        p.get("C").unwrap_or(0.0),
    );
    let (s1, c1) = x[0].sin_cos();
    let (s2, c2) = x[1].sin_cos();
    let (s3, c3) = x[2].sin_cos();
    vec![
        a * b * c1 * c3 - b * c * s1 * s2 - (b * c1 + c * s2) * v[1] + (b * s1 + a * c3) * v[2],
        -a * c * s2 * s3 + b * c * c1 * c2 + (b * c1 + c * s2) * v[0] - (a * s3 + c * c2) * v[2],
        a * c * c3 * c2 - b * a * s1 * s3 - (b * s1 + a * c3) * v[0] + (c * c2 + a * s3) * v[1],
    ]
}

/// The Arnold-Beltrami-Childress flow on Euclidean 3-space.
pub fn abc(a: f64, b: f64, c: f64) -> FlowSpec {
    let names = ["A", "B", "C"];
    let comps = [
        "A*sin(x3) + C*cos(x2)",
        "B*sin(x1) + A*cos(x3)",
        "C*sin(x2) + B*cos(x1)",
    ];
    let field = VectorField::parse(&comps, &names).expect("abc field");
    let bindings = Bindings::new().with("A", a).with("B", b).with("C", c);
    let mut notes = vec![
        "Beltrami field: rot X = X, hence div X = 0 and volumes are conserved".to_string(),
        "equilibria lie on sin x1 sin x2 sin x3 + cos x1 cos x2 cos x3 = 0".to_string(),
    ];
    let offset = 0.5 * (a * a + b * b + c * c - a - b - c);
    if offset != 0.0 {
        notes.push(format!(
            "stored energy uses A+B+C as printed; ½g(X,X) differs by the constant {offset}"
        ));
    }
    FlowSpec {
        name: "abc",
        params: vec![("A", a), ("B", b), ("C", c)],
        geometry: FlowGeometry::euclidean(field, bindings),
        energy: parse(
            "(A + B + C + 2*A*C*sin(x3)*cos(x2) + 2*B*A*sin(x1)*cos(x3) + 2*C*B*sin(x2)*cos(x1))/2",
            3,
            &names,
        )
        .expect("abc energy"),
        curl: exprs(comps, 3, &names),
        divergence: parse("0", 3, &names).expect("literal"),
        equilibria: Vec::new(),
        families: Vec::new(),
        chaos_threshold: None,
        equilibrium_surface: Some(
            parse(
                "sin(x1)*sin(x2)*sin(x3) + cos(x1)*cos(x2)*cos(x3)",
                3,
                &names,
            )
            .expect("abc surface"),
        ),
        component_form: Some(abc_gd_printed),
        notes,
    }
}

pub const BUILTIN_NAMES: [&str; 3] = ["pendulum", "lorenz", "abc"];

/// Parameter names and defaults of a built-in flow.
pub fn builtin_defaults(name: &str) -> Option<Vec<(&'static str, f64)>> {
    match name {
        "pendulum" => Some(Vec::new()),
        "lorenz" => Some(LORENZ_DEFAULTS.to_vec()),
        "abc" => Some(ABC_DEFAULTS.to_vec()),
        _ => None,
    }
}

/// Built-in flow by name with parameter overrides applied to the defaults.
pub fn builtin(name: &str, overrides: &Bindings) -> Result<FlowSpec> {
    let defaults = builtin_defaults(name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown flow `{name}`")))?;
    for (k, _) in overrides.iter() {
        if !defaults.iter().any(|(d, _)| *d == k) {
            return Err(Error::InvalidArgument(format!(
                "flow `{name}` has no parameter `{k}`"
            )));
        }
    }
    let get = |k: &str, d: f64| overrides.get(k).unwrap_or(d);
    match name {
        "pendulum" => Ok(pendulum()),
        "lorenz" => lorenz(get("sigma", 10.0), get("r", 28.0), get("b", 8.0 / 3.0)),
        _ => Ok(abc(get("A", 1.0), get("B", 1.0), get("C", 1.0))),
    }
}

/// Converged equilibria and the number of seeds that failed to converge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibria {
    pub points: Vec<Vec<f64>>,
    pub dropped: usize,
}

pub const EQUILIBRIUM_TOL: f64 = 1e-10;
pub const DEDUP_DISTANCE: f64 = 1e-6;

fn newton_root(geo: &FlowGeometry, seed: &[f64]) -> Option<Vec<f64>> {
    let mut x = DVector::from_column_slice(seed);
    let norm = |x: &DVector<f64>| geo.field_at(x.as_slice()).ok().map(|v| v.norm());
    let mut r = norm(&x)?;
    for _ in 0..200 {
        if r < 1e-13 {
            break;
        }
        let (val, jac) = geo.field.jacobian(x.as_slice(), &geo.bindings).ok()?;
        let step = jac.lu().solve(&(-val))?;
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-8 {
            let trial = &x + &step * lambda;
            if let Some(rt) = norm(&trial) {
                if rt < (1.0 - 1e-4 * lambda) * r {
                    x = trial;
                    r = rt;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let v = geo.field_at(x.as_slice()).ok()?;
    (v.iter().all(|c| c.is_finite()) && v.amax() < EQUILIBRIUM_TOL && x.iter().all(|c| c.is_finite()))
        .then(|| x.as_slice().to_vec())
}

/// Damped Newton on `X(x) = 0` from each seed, deduplicated.
pub fn find_equilibria(geo: &FlowGeometry, seeds: &[Vec<f64>]) -> Equilibria {
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut dropped = 0;
    for seed in seeds {
        if seed.len() != geo.dim() || seed.iter().any(|c| !c.is_finite()) {
            dropped += 1;
            continue;
        }
        match newton_root(geo, seed) {
            Some(p) => {
                let dup = points.iter().any(|q| {
                    q.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() < DEDUP_DISTANCE
                });
                if !dup {
                    points.push(p);
                }
            }
            None => dropped += 1,
        }
    }
    Equilibria { points, dropped }
}

/// Regular grid of `per_axis` points per coordinate over `[lo, hi]`.
pub fn seed_grid(lo: &[f64], hi: &[f64], per_axis: usize) -> Vec<Vec<f64>> {
    let n = lo.len();
    let per_axis = per_axis.max(1);
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|d| {
                    let k = idx % per_axis;
                    idx /= per_axis;
                    if per_axis == 1 {
                        0.5 * (lo[d] + hi[d])
                    } else {
                        lo[d] + (hi[d] - lo[d]) * k as f64 / (per_axis - 1) as f64
                    }
                })
                .collect()
        })
        .collect()
}
