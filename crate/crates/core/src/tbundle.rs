//! Tangent-bundle structures in coordinates `z = (x, y)`.
//!
//! Convention: a two-form is stored as the antisymmetric matrix `M` with
//! `Ω(u, w) = uᵀ M w`, and the exterior derivative of `θ = θ_a dz^a` has
//! coefficients `(dθ)_ab = ∂_a θ_b − ∂_b θ_a`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{christoffel_from_jet, FlowGeometry, JacobiStructure, MetricJet};
use crate::ode::{self, Integrator};

/// Central-difference step for numerical exterior derivatives.
pub const FD_STEP: f64 = 1e-5;

/// Anything that yields a metric and its first derivatives at a point.
pub trait MetricSource {
    fn dim(&self) -> usize;
    fn metric_jet(&self, x: &[f64]) -> Result<MetricJet>;
}

impl MetricSource for FlowGeometry {
    fn dim(&self) -> usize {
        FlowGeometry::dim(self)
    }

    fn metric_jet(&self, x: &[f64]) -> Result<MetricJet> {
        FlowGeometry::metric_jet(self, x)
    }
}

impl MetricSource for JacobiStructure {
    fn dim(&self) -> usize {
        JacobiStructure::dim(self)
    }

    fn metric_jet(&self, x: &[f64]) -> Result<MetricJet> {
        JacobiStructure::metric_jet(self, x)
    }
}

/// A point `(x, y)` of the tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct TBPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TBPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                what: "tangent vector",
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(TBPoint { x, y })
    }

    /// Split a `2n` coordinate vector.
    pub fn from_coords(z: &[f64]) -> Self {
        let n = z.len() / 2;
        TBPoint {
            x: z[..n].to_vec(),
            y: z[n..].to_vec(),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Coefficients of a two-form at a point of the tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFormAt {
    pub at: TBPoint,
    pub m: DMatrix<f64>,
}

impl TwoFormAt {
    pub fn eval(&self, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        u.dot(&(&self.m * w))
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        (&self.m + self.m.transpose()).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }
}

fn check_dim(src: &impl MetricSource, at: &TBPoint) -> Result<()> {
    if at.dim() != src.dim() {
        return Err(Error::DimensionMismatch {
            what: "tangent-bundle point",
            expected: src.dim(),
            found: at.dim(),
        });
    }
    Ok(())
}

/// Metric and `N[j][h] = Γ^j_{hk} y^k`, so that `δy^j = dy^j + N[j][h] dx^h`.
fn metric_and_shift(src: &impl MetricSource, at: &TBPoint) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_dim(src, at)?;
    let jet = src.metric_jet(&at.x)?;
    let gamma = christoffel_from_jet(&jet, &at.x)?;
    Ok((jet.g, gamma.contract_last(&at.y)))
}

fn blocks(tl: &DMatrix<f64>, tr: &DMatrix<f64>, bl: &DMatrix<f64>, br: &DMatrix<f64>) -> DMatrix<f64> {
    let n = tl.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(tl);
    m.view_mut((0, n), (n, n)).copy_from(tr);
    m.view_mut((n, 0), (n, n)).copy_from(bl);
    m.view_mut((n, n), (n, n)).copy_from(br);
    m
}

/// `G = g_ij dx^i dx^j + g_ij δy^i δy^j` in the coordinate basis.
pub fn sasaki_metric(src: &impl MetricSource, at: &TBPoint) -> Result<DMatrix<f64>> {
    let (g, s) = metric_and_shift(src, at)?;
    let gs = &g * &s;
    let tl = &g + s.transpose() * &gs;
    let tl = (&tl + tl.transpose()) * 0.5;
    Ok(blocks(&tl, &gs.transpose(), &gs, &g))
}

/// `Ω₁ = g_ij dx^i ∧ δy^j`.
pub fn omega1(src: &impl MetricSource, at: &TBPoint) -> Result<TwoFormAt> {
    let (g, s) = metric_and_shift(src, at)?;
    let gs = &g * &s;
    let tl = &gs - gs.transpose();
    let zero = DMatrix::zeros(g.nrows(), g.ncols());
    Ok(TwoFormAt {
        at: at.clone(),
        m: blocks(&tl, &g, &(-&g), &zero),
    })
}

/// `Ω₂ = Ω₁` plus the base-base block `ωᵀ = −ω`, where `ω = g F` is the
/// lowered helicity. This is the sign for which `dη₂ = −Ω₂`.
pub fn omega2(geo: &FlowGeometry, at: &TBPoint) -> Result<TwoFormAt> {
    let mut form = omega1(geo, at)?;
    let omega = geo.helicity(&at.x)?.omega;
    let n = at.dim();
    // antisymmetrized so the stored form is exactly antisymmetric
    let block = (omega.transpose() - &omega) * 0.5;
    let mut base = form.m.view_mut((0, 0), (n, n));
    base += block;
    Ok(form)
}

/// Coefficients of `η₁ = g_ij y^i dx^j`.
pub fn eta1(src: &impl MetricSource, z: &[f64]) -> Result<Vec<f64>> {
    let at = TBPoint::from_coords(z);
    check_dim(src, &at)?;
    let g = src.metric_jet(&at.x)?.g;
    let gy = g * DVector::from_column_slice(&at.y);
    let mut out = gy.as_slice().to_vec();
    out.resize(z.len(), 0.0);
    Ok(out)
}

/// Coefficients of `η₂ = g_ij (y^i − X^i) dx^j`.
pub fn eta2(geo: &FlowGeometry, z: &[f64]) -> Result<Vec<f64>> {
    let at = TBPoint::from_coords(z);
    check_dim(geo, &at)?;
    let g = geo.metric_at(&at.x)?;
    let d = DVector::from_column_slice(&at.y) - geo.field_at(&at.x)?;
    let mut out = (g * d).as_slice().to_vec();
    out.resize(z.len(), 0.0);
    Ok(out)
}

/// `(dθ)_ab = ∂_a θ_b − ∂_b θ_a` by central differences of step `h`.
pub fn exterior_derivative_1form(
    theta: impl Fn(&[f64]) -> Result<Vec<f64>>,
    z: &[f64],
    h: f64,
) -> Result<DMatrix<f64>> {
    let m = z.len();
    // jac[(b, a)] = ∂_a θ_b
    let mut jac = DMatrix::zeros(m, m);
    let mut zp = z.to_vec();
    for a in 0..m {
        zp[a] = z[a] + h;
        let fp = theta(&zp)?;
        zp[a] = z[a] - h;
        let fm = theta(&zp)?;
        zp[a] = z[a];
        for b in 0..m {
            jac[(b, a)] = (fp[b] - fm[b]) / (2.0 * h);
        }
    }
    Ok(jac.transpose() - jac)
}

/// Largest coefficient `|(dΩ)_abc| = |∂_aΩ_bc + ∂_bΩ_ca + ∂_cΩ_ab|` by central
/// differences of step `h`.
pub fn closedness_defect(
    omega: impl Fn(&[f64]) -> Result<DMatrix<f64>>,
    z: &[f64],
    h: f64,
) -> Result<f64> {
    let m = z.len();
    let mut partials = Vec::with_capacity(m);
    let mut zp = z.to_vec();
    for a in 0..m {
        zp[a] = z[a] + h;
        let fp = omega(&zp)?;
        zp[a] = z[a] - h;
        let fm = omega(&zp)?;
        zp[a] = z[a];
        partials.push((fp - fm) / (2.0 * h));
    }
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let v = partials[a][(b, c)] + partials[b][(c, a)] + partials[c][(a, b)];
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// `dH` of `H(x, y) = ½ g(y, y) − f(x)`.
pub fn hamiltonian_differential(geo: &FlowGeometry, at: &TBPoint) -> Result<DVector<f64>> {
    check_dim(geo, at)?;
    let p = geo.point(&at.x)?;
    let y = DVector::from_column_slice(&at.y);
    let n = at.dim();
    let mut dh = DVector::zeros(2 * n);
    for k in 0..n {
        dh[k] = 0.5 * y.dot(&(&p.dg[k] * &y)) - p.df[k];
    }
    dh.rows_mut(n, n).copy_from(&(&p.g * &y));
    Ok(dh)
}

/// Solve `Ω(X_H, ·) = dH`, i.e. `Mᵀ X_H = dH`.
pub fn hamilton_gradient(omega: &TwoFormAt, dh: &DVector<f64>) -> Result<DVector<f64>> {
    let m = &omega.m;
    if dh.len() != m.nrows() {
        return Err(Error::DimensionMismatch {
            what: "differential",
            expected: m.nrows(),
            found: dh.len(),
        });
    }
    let det = m.determinant();
    let scale = m.amax().max(f64::MIN_POSITIVE).powi(m.nrows() as i32);
    if !(det.abs() > 1e-12 * scale) {
        return Err(Error::DegenerateForm { det });
    }
    m.transpose()
        .lu()
        .solve(dh)
        .ok_or(Error::DegenerateForm { det })
}

/// Which symplectic form drives a Hamiltonian flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Omega1,
    Omega2,
}

/// `X_H` at `z` with respect to `Ω₁` or `Ω₂` of the flow geometry.
pub fn hamilton_vector(geo: &FlowGeometry, form: Form, z: &[f64]) -> Result<DVector<f64>> {
    let at = TBPoint::from_coords(z);
    let omega = match form {
        Form::Omega1 => omega1(geo, &at)?,
        Form::Omega2 => omega2(geo, &at)?,
    };
    hamilton_gradient(&omega, &hamiltonian_differential(geo, &at)?)
}

/// Integrate `ż = X_H(z)` from `z0` over `[t0, t1]` and return the final state.
pub fn hamiltonian_flow(
    geo: &FlowGeometry,
    form: Form,
    z0: &[f64],
    t0: f64,
    t1: f64,
    integrator: Integrator,
) -> Result<Vec<f64>> {
    let mut last = z0.to_vec();
    ode::solve(
        &integrator,
        |_, z, dz| {
            let xh = hamilton_vector(geo, form, z)?;
            dz.copy_from_slice(xh.as_slice());
            Ok(())
        },
        t0,
        t1,
        z0,
        |_, z| {
            last.copy_from_slice(z);
            Ok(())
        },
    )?;
    Ok(last)
}
