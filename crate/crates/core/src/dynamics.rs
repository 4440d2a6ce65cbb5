//! Second-order prolongations of a flow, their Lagrangians and Hamiltonian,
//! and trajectory integration.
//!
//! All systems share the coordinate form
//! `dv^i/dt = −Γ^i_{jk} v^j v^k + R^i(x, v)`, where `R` is the covariant
//! right-hand side of the chosen system.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FlowGeometry, PointData, VectorField};
use crate::ode::{self, Integrator, StepStats};

/// Which prolongation of `ẋ = X(x)` to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    /// The flow itself, `ẋ = X(x)`.
    Kinematic,
    /// `∇_t ẋ = ∇_ẋ X`.
    Prolonged,
    /// `∇_t ẋ = g⁻¹⊗g(∇X)(X) + F(ẋ)`.
    Sys3,
    /// `∇_t ẋ = grad f`.
    Potential,
    /// Geometric dynamics, `∇_t ẋ = grad f + F(ẋ)`.
    Gd,
    /// `∇_t ẋ = g⁻¹⊗g(∇X)(ẋ) + F(X)`.
    Sys4,
    /// `∇_t ẋ = grad f + F(X)`.
    Sys5,
}

impl SystemKind {
    pub const ALL: [SystemKind; 7] = [
        SystemKind::Kinematic,
        SystemKind::Prolonged,
        SystemKind::Sys3,
        SystemKind::Potential,
        SystemKind::Gd,
        SystemKind::Sys4,
        SystemKind::Sys5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Kinematic => "kinematic",
            SystemKind::Prolonged => "prolonged",
            SystemKind::Sys3 => "sys3",
            SystemKind::Potential => "potential",
            SystemKind::Gd => "gd",
            SystemKind::Sys4 => "sys4",
            SystemKind::Sys5 => "sys5",
        }
    }

    pub fn is_second_order(self) -> bool {
        self != SystemKind::Kinematic
    }

    /// Systems whose Hamiltonian `½g(v,v) − f` is a first integral.
    pub fn is_conservative(self) -> bool {
        matches!(
            self,
            SystemKind::Potential | SystemKind::Gd | SystemKind::Sys3
        )
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown system kind `{s}`")))
    }
}

/// Raised when a perturbation field is not parallel at the checked points.
#[derive(Debug, Clone, PartialEq)]
pub struct NonParallelWarning {
    /// `max |∇Y|` over the checked points.
    pub max_nabla: f64,
}

impl fmt::Display for NonParallelWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "perturbation field is not parallel: max |∇Y| = {:e}",
            self.max_nabla
        )
    }
}

/// Tolerance on `|∇Y|` for a perturbation to count as parallel.
pub const PARALLEL_TOL: f64 = 1e-8;

/// A second-order (or kinematic) system built from a flow geometry.
#[derive(Debug, Clone)]
pub struct DynSystem {
    kind: SystemKind,
    geometry: FlowGeometry,
    perturbation: Option<VectorField>,
}

impl DynSystem {
    pub fn new(kind: SystemKind, geometry: FlowGeometry) -> Self {
        DynSystem {
            kind,
            geometry,
            perturbation: None,
        }
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn geometry(&self) -> &FlowGeometry {
        &self.geometry
    }

    pub fn perturbation(&self) -> Option<&VectorField> {
        self.perturbation.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    /// Covariant right-hand side `R(x, v)` from precomputed point data.
    pub fn covariant_rhs(&self, p: &PointData, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(match self.kind {
            SystemKind::Kinematic => DVector::zeros(v.len()),
            SystemKind::Prolonged => {
                let mut r = &p.nabla * v;
                if let Some(y) = &self.perturbation {
                    r += nabla_of(y, p, &self.geometry)? * v;
                }
                r
            }
            SystemKind::Sys3 => &p.adjoint * &p.field + &p.helicity * v,
            SystemKind::Potential => p.grad_f(),
            SystemKind::Gd => p.grad_f() + &p.helicity * v,
            SystemKind::Sys4 => &p.adjoint * v + &p.helicity * &p.field,
            SystemKind::Sys5 => p.grad_f() + &p.helicity * &p.field,
        })
    }

    /// Coordinate acceleration `−Γ(v, v) + R(x, v)`.
    pub fn acceleration(&self, p: &PointData, v: &DVector<f64>) -> Result<DVector<f64>> {
        let mut a = self.covariant_rhs(p, v)?;
        if !p.gamma.is_zero() {
            a -= p.gamma.contract(v.as_slice(), v.as_slice());
        }
        Ok(a)
    }

    /// `(dx/dt, dv/dt)`; for the kinematic system `dx = X(x)` and `dv = 0`.
    pub fn rhs(&self, _t: f64, x: &[f64], v: &[f64]) -> Result<(DVector<f64>, DVector<f64>)> {
        let n = self.dim();
        if x.len() != n || v.len() != n {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: n,
                found: if x.len() != n { x.len() } else { v.len() },
            });
        }
        if self.kind == SystemKind::Kinematic {
            return Ok((self.geometry.field_at(x)?, DVector::zeros(n)));
        }
        let p = self.geometry.point(x)?;
        let v = DVector::from_column_slice(v);
        let a = self.acceleration(&p, &v)?;
        Ok((v, a))
    }

    /// Lagrangian whose extremals are the trajectories: `½g(v,v) + f` for the
    /// potential system, `½g(v − X, v − X)` for geometric dynamics.
    pub fn lagrangian(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        match self.kind {
            SystemKind::Potential => lagrangian_potential(&self.geometry, x, v),
            SystemKind::Gd | SystemKind::Sys3 => lagrangian_gd(&self.geometry, x, v),
            k => Err(Error::UnsupportedSystem {
                kind: k.name(),
                op: "lagrangian",
            }),
        }
    }

    pub fn hamiltonian(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        hamiltonian(&self.geometry, x, v)
    }

    /// Largest `|∇Y|` entry of the perturbation over `points` (0 without one).
    pub fn parallel_defect(&self, points: &[Vec<f64>]) -> Result<f64> {
        let Some(y) = &self.perturbation else {
            return Ok(0.0);
        };
        let mut worst: f64 = 0.0;
        for x in points {
            let p = self.geometry.point(x)?;
            worst = worst.max(nabla_of(y, &p, &self.geometry)?.amax());
        }
        Ok(worst)
    }

    /// Integrate from `(x0, v0)` over `[t0, t1]`. Kinematic runs ignore `v0`
    /// and record `v = X(x)`.
    pub fn integrate(
        &self,
        x0: &[f64],
        v0: &[f64],
        t0: f64,
        t1: f64,
        integrator: Integrator,
    ) -> Result<(Trajectory, EnergyRecord)> {
        let n = self.dim();
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                what: "x0",
                expected: n,
                found: x0.len(),
            });
        }
        let mut samples = Vec::new();
        let stats: StepStats = if self.kind == SystemKind::Kinematic {
            let geo = &self.geometry;
            ode::solve(
                &integrator,
                |t, y, dy| {
                    let xf = geo.field_at(y).map_err(|e| at_time(e, t))?;
                    dy.copy_from_slice(xf.as_slice());
                    Ok(())
                },
                t0,
                t1,
                x0,
                |t, y| {
                    let v = geo.field_at(y).map_err(|e| at_time(e, t))?;
                    samples.push(Sample {
                        t,
                        x: y.to_vec(),
                        v: v.as_slice().to_vec(),
                    });
                    Ok(())
                },
            )?
        } else {
            if v0.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "v0",
                    expected: n,
                    found: v0.len(),
                });
            }
            let y0: Vec<f64> = x0.iter().chain(v0).copied().collect();
            ode::solve(
                &integrator,
                |t, y, dy| {
                    let (dx, dv) = self.rhs(t, &y[..n], &y[n..]).map_err(|e| at_time(e, t))?;
                    dy[..n].copy_from_slice(dx.as_slice());
                    dy[n..].copy_from_slice(dv.as_slice());
                    Ok(())
                },
                t0,
                t1,
                &y0,
                |t, y| {
                    samples.push(Sample {
                        t,
                        x: y[..n].to_vec(),
                        v: y[n..].to_vec(),
                    });
                    Ok(())
                },
            )?
        };
        let traj = Trajectory {
            kind: self.kind,
            dim: n,
            samples,
            integrator,
            stats,
        };
        let record = EnergyRecord::compute(&self.geometry, &traj)?;
        Ok((traj, record))
    }
}

/// Attach the integration time to evaluation failures.
fn at_time(e: Error, t: f64) -> Error {
    match e {
        Error::Expr(source) => Error::DomainAt { t, source },
        other => other,
    }
}

/// `(∇Y)^i_j = ∂_j Y^i + Γ^i_{jh} Y^h`.
fn nabla_of(y: &VectorField, p: &PointData, geo: &FlowGeometry) -> Result<DMatrix<f64>> {
    let (val, mut jac) = y.jacobian(&p.x, &geo.bindings)?;
    if !p.gamma.is_zero() {
        jac += p.gamma.contract_last(val.as_slice());
    }
    Ok(jac)
}

/// Prolonged system of `X + Y` for a parallel field `Y`.
///
/// Parallelism is checked at `check_points`; a failed check produces a
/// warning, not an error.
pub fn perturb_parallel(
    sys: &DynSystem,
    y: VectorField,
    check_points: &[Vec<f64>],
) -> Result<(DynSystem, Option<NonParallelWarning>)> {
    if sys.kind != SystemKind::Prolonged {
        return Err(Error::UnsupportedSystem {
            kind: sys.kind.name(),
            op: "perturb_parallel",
        });
    }
    if y.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            what: "perturbation field",
            expected: sys.dim(),
            found: y.dim(),
        });
    }
    let out = DynSystem {
        kind: SystemKind::Prolonged,
        geometry: sys.geometry.clone(),
        perturbation: Some(y),
    };
    let defect = out.parallel_defect(check_points)?;
    let warning = (defect > PARALLEL_TOL).then_some(NonParallelWarning { max_nabla: defect });
    Ok((out, warning))
}

fn inner(g: &DMatrix<f64>, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
    u.dot(&(g * w))
}

/// `H = ½ g(v, v) − f(x)`.
pub fn hamiltonian(geo: &FlowGeometry, x: &[f64], v: &[f64]) -> Result<f64> {
    let g = geo.metric_at(x)?;
    let xf = geo.field_at(x)?;
    let v = DVector::from_column_slice(v);
    Ok(0.5 * inner(&g, &v, &v) - 0.5 * inner(&g, &xf, &xf))
}

/// `½ g(v, v) + f(x)`.
pub fn lagrangian_potential(geo: &FlowGeometry, x: &[f64], v: &[f64]) -> Result<f64> {
    let g = geo.metric_at(x)?;
    let xf = geo.field_at(x)?;
    let v = DVector::from_column_slice(v);
    Ok(0.5 * inner(&g, &v, &v) + 0.5 * inner(&g, &xf, &xf))
}

/// `½ g(v − X, v − X)`.
pub fn lagrangian_gd(geo: &FlowGeometry, x: &[f64], v: &[f64]) -> Result<f64> {
    let g = geo.metric_at(x)?;
    let d = DVector::from_column_slice(v) - geo.field_at(x)?;
    Ok(0.5 * inner(&g, &d, &d))
}

/// One recorded state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// Time-ordered samples of an integration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: SystemKind,
    pub dim: usize,
    pub samples: Vec<Sample>,
    pub integrator: Integrator,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    /// Copy with times mapped through a strictly increasing `tau` (with
    /// derivative `dtau`); velocities are rescaled by `1/τ'(t)`.
    pub fn reparametrized(
        &self,
        tau: impl Fn(f64) -> f64,
        dtau: impl Fn(f64) -> f64,
    ) -> Trajectory {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let d = dtau(s.t);
                Sample {
                    t: tau(s.t),
                    x: s.x.clone(),
                    v: s.v.iter().map(|c| c / d).collect(),
                }
            })
            .collect();
        Trajectory {
            samples,
            ..self.clone()
        }
    }
}

/// Per-sample energies, recomputed from each recorded state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub hamiltonian: Vec<f64>,
    pub energy: Vec<f64>,
    /// `½g(v,v) + f`.
    pub lagrangian_potential: Vec<f64>,
    /// `½g(v − X, v − X)`.
    pub lagrangian_gd: Vec<f64>,
}

impl EnergyRecord {
    pub fn compute(geo: &FlowGeometry, traj: &Trajectory) -> Result<Self> {
        let n = traj.len();
        let mut rec = EnergyRecord {
            hamiltonian: Vec::with_capacity(n),
            energy: Vec::with_capacity(n),
            lagrangian_potential: Vec::with_capacity(n),
            lagrangian_gd: Vec::with_capacity(n),
        };
        for s in &traj.samples {
            let g = geo.metric_at(&s.x)?;
            let xf = geo.field_at(&s.x)?;
            let v = DVector::from_column_slice(&s.v);
            let f = 0.5 * inner(&g, &xf, &xf);
            let kinetic = 0.5 * inner(&g, &v, &v);
            let d = &v - &xf;
            rec.hamiltonian.push(kinetic - f);
            rec.energy.push(f);
            rec.lagrangian_potential.push(kinetic + f);
            rec.lagrangian_gd.push(0.5 * inner(&g, &d, &d));
        }
        Ok(rec)
    }

    /// Lagrangian column matching a system kind, if it has one.
    pub fn lagrangian_for(&self, kind: SystemKind) -> Option<&[f64]> {
        match kind {
            SystemKind::Potential => Some(&self.lagrangian_potential),
            SystemKind::Gd | SystemKind::Sys3 => Some(&self.lagrangian_gd),
            _ => None,
        }
    }
}
