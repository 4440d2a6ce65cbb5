//! Semi-Riemannian kernel: metric fields, Levi-Civita connection, covariant
//! derivative of a vector field, helicity tensor and the Jacobi structure
//! built from a flow's energy.
//!
//! Index conventions: matrices are indexed `[(row, col)] = [(i, j)]` with `i`
//! the contravariant index, so `nabla_x()[(i, j)] = (∇X)^i_j = ∇_j X^i` and
//! `(∇X)(v)^i = (∇X)^i_j v^j`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vfexpr::{parse, Bindings, Expr};

/// Values below this magnitude count as singular determinants / degenerate
/// conformal factors.
pub const DEGENERACY_CUTOFF: f64 = 1e-12;

/// Metric signature: counts of positive and negative eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
}

impl Signature {
    pub fn riemannian(n: usize) -> Self {
        Signature {
            positive: n,
            negative: 0,
        }
    }

    pub fn is_riemannian(&self) -> bool {
        self.negative == 0
    }

    /// Signature of a symmetric matrix from the signs of its eigenvalues.
    pub fn of(g: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(g.clone());
        let positive = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
        let negative = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
        Signature { positive, negative }
    }
}

/// Metric value and its first partials at a point: `dg[k][(i, j)] = ∂_k g_ij`.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub dg: Vec<DMatrix<f64>>,
}

/// Position-dependent symmetric (0,2) tensor given by expression entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    dim: usize,
    entries: Vec<Expr>,
    signature: Signature,
    /// Literal entries, when none of them depend on the point.
    constant: Option<DMatrix<f64>>,
}

impl MetricField {
    /// Build from row-major entries; the entry grid must be symmetric as
    /// written.
    pub fn from_exprs(dim: usize, entries: Vec<Expr>, signature: Signature) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                what: "metric entries",
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if signature.positive + signature.negative != dim {
            return Err(Error::InvalidArgument(format!(
                "signature ({},{}) does not sum to dimension {dim}",
                signature.positive, signature.negative
            )));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::AsymmetricMetric { i: i + 1, j: j + 1 });
                }
            }
            for e in &entries {
                if e.max_var() > dim {
                    return Err(Error::DimensionMismatch {
                        what: "metric entry variable",
                        expected: dim,
                        found: e.max_var(),
                    });
                }
            }
        }
        let constant = entries
            .iter()
            .map(Expr::as_literal)
            .collect::<Option<Vec<f64>>>()
            .map(|vals| DMatrix::from_row_slice(dim, dim, &vals));
        Ok(MetricField {
            dim,
            entries,
            signature,
            constant,
        })
    }

    /// Parse row-major entry strings.
    pub fn parse(
        dim: usize,
        entries: &[&str],
        params: &[&str],
        signature: Signature,
    ) -> Result<Self> {
        let exprs = entries
            .iter()
            .map(|s| parse(s, dim, params))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::from_exprs(dim, exprs, signature)
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    /// Constant diagonal metric; the signature follows the signs of `diag`.
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut entries = vec![Expr::num(0.0); n * n];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * n + i] = if d < 0.0 {
                -Expr::num(-d)
            } else {
                Expr::num(d)
            };
        }
        let signature = Signature {
            positive: diag.iter().filter(|&&d| d > 0.0).count(),
            negative: diag.iter().filter(|&&d| d < 0.0).count(),
        };
        MetricField {
            dim: n,
            entries,
            signature,
            constant: Some(DMatrix::from_diagonal(&DVector::from_column_slice(diag))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn is_constant(&self) -> bool {
        self.constant.is_some()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.dim + j]
    }

    pub fn eval(&self, x: &[f64], b: &Bindings) -> Result<DMatrix<f64>> {
        if let Some(c) = &self.constant {
            return Ok(c.clone());
        }
        let n = self.dim;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.entries[i * n + j].eval(x, b)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    pub fn jet(&self, x: &[f64], b: &Bindings) -> Result<MetricJet> {
        let n = self.dim;
        if let Some(c) = &self.constant {
            return Ok(MetricJet {
                g: c.clone(),
                dg: vec![DMatrix::zeros(n, n); n],
            });
        }
        let mut g = DMatrix::zeros(n, n);
        let mut dg = vec![DMatrix::zeros(n, n); n];
        for i in 0..n {
            for j in i..n {
                let d = self.entries[i * n + j].eval_jet1(x, b)?;
                g[(i, j)] = d.value;
                g[(j, i)] = d.value;
                for (k, dk) in dg.iter_mut().enumerate() {
                    dk[(i, j)] = d.grad[k];
                    dk[(j, i)] = d.grad[k];
                }
            }
        }
        Ok(MetricJet { g, dg })
    }

    /// Check the declared signature (and nondegeneracy) at sample points.
    pub fn check_signature(&self, samples: &[Vec<f64>], b: &Bindings) -> Result<()> {
        for x in samples {
            let g = self.eval(x, b)?;
            let det = g.determinant();
            if det.abs() < DEGENERACY_CUTOFF {
                return Err(Error::SingularMetric { x: x.clone(), det });
            }
            let found = Signature::of(&g);
            if found != self.signature {
                return Err(Error::SignatureMismatch {
                    x: x.clone(),
                    expected_pos: self.signature.positive,
                    expected_neg: self.signature.negative,
                    found_pos: found.positive,
                    found_neg: found.negative,
                });
            }
        }
        Ok(())
    }
}

/// Vector field given by one expression per component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(comps: Vec<Expr>) -> Result<Self> {
        let n = comps.len();
        for e in &comps {
            if e.max_var() > n {
                return Err(Error::DimensionMismatch {
                    what: "vector field variable",
                    expected: n,
                    found: e.max_var(),
                });
            }
        }
        Ok(VectorField { comps })
    }

    pub fn parse(comps: &[&str], params: &[&str]) -> Result<Self> {
        let n = comps.len();
        let exprs = comps
            .iter()
            .map(|s| parse(s, n, params))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(exprs)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn eval(&self, x: &[f64], b: &Bindings) -> Result<DVector<f64>> {
        let vals = self
            .comps
            .iter()
            .map(|e| e.eval(x, b))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// Value and Jacobian `J[(i, j)] = ∂_j X^i`.
    pub fn jacobian(&self, x: &[f64], b: &Bindings) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = self.dim();
        let mut val = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, n);
        for (i, e) in self.comps.iter().enumerate() {
            let d = e.eval_jet1(x, b)?;
            val[i] = d.value;
            for j in 0..n {
                jac[(i, j)] = d.grad[j];
            }
        }
        Ok((val, jac))
    }
}

/// Levi-Civita connection coefficients at a point, `gamma(i, j, k) = Γ^i_{jk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelAt {
    pub x: Vec<f64>,
    n: usize,
    coeffs: Vec<f64>,
}

impl ChristoffelAt {
    pub fn zeros(x: &[f64]) -> Self {
        let n = x.len();
        ChristoffelAt {
            x: x.to_vec(),
            n,
            coeffs: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.coeffs[(i * self.n + j) * self.n + k]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.n;
        self.coeffs[(i * n + j) * n + k] = v;
    }

    /// `Γ^i_{jk} v^j w^k`.
    pub fn contract(&self, v: &[f64], w: &[f64]) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |i, _| {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += self.get(i, j, k) * v[j] * w[k];
                }
            }
            s
        })
    }

    /// `M[(i, j)] = Γ^i_{jk} y^k`.
    pub fn contract_last(&self, y: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| self.get(i, j, k) * y[k]).sum())
    }

    pub fn max_abs_diff(&self, other: &ChristoffelAt) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

/// Inverse of a metric matrix, failing on (near-)singular input.
pub fn invert_metric(g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
    let det = g.determinant();
    if det.abs() < DEGENERACY_CUTOFF || !det.is_finite() {
        return Err(Error::SingularMetric { x: x.to_vec(), det });
    }
    g.clone()
        .try_inverse()
        .ok_or(Error::SingularMetric { x: x.to_vec(), det })
}

/// `Γ^i_{jk} = ½ g^{ih} (∂_j g_hk + ∂_k g_hj − ∂_h g_jk)` from a metric jet.
pub fn christoffel_from_jet(jet: &MetricJet, x: &[f64]) -> Result<ChristoffelAt> {
    let n = jet.g.nrows();
    let ginv = invert_metric(&jet.g, x)?;
    let mut out = ChristoffelAt::zeros(x);
    if jet.dg.iter().all(|d| d.iter().all(|&v| v == 0.0)) {
        return Ok(out);
    }
    // lowered: Γ_{h,jk}
    let mut lowered = vec![0.0; n * n * n];
    for h in 0..n {
        for j in 0..n {
            for k in j..n {
                let v = 0.5 * (jet.dg[j][(h, k)] + jet.dg[k][(h, j)] - jet.dg[h][(j, k)]);
                lowered[(h * n + j) * n + k] = v;
                lowered[(h * n + k) * n + j] = v;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let v: f64 = (0..n)
                    .map(|h| ginv[(i, h)] * lowered[(h * n + j) * n + k])
                    .sum();
                out.set(i, j, k, v);
                out.set(i, k, j, v);
            }
        }
    }
    Ok(out)
}

/// Causal character of a flow from the sign of its energy over a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Causality {
    Timelike,
    Causal,
    Null,
    Spacelike,
    Mixed,
}

/// Helicity tensor `F^i_j` and its lowered 2-form `ω_ij = g_ik F^k_j`.
#[derive(Debug, Clone)]
pub struct HelicityAt {
    pub x: Vec<f64>,
    pub f: DMatrix<f64>,
    pub omega: DMatrix<f64>,
}

/// Everything the dynamics needs at one point, computed in one pass.
#[derive(Debug, Clone)]
pub struct PointData {
    pub x: Vec<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub dg: Vec<DMatrix<f64>>,
    pub gamma: ChristoffelAt,
    /// X(x)
    pub field: DVector<f64>,
    /// Coordinate Jacobian ∂_j X^i.
    pub jacobian: DMatrix<f64>,
    /// (∇X)^i_j = ∂_j X^i + Γ^i_{jh} X^h.
    pub nabla: DMatrix<f64>,
    /// g⁻¹⊗g(∇X): (A*)^i_j = g^{ih} g_{kj} (∇X)^k_h.
    pub adjoint: DMatrix<f64>,
    /// F = ∇X − g⁻¹⊗g(∇X).
    pub helicity: DMatrix<f64>,
    /// f = ½ g(X, X).
    pub energy: f64,
    /// ∂_k f by forward-mode differentiation of ½ g_ij X^i X^j.
    pub df: DVector<f64>,
}

impl PointData {
    /// g^{ih} ∂_h f.
    pub fn grad_f(&self) -> DVector<f64> {
        &self.g_inv * &self.df
    }

    pub fn inner(&self, u: &DVector<f64>, w: &DVector<f64>) -> f64 {
        u.dot(&(&self.g * w))
    }
}

/// A flow `X` on a semi-Riemannian manifold `(M, g)` with bound parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGeometry {
    pub metric: MetricField,
    pub field: VectorField,
    pub bindings: Bindings,
}

impl FlowGeometry {
    pub fn new(metric: MetricField, field: VectorField, bindings: Bindings) -> Result<Self> {
        if metric.dim() != field.dim() {
            return Err(Error::DimensionMismatch {
                what: "vector field vs metric",
                expected: metric.dim(),
                found: field.dim(),
            });
        }
        Ok(FlowGeometry {
            metric,
            field,
            bindings,
        })
    }

    /// Flat Euclidean space carrying the field `X`.
    pub fn euclidean(field: VectorField, bindings: Bindings) -> Self {
        let metric = MetricField::euclidean(field.dim());
        FlowGeometry {
            metric,
            field,
            bindings,
        }
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "point",
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn field_at(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check_point(x)?;
        self.field.eval(x, &self.bindings)
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        self.metric.eval(x, &self.bindings)
    }

    /// `f = ½ g(X, X)`.
    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        let g = self.metric_at(x)?;
        let v = self.field.eval(x, &self.bindings)?;
        Ok(0.5 * v.dot(&(&g * &v)))
    }

    /// Classify the flow over sample points by the sign of `f`.
    pub fn classify(&self, samples: &[Vec<f64>]) -> Result<Causality> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        let (mut neg, mut zero, mut pos) = (0usize, 0usize, 0usize);
        for x in samples {
            let f = self.energy(x)?;
            if f.abs() <= DEGENERACY_CUTOFF {
                zero += 1;
            } else if f < 0.0 {
                neg += 1;
            } else {
                pos += 1;
            }
        }
        Ok(match (neg > 0, zero > 0, pos > 0) {
            (true, false, false) => Causality::Timelike,
            (false, true, false) => Causality::Null,
            (false, false, true) => Causality::Spacelike,
            (true, true, false) => Causality::Causal,
            _ => Causality::Mixed,
        })
    }

    pub fn metric_jet(&self, x: &[f64]) -> Result<MetricJet> {
        self.check_point(x)?;
        self.metric.jet(x, &self.bindings)
    }

    pub fn christoffel(&self, x: &[f64]) -> Result<ChristoffelAt> {
        christoffel_from_jet(&self.metric_jet(x)?, x)
    }

    /// All pointwise quantities at `x`.
    pub fn point(&self, x: &[f64]) -> Result<PointData> {
        let jet = self.metric_jet(x)?;
        let gamma = christoffel_from_jet(&jet, x)?;
        let g_inv = invert_metric(&jet.g, x)?;
        let (field, jacobian) = self.field.jacobian(x, &self.bindings)?;
        let n = self.dim();

        let mut nabla = jacobian.clone();
        if !gamma.is_zero() {
            nabla += gamma.contract_last(field.as_slice());
        }
        let adjoint = &g_inv * nabla.transpose() * &jet.g;
        let helicity = &nabla - &adjoint;

        let gx = &jet.g * &field;
        let energy = 0.5 * field.dot(&gx);
        // ∂_k f = ½ ∂_k g_ij X^i X^j + g_ij X^i ∂_k X^j
        let df = DVector::from_fn(n, |k, _| {
            0.5 * field.dot(&(&jet.dg[k] * &field)) + gx.dot(&jacobian.column(k))
        });

        Ok(PointData {
            x: x.to_vec(),
            g: jet.g,
            g_inv,
            dg: jet.dg,
            gamma,
            field,
            jacobian,
            nabla,
            adjoint,
            helicity,
            energy,
            df,
        })
    }

    /// `(∇X)^i_j`.
    pub fn nabla_x(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.point(x)?.nabla)
    }

    pub fn helicity(&self, x: &[f64]) -> Result<HelicityAt> {
        let p = self.point(x)?;
        let omega = &p.g * &p.helicity;
        Ok(HelicityAt {
            x: x.to_vec(),
            f: p.helicity,
            omega,
        })
    }

    /// `grad f = g⁻¹ df` with `df` from forward-mode differentiation.
    pub fn grad_f(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok(self.point(x)?.grad_f())
    }

    /// `g⁻¹⊗g(∇X)(X)`, the other side of the grad-f identity.
    pub fn grad_f_via_adjoint(&self, x: &[f64]) -> Result<DVector<f64>> {
        let p = self.point(x)?;
        Ok(&p.adjoint * &p.field)
    }

    /// `(α², g(X, v))` for the semi-Finsler diagnostic; `β = √k · g(X, v)`
    /// for a caller-chosen `k`.
    pub fn finsler_diagnostics(&self, x: &[f64], v: &[f64]) -> Result<(f64, f64)> {
        let g = self.metric_at(x)?;
        let xf = self.field.eval(x, &self.bindings)?;
        let v = DVector::from_column_slice(v);
        Ok((v.dot(&(&g * &v)), xf.dot(&(&g * &v))))
    }

    pub fn jacobi_structure(&self, h0: f64) -> Result<JacobiStructure> {
        if !h0.is_finite() {
            return Err(Error::InvalidArgument(format!("H0 must be finite, got {h0}")));
        }
        Ok(JacobiStructure {
            base: self.clone(),
            h0,
        })
    }
}

/// Flat-space curl of a 2- or 3-dimensional field (2-d fields are embedded
/// in the plane `x3 = 0`).
pub fn curl(jacobian: &DMatrix<f64>) -> Result<[f64; 3]> {
    let j = |i: usize, k: usize| jacobian[(i, k)];
    match jacobian.nrows() {
        2 => Ok([0.0, 0.0, j(1, 0) - j(0, 1)]),
        3 => Ok([
            j(2, 1) - j(1, 2),
            j(0, 2) - j(2, 0),
            j(1, 0) - j(0, 1),
        ]),
        n => Err(Error::InvalidArgument(format!(
            "curl needs dimension 2 or 3, got {n}"
        ))),
    }
}

/// Flat-space divergence `Σ ∂_i X^i`.
pub fn divergence(jacobian: &DMatrix<f64>) -> f64 {
    jacobian.trace()
}

/// Conformally rescaled metric `ḡ = (H₀ + f) g` together with the nonlinear
/// connection `N^i_j = Γ^i_{jk} y^k − F^i_j` of the base metric.
#[derive(Debug, Clone)]
pub struct JacobiStructure {
    base: FlowGeometry,
    h0: f64,
}

impl JacobiStructure {
    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn base(&self) -> &FlowGeometry {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    fn check_factor(&self, x: &[f64], phi: f64) -> Result<f64> {
        let bad = if self.base.metric.signature().is_riemannian() {
            phi <= DEGENERACY_CUTOFF
        } else {
            phi.abs() < DEGENERACY_CUTOFF
        };
        if bad || !phi.is_finite() {
            return Err(Error::DegenerateConformalFactor {
                x: x.to_vec(),
                factor: phi,
            });
        }
        Ok(phi)
    }

    /// `H₀ + f(x)`, validated against the degeneracy band.
    pub fn factor(&self, x: &[f64]) -> Result<f64> {
        let phi = self.h0 + self.base.energy(x)?;
        self.check_factor(x, phi)
    }

    /// Whether `x` lies in the excluded set (degenerate factor or X = 0).
    pub fn is_excluded(&self, x: &[f64]) -> Result<bool> {
        if self.base.field_at(x)?.iter().all(|&c| c == 0.0) {
            return Ok(true);
        }
        Ok(self.factor(x).is_err())
    }

    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let phi = self.factor(x)?;
        Ok(self.base.metric_at(x)? * phi)
    }

    /// `ḡ` and `∂ḡ = ∂φ g + φ ∂g` from the base point data.
    pub fn metric_jet(&self, x: &[f64]) -> Result<MetricJet> {
        let p = self.base.point(x)?;
        self.metric_jet_from(&p)
    }

    fn metric_jet_from(&self, p: &PointData) -> Result<MetricJet> {
        let phi = self.check_factor(&p.x, self.h0 + p.energy)?;
        let g = &p.g * phi;
        let dg = (0..p.x.len())
            .map(|k| &p.g * p.df[k] + &p.dg[k] * phi)
            .collect();
        Ok(MetricJet { g, dg })
    }

    /// Christoffel symbols of `ḡ` through the generic Levi-Civita formula.
    pub fn christoffel(&self, x: &[f64]) -> Result<ChristoffelAt> {
        christoffel_from_jet(&self.metric_jet(x)?, x)
    }

    /// Christoffel symbols of `ḡ = φ g` through the conformal-change formula
    /// `Γ̄^i_{jk} = Γ^i_{jk} + ½φ⁻¹(δ^i_j ∂_kφ + δ^i_k ∂_jφ − g_jk g^{ih} ∂_hφ)`.
    pub fn christoffel_conformal(&self, x: &[f64]) -> Result<ChristoffelAt> {
        let p = self.base.point(x)?;
        let phi = self.check_factor(x, self.h0 + p.energy)?;
        let grad_phi = &p.g_inv * &p.df;
        let n = x.len();
        let mut out = p.gamma.clone();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut c = -p.g[(j, k)] * grad_phi[i];
                    if i == j {
                        c += p.df[k];
                    }
                    if i == k {
                        c += p.df[j];
                    }
                    let v = out.get(i, j, k) + 0.5 * c / phi;
                    out.set(i, j, k, v);
                }
            }
        }
        Ok(out)
    }

    /// `N^i_j = Γ^i_{jk} y^k − F^i_j` (base connection and helicity).
    pub fn nonlinear_connection(&self, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.base.point(x)?;
        Ok(p.gamma.contract_last(y) - p.helicity)
    }

    /// Point data of the base geometry plus the Jacobi Christoffels.
    pub fn point(&self, x: &[f64]) -> Result<(PointData, MetricJet, ChristoffelAt)> {
        let p = self.base.point(x)?;
        let jet = self.metric_jet_from(&p)?;
        let gamma = christoffel_from_jet(&jet, x)?;
        Ok((p, jet, gamma))
    }
}
