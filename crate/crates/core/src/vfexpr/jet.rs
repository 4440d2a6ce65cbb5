//! Forward-mode jets used to differentiate expression trees exactly.
//!
//! [`Dual`] carries the value and gradient; [`Jet2`] additionally carries the
//! Hessian. Every elementary function is applied through [`Scalar::chain`],
//! which takes the outer function's value and first two derivatives at the
//! inner value.

/// Arithmetic needed by the generic evaluator.
pub(crate) trait Scalar: Clone {
    fn constant(c: f64, dim: usize) -> Self;
    fn variable(value: f64, index: usize, dim: usize) -> Self;
    fn value(&self) -> f64;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Composition `phi(self)` given `phi`, `phi'` and `phi''` at `self.value()`.
    fn chain(&self, d0: f64, d1: f64, d2: f64) -> Self;
    /// Whether derivatives are being propagated.
    const DIFFERENTIATES: bool;
}

impl Scalar for f64 {
    const DIFFERENTIATES: bool = false;

    fn constant(c: f64, _dim: usize) -> Self {
        c
    }
    fn variable(value: f64, _index: usize, _dim: usize) -> Self {
        value
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn chain(&self, d0: f64, _d1: f64, _d2: f64) -> Self {
        d0
    }
}

/// Value and gradient at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Scalar for Dual {
    const DIFFERENTIATES: bool = true;

    fn constant(c: f64, dim: usize) -> Self {
        Dual {
            value: c,
            grad: vec![0.0; dim],
        }
    }
    fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut grad = vec![0.0; dim];
        grad[index] = 1.0;
        Dual { value, grad }
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(&self, rhs: &Self) -> Self {
        Dual {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        Dual {
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
        }
    }
    fn mul(&self, rhs: &Self) -> Self {
        Dual {
            value: self.value * rhs.value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| self.value * b + rhs.value * a)
                .collect(),
        }
    }
    fn neg(&self) -> Self {
        Dual {
            value: -self.value,
            grad: self.grad.iter().map(|a| -a).collect(),
        }
    }
    fn chain(&self, d0: f64, d1: f64, _d2: f64) -> Self {
        Dual {
            value: d0,
            grad: self.grad.iter().map(|a| d1 * a).collect(),
        }
    }
}

/// Value, gradient and Hessian at a point.
///
/// The Hessian is stored row-major; entries are computed for `j <= k` and
/// mirrored, so `hess(j, k) == hess(k, j)` holds bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    hess: Vec<f64>,
}

impl Jet2 {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess(&self, j: usize, k: usize) -> f64 {
        self.hess[j * self.dim() + k]
    }

    /// Hessian as nested rows.
    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|j| self.hess[j * n..(j + 1) * n].to_vec()).collect()
    }

    fn build(value: f64, grad: Vec<f64>, mut entry: impl FnMut(usize, usize) -> f64) -> Self {
        let n = grad.len();
        let mut hess = vec![0.0; n * n];
        for j in 0..n {
            for k in j..n {
                let h = entry(j, k);
                hess[j * n + k] = h;
                hess[k * n + j] = h;
            }
        }
        Jet2 { value, grad, hess }
    }
}

impl Scalar for Jet2 {
    const DIFFERENTIATES: bool = true;

    fn constant(c: f64, dim: usize) -> Self {
        Jet2 {
            value: c,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }
    fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut jet = Jet2::constant(value, dim);
        jet.grad[index] = 1.0;
        jet
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn add(&self, rhs: &Self) -> Self {
        Jet2 {
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        Jet2 {
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a - b).collect(),
        }
    }
    fn mul(&self, rhs: &Self) -> Self {
        let (u, w) = (self.value, rhs.value);
        let grad = self
            .grad
            .iter()
            .zip(&rhs.grad)
            .map(|(a, b)| u * b + w * a)
            .collect();
        Jet2::build(u * w, grad, |j, k| {
            u * rhs.hess(j, k)
                + w * self.hess(j, k)
                + self.grad[j] * rhs.grad[k]
                + self.grad[k] * rhs.grad[j]
        })
    }
    fn neg(&self) -> Self {
        Jet2 {
            value: -self.value,
            grad: self.grad.iter().map(|a| -a).collect(),
            hess: self.hess.iter().map(|a| -a).collect(),
        }
    }
    fn chain(&self, d0: f64, d1: f64, d2: f64) -> Self {
        let grad = self.grad.iter().map(|a| d1 * a).collect();
        Jet2::build(d0, grad, |j, k| {
            d1 * self.hess(j, k) + d2 * self.grad[j] * self.grad[k]
        })
    }
}
