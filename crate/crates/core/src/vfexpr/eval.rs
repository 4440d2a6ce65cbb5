use super::ast::{BinOp, Expr, Func};
use super::jet::{Dual, Jet2, Scalar};
use super::{Bindings, ExprError};

impl Expr {
    /// Evaluate at `x` (0-based slice; `x1` is `x[0]`).
    pub fn eval(&self, x: &[f64], bindings: &Bindings) -> Result<f64, ExprError> {
        walk::<f64>(self, x, bindings)
    }

    /// Value and exact gradient at `x`.
    pub fn eval_jet1(&self, x: &[f64], bindings: &Bindings) -> Result<Dual, ExprError> {
        walk::<Dual>(self, x, bindings)
    }

    /// Value, exact gradient and exact symmetric Hessian at `x`.
    pub fn eval_jet2(&self, x: &[f64], bindings: &Bindings) -> Result<Jet2, ExprError> {
        walk::<Jet2>(self, x, bindings)
    }
}

fn domain(reason: &'static str, e: &Expr) -> ExprError {
    ExprError::Domain {
        reason,
        subexpr: e.to_string(),
    }
}

fn walk<S: Scalar>(e: &Expr, x: &[f64], b: &Bindings) -> Result<S, ExprError> {
    let n = x.len();
    Ok(match e {
        Expr::Num(v) => S::constant(*v, n),
        Expr::Pi => S::constant(std::f64::consts::PI, n),
        Expr::Var(i) => {
            if *i == 0 || *i > n {
                return Err(ExprError::IndexOutOfRange { index: *i, dim: n });
            }
            S::variable(x[i - 1], i - 1, n)
        }
        Expr::Param(p) => {
            let v = b
                .get(p)
                .ok_or_else(|| ExprError::UnboundParameter(p.clone()))?;
            S::constant(v, n)
        }
        Expr::Neg(a) => walk::<S>(a, x, b)?.neg(),
        Expr::Bin(op, l, r) => {
            let lv = walk::<S>(l, x, b)?;
            let rv = walk::<S>(r, x, b)?;
            match op {
                BinOp::Add => lv.add(&rv),
                BinOp::Sub => lv.sub(&rv),
                BinOp::Mul => lv.mul(&rv),
                BinOp::Div => {
                    let d = rv.value();
                    if d == 0.0 {
                        return Err(domain("division by zero", e));
                    }
                    lv.mul(&rv.chain(1.0 / d, -1.0 / (d * d), 2.0 / (d * d * d)))
                }
            }
        }
        Expr::Pow(base, k) => {
            let u = walk::<S>(base, x, b)?;
            let v = u.value();
            let k = *k as i32;
            let d1 = if k >= 1 { k as f64 * v.powi(k - 1) } else { 0.0 };
            let d2 = if k >= 2 {
                (k * (k - 1)) as f64 * v.powi(k - 2)
            } else {
                0.0
            };
            u.chain(v.powi(k), d1, d2)
        }
        Expr::Call(func, arg) => {
            let u = walk::<S>(arg, x, b)?;
            let v = u.value();
            match func {
                Func::Sin => u.chain(v.sin(), v.cos(), -v.sin()),
                Func::Cos => u.chain(v.cos(), -v.sin(), -v.cos()),
                Func::Tan => {
                    let t = v.tan();
                    let sec2 = 1.0 + t * t;
                    u.chain(t, sec2, 2.0 * t * sec2)
                }
                Func::Exp => {
                    let ev = v.exp();
                    u.chain(ev, ev, ev)
                }
                Func::Log => {
                    if v <= 0.0 {
                        return Err(domain("log of non-positive argument", e));
                    }
                    u.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
                }
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(domain("sqrt of negative argument", e));
                    }
                    if S::DIFFERENTIATES && v == 0.0 {
                        return Err(domain("sqrt is not differentiable at zero", e));
                    }
                    let s = v.sqrt();
                    if S::DIFFERENTIATES {
                        u.chain(s, 0.5 / s, -0.25 / (s * v))
                    } else {
                        u.chain(s, 0.0, 0.0)
                    }
                }
                Func::Abs => {
                    let sign = if v > 0.0 {
                        1.0
                    } else if v < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    u.chain(v.abs(), sign, 0.0)
                }
            }
        }
    })
}
