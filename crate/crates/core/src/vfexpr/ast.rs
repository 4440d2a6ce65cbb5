use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Binary arithmetic operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Built-in scalar functions callable as `name(expr)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree for a scalar function of the coordinates `x1..xn`.
///
/// Variables are stored with the 1-based index used in the source text.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Param(String),
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Integer power; the exponent is always a non-negative literal.
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(value: f64) -> Expr {
        Expr::Num(value)
    }

    /// Coordinate `x<index>` (1-based).
    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Param(name.into())
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Box::new(arg))
    }

    pub fn powi(self, exponent: u32) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    /// Largest variable index referenced, 0 if none.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Var(i) => *i,
            Expr::Num(_) | Expr::Param(_) | Expr::Pi => 0,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.max_var(),
            Expr::Bin(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Names of all parameters referenced, in order of first appearance.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            Expr::Num(_) | Expr::Var(_) | Expr::Pi => {}
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.collect_params(out),
            Expr::Bin(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// True when the expression contains no variables (its value does not
    /// depend on the point).
    pub fn is_point_independent(&self) -> bool {
        self.max_var() == 0
    }

    /// Literal value, if the node is a bare number (or a negated one).
    pub fn as_literal(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            Expr::Neg(e) => e.as_literal().map(|v| -v),
            _ => None,
        }
    }

    /// Nodes whose printed form is already a grammar atom. Binary nodes
    /// print their own parentheses.
    fn is_atomic(&self) -> bool {
        matches!(
            self,
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) | Expr::Pi | Expr::Call(..) | Expr::Bin(..)
        )
    }
}

impl fmt::Display for Expr {
    /// Prints a form that parses back to a structurally identical tree.
    ///
    /// Binary nodes are fully parenthesized; unary minus and `^` follow the
    /// grammar (`unary := '-'? atom`, `factor := unary ('^' integer)?`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Param(p) => f.write_str(p),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(e) => {
                if e.is_atomic() {
                    write!(f, "-{e}")
                } else {
                    write!(f, "-({e})")
                }
            }
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(base, k) => {
                if base.is_atomic() || matches!(**base, Expr::Neg(_)) {
                    write!(f, "{base}^{k}")
                } else {
                    write!(f, "({base})^{k}")
                }
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

macro_rules! impl_bin {
    ($trait:ident, $method:ident, $op:expr) => {
        impl $trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::Bin($op, Box::new(self), Box::new(rhs))
            }
        }
    };
}

impl_bin!(Add, add, BinOp::Add);
impl_bin!(Sub, sub, BinOp::Sub);
impl_bin!(Mul, mul, BinOp::Mul);
impl_bin!(Div, div, BinOp::Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}
