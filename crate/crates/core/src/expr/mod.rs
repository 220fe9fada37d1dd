//! Expression language for invariant functions on a chart.
//!
//! Grammar: `+ -` (left-assoc) < `* /` (left-assoc) < unary `-` < `^` with an
//! integer literal exponent. Atoms are numbers, `pi`, variables `x1..xn`,
//! parenthesized expressions and `sin( )`, `cos( )`, `exp( )`, `sqrt( )`.
//!
//! Derivatives are exact forward-mode through [`HyperDual`] numbers.

mod dual;
mod invariance;
mod parse;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use dual::HyperDual;
pub use invariance::{check_invariance, InvarianceReport};

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier '{name}' at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("variable '{name}' at {pos} is outside x1..x{dim}")]
    VariableOutOfRange { name: String, dim: usize, pos: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point has dimension {found}, expression expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Syntax tree. Variables are stored 0-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) | Expr::Pi => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn eval<T: Scalar>(&self, x: &[HyperDual<T>]) -> Result<HyperDual<T>, ExprError> {
        Ok(match self {
            Expr::Num(v) => HyperDual::constant(T::of(*v)),
            Expr::Pi => HyperDual::constant(T::pi()),
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                a.eval(x)?.checked_div(d).ok_or_else(|| ExprError::Domain(format!("division by zero in '{self}'")))?
            }
            Expr::Pow(a, k) => a
                .eval(x)?
                .powi(*k)
                .ok_or_else(|| ExprError::Domain(format!("zero raised to negative power in '{self}'")))?,
            Expr::Call(f, a) => {
                let v = a.eval(x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Sqrt => {
                        v.sqrt().ok_or_else(|| ExprError::Domain(format!("sqrt outside its domain in '{self}'")))?
                    }
                }
            }
        })
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Pi => write!(f, "pi"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_operand(f, a, a.precedence() < 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let op = if matches!(self, Expr::Add(..)) { " + " } else { " - " };
                write_operand(f, a, a.precedence() < 1)?;
                write!(f, "{op}")?;
                write_operand(f, b, b.precedence() <= 1)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = if matches!(self, Expr::Mul(..)) { "*" } else { "/" };
                write_operand(f, a, a.precedence() < 2)?;
                write!(f, "{op}")?;
                write_operand(f, b, b.precedence() <= 2)
            }
            Expr::Pow(a, k) => {
                write_operand(f, a, a.precedence() < 5)?;
                if *k < 0 {
                    write!(f, "^({k})")
                } else {
                    write!(f, "^{k}")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed function of `dim` chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    root: Expr,
    dim: usize,
}

impl Expression {
    pub fn parse(text: &str, dim: usize) -> Result<Self, ExprError> {
        let root = parse::Parser::parse(text, dim)?;
        Ok(Self { root, dim })
    }

    /// Wraps an existing tree; fails if it mentions a variable beyond `dim`.
    pub fn from_tree(root: Expr, dim: usize) -> Result<Self, ExprError> {
        if let Some(i) = root.max_var() {
            if i >= dim {
                return Err(ExprError::VariableOutOfRange { name: format!("x{}", i + 1), dim, pos: 0 });
            }
        }
        Ok(Self { root, dim })
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_dim(&self, n: usize) -> Result<(), ExprError> {
        if n != self.dim {
            return Err(ExprError::DimensionMismatch { expected: self.dim, found: n });
        }
        Ok(())
    }

    fn eval_seeded<T: Scalar>(
        &self,
        x: &DVector<T>,
        i: Option<usize>,
        j: Option<usize>,
    ) -> Result<HyperDual<T>, ExprError> {
        let point: Vec<HyperDual<T>> = x
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let e1 = if Some(k) == i { T::one() } else { T::zero() };
                let e2 = if Some(k) == j { T::one() } else { T::zero() };
                HyperDual::seeded(v, e1, e2)
            })
            .collect();
        let r = self.root.eval(&point)?;
        if !r.is_finite() {
            return Err(ExprError::Domain(format!("non-finite result of '{}'", self.root)));
        }
        Ok(r)
    }

    pub fn eval<T: Scalar>(&self, x: &DVector<T>) -> Result<T, ExprError> {
        self.check_dim(x.len())?;
        Ok(self.eval_seeded(x, None, None)?.re)
    }

    pub fn value_and_gradient<T: Scalar>(&self, x: &DVector<T>) -> Result<(T, DVector<T>), ExprError> {
        self.check_dim(x.len())?;
        if self.dim == 0 {
            return Ok((self.eval_seeded(x, None, None)?.re, DVector::zeros(0)));
        }
        let mut grad = DVector::zeros(self.dim);
        let mut value = T::zero();
        for i in 0..self.dim {
            let r = self.eval_seeded(x, Some(i), None)?;
            grad[i] = r.e1;
            value = r.re;
        }
        Ok((value, grad))
    }

    pub fn gradient<T: Scalar>(&self, x: &DVector<T>) -> Result<DVector<T>, ExprError> {
        Ok(self.value_and_gradient(x)?.1)
    }

    /// Value, gradient and Hessian; the Hessian is symmetric by construction.
    pub fn value_gradient_hessian<T: Scalar>(&self, x: &DVector<T>) -> Result<(T, DVector<T>, DMatrix<T>), ExprError> {
        self.check_dim(x.len())?;
        let n = self.dim;
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        let mut value = self.eval_seeded(x, None, None)?.re;
        for i in 0..n {
            for j in i..n {
                let r = self.eval_seeded(x, Some(i), Some(j))?;
                hess[(i, j)] = r.e12;
                hess[(j, i)] = r.e12;
                if i == j {
                    grad[i] = r.e1;
                }
                value = r.re;
            }
        }
        Ok((value, grad, hess))
    }

    pub fn hessian<T: Scalar>(&self, x: &DVector<T>) -> Result<DMatrix<T>, ExprError> {
        Ok(self.value_gradient_hessian(x)?.2)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
