//! The value domain: each variable is a known integer or ⊤.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::lang::ast::{BinOp, Expr, UnOp, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AbsValue {
    Known(BigInt),
    Top,
}

impl AbsValue {
    pub fn known(v: i64) -> AbsValue {
        AbsValue::Known(BigInt::from(v))
    }

    fn bool(b: bool) -> AbsValue {
        AbsValue::Known(if b { BigInt::one() } else { BigInt::zero() })
    }

    /// `Some(truth)` when the value is known.
    pub fn truth(&self) -> Option<bool> {
        match self {
            AbsValue::Known(v) => Some(!v.is_zero()),
            AbsValue::Top => None,
        }
    }

    pub fn subsumes(&self, other: &AbsValue) -> bool {
        matches!(self, AbsValue::Top) || self == other
    }
}

impl fmt::Display for AbsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbsValue::Known(v) => write!(f, "{v}"),
            AbsValue::Top => f.write_str("⊤"),
        }
    }
}

/// Partial map from variables to abstract values. Reading a variable that
/// has no binding yet yields 0, matching zero-initialized declarations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Valuation(Vec<Option<AbsValue>>);

impl Valuation {
    pub fn new(num_vars: usize) -> Self {
        Valuation(vec![None; num_vars])
    }

    pub fn get(&self, var: VarId) -> Option<&AbsValue> {
        self.0.get(var.index()).and_then(Option::as_ref)
    }

    pub fn read(&self, var: VarId) -> AbsValue {
        self.get(var).cloned().unwrap_or_else(|| AbsValue::known(0))
    }

    pub fn set(&mut self, var: VarId, value: AbsValue) {
        if self.0.len() <= var.index() {
            self.0.resize(var.index() + 1, None);
        }
        self.0[var.index()] = Some(value);
    }

    pub fn bindings(&self) -> impl Iterator<Item = (VarId, &AbsValue)> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_ref().map(|v| (VarId(i as u32), v)))
    }

    pub fn is_concrete(&self) -> bool {
        self.0.iter().flatten().all(|v| matches!(v, AbsValue::Known(_)))
    }

    /// Every concrete state described by `other` is described by `self`.
    pub fn subsumes(&self, other: &Valuation) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => a.subsumes(b),
                (None, None) => true,
                _ => false,
            })
    }
}

/// Evaluates `expr`. Each `nondet()` occurrence, left to right, takes the
/// next value from `nondet`.
pub fn eval(expr: &Expr, env: &Valuation, nondet: &mut dyn FnMut() -> AbsValue) -> AbsValue {
    match expr {
        Expr::Int(v) => AbsValue::Known(v.clone()),
        Expr::Var(v) => env.read(*v),
        Expr::Nondet => nondet(),
        Expr::Unary(op, e) => match (op, eval(e, env, nondet)) {
            (_, AbsValue::Top) => AbsValue::Top,
            (UnOp::Neg, AbsValue::Known(v)) => AbsValue::Known(-v),
            (UnOp::Not, AbsValue::Known(v)) => AbsValue::bool(v.is_zero()),
        },
        Expr::Binary(op, l, r) => {
            // both sides are always evaluated so nondet occurrences stay syntactic
            let lv = eval(l, env, nondet);
            let rv = eval(r, env, nondet);
            binary(*op, lv, rv)
        }
    }
}

fn binary(op: BinOp, lv: AbsValue, rv: AbsValue) -> AbsValue {
    // absorbing elements of the logical operators decide regardless of ⊤
    match op {
        BinOp::And if lv.truth() == Some(false) || rv.truth() == Some(false) => {
            return AbsValue::bool(false)
        }
        BinOp::Or if lv.truth() == Some(true) || rv.truth() == Some(true) => {
            return AbsValue::bool(true)
        }
        _ => {}
    }
    let (AbsValue::Known(a), AbsValue::Known(b)) = (lv, rv) else {
        return AbsValue::Top;
    };
    AbsValue::Known(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        // truncating division, total: x / 0 = 0 and x % 0 = x
        BinOp::Div if b.is_zero() => BigInt::zero(),
        BinOp::Div => a / b,
        BinOp::Rem if b.is_zero() => a,
        BinOp::Rem => a % b,
        BinOp::Lt => return AbsValue::bool(a < b),
        BinOp::Le => return AbsValue::bool(a <= b),
        BinOp::Gt => return AbsValue::bool(a > b),
        BinOp::Ge => return AbsValue::bool(a >= b),
        BinOp::Eq => return AbsValue::bool(a == b),
        BinOp::Ne => return AbsValue::bool(a != b),
        BinOp::And => return AbsValue::bool(!a.is_zero() && !b.is_zero()),
        BinOp::Or => return AbsValue::bool(!a.is_zero() || !b.is_zero()),
    })
}

/// For a guard of the shape `v == c`, `c == v` or `!(v != c)` with `c`
/// nondet-free, returns the variable and the bound expression.
pub fn equality_binding(guard: &Expr) -> Option<(VarId, &Expr)> {
    let (l, r) = match guard {
        Expr::Binary(BinOp::Eq, l, r) => (l, r),
        Expr::Unary(UnOp::Not, inner) => match inner.as_ref() {
            Expr::Binary(BinOp::Ne, l, r) => (l, r),
            _ => return None,
        },
        _ => return None,
    };
    match (l.as_ref(), r.as_ref()) {
        (Expr::Var(v), c) | (c, Expr::Var(v)) if c.nondet_count() == 0 && !matches!(c, Expr::Var(w) if w == v) => {
            Some((*v, c))
        }
        _ => None,
    }
}
