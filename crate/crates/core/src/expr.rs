//! Typed values, the guard/update expression language and its evaluator.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, Zero};
use thiserror::Error;

use crate::model::Ident;

/// Rational numbers back `real` variables so solver models round-trip exactly.
pub type Rational = Rational64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Real,
    Bool,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Int => "int",
            Type::Real => "real",
            Type::Bool => "bool",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Real(Rational),
    Bool(bool),
}

impl Value {
    pub fn ty(&self) -> Type {
        match self {
            Value::Int(_) => Type::Int,
            Value::Real(_) => Type::Real,
            Value::Bool(_) => Type::Bool,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// The zero value of a type; used for solver don't-cares.
    pub fn default_of(ty: Type) -> Value {
        match ty {
            Type::Int => Value::Int(0),
            Type::Real => Value::Real(Rational::zero()),
            Type::Bool => Value::Bool(false),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Real(r) if r.is_integer() => write!(f, "{}.0", r.numer()),
            Value::Real(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

/// Real literals in source form: `2.0`, or `n.0 / d.0` which the parser folds back.
fn fmt_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}.0", r.numer())
    } else {
        write!(f, "{}.0 / {}.0", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength used by the parser and the printer.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Eq | BinOp::Ne | BinOp::Ge | BinOp::Gt => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Eq | BinOp::Ne | BinOp::Ge | BinOp::Gt
        )
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Int(i64),
    Real(Rational),
    Bool(bool),
    Var(Ident),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn tt() -> Expr {
        Expr::Bool(true)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(Ident::new_unchecked(name))
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn and(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::And, lhs, rhs)
    }

    pub fn or(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Or, lhs, rhs)
    }

    pub fn ne(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Ne, lhs, rhs)
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Expr::Bool(true))
    }

    /// Folds a list with `||`; an empty list gives `false`.
    pub fn disjunction(items: impl IntoIterator<Item = Expr>) -> Expr {
        items
            .into_iter()
            .reduce(Expr::or)
            .unwrap_or(Expr::Bool(false))
    }

    pub fn free_vars(&self) -> Vec<&Ident> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a Ident>) {
        match self {
            Expr::Var(v) => {
                if !out.contains(&v) {
                    out.push(v)
                }
            }
            Expr::Neg(e) | Expr::Not(e) => e.collect_vars(out),
            Expr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Int(_) | Expr::Real(_) | Expr::Bool(_) => {}
        }
    }

    /// True when the expression contains no variable.
    pub fn is_constant(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Multiplication needs a constant factor and division a constant divisor.
    pub fn is_linear(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::Real(_) | Expr::Bool(_) | Expr::Var(_) => true,
            Expr::Neg(e) | Expr::Not(e) => e.is_linear(),
            Expr::Bin(BinOp::Mul, l, r) => {
                l.is_linear() && r.is_linear() && (l.is_constant() || r.is_constant())
            }
            Expr::Bin(BinOp::Div, l, r) => l.is_linear() && r.is_constant(),
            Expr::Bin(_, l, r) => l.is_linear() && r.is_linear(),
        }
    }

    /// Replaces variables by expressions; variables not in `subst` stay.
    pub fn substitute(&self, subst: &BTreeMap<Ident, Expr>) -> Expr {
        match self {
            Expr::Var(v) => subst.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(subst))),
            Expr::Not(e) => Expr::Not(Box::new(e.substitute(subst))),
            Expr::Bin(op, l, r) => Expr::bin(*op, l.substitute(subst), r.substitute(subst)),
            Expr::Int(_) | Expr::Real(_) | Expr::Bool(_) => self.clone(),
        }
    }

    /// Infers the type, looking variable types up through `lookup`.
    pub fn type_of(&self, lookup: &dyn Fn(&Ident) -> Option<Type>) -> Result<Type, EvalError> {
        match self {
            Expr::Int(_) => Ok(Type::Int),
            Expr::Real(_) => Ok(Type::Real),
            Expr::Bool(_) => Ok(Type::Bool),
            Expr::Var(v) => lookup(v).ok_or_else(|| EvalError::Unbound(v.clone())),
            Expr::Neg(e) => match e.type_of(lookup)? {
                t @ (Type::Int | Type::Real) => Ok(t),
                t => Err(EvalError::TypeMismatch(format!("cannot negate a {t} operand"))),
            },
            Expr::Not(e) => match e.type_of(lookup)? {
                Type::Bool => Ok(Type::Bool),
                t => Err(EvalError::TypeMismatch(format!("`!` expects bool, found {t}"))),
            },
            Expr::Bin(op, l, r) => {
                let lt = l.type_of(lookup)?;
                let rt = r.type_of(lookup)?;
                if lt != rt {
                    return Err(EvalError::TypeMismatch(format!(
                        "operands of `{}` have types {lt} and {rt}",
                        op.symbol()
                    )));
                }
                match op {
                    BinOp::And | BinOp::Or => {
                        if lt == Type::Bool {
                            Ok(Type::Bool)
                        } else {
                            Err(EvalError::TypeMismatch(format!(
                                "`{}` expects bool operands, found {lt}",
                                op.symbol()
                            )))
                        }
                    }
                    BinOp::Eq | BinOp::Ne => Ok(Type::Bool),
                    _ if op.is_comparison() => {
                        if lt == Type::Bool {
                            Err(EvalError::TypeMismatch(format!(
                                "`{}` expects numeric operands",
                                op.symbol()
                            )))
                        } else {
                            Ok(Type::Bool)
                        }
                    }
                    BinOp::Div if lt != Type::Real => Err(EvalError::TypeMismatch(
                        "`/` is only defined on real operands".into(),
                    )),
                    _ => {
                        if lt == Type::Bool {
                            Err(EvalError::TypeMismatch(format!(
                                "`{}` expects numeric operands",
                                op.symbol()
                            )))
                        } else {
                            Ok(lt)
                        }
                    }
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, outer: u8) -> fmt::Result {
    match e {
        Expr::Int(i) if *i < 0 => write!(f, "({i})"),
        Expr::Int(i) => write!(f, "{i}"),
        Expr::Real(r) if r.is_negative() || !r.is_integer() => {
            f.write_str("(")?;
            fmt_rational(f, r)?;
            f.write_str(")")
        }
        Expr::Real(r) => fmt_rational(f, r),
        Expr::Bool(b) => write!(f, "{b}"),
        Expr::Var(v) => write!(f, "{v}"),
        Expr::Neg(inner) => {
            f.write_str("-")?;
            if matches!(**inner, Expr::Int(_) | Expr::Real(_)) {
                // `-3` would read back as a literal
                write!(f, "({inner})")
            } else {
                write_expr(f, inner, 6)
            }
        }
        Expr::Not(inner) => {
            f.write_str("!")?;
            write_expr(f, inner, 6)
        }
        Expr::Bin(op, l, r) => {
            let p = op.precedence();
            let paren = p < outer;
            if paren {
                f.write_str("(")?;
            }
            // left-associative, comparisons do not chain
            let left_min = if op.is_comparison() { p + 1 } else { p };
            write_expr(f, l, left_min)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, r, p + 1)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Ident),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("arithmetic overflow in `{0}`")]
    Overflow(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("assignment target `{0}` is not a declared variable")]
    UnknownTarget(Ident),
}

/// Read access to a variable valuation.
pub trait Env {
    fn lookup(&self, name: &Ident) -> Option<Value>;
}

impl Env for BTreeMap<Ident, Value> {
    fn lookup(&self, name: &Ident) -> Option<Value> {
        self.get(name).copied()
    }
}

pub fn eval_expr(e: &Expr, env: &dyn Env) -> Result<Value, EvalError> {
    match e {
        Expr::Int(i) => Ok(Value::Int(*i)),
        Expr::Real(r) => Ok(Value::Real(*r)),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Var(v) => env.lookup(v).ok_or_else(|| EvalError::Unbound(v.clone())),
        Expr::Neg(inner) => match eval_expr(inner, env)? {
            Value::Int(i) => i
                .checked_neg()
                .map(Value::Int)
                .ok_or_else(|| EvalError::Overflow(e.to_string())),
            Value::Real(r) => Ok(Value::Real(-r)),
            Value::Bool(_) => Err(EvalError::TypeMismatch("cannot negate a bool".into())),
        },
        Expr::Not(inner) => match eval_expr(inner, env)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            v => Err(EvalError::TypeMismatch(format!(
                "`!` expects bool, found {}",
                v.ty()
            ))),
        },
        Expr::Bin(BinOp::And, l, r) => {
            let lv = expect_bool(eval_expr(l, env)?)?;
            let rv = expect_bool(eval_expr(r, env)?)?;
            Ok(Value::Bool(lv && rv))
        }
        Expr::Bin(BinOp::Or, l, r) => {
            let lv = expect_bool(eval_expr(l, env)?)?;
            let rv = expect_bool(eval_expr(r, env)?)?;
            Ok(Value::Bool(lv || rv))
        }
        Expr::Bin(op, l, r) => {
            let lv = eval_expr(l, env)?;
            let rv = eval_expr(r, env)?;
            eval_binary(*op, lv, rv).map_err(|err| match err {
                EvalError::Overflow(_) => EvalError::Overflow(e.to_string()),
                other => other,
            })
        }
    }
}

fn expect_bool(v: Value) -> Result<bool, EvalError> {
    v.as_bool().ok_or_else(|| {
        EvalError::TypeMismatch(format!("expected bool operand, found {}", v.ty()))
    })
}

fn eval_binary(op: BinOp, lv: Value, rv: Value) -> Result<Value, EvalError> {
    let overflow = || EvalError::Overflow(String::new());
    match (lv, rv) {
        (Value::Int(a), Value::Int(b)) => match op {
            BinOp::Add => a.checked_add(b).map(Value::Int).ok_or_else(overflow),
            BinOp::Sub => a.checked_sub(b).map(Value::Int).ok_or_else(overflow),
            BinOp::Mul => a.checked_mul(b).map(Value::Int).ok_or_else(overflow),
            BinOp::Div => Err(EvalError::TypeMismatch(
                "`/` is only defined on real operands".into(),
            )),
            _ => Ok(Value::Bool(compare(op, a.cmp(&b)))),
        },
        (Value::Real(a), Value::Real(b)) => match op {
            BinOp::Add => a.checked_add(&b).map(Value::Real).ok_or_else(overflow),
            BinOp::Sub => a.checked_sub(&b).map(Value::Real).ok_or_else(overflow),
            BinOp::Mul => a.checked_mul(&b).map(Value::Real).ok_or_else(overflow),
            BinOp::Div => {
                if b.is_zero() {
                    Err(EvalError::DivisionByZero)
                } else {
                    Ok(Value::Real(a / b))
                }
            }
            _ => Ok(Value::Bool(compare(op, a.cmp(&b)))),
        },
        (Value::Bool(a), Value::Bool(b)) => match op {
            BinOp::Eq => Ok(Value::Bool(a == b)),
            BinOp::Ne => Ok(Value::Bool(a != b)),
            _ => Err(EvalError::TypeMismatch(format!(
                "`{}` is not defined on bool operands",
                op.symbol()
            ))),
        },
        (a, b) => Err(EvalError::TypeMismatch(format!(
            "operands of `{}` have types {} and {}",
            op.symbol(),
            a.ty(),
            b.ty()
        ))),
    }
}

fn compare(op: BinOp, ord: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        BinOp::Lt => ord == Less,
        BinOp::Le => ord != Greater,
        BinOp::Eq => ord == Equal,
        BinOp::Ne => ord != Equal,
        BinOp::Ge => ord != Less,
        BinOp::Gt => ord == Greater,
        _ => unreachable!("not a comparison: {op:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, Value)]) -> BTreeMap<Ident, Value> {
        pairs
            .iter()
            .map(|(k, v)| (Ident::new_unchecked(*k), *v))
            .collect()
    }

    #[test]
    fn arithmetic_and_constants() {
        let x1 = env(&[("x", Value::Int(1))]);
        let plus = Expr::bin(BinOp::Add, Expr::var("x"), Expr::Int(1));
        assert_eq!(eval_expr(&plus, &x1), Ok(Value::Int(2)));
        assert_eq!(eval_expr(&Expr::tt(), &x1), Ok(Value::Bool(true)));
        let x0 = env(&[("x", Value::Int(0))]);
        let minus = Expr::bin(BinOp::Sub, Expr::var("x"), Expr::Int(1));
        assert_eq!(eval_expr(&minus, &x0), Ok(Value::Int(-1)));
    }

    #[test]
    fn errors_are_reported() {
        let empty = env(&[]);
        assert!(matches!(
            eval_expr(&Expr::var("y"), &empty),
            Err(EvalError::Unbound(_))
        ));
        let b = env(&[("b", Value::Bool(true))]);
        let bad = Expr::bin(BinOp::Add, Expr::var("b"), Expr::Int(1));
        assert!(matches!(eval_expr(&bad, &b), Err(EvalError::TypeMismatch(_))));
        let big = env(&[("x", Value::Int(i64::MAX))]);
        let ovf = Expr::bin(BinOp::Add, Expr::var("x"), Expr::Int(1));
        assert!(matches!(eval_expr(&ovf, &big), Err(EvalError::Overflow(_))));
    }

    #[test]
    fn reals_are_exact() {
        let half = Rational::new(1, 2);
        let e = Expr::bin(BinOp::Add, Expr::Real(half), Expr::Real(half));
        assert_eq!(eval_expr(&e, &env(&[])), Ok(Value::Real(Rational::from_integer(1))));
        let third = Expr::bin(BinOp::Div, Expr::Real(Rational::from_integer(1)), Expr::Real(Rational::from_integer(3)));
        assert_eq!(eval_expr(&third, &env(&[])), Ok(Value::Real(Rational::new(1, 3))));
    }

    #[test]
    fn linearity() {
        let xy = Expr::bin(BinOp::Mul, Expr::var("x"), Expr::var("y"));
        assert!(!xy.is_linear());
        let two_x = Expr::bin(BinOp::Mul, Expr::Int(2), Expr::var("x"));
        assert!(two_x.is_linear());
    }

    #[test]
    fn display_parenthesizes() {
        let e = Expr::bin(
            BinOp::Sub,
            Expr::var("x"),
            Expr::bin(BinOp::Sub, Expr::var("y"), Expr::Int(1)),
        );
        assert_eq!(e.to_string(), "x - (y - 1)");
        let g = Expr::and(
            Expr::tt(),
            Expr::or(
                Expr::ne(Expr::var("p_A0"), Expr::Int(4)),
                Expr::ne(Expr::var("p_A1"), Expr::Int(5)),
            ),
        );
        assert_eq!(g.to_string(), "true && (p_A0 != 4 || p_A1 != 5)");
    }
}
