//! Pretty-printer emitting text that parses back to an equal-valued tree.
//!
//! Parentheses are inserted only where the grammar needs them. The right
//! operand of `+` and `*` is parenthesized at equal precedence too, so the
//! printed form preserves the tree shape. Absolute values print as
//! `abs(..)` so printed coefficients can sit inside `|`-separated lists.

use std::fmt::{self, Write};

use super::Expr;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => SUM,
        Expr::Mul(..) | Expr::Div(..) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::Const(c) if c.is_sign_negative() && *c != 0.0 => UNARY,
        Expr::Pow(..) => POWER,
        _ => ATOM,
    }
}

pub(super) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    write_at(f, e, SUM)
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    let parens = precedence(e) < min;
    if parens {
        f.write_char('(')?;
    }
    match e {
        Expr::Const(c) => write_number(f, *c)?,
        Expr::Var(name) => f.write_str(name)?,
        Expr::Neg(a) => {
            f.write_char('-')?;
            write_at(f, a, UNARY)?;
        }
        Expr::Add(a, b) => binary(f, a, " + ", b, SUM)?,
        Expr::Sub(a, b) => binary(f, a, " - ", b, SUM)?,
        Expr::Mul(a, b) => binary(f, a, "*", b, PRODUCT)?,
        Expr::Div(a, b) => binary(f, a, "/", b, PRODUCT)?,
        Expr::Pow(a, b) => {
            write_at(f, a, ATOM)?;
            f.write_char('^')?;
            write_at(f, b, UNARY)?;
        }
        Expr::Abs(a) => call(f, "abs", a)?,
        Expr::Exp(a) => call(f, "exp", a)?,
        Expr::Ln(a) => call(f, "ln", a)?,
        Expr::Sin(a) => call(f, "sin", a)?,
        Expr::Cos(a) => call(f, "cos", a)?,
        Expr::Sqrt(a) => call(f, "sqrt", a)?,
    }
    if parens {
        f.write_char(')')?;
    }
    Ok(())
}

fn binary(f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr, level: u8) -> fmt::Result {
    write_at(f, a, level)?;
    f.write_str(op)?;
    write_at(f, b, level + 1)
}

fn call(f: &mut fmt::Formatter<'_>, name: &str, arg: &Expr) -> fmt::Result {
    f.write_str(name)?;
    f.write_char('(')?;
    write_at(f, arg, SUM)?;
    f.write_char(')')
}

/// Shortest round-tripping decimal; scientific notation outside [1e-4, 1e15).
pub fn write_number(f: &mut impl Write, c: f64) -> fmt::Result {
    let mag = c.abs();
    if mag == 0.0 {
        f.write_char('0')
    } else if (1e-4..1e15).contains(&mag) {
        write!(f, "{c}")
    } else {
        write!(f, "{c:e}")
    }
}
