//! Structural rewriting to a tidier, value-equivalent tree.
//!
//! Rules are local and each either folds constants, removes an identity
//! element, or cancels a structurally repeated factor; the result agrees
//! with the input at every point where both are defined. There is no
//! canonical ordering of operands, so two equal functions may normalize to
//! different trees.

use super::{Expr, Point};

const MAX_PASSES: usize = 64;

pub(super) fn normalize(e: &Expr) -> Expr {
    let mut current = e.clone();
    for _ in 0..MAX_PASSES {
        let next = pass(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn pass(e: &Expr) -> Expr {
    let node = e.map_children(pass);
    rewrite(&node).unwrap_or(node)
}

fn fold(e: &Expr) -> Option<Expr> {
    if matches!(e, Expr::Const(_) | Expr::Var(_)) || !e.is_constant() {
        return None;
    }
    match e.evaluate(&Point::new(Vec::<(String, f64)>::new())) {
        // `+ 0.0` turns a folded -0 into 0
        Ok(v) => Some(Expr::Const(v + 0.0)),
        Err(_) => None,
    }
}

fn is_int(c: f64) -> bool {
    c.fract() == 0.0
}

fn rewrite(e: &Expr) -> Option<Expr> {
    if let Some(folded) = fold(e) {
        return Some(folded);
    }
    if let Expr::Const(c) = e {
        if *c == 0.0 && c.is_sign_negative() {
            return Some(Expr::Const(0.0));
        }
    }
    let c = |e: &Expr| e.as_const();
    match e {
        Expr::Neg(a) => match &**a {
            Expr::Neg(inner) => Some((**inner).clone()),
            _ => None,
        },
        Expr::Add(a, b) => {
            if b.is_zero() {
                return Some((**a).clone());
            }
            if a.is_zero() {
                return Some((**b).clone());
            }
            if let Expr::Neg(nb) = &**b {
                return Some(Expr::Sub(a.clone(), nb.clone()));
            }
            if let Expr::Neg(na) = &**a {
                return Some(Expr::Sub(b.clone(), na.clone()));
            }
            None
        }
        Expr::Sub(a, b) => {
            if b.is_zero() {
                return Some((**a).clone());
            }
            if a.is_zero() {
                return Some(Expr::Neg(b.clone()));
            }
            if a == b {
                return Some(Expr::zero());
            }
            if let Expr::Neg(nb) = &**b {
                return Some(Expr::Add(a.clone(), nb.clone()));
            }
            if let Expr::Add(l, r) = &**a {
                if l == b {
                    return Some((**r).clone());
                }
                if r == b {
                    return Some((**l).clone());
                }
            }
            None
        }
        Expr::Mul(a, b) => {
            if a.is_zero() || b.is_zero() {
                return Some(Expr::zero());
            }
            if a.is_one() {
                return Some((**b).clone());
            }
            if b.is_one() {
                return Some((**a).clone());
            }
            if c(a) == Some(-1.0) {
                return Some(Expr::Neg(b.clone()));
            }
            if c(b) == Some(-1.0) {
                return Some(Expr::Neg(a.clone()));
            }
            if let Expr::Neg(na) = &**a {
                return Some(-Expr::Mul(na.clone(), b.clone()));
            }
            if let Expr::Neg(nb) = &**b {
                return Some(-Expr::Mul(a.clone(), nb.clone()));
            }
            // constant times something with a leading constant
            if let (Some(k), Expr::Mul(l, r)) = (c(a), &**b) {
                if let Some(k2) = c(l) {
                    return Some(Expr::num(k * k2) * (**r).clone());
                }
            }
            // move constants to the left
            if c(b).is_some() && c(a).is_none() {
                return Some(Expr::Mul(b.clone(), a.clone()));
            }
            match (&**a, &**b) {
                (Expr::Exp(x), Expr::Exp(y)) => Some(((**x).clone() + (**y).clone()).exp()),
                (Expr::Div(n1, d1), Expr::Div(n2, d2)) => Some(Expr::Div(
                    Box::new(Expr::Mul(n1.clone(), n2.clone())),
                    Box::new(Expr::Mul(d1.clone(), d2.clone())),
                )),
                (Expr::Div(n, d), other) if n.is_one() => Some(Expr::Div(Box::new(other.clone()), d.clone())),
                (other, Expr::Div(n, d)) if n.is_one() => Some(Expr::Div(Box::new(other.clone()), d.clone())),
                _ => None,
            }
        }
        Expr::Div(a, b) => {
            if a.is_zero() {
                return Some(Expr::zero());
            }
            if b.is_one() {
                return Some((**a).clone());
            }
            if a == b {
                return Some(Expr::one());
            }
            if let Expr::Neg(na) = &**a {
                return Some(-Expr::Div(na.clone(), b.clone()));
            }
            if let Expr::Neg(nb) = &**b {
                return Some(-Expr::Div(a.clone(), nb.clone()));
            }
            if let (Expr::Div(n1, d1), Expr::Div(n2, d2)) = (&**a, &**b) {
                return Some(Expr::Div(
                    Box::new(Expr::Mul(n1.clone(), d2.clone())),
                    Box::new(Expr::Mul(d1.clone(), n2.clone())),
                ));
            }
            cancel_common_factor(a, b)
        }
        Expr::Pow(base, exponent) => {
            if exponent.is_one() {
                return Some((**base).clone());
            }
            if exponent.is_zero() {
                return Some(Expr::one());
            }
            if let (Expr::Pow(inner, e1), Some(e2)) = (&**base, c(exponent)) {
                if let Some(e1) = c(e1) {
                    if is_int(e2) {
                        return Some((**inner).clone().powf(e1 * e2));
                    }
                }
            }
            None
        }
        Expr::Abs(a) => match &**a {
            Expr::Abs(_) => Some((**a).clone()),
            Expr::Neg(inner) => Some(Expr::Abs(inner.clone())),
            _ => None,
        },
        _ => None,
    }
}

fn factors(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Mul(l, r) => vec![l, r],
        other => vec![other],
    }
}

/// Cancels one structurally identical factor between the top-level
/// products of numerator and denominator.
fn cancel_common_factor(num: &Expr, den: &Expr) -> Option<Expr> {
    let nf = factors(num);
    let df = factors(den);
    if nf.len() == 1 && df.len() == 1 {
        return None;
    }
    for (i, n) in nf.iter().enumerate() {
        if n.is_constant() {
            continue;
        }
        if let Some(j) = df.iter().position(|d| d == n) {
            let rest = |v: &[&Expr], skip: usize| -> Expr {
                v.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, e)| (*e).clone())
                    .next()
                    .unwrap_or_else(Expr::one)
            };
            return Some(Expr::Div(Box::new(rest(&nf, i)), Box::new(rest(&df, j))));
        }
    }
    None
}
