use super::{Expr, Point};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("variable {0:?} has no value at this point")]
    MissingVariable(String),
}

fn domain(msg: impl Into<String>) -> EvalError {
    EvalError::Domain(msg.into())
}

/// Exponents with an integral value (within this bound) are evaluated by
/// repeated multiplication, so negative bases stay admissible.
const INTEGER_EXPONENT_LIMIT: f64 = 1024.0;

pub(super) fn evaluate(e: &Expr, p: &Point) -> Result<f64, EvalError> {
    let value = match e {
        Expr::Const(c) => *c,
        Expr::Var(name) => p.get(name).ok_or_else(|| EvalError::MissingVariable(name.clone()))?,
        Expr::Neg(a) => -evaluate(a, p)?,
        Expr::Add(a, b) => evaluate(a, p)? + evaluate(b, p)?,
        Expr::Sub(a, b) => evaluate(a, p)? - evaluate(b, p)?,
        Expr::Mul(a, b) => evaluate(a, p)? * evaluate(b, p)?,
        Expr::Div(a, b) => {
            let num = evaluate(a, p)?;
            let den = evaluate(b, p)?;
            if den == 0.0 {
                return Err(domain("division by zero"));
            }
            num / den
        }
        Expr::Pow(a, b) => power(evaluate(a, p)?, evaluate(b, p)?)?,
        Expr::Abs(a) => evaluate(a, p)?.abs(),
        Expr::Exp(a) => evaluate(a, p)?.exp(),
        Expr::Ln(a) => {
            let v = evaluate(a, p)?;
            if v <= 0.0 {
                return Err(domain(format!("ln of non-positive argument {v}")));
            }
            v.ln()
        }
        Expr::Sin(a) => evaluate(a, p)?.sin(),
        Expr::Cos(a) => evaluate(a, p)?.cos(),
        Expr::Sqrt(a) => {
            let v = evaluate(a, p)?;
            if v <= 0.0 {
                return Err(domain(format!("sqrt of non-positive argument {v}")));
            }
            v.sqrt()
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(format!("non-finite intermediate value in {e}")))
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() <= INTEGER_EXPONENT_LIMIT {
        let n = exponent as i32;
        if n < 0 && base == 0.0 {
            return Err(domain("zero raised to a negative power"));
        }
        return Ok(base.powi(n));
    }
    if base <= 0.0 {
        return Err(domain(format!("non-integer power {exponent} of non-positive base {base}")));
    }
    Ok((exponent * base.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn at(pairs: &[(&str, f64)]) -> Point {
        Point::new(pairs.iter().map(|(k, v)| (*k, *v)))
    }

    #[test]
    fn fractional_power() {
        let e = parse("x^(-3/2)").unwrap();
        let v = e.evaluate(&at(&[("x", 4.0)])).unwrap();
        assert!((v - 0.125).abs() < 1e-15);
    }

    #[test]
    fn quotient() {
        let e = parse("y/x").unwrap();
        assert_eq!(e.evaluate(&at(&[("x", 2.0), ("y", 6.0)])).unwrap(), 3.0);
    }

    #[test]
    fn domain_errors() {
        let p = at(&[("x", 0.0)]);
        assert!(matches!(parse("1/x").unwrap().evaluate(&p), Err(EvalError::Domain(_))));
        assert!(matches!(parse("ln(x)").unwrap().evaluate(&p), Err(EvalError::Domain(_))));
        assert!(matches!(parse("sqrt(x - 1)").unwrap().evaluate(&p), Err(EvalError::Domain(_))));
        assert!(matches!(parse("(x - 1)^0.5").unwrap().evaluate(&p), Err(EvalError::Domain(_))));
        assert!(matches!(parse("x^-2").unwrap().evaluate(&p), Err(EvalError::Domain(_))));
    }

    #[test]
    fn integer_powers_allow_negative_base() {
        let p = at(&[("x", -2.0)]);
        assert_eq!(parse("x^3").unwrap().evaluate(&p).unwrap(), -8.0);
        assert_eq!(parse("x^-1").unwrap().evaluate(&p).unwrap(), -0.5);
        assert_eq!(parse("x^0").unwrap().evaluate(&p).unwrap(), 1.0);
    }

    #[test]
    fn missing_variable() {
        assert_eq!(parse("x + w").unwrap().evaluate(&at(&[("x", 1.0)])), Err(EvalError::MissingVariable("w".into())));
    }

    #[test]
    fn elementary_functions() {
        let p = at(&[("x", 0.5)]);
        let e = parse("exp(x) + ln(x) + sin(x) + cos(x) + sqrt(x) + |-x|").unwrap();
        let want = 0.5f64.exp() + 0.5f64.ln() + 0.5f64.sin() + 0.5f64.cos() + 0.5f64.sqrt() + 0.5;
        assert!((e.evaluate(&p).unwrap() - want).abs() < 1e-15);
    }
}
