use super::Expr;

/// Exact partial derivative of `e` with respect to `var`, normalized.
pub(super) fn differentiate(e: &Expr, var: &str) -> Expr {
    raw(e, var).normalize()
}

fn raw(e: &Expr, var: &str) -> Expr {
    if !e.depends_on(var) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(name) => {
            if name == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Neg(a) => -raw(a, var),
        Expr::Add(a, b) => raw(a, var) + raw(b, var),
        Expr::Sub(a, b) => raw(a, var) - raw(b, var),
        Expr::Mul(a, b) => raw(a, var) * (**b).clone() + (**a).clone() * raw(b, var),
        Expr::Div(a, b) => {
            // (a'b - ab') / b^2
            let num = raw(a, var) * (**b).clone() - (**a).clone() * raw(b, var);
            num / (**b).clone().powf(2.0)
        }
        Expr::Pow(base, exponent) => {
            if exponent.depends_on(var) {
                // u^w = exp(w ln u)
                let rewritten = ((**exponent).clone() * (**base).clone().ln()).exp();
                raw(&rewritten, var)
            } else {
                let reduced = match exponent.as_const() {
                    Some(c) => Expr::num(c - 1.0),
                    None => (**exponent).clone() - 1.0,
                };
                (**exponent).clone() * (**base).clone().pow(reduced) * raw(base, var)
            }
        }
        Expr::Abs(a) => ((**a).clone() / (**a).clone().abs()) * raw(a, var),
        Expr::Exp(a) => e.clone() * raw(a, var),
        Expr::Ln(a) => raw(a, var) / (**a).clone(),
        Expr::Sin(a) => (**a).clone().cos() * raw(a, var),
        Expr::Cos(a) => -((**a).clone().sin()) * raw(a, var),
        Expr::Sqrt(a) => raw(a, var) / (Expr::num(2.0) * e.clone()),
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Point};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * 1f64.max(b.abs())
    }

    fn check(src: &str, var: &str, expected: &str, points: &[&[(&str, f64)]]) {
        let d = parse(src).unwrap().differentiate(var);
        let want = parse(expected).unwrap();
        for pairs in points {
            let p = Point::new(pairs.iter().map(|(k, v)| (*k, *v)));
            let got = d.evaluate(&p).unwrap();
            let exp = want.evaluate(&p).unwrap();
            assert!(close(got, exp, 1e-13), "d/d{var} {src} at {p}: {got} vs {exp} ({d})");
        }
    }

    #[test]
    fn chain_rule_gaussian() {
        check("exp(-x^2)", "x", "-2*x*exp(-x^2)", &[&[("x", 0.3)], &[("x", -1.7)]]);
    }

    #[test]
    fn quotient_rule() {
        check("y/x", "x", "-y/x^2", &[&[("x", 2.0), ("y", 3.0)], &[("x", -0.5), ("y", 1.0)]]);
        check("y/x", "y", "1/x", &[&[("x", 2.0), ("y", 3.0)]]);
    }

    #[test]
    fn power_rule_fractional() {
        check("x^(-3/2)", "x", "-(3/2)*x^(-5/2)", &[&[("x", 0.7)], &[("x", 1.9)]]);
    }

    #[test]
    fn variable_exponent_is_rewritten() {
        check("x^x", "x", "x^x*(ln(x) + 1)", &[&[("x", 0.7)], &[("x", 2.5)]]);
        // exponent independent of the differentiation variable keeps the power rule
        check("x^y", "x", "y*x^(y-1)", &[&[("x", 1.5), ("y", 2.5)]]);
        check("2^x", "x", "ln(2)*2^x", &[&[("x", -0.4)]]);
    }

    #[test]
    fn abs_derivative() {
        check("|x|", "x", "x/|x|", &[&[("x", -2.0)], &[("x", 3.0)]]);
        let d = parse("|x|").unwrap().differentiate("x");
        assert!(d.evaluate(&Point::new([("x", 0.0)])).is_err());
    }

    #[test]
    fn elementary() {
        let p: &[&[(&str, f64)]] = &[&[("x", 0.4)], &[("x", 1.3)]];
        check("sin(x)", "x", "cos(x)", p);
        check("cos(x^2)", "x", "-2*x*sin(x^2)", p);
        check("ln(x)", "x", "1/x", p);
        check("sqrt(x)", "x", "1/(2*sqrt(x))", p);
    }

    #[test]
    fn independent_variable_gives_zero() {
        assert!(parse("exp(y)*z").unwrap().differentiate("x").is_zero());
    }
}
