use super::{relative_scale, CheckSettings, Domain, VerificationReport, VerifyError};
use crate::expr::{Expr, Point};
use crate::operator::DifferentialOperator;

/// Largest `|lhs - rhs| / max(1, |rhs|)` over `points`.
pub fn max_relative_gap(lhs: &Expr, rhs: &Expr, points: &[Point]) -> Result<f64, VerifyError> {
    let mut worst = 0.0f64;
    for p in points {
        let a = lhs.evaluate(p).map_err(|e| VerifyError::eval(e, p))?;
        let b = rhs.evaluate(p).map_err(|e| VerifyError::eval(e, p))?;
        worst = worst.max((a - b).abs() / relative_scale(b));
    }
    Ok(worst)
}

/// True iff `|e1 - e2| <= tol * max(1, |e1|)` at every sampled point.
pub fn numeric_equal(
    e1: &Expr,
    e2: &Expr,
    domain: &Domain,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<bool, VerifyError> {
    for p in domain.sample(samples, seed)? {
        let a = e1.evaluate(&p).map_err(|e| VerifyError::eval(e, &p))?;
        let b = e2.evaluate(&p).map_err(|e| VerifyError::eval(e, &p))?;
        if (a - b).abs() > tol * relative_scale(a) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Samples `domain` and reports the largest relative gap between `lhs` and
/// `rhs`. Sampling or evaluation failures yield an `error` report naming the
/// offending point.
pub fn compare_exprs(
    check: &str,
    lhs: &Expr,
    rhs: &Expr,
    domain: &Domain,
    settings: &CheckSettings,
) -> VerificationReport {
    let base =
        |r: VerificationReport, accepted| r.with_samples(accepted, settings.samples, settings.seed).with_domain(domain);
    let points = match domain.sample(settings.samples, settings.seed) {
        Ok(points) => points,
        Err(e) => return base(VerificationReport::error(check, settings.tolerance, e.to_string()), 0),
    };
    match max_relative_gap(lhs, rhs, &points) {
        Ok(worst) => base(VerificationReport::new(check, worst, settings.tolerance), points.len()),
        Err(e) => base(VerificationReport::error(check, settings.tolerance, e.to_string()), points.len()),
    }
}

/// Max of `|(L+q)candidate - rhs| / max(1, |rhs|)` over the sampled domain.
pub fn residual_max(
    check: &str,
    op: &DifferentialOperator,
    candidate: &Expr,
    rhs: &Expr,
    domain: &Domain,
    settings: &CheckSettings,
) -> VerificationReport {
    let applied = op.apply(candidate);
    compare_exprs(check, &applied, rhs, domain, settings)
        .with_subject("operator", op)
        .with_subject("candidate", candidate)
        .with_subject("rhs", rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, CoordinateSystem};
    use crate::verify::Status;

    fn line() -> Domain {
        Domain::cube(CoordinateSystem::new(["x"]).unwrap(), -1.0, 1.0).unwrap()
    }

    #[test]
    fn numeric_equal_cases() {
        let d = line();
        assert!(numeric_equal(&parse("x+x").unwrap(), &parse("2*x").unwrap(), &d, 100, 1e-12, 1).unwrap());
        let unit = Domain::cube(CoordinateSystem::new(["x"]).unwrap(), 0.0, 1.0).unwrap();
        assert!(!numeric_equal(&parse("x").unwrap(), &parse("x + 0.01").unwrap(), &unit, 100, 1e-9, 1).unwrap());
    }

    #[test]
    fn singular_sample_is_reported_with_point() {
        let d = line();
        let settings = CheckSettings::default();
        let r = compare_exprs("c", &parse("ln(x)").unwrap(), &Expr::zero(), &d, &settings);
        assert_eq!(r.status, Status::Error);
        assert!(r.detail.contains("x="), "{}", r.detail);
    }
}
