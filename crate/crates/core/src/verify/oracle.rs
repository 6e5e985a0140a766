use super::VerifyError;
use crate::expr::{CoordinateSystem, Expr, Point};

/// Base central-difference step; scaled by `max(1, |x_k|)` per coordinate.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Lie derivative of `e` along the field `coeffs` at `p`, computed only from
/// function values: `sum_k a_k(p) * (e(p + h_k e_k) - e(p - h_k e_k)) / (2 h_k)`
/// with `h_k = h * max(1, |p_k|)`.
///
/// This never touches symbolic derivatives and serves as the independent
/// check on [`DifferentialOperator::lie_derivative`](crate::operator::DifferentialOperator::lie_derivative).
pub fn lie_derivative_fd(
    coeffs: &[Expr],
    coords: &CoordinateSystem,
    e: &Expr,
    p: &Point,
    h: f64,
) -> Result<f64, VerifyError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(VerifyError::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    if coeffs.len() != coords.len() {
        return Err(VerifyError::InvalidArgument("one field coefficient per coordinate required".into()));
    }
    let eval = |expr: &Expr, at: &Point| expr.evaluate(at).map_err(|err| VerifyError::eval(err, at));
    let mut total = 0.0;
    for (name, coeff) in coords.names().iter().zip(coeffs) {
        let a = eval(coeff, p)?;
        if a == 0.0 {
            continue;
        }
        let index = p
            .entries()
            .iter()
            .position(|(k, _)| k == name)
            .ok_or_else(|| VerifyError::InvalidArgument(format!("point has no coordinate {name:?}")))?;
        let x = p.entries()[index].1;
        let step = h * x.abs().max(1.0);
        let forward = eval(e, &p.shifted(index, step))?;
        let backward = eval(e, &p.shifted(index, -step))?;
        total += a * (forward - backward) / (2.0 * step);
    }
    Ok(total)
}
