//! Characteristic curves of a first-order operator.
//!
//! The flow `dx/dt = a(x)` is integrated with the classical fourth-order
//! Runge-Kutta scheme on a fixed step, and `∫ q(x(s)) ds` is carried as an
//! extra state component so that it receives the same stage weights.

use super::{relative_scale, VerifyError};
use crate::expr::{CoordinateSystem, Expr, Point};
use crate::operator::DifferentialOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSettings {
    /// Requested step; the step actually used divides `t_end` evenly.
    pub step: f64,
    pub t_end: f64,
    /// Integration stops once any coordinate leaves `[-bound, bound]`.
    pub safety_bound: f64,
}

impl Default for FlowSettings {
    fn default() -> Self {
        FlowSettings { step: 1e-3, t_end: 1.0, safety_bound: 1e6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    /// `∫_0^t q(x(s)) ds` at each time.
    pub q_integral: Vec<f64>,
    /// Set when the curve left the safety box before `t_end`.
    pub truncated: bool,
}

impl Trajectory {
    pub fn end(&self) -> &Point {
        self.points.last().expect("a trajectory holds at least its start point")
    }
}

/// Largest drift over a set of seeds. `truncated` counts seeds whose curve
/// left the safety box; their drift is measured up to the exit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub max: f64,
    pub truncated: usize,
}

fn eval_all(exprs: &[Expr], p: &Point) -> Result<Vec<f64>, VerifyError> {
    exprs.iter().map(|e| e.evaluate(p).map_err(|err| VerifyError::eval(err, p))).collect()
}

pub fn flow_rk4(
    field: &[Expr],
    coords: &CoordinateSystem,
    x0: &Point,
    q: &Expr,
    settings: &FlowSettings,
) -> Result<Trajectory, VerifyError> {
    if settings.step.is_nan() || settings.step <= 0.0 {
        return Err(VerifyError::InvalidArgument(format!("flow step must be positive, got {}", settings.step)));
    }
    if !(settings.t_end >= 0.0 && settings.t_end.is_finite()) {
        return Err(VerifyError::InvalidArgument(format!("t_end must be non-negative, got {}", settings.t_end)));
    }
    if field.len() != coords.len() {
        return Err(VerifyError::InvalidArgument("one field coefficient per coordinate required".into()));
    }
    let start: Vec<f64> = coords
        .names()
        .iter()
        .map(|n| x0.get(n).ok_or_else(|| VerifyError::InvalidArgument(format!("seed point has no coordinate {n:?}"))))
        .collect::<Result<_, _>>()?;
    let mut steps = (settings.t_end / settings.step).round() as usize;
    if steps == 0 && settings.t_end > 0.0 {
        steps = 1;
    }
    let h = if steps == 0 { 0.0 } else { settings.t_end / steps as f64 };

    let start_point = coords.point(&start);
    let mut traj =
        Trajectory { times: vec![0.0], points: vec![start_point.clone()], q_integral: vec![0.0], truncated: false };

    let rhs = |y: &[f64]| -> Result<(Vec<f64>, f64), VerifyError> {
        let p = coords.point(y);
        let a = eval_all(field, &p)?;
        let g = q.evaluate(&p).map_err(|err| VerifyError::eval(err, &p))?;
        Ok((a, g))
    };
    let offset = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };

    let mut y = start;
    let mut integral = 0.0;
    for i in 1..=steps {
        let (k1, g1) = rhs(&y)?;
        let (k2, g2) = rhs(&offset(&y, &k1, h / 2.0))?;
        let (k3, g3) = rhs(&offset(&y, &k2, h / 2.0))?;
        let (k4, g4) = rhs(&offset(&y, &k3, h))?;
        for (j, v) in y.iter_mut().enumerate() {
            *v += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        integral += h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
        if y.iter().any(|v| !v.is_finite() || v.abs() > settings.safety_bound) {
            traj.truncated = true;
            break;
        }
        traj.times.push(i as f64 * h);
        traj.points.push(coords.point(&y));
        traj.q_integral.push(integral);
    }
    Ok(traj)
}

/// Max over seeds and times of `|φ(x(t)) - φ(x(0))| / max(1, |φ(x(0))|)`.
/// A first integral of the field has drift at the integrator's error level.
pub fn invariance_drift(
    phi: &Expr,
    field: &[Expr],
    coords: &CoordinateSystem,
    seeds: &[Point],
    settings: &FlowSettings,
) -> Result<Drift, VerifyError> {
    let mut drift = Drift { max: 0.0, truncated: 0 };
    for seed in seeds {
        let traj = flow_rk4(field, coords, seed, &Expr::zero(), settings)?;
        drift.truncated += usize::from(traj.truncated);
        let first = phi.evaluate(&traj.points[0]).map_err(|e| VerifyError::eval(e, &traj.points[0]))?;
        for p in &traj.points {
            let v = phi.evaluate(p).map_err(|e| VerifyError::eval(e, p))?;
            drift.max = drift.max.max((v - first).abs() / relative_scale(first));
        }
    }
    Ok(drift)
}

/// Along a characteristic, a kernel element of `L + q` satisfies
/// `d/dt ψ(x(t)) = -q ψ`, so `ψ(x(t)) · exp(∫q)` stays constant. Returns its
/// largest relative drift.
pub fn transport_drift(
    psi: &Expr,
    op: &DifferentialOperator,
    seeds: &[Point],
    settings: &FlowSettings,
) -> Result<Drift, VerifyError> {
    let mut drift = Drift { max: 0.0, truncated: 0 };
    for seed in seeds {
        let traj = flow_rk4(op.field(), op.coords(), seed, op.scalar(), settings)?;
        drift.truncated += usize::from(traj.truncated);
        let first = psi.evaluate(&traj.points[0]).map_err(|e| VerifyError::eval(e, &traj.points[0]))?;
        for (p, integral) in traj.points.iter().zip(&traj.q_integral) {
            let v = psi.evaluate(p).map_err(|e| VerifyError::eval(e, p))? * integral.exp();
            drift.max = drift.max.max((v - first).abs() / relative_scale(first));
        }
    }
    Ok(drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn radial() -> (Vec<Expr>, CoordinateSystem) {
        let coords = CoordinateSystem::new(["x", "y", "z"]).unwrap();
        (coords.names().iter().map(|n| Expr::var(n.clone())).collect(), coords)
    }

    #[test]
    fn radial_flow_is_exponential() {
        let (field, coords) = radial();
        let traj = flow_rk4(&field, &coords, &coords.point(&[1.0, 1.0, 1.0]), &Expr::zero(), &FlowSettings::default())
            .unwrap();
        assert_eq!(traj.times.len(), 1001);
        assert!((traj.times[1000] - 1.0).abs() < 1e-15);
        for v in traj.end().values() {
            assert!((v - 1f64.exp()).abs() < 1e-8);
        }
        assert!(!traj.truncated);
    }

    #[test]
    fn zero_horizon() {
        let (field, coords) = radial();
        let settings = FlowSettings { t_end: 0.0, ..FlowSettings::default() };
        let traj = flow_rk4(&field, &coords, &coords.point(&[1.0, 2.0, 3.0]), &Expr::zero(), &settings).unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.points.len(), 1);
    }

    #[test]
    fn unit_q_integrates_to_time() {
        let (field, coords) = radial();
        let traj =
            flow_rk4(&field, &coords, &coords.point(&[1.0, 1.0, 1.0]), &Expr::one(), &FlowSettings::default()).unwrap();
        for (t, i) in traj.times.iter().zip(&traj.q_integral) {
            assert!((t - i).abs() < 1e-10);
        }
    }

    #[test]
    fn leaving_the_safety_box_truncates() {
        let (field, coords) = radial();
        let settings = FlowSettings { t_end: 5.0, safety_bound: 10.0, ..FlowSettings::default() };
        let traj = flow_rk4(&field, &coords, &coords.point(&[1.0, 1.0, 1.0]), &Expr::zero(), &settings).unwrap();
        assert!(traj.truncated);
        assert!(*traj.times.last().unwrap() < 5.0);
    }

    #[test]
    fn drift_of_invariants_and_non_invariants() {
        let (field, coords) = radial();
        let seeds = vec![coords.point(&[1.0, 0.7, 1.4]), coords.point(&[0.6, 1.9, 0.8])];
        let s = FlowSettings::default();
        let d = invariance_drift(&parse("y/x").unwrap(), &field, &coords, &seeds, &s).unwrap();
        assert!(d.max <= 1e-5);
        let d = invariance_drift(&parse("x").unwrap(), &field, &coords, &seeds, &s).unwrap();
        assert!(d.max > 1.0);
        let d = invariance_drift(&Expr::num(3.0), &field, &coords, &seeds, &s).unwrap();
        assert_eq!(d.max, 0.0);
    }

    #[test]
    fn invalid_step() {
        let (field, coords) = radial();
        let settings = FlowSettings { step: 0.0, ..FlowSettings::default() };
        assert!(flow_rk4(&field, &coords, &coords.point(&[1.0, 1.0, 1.0]), &Expr::zero(), &settings).is_err());
    }
}
