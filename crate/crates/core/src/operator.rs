//! First-order totally linear differential operators `L + q` with
//! `L = sum_k a_k ∂/∂x_k`, and the conjugation identities relating them.
//!
//! The central fact: if `η` is a nowhere-vanishing kernel element,
//! `(L + q)η = 0`, then `η L η⁻¹ = L + q`, or equivalently
//! `L = η⁻¹ (L + q) η`. Conjugating by any nonzero scalar keeps the field
//! and only changes the scalar part, `q ↦ q + Lη/η`, which is how
//! [`DifferentialOperator::conjugate`] computes it.

use std::fmt;

use crate::expr::{CoordinateSystem, Expr};
use crate::verify::{relative_scale, CheckSettings, Domain, Guard, GuardKind, VerificationReport, VerifyError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("{found} field coefficients for {expected} coordinates")]
    FieldLength { expected: usize, found: usize },
    #[error("the vector field is identically zero")]
    ZeroField,
    #[error("not a kernel element: max residual {max_residual:e} exceeds {tolerance:e}")]
    NotAKernelElement { max_residual: f64, tolerance: f64 },
    #[error("kernel candidate vanishes: min |eta| = {min_abs:e} is below epsilon {epsilon:e}")]
    EtaVanishes { min_abs: f64, epsilon: f64 },
    #[error("exponent {0} is not an integer; use the absolute-value form")]
    NonIntegerExponentWithoutAbs(f64),
    #[error("operator power {k} exceeds the limit {max}")]
    PowerTooLarge { k: u32, max: u32 },
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// `L + q` over a fixed coordinate system.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialOperator {
    coords: CoordinateSystem,
    field: Vec<Expr>,
    scalar: Expr,
}

impl DifferentialOperator {
    pub fn new(coords: CoordinateSystem, field: Vec<Expr>, scalar: Expr) -> Result<Self, OperatorError> {
        if field.len() != coords.len() {
            return Err(OperatorError::FieldLength { expected: coords.len(), found: field.len() });
        }
        let field: Vec<Expr> = field.iter().map(Expr::normalize).collect();
        if field.iter().all(Expr::is_zero) {
            return Err(OperatorError::ZeroField);
        }
        Ok(DifferentialOperator { coords, field, scalar: scalar.normalize() })
    }

    /// The vector field alone, `q = 0`.
    pub fn homogeneous(coords: CoordinateSystem, field: Vec<Expr>) -> Result<Self, OperatorError> {
        DifferentialOperator::new(coords, field, Expr::zero())
    }

    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    pub fn field(&self) -> &[Expr] {
        &self.field
    }

    pub fn scalar(&self) -> &Expr {
        &self.scalar
    }

    pub fn is_homogeneous(&self) -> bool {
        self.scalar.is_zero()
    }

    /// `L` with the scalar part dropped.
    pub fn field_part(&self) -> DifferentialOperator {
        DifferentialOperator { scalar: Expr::zero(), ..self.clone() }
    }

    /// Same field, scalar part replaced.
    pub fn with_scalar(&self, scalar: Expr) -> DifferentialOperator {
        DifferentialOperator { scalar: scalar.normalize(), ..self.clone() }
    }

    /// `Lψ = sum_k a_k ∂ψ/∂x_k`.
    pub fn lie_derivative(&self, e: &Expr) -> Expr {
        let mut terms = self
            .coords
            .names()
            .iter()
            .zip(&self.field)
            .filter(|(_, a)| !a.is_zero())
            .map(|(v, a)| a.clone() * e.differentiate(v));
        let first = terms.next().unwrap_or_else(Expr::zero);
        terms.fold(first, |acc, t| acc + t).normalize()
    }

    /// `(L + q)ψ`.
    pub fn apply(&self, e: &Expr) -> Expr {
        (self.lie_derivative(e) + self.scalar.clone() * e.clone()).normalize()
    }

    /// `η⁻¹ (L + q) η` as a first-order operator: same field, scalar part
    /// `q + Lη/η`. Only meaningful where `η ≠ 0`.
    pub fn conjugate(&self, eta: &Expr) -> DifferentialOperator {
        let shift = self.lie_derivative(eta) / eta.clone();
        self.with_scalar(self.scalar.clone() + shift)
    }

    /// `L + q + Q`.
    pub fn scalar_shift(&self, extra: &Expr) -> DifferentialOperator {
        self.with_scalar(self.scalar.clone() + extra.clone())
    }

    /// `(L + q)^k ψ`, applying the operator `k` times.
    pub fn apply_power(&self, k: u32, e: &Expr, limits: &PowerLimits) -> Result<PowerOutput, OperatorError> {
        if k > limits.max_k {
            return Err(OperatorError::PowerTooLarge { k, max: limits.max_k });
        }
        let mut expr = e.clone();
        for _ in 0..k {
            expr = self.apply(&expr);
        }
        let nodes = expr.node_count();
        Ok(PowerOutput { over_budget: nodes > limits.node_budget, expr, nodes })
    }

    /// The `field:` and `q:` lines of a problem file describing this operator.
    pub fn to_problem_lines(&self) -> String {
        let field: Vec<String> = self.field.iter().map(ToString::to_string).collect();
        format!("field: {}\nq: {}\n", field.join(" | "), self.scalar)
    }
}

impl fmt::Display for DifferentialOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, a) in self.coords.names().iter().zip(&self.field) {
            if a.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match a {
                a if a.is_one() => write!(f, "d/d{name}")?,
                Expr::Var(_) | Expr::Const(_) => write!(f, "{a} d/d{name}")?,
                _ => write!(f, "({a}) d/d{name}")?,
            }
        }
        if !self.scalar.is_zero() {
            write!(f, " + ({})", self.scalar)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLimits {
    pub max_k: u32,
    /// Results larger than this many nodes are flagged.
    pub node_budget: usize,
}

impl Default for PowerLimits {
    fn default() -> Self {
        PowerLimits { max_k: 3, node_budget: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerOutput {
    pub expr: Expr,
    pub nodes: usize,
    pub over_budget: bool,
}

/// Evidence that `(L + q)η ≈ 0` and `η` stays away from zero on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCertificate {
    pub eta: Expr,
    pub operator: DifferentialOperator,
    /// The sampled domain with the guard `|η| >= ε` added.
    pub domain: Domain,
    pub max_residual: f64,
    pub tolerance: f64,
    pub min_abs_eta: f64,
    pub samples: usize,
    pub seed: u64,
}

impl KernelCertificate {
    pub fn report(&self, check: &str) -> VerificationReport {
        VerificationReport::new(check, self.max_residual, self.tolerance)
            .with_samples(self.samples, self.samples, self.seed)
            .with_domain(&self.domain)
            .with_subject("operator", &self.operator)
            .with_subject("eta", &self.eta)
            .with_detail(format!("min |eta| = {:e}", self.min_abs_eta))
    }
}

/// Certifies `eta` as a kernel element of `op`: the relative residual
/// `|(L+q)η| / max(1, |η|)` must stay within tolerance and `|η|` above the
/// domain's guard epsilon at every sample.
pub fn check_kernel(
    op: &DifferentialOperator,
    eta: &Expr,
    domain: &Domain,
    settings: &CheckSettings,
) -> Result<KernelCertificate, OperatorError> {
    let applied = op.apply(eta);
    let points = domain.sample(settings.samples, settings.seed)?;
    let mut max_residual = 0.0f64;
    let mut min_abs = f64::INFINITY;
    for p in &points {
        let value = eta.evaluate(p).map_err(|e| VerifyError::eval(e, p))?;
        let image = applied.evaluate(p).map_err(|e| VerifyError::eval(e, p))?;
        max_residual = max_residual.max(image.abs() / relative_scale(value));
        min_abs = min_abs.min(value.abs());
    }
    let epsilon = domain.guard_epsilon();
    if min_abs < epsilon {
        return Err(OperatorError::EtaVanishes { min_abs, epsilon });
    }
    if max_residual > settings.tolerance {
        return Err(OperatorError::NotAKernelElement { max_residual, tolerance: settings.tolerance });
    }
    let guard = Guard::new(eta.clone(), GuardKind::NonZero, epsilon)?;
    Ok(KernelCertificate {
        eta: eta.clone(),
        operator: op.clone(),
        domain: domain.clone().with_guard(guard),
        max_residual,
        tolerance: settings.tolerance,
        min_abs_eta: min_abs,
        samples: points.len(),
        seed: settings.seed,
    })
}

/// Like [`check_kernel`], but always produces a report.
pub fn kernel_report(
    check: &str,
    op: &DifferentialOperator,
    eta: &Expr,
    domain: &Domain,
    settings: &CheckSettings,
) -> VerificationReport {
    match check_kernel(op, eta, domain, settings) {
        Ok(cert) => cert.report(check),
        Err(err) => {
            let residual = match &err {
                OperatorError::NotAKernelElement { max_residual, .. } => *max_residual,
                _ => f64::INFINITY,
            };
            let mut r = VerificationReport::new(check, residual, settings.tolerance)
                .with_samples(if residual.is_finite() { settings.samples } else { 0 }, settings.samples, settings.seed)
                .with_domain(domain)
                .with_subject("operator", op)
                .with_subject("eta", eta);
            r = match err {
                OperatorError::NotAKernelElement { .. } => r.fail_with(err.to_string()),
                OperatorError::EtaVanishes { .. } => r.fail_with(err.to_string()),
                other => {
                    r.status = crate::verify::Status::Error;
                    r.with_detail(other.to_string())
                }
            };
            r
        }
    }
}

/// `L = η⁻¹ (L + q) η`: certifies `eta` and returns the conjugated operator,
/// whose scalar part is then numerically zero on the domain.
pub fn factor_to_homogeneous(
    op: &DifferentialOperator,
    eta: &Expr,
    domain: &Domain,
    settings: &CheckSettings,
) -> Result<(DifferentialOperator, KernelCertificate), OperatorError> {
    let cert = check_kernel(op, eta, domain, settings)?;
    let factored = op.conjugate(eta);
    let points = cert.domain.sample(settings.samples, settings.seed)?;
    let mut worst = 0.0f64;
    for p in &points {
        let q = op.scalar().evaluate(p).map_err(|e| VerifyError::eval(e, p))?;
        let s = factored.scalar().evaluate(p).map_err(|e| VerifyError::eval(e, p))?;
        worst = worst.max(s.abs() / relative_scale(q));
    }
    if worst > settings.tolerance {
        return Err(OperatorError::NotAKernelElement { max_residual: worst, tolerance: settings.tolerance });
    }
    Ok((factored, cert))
}

/// From `(L + q)η = 0`, the pair `(L + αq, η^α)` with `(L + αq)η^α = 0`.
/// With `use_abs` the power is taken of `|η|`, which admits any real `α`;
/// without it `α` must be an integer.
pub fn kernel_power(
    eta: &Expr,
    alpha: f64,
    op: &DifferentialOperator,
    use_abs: bool,
) -> Result<(DifferentialOperator, Expr), OperatorError> {
    if !alpha.is_finite() || (!use_abs && alpha.fract() != 0.0) {
        return Err(OperatorError::NonIntegerExponentWithoutAbs(alpha));
    }
    let base = if use_abs { eta.clone().abs() } else { eta.clone() };
    let powered = base.powf(alpha).normalize();
    let shifted = op.with_scalar(Expr::num(alpha) * op.scalar().clone());
    Ok((shifted, powered))
}

/// Maps an eigenfunction `ψ_λ` of `L` to the eigenfunction `η ψ_λ` of
/// `L + q` with the same eigenvalue.
pub fn eigen_shift(eta: &Expr, psi_lambda: &Expr) -> Expr {
    (eta.clone() * psi_lambda.clone()).normalize()
}
