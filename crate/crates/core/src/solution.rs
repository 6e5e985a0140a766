//! Building solutions of `Lφ = 0`, `(L + q)ψ = 0` and `(L + q)χ = b` from
//! one another.
//!
//! Everything here is constructive and symbolic; correctness of a built
//! expression is established separately by the residual checks in
//! [`crate::verify`]. Domain bookkeeping follows the usual rule: a product
//! `ηφ` lives on the intersection of the factors' domains, and a quotient
//! `ψ/η` additionally excludes the zero set of `η`.

use std::collections::{BTreeMap, BTreeSet};

use crate::expr::{CoordinateSystem, Expr};
use crate::operator::{check_kernel, DifferentialOperator, OperatorError};
use crate::verify::{
    independence_rank, max_relative_gap, relative_scale, residual_max, CheckSettings, Domain, RankReport, VerifyError,
};

/// Points used by the Jacobian-rank vote.
pub const DEFAULT_RANK_POINTS: usize = 9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("invariants are functionally dependent: rank {rank}, need {expected}")]
    DependentInvariants { rank: usize, expected: usize },
    #[error("the first two particular solutions coincide numerically")]
    IdenticalParticulars,
    #[error("template takes {found} arguments, basis has {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("need at least two particular solutions, got {0}")]
    TooFewParticulars(usize),
    #[error("basis independence has not been verified")]
    UnverifiedBasis,
    #[error("an invariant basis in {coords} coordinates has {expected} members, got {found}")]
    BasisSize { coords: usize, expected: usize, found: usize },
    #[error("template body uses {0:?}, which is not a placeholder")]
    UnboundTemplateVariable(String),
    #[error("invalid placeholder name {0:?}")]
    BadPlaceholder(String),
    #[error("particular solution is not certified: max residual {max_residual:e} exceeds {tolerance:e}")]
    UncertifiedParticular { max_residual: f64, tolerance: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// `φ₀ ↦ ηφ₀`, carrying homogeneous solutions into `Ker(L + q)`.
pub fn lift(eta: &Expr, phi: &Expr) -> Expr {
    (eta.clone() * phi.clone()).normalize()
}

/// `ψ ↦ ψ/η`, the inverse of [`lift`]; the ratio of two kernel elements of
/// `L + q` is annihilated by `L`.
pub fn ratio(psi: &Expr, eta: &Expr) -> Expr {
    (psi.clone() / eta.clone()).normalize()
}

/// `n - 1` homogeneous solutions intended as arguments of a general integral.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantBasis {
    invariants: Vec<Expr>,
    coords: CoordinateSystem,
    independence: Option<RankReport>,
}

impl InvariantBasis {
    pub fn new(invariants: Vec<Expr>, coords: CoordinateSystem) -> Result<Self, BuildError> {
        let expected = coords.len() - 1;
        if invariants.len() != expected {
            return Err(BuildError::BasisSize { coords: coords.len(), expected, found: invariants.len() });
        }
        Ok(InvariantBasis { invariants, coords, independence: None })
    }

    /// A family of fewer than `n - 1` invariants, as produced from too few
    /// particular solutions.
    pub fn partial(invariants: Vec<Expr>, coords: CoordinateSystem) -> Result<Self, BuildError> {
        let limit = coords.len() - 1;
        if invariants.len() > limit {
            return Err(BuildError::BasisSize { coords: coords.len(), expected: limit, found: invariants.len() });
        }
        Ok(InvariantBasis { invariants, coords, independence: None })
    }

    /// Runs the Jacobian-rank test and records it. Fails unless the rank is
    /// the number of invariants.
    pub fn verify(mut self, domain: &Domain, n_points: usize, seed: u64) -> Result<Self, BuildError> {
        let report = if self.invariants.is_empty() {
            RankReport { rank: 0, per_point: Vec::new(), functions: 0 }
        } else {
            independence_rank(&self.invariants, domain, n_points, seed)?
        };
        if !report.is_full() {
            return Err(BuildError::DependentInvariants { rank: report.rank, expected: report.functions });
        }
        self.independence = Some(report);
        Ok(self)
    }

    pub fn invariants(&self) -> &[Expr] {
        &self.invariants
    }

    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    pub fn independence(&self) -> Option<&RankReport> {
        self.independence.as_ref()
    }

    pub fn len(&self) -> usize {
        self.invariants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.invariants.is_empty()
    }
}

/// An arbitrary function `f(u₁, …, u_m)` written as an expression over
/// placeholder variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTemplate {
    placeholders: Vec<String>,
    body: Expr,
}

impl SolutionTemplate {
    pub fn new(placeholders: Vec<String>, body: Expr) -> Result<Self, BuildError> {
        let declared: BTreeSet<&str> = placeholders.iter().map(String::as_str).collect();
        for p in &placeholders {
            if !crate::expr::is_identifier(p) {
                return Err(BuildError::BadPlaceholder(p.clone()));
            }
        }
        if let Some(v) = body.variables().into_iter().find(|v| !declared.contains(v.as_str())) {
            return Err(BuildError::UnboundTemplateVariable(v));
        }
        Ok(SolutionTemplate { placeholders, body })
    }

    /// Placeholders `u1, …, u_arity`.
    pub fn standard(arity: usize, body: Expr) -> Result<Self, BuildError> {
        SolutionTemplate::new((1..=arity).map(|i| format!("u{i}")).collect(), body)
    }

    pub fn placeholders(&self) -> &[String] {
        &self.placeholders
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn arity(&self) -> usize {
        self.placeholders.len()
    }

    /// `f(args…)`.
    pub fn instantiate(&self, args: &[Expr]) -> Result<Expr, BuildError> {
        if args.len() != self.placeholders.len() {
            return Err(BuildError::ArityMismatch { expected: args.len(), found: self.placeholders.len() });
        }
        let bindings: BTreeMap<String, Expr> = self.placeholders.iter().cloned().zip(args.iter().cloned()).collect();
        Ok(self.body.substitute(&bindings))
    }
}

/// Basis `φ_j = η_j / η` from `n - 1` further kernel elements. The rank test
/// runs here, so the basis is returned verified.
pub fn invariants_from_kernel(
    eta: &Expr,
    others: &[Expr],
    domain: &Domain,
    n_points: usize,
    seed: u64,
) -> Result<InvariantBasis, BuildError> {
    let invariants = others.iter().map(|o| ratio(o, eta)).collect();
    InvariantBasis::new(invariants, domain.coords().clone())?.verify(domain, n_points, seed)
}

/// `ψ = η f(φ₁, …, φ_{n-1})`, a member of `Ker(L + q)` for every `f`.
pub fn general_reduced(eta: &Expr, basis: &InvariantBasis, f: &SolutionTemplate) -> Result<Expr, BuildError> {
    if basis.independence.is_none() {
        return Err(BuildError::UnverifiedBasis);
    }
    let inner = f.instantiate(basis.invariants())?;
    Ok((eta.clone() * inner).normalize())
}

/// `χ = χ₀ + η f(φ₁, …, φ_{n-1})`, a solution of `(L + q)χ = b` whenever
/// `χ₀` is.
pub fn general_total(
    chi0: &Expr,
    eta: &Expr,
    basis: &InvariantBasis,
    f: &SolutionTemplate,
) -> Result<Expr, BuildError> {
    Ok((chi0.clone() + general_reduced(eta, basis, f)?).normalize())
}

/// [`general_total`] after certifying `chi0` against `(L + q)χ = rhs` and
/// `eta` as a kernel element of `op`.
#[allow(clippy::too_many_arguments)]
pub fn general_total_certified(
    op: &DifferentialOperator,
    rhs: &Expr,
    chi0: &Expr,
    eta: &Expr,
    basis: &InvariantBasis,
    f: &SolutionTemplate,
    domain: &Domain,
    settings: &CheckSettings,
) -> Result<Expr, BuildError> {
    let report = residual_max("particular", op, chi0, rhs, domain, settings);
    if !report.passed() {
        return Err(BuildError::UncertifiedParticular {
            max_residual: report.max_residual,
            tolerance: settings.tolerance,
        });
    }
    check_kernel(op, eta, domain, settings)?;
    general_total(chi0, eta, basis, f)
}

/// Result of reconstructing the general solution from particular solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossRatio {
    /// `χ₁ - χ₀`
    pub eta: Expr,
    /// `(χ_{j+1} - χ₀) / (χ₁ - χ₀)`, normalized.
    pub ratios: Vec<Expr>,
    /// The basis `f` was evaluated on: the ratios, or the caller's basis
    /// when only two particulars were given.
    pub basis: InvariantBasis,
    pub solution: Expr,
}

/// General solution from particular solutions `χ₀, …, χ_m` of one totally
/// linear equation: `χ = χ₀ + (χ₁ - χ₀) f(φ₁, …, φ_{m-1})` with
/// `φ_j = (χ_{j+1} - χ₀)/(χ₁ - χ₀)`.
///
/// With exactly two particulars there are no ratios and `f` is evaluated on
/// `fallback_basis`. Fewer than `n + 1` particulars give a sub-family.
pub fn cross_ratio(
    particulars: &[Expr],
    f: &SolutionTemplate,
    fallback_basis: Option<&InvariantBasis>,
    domain: &Domain,
    settings: &CheckSettings,
) -> Result<CrossRatio, BuildError> {
    if particulars.len() < 2 {
        return Err(BuildError::TooFewParticulars(particulars.len()));
    }
    let chi0 = &particulars[0];
    let eta = (particulars[1].clone() - chi0.clone()).normalize();

    let points = domain.sample(settings.samples, settings.seed)?;
    let scale = points
        .iter()
        .map(|p| chi0.evaluate(p).map(relative_scale).map_err(|e| VerifyError::eval(e, p)))
        .try_fold(0.0f64, |acc, s| s.map(|s| acc.max(s)))?;
    let eta_size = max_relative_gap(&eta, &Expr::zero(), &points)?;
    if eta_size <= settings.tolerance * scale {
        return Err(BuildError::IdenticalParticulars);
    }

    let ratios: Vec<Expr> =
        particulars[2..].iter().map(|chi| ratio(&(chi.clone() - chi0.clone()).normalize(), &eta)).collect();

    let basis = if ratios.is_empty() {
        match fallback_basis {
            Some(b) => b.clone(),
            None => InvariantBasis::partial(Vec::new(), domain.coords().clone())?,
        }
    } else {
        InvariantBasis::partial(ratios.clone(), domain.coords().clone())?.verify(
            domain,
            DEFAULT_RANK_POINTS,
            settings.seed,
        )?
    };
    if basis.independence.is_none() && !basis.is_empty() {
        return Err(BuildError::UnverifiedBasis);
    }
    let inner = f.instantiate(basis.invariants())?;
    let solution = (chi0.clone() + eta.clone() * inner).normalize();
    Ok(CrossRatio { eta, ratios, basis, solution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::verify::numeric_equal;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn xyz() -> CoordinateSystem {
        CoordinateSystem::new(["x", "y", "z"]).unwrap()
    }

    fn cube() -> Domain {
        Domain::cube(xyz(), 0.5, 2.0).unwrap()
    }

    fn radial(q: &str) -> DifferentialOperator {
        let field = xyz().names().iter().map(|n| Expr::var(n.clone())).collect();
        DifferentialOperator::new(xyz(), field, p(q)).unwrap()
    }

    fn residual_ok(op: &DifferentialOperator, e: &Expr, rhs: &str) -> bool {
        residual_max("t", op, e, &p(rhs), &cube(), &CheckSettings::default()).passed()
    }

    fn radial_basis() -> InvariantBasis {
        InvariantBasis::new(vec![p("y/x"), p("z/x")], xyz()).unwrap().verify(&cube(), 9, 1).unwrap()
    }

    #[test]
    fn lift_examples() {
        let psi = lift(&p("x^(-3/2)"), &p("x/y"));
        assert!(numeric_equal(&psi, &p("x^(-1/2)*y^(-1)"), &cube(), 100, 1e-12, 1).unwrap());
        assert!(residual_ok(&radial("3/2"), &psi, "0"));
        let psi = lift(&p("1/x"), &p("x/y"));
        assert_eq!(psi, p("1/y"));
        assert!(residual_ok(&radial("1"), &psi, "0"));
        assert_eq!(lift(&Expr::one(), &p("x/z")), p("x/z"));
    }

    #[test]
    fn ratio_examples() {
        let phi = ratio(&p("x^(-1/2)*y^(-1)"), &p("x^(-3/2)"));
        assert!(numeric_equal(&phi, &p("x/y"), &cube(), 100, 1e-12, 1).unwrap());
        assert!(residual_ok(&radial("0"), &phi, "0"));
        assert_eq!(ratio(&p("exp(x)*y"), &p("exp(x)*y")), Expr::one());

        let line = Domain::cube(CoordinateSystem::new(["x"]).unwrap(), -2.0, 2.0).unwrap();
        let r = ratio(&p("exp(-x^2 + 1.5*x)"), &p("exp(-x^2)"));
        let op = DifferentialOperator::new(CoordinateSystem::new(["x"]).unwrap(), vec![Expr::one()], Expr::num(-1.5))
            .unwrap();
        assert!(residual_max("t", &op, &r, &Expr::zero(), &line, &CheckSettings::default()).passed());
    }

    #[test]
    fn invariants_from_kernel_examples() {
        let basis = invariants_from_kernel(&p("1/x"), &[p("1/y"), p("1/z")], &cube(), 9, 2).unwrap();
        assert_eq!(basis.invariants(), &[p("x/y"), p("x/z")]);
        assert_eq!(basis.independence().unwrap().rank, 2);

        let line = Domain::cube(CoordinateSystem::new(["x"]).unwrap(), 0.5, 2.0).unwrap();
        let empty = invariants_from_kernel(&p("exp(-x)"), &[], &line, 9, 2).unwrap();
        assert!(empty.is_empty());

        let plane = Domain::cube(CoordinateSystem::new(["x", "y"]).unwrap(), 0.5, 2.0).unwrap();
        let err = invariants_from_kernel(&p("1/x"), &[p("2/x")], &plane, 9, 2).unwrap_err();
        assert_eq!(err, BuildError::DependentInvariants { rank: 0, expected: 1 });
    }

    #[test]
    fn basis_size_is_enforced() {
        assert!(matches!(
            InvariantBasis::new(vec![p("y/x")], xyz()),
            Err(BuildError::BasisSize { expected: 2, found: 1, .. })
        ));
    }

    #[test]
    fn template_validation() {
        assert!(SolutionTemplate::standard(2, p("u1*u2 + 1")).is_ok());
        assert_eq!(SolutionTemplate::standard(1, p("u1 + x")), Err(BuildError::UnboundTemplateVariable("x".into())));
        let f = SolutionTemplate::standard(1, p("u1")).unwrap();
        assert!(matches!(f.instantiate(&[p("x"), p("y")]), Err(BuildError::ArityMismatch { .. })));
    }

    #[test]
    fn general_reduced_examples() {
        let f = SolutionTemplate::standard(2, p("u1")).unwrap();
        let psi = general_reduced(&p("x^(-3/2)"), &radial_basis(), &f).unwrap();
        assert!(residual_ok(&radial("3/2"), &psi, "0"));

        let one = SolutionTemplate::standard(2, Expr::one()).unwrap();
        assert_eq!(general_reduced(&p("x^(-3/2)"), &radial_basis(), &one).unwrap(), p("x^(-3/2)").normalize());

        let unverified = InvariantBasis::new(vec![p("y/x"), p("z/x")], xyz()).unwrap();
        assert_eq!(general_reduced(&p("1/x"), &unverified, &f), Err(BuildError::UnverifiedBasis));

        let line = CoordinateSystem::new(["x"]).unwrap();
        let d = Domain::cube(line.clone(), -1.0, 1.0).unwrap();
        let empty = InvariantBasis::new(vec![], line).unwrap().verify(&d, 9, 1).unwrap();
        let c = SolutionTemplate::standard(0, Expr::num(4.0)).unwrap();
        assert_eq!(general_reduced(&p("exp(-x^2)"), &empty, &c).unwrap(), p("exp(-x^2)*4").normalize());
    }

    #[test]
    fn general_total_examples() {
        let op = radial("1");
        for body in ["u1", "u2^2", "u1*u2 + 1", "sin(u1) - exp(u2)"] {
            let f = SolutionTemplate::standard(2, p(body)).unwrap();
            let chi = general_total(&p("x^2"), &p("1/x"), &radial_basis(), &f).unwrap();
            assert!(residual_ok(&op, &chi, "3*x^2"), "f = {body}");
        }
        let zero = SolutionTemplate::standard(2, Expr::zero()).unwrap();
        assert_eq!(general_total(&p("x^2"), &p("1/x"), &radial_basis(), &zero).unwrap(), p("x^2"));
    }

    #[test]
    fn certified_total_rejects_bad_inputs() {
        let op = radial("1");
        let f = SolutionTemplate::standard(2, p("u1")).unwrap();
        let s = CheckSettings::default();
        let b = radial_basis();
        let rhs = p("3*x^2");
        assert!(general_total_certified(&op, &rhs, &p("x^2"), &p("1/x"), &b, &f, &cube(), &s).is_ok());
        assert!(matches!(
            general_total_certified(&op, &rhs, &p("x^3"), &p("1/x"), &b, &f, &cube(), &s),
            Err(BuildError::UncertifiedParticular { .. })
        ));
        assert!(matches!(
            general_total_certified(&op, &rhs, &p("x^2"), &p("x"), &b, &f, &cube(), &s),
            Err(BuildError::Operator(OperatorError::NotAKernelElement { .. }))
        ));
    }

    #[test]
    fn cross_ratio_examples() {
        let particulars = [p("x^2"), p("x^2 + 1/x"), p("x^2 + 1/y"), p("x^2 + 1/z")];
        let f = SolutionTemplate::standard(2, p("u1")).unwrap();
        let built = cross_ratio(&particulars, &f, None, &cube(), &CheckSettings::default()).unwrap();
        assert_eq!(built.eta, p("1/x"));
        assert_eq!(built.ratios, vec![p("x/y"), p("x/z")]);
        assert_eq!(built.solution, p("x^2 + 1/y"));
        assert!(residual_ok(&radial("1"), &built.solution, "3*x^2"));

        let same = [p("x^2"), p("x^2")];
        assert_eq!(
            cross_ratio(&same, &f, None, &cube(), &CheckSettings::default()),
            Err(BuildError::IdenticalParticulars)
        );
        assert_eq!(
            cross_ratio(&same[..1], &f, None, &cube(), &CheckSettings::default()),
            Err(BuildError::TooFewParticulars(1))
        );
    }

    #[test]
    fn cross_ratio_two_particulars_uses_caller_basis() {
        let particulars = [p("x^2"), p("x^2 + 1/x")];
        let f = SolutionTemplate::standard(2, p("u1*u2")).unwrap();
        let built = cross_ratio(&particulars, &f, Some(&radial_basis()), &cube(), &CheckSettings::default()).unwrap();
        assert!(built.ratios.is_empty());
        assert!(residual_ok(&radial("1"), &built.solution, "3*x^2"));
    }

    #[test]
    fn cross_ratio_sub_family() {
        // three particulars in three variables: one ratio, one placeholder
        let particulars = [p("x^2"), p("x^2 + 1/x"), p("x^2 + 1/z")];
        let f = SolutionTemplate::standard(1, p("u1^2")).unwrap();
        let built = cross_ratio(&particulars, &f, None, &cube(), &CheckSettings::default()).unwrap();
        assert_eq!(built.ratios, vec![p("x/z")]);
        assert!(residual_ok(&radial("1"), &built.solution, "3*x^2"));
    }
}
