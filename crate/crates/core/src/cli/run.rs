use std::fmt;
use std::str::FromStr;

use super::problem::{InputError, Named, ProblemSpec, LAMBDA};
use crate::expr::{parse, Expr};
use crate::operator::{eigen_shift, factor_to_homogeneous, kernel_power, kernel_report, PowerLimits};
use crate::solution::{
    cross_ratio, general_reduced, general_total_certified, InvariantBasis, SolutionTemplate, DEFAULT_RANK_POINTS,
};
use crate::verify::{
    compare_exprs, independence_rank, invariance_drift, lie_derivative_fd, relative_scale, residual_max,
    transport_drift, CheckSettings, Status, VerificationReport, DEFAULT_FD_STEP,
};

/// Tolerance when nested symbolic derivatives or finite differences are
/// involved.
pub const LOOSE_TOLERANCE: f64 = 1e-6;
/// Agreement required between symbolic and central-difference derivatives.
pub const ORACLE_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyKernel,
    VerifySolution,
    Factor,
    BuildGeneral,
    CrossRatio,
    EigenShift,
    Independence,
    Characteristics,
    All,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::VerifyKernel,
        Command::VerifySolution,
        Command::Factor,
        Command::BuildGeneral,
        Command::CrossRatio,
        Command::EigenShift,
        Command::Independence,
        Command::Characteristics,
        Command::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyKernel => "verify-kernel",
            Command::VerifySolution => "verify-solution",
            Command::Factor => "factor",
            Command::BuildGeneral => "build-general",
            Command::CrossRatio => "cross-ratio",
            Command::EigenShift => "eigen-shift",
            Command::Independence => "independence",
            Command::Characteristics => "characteristics",
            Command::All => "all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| InputError::Invalid(format!("unknown command {s:?}")))
    }
}

/// Command-line overrides. `None` leaves the problem file's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flags {
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub eta: Option<String>,
    pub candidate: Option<String>,
    pub f: Option<String>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub k: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub reports: Vec<VerificationReport>,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(VerificationReport::passed)
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn json_lines(&self) -> String {
        self.reports.iter().map(|r| r.to_json_line() + "\n").collect()
    }

    pub fn text(&self) -> String {
        let mut out: String = self.reports.iter().map(VerificationReport::to_text).collect();
        let passed = self.reports.iter().filter(|r| r.passed()).count();
        out.push_str(&format!("{passed}/{} checks passed\n", self.reports.len()));
        out
    }
}

/// Runs `command` with flags applied over the problem's settings.
pub fn run(command: Command, spec: &ProblemSpec, flags: &Flags) -> Result<RunOutcome, InputError> {
    let mut spec = spec.clone();
    if let Some(tol) = flags.tol {
        if tol.is_nan() || tol <= 0.0 {
            return Err(InputError::Invalid("--tol must be positive".into()));
        }
        spec.settings.tol = tol;
    }
    if let Some(samples) = flags.samples {
        if samples == 0 {
            return Err(InputError::Invalid("--samples must be positive".into()));
        }
        spec.settings.samples = samples;
    }
    if let Some(seed) = flags.seed {
        spec.settings.seed = seed;
    }
    let ctx = Context { spec: &spec, flags, check: spec.settings.check() };
    let reports = match command {
        Command::VerifyKernel => ctx.verify_kernel()?,
        Command::VerifySolution => ctx.verify_solution()?,
        Command::Factor => ctx.factor()?,
        Command::BuildGeneral => ctx.build_general()?,
        Command::CrossRatio => ctx.cross_ratio()?,
        Command::EigenShift => ctx.eigen_shift()?,
        Command::Independence => ctx.independence()?,
        Command::Characteristics => ctx.characteristics()?,
        Command::All => ctx.all()?,
    };
    Ok(RunOutcome { reports })
}

struct Context<'a> {
    spec: &'a ProblemSpec,
    flags: &'a Flags,
    check: CheckSettings,
}

fn error_report(check: &str, tol: f64, err: impl fmt::Display) -> VerificationReport {
    VerificationReport::error(check, tol, err.to_string())
}

impl Context<'_> {
    /// A declared name from `pool`, or an inline expression over the coordinates.
    fn resolve(&self, text: &str, pool: &[Named]) -> Result<Named, InputError> {
        if let Some(n) = pool.iter().find(|n| n.name == text) {
            return Ok(n.clone());
        }
        let expr = parse(text)
            .map_err(|e| InputError::Invalid(format!("{text:?} is neither a declared name nor an expression: {e}")))?;
        if let Some(v) = expr.variables().into_iter().find(|v| !self.spec.coords.contains(v)) {
            return Err(InputError::Invalid(format!("{text:?}: unknown coordinate {v:?}")));
        }
        Ok(Named { name: text.to_string(), expr })
    }

    /// Like [`Self::resolve`], but stray identifiers are left for evaluation
    /// to report, so the check fails instead of the input being rejected.
    fn resolve_candidate(&self, text: &str) -> Result<Named, InputError> {
        if let Some(n) = self.spec.candidates.iter().find(|n| n.name == text) {
            return Ok(n.clone());
        }
        let expr = parse(text).map_err(|e| InputError::Invalid(format!("--candidate {text:?}: {e}")))?;
        Ok(Named { name: text.to_string(), expr })
    }

    fn etas(&self) -> Result<Vec<Named>, InputError> {
        match &self.flags.eta {
            Some(text) => Ok(vec![self.resolve(text, &self.spec.kernels)?]),
            None if self.spec.kernels.is_empty() => {
                Err(InputError::Invalid("no kernel elements declared; pass --eta".into()))
            }
            None => Ok(self.spec.kernels.clone()),
        }
    }

    fn primary_eta(&self) -> Result<Named, InputError> {
        Ok(self.etas()?.remove(0))
    }

    fn templates(&self) -> Result<Vec<Named>, InputError> {
        match &self.flags.f {
            Some(text) => {
                if let Some(n) = self.spec.templates.iter().find(|n| &n.name == text) {
                    return Ok(vec![n.clone()]);
                }
                let expr = parse(text).map_err(|e| InputError::Invalid(format!("--f {text:?}: {e}")))?;
                Ok(vec![Named { name: text.clone(), expr }])
            }
            None if self.spec.templates.is_empty() => {
                Err(InputError::Invalid("no templates declared; pass --f".into()))
            }
            None => Ok(self.spec.templates.clone()),
        }
    }

    fn test_functions(&self) -> Vec<Expr> {
        let names = self.spec.coords.names();
        let x1 = Expr::var(names[0].clone());
        let mut out = vec![Expr::one(), x1.clone(), x1.clone().sin(), x1.clone().exp()];
        if let Some(x2) = names.get(1) {
            out.push(x1 * Expr::var(x2.clone()));
        }
        out
    }

    fn verify_kernel(&self) -> Result<Vec<VerificationReport>, InputError> {
        let op = &self.spec.operator;
        Ok(self
            .etas()?
            .iter()
            .map(|eta| {
                let check = format!("kernel (L+q)eta = 0 [{}]", eta.name);
                kernel_report(&check, op, &eta.expr, &self.spec.domain, &self.check)
            })
            .collect())
    }

    fn verify_solution(&self) -> Result<Vec<VerificationReport>, InputError> {
        let spec = self.spec;
        let mut out = Vec::new();
        let candidates = match &self.flags.candidate {
            Some(text) => vec![self.resolve_candidate(text)?],
            None => spec.candidates.clone(),
        };
        for c in &candidates {
            let check = format!("solution (L+q)chi = b [{}]", c.name);
            out.push(residual_max(&check, &spec.operator, &c.expr, &spec.rhs, &spec.domain, &self.check));
        }
        if self.flags.candidate.is_none() {
            let field = spec.operator.field_part();
            for phi in &spec.invariants {
                let check = format!("homogeneous L phi = 0 [{}]", phi.name);
                out.push(residual_max(&check, &field, &phi.expr, &Expr::zero(), &spec.domain, &self.check));
            }
        }
        if out.is_empty() {
            return Err(InputError::Invalid("no candidates or invariants to verify".into()));
        }
        Ok(out)
    }

    /// Symbolic `(L+q)e` against central differences plus `q e`.
    fn oracle(&self) -> Vec<VerificationReport> {
        let spec = self.spec;
        let op = &spec.operator;
        let settings = self.check.with_tolerance(ORACLE_TOLERANCE);
        let mut out = Vec::new();
        let pool = spec.candidates.iter().chain(&spec.kernels).chain(&spec.invariants);
        for item in pool {
            let check = format!("oracle symbolic vs central-difference Lie derivative [{}]", item.name);
            let symbolic = op.apply(&item.expr);
            let result =
                spec.domain.sample(settings.samples, settings.seed).map_err(|e| e.to_string()).and_then(|points| {
                    let mut worst = 0.0f64;
                    for p in &points {
                        let sym = symbolic.evaluate(p).map_err(|e| format!("{e} at {p}"))?;
                        let fd = lie_derivative_fd(op.field(), op.coords(), &item.expr, p, DEFAULT_FD_STEP)
                            .map_err(|e| e.to_string())?;
                        let q = op.scalar().evaluate(p).map_err(|e| format!("{e} at {p}"))?;
                        let value = item.expr.evaluate(p).map_err(|e| format!("{e} at {p}"))?;
                        let reference = fd + q * value;
                        worst = worst.max((sym - reference).abs() / relative_scale(reference));
                    }
                    Ok((worst, points.len()))
                });
            let report = match result {
                Ok((worst, n)) => VerificationReport::new(&check, worst, settings.tolerance).with_samples(
                    n,
                    settings.samples,
                    settings.seed,
                ),
                Err(e) => error_report(&check, settings.tolerance, e).with_samples(0, settings.samples, settings.seed),
            };
            out.push(report.with_domain(&spec.domain).with_subject("expr", &item.expr));
        }
        out
    }

    fn factor(&self) -> Result<Vec<VerificationReport>, InputError> {
        let spec = self.spec;
        let op = &spec.operator;
        let eta = self.primary_eta()?;
        let tol = self.check.tolerance;
        let label = |s: &str| format!("{s} [eta={}]", eta.name);
        let found = factor_to_homogeneous(op, &eta.expr, &spec.domain, &self.check);
        let (lfact, cert) = match found {
            Ok(pair) => pair,
            Err(err) => {
                let r = kernel_report(
                    &label("factorization L = eta^-1 (L+q) eta"),
                    op,
                    &eta.expr,
                    &spec.domain,
                    &self.check,
                );
                let r = if r.passed() { r.fail_with(err.to_string()) } else { r };
                return Ok(vec![r]);
            }
        };
        // identities hold only off the zero set of eta
        let domain = &cert.domain;
        let mut out = vec![compare_exprs(
            &label("factorization L = eta^-1 (L+q) eta: scalar part vanishes"),
            lfact.scalar(),
            &Expr::zero(),
            domain,
            &self.check,
        )
        .with_subject("operator", op)
        .with_subject("factored", &lfact)];

        let tests = self.test_functions();
        for psi in &tests {
            let lhs = op.apply(psi);
            let rhs = (eta.expr.clone() * lfact.apply(&(psi.clone() / eta.expr.clone()))).normalize();
            out.push(compare_exprs(
                &label(&format!("conjugation eta L eta^-1 = L + q [psi={psi}]")),
                &lhs,
                &rhs,
                domain,
                &self.check,
            ));
        }

        let back = op.conjugate(&eta.expr).conjugate(&(Expr::one() / eta.expr.clone()));
        out.push(compare_exprs(
            &label("conjugation round trip restores q"),
            back.scalar(),
            op.scalar(),
            domain,
            &self.check,
        ));

        for xi in spec.kernels.iter().filter(|k| k.name != eta.name) {
            let ratio = (xi.expr.clone() / eta.expr.clone()).normalize();
            let check = label(&format!("kernel ratio L(xi/eta) = 0 [xi={}]", xi.name));
            out.push(residual_max(&check, &lfact, &ratio, &Expr::zero(), domain, &self.check));
        }

        let shifts: Vec<Named> = if spec.shifts.is_empty() {
            vec![Named { name: spec.coords.names()[0].clone(), expr: Expr::var(spec.coords.names()[0].clone()) }]
        } else {
            spec.shifts.clone()
        };
        for shift in &shifts {
            let shifted = op.scalar_shift(&shift.expr);
            let target = lfact.scalar_shift(&shift.expr);
            for psi in tests.iter().skip(1).take(2) {
                let lhs = (shifted.apply(&(eta.expr.clone() * psi.clone())) / eta.expr.clone()).normalize();
                out.push(compare_exprs(
                    &label(&format!("scalar shift eta^-1 (L+q+Q) eta = L + Q [Q={}, psi={psi}]", shift.name)),
                    &lhs,
                    &target.apply(psi),
                    domain,
                    &self.check,
                ));
            }
            let a = op.scalar_shift(&shift.expr).conjugate(&eta.expr);
            let b = op.conjugate(&eta.expr).scalar_shift(&shift.expr);
            out.push(compare_exprs(
                &label(&format!("scalar shift commutes with conjugation [Q={}]", shift.name)),
                a.scalar(),
                b.scalar(),
                domain,
                &self.check,
            ));
        }

        let ks: Vec<u32> = match self.flags.k {
            Some(k) => vec![k],
            None => (0..=spec.settings.max_k).collect(),
        };
        let limits =
            PowerLimits { max_k: spec.settings.max_k.max(PowerLimits::default().max_k), ..PowerLimits::default() };
        let power_check = self.check.with_tolerance(tol.max(LOOSE_TOLERANCE));
        for k in ks {
            for psi in tests.iter().skip(1).take(2) {
                let check = label(&format!("operator power (L+q)^k = eta L^k eta^-1 [k={k}, psi={psi}]"));
                let lhs = op.apply_power(k, psi, &limits);
                let inner = lfact.apply_power(k, &(psi.clone() / eta.expr.clone()), &limits);
                out.push(match (lhs, inner) {
                    (Ok(lhs), Ok(inner)) => {
                        let rhs = (eta.expr.clone() * inner.expr).normalize();
                        let r = compare_exprs(&check, &lhs.expr, &rhs, domain, &power_check);
                        if lhs.over_budget || inner.over_budget {
                            r.with_detail(format!("expression exceeds {} nodes", limits.node_budget))
                        } else {
                            r
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => error_report(&check, power_check.tolerance, e),
                });
            }
        }

        let alphas = match self.flags.alpha {
            Some(a) => vec![a],
            None => spec.settings.alphas.clone(),
        };
        for alpha in alphas {
            let check = label(&format!("kernel power (L + alpha q)|eta|^alpha = 0 [alpha={alpha}]"));
            let use_abs = alpha.fract() != 0.0;
            out.push(match kernel_power(&eta.expr, alpha, op, use_abs) {
                Ok((shifted, powered)) => kernel_report(&check, &shifted, &powered, &spec.domain, &self.check),
                Err(e) => error_report(&check, tol, e),
            });
        }
        Ok(out)
    }

    fn verified_basis(&self) -> Result<InvariantBasis, String> {
        let spec = self.spec;
        let exprs = spec.invariants.iter().map(|n| n.expr.clone()).collect();
        InvariantBasis::new(exprs, spec.coords.clone())
            .and_then(|b| b.verify(&spec.domain, DEFAULT_RANK_POINTS, spec.settings.seed))
            .map_err(|e| e.to_string())
    }

    fn build_general(&self) -> Result<Vec<VerificationReport>, InputError> {
        let spec = self.spec;
        let eta = self.primary_eta()?;
        let templates = self.templates()?;
        let chi0 =
            if spec.has_rhs() {
                Some(match &self.flags.candidate {
                    Some(text) => self.resolve(text, &spec.candidates)?,
                    None => spec.candidates.first().cloned().ok_or_else(|| {
                        InputError::Invalid("no particular solution declared; pass --candidate".into())
                    })?,
                })
            } else {
                None
            };
        let basis = self.verified_basis();
        let mut out = Vec::new();
        for t in &templates {
            let check = match &chi0 {
                Some(c) => format!(
                    "general solution chi = chi0 + eta f(phi) [chi0={}, eta={}, f={}]",
                    c.name, eta.name, t.name
                ),
                None => format!("general solution psi = eta f(phi) [eta={}, f={}]", eta.name, t.name),
            };
            let built = basis.clone().map_err(|e| e.to_string()).and_then(|basis| {
                let f = SolutionTemplate::standard(basis.len(), t.expr.clone()).map_err(|e| e.to_string())?;
                match &chi0 {
                    Some(c) => general_total_certified(
                        &spec.operator,
                        &spec.rhs,
                        &c.expr,
                        &eta.expr,
                        &basis,
                        &f,
                        &spec.domain,
                        &self.check,
                    ),
                    None => general_reduced(&eta.expr, &basis, &f),
                }
                .map_err(|e| e.to_string())
            });
            out.push(match built {
                Ok(solution) => residual_max(&check, &spec.operator, &solution, &spec.rhs, &spec.domain, &self.check),
                Err(e) => error_report(&check, self.check.tolerance, e),
            });
        }
        Ok(out)
    }

    fn cross_ratio(&self) -> Result<Vec<VerificationReport>, InputError> {
        let spec = self.spec;
        if spec.candidates.len() < 2 {
            return Err(InputError::Invalid("cross-ratio needs at least two candidates".into()));
        }
        let templates = self.templates()?;
        let particulars: Vec<Expr> = spec.candidates.iter().map(|c| c.expr.clone()).collect();
        let fallback = if particulars.len() == 2 { self.verified_basis().ok() } else { None };
        let arity = if particulars.len() == 2 {
            fallback.as_ref().map_or(0, InvariantBasis::len)
        } else {
            particulars.len() - 2
        };
        let mut out = Vec::new();
        for t in &templates {
            let check = format!("cross-ratio (chi - chi0)/(chi1 - chi0) = f(ratios) [f={}]", t.name);
            let built = SolutionTemplate::standard(arity, t.expr.clone())
                .and_then(|f| cross_ratio(&particulars, &f, fallback.as_ref(), &spec.domain, &self.check));
            out.push(match built {
                Ok(cr) => {
                    let ratios: Vec<String> = cr.ratios.iter().map(ToString::to_string).collect();
                    let rank = cr.basis.independence().map_or(0, |r| r.rank);
                    residual_max(&check, &spec.operator, &cr.solution, &spec.rhs, &spec.domain, &self.check)
                        .with_subject("eta", &cr.eta)
                        .with_subject("ratios", ratios.join(", "))
                        .with_subject("chi", &cr.solution)
                        .with_detail(format!("ratio rank {rank} of {}", cr.basis.len()))
                }
                Err(e) => error_report(&check, self.check.tolerance, e),
            });
        }
        Ok(out)
    }

    fn eigen_shift(&self) -> Result<Vec<VerificationReport>, InputError> {
        let spec = self.spec;
        if spec.eigenfunctions.is_empty() {
            return Err(InputError::Invalid("no eigenfunctions declared".into()));
        }
        let eta = self.primary_eta()?;
        let lambdas = match self.flags.lambda {
            Some(l) => vec![l],
            None => spec.settings.lambdas.clone(),
        };
        let field = spec.operator.field_part();
        let mut out = Vec::new();
        for psi in &spec.eigenfunctions {
            for &lambda in &lambdas {
                let bindings = [(LAMBDA.to_string(), Expr::num(lambda))].into_iter().collect();
                let psi_l = psi.expr.substitute(&bindings).normalize();
                let shift = Expr::num(-lambda);
                let premise = residual_max(
                    &format!("eigenfunction (L - lambda)psi = 0 [psi={}, lambda={lambda}]", psi.name),
                    &field.scalar_shift(&shift),
                    &psi_l,
                    &Expr::zero(),
                    &spec.domain,
                    &self.check,
                );
                let lifted = eigen_shift(&eta.expr, &psi_l);
                let mut conclusion = residual_max(
                    &format!(
                        "eigen shift (L + q - lambda)(eta psi) = 0 [eta={}, psi={}, lambda={lambda}]",
                        eta.name, psi.name
                    ),
                    &spec.operator.scalar_shift(&shift),
                    &lifted,
                    &Expr::zero(),
                    &spec.domain,
                    &self.check,
                );
                if !premise.passed() && conclusion.status == Status::Pass {
                    conclusion = conclusion.fail_with("premise (L - lambda)psi = 0 failed");
                }
                out.push(premise);
                out.push(conclusion);
            }
        }
        Ok(out)
    }

    fn rank_report(&self, check: &str, exprs: &[Expr]) -> VerificationReport {
        let spec = self.spec;
        match independence_rank(exprs, &spec.domain, DEFAULT_RANK_POINTS, spec.settings.seed) {
            Ok(r) => {
                let deficit = (r.functions - r.rank) as f64;
                VerificationReport::new(check, deficit, 0.0)
                    .with_samples(r.per_point.len(), DEFAULT_RANK_POINTS, spec.settings.seed)
                    .with_domain(&spec.domain)
                    .with_detail(format!("rank {} of {}; per-point {:?}", r.rank, r.functions, r.per_point))
            }
            Err(e) => error_report(check, 0.0, e),
        }
    }

    fn independence(&self) -> Result<Vec<VerificationReport>, InputError> {
        let spec = self.spec;
        let mut out = Vec::new();
        if !spec.invariants.is_empty() {
            let exprs: Vec<Expr> = spec.invariants.iter().map(|n| n.expr.clone()).collect();
            let names: Vec<&str> = spec.invariants.iter().map(|n| n.name.as_str()).collect();
            out.push(
                self.rank_report(&format!("independence Jacobian rank of invariants [{}]", names.join(", ")), &exprs),
            );
        }
        if spec.kernels.len() >= 2 {
            let eta = &spec.kernels[0];
            let ratios: Vec<Expr> =
                spec.kernels[1..].iter().map(|k| (k.expr.clone() / eta.expr.clone()).normalize()).collect();
            out.push(self.rank_report(
                &format!("independence Jacobian rank of kernel ratios eta_j/eta [eta={}]", eta.name),
                &ratios,
            ));
        }
        if out.is_empty() {
            return Err(InputError::Invalid("independence needs invariants or at least two kernel elements".into()));
        }
        Ok(out)
    }

    fn characteristics(&self) -> Result<Vec<VerificationReport>, InputError> {
        let spec = self.spec;
        if spec.invariants.is_empty() && spec.kernels.is_empty() {
            return Err(InputError::Invalid("characteristics needs invariants or kernel elements".into()));
        }
        let flow = spec.settings.flow();
        let tol = spec.settings.drift_tol;
        let n = spec.settings.flow_seeds;
        let seeds = spec
            .domain
            .sample(n, spec.settings.seed)
            .map_err(|e| InputError::Invalid(format!("cannot draw flow seeds: {e}")))?;
        let detail = |truncated: usize| {
            format!("rk4 step {:e}, t_end {}, {truncated} of {n} curves left the safety box", flow.step, flow.t_end)
        };
        let finish = |check: String, r: Result<crate::verify::Drift, crate::verify::VerifyError>| match r {
            Ok(d) => VerificationReport::new(check, d.max, tol)
                .with_samples(n, n, spec.settings.seed)
                .with_domain(&spec.domain)
                .with_detail(detail(d.truncated)),
            Err(e) => error_report(&check, tol, e),
        };
        let mut out = Vec::new();
        for phi in &spec.invariants {
            let check = format!("characteristics: invariant phi constant along flow [{}]", phi.name);
            let r = invariance_drift(&phi.expr, spec.operator.field(), &spec.coords, &seeds, &flow);
            out.push(finish(check, r).with_subject("phi", &phi.expr));
        }
        for k in &spec.kernels {
            let check = format!("characteristics: psi exp(int q) constant along flow [{}]", k.name);
            let r = transport_drift(&k.expr, &spec.operator, &seeds, &flow);
            out.push(finish(check, r).with_subject("psi", &k.expr));
        }
        Ok(out)
    }

    fn all(&self) -> Result<Vec<VerificationReport>, InputError> {
        let spec = self.spec;
        let n = spec.coords.len();
        let mut out = Vec::new();
        if !spec.candidates.is_empty() || !spec.invariants.is_empty() {
            out.extend(self.verify_solution()?);
        }
        out.extend(self.oracle());
        let have_eta = self.flags.eta.is_some() || !spec.kernels.is_empty();
        if have_eta {
            out.extend(self.verify_kernel()?);
            out.extend(self.factor()?);
            if !spec.eigenfunctions.is_empty() {
                out.extend(self.eigen_shift()?);
            }
            let have_chi0 = !spec.has_rhs() || !spec.candidates.is_empty();
            let have_f = self.flags.f.is_some() || !spec.templates.is_empty();
            if spec.invariants.len() + 1 == n && have_chi0 && have_f {
                out.extend(self.build_general()?);
            }
        }
        if spec.has_rhs() && spec.candidates.len() >= 2 && (self.flags.f.is_some() || !spec.templates.is_empty()) {
            out.extend(self.cross_ratio()?);
        }
        if !spec.invariants.is_empty() || spec.kernels.len() >= 2 {
            out.extend(self.independence()?);
        }
        if !spec.invariants.is_empty() || !spec.kernels.is_empty() {
            out.extend(self.characteristics()?);
        }
        Ok(out)
    }
}
