//! Line-oriented problem files.
//!
//! ```text
//! # comments run to the end of the line
//! coords: x y z
//! field: x | y | z
//! q: 1
//! b: 3*x^2
//! box: x 0.5 2 | y 0.5 2 | z 0.5 2
//! guard: nonzero x 1e-6
//! candidate chi0: x^2
//! kernel eta1: 1/x
//! invariant phi1: y/x
//! eigen psi: exp(lambda*x)
//! shift Q1: x*y
//! template f: u1
//! set samples 200
//! ```
//!
//! Candidates solve `(L+q)χ = b`, kernels solve `(L+q)ψ = 0`, invariants
//! solve `Lφ = 0`, and eigenfunctions solve `Lψ = λψ` for every value in
//! `set lambdas`, with `lambda` standing for the eigenvalue. Templates are
//! expressions over placeholders `u1, u2, …`.

use std::collections::BTreeSet;
use std::path::Path;

use crate::expr::{parse, parse_prefix, CoordinateSystem, Expr};
use crate::operator::DifferentialOperator;
use crate::verify::{CheckSettings, Domain, FlowSettings, Guard, GuardKind, Interval, DEFAULT_GUARD_EPSILON};

/// Placeholder for the eigenvalue in `eigen` declarations.
pub const LAMBDA: &str = "lambda";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InputError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown coordinate {name:?}")]
    UnknownCoordinate { line: usize, name: String },
    #[error("line {line}: duplicate name {name:?}")]
    Duplicate { line: usize, name: String },
    #[error("missing required declaration {0:?}")]
    Missing(&'static str),
    #[error("cannot read problem file: {0}")]
    Io(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Named {
    pub name: String,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub step: f64,
    pub t_end: f64,
    pub flow_seeds: usize,
    pub drift_tol: f64,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub max_k: u32,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            samples: 200,
            tol: 1e-8,
            seed: 42,
            step: 1e-3,
            t_end: 1.0,
            flow_seeds: 20,
            drift_tol: 1e-5,
            lambdas: vec![0.0, 1.0],
            alphas: vec![2.0, 0.5],
            max_k: 2,
        }
    }
}

impl Settings {
    pub fn check(&self) -> CheckSettings {
        CheckSettings { samples: self.samples, tolerance: self.tol, seed: self.seed }
    }

    pub fn flow(&self) -> FlowSettings {
        FlowSettings { step: self.step, t_end: self.t_end, ..FlowSettings::default() }
    }
}

/// A validated problem file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub coords: CoordinateSystem,
    pub operator: DifferentialOperator,
    pub rhs: Expr,
    pub candidates: Vec<Named>,
    pub kernels: Vec<Named>,
    pub invariants: Vec<Named>,
    pub eigenfunctions: Vec<Named>,
    pub shifts: Vec<Named>,
    pub templates: Vec<Named>,
    pub domain: Domain,
    pub settings: Settings,
}

impl ProblemSpec {
    pub fn has_rhs(&self) -> bool {
        !self.rhs.is_zero()
    }
}

pub fn load_problem(path: &Path) -> Result<ProblemSpec, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError::Io(format!("{}: {e}", path.display())))?;
    parse_problem(&text)
}

struct Pending {
    line: usize,
    role: Role,
    name: String,
    expr: Expr,
}

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Candidate,
    Kernel,
    Invariant,
    Eigen,
    Shift,
    Template,
}

fn syntax(line: usize, message: impl Into<String>) -> InputError {
    InputError::Syntax { line, message: message.into() }
}

fn expr_at(line: usize, text: &str) -> Result<Expr, InputError> {
    parse(text.trim()).map_err(|e| syntax(line, format!("{e} in {:?}", text.trim())))
}

fn number_at<T: std::str::FromStr>(line: usize, text: &str) -> Result<T, InputError> {
    text.trim().parse().map_err(|_| syntax(line, format!("expected a number, found {:?}", text.trim())))
}

/// `|`-separated expressions. An expression ends where a bar can no
/// longer continue it.
fn parse_field(line: usize, text: &str) -> Result<Vec<Expr>, InputError> {
    let mut rest = text;
    let mut out = Vec::new();
    loop {
        let (expr, used) = parse_prefix(rest).map_err(|e| syntax(line, format!("{e} in field list")))?;
        out.push(expr);
        let tail = rest[used..].trim_start();
        if tail.is_empty() {
            return Ok(out);
        }
        match tail.strip_prefix('|') {
            Some(next) => rest = next,
            None => return Err(syntax(line, format!("expected '|' between field coefficients, found {tail:?}"))),
        }
    }
}

fn parse_guard(line: usize, text: &str) -> Result<Guard, InputError> {
    let text = text.trim();
    let (kind_word, rest) =
        text.split_once(char::is_whitespace).ok_or_else(|| syntax(line, "guard needs a kind and an expression"))?;
    let kind = match kind_word {
        "nonzero" => GuardKind::NonZero,
        "positive" => GuardKind::Positive,
        other => return Err(syntax(line, format!("unknown guard kind {other:?}"))),
    };
    let rest = rest.trim();
    // optional trailing epsilon
    if let Some((head, last)) = rest.rsplit_once(char::is_whitespace) {
        if let (Ok(eps), Ok(expr)) = (last.parse::<f64>(), parse(head)) {
            return Guard::new(expr, kind, eps).map_err(|e| syntax(line, e.to_string()));
        }
    }
    Guard::new(expr_at(line, rest)?, kind, DEFAULT_GUARD_EPSILON).map_err(|e| syntax(line, e.to_string()))
}

fn is_placeholder(name: &str) -> bool {
    name.strip_prefix('u').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// Coordinate name with its bounds.
type BoxEntry = (String, f64, f64);

pub fn parse_problem(text: &str) -> Result<ProblemSpec, InputError> {
    let mut coords: Option<(usize, Vec<String>)> = None;
    let mut field: Option<(usize, Vec<Expr>)> = None;
    let mut scalar: Option<(usize, Expr)> = None;
    let mut rhs: Option<(usize, Expr)> = None;
    let mut boxes: Option<(usize, Vec<BoxEntry>)> = None;
    let mut guards: Vec<(usize, Guard)> = Vec::new();
    let mut named: Vec<Pending> = Vec::new();
    let mut settings = Settings::default();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("set ") {
            apply_setting(line, rest, &mut settings)?;
            continue;
        }
        let (head, body) =
            content.split_once(':').ok_or_else(|| syntax(line, format!("expected 'key: value', found {content:?}")))?;
        let mut words = head.split_whitespace();
        let keyword = words.next().unwrap_or("");
        let name = words.next();
        if words.next().is_some() {
            return Err(syntax(line, format!("malformed declaration {head:?}")));
        }
        let once = |slot_taken: bool, what: &str| {
            if slot_taken {
                Err(syntax(line, format!("{what} declared twice")))
            } else {
                Ok(())
            }
        };
        match (keyword, name) {
            ("coords", None) => {
                once(coords.is_some(), "coords")?;
                coords = Some((line, body.split_whitespace().map(String::from).collect()));
            }
            ("field", None) => {
                once(field.is_some(), "field")?;
                field = Some((line, parse_field(line, body)?));
            }
            ("q", None) => {
                once(scalar.is_some(), "q")?;
                scalar = Some((line, expr_at(line, body)?));
            }
            ("b", None) => {
                once(rhs.is_some(), "b")?;
                rhs = Some((line, expr_at(line, body)?));
            }
            ("box", None) => {
                once(boxes.is_some(), "box")?;
                let mut entries = Vec::new();
                for part in body.split('|') {
                    let words: Vec<&str> = part.split_whitespace().collect();
                    let [coord, lo, hi] = words[..] else {
                        return Err(syntax(line, format!("box entry must be 'name lo hi', found {:?}", part.trim())));
                    };
                    entries.push((coord.to_string(), number_at(line, lo)?, number_at(line, hi)?));
                }
                boxes = Some((line, entries));
            }
            ("guard", None) => guards.push((line, parse_guard(line, body)?)),
            (kw, Some(name)) => {
                let role = match kw {
                    "candidate" => Role::Candidate,
                    "kernel" => Role::Kernel,
                    "invariant" => Role::Invariant,
                    "eigen" => Role::Eigen,
                    "shift" => Role::Shift,
                    "template" => Role::Template,
                    other => return Err(syntax(line, format!("unknown declaration {other:?}"))),
                };
                if !crate::expr::is_identifier(name) {
                    return Err(syntax(line, format!("invalid name {name:?}")));
                }
                if named.iter().any(|p| p.name == name) {
                    return Err(InputError::Duplicate { line, name: name.to_string() });
                }
                named.push(Pending { line, role, name: name.to_string(), expr: expr_at(line, body)? });
            }
            (kw, None) => return Err(syntax(line, format!("unknown or incomplete declaration {kw:?}"))),
        }
    }

    let (coords_line, coord_names) = coords.ok_or(InputError::Missing("coords"))?;
    let coords = CoordinateSystem::new(coord_names).map_err(|e| syntax(coords_line, e.to_string()))?;
    let known: BTreeSet<String> = coords.names().iter().cloned().collect();
    let check_vars = |line: usize, e: &Expr, extra: &dyn Fn(&str) -> bool| -> Result<(), InputError> {
        match e.variables().into_iter().find(|v| !known.contains(v) && !extra(v)) {
            Some(name) => Err(InputError::UnknownCoordinate { line, name }),
            None => Ok(()),
        }
    };
    let none = |_: &str| false;

    let (field_line, field) = field.ok_or(InputError::Missing("field"))?;
    for e in &field {
        check_vars(field_line, e, &none)?;
    }
    let (scalar_line, scalar) = scalar.unwrap_or((0, Expr::zero()));
    check_vars(scalar_line, &scalar, &none)?;
    let (rhs_line, rhs) = rhs.unwrap_or((0, Expr::zero()));
    check_vars(rhs_line, &rhs, &none)?;
    let operator =
        DifferentialOperator::new(coords.clone(), field, scalar).map_err(|e| syntax(field_line, e.to_string()))?;

    let (box_line, entries) = boxes.ok_or(InputError::Missing("box"))?;
    let mut bounds = Vec::with_capacity(coords.len());
    for name in coords.names() {
        let matching: Vec<_> = entries.iter().filter(|(c, _, _)| c == name).collect();
        match matching[..] {
            [(_, lo, hi)] => bounds.push(Interval::new(*lo, *hi).map_err(|e| syntax(box_line, e.to_string()))?),
            [] => return Err(syntax(box_line, format!("box has no interval for {name:?}"))),
            _ => return Err(InputError::Duplicate { line: box_line, name: name.clone() }),
        }
    }
    if let Some((c, _, _)) = entries.iter().find(|(c, _, _)| !coords.contains(c)) {
        return Err(InputError::UnknownCoordinate { line: box_line, name: c.clone() });
    }
    let mut domain = Domain::new(coords.clone(), bounds).map_err(|e| syntax(box_line, e.to_string()))?;
    for (line, g) in guards {
        check_vars(line, &g.expr, &none)?;
        domain = domain.with_guard(g);
    }

    let mut spec = ProblemSpec {
        coords,
        operator,
        rhs,
        candidates: Vec::new(),
        kernels: Vec::new(),
        invariants: Vec::new(),
        eigenfunctions: Vec::new(),
        shifts: Vec::new(),
        templates: Vec::new(),
        domain,
        settings,
    };
    for p in named {
        match p.role {
            Role::Template => {
                if let Some(v) = p.expr.variables().into_iter().find(|v| !is_placeholder(v)) {
                    return Err(syntax(p.line, format!("template variable {v:?} is not a placeholder u1, u2, ...")));
                }
            }
            Role::Eigen => check_vars(p.line, &p.expr, &|v| v == LAMBDA)?,
            _ => check_vars(p.line, &p.expr, &none)?,
        }
        let entry = Named { name: p.name, expr: p.expr };
        match p.role {
            Role::Candidate => spec.candidates.push(entry),
            Role::Kernel => spec.kernels.push(entry),
            Role::Invariant => spec.invariants.push(entry),
            Role::Eigen => spec.eigenfunctions.push(entry),
            Role::Shift => spec.shifts.push(entry),
            Role::Template => spec.templates.push(entry),
        }
    }
    Ok(spec)
}

fn apply_setting(line: usize, text: &str, s: &mut Settings) -> Result<(), InputError> {
    let mut words = text.split_whitespace();
    let key = words.next().ok_or_else(|| syntax(line, "empty setting"))?;
    let values: Vec<&str> = words.collect();
    let single = || -> Result<&str, InputError> {
        match values[..] {
            [v] => Ok(v),
            _ => Err(syntax(line, format!("setting {key:?} takes one value"))),
        }
    };
    let positive = |v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(syntax(line, format!("setting {key:?} must be positive")))
        }
    };
    let list = || values.iter().map(|v| number_at::<f64>(line, v)).collect::<Result<Vec<_>, _>>();
    match key {
        "samples" => s.samples = number_at(line, single()?)?,
        "tol" => s.tol = positive(number_at(line, single()?)?)?,
        "seed" => s.seed = number_at(line, single()?)?,
        "step" => s.step = positive(number_at(line, single()?)?)?,
        "t_end" => s.t_end = positive(number_at(line, single()?)?)?,
        "flow_seeds" => s.flow_seeds = number_at(line, single()?)?,
        "drift_tol" => s.drift_tol = positive(number_at(line, single()?)?)?,
        "max_k" => s.max_k = number_at(line, single()?)?,
        "lambdas" => s.lambdas = list()?,
        "alphas" => s.alphas = list()?,
        other => return Err(syntax(line, format!("unknown setting {other:?}"))),
    }
    if s.samples == 0 || s.flow_seeds == 0 {
        return Err(syntax(line, "counts must be positive"));
    }
    Ok(())
}
