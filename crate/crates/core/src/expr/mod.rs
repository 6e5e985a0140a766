//! Immutable symbolic expression trees.
//!
//! An [`Expr`] is a finite tree over real constants, named variables, the
//! four arithmetic operations, powers and a small set of elementary
//! functions. Trees are built by the parser ([`parse`]), by the operator
//! overloads on `Expr`, or directly through the variant constructors, and
//! then differentiated, substituted, normalized and evaluated at [`Point`]s.

mod diff;
mod eval;
mod normalize;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;

pub use eval::EvalError;
pub use parse::{parse, parse_prefix, ParseError, ParseErrorKind};

/// A symbolic real-valued expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Sqrt(Box<Expr>),
}

/// Elementary functions accepted by the parser, with their surface names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Exp,
    Ln,
    Abs,
    Sin,
    Cos,
    Sqrt,
}

impl Function {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Function::Exp,
            "ln" => Function::Ln,
            "abs" => Function::Abs,
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "sqrt" => Function::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Exp => "exp",
            Function::Ln => "ln",
            Function::Abs => "abs",
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Sqrt => "sqrt",
        }
    }

    pub fn apply(self, arg: Expr) -> Expr {
        let arg = Box::new(arg);
        match self {
            Function::Exp => Expr::Exp(arg),
            Function::Ln => Expr::Ln(arg),
            Function::Abs => Expr::Abs(arg),
            Function::Sin => Expr::Sin(arg),
            Function::Cos => Expr::Cos(arg),
            Function::Sqrt => Expr::Sqrt(arg),
        }
    }
}

/// Returns true for strings usable as variable names: `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Expr {
    /// A constant node. Panics on a non-finite value, which can never be stored.
    pub fn num(value: f64) -> Expr {
        assert!(value.is_finite(), "expression constants must be finite, got {value}");
        Expr::Const(value)
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    /// A variable node. Panics if `name` is not an identifier.
    pub fn var(name: impl Into<String>) -> Expr {
        let name = name.into();
        assert!(is_identifier(&name), "invalid variable name {name:?}");
        Expr::Var(name)
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(exponent))
    }

    pub fn powf(self, exponent: f64) -> Expr {
        self.pow(Expr::num(exponent))
    }

    pub fn abs(self) -> Expr {
        Expr::Abs(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn ln(self) -> Expr {
        Expr::Ln(Box::new(self))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Var(_) => Vec::new(),
            Expr::Neg(a) | Expr::Abs(a) | Expr::Exp(a) | Expr::Ln(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Sqrt(a) => {
                vec![a]
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                vec![a, b]
            }
        }
    }

    /// Rebuilds this node with each child replaced by `f(child)`.
    pub(crate) fn map_children(&self, mut f: impl FnMut(&Expr) -> Expr) -> Expr {
        let b = |e: &Expr, f: &mut dyn FnMut(&Expr) -> Expr| Box::new(f(e));
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(b(a, &mut f)),
            Expr::Abs(a) => Expr::Abs(b(a, &mut f)),
            Expr::Exp(a) => Expr::Exp(b(a, &mut f)),
            Expr::Ln(a) => Expr::Ln(b(a, &mut f)),
            Expr::Sin(a) => Expr::Sin(b(a, &mut f)),
            Expr::Cos(a) => Expr::Cos(b(a, &mut f)),
            Expr::Sqrt(a) => Expr::Sqrt(b(a, &mut f)),
            Expr::Add(l, r) => Expr::Add(b(l, &mut f), b(r, &mut f)),
            Expr::Sub(l, r) => Expr::Sub(b(l, &mut f), b(r, &mut f)),
            Expr::Mul(l, r) => Expr::Mul(b(l, &mut f), b(r, &mut f)),
            Expr::Div(l, r) => Expr::Div(b(l, &mut f), b(r, &mut f)),
            Expr::Pow(l, r) => Expr::Pow(b(l, &mut f), b(r, &mut f)),
        }
    }

    /// Number of nodes in the tree.
    pub fn node_count(&self) -> usize {
        1 + self.children().into_iter().map(Expr::node_count).sum::<usize>()
    }

    /// Names of all variables occurring in the tree, sorted.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        if let Expr::Var(name) = self {
            out.insert(name.clone());
        }
        for child in self.children() {
            child.collect_variables(out);
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self {
            Expr::Var(v) => v == name,
            _ => self.children().into_iter().any(|c| c.depends_on(name)),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var(_) => false,
            _ => self.children().into_iter().all(Expr::is_constant),
        }
    }

    /// Simultaneous replacement of bound variables. Substituted expressions
    /// are not themselves rewritten, and unbound variables pass through.
    pub fn substitute(&self, bindings: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Var(name) => bindings.get(name).cloned().unwrap_or_else(|| self.clone()),
            _ => self.map_children(|c| c.substitute(bindings)),
        }
    }

    pub fn differentiate(&self, var: &str) -> Expr {
        diff::differentiate(self, var)
    }

    pub fn normalize(&self) -> Expr {
        normalize::normalize(self)
    }

    pub fn evaluate(&self, point: &Point) -> Result<f64, EvalError> {
        eval::evaluate(self, point)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(f, self)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl From<f64> for Expr {
    fn from(value: f64) -> Self {
        Expr::num(value)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }

        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$variant(Box::new(self.clone()), Box::new(rhs.clone()))
            }
        }

        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$variant(Box::new(self), Box::new(Expr::num(rhs)))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self.clone()))
    }
}

/// Ordered list of distinct coordinate names, fixed for a problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateSystem {
    names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoordinateError {
    #[error("a coordinate system needs at least one coordinate")]
    Empty,
    #[error("invalid coordinate name {0:?}")]
    InvalidName(String),
    #[error("duplicate coordinate {0:?}")]
    Duplicate(String),
}

impl CoordinateSystem {
    pub fn new<I, S>(names: I) -> Result<Self, CoordinateError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(CoordinateError::Empty);
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !is_identifier(name) {
                return Err(CoordinateError::InvalidName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(CoordinateError::Duplicate(name.clone()));
            }
        }
        Ok(CoordinateSystem { names })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Builds a point from values listed in coordinate order.
    pub fn point(&self, values: &[f64]) -> Point {
        assert_eq!(values.len(), self.len(), "point arity must match the coordinate system");
        Point::new(self.names.iter().cloned().zip(values.iter().copied()))
    }
}

/// Ordered association of coordinate names to finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    entries: Vec<(String, f64)>,
}

impl Point {
    pub fn new<I, S>(entries: I) -> Point
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let entries = entries.into_iter().map(|(k, v)| (k.into(), v)).collect();
        Point { entries }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Copy of this point with the `index`-th coordinate shifted by `delta`.
    pub fn shifted(&self, index: usize, delta: f64) -> Point {
        let mut out = self.clone();
        out.entries[index].1 += delta;
        out
    }

    /// Copy of this point with all values replaced, in order.
    pub fn with_values(&self, values: &[f64]) -> Point {
        assert_eq!(values.len(), self.entries.len());
        let entries = self.entries.iter().zip(values).map(|((k, _), v)| (k.clone(), *v)).collect();
        Point { entries }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitute_replaces_simultaneously() {
        let e = parse("u1 + u2^2").unwrap();
        let bindings =
            BTreeMap::from([("u1".to_string(), parse("x/y").unwrap()), ("u2".to_string(), parse("x/z").unwrap())]);
        assert_eq!(e.substitute(&bindings), parse("x/y + (x/z)^2").unwrap());

        // no recursive re-substitution of the inserted expression
        let swap = BTreeMap::from([("a".to_string(), Expr::var("b")), ("b".to_string(), Expr::var("a"))]);
        assert_eq!(parse("a - b").unwrap().substitute(&swap), parse("b - a").unwrap());
    }

    #[test]
    fn substitute_single_and_unbound() {
        let bindings = BTreeMap::from([("u1".to_string(), parse("y/x").unwrap())]);
        assert_eq!(Expr::var("u1").substitute(&bindings), parse("y/x").unwrap());
        let other = BTreeMap::from([("y".to_string(), Expr::num(5.0))]);
        assert_eq!(Expr::var("x").substitute(&other), Expr::var("x"));
    }

    #[test]
    fn coordinate_system_validation() {
        assert!(CoordinateSystem::new(["x", "y"]).is_ok());
        assert_eq!(CoordinateSystem::new(Vec::<String>::new()), Err(CoordinateError::Empty));
        assert_eq!(CoordinateSystem::new(["x", "x"]), Err(CoordinateError::Duplicate("x".into())));
        assert_eq!(CoordinateSystem::new(["1x"]), Err(CoordinateError::InvalidName("1x".into())));
    }

    #[test]
    fn variables_are_collected() {
        let e = parse("x*exp(y) + sin(x)/z").unwrap();
        let vars: Vec<_> = e.variables().into_iter().collect();
        assert_eq!(vars, ["x", "y", "z"]);
        assert!(parse("2^3 + 1").unwrap().is_constant());
    }

    #[test]
    #[should_panic]
    fn non_finite_constant_is_rejected() {
        let _ = Expr::num(f64::NAN);
    }
}
