use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::VerifyError;
use crate::expr::{CoordinateSystem, Expr, Point};

/// Guard epsilon used when a problem does not state one.
pub const DEFAULT_GUARD_EPSILON: f64 = 1e-6;

const REJECTIONS_PER_SAMPLE: usize = 100;

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, VerifyError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(VerifyError::InvalidArgument(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardKind {
    /// accept when `|g| >= eps`
    NonZero,
    /// accept when `g >= eps`
    Positive,
}

/// Sampling-time constraint excluding the set where a function vanishes or
/// changes sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Guard {
    pub expr: Expr,
    pub kind: GuardKind,
    pub epsilon: f64,
}

impl Guard {
    pub fn new(expr: Expr, kind: GuardKind, epsilon: f64) -> Result<Self, VerifyError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(VerifyError::InvalidArgument(format!("guard epsilon must be positive, got {epsilon}")));
        }
        Ok(Guard { expr, kind, epsilon })
    }

    pub fn nonzero(expr: Expr) -> Self {
        Guard { expr, kind: GuardKind::NonZero, epsilon: DEFAULT_GUARD_EPSILON }
    }

    pub fn positive(expr: Expr) -> Self {
        Guard { expr, kind: GuardKind::Positive, epsilon: DEFAULT_GUARD_EPSILON }
    }

    /// Points where the guard expression cannot be evaluated are rejected.
    pub fn accepts(&self, p: &Point) -> bool {
        match self.expr.evaluate(p) {
            Ok(v) => match self.kind {
                GuardKind::NonZero => v.abs() >= self.epsilon,
                GuardKind::Positive => v >= self.epsilon,
            },
            Err(_) => false,
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GuardKind::NonZero => write!(f, "|{}| >= {:e}", self.expr, self.epsilon),
            GuardKind::Positive => write!(f, "{} >= {:e}", self.expr, self.epsilon),
        }
    }
}

/// Coordinate box with guard predicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    coords: CoordinateSystem,
    bounds: Vec<Interval>,
    guards: Vec<Guard>,
}

impl Domain {
    pub fn new(coords: CoordinateSystem, bounds: Vec<Interval>) -> Result<Self, VerifyError> {
        if bounds.len() != coords.len() {
            return Err(VerifyError::InvalidArgument(format!(
                "{} intervals for {} coordinates",
                bounds.len(),
                coords.len()
            )));
        }
        Ok(Domain { coords, bounds, guards: Vec::new() })
    }

    /// The same interval on every coordinate.
    pub fn cube(coords: CoordinateSystem, lo: f64, hi: f64) -> Result<Self, VerifyError> {
        let interval = Interval::new(lo, hi)?;
        let n = coords.len();
        Domain::new(coords, vec![interval; n])
    }

    pub fn with_guard(mut self, guard: Guard) -> Self {
        if !self.guards.contains(&guard) {
            self.guards.push(guard);
        }
        self
    }

    pub fn coords(&self) -> &CoordinateSystem {
        &self.coords
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn guards(&self) -> &[Guard] {
        &self.guards
    }

    /// Smallest guard epsilon, or the default when there are no guards.
    pub fn guard_epsilon(&self) -> f64 {
        self.guards
            .iter()
            .map(|g| g.epsilon)
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.min(e))))
            .unwrap_or(DEFAULT_GUARD_EPSILON)
    }

    pub fn in_box(&self, p: &Point) -> bool {
        self.coords.names().iter().zip(&self.bounds).all(|(name, iv)| p.get(name).is_some_and(|v| iv.contains(v)))
    }

    pub fn accepts(&self, p: &Point) -> bool {
        self.in_box(p) && self.guards.iter().all(|g| g.accepts(p))
    }

    /// Interval-wise intersection with the union of both guard lists.
    pub fn intersect(&self, other: &Domain) -> Result<Domain, VerifyError> {
        if self.coords != other.coords {
            return Err(VerifyError::CoordinateMismatch);
        }
        let mut bounds = Vec::with_capacity(self.bounds.len());
        for ((name, a), b) in self.coords.names().iter().zip(&self.bounds).zip(&other.bounds) {
            let lo = a.lo.max(b.lo);
            let hi = a.hi.min(b.hi);
            if lo >= hi {
                return Err(VerifyError::EmptyDomain(name.clone()));
            }
            bounds.push(Interval { lo, hi });
        }
        let mut out = Domain { coords: self.coords.clone(), bounds, guards: self.guards.clone() };
        for g in &other.guards {
            out = out.with_guard(g.clone());
        }
        Ok(out)
    }

    /// `n` points drawn uniformly from the box and filtered by the guards.
    /// Deterministic for a given seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Point>, VerifyError> {
        if n == 0 {
            return Err(VerifyError::InvalidArgument("sample count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let limit = REJECTIONS_PER_SAMPLE * n;
        let mut points = Vec::with_capacity(n);
        let mut rejected = 0;
        let mut values = vec![0.0; self.bounds.len()];
        while points.len() < n {
            for (v, iv) in values.iter_mut().zip(&self.bounds) {
                *v = iv.lo + iv.width() * rng.gen::<f64>();
            }
            let p = self.coords.point(&values);
            if self.guards.iter().all(|g| g.accepts(&p)) {
                points.push(p);
            } else {
                rejected += 1;
                if rejected > limit {
                    return Err(VerifyError::SamplingExhausted { requested: n, accepted: points.len(), rejected });
                }
            }
        }
        Ok(points)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, iv)) in self.coords.names().iter().zip(&self.bounds).enumerate() {
            if i > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "{name} in [{}, {}]", iv.lo, iv.hi)?;
        }
        for g in &self.guards {
            write!(f, "; {g}")?;
        }
        Ok(())
    }
}
