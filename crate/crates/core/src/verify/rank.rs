use std::collections::BTreeMap;

use super::{Domain, VerifyError};
use crate::expr::{Expr, Point};

/// Pivots below this fraction of the largest Jacobian entry count as zero.
pub const RANK_PIVOT_THRESHOLD: f64 = 1e-8;

const MIN_RANK_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    /// Majority rank over the sampled points (ties go to the lower rank).
    pub rank: usize,
    pub per_point: Vec<usize>,
    /// Number of functions, i.e. the rank they would need to be independent.
    pub functions: usize,
}

impl RankReport {
    pub fn is_full(&self) -> bool {
        self.rank == self.functions
    }
}

/// Rank by Gaussian elimination with full pivoting. Entries are relative to
/// the largest absolute entry of the input.
pub fn matrix_rank(rows: &[Vec<f64>], threshold: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let n_rows = m.len();
    let n_cols = m.first().map_or(0, Vec::len);
    let scale = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let cutoff = threshold * scale;
    let mut rank = 0;
    for step in 0..n_rows.min(n_cols) {
        let mut best = (step, step, 0.0f64);
        for (r, row) in m.iter().enumerate().skip(step) {
            for (c, v) in row.iter().enumerate().skip(step) {
                if v.abs() > best.2 {
                    best = (r, c, v.abs());
                }
            }
        }
        if best.2 <= cutoff {
            break;
        }
        m.swap(step, best.0);
        for row in m.iter_mut() {
            row.swap(step, best.1);
        }
        let pivot_row = m[step].clone();
        for row in m.iter_mut().skip(step + 1) {
            let factor = row[step] / pivot_row[step];
            for (v, p) in row.iter_mut().zip(&pivot_row).skip(step) {
                *v -= factor * p;
            }
        }
        rank += 1;
    }
    rank
}

fn jacobian_at(partials: &[Vec<Expr>], p: &Point) -> Result<Vec<Vec<f64>>, VerifyError> {
    partials
        .iter()
        .map(|row| row.iter().map(|d| d.evaluate(p).map_err(|e| VerifyError::eval(e, p))).collect())
        .collect()
}

/// Numeric functional-independence test: the rank of the Jacobian of
/// `exprs` with respect to the domain's coordinates, by majority vote over
/// `n_points` sampled points.
pub fn independence_rank(
    exprs: &[Expr],
    domain: &Domain,
    n_points: usize,
    seed: u64,
) -> Result<RankReport, VerifyError> {
    if n_points < MIN_RANK_POINTS {
        return Err(VerifyError::InvalidArgument(format!(
            "independence test needs at least {MIN_RANK_POINTS} points, got {n_points}"
        )));
    }
    if exprs.is_empty() {
        return Ok(RankReport { rank: 0, per_point: vec![0; n_points], functions: 0 });
    }
    let partials: Vec<Vec<Expr>> =
        exprs.iter().map(|e| domain.coords().names().iter().map(|v| e.differentiate(v)).collect()).collect();
    let mut per_point = Vec::with_capacity(n_points);
    for p in domain.sample(n_points, seed)? {
        let jac = jacobian_at(&partials, &p)?;
        per_point.push(matrix_rank(&jac, RANK_PIVOT_THRESHOLD));
    }
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for r in &per_point {
        *votes.entry(*r).or_default() += 1;
    }
    // BTreeMap iterates ascending, so strict `>` keeps the lower rank on ties
    let mut rank = 0;
    let mut best = 0;
    for (r, count) in votes {
        if count > best {
            best = count;
            rank = r;
        }
    }
    Ok(RankReport { rank, per_point, functions: exprs.len() })
}
