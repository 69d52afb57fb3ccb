//! Revised simplex for linear programs with few rows and very many columns.
//!
//! The problem is `min cᵀw  s.t.  A w = b,  w >= 0`. Columns are never stored
//! by the solver: it asks a [`ColumnSource`] for reduced costs during pricing
//! and for single columns when it pivots, and keeps only the dense basis
//! inverse (`rows × rows`).

mod dense;
mod simplex;

pub use dense::{ColumnKind, Constraint, Sense, StandardLp};
pub use simplex::{solve_source, solve_source_warm, SimplexOptions};

use std::ops::Range;

use crate::error::Result;

/// Column-oriented view of an equality-form LP.
pub trait ColumnSource: Sync {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    fn rhs(&self) -> &[f64];
    fn cost(&self, j: usize) -> f64;
    /// Writes column `j` (length `n_rows`) into `out`.
    fn column(&self, j: usize, out: &mut [f64]);

    /// Writes `cost_scale * c_j - y · a_j` for `j` in `range` into `out`.
    fn reduced_costs(&self, y: &[f64], cost_scale: f64, range: Range<usize>, out: &mut [f64]) {
        let mut col = vec![0.0; self.n_rows()];
        for (slot, j) in out.iter_mut().zip(range) {
            self.column(j, &mut col);
            let dot: f64 = col.iter().zip(y).map(|(a, b)| a * b).sum();
            *slot = cost_scale * self.cost(j) - dot;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of a simplex run.
///
/// `basis` has one entry per row; indices `>= n_cols` are artificial
/// variables left at zero on redundant rows.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub basis: Vec<usize>,
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    /// Indices with strictly positive primal value.
    pub fn support(&self) -> Vec<usize> {
        self.x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves a dense standard-form LP with default options.
pub fn solve(lp: &StandardLp) -> Result<LpSolution> {
    solve_source(lp, &SimplexOptions::default())
}

/// Appends `extra` rows to `lp` (slacks for inequalities) and solves.
///
/// The primal vector covers the original columns followed by one slack per
/// inequality row; `basis` indexes into that same numbering.
pub fn solve_with_extra_rows(lp: &StandardLp, extra: &[Constraint]) -> Result<LpSolution> {
    solve(&lp.with_rows(extra)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(rows: &[&[f64]], b: &[f64], c: &[f64]) -> StandardLp {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        StandardLp::new(&rows, b.to_vec(), c.to_vec()).unwrap()
    }

    #[test]
    fn picks_the_cheaper_vertex() {
        let s = solve(&lp(&[&[1.0, 1.0]], &[1.0], &[-1.0, 0.0])).unwrap();
        assert!(s.is_optimal());
        assert_eq!(s.x, vec![1.0, 0.0]);
        assert_eq!(s.objective, -1.0);
    }

    #[test]
    fn negative_rhs_without_support_is_infeasible() {
        let s = solve(&lp(&[&[1.0]], &[-1.0], &[0.0])).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded_direction() {
        let s = solve(&lp(&[&[1.0, -1.0]], &[1.0], &[0.0, -1.0])).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn inequality_slice_binds() {
        let base = lp(&[&[1.0, 1.0]], &[1.0], &[-1.0, 0.0]);
        let extra = [Constraint {
            coeffs: vec![1.0, -1.0],
            sense: Sense::Le,
            rhs: 0.0,
        }];
        let s = solve_with_extra_rows(&base, &extra).unwrap();
        assert!((s.x[0] - 0.5).abs() < 1e-12 && (s.x[1] - 0.5).abs() < 1e-12);
        assert_eq!(s.x.len(), 3);
    }

    #[test]
    fn equality_slice_pins_value() {
        let base = lp(&[&[1.0, 1.0]], &[1.0], &[-1.0, 0.0]);
        let extra = [Constraint {
            coeffs: vec![1.0, 0.0],
            sense: Sense::Eq,
            rhs: 0.0,
        }];
        let s = solve_with_extra_rows(&base, &extra).unwrap();
        assert!(s.is_optimal());
        assert!(s.objective.abs() < 1e-12);
    }

    #[test]
    fn redundant_rows_keep_an_artificial() {
        // Second row duplicates the first.
        let l = lp(&[&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]], &[1.0, 2.0], &[3.0, 1.0, 2.0]);
        let s = solve(&l).unwrap();
        assert!(s.is_optimal());
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!(s.basis.iter().any(|&j| j >= l.n_cols()));
        let r = l.residual(&s.x);
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn warm_start_reuses_feasible_basis() {
        let l = lp(&[&[1.0, 1.0, 1.0], &[1.0, -1.0, 0.0]], &[1.0, 0.0], &[1.0, 2.0, 0.5]);
        let s = solve(&l).unwrap();
        let w = solve_source_warm(&l, &s.basis, &SimplexOptions::default()).unwrap();
        assert_eq!(w.iterations, 0);
        assert_eq!(w.x, s.x);
        let junk = solve_source_warm(&l, &[0, 0], &SimplexOptions::default()).unwrap();
        assert_eq!(junk.objective, s.objective);
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let l = lp(&[&[1.0, 1.0]], &[1.0], &[-1.0, 0.0]);
        let opts = SimplexOptions {
            max_iterations: 0,
            ..SimplexOptions::default()
        };
        let err = solve_source(&l, &opts).unwrap_err();
        assert!(matches!(err, crate::Error::NoConvergence { .. }));
    }
}
