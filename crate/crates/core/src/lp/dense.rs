use std::ops::Range;

use super::ColumnSource;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `row · w <= rhs`
    Le,
    /// `row · w == rhs`
    Eq,
}

/// One extra row `coeffs · w (<=|==) rhs` over the original columns.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Original,
    /// Slack of the given row.
    Slack(usize),
}

/// Dense equality-form LP, stored column-major.
#[derive(Debug, Clone)]
pub struct StandardLp {
    n_rows: usize,
    n_cols: usize,
    cols: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    kinds: Vec<ColumnKind>,
}

impl StandardLp {
    /// Builds `min cᵀw s.t. rows · w = b, w >= 0` from row-major data.
    pub fn new(rows: &[Vec<f64>], b: Vec<f64>, c: Vec<f64>) -> Result<StandardLp> {
        let n_rows = rows.len();
        let n_cols = c.len();
        if b.len() != n_rows {
            return Err(Error::Precondition(format!(
                "{} right-hand sides for {n_rows} rows",
                b.len()
            )));
        }
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Precondition("LP needs at least one row and column".into()));
        }
        let mut cols = vec![0.0; n_rows * n_cols];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::Precondition(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                cols[j * n_rows + i] = *v;
            }
        }
        let lp = StandardLp {
            n_rows,
            n_cols,
            cols,
            b,
            c,
            kinds: vec![ColumnKind::Original; n_cols],
        };
        lp.validate()?;
        Ok(lp)
    }

    fn validate(&self) -> Result<()> {
        let finite = self.cols.iter().chain(&self.b).chain(&self.c).all(|v| v.is_finite());
        if !finite {
            return Err(Error::Precondition("LP data must be finite".into()));
        }
        Ok(())
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn costs(&self) -> &[f64] {
        &self.c
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.cols[j * self.n_rows + i]
    }

    /// Copy with `extra` rows appended. Inequality rows get a zero-cost slack
    /// column each, placed after the existing columns.
    pub fn with_rows(&self, extra: &[Constraint]) -> Result<StandardLp> {
        for (k, e) in extra.iter().enumerate() {
            if e.coeffs.len() != self.n_cols {
                return Err(Error::Precondition(format!(
                    "extra row {k} has {} entries, expected {}",
                    e.coeffs.len(),
                    self.n_cols
                )));
            }
        }
        let n_rows = self.n_rows + extra.len();
        let n_slack = extra.iter().filter(|e| e.sense == Sense::Le).count();
        let n_cols = self.n_cols + n_slack;
        let mut cols = vec![0.0; n_rows * n_cols];
        for j in 0..self.n_cols {
            let dst = &mut cols[j * n_rows..(j + 1) * n_rows];
            dst[..self.n_rows].copy_from_slice(&self.cols[j * self.n_rows..(j + 1) * self.n_rows]);
            for (k, e) in extra.iter().enumerate() {
                dst[self.n_rows + k] = e.coeffs[j];
            }
        }
        let mut kinds = self.kinds.clone();
        let mut c = self.c.clone();
        let mut slack = self.n_cols;
        for (k, e) in extra.iter().enumerate() {
            if e.sense == Sense::Le {
                cols[slack * n_rows + self.n_rows + k] = 1.0;
                kinds.push(ColumnKind::Slack(self.n_rows + k));
                c.push(0.0);
                slack += 1;
            }
        }
        let mut b = self.b.clone();
        b.extend(extra.iter().map(|e| e.rhs));
        let lp = StandardLp {
            n_rows,
            n_cols,
            cols,
            b,
            c,
            kinds,
        };
        lp.validate()?;
        Ok(lp)
    }

    /// `A w - b` for a primal vector over all columns.
    pub fn residual(&self, w: &[f64]) -> Vec<f64> {
        let mut r: Vec<f64> = self.b.iter().map(|v| -v).collect();
        for (j, wj) in w.iter().enumerate().take(self.n_cols) {
            if *wj != 0.0 {
                for i in 0..self.n_rows {
                    r[i] += self.entry(i, j) * wj;
                }
            }
        }
        r
    }
}

impl ColumnSource for StandardLp {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn rhs(&self) -> &[f64] {
        &self.b
    }

    fn cost(&self, j: usize) -> f64 {
        self.c[j]
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.cols[j * self.n_rows..(j + 1) * self.n_rows]);
    }

    fn reduced_costs(&self, y: &[f64], cost_scale: f64, range: Range<usize>, out: &mut [f64]) {
        for (slot, j) in out.iter_mut().zip(range) {
            let col = &self.cols[j * self.n_rows..(j + 1) * self.n_rows];
            let dot: f64 = col.iter().zip(y).map(|(a, b)| a * b).sum();
            *slot = cost_scale * self.c[j] - dot;
        }
    }
}
