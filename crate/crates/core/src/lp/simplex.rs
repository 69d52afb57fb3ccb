//! Two-phase revised simplex with an explicit dense basis inverse.
//!
//! Phase 1 starts from an all-artificial basis; phase 2 prices every column
//! with Dantzig's rule and falls back to Bland's rule after a long run of
//! non-improving pivots. Artificials that cannot be driven out of the basis
//! sit on redundant rows and are pinned at zero by the ratio test.

use super::{ColumnSource, LpSolution, LpStatus};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Rebuild the basis inverse after this many pivots.
    pub refactor_every: usize,
    /// Rebuild early when `‖B x_B - b‖∞` exceeds this.
    pub residual_tol: f64,
    /// Smallest pivot element accepted in the ratio test.
    pub pivot_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality_tol: f64,
    /// Phase-1 infeasibility threshold (relative to `1 + ‖b‖∞`).
    pub feasibility_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: 1_000_000,
            refactor_every: 50,
            residual_tol: 1e-9,
            pivot_tol: 1e-10,
            optimality_tol: 1e-9,
            feasibility_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Debug, PartialEq, Eq)]
enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Engine<'a, S: ColumnSource + ?Sized> {
    src: &'a S,
    opts: &'a SimplexOptions,
    m: usize,
    n: usize,
    sign: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    col: Vec<f64>,
}

/// Solves from scratch.
pub fn solve_source<S: ColumnSource + ?Sized>(src: &S, opts: &SimplexOptions) -> Result<LpSolution> {
    let mut e = Engine::new(src, opts)?;
    e.cold_start();
    e.run_two_phases()
}

/// Solves starting from `basis` when it is primal feasible for `src`,
/// otherwise from scratch. Intended for re-solving with a changed objective.
pub fn solve_source_warm<S: ColumnSource + ?Sized>(
    src: &S,
    basis: &[usize],
    opts: &SimplexOptions,
) -> Result<LpSolution> {
    let mut e = Engine::new(src, opts)?;
    if e.warm_start(basis) {
        match e.run_phase(Phase::Two)? {
            PhaseEnd::Optimal => Ok(e.solution(LpStatus::Optimal)),
            PhaseEnd::Unbounded => Ok(e.solution(LpStatus::Unbounded)),
        }
    } else {
        e.cold_start();
        e.run_two_phases()
    }
}

impl<'a, S: ColumnSource + ?Sized> Engine<'a, S> {
    fn new(src: &'a S, opts: &'a SimplexOptions) -> Result<Self> {
        let m = src.n_rows();
        let n = src.n_cols();
        if m == 0 || n == 0 {
            return Err(Error::Precondition("empty LP".into()));
        }
        let rhs = src.rhs();
        if rhs.len() != m || rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("right-hand side must be finite".into()));
        }
        let sign: Vec<f64> = rhs.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
        let b = rhs.iter().zip(&sign).map(|(v, s)| v * s).collect();
        Ok(Engine {
            src,
            opts,
            m,
            n,
            sign,
            b,
            basis: Vec::new(),
            in_basis: vec![false; n + m],
            binv: vec![0.0; m * m],
            xb: vec![0.0; m],
            iterations: 0,
            since_refactor: 0,
            col: vec![0.0; m],
        })
    }

    fn cold_start(&mut self) {
        self.in_basis.iter_mut().for_each(|v| *v = false);
        self.basis = (self.n..self.n + self.m).collect();
        for &j in &self.basis {
            self.in_basis[j] = true;
        }
        self.binv.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.m {
            self.binv[i * self.m + i] = 1.0;
        }
        self.xb = self.b.clone();
        self.since_refactor = 0;
    }

    fn warm_start(&mut self, basis: &[usize]) -> bool {
        if basis.len() != self.m || basis.iter().any(|&j| j >= self.n + self.m) {
            return false;
        }
        self.in_basis.iter_mut().for_each(|v| *v = false);
        for &j in basis {
            if self.in_basis[j] {
                return false;
            }
            self.in_basis[j] = true;
        }
        self.basis = basis.to_vec();
        if !self.refactor() {
            return false;
        }
        let tol = self.feas_tol();
        self.basis
            .iter()
            .zip(&self.xb)
            .all(|(&j, &x)| x >= -tol && (j < self.n || x <= tol))
    }

    fn feas_tol(&self) -> f64 {
        let bmax = self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        self.opts.feasibility_tol * (1.0 + bmax)
    }

    fn run_two_phases(&mut self) -> Result<LpSolution> {
        let end = self.run_phase(Phase::One)?;
        debug_assert_eq!(end, PhaseEnd::Optimal);
        let infeasibility: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(j, _)| **j >= self.n)
            .map(|(_, x)| x.max(0.0))
            .sum();
        if infeasibility > self.feas_tol() {
            return Ok(self.solution(LpStatus::Infeasible));
        }
        self.drive_out_artificials();
        match self.run_phase(Phase::Two)? {
            PhaseEnd::Optimal => Ok(self.solution(LpStatus::Optimal)),
            PhaseEnd::Unbounded => Ok(self.solution(LpStatus::Unbounded)),
        }
    }

    fn signed_column(&mut self, j: usize) {
        if j < self.n {
            self.src.column(j, &mut self.col);
            for (v, s) in self.col.iter_mut().zip(&self.sign) {
                *v *= s;
            }
        } else {
            self.col.iter_mut().for_each(|v| *v = 0.0);
            self.col[j - self.n] = 1.0;
        }
    }

    fn cost_of(&self, j: usize, phase: Phase) -> f64 {
        match phase {
            Phase::One => (j >= self.n) as u8 as f64,
            Phase::Two => {
                if j < self.n {
                    self.src.cost(j)
                } else {
                    0.0
                }
            }
        }
    }

    fn objective(&self, phase: Phase) -> f64 {
        self.basis
            .iter()
            .zip(&self.xb)
            .map(|(&j, x)| self.cost_of(j, phase) * x)
            .sum()
    }

    /// Gauss–Jordan inverse of the current basis; false when singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for k in 0..m {
            let j = self.basis[k];
            self.signed_column(j);
            for i in 0..m {
                a[i * m + k] = self.col[i];
            }
        }
        let Some(inv) = invert(&mut a, m) else {
            return false;
        };
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&self.b).map(|(p, q)| p * q).sum();
            self.xb[i] = v;
        }
        let tol = self.feas_tol();
        for x in &mut self.xb {
            if *x < 0.0 && *x > -tol {
                *x = 0.0;
            }
        }
        self.since_refactor = 0;
        true
    }

    fn residual(&mut self) -> f64 {
        let m = self.m;
        let mut r: Vec<f64> = self.b.iter().map(|v| -v).collect();
        for k in 0..m {
            let j = self.basis[k];
            let x = self.xb[k];
            if x != 0.0 {
                self.signed_column(j);
                for i in 0..m {
                    r[i] += self.col[i] * x;
                }
            }
        }
        r.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Simplex multipliers in the sign-flipped row space.
    fn duals(&self, phase: Phase) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for i in 0..m {
            let c = self.cost_of(self.basis[i], phase);
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for k in 0..m {
                    y[k] += c * row[k];
                }
            }
        }
        y
    }

    /// Entering column: most negative reduced cost (Dantzig), or the lowest
    /// index with negative reduced cost (Bland).
    fn price(&self, y: &[f64], phase: Phase, bland: bool) -> Option<(f64, usize)> {
        let y_src: Vec<f64> = y.iter().zip(&self.sign).map(|(a, s)| a * s).collect();
        let scale = if phase == Phase::Two { 1.0 } else { 0.0 };
        let tol = self.opts.optimality_tol;
        let in_basis = &self.in_basis;
        let src = self.src;
        par::argmin_blocks(self.n, |range| {
            let start = range.start;
            let mut d = vec![0.0; range.len()];
            src.reduced_costs(&y_src, scale, range, &mut d);
            let mut best: Option<(f64, usize)> = None;
            for (k, dk) in d.iter().enumerate() {
                let j = start + k;
                if *dk < -tol && !in_basis[j] {
                    if bland {
                        return Some((0.0, j));
                    }
                    if best.is_none_or(|(b, _)| *dk < b) {
                        best = Some((*dk, j));
                    }
                }
            }
            best
        })
    }

    fn ftran(&self, a: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|i| {
                self.binv[i * m..(i + 1) * m]
                    .iter()
                    .zip(a)
                    .map(|(p, q)| p * q)
                    .sum()
            })
            .collect()
    }

    /// Leaving row for direction `alpha`; `None` means unbounded.
    fn ratio_test(&self, alpha: &[f64], phase: Phase) -> Option<usize> {
        let tol = self.opts.pivot_tol;
        let mut cands: Vec<(f64, usize)> = Vec::new();
        for i in 0..self.m {
            let a = alpha[i];
            if phase == Phase::Two && self.basis[i] >= self.n {
                if a.abs() > tol {
                    cands.push((0.0, i));
                }
            } else if a > tol {
                cands.push((self.xb[i].max(0.0) / a, i));
            }
        }
        let theta = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        if !theta.is_finite() {
            return None;
        }
        let tie = 1e-12 * (1.0 + theta);
        let tied: Vec<usize> = cands
            .iter()
            .filter(|c| c.0 <= theta + tie)
            .map(|c| c.1)
            .collect();
        // Among tied rows, skip pivots that are tiny relative to the best one,
        // then take the lowest column index.
        let big = tied.iter().map(|&i| alpha[i].abs()).fold(0.0, f64::max);
        tied.into_iter()
            .filter(|&i| alpha[i].abs() >= 1e-3 * big)
            .min_by_key(|&i| self.basis[i])
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        let theta = if self.basis[r] >= self.n && piv < 0.0 {
            0.0
        } else {
            self.xb[r].max(0.0) / piv
        };
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * alpha[i];
            }
        }
        self.xb[r] = theta;
        let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m].iter().map(|v| v / piv).collect();
        for i in 0..m {
            if i == r {
                continue;
            }
            let f = alpha[i];
            if f != 0.0 {
                let row = &mut self.binv[i * m..(i + 1) * m];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        self.binv[r * m..(r + 1) * m].copy_from_slice(&pivot_row);
        self.in_basis[self.basis[r]] = false;
        self.in_basis[q] = true;
        self.basis[r] = q;
        self.since_refactor += 1;
    }

    fn after_pivot(&mut self) {
        if self.since_refactor >= self.opts.refactor_every || self.residual() > self.opts.residual_tol
        {
            // A singular refactor cannot happen from a sequence of valid
            // pivots; keep the updated inverse if it does.
            self.refactor();
        }
    }

    fn run_phase(&mut self, phase: Phase) -> Result<PhaseEnd> {
        let stall_limit = 5 * (self.m + self.n);
        let mut best = self.objective(phase);
        let mut stalled = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(Error::NoConvergence {
                    iterations: self.iterations,
                    last_objective: self.objective(phase),
                });
            }
            let y = self.duals(phase);
            let Some((_, q)) = self.price(&y, phase, bland) else {
                return Ok(PhaseEnd::Optimal);
            };
            self.signed_column(q);
            let alpha = self.ftran(&self.col.clone());
            let Some(r) = self.ratio_test(&alpha, phase) else {
                return Ok(PhaseEnd::Unbounded);
            };
            self.pivot(r, q, &alpha);
            self.iterations += 1;
            self.after_pivot();

            let obj = self.objective(phase);
            if obj < best - 1e-12 * (1.0 + best.abs()) {
                best = obj;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled > stall_limit {
                    bland = true;
                }
            }
        }
    }

    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let rho: Vec<f64> = self.binv[r * self.m..(r + 1) * self.m]
                .iter()
                .zip(&self.sign)
                .map(|(a, s)| a * s)
                .collect();
            let in_basis = &self.in_basis;
            let src = self.src;
            // Largest |rho · a_j| over nonbasic structural columns.
            let best = par::argmin_blocks(self.n, |range| {
                let start = range.start;
                let mut d = vec![0.0; range.len()];
                src.reduced_costs(&rho, 0.0, range, &mut d);
                let mut best: Option<(f64, usize)> = None;
                for (k, v) in d.iter().enumerate() {
                    let j = start + k;
                    let s = -v.abs();
                    if !in_basis[j] && best.is_none_or(|(b, _)| s < b) {
                        best = Some((s, j));
                    }
                }
                best
            });
            if let Some((s, q)) = best {
                if -s > 1e-7 {
                    self.signed_column(q);
                    let alpha = self.ftran(&self.col.clone());
                    self.pivot(r, q, &alpha);
                    self.after_pivot();
                }
            }
        }
        let tol = self.feas_tol();
        for x in &mut self.xb {
            if *x < 0.0 && *x > -tol {
                *x = 0.0;
            }
        }
    }

    fn solution(&self, status: LpStatus) -> LpSolution {
        let mut x = vec![0.0; self.n];
        for (&j, &v) in self.basis.iter().zip(&self.xb) {
            if j < self.n {
                x[j] = v.max(0.0);
            }
        }
        let (objective, duals) = if status == LpStatus::Optimal {
            let obj = self
                .basis
                .iter()
                .filter(|&&j| j < self.n)
                .map(|&j| self.src.cost(j) * x[j])
                .sum();
            let y = self.duals(Phase::Two);
            (obj, y.iter().zip(&self.sign).map(|(a, s)| a * s).collect())
        } else {
            (f64::NAN, vec![f64::NAN; self.m])
        };
        LpSolution {
            status,
            basis: self.basis.clone(),
            x,
            objective,
            duals,
            iterations: self.iterations,
        }
    }
}

/// Inverse of a row-major `m × m` matrix by Gauss–Jordan with partial
/// pivoting. `a` is destroyed.
fn invert(a: &mut [f64], m: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for c in 0..m {
        let mut p = c;
        for r in c + 1..m {
            if a[r * m + c].abs() > a[p * m + c].abs() {
                p = r;
            }
        }
        if a[p * m + c].abs() <= 1e-14 * scale {
            return None;
        }
        if p != c {
            for k in 0..m {
                a.swap(p * m + k, c * m + k);
                inv.swap(p * m + k, c * m + k);
            }
        }
        let d = a[c * m + c];
        for k in 0..m {
            a[c * m + k] /= d;
            inv[c * m + k] /= d;
        }
        for r in 0..m {
            if r == c {
                continue;
            }
            let f = a[r * m + c];
            if f != 0.0 {
                for k in 0..m {
                    a[r * m + k] -= f * a[c * m + k];
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_permuted_matrix() {
        let mut a = vec![0.0, 2.0, 1.0, 0.0];
        let inv = invert(&mut a, 2).unwrap();
        assert_eq!(inv, vec![0.0, 1.0, 0.5, 0.0]);
        let mut s = vec![1.0, 2.0, 2.0, 4.0];
        assert!(invert(&mut s, 2).is_none());
    }
}
