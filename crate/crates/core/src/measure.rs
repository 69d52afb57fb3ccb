//! Discretized occupational measures and the finite LP over them.
//!
//! Columns are pairs (spatial cell `i`, control `j`), ordered cell-major. Rows
//! are the normalization `Σ w = 1`, one stationarity row `Σ w ∇φ·f = 0` per
//! monomial test function, and one row per averaged constraint.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{ControlGrid, Point, SpatialGrid};
use crate::lp::{self, ColumnSource, LpSolution, Sense, SimplexOptions, StandardLp};
use crate::par;

/// Default total degree of the monomial test functions.
pub const DEFAULT_TEST_DEGREE: usize = 8;

/// Relative weight below which an atom is not counted in the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-7;

/// Something that can be integrated against a measure on `K × U`.
pub trait Integrand: Sync {
    fn eval(&self, x: Point, u: Point) -> Result<f64>;
}

impl Integrand for Expr {
    fn eval(&self, x: Point, u: Point) -> Result<f64> {
        self.evaluate(x, u)
    }
}

/// Wraps an infallible closure as an [`Integrand`].
pub struct FnIntegrand<F>(pub F);

impl<F: Fn(Point, Point) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn eval(&self, x: Point, u: Point) -> Result<f64> {
        Ok((self.0)(x, u))
    }
}

/// Grid over `K × U` with the dynamics sampled at every column.
#[derive(Debug, Clone)]
pub struct DiscretizedSystem {
    grid: SpatialGrid,
    controls: ControlGrid,
    /// `None` means `f(x, u) = u`.
    dynamics: Option<Vec<Point>>,
}

impl DiscretizedSystem {
    /// System with `f(x, u) = u`.
    pub fn new(grid: SpatialGrid, controls: ControlGrid) -> DiscretizedSystem {
        DiscretizedSystem {
            grid,
            controls,
            dynamics: None,
        }
    }

    pub fn with_dynamics<F>(grid: SpatialGrid, controls: ControlGrid, f: F) -> Result<DiscretizedSystem>
    where
        F: Fn(Point, Point) -> Point + Sync + Send,
    {
        let n_u = controls.len();
        let samples: Vec<Point> = par::map_collect(grid.len() * n_u, |c| {
            f(grid.center(c / n_u), controls.get(c % n_u))
        });
        if let Some(k) = samples.iter().position(|v| !v[0].is_finite() || !v[1].is_finite()) {
            let x = grid.center(k / n_u);
            return Err(Error::Precondition(format!(
                "dynamics not finite at x=({}, {}), control {}",
                x[0],
                x[1],
                k % n_u
            )));
        }
        Ok(DiscretizedSystem {
            grid,
            controls,
            dynamics: Some(samples),
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn controls(&self) -> &ControlGrid {
        &self.controls
    }

    pub fn n_cols(&self) -> usize {
        self.grid.len() * self.controls.len()
    }

    pub fn column(&self, cell: usize, control: usize) -> usize {
        cell * self.controls.len() + control
    }

    /// `(cell, control)` of a column.
    pub fn split(&self, col: usize) -> (usize, usize) {
        (col / self.controls.len(), col % self.controls.len())
    }

    /// `(x_i, u_j)` of a column.
    pub fn point(&self, col: usize) -> (Point, Point) {
        let (i, j) = self.split(col);
        (self.grid.center(i), self.controls.get(j))
    }

    pub fn dynamics(&self, cell: usize, control: usize) -> Point {
        match &self.dynamics {
            None => self.controls.get(control),
            Some(v) => v[self.column(cell, control)],
        }
    }

    pub fn has_identity_dynamics(&self) -> bool {
        self.dynamics.is_none()
    }

    /// Evaluates `g` on every column, cell-major. Errors carry the cell center.
    pub fn sample(&self, g: &dyn Integrand) -> Result<Vec<f64>> {
        let n_u = self.controls.len();
        let rows = par::try_map_collect(self.grid.len(), |i| {
            let x = self.grid.center(i);
            (0..n_u)
                .map(|j| {
                    let v = g.eval(x, self.controls.get(j)).map_err(|e| e.at(x))?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::Eval {
                            offset: 0,
                            msg: "non-finite integrand value".into(),
                        }
                        .at(x))
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })?;
        Ok(rows.into_iter().flatten().collect())
    }
}

/// One row over the measure columns: `Σ values·w (≤ | =) rhs`.
#[derive(Debug, Clone)]
pub struct ColumnRow {
    pub values: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Exponents `(a, b)` of the monomials `x̂₁ᵃ x̂₂ᵇ` with `1 ≤ a + b ≤ n`.
pub fn test_exponents(n: usize) -> Vec<[u32; 2]> {
    let mut out = Vec::new();
    for d in 1..=n as u32 {
        for a in (0..=d).rev() {
            out.push([a, d - a]);
        }
    }
    out
}

/// The assembled measure LP.
#[derive(Debug, Clone)]
pub struct MeasureLp {
    system: DiscretizedSystem,
    degree: usize,
    exponents: Vec<[u32; 2]>,
    /// Per cell and test function: `∇φ(x̂ᵢ)` already multiplied by the
    /// box scaling `(2/w, 2/h)`, so that the entry is `grad · f`.
    grads: Vec<Point>,
    p: Vec<f64>,
    q: Vec<f64>,
    constraints: Vec<ColumnRow>,
}

impl MeasureLp {
    /// Samples `p`, `q` and the constraint integrands at every column and
    /// assembles the LP. Every `q` sample must be positive.
    pub fn assemble(
        system: DiscretizedSystem,
        p: &dyn Integrand,
        q: &dyn Integrand,
        constraints: &[(&dyn Integrand, Sense)],
        degree: usize,
    ) -> Result<MeasureLp> {
        let pv = system.sample(p)?;
        let qv = system.sample(q)?;
        let rows = constraints
            .iter()
            .map(|(g, sense)| {
                Ok(ColumnRow {
                    values: system.sample(*g)?,
                    sense: *sense,
                    rhs: 0.0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MeasureLp::from_columns(system, pv, qv, rows, degree, true)
    }

    /// Assembles from precomputed column values. With `require_positive_q`
    /// unset, nonpositive `q` samples are accepted.
    pub fn from_columns(
        system: DiscretizedSystem,
        p: Vec<f64>,
        q: Vec<f64>,
        constraints: Vec<ColumnRow>,
        degree: usize,
        require_positive_q: bool,
    ) -> Result<MeasureLp> {
        if degree == 0 {
            return Err(Error::Precondition("test degree must be at least 1".into()));
        }
        let n = system.n_cols();
        if p.len() != n || q.len() != n || constraints.iter().any(|r| r.values.len() != n) {
            return Err(Error::Precondition("column vector length mismatch".into()));
        }
        let finite = p.iter().chain(&q).all(|v| v.is_finite())
            && constraints
                .iter()
                .all(|r| r.rhs.is_finite() && r.values.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::Precondition("integrand samples must be finite".into()));
        }
        if require_positive_q {
            if let Some(c) = q.iter().position(|v| *v <= 0.0) {
                let (x, u) = system.point(c);
                return Err(Error::Precondition(format!(
                    "q = {} is not positive at cell {} x=({}, {}), u=({}, {})",
                    q[c],
                    c / system.controls().len(),
                    x[0],
                    x[1],
                    u[0],
                    u[1]
                )));
            }
        }
        let exponents = test_exponents(degree);
        let bbox = system.grid().bbox();
        let c = bbox.center();
        let sx = 2.0 / bbox.width();
        let sy = 2.0 / bbox.height();
        let nt = exponents.len();
        let grads = par::map_collect(system.grid().len(), |i| {
            let x = system.grid().center(i);
            let xh = [(x[0] - c[0]) * sx, (x[1] - c[1]) * sy];
            exponents
                .iter()
                .map(|&[a, b]| {
                    let da = if a == 0 {
                        0.0
                    } else {
                        a as f64 * xh[0].powi(a as i32 - 1) * xh[1].powi(b as i32)
                    };
                    let db = if b == 0 {
                        0.0
                    } else {
                        b as f64 * xh[0].powi(a as i32) * xh[1].powi(b as i32 - 1)
                    };
                    [da * sx, db * sy]
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
        debug_assert_eq!(grads.len(), system.grid().len() * nt);
        Ok(MeasureLp {
            system,
            degree,
            exponents,
            grads,
            p,
            q,
            constraints,
        })
    }

    pub fn system(&self) -> &DiscretizedSystem {
        &self.system
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn exponents(&self) -> &[[u32; 2]] {
        &self.exponents
    }

    pub fn n_test(&self) -> usize {
        self.exponents.len()
    }

    pub fn n_cols(&self) -> usize {
        self.system.n_cols()
    }

    /// Normalization, stationarity and constraint rows.
    pub fn n_rows(&self) -> usize {
        1 + self.n_test() + self.constraints.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn constraints(&self) -> &[ColumnRow] {
        &self.constraints
    }

    /// Stationarity entry `∇φ_k(x̂ᵢ) · f̂(xᵢ, uⱼ)` of column `col`.
    pub fn stationarity_entry(&self, k: usize, col: usize) -> f64 {
        let (i, j) = self.system.split(col);
        let g = self.grads[i * self.n_test() + k];
        let f = self.system.dynamics(i, j);
        g[0] * f[0] + g[1] * f[1]
    }

    /// `‖A w − b‖∞` over the normalization and stationarity rows, for weights
    /// given as `(column, weight)` pairs.
    pub fn stationarity_residual(&self, atoms: &[(usize, f64)]) -> f64 {
        let mut r = vec![0.0; 1 + self.n_test()];
        r[0] = -1.0;
        for &(col, w) in atoms {
            r[0] += w;
            for k in 0..self.n_test() {
                r[1 + k] += w * self.stationarity_entry(k, col);
            }
        }
        r.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Minimizes `cost · w` over the measure polytope with the constraint
    /// rows and `extra` rows. `warm` is an optional starting basis from an
    /// earlier solve with the same rows.
    pub fn solve_linear(
        &self,
        cost: Vec<f64>,
        extra: &[ColumnRow],
        warm: Option<&[usize]>,
        opts: &SimplexOptions,
    ) -> Result<LpSolution> {
        let sub = Subproblem::new(self, cost, extra)?;
        match warm {
            Some(b) => lp::solve_source_warm(&sub, b, opts),
            None => lp::solve_source(&sub, opts),
        }
    }

    /// Dense copy of the LP with objective `cost` and the constraint rows
    /// slack-augmented. Meant for small instances and cross-checks.
    pub fn to_standard(&self, cost: &[f64]) -> Result<StandardLp> {
        let n = self.n_cols();
        let mut rows = vec![vec![1.0; n]];
        for k in 0..self.n_test() {
            rows.push((0..n).map(|c| self.stationarity_entry(k, c)).collect());
        }
        let mut b = vec![1.0];
        b.extend(std::iter::repeat_n(0.0, self.n_test()));
        let base = StandardLp::new(&rows, b, cost.to_vec())?;
        let extra: Vec<lp::Constraint> = self
            .constraints
            .iter()
            .map(|r| lp::Constraint {
                coeffs: r.values.clone(),
                sense: r.sense,
                rhs: r.rhs,
            })
            .collect();
        base.with_rows(&extra)
    }

    /// Builds the measure from an LP primal vector (extra slack entries past
    /// the measure columns are ignored).
    pub fn measure_from(&self, x: &[f64]) -> OptimalMeasure {
        let atoms: Vec<(usize, f64)> = x[..self.n_cols()]
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(c, w)| (c, *w))
            .collect();
        OptimalMeasure::new(self, atoms)
    }
}

/// The measure LP with a particular objective and optional extra rows, as a
/// column source for the simplex.
///
/// Row order: normalization, stationarity, constraints, extra rows. Column
/// order: measure columns, then one slack per inequality row.
pub struct Subproblem<'a> {
    lp: &'a MeasureLp,
    cost: Vec<f64>,
    rows: Vec<&'a ColumnRow>,
    rhs: Vec<f64>,
    slack_rows: Vec<usize>,
}

impl<'a> Subproblem<'a> {
    pub fn new(lp: &'a MeasureLp, cost: Vec<f64>, extra: &'a [ColumnRow]) -> Result<Subproblem<'a>> {
        let n = lp.n_cols();
        if cost.len() != n || extra.iter().any(|r| r.values.len() != n) {
            return Err(Error::Precondition("column vector length mismatch".into()));
        }
        if cost.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("objective must be finite".into()));
        }
        let rows: Vec<&ColumnRow> = lp.constraints.iter().chain(extra).collect();
        let first = 1 + lp.n_test();
        let mut rhs = vec![1.0];
        rhs.extend(std::iter::repeat_n(0.0, lp.n_test()));
        rhs.extend(rows.iter().map(|r| r.rhs));
        let slack_rows = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.sense == Sense::Le)
            .map(|(k, _)| first + k)
            .collect();
        Ok(Subproblem {
            lp,
            cost,
            rows,
            rhs,
            slack_rows,
        })
    }
}

impl ColumnSource for Subproblem<'_> {
    fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    fn n_cols(&self) -> usize {
        self.lp.n_cols() + self.slack_rows.len()
    }

    fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    fn cost(&self, j: usize) -> f64 {
        self.cost.get(j).copied().unwrap_or(0.0)
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        let n = self.lp.n_cols();
        out.iter_mut().for_each(|v| *v = 0.0);
        if j >= n {
            out[self.slack_rows[j - n]] = 1.0;
            return;
        }
        let nt = self.lp.n_test();
        out[0] = 1.0;
        for k in 0..nt {
            out[1 + k] = self.lp.stationarity_entry(k, j);
        }
        for (k, r) in self.rows.iter().enumerate() {
            out[1 + nt + k] = r.values[j];
        }
    }

    fn reduced_costs(&self, y: &[f64], cost_scale: f64, range: Range<usize>, out: &mut [f64]) {
        let n = self.lp.n_cols();
        let nt = self.lp.n_test();
        let sys = &self.lp.system;
        let y0 = y[0];
        let ys = &y[1..1 + nt];
        let yc = &y[1 + nt..];
        let mut cell = usize::MAX;
        let mut g = [0.0, 0.0];
        for (slot, j) in out.iter_mut().zip(range) {
            if j >= n {
                *slot = -y[self.slack_rows[j - n]];
                continue;
            }
            let (i, u) = sys.split(j);
            if i != cell {
                // y-weighted gradient of the test functions at this cell.
                g = [0.0, 0.0];
                for (yk, gk) in ys.iter().zip(&self.lp.grads[i * nt..(i + 1) * nt]) {
                    g[0] += yk * gk[0];
                    g[1] += yk * gk[1];
                }
                cell = i;
            }
            let f = sys.dynamics(i, u);
            let mut d = cost_scale * self.cost[j] - y0 - (g[0] * f[0] + g[1] * f[1]);
            for (yr, r) in yc.iter().zip(&self.rows) {
                d -= yr * r.values[j];
            }
            *slot = d;
        }
    }
}

/// One column carrying positive weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub column: usize,
    pub cell: usize,
    pub control: usize,
    pub x: Point,
    pub u: Point,
    pub weight: f64,
}

/// Mass of one spatial cell and its barycentric (relaxed) control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellControl {
    pub cell: usize,
    pub x: Point,
    pub mass: f64,
    pub control: Point,
}

/// A discrete occupational measure, stored by its atoms.
#[derive(Debug, Clone)]
pub struct OptimalMeasure {
    /// Columns with positive weight, in column order.
    pub atoms: Vec<Atom>,
    /// Atoms at or below this weight are not in the support.
    pub support_threshold: f64,
    /// One entry per occupied cell, in cell order.
    pub conditional_controls: Vec<CellControl>,
    pub mu_p: f64,
    pub mu_q: f64,
    pub mu_constraints: Vec<f64>,
    pub stationarity_residual: f64,
}

impl OptimalMeasure {
    /// Measure with the given `(column, weight)` atoms (weights ≥ 0).
    pub fn new(lp: &MeasureLp, mut atoms: Vec<(usize, f64)>) -> OptimalMeasure {
        atoms.sort_by_key(|a| a.0);
        let sys = lp.system();
        let integrate = |v: &[f64]| atoms.iter().map(|&(c, w)| w * v[c]).sum::<f64>();
        let mu_p = integrate(lp.p());
        let mu_q = integrate(lp.q());
        let mu_constraints = lp.constraints().iter().map(|r| integrate(&r.values)).collect();
        let stationarity_residual = lp.stationarity_residual(&atoms);
        let max_w = atoms.iter().fold(0.0f64, |a, b| a.max(b.1));
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(column, weight)| {
                let (cell, control) = sys.split(column);
                Atom {
                    column,
                    cell,
                    control,
                    x: sys.grid().center(cell),
                    u: sys.controls().get(control),
                    weight,
                }
            })
            .collect();
        let mut conditional_controls: Vec<CellControl> = Vec::new();
        for a in &atoms {
            match conditional_controls.last_mut() {
                Some(c) if c.cell == a.cell => {
                    c.mass += a.weight;
                    c.control[0] += a.weight * a.u[0];
                    c.control[1] += a.weight * a.u[1];
                }
                _ => conditional_controls.push(CellControl {
                    cell: a.cell,
                    x: a.x,
                    mass: a.weight,
                    control: [a.weight * a.u[0], a.weight * a.u[1]],
                }),
            }
        }
        for c in &mut conditional_controls {
            c.control = [c.control[0] / c.mass, c.control[1] / c.mass];
        }
        OptimalMeasure {
            atoms,
            support_threshold: SUPPORT_THRESHOLD * max_w,
            conditional_controls,
            mu_p,
            mu_q,
            mu_constraints,
            stationarity_residual,
        }
    }

    /// Atoms above the support threshold.
    pub fn support(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(move |a| a.weight > self.support_threshold)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `μ(p) / μ(q)`.
    pub fn ratio(&self) -> f64 {
        self.mu_p / self.mu_q
    }

    /// Occupied cells above the support threshold.
    pub fn support_cells(&self) -> Vec<usize> {
        let mut cells: Vec<usize> = self.support().map(|a| a.cell).collect();
        cells.dedup();
        cells
    }
}

/// `Σ w(i,j) g(xᵢ, uⱼ)`: the discrete counterpart of `μ(g)`.
pub fn realization_point(m: &OptimalMeasure, g: &dyn Integrand) -> Result<f64> {
    let mut s = 0.0;
    for a in &m.atoms {
        s += a.weight * g.eval(a.x, a.u).map_err(|e| e.at(a.x))?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::{build_spatial_grid, BBox, Cell, Domain};

    fn single_cell(controls: Vec<Point>) -> DiscretizedSystem {
        let bbox = BBox::new([-0.5, -0.5], [0.5, 0.5]).unwrap();
        let grid = SpatialGrid::from_cells(
            1,
            1,
            bbox,
            vec![Cell {
                ix: 0,
                iy: 0,
                center: [0.0, 0.0],
            }],
        )
        .unwrap();
        DiscretizedSystem::new(grid, ControlGrid::from_vectors(controls).unwrap())
    }

    #[test]
    fn test_function_count() {
        assert_eq!(test_exponents(8).len(), 44);
        assert_eq!(test_exponents(1), vec![[1, 0], [0, 1]]);
    }

    #[test]
    fn symmetric_pair_is_stationary() {
        let sys = single_cell(vec![[1.0, 0.0], [-1.0, 0.0]]);
        let one = Expr::constant(1.0);
        let lp = MeasureLp::assemble(sys, &one, &one, &[], 1).unwrap();
        // Box width 1 gives scale 2.
        assert_eq!(lp.stationarity_entry(0, 0), 2.0);
        assert_eq!(lp.stationarity_entry(0, 1), -2.0);
        assert_eq!(lp.stationarity_entry(1, 0), 0.0);
        let s = lp
            .solve_linear(vec![0.0, 0.0], &[], None, &SimplexOptions::default())
            .unwrap();
        assert!(s.is_optimal());
        assert!((s.x[0] - 0.5).abs() < 1e-12 && (s.x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_q_integrates_to_one() {
        let d = Domain::rectangle(6.0, 4.0).unwrap();
        let g = build_spatial_grid(&d, 12, 8).unwrap();
        let sys = DiscretizedSystem::new(g, ControlGrid::circle(8).unwrap());
        let p = parse("x1*u2").unwrap();
        let q = parse("1").unwrap();
        let lp = MeasureLp::assemble(sys, &p, &q, &[], 4).unwrap();
        assert!(lp.q().iter().all(|v| *v == 1.0));
        let cost: Vec<f64> = lp.p().iter().map(|v| -v).collect();
        let s = lp.solve_linear(cost, &[], None, &SimplexOptions::default()).unwrap();
        let m = lp.measure_from(&s.x);
        assert!((m.mu_q - 1.0).abs() < 1e-9);
        assert!(m.stationarity_residual < 1e-8);
    }

    #[test]
    fn nonpositive_q_names_the_cell() {
        let sys = single_cell(vec![[1.0, 0.0], [-1.0, 0.0]]);
        let one = Expr::constant(1.0);
        let q = parse("u1").unwrap();
        let err = MeasureLp::assemble(sys, &one, &q, &[], 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cell 0"), "{msg}");
    }

    #[test]
    fn evaluation_error_reports_coordinates() {
        let sys = single_cell(vec![[1.0, 0.0]]);
        let one = Expr::constant(1.0);
        let bad = parse("sqrt(x1 - 1)").unwrap();
        let err = MeasureLp::assemble(sys, &bad, &one, &[], 1).unwrap_err();
        assert!(matches!(err, Error::EvalAt { .. }));
    }

    #[test]
    fn structured_pricing_matches_dense_columns() {
        let d = Domain::disk(1.0).unwrap();
        let g = build_spatial_grid(&d, 6, 6).unwrap();
        let sys = DiscretizedSystem::new(g, ControlGrid::circle(6).unwrap());
        let p = parse("x1*u2").unwrap();
        let one = Expr::constant(1.0);
        let c = parse("x1 - 0.1").unwrap();
        let lp = MeasureLp::assemble(sys, &p, &one, &[(&c, Sense::Le)], 3).unwrap();
        let sub = Subproblem::new(&lp, lp.p().to_vec(), &[]).unwrap();
        let m = sub.n_rows();
        let y: Vec<f64> = (0..m).map(|k| (k as f64 * 0.37).sin()).collect();
        let n = sub.n_cols();
        let mut fast = vec![0.0; n];
        sub.reduced_costs(&y, 1.0, 0..n, &mut fast);
        let mut col = vec![0.0; m];
        for j in 0..n {
            sub.column(j, &mut col);
            let slow = sub.cost(j) - col.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
            assert!((fast[j] - slow).abs() < 1e-12, "column {j}");
        }
    }

    #[test]
    fn realization_of_simple_measures() {
        let sys = single_cell(vec![[0.0, 1.0], [0.0, -1.0]]);
        let one = Expr::constant(1.0);
        let lp = MeasureLp::assemble(sys, &one, &one, &[], 1).unwrap();
        let m = OptimalMeasure::new(&lp, vec![(0, 0.5), (1, 0.5)]);
        assert_eq!(realization_point(&m, &parse("u2").unwrap()).unwrap(), 0.0);
        assert_eq!(m.conditional_controls.len(), 1);
        assert_eq!(m.conditional_controls[0].control, [0.0, 0.0]);
    }
}
