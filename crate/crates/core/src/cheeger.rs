//! Cheeger problems as maximal ratios over closed curves: area over length,
//! and the weighted version `∫_E P / ∫_∂E Q`, which becomes the ratio
//! `μ(P₁(x)·u²) / μ(Q)` with `P₁` the antiderivative of `P` in `x¹`.

use std::sync::OnceLock;

use crate::curve::{extract_curve, ExtractOptions, Extracted};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{build_spatial_grid, ControlGrid, Domain, Point, SpatialGrid};
use crate::measure::{DiscretizedSystem, FnIntegrand, Integrand, MeasureLp};
use crate::par;
use crate::ratio::{solve_ratio, RatioOptions, RatioSolution};

/// Grid resolution: spatial cells per axis and control directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub nx: usize,
    pub ny: usize,
    pub n_u: usize,
    /// Total degree of the test functions.
    pub degree: usize,
}

impl Resolution {
    pub fn new(nx: usize, ny: usize, n_u: usize, degree: usize) -> Resolution {
        Resolution { nx, ny, n_u, degree }
    }

    /// Grid on `d` with controls on the unit circle.
    pub fn system(&self, d: &Domain) -> Result<DiscretizedSystem> {
        Ok(DiscretizedSystem::new(
            build_spatial_grid(d, self.nx, self.ny)?,
            ControlGrid::circle(self.n_u)?,
        ))
    }
}

#[derive(Debug)]
pub struct CheegerRun {
    pub lp: MeasureLp,
    pub solution: RatioSolution,
    /// The traced curve, or why tracing failed.
    pub curve: Result<Extracted>,
    pub warnings: Vec<String>,
}

/// Maximizes `μ(x¹u²)/μ(1)` on `d` with unit-speed controls: the largest
/// area-to-perimeter ratio of a closed curve in `d`.
pub fn solve_cheeger(d: &Domain, res: Resolution, opts: &RatioOptions) -> Result<CheegerRun> {
    let system = res.system(d)?;
    let p = FnIntegrand(|x: Point, u: Point| x[0] * u[1]);
    let q = FnIntegrand(|_: Point, _: Point| 1.0);
    let lp = MeasureLp::assemble(system, &p, &q, &[], res.degree)?;
    finish(d, lp, opts, Vec::new())
}

fn finish(d: &Domain, lp: MeasureLp, opts: &RatioOptions, mut warnings: Vec<String>) -> Result<CheegerRun> {
    let solution = solve_ratio(&lp, opts)?;
    let curve = extract_curve(&solution.measure, lp.system(), d, &ExtractOptions::default());
    if let Ok(Extracted::Stationary(_)) = curve {
        warnings.push(format!(
            "optimal measure is stationary (value {}); a closed curve was expected",
            solution.value
        ));
    }
    Ok(CheegerRun {
        lp,
        solution,
        curve,
        warnings,
    })
}

/// `∫₀^{x¹} P(ζ, x²) dζ` by adaptive Simpson quadrature to absolute
/// tolerance `1e-10`.
pub fn antiderivative_p1(p: &Expr, x: Point) -> Result<f64> {
    let f = |z: f64| p.evaluate([z, x[1]], [0.0, 0.0]).map_err(|e| e.at([z, x[1]]));
    adaptive_simpson(&f, 0.0, x[0], 1e-10)
}

/// Maximum bisection depth; beyond it the local estimate is accepted.
const MAX_DEPTH: u32 = 50;

pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// `P₁(x)·u²`, with `P₁` computed once per grid cell on first use.
pub struct P1Integrand<'a> {
    p: &'a Expr,
    grid: &'a SpatialGrid,
    cache: Vec<OnceLock<f64>>,
}

impl<'a> P1Integrand<'a> {
    pub fn new(p: &'a Expr, grid: &'a SpatialGrid) -> P1Integrand<'a> {
        P1Integrand {
            p,
            grid,
            cache: (0..grid.len()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn p1(&self, x: Point) -> Result<f64> {
        let (ix, iy) = self.grid.lattice_pos(x);
        match self.grid.cell_at(ix, iy) {
            Some(k) if self.grid.center(k) == x => {
                if let Some(v) = self.cache[k].get() {
                    return Ok(*v);
                }
                let v = antiderivative_p1(self.p, x)?;
                Ok(*self.cache[k].get_or_init(|| v))
            }
            _ => antiderivative_p1(self.p, x),
        }
    }
}

impl Integrand for P1Integrand<'_> {
    fn eval(&self, x: Point, u: Point) -> Result<f64> {
        Ok(self.p1(x)? * u[1])
    }
}

/// Weights of the generalized problem `max ∫_E P / ∫_∂E Q`.
#[derive(Debug, Clone)]
pub struct GeneralizedCheegerProblem {
    /// Area weight over `x1, x2`; must be positive on the grid.
    pub p: Expr,
    /// Length weight over `x1, x2` and possibly `u1, u2`.
    pub q: Expr,
    /// Accept nonpositive `Q` samples, relying on `μ(Q)` being bounded away
    /// from zero on closed curves.
    pub allow_nonpositive_q: bool,
    /// Required lower bound on `μ(Q)` at the optimum.
    pub eta: f64,
}

impl GeneralizedCheegerProblem {
    pub fn new(p: Expr, q: Expr) -> GeneralizedCheegerProblem {
        GeneralizedCheegerProblem {
            p,
            q,
            allow_nonpositive_q: false,
            eta: 1e-6,
        }
    }
}

/// Maximizes `μ(P₁(x)·u²)/μ(Q)` on `d` and traces the optimal curve.
pub fn solve_generalized(
    d: &Domain,
    prob: &GeneralizedCheegerProblem,
    res: Resolution,
    opts: &RatioOptions,
) -> Result<CheegerRun> {
    let system = res.system(d)?;
    let grid = system.grid();
    let bad = par::map_collect(grid.len(), |k| {
        let x = grid.center(k);
        match prob.p.evaluate(x, [0.0, 0.0]) {
            Ok(v) if v > 0.0 => None,
            Ok(v) => Some(Error::Precondition(format!(
                "P = {v} is not positive at x=({}, {})",
                x[0], x[1]
            ))),
            Err(e) => Some(e.at(x)),
        }
    });
    if let Some(e) = bad.into_iter().flatten().next() {
        return Err(e);
    }
    let p_int = P1Integrand::new(&prob.p, grid);
    let pv = system.sample(&p_int)?;
    let qv = system.sample(&prob.q)?;
    drop(p_int);
    let lp = MeasureLp::from_columns(system, pv, qv, Vec::new(), res.degree, !prob.allow_nonpositive_q)?;
    let run = finish(d, lp, opts, Vec::new())?;
    let mu_q = run.solution.measure.mu_q;
    if !(mu_q > prob.eta) {
        return Err(Error::Degenerate(format!(
            "μ(Q) = {mu_q} at the optimum is not above {}",
            prob.eta
        )));
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn constant_weight_gives_x1() {
        let p = parse("1").unwrap();
        assert!((antiderivative_p1(&p, [0.7, 0.3]).unwrap() - 0.7).abs() < 1e-15);
        assert!((antiderivative_p1(&p, [-0.4, 0.3]).unwrap() + 0.4).abs() < 1e-15);
    }

    #[test]
    fn linear_weight_gives_square() {
        let p = parse("2*x1").unwrap();
        assert!((antiderivative_p1(&p, [1.3, -2.0]).unwrap() - 1.69).abs() < 1e-12);
    }

    #[test]
    fn cosine_weight_gives_sine() {
        let p = parse("cos(x1)").unwrap();
        assert!((antiderivative_p1(&p, [1.0, 0.0]).unwrap() - 0.8414709848).abs() < 1e-10);
    }

    #[test]
    fn weight_depends_on_second_coordinate() {
        let p = parse("exp(x2)").unwrap();
        let v = antiderivative_p1(&p, [2.0, 1.0]).unwrap();
        assert!((v - 2.0 * 1f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn cache_fills_once() {
        let d = Domain::rectangle(2.0, 2.0).unwrap();
        let g = build_spatial_grid(&d, 4, 4).unwrap();
        let p = parse("2*x1").unwrap();
        let i = P1Integrand::new(&p, &g);
        let x = g.center(5);
        assert!((i.eval(x, [0.0, 1.0]).unwrap() - x[0] * x[0]).abs() < 1e-12);
        assert!(i.cache[5].get().is_some());
        assert!(i.cache[4].get().is_none());
    }

    #[test]
    fn nonpositive_p_is_rejected() {
        let d = Domain::disk(1.0).unwrap();
        let prob = GeneralizedCheegerProblem::new(parse("x1").unwrap(), parse("1").unwrap());
        let r = solve_generalized(&d, &prob, Resolution::new(8, 8, 8, 4), &RatioOptions::maximize());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
