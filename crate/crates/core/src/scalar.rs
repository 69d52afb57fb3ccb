//! Scalar problems `x' = u` on `[−1, 1]`, embedded in the planar engine as a
//! one-row strip of cells with controls on a segment of the first axis.

use crate::error::{Error, Result};
use crate::expr::parse;
use crate::geometry::{ControlGrid, SpatialGrid};
use crate::lp::Sense;
use crate::measure::{DiscretizedSystem, FnIntegrand, Integrand, MeasureLp};
use crate::ratio::{solve_ratio, RatioOptions, RatioSolution};

/// `n` cells (odd, so that `0` and `±1` are centers) and `n_u` controls in
/// `[−1, 1]` (odd, so that `0` is a control).
pub fn segment_system(n: usize, n_u: usize) -> Result<DiscretizedSystem> {
    if n.is_multiple_of(2) || n_u.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "segment grids need odd sizes, got {n} cells and {n_u} controls"
        )));
    }
    Ok(DiscretizedSystem::new(SpatialGrid::strip(n)?, ControlGrid::segment(n_u)?))
}

/// Minimizes the average of `W(x) = (1 − x²)²` subject to the average of `x`
/// equal to `mean`.
pub fn double_well(mean: f64, system: DiscretizedSystem, degree: usize, opts: &RatioOptions) -> Result<RatioSolution> {
    if !(mean.abs() < 1.0) {
        return Err(Error::OutOfRange(format!("mean must lie in (-1, 1), got {mean}")));
    }
    let w = parse("(1 - x1^2)^2")?;
    let one = FnIntegrand(|_, _| 1.0);
    let mass = FnIntegrand(move |x: [f64; 2], _| x[0] - mean);
    let lp = MeasureLp::assemble(system, &w, &one, &[(&mass as &dyn Integrand, Sense::Eq)], degree)?;
    solve_ratio(&lp, opts)
}
