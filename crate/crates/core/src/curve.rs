//! Periodic curves and stationary points recovered from a discrete measure.

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::measure::{DiscretizedSystem, Integrand, OptimalMeasure};

/// A closed trajectory sampled at uniform time steps. The last sample is the
/// closing point, within `closure_error` of the first.
#[derive(Debug, Clone)]
pub struct PeriodicCurve {
    pub samples: Vec<Point>,
    /// Relaxed control (barycenter) at each sample.
    pub controls: Vec<Point>,
    pub dt: f64,
    pub period: f64,
    pub closure_error: f64,
}

impl PeriodicCurve {
    /// `(1/T) ∫₀ᵀ g(x(t), u(t)) dt` by the trapezoid rule.
    pub fn average(&self, g: &dyn Integrand) -> Result<f64> {
        let v = self
            .samples
            .iter()
            .zip(&self.controls)
            .map(|(x, u)| g.eval(*x, *u).map_err(|e| e.at(*x)))
            .collect::<Result<Vec<f64>>>()?;
        let n = v.len();
        if n < 2 {
            return Ok(v.first().copied().unwrap_or(0.0));
        }
        let inner: f64 = v[1..n - 1].iter().sum();
        let integral = self.dt * (inner + 0.5 * (v[0] + v[n - 1]));
        Ok(integral / self.period)
    }

    /// Closed polyline through the samples (last sample dropped when it
    /// coincides with the first).
    pub fn polyline(&self) -> Vec<Point> {
        let mut pts = self.samples.clone();
        if pts.len() > 1 && dist(pts[0], *pts.last().unwrap()) == 0.0 {
            pts.pop();
        }
        pts
    }

    pub fn is_jordan(&self) -> bool {
        is_simple_closed(&self.polyline())
    }

    /// Signed area enclosed by the closed polyline (positive when
    /// counterclockwise).
    pub fn signed_area(&self) -> f64 {
        crate::geometry::polygon_area(&self.polyline())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub x: Point,
    pub control: Point,
}

#[derive(Debug, Clone)]
pub enum Extracted {
    Periodic(PeriodicCurve),
    Stationary(StationaryPoint),
}

impl Extracted {
    pub fn as_curve(&self) -> Option<&PeriodicCurve> {
        match self {
            Extracted::Periodic(c) => Some(c),
            Extracted::Stationary(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub max_steps: usize,
    /// Minimum number of steps before closure is tested.
    pub min_steps: usize,
    /// Field magnitude below which the seed is a stationary point.
    pub stationary_tol: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            max_steps: 1_000_000,
            min_steps: 10,
            stationary_tol: 1e-6,
        }
    }
}

/// The relaxed vector field of a measure: per occupied cell the conditional
/// mean of the dynamics, interpolated bilinearly where all four surrounding
/// cells are occupied.
///
/// Elsewhere (an optimal basic measure has at most one atom per LP row,
/// spread thinly along the curve, and its controls need not be tangent) the
/// field follows the ridge of the atoms: its direction is the principal axis
/// of the Gaussian-weighted atom positions, oriented by the weighted mean
/// velocity, plus a pull toward the weighted centroid across that axis. Its
/// speed is the weighted mean cell speed. The bandwidth is the mean distance
/// from an occupied cell to its second nearest neighbor, at least one cell.
pub struct RelaxedField<'a> {
    system: &'a DiscretizedSystem,
    /// Per lattice position: index into `cells`.
    lookup: Vec<Option<usize>>,
    cells: Vec<FieldCell>,
    bandwidth: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    wsum: f64,
    centroid: Point,
    v: Point,
    u: Point,
    speed: f64,
    axis: Point,
}

#[derive(Debug, Clone, Copy)]
struct FieldCell {
    x: Point,
    control: Point,
    velocity: Point,
    mass: f64,
}

impl<'a> RelaxedField<'a> {
    pub fn new(m: &OptimalMeasure, system: &'a DiscretizedSystem) -> RelaxedField<'a> {
        let grid = system.grid();
        let mut lookup = vec![None; grid.nx() * grid.ny()];
        let mut cells: Vec<FieldCell> = Vec::new();
        let mut index_of_cell = std::collections::BTreeMap::new();
        for a in m.support() {
            let k = *index_of_cell.entry(a.cell).or_insert_with(|| {
                cells.push(FieldCell {
                    x: a.x,
                    control: [0.0, 0.0],
                    velocity: [0.0, 0.0],
                    mass: 0.0,
                });
                cells.len() - 1
            });
            let f = system.dynamics(a.cell, a.control);
            let c = &mut cells[k];
            c.mass += a.weight;
            c.control[0] += a.weight * a.u[0];
            c.control[1] += a.weight * a.u[1];
            c.velocity[0] += a.weight * f[0];
            c.velocity[1] += a.weight * f[1];
        }
        for c in &mut cells {
            c.control = [c.control[0] / c.mass, c.control[1] / c.mass];
            c.velocity = [c.velocity[0] / c.mass, c.velocity[1] / c.mass];
        }
        for (&cell, &k) in &index_of_cell {
            let cc = grid.cells()[cell];
            lookup[cc.iy * grid.nx() + cc.ix] = Some(k);
        }
        let h = grid.cell_size();
        let mut spacing = 0.0;
        for (k, c) in cells.iter().enumerate() {
            let mut d: Vec<f64> = cells
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != k)
                .map(|(_, o)| dist(c.x, o.x))
                .collect();
            d.sort_by(f64::total_cmp);
            spacing += d.get(1).or(d.first()).copied().unwrap_or(0.0);
        }
        let bandwidth = (spacing / cells.len() as f64).max(h[0].max(h[1]));
        RelaxedField {
            system,
            lookup,
            cells,
            bandwidth,
        }
    }

    fn occupied(&self, ix: isize, iy: isize) -> Option<&FieldCell> {
        let g = self.system.grid();
        if ix < 0 || iy < 0 || ix as usize >= g.nx() || iy as usize >= g.ny() {
            return None;
        }
        self.lookup[iy as usize * g.nx() + ix as usize].map(|k| &self.cells[k])
    }

    fn nearest(&self, x: Point) -> &FieldCell {
        let mut best = (f64::INFINITY, 0);
        for (k, c) in self.cells.iter().enumerate() {
            let d = (c.x[0] - x[0]).powi(2) + (c.x[1] - x[1]).powi(2);
            if d < best.0 {
                best = (d, k);
            }
        }
        &self.cells[best.1]
    }

    /// Kernel moments at `x`: total weight, centroid, mean velocity, mean
    /// control, mean speed and the principal axis of the weighted positions.
    fn moments(&self, x: Point) -> Option<Moments> {
        let two_s2 = 2.0 * self.bandwidth * self.bandwidth;
        let mut m = Moments::default();
        for c in &self.cells {
            let d2 = (c.x[0] - x[0]).powi(2) + (c.x[1] - x[1]).powi(2);
            let w = c.mass * (-d2 / two_s2).exp();
            m.wsum += w;
            for i in 0..2 {
                m.v[i] += w * c.velocity[i];
                m.u[i] += w * c.control[i];
                m.centroid[i] += w * c.x[i];
            }
            m.speed += w * c.velocity[0].hypot(c.velocity[1]);
        }
        if !(m.wsum > 0.0) {
            return None;
        }
        for i in 0..2 {
            m.v[i] /= m.wsum;
            m.u[i] /= m.wsum;
            m.centroid[i] /= m.wsum;
        }
        m.speed /= m.wsum;
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for c in &self.cells {
            let d2 = (c.x[0] - x[0]).powi(2) + (c.x[1] - x[1]).powi(2);
            let w = c.mass * (-d2 / two_s2).exp();
            let (dx, dy) = (c.x[0] - m.centroid[0], c.x[1] - m.centroid[1]);
            sxx += w * dx * dx;
            sxy += w * dx * dy;
            syy += w * dy * dy;
        }
        let spread = sxx + syy;
        let norm = m.v[0].hypot(m.v[1]);
        let gap = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
        m.axis = if spread > 0.0 && gap > 0.5 * spread {
            let t = 0.5 * (2.0 * sxy).atan2(sxx - syy);
            let e = [t.cos(), t.sin()];
            let s = if e[0] * m.v[0] + e[1] * m.v[1] < 0.0 { -1.0 } else { 1.0 };
            [s * e[0], s * e[1]]
        } else if norm > 1e-12 {
            [m.v[0] / norm, m.v[1] / norm]
        } else {
            return None;
        };
        Some(m)
    }

    /// Offset from `x` to the local centroid, across the principal axis.
    fn across(m: &Moments, x: Point) -> Point {
        let off = [m.centroid[0] - x[0], m.centroid[1] - x[1]];
        let along = off[0] * m.axis[0] + off[1] * m.axis[1];
        [off[0] - along * m.axis[0], off[1] - along * m.axis[1]]
    }

    fn kernel(&self, x: Point) -> (Point, Point) {
        let Some(m) = self.moments(x) else {
            let c = self.nearest(x);
            return (c.velocity, c.control);
        };
        let pull = Self::across(&m, x);
        let dir = [
            m.axis[0] + pull[0] / self.bandwidth,
            m.axis[1] + pull[1] / self.bandwidth,
        ];
        let s = m.speed / dir[0].hypot(dir[1]);
        let velocity = [dir[0] * s, dir[1] * s];
        if self.system.has_identity_dynamics() {
            (velocity, velocity)
        } else {
            (velocity, m.u)
        }
    }

    /// Moves `x` onto the kernel ridge by repeated steps to the centroid
    /// across the principal axis.
    fn project(&self, mut x: Point) -> Point {
        for _ in 0..50 {
            let Some(m) = self.moments(x) else { break };
            let p = Self::across(&m, x);
            x = [x[0] + p[0], x[1] + p[1]];
            if p[0].hypot(p[1]) < 1e-12 * (1.0 + self.bandwidth) {
                break;
            }
        }
        x
    }

    /// `(velocity, relaxed control)` at `x`.
    pub fn eval(&self, x: Point) -> (Point, Point) {
        let g = self.system.grid();
        let h = g.cell_size();
        let b = g.bbox();
        let gx = (x[0] - b.min[0]) / h[0] - 0.5;
        let gy = (x[1] - b.min[1]) / h[1] - 0.5;
        let (ix, iy) = (gx.floor(), gy.floor());
        let (tx, ty) = (gx - ix, gy - iy);
        let (ix, iy) = (ix as isize, iy as isize);
        let mut acc = [0.0; 4];
        for (dx, dy, w) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            let Some(c) = self.occupied(ix + dx, iy + dy) else {
                return self.kernel(x);
            };
            acc[0] += w * c.velocity[0];
            acc[1] += w * c.velocity[1];
            acc[2] += w * c.control[0];
            acc[3] += w * c.control[1];
        }
        ([acc[0], acc[1]], [acc[2], acc[3]])
    }

    /// Occupied cell with the largest mass (first in cell order on ties).
    fn seed(&self) -> &FieldCell {
        let mut best = &self.cells[0];
        for c in &self.cells[1..] {
            if c.mass > best.mass {
                best = c;
            }
        }
        best
    }
}

/// Whether `x` lies in a retained grid cell: the discretized domain.
fn inside_grid(system: &DiscretizedSystem, x: Point) -> bool {
    let (ix, iy) = system.grid().lattice_pos(x);
    system.grid().cell_at(ix, iy).is_some()
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Traces the relaxed field of `m` from its heaviest cell, projected onto the
/// ridge, with classical Runge–Kutta steps of `min(hx, hy)/4`, failing if the
/// trajectory leaves both `domain` and the retained grid cells. Closure is declared at the first
/// local minimum of the distance to the start that lies within
/// `max(hx, hy)`, after at least `min_steps` steps.
pub fn extract_curve(
    m: &OptimalMeasure,
    system: &DiscretizedSystem,
    domain: &Domain,
    opts: &ExtractOptions,
) -> Result<Extracted> {
    if m.support().next().is_none() {
        return Err(Error::Extraction("measure has empty support".into()));
    }
    let field = RelaxedField::new(m, system);
    let seed = field.seed();
    if seed.velocity[0].hypot(seed.velocity[1]) < opts.stationary_tol {
        return Ok(Extracted::Stationary(StationaryPoint {
            x: seed.x,
            control: seed.control,
        }));
    }
    let x0 = field.project(seed.x);
    let u0 = field.eval(x0).1;
    let h = system.grid().cell_size();
    let dt = h[0].min(h[1]) / 4.0;
    let close_tol = h[0].max(h[1]);
    let mut samples = vec![x0];
    let mut controls = vec![u0];
    let mut x = x0;
    let mut prev_d = 0.0;
    for step in 1..=opts.max_steps {
        let k1 = field.eval(x).0;
        let k2 = field.eval([x[0] + 0.5 * dt * k1[0], x[1] + 0.5 * dt * k1[1]]).0;
        let k3 = field.eval([x[0] + 0.5 * dt * k2[0], x[1] + 0.5 * dt * k2[1]]).0;
        let k4 = field.eval([x[0] + dt * k3[0], x[1] + dt * k3[1]]).0;
        let next = [
            x[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        let d = dist(next, x0);
        if step > opts.min_steps && prev_d <= close_tol && d >= prev_d {
            // The previous sample was the closest approach.
            let period = dt * (samples.len() - 1) as f64;
            return Ok(Extracted::Periodic(PeriodicCurve {
                closure_error: prev_d,
                samples,
                controls,
                dt,
                period,
            }));
        }
        if !inside_grid(system, next) && !domain.membership(next)? {
            return Err(Error::Extraction(format!(
                "trajectory left the domain at ({}, {}) after {step} steps",
                next[0], next[1]
            )));
        }
        x = next;
        prev_d = d;
        samples.push(x);
        controls.push(field.eval(x).1);
    }
    Err(Error::NonClosing {
        steps: opts.max_steps,
    })
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (minx1, maxx1) = (a[0].min(b[0]), a[0].max(b[0]));
    let (minx2, maxx2) = (c[0].min(d[0]), c[0].max(d[0]));
    let (miny1, maxy1) = (a[1].min(b[1]), a[1].max(b[1]));
    let (miny2, maxy2) = (c[1].min(d[1]), c[1].max(d[1]));
    if maxx1 < minx2 || maxx2 < minx1 || maxy1 < miny2 || maxy2 < miny1 {
        return false;
    }
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| {
        r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    (d1 == 0.0 && on(c, d, a)) || (d2 == 0.0 && on(c, d, b)) || (d3 == 0.0 && on(a, b, c)) || (d4 == 0.0 && on(a, b, d))
}

/// True when the closed polyline has no two non-adjacent segments that meet.
pub fn is_simple_closed(pts: &[Point]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let seg = |k: usize| (pts[k], pts[(k + 1) % n]);
    // Sort segments by their left end so that each pair is tested only while
    // their x-ranges overlap.
    let mut order: Vec<usize> = (0..n).collect();
    let lo = |k: usize| seg(k).0[0].min(seg(k).1[0]);
    let hi = |k: usize| seg(k).0[0].max(seg(k).1[0]);
    order.sort_by(|&a, &b| lo(a).total_cmp(&lo(b)).then(a.cmp(&b)));
    for (s, &i) in order.iter().enumerate() {
        let end = hi(i);
        for &j in &order[s + 1..] {
            if lo(j) > end {
                break;
            }
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if segments_cross(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    };
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Distance from `p` to the closed polyline `poly`.
pub fn distance_to_polyline(p: Point, poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|k| point_segment_distance(p, poly[k], poly[(k + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance between two closed polylines, measured from the
/// vertices of each to the segments of the other.
pub fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let one_way = |s: &[Point], t: &[Point]| {
        s.iter()
            .map(|p| distance_to_polyline(*p, t))
            .fold(0.0f64, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::{build_spatial_grid, ControlGrid};
    use crate::measure::MeasureLp;

    #[test]
    fn crossing_figure_eight_is_not_simple() {
        let eight = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(!is_simple_closed(&eight));
        let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(is_simple_closed(&square));
    }

    #[test]
    fn hausdorff_of_nested_squares() {
        let a = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        let b = [[0.5, 0.5], [1.5, 0.5], [1.5, 1.5], [0.5, 1.5]];
        assert!((hausdorff(&a, &b) - 0.5f64.hypot(0.5)).abs() < 1e-12);
    }

    /// Uniform measure on the cells crossed by the circle of radius ½, with
    /// the tangent control of each cell.
    fn circle_measure() -> (MeasureLp, Domain) {
        let d = Domain::disk(1.0).unwrap();
        let g = build_spatial_grid(&d, 64, 64).unwrap();
        let n_u = 256;
        let sys = DiscretizedSystem::new(g, ControlGrid::circle(n_u).unwrap());
        let one = crate::expr::Expr::constant(1.0);
        let lp = MeasureLp::assemble(sys, &one, &one, &[], 1).unwrap();
        (lp, d)
    }

    #[test]
    fn circle_of_radius_half_closes_with_green_average() {
        let (lp, d) = circle_measure();
        let sys = lp.system();
        let n = 400;
        let mut atoms: Vec<(usize, f64)> = Vec::new();
        for k in 0..n {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let x = [0.5 * t.cos(), 0.5 * t.sin()];
            let cell = sys.grid().nearest_cell(x);
            let j = ((t + std::f64::consts::FRAC_PI_2) / (2.0 * std::f64::consts::PI) * 256.0).round() as usize % 256;
            atoms.push((sys.column(cell, j), 1.0 / n as f64));
        }
        atoms.sort_by_key(|a| a.0);
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (c, w) in atoms {
            match merged.last_mut() {
                Some(l) if l.0 == c => l.1 += w,
                _ => merged.push((c, w)),
            }
        }
        let m = crate::measure::OptimalMeasure::new(&lp, merged);
        let e = extract_curve(&m, sys, &d, &ExtractOptions::default()).unwrap();
        let c = e.as_curve().expect("periodic");
        assert!((c.period - std::f64::consts::PI).abs() < 0.1, "period {}", c.period);
        assert!(c.is_jordan());
        let avg = c.average(&parse("x1*u2").unwrap()).unwrap();
        assert!((avg - 0.25).abs() < 0.02, "{avg}");
    }

    #[test]
    fn dirac_with_zero_control_is_stationary() {
        let d = Domain::disk(1.0).unwrap();
        let g = build_spatial_grid(&d, 8, 8).unwrap();
        let sys = DiscretizedSystem::new(g, ControlGrid::segment(3).unwrap());
        let one = crate::expr::Expr::constant(1.0);
        let lp = MeasureLp::assemble(sys, &one, &one, &[], 1).unwrap();
        let cell = lp.system().grid().nearest_cell([0.0, 0.0]);
        let m = crate::measure::OptimalMeasure::new(&lp, vec![(lp.system().column(cell, 1), 1.0)]);
        let e = extract_curve(&m, lp.system(), &d, &ExtractOptions::default()).unwrap();
        assert!(matches!(e, Extracted::Stationary(_)));
    }
}
