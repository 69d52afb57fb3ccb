//! The state constraint set `K`, the control set `U`, and their grids.
//!
//! Rectangles and disks are centered at `center` (the origin unless stated
//! otherwise). Implicit domains `{g(x) <= 0}` carry their own bounding box.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::par;

pub type Point = [f64; 2];

/// Axis-aligned box `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn new(min: Point, max: Point) -> Result<BBox> {
        let ok = min.iter().chain(max.iter()).all(|v| v.is_finite())
            && max[0] > min[0]
            && max[1] > min[1];
        if !ok {
            return Err(Error::InvalidDomain(format!(
                "bounding box {min:?}..{max:?} must be finite with positive extent"
            )));
        }
        Ok(BBox { min, max })
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn center(&self) -> Point {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
        ]
    }

    pub fn contains(&self, x: Point) -> bool {
        x[0] >= self.min[0] && x[0] <= self.max[0] && x[1] >= self.min[1] && x[1] <= self.max[1]
    }
}

#[derive(Debug, Clone)]
pub enum Domain {
    Rectangle {
        width: f64,
        height: f64,
        center: Point,
    },
    Disk {
        radius: f64,
        center: Point,
    },
    /// Counterclockwise vertex list of a convex polygon.
    ConvexPolygon { vertices: Vec<Point> },
    /// The closed region `{x : g(x) <= 0}` inside `bbox`.
    Implicit { g: Expr, bbox: BBox },
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl Domain {
    pub fn rectangle(width: f64, height: f64) -> Result<Domain> {
        Domain::rectangle_at(width, height, [0.0, 0.0])
    }

    pub fn rectangle_at(width: f64, height: f64, center: Point) -> Result<Domain> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "rectangle dimensions must be positive, got {width} x {height}"
            )));
        }
        check_point(center)?;
        Ok(Domain::Rectangle {
            width,
            height,
            center,
        })
    }

    pub fn disk(radius: f64) -> Result<Domain> {
        Domain::disk_at(radius, [0.0, 0.0])
    }

    pub fn disk_at(radius: f64, center: Point) -> Result<Domain> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        check_point(center)?;
        Ok(Domain::Disk { radius, center })
    }

    /// Validates a convex, counterclockwise polygon.
    pub fn convex_polygon(vertices: Vec<Point>) -> Result<Domain> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidDomain(format!(
                "polygon needs at least 3 vertices, got {n}"
            )));
        }
        for v in &vertices {
            check_point(*v)?;
        }
        let mut any_positive = false;
        for k in 0..n {
            let c = cross(vertices[k], vertices[(k + 1) % n], vertices[(k + 2) % n]);
            if c < 0.0 {
                return Err(Error::InvalidDomain(
                    "polygon is not convex and counterclockwise".into(),
                ));
            }
            any_positive |= c > 0.0;
        }
        if !any_positive {
            return Err(Error::InvalidDomain("polygon is degenerate".into()));
        }
        // Convex turns everywhere can still wind around twice.
        let turning: f64 = (0..n)
            .map(|k| {
                let a = vertices[k];
                let b = vertices[(k + 1) % n];
                let c = vertices[(k + 2) % n];
                let t1 = (b[1] - a[1]).atan2(b[0] - a[0]);
                let t2 = (c[1] - b[1]).atan2(c[0] - b[0]);
                let mut d = t2 - t1;
                while d <= -PI {
                    d += 2.0 * PI;
                }
                while d > PI {
                    d -= 2.0 * PI;
                }
                d
            })
            .sum();
        if (turning - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::InvalidDomain("polygon is not simple".into()));
        }
        Ok(Domain::ConvexPolygon { vertices })
    }

    pub fn implicit(g: Expr, bbox: BBox) -> Domain {
        Domain::Implicit { g, bbox }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, Domain::Implicit { .. })
    }

    pub fn bbox(&self) -> BBox {
        match self {
            Domain::Rectangle {
                width,
                height,
                center,
            } => BBox {
                min: [center[0] - width / 2.0, center[1] - height / 2.0],
                max: [center[0] + width / 2.0, center[1] + height / 2.0],
            },
            Domain::Disk { radius, center } => BBox {
                min: [center[0] - radius, center[1] - radius],
                max: [center[0] + radius, center[1] + radius],
            },
            Domain::ConvexPolygon { vertices } => {
                let mut min = [f64::INFINITY; 2];
                let mut max = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        min[k] = min[k].min(v[k]);
                        max[k] = max[k].max(v[k]);
                    }
                }
                BBox { min, max }
            }
            Domain::Implicit { bbox, .. } => *bbox,
        }
    }

    /// Whether `x` lies in the closed region.
    pub fn membership(&self, x: Point) -> Result<bool> {
        check_point(x)?;
        Ok(match self {
            Domain::Rectangle {
                width,
                height,
                center,
            } => {
                (x[0] - center[0]).abs() <= width / 2.0 && (x[1] - center[1]).abs() <= height / 2.0
            }
            Domain::Disk { radius, center } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|k| cross(vertices[k], vertices[(k + 1) % n], x) >= 0.0)
            }
            Domain::Implicit { g, bbox } => {
                bbox.contains(x) && g.evaluate(x, [0.0, 0.0]).map_err(|e| e.at(x))? <= 0.0
            }
        })
    }

    /// Area of the region; `None` for implicit domains.
    pub fn area(&self) -> Option<f64> {
        match self {
            Domain::Rectangle { width, height, .. } => Some(width * height),
            Domain::Disk { radius, .. } => Some(PI * radius * radius),
            Domain::ConvexPolygon { vertices } => Some(polygon_area(vertices)),
            Domain::Implicit { .. } => None,
        }
    }

    /// Perimeter of the region; `None` for implicit domains.
    pub fn perimeter(&self) -> Option<f64> {
        match self {
            Domain::Rectangle { width, height, .. } => Some(2.0 * (width + height)),
            Domain::Disk { radius, .. } => Some(2.0 * PI * radius),
            Domain::ConvexPolygon { vertices } => Some(polygon_perimeter(vertices)),
            Domain::Implicit { .. } => None,
        }
    }

    /// The region as a counterclockwise polygon (rectangle and polygon only).
    pub fn as_polygon(&self) -> Option<Vec<Point>> {
        match self {
            Domain::Rectangle { .. } => {
                let b = self.bbox();
                Some(vec![
                    b.min,
                    [b.max[0], b.min[1]],
                    b.max,
                    [b.min[0], b.max[1]],
                ])
            }
            Domain::ConvexPolygon { vertices } => Some(vertices.clone()),
            _ => None,
        }
    }

    /// The inner parallel body `{x : dist(x, boundary) >= r}` of a polygonal
    /// domain, as a convex polygon (empty when it vanishes).
    pub fn inner_parallel_polygon(&self, r: f64) -> Result<Vec<Point>> {
        let poly = self.as_polygon().ok_or_else(|| {
            Error::UnsupportedDomain("inner parallel polygon needs a polygonal domain".into())
        })?;
        Ok(inner_offset(&poly, r))
    }

    /// Area of the inner parallel body `{x : dist(x, boundary) >= r}`.
    pub fn inner_parallel_area(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Precondition(format!(
                "offset must be nonnegative, got {r}"
            )));
        }
        match self {
            Domain::Rectangle { width, height, .. } => {
                Ok((width - 2.0 * r).max(0.0) * (height - 2.0 * r).max(0.0))
            }
            Domain::Disk { radius, .. } => {
                let s = (radius - r).max(0.0);
                Ok(PI * s * s)
            }
            Domain::ConvexPolygon { vertices } => Ok(polygon_area(&inner_offset(vertices, r))),
            Domain::Implicit { .. } => Err(Error::UnsupportedDomain(
                "inner parallel area needs a convex domain".into(),
            )),
        }
    }

    /// Radius of the largest inscribed disk (convex domains).
    pub fn inradius(&self) -> Result<f64> {
        match self {
            Domain::Rectangle { width, height, .. } => Ok(0.5 * width.min(*height)),
            Domain::Disk { radius, .. } => Ok(*radius),
            Domain::ConvexPolygon { vertices } => {
                let b = self.bbox();
                let (mut lo, mut hi) = (0.0, 0.5 * b.width().min(b.height()));
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if inner_offset(vertices, mid).is_empty() {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo < 1e-15 * (1.0 + hi) {
                        break;
                    }
                }
                Ok(lo)
            }
            Domain::Implicit { .. } => Err(Error::UnsupportedDomain(
                "inradius needs a convex domain".into(),
            )),
        }
    }

    /// Diameter of the region (largest distance between two points).
    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Rectangle { width, height, .. } => width.hypot(*height),
            Domain::Disk { radius, .. } => 2.0 * radius,
            Domain::ConvexPolygon { vertices } => max_pairwise(vertices),
            Domain::Implicit { bbox, .. } => bbox.width().hypot(bbox.height()),
        }
    }

    /// Copy shifted by `d`.
    pub fn translated(&self, d: Point) -> Result<Domain> {
        Ok(match self {
            Domain::Rectangle {
                width,
                height,
                center,
            } => Domain::rectangle_at(*width, *height, [center[0] + d[0], center[1] + d[1]])?,
            Domain::Disk { radius, center } => {
                Domain::disk_at(*radius, [center[0] + d[0], center[1] + d[1]])?
            }
            Domain::ConvexPolygon { vertices } => Domain::ConvexPolygon {
                vertices: vertices.iter().map(|v| [v[0] + d[0], v[1] + d[1]]).collect(),
            },
            Domain::Implicit { .. } => {
                return Err(Error::UnsupportedDomain(
                    "implicit domains cannot be translated".into(),
                ))
            }
        })
    }

    /// Copy scaled by `s > 0` about the origin.
    pub fn scaled(&self, s: f64) -> Result<Domain> {
        Ok(match self {
            Domain::Rectangle {
                width,
                height,
                center,
            } => Domain::rectangle_at(width * s, height * s, [center[0] * s, center[1] * s])?,
            Domain::Disk { radius, center } => {
                Domain::disk_at(radius * s, [center[0] * s, center[1] * s])?
            }
            Domain::ConvexPolygon { vertices } => {
                Domain::convex_polygon(vertices.iter().map(|v| [v[0] * s, v[1] * s]).collect())?
            }
            Domain::Implicit { .. } => {
                return Err(Error::UnsupportedDomain(
                    "implicit domains cannot be scaled".into(),
                ))
            }
        })
    }
}

fn check_point(x: Point) -> Result<()> {
    if x[0].is_finite() && x[1].is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("point {x:?} is not finite")))
    }
}

pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n)
        .map(|k| {
            let a = poly[k];
            let b = poly[(k + 1) % n];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

pub fn polygon_perimeter(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|k| {
            let a = poly[k];
            let b = poly[(k + 1) % n];
            (b[0] - a[0]).hypot(b[1] - a[1])
        })
        .sum()
}

fn max_pairwise(pts: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (k, a) in pts.iter().enumerate() {
        for b in &pts[k + 1..] {
            best = best.max((b[0] - a[0]).hypot(b[1] - a[1]));
        }
    }
    best
}

/// Intersection of the inward-shifted edge half-planes of a convex CCW polygon.
fn inner_offset(poly: &[Point], r: f64) -> Vec<Point> {
    let n = poly.len();
    let mut out: Vec<Point> = poly.to_vec();
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        if len == 0.0 {
            continue;
        }
        // Inward unit normal of a CCW edge is the left normal.
        let nrm = [-(b[1] - a[1]) / len, (b[0] - a[0]) / len];
        let offset = nrm[0] * a[0] + nrm[1] * a[1] + r;
        out = clip_halfplane(&out, nrm, offset);
        if out.is_empty() {
            break;
        }
    }
    out
}

/// Keeps `{x : n·x >= c}` of a convex polygon (Sutherland–Hodgman step).
fn clip_halfplane(poly: &[Point], n: Point, c: f64) -> Vec<Point> {
    let m = poly.len();
    let mut out = Vec::with_capacity(m + 1);
    let side = |p: Point| n[0] * p[0] + n[1] * p[1] - c;
    for k in 0..m {
        let p = poly[k];
        let q = poly[(k + 1) % m];
        let sp = side(p);
        let sq = side(q);
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Finite set of controls.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGrid {
    controls: Vec<Point>,
}

impl ControlGrid {
    /// `n_u` unit directions `(cos θ_j, sin θ_j)`, `θ_j = 2πj / n_u`.
    pub fn circle(n_u: usize) -> Result<ControlGrid> {
        if n_u < 2 {
            return Err(Error::Precondition(format!(
                "need at least 2 control directions, got {n_u}"
            )));
        }
        let controls = (0..n_u)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / n_u as f64;
                let (s, c) = th.sin_cos();
                // Snap the axis directions so that exact symmetries survive.
                [snap(c), snap(s)]
            })
            .collect();
        Ok(ControlGrid { controls })
    }

    /// Controls `(s, 0)` for `s` on a uniform lattice of `[-1, 1]` with `n`
    /// points (odd `n` includes the zero control).
    pub fn segment(n: usize) -> Result<ControlGrid> {
        if n < 2 {
            return Err(Error::Precondition(format!(
                "need at least 2 controls, got {n}"
            )));
        }
        let controls = (0..n)
            .map(|j| [snap(-1.0 + 2.0 * j as f64 / (n - 1) as f64), 0.0])
            .collect();
        Ok(ControlGrid { controls })
    }

    /// Arbitrary control vectors; they must be finite and pairwise distinct.
    pub fn from_vectors(controls: Vec<Point>) -> Result<ControlGrid> {
        if controls.is_empty() {
            return Err(Error::Precondition("empty control set".into()));
        }
        for (k, a) in controls.iter().enumerate() {
            check_point(*a)?;
            if controls[k + 1..].iter().any(|b| b == a) {
                return Err(Error::Precondition(format!("duplicate control {a:?}")));
            }
        }
        Ok(ControlGrid { controls })
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn controls(&self) -> &[Point] {
        &self.controls
    }

    pub fn get(&self, j: usize) -> Point {
        self.controls[j]
    }

    /// Largest control norm.
    pub fn max_norm(&self) -> f64 {
        self.controls
            .iter()
            .map(|u| u[0].hypot(u[1]))
            .fold(0.0, f64::max)
    }
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-15 {
        r
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub ix: usize,
    pub iy: usize,
    pub center: Point,
}

/// Centers of the grid cells lying in `K`, row-major (`iy` outer).
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    nx: usize,
    ny: usize,
    bbox: BBox,
    cell_size: [f64; 2],
    cells: Vec<Cell>,
    lookup: Vec<u32>,
}

const NO_CELL: u32 = u32::MAX;

impl SpatialGrid {
    /// Grid from explicit cells on an `nx × ny` lattice over `bbox`. Cells must
    /// sit at distinct lattice positions; their centers are taken as given.
    pub fn from_cells(nx: usize, ny: usize, bbox: BBox, cells: Vec<Cell>) -> Result<SpatialGrid> {
        if cells.is_empty() {
            return Err(Error::EmptyDomain);
        }
        if nx == 0 || ny == 0 {
            return Err(Error::Precondition("lattice must have at least one cell".into()));
        }
        let mut lookup = vec![NO_CELL; nx * ny];
        for (k, c) in cells.iter().enumerate() {
            if c.ix >= nx || c.iy >= ny || !c.center.iter().all(|v| v.is_finite()) {
                return Err(Error::Precondition(format!("cell {k} is off the lattice")));
            }
            let slot = &mut lookup[c.iy * nx + c.ix];
            if *slot != NO_CELL {
                return Err(Error::Precondition(format!("cell {k} duplicates a lattice position")));
            }
            *slot = k as u32;
        }
        Ok(SpatialGrid {
            nx,
            ny,
            cell_size: [bbox.width() / nx as f64, bbox.height() / ny as f64],
            bbox,
            cells,
            lookup,
        })
    }

    /// A single row of `n` cells whose centers are exactly `x1 = -1 + 2k/(n-1)`,
    /// `x2 = 0`: the scalar interval `[-1, 1]` embedded as a strip one cell high.
    pub fn strip(n: usize) -> Result<SpatialGrid> {
        if n < 2 {
            return Err(Error::Precondition(format!("strip needs n >= 2, got {n}")));
        }
        let h = 2.0 / (n - 1) as f64;
        let bbox = BBox::new([-1.0 - h / 2.0, -h / 2.0], [1.0 + h / 2.0, h / 2.0])?;
        let cells = (0..n)
            .map(|ix| Cell {
                ix,
                iy: 0,
                center: [snap(-1.0 + h * ix as f64), 0.0],
            })
            .collect();
        SpatialGrid::from_cells(n, 1, bbox, cells)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn cell_size(&self) -> [f64; 2] {
        self.cell_size
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn center(&self, k: usize) -> Point {
        self.cells[k].center
    }

    /// Index of the retained cell at lattice position `(ix, iy)`.
    pub fn cell_at(&self, ix: isize, iy: isize) -> Option<usize> {
        if ix < 0 || iy < 0 || ix as usize >= self.nx || iy as usize >= self.ny {
            return None;
        }
        let k = self.lookup[iy as usize * self.nx + ix as usize];
        (k != NO_CELL).then_some(k as usize)
    }

    /// Lattice coordinates (possibly outside the lattice) of the cell containing `x`.
    pub fn lattice_pos(&self, x: Point) -> (isize, isize) {
        (
            ((x[0] - self.bbox.min[0]) / self.cell_size[0]).floor() as isize,
            ((x[1] - self.bbox.min[1]) / self.cell_size[1]).floor() as isize,
        )
    }

    /// Retained cell whose center is closest to `x` (exhaustive search).
    pub fn nearest_cell(&self, x: Point) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (k, c) in self.cells.iter().enumerate() {
            let d = (c.center[0] - x[0]).powi(2) + (c.center[1] - x[1]).powi(2);
            if d < best.0 {
                best = (d, k);
            }
        }
        best.1
    }
}

/// Uniform `nx × ny` grid over the bounding box of `d`; keeps the cells whose
/// centers are members of `d`.
pub fn build_spatial_grid(d: &Domain, nx: usize, ny: usize) -> Result<SpatialGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::Precondition(format!(
            "grid needs nx, ny >= 2, got {nx} x {ny}"
        )));
    }
    let bbox = d.bbox();
    let hx = bbox.width() / nx as f64;
    let hy = bbox.height() / ny as f64;
    let rows = par::try_map_collect(ny, |iy| {
        let mut row = Vec::new();
        let y = bbox.min[1] + hy * (iy as f64 + 0.5);
        for ix in 0..nx {
            let x = [bbox.min[0] + hx * (ix as f64 + 0.5), y];
            if d.membership(x)? {
                row.push(Cell { ix, iy, center: x });
            }
        }
        Ok::<_, Error>(row)
    })?;
    let cells = rows.into_iter().flatten().collect();
    SpatialGrid::from_cells(nx, ny, bbox, cells)
}
