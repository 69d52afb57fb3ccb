//! Reference values computed without the LP: Cheeger constants and sets of
//! convex domains, the double-well minimizer, and the scalar systems embedded
//! in the planar engine.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{ControlGrid, Domain, Point, SpatialGrid};
use crate::measure::DiscretizedSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheegerOracle {
    /// Root of `|Ω₋ᵣ| = πr²`.
    pub r_star: f64,
    /// Maximal area/perimeter ratio (equal to `r_star`).
    pub v_star: f64,
    /// Cheeger constant `1 / r_star`.
    pub h_star: f64,
}

/// Solves `|Ω₋ᵣ| = πr²` on `(0, inradius]` by bisection to `1e-12` in `r`.
pub fn cheeger_constant(d: &Domain) -> Result<CheegerOracle> {
    if !d.is_convex() {
        return Err(Error::UnsupportedDomain(
            "Cheeger oracle needs a convex domain".into(),
        ));
    }
    let phi = |r: f64| -> Result<f64> { Ok(d.inner_parallel_area(r)? - PI * r * r) };
    let mut lo = 0.0;
    let mut hi = d.inradius()?;
    if !(phi(lo)? > 0.0 && phi(hi)? < 0.0) {
        return Err(Error::Degenerate(
            "inner parallel area minus πr² does not change sign".into(),
        ));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if phi(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    Ok(CheegerOracle {
        r_star: r,
        v_star: r,
        h_star: 1.0 / r,
    })
}

/// Closed-form root for a `a × b` rectangle.
pub fn rectangle_cheeger_radius(a: f64, b: f64) -> f64 {
    let s = a + b;
    (s - (s * s - (4.0 - PI) * a * b).sqrt()) / (4.0 - PI)
}

/// Boundary of `Ω₋ᵣ ⊕ B(0, r)` at `r = r_star`: straight edges of the inner
/// body pushed out by `r`, joined by circular arcs. Returns `n_samples`
/// points spread evenly by arc length, counterclockwise, starting on the
/// first edge; the polyline closes back to the first point.
pub fn cheeger_set_boundary(d: &Domain, n_samples: usize) -> Result<Vec<Point>> {
    if n_samples < 3 {
        return Err(Error::Precondition("need at least 3 boundary samples".into()));
    }
    let r = cheeger_constant(d)?.r_star;
    if let Domain::Disk { radius, center } = d {
        return Ok((0..n_samples)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n_samples as f64;
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect());
    }
    let inner = dedup_vertices(&d.inner_parallel_polygon(r)?);
    if inner.len() < 3 {
        return Err(Error::Degenerate("inner parallel body has no interior".into()));
    }
    Ok(sample_rounded_polygon(&inner, r, n_samples))
}

fn dedup_vertices(poly: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    for p in poly {
        if out
            .last()
            .is_none_or(|q| (q[0] - p[0]).hypot(q[1] - p[1]) > 1e-12)
        {
            out.push(*p);
        }
    }
    while out.len() > 1 {
        let (f, l) = (out[0], out[out.len() - 1]);
        if (f[0] - l[0]).hypot(f[1] - l[1]) > 1e-12 {
            break;
        }
        out.pop();
    }
    out
}

/// Piece of a rounded-polygon boundary: a segment or a counterclockwise arc.
enum Piece {
    Segment(Point, Point),
    Arc { c: Point, from: f64, sweep: f64 },
}

impl Piece {
    fn length(&self, r: f64) -> f64 {
        match self {
            Piece::Segment(a, b) => (b[0] - a[0]).hypot(b[1] - a[1]),
            Piece::Arc { sweep, .. } => r * sweep,
        }
    }

    fn at(&self, r: f64, s: f64) -> Point {
        match self {
            Piece::Segment(a, b) => {
                let l = self.length(r);
                let t = if l > 0.0 { s / l } else { 0.0 };
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            }
            Piece::Arc { c, from, .. } => {
                let t = from + s / r;
                [c[0] + r * t.cos(), c[1] + r * t.sin()]
            }
        }
    }
}

/// Outward unit normal of the edge `a → b` of a counterclockwise polygon.
fn outward_normal(a: Point, b: Point) -> Point {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l = dx.hypot(dy);
    [dy / l, -dx / l]
}

fn sample_rounded_polygon(poly: &[Point], r: f64, n_samples: usize) -> Vec<Point> {
    let n = poly.len();
    let mut pieces = Vec::with_capacity(2 * n);
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let c = poly[(k + 2) % n];
        let n1 = outward_normal(a, b);
        let n2 = outward_normal(b, c);
        pieces.push(Piece::Segment(
            [a[0] + r * n1[0], a[1] + r * n1[1]],
            [b[0] + r * n1[0], b[1] + r * n1[1]],
        ));
        let from = n1[1].atan2(n1[0]);
        let mut sweep = n2[1].atan2(n2[0]) - from;
        while sweep < 0.0 {
            sweep += 2.0 * PI;
        }
        pieces.push(Piece::Arc { c: b, from, sweep });
    }
    let lengths: Vec<f64> = pieces.iter().map(|p| p.length(r)).collect();
    let total: f64 = lengths.iter().sum();
    let mut out = Vec::with_capacity(n_samples);
    let mut piece = 0;
    let mut start = 0.0;
    for k in 0..n_samples {
        let s = total * k as f64 / n_samples as f64;
        while piece + 1 < pieces.len() && s >= start + lengths[piece] {
            start += lengths[piece];
            piece += 1;
        }
        out.push(pieces[piece].at(r, (s - start).min(lengths[piece])));
    }
    out
}

/// Length of the Cheeger set boundary: perimeter of the inner body plus
/// `2π r_star`.
pub fn cheeger_set_perimeter(d: &Domain) -> Result<f64> {
    let r = cheeger_constant(d)?.r_star;
    if let Domain::Disk { radius, .. } = d {
        return Ok(2.0 * PI * radius);
    }
    let inner = d.inner_parallel_polygon(r)?;
    Ok(crate::geometry::polygon_perimeter(&inner) + 2.0 * PI * r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWellOracle {
    pub v_star: f64,
    /// Weight of the well at `x = -1`.
    pub lambda: f64,
    pub support: [f64; 2],
}

/// Minimizer of the averaged double-well energy `W(x) = (1 − x²)²` with mean
/// `m`: mass `(1 − m)/2` at `−1` and the rest at `+1`, value 0.
pub fn double_well_oracle(m: f64) -> Result<DoubleWellOracle> {
    if !(m.abs() < 1.0) {
        return Err(Error::OutOfRange(format!("mean must lie in (-1, 1), got {m}")));
    }
    Ok(DoubleWellOracle {
        v_star: 0.0,
        lambda: (1.0 - m) / 2.0,
        support: [-1.0, 1.0],
    })
}

/// Scalar system `x' = u` on `[−1, 1]` with `u ∈ {−1, 0, 1}`, embedded as a
/// strip of `n` cells whose centers include `±1` and `0` (odd `n`).
pub fn scalar_system(n: usize) -> Result<DiscretizedSystem> {
    Ok(DiscretizedSystem::new(
        SpatialGrid::strip(n)?,
        ControlGrid::segment(3)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon_area;

    #[test]
    fn disk_radius_half() {
        let o = cheeger_constant(&Domain::disk(1.0).unwrap()).unwrap();
        assert!((o.r_star - 0.5).abs() < 1e-12);
        assert!((o.h_star - 2.0).abs() < 1e-11);
    }

    #[test]
    fn rectangle_matches_closed_form() {
        let o = cheeger_constant(&Domain::rectangle(6.0, 4.0).unwrap()).unwrap();
        let r = rectangle_cheeger_radius(6.0, 4.0);
        assert!((o.r_star - r).abs() < 1e-11);
        assert!((r - 1.26914).abs() < 1e-5);
        let d = Domain::rectangle(6.0, 4.0).unwrap();
        assert!((d.inner_parallel_area(o.r_star).unwrap() - PI * o.r_star.powi(2)).abs() < 1e-10);
    }

    #[test]
    fn unit_square() {
        let o = cheeger_constant(&Domain::rectangle(1.0, 1.0).unwrap()).unwrap();
        assert!((o.r_star - 1.0 / (2.0 + PI.sqrt())).abs() < 1e-11);
    }

    #[test]
    fn implicit_domain_is_unsupported() {
        let d = Domain::implicit(
            crate::expr::parse("x1^2 + x2^2 - 1").unwrap(),
            crate::geometry::BBox::new([-1.0, -1.0], [1.0, 1.0]).unwrap(),
        );
        assert!(matches!(cheeger_constant(&d), Err(Error::UnsupportedDomain(_))));
    }

    #[test]
    fn rounded_rectangle_boundary() {
        let d = Domain::rectangle(6.0, 4.0).unwrap();
        let r = cheeger_constant(&d).unwrap().r_star;
        let b = cheeger_set_boundary(&d, 4000).unwrap();
        assert!(b.iter().all(|p| d.membership(*p).unwrap() || p[0].abs().max(p[1].abs() * 1.5) <= 3.0 + 1e-9));
        assert!(polygon_area(&b) > 0.0);
        // Area over perimeter of the Cheeger set is r*.
        let area = polygon_area(&b);
        let perim = crate::geometry::polygon_perimeter(&b);
        assert!((area / perim - r).abs() < 1e-5);
        let exact = cheeger_set_perimeter(&d).unwrap();
        assert!((exact - (2.0 * (6.0 - 2.0 * r) + 2.0 * (4.0 - 2.0 * r) + 2.0 * PI * r)).abs() < 1e-9);
    }

    #[test]
    fn disk_is_its_own_cheeger_set() {
        let b = cheeger_set_boundary(&Domain::disk(1.0).unwrap(), 100).unwrap();
        assert!(b.iter().all(|p| (p[0].hypot(p[1]) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn double_well_weights() {
        assert_eq!(double_well_oracle(0.0).unwrap().lambda, 0.5);
        assert_eq!(double_well_oracle(0.5).unwrap().lambda, 0.25);
        assert!(double_well_oracle(1.0).is_err());
    }
}
