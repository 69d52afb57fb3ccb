//! CSV tables and the SVG overlay of a run.

use std::fmt::Write as _;
use std::path::Path;

use occlp::curve::Extracted;
use occlp::geometry::{Domain, Point};
use occlp::schedule::{Leg, SchedulePiece};

use crate::run::{OracleShape, Outcome, RunError};

fn io(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    w.write_record(header).map_err(|e| io(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// Shortest representation that parses back to the same `f64`.
fn f(x: f64) -> String {
    format!("{x:?}")
}

/// Writes `measure.csv`, `trace.csv`, and when present `curve.csv`,
/// `sweep.csv` and `schedule.csv` into `dir`.
pub fn write_csv(out: &Outcome, dir: &Path) -> Result<(), RunError> {
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    if let Some(m) = &out.measure {
        write_table(
            &dir.join("measure.csv"),
            &["i", "j", "x1", "x2", "u1", "u2", "weight"],
            m.atoms.iter().map(|a| {
                vec![
                    a.cell.to_string(),
                    a.control.to_string(),
                    f(a.x[0]),
                    f(a.x[1]),
                    f(a.u[0]),
                    f(a.u[1]),
                    f(a.weight),
                ]
            }),
        )?;
    }
    write_table(
        &dir.join("trace.csv"),
        &["t", "v_t", "r_t"],
        out.trace
            .iter()
            .enumerate()
            .map(|(t, s)| vec![t.to_string(), f(s.v), f(s.r)]),
    )?;
    if let Some(Extracted::Periodic(c)) = &out.extracted {
        write_table(
            &dir.join("curve.csv"),
            &["t", "x1", "x2", "u1", "u2"],
            c.samples.iter().zip(&c.controls).enumerate().map(|(k, (x, u))| {
                vec![f(k as f64 * c.dt), f(x[0]), f(x[1]), f(u[0]), f(u[1])]
            }),
        )?;
    }
    if let Some(s) = &out.sweep {
        let np = s.points.first().map_or(0, |p| p.pinned.len());
        let mut header: Vec<String> = (1..=np).map(|k| format!("c{k}")).collect();
        header.push("feasible".into());
        header.push("value".into());
        let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        write_table(
            &dir.join("sweep.csv"),
            &header,
            s.points.iter().map(|p| {
                let mut r: Vec<String> = p.pinned.iter().map(|c| f(*c)).collect();
                r.push(p.result.is_some().to_string());
                r.push(p.result.as_ref().map_or(String::new(), |v| f(v.value)));
                r
            }),
        )?;
    }
    if let Some(s) = &out.schedule {
        let mut header = vec!["round".to_string(), "time".to_string()];
        header.extend(s.labels.iter().map(|l| format!("avg[{l}]")));
        let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        write_table(
            &dir.join("schedule.csv"),
            &header,
            s.report.rounds.iter().map(|r| {
                let mut row = vec![r.n.to_string(), f(r.time)];
                row.extend(r.averages.iter().map(|a| f(*a)));
                row
            }),
        )?;
    }
    Ok(())
}

/// Fixed-precision coordinate, so that output bytes do not depend on
/// rounding in the last digits.
fn c(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// `x,y` with the vertical axis flipped to point up.
fn pt(p: Point) -> String {
    format!("{},{}", c(p[0]), c(-p[1]))
}

fn polyline(points: &[Point], closed: bool, style: &str) -> String {
    let tag = if closed { "polygon" } else { "polyline" };
    let pts: Vec<String> = points.iter().map(|p| pt(*p)).collect();
    format!("<{tag} points=\"{}\" {style}/>\n", pts.join(" "))
}

const PIECE_COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Renders the domain outline, the support cells with opacity proportional to
/// their mass, the traced curve or schedule pieces, and the oracle boundary
/// dashed. Coordinates are printed to six decimals.
pub fn render_svg(out: &Outcome) -> String {
    let d = &out.domain;
    let b = d.bbox();
    let m = 0.05 * b.width().max(b.height());
    let stroke = 0.004 * b.width().max(b.height());
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
        c(b.min[0] - m),
        c(-b.max[1] - m),
        c(b.width() + 2.0 * m),
        c(b.height() + 2.0 * m)
    );
    let sw = c(stroke);
    // Domain.
    match d {
        Domain::Disk { radius, center } => {
            let _ = writeln!(
                s,
                "<circle class=\"domain\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{sw}\"/>",
                c(center[0]),
                c(-center[1]),
                c(*radius)
            );
        }
        _ => match d.as_polygon() {
            Some(poly) => s.push_str(&polyline(
                &poly,
                true,
                &format!("class=\"domain\" fill=\"none\" stroke=\"black\" stroke-width=\"{sw}\""),
            )),
            None => {
                if let Some(lp) = &out.lp {
                    s.push_str(&grid_outline(lp.system().grid(), &sw));
                }
            }
        },
    }
    // Support heat.
    if let (Some(lp), Some(meas)) = (&out.lp, &out.measure) {
        let h = lp.system().grid().cell_size();
        let cells = &meas.conditional_controls;
        let max = cells.iter().fold(0.0_f64, |a, cc| a.max(cc.mass));
        if max > 0.0 {
            s.push_str("<g class=\"support\" fill=\"#4c72b0\">\n");
            for cc in cells.iter().filter(|cc| cc.mass > meas.support_threshold) {
                let _ = writeln!(
                    s,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill-opacity=\"{:.4}\"/>",
                    c(cc.x[0] - 0.5 * h[0]),
                    c(-cc.x[1] - 0.5 * h[1]),
                    c(h[0]),
                    c(h[1]),
                    cc.mass / max
                );
            }
            s.push_str("</g>\n");
        }
    }
    // Curve or schedule.
    if let Some(sched) = &out.schedule {
        for (k, p) in sched.schedule.pieces.iter().enumerate() {
            let color = PIECE_COLORS[k % PIECE_COLORS.len()];
            match p {
                SchedulePiece::Periodic(curve) => s.push_str(&polyline(
                    &curve.polyline(),
                    true,
                    &format!("class=\"piece\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{sw}\""),
                )),
                SchedulePiece::Stationary(pnt) => {
                    let _ = writeln!(
                        s,
                        "<circle class=\"piece\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{color}\"/>",
                        c(pnt.x[0]),
                        c(-pnt.x[1]),
                        c(3.0 * stroke)
                    );
                }
            }
        }
        let mut seen: Vec<(Point, Point)> = Vec::new();
        for leg in sched.schedule.rounds.iter().flat_map(|r| &r.legs) {
            if let Leg::Steer { from, to, .. } = *leg {
                if !seen.contains(&(from, to)) {
                    seen.push((from, to));
                    let _ = writeln!(
                        s,
                        "<line class=\"steer\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"gray\" stroke-width=\"{sw}\" stroke-dasharray=\"{} {}\"/>",
                        c(from[0]),
                        c(-from[1]),
                        c(to[0]),
                        c(-to[1]),
                        c(4.0 * stroke),
                        c(2.0 * stroke)
                    );
                }
            }
        }
    } else if let Some(e) = &out.extracted {
        match e {
            Extracted::Periodic(curve) => s.push_str(&polyline(
                &curve.polyline(),
                true,
                &format!("class=\"curve\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"{sw}\""),
            )),
            Extracted::Stationary(p) => {
                let _ = writeln!(
                    s,
                    "<circle class=\"curve\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#d62728\"/>",
                    c(p.x[0]),
                    c(-p.x[1]),
                    c(3.0 * stroke)
                );
            }
        }
    }
    // Oracle.
    let dash = format!("stroke-dasharray=\"{} {}\"", c(4.0 * stroke), c(2.0 * stroke));
    match &out.oracle {
        Some(OracleShape::Circle { center, radius }) => {
            let _ = writeln!(
                s,
                "<circle class=\"oracle\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"{sw}\" {dash}/>",
                c(center[0]),
                c(-center[1]),
                c(*radius)
            );
        }
        Some(OracleShape::Polyline(pts)) => s.push_str(&polyline(
            pts,
            true,
            &format!("class=\"oracle\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"{sw}\" {dash}"),
        )),
        None => {}
    }
    s.push_str("</svg>\n");
    s
}

/// Edges between retained and dropped cells.
fn grid_outline(g: &occlp::geometry::SpatialGrid, sw: &str) -> String {
    let h = g.cell_size();
    let mut s = format!("<g class=\"domain\" stroke=\"black\" stroke-width=\"{sw}\">\n");
    for cell in g.cells() {
        let (ix, iy) = (cell.ix as isize, cell.iy as isize);
        let [x, y] = cell.center;
        let (l, r) = (x - 0.5 * h[0], x + 0.5 * h[0]);
        let (lo, hi) = (y - 0.5 * h[1], y + 0.5 * h[1]);
        for (dx, dy, a, b) in [
            (-1, 0, [l, lo], [l, hi]),
            (1, 0, [r, lo], [r, hi]),
            (0, -1, [l, lo], [r, lo]),
            (0, 1, [l, hi], [r, hi]),
        ] {
            if g.cell_at(ix + dx, iy + dy).is_none() {
                let _ = writeln!(
                    s,
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                    c(a[0]),
                    c(-a[1]),
                    c(b[0]),
                    c(-b[1])
                );
            }
        }
    }
    s.push_str("</g>\n");
    s
}

pub fn write_svg(out: &Outcome, path: &Path) -> Result<(), RunError> {
    std::fs::write(path, render_svg(out)).map_err(|e| io(path, e))
}
