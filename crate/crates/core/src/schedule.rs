//! Alternating schedules: trajectories that cycle through stationary and
//! periodic pieces so that their long-run averages realize a convex
//! combination of the pieces' measures.

use crate::curve::{extract_curve, ExtractOptions, Extracted, PeriodicCurve, StationaryPoint};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::measure::{DiscretizedSystem, Integrand, MeasureLp, OptimalMeasure};

/// One building block of a schedule. Stationary points count as periodic
/// with period 1.
#[derive(Debug, Clone)]
pub enum SchedulePiece {
    Periodic(PeriodicCurve),
    Stationary(StationaryPoint),
}

impl SchedulePiece {
    pub fn period(&self) -> f64 {
        match self {
            SchedulePiece::Periodic(c) => c.period,
            SchedulePiece::Stationary(_) => 1.0,
        }
    }

    pub fn start(&self) -> Point {
        match self {
            SchedulePiece::Periodic(c) => c.samples[0],
            SchedulePiece::Stationary(p) => p.x,
        }
    }

    /// State and control at time `t`, wrapping around the period and
    /// interpolating linearly between samples.
    pub fn state_at(&self, t: f64) -> (Point, Point) {
        match self {
            SchedulePiece::Stationary(p) => (p.x, p.control),
            SchedulePiece::Periodic(c) => {
                let s = t.rem_euclid(c.period) / c.dt;
                let last = c.samples.len() - 1;
                let i = (s.floor() as usize).min(last.saturating_sub(1));
                let f = (s - i as f64).clamp(0.0, 1.0);
                let j = (i + 1).min(last);
                (lerp(c.samples[i], c.samples[j], f), lerp(c.controls[i], c.controls[j], f))
            }
        }
    }

    /// Time average of `g` over one period.
    pub fn average(&self, g: &dyn Integrand) -> Result<f64> {
        match self {
            SchedulePiece::Periodic(c) => c.average(g),
            SchedulePiece::Stationary(p) => g.eval(p.x, p.control).map_err(|e| e.at(p.x)),
        }
    }
}

fn lerp(a: Point, b: Point, f: f64) -> Point {
    [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Follow a piece from its start, or move in a straight line at unit speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Leg {
    Dwell { piece: usize, duration: f64 },
    Steer { from: Point, to: Point, duration: f64 },
}

impl Leg {
    pub fn duration(&self) -> f64 {
        match *self {
            Leg::Dwell { duration, .. } | Leg::Steer { duration, .. } => duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub n: usize,
    pub legs: Vec<Leg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// One piece followed forever.
    Single,
    /// Round `n` dwells `n·λⱼ` on every piece in turn.
    Averaged,
    /// Two pieces with a cumulative constraint kept nonpositive at all times.
    Cumulative,
}

#[derive(Debug, Clone)]
pub struct AlternatingSchedule {
    pub kind: ScheduleKind,
    pub pieces: Vec<SchedulePiece>,
    pub weights: Vec<f64>,
    /// Bound on the steering time between two points of the domain.
    pub t_k: f64,
    pub rounds: Vec<Round>,
    /// Time shift applied to the first piece (cumulative constraint only).
    pub shift: Option<f64>,
    /// Extra dwell `α = 2·M_g·T_K / (−μ₁(g))` on the first piece.
    pub padding: Option<f64>,
    /// Bound on `|g|` over the sampled state and control sets.
    pub m_g: Option<f64>,
}

/// Splits the support of `m` into groups of atoms that are chained by gaps of
/// at most `link`, and turns each group into a piece weighted by its mass: a
/// stationary point at its heaviest cell when no atom moves, otherwise the
/// curve traced from the group alone. Pieces come out in cell order of their
/// first atom.
pub fn pieces_from_measure(
    lp: &MeasureLp,
    m: &OptimalMeasure,
    domain: &Domain,
    link: f64,
) -> Result<(Vec<SchedulePiece>, Vec<f64>)> {
    let atoms: Vec<_> = m.support().copied().collect();
    if atoms.is_empty() {
        return Err(Error::Extraction("measure has empty support".into()));
    }
    let n = atoms.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn root(g: &mut [usize], mut i: usize) -> usize {
        while g[i] != i {
            g[i] = g[g[i]];
            i = g[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist(atoms[i].x, atoms[j].x) <= link {
                let (a, b) = (root(&mut group, i), root(&mut group, j));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    let sys = lp.system();
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    let mut pieces = Vec::new();
    let mut weights = Vec::new();
    for r in 0..n {
        if root(&mut group, r) != r {
            continue;
        }
        let members: Vec<_> = (0..n).filter(|&i| root(&mut group, i) == r).map(|i| atoms[i]).collect();
        let mass: f64 = members.iter().map(|a| a.weight).sum();
        let moving = members.iter().any(|a| {
            let f = sys.dynamics(a.cell, a.control);
            f[0].hypot(f[1]) > 1e-12
        });
        let piece = if moving {
            let sub = OptimalMeasure::new(lp, members.iter().map(|a| (a.column, a.weight)).collect());
            match extract_curve(&sub, sys, domain, &ExtractOptions::default())? {
                Extracted::Periodic(c) => SchedulePiece::Periodic(c),
                Extracted::Stationary(p) => SchedulePiece::Stationary(p),
            }
        } else {
            let heaviest = members
                .iter()
                .fold(members[0], |b, a| if a.weight > b.weight { *a } else { b });
            SchedulePiece::Stationary(StationaryPoint {
                x: heaviest.x,
                control: heaviest.u,
            })
        };
        pieces.push(piece);
        weights.push(mass / total);
    }
    // Renormalize so that the weights sum to one to rounding.
    let s: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= s;
    }
    Ok((pieces, weights))
}

/// `⌈x⌉`, ignoring rounding noise just above an integer.
fn ceil(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

/// Builds the itinerary of an alternating schedule over `rounds` rounds.
///
/// Without `constraint`, several pieces alternate with dwell `n·λⱼ` in round
/// `n`. With `constraint` and two pieces, the first piece is shifted in time
/// so that its cumulative excess never turns positive, and each round dwells
/// `T₁⌈α/T₁⌉ + T₁⌈λn/T₁⌉` on it, steers, dwells `T₂⌈(1−λ)n/T₂ − 1⌉` on the
/// second and steers back. With `constraint` and one piece, that piece is
/// shifted the same way and followed alone. Steering is a straight line at
/// unit speed and needs `f = u`; every point of it must lie in a retained
/// grid cell and its duration may not exceed `t_k`.
pub fn synthesize_schedule(
    pieces: Vec<SchedulePiece>,
    weights: &[f64],
    constraint: Option<&dyn Integrand>,
    system: &DiscretizedSystem,
    t_k: f64,
    rounds: usize,
) -> Result<AlternatingSchedule> {
    if pieces.is_empty() || pieces.len() != weights.len() {
        return Err(Error::Precondition(format!(
            "need one weight per piece, got {} pieces and {} weights",
            pieces.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition("weights must be nonnegative and sum to 1".into()));
    }
    if !(t_k > 0.0 && t_k.is_finite()) {
        return Err(Error::Precondition(format!("steering bound must be positive, got {t_k}")));
    }
    let mut pieces = pieces;
    let mut shift = None;
    let mut padding = None;
    let mut m_g = None;
    let kind = match (constraint, pieces.len()) {
        (_, 1) => ScheduleKind::Single,
        (None, _) => ScheduleKind::Averaged,
        (Some(_), 2) => ScheduleKind::Cumulative,
        (Some(_), k) => {
            return Err(Error::Precondition(format!(
                "the cumulative construction takes two pieces, got {k}"
            )))
        }
    };
    if let Some(g) = constraint {
        let mu1 = pieces[0].average(g)?;
        if kind == ScheduleKind::Single && mu1 > 0.0 {
            return Err(Error::Precondition(format!(
                "the piece violates the averaged constraint: mean {mu1}"
            )));
        }
        if kind == ScheduleKind::Cumulative && !(mu1 < 0.0) {
            return Err(Error::Precondition(format!(
                "the first piece must have negative constraint mean, got {mu1}"
            )));
        }
        let (piece, tau) = shift_to_max_excess(&pieces[0], g, mu1)?;
        pieces[0] = piece;
        shift = Some(tau);
        if kind == ScheduleKind::Cumulative {
            let bound = system
                .sample(g)?
                .iter()
                .fold(0.0_f64, |m, v| m.max(v.abs()));
            m_g = Some(bound);
            padding = Some(2.0 * bound * t_k / -mu1);
        }
    }
    let steering = Steering { system, t_k };
    let mut out = Vec::with_capacity(rounds);
    for n in 1..=rounds {
        let mut legs = Vec::new();
        match kind {
            ScheduleKind::Single => legs.push(Leg::Dwell {
                piece: 0,
                duration: pieces[0].period(),
            }),
            ScheduleKind::Averaged => {
                let k = pieces.len();
                for j in 0..k {
                    let duration = n as f64 * weights[j];
                    legs.push(Leg::Dwell { piece: j, duration });
                    let from = pieces[j].state_at(duration).0;
                    let to = pieces[(j + 1) % k].start();
                    if let Some(leg) = steering.leg(from, to)? {
                        legs.push(leg);
                    }
                }
            }
            ScheduleKind::Cumulative => {
                let (t1, t2) = (pieces[0].period(), pieces[1].period());
                let lambda = weights[0];
                let alpha = padding.unwrap_or(0.0);
                let d1 = t1 * ceil(alpha / t1) + t1 * ceil(lambda * n as f64 / t1);
                let d2 = t2 * ceil((1.0 - lambda) * n as f64 / t2 - 1.0).max(0.0);
                legs.push(Leg::Dwell { piece: 0, duration: d1 });
                if let Some(leg) = steering.leg(pieces[0].start(), pieces[1].start())? {
                    legs.push(leg);
                }
                legs.push(Leg::Dwell { piece: 1, duration: d2 });
                if let Some(leg) = steering.leg(pieces[1].state_at(d2).0, pieces[0].start())? {
                    legs.push(leg);
                }
            }
        }
        out.push(Round { n, legs });
    }
    Ok(AlternatingSchedule {
        kind,
        pieces,
        weights: weights.to_vec(),
        t_k,
        rounds: out,
        shift,
        padding,
        m_g,
    })
}

struct Steering<'a> {
    system: &'a DiscretizedSystem,
    t_k: f64,
}

impl Steering<'_> {
    fn leg(&self, from: Point, to: Point) -> Result<Option<Leg>> {
        let l = dist(from, to);
        if l == 0.0 {
            return Ok(None);
        }
        if !self.system.has_identity_dynamics() {
            return Err(Error::Steering("straight-line steering needs f = u".into()));
        }
        if l > self.t_k * (1.0 + 1e-12) {
            return Err(Error::Steering(format!(
                "distance {l} exceeds the steering bound {}",
                self.t_k
            )));
        }
        let g = self.system.grid();
        let h = g.cell_size();
        let steps = (l / (0.25 * h[0].min(h[1]))).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let x = lerp(from, to, k as f64 / steps as f64);
            let (ix, iy) = g.lattice_pos(x);
            if g.cell_at(ix, iy).is_none() {
                return Err(Error::Steering(format!(
                    "straight path leaves the domain at ({}, {})",
                    x[0], x[1]
                )));
            }
        }
        Ok(Some(Leg::Steer { from, to, duration: l }))
    }
}

/// Rotates a periodic piece so that `∫₀ˢ (g − mean)` is nonpositive for all
/// `s`: the new start is the sample maximizing that integral. Stationary
/// pieces are returned unchanged.
fn shift_to_max_excess(piece: &SchedulePiece, g: &dyn Integrand, mean: f64) -> Result<(SchedulePiece, f64)> {
    let SchedulePiece::Periodic(c) = piece else {
        return Ok((piece.clone(), 0.0));
    };
    let values = sample_values(c, g)?;
    let n = values.len();
    if n < 3 {
        return Ok((piece.clone(), 0.0));
    }
    let (mut best, mut best_k, mut acc) = (0.0, 0, 0.0);
    for k in 1..n - 1 {
        acc += 0.5 * c.dt * (values[k - 1] + values[k]) - c.dt * mean;
        if acc > best {
            best = acc;
            best_k = k;
        }
    }
    if best_k == 0 {
        return Ok((piece.clone(), 0.0));
    }
    // Drop the closing sample, rotate, and close again on the new start.
    let mut samples = c.samples[..n - 1].to_vec();
    let mut controls = c.controls[..n - 1].to_vec();
    samples.rotate_left(best_k);
    controls.rotate_left(best_k);
    samples.push(samples[0]);
    controls.push(controls[0]);
    let shifted = PeriodicCurve {
        samples,
        controls,
        dt: c.dt,
        period: c.period,
        closure_error: c.closure_error,
    };
    Ok((SchedulePiece::Periodic(shifted), best_k as f64 * c.dt))
}

fn sample_values(c: &PeriodicCurve, g: &dyn Integrand) -> Result<Vec<f64>> {
    c.samples
        .iter()
        .zip(&c.controls)
        .map(|(x, u)| g.eval(*x, *u).map_err(|e| e.at(*x)))
        .collect()
}

/// Running averages at the end of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub n: usize,
    /// Elapsed time at the end of the round.
    pub time: f64,
    /// `(1/T) ∫₀ᵀ gₖ` per integrand.
    pub averages: Vec<f64>,
    /// `|average − target|` per integrand.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    /// `Σⱼ λⱼ μⱼ(gₖ)` per integrand.
    pub targets: Vec<f64>,
    pub rounds: Vec<RoundReport>,
    /// Largest `∫₀ᵀ gₖ` over all sample times, per integrand.
    pub max_cumulative: Vec<f64>,
}

impl ScheduleReport {
    pub fn last(&self) -> Option<&RoundReport> {
        self.rounds.last()
    }
}

/// Integral of one integrand along a piece, with prefix sums on the sample
/// grid (trapezoid rule, matching [`PeriodicCurve::average`]).
struct PieceIntegral {
    /// Prefix integrals at the samples; the last entry is the period integral.
    prefix: Vec<f64>,
    /// Largest prefix over one period.
    prefix_max: f64,
    values: Vec<f64>,
    dt: f64,
    period: f64,
    /// Stationary pieces: constant rate.
    rate: Option<f64>,
}

impl PieceIntegral {
    fn new(piece: &SchedulePiece, g: &dyn Integrand) -> Result<PieceIntegral> {
        match piece {
            SchedulePiece::Stationary(p) => Ok(PieceIntegral {
                prefix: Vec::new(),
                prefix_max: 0.0,
                values: Vec::new(),
                dt: 1.0,
                period: 1.0,
                rate: Some(g.eval(p.x, p.control).map_err(|e| e.at(p.x))?),
            }),
            SchedulePiece::Periodic(c) => {
                let values = sample_values(c, g)?;
                let mut prefix = vec![0.0; values.len()];
                for k in 1..values.len() {
                    prefix[k] = prefix[k - 1] + 0.5 * c.dt * (values[k - 1] + values[k]);
                }
                let prefix_max = prefix.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok(PieceIntegral {
                    prefix,
                    prefix_max,
                    values,
                    dt: c.dt,
                    period: c.period,
                    rate: None,
                })
            }
        }
    }

    /// Integral from phase 0 to `r ∈ [0, period]`.
    fn partial(&self, r: f64) -> f64 {
        let s = r / self.dt;
        let last = self.values.len() - 1;
        let i = (s.floor() as usize).min(last.saturating_sub(1));
        let f = (s - i as f64).clamp(0.0, 1.0);
        let j = (i + 1).min(last);
        let end = self.values[i] + f * (self.values[j] - self.values[i]);
        self.prefix[i] + 0.5 * f * self.dt * (self.values[i] + end)
    }

    /// `(integral over [0, d], max of start + prefix integral over sample
    /// times in [0, d])`.
    fn dwell(&self, d: f64, start: f64) -> (f64, f64) {
        if let Some(rate) = self.rate {
            let total = rate * d;
            return (total, start.max(start + total));
        }
        let full = (d / self.period).floor();
        let r = d - full * self.period;
        let per = *self.prefix.last().unwrap();
        let partial = self.partial(r);
        let total = full * per + partial;
        let mut best = start.max(start + total);
        if full >= 1.0 {
            let k = if per > 0.0 { full - 1.0 } else { 0.0 };
            best = best.max(start + k * per + self.prefix_max);
        }
        let base = start + full * per;
        let upto = ((r / self.dt).floor() as usize).min(self.prefix.len() - 1);
        for p in &self.prefix[..=upto] {
            best = best.max(base + p);
        }
        (total, best)
    }
}

/// Nodes and weights of 5-point Gauss–Legendre quadrature on `[−1, 1]`.
const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Pieces a steering leg is split into for quadrature and for sampling the
/// cumulative integral.
const STEER_PANELS: usize = 16;

/// `(integral along the straight leg, max of start + running integral at
/// the panel ends)`.
fn steer_integral(g: &dyn Integrand, from: Point, to: Point, duration: f64, start: f64) -> Result<(f64, f64)> {
    let u = [(to[0] - from[0]) / duration, (to[1] - from[1]) / duration];
    let hp = duration / STEER_PANELS as f64;
    let mut acc = 0.0;
    let mut best = start;
    for p in 0..STEER_PANELS {
        let mid = (p as f64 + 0.5) * hp;
        for (z, w) in GAUSS5 {
            let t = mid + 0.5 * hp * z;
            let x = [from[0] + t * u[0], from[1] + t * u[1]];
            acc += 0.5 * hp * w * g.eval(x, u).map_err(|e| e.at(x))?;
        }
        best = best.max(start + acc);
    }
    Ok((acc, best))
}

/// Simulates the itinerary and reports, per integrand, the running averages
/// at every round end, their distance to `Σⱼ λⱼ μⱼ(g)`, and the largest
/// cumulative integral over all sample times.
pub fn verify_schedule(s: &AlternatingSchedule, g_list: &[&dyn Integrand]) -> Result<ScheduleReport> {
    let mut integrals = Vec::with_capacity(g_list.len());
    let mut targets = Vec::with_capacity(g_list.len());
    for g in g_list {
        let per_piece = s
            .pieces
            .iter()
            .map(|p| PieceIntegral::new(p, *g))
            .collect::<Result<Vec<_>>>()?;
        let mut target = 0.0;
        for (p, w) in s.pieces.iter().zip(&s.weights) {
            target += w * p.average(*g)?;
        }
        integrals.push(per_piece);
        targets.push(target);
    }
    let k = g_list.len();
    let mut time = 0.0;
    let mut cum = vec![0.0; k];
    let mut max_cum = vec![0.0_f64; k];
    let mut rounds = Vec::with_capacity(s.rounds.len());
    // Steering legs repeat from round to round.
    let mut steer_cache: Vec<((Point, Point), Vec<(f64, f64)>)> = Vec::new();
    for round in &s.rounds {
        for leg in &round.legs {
            match *leg {
                Leg::Dwell { piece, duration } => {
                    for q in 0..k {
                        let (total, best) = integrals[q][piece].dwell(duration, cum[q]);
                        max_cum[q] = max_cum[q].max(best);
                        cum[q] += total;
                    }
                }
                Leg::Steer { from, to, duration } => {
                    let pos = steer_cache.iter().position(|(key, _)| *key == (from, to));
                    let entry = match pos {
                        Some(p) => p,
                        None => {
                            let mut per_g = Vec::with_capacity(k);
                            for g in g_list {
                                per_g.push(steer_integral(*g, from, to, duration, 0.0)?);
                            }
                            steer_cache.push(((from, to), per_g));
                            steer_cache.len() - 1
                        }
                    };
                    for q in 0..k {
                        let (total, best) = steer_cache[entry].1[q];
                        max_cum[q] = max_cum[q].max(cum[q] + best);
                        cum[q] += total;
                    }
                }
            }
            time += leg.duration();
        }
        let averages: Vec<f64> = cum.iter().map(|c| if time > 0.0 { c / time } else { 0.0 }).collect();
        let distances = averages.iter().zip(&targets).map(|(a, t)| (a - t).abs()).collect();
        rounds.push(RoundReport {
            n: round.n,
            time,
            averages,
            distances,
        });
    }
    Ok(ScheduleReport {
        targets,
        rounds,
        max_cumulative: max_cum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::Domain;
    use crate::measure::MeasureLp;
    use crate::oracle::scalar_system;

    fn point(x: f64) -> SchedulePiece {
        SchedulePiece::Stationary(StationaryPoint {
            x: [x, 0.0],
            control: [0.0, 0.0],
        })
    }

    #[test]
    fn single_piece_follows_the_curve() {
        let sys = scalar_system(21).unwrap();
        let s = synthesize_schedule(vec![point(0.5)], &[1.0], None, &sys, 2.0, 5).unwrap();
        assert_eq!(s.kind, ScheduleKind::Single);
        assert!(s.rounds.iter().all(|r| r.legs == vec![Leg::Dwell { piece: 0, duration: 1.0 }]));
        let x = parse("x1").unwrap();
        let rep = verify_schedule(&s, &[&x]).unwrap();
        assert!(rep.rounds.iter().all(|r| (r.averages[0] - 0.5).abs() < 1e-15));
    }

    #[test]
    fn weighted_alternation_tends_to_the_mixture() {
        let sys = scalar_system(21).unwrap();
        let s = synthesize_schedule(vec![point(-1.0), point(1.0)], &[0.3, 0.7], None, &sys, 2.0, 4000)
            .unwrap();
        let x = parse("x1").unwrap();
        let rep = verify_schedule(&s, &[&x]).unwrap();
        assert!((rep.targets[0] - 0.4).abs() < 1e-15);
        assert!(rep.last().unwrap().distances[0] < 1e-3);
        // Error times n stays bounded.
        let c: Vec<f64> = rep.rounds.iter().map(|r| r.distances[0] * r.n as f64).collect();
        assert!(c[999] < 4.0 && c[3999] < 4.0);
    }

    #[test]
    fn cumulative_constraint_never_turns_positive() {
        let sys = scalar_system(21).unwrap();
        let g = parse("x1").unwrap();
        let s = synthesize_schedule(vec![point(-1.0), point(1.0)], &[0.5, 0.5], Some(&g), &sys, 2.0, 50)
            .unwrap();
        assert_eq!(s.padding, Some(4.0));
        assert_eq!(s.m_g, Some(1.0));
        let rep = verify_schedule(&s, &[&g]).unwrap();
        assert!(rep.max_cumulative[0] <= 0.0);
    }

    #[test]
    fn cumulative_needs_a_negative_first_piece() {
        let sys = scalar_system(21).unwrap();
        let g = parse("x1").unwrap();
        let r = synthesize_schedule(vec![point(1.0), point(-1.0)], &[0.5, 0.5], Some(&g), &sys, 2.0, 5);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn steering_outside_the_grid_fails() {
        let sys = scalar_system(21).unwrap();
        let far = SchedulePiece::Stationary(StationaryPoint {
            x: [0.0, 0.5],
            control: [0.0, 0.0],
        });
        let r = synthesize_schedule(vec![point(0.0), far], &[0.5, 0.5], None, &sys, 2.0, 1);
        assert!(matches!(r, Err(Error::Steering(_))));
    }

    #[test]
    fn shift_starts_at_the_largest_excess() {
        // Unit circle traversed counterclockwise; g = x1 has mean zero and
        // ∫₀ˢ cos t dt = sin s peaks at s = π/2.
        let n = 400;
        let dt = 2.0 * std::f64::consts::PI / n as f64;
        let samples: Vec<Point> = (0..=n).map(|k| [(k as f64 * dt).cos(), (k as f64 * dt).sin()]).collect();
        let controls = samples.iter().map(|p| [-p[1], p[0]]).collect();
        let c = PeriodicCurve {
            samples,
            controls,
            dt,
            period: dt * n as f64,
            closure_error: 0.0,
        };
        let g = parse("x1").unwrap();
        let (p, tau) = shift_to_max_excess(&SchedulePiece::Periodic(c), &g, 0.0).unwrap();
        assert!((tau - std::f64::consts::FRAC_PI_2).abs() < dt);
        let pi = PieceIntegral::new(&p, &g).unwrap();
        assert!(pi.prefix.iter().all(|v| *v <= 1e-12));
    }

    #[test]
    fn periodic_dwell_integrates_whole_and_partial_periods() {
        let n = 100;
        let dt = 0.01;
        let samples: Vec<Point> = (0..=n).map(|k| [k as f64 * dt, 0.0]).collect();
        let c = PeriodicCurve {
            controls: vec![[0.0, 0.0]; n + 1],
            samples,
            dt,
            period: 1.0,
            closure_error: 0.0,
        };
        let g = parse("x1").unwrap();
        let pi = PieceIntegral::new(&SchedulePiece::Periodic(c), &g).unwrap();
        // ∫₀¹ t dt = 1/2 per period, plus ∫₀^0.25 t dt.
        let (total, best) = pi.dwell(2.25, 0.0);
        assert!((total - (1.0 + 0.03125)).abs() < 1e-12);
        assert!((best - total).abs() < 1e-12);
    }

    #[test]
    fn measure_splits_into_stationary_pieces() {
        let sys = scalar_system(21).unwrap();
        let one = parse("1").unwrap();
        let lp = MeasureLp::assemble(sys, &one, &one, &[], 4).unwrap();
        // Control index 1 of segment(3) is zero.
        let left = lp.system().column(0, 1);
        let right = lp.system().column(20, 1);
        let m = OptimalMeasure::new(&lp, vec![(left, 0.25), (right, 0.75)]);
        let d = Domain::rectangle(2.0, 0.1).unwrap();
        let (pieces, w) = pieces_from_measure(&lp, &m, &d, 0.3).unwrap();
        assert_eq!(w, vec![0.25, 0.75]);
        assert_eq!(pieces[0].start(), [-1.0, 0.0]);
        assert_eq!(pieces[1].start(), [1.0, 0.0]);
    }

    #[test]
    fn gauss_rule_is_exact_on_polynomials() {
        let g = parse("x1^8").unwrap();
        let (v, _) = steer_integral(&g, [-1.0, 0.0], [1.0, 0.0], 2.0, 0.0).unwrap();
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
    }
}
