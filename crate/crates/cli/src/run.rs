//! Pipelines behind each mode and the run summary they produce.

use std::fmt::Write as _;
use std::time::Instant;

use occlp::cheeger::{solve_cheeger, solve_generalized, CheegerRun, GeneralizedCheegerProblem, Resolution};
use occlp::curve::{extract_curve, hausdorff, ExtractOptions, Extracted};
use occlp::expr::Expr;
use occlp::geometry::{build_spatial_grid, ControlGrid, Domain, Point};
use occlp::lp::Sense;
use occlp::measure::{DiscretizedSystem, Integrand, MeasureLp, OptimalMeasure};
use occlp::oracle::{cheeger_constant, cheeger_set_boundary, double_well_oracle};
use occlp::ratio::{
    pinned_sweep, solve_ratio, DinkelbachStep, Goal, Pin, RatioOptions, RatioSolution, SweepObjective,
    SweepResult,
};
use occlp::schedule::{pieces_from_measure, synthesize_schedule, AlternatingSchedule, ScheduleReport};
use occlp::scalar::{double_well, segment_system};
use occlp::{schedule, Error};

use crate::config::{expr, ConfigError, DomainKind, Mode, RunConfig, SenseConfig, SweepObjectiveConfig};

/// Why a run stopped.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Io(String),
    Solver(Error),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Solver(e)
    }
}

impl RunError {
    /// 1 for configuration and IO problems, 2 for infeasible programs, 3 when
    /// an iteration does not converge.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 1,
            RunError::Solver(Error::Infeasible(_) | Error::Unbounded) => 2,
            RunError::Solver(Error::NoConvergence { .. } | Error::NonClosing { .. }) => 3,
            RunError::Solver(_) => 1,
        }
    }

    /// Short tag for the diagnostic line.
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Io(_) => "io",
            RunError::Solver(e) => match e {
                Error::Infeasible(_) | Error::Unbounded => "infeasible",
                Error::NoConvergence { .. } | Error::NonClosing { .. } => "no_convergence",
                Error::Precondition(_) => "precondition",
                Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::Arity { .. } => "config",
                _ => "solver",
            },
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) | RunError::Io(m) => f.write_str(m),
            RunError::Solver(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(usize),
    Bool(bool),
    Text(String),
}

/// Ordered `key = value` pairs. Numbers that are not finite are left out.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub entries: Vec<(String, Value)>,
}

impl RunSummary {
    pub fn num(&mut self, k: impl Into<String>, v: f64) {
        if v.is_finite() {
            self.entries.push((k.into(), Value::Num(v)));
        }
    }

    pub fn int(&mut self, k: impl Into<String>, v: usize) {
        self.entries.push((k.into(), Value::Int(v)));
    }

    pub fn flag(&mut self, k: impl Into<String>, v: bool) {
        self.entries.push((k.into(), Value::Bool(v)));
    }

    pub fn text(&mut self, k: impl Into<String>, v: impl Into<String>) {
        self.entries.push((k.into(), Value::Text(v.into())));
    }

    /// One `key = value` line per entry, valid TOML.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = match v {
                Value::Num(x) => writeln!(out, "{k} = {}", num(*x)),
                Value::Int(x) => writeln!(out, "{k} = {x}"),
                Value::Bool(x) => writeln!(out, "{k} = {x}"),
                Value::Text(s) => writeln!(out, "{k} = {:?}", s),
            };
        }
        out
    }
}

/// Shortest round-trip form, always with a decimal point or exponent.
fn num(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// Reference curve drawn dashed in the SVG.
#[derive(Debug, Clone)]
pub enum OracleShape {
    Circle { center: Point, radius: f64 },
    Polyline(Vec<Point>),
}

pub struct ScheduleOutcome {
    pub schedule: AlternatingSchedule,
    pub report: ScheduleReport,
    /// Names of the verified integrands, in report order.
    pub labels: Vec<String>,
}

/// Everything a run produced.
pub struct Outcome {
    pub summary: RunSummary,
    pub domain: Domain,
    pub lp: Option<MeasureLp>,
    pub measure: Option<OptimalMeasure>,
    pub extracted: Option<Extracted>,
    pub trace: Vec<DinkelbachStep>,
    pub sweep: Option<SweepResult>,
    pub schedule: Option<ScheduleOutcome>,
    pub oracle: Option<OracleShape>,
}

impl Outcome {
    fn new(domain: Domain) -> Outcome {
        Outcome {
            summary: RunSummary::default(),
            domain,
            lp: None,
            measure: None,
            extracted: None,
            trace: Vec::new(),
            sweep: None,
            schedule: None,
            oracle: None,
        }
    }
}

fn system(cfg: &RunConfig, d: &Domain) -> Result<DiscretizedSystem, RunError> {
    if cfg.domain.kind == DomainKind::Segment {
        return Ok(segment_system(cfg.grid.nx, cfg.grid.n_u)?);
    }
    Ok(DiscretizedSystem::new(
        build_spatial_grid(d, cfg.grid.nx, cfg.grid.ny)?,
        ControlGrid::circle(cfg.grid.n_u)?,
    ))
}

fn goal(cfg: &RunConfig) -> Goal {
    match cfg.objective.sense {
        SenseConfig::Min => Goal::Minimize,
        SenseConfig::Max => Goal::Maximize,
    }
}

fn ratio_options(cfg: &RunConfig, goal: Goal) -> RatioOptions {
    RatioOptions {
        goal,
        tol: cfg.tolerances.dinkelbach,
        max_iters: cfg.tolerances.max_dinkelbach_iterations,
        ..RatioOptions::default()
    }
}

fn assemble(cfg: &RunConfig, d: &Domain) -> Result<MeasureLp, RunError> {
    let sys = system(cfg, d)?;
    let (p, q) = cfg.objective()?;
    let cs = cfg.constraints()?;
    let refs: Vec<(&dyn Integrand, Sense)> = cs.iter().map(|(e, s)| (e as &dyn Integrand, *s)).collect();
    Ok(MeasureLp::assemble(sys, &p, &q, &refs, cfg.test_degree)?)
}

/// Runs `cfg`, with `mode` overriding the configured mode.
pub fn run(cfg: &RunConfig, mode: Option<Mode>) -> Result<Outcome, RunError> {
    let start = Instant::now();
    let mode = mode.unwrap_or(cfg.mode);
    let d = cfg.domain()?;
    let mut out = Outcome::new(d.clone());
    out.summary.text("mode", mode.name());
    match mode {
        Mode::Ratio => {
            let lp = assemble(cfg, &d)?;
            let s = solve_ratio(&lp, &ratio_options(cfg, goal(cfg)))?;
            report_solution(&mut out.summary, &lp, &s);
            let (p, q) = cfg.objective()?;
            trace_curve(&mut out, &lp, &s.measure, &d, Some((&p, &q)));
            out.trace = s.trace.clone();
            out.measure = Some(s.measure);
            out.lp = Some(lp);
        }
        Mode::Cheeger | Mode::GeneralizedCheeger => {
            let res = Resolution::new(cfg.grid.nx, cfg.grid.ny, cfg.grid.n_u, cfg.test_degree);
            let opts = ratio_options(cfg, Goal::Maximize);
            let run = if mode == Mode::Cheeger {
                solve_cheeger(&d, res, &opts)?
            } else {
                let g = cfg.generalized.as_ref().expect("validated");
                let mut prob = GeneralizedCheegerProblem::new(expr(&g.p)?, expr(&g.q)?);
                prob.allow_nonpositive_q = g.allow_nonpositive_q;
                prob.eta = g.eta;
                solve_generalized(&d, &prob, res, &opts)?
            };
            cheeger_outcome(&mut out, run, mode == Mode::Cheeger)?;
        }
        Mode::DoubleWell => {
            let mean = cfg.double_well.as_ref().expect("validated").mean;
            let s = double_well(mean, system(cfg, &d)?, cfg.test_degree, &ratio_options(cfg, Goal::Minimize))?;
            let o = double_well_oracle(mean)?;
            let sm = &mut out.summary;
            sm.num("value", s.value);
            sm.int("lp_iterations", s.lp_iterations);
            sm.int("dinkelbach_steps", s.trace.len());
            sm.num("stationarity_residual", s.measure.stationarity_residual);
            sm.int("support_atoms", s.measure.support().count());
            sm.int("support_cells", s.measure.support_cells().len());
            let left: f64 = s.measure.support().filter(|a| a.x[0] < 0.0).map(|a| a.weight).sum();
            sm.num("lambda", left);
            sm.num("oracle.value", o.v_star);
            sm.num("oracle.delta", s.value - o.v_star);
            sm.num("oracle.lambda", o.lambda);
            sm.num("oracle.lambda_delta", left - o.lambda);
            out.trace = s.trace.clone();
            out.measure = Some(s.measure);
        }
        Mode::PinnedSweep => sweep_mode(cfg, &d, &mut out)?,
        Mode::Schedule => schedule_mode(cfg, &d, &mut out)?,
    }
    if let Some(seed) = cfg.seed {
        out.summary.text("seed", seed.to_string());
    }
    out.summary.num("wall_time_s", start.elapsed().as_secs_f64());
    Ok(out)
}

fn report_solution(sm: &mut RunSummary, lp: &MeasureLp, s: &RatioSolution) {
    sm.num("value", s.value);
    sm.num("mu_p", s.measure.mu_p);
    sm.num("mu_q", s.measure.mu_q);
    sm.int("lp_iterations", s.lp_iterations);
    sm.int("dinkelbach_steps", s.trace.len());
    if let Some(last) = s.trace.last() {
        sm.num("dinkelbach_residual", last.r);
    }
    sm.num("stationarity_residual", s.measure.stationarity_residual);
    sm.int("lp_rows", lp.n_rows());
    sm.int("support_atoms", s.measure.support().count());
    sm.int("support_cells", s.measure.support_cells().len());
    for (k, (mean, active)) in s.measure.mu_constraints.iter().zip(&s.active).enumerate() {
        sm.num(format!("constraint.{}.mean", k + 1), *mean);
        sm.flag(format!("constraint.{}.active", k + 1), *active);
    }
}

/// Traces the curve of `m` and records its statistics; a failed trace is
/// reported, not raised.
fn trace_curve(out: &mut Outcome, lp: &MeasureLp, m: &OptimalMeasure, d: &Domain, ratio: Option<(&dyn Integrand, &dyn Integrand)>) {
    let sm = &mut out.summary;
    match extract_curve(m, lp.system(), d, &ExtractOptions::default()) {
        Ok(e) => {
            curve_stats(sm, &e, ratio);
            out.extracted = Some(e);
        }
        Err(e) => {
            sm.text("curve.kind", "failed");
            sm.text("curve.error", e.to_string());
        }
    }
}

fn curve_stats(sm: &mut RunSummary, e: &Extracted, ratio: Option<(&dyn Integrand, &dyn Integrand)>) {
    match e {
        Extracted::Stationary(p) => {
            sm.text("curve.kind", "stationary");
            sm.num("curve.x1", p.x[0]);
            sm.num("curve.x2", p.x[1]);
        }
        Extracted::Periodic(c) => {
            sm.text("curve.kind", "periodic");
            sm.num("curve.period", c.period);
            sm.int("curve.samples", c.samples.len());
            sm.num("curve.closure_error", c.closure_error);
            sm.flag("curve.jordan", c.is_jordan());
            sm.num("curve.area", c.signed_area().abs());
            if let Some((p, q)) = ratio {
                if let (Ok(a), Ok(b)) = (c.average(p), c.average(q)) {
                    sm.num("curve.cycle_ratio", a / b);
                }
            }
        }
    }
}

fn cheeger_outcome(out: &mut Outcome, run: CheegerRun, oracle: bool) -> Result<(), RunError> {
    let CheegerRun {
        lp,
        solution,
        curve,
        warnings,
    } = run;
    report_solution(&mut out.summary, &lp, &solution);
    let p = occlp::measure::FnIntegrand(|x: Point, u: Point| x[0] * u[1]);
    let one = occlp::measure::FnIntegrand(|_: Point, _: Point| 1.0);
    match curve {
        Ok(e) => {
            let ratio: Option<(&dyn Integrand, &dyn Integrand)> = if oracle { Some((&p, &one)) } else { None };
            curve_stats(&mut out.summary, &e, ratio);
            out.extracted = Some(e);
        }
        Err(e) => {
            out.summary.text("curve.kind", "failed");
            out.summary.text("curve.error", e.to_string());
        }
    }
    for (k, w) in warnings.iter().enumerate() {
        out.summary.text(format!("warning.{}", k + 1), w.clone());
    }
    if oracle && out.domain.is_convex() {
        let o = cheeger_constant(&out.domain)?;
        out.summary.num("oracle.value", o.v_star);
        out.summary.num("oracle.delta", solution.value - o.v_star);
        let boundary = cheeger_set_boundary(&out.domain, 2000)?;
        if let Some(c) = out.extracted.as_ref().and_then(|e| e.as_curve()) {
            out.summary.num("oracle.hausdorff", hausdorff(&c.polyline(), &boundary));
        }
        out.oracle = Some(match out.domain {
            Domain::Disk { radius, center } => OracleShape::Circle { center, radius },
            _ => OracleShape::Polyline(boundary),
        });
    }
    out.trace = solution.trace.clone();
    out.measure = Some(solution.measure);
    out.lp = Some(lp);
    Ok(())
}

fn steering_bound(cfg: &RunConfig, d: &Domain) -> f64 {
    if cfg.domain.kind == DomainKind::Segment {
        2.0
    } else {
        d.diameter()
    }
}

fn link(cfg: &RunConfig, lp: &MeasureLp) -> f64 {
    let h = lp.system().grid().cell_size();
    cfg.schedule.link.unwrap_or(2.0 * h[0].max(h[1]))
}

fn sweep_mode(cfg: &RunConfig, d: &Domain, out: &mut Outcome) -> Result<(), RunError> {
    let sc = cfg.sweep.as_ref().expect("validated");
    let lp = assemble(cfg, d)?;
    let pin_exprs = sc.pins.iter().map(|s| expr(s)).collect::<Result<Vec<Expr>, _>>()?;
    let mut pins = Vec::new();
    for (k, e) in pin_exprs.iter().enumerate() {
        pins.push(Pin {
            values: lp.system().sample(e)?,
            lattice: sc.lattice.as_ref().map(|l| l[k].clone()),
        });
    }
    let value = expr(&sc.value)?;
    // Evaluate once up front so that a bad value expression is a config error.
    value.evaluate([0.0, 0.0], [0.0, 1.0])?;
    let objective = match sc.objective {
        SweepObjectiveConfig::Linear => SweepObjective::Linear,
        SweepObjectiveConfig::Ratio => SweepObjective::Ratio,
        SweepObjectiveConfig::Feasibility => SweepObjective::Feasibility,
    };
    let v = |c: &[f64], mp: f64, mq: f64| {
        let x = [c[0], c.get(1).copied().unwrap_or(0.0)];
        value.evaluate(x, [mp, mq]).unwrap_or(f64::NAN)
    };
    let r = pinned_sweep(&lp, &pins, objective, goal(cfg), v, &occlp::lp::SimplexOptions::default())?;
    let sm = &mut out.summary;
    let best = &r.points[r.best];
    sm.num("value", r.best_value());
    for (k, c) in best.pinned.iter().enumerate() {
        sm.num(format!("best.pin.{}", k + 1), *c);
    }
    sm.int("lattice_points", r.points.len());
    sm.int("feasible_points", r.points.iter().filter(|p| p.result.is_some()).count());
    let m = r.best_measure().clone();
    sm.int("support_atoms", m.support().count());
    sm.int("support_cells", m.support_cells().len());
    sm.num("stationarity_residual", m.stationarity_residual);
    if sc.schedule_rounds > 0 {
        let (pieces, weights) = pieces_from_measure(&lp, &m, d, link(cfg, &lp))?;
        let s = synthesize_schedule(pieces, &weights, None, lp.system(), steering_bound(cfg, d), sc.schedule_rounds)?;
        let (p, q) = cfg.objective()?;
        let mut g: Vec<&dyn Integrand> = pin_exprs.iter().map(|e| e as &dyn Integrand).collect();
        g.push(&p);
        g.push(&q);
        let rep = schedule::verify_schedule(&s, &g)?;
        let last = rep.last().expect("at least one round");
        let np = pin_exprs.len();
        let avg = &last.averages;
        let x = [avg[0], if np > 1 { avg[1] } else { 0.0 }];
        let sv = value.evaluate(x, [avg[np], avg[np + 1]])?;
        sm.int("schedule.pieces", s.pieces.len());
        sm.int("schedule.rounds", s.rounds.len());
        sm.num("schedule.value", sv);
        sm.num("schedule.delta", sv - r.best_value());
        let mut labels = sc.pins.clone();
        labels.push(cfg.objective.p.clone());
        labels.push(cfg.objective.q.clone());
        out.schedule = Some(ScheduleOutcome {
            schedule: s,
            report: rep,
            labels,
        });
    }
    try_trace_planar(cfg, out, &lp, &m, d);
    out.measure = Some(m);
    out.sweep = Some(r);
    out.lp = Some(lp);
    Ok(())
}

/// Planar sweeps and schedules also get a traced curve when the measure is a
/// single piece.
fn try_trace_planar(cfg: &RunConfig, out: &mut Outcome, lp: &MeasureLp, m: &OptimalMeasure, d: &Domain) {
    if cfg.domain.kind != DomainKind::Segment && out.schedule.is_none() {
        trace_curve(out, lp, m, d, None);
    }
}

fn schedule_mode(cfg: &RunConfig, d: &Domain, out: &mut Outcome) -> Result<(), RunError> {
    let lp = assemble(cfg, d)?;
    let s = solve_ratio(&lp, &ratio_options(cfg, goal(cfg)))?;
    report_solution(&mut out.summary, &lp, &s);
    let (mut pieces, mut weights) = pieces_from_measure(&lp, &s.measure, d, link(cfg, &lp))?;
    let cs = cfg.constraints()?;
    let constraint: Option<&dyn Integrand> = if cfg.schedule.cumulative {
        let g = &cs[0].0;
        // The construction starts on the piece with the smallest mean.
        let means = pieces.iter().map(|p| p.average(g)).collect::<Result<Vec<_>, _>>()?;
        let mut order: Vec<usize> = (0..pieces.len()).collect();
        order.sort_by(|a, b| means[*a].total_cmp(&means[*b]).then(a.cmp(b)));
        pieces = order.iter().map(|&k| pieces[k].clone()).collect();
        weights = order.iter().map(|&k| weights[k]).collect();
        Some(g)
    } else {
        None
    };
    let sched = synthesize_schedule(pieces, &weights, constraint, lp.system(), steering_bound(cfg, d), cfg.schedule.rounds)?;
    let (p, q) = cfg.objective()?;
    let mut g: Vec<&dyn Integrand> = vec![&p, &q];
    g.extend(cs.iter().map(|(e, _)| e as &dyn Integrand));
    let rep = schedule::verify_schedule(&sched, &g)?;
    let sm = &mut out.summary;
    sm.int("schedule.pieces", sched.pieces.len());
    for (k, w) in sched.weights.iter().enumerate() {
        sm.num(format!("schedule.weight.{}", k + 1), *w);
    }
    sm.text("schedule.kind", format!("{:?}", sched.kind).to_lowercase());
    sm.num("schedule.t_k", sched.t_k);
    if let Some(a) = sched.padding {
        sm.num("schedule.padding", a);
    }
    if let Some(t) = sched.shift {
        sm.num("schedule.shift", t);
    }
    sm.int("schedule.rounds", sched.rounds.len());
    let last = rep.last().expect("at least one round");
    let ratio = last.averages[0] / last.averages[1];
    sm.num("schedule.value", ratio);
    sm.num("schedule.delta", ratio - s.value);
    for k in 0..cs.len() {
        sm.num(format!("schedule.constraint.{}.average", k + 1), last.averages[2 + k]);
        sm.num(format!("schedule.constraint.{}.max_cumulative", k + 1), rep.max_cumulative[2 + k]);
    }
    let mut labels = vec![cfg.objective.p.clone(), cfg.objective.q.clone()];
    labels.extend(cfg.constraints.iter().map(|c| c.expr.clone()));
    out.schedule = Some(ScheduleOutcome {
        schedule: sched,
        report: rep,
        labels,
    });
    out.trace = s.trace.clone();
    out.measure = Some(s.measure);
    out.lp = Some(lp);
    Ok(())
}
