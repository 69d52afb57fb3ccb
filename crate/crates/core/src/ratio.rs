//! Fractional objectives `μ(p)/μ(q)` by Dinkelbach iteration, and sweeps over
//! pinned averages for values that are not ratios.

use crate::error::{Error, Result};
use crate::lp::{LpSolution, LpStatus, Sense, SimplexOptions};
use crate::measure::{ColumnRow, MeasureLp, OptimalMeasure};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
pub struct RatioOptions {
    pub goal: Goal,
    /// Stop when `|r_t|` falls below this.
    pub tol: f64,
    pub max_iters: usize,
    pub simplex: SimplexOptions,
}

impl Default for RatioOptions {
    fn default() -> Self {
        RatioOptions {
            goal: Goal::Minimize,
            tol: 1e-9,
            max_iters: 50,
            simplex: SimplexOptions::default(),
        }
    }
}

impl RatioOptions {
    pub fn maximize() -> RatioOptions {
        RatioOptions {
            goal: Goal::Maximize,
            ..RatioOptions::default()
        }
    }
}

/// One Dinkelbach step: the parameter `v_t` and the optimum `r_t` of
/// `min μ(p) − v_t μ(q)` (in the minimization frame).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DinkelbachStep {
    pub v: f64,
    pub r: f64,
}

#[derive(Debug, Clone)]
pub struct RatioSolution {
    /// Optimal ratio, in the caller's sense.
    pub value: f64,
    pub measure: OptimalMeasure,
    pub trace: Vec<DinkelbachStep>,
    /// Per constraint row: whether it binds at the returned measure.
    pub active: Vec<bool>,
    /// Final LP basis.
    pub basis: Vec<usize>,
    pub lp_iterations: usize,
}

fn check_status(s: &LpSolution) -> Result<()> {
    match s.status {
        LpStatus::Optimal => Ok(()),
        LpStatus::Infeasible => Err(Error::Infeasible(
            "no measure satisfies the stationarity and constraint rows".into(),
        )),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}

fn integrate(values: &[f64], x: &[f64]) -> f64 {
    values.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Optimizes `μ(p)/μ(q)` over the measure polytope of `lp`, with its
/// constraint rows and the `extra` rows.
pub fn solve_ratio_with(lp: &MeasureLp, extra: &[ColumnRow], opts: &RatioOptions) -> Result<RatioSolution> {
    let sign = match opts.goal {
        Goal::Minimize => 1.0,
        Goal::Maximize => -1.0,
    };
    let p: Vec<f64> = lp.p().iter().map(|v| sign * v).collect();
    let q = lp.q();
    let n = lp.n_cols();

    // Any feasible basic solution gives v_0.
    let first = lp.solve_linear(vec![0.0; n], extra, None, &opts.simplex)?;
    check_status(&first)?;
    let mut lp_iterations = first.iterations;
    let mut x = first.x;
    let mut basis = first.basis;
    let mut v = integrate(&p, &x) / integrate(q, &x);
    let mut trace = Vec::new();

    for _ in 0..opts.max_iters {
        let cost: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - v * b).collect();
        let s = lp.solve_linear(cost, extra, Some(&basis), &opts.simplex)?;
        check_status(&s)?;
        lp_iterations += s.iterations;
        let r = s.objective;
        let scale = 1.0 + v.abs();
        // The previous iterate attains 0, so the optimum cannot be positive.
        assert!(
            r <= 1e-9 * scale,
            "Dinkelbach residual {r} is positive at v = {v}"
        );
        trace.push(DinkelbachStep { v, r });
        x = s.x;
        basis = s.basis;
        if r.abs() <= opts.tol {
            break;
        }
        let next = integrate(&p, &x) / integrate(q, &x);
        assert!(
            next <= v + 1e-9 * scale,
            "Dinkelbach parameter increased from {v} to {next}"
        );
        v = next;
    }
    let done = trace.last().is_some_and(|t| t.r.abs() <= opts.tol);
    if !done {
        return Err(Error::NoConvergence {
            iterations: trace.len(),
            last_objective: trace.last().map_or(f64::NAN, |t| t.r),
        });
    }
    let measure = lp.measure_from(&x);
    let value = measure.ratio();
    let active = lp
        .constraints()
        .iter()
        .zip(&measure.mu_constraints)
        .map(|(r, m)| r.sense == Sense::Eq || (m - r.rhs).abs() <= 1e-8)
        .collect();
    Ok(RatioSolution {
        value,
        measure,
        trace,
        active,
        basis,
        lp_iterations,
    })
}

pub fn solve_ratio(lp: &MeasureLp, opts: &RatioOptions) -> Result<RatioSolution> {
    solve_ratio_with(lp, &[], opts)
}

/// What is optimized at each lattice point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepObjective {
    /// Optimize `μ(p)` in the sense of the goal.
    Linear,
    /// Optimize `μ(p)/μ(q)` in the sense of the goal, by Dinkelbach.
    Ratio,
    /// Any feasible measure.
    Feasibility,
}

/// Averages held fixed during a sweep: per pin, the column values and the
/// lattice of pinned values. `None` lattices are probed: `points` values
/// evenly spread over `[min μ(pin), max μ(pin)]`.
#[derive(Debug, Clone)]
pub struct Pin {
    pub values: Vec<f64>,
    pub lattice: Option<Vec<f64>>,
}

pub const DEFAULT_SWEEP_POINTS: usize = 41;

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub pinned: Vec<f64>,
    /// `None` when the pinned values are infeasible.
    pub result: Option<SweepValue>,
}

#[derive(Debug, Clone)]
pub struct SweepValue {
    pub value: f64,
    pub measure: OptimalMeasure,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Index of the optimal lattice point.
    pub best: usize,
}

impl SweepResult {
    pub fn best_value(&self) -> f64 {
        self.points[self.best].result.as_ref().map_or(f64::NAN, |r| r.value)
    }

    pub fn best_measure(&self) -> &OptimalMeasure {
        &self.points[self.best].result.as_ref().expect("best point is feasible").measure
    }
}

/// Range of `μ(values)` over the measure polytope (with constraint rows).
pub fn probe_range(lp: &MeasureLp, values: &[f64], opts: &SimplexOptions) -> Result<(f64, f64)> {
    let lo = lp.solve_linear(values.to_vec(), &[], None, opts)?;
    check_status(&lo)?;
    let hi = lp.solve_linear(values.iter().map(|v| -v).collect(), &[], None, opts)?;
    check_status(&hi)?;
    Ok((lo.objective, -hi.objective))
}

fn lattice_of(lp: &MeasureLp, pin: &Pin, opts: &SimplexOptions) -> Result<Vec<f64>> {
    if let Some(l) = &pin.lattice {
        return Ok(l.clone());
    }
    let (lo, hi) = probe_range(lp, &pin.values, opts)?;
    let k = DEFAULT_SWEEP_POINTS;
    Ok((0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect())
}

/// Solves the measure LP with equality rows `μ(pin_k) = c_k` at every lattice
/// point `c` (cartesian product over pins, first pin slowest), optimizing in
/// the sense `goal`, and evaluates `value(c, μ(p), μ(q))`. The best point is
/// the optimum of `value` in the same sense; ties go to the earliest lattice
/// point.
pub fn pinned_sweep<V>(
    lp: &MeasureLp,
    pins: &[Pin],
    objective: SweepObjective,
    goal: Goal,
    value: V,
    opts: &SimplexOptions,
) -> Result<SweepResult>
where
    V: Fn(&[f64], f64, f64) -> f64 + Sync,
{
    if pins.iter().any(|p| p.values.len() != lp.n_cols()) {
        return Err(Error::Precondition("pin column vector length mismatch".into()));
    }
    let lattices = pins
        .iter()
        .map(|p| lattice_of(lp, p, opts))
        .collect::<Result<Vec<_>>>()?;
    let total: usize = lattices.iter().map(|l| l.len()).product();
    let coords = |mut k: usize| {
        let mut c = vec![0.0; lattices.len()];
        for (slot, l) in c.iter_mut().zip(&lattices).rev() {
            *slot = l[k % l.len()];
            k /= l.len();
        }
        c
    };
    let ratio_opts = RatioOptions {
        goal,
        simplex: opts.clone(),
        ..RatioOptions::default()
    };
    let sign = match goal {
        Goal::Minimize => 1.0,
        Goal::Maximize => -1.0,
    };
    let points = par::try_map_collect(total, |k| {
        let c = coords(k);
        let rows: Vec<ColumnRow> = pins
            .iter()
            .zip(&c)
            .map(|(p, ck)| ColumnRow {
                values: p.values.clone(),
                sense: Sense::Eq,
                rhs: *ck,
            })
            .collect();
        let measure = match objective {
            SweepObjective::Ratio => match solve_ratio_with(lp, &rows, &ratio_opts) {
                Ok(s) => Some(s.measure),
                Err(Error::Infeasible(_)) => None,
                Err(e) => return Err(e),
            },
            SweepObjective::Linear | SweepObjective::Feasibility => {
                let cost = if objective == SweepObjective::Linear {
                    lp.p().iter().map(|v| sign * v).collect()
                } else {
                    vec![0.0; lp.n_cols()]
                };
                let s = lp.solve_linear(cost, &rows, None, opts)?;
                match s.status {
                    LpStatus::Optimal => Some(lp.measure_from(&s.x)),
                    LpStatus::Infeasible => None,
                    LpStatus::Unbounded => return Err(Error::Unbounded),
                }
            }
        };
        let result = measure.map(|m| SweepValue {
            value: value(&c, m.mu_p, m.mu_q),
            measure: m,
        });
        Ok(SweepPoint { pinned: c, result })
    })?;
    let better = |a: f64, b: f64| match goal {
        Goal::Minimize => a < b,
        Goal::Maximize => a > b,
    };
    let mut best: Option<usize> = None;
    for (k, p) in points.iter().enumerate() {
        if let Some(r) = &p.result {
            if !r.value.is_finite() {
                return Err(Error::Precondition(format!(
                    "sweep value is not finite at {:?}",
                    p.pinned
                )));
            }
            if best.is_none_or(|b| better(r.value, points[b].result.as_ref().unwrap().value)) {
                best = Some(k);
            }
        }
    }
    let best = best.ok_or_else(|| Error::Infeasible("every lattice point is infeasible".into()))?;
    Ok(SweepResult { points, best })
}
