//! Run configuration: a TOML file with dotted keys such as `domain.kind`,
//! `grid.nx` or `objective.p`.

use std::path::{Path, PathBuf};

use occlp::expr::{parse, Expr};
use occlp::geometry::{BBox, Domain};
use occlp::lp::Sense;
use serde::Deserialize;

/// Problems a run can solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Ratio,
    PinnedSweep,
    Cheeger,
    GeneralizedCheeger,
    DoubleWell,
    Schedule,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Ratio => "ratio",
            Mode::PinnedSweep => "pinned_sweep",
            Mode::Cheeger => "cheeger",
            Mode::GeneralizedCheeger => "generalized_cheeger",
            Mode::DoubleWell => "double_well",
            Mode::Schedule => "schedule",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Rectangle,
    Disk,
    Polygon,
    Implicit,
    /// The interval `[−1, 1]` on the first axis, for scalar problems.
    Segment,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainKind,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub radius: Option<f64>,
    pub center: Option<[f64; 2]>,
    pub vertices: Option<Vec<[f64; 2]>>,
    /// Implicit domains: `{expr < 0}` inside `bbox`.
    pub expr: Option<String>,
    /// `[xmin, ymin, xmax, ymax]`.
    pub bbox: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    #[serde(default = "one")]
    pub ny: usize,
    pub n_u: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SenseConfig {
    Min,
    Max,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    #[serde(default = "zero_expr")]
    pub p: String,
    #[serde(default = "one_expr")]
    pub q: String,
    #[serde(default = "min_sense")]
    pub sense: SenseConfig,
}

fn zero_expr() -> String {
    "0".into()
}

fn one_expr() -> String {
    "1".into()
}

fn min_sense() -> SenseConfig {
    SenseConfig::Min
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig {
            p: zero_expr(),
            q: one_expr(),
            sense: min_sense(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSense {
    Le,
    Eq,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    pub expr: String,
    pub sense: ConstraintSense,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralizedConfig {
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "Q")]
    pub q: String,
    #[serde(default)]
    pub allow_nonpositive_q: bool,
    #[serde(default = "default_eta")]
    pub eta: f64,
}

fn default_eta() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleWellConfig {
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepObjectiveConfig {
    Linear,
    Ratio,
    Feasibility,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Integrands whose averages are pinned (at most two).
    pub pins: Vec<String>,
    /// Explicit lattice per pin; probed when absent.
    pub lattice: Option<Vec<Vec<f64>>>,
    #[serde(default = "sweep_objective")]
    pub objective: SweepObjectiveConfig,
    /// Value at a lattice point, with `x1`, `x2` the pinned averages and
    /// `u1`, `u2` the averages of `p` and `q`.
    pub value: String,
    /// Rounds of the alternating schedule realizing the best point; none
    /// when zero.
    #[serde(default)]
    pub schedule_rounds: usize,
}

fn sweep_objective() -> SweepObjectiveConfig {
    SweepObjectiveConfig::Linear
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    /// Keep the single `le` constraint nonpositive at all times rather than
    /// on average.
    #[serde(default)]
    pub cumulative: bool,
    /// Atoms closer than this belong to the same piece; two cells when
    /// absent.
    pub link: Option<f64>,
}

fn default_rounds() -> usize {
    50
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            rounds: default_rounds(),
            cumulative: false,
            link: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_dinkelbach")]
    pub dinkelbach: f64,
    #[serde(default = "default_max_dinkelbach")]
    pub max_dinkelbach_iterations: usize,
}

fn default_dinkelbach() -> f64 {
    1e-9
}

fn default_max_dinkelbach() -> usize {
    50
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dinkelbach: default_dinkelbach(),
            max_dinkelbach_iterations: default_max_dinkelbach(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub summary: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub csv_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub domain: DomainConfig,
    pub grid: GridConfig,
    #[serde(default = "default_degree")]
    pub test_degree: usize,
    #[serde(default)]
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub constraints: Vec<ConstraintConfig>,
    pub generalized: Option<GeneralizedConfig>,
    pub double_well: Option<DoubleWellConfig>,
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    /// Only used by randomized checks.
    pub seed: Option<u64>,
}

fn default_degree() -> usize {
    occlp::measure::DEFAULT_TEST_DEGREE
}

/// Configuration problems: unreadable file, bad syntax or bad values.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let c: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.message().to_string()))?;
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        let scalar = self.domain.kind == DomainKind::Segment;
        if g.nx < 2 || (!scalar && g.ny < 2) || g.n_u < 2 {
            return Err(ConfigError(format!(
                "grid sizes must be at least 2, got nx={} ny={} n_u={}",
                g.nx, g.ny, g.n_u
            )));
        }
        let needs = |present: bool, key: &str| {
            if present {
                Ok(())
            } else {
                Err(ConfigError(format!("mode {} needs `{key}`", self.mode.name())))
            }
        };
        match self.mode {
            Mode::GeneralizedCheeger => needs(self.generalized.is_some(), "generalized.P")?,
            Mode::DoubleWell => needs(self.double_well.is_some(), "double_well.mean")?,
            Mode::PinnedSweep => needs(self.sweep.is_some(), "sweep.pins")?,
            _ => {}
        }
        if matches!(self.mode, Mode::Cheeger | Mode::GeneralizedCheeger) && scalar {
            return Err(ConfigError("Cheeger modes need a planar domain".into()));
        }
        if self.mode == Mode::DoubleWell && !scalar {
            return Err(ConfigError("double_well needs domain.kind = \"segment\"".into()));
        }
        if let Some(s) = &self.sweep {
            if s.pins.is_empty() || s.pins.len() > 2 {
                return Err(ConfigError(format!("sweep takes one or two pins, got {}", s.pins.len())));
            }
            if let Some(l) = &s.lattice {
                if l.len() != s.pins.len() || l.iter().any(|v| v.is_empty()) {
                    return Err(ConfigError("sweep.lattice needs one nonempty list per pin".into()));
                }
            }
        }
        if self.schedule.cumulative {
            let le = self.constraints.iter().filter(|c| c.sense == ConstraintSense::Le).count();
            if self.constraints.len() != 1 || le != 1 {
                return Err(ConfigError(
                    "schedule.cumulative needs exactly one `le` constraint".into(),
                ));
            }
        }
        if self.test_degree == 0 {
            return Err(ConfigError("test_degree must be at least 1".into()));
        }
        Ok(())
    }

    /// The state set `K`. Segments become a thin rectangle around `[−1, 1]`
    /// covering the strip grid.
    pub fn domain(&self) -> Result<Domain, ConfigError> {
        let d = &self.domain;
        let missing = |k: &str| ConfigError(format!("domain.kind = {:?} needs `domain.{k}`", d.kind));
        let center = d.center.unwrap_or([0.0, 0.0]);
        let r = match d.kind {
            DomainKind::Rectangle => Domain::rectangle_at(
                d.width.ok_or_else(|| missing("width"))?,
                d.height.ok_or_else(|| missing("height"))?,
                center,
            ),
            DomainKind::Disk => Domain::disk_at(d.radius.ok_or_else(|| missing("radius"))?, center),
            DomainKind::Polygon => Domain::convex_polygon(d.vertices.clone().ok_or_else(|| missing("vertices"))?),
            DomainKind::Implicit => {
                let e = parse(d.expr.as_deref().ok_or_else(|| missing("expr"))?).map_err(|e| ConfigError(e.to_string()))?;
                let b = d.bbox.ok_or_else(|| missing("bbox"))?;
                BBox::new([b[0], b[1]], [b[2], b[3]]).map(|bb| Domain::implicit(e, bb))
            }
            DomainKind::Segment => {
                let h = 2.0 / (self.grid.nx - 1) as f64;
                Domain::rectangle_at(2.0 + h, h, [0.0, 0.0])
            }
        };
        r.map_err(|e| ConfigError(e.to_string()))
    }

    pub fn objective(&self) -> Result<(Expr, Expr), ConfigError> {
        Ok((expr(&self.objective.p)?, expr(&self.objective.q)?))
    }

    pub fn constraints(&self) -> Result<Vec<(Expr, Sense)>, ConfigError> {
        self.constraints
            .iter()
            .map(|c| {
                let s = match c.sense {
                    ConstraintSense::Le => Sense::Le,
                    ConstraintSense::Eq => Sense::Eq,
                };
                Ok((expr(&c.expr)?, s))
            })
            .collect()
    }
}

pub fn expr(s: &str) -> Result<Expr, ConfigError> {
    parse(s).map_err(|e| ConfigError(format!("in `{s}`: {e}")))
}
