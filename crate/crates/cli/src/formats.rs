//! JSON problem and world files.
//!
//! A problem file describes either one spline (`k` and `pins`) or several
//! splines sharing a knot schedule (`dimensions`). The schedule is given as
//! knot `times` or as `initial_deltas` (half-durations) with an optional
//! `start`. Variable-time runs additionally read `mode`, `total_time`,
//! `kappa` and a few optimizer settings.
//!
//! ```json
//! {
//!   "k": 2,
//!   "times": [-1.0, 1.0],
//!   "pins": [
//!     {"knot": 0, "deriv": 0, "value": 0.0},
//!     {"knot": 0, "deriv": 1, "value": 1.0},
//!     {"knot": 1, "deriv": 0, "value": 1.0},
//!     {"knot": 1, "deriv": 1, "value": 0.0}
//!   ]
//! }
//! ```
//!
//! Unknown fields are rejected everywhere.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use splinetraj::rrt::{PlannerConfig, Point, Rect, Workspace};
use splinetraj::{Dimension, FixedTimeProblem, Mode, OptimizerConfig, Pin, PinSet, TimeAllocation};

use crate::error::{CliError, CliResult};

/// Name given to the spline of a single-dimension problem file.
pub const DEFAULT_DIMENSION: &str = "x";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinSpec {
    pub knot: usize,
    pub deriv: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionSpec {
    pub name: String,
    pub k: usize,
    pub pins: Vec<PinSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    FixedTotal,
    TimePenalty,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pins: Option<Vec<PinSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<Vec<DimensionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// Parses JSON, reporting syntax and schema errors with their byte offset.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        let kind = match e.classify() {
            serde_json::error::Category::Data => "invalid",
            _ => "malformed JSON in",
        };
        let offset = byte_offset(text, e.line(), e.column());
        CliError::input(format!(
            "{kind} {what} at byte offset {offset} (line {}, column {}): {e}",
            e.line(),
            e.column()
        ))
    })
}

/// Converts serde_json's 1-based line and byte column into a 0-based offset.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

pub fn read_text(path: &std::path::Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))
}

fn pin_set(pins: &[PinSpec]) -> PinSet<f64> {
    pins.iter()
        .map(|p| Pin::new(p.knot, p.deriv, p.value))
        .collect()
}

impl ProblemFile {
    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        parse_json(&read_text(path)?, "problem file")
    }

    /// Single-spline file of a fixed-time problem.
    pub fn from_fixed_problem(problem: &FixedTimeProblem<f64>) -> Self {
        Self {
            k: Some(problem.k),
            times: Some(problem.times.times().to_vec()),
            pins: Some(
                problem
                    .pins
                    .iter()
                    .map(|p| PinSpec {
                        knot: p.knot,
                        deriv: p.deriv,
                        value: p.value,
                    })
                    .collect(),
            ),
            ..Self::default()
        }
    }

    /// The splines described by the file, in file order.
    pub fn dimensions(&self) -> CliResult<Vec<Dimension<f64>>> {
        match (&self.k, &self.dimensions) {
            (Some(k), None) => {
                let pins = self
                    .pins
                    .as_ref()
                    .ok_or_else(|| CliError::input("`k` requires a `pins` list"))?;
                let name = self
                    .name
                    .clone()
                    .unwrap_or_else(|| DEFAULT_DIMENSION.to_string());
                Ok(vec![Dimension::new(name, *k, pin_set(pins))])
            }
            (None, Some(dims)) => {
                if self.pins.is_some() || self.name.is_some() {
                    return Err(CliError::input(
                        "`pins` and `name` belong inside each entry of `dimensions`",
                    ));
                }
                if dims.is_empty() {
                    return Err(CliError::input("`dimensions` must not be empty"));
                }
                Ok(dims
                    .iter()
                    .map(|d| Dimension::new(d.name.clone(), d.k, pin_set(&d.pins)))
                    .collect())
            }
            (Some(_), Some(_)) => Err(CliError::input("give either `k` or `dimensions`, not both")),
            (None, None) => Err(CliError::input("missing `k` or `dimensions`")),
        }
    }

    /// Knot schedule from `times`, or from `initial_deltas` and `start`.
    pub fn time_allocation(&self) -> CliResult<TimeAllocation<f64>> {
        match (&self.times, &self.initial_deltas) {
            (Some(times), None) => {
                if self.start.is_some() {
                    return Err(CliError::input("`start` only applies to `initial_deltas`"));
                }
                Ok(TimeAllocation::from_times(times)?)
            }
            (None, Some(deltas)) => Ok(TimeAllocation::from_durations(
                self.start.unwrap_or(0.0),
                deltas.clone(),
            )?),
            (Some(_), Some(_)) => Err(CliError::input(
                "give either `times` or `initial_deltas`, not both",
            )),
            (None, None) => Err(CliError::input("missing `times` or `initial_deltas`")),
        }
    }

    /// Time-allocation settings. Penalty mode is the default when `kappa` is
    /// given; fixed-total mode without `total_time` keeps the initial total.
    pub fn optimizer_config(&self) -> CliResult<OptimizerConfig<f64>> {
        let mode = match self.mode {
            Some(ModeSpec::FixedTotal) => Mode::FixedTotalTime,
            Some(ModeSpec::TimePenalty) => Mode::TimePenalty,
            None if self.kappa.is_some() => Mode::TimePenalty,
            None => Mode::FixedTotalTime,
        };
        let mut config = match mode {
            Mode::FixedTotalTime => {
                if self.kappa.is_some() {
                    return Err(CliError::input("`kappa` only applies to time_penalty mode"));
                }
                OptimizerConfig {
                    total_time: self.total_time,
                    ..OptimizerConfig::default()
                }
            }
            Mode::TimePenalty => {
                if self.total_time.is_some() {
                    return Err(CliError::input(
                        "`total_time` only applies to fixed_total mode",
                    ));
                }
                let kappa = self
                    .kappa
                    .ok_or_else(|| CliError::input("time_penalty mode requires `kappa`"))?;
                if !(kappa > 0.0 && kappa.is_finite()) {
                    return Err(CliError::input("`kappa` must be positive"));
                }
                OptimizerConfig::time_penalty(kappa)
            }
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(max_iters) = self.max_iters {
            config.max_iters = max_iters;
        }
        if let Some(tol) = self.tol {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(CliError::input("`tol` must be non-negative"));
            }
            config.tol = Some(tol);
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub min: Point,
    pub max: Point,
}

impl BoxSpec {
    fn rect(&self) -> CliResult<Rect> {
        Ok(Rect::new(self.min, self.max)?)
    }
}

/// Planner settings of a world file; omitted fields keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    /// Descent iterations per subproblem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer_max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldFile {
    /// `[[xmin, xmax], [ymin, ymax]]`.
    pub bounds: [[f64; 2]; 2],
    #[serde(default)]
    pub obstacles: Vec<BoxSpec>,
    pub start: Point,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<BoxSpec>,
    #[serde(default)]
    pub config: PlannerSpec,
}

impl WorldFile {
    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        parse_json(text, "world file")
    }

    pub fn workspace(&self) -> CliResult<Workspace> {
        let [[x0, x1], [y0, y1]] = self.bounds;
        let bounds = Rect::new([x0, y0], [x1, y1])?;
        let obstacles = self
            .obstacles
            .iter()
            .map(BoxSpec::rect)
            .collect::<CliResult<_>>()?;
        Ok(Workspace::new(bounds, obstacles)?)
    }

    pub fn planner_config(&self) -> CliResult<PlannerConfig> {
        let spec = &self.config;
        let mut config = PlannerConfig::default();
        config.near_radius = spec.near_radius.or(config.near_radius);
        config.max_iters = spec.max_iters.unwrap_or(config.max_iters);
        config.collision_dt = spec.collision_dt.or(config.collision_dt);
        config.seed = spec.seed.unwrap_or(config.seed);
        config.speed = spec.speed.unwrap_or(config.speed);
        if let Some(n) = spec.optimizer_max_iters {
            config.optimizer.max_iters = n;
        }
        if let Some(tol) = spec.optimizer_tol {
            config.optimizer.tol = Some(tol);
        }
        config.goal = self.goal.as_ref().map(BoxSpec::rect).transpose()?;
        config.validate()?;
        Ok(config)
    }
}

/// The cluttered arena shipped with the tool.
pub const SHIPPED_ARENA: &str = include_str!("../worlds/arena.json");

pub fn shipped_arena() -> WorldFile {
    WorldFile::parse(SHIPPED_ARENA).expect("shipped arena is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_error_reports_offset_of_the_bad_byte() {
        let text = "{\n  \"k\": 2,\n  \"pins\": [}\n";
        let err = parse_json::<ProblemFile>(text, "problem file").unwrap_err();
        let msg = err.to_string();
        let offset = text.find('}').unwrap();
        assert!(msg.contains(&format!("byte offset {offset}")), "{msg}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = parse_json::<ProblemFile>(r#"{"k": 2, "pins": [], "colour": 1}"#, "problem file")
            .unwrap_err();
        assert!(err.to_string().contains("colour"));
        let err = parse_json::<WorldFile>(
            r#"{"bounds": [[0,1],[0,1]], "start": [0.5,0.5], "config": {"radius": 1}}"#,
            "world file",
        )
        .unwrap_err();
        assert!(err.to_string().contains("radius"));
    }

    #[test]
    fn single_dimension_defaults() {
        let file: ProblemFile = parse_json(
            r#"{"k": 3, "initial_deltas": [1, 2], "start": 5, "pins": [{"knot": 0, "deriv": 0, "value": 1}]}"#,
            "problem file",
        )
        .unwrap();
        let dims = file.dimensions().unwrap();
        assert_eq!(dims[0].name, DEFAULT_DIMENSION);
        assert_eq!(file.time_allocation().unwrap().times(), &[5.0, 7.0, 11.0]);
        let cfg = file.optimizer_config().unwrap();
        assert_eq!(cfg.mode, Mode::FixedTotalTime);
    }

    #[test]
    fn conflicting_fields_are_input_errors() {
        for text in [
            r#"{"k": 2, "pins": [], "dimensions": [], "times": [0, 1]}"#,
            r#"{"k": 2, "pins": [], "times": [0, 1], "initial_deltas": [1]}"#,
            r#"{"k": 2, "pins": [], "times": [0, 1], "kappa": 1, "total_time": 3}"#,
            r#"{"k": 2, "pins": [], "times": [1, 0]}"#,
        ] {
            let file: ProblemFile = parse_json(text, "problem file").unwrap();
            let err = file
                .dimensions()
                .and_then(|_| file.time_allocation())
                .and_then(|_| file.optimizer_config())
                .unwrap_err();
            assert_eq!(err.exit_code(), 1, "{text}: {err}");
        }
    }

    #[test]
    fn shipped_arena_is_consistent() {
        let world = shipped_arena();
        let ws = world.workspace().unwrap();
        let cfg = world.planner_config().unwrap();
        assert!(ws.is_free(world.start));
        let goal = cfg.goal.unwrap();
        assert!(ws.bounds.contains_rect(&goal));
    }

    #[test]
    fn fixed_problem_round_trips() {
        let problem = FixedTimeProblem::new(
            2,
            TimeAllocation::from_times(&[0.0, 1.0, 3.0]).unwrap(),
            PinSet::new().pin(0, 0, 1.0).pin(2, 0, -1.0).pin(1, 0, 0.25),
        )
        .unwrap();
        let file = ProblemFile::from_fixed_problem(&problem);
        let text = serde_json::to_string(&file).unwrap();
        let back: ProblemFile = parse_json(&text, "problem file").unwrap();
        assert_eq!(back, file);
        assert_eq!(back.time_allocation().unwrap(), problem.times);
    }
}
