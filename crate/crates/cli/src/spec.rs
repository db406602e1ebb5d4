//! Experiment files: `{kind, seed, grid, mc, inputs, output}`.
//!
//! Parsing is strict: unknown keys, missing seeds and inputs that do not fit
//! the grid are all schema errors, reported before anything runs.

use std::path::{Path, PathBuf};

use levysym::levy::{LevyTriple, TripleSpec};
use levysym::mc::McParams;
use levysym::trap_continuum::{PathShift, TrapSchedule, TrapSlice};
use levysym::{Grid, GridField};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Selftest,
    RiVerify,
    BllVerify,
    TrapVerify,
    Sausage,
    Capacity,
    CapVerify,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Selftest => "selftest",
            Kind::RiVerify => "ri-verify",
            Kind::BllVerify => "bll-verify",
            Kind::TrapVerify => "trap-verify",
            Kind::Sausage => "sausage",
            Kind::Capacity => "capacity",
            Kind::CapVerify => "cap-verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub d: usize,
    pub half_width: f64,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub paths: usize,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// File stem of the report; `.json` and `.csv` are appended.
    pub stem: String,
}

/// The file as written, before inputs are checked against the kind.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: Kind,
    seed: u64,
    #[serde(default)]
    grid: Option<GridSpec>,
    #[serde(default)]
    mc: Option<McSpec>,
    #[serde(default)]
    inputs: Option<Value>,
    #[serde(default)]
    output: Option<OutputSpec>,
}

/// A field on the experiment grid. `background` is the value outside the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant {
        value: f64,
        #[serde(default)]
        background: f64,
    },
    /// Indicator of the open box `(lo, hi)`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Indicator of the open ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// `height * exp(-|x - center|^2 / width^2)`.
    Gaussian { center: Vec<f64>, width: f64, height: f64 },
    /// `level - of`, with background `level - background(of)`.
    Complement { level: f64, of: Box<FieldSpec> },
    /// A field file in the `GridField` JSON layout, relative to the spec file.
    File { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soft: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hard: Option<FieldSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    /// `0 = s_0 < ... < s_J`, one more than the slices.
    pub times: Vec<f64>,
    pub slices: Vec<SliceSpec>,
}

fn default_instances() -> usize {
    1
}

fn default_tol_factor() -> f64 {
    levysym::trap_discrete::DEFAULT_TOL_FACTOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomInputs {
    /// Instances drawn with seeds `seed, seed + 1, ...`.
    #[serde(default = "default_instances")]
    pub instances: usize,
    /// Number of kernel steps `n`.
    pub steps: usize,
    #[serde(default = "default_tol_factor")]
    pub tol_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapInputs {
    pub triple: TripleSpec,
    pub schedule: ScheduleSpec,
    pub phi: FieldSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SausageInputs {
    pub triple: TripleSpec,
    pub set: FieldSpec,
    #[serde(default = "zero_shift")]
    pub shift: PathShift,
    pub horizon: f64,
}

fn zero_shift() -> PathShift {
    PathShift::Zero
}

/// Golden value check: within `rel` relative error and `z` standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub value: f64,
    pub rel: f64,
    #[serde(default = "default_z")]
    pub z: f64,
}

fn default_z() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityInputs {
    pub triple: TripleSpec,
    pub set: FieldSpec,
    /// Absent for the 0-capacity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapVerifyInputs {
    pub triple: TripleSpec,
    pub set: FieldSpec,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestInputs {}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Inputs {
    Selftest(SelftestInputs),
    Random(RandomInputs),
    Trap(TrapInputs),
    Sausage(SausageInputs),
    Capacity(CapacityInputs),
    CapVerify(CapVerifyInputs),
}

/// A validated experiment with every default filled in; this is what reports embed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSpec>,
    pub inputs: Inputs,
    pub output: OutputSpec,
    /// Directory that relative field paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Anything wrong with the spec itself; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid experiment spec: {}", self.0)
    }
}

impl std::error::Error for SchemaError {}

impl From<levysym::Error> for SchemaError {
    fn from(e: levysym::Error) -> Self {
        SchemaError(e.to_string())
    }
}

fn schema<T>(r: Result<T, serde_json::Error>) -> Result<T, SchemaError> {
    r.map_err(|e| SchemaError(e.to_string()))
}

fn inputs_as<T: for<'de> Deserialize<'de>>(v: Option<Value>) -> Result<T, SchemaError> {
    let v = v.ok_or_else(|| SchemaError("missing inputs".into()))?;
    schema(serde_json::from_value(v))
}

impl ExperimentSpec {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, SchemaError> {
        let value: Value = schema(serde_json::from_str(text))?;
        Self::from_value(value, base_dir)
    }

    pub fn from_value(value: Value, base_dir: &Path) -> Result<Self, SchemaError> {
        let raw: RawSpec = schema(serde_json::from_value(value))?;
        let inputs = match raw.kind {
            Kind::Selftest => Inputs::Selftest(match raw.inputs {
                None => SelftestInputs {},
                v => inputs_as(v)?,
            }),
            Kind::RiVerify | Kind::BllVerify => Inputs::Random(inputs_as(raw.inputs)?),
            Kind::TrapVerify => Inputs::Trap(inputs_as(raw.inputs)?),
            Kind::Sausage => Inputs::Sausage(inputs_as(raw.inputs)?),
            Kind::Capacity => Inputs::Capacity(inputs_as(raw.inputs)?),
            Kind::CapVerify => Inputs::CapVerify(inputs_as(raw.inputs)?),
        };
        let needs_grid = raw.kind != Kind::Selftest;
        let needs_mc = !matches!(raw.kind, Kind::Selftest | Kind::RiVerify | Kind::BllVerify);
        if needs_grid && raw.grid.is_none() {
            return Err(SchemaError(format!("{} needs a grid", raw.kind.name())));
        }
        if needs_mc && raw.mc.is_none() {
            return Err(SchemaError(format!("{} needs mc parameters", raw.kind.name())));
        }
        let output = raw.output.unwrap_or_else(|| OutputSpec { stem: raw.kind.name().to_string() });
        if output.stem.is_empty() || output.stem.contains(['/', '\\']) {
            return Err(SchemaError(format!("output stem {:?} must be a plain file name", output.stem)));
        }
        let spec = Self {
            kind: raw.kind,
            seed: raw.seed,
            grid: if needs_grid { raw.grid } else { None },
            mc: if needs_mc { raw.mc } else { None },
            inputs,
            output,
            base_dir: base_dir.to_path_buf(),
        };
        spec.check()?;
        Ok(spec)
    }

    /// Builds every input once so that bad values surface before any work is done.
    fn check(&self) -> Result<(), SchemaError> {
        if let Some(mc) = &self.mc {
            self.mc_params(1)?.validate()?;
            if mc.paths < 2 {
                return Err(SchemaError("mc.paths must be at least 2".into()));
            }
        }
        match &self.inputs {
            Inputs::Selftest(_) => {}
            Inputs::Random(r) => {
                if r.instances == 0 {
                    return Err(SchemaError("instances must be positive".into()));
                }
                if !(r.tol_factor >= 0.0) {
                    return Err(SchemaError("tol_factor must be nonnegative".into()));
                }
                if self.kind == Kind::BllVerify && r.steps == 0 {
                    return Err(SchemaError("bll-verify needs at least one step".into()));
                }
                self.grid()?;
            }
            Inputs::Trap(t) => {
                self.triple(&t.triple)?;
                self.schedule(&t.schedule)?;
                self.field(&t.phi)?;
            }
            Inputs::Sausage(s) => {
                self.triple(&s.triple)?;
                self.set(&s.set)?;
                if !(s.horizon > 0.0 && s.horizon.is_finite()) {
                    return Err(SchemaError("horizon must be positive".into()));
                }
            }
            Inputs::Capacity(c) => {
                self.triple(&c.triple)?;
                self.set(&c.set)?;
                if let Some(q) = c.q {
                    positive_q(q)?;
                    if c.ladder.is_some() || c.horizon.is_some() {
                        return Err(SchemaError("ladder and horizon only apply to the 0-capacity (no q)".into()));
                    }
                }
                for &q in c.ladder.iter().flatten() {
                    positive_q(q)?;
                }
                if matches!(&c.ladder, Some(l) if l.len() < 2) {
                    return Err(SchemaError("ladder needs at least two values of q".into()));
                }
                if let Some(e) = &c.expected {
                    if !(e.rel >= 0.0 && e.z >= 0.0) {
                        return Err(SchemaError("expected.rel and expected.z must be nonnegative".into()));
                    }
                }
            }
            Inputs::CapVerify(c) => {
                self.triple(&c.triple)?;
                self.set(&c.set)?;
                positive_q(c.q)?;
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, SchemaError> {
        let g = self.grid.ok_or_else(|| SchemaError("missing grid".into()))?;
        Ok(Grid::new(g.d, g.half_width, g.m)?)
    }

    pub fn mc_params(&self, workers: usize) -> Result<McParams, SchemaError> {
        let mc = self.mc.as_ref().ok_or_else(|| SchemaError("missing mc parameters".into()))?;
        let mut p = McParams::new(mc.paths, mc.steps, self.seed).with_workers(workers);
        if let Some(n) = mc.truncation {
            p = p.with_truncation(n);
        }
        if let Some(e) = mc.eps {
            p = p.with_eps(e);
        }
        Ok(p)
    }

    pub fn triple(&self, t: &TripleSpec) -> Result<LevyTriple, SchemaError> {
        let triple = t.resolve(|path| self.load(path).map_err(|e| levysym::Error::Format(e.0)))?;
        let d = self.grid()?.dim();
        if triple.dim() != d {
            return Err(SchemaError(format!("triple has dimension {}, grid has {d}", triple.dim())));
        }
        Ok(triple)
    }

    pub fn set(&self, f: &FieldSpec) -> Result<GridField<f64>, SchemaError> {
        let field = self.field(f)?;
        if !field.is_indicator() {
            return Err(SchemaError("sets must be 0/1 indicators".into()));
        }
        Ok(field)
    }

    pub fn schedule(&self, s: &ScheduleSpec) -> Result<TrapSchedule, SchemaError> {
        let g = self.grid()?;
        let slices = s
            .slices
            .iter()
            .map(|slice| {
                let soft = slice.soft.as_ref().map(|f| self.field(f)).transpose()?.unwrap_or_else(|| GridField::zeros(g));
                let hard = slice.hard.as_ref().map(|f| self.set(f)).transpose()?.unwrap_or_else(|| GridField::zeros(g));
                Ok(TrapSlice { soft, hard })
            })
            .collect::<Result<Vec<_>, SchemaError>>()?;
        Ok(TrapSchedule::new(s.times.clone(), slices)?)
    }

    pub fn field(&self, f: &FieldSpec) -> Result<GridField<f64>, SchemaError> {
        let g = self.grid()?;
        let d = g.dim();
        let point = |p: &[f64], what: &str| {
            if p.len() == d {
                Ok(())
            } else {
                Err(SchemaError(format!("{what} has {} coordinates, grid has {d}", p.len())))
            }
        };
        let field = match f {
            FieldSpec::Constant { value, background } => GridField::constant(g, *value, *background)?,
            FieldSpec::Box { lo, hi } => {
                point(lo, "box lo")?;
                point(hi, "box hi")?;
                GridField::indicator(g, |x| (0..d).all(|a| x[a] > lo[a] && x[a] < hi[a]))
            }
            FieldSpec::Ball { center, radius } => {
                point(center, "ball center")?;
                GridField::indicator(g, |x| (0..d).map(|a| (x[a] - center[a]).powi(2)).sum::<f64>() < radius * radius)
            }
            FieldSpec::Gaussian { center, width, height } => {
                point(center, "gaussian center")?;
                if !(*width > 0.0) {
                    return Err(SchemaError("gaussian width must be positive".into()));
                }
                GridField::from_fn(g, 0.0, |x| {
                    height * (-(0..d).map(|a| ((x[a] - center[a]) / width).powi(2)).sum::<f64>()).exp()
                })?
            }
            FieldSpec::Complement { level, of } => self.field(of)?.complement_to(*level)?,
            FieldSpec::File { path } => {
                let field = self.load(path)?;
                if field.grid() != &g {
                    return Err(SchemaError(format!("field {path} is not on the experiment grid")));
                }
                field
            }
        };
        Ok(field)
    }

    fn load(&self, path: &str) -> Result<GridField<f64>, SchemaError> {
        let full = self.base_dir.join(path);
        let text = std::fs::read_to_string(&full).map_err(|e| SchemaError(format!("{}: {e}", full.display())))?;
        Ok(GridField::from_json(&text)?)
    }
}

fn positive_q(q: f64) -> Result<(), SchemaError> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(SchemaError(format!("q must be positive, got {q}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentSpec, SchemaError> {
        ExperimentSpec::from_json(text, Path::new("."))
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(parse(r#"{"kind": "selftest"}"#).is_err());
        assert!(parse(r#"{"kind": "selftest", "seed": 1}"#).is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse(r#"{"kind": "selftest", "seed": 1, "extra": 0}"#).is_err());
        let text = r#"{"kind": "ri-verify", "seed": 1, "grid": {"d": 1, "half_width": 4, "m": 32},
            "inputs": {"steps": 1, "instances": 3, "colour": "red"}}"#;
        assert!(parse(text).is_err());
    }

    #[test]
    fn fields_must_match_the_grid() {
        let text = r#"{"kind": "cap-verify", "seed": 1, "grid": {"d": 1, "half_width": 3, "m": 60},
            "mc": {"paths": 10, "steps": 10},
            "inputs": {"triple": {"b": [0], "A": [[1]]}, "set": {"shape": "ball", "center": [0, 0], "radius": 1}, "q": 1}}"#;
        assert!(parse(text).unwrap_err().0.contains("coordinates"));
    }

    #[test]
    fn defaults_are_filled_in() {
        let text = r#"{"kind": "ri-verify", "seed": 5, "grid": {"d": 1, "half_width": 4, "m": 32}, "inputs": {"steps": 2}}"#;
        let spec = parse(text).unwrap();
        let json = serde_json::to_value(&spec).unwrap();
        assert_eq!(json["inputs"]["instances"], 1);
        assert_eq!(json["output"]["stem"], "ri-verify");
        assert!(json.get("mc").is_none());
    }
}
