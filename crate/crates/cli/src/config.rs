//! Job configuration: a TOML document, optionally patched by command-line
//! overrides, validated in full before anything is computed.
//!
//! ```toml
//! command = "criterion"   # render | criterion | levin | verify | address | centers
//! precision = "auto"      # or a bit count
//! horizon = 6
//! output = "out"          # directory for the report and images
//!
//! [model]
//! c = 2                   # number or string: "3.2", "7/2", "2pi"
//! generator = { kind = "tower", q0 = 3, p = 1 }
//! # or: fractions = ["1/28", "1/39670"]
//! ```
//!
//! The per-command tables `[render]`, `[criterion]`, `[levin]`, `[verify]`
//! and `[address]` are described in the README.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use satmodel::model::{Constant, GrowthRule, ModelError, ModelParams, RotationNumber};
use satmodel::raster::Window;
use satmodel::Model;

pub const MIN_PRECISION: u32 = 32;
pub const MAX_PRECISION: u32 = 65536;
const MAX_PIXELS_PER_SIDE: usize = 65536;

/// One violated constraint, keyed by the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError { field: field.to_string(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl ConfigErrors {
    pub fn messages(&self) -> Vec<String> {
        self.0.iter().map(ToString::to_string).collect()
    }
}

/// A number written either as a TOML number or as text.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    /// Exact rational value. Floats go through their shortest decimal form,
    /// so `3.2` means 16/5.
    fn rational(&self) -> Option<Rational> {
        match self {
            Scalar::Int(i) => Some(Rational::from(*i)),
            Scalar::Float(f) if f.is_finite() => decimal(&format!("{f}")),
            Scalar::Float(_) => None,
            Scalar::Text(s) => decimal(s),
        }
    }

    fn constant(&self) -> Option<Constant> {
        match self {
            Scalar::Text(s) => Constant::from_str(s).ok(),
            other => other.rational().map(Constant::rational),
        }
    }

    fn f64(&self) -> Option<f64> {
        match self {
            Scalar::Int(i) => Some(*i as f64),
            Scalar::Float(f) => Some(*f),
            Scalar::Text(s) => s.trim().parse().ok(),
        }
    }
}

fn decimal(s: &str) -> Option<Rational> {
    Constant::from_str(s).ok().filter(|c| !c.has_pi()).map(|c| c.coeff().clone())
}

/// An exact rational that prints as a decimal when it terminates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exact(pub Rational);

impl Exact {
    pub fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.0)
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Constant::rational(self.0.clone()).fmt(f)
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<String>,
    precision: Option<Scalar>,
    horizon: Option<i64>,
    output: Option<String>,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    render: RawRender,
    #[serde(default)]
    criterion: RawCriterion,
    #[serde(default)]
    levin: RawLevin,
    #[serde(default)]
    verify: RawVerify,
    #[serde(default)]
    address: RawAddress,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    c: Option<Scalar>,
    fractions: Option<Vec<String>>,
    generator: Option<RawGenerator>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    kind: Option<String>,
    q0: Option<i64>,
    p: Option<i64>,
    base: Option<i64>,
    a: Option<i64>,
    b: Option<i64>,
    ratio: Option<i64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRender {
    x: Option<Vec<Scalar>>,
    y: Option<Vec<Scalar>>,
    width: Option<i64>,
    height: Option<i64>,
    image: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCriterion {
    candidate: Option<String>,
    delta: Option<Scalar>,
    alpha: Option<Scalar>,
    beta: Option<Scalar>,
    x: Option<Scalar>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevin {
    start: Option<i64>,
    end: Option<i64>,
    delta: Option<Scalar>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    alpha: Option<Scalar>,
    beta: Option<Scalar>,
    c_prime: Option<Scalar>,
    samples: Option<i64>,
    seed: Option<i64>,
    arg_q: Option<i64>,
    disk_t_samples: Option<i64>,
    disk_points: Option<i64>,
    disk_tolerance: Option<Scalar>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAddress {
    points: Option<Vec<Vec<Scalar>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Render,
    Criterion,
    Levin,
    Verify,
    Address,
    Centers,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "render" => Command::Render,
            "criterion" => Command::Criterion,
            "levin" => Command::Levin,
            "verify" => Command::Verify,
            "address" => Command::Address,
            "centers" => Command::Centers,
            _ => return Err(format!("unknown command {s:?}; expected render, criterion, levin, verify, address or centers")),
        })
    }
}

/// Working precision as configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecisionSpec {
    Auto,
    Bits(u32),
}

impl Serialize for PrecisionSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PrecisionSpec::Auto => s.serialize_str("auto"),
            PrecisionSpec::Bits(b) => s.serialize_u32(*b),
        }
    }
}

/// How the criterion candidate `x` is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum CandidateSpec {
    Center { delta: Exact },
    Theorem { alpha: Exact, beta: Exact },
    Fixed { x: Exact },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderSpec {
    pub window: Window,
    pub image: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevinSpec {
    pub start: usize,
    pub end: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySpec {
    pub alpha: Exact,
    pub beta: Exact,
    pub c_prime: Constant,
    pub samples: usize,
    pub seed: u64,
    pub arg_q: u64,
    pub disk_t_samples: usize,
    pub disk_points: usize,
    pub disk_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AddressSpec {
    pub points: Vec<(Exact, Exact)>,
}

/// Settings specific to the command.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Render(RenderSpec),
    Criterion(CandidateSpec),
    Levin(LevinSpec),
    Verify(VerifySpec),
    Address(AddressSpec),
    Centers,
}

/// A validated job.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobConfig {
    pub command: Command,
    pub model: ModelParams,
    pub precision: PrecisionSpec,
    /// Bits actually used, with `auto` resolved.
    pub resolved_precision: u32,
    pub horizon: usize,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub task: Task,
}

/// Command-line replacements applied to the document before validation.
/// Keys are dotted paths such as `render.width`.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    entries: Vec<(String, toml::Value)>,
}

impl Overrides {
    pub fn set(&mut self, path: &str, value: impl Into<toml::Value>) {
        self.entries.push((path.to_string(), value.into()));
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn apply(&self, table: &mut toml::Table) -> Result<(), ConfigError> {
        for (path, value) in &self.entries {
            // An explicit sequence on the command line replaces the other form.
            let replaced = match path.as_str() {
                "model.fractions" => Some("generator"),
                p if p.starts_with("model.generator.") => Some("fractions"),
                _ => None,
            };
            if let Some(key) = replaced {
                if let Some(model) = table.get_mut("model").and_then(|m| m.as_table_mut()) {
                    model.remove(key);
                }
            }
            let keys: Vec<&str> = path.split('.').collect();
            let (last, parents) = keys.split_last().expect("non-empty path");
            let mut node = &mut *table;
            for key in parents {
                let entry = node.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
                node = entry.as_table_mut().ok_or_else(|| ConfigError::new(path, format!("{key} is not a table")))?;
            }
            node.insert(last.to_string(), value.clone());
        }
        Ok(())
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<JobConfig, ConfigErrors> {
    load(text, &Overrides::default())
}

/// Parses a document, applies overrides, then validates everything.
pub fn load(text: &str, overrides: &Overrides) -> Result<JobConfig, ConfigErrors> {
    let mut table: toml::Table =
        text.parse().map_err(|e: toml::de::Error| ConfigErrors(vec![ConfigError::new("document", e.message())]))?;
    overrides.apply(&mut table).map_err(|e| ConfigErrors(vec![e]))?;
    let raw: RawConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e| ConfigErrors(vec![ConfigError::new("document", e.message())]))?;
    Validator::default().run(raw)
}

#[derive(Default)]
struct Validator {
    errors: Vec<ConfigError>,
}

impl Validator {
    fn fail(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(ConfigError::new(field, message));
    }

    fn count(&mut self, field: &str, value: Option<i64>, default: Option<u64>, min: u64, max: u64) -> Option<u64> {
        match value {
            None => {
                if default.is_none() {
                    self.fail(field, "is required");
                }
                default
            }
            Some(v) if v >= 0 && (min..=max).contains(&(v as u64)) => Some(v as u64),
            Some(v) => {
                self.fail(field, format!("must lie in [{min}, {max}] (got {v})"));
                None
            }
        }
    }

    /// A rational strictly inside `(lo, hi)`.
    fn open_interval(&mut self, field: &str, value: Option<&Scalar>, default: &str, lo: i64, hi: i64) -> Option<Exact> {
        let r = match value {
            None => decimal(default).expect("valid default"),
            Some(s) => match s.rational() {
                Some(r) => r,
                None => {
                    self.fail(field, format!("{s:?} is not a number"));
                    return None;
                }
            },
        };
        if r > lo && r < hi {
            Some(Exact(r))
        } else {
            self.fail(field, format!("{} not in ({lo},{hi})", Exact(r)));
            None
        }
    }

    fn run(mut self, raw: RawConfig) -> Result<JobConfig, ConfigErrors> {
        let command = match raw.command.as_deref() {
            None => {
                self.fail("command", "is required");
                None
            }
            Some(s) => s.parse::<Command>().map_err(|e| self.fail("command", e)).ok(),
        };
        let horizon = self.count("horizon", raw.horizon, None, 0, 1 << 20).map(|h| h as usize);
        if let (Some(h), Some(cmd)) = (horizon, command) {
            if h == 0 && matches!(cmd, Command::Criterion | Command::Centers | Command::Verify) {
                self.fail("horizon", "must be at least 1 for this command");
            }
            if cmd == Command::Render && h >= u16::MAX as usize {
                self.fail("horizon", format!("render depth must stay below {}", u16::MAX));
            }
        }
        let params = self.model(&raw.model);
        if let (Some(params), Some(h)) = (&params, horizon) {
            self.sequence(params, h);
        }

        let precision = match &raw.precision {
            None => Some(PrecisionSpec::Auto),
            Some(Scalar::Text(s)) if s == "auto" => Some(PrecisionSpec::Auto),
            Some(Scalar::Int(b)) if (MIN_PRECISION as i64..=MAX_PRECISION as i64).contains(b) => {
                Some(PrecisionSpec::Bits(*b as u32))
            }
            Some(other) => {
                self.fail(
                    "precision",
                    format!("expected \"auto\" or an integer in [{MIN_PRECISION}, {MAX_PRECISION}] (got {other:?})"),
                );
                None
            }
        };

        let task = match (command, &params) {
            (Some(cmd), Some(params)) => self.task(cmd, &raw, params, horizon),
            _ => None,
        };

        if !self.errors.is_empty() {
            return Err(ConfigErrors(self.errors));
        }
        let (command, params, horizon, precision, task) =
            (command.unwrap(), params.unwrap(), horizon.unwrap(), precision.unwrap(), task.unwrap());
        let resolved_precision = match precision {
            PrecisionSpec::Bits(b) => b,
            PrecisionSpec::Auto => {
                Model::auto_precision(&params, horizon).map_err(|e| ConfigErrors(vec![ConfigError::new("precision", e.to_string())]))?
            }
        };
        Ok(JobConfig {
            command,
            model: params,
            precision,
            resolved_precision,
            horizon,
            output: raw.output.map(PathBuf::from),
            task,
        })
    }

    fn model(&mut self, raw: &RawModel) -> Option<ModelParams> {
        let c = match &raw.c {
            None => {
                self.fail("model.c", "is required");
                None
            }
            Some(s) => match s.constant() {
                None => {
                    self.fail("model.c", format!("{s:?} is not a number or multiple of pi"));
                    None
                }
                Some(c) if !c.exceeds_one() => {
                    self.fail("model.c", format!("C must exceed 1 (got {c})"));
                    None
                }
                Some(c) => Some(c),
            },
        };
        let sequence = match (&raw.fractions, &raw.generator) {
            (Some(_), Some(_)) => {
                self.fail("model", "give either fractions or generator, not both");
                None
            }
            (None, None) => {
                self.fail("model", "needs fractions or a generator");
                None
            }
            (Some(fracs), None) => self.fractions(fracs).map(|f| (f, None)),
            (None, Some(gen)) => self.generator(gen).map(|(first, rule, p)| (vec![first], Some((rule, p)))),
        };
        let (c, (prefix, ext)) = (c?, sequence?);
        let ext = ext.map(|(rule, p)| satmodel::model::Extension { rule, p });
        ModelParams::new(c, prefix, ext).map_err(|e| self.fail("model", e.to_string())).ok()
    }

    fn fractions(&mut self, fracs: &[String]) -> Option<Vec<RotationNumber>> {
        if fracs.is_empty() {
            self.fail("model.fractions", "must not be empty");
            return None;
        }
        let mut out = Vec::with_capacity(fracs.len());
        let mut ok = true;
        for (i, f) in fracs.iter().enumerate() {
            match f.parse::<RotationNumber>() {
                Ok(r) => out.push(r),
                Err(e) => {
                    self.fail(&format!("model.fractions[{i}]"), e.to_string());
                    ok = false;
                }
            }
        }
        ok.then_some(out)
    }

    fn generator(&mut self, g: &RawGenerator) -> Option<(RotationNumber, GrowthRule, u64)> {
        let field = |name: &str| format!("model.generator.{name}");
        let kind = g.kind.as_deref();
        let allowed: &[&str] = match kind {
            Some("tower") => &["base"],
            Some("affine") => &["a", "b"],
            Some("geometric") => &["ratio"],
            Some(other) => {
                self.fail(&field("kind"), format!("unknown generator {other:?}; expected tower, affine or geometric"));
                return None;
            }
            None => {
                self.fail(&field("kind"), "is required");
                return None;
            }
        };
        for (name, set) in [("base", g.base), ("a", g.a), ("b", g.b), ("ratio", g.ratio)] {
            if set.is_some() && !allowed.contains(&name) {
                self.fail(&field(name), format!("does not apply to the {} generator", kind.unwrap()));
            }
        }
        let q0 = self.count(&field("q0"), g.q0, None, 2, u64::MAX >> 1);
        let p = self.count(&field("p"), g.p, Some(1), 1, u64::MAX >> 1);
        let rule = match kind.unwrap() {
            "tower" => self.count(&field("base"), g.base, Some(2), 2, u32::MAX as u64).map(|b| GrowthRule::Tower { base: b as u32 }),
            "affine" => {
                let a = self.count(&field("a"), g.a, Some(1), 1, u32::MAX as u64);
                let b = self.count(&field("b"), g.b, Some(1), 0, u32::MAX as u64);
                match (a, b) {
                    (Some(1), Some(0)) => {
                        self.fail(&field("b"), "a = 1, b = 0 keeps q constant");
                        None
                    }
                    (Some(a), Some(b)) => Some(GrowthRule::Affine { a, b }),
                    _ => None,
                }
            }
            _ => self.count(&field("ratio"), g.ratio, Some(2), 2, u32::MAX as u64).map(|r| GrowthRule::Geometric { ratio: r }),
        };
        let (q0, p, rule) = (q0?, p?, rule?);
        match RotationNumber::new(p, q0) {
            Ok(first) => Some((first, rule, p)),
            Err(e) => {
                self.fail("model.generator", e.to_string());
                None
            }
        }
    }

    /// Enough rotation numbers for the horizon, each `t_n` inside `(0,1)`.
    fn sequence(&mut self, params: &ModelParams, horizon: usize) {
        let rotations = match params.rotations(horizon + 1) {
            Ok(r) => r,
            Err(ModelError::SequenceTooShort { needed, available }) => {
                self.fail(
                    "horizon",
                    format!("horizon {horizon} needs {needed} rotation numbers but only {available} are given"),
                );
                return;
            }
            Err(e) => {
                self.fail("model", e.to_string());
                return;
            }
        };
        for n in 0..rotations.len() {
            let single = ModelParams::new(params.constant().clone(), vec![rotations[n].clone()], None)
                .expect("constant already checked");
            if let Err(ModelError::TOutOfRange { t, .. }) = single.t_value(0, 64) {
                self.fail("model", format!("t_{n} = C*p_{n}/q_{n} = {t} not in (0,1)"));
            }
        }
    }

    fn task(&mut self, cmd: Command, raw: &RawConfig, params: &ModelParams, horizon: Option<usize>) -> Option<Task> {
        match cmd {
            Command::Render => self.render(&raw.render).map(Task::Render),
            Command::Criterion => self.candidate(&raw.criterion).map(Task::Criterion),
            Command::Levin => self.levin(&raw.levin, params, horizon?).map(Task::Levin),
            Command::Verify => self.verify(&raw.verify, params).map(Task::Verify),
            Command::Address => self.address(&raw.address).map(Task::Address),
            Command::Centers => Some(Task::Centers),
        }
    }

    fn range(&mut self, field: &str, v: &Option<Vec<Scalar>>, default: (f64, f64)) -> Option<(f64, f64)> {
        match v {
            None => Some(default),
            Some(v) => match v.iter().map(Scalar::f64).collect::<Option<Vec<f64>>>() {
                Some(v) if v.len() == 2 => Some((v[0], v[1])),
                _ => {
                    self.fail(field, "expected two numbers [min, max]");
                    None
                }
            },
        }
    }

    fn render(&mut self, r: &RawRender) -> Option<RenderSpec> {
        let x = self.range("render.x", &r.x, (-1.05, 1.05));
        let y = self.range("render.y", &r.y, (-1.05, 1.05));
        let max = MAX_PIXELS_PER_SIDE as u64;
        let width = self.count("render.width", r.width, Some(512), 1, max);
        let height = self.count("render.height", r.height, Some(512), 1, max);
        let image = r.image.clone().unwrap_or_else(|| "render.pgm".to_string());
        if image.is_empty() || image.contains(['/', '\\']) || image == "." || image == ".." {
            self.fail("render.image", format!("{image:?} must be a plain file name"));
        }
        let (x, y, width, height) = (x?, y?, width?, height?);
        match Window::new(x, y, width as usize, height as usize) {
            Ok(window) => Some(RenderSpec { window, image }),
            Err(e) => {
                self.fail("render", e.to_string());
                None
            }
        }
    }

    fn candidate(&mut self, c: &RawCriterion) -> Option<CandidateSpec> {
        let rule = c.candidate.as_deref().unwrap_or("center");
        let stray = |name: &str, set: bool, allowed: &[&str]| (set && !allowed.contains(&name)).then(|| name.to_string());
        let allowed: &[&str] = match rule {
            "center" => &["delta"],
            "theorem" => &["alpha", "beta"],
            "fixed" => &["x"],
            other => {
                self.fail("criterion.candidate", format!("unknown rule {other:?}; expected center, theorem or fixed"));
                return None;
            }
        };
        let sets = [("delta", c.delta.is_some()), ("alpha", c.alpha.is_some()), ("beta", c.beta.is_some()), ("x", c.x.is_some())];
        for name in sets.iter().filter_map(|(n, s)| stray(n, *s, allowed)) {
            self.fail(&format!("criterion.{name}"), format!("does not apply to the {rule} rule"));
        }
        match rule {
            "center" => self.open_interval("criterion.delta", c.delta.as_ref(), "0.5", 0, 1).map(|delta| CandidateSpec::Center { delta }),
            "theorem" => self.alpha_beta("criterion", c.alpha.as_ref(), c.beta.as_ref()).map(|(alpha, beta)| CandidateSpec::Theorem { alpha, beta }),
            _ => match &c.x {
                None => {
                    self.fail("criterion.x", "is required for the fixed rule");
                    None
                }
                Some(x) => self.open_interval("criterion.x", Some(x), "0.5", 0, 1).map(|x| CandidateSpec::Fixed { x }),
            },
        }
    }

    fn alpha_beta(&mut self, section: &str, alpha: Option<&Scalar>, beta: Option<&Scalar>) -> Option<(Exact, Exact)> {
        let a = self.open_interval(&format!("{section}.alpha"), alpha, "0.5", 0, 1)?;
        let b = match beta {
            None => decimal("1.5").unwrap(),
            Some(s) => match s.rational() {
                Some(r) => r,
                None => {
                    self.fail(&format!("{section}.beta"), format!("{s:?} is not a number"));
                    return None;
                }
            },
        };
        if b <= 1 || Rational::from(&a.0 * &b) >= 1 {
            self.fail(&format!("{section}.beta"), format!("need 1 < beta < 1/alpha (got alpha = {a}, beta = {})", Exact(b)));
            return None;
        }
        Some((a, Exact(b)))
    }

    fn levin(&mut self, l: &RawLevin, params: &ModelParams, horizon: usize) -> Option<LevinSpec> {
        let start = self.count("levin.start", l.start, Some(0), 0, 1 << 24)? as usize;
        let end = self.count("levin.end", l.end, Some(horizon as u64), 0, 1 << 24)? as usize;
        if start > end {
            self.fail("levin.end", format!("window [{start}, {end}] is empty"));
            return None;
        }
        let delta = self.open_interval("levin.delta", l.delta.as_ref(), "0.001", 0, 1)?;
        if let Err(e) = params.rotations(end + 2) {
            self.fail("levin.end", format!("the window needs q_{}: {e}", end + 1));
            return None;
        }
        Some(LevinSpec { start, end, delta: delta.0.to_f64() })
    }

    fn verify(&mut self, v: &RawVerify, params: &ModelParams) -> Option<VerifySpec> {
        let ab = self.alpha_beta("verify", v.alpha.as_ref(), v.beta.as_ref());
        let c = params.constant();
        let c_prime = match &v.c_prime {
            None => Some(midpoint(c)),
            Some(s) => match s.constant() {
                None => {
                    self.fail("verify.c_prime", format!("{s:?} is not a number or multiple of pi"));
                    None
                }
                Some(cp) if cp.exceeds_one() && c.ratio_to(&cp, 128) <= 1 => Some(cp),
                Some(cp) => {
                    self.fail("verify.c_prime", format!("need 1 < C' <= C (got C = {c}, C' = {cp})"));
                    None
                }
            },
        };
        let samples = self.count("verify.samples", v.samples, Some(1000), 1, 1 << 24);
        let seed = self.count("verify.seed", v.seed, Some(1), 0, i64::MAX as u64);
        let arg_q = self.count("verify.arg_q", v.arg_q, Some(16), 2, u32::MAX as u64);
        if let Some(q) = arg_q {
            if c.value(128) >= q {
                self.fail("verify.arg_q", format!("t = C/q must lie in (0,1) (got C = {c}, q = {q})"));
            }
        }
        let disk_t_samples = self.count("verify.disk_t_samples", v.disk_t_samples, Some(100), 1, 1 << 20);
        let disk_points = self.count("verify.disk_points", v.disk_points, Some(100), 1, 1 << 20);
        let disk_tolerance = match &v.disk_tolerance {
            None => Some(1e-12),
            Some(s) => match s.f64() {
                Some(t) if t > 0.0 && t.is_finite() => Some(t),
                _ => {
                    self.fail("verify.disk_tolerance", format!("must be a positive number (got {s:?})"));
                    None
                }
            },
        };
        let (alpha, beta) = ab?;
        Some(VerifySpec {
            alpha,
            beta,
            c_prime: c_prime?,
            samples: samples? as usize,
            seed: seed?,
            arg_q: arg_q?,
            disk_t_samples: disk_t_samples? as usize,
            disk_points: disk_points? as usize,
            disk_tolerance: disk_tolerance?,
        })
    }

    fn address(&mut self, a: &RawAddress) -> Option<AddressSpec> {
        let points = match &a.points {
            None => {
                self.fail("address.points", "is required");
                return None;
            }
            Some(p) if p.is_empty() => {
                self.fail("address.points", "must not be empty");
                return None;
            }
            Some(p) => p,
        };
        let mut out = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            match p.iter().map(Scalar::rational).collect::<Option<Vec<Rational>>>() {
                Some(v) if v.len() == 2 => {
                    let mut it = v.into_iter();
                    out.push((Exact(it.next().unwrap()), Exact(it.next().unwrap())));
                }
                _ => self.fail(&format!("address.points[{i}]"), "expected [re, im] with two numbers"),
            }
        }
        (out.len() == points.len()).then_some(AddressSpec { points: out })
    }
}

/// Default `C'` for the monotonicity suite: `(C + 1)/2`, rounded down to a
/// multiple of `10^-12` when `C` involves π.
fn midpoint(c: &Constant) -> Constant {
    if !c.has_pi() {
        return Constant::rational(Rational::from(c.coeff() + 1u32) / 2u32);
    }
    let scale = rug::Integer::from(10u64.pow(12));
    let mid = Float::with_val(256, c.value(256) + 1u32) / 2u32;
    let numer = Float::with_val(256, mid * &scale).floor().to_integer().expect("finite");
    Constant::rational(Rational::from((numer, scale)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        parse_config(text).unwrap_err().messages()
    }

    #[test]
    fn float_constant_reads_as_its_decimal() {
        let cfg = parse_config("command = \"centers\"\nhorizon = 1\n[model]\nc = 3.2\nfractions = [\"1/28\", \"1/39670\"]\n").unwrap();
        assert_eq!(cfg.model.constant().coeff(), &Rational::from((16, 5)));
    }

    #[test]
    fn all_errors_are_collected() {
        let e = errors("command = \"dance\"\nhorizon = -1\n[model]\nc = 0.5\nfractions = [\"2/4\"]\n");
        assert_eq!(e.len(), 4, "{e:?}");
        assert!(e.iter().any(|m| m.starts_with("command: unknown command")));
        assert!(e.iter().any(|m| m.starts_with("horizon:")));
        assert!(e.iter().any(|m| m.contains("C must exceed 1")));
        assert!(e.iter().any(|m| m.contains("model.fractions[0]") && m.contains("not reduced")));
    }

    #[test]
    fn pi_midpoint_stays_in_range() {
        let c: Constant = "0.5pi".parse().unwrap();
        let m = midpoint(&c);
        assert!(m.exceeds_one());
        assert!(c.ratio_to(&m, 128) <= 1);
        let want = (std::f64::consts::FRAC_PI_2 + 1.0) / 2.0;
        assert!((m.value(64).to_f64() - want).abs() < 1e-11);
    }

    #[test]
    fn overrides_replace_sequence_form() {
        let mut o = Overrides::default();
        o.set("model.generator.kind", "tower");
        o.set("model.generator.q0", 3);
        let cfg = load("command = \"levin\"\nhorizon = 3\n[model]\nc = 2\nfractions = [\"1/3\"]\n", &o).unwrap();
        assert!(cfg.model.extension().is_some());
    }
}
