//! Run configuration: the line-oriented `key = value` grammar and the parameter
//! table of every command.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use repulsive_core::format::fmt_f64;
use repulsive_core::Exponent;

use crate::error::{CliError, Origin};

/// Default seed of the randomized power-iteration start vectors.
pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_OUTPUT: &str = "repulsive-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    FloatList,
    Exponent,
    Choice(&'static [&'static str]),
}

impl Kind {
    pub fn expected(&self) -> String {
        match self {
            Kind::Int => "a nonnegative integer".into(),
            Kind::Float => "a finite number".into(),
            Kind::FloatList => "a comma-separated list of numbers".into(),
            Kind::Exponent => "a number >= 1 or `inf`".into(),
            Kind::Choice(options) => format!("one of {}", options.join(", ")),
        }
    }

    pub fn metavar(&self) -> &'static str {
        match self {
            Kind::Int => "INT",
            Kind::Float => "NUM",
            Kind::FloatList => "LIST",
            Kind::Exponent => "EXP",
            Kind::Choice(_) => "NAME",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamDef {
    pub key: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

const fn p(key: &'static str, kind: Kind, default: &'static str, help: &'static str) -> ParamDef {
    ParamDef {
        key,
        kind,
        default,
        help,
    }
}

const METHODS: &[&str] = &["exact", "strang"];

const TAU: ParamDef = p(
    "tau",
    Kind::Float,
    "1",
    "strength tau of the inverted oscillator -tau^2 x^2",
);
const WIDTH: ParamDef = p(
    "width",
    Kind::Float,
    "1",
    "Gaussian data exp(-width |x - center|^2 / 2 + i momentum x)",
);
const CENTER: ParamDef = p("center", Kind::Float, "0", "Gaussian center, on every axis");
const MOMENTUM: ParamDef = p("momentum", Kind::Float, "0", "Gaussian momentum, on every axis");
const AMPLITUDE_ON: ParamDef = p("amplitude", Kind::Float, "1", "c in V = c <x>^(-decay)");
const DECAY: ParamDef = p("decay", Kind::Float, "1", "decay exponent of V");
const NU: ParamDef = p(
    "nu",
    Kind::Float,
    "1",
    "distance nu of the spectral parameter from the real axis",
);
const NU_MAX: ParamDef = p("nu_max", Kind::Float, "1", "largest accepted nu");
const MIN_CERT: ParamDef = p(
    "min_certificate",
    Kind::Float,
    "0.2",
    "smallest accepted nu / local level spacing",
);
const SPACING: ParamDef = p(
    "spacing_window",
    Kind::Int,
    "8",
    "eigenvalues per side in the level-spacing median",
);
const TOLERANCE: ParamDef = p(
    "tolerance",
    Kind::Float,
    "1e-6",
    "relative stopping tolerance of the power iteration",
);
const MAX_ITER: ParamDef = p("max_iterations", Kind::Int, "500", "power-iteration cap");

const PROPAGATE: &[ParamDef] = &[
    p("n", Kind::Int, "1", "spatial dimension (1 or 2)"),
    TAU,
    p("half_width", Kind::Float, "28", "grid half-width L of [-L, L)^n"),
    p("points", Kind::Int, "2048", "grid points per axis"),
    WIDTH,
    CENTER,
    MOMENTUM,
    p("time", Kind::Float, "1", "propagation time"),
    p(
        "method",
        Kind::Choice(METHODS),
        "exact",
        "closed-form kernel or Strang splitting",
    ),
    p(
        "dt",
        Kind::Float,
        "1/1024",
        "Strang time step; time/dt must be an integer",
    ),
    p("record_every", Kind::Int, "64", "Strang steps between recorded samples"),
    p(
        "amplitude",
        Kind::Float,
        "0",
        "c in V = c <x>^(-decay); needs method = strang when nonzero",
    ),
    DECAY,
];

const DECAY_FIT: &[ParamDef] = &[
    p("n", Kind::Int, "1", "spatial dimension (1 or 2)"),
    TAU,
    p("half_width", Kind::Float, "8", "grid half-width L"),
    p("points", Kind::Int, "128", "grid points per axis"),
    WIDTH,
    p("t_min", Kind::Float, "3", "first sample time"),
    p("t_max", Kind::Float, "8", "last sample time"),
    p("t_step", Kind::Float, "0.5", "sample spacing"),
];

const STRICHARTZ: &[ParamDef] = &[
    TAU,
    p(
        "half_width",
        Kind::Float,
        "8",
        "half-width of the lens-frame profile grid",
    ),
    p("points", Kind::Int, "32768", "profile grid points"),
    WIDTH,
    CENTER,
    MOMENTUM,
    p("dt", Kind::Float, "1/256", "time step"),
    p(
        "steps",
        Kind::Int,
        "1024",
        "number of steps; the window is [0, dt*steps]",
    ),
    p("record_every", Kind::Int, "8", "steps between norm samples"),
    p("amplitude", Kind::Float, "0", "c in V = c <x>^(-decay)"),
    DECAY,
    p("q", Kind::Exponent, "2", "time exponent"),
    p("r", Kind::Exponent, "inf", "space exponent"),
];

const REGION: &[ParamDef] = &[
    p("n", Kind::Int, "3", "spatial dimension"),
    p(
        "resolution",
        Kind::Int,
        "64",
        "lattice step 1/(2 resolution) in (1/q, 1/r)",
    ),
];

const RESOLVENT_SCAN: &[ParamDef] = &[
    TAU,
    p("half_width", Kind::Float, "8", "Dirichlet box half-width"),
    p("points", Kind::Int, "1024", "grid points"),
    AMPLITUDE_ON,
    DECAY,
    p("lambda_min", Kind::Float, "-20", "first energy"),
    p("lambda_max", Kind::Float, "20", "last energy"),
    p("lambda_step", Kind::Float, "0.5", "energy spacing"),
    NU,
    NU_MAX,
    MIN_CERT,
    SPACING,
    TOLERANCE,
    MAX_ITER,
];

const HIGH_ENERGY: &[ParamDef] = &[
    TAU,
    p("half_width", Kind::Float, "32", "Dirichlet box half-width"),
    p("points", Kind::Int, "8192", "grid points"),
    p("thetas", Kind::FloatList, "2", "weight exponents theta in [0, 2]"),
    p(
        "lambdas",
        Kind::FloatList,
        "50,100,200,400,800",
        "positive increasing energies",
    ),
    p(
        "rho",
        Kind::Float,
        "0.5",
        "extra weight decay; the weight is <x>^(-theta-rho)",
    ),
    p(
        "power",
        Kind::Float,
        "1/3",
        "power p in the spread of norm(lambda) lambda^p",
    ),
    NU,
    NU_MAX,
    MIN_CERT,
    SPACING,
    TOLERANCE,
    MAX_ITER,
];

const SMOOTHING: &[ParamDef] = &[
    TAU,
    AMPLITUDE_ON,
    DECAY,
    p(
        "half_width",
        Kind::Float,
        "8",
        "half-width of the lens-frame profile grid",
    ),
    p("points", Kind::Int, "32768", "profile grid points"),
    WIDTH,
    CENTER,
    MOMENTUM,
    p("dt", Kind::Float, "1/256", "time step"),
    p(
        "steps",
        Kind::Int,
        "2048",
        "steps per direction; the window is [-dt*steps, dt*steps]",
    ),
    p("record_every", Kind::Int, "4", "steps between integrand samples"),
];

const DUHAMEL: &[ParamDef] = &[
    TAU,
    AMPLITUDE_ON,
    DECAY,
    p("half_width", Kind::Float, "28", "grid half-width"),
    p("points", Kind::Int, "65536", "grid points"),
    WIDTH,
    CENTER,
    MOMENTUM,
    p("dt", Kind::Float, "1/4096", "Strang time step"),
    p("steps", Kind::Int, "4096", "number of steps"),
    p(
        "quad_points",
        Kind::Int,
        "128",
        "trapezoid intervals of the Duhamel integral; must divide steps",
    ),
];

const WEIGHTED_DECAY: &[ParamDef] = &[
    TAU,
    p("rho", Kind::Float, "1", "weight exponent rho of <x>^(-rho)"),
    p("q_exponent", Kind::Float, "2", "Lebesgue exponent Q; needs rho Q > 1"),
    p("half_width", Kind::Float, "128", "grid half-width"),
    p("points", Kind::Int, "32768", "grid points"),
    WIDTH,
    p("sigma_min", Kind::Float, "0.5", "first time"),
    p("sigma_max", Kind::Float, "12", "last time"),
    p("sigma_step", Kind::Float, "0.25", "time spacing"),
    p("slope_min", Kind::Float, "2", "start of the envelope regression window"),
    p("slope_max", Kind::Float, "6", "end of the envelope regression window"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Propagate,
    DecayFit,
    Strichartz,
    Region,
    ResolventScan,
    HighEnergy,
    Smoothing,
    Duhamel,
    WeightedDecay,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Propagate,
        Command::DecayFit,
        Command::Strichartz,
        Command::Region,
        Command::ResolventScan,
        Command::HighEnergy,
        Command::Smoothing,
        Command::Duhamel,
        Command::WeightedDecay,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Propagate => "propagate",
            Command::DecayFit => "decay-fit",
            Command::Strichartz => "strichartz",
            Command::Region => "region",
            Command::ResolventScan => "resolvent-scan",
            Command::HighEnergy => "high-energy",
            Command::Smoothing => "smoothing",
            Command::Duhamel => "duhamel",
            Command::WeightedDecay => "weighted-decay",
        }
    }

    pub fn about(&self) -> &'static str {
        match self {
            Command::Propagate => "Evolve Gaussian data and write the final state",
            Command::DecayFit => "Fit the exponential L-infinity decay rate of the free flow",
            Command::Strichartz => "Mixed space-time norm of the flow and its window saturation",
            Command::Region => "Classify a lattice of exponent pairs",
            Command::ResolventScan => "Limiting-absorption scan of the |V|^(1/2)-weighted resolvent",
            Command::HighEnergy => "High-energy decay of the weighted free resolvent",
            Command::Smoothing => "Smoothing integral of |V|^(1/2) e^(-itH) f over a time window",
            Command::Duhamel => "Residual of the Duhamel identity at the final time",
            Command::WeightedDecay => "Weighted decay integrand and its time integral",
        }
    }

    pub fn params(&self) -> &'static [ParamDef] {
        match self {
            Command::Propagate => PROPAGATE,
            Command::DecayFit => DECAY_FIT,
            Command::Strichartz => STRICHARTZ,
            Command::Region => REGION,
            Command::ResolventScan => RESOLVENT_SCAN,
            Command::HighEnergy => HIGH_ENERGY,
            Command::Smoothing => SMOOTHING,
            Command::Duhamel => DUHAMEL,
            Command::WeightedDecay => WEIGHTED_DECAY,
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Kind of a parameter key, shared by every command that has it.
fn kind_of(key: &str) -> Option<Kind> {
    Command::ALL
        .iter()
        .flat_map(|c| c.params())
        .find(|d| d.key == key)
        .map(|d| d.kind)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Float(f64),
    FloatList(Vec<f64>),
    Exponent(Exponent),
    Choice(&'static str),
}

impl Value {
    /// Text that parses back to the same value.
    pub fn canonical(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => fmt_f64(*v),
            Value::FloatList(vs) => vs.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","),
            Value::Exponent(Exponent::Infinite) => "inf".into(),
            Value::Exponent(Exponent::Finite(p)) => fmt_f64(*p),
            Value::Choice(s) => (*s).into(),
        }
    }
}

/// A number, or a quotient `a/b` of two numbers.
fn parse_number(text: &str) -> Option<f64> {
    let v = match text.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?,
        None => text.parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}

pub fn parse_value(key: &str, kind: Kind, text: &str, origin: Origin) -> Result<Value, CliError> {
    let bad = || CliError::Type {
        origin,
        key: key.to_string(),
        expected: kind.expected(),
        value: text.to_string(),
    };
    match kind {
        Kind::Int => text.parse::<u64>().map(Value::Int).map_err(|_| bad()),
        Kind::Float => parse_number(text).map(Value::Float).ok_or_else(bad),
        Kind::FloatList => text
            .split(',')
            .map(|s| parse_number(s.trim()))
            .collect::<Option<Vec<f64>>>()
            .map(Value::FloatList)
            .ok_or_else(bad),
        Kind::Exponent => {
            if text == "inf" {
                return Ok(Value::Exponent(Exponent::Infinite));
            }
            let p = parse_number(text).filter(|p| *p >= 1.0).ok_or_else(bad)?;
            Ok(Value::Exponent(Exponent::Finite(p)))
        }
        Kind::Choice(options) => options
            .iter()
            .find(|o| **o == text)
            .map(|o| Value::Choice(o))
            .ok_or_else(bad),
    }
}

/// Settings gathered from a config file and command-line flags, before they are
/// checked against the command's table.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub command: Option<(String, Origin)>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<u64>,
    pub params: BTreeMap<String, (Value, Origin)>,
}

impl RawConfig {
    /// Records one setting; later calls override earlier ones.
    pub fn set(&mut self, key: &str, text: &str, origin: Origin) -> Result<(), CliError> {
        match key {
            "command" => self.command = Some((text.to_string(), origin)),
            "output" => self.output = Some(PathBuf::from(text)),
            "seed" | "jobs" => {
                let v = text.parse::<u64>().map_err(|_| CliError::Type {
                    origin,
                    key: key.to_string(),
                    expected: Kind::Int.expected(),
                    value: text.to_string(),
                })?;
                if key == "seed" {
                    self.seed = Some(v);
                } else {
                    self.jobs = Some(v);
                }
            }
            _ => {
                let kind = kind_of(key).ok_or_else(|| CliError::UnknownKey {
                    origin,
                    key: key.to_string(),
                    command: None,
                })?;
                let value = parse_value(key, kind, text, origin)?;
                self.params.insert(key.to_string(), (value, origin));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<RawConfig, CliError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let number = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let syntax = |message: &str| CliError::Syntax {
                line: number,
                message: message.to_string(),
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| syntax("expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(syntax(&format!("invalid key `{key}`")));
            }
            if value.is_empty() {
                return Err(syntax(&format!("missing value for `{key}`")));
            }
            raw.set(key, value, Origin::Line(number))?;
        }
        Ok(raw)
    }

    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let (name, origin) = self.command.ok_or(CliError::MissingCommand)?;
        let command = Command::from_name(&name).ok_or_else(|| CliError::Type {
            origin,
            key: "command".into(),
            expected: format!(
                "one of {}",
                Command::ALL.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
            ),
            value: name.clone(),
        })?;
        let table = command.params();
        if let Some((key, (_, origin))) = self.params.iter().find(|(k, _)| !table.iter().any(|d| d.key == *k)) {
            return Err(CliError::UnknownKey {
                origin: *origin,
                key: key.clone(),
                command: Some(command.name()),
            });
        }
        let mut params = BTreeMap::new();
        for def in table {
            let value = match self.params.get(def.key) {
                Some((v, _)) => v.clone(),
                None => parse_value(def.key, def.kind, def.default, Origin::Default)?,
            };
            params.insert(def.key, value);
        }
        Ok(RunConfig {
            command,
            params,
            output_dir: self.output.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT)),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            jobs: self.jobs.unwrap_or(0) as usize,
        })
    }
}

/// A fully resolved run: every parameter of the command has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: BTreeMap<&'static str, Value>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 lets the pool choose.
    pub jobs: usize,
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    RawConfig::parse(text)?.resolve()
}

impl RunConfig {
    fn get(&self, key: &str) -> &Value {
        self.params
            .get(key)
            .unwrap_or_else(|| panic!("`{key}` is not a parameter of {}", self.command))
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(v) => *v,
            other => panic!("`{key}` is not a number: {other:?}"),
        }
    }

    pub fn int(&self, key: &str) -> u64 {
        match self.get(key) {
            Value::Int(v) => *v,
            other => panic!("`{key}` is not an integer: {other:?}"),
        }
    }

    pub fn list(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::FloatList(v) => v,
            other => panic!("`{key}` is not a list: {other:?}"),
        }
    }

    pub fn exponent(&self, key: &str) -> Exponent {
        match self.get(key) {
            Value::Exponent(v) => *v,
            other => panic!("`{key}` is not an exponent: {other:?}"),
        }
    }

    pub fn choice(&self, key: &str) -> &'static str {
        match self.get(key) {
            Value::Choice(v) => v,
            other => panic!("`{key}` is not a choice: {other:?}"),
        }
    }

    /// The run in the config-file grammar; feeding it back reproduces the run.
    pub fn to_config_text(&self) -> String {
        let mut out = format!("command = {}\nseed = {}\n", self.command, self.seed);
        for (k, v) in &self.params {
            out.push_str(&format!("{k} = {}\n", v.canonical()));
        }
        out
    }
}
