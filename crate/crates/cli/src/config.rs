//! Experiment configuration: `key=value` parameters validated into an
//! [`ExperimentConfig`].

use std::path::PathBuf;

use hyperlab::flow::{critical_time, linear_grid, log_grid, Regime, T_MAX, T_MIN};
use hyperlab::function::{Preset, BUMP_FLOOR};
use hyperlab::hermite::MAX_ORDER;
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Qcurve,
    Closure,
    Hyper,
    Boolean,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Qcurve => "qcurve",
            Command::Closure => "closure",
            Command::Hyper => "hyper",
            Command::Boolean => "boolean",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Log => log_grid(self.min, self.max, self.count),
            Spacing::Linear => linear_grid(self.min, self.max, self.count),
        }
    }
}

/// An endpoint of an s-sweep: absolute, or a multiple of the critical time
/// (written `0.8*`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Absolute(f64),
    Critical(f64),
}

impl Bound {
    fn parse(text: &str) -> Option<Bound> {
        match text.strip_suffix('*') {
            Some(m) => m.parse().ok().map(Bound::Critical),
            None => text.parse().ok().map(Bound::Absolute),
        }
    }

    pub fn resolve(self, critical: f64) -> f64 {
        match self {
            Bound::Absolute(s) => s,
            Bound::Critical(m) => m * critical,
        }
    }

    fn render(self) -> String {
        match self {
            Bound::Absolute(s) => format!("{s}"),
            Bound::Critical(m) => format!("{m}*"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub lo: Bound,
    pub hi: Bound,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub p: f64,
    pub q: f64,
    pub c: f64,
    pub s: Option<f64>,
    pub s_sweep: SweepSpec,
    pub times: GridSpec,
    pub order: usize,
    pub inner: usize,
    pub preset: Preset,
    pub ramp: f64,
    pub rho: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_ORDER: usize = 48;
pub const DEFAULT_INNER: usize = 128;
pub const DEFAULT_SWEEP_COUNT: usize = 41;

const KEYS: &[&str] = &[
    "p",
    "q",
    "c",
    "s",
    "s-sweep",
    "s-count",
    "t-min",
    "t-max",
    "count",
    "spacing",
    "order",
    "inner",
    "preset",
    "value",
    "intercept",
    "slope",
    "c0",
    "c1",
    "c2",
    "center",
    "width",
    "floor",
    "a",
    "ramp",
    "rho",
    "out",
    "format",
];

fn preset_keys(name: &str) -> &'static [&'static str] {
    match name {
        "const" => &["value"],
        "affine" => &["intercept", "slope"],
        "quadratic" => &["c0", "c1", "c2"],
        "bump" => &["center", "width", "floor"],
        "exp" => &["a"],
        _ => &[],
    }
}

const PRESET_PARAM_KEYS: &[&str] = &[
    "value",
    "intercept",
    "slope",
    "c0",
    "c1",
    "c2",
    "center",
    "width",
    "floor",
    "a",
];

struct Params(Vec<(String, String)>);

impl Params {
    fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn real(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_real(key, v),
        }
    }

    fn opt_real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key).map(|v| parse_real(key, v)).transpose()
    }

    fn integer(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                ConfigError::new(key, format!("expected a nonnegative integer, got `{v}`"))
            }),
        }
    }
}

fn parse_real(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v
        .parse()
        .map_err(|_| ConfigError::new(key, format!("expected a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(ConfigError::new(key, format!("must be finite, got `{v}`")));
    }
    Ok(x)
}

fn split_params(raw: &[String]) -> Result<Params, ConfigError> {
    let mut out = Vec::with_capacity(raw.len());
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| ConfigError::new(item.as_str(), "parameters are written key=value"))?;
        if !KEYS.contains(&k) {
            return Err(ConfigError::new(k, "unknown parameter"));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(Params(out))
}

fn parse_preset(params: &Params) -> Result<Preset, ConfigError> {
    let name = params.get("preset").unwrap_or("const");
    let allowed = preset_keys(name);
    if allowed.is_empty() {
        return Err(ConfigError::new(
            "preset",
            format!("unknown preset `{name}`; expected const, affine, quadratic, bump or exp"),
        ));
    }
    for (k, _) in &params.0 {
        if PRESET_PARAM_KEYS.contains(&k.as_str()) && !allowed.contains(&k.as_str()) {
            return Err(ConfigError::new(
                k.as_str(),
                format!("not a parameter of preset `{name}`"),
            ));
        }
    }
    let preset = match name {
        "const" => Preset::Const {
            value: params.real("value", 1.0)?,
        },
        "affine" => Preset::Affine {
            intercept: params.real("intercept", 2.0)?,
            slope: params.real("slope", 1.0)?,
        },
        "quadratic" => Preset::Quadratic {
            c0: params.real("c0", 1.0)?,
            c1: params.real("c1", 0.0)?,
            c2: params.real("c2", 0.25)?,
        },
        "bump" => Preset::Bump {
            center: params.real("center", 0.0)?,
            width: params.real("width", 1.0)?,
            floor: params.real("floor", BUMP_FLOOR)?,
        },
        _ => Preset::Exp {
            rate: params.real("a", 0.5)?,
        },
    };
    preset.validate().map_err(|e| match e {
        hyperlab::Error::Parameter { name, reason } => ConfigError::new(name, reason),
        other => ConfigError::new("preset", other.to_string()),
    })?;
    Ok(preset)
}

fn parse_sweep(params: &Params) -> Result<SweepSpec, ConfigError> {
    let count = params.integer("s-count", DEFAULT_SWEEP_COUNT)?;
    if count < 2 {
        return Err(ConfigError::new(
            "s-count",
            "a sweep needs at least two points",
        ));
    }
    let text = params.get("s-sweep").unwrap_or("0.8*:1.2*");
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| ConfigError::new("s-sweep", format!("expected lo:hi, got `{text}`")))?;
    let lo = Bound::parse(lo)
        .ok_or_else(|| ConfigError::new("s-sweep", format!("bad lower end `{lo}`")))?;
    let hi = Bound::parse(hi)
        .ok_or_else(|| ConfigError::new("s-sweep", format!("bad upper end `{hi}`")))?;
    Ok(SweepSpec { lo, hi, count })
}

impl ExperimentConfig {
    /// Parses and validates `key=value` parameters for `command`.
    pub fn from_params(command: Command, raw: &[String]) -> Result<Self, ConfigError> {
        let params = split_params(raw)?;
        let p = params.real("p", 2.0)?;
        let q = params.real("q", 4.0)?;
        let c = params.real("c", 1.0)?;

        let order = params.integer("order", DEFAULT_ORDER)?;
        if !(3..=MAX_ORDER).contains(&order) {
            return Err(ConfigError::new(
                "order",
                format!("must lie in 3..={MAX_ORDER}, got {order}"),
            ));
        }
        let inner = params.integer("inner", DEFAULT_INNER.max(order))?;
        if !(order..=MAX_ORDER).contains(&inner) {
            return Err(ConfigError::new(
                "inner",
                format!(
                    "must lie in {order}..={MAX_ORDER} (at least the outer order), got {inner}"
                ),
            ));
        }

        let spacing = match params.get("spacing").unwrap_or("log") {
            "log" => Spacing::Log,
            "linear" => Spacing::Linear,
            other => {
                return Err(ConfigError::new(
                    "spacing",
                    format!("expected log or linear, got `{other}`"),
                ))
            }
        };
        let times = GridSpec {
            min: params.real("t-min", T_MIN)?,
            max: params.real("t-max", T_MAX)?,
            count: params.integer("count", 60)?,
            spacing,
        };
        if !(times.min > 0.0) {
            return Err(ConfigError::new("t-min", "times must be positive"));
        }
        if !(times.max > times.min) {
            return Err(ConfigError::new("t-max", "must exceed t-min"));
        }
        let min_count = if command == Command::Closure { 3 } else { 1 };
        if times.count < min_count {
            return Err(ConfigError::new(
                "count",
                format!(
                    "{} needs at least {min_count} times, got {}",
                    command.name(),
                    times.count
                ),
            ));
        }

        let format = match params.get("format").unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => {
                return Err(ConfigError::new(
                    "format",
                    format!("expected csv or json, got `{other}`"),
                ))
            }
        };

        let s = params.opt_real("s")?;
        if let Some(s) = s {
            if !(s > 0.0) {
                return Err(ConfigError::new("s", "must be positive"));
            }
        }
        let rho = params.opt_real("rho")?;
        if let Some(rho) = rho {
            if !(rho.abs() <= 1.0) {
                return Err(ConfigError::new("rho", "must lie in [-1, 1]"));
            }
        }

        let config = ExperimentConfig {
            command,
            p,
            q,
            c,
            s,
            s_sweep: parse_sweep(&params)?,
            times,
            order,
            inner,
            preset: parse_preset(&params)?,
            ramp: params.real("ramp", 0.0)?,
            rho,
            out: params.get("out").map(PathBuf::from),
            format,
        };
        if command != Command::Selftest {
            if Regime::classify(p, q).is_none() {
                return Err(ConfigError::new(
                    "q",
                    format!("(p, q) = ({p}, {q}) lies in none of the four admissible regimes"),
                ));
            }
            if !(c > 0.0) {
                return Err(ConfigError::new("c", "curvature must be positive"));
            }
        }
        Ok(config)
    }

    pub fn critical_time(&self) -> Option<f64> {
        critical_time(self.p, self.q, self.c).ok()
    }

    /// Echo of the configuration, in parameter order.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command.name()));
        m.insert("p".into(), json!(self.p));
        m.insert("q".into(), json!(self.q));
        m.insert("c".into(), json!(self.c));
        m.insert("s".into(), self.s.map_or(Value::Null, |s| json!(s)));
        m.insert(
            "s_sweep".into(),
            json!(format!(
                "{}:{}",
                self.s_sweep.lo.render(),
                self.s_sweep.hi.render()
            )),
        );
        m.insert("s_count".into(), json!(self.s_sweep.count));
        m.insert("t_min".into(), json!(self.times.min));
        m.insert("t_max".into(), json!(self.times.max));
        m.insert("count".into(), json!(self.times.count));
        m.insert(
            "spacing".into(),
            json!(match self.times.spacing {
                Spacing::Log => "log",
                Spacing::Linear => "linear",
            }),
        );
        m.insert("order".into(), json!(self.order));
        m.insert("inner".into(), json!(self.inner));
        m.insert("preset".into(), json!(self.preset.name()));
        let mut pm = Map::new();
        for (k, v) in self.preset.params() {
            pm.insert(k.into(), json!(v));
        }
        m.insert("preset_params".into(), Value::Object(pm));
        m.insert(
            "catalogue_version".into(),
            json!(hyperlab::function::CATALOGUE_VERSION),
        );
        m.insert("ramp".into(), json!(self.ramp));
        m.insert("rho".into(), self.rho.map_or(Value::Null, |r| json!(r)));
        Value::Object(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(command: Command, args: &[&str]) -> Result<ExperimentConfig, ConfigError> {
        let raw: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        ExperimentConfig::from_params(command, &raw)
    }

    #[test]
    fn defaults() {
        let c = parse(Command::Qcurve, &[]).unwrap();
        assert_eq!((c.p, c.q, c.c), (2.0, 4.0, 1.0));
        assert_eq!(c.times.points().len(), 60);
        assert_eq!(c.preset, Preset::constant());
        assert_eq!(c.format, Format::Csv);
    }

    #[test]
    fn preset_parameters() {
        let c = parse(
            Command::Hyper,
            &["preset=exp", "a=0.8", "s-sweep=0.8*:1.2*"],
        )
        .unwrap();
        assert_eq!(c.preset, Preset::exp(0.8));
        assert_eq!(c.s_sweep.lo, Bound::Critical(0.8));
        let e = parse(Command::Hyper, &["preset=bump", "a=0.8"]).unwrap_err();
        assert_eq!(e.field, "a");
        let e = parse(Command::Qcurve, &["preset=bump", "width=0"]).unwrap_err();
        assert_eq!(e.field, "width");
    }

    #[test]
    fn errors_name_the_field() {
        for (args, field) in [
            (vec!["p=x"], "p"),
            (vec!["p=4", "q=2"], "q"),
            (vec!["order=0"], "order"),
            (vec!["order=600"], "order"),
            (vec!["inner=10"], "inner"),
            (vec!["spacing=cubic"], "spacing"),
            (vec!["format=xml"], "format"),
            (vec!["t-min=-1"], "t-min"),
            (vec!["bogus=1"], "bogus"),
            (vec!["preset=sine"], "preset"),
            (vec!["s-sweep=1:"], "s-sweep"),
            (vec!["c=0"], "c"),
        ] {
            let e = parse(Command::Qcurve, &args).unwrap_err();
            assert_eq!(e.field, field, "{args:?}");
        }
        let e = parse(Command::Closure, &["count=2"]).unwrap_err();
        assert_eq!(e.field, "count");
        assert!(parse(Command::Qcurve, &["count=2"]).is_ok());
    }

    #[test]
    fn json_echo_is_ordered() {
        let c = parse(Command::Qcurve, &["preset=bump"]).unwrap();
        let keys: Vec<String> = c.to_json().as_object().unwrap().keys().cloned().collect();
        assert_eq!(&keys[..3], &["command", "p", "q"]);
    }
}
