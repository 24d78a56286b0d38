//! Flat `section.key = value` configuration with command-line overrides.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use droplet::dynamics::DropState;
use droplet::validate::DEFAULT_SEED;
use droplet::{Beta, DropletError, Params, Tables};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Real,
    Count,
    Seed,
    RealList,
    Nodes,
    Text,
    Path,
}

/// Every accepted key with its value type.
const KEYS: &[(&str, Kind)] = &[
    ("params.V0", Kind::Real),
    ("params.kappa", Kind::Real),
    ("params.alpha", Kind::Real),
    ("beta.kind", Kind::Text),
    ("beta.value", Kind::Real),
    ("beta.mean", Kind::Real),
    ("beta.amplitude", Kind::Real),
    ("beta.period", Kind::Real),
    ("beta.nodes", Kind::Nodes),
    ("run.T", Kind::Real),
    ("run.h", Kind::Real),
    ("run.a", Kind::Real),
    ("run.b", Kind::Real),
    ("run.law", Kind::Text),
    ("run.stride", Kind::Count),
    ("run.eps", Kind::RealList),
    ("run.q_min", Kind::Real),
    ("run.q_max", Kind::Real),
    ("run.ell_min", Kind::Real),
    ("run.ell_max", Kind::Real),
    ("run.drive_min", Kind::Real),
    ("run.drive_max", Kind::Real),
    ("run.count", Kind::Count),
    ("run.seed", Kind::Seed),
    ("run.output", Kind::Path),
];

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_text(text: &str, origin: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("{origin}:{}: expected `key = value`", n + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::Config(format!("{origin}:{}: duplicate key `{key}`", n + 1)));
        }
    }
    Ok(out)
}

/// Splits `--key value` / `--key=value` flags, with `--config FILE` read
/// first so that flags override it.
pub fn parse_args(args: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    let mut file: Option<PathBuf> = None;
    let mut flags = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            return Err(CliError::Usage(format!("unexpected argument `{arg}`")));
        };
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| CliError::Usage(format!("flag `--{body}` needs a value")))?;
                (body.to_string(), v.clone())
            }
        };
        if key == "config" {
            file = Some(PathBuf::from(value));
        } else {
            flags.push((key, value));
        }
    }
    let mut map = match &file {
        Some(path) => read_file(path)?,
        None => BTreeMap::new(),
    };
    for (k, v) in flags {
        map.insert(k, v);
    }
    Ok(map)
}

fn read_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_text(&text, &path.display().to_string())
}

/// Validated configuration. Lookups record the resolved value, defaults
/// included, for the provenance header.
#[derive(Debug)]
pub struct Config {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeMap<String, String>>,
    beta: Beta,
}

impl Config {
    pub fn new(values: BTreeMap<String, String>) -> Result<Self, CliError> {
        for (key, value) in &values {
            let kind = kind_of(key).ok_or_else(|| CliError::Config(format!("unknown key `{key}`")))?;
            check_kind(key, value, kind)?;
        }
        let mut cfg = Self {
            values,
            used: RefCell::new(BTreeMap::new()),
            beta: Beta::constant(1.0).map_err(invalid)?,
        };
        cfg.beta = cfg.build_beta()?;
        if ["params.V0", "params.kappa", "params.alpha"].iter().all(|k| cfg.values.contains_key(*k)) {
            let p = cfg.params()?;
            log::info!("tilt = {}, k2 = {}", p.tilt(), p.k2());
        }
        log::info!("beta = {}, min {}, max {}", cfg.beta, cfg.beta.min(), cfg.beta.max());
        Ok(cfg)
    }

    fn record(&self, key: &str, value: String) {
        self.used.borrow_mut().insert(key.to_string(), value);
    }

    /// Resolved keys in sorted order.
    pub fn resolved(&self) -> Vec<(String, String)> {
        self.used.borrow().iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(kind_of(key).is_some(), "undeclared key {key}");
        self.values.get(key).map(String::as_str)
    }

    pub fn real_opt(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.raw(key) {
            Some(v) => {
                let x = parse_real(key, v)?;
                self.record(key, droplet::csv::format_value(x));
                Ok(Some(x))
            }
            None => Ok(None),
        }
    }

    pub fn real(&self, key: &str) -> Result<f64, CliError> {
        self.real_opt(key)?.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    pub fn real_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let x = self.real_opt(key)?.unwrap_or(default);
        self.record(key, droplet::csv::format_value(x));
        Ok(x)
    }

    pub fn positive(&self, key: &str, x: f64) -> Result<f64, CliError> {
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(CliError::Config(format!("`{key}` = {x} must be positive")))
        }
    }

    pub fn count_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        let n = match self.raw(key) {
            Some(v) => parse_count(key, v)?,
            None => default,
        };
        self.record(key, n.to_string());
        Ok(n)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        let s = match self.raw("run.seed") {
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("`run.seed` = `{v}` is not an unsigned integer")))?,
            None => DEFAULT_SEED,
        };
        self.record("run.seed", s.to_string());
        Ok(s)
    }

    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let xs = match self.raw(key) {
            Some(v) => parse_list(key, v)?,
            None => default.to_vec(),
        };
        let shown: Vec<String> = xs.iter().map(|x| droplet::csv::format_value(*x)).collect();
        self.record(key, shown.join(","));
        Ok(xs)
    }

    pub fn text_or(&self, key: &str, default: &str) -> String {
        let v = self.raw(key).unwrap_or(default).to_string();
        self.record(key, v.clone());
        v
    }

    pub fn output(&self) -> Option<PathBuf> {
        self.raw("run.output").map(PathBuf::from)
    }

    pub fn params(&self) -> Result<Params, CliError> {
        Params::new(self.real("params.V0")?, self.real("params.kappa")?, self.real("params.alpha")?).map_err(invalid)
    }

    /// Params with `V0` replaced; used for sweeps over the drive.
    pub fn params_with_volume(&self, v0: f64) -> Result<Params, CliError> {
        Params::new(v0, self.real("params.kappa")?, self.real("params.alpha")?).map_err(invalid)
    }

    pub fn beta(&self) -> &Beta {
        self.record("beta", self.beta.to_string());
        &self.beta
    }

    pub fn tables(&self) -> Result<Tables, CliError> {
        let t = Tables::new(&self.params()?)?;
        self.record("derived.ell_c", t.critical_length().to_string());
        log::info!("ell_c = {}", t.critical_length());
        Ok(t)
    }

    pub fn initial(&self) -> Result<DropState<f64>, CliError> {
        let (a, b) = (self.real("run.a")?, self.real("run.b")?);
        if !(b > a) {
            return Err(CliError::Config(format!("need run.b > run.a, got a = {a}, b = {b}")));
        }
        Ok(DropState::new(a, b))
    }

    fn build_beta(&self) -> Result<Beta, CliError> {
        let kind = self.raw("beta.kind").unwrap_or("constant");
        let allowed: &[&str] = match kind {
            "constant" => &["beta.value"],
            "sine" => &["beta.mean", "beta.amplitude", "beta.period"],
            "piecewise-linear" => &["beta.period", "beta.nodes"],
            other => {
                return Err(CliError::Config(format!(
                    "unknown beta kind `{other}` (constant, sine, piecewise-linear)"
                )))
            }
        };
        for key in self.values.keys().filter(|k| k.starts_with("beta.") && *k != "beta.kind") {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Config(format!("`{key}` does not apply to beta kind `{kind}`")));
            }
        }
        let get = |key: &str, default: Option<f64>| -> Result<f64, CliError> {
            match self.raw(key) {
                Some(v) => parse_real(key, v),
                None => default.ok_or_else(|| CliError::Config(format!("missing required key `{key}`"))),
            }
        };
        let beta = match kind {
            "constant" => Beta::constant(get("beta.value", Some(1.0))?),
            "sine" => {
                let (mean, amp) = (get("beta.mean", None)?, get("beta.amplitude", None)?);
                if amp >= mean {
                    return Err(CliError::Config(format!(
                        "`beta.amplitude` = {amp} must be below `beta.mean` = {mean} so that beta stays positive"
                    )));
                }
                Beta::sine(mean, amp, get("beta.period", Some(1.0))?)
            }
            _ => {
                let nodes = parse_nodes("beta.nodes", self.raw("beta.nodes").unwrap_or(""))?;
                Beta::piecewise_linear(get("beta.period", Some(1.0))?, &nodes)
            }
        };
        beta.map_err(invalid)
    }
}

/// Library validation failures on configured values are configuration errors.
fn invalid(e: DropletError) -> CliError {
    CliError::Config(e.to_string())
}

fn parse_real(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v
        .parse()
        .map_err(|_| CliError::Config(format!("`{key}` = `{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::Config(format!("`{key}` = `{v}` is not finite")));
    }
    Ok(x)
}

fn parse_count(key: &str, v: &str) -> Result<usize, CliError> {
    match v.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(CliError::Config(format!("`{key}` = `{v}` is not a positive integer"))),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let xs = v
        .split(',')
        .map(|s| parse_real(key, s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if xs.is_empty() {
        return Err(CliError::Config(format!("`{key}` is empty")));
    }
    Ok(xs)
}

/// `x:beta, x:beta, ...`
fn parse_nodes(key: &str, v: &str) -> Result<Vec<(f64, f64)>, CliError> {
    v.split(',')
        .map(|pair| {
            let (x, y) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("`{key}`: expected `x:beta`, got `{}`", pair.trim())))?;
            Ok((parse_real(key, x.trim())?, parse_real(key, y.trim())?))
        })
        .collect()
}

fn check_kind(key: &str, value: &str, kind: Kind) -> Result<(), CliError> {
    match kind {
        Kind::Real => parse_real(key, value).map(|_| ()),
        Kind::Count => parse_count(key, value).map(|_| ()),
        Kind::Seed => value
            .parse::<u64>()
            .map(|_| ())
            .map_err(|_| CliError::Config(format!("`{key}` = `{value}` is not an unsigned integer"))),
        Kind::RealList => parse_list(key, value).map(|_| ()),
        Kind::Nodes => parse_nodes(key, value).map(|_| ()),
        Kind::Text | Kind::Path if value.is_empty() => Err(CliError::Config(format!("`{key}` is empty"))),
        Kind::Text | Kind::Path => Ok(()),
    }
}
