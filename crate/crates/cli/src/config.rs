//! Run configuration: defaults, flat `key=value` files, JSON replay and flag
//! overrides, all funnelled through [`RunConfig::set`].

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stablemult::multiplier_op::ProfileKind;
use stablemult::{HPolicy, SingularCell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Density,
    Derivative,
    Subordinator,
    Kernel,
    Extend,
    ApplyT,
    Symbol,
    SymbolTruncated,
    Gfunction,
    Pairing,
    Simulate,
    Green,
    Harmonic,
    Jumps,
    LpProbe,
    Verify,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Density => "density",
            Subcommand::Derivative => "derivative",
            Subcommand::Subordinator => "subordinator",
            Subcommand::Kernel => "kernel",
            Subcommand::Extend => "extend",
            Subcommand::ApplyT => "apply-t",
            Subcommand::Symbol => "symbol",
            Subcommand::SymbolTruncated => "symbol-truncated",
            Subcommand::Gfunction => "gfunction",
            Subcommand::Pairing => "pairing",
            Subcommand::Simulate => "simulate",
            Subcommand::Green => "green",
            Subcommand::Harmonic => "harmonic",
            Subcommand::Jumps => "jumps",
            Subcommand::LpProbe => "lp-probe",
            Subcommand::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Bump,
    Gaussian,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenFn {
    Exp,
    Indicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub n: usize,
    pub length: f64,
    /// Left end of the period; `None` centres the grid at zero.
    pub origin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub shape: Shape,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub kind: ProfileKind,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

/// Unset bounds are filled from the grid before dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadParams {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub n_t: Option<usize>,
    pub h_policy: HPolicy,
    pub singular_cell: SingularCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McParams {
    pub start_height: f64,
    pub dt: f64,
    pub max_steps: usize,
    pub step_growth: f64,
    pub paths: usize,
    pub green_f: GreenFn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub alpha: f64,
    pub d: usize,
    pub seed: u64,
    pub format: Format,
    pub output_path: Option<String>,
    /// Times for `density`, arguments for `subordinator`.
    pub s: Vec<f64>,
    /// Height of the harmonic extension.
    pub t: f64,
    /// Table of points when `d = 1`, otherwise a single point with `d`
    /// coordinates. Doubles as the starting point for path commands.
    pub x: Vec<f64>,
    pub j: usize,
    pub k: usize,
    pub beta: f64,
    pub xi: Vec<f64>,
    pub grid: GridParams,
    pub field: FieldParams,
    pub partner: FieldParams,
    pub profile: ProfileParams,
    pub quad: QuadParams,
    pub mc: McParams,
    pub p: Vec<f64>,
    pub widths: Vec<f64>,
    pub shifts: Vec<i64>,
    pub suite: Suite,
}

impl RunConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            alpha: 1.0,
            d: 1,
            seed: 0,
            format: Format::Csv,
            output_path: None,
            s: vec![1.0],
            t: 1.0,
            x: vec![0.0],
            j: 1,
            k: 1,
            beta: 0.5,
            xi: linspace(0.25, 8.0, 32),
            grid: GridParams {
                n: 1024,
                length: 64.0,
                origin: None,
            },
            field: FieldParams {
                shape: Shape::Bump,
                center: 0.0,
                width: 3.0,
            },
            partner: FieldParams {
                shape: Shape::Bump,
                center: 1.0,
                width: 2.0,
            },
            profile: ProfileParams {
                kind: ProfileKind::ExpDecay,
                t: Vec::new(),
                values: Vec::new(),
            },
            quad: QuadParams {
                t_min: None,
                t_max: None,
                n_t: None,
                h_policy: HPolicy::Full,
                singular_cell: SingularCell::TaylorCorrect,
            },
            mc: McParams {
                start_height: 1.0,
                dt: 1e-3,
                max_steps: 1_000_000,
                step_growth: stablemult::stable_mc::DEFAULT_STEP_GROWTH,
                paths: 10_000,
                green_f: GreenFn::Exp,
            },
            p: vec![1.5, 2.0, 3.0],
            widths: vec![1.0, 2.0, 4.0],
            shifts: vec![0, 37],
            suite: Suite::Fast,
        }
    }

    /// Every key accepted by [`RunConfig::set`].
    pub const KEYS: &'static [&'static str] = &[
        "alpha",
        "d",
        "seed",
        "format",
        "output",
        "s",
        "t",
        "x",
        "j",
        "k",
        "beta",
        "xi",
        "n",
        "length",
        "origin",
        "field",
        "center",
        "width",
        "g_field",
        "g_center",
        "g_width",
        "profile",
        "profile_t",
        "profile_values",
        "t_min",
        "t_max",
        "n_t",
        "h_policy",
        "singular_cell",
        "a",
        "dt",
        "max_steps",
        "step_growth",
        "paths",
        "green_f",
        "p",
        "widths",
        "shifts",
        "suite",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let bad = |what: &str| ConfigError::new(format!("{key}: expected {what}, got {v:?}"));
        match key {
            "alpha" => self.alpha = num(v).ok_or_else(|| bad("a number"))?,
            "d" => self.d = v.parse().map_err(|_| bad("an integer"))?,
            "seed" => self.seed = v.parse().map_err(|_| bad("an unsigned integer"))?,
            "format" => {
                self.format = match v {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(bad("csv or json")),
                }
            }
            "output" => self.output_path = (!v.is_empty()).then(|| v.to_string()),
            "s" => self.s = list(v).ok_or_else(|| bad("a list of numbers"))?,
            "t" => self.t = num(v).ok_or_else(|| bad("a number"))?,
            "x" => self.x = list(v).ok_or_else(|| bad("a list of numbers"))?,
            "j" => self.j = v.parse().map_err(|_| bad("an integer"))?,
            "k" => self.k = v.parse().map_err(|_| bad("an integer"))?,
            "beta" => self.beta = num(v).ok_or_else(|| bad("a number"))?,
            "xi" => self.xi = list(v).ok_or_else(|| bad("a list of numbers"))?,
            "n" => self.grid.n = v.parse().map_err(|_| bad("an integer"))?,
            "length" => self.grid.length = num(v).ok_or_else(|| bad("a number"))?,
            "origin" => {
                self.grid.origin = match v {
                    "" | "centered" => None,
                    _ => Some(num(v).ok_or_else(|| bad("a number or 'centered'"))?),
                }
            }
            "field" => {
                self.field.shape = shape(v).ok_or_else(|| bad("bump, gaussian or cosine"))?
            }
            "center" => self.field.center = num(v).ok_or_else(|| bad("a number"))?,
            "width" => self.field.width = num(v).ok_or_else(|| bad("a number"))?,
            "g_field" => {
                self.partner.shape = shape(v).ok_or_else(|| bad("bump, gaussian or cosine"))?
            }
            "g_center" => self.partner.center = num(v).ok_or_else(|| bad("a number"))?,
            "g_width" => self.partner.width = num(v).ok_or_else(|| bad("a number"))?,
            "profile" => {
                self.profile.kind = match v {
                    "constant_one" | "one" => ProfileKind::ConstantOne,
                    "exp_decay" | "exp" => ProfileKind::ExpDecay,
                    "tabulated" => ProfileKind::Tabulated,
                    _ => return Err(bad("constant_one, exp_decay or tabulated")),
                }
            }
            "profile_t" => self.profile.t = list(v).ok_or_else(|| bad("a list of numbers"))?,
            "profile_values" => {
                self.profile.values = list(v).ok_or_else(|| bad("a list of numbers"))?
            }
            "t_min" => self.quad.t_min = opt_num(v).ok_or_else(|| bad("a number or 'auto'"))?,
            "t_max" => self.quad.t_max = opt_num(v).ok_or_else(|| bad("a number or 'auto'"))?,
            "n_t" => {
                self.quad.n_t = match v {
                    "" | "auto" => None,
                    _ => Some(v.parse().map_err(|_| bad("an integer or 'auto'"))?),
                }
            }
            "h_policy" => {
                self.quad.h_policy = match v {
                    "full" => HPolicy::Full,
                    "truncated" => HPolicy::Truncated,
                    _ => return Err(bad("full or truncated")),
                }
            }
            "singular_cell" => {
                self.quad.singular_cell = match v {
                    "omit" => SingularCell::Omit,
                    "taylor_correct" => SingularCell::TaylorCorrect,
                    _ => return Err(bad("omit or taylor_correct")),
                }
            }
            "a" => self.mc.start_height = num(v).ok_or_else(|| bad("a number"))?,
            "dt" => self.mc.dt = num(v).ok_or_else(|| bad("a number"))?,
            "max_steps" => self.mc.max_steps = v.parse().map_err(|_| bad("an integer"))?,
            "step_growth" => self.mc.step_growth = num(v).ok_or_else(|| bad("a number"))?,
            "paths" => self.mc.paths = v.parse().map_err(|_| bad("an integer"))?,
            "green_f" => {
                self.mc.green_f = match v {
                    "exp" => GreenFn::Exp,
                    "indicator" => GreenFn::Indicator,
                    _ => return Err(bad("exp or indicator")),
                }
            }
            "p" => self.p = list(v).ok_or_else(|| bad("a list of numbers"))?,
            "widths" => self.widths = list(v).ok_or_else(|| bad("a list of numbers"))?,
            "shifts" => {
                self.shifts = v
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("a list of integers"))?
            }
            "suite" => {
                self.suite = match v {
                    "fast" => Suite::Fast,
                    "full" => Suite::Full,
                    _ => return Err(bad("fast or full")),
                }
            }
            _ => {
                return Err(ConfigError::new(format!(
                    "unknown configuration key {key:?}"
                )))
            }
        }
        Ok(())
    }

    /// Apply a config file. Flat `key=value` lines (`#` starts a comment),
    /// or the JSON object written by `--format json`, whose `meta.config`
    /// replaces the whole configuration except the subcommand.
    pub fn load(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(format!("{}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            let doc: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| ConfigError::new(format!("{}: {e}", path.display())))?;
            let meta = doc
                .get("meta")
                .and_then(|m| m.get("config"))
                .unwrap_or(&doc);
            let mut cfg: RunConfig = serde_json::from_value(meta.clone())
                .map_err(|e| ConfigError::new(format!("{}: {e}", path.display())))?;
            cfg.subcommand = self.subcommand;
            *self = cfg;
            return Ok(());
        }
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(format!(
                    "{}:{}: expected key=value",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value).map_err(|e| {
                ConfigError::new(format!("{}:{}: {}", path.display(), lineno + 1, e.0))
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl ConfigError {
    fn new(msg: String) -> Self {
        Self(msg)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn num(v: &str) -> Option<f64> {
    v.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn opt_num(v: &str) -> Option<Option<f64>> {
    match v {
        "" | "auto" => Some(None),
        _ => num(v).map(Some),
    }
}

fn shape(v: &str) -> Option<Shape> {
    match v {
        "bump" => Some(Shape::Bump),
        "gaussian" => Some(Shape::Gaussian),
        "cosine" => Some(Shape::Cosine),
        _ => None,
    }
}

/// `a,b,c`, `lo:hi:count` (inclusive, evenly spaced) or empty.
pub fn list(v: &str) -> Option<Vec<f64>> {
    if v.trim().is_empty() {
        return Some(Vec::new());
    }
    if let Some((lo, rest)) = v.split_once(':') {
        let (hi, count) = rest.split_once(':')?;
        let count: usize = count.trim().parse().ok()?;
        if count == 0 {
            return None;
        }
        return Some(linspace(num(lo.trim())?, num(hi.trim())?, count));
    }
    v.split(',').map(|s| num(s.trim())).collect()
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| lo + h * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_syntax() {
        assert_eq!(list("1, 2,3"), Some(vec![1.0, 2.0, 3.0]));
        assert_eq!(list("-1:1:3"), Some(vec![-1.0, 0.0, 1.0]));
        assert_eq!(list("0:1:0"), None);
        assert_eq!(list("a,1"), None);
        assert_eq!(list("inf"), None);
        assert_eq!(list(""), Some(vec![]));
    }

    #[test]
    fn every_key_is_settable() {
        let sample = |k: &str| match k {
            "format" => "json",
            "output" => "out.csv",
            "origin" => "centered",
            "field" | "g_field" => "gaussian",
            "profile" => "tabulated",
            "h_policy" => "truncated",
            "singular_cell" => "omit",
            "green_f" => "indicator",
            "suite" => "full",
            "shifts" => "0,5",
            _ => "2",
        };
        for key in RunConfig::KEYS {
            let mut cfg = RunConfig::new(Subcommand::Density);
            cfg.set(key, sample(key))
                .unwrap_or_else(|e| panic!("{key}: {e}"));
        }
        let mut cfg = RunConfig::new(Subcommand::Density);
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.set("alpha", "one").is_err());
    }

    #[test]
    fn key_value_file_and_json_replay() {
        let dir = std::env::temp_dir().join(format!("stablemult-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let kv = dir.join("run.cfg");
        std::fs::write(&kv, "# comment\nalpha = 0.5\nx=0:2:3\n\nn_t=auto\n").unwrap();
        let mut cfg = RunConfig::new(Subcommand::Density);
        cfg.load(&kv).unwrap();
        assert_eq!(cfg.alpha, 0.5);
        assert_eq!(cfg.x, vec![0.0, 1.0, 2.0]);

        let json = dir.join("run.json");
        let doc = serde_json::json!({ "meta": { "config": cfg }, "data": {} });
        std::fs::write(&json, doc.to_string()).unwrap();
        let mut replay = RunConfig::new(Subcommand::Density);
        replay.load(&json).unwrap();
        assert_eq!(replay, cfg);

        std::fs::write(&kv, "alpha\n").unwrap();
        let err = RunConfig::new(Subcommand::Density).load(&kv).unwrap_err();
        assert!(err.0.contains(":1:"), "{err}");
        std::fs::remove_dir_all(&dir).ok();
    }
}
