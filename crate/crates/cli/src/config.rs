//! Experiment configuration: TOML text with dotted keys.
//!
//! ```toml
//! experiment = "sweep"
//! seed = 7
//! dim = 1
//! shape = "interval:-0.28125,0.28125"
//! box.halfwidth = 1.0
//! box.nodes = 31
//! s = [0.5]
//! alpha = [1, 2, 4, 8, 16]
//! tolerance.ratio = 1.05
//! ```
//!
//! Every key except `experiment` and `seed` has a default that depends on the
//! experiment kind. Validation collects every problem before failing, and
//! unknown keys are errors rather than being ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use fraclap::domain::{BoxGrid, Shape, SubDomain};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Spectra,
    Positivity,
    Monotonicity,
    Extension,
    Sobolev,
    Sweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Spectra,
        ExperimentKind::Positivity,
        ExperimentKind::Monotonicity,
        ExperimentKind::Extension,
        ExperimentKind::Sobolev,
        ExperimentKind::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Spectra => "spectra",
            ExperimentKind::Positivity => "positivity",
            ExperimentKind::Monotonicity => "monotonicity",
            ExperimentKind::Extension => "extension",
            ExperimentKind::Sobolev => "sobolev",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown experiment `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Every problem found in a configuration, in key order.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid configuration:\n  {}", .problems.join("\n  "))]
pub struct ConfigError {
    pub problems: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionParams {
    /// Truncation height; eight domain diameters when absent.
    pub height: Option<f64>,
    pub layers: usize,
    /// Grading exponent; `max(2, 1/(1−s))` per exponent when absent.
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeParams {
    pub max_iter: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolevGrid {
    /// Half-width of the grid on which the extremal function is sampled.
    pub halfwidth: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Spectral margins must exceed this for `s < 1`.
    pub strict: f64,
    /// Allowed roundoff for quantities that vanish or are ordered exactly.
    pub zero: f64,
    /// Smallest admissible entry of the difference operator applied to `u ≥ 0`.
    pub positivity: f64,
    /// Smallest admissible value of `w^D − w^N`.
    pub ordering: f64,
    /// Relative violation allowed in the domain-monotonicity chain.
    pub monotone: f64,
    /// Relative gap between form and scaled extension energy.
    pub energy: f64,
    /// Relative L2 gap between the fitted and matrix difference traces.
    pub trace: f64,
    /// Largest admissible final ratio of a dilation sweep.
    pub ratio: f64,
    /// Relative gap of the extremal quotient to the closed-form constant.
    pub sobolev: f64,
    /// Relative gap of the largest-dilation minimum to the closed-form constant.
    pub navier_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub dim: usize,
    pub shape: String,
    pub box_halfwidth: f64,
    pub box_nodes: usize,
    /// Outer-box enlargement for sweeps and zero padding.
    pub box_factor: f64,
    pub s: Vec<f64>,
    pub alpha: Vec<f64>,
    pub samples: usize,
    /// Node density of random masks; the configured shape is used when absent.
    pub mask_density: Option<f64>,
    pub extension: ExtensionParams,
    pub minimize: MinimizeParams,
    pub sobolev: SobolevGrid,
    pub tolerance: Tolerances,
    /// Output directory; the command line takes precedence.
    pub output_dir: Option<String>,
}

struct Defaults {
    dim1: (&'static str, f64, usize),
    dim2: (&'static str, f64, usize),
    s: &'static [f64],
    alpha: &'static [f64],
    mask_density: Option<f64>,
}

fn defaults(kind: ExperimentKind) -> Defaults {
    const QUARTERS: &[f64] = &[0.25, 0.5, 0.75];
    const DOUBLINGS: &[f64] = &[1.0, 2.0, 4.0, 8.0, 16.0];
    match kind {
        ExperimentKind::Spectra => Defaults {
            dim1: ("interval:-0.124,0.124", 1.0, 128),
            dim2: ("square:0.4848", 1.0, 32),
            s: &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            alpha: DOUBLINGS,
            mask_density: None,
        },
        ExperimentKind::Positivity => Defaults {
            dim1: ("interval:-0.124,0.124", 1.0, 128),
            dim2: ("square:0.4848", 1.0, 32),
            s: QUARTERS,
            alpha: DOUBLINGS,
            mask_density: None,
        },
        ExperimentKind::Monotonicity => Defaults {
            dim1: ("interval:-0.5,0.5", 1.0, 63),
            dim2: ("square:1", 1.0, 15),
            s: QUARTERS,
            alpha: DOUBLINGS,
            mask_density: Some(0.6),
        },
        ExperimentKind::Extension => Defaults {
            dim1: ("interval:-0.5,0.5", 1.0, 63),
            dim2: ("square:1", 1.0, 15),
            s: QUARTERS,
            alpha: DOUBLINGS,
            mask_density: None,
        },
        ExperimentKind::Sobolev => Defaults {
            dim1: ("interval:-1,1", 1.0, 31),
            dim2: ("square:2", 1.0, 15),
            s: &[0.25],
            alpha: &[1.0, 2.0, 4.0, 8.0],
            mask_density: None,
        },
        ExperimentKind::Sweep => Defaults {
            dim1: ("interval:-0.28125,0.28125", 1.0, 31),
            dim2: ("square:0.5", 1.0, 15),
            s: &[0.5],
            alpha: DOUBLINGS,
            mask_density: None,
        },
    }
}

// Dotted key → value, consumed as fields are read.
struct Fields {
    map: BTreeMap<String, toml::Value>,
    problems: Vec<String>,
}

fn flatten(prefix: &str, table: toml::Table, out: &mut BTreeMap<String, toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other);
            }
        }
    }
}

fn as_f64(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(x) => Some(*x),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<toml::Value> {
        self.map.remove(key)
    }

    fn bad(&mut self, key: &str, msg: impl fmt::Display) {
        self.problems.push(format!("{key}: {msg}"));
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        let v = self.take(key)?;
        match as_f64(&v) {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.bad(key, format!("expected a finite number, got {v}"));
                None
            }
        }
    }

    fn count(&mut self, key: &str) -> Option<usize> {
        let v = self.take(key)?;
        match v.as_integer() {
            Some(i) if i >= 0 => Some(i as usize),
            _ => {
                self.bad(key, format!("expected a nonnegative integer, got {v}"));
                None
            }
        }
    }

    fn text(&mut self, key: &str) -> Option<String> {
        let v = self.take(key)?;
        match v.as_str() {
            Some(s) => Some(s.to_string()),
            None => {
                self.bad(key, format!("expected a string, got {v}"));
                None
            }
        }
    }

    fn float_list(&mut self, key: &str) -> Option<Vec<f64>> {
        let v = self.take(key)?;
        let parsed = v
            .as_array()
            .and_then(|a| a.iter().map(as_f64).collect::<Option<Vec<_>>>());
        match parsed {
            Some(list) if list.iter().all(|x| x.is_finite()) => Some(list),
            _ => {
                self.bad(key, format!("expected an array of numbers, got {v}"));
                None
            }
        }
    }

    fn positive(&mut self, key: &str, default: f64) -> f64 {
        match self.float(key) {
            Some(x) if x > 0.0 => x,
            Some(x) => {
                self.bad(key, format!("must be positive, got {x}"));
                default
            }
            None => default,
        }
    }
}

/// Parses and validates a configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        problems: vec![format!("malformed configuration: {}", e.message())],
    })?;
    let mut map = BTreeMap::new();
    flatten("", table, &mut map);
    let mut f = Fields {
        map,
        problems: Vec::new(),
    };

    let experiment = match f.text("experiment") {
        Some(name) => match name.parse::<ExperimentKind>() {
            Ok(k) => Some(k),
            Err(e) => {
                f.bad("experiment", e);
                None
            }
        },
        None => {
            if !f.problems.iter().any(|p| p.starts_with("experiment:")) {
                f.bad("experiment", "missing required key");
            }
            None
        }
    };
    let seed = match f.take("seed") {
        Some(v) => match v.as_integer() {
            Some(i) if i >= 0 => Some(i as u64),
            _ => {
                f.bad("seed", format!("expected a nonnegative integer, got {v}"));
                None
            }
        },
        None => {
            f.bad("seed", "missing required key");
            None
        }
    };
    // fall back to spectra defaults so the remaining fields still get checked
    let d = defaults(experiment.unwrap_or(ExperimentKind::Spectra));

    let dim = match f.count("dim") {
        Some(n @ (1 | 2)) => n,
        Some(n) => {
            f.bad("dim", format!("must be 1 or 2, got {n}"));
            1
        }
        None => 1,
    };
    let (shape_default, l_default, n_default) = if dim == 1 { d.dim1 } else { d.dim2 };
    let shape = f.text("shape").unwrap_or_else(|| shape_default.to_string());
    let box_halfwidth = f.positive("box.halfwidth", l_default);
    let box_nodes = match f.count("box.nodes") {
        Some(n) if n >= 1 => n,
        Some(n) => {
            f.bad(
                "box.nodes",
                format!("need at least one node per axis, got {n}"),
            );
            n_default
        }
        None => n_default,
    };
    let box_factor = match f.float("box.factor") {
        Some(x) if x >= 1.0 => x,
        Some(x) => {
            f.bad("box.factor", format!("must be ≥ 1, got {x}"));
            2.0
        }
        None => 2.0,
    };

    let s = f.float_list("s").unwrap_or_else(|| d.s.to_vec());
    if s.is_empty() {
        f.bad("s", "must list at least one exponent");
    }
    for &x in &s {
        if !(x > 0.0 && x <= 1.0) {
            f.bad("s", format!("every exponent must lie in (0, 1], got {x}"));
        } else if matches!(experiment, Some(ExperimentKind::Extension)) && x >= 1.0 {
            f.bad("s", format!("extension experiments need s < 1, got {x}"));
        } else if matches!(experiment, Some(ExperimentKind::Sobolev)) && dim as f64 <= 2.0 * x {
            f.bad(
                "s",
                format!("Sobolev embedding needs dim > 2s, got s = {x} in dimension {dim}"),
            );
        }
    }
    let alpha = f.float_list("alpha").unwrap_or_else(|| d.alpha.to_vec());
    if alpha.is_empty() {
        f.bad("alpha", "must list at least one dilation factor");
    }
    if alpha.iter().any(|a| *a < 1.0) {
        f.bad("alpha", "dilation factors must be ≥ 1");
    }
    if alpha.windows(2).any(|w| w[0] >= w[1]) {
        f.bad("alpha", "dilation factors must be strictly increasing");
    }
    let samples = match f.count("samples") {
        Some(0) => {
            f.bad("samples", "must be at least 1");
            1
        }
        Some(n) => n,
        None => 50,
    };
    let mask_density = match f.float("mask.density") {
        Some(x) if x > 0.0 && x <= 1.0 => Some(x),
        Some(x) => {
            f.bad("mask.density", format!("must lie in (0, 1], got {x}"));
            None
        }
        None => d.mask_density,
    };

    let height = match f.float("extension.height") {
        Some(x) if x > 0.0 => Some(x),
        Some(x) => {
            f.bad("extension.height", format!("must be positive, got {x}"));
            None
        }
        None => None,
    };
    let layers = match f.count("extension.layers") {
        Some(m) if m >= 4 => m,
        Some(m) => {
            f.bad(
                "extension.layers",
                format!("mesh too coarse: need at least 4 layers, got {m}"),
            );
            128
        }
        None => 128,
    };
    let gamma = match f.float("extension.gamma") {
        Some(x) if x >= 1.0 => Some(x),
        Some(x) => {
            f.bad(
                "extension.gamma",
                format!("grading exponent must be ≥ 1, got {x}"),
            );
            None
        }
        None => None,
    };

    let max_iter = f.count("minimize.max_iter").unwrap_or(500);
    let min_tol = f.positive("minimize.tol", 1e-10);
    // sampling grid for the extremal function; far smaller in 2D
    let (sob_l_default, sob_n_default) = if dim == 1 { (40.0, 2047) } else { (20.0, 255) };
    let sob_l = f.positive("sobolev.halfwidth", sob_l_default);
    let sob_n = match f.count("sobolev.nodes") {
        Some(n) if n >= 1 => n,
        Some(n) => {
            f.bad("sobolev.nodes", format!("need at least one node, got {n}"));
            sob_n_default
        }
        None => sob_n_default,
    };

    let tolerance = Tolerances {
        strict: f.positive("tolerance.strict", 1e-9),
        zero: f.positive("tolerance.zero", 1e-10),
        positivity: f.positive("tolerance.positivity", 1e-8),
        ordering: f.positive("tolerance.ordering", 1e-8),
        monotone: f.positive("tolerance.monotone", 1e-10),
        energy: f.positive("tolerance.energy", 0.05),
        trace: f.positive("tolerance.trace", 0.15),
        ratio: f.positive("tolerance.ratio", 1.05),
        sobolev: f.positive("tolerance.sobolev", 0.10),
        navier_constant: f.positive("tolerance.navier_constant", 0.15),
    };
    let output_dir = f.text("output.dir");

    // the domain itself must be constructible
    match (
        shape.parse::<Shape<f64>>(),
        BoxGrid::new(dim, box_halfwidth, box_nodes),
    ) {
        (Ok(sh), Ok(grid)) => {
            if let Err(e) = SubDomain::from_shape(grid, sh) {
                f.bad("shape", e);
            }
        }
        (Err(e), _) => f.bad("shape", e),
        (_, Err(e)) => f.bad("box", e),
    }

    let leftovers: Vec<String> = f.map.keys().cloned().collect();
    for key in leftovers {
        f.bad(&key, "unknown key");
    }

    match (experiment, seed) {
        (Some(experiment), Some(seed)) if f.problems.is_empty() => Ok(ExperimentConfig {
            experiment,
            seed,
            dim,
            shape,
            box_halfwidth,
            box_nodes,
            box_factor,
            s,
            alpha,
            samples,
            mask_density,
            extension: ExtensionParams {
                height,
                layers,
                gamma,
            },
            minimize: MinimizeParams {
                max_iter,
                tol: min_tol,
            },
            sobolev: SobolevGrid {
                halfwidth: sob_l,
                nodes: sob_n,
            },
            tolerance,
            output_dir,
        }),
        _ => {
            f.problems.sort();
            Err(ConfigError {
                problems: f.problems,
            })
        }
    }
}

/// A number as TOML writes it, always with a decimal point or exponent.
fn float_literal(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

impl ExperimentConfig {
    /// Every field under its dotted key, defaults included, as JSON values.
    pub fn entries(&self) -> BTreeMap<String, serde_json::Value> {
        use serde_json::json;
        let t = &self.tolerance;
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: serde_json::Value| {
            m.insert(k.to_string(), v);
        };
        put("experiment", json!(self.experiment.name()));
        put("seed", json!(self.seed));
        put("dim", json!(self.dim));
        put("shape", json!(self.shape));
        put("box.halfwidth", json!(self.box_halfwidth));
        put("box.nodes", json!(self.box_nodes));
        put("box.factor", json!(self.box_factor));
        put("s", json!(self.s));
        put("alpha", json!(self.alpha));
        put("samples", json!(self.samples));
        if let Some(x) = self.mask_density {
            put("mask.density", json!(x));
        }
        if let Some(x) = self.extension.height {
            put("extension.height", json!(x));
        }
        put("extension.layers", json!(self.extension.layers));
        if let Some(x) = self.extension.gamma {
            put("extension.gamma", json!(x));
        }
        put("minimize.max_iter", json!(self.minimize.max_iter));
        put("minimize.tol", json!(self.minimize.tol));
        put("sobolev.halfwidth", json!(self.sobolev.halfwidth));
        put("sobolev.nodes", json!(self.sobolev.nodes));
        for (k, v) in [
            ("strict", t.strict),
            ("zero", t.zero),
            ("positivity", t.positivity),
            ("ordering", t.ordering),
            ("monotone", t.monotone),
            ("energy", t.energy),
            ("trace", t.trace),
            ("ratio", t.ratio),
            ("sobolev", t.sobolev),
            ("navier_constant", t.navier_constant),
        ] {
            put(&format!("tolerance.{k}"), json!(v));
        }
        if let Some(dir) = &self.output_dir {
            put("output.dir", json!(dir));
        }
        m
    }

    /// Configuration text that parses back to `self`.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let literal = match &v {
                serde_json::Value::Number(n) if n.is_f64() => float_literal(n.as_f64().unwrap()),
                serde_json::Value::Array(a) => {
                    let items: Vec<String> = a
                        .iter()
                        .map(|x| float_literal(x.as_f64().unwrap_or(f64::NAN)))
                        .collect();
                    format!("[{}]", items.join(", "))
                }
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {literal}\n"));
        }
        out
    }

    pub fn shape(&self) -> Shape<f64> {
        self.shape.parse().expect("validated when parsed")
    }

    pub fn grid(&self) -> BoxGrid<f64> {
        BoxGrid::new(self.dim, self.box_halfwidth, self.box_nodes).expect("validated when parsed")
    }

    pub fn domain(&self) -> SubDomain<f64> {
        SubDomain::from_shape(self.grid(), self.shape()).expect("validated when parsed")
    }
}
