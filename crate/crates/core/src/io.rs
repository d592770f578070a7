//! Configuration loading, result reports, and CSV/SVG emission.
//!
//! Configs are strict JSON: unknown keys are rejected by name, numeric
//! parameters are range-checked, and the raw text of the effective config is
//! echoed into every report so a run can be reproduced byte-for-byte.
//! Floating-point values are serialized as shortest round-trip decimals.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{FSpec, WeightSpec};
use crate::fourier::DecayRegime;
use crate::grid::GridSpec;
use crate::measures::{
    make_circle_measure, make_convex_graph_measure, make_flat_segment_measure, ConvexGraph,
    DiscreteMeasure,
};
use crate::svg;
use crate::weights::{Profile, TensorWeight, TubeFamily};

fn default_nodes() -> usize {
    2048
}
fn default_c() -> f64 {
    0.45
}
fn default_m() -> u32 {
    1
}
fn default_power_k() -> f64 {
    2.0
}

/// Measure selection: built-in curve families by name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    /// `circle`, `flat_segment`, `exp_flat`, or `power`.
    pub family: String,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Exponent of the exponentially flat family.
    #[serde(default = "default_m")]
    pub m: u32,
    /// Domain end of convex-graph families.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Truncation point; defaults to `1e-4·c`.
    #[serde(default)]
    pub t_min: Option<f64>,
    /// Exponent of the `power` family.
    #[serde(default = "default_power_k")]
    pub k: f64,
}

impl MeasureConfig {
    pub fn build(&self) -> Result<DiscreteMeasure> {
        match self.family.as_str() {
            "circle" => make_circle_measure(self.nodes),
            "flat_segment" => make_flat_segment_measure(self.nodes),
            "exp_flat" => {
                let spec = ConvexGraph::exp_flat(self.m, self.c)?;
                let t_min = self.t_min.unwrap_or(1e-4 * self.c);
                make_convex_graph_measure(&spec, self.nodes, t_min)
            }
            "power" => {
                let spec = ConvexGraph::power(self.k, self.c)?;
                let t_min = self.t_min.unwrap_or(1e-4 * self.c);
                make_convex_graph_measure(&spec, self.nodes, t_min)
            }
            other => Err(Error::RangeViolation {
                key: "measure.family".into(),
                message: format!(
                    "unknown family `{other}` (expected circle, flat_segment, exp_flat, or power)"
                ),
            }),
        }
    }

    pub fn convex_graph(&self) -> Result<ConvexGraph> {
        match self.family.as_str() {
            "exp_flat" => ConvexGraph::exp_flat(self.m, self.c),
            "power" => ConvexGraph::power(self.k, self.c),
            other => Err(Error::RangeViolation {
                key: "measure.family".into(),
                message: format!("family `{other}` is not a convex graph"),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    /// `constant`, `random_phases`, or `focused`.
    pub kind: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub x0: [f64; 2],
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            kind: "constant".into(),
            seed: 0,
            x0: [0.0, 0.0],
        }
    }
}

impl DensityConfig {
    pub fn build(&self) -> Result<FSpec> {
        Ok(match self.kind.as_str() {
            "constant" => FSpec::Constant,
            "random_phases" => FSpec::RandomPhases { seed: self.seed },
            "focused" => FSpec::Focused { x0: self.x0 },
            other => {
                return Err(Error::RangeViolation {
                    key: "density.kind".into(),
                    message: format!(
                        "unknown density `{other}` (expected constant, random_phases, or focused)"
                    ),
                })
            }
        })
    }
}

fn default_one() -> f64 {
    1.0
}
fn default_interval_lo() -> f64 {
    -1.0
}
fn default_period() -> f64 {
    4.0
}
fn default_duty() -> f64 {
    0.25
}
fn default_dir() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    /// `window`, `ball`, `tube`, or `tensor`.
    pub kind: String,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "default_one")]
    pub radius: f64,
    #[serde(default = "default_dir")]
    pub dir: [f64; 2],
    #[serde(default)]
    pub offset: f64,
    #[serde(default = "default_one")]
    pub cross_section: f64,
    /// Tensor profile: `interval`, `bump`, or `step_train`.
    #[serde(default)]
    pub profile: Option<String>,
    #[serde(default = "default_interval_lo")]
    pub lo: f64,
    #[serde(default = "default_one")]
    pub hi: f64,
    #[serde(default = "default_period")]
    pub period: f64,
    #[serde(default = "default_duty")]
    pub duty: f64,
    #[serde(default = "default_one")]
    pub a: f64,
    #[serde(default = "default_one")]
    pub b: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        serde_json::from_str(r#"{ "kind": "window" }"#).unwrap()
    }
}

impl WeightConfig {
    pub fn profile(&self) -> Result<Profile> {
        let name = self.profile.as_deref().unwrap_or("interval");
        Ok(match name {
            "interval" => Profile::Interval {
                lo: self.lo,
                hi: self.hi,
            },
            "bump" => Profile::Bump,
            "step_train" => Profile::StepTrain {
                period: self.period,
                duty: self.duty,
            },
            other => {
                return Err(Error::RangeViolation {
                    key: "weight.profile".into(),
                    message: format!(
                        "unknown profile `{other}` (expected interval, bump, or step_train)"
                    ),
                })
            }
        })
    }

    pub fn build(&self) -> Result<WeightSpec> {
        Ok(match self.kind.as_str() {
            "window" => WeightSpec::Window,
            "ball" => WeightSpec::Ball {
                center: self.center,
                radius: self.radius,
            },
            "tube" => WeightSpec::TubeIndicator {
                dir: self.dir,
                offset: self.offset,
                cross_section: self.cross_section,
            },
            "tensor" => WeightSpec::Tensor(TensorWeight::new(self.profile()?, self.a, self.b)?),
            other => {
                return Err(Error::RangeViolation {
                    key: "weight.kind".into(),
                    message: format!(
                        "unknown weight `{other}` (expected window, ball, tube, or tensor)"
                    ),
                })
            }
        })
    }
}

fn default_grid_l() -> f64 {
    16.0
}
fn default_grid_n() -> usize {
    256
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_grid_l")]
    pub l: f64,
    #[serde(default = "default_grid_n")]
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            l: default_grid_l(),
            n: default_grid_n(),
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec> {
        GridSpec::new(self.l, self.n)
    }
}

fn default_dtheta_deg() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    /// `slope`, `perp`, or `all`.
    pub kind: String,
    #[serde(default = "default_one")]
    pub m: f64,
    #[serde(default = "default_dir")]
    pub v: [f64; 2],
    #[serde(default = "default_dtheta_deg")]
    pub dtheta_deg: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            kind: "all".into(),
            m: 1.0,
            v: [1.0, 0.0],
            dtheta_deg: default_dtheta_deg(),
        }
    }
}

impl FamilyConfig {
    pub fn build(&self) -> Result<TubeFamily> {
        Ok(match self.kind.as_str() {
            "slope" => TubeFamily::SlopeM(self.m),
            "perp" => TubeFamily::PerpV(self.v),
            "all" => TubeFamily::All {
                dtheta: self.dtheta_deg.to_radians(),
            },
            other => {
                return Err(Error::RangeViolation {
                    key: "family.kind".into(),
                    message: format!("unknown family `{other}` (expected slope, perp, or all)"),
                })
            }
        })
    }
}

fn default_alpha() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    0.5
}
fn default_q() -> f64 {
    2.5
}
fn default_bootstrap_c0() -> f64 {
    4.0
}
fn default_k_max() -> usize {
    60
}
fn default_truncation() -> f64 {
    4.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapConfig {
    #[serde(default = "default_one")]
    pub beta0: f64,
    #[serde(default = "default_bootstrap_c0")]
    pub c0: f64,
    #[serde(default = "default_one")]
    pub m_const: f64,
    #[serde(default = "default_truncation")]
    pub truncation: f64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            beta0: 1.0,
            c0: default_bootstrap_c0(),
            m_const: 1.0,
            truncation: default_truncation(),
            k_max: default_k_max(),
        }
    }
}

fn default_gauge_min() -> f64 {
    1.0
}
fn default_gauge_max() -> f64 {
    100.0
}
fn default_samples() -> usize {
    512
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    /// `tensor_axis1`, `tensor_axis2`, `tensor_product`, or `directional`.
    pub regime: String,
    #[serde(default = "default_gauge_min")]
    pub gauge_min: f64,
    #[serde(default = "default_gauge_max")]
    pub gauge_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            regime: "directional".into(),
            gauge_min: default_gauge_min(),
            gauge_max: default_gauge_max(),
            samples: default_samples(),
        }
    }
}

impl DecayConfig {
    pub fn regime(&self) -> Result<DecayRegime> {
        Ok(match self.regime.as_str() {
            "tensor_axis1" => DecayRegime::TensorAxis1,
            "tensor_axis2" => DecayRegime::TensorAxis2,
            "tensor_product" => DecayRegime::TensorProduct,
            "directional" => DecayRegime::Directional,
            other => {
                return Err(Error::RangeViolation {
                    key: "decay.regime".into(),
                    message: format!("unknown regime `{other}`"),
                })
            }
        })
    }
}

fn default_lambda_count() -> usize {
    32
}
fn default_r_list() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0, 16.0]
}
fn default_iterations() -> usize {
    200
}
fn default_restart_every() -> usize {
    50
}
fn default_hyp_grid() -> usize {
    1000
}

/// One experiment run, fully specified.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `decay`, `functional`, `bootstrap`, `mt_ratio`, `level_set`,
    /// `local_growth`, `hypotheses`, or `search`.
    pub experiment: String,
    pub measure: Option<MeasureConfig>,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub weight: WeightConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default)]
    pub decay: DecayConfig,
    #[serde(default = "default_lambda_count")]
    pub lambda_count: usize,
    #[serde(default = "default_r_list")]
    pub r_list: Vec<f64>,
    #[serde(default = "default_hyp_grid")]
    pub hypothesis_grid: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_restart_every")]
    pub restart_every: usize,
    /// Worker cap; 0 means library default. `MTLAB_THREADS` overrides.
    #[serde(default)]
    pub threads: usize,
}

const KNOWN_EXPERIMENTS: &[&str] = &[
    "decay",
    "functional",
    "bootstrap",
    "mt_ratio",
    "level_set",
    "local_growth",
    "hypotheses",
    "search",
];

impl ExperimentConfig {
    /// Range checks beyond what the type system enforces.
    pub fn validate(&self) -> Result<()> {
        if !KNOWN_EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(Error::RangeViolation {
                key: "experiment".into(),
                message: format!(
                    "unknown experiment `{}` (expected one of {})",
                    self.experiment,
                    KNOWN_EXPERIMENTS.join(", ")
                ),
            });
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::RangeViolation {
                key: "alpha".into(),
                message: format!("need 0 < alpha <= 2, got {}", self.alpha),
            });
        }
        if !(self.beta > 0.0 && self.beta <= 2.0) {
            return Err(Error::RangeViolation {
                key: "beta".into(),
                message: format!("need 0 < beta <= 2, got {}", self.beta),
            });
        }
        if !(self.q > 0.0) {
            return Err(Error::RangeViolation {
                key: "q".into(),
                message: format!("need q > 0, got {}", self.q),
            });
        }
        if !self.grid.n.is_power_of_two() {
            return Err(Error::RangeViolation {
                key: "grid.n".into(),
                message: format!(
                    "grid resolution must be a power of two, got {}",
                    self.grid.n
                ),
            });
        }
        if !(self.grid.l > 0.0) {
            return Err(Error::RangeViolation {
                key: "grid.l".into(),
                message: format!("window half-length must be positive, got {}", self.grid.l),
            });
        }
        if let Some(m) = &self.measure {
            if m.nodes < 2 {
                return Err(Error::RangeViolation {
                    key: "measure.nodes".into(),
                    message: format!("need at least 2 nodes, got {}", m.nodes),
                });
            }
            if !(m.c > 0.0) {
                return Err(Error::RangeViolation {
                    key: "measure.c".into(),
                    message: format!("domain end must be positive, got {}", m.c),
                });
            }
        }
        if !(self.family.dtheta_deg > 0.0 && self.family.dtheta_deg <= 180.0) {
            return Err(Error::RangeViolation {
                key: "family.dtheta_deg".into(),
                message: format!(
                    "angle step must lie in (0, 180], got {}",
                    self.family.dtheta_deg
                ),
            });
        }
        Ok(())
    }

    pub fn measure_required(&self) -> Result<&MeasureConfig> {
        self.measure.as_ref().ok_or_else(|| Error::RangeViolation {
            key: "measure".into(),
            message: "this experiment needs a measure section".into(),
        })
    }
}

fn classify_serde_error(path: &str, err: serde_json::Error) -> Error {
    let msg = err.to_string();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        if let Some(end) = rest.find('`') {
            return Error::UnknownKey(rest[..end].to_string());
        }
    }
    Error::ConfigParse {
        path: path.to_string(),
        message: msg,
    }
}

/// Parses and validates a config from JSON text.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| classify_serde_error(origin, e))?;
    config.validate()?;
    Ok(config)
}

/// Loads a config file, returning the parsed config and its effective text.
pub fn load_config(path: &Path) -> Result<(ExperimentConfig, String)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let config = parse_config(&text, &path.display().to_string())?;
    Ok((config, text))
}

/// Applies dotted-path `key=value` overrides to config text, returning the
/// new effective text. Values parse as JSON scalars with string fallback.
pub fn apply_overrides(text: &str, overrides: &[(String, String)]) -> Result<String> {
    let mut root: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::ConfigParse {
            path: "<config>".into(),
            message: e.to_string(),
        })?;
    fn set_path(
        node: &mut serde_json::Value,
        parts: &[&str],
        value: serde_json::Value,
        key: &str,
    ) -> Result<()> {
        let map = node
            .as_object_mut()
            .ok_or_else(|| Error::UnknownKey(key.to_string()))?;
        match parts {
            [] => Err(Error::UnknownKey(key.to_string())),
            [last] => {
                map.insert(last.to_string(), value);
                Ok(())
            }
            [head, rest @ ..] => {
                let child = map
                    .entry(head.to_string())
                    .or_insert_with(|| serde_json::Value::Object(Default::default()));
                set_path(child, rest, value, key)
            }
        }
    }
    for (key, raw) in overrides {
        let value: serde_json::Value =
            serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.clone()));
        let parts: Vec<&str> = key.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(Error::UnknownKey(key.clone()));
        }
        set_path(&mut root, &parts, value, key)?;
    }
    serde_json::to_string_pretty(&root).map_err(|e| Error::ConfigParse {
        path: "<config>".into(),
        message: e.to_string(),
    })
}

/// A column-labeled numeric table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct ReportMetadata {
    pub grid_l: Option<f64>,
    pub grid_n: Option<usize>,
    pub grid_h: Option<f64>,
    pub node_count: Option<usize>,
    /// `(label, seconds)` wall-clock entries.
    pub timings: Vec<(String, f64)>,
}

/// Serialized record of one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Byte-exact echo of the effective config text.
    pub config_echo: String,
    pub scalars: Vec<(String, f64)>,
    pub tables: Vec<Table>,
    pub metadata: ReportMetadata,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, config_echo: impl Into<String>) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            config_echo: config_echo.into(),
            scalars: Vec::new(),
            tables: Vec::new(),
            metadata: ReportMetadata::default(),
        }
    }

    pub fn scalar(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.scalars.push((name.into(), value));
        self
    }

    pub fn get_scalar(&self, name: &str) -> Option<f64> {
        self.scalars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

fn fmt_f64(v: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format(v).to_string()
}

/// Writes `{stem}.json` plus one RFC-4180 CSV per table; returns the paths.
pub fn write_report(report: &ExperimentReport, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut written = Vec::new();
    let json_path = dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::ConfigParse {
        path: json_path.display().to_string(),
        message: e.to_string(),
    })?;
    fs::write(&json_path, json).map_err(|e| Error::io(json_path.display().to_string(), e))?;
    written.push(json_path);
    for table in &report.tables {
        let csv_path = dir.join(format!("{stem}_{}.csv", table.name));
        let mut writer = csv::Writer::from_path(&csv_path).map_err(|e| {
            Error::InvalidArgument(format!("cannot open {}: {e}", csv_path.display()))
        })?;
        writer
            .write_record(&table.columns)
            .and_then(|_| {
                for row in &table.rows {
                    writer.write_record(row.iter().map(|v| fmt_f64(*v)))?;
                }
                writer.flush()?;
                Ok(())
            })
            .map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
        written.push(csv_path);
    }
    Ok(written)
}

/// Renders every table of the report as a standalone SVG chart.
pub fn emit_plot_data(report: &ExperimentReport, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut written = Vec::new();
    for table in &report.tables {
        if table.columns.len() < 2 || table.rows.is_empty() {
            continue;
        }
        let path = dir.join(format!("{stem}_{}.svg", table.name));
        let doc = svg::line_chart(table)?;
        fs::write(&path, doc).map_err(|e| Error::io(path.display().to_string(), e))?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a report back; used by round-trip tests and downstream tooling.
pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::ConfigParse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
