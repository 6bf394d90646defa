//! Optional `--config` file: tolerance and schedule overrides. Command-line
//! flags take precedence over the file, the file over built-in defaults.

use std::path::Path;

use serde::Deserialize;

use alam::io::read_json;
use alam::Result;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub schedule: ScheduleConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub dist_tol: Option<f64>,
    pub tol_cone: Option<f64>,
    pub tol_jump: Option<f64>,
    pub tol_residual: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub max_levels: Option<usize>,
    pub dir_count: Option<usize>,
    pub n_scale: Option<usize>,
    pub n_cap: Option<usize>,
    pub max_cells: Option<usize>,
    pub min_side_rel: Option<f64>,
    pub greedy: Option<bool>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), read_json)
    }
}
