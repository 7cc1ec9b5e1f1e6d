//! Run configuration files.
//!
//! A run config is a JSON object; unknown keys anywhere are rejected and
//! every error names the JSON path it occurred at. The manifest written by
//! `simulate` is itself a run config with all paths made absolute, so it can
//! be fed back to reproduce the run.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use viscompm::calibrate::ParamVector;
use viscompm::mpm::SimConfig;
use viscompm::scene::SceneSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneSpec,
    pub sim: SimConfig,
    pub frames: usize,
    pub output_dir: PathBuf,
    /// Seeds the interior fill, when the scene has one.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    /// Maximum number of trial simulations.
    pub budget: usize,
    pub theta0: ParamVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_dir: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub frames: Option<usize>,
    pub deterministic: Option<bool>,
}

pub fn parse(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow::anyhow!("at `{path}`: {}", e.into_inner())
    })
}

fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).with_context(|| format!("cannot resolve {}", p.display()))
}

impl RunConfig {
    /// Reads `path`, applies `overrides` and makes every path absolute.
    /// Relative paths in the file are taken relative to the file itself.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut cfg = parse(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = absolute(path)?.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.scene.resolve_paths(&base);
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let Some(c) = &mut cfg.calibration {
            if let Some(r) = &mut c.reference_dir {
                if r.is_relative() {
                    *r = base.join(&*r);
                }
            }
        }
        if let Some(dir) = &overrides.output_dir {
            cfg.output_dir = absolute(dir)?;
        }
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(frames) = overrides.frames {
            cfg.frames = frames;
        }
        if let Some(d) = overrides.deterministic {
            cfg.sim.deterministic = d;
        }
        if let Some(fill) = &mut cfg.scene.fill {
            fill.seed = cfg.seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate().context("at `sim`")?;
        self.scene.validate(&self.sim).context("at `scene`")?;
        if let Some(c) = &self.calibration {
            c.theta0.validate().context("at `calibration.theta0`")?;
            if c.theta0.is_empty() {
                bail!("at `calibration.theta0`: no parameters to calibrate");
            }
        }
        Ok(())
    }
}
