use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use ruinkit_core::scale::default_x_max;
use ruinkit_core::{Grid, LevyModel};
use serde::Deserialize;

/// Version of the configuration and output formats.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format_version: u32,
    pub model: Option<LevyModel>,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub query: QueryBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub delta: Option<f64>,
    pub x_max: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryBlock {
    pub q: Option<Vec<f64>>,
    pub x: Option<Vec<f64>>,
    pub penalty: Option<String>,
    pub subsequent: Option<String>,
    pub target: Option<String>,
    pub paths: Option<u64>,
    pub seed: Option<u64>,
    /// Fixed simulation horizon `T_max`.
    pub horizon: Option<f64>,
    pub bridge_correction: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl ExperimentConfig {
    pub fn empty() -> Self {
        Self {
            format_version: FORMAT_VERSION,
            model: None,
            grid: GridBlock::default(),
            query: QueryBlock::default(),
            output: OutputBlock::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        if cfg.format_version != FORMAT_VERSION {
            bail!("format_version {} is not supported (expected {FORMAT_VERSION})", cfg.format_version);
        }
        cfg.check_finite()?;
        Ok(cfg)
    }

    fn check_finite(&self) -> Result<()> {
        let mut named: Vec<(&str, f64)> = Vec::new();
        named.extend(self.grid.delta.map(|v| ("grid.delta", v)));
        named.extend(self.grid.x_max.map(|v| ("grid.x_max", v)));
        named.extend(self.query.horizon.map(|v| ("query.horizon", v)));
        named.extend(self.query.q.iter().flatten().map(|&v| ("query.q", v)));
        named.extend(self.query.x.iter().flatten().map(|&v| ("query.x", v)));
        for (name, v) in named {
            if !v.is_finite() {
                bail!("{name}: {v} is not a finite number");
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<&LevyModel> {
        self.model.as_ref().context("missing [model] block")
    }

    /// Grid for surpluses up to `x`, honouring the `[grid]` overrides.
    pub fn grid(&self, x: f64) -> Result<Grid> {
        let model = self.model()?;
        let x_max = self.grid.x_max.unwrap_or_else(|| default_x_max(model, x));
        if x > x_max {
            bail!("grid.x_max = {x_max} is below the largest surplus {x}");
        }
        Ok(match self.grid.delta {
            None => Grid::covering(x_max)?,
            Some(delta) => {
                let n = (x_max / delta).ceil();
                if !(2.0..=1e7).contains(&n) {
                    bail!("grid.delta = {delta} gives {n} intervals on [0, {x_max}]");
                }
                let n = n as usize;
                Grid::new(delta, n + n % 2)?
            }
        })
    }
}
