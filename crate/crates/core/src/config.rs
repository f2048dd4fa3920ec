//! `key = value` configuration files for scenarios and experiment grids.
//!
//! ```text
//! # start from a built-in scenario, then override
//! preset = rectangle
//! frames = 500
//! sigma2 = 0.5
//! shape = inf 100/3 50 50 drift_plus_alt
//! rules = 4:1, 6:2
//! gammas = 0, 0.3
//! ```
//!
//! `shape` may repeat; the first `shape` line replaces the preset's shapes.

use std::fs;
use std::path::Path;

use crate::connect::Mode;
use crate::cusum::Gamma;
use crate::error::{Error, Result};
use crate::experiment::ExperimentGrid;
use crate::lattice::{Lattice, Point};
use crate::scan::OverlapRule;
use crate::synth::{MeanGenerator, NoiseSpec, Scenario, ShapeBlock, ShapeSpec};

/// Grid axes set in a file; unset axes fall back to a default grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridOverrides {
    pub d_values: Option<Vec<usize>>,
    pub rules: Option<Vec<OverlapRule>>,
    pub gammas: Option<Vec<Gamma>>,
    pub modes: Option<Vec<Mode>>,
    pub reps: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub scenario: Scenario,
    pub seed: u64,
    pub grid: GridOverrides,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            scenario: Scenario::rectangle(1000),
            seed: 0,
            grid: GridOverrides::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut rows = cfg.scenario.lattice.rows();
        let mut cols = cfg.scenario.lattice.cols();
        let mut sigma2 = Some(cfg.scenario.noise.sigma2());
        let mut shapes: Option<Vec<ShapeBlock>> = None;

        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::parse(origin, line_no, msg);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: &dyn std::fmt::Display| err(format!("{key}: {e}"));
            match key {
                "preset" => {
                    cfg.scenario = match value {
                        "rectangle" => Scenario::rectangle(cfg.scenario.frames),
                        "diamond_and_round" | "two_shapes" => {
                            Scenario::diamond_and_round(cfg.scenario.frames)
                        }
                        other => return Err(err(format!("unknown preset `{other}`"))),
                    };
                    rows = cfg.scenario.lattice.rows();
                    cols = cfg.scenario.lattice.cols();
                    sigma2 = Some(cfg.scenario.noise.sigma2());
                    shapes = None;
                }
                "rows" => rows = value.parse().map_err(|e| bad(&e))?,
                "cols" => cols = value.parse().map_err(|e| bad(&e))?,
                "frames" => cfg.scenario.frames = value.parse().map_err(|e| bad(&e))?,
                "seed" => cfg.seed = value.parse().map_err(|e| bad(&e))?,
                "sigma2" => sigma2 = Some(value.parse().map_err(|e| bad(&e))?),
                "noise" => match value {
                    "on" => {}
                    "off" => sigma2 = None,
                    other => {
                        return Err(err(format!("noise must be `on` or `off`, got `{other}`")))
                    }
                },
                "background" => {
                    cfg.scenario.background = value.parse().map_err(|e: Error| bad(&e))?
                }
                "shape" => {
                    let block = parse_shape(value).map_err(|e| bad(&e))?;
                    shapes.get_or_insert_with(Vec::new).push(block);
                }
                "d_values" => {
                    cfg.grid.d_values = Some(list(value, |s| s.parse().map_err(|e| bad(&e)))?)
                }
                "rules" => {
                    cfg.grid.rules = Some(list(value, |s| parse_rule(s).map_err(|e| bad(&e)))?)
                }
                "gammas" => {
                    cfg.grid.gammas = Some(list(value, |s| {
                        let g: f64 = s.parse().map_err(|e| bad(&e))?;
                        Gamma::new(g).map_err(|e| bad(&e))
                    })?)
                }
                "modes" => {
                    cfg.grid.modes = Some(list(value, |s| s.parse().map_err(|e: Error| bad(&e)))?)
                }
                "reps" => cfg.grid.reps = Some(value.parse().map_err(|e| bad(&e))?),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }

        cfg.scenario.lattice =
            Lattice::new(rows, cols).map_err(|e| Error::parse(origin, 0, e.to_string()))?;
        if let Some(shapes) = shapes {
            cfg.scenario.shapes = shapes;
        }
        cfg.scenario.noise = match sigma2 {
            Some(s) => NoiseSpec::gaussian(s, cfg.seed)
                .map_err(|e| Error::parse(origin, 0, e.to_string()))?,
            None => NoiseSpec::disabled(),
        };
        // surface shape/lattice mismatches at load time
        cfg.scenario
            .partition()
            .map_err(|e| Error::parse(origin, 0, e.to_string()))?;
        Ok(cfg)
    }

    /// The default grid with this file's overrides applied.
    pub fn grid(&self, full: bool) -> ExperimentGrid {
        let mut g = if full {
            ExperimentGrid::full(self.seed)
        } else {
            ExperimentGrid::desk(self.seed)
        };
        let o = self.grid.clone();
        if let Some(v) = o.d_values {
            g.d_values = v;
        }
        if let Some(v) = o.rules {
            g.rules = v;
        }
        if let Some(v) = o.gammas {
            g.gammas = v;
        }
        if let Some(v) = o.modes {
            g.modes = v;
        }
        if let Some(v) = o.reps {
            g.reps = v;
        }
        g
    }
}

fn list<T>(value: &str, f: impl FnMut(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect()
}

/// `N:Q` or `N,Q`.
pub fn parse_rule(s: &str) -> Result<OverlapRule> {
    let (n, q) = s
        .split_once([':', ','])
        .ok_or_else(|| Error::domain(format!("rule must look like N:Q, got `{s}`")))?;
    let n = n
        .trim()
        .parse()
        .map_err(|_| Error::domain(format!("bad window in `{s}`")))?;
    let q = q
        .trim()
        .parse()
        .map_err(|_| Error::domain(format!("bad run length in `{s}`")))?;
    OverlapRule::new(n, q)
}

/// `<norm> <radius> <row> <col> <generator>`.
fn parse_shape(value: &str) -> Result<ShapeBlock> {
    let fields: Vec<&str> = value.split_whitespace().collect();
    let [norm, radius, row, col, gen] = fields[..] else {
        return Err(Error::domain(
            "expected `<norm> <radius> <row> <col> <generator>`",
        ));
    };
    let coord = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::domain(format!("bad coordinate `{s}`")))
    };
    Ok(ShapeBlock {
        shape: ShapeSpec {
            norm: norm.parse()?,
            radius: radius.parse()?,
            center: Point::new(coord(row)?, coord(col)?),
        },
        means: gen.parse::<MeanGenerator>()?,
    })
}
