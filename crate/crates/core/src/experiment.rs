//! Monte-Carlo harness: repeated generate → estimate → score runs and
//! their aggregation into tables of expected Jaccard distances.
//!
//! Every trial draws its data from a seed mixed from the base seed and the
//! trial index, so cells and trials can run in any order, on any number of
//! threads, with identical output.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::connect::{estimate_detailed, estimate_from_fields, split_components, Mode};
use crate::cusum::Gamma;
use crate::error::{Error, Result};
use crate::lattice::{jaccard_distance, PointSet};
use crate::pgm::GrayImage;
use crate::scan::{scan, OverlapRule, ScanField};
use crate::slicing::{FrameSequence, Orientation};
use crate::synth::{frame_average, Scenario};

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Noise seed of trial `trial` under `base`.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    mix(base ^ mix(trial))
}

/// Score of one estimate against the truth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOutcome {
    pub jaccard: f64,
    pub exact: bool,
}

pub fn score(estimate: &PointSet, truth: &PointSet) -> TrialOutcome {
    TrialOutcome {
        jaccard: jaccard_distance(estimate, truth),
        exact: estimate == truth,
    }
}

/// One draw of `scenario` (with its configured frame count), estimated and
/// scored.
pub fn run_trial(
    scenario: &Scenario,
    mode: Mode,
    rule: OverlapRule,
    gamma: Gamma,
    seed: u64,
) -> Result<TrialOutcome> {
    let truth = scenario.truth()?;
    let data = scenario.generate(seed, scenario.frames)?;
    let est = estimate_detailed(&data, mode, rule, gamma)?;
    Ok(score(&est.set, &truth))
}

/// Aggregate over the trials of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellResult {
    /// Mean Jaccard distance.
    pub mean: f64,
    /// `s / sqrt(R)`; zero for a single trial.
    pub stderr: f64,
    /// Fraction of trials with an exact estimate.
    pub exact_freq: f64,
    pub reps: usize,
}

impl CellResult {
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        let reps = outcomes.len();
        let n = reps as f64;
        let mean = outcomes.iter().map(|o| o.jaccard).sum::<f64>() / n;
        let stderr = if reps > 1 {
            let var = outcomes
                .iter()
                .map(|o| (o.jaccard - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        let exact_freq = outcomes.iter().filter(|o| o.exact).count() as f64 / n;
        Self {
            mean,
            stderr,
            exact_freq,
            reps,
        }
    }
}

/// `reps` trials of one configuration with `d` frames.
pub fn run_cell(
    scenario: &Scenario,
    mode: Mode,
    rule: OverlapRule,
    gamma: Gamma,
    d: usize,
    reps: usize,
    base_seed: u64,
) -> Result<CellResult> {
    if reps == 0 {
        return Err(Error::domain("a cell needs at least one repetition"));
    }
    let scenario = Scenario {
        frames: d,
        ..scenario.clone()
    };
    let outcomes = (0..reps as u64)
        .into_par_iter()
        .map(|t| run_trial(&scenario, mode, rule, gamma, trial_seed(base_seed, t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CellResult::from_outcomes(&outcomes))
}

/// Axes of a results table.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentGrid {
    pub d_values: Vec<usize>,
    pub rules: Vec<OverlapRule>,
    pub gammas: Vec<Gamma>,
    pub modes: Vec<Mode>,
    pub reps: usize,
    pub base_seed: u64,
}

fn rules(pairs: &[(usize, usize)]) -> Vec<OverlapRule> {
    pairs
        .iter()
        .map(|&(n, q)| OverlapRule::new(n, q).expect("static rule"))
        .collect()
}

fn gammas(values: &[f64]) -> Vec<Gamma> {
    values
        .iter()
        .map(|&g| Gamma::new(g).expect("static gamma"))
        .collect()
}

impl ExperimentGrid {
    /// A trimmed grid: two rules, three sensitivities, three frame counts.
    pub fn desk(base_seed: u64) -> Self {
        Self {
            d_values: vec![100, 500, 1000],
            rules: rules(&[(4, 1), (6, 2)]),
            gammas: gammas(&[0.0, 0.2, 0.3]),
            modes: vec![Mode::Horizontal, Mode::Both],
            reps: 100,
            base_seed,
        }
    }

    /// Four rules × five sensitivities × five frame counts.
    pub fn full(base_seed: u64) -> Self {
        Self {
            d_values: vec![100, 200, 300, 500, 1000],
            rules: rules(&[(4, 1), (4, 2), (6, 2), (6, 4)]),
            gammas: gammas(&[0.0, 0.1, 0.2, 0.3, 0.4]),
            modes: vec![Mode::Horizontal, Mode::Both],
            reps: 100,
            base_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::domain("grid needs at least one repetition"));
        }
        if self.d_values.is_empty()
            || self.rules.is_empty()
            || self.gammas.is_empty()
            || self.modes.is_empty()
        {
            return Err(Error::domain("every grid axis needs at least one value"));
        }
        if self.d_values.contains(&0) {
            return Err(Error::domain("frame counts must be positive"));
        }
        Ok(())
    }

    /// Cells for one frame count, in output order: rule, then γ, then mode.
    fn cells(&self) -> Vec<(OverlapRule, Gamma, Mode)> {
        let mut out = Vec::new();
        for &rule in &self.rules {
            for &gamma in &self.gammas {
                for &mode in &self.modes {
                    out.push((rule, gamma, mode));
                }
            }
        }
        out
    }
}

/// One row of a results table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellRecord {
    pub rule: OverlapRule,
    pub gamma: Gamma,
    pub d: usize,
    pub mode: Mode,
    pub result: CellResult,
}

pub const CSV_HEADER: &str = "rule_N,rule_Q,gamma,d,mode,mean,stderr,exact_freq";

impl CellRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6}",
            self.rule.window(),
            self.rule.run(),
            self.gamma,
            self.d,
            self.mode,
            self.result.mean,
            self.result.stderr,
            self.result.exact_freq
        )
    }
}

/// Scores every cell of `grid` on one dataset. Scans are shared between
/// cells with the same window and γ.
fn trial_outcomes(
    data: &FrameSequence,
    truth: &PointSet,
    grid: &ExperimentGrid,
    cells: &[(OverlapRule, Gamma, Mode)],
) -> Result<Vec<TrialOutcome>> {
    let lat = data.lattice();
    let wants = |o: Orientation| grid.modes.iter().any(|m| m.uses(o));
    let mut fields: Vec<(usize, Gamma, Option<ScanField>, Option<ScanField>)> = Vec::new();
    for &(rule, gamma, _) in cells {
        let n = rule.window();
        if fields
            .iter()
            .any(|(fn_, fg, _, _)| *fn_ == n && *fg == gamma)
        {
            continue;
        }
        let field = |o| -> Result<Option<ScanField>> {
            if wants(o) {
                scan(data, o, n, gamma).map(Some)
            } else {
                Ok(None)
            }
        };
        fields.push((
            n,
            gamma,
            field(Orientation::Horizontal)?,
            field(Orientation::Vertical)?,
        ));
    }
    cells
        .iter()
        .map(|&(rule, gamma, mode)| {
            let (_, _, h, v) = fields
                .iter()
                .find(|(n, g, _, _)| *n == rule.window() && *g == gamma)
                .expect("field computed above");
            let est = estimate_from_fields(lat, h.as_ref(), v.as_ref(), mode, rule)?;
            Ok(score(&est.set, truth))
        })
        .collect()
}

/// Fills every cell of `grid` and streams CSV rows to `out`, flushing after
/// each frame count.
///
/// Within a frame count all cells are scored on the same draws, so the
/// horizontal and combined columns compare estimators on identical data.
/// Trial `t` always uses `trial_seed(base_seed, t)`, which makes each cell
/// agree with [`run_cell`] on the same seed.
pub fn run_table(
    grid: &ExperimentGrid,
    scenario: &Scenario,
    out: &mut impl Write,
) -> Result<Vec<CellRecord>> {
    grid.validate()?;
    let truth = scenario.truth()?;
    let cells = grid.cells();
    let io = |e| Error::io("<table output>", e);
    writeln!(out, "{CSV_HEADER}").map_err(io)?;
    let mut records = Vec::new();
    for &d in &grid.d_values {
        let per_trial = (0..grid.reps as u64)
            .into_par_iter()
            .map(|t| {
                let data = scenario.generate(trial_seed(grid.base_seed, t), d)?;
                trial_outcomes(&data, &truth, grid, &cells)
            })
            .collect::<Result<Vec<_>>>()?;
        for (c, &(rule, gamma, mode)) in cells.iter().enumerate() {
            let outcomes: Vec<TrialOutcome> = per_trial.iter().map(|t| t[c]).collect();
            let record = CellRecord {
                rule,
                gamma,
                d,
                mode,
                result: CellResult::from_outcomes(&outcomes),
            };
            writeln!(out, "{}", record.csv_row()).map_err(io)?;
            records.push(record);
        }
        out.flush().map_err(io)?;
    }
    Ok(records)
}

/// Jaccard distance of each truth component to the estimate components
/// that overlap it.
pub fn component_scores(estimate: &PointSet, truth_components: &[PointSet]) -> Result<Vec<f64>> {
    let pieces = split_components(estimate);
    truth_components
        .iter()
        .map(|t| {
            let mut matched = PointSet::empty(t.lattice());
            for piece in pieces.iter().filter(|p| p.intersection_len(t) > 0) {
                matched.union_with(piece)?;
            }
            Ok(jaccard_distance(&matched, t))
        })
        .collect()
}

/// What to draw in [`render_figure`].
#[derive(Clone, Debug, Default)]
pub struct FigureInputs<'a> {
    pub truth: Option<&'a PointSet>,
    pub relevant: Option<&'a PointSet>,
    pub estimate: Option<&'a PointSet>,
    pub frames: Option<&'a FrameSequence>,
}

/// Writes `<stem>_relevant.pgm`, `<stem>_estimate.pgm` and
/// `<stem>_average.pgm` for whichever inputs are present, with the truth
/// (if given) in mid-gray underneath. Returns the written paths.
pub fn render_figure(inputs: &FigureInputs<'_>, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, img: GrayImage| -> Result<()> {
        let path = dir.join(format!("{stem}_{name}.pgm"));
        img.save(&path)?;
        written.push(path);
        Ok(())
    };
    for (name, set) in [("relevant", inputs.relevant), ("estimate", inputs.estimate)] {
        if let Some(set) = set {
            emit(name, GrayImage::overlay(set, inputs.truth))?;
        }
    }
    if inputs.relevant.is_none() && inputs.estimate.is_none() {
        if let Some(truth) = inputs.truth {
            let mut img = GrayImage::blank(truth.lattice());
            img.paint(truth, crate::pgm::ESTIMATE);
            emit("truth", img)?;
        }
    }
    if let Some(seq) = inputs.frames {
        emit("average", GrayImage::from_raster(&frame_average(seq)))?;
    }
    Ok(written)
}
