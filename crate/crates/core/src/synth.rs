//! Synthetic ground truth and data: p-norm balls as change sets,
//! per-block mean sequences and i.i.d. Gaussian noise.
//!
//! Noise is drawn from ChaCha8 keyed by `(seed, frame, row, column)`: the
//! stream is the frame index and the word position encodes the pixel, so
//! any value can be regenerated independently of the order in which frames
//! or rows are produced.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Partition, Point, PointSet};
use crate::slicing::FrameSequence;

/// The norm defining a ball-shaped change set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    /// Diamond-shaped sets.
    L1,
    /// Round sets.
    L2,
    /// Rectangular sets.
    Max,
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "l1" | "diamond" => Ok(Norm::L1),
            "2" | "l2" | "round" => Ok(Norm::L2),
            "inf" | "max" | "rect" => Ok(Norm::Max),
            other => Err(Error::domain(format!(
                "unknown norm {other:?} (expected 1, 2 or inf)"
            ))),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "1",
            Norm::L2 => "2",
            Norm::Max => "inf",
        })
    }
}

/// A positive rational radius `num / den`, so that thresholds such as
/// `100/3` are compared exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Radius {
    num: u64,
    den: u64,
}

impl Radius {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::domain(format!(
                "radius {num}/{den} must be positive"
            )));
        }
        Ok(Self { num, den })
    }

    pub fn floor(&self) -> u64 {
        self.num / self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl FromStr for Radius {
    type Err = Error;

    /// Accepts `a/b`, integers and plain decimals such as `16.5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("bad radius {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            return Radius::new(
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            );
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        Radius::new(int * den + frac, den)
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// The set `{u : ||u - center||_p <= radius}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShapeSpec {
    pub norm: Norm,
    pub radius: Radius,
    pub center: Point,
}

impl ShapeSpec {
    fn contains_offset(&self, di: u64, dj: u64) -> bool {
        let Radius { num, den } = self.radius;
        let (num, den) = (num as u128, den as u128);
        let (a, b) = (di as u128, dj as u128);
        match self.norm {
            Norm::L1 => (a + b) * den <= num,
            Norm::L2 => (a * a + b * b) * den * den <= num * num,
            Norm::Max => a.max(b) * den <= num,
        }
    }
}

/// All lattice points within the ball. Fails if the ball would reach
/// outside the lattice.
pub fn make_shape(spec: &ShapeSpec, lat: Lattice) -> Result<PointSet> {
    lat.check(spec.center)?;
    let reach = spec.radius.floor() as usize;
    let v = spec.center;
    if v.row <= reach || v.col <= reach || v.row + reach > lat.rows() || v.col + reach > lat.cols()
    {
        return Err(Error::domain(format!(
            "shape of radius {} at {v} does not fit a {}x{} lattice",
            spec.radius,
            lat.rows(),
            lat.cols()
        )));
    }
    let mut set = PointSet::empty(lat);
    for i in v.row - reach..=v.row + reach {
        for j in v.col - reach..=v.col + reach {
            if spec.contains_offset(i.abs_diff(v.row) as u64, j.abs_diff(v.col) as u64) {
                set.insert(Point::new(i, j))?;
            }
        }
    }
    Ok(set)
}

/// A mean sequence `m_k`, `k = 1, 2, …`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeanGenerator {
    /// `m_k = k`
    Drift,
    /// `m_k = k + (-1)^k`
    DriftPlusAlt,
    /// `m_k = k - (-1)^k`
    DriftMinusAlt,
    /// `m_k = 0`
    Zero,
    /// `m_k = (-1)^k`
    Alt,
    /// `m_k = c`
    Const(f64),
}

impl MeanGenerator {
    pub fn value(&self, k: usize) -> f64 {
        let alt = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let k = k as f64;
        match *self {
            MeanGenerator::Drift => k,
            MeanGenerator::DriftPlusAlt => k + alt,
            MeanGenerator::DriftMinusAlt => k - alt,
            MeanGenerator::Zero => 0.0,
            MeanGenerator::Alt => alt,
            MeanGenerator::Const(c) => c,
        }
    }
}

impl FromStr for MeanGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "drift" => MeanGenerator::Drift,
            "drift_plus_alt" => MeanGenerator::DriftPlusAlt,
            "drift_minus_alt" => MeanGenerator::DriftMinusAlt,
            "zero" => MeanGenerator::Zero,
            "alt" => MeanGenerator::Alt,
            other => {
                let c = other
                    .strip_prefix("const(")
                    .and_then(|rest| rest.strip_suffix(')'))
                    .and_then(|c| c.trim().parse::<f64>().ok())
                    .filter(|c| c.is_finite())
                    .ok_or_else(|| Error::domain(format!("unknown mean generator {other:?}")))?;
                MeanGenerator::Const(c)
            }
        })
    }
}

impl fmt::Display for MeanGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanGenerator::Drift => f.write_str("drift"),
            MeanGenerator::DriftPlusAlt => f.write_str("drift_plus_alt"),
            MeanGenerator::DriftMinusAlt => f.write_str("drift_minus_alt"),
            MeanGenerator::Zero => f.write_str("zero"),
            MeanGenerator::Alt => f.write_str("alt"),
            MeanGenerator::Const(c) => write!(f, "const({c})"),
        }
    }
}

/// One mean generator per partition block.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanModel {
    pub blocks: Vec<MeanGenerator>,
}

impl MeanModel {
    pub fn new(blocks: Vec<MeanGenerator>) -> Self {
        Self { blocks }
    }

    pub fn mean(&self, block: usize, k: usize) -> f64 {
        self.blocks[block].value(k)
    }
}

/// `(1/d) sum_{k<=d} (m_k(a) - m_k(b))^2`.
pub fn total_average_change(means: &MeanModel, block_a: usize, block_b: usize, d: usize) -> f64 {
    if d == 0 {
        return 0.0;
    }
    let sum: f64 = (1..=d)
        .map(|k| {
            let delta = means.mean(block_a, k) - means.mean(block_b, k);
            delta * delta
        })
        .sum();
    sum / d as f64
}

/// `sigma² / (N · Δ²)`.
pub fn noise_to_change_ratio(sigma2: f64, delta2: f64, window: usize) -> Result<f64> {
    if !(delta2 > 0.0 && delta2.is_finite()) {
        return Err(Error::domain(format!(
            "total average change must be positive and finite, got {delta2}"
        )));
    }
    if window < 4 {
        return Err(Error::domain(format!(
            "window must be at least 4, got {window}"
        )));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::domain(format!("bad noise variance {sigma2}")));
    }
    Ok(sigma2 / (window as f64 * delta2))
}

/// I.i.d. centred Gaussian noise with variance `sigma2`, or no noise at
/// all when disabled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    sigma2: f64,
    seed: u64,
    enabled: bool,
}

impl NoiseSpec {
    pub fn gaussian(sigma2: f64, seed: u64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::domain(format!(
                "noise variance must be positive and finite, got {sigma2}"
            )));
        }
        Ok(Self {
            sigma2,
            seed,
            enabled: true,
        })
    }

    pub fn disabled() -> Self {
        Self {
            sigma2: 0.0,
            seed: 0,
            enabled: false,
        }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Box–Muller on two 64-bit words.
fn gaussian_pair(a: u64, b: u64) -> (f64, f64) {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((a >> 11) as f64 + 1.0) * SCALE;
    let u2 = (b >> 11) as f64 * SCALE;
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

/// Standard normal draws `z_k(i, j)` for one row of one frame.
fn noise_row(base: &ChaCha8Rng, k: usize, row: usize, cols: usize, out: &mut [f64]) {
    let pairs = cols.div_ceil(2);
    let mut rng = base.clone();
    rng.set_stream(k as u64);
    // two u64 per pair, i.e. four 32-bit words
    rng.set_word_pos(((row - 1) * pairs * 4) as u128);
    for p in 0..pairs {
        let (z0, z1) = gaussian_pair(rng.next_u64(), rng.next_u64());
        out[2 * p] = z0;
        if 2 * p + 1 < cols {
            out[2 * p + 1] = z1;
        }
    }
}

/// `X_k(i, j) = m_k(block(i, j)) + eps_k(i, j)` for `k = 1..=frames`.
///
/// Rows are generated in parallel; the output is bit-identical for any
/// schedule.
pub fn generate(
    partition: &Partition,
    means: &MeanModel,
    noise: &NoiseSpec,
    frames: usize,
) -> Result<FrameSequence> {
    let lat = partition.lattice();
    if means.blocks.len() != partition.len() {
        return Err(Error::domain(format!(
            "{} mean generators for {} blocks",
            means.blocks.len(),
            partition.len()
        )));
    }
    if frames == 0 {
        return Err(Error::domain("need at least one frame"));
    }
    let (rows, cols) = (lat.rows(), lat.cols());
    let table: Vec<Vec<f64>> = means
        .blocks
        .iter()
        .map(|g| (1..=frames).map(|k| g.value(k)).collect())
        .collect();
    let labels = partition.labels();
    let sigma = noise.sigma2.sqrt();
    let base = ChaCha8Rng::seed_from_u64(noise.seed);

    let mut data = vec![0.0; rows * cols * frames];
    data.par_chunks_mut(cols * frames)
        .enumerate()
        .for_each(|(r, chunk)| {
            let i = r + 1;
            for (j, px) in chunk.chunks_exact_mut(frames).enumerate() {
                px.copy_from_slice(&table[labels[r * cols + j]]);
            }
            if noise.enabled {
                let mut z = vec![0.0; cols];
                for k in 1..=frames {
                    noise_row(&base, k, i, cols, &mut z);
                    for (j, zj) in z.iter().enumerate() {
                        chunk[j * frames + k - 1] += sigma * zj;
                    }
                }
            }
        });
    FrameSequence::from_pixel_major(lat, frames, data)
}

/// A real-valued `rows × cols` image, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    pub lattice: Lattice,
    pub values: Vec<f64>,
}

impl Raster {
    pub fn get(&self, p: Point) -> f64 {
        self.values[self.lattice.index(p)]
    }
}

/// Pointwise mean over all frames.
pub fn frame_average(seq: &FrameSequence) -> Raster {
    let lat = seq.lattice();
    let values = lat
        .points()
        .map(|p| seq.pixel(p).iter().sum::<f64>() / seq.frames() as f64)
        .collect();
    Raster {
        lattice: lat,
        values,
    }
}

/// A shape together with the mean sequence inside it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeBlock {
    pub shape: ShapeSpec,
    pub means: MeanGenerator,
}

/// A complete synthetic design: lattice, change sets, means and noise.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub lattice: Lattice,
    pub background: MeanGenerator,
    pub shapes: Vec<ShapeBlock>,
    pub noise: NoiseSpec,
    pub frames: usize,
}

impl Scenario {
    /// 100×100 domain with a rectangle of radius 100/3 at (50,50); the
    /// background drifts as `k`, the rectangle as `k + (-1)^k`; σ² = 2.
    pub fn rectangle(frames: usize) -> Self {
        Self {
            lattice: Lattice::new(100, 100).expect("static dimensions"),
            background: MeanGenerator::Drift,
            shapes: vec![ShapeBlock {
                shape: ShapeSpec {
                    norm: Norm::Max,
                    radius: Radius { num: 100, den: 3 },
                    center: Point::new(50, 50),
                },
                means: MeanGenerator::DriftPlusAlt,
            }],
            noise: NoiseSpec {
                sigma2: 2.0,
                seed: 0,
                enabled: true,
            },
            frames,
        }
    }

    /// 100×100 domain with a diamond at (35,35) and a round set at (65,65),
    /// both of radius 100/6; σ² = 1. The diamond moves as `k + (-1)^k`, the
    /// round set as `k - (-1)^k`, the background as `k`.
    pub fn diamond_and_round(frames: usize) -> Self {
        let radius = Radius { num: 100, den: 6 };
        Self {
            lattice: Lattice::new(100, 100).expect("static dimensions"),
            background: MeanGenerator::Drift,
            shapes: vec![
                ShapeBlock {
                    shape: ShapeSpec {
                        norm: Norm::L1,
                        radius,
                        center: Point::new(35, 35),
                    },
                    means: MeanGenerator::DriftPlusAlt,
                },
                ShapeBlock {
                    shape: ShapeSpec {
                        norm: Norm::L2,
                        radius,
                        center: Point::new(65, 65),
                    },
                    means: MeanGenerator::DriftMinusAlt,
                },
            ],
            noise: NoiseSpec {
                sigma2: 1.0,
                seed: 0,
                enabled: true,
            },
            frames,
        }
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Self {
        self.noise = noise;
        self
    }

    /// The change sets, one per shape.
    pub fn shape_sets(&self) -> Result<Vec<PointSet>> {
        self.shapes
            .iter()
            .map(|s| make_shape(&s.shape, self.lattice))
            .collect()
    }

    /// Union of all change sets.
    pub fn truth(&self) -> Result<PointSet> {
        let mut truth = PointSet::empty(self.lattice);
        for s in self.shape_sets()? {
            truth.union_with(&s)?;
        }
        Ok(truth)
    }

    /// Background block first, then one block per shape.
    pub fn partition(&self) -> Result<Partition> {
        if self.shapes.is_empty() {
            return Ok(Partition::whole(self.lattice));
        }
        let sets = self.shape_sets()?;
        let truth = self.truth()?;
        let background = PointSet::from_points(
            self.lattice,
            self.lattice.points().filter(|p| !truth.contains(*p)),
        )?;
        let mut blocks = vec![background];
        blocks.extend(sets);
        Partition::new(self.lattice, blocks)
    }

    pub fn mean_model(&self) -> MeanModel {
        let mut blocks = vec![self.background];
        blocks.extend(self.shapes.iter().map(|s| s.means));
        MeanModel::new(blocks)
    }

    /// Draws the scenario's data with `seed` and `frames` frames.
    pub fn generate(&self, seed: u64, frames: usize) -> Result<FrameSequence> {
        let partition = self.partition()?;
        let noise = self.noise.with_seed(seed);
        generate(&partition, &self.mean_model(), &noise, frames)
    }
}
