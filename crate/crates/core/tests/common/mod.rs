#![allow(dead_code)]

use changeset::lattice::{Lattice, Point, PointSet};
use changeset::slicing::FrameSequence;
use changeset::synth::{generate, MeanGenerator, MeanModel, NoiseSpec};
use changeset::{Gamma, Partition};

/// Weighted CUSUM straight from its definition: for every split `p` the
/// centred partial sums are rebuilt from scratch.
pub fn oracle_statistic(y: &[Vec<f64>], p: usize, gamma: f64) -> f64 {
    let n = y.len();
    let panels = y[0].len();
    let t = p as f64 / n as f64;
    let w = (t * (1.0 - t)).powf(-gamma);
    let mut norm2 = 0.0;
    for k in 0..panels {
        let mut mean = 0.0;
        for row in y {
            mean += row[k];
        }
        mean /= n as f64;
        let mut s = 0.0;
        for row in &y[..p] {
            s += row[k] - mean;
        }
        norm2 += s * s;
    }
    w * norm2.sqrt()
}

/// Smallest maximizer of [`oracle_statistic`].
pub fn oracle_argmax(y: &[Vec<f64>], gamma: f64) -> usize {
    let mut best = (1, f64::NEG_INFINITY);
    for p in 1..y.len() {
        let s = oracle_statistic(y, p, gamma);
        if s > best.1 {
            best = (p, s);
        }
    }
    best.0
}

pub fn gamma(g: f64) -> Gamma {
    Gamma::new(g).unwrap()
}

/// A 14×20 fragment with a convex blob spanning rows 4..=11.
pub fn fragment() -> PointSet {
    let lat = Lattice::new(14, 20).unwrap();
    let spans = [
        (4, 8, 13),
        (5, 7, 14),
        (6, 6, 15),
        (7, 5, 16),
        (8, 5, 16),
        (9, 5, 16),
        (10, 6, 15),
        (11, 7, 14),
    ];
    let pts = spans
        .iter()
        .flat_map(|&(r, a, b)| (a..=b).map(move |c| Point::new(r, c)));
    PointSet::from_points(lat, pts).unwrap()
}

/// Data with background mean `k` and mean `k + (-1)^k` on `truth`.
pub fn two_block_data(truth: &PointSet, noise: NoiseSpec, frames: usize) -> FrameSequence {
    let lat = truth.lattice();
    let background =
        PointSet::from_points(lat, lat.points().filter(|p| !truth.contains(*p))).unwrap();
    let partition = Partition::new(lat, vec![background, truth.clone()]).unwrap();
    let means = MeanModel::new(vec![MeanGenerator::Drift, MeanGenerator::DriftPlusAlt]);
    generate(&partition, &means, &noise, frames).unwrap()
}

pub fn points(lat: Lattice, pts: &[(usize, usize)]) -> PointSet {
    PointSet::from_points(lat, pts.iter().copied()).unwrap()
}
