//! ASCII graymap (P2) rasters.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, PointSet};
use crate::synth::Raster;

pub const BACKGROUND: u8 = 0;
pub const TRUTH: u8 = 128;
pub const ESTIMATE: u8 = 255;

/// An 8-bit grayscale image with one pixel per lattice node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn blank(lat: Lattice) -> Self {
        Self {
            width: lat.cols(),
            height: lat.rows(),
            pixels: vec![BACKGROUND; lat.len()],
        }
    }

    /// Paints every member of `set` with `level`; later layers win.
    pub fn paint(&mut self, set: &PointSet, level: u8) {
        for p in set {
            self.pixels[(p.row - 1) * self.width + (p.col - 1)] = level;
        }
    }

    /// Truth in mid-gray under the estimate in white.
    pub fn overlay(estimate: &PointSet, truth: Option<&PointSet>) -> Self {
        let mut img = Self::blank(estimate.lattice());
        if let Some(t) = truth {
            img.paint(t, TRUTH);
        }
        img.paint(estimate, ESTIMATE);
        img
    }

    /// Linear map of the raster range onto 0..=255; a constant raster is
    /// all black.
    pub fn from_raster(raster: &Raster) -> Self {
        let lo = raster.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raster
            .values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        let pixels = raster
            .values
            .iter()
            .map(|v| {
                if span > 0.0 {
                    ((v - lo) / span * 255.0).round() as u8
                } else {
                    0
                }
            })
            .collect();
        Self {
            width: raster.lattice.cols(),
            height: raster.lattice.rows(),
            pixels,
        }
    }

    pub fn levels(&self) -> Vec<u8> {
        let mut seen = [false; 256];
        for &p in &self.pixels {
            seen[p as usize] = true;
        }
        (0..=255u8).filter(|&l| seen[l as usize]).collect()
    }

    pub fn to_p2(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_p2()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_layout() {
        let lat = Lattice::new(4, 5).unwrap();
        let est = PointSet::from_points(lat, [(1, 1)]).unwrap();
        let truth = PointSet::from_points(lat, [(1, 1), (2, 2)]).unwrap();
        let img = GrayImage::overlay(&est, Some(&truth));
        let text = img.to_p2();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(&lines[..3], &["P2", "5 4", "255"]);
        assert_eq!(lines[3], "255 0 0 0 0");
        assert_eq!(lines[4], "0 128 0 0 0");
        assert_eq!(img.levels(), vec![0, 128, 255]);
    }

    #[test]
    fn empty_estimate_is_background() {
        let lat = Lattice::new(4, 4).unwrap();
        let img = GrayImage::overlay(&PointSet::empty(lat), None);
        assert_eq!(img.levels(), vec![0]);
    }
}
