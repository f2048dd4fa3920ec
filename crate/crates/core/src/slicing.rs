//! Frame sequences and the row/column sub-slices cut from them.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::cusum::{PanelSeries, MIN_LEN};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Point, PointSet};

/// Magic bytes opening a binary frame file.
pub const FRAME_MAGIC: [u8; 4] = *b"CSF1";

/// `d` real-valued `rows × cols` frames.
///
/// Values are stored pixel-major (all frames of pixel `(1,1)`, then of
/// `(1,2)`, ...) so that every sub-slice step is one contiguous run.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence {
    lattice: Lattice,
    frames: usize,
    data: Vec<f64>,
}

impl FrameSequence {
    /// Builds a sequence from `frames` functions values `f(k, i, j)`, all
    /// indices 1-based.
    pub fn from_fn(
        lattice: Lattice,
        frames: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(lattice.len() * frames);
        for p in lattice.points() {
            for k in 1..=frames {
                data.push(f(k, p.row, p.col));
            }
        }
        Self::from_pixel_major(lattice, frames, data)
    }

    /// Builds a sequence from row-major frames.
    pub fn from_frames(lattice: Lattice, frames: &[Vec<f64>]) -> Result<Self> {
        if let Some(bad) = frames.iter().position(|f| f.len() != lattice.len()) {
            return Err(Error::domain(format!(
                "frame {} has {} values, expected {}",
                bad + 1,
                frames[bad].len(),
                lattice.len()
            )));
        }
        let cols = lattice.cols();
        Self::from_fn(lattice, frames.len(), |k, i, j| {
            frames[k - 1][(i - 1) * cols + (j - 1)]
        })
    }

    pub(crate) fn from_pixel_major(
        lattice: Lattice,
        frames: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if frames == 0 {
            return Err(Error::domain("a frame sequence needs at least one frame"));
        }
        if data.len() != lattice.len() * frames {
            return Err(Error::domain("frame data does not match the dimensions"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("frame values must be finite"));
        }
        Ok(Self {
            lattice,
            frames,
            data,
        })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    /// `X_k(i, j)`.
    pub fn value(&self, k: usize, i: usize, j: usize) -> f64 {
        self.pixel(Point::new(i, j))[k - 1]
    }

    /// All `d` values observed at `p`.
    pub fn pixel(&self, p: Point) -> &[f64] {
        let start = self.lattice.index(p) * self.frames;
        &self.data[start..start + self.frames]
    }

    /// Frame `k` (1-based) in row-major order.
    pub fn frame(&self, k: usize) -> Vec<f64> {
        self.data
            .chunks_exact(self.frames)
            .map(|px| px[k - 1])
            .collect()
    }

    /// Writes the little-endian binary layout: magic, `rows`, `cols`,
    /// `frames` as `u32`, then every frame row-major as `f64`.
    pub fn write_binary(&self, out: &mut impl Write) -> std::io::Result<()> {
        out.write_all(&FRAME_MAGIC)?;
        for dim in [self.lattice.rows(), self.lattice.cols(), self.frames] {
            out.write_all(&(dim as u32).to_le_bytes())?;
        }
        for k in 1..=self.frames {
            for v in self.frame(k) {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary(input: &mut impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        input
            .read_to_end(&mut bytes)
            .map_err(|e| Error::Format(e.to_string()))?;
        Self::decode(&bytes)
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || bytes[..4] != FRAME_MAGIC {
            return Err(Error::Format("missing frame file header".into()));
        }
        let dim = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        let (rows, cols, frames) = (dim(4), dim(8), dim(12));
        let lattice = Lattice::new(rows, cols)?;
        let body = &bytes[16..];
        if body.len() != rows * cols * frames * 8 {
            return Err(Error::Format(format!(
                "expected {} payload bytes for {rows}x{cols}x{frames}, found {}",
                rows * cols * frames * 8,
                body.len()
            )));
        }
        let value = |k: usize, idx: usize| {
            let at = (k * rows * cols + idx) * 8;
            f64::from_le_bytes(body[at..at + 8].try_into().unwrap())
        };
        let mut data = Vec::with_capacity(rows * cols * frames);
        for idx in 0..rows * cols {
            for k in 0..frames {
                data.push(value(k, idx));
            }
        }
        Self::from_pixel_major(lattice, frames, data)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_binary(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }

    /// Writes one `frame_NNNNNN.csv` per frame into `dir`: `rows` lines of
    /// `cols` comma-separated values.
    pub fn save_csv_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let cols = self.lattice.cols();
        for k in 1..=self.frames {
            let path = dir.join(format!("frame_{k:06}.csv"));
            let mut text = String::new();
            for row in self.frame(k).chunks(cols) {
                let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                text.push_str(&line.join(","));
                text.push('\n');
            }
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    /// Reads every `*.csv` in `dir`, in file-name order, as one frame each.
    pub fn load_csv_dir(dir: &Path) -> Result<Self> {
        let mut paths: Vec<_> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        paths.sort();
        let mut shape = None;
        let mut frames = Vec::with_capacity(paths.len());
        for path in &paths {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let origin = path.display().to_string();
            let mut values = Vec::new();
            let mut rows = 0;
            let mut cols = None;
            for (n, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let row: Vec<f64> = line
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::parse(&origin, n + 1, e.to_string()))?;
                if *cols.get_or_insert(row.len()) != row.len() {
                    return Err(Error::parse(&origin, n + 1, "ragged row"));
                }
                values.extend(row);
                rows += 1;
            }
            let dims = (rows, cols.unwrap_or(0));
            if *shape.get_or_insert(dims) != dims {
                return Err(Error::parse(
                    &origin,
                    1,
                    "frame dimensions differ from the first frame",
                ));
            }
            frames.push(values);
        }
        let (rows, cols) =
            shape.ok_or_else(|| Error::Format(format!("no csv frames in {}", dir.display())))?;
        Self::from_frames(Lattice::new(rows, cols)?, &frames)
    }
}

/// Scan direction: along rows or along columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

impl Orientation {
    /// Number of slices and slice length on `lat`.
    pub fn slice_shape(self, lat: Lattice) -> (usize, usize) {
        match self {
            Orientation::Horizontal => (lat.rows(), lat.cols()),
            Orientation::Vertical => (lat.cols(), lat.rows()),
        }
    }

    /// Grid node at `position` along slice `slice`.
    pub fn point(self, slice: usize, position: usize) -> Point {
        match self {
            Orientation::Horizontal => Point::new(slice, position),
            Orientation::Vertical => Point::new(position, slice),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Orientation::Horizontal => "horizontal",
            Orientation::Vertical => "vertical",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Checks that `window` is an even length of at least four.
pub fn check_window(window: usize) -> Result<()> {
    if window < MIN_LEN || !window.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "window length must be even and at least {MIN_LEN}, got {window}"
        )));
    }
    Ok(())
}

/// The sub-slice of slice `index` covering positions `offset ..
/// offset + window - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubSliceSpec {
    pub orientation: Orientation,
    pub index: usize,
    pub offset: usize,
    pub window: usize,
}

impl SubSliceSpec {
    pub fn new(
        orientation: Orientation,
        index: usize,
        offset: usize,
        window: usize,
    ) -> Result<Self> {
        check_window(window)?;
        if index == 0 || offset == 0 {
            return Err(Error::domain("slice index and offset are 1-based"));
        }
        Ok(Self {
            orientation,
            index,
            offset,
            window,
        })
    }

    pub fn horizontal(row: usize, offset: usize, window: usize) -> Result<Self> {
        Self::new(Orientation::Horizontal, row, offset, window)
    }

    pub fn vertical(col: usize, offset: usize, window: usize) -> Result<Self> {
        Self::new(Orientation::Vertical, col, offset, window)
    }

    /// Verifies that the window fits on `lat`.
    pub fn check(&self, lat: Lattice) -> Result<()> {
        let (slices, len) = self.orientation.slice_shape(lat);
        if self.index > slices {
            return Err(Error::domain(format!(
                "{} slice {} does not exist on a {}x{} lattice",
                self.orientation,
                self.index,
                lat.rows(),
                lat.cols()
            )));
        }
        if self.window > len || self.offset > len - self.window + 1 {
            return Err(Error::domain(format!(
                "window {} at offset {} overruns a slice of length {len}",
                self.window, self.offset
            )));
        }
        Ok(())
    }

    /// Grid node of step `j` (1-based) of the window.
    pub fn point(&self, j: usize) -> Point {
        self.orientation.point(self.index, self.offset + j - 1)
    }
}

impl fmt::Display for SubSliceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}, r={}, N={})",
            self.orientation, self.index, self.offset, self.window
        )
    }
}

/// Copies the `N × d` panel series of a sub-slice.
pub fn extract_subslice(seq: &FrameSequence, spec: &SubSliceSpec) -> Result<PanelSeries> {
    spec.check(seq.lattice())?;
    let mut values = Vec::with_capacity(spec.window * seq.frames());
    for j in 1..=spec.window {
        values.extend_from_slice(seq.pixel(spec.point(j)));
    }
    PanelSeries::new(values, spec.window, seq.frames())
}

/// The true change index of a window against `truth`: `Some(u)` when the
/// first `u` steps lie on one side of the set and the rest on the other,
/// `None` when the window does not cross the set at all.
pub fn true_change_index(truth: &PointSet, spec: &SubSliceSpec) -> Result<Option<usize>> {
    spec.check(truth.lattice())?;
    let inside: Vec<bool> = (1..=spec.window)
        .map(|j| truth.contains(spec.point(j)))
        .collect();
    let mut crossings = inside.windows(2).enumerate().filter(|(_, w)| w[0] != w[1]);
    let first = crossings.next().map(|(at, _)| at + 1);
    if crossings.next().is_some() {
        return Err(Error::MultipleCrossings(spec.to_string()));
    }
    Ok(first)
}

/// Grid node of an estimated change index: the last step before the split.
pub fn map_to_grid(spec: &SubSliceSpec, u_hat: usize) -> Result<Point> {
    if u_hat == 0 || u_hat >= spec.window {
        return Err(Error::domain(format!(
            "change index {u_hat} outside 1..={}",
            spec.window - 1
        )));
    }
    Ok(spec.point(u_hat))
}
