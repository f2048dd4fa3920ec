//! Scanning every overlapping sub-slice for its critical point and
//! selecting the relevant ones with the overlapping `(N, Q)` rule.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::cusum::{Gamma, Weights, Workspace};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Point, PointSet};
use crate::slicing::{
    check_window, map_to_grid, true_change_index, FrameSequence, Orientation, SubSliceSpec,
};

/// One entry of a scan field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Critical {
    /// Estimated change location mapped back to the grid.
    Point(Point),
    /// The sub-slice statistic vanished everywhere (constant data); the
    /// location reflects only the tie rule and never joins a run.
    Degenerate(Point),
    /// Padding for offsets past the last admissible window.
    Sentinel,
}

impl Critical {
    pub fn point(&self) -> Option<Point> {
        match *self {
            Critical::Point(p) | Critical::Degenerate(p) => Some(p),
            Critical::Sentinel => None,
        }
    }

    fn same_run(&self, other: &Critical) -> bool {
        matches!((self, other), (Critical::Point(a), Critical::Point(b)) if a == b)
    }
}

/// Critical points of every sub-slice, indexed by `(slice, offset)`.
///
/// Each slice holds one entry per position along it: offsets
/// `1..=len-N+1` carry scan results, the rest are sentinels.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanField {
    orientation: Orientation,
    lattice: Lattice,
    window: usize,
    gamma: Option<Gamma>,
    slice_len: usize,
    entries: Vec<Critical>,
}

impl ScanField {
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// The sensitivity used, or `None` for a limiting field.
    pub fn gamma(&self) -> Option<Gamma> {
        self.gamma
    }

    pub fn slices(&self) -> usize {
        self.entries.len() / self.slice_len
    }

    pub fn slice_len(&self) -> usize {
        self.slice_len
    }

    /// Number of genuine (non-sentinel) offsets per slice.
    pub fn offsets(&self) -> usize {
        self.slice_len - self.window + 1
    }

    /// Entry at `(slice, offset)`, both 1-based.
    pub fn entry(&self, slice: usize, offset: usize) -> Critical {
        self.entries[(slice - 1) * self.slice_len + (offset - 1)]
    }

    pub fn slice(&self, slice: usize) -> &[Critical] {
        &self.entries[(slice - 1) * self.slice_len..slice * self.slice_len]
    }

    /// Whether any sub-slice had an identically vanishing statistic.
    pub fn has_degenerate(&self) -> bool {
        self.entries
            .iter()
            .any(|c| matches!(c, Critical::Degenerate(_)))
    }

    /// The field the scan converges to as the number of frames grows and
    /// the noise is small against the change: the true change location
    /// where a window crosses `truth` once, the midpoint `r - 1 + N/2`
    /// where it does not cross.
    ///
    /// Fails when a window crosses `truth` more than once.
    pub fn limiting(truth: &PointSet, orientation: Orientation, window: usize) -> Result<Self> {
        let lattice = truth.lattice();
        let (slices, slice_len) = shape(lattice, orientation, window)?;
        let mut entries = Vec::with_capacity(slices * slice_len);
        for s in 1..=slices {
            for r in 1..=slice_len {
                if r > slice_len - window + 1 {
                    entries.push(Critical::Sentinel);
                    continue;
                }
                let spec = SubSliceSpec::new(orientation, s, r, window)?;
                let u = true_change_index(truth, &spec)?.unwrap_or(window / 2);
                entries.push(Critical::Point(map_to_grid(&spec, u)?));
            }
        }
        Ok(Self {
            orientation,
            lattice,
            window,
            gamma: None,
            slice_len,
            entries,
        })
    }

    /// Writes `orientation,slice,offset,row,col` rows; sentinels are
    /// emitted with column 0 (row 0 for vertical fields).
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "orientation,slice,offset,row,col")?;
        for s in 1..=self.slices() {
            for (r, c) in self.slice(s).iter().enumerate() {
                let p = c.point().unwrap_or(match self.orientation {
                    Orientation::Horizontal => Point::new(s, 0),
                    Orientation::Vertical => Point::new(0, s),
                });
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    self.orientation,
                    s,
                    r + 1,
                    p.row,
                    p.col
                )?;
            }
        }
        Ok(())
    }
}

fn shape(lattice: Lattice, orientation: Orientation, window: usize) -> Result<(usize, usize)> {
    check_window(window)?;
    let (slices, len) = orientation.slice_shape(lattice);
    if window > len {
        return Err(Error::domain(format!(
            "window {window} longer than the {orientation} slices ({len})"
        )));
    }
    Ok((slices, len))
}

/// Runs the CUSUM estimator on every sub-slice of the given orientation.
///
/// Slices are processed in parallel; the result does not depend on the
/// schedule.
pub fn scan(
    seq: &FrameSequence,
    orientation: Orientation,
    window: usize,
    gamma: Gamma,
) -> Result<ScanField> {
    let lattice = seq.lattice();
    let (slices, slice_len) = shape(lattice, orientation, window)?;
    let weights = Weights::new(window, gamma);
    let offsets = slice_len - window + 1;
    let frames = seq.frames();

    let per_slice: Vec<Vec<Critical>> = (1..=slices)
        .into_par_iter()
        .map_init(
            || Workspace::new(frames),
            |ws, s| {
                let mut row = Vec::with_capacity(slice_len);
                for r in 1..=offsets {
                    let est = ws.estimate(&weights, |j| seq.pixel(orientation.point(s, r + j - 1)));
                    let p = orientation.point(s, est.index + r - 1);
                    row.push(if est.is_degenerate() {
                        Critical::Degenerate(p)
                    } else {
                        Critical::Point(p)
                    });
                }
                row.resize(slice_len, Critical::Sentinel);
                row
            },
        )
        .collect();

    Ok(ScanField {
        orientation,
        lattice,
        window,
        gamma: Some(gamma),
        slice_len,
        entries: per_slice.concat(),
    })
}

/// The overlapping `(N, Q)` selection rule: a critical point is relevant
/// when `Q + 1` consecutive windows agree on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OverlapRule {
    window: usize,
    run: usize,
}

impl OverlapRule {
    pub fn new(window: usize, run: usize) -> Result<Self> {
        check_window(window)?;
        if run == 0 || run > window - 2 {
            return Err(Error::domain(format!(
                "run length Q must lie in 1..={} for N = {window}, got {run}",
                window - 2
            )));
        }
        Ok(Self { window, run })
    }

    /// `N`.
    pub fn window(&self) -> usize {
        self.window
    }

    /// `Q`.
    pub fn run(&self) -> usize {
        self.run
    }
}

impl fmt::Display for OverlapRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.window, self.run)
    }
}

/// Relevant critical points per slice, `H(i)` for horizontal fields and
/// `V(j)` for vertical ones.
///
/// Offsets `r = 1..=len-N+1` are tested against `r+1, ..., r+Q`; runs that
/// reach into the sentinel padding never fire.
pub fn select_relevant(field: &ScanField, rule: OverlapRule) -> Result<Vec<PointSet>> {
    if rule.window != field.window {
        return Err(Error::domain(format!(
            "rule {rule} does not match a field scanned with N = {}",
            field.window
        )));
    }
    let q = rule.run;
    let mut out = Vec::with_capacity(field.slices());
    for s in 1..=field.slices() {
        let entries = field.slice(s);
        let mut relevant = PointSet::empty(field.lattice);
        for r in 0..field.offsets() {
            let head = &entries[r];
            if entries[r + 1..=r + q].iter().all(|e| head.same_run(e)) {
                if let Critical::Point(p) = head {
                    relevant.insert(*p)?;
                }
            }
        }
        out.push(relevant);
    }
    Ok(out)
}

/// `G = H(1) ∪ … ∪ H(m) ∪ V(1) ∪ … ∪ V(n)`.
pub fn pool(lattice: Lattice, h_sets: &[PointSet], v_sets: &[PointSet]) -> Result<PointSet> {
    let mut g = PointSet::empty(lattice);
    for s in h_sets.iter().chain(v_sets) {
        g.union_with(s)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> Lattice {
        Lattice::new(6, 12).unwrap()
    }

    fn field_from_row(cols: &[usize], window: usize) -> ScanField {
        let l = Lattice::new(4, cols.len()).unwrap();
        let offsets = cols.len() - window + 1;
        let mut entries = Vec::new();
        for s in 1..=4 {
            for (r, &c) in cols.iter().enumerate() {
                entries.push(if r < offsets {
                    Critical::Point(Point::new(s, c))
                } else {
                    Critical::Sentinel
                });
            }
        }
        ScanField {
            orientation: Orientation::Horizontal,
            lattice: l,
            window,
            gamma: Some(Gamma::ZERO),
            slice_len: cols.len(),
            entries,
        }
    }

    #[test]
    fn rule_bounds() {
        assert!(OverlapRule::new(4, 0).is_err());
        assert!(OverlapRule::new(4, 3).is_err());
        assert!(OverlapRule::new(5, 1).is_err());
        assert!(OverlapRule::new(6, 4).is_ok());
    }

    #[test]
    fn distinct_entries_select_nothing() {
        let f = field_from_row(&[2, 3, 4, 5, 6, 7, 8, 9, 0, 0, 0], 4);
        let h = select_relevant(&f, OverlapRule::new(4, 1).unwrap()).unwrap();
        assert!(h.iter().all(PointSet::is_empty));
    }

    #[test]
    fn single_repeat_with_q1() {
        let f = field_from_row(&[2, 5, 5, 6, 7, 8, 9, 10, 0, 0, 0], 4);
        let h = select_relevant(&f, OverlapRule::new(4, 1).unwrap()).unwrap();
        assert_eq!(h[0].iter().collect::<Vec<_>>(), vec![Point::new(1, 5)]);
        let h2 = select_relevant(&f, OverlapRule::new(4, 2).unwrap()).unwrap();
        assert!(h2[0].is_empty());
    }

    #[test]
    fn runs_into_padding_never_fire() {
        // last genuine offset repeats the previous one only through padding
        let f = field_from_row(&[3, 4, 5, 6, 7, 8, 9, 9, 0, 0, 0], 4);
        let h = select_relevant(&f, OverlapRule::new(4, 2).unwrap()).unwrap();
        assert!(h[0].is_empty());
        let h1 = select_relevant(&f, OverlapRule::new(4, 1).unwrap()).unwrap();
        assert_eq!(h1[0].len(), 1);
    }

    #[test]
    fn degenerate_entries_never_match() {
        let mut f = field_from_row(&[5, 5, 5, 5, 9, 10, 11, 12, 0, 0, 0], 4);
        f.entries[1] = Critical::Degenerate(Point::new(1, 5));
        let h = select_relevant(&f, OverlapRule::new(4, 1).unwrap()).unwrap();
        assert_eq!(h[0].iter().collect::<Vec<_>>(), vec![Point::new(1, 5)]);
        assert!(f.has_degenerate());
    }

    #[test]
    fn mismatched_rule_is_rejected() {
        let f = field_from_row(&[2, 3, 4, 5, 6, 7, 8, 9, 0, 0, 0], 4);
        assert!(select_relevant(&f, OverlapRule::new(6, 2).unwrap()).is_err());
    }

    #[test]
    fn pooling() {
        let l = lat();
        assert!(pool(l, &[], &[]).unwrap().is_empty());
        let h = vec![PointSet::from_points(l, [(1, 2), (1, 5)]).unwrap()];
        let v = vec![PointSet::from_points(l, [(3, 4), (1, 5)]).unwrap()];
        assert_eq!(pool(l, &h, &v).unwrap().len(), 3);
        let disjoint = vec![PointSet::from_points(l, [(6, 6)]).unwrap()];
        assert_eq!(pool(l, &h, &disjoint).unwrap().len(), 3);
    }

    #[test]
    fn csv_dump_marks_sentinels() {
        let f = field_from_row(&[2, 3, 4, 5, 0], 4);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "orientation,slice,offset,row,col");
        assert_eq!(lines[1], "horizontal,1,1,1,2");
        assert_eq!(lines[5], "horizontal,1,5,1,0");
        assert_eq!(lines.len(), 1 + 4 * 5);
    }
}
