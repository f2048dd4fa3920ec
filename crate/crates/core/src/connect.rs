//! Building the change-set estimate from relevant critical points, and
//! checking the geometric conditions under which it is consistent.

use std::fmt;
use std::str::FromStr;

use crate::cusum::Gamma;
use crate::error::{Error, Result};
use crate::lattice::{components, is_connected, set_distance, Distance, Lattice, Point, PointSet};
use crate::scan::{pool, scan, select_relevant, OverlapRule, ScanField};
use crate::slicing::{FrameSequence, Orientation};

/// Which scan directions contribute to the estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Horizontal,
    Vertical,
    Both,
}

impl Mode {
    pub fn uses(self, orientation: Orientation) -> bool {
        matches!(
            (self, orientation),
            (Mode::Both, _)
                | (Mode::Horizontal, Orientation::Horizontal)
                | (Mode::Vertical, Orientation::Vertical)
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::Horizontal => "h",
            Mode::Vertical => "v",
            Mode::Both => "both",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" | "horizontal" => Ok(Mode::Horizontal),
            "v" | "vertical" => Ok(Mode::Vertical),
            "both" | "hv" | "h+v" => Ok(Mode::Both),
            other => Err(Error::domain(format!(
                "unknown mode {other:?} (expected h, v or both)"
            ))),
        }
    }
}

fn connect(sets: &[PointSet], lat: Lattice, orientation: Orientation) -> Result<PointSet> {
    let mut estimate = PointSet::empty(lat);
    for (s, relevant) in sets.iter().enumerate() {
        let slice = s + 1;
        let mut positions = Vec::with_capacity(relevant.len());
        for p in relevant {
            let (on, pos) = match orientation {
                Orientation::Horizontal => (p.row, p.col),
                Orientation::Vertical => (p.col, p.row),
            };
            if on != slice {
                return Err(Error::domain(format!(
                    "relevant point {p} does not lie on {orientation} slice {slice}"
                )));
            }
            positions.push(pos);
        }
        if positions.len() < 2 {
            continue;
        }
        let first = *positions.iter().min().unwrap_or(&0);
        let last = *positions.iter().max().unwrap_or(&0);
        for pos in first + 1..=last {
            estimate.insert(orientation.point(slice, pos))?;
        }
    }
    Ok(estimate)
}

/// For each row `i` with at least two relevant points `x_1 < … < x_p`, adds
/// the span `(i, x_1 + 1) ..= (i, x_p)`. `h_sets[i - 1]` holds `H(i)`.
pub fn connect_horizontal(h_sets: &[PointSet], lat: Lattice) -> Result<PointSet> {
    connect(h_sets, lat, Orientation::Horizontal)
}

/// Column-wise counterpart of [`connect_horizontal`]; `v_sets[j - 1]` holds
/// `V(j)`.
pub fn connect_vertical(v_sets: &[PointSet], lat: Lattice) -> Result<PointSet> {
    connect(v_sets, lat, Orientation::Vertical)
}

/// Intermediate and final products of one estimation run.
#[derive(Clone, Debug)]
pub struct Estimate {
    /// `H(1), …, H(m)`; empty when the horizontal direction is unused.
    pub horizontal: Vec<PointSet>,
    /// `V(1), …, V(n)`; empty when the vertical direction is unused.
    pub vertical: Vec<PointSet>,
    /// The pooled relevant points `G`.
    pub relevant: PointSet,
    /// The change-set estimate.
    pub set: PointSet,
}

/// Selects and connects relevant points from already scanned fields. A
/// field must be supplied for every direction `mode` uses.
pub fn estimate_from_fields(
    lat: Lattice,
    horizontal: Option<&ScanField>,
    vertical: Option<&ScanField>,
    mode: Mode,
    rule: OverlapRule,
) -> Result<Estimate> {
    let mut estimate = PointSet::empty(lat);
    let mut sets = [Vec::new(), Vec::new()];
    for (slot, (orientation, field)) in [
        (Orientation::Horizontal, horizontal),
        (Orientation::Vertical, vertical),
    ]
    .into_iter()
    .enumerate()
    {
        if !mode.uses(orientation) {
            continue;
        }
        let field = field
            .ok_or_else(|| Error::domain(format!("mode {mode} needs a {orientation} scan")))?;
        if field.orientation() != orientation || field.lattice() != lat {
            return Err(Error::domain(format!(
                "expected a {orientation} scan of this lattice"
            )));
        }
        let relevant = select_relevant(field, rule)?;
        estimate.union_with(&connect(&relevant, lat, orientation)?)?;
        sets[slot] = relevant;
    }
    let [horizontal, vertical] = sets;
    let relevant = pool(lat, &horizontal, &vertical)?;
    Ok(Estimate {
        horizontal,
        vertical,
        relevant,
        set: estimate,
    })
}

/// Scan, select and connect in the requested direction(s). With
/// [`Mode::Both`] the two directions run independently on the same data
/// and their estimates are united.
pub fn estimate_detailed(
    seq: &FrameSequence,
    mode: Mode,
    rule: OverlapRule,
    gamma: Gamma,
) -> Result<Estimate> {
    let field = |o: Orientation| -> Result<Option<ScanField>> {
        if mode.uses(o) {
            scan(seq, o, rule.window(), gamma).map(Some)
        } else {
            Ok(None)
        }
    };
    let h = field(Orientation::Horizontal)?;
    let v = field(Orientation::Vertical)?;
    estimate_from_fields(seq.lattice(), h.as_ref(), v.as_ref(), mode, rule)
}

pub fn estimate_change_set(
    seq: &FrameSequence,
    mode: Mode,
    rule: OverlapRule,
    gamma: Gamma,
) -> Result<PointSet> {
    estimate_detailed(seq, mode, rule, gamma).map(|e| e.set)
}

/// The 4-connected components of an estimate, ordered by smallest member.
pub fn split_components(s: &PointSet) -> Vec<PointSet> {
    components(s)
}

/// Outcome of one condition check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Per-clause report of the consistency conditions for a change set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub clauses: Vec<Clause>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            let mark = if c.passed { "pass" } else { "FAIL" };
            writeln!(f, "{mark}  {:<18} {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

pub const CLAUSE_PRECONDITIONS: &str = "preconditions";
pub const CLAUSE_CONNECTED: &str = "connected";
pub const CLAUSE_FRAME_DISTANCE: &str = "frame-distance";
pub const CLAUSE_CHORDS: &str = "chords-connected";
pub const CLAUSE_CHORD_LENGTH: &str = "chord-length";
pub const CLAUSE_ADMISSIBLE: &str = "admissible-region";

fn first_failure<T: fmt::Display>(mut bad: impl Iterator<Item = T>, ok: &str) -> (bool, String) {
    match bad.next() {
        Some(b) => (false, b.to_string()),
        None => (true, ok.to_string()),
    }
}

/// Checks the conditions under which the overlapping estimate with any
/// even `4 <= N <= xi` recovers `truth` exactly in the limit:
///
/// * `truth` is non-empty and connected;
/// * its path distance to the lattice frame is at least `xi - 1`;
/// * every row chord `H_i` and column chord `V_j` is empty or connected;
/// * chords are long enough for `mode`: `|H_i| >= xi` (horizontal),
///   `|V_j| >= xi` (vertical), or `max(|H_i|, |V_j|) >= xi` at every
///   member `(i, j)` (both);
/// * no member lies at column `> n - xi + 1` or row `> m - xi + 1`.
pub fn validate_theorem_conditions(
    truth: &PointSet,
    lat: Lattice,
    xi: usize,
    mode: Mode,
) -> ConditionReport {
    let mut clauses = Vec::new();
    let mut push = |name, (passed, detail): (bool, String)| {
        clauses.push(Clause {
            name,
            passed,
            detail,
        })
    };

    let pre_ok = xi >= 4 && lat.rows().min(lat.cols()) >= xi && truth.lattice() == lat;
    push(
        CLAUSE_PRECONDITIONS,
        (
            pre_ok,
            format!("xi = {xi}, lattice {}x{}", lat.rows(), lat.cols()),
        ),
    );
    if !pre_ok {
        return ConditionReport { clauses };
    }

    push(
        CLAUSE_CONNECTED,
        match (truth.is_empty(), is_connected(truth)) {
            (true, _) => (false, "change set is empty".into()),
            (false, true) => (true, format!("{} points, one component", truth.len())),
            (false, false) => (false, format!("{} components", components(truth).len())),
        },
    );

    let dist = if truth.is_empty() {
        Distance::Infinite
    } else {
        set_distance(truth, &lat.frame(), &lat.full()).unwrap_or(Distance::Infinite)
    };
    push(
        CLAUSE_FRAME_DISTANCE,
        (
            dist.finite().is_some_and(|d| d + 1 >= xi),
            format!("d(S, B) = {dist}, need >= {}", xi - 1),
        ),
    );

    let rows: Vec<Vec<Point>> = (1..=lat.rows()).map(|i| truth.row(i).collect()).collect();
    let mut cols: Vec<Vec<Point>> = vec![Vec::new(); lat.cols()];
    for p in truth {
        cols[p.col - 1].push(*p);
    }
    let contiguous = |chord: &[Point], pos: fn(&Point) -> usize| {
        chord.windows(2).all(|w| pos(&w[1]) == pos(&w[0]) + 1)
    };
    let broken = rows
        .iter()
        .enumerate()
        .filter(|(_, c)| !contiguous(c, |p| p.col))
        .map(|(i, _)| format!("row chord H_{} is split", i + 1))
        .chain(
            cols.iter()
                .enumerate()
                .filter(|(_, c)| !contiguous(c, |p| p.row))
                .map(|(j, _)| format!("column chord V_{} is split", j + 1)),
        );
    push(
        CLAUSE_CHORDS,
        first_failure(broken, "all chords are intervals"),
    );

    let short_rows = || {
        rows.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty() && c.len() < xi)
            .map(|(i, c)| format!("|H_{}| = {} < {xi}", i + 1, c.len()))
    };
    let short_cols = || {
        cols.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty() && c.len() < xi)
            .map(|(j, c)| format!("|V_{}| = {} < {xi}", j + 1, c.len()))
    };
    let length = match mode {
        Mode::Horizontal => first_failure(short_rows(), "every row chord is long enough"),
        Mode::Vertical => first_failure(short_cols(), "every column chord is long enough"),
        Mode::Both => first_failure(
            truth
                .iter()
                .filter(|p| rows[p.row - 1].len().max(cols[p.col - 1].len()) < xi)
                .map(|p| {
                    format!(
                        "max(|H_{}|, |V_{}|) = {} < {xi}",
                        p.row,
                        p.col,
                        rows[p.row - 1].len().max(cols[p.col - 1].len())
                    )
                }),
            "every point has a long enough chord",
        ),
    };
    push(CLAUSE_CHORD_LENGTH, length);

    let (max_row, max_col) = (lat.rows() + 1 - xi, lat.cols() + 1 - xi);
    push(
        CLAUSE_ADMISSIBLE,
        first_failure(
            truth
                .iter()
                .filter(|p| p.row > max_row || p.col > max_col)
                .map(|p| format!("{p} beyond row {max_row} / column {max_col}")),
            "inside the admissible region",
        ),
    );

    ConditionReport { clauses }
}
