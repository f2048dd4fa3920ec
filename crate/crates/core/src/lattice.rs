//! Geometry of the rectangular lattice domain.
//!
//! Nodes are addressed with 1-based `(row, col)` pairs. Two nodes are
//! adjacent when they differ by one step along a row or a column
//! (4-adjacency); connectivity, boundaries, path distances and connected
//! components are all defined with respect to that graph.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Smallest admissible number of rows or columns.
pub const MIN_SIDE: usize = 4;

/// A rectangular `rows × cols` grid domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    rows: usize,
    cols: usize,
}

impl Lattice {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows < MIN_SIDE || cols < MIN_SIDE {
            return Err(Error::domain(format!(
                "lattice must be at least {MIN_SIDE}x{MIN_SIDE}, got {rows}x{cols}"
            )));
        }
        Ok(Self { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, p: Point) -> bool {
        (1..=self.rows).contains(&p.row) && (1..=self.cols).contains(&p.col)
    }

    pub(crate) fn check(&self, p: Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "point {p} outside {}x{} lattice",
                self.rows, self.cols
            )))
        }
    }

    /// Row-major position of an in-domain point.
    pub(crate) fn index(&self, p: Point) -> usize {
        (p.row - 1) * self.cols + (p.col - 1)
    }

    pub(crate) fn point_at(&self, index: usize) -> Point {
        Point::new(index / self.cols + 1, index % self.cols + 1)
    }

    /// Every node of the domain, row-major.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (1..=self.rows).flat_map(move |i| (1..=self.cols).map(move |j| Point::new(i, j)))
    }

    /// The full domain as a point set.
    pub fn full(&self) -> PointSet {
        PointSet {
            lattice: *self,
            members: self.points().collect(),
        }
    }

    /// Nodes on the outer frame of the domain, i.e. those with fewer than
    /// four neighbours inside it.
    pub fn frame(&self) -> PointSet {
        boundary(&self.full())
    }
}

/// A lattice node, `(row, col)`, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub row: usize,
    pub col: usize,
}

impl Point {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

impl From<(usize, usize)> for Point {
    fn from((row, col): (usize, usize)) -> Self {
        Point::new(row, col)
    }
}

/// A set of nodes of one lattice, iterated in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    lattice: Lattice,
    members: BTreeSet<Point>,
}

impl PointSet {
    pub fn empty(lattice: Lattice) -> Self {
        Self {
            lattice,
            members: BTreeSet::new(),
        }
    }

    pub fn from_points<I, P>(lattice: Lattice, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: Into<Point>,
    {
        let mut set = Self::empty(lattice);
        for p in points {
            set.insert(p.into())?;
        }
        Ok(set)
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.members.contains(&p)
    }

    /// Adds `p`, returning whether it was new.
    pub fn insert(&mut self, p: Point) -> Result<bool> {
        self.lattice.check(p)?;
        Ok(self.members.insert(p))
    }

    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        self.members.iter().copied()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn intersection_len(&self, other: &PointSet) -> usize {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.members.iter().filter(|p| large.contains(**p)).count()
    }

    pub fn union_with(&mut self, other: &PointSet) -> Result<()> {
        self.same_lattice(other)?;
        self.members.extend(other.members.iter().copied());
        Ok(())
    }

    pub fn union(&self, other: &PointSet) -> Result<PointSet> {
        let mut out = self.clone();
        out.union_with(other)?;
        Ok(out)
    }

    /// Members of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = Point> + '_ {
        self.members
            .range(Point::new(i, 0)..=Point::new(i, usize::MAX))
            .copied()
    }

    /// Members of column `j`, top to bottom.
    pub fn column(&self, j: usize) -> impl Iterator<Item = Point> + '_ {
        self.members.iter().copied().filter(move |p| p.col == j)
    }

    pub(crate) fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.lattice.len()];
        for p in &self.members {
            mask[self.lattice.index(*p)] = true;
        }
        mask
    }

    fn same_lattice(&self, other: &PointSet) -> Result<()> {
        if self.lattice == other.lattice {
            Ok(())
        } else {
            Err(Error::domain("point sets belong to different lattices"))
        }
    }

    /// Serializes as one `i j` pair per line, row-major.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * 8);
        for p in &self.members {
            out.push_str(&format!("{} {}\n", p.row, p.col));
        }
        out
    }

    /// Parses the `i j` per-line format. Blank lines and `#` comments are
    /// skipped.
    pub fn from_text(lattice: Lattice, text: &str, origin: &str) -> Result<Self> {
        let mut set = Self::empty(lattice);
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let mut next = |what: &str| -> Result<usize> {
                fields
                    .next()
                    .ok_or_else(|| Error::parse(origin, n + 1, format!("missing {what} index")))?
                    .parse()
                    .map_err(|_| Error::parse(origin, n + 1, format!("bad {what} index")))
            };
            let p = Point::new(next("row")?, next("column")?);
            if fields.next().is_some() {
                return Err(Error::parse(origin, n + 1, "expected exactly two fields"));
            }
            set.insert(p)
                .map_err(|e| Error::parse(origin, n + 1, e.to_string()))?;
        }
        Ok(set)
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a Point;
    type IntoIter = std::collections::btree_set::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// A decomposition of the domain into disjoint, connected blocks.
#[derive(Clone, Debug)]
pub struct Partition {
    lattice: Lattice,
    blocks: Vec<PointSet>,
    labels: Vec<usize>,
}

impl Partition {
    /// Requires at least two non-empty, connected, pairwise disjoint blocks
    /// covering the domain.
    pub fn new(lattice: Lattice, blocks: Vec<PointSet>) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::domain("a partition needs at least two blocks"));
        }
        for (l, b) in blocks.iter().enumerate() {
            if b.lattice() != lattice {
                return Err(Error::domain(format!(
                    "block {} is on another lattice",
                    l + 1
                )));
            }
            if b.is_empty() {
                return Err(Error::domain(format!("block {} is empty", l + 1)));
            }
            if !is_connected(b) {
                return Err(Error::domain(format!("block {} is not connected", l + 1)));
            }
        }
        Self::label(lattice, blocks)
    }

    /// The single-block decomposition of a domain that carries no change.
    pub fn whole(lattice: Lattice) -> Self {
        Self {
            lattice,
            blocks: vec![lattice.full()],
            labels: vec![0; lattice.len()],
        }
    }

    fn label(lattice: Lattice, blocks: Vec<PointSet>) -> Result<Self> {
        let mut labels = vec![usize::MAX; lattice.len()];
        for (l, b) in blocks.iter().enumerate() {
            for p in b {
                let slot = &mut labels[lattice.index(*p)];
                if *slot != usize::MAX {
                    return Err(Error::domain(format!(
                        "blocks {} and {} overlap at {p}",
                        *slot + 1,
                        l + 1
                    )));
                }
                *slot = l;
            }
        }
        if let Some(gap) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::domain(format!(
                "blocks do not cover {}",
                lattice.point_at(gap)
            )));
        }
        Ok(Self {
            lattice,
            blocks,
            labels,
        })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn blocks(&self) -> &[PointSet] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Index of the block holding `p`.
    pub fn block_of(&self, p: Point) -> usize {
        self.labels[self.lattice.index(p)]
    }

    /// Block index per node, row-major.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

/// Neighbours of `p` inside the lattice, row-then-column ascending.
pub fn neighbors(p: Point, lat: Lattice) -> Result<Vec<Point>> {
    lat.check(p)?;
    let mut out = Vec::with_capacity(4);
    if p.row > 1 {
        out.push(Point::new(p.row - 1, p.col));
    }
    if p.col > 1 {
        out.push(Point::new(p.row, p.col - 1));
    }
    if p.col < lat.cols() {
        out.push(Point::new(p.row, p.col + 1));
    }
    if p.row < lat.rows() {
        out.push(Point::new(p.row + 1, p.col));
    }
    Ok(out)
}

fn neighbor_indices(lat: Lattice, index: usize) -> impl Iterator<Item = usize> {
    let (r, c) = (index / lat.cols, index % lat.cols);
    let up = (r > 0).then(|| index - lat.cols);
    let left = (c > 0).then(|| index - 1);
    let right = (c + 1 < lat.cols).then(|| index + 1);
    let down = (r + 1 < lat.rows).then(|| index + lat.cols);
    [up, left, right, down].into_iter().flatten()
}

/// Breadth-first distances from `sources` through nodes with `open[i]` set.
fn bfs(
    lat: Lattice,
    open: &[bool],
    sources: impl IntoIterator<Item = usize>,
) -> Vec<Option<usize>> {
    let mut dist = vec![None; lat.len()];
    let mut queue = VecDeque::new();
    for s in sources {
        if open[s] && dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for v in neighbor_indices(lat, u) {
            if open[v] && dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Whether the 4-adjacency graph restricted to `s` is connected. The empty
/// set counts as connected.
pub fn is_connected(s: &PointSet) -> bool {
    let Some(first) = s.iter().next() else {
        return true;
    };
    let lat = s.lattice();
    let reach = bfs(lat, &s.mask(), [lat.index(first)]);
    s.iter().all(|p| reach[lat.index(p)].is_some())
}

/// Members of `s` with fewer than four neighbours inside `s`.
pub fn boundary(s: &PointSet) -> PointSet {
    let lat = s.lattice();
    let mask = s.mask();
    let mut out = PointSet::empty(lat);
    for p in s.iter() {
        let inside = neighbor_indices(lat, lat.index(p))
            .filter(|&v| mask[v])
            .count();
        if inside < 4 {
            out.members.insert(p);
        }
    }
    out
}

/// Shortest-path length between two sets, or unbounded when no path exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Distance {
    Finite(usize),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

/// Minimum path length between a node of `a` and a node of `b`, with
/// paths confined to `within`.
pub fn set_distance(a: &PointSet, b: &PointSet, within: &PointSet) -> Result<Distance> {
    if !a.is_subset(within) || !b.is_subset(within) {
        return Err(Error::domain(
            "set_distance: both sets must lie within the path domain",
        ));
    }
    if a.lattice() != within.lattice() || b.lattice() != within.lattice() {
        return Err(Error::domain(
            "set_distance: sets belong to different lattices",
        ));
    }
    let lat = within.lattice();
    let dist = bfs(lat, &within.mask(), a.iter().map(|p| lat.index(p)));
    Ok(b.iter()
        .filter_map(|p| dist[lat.index(p)])
        .min()
        .map_or(Distance::Infinite, Distance::Finite))
}

/// `(|A ∪ B| − |A ∩ B|) / |A ∪ B|`; two empty sets are at distance 0.
pub fn jaccard_distance(a: &PointSet, b: &PointSet) -> f64 {
    let inter = a.intersection_len(b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return 0.0;
    }
    (union - inter) as f64 / union as f64
}

/// The 4-connected components of `s`, ordered by their smallest member.
pub fn components(s: &PointSet) -> Vec<PointSet> {
    let lat = s.lattice();
    let mask = s.mask();
    let mut seen = vec![false; lat.len()];
    let mut out = Vec::new();
    for p in s.iter() {
        let start = lat.index(p);
        if seen[start] {
            continue;
        }
        let mut comp = PointSet::empty(lat);
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            comp.members.insert(lat.point_at(u));
            for v in neighbor_indices(lat, u) {
                if mask[v] && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        out.push(comp);
    }
    out
}
