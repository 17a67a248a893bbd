//! Qubit connectivity graphs.
//!
//! Every lattice carries an integer grid embedding `(x, y)` in which each
//! edge joins two sites that differ by exactly one unit in one coordinate.
//! Columns are the sets of sites sharing an `x` value, ordered by `y`, so an
//! edge is either vertical (inside a column, between consecutive rows) or
//! horizontal (between adjacent columns, on the same row). The boundary-MPS
//! sampler relies on this layout.
//!
//! Vertex numbering:
//! * named devices use the vendor qubit numbering (see [`crate::devices`]);
//! * heavy-hex grids and square lattices number sites in reading order,
//!   row by row from the top, left to right.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::devices;
use crate::error::{Error, Result};

/// Named heavy-hex devices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Device {
    Guadalupe,
    Geneva,
    Washington,
}

impl Device {
    pub fn name(self) -> &'static str {
        match self {
            Device::Guadalupe => "guadalupe",
            Device::Geneva => "geneva",
            Device::Washington => "washington",
        }
    }
}

impl FromStr for Device {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().trim_start_matches("ibmq_").trim_start_matches("ibm_") {
            "guadalupe" => Ok(Device::Guadalupe),
            "geneva" => Ok(Device::Geneva),
            "washington" => Ok(Device::Washington),
            _ => Err(Error::UnknownDevice(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeavyHexSpec {
    Device(Device),
    Grid { rows: usize, cols: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    HeavyHex(HeavyHexSpec),
    Square { rows: usize, cols: usize },
    /// Arbitrary connected graph given by its edge list.
    Graph { n: usize },
}

impl LatticeKind {
    pub fn is_heavy_hex(&self) -> bool {
        matches!(self, LatticeKind::HeavyHex(_))
    }
}

/// Textual lattice reference: `heavyhex:guadalupe`, `heavyhex:grid:2x2`,
/// `square:4x4`. A bare device name is accepted as shorthand.
impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeKind::HeavyHex(HeavyHexSpec::Device(d)) => write!(f, "heavyhex:{}", d.name()),
            LatticeKind::HeavyHex(HeavyHexSpec::Grid { rows, cols }) => {
                write!(f, "heavyhex:grid:{rows}x{cols}")
            }
            LatticeKind::Square { rows, cols } => write!(f, "square:{rows}x{cols}"),
            LatticeKind::Graph { n } => write!(f, "graph:{n}"),
        }
    }
}

fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidDimensions(s.to_string());
    let (r, c) = s.split_once('x').ok_or_else(bad)?;
    Ok((r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["heavyhex", "grid", dims] => {
                let (rows, cols) = parse_dims(dims)?;
                Ok(LatticeKind::HeavyHex(HeavyHexSpec::Grid { rows, cols }))
            }
            ["heavyhex", dev] => Ok(LatticeKind::HeavyHex(HeavyHexSpec::Device(dev.parse()?))),
            ["square", dims] => {
                let (rows, cols) = parse_dims(dims)?;
                Ok(LatticeKind::Square { rows, cols })
            }
            ["graph", n] => Ok(LatticeKind::Graph {
                n: n.trim().parse().map_err(|_| Error::InvalidDimensions(s.to_string()))?,
            }),
            [dev] => Ok(LatticeKind::HeavyHex(HeavyHexSpec::Device(dev.parse()?))),
            _ => Err(Error::UnknownDevice(s.to_string())),
        }
    }
}

/// A connectivity graph with its planar grid embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    kind: LatticeKind,
    edges: Vec<(usize, usize)>,
    coords: Vec<(i64, i64)>,
    adjacency: Vec<Vec<usize>>,
    embedded: bool,
}

impl Lattice {
    /// Builds a lattice from raw parts, checking simplicity, connectivity and
    /// the unit-step embedding.
    pub fn from_parts(kind: LatticeKind, edges: &[(usize, usize)], coords: &[(i64, i64)]) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::InvalidDimensions("empty lattice".into()));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(Error::InvalidArgument(format!("bad edge ({a}, {b})")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({a}, {b})")));
            }
            let (xa, ya) = coords[a];
            let (xb, yb) = coords[b];
            if (xa - xb).abs() + (ya - yb).abs() != 1 {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) is not a unit grid step")));
            }
        }
        let mut seen = BTreeSet::new();
        for (v, c) in coords.iter().enumerate() {
            if !seen.insert(*c) {
                return Err(Error::InvalidArgument(format!("vertex {v} shares coordinates {c:?}")));
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let lattice = Lattice { kind, edges, coords: coords.to_vec(), adjacency, embedded: true };
        if !lattice.is_connected() {
            return Err(Error::InvalidArgument("lattice is not connected".into()));
        }
        Ok(lattice)
    }

    /// Graph without a grid embedding. Vertex `v` is placed at `(v, 0)`;
    /// the lattice counts as embedded only if every edge is then a unit
    /// step (a path in vertex order).
    pub fn from_graph(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let coords: Vec<(i64, i64)> = (0..n as i64).map(|v| (v, 0)).collect();
        let kind = LatticeKind::Graph { n };
        match Self::from_parts(kind, edges, &coords) {
            Ok(l) => Ok(l),
            Err(Error::InvalidArgument(msg)) if msg.contains("unit grid step") => {
                let mut l = Self::from_parts_unchecked(kind, edges, &coords)?;
                l.embedded = false;
                Ok(l)
            }
            Err(e) => Err(e),
        }
    }

    fn from_parts_unchecked(kind: LatticeKind, edges: &[(usize, usize)], coords: &[(i64, i64)]) -> Result<Self> {
        let n = coords.len();
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b || a >= n || b >= n || !set.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidArgument(format!("bad edge ({a}, {b})")));
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let lattice = Lattice { kind, edges, coords: coords.to_vec(), adjacency, embedded: true };
        if !lattice.is_connected() {
            return Err(Error::InvalidArgument("lattice is not connected".into()));
        }
        Ok(lattice)
    }

    /// Whether every edge is a unit step of the grid embedding.
    pub fn is_embedded(&self) -> bool {
        self.embedded
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn coords(&self) -> &[(i64, i64)] {
        &self.coords
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n() && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Index of `(min, max)` in [`Lattice::edges`].
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n()
    }

    /// BFS two-coloring; `None` if the graph has an odd cycle.
    pub fn two_coloring(&self) -> Option<Vec<u8>> {
        let mut color = vec![u8::MAX; self.n()];
        color[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if color[w] == u8::MAX {
                    color[w] = 1 - color[v];
                    queue.push_back(w);
                } else if color[w] == color[v] {
                    return None;
                }
            }
        }
        Some(color)
    }

    pub fn to_doc(&self) -> LatticeDoc {
        LatticeDoc {
            kind: self.kind.to_string(),
            n: self.n(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            coords: self.coords.iter().map(|&(x, y)| [x, y]).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    /// Parses a lattice document. The `kind` field is authoritative; the
    /// stored edges and coordinates must agree with a fresh construction.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: LatticeDoc = serde_json::from_str(s)?;
        let kind: LatticeKind = doc.kind.parse()?;
        let lattice = match kind {
            LatticeKind::Graph { n } => {
                let edges: Vec<(usize, usize)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
                Lattice::from_graph(n, &edges)?
            }
            _ => build(kind)?,
        };
        if lattice.to_doc() != doc {
            return Err(Error::InvalidArgument(format!("lattice document disagrees with `{}`", doc.kind)));
        }
        Ok(lattice)
    }
}

/// JSON layout of a lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeDoc {
    pub kind: String,
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub coords: Vec<[i64; 2]>,
}

/// Builds any lattice kind.
pub fn build(kind: LatticeKind) -> Result<Lattice> {
    match kind {
        LatticeKind::HeavyHex(spec) => build_heavy_hex(spec),
        LatticeKind::Square { rows, cols } => build_square(rows, cols),
        LatticeKind::Graph { .. } => Err(Error::InvalidArgument("graph lattices need an explicit edge list".into())),
    }
}

pub fn build_heavy_hex(spec: HeavyHexSpec) -> Result<Lattice> {
    let kind = LatticeKind::HeavyHex(spec);
    match spec {
        HeavyHexSpec::Device(Device::Guadalupe) => {
            Lattice::from_parts(kind, &devices::GUADALUPE_EDGES, &devices::GUADALUPE_COORDS)
        }
        HeavyHexSpec::Device(Device::Geneva) => {
            Lattice::from_parts(kind, &devices::GENEVA_EDGES, &devices::GENEVA_COORDS)
        }
        HeavyHexSpec::Device(Device::Washington) => {
            Lattice::from_parts(kind, &devices::WASHINGTON_EDGES, &devices::WASHINGTON_COORDS)
        }
        HeavyHexSpec::Grid { rows, cols } => heavy_hex_grid(rows, cols),
    }
}

/// Convenience wrapper accepting a device name.
pub fn build_device(name: &str) -> Result<Lattice> {
    build_heavy_hex(HeavyHexSpec::Device(name.parse()?))
}

/// Heavy-hex patch of `rows × cols` hexagonal cells.
///
/// Cells are laid out as a brick wall. Cell row `r` sits between qubit lines
/// `r` and `r + 1` (at `y = 2r` and `y = 2r + 2`) and is shifted right by two
/// sites on odd rows. A cell spans four sites horizontally; neighboring cells
/// in a row share their vertical bridge qubit at `y = 2r + 1`. Each qubit
/// line covers the union of the horizontal extents of the cell rows touching
/// it. For `rows = cols = 1` this is a single 12-qubit heavy hexagon; `2 × 2`
/// gives 35 qubits.
fn heavy_hex_grid(rows: usize, cols: usize) -> Result<Lattice> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidDimensions(format!("{rows}x{cols}")));
    }
    let offset = |r: usize| -> i64 { if r % 2 == 1 { 2 } else { 0 } };
    let width = 4 * cols as i64;
    let mut sites: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut links: Vec<((i64, i64), (i64, i64))> = Vec::new();
    for line in 0..=rows {
        let touching: Vec<usize> = [line.checked_sub(1), Some(line)]
            .into_iter()
            .flatten()
            .filter(|&r| r < rows)
            .collect();
        let x0 = touching.iter().map(|&r| offset(r)).min().unwrap();
        let x1 = touching.iter().map(|&r| offset(r) + width).max().unwrap();
        let y = 2 * line as i64;
        for x in x0..=x1 {
            sites.insert((x, y));
            if x > x0 {
                links.push(((x - 1, y), (x, y)));
            }
        }
    }
    for r in 0..rows {
        let y = 2 * r as i64 + 1;
        for c in 0..=cols {
            let x = offset(r) + 4 * c as i64;
            sites.insert((x, y));
            links.push(((x, y - 1), (x, y)));
            links.push(((x, y), (x, y + 1)));
        }
    }
    from_reading_order(LatticeKind::HeavyHex(HeavyHexSpec::Grid { rows, cols }), &sites, &links)
}

/// Open-boundary `rows × cols` square grid; vertex `r * cols + c`.
pub fn build_square(rows: usize, cols: usize) -> Result<Lattice> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidDimensions(format!("square lattice needs at least 2x2, got {rows}x{cols}")));
    }
    let mut sites = BTreeSet::new();
    let mut links = Vec::new();
    for r in 0..rows as i64 {
        for c in 0..cols as i64 {
            sites.insert((c, r));
            if c > 0 {
                links.push(((c - 1, r), (c, r)));
            }
            if r > 0 {
                links.push(((c, r - 1), (c, r)));
            }
        }
    }
    from_reading_order(LatticeKind::Square { rows, cols }, &sites, &links)
}

fn from_reading_order(
    kind: LatticeKind,
    sites: &BTreeSet<(i64, i64)>,
    links: &[((i64, i64), (i64, i64))],
) -> Result<Lattice> {
    let mut ordered: Vec<(i64, i64)> = sites.iter().copied().collect();
    ordered.sort_by_key(|&(x, y)| (y, x));
    let index: BTreeMap<(i64, i64), usize> = ordered.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let edges: Vec<(usize, usize)> = links.iter().map(|(a, b)| (index[a], index[b])).collect();
    Lattice::from_parts(kind, &edges, &ordered)
}

/// Degree classes of a heavy-hex lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexClassification {
    pub v1: Vec<usize>,
    pub v2: Vec<usize>,
    pub v3: Vec<usize>,
    /// Degree-2 vertices whose two neighbors both have degree 3, with those
    /// neighbors `(l, n1, n2)`, `n1 < n2`.
    pub w: Vec<(usize, usize, usize)>,
}

pub fn classify_vertices(lattice: &Lattice) -> Result<VertexClassification> {
    if !lattice.kind().is_heavy_hex() {
        return Err(Error::NotHeavyHex);
    }
    Ok(classify_by_degree(lattice))
}

/// Degree scan without the lattice-kind check; also used for ad-hoc test
/// graphs.
pub(crate) fn classify_by_degree(lattice: &Lattice) -> VertexClassification {
    let mut out = VertexClassification { v1: vec![], v2: vec![], v3: vec![], w: vec![] };
    for v in 0..lattice.n() {
        match lattice.degree(v) {
            1 => out.v1.push(v),
            2 => {
                out.v2.push(v);
                let nb = lattice.neighbors(v);
                if nb.iter().all(|&u| lattice.degree(u) == 3) {
                    out.w.push((v, nb[0], nb[1]));
                }
            }
            _ => out.v3.push(v),
        }
    }
    out
}

/// Column decomposition of the embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnPartition {
    /// Vertices of each column, ordered by row.
    pub columns: Vec<Vec<usize>>,
    /// Distinct row coordinates, ascending; `row_of[v]` indexes into this.
    pub row_values: Vec<i64>,
    pub column_of: Vec<usize>,
    pub row_of: Vec<usize>,
    /// Edges inside a column.
    pub internal_edges: Vec<(usize, usize)>,
    /// Edges `(left, right)` between column `b` and `b + 1`.
    pub inter_edges: Vec<(usize, usize)>,
}

impl ColumnPartition {
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_values.len()
    }

    /// Vertex at `(column, row)` grid slot, if any.
    pub fn site(&self, column: usize, row: usize) -> Option<usize> {
        self.columns[column].iter().copied().find(|&v| self.row_of[v] == row)
    }
}

pub fn column_partition(lattice: &Lattice) -> ColumnPartition {
    let xs: BTreeSet<i64> = lattice.coords().iter().map(|c| c.0).collect();
    let ys: BTreeSet<i64> = lattice.coords().iter().map(|c| c.1).collect();
    let xs: Vec<i64> = xs.into_iter().collect();
    let row_values: Vec<i64> = ys.into_iter().collect();
    let column_of: Vec<usize> = lattice.coords().iter().map(|c| xs.binary_search(&c.0).unwrap()).collect();
    let row_of: Vec<usize> = lattice.coords().iter().map(|c| row_values.binary_search(&c.1).unwrap()).collect();
    let mut columns = vec![Vec::new(); xs.len()];
    for v in 0..lattice.n() {
        columns[column_of[v]].push(v);
    }
    for col in &mut columns {
        col.sort_by_key(|&v| lattice.coords()[v].1);
    }
    let mut internal_edges = Vec::new();
    let mut inter_edges = Vec::new();
    for &(a, b) in lattice.edges() {
        if column_of[a] == column_of[b] {
            internal_edges.push((a, b));
        } else if column_of[a] < column_of[b] {
            inter_edges.push((a, b));
        } else {
            inter_edges.push((b, a));
        }
    }
    ColumnPartition { columns, row_values, column_of, row_of, internal_edges, inter_edges }
}

/// Edges between the two middle columns, choosing the split that puts the
/// vertex count closest to one half on the left.
pub fn bisecting_cut(lattice: &Lattice) -> Vec<(usize, usize)> {
    let part = column_partition(lattice);
    if part.num_columns() < 2 {
        return Vec::new();
    }
    let n = lattice.n() as i64;
    let mut left = 0i64;
    let mut best = (i64::MAX, 0usize);
    for b in 0..part.num_columns() - 1 {
        left += part.columns[b].len() as i64;
        let score = (2 * left - n).abs();
        if score < best.0 {
            best = (score, b);
        }
    }
    part.inter_edges
        .iter()
        .filter(|&&(a, _)| part.column_of[a] == best.1)
        .copied()
        .collect()
}
