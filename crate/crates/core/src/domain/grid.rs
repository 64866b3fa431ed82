use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

/// Index of a grid cell in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell(pub usize);

impl Cell {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Free,
    Obstacle,
    Target,
    Bin,
}

impl CellKind {
    fn from_char(ch: char) -> Option<Self> {
        match ch {
            '.' => Some(CellKind::Free),
            '@' => Some(CellKind::Obstacle),
            'T' => Some(CellKind::Target),
            'B' => Some(CellKind::Bin),
            _ => None,
        }
    }

    fn to_char(self) -> char {
        match self {
            CellKind::Free => '.',
            CellKind::Obstacle => '@',
            CellKind::Target => 'T',
            CellKind::Bin => 'B',
        }
    }

    #[inline]
    pub fn is_traversable(self) -> bool {
        self != CellKind::Obstacle
    }
}

/// A 4-connected grid world.
///
/// Stations are numbered in row-major order of their target cells. Target
/// and bin cells are ordinary traversable cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    kinds: Vec<CellKind>,
    stations: Vec<Cell>,
    bins: Vec<Cell>,
}

impl GridMap {
    /// Parses the ASCII map format (`.` free, `@` obstacle, `T` station
    /// target, `B` sorting bin). A single trailing newline is accepted.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.strip_suffix('\n').unwrap_or(text);
        let lines: Vec<&str> = text
            .split('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();
        if lines.is_empty() || lines[0].is_empty() {
            return Err(Error::EmptyMap);
        }
        let width = lines[0].chars().count();
        let height = lines.len();
        let mut kinds = Vec::with_capacity(width * height);
        for (row, line) in lines.iter().enumerate() {
            let found = line.chars().count();
            if found != width {
                return Err(Error::NonRectangular {
                    line: row + 1,
                    expected: width,
                    found,
                });
            }
            for (col, ch) in line.chars().enumerate() {
                let kind = CellKind::from_char(ch).ok_or(Error::UnknownCharacter {
                    ch,
                    line: row + 1,
                    column: col + 1,
                })?;
                kinds.push(kind);
            }
        }
        Self::from_kinds(width, height, kinds)
    }

    /// Builds a map from row-major cell kinds and validates connectivity.
    pub fn from_kinds(width: usize, height: usize, kinds: Vec<CellKind>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyMap);
        }
        if kinds.len() != width * height {
            return Err(Error::InvalidInstance(format!(
                "expected {} cells, got {}",
                width * height,
                kinds.len()
            )));
        }
        let stations = collect_kind(&kinds, CellKind::Target);
        let bins = collect_kind(&kinds, CellKind::Bin);
        let map = GridMap {
            width,
            height,
            kinds,
            stations,
            bins,
        };
        map.check_connected()?;
        Ok(map)
    }

    fn check_connected(&self) -> Result<()> {
        let Some(first) = self.traversable_cells().next() else {
            return Ok(());
        };
        let dist = self.distances_from(first);
        if let Some(c) = self.traversable_cells().find(|c| dist[c.index()].is_none()) {
            let (row, col) = self.coords(c);
            let (from_row, from_col) = self.coords(first);
            return Err(Error::Disconnected {
                row,
                col,
                from_row,
                from_col,
            });
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, cell: Cell) -> CellKind {
        self.kinds[cell.index()]
    }

    pub fn is_traversable(&self, cell: Cell) -> bool {
        self.kinds[cell.index()].is_traversable()
    }

    /// Target cells indexed by station id.
    pub fn stations(&self) -> &[Cell] {
        &self.stations
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn target(&self, station: usize) -> Cell {
        self.stations[station]
    }

    pub fn bins(&self) -> &[Cell] {
        &self.bins
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<Cell> {
        (row < self.height && col < self.width).then(|| Cell(row * self.width + col))
    }

    pub fn coords(&self, cell: Cell) -> (usize, usize) {
        (cell.index() / self.width, cell.index() % self.width)
    }

    pub fn traversable_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| k.is_traversable())
            .map(|(i, _)| Cell(i))
    }

    /// Traversable 4-neighbors in increasing cell-index order
    /// (up, left, right, down).
    pub fn neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        let (row, col) = self.coords(cell);
        let up = (row > 0).then(|| cell.index() - self.width);
        let left = (col > 0).then(|| cell.index() - 1);
        let right = (col + 1 < self.width).then(|| cell.index() + 1);
        let down = (row + 1 < self.height).then(|| cell.index() + self.width);
        [up, left, right, down]
            .into_iter()
            .flatten()
            .map(Cell)
            .filter(|c| self.is_traversable(*c))
    }

    pub fn are_adjacent(&self, a: Cell, b: Cell) -> bool {
        let (ra, ca) = self.coords(a);
        let (rb, cb) = self.coords(b);
        ra.abs_diff(rb) + ca.abs_diff(cb) == 1
    }

    /// Breadth-first hop distances from `origin` over traversable cells.
    /// Since moves are symmetric this also gives distances *to* `origin`.
    pub fn distances_from(&self, origin: Cell) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.cell_count()];
        if !self.is_traversable(origin) {
            return dist;
        }
        dist[origin.index()] = Some(0);
        let mut queue = VecDeque::from([origin]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.index()].unwrap();
            for v in self.neighbors(u) {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// One distance table per station target.
    pub fn station_distances(&self) -> Vec<Vec<Option<u32>>> {
        self.stations
            .iter()
            .map(|&g| self.distances_from(g))
            .collect()
    }
}

fn collect_kind(kinds: &[CellKind], kind: CellKind) -> Vec<Cell> {
    kinds
        .iter()
        .enumerate()
        .filter(|(_, k)| **k == kind)
        .map(|(i, _)| Cell(i))
        .collect()
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.kinds.chunks(self.width) {
            let line: String = row.iter().map(|k| k.to_char()).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_map() {
        let map = GridMap::parse("T.\n.B").unwrap();
        assert_eq!(map.width(), 2);
        assert_eq!(map.height(), 2);
        assert_eq!(map.stations(), &[Cell(0)]);
        assert_eq!(map.bins(), &[Cell(3)]);
        assert_eq!(map.traversable_cells().count(), 4);
        assert_eq!(map.kind(Cell(1)), CellKind::Free);
    }

    #[test]
    fn stations_are_row_major() {
        let map = GridMap::parse("..T\nT..\n.T.\n").unwrap();
        assert_eq!(map.stations(), &[Cell(2), Cell(3), Cell(7)]);
    }

    #[test]
    fn rejects_ragged_lines() {
        let err = GridMap::parse("...\n..\n").unwrap_err();
        assert_eq!(
            err,
            Error::NonRectangular {
                line: 2,
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn rejects_unknown_char() {
        let err = GridMap::parse("..\n.x\n").unwrap_err();
        assert!(matches!(err, Error::UnknownCharacter { ch: 'x', line: 2, column: 2 }));
    }

    #[test]
    fn rejects_empty() {
        assert_eq!(GridMap::parse(""), Err(Error::EmptyMap));
        assert_eq!(GridMap::parse("\n"), Err(Error::EmptyMap));
    }

    #[test]
    fn rejects_wall_split() {
        let err = GridMap::parse("..@..\n..@..\n..@..\n").unwrap_err();
        assert!(matches!(err, Error::Disconnected { .. }));
    }

    #[test]
    fn display_round_trips() {
        let text = "@.@\n@.@\n..T\n@T@\n";
        let map = GridMap::parse(text).unwrap();
        assert_eq!(map.to_string(), text);
    }

    #[test]
    fn neighbors_skip_obstacles_and_borders() {
        let map = GridMap::parse("@.@\n@.@\n..T\n@T@\n").unwrap();
        let d = map.cell(2, 1).unwrap();
        let n: Vec<_> = map.neighbors(d).collect();
        assert_eq!(n, vec![Cell(4), Cell(6), Cell(8), Cell(10)]);
        let a = map.cell(0, 1).unwrap();
        assert_eq!(map.neighbors(a).collect::<Vec<_>>(), vec![Cell(4)]);
    }

    #[test]
    fn distances() {
        let map = GridMap::parse("@.@\n@.@\n..T\n@T@\n").unwrap();
        let a = map.cell(0, 1).unwrap();
        let dist = map.distances_from(a);
        assert_eq!(dist[map.target(0).index()], Some(3));
        assert_eq!(dist[map.target(1).index()], Some(3));
        assert_eq!(dist[0], None);
    }
}
