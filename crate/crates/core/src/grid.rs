//! The toroidal lattice of players.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::rng::{RngPolicy, StreamPurpose};
use crate::strategy::{Behavior, Role, StrategyKind, ALL_KINDS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid must be at least 3x3 so every cell has eight distinct neighbours, got {width}x{height}")]
    DegenerateDimensions { width: u32, height: u32 },
    #[error("mix fractions must be nonnegative, got {0} for {1}")]
    NegativeFraction(f64, StrategyKind),
    #[error("mix fractions must sum to 1, got {0}")]
    FractionsDoNotSumToOne(f64),
    #[error("mix must name at least one kind")]
    EmptyMix,
    #[error("snapshot is empty")]
    EmptySnapshot,
    #[error("snapshot row {row} has {got} cells, expected {expected}")]
    RaggedSnapshot {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("unknown snapshot glyph {0:?}")]
    UnknownGlyph(char),
}

/// One lattice site: a strategy kind plus its role when collective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CellState {
    kind: StrategyKind,
    role: Option<Role>,
}

impl CellState {
    pub fn new(kind: StrategyKind, role: Option<Role>) -> CellState {
        debug_assert_eq!(role.is_some(), kind == StrategyKind::Csmsm);
        CellState { kind, role }
    }

    pub fn plain(kind: StrategyKind) -> CellState {
        CellState::new(kind, None)
    }

    pub fn csmsm(role: Role) -> CellState {
        CellState::new(StrategyKind::Csmsm, Some(role))
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn role(&self) -> Option<Role> {
        self.role
    }

    pub fn behavior(&self) -> Behavior {
        Behavior::new(self.kind, self.role).expect("cell states hold valid behaviors")
    }

    /// One-character snapshot glyph. Masters and slaves are distinguished;
    /// every other kind uses a unique letter.
    pub fn glyph(&self) -> char {
        match (self.kind, self.role) {
            (StrategyKind::Csmsm, Some(Role::Master)) => 'M',
            (StrategyKind::Csmsm, Some(Role::Slave)) => 'm',
            (StrategyKind::Tft, _) => 'T',
            (StrategyKind::Tftt, _) => 't',
            (StrategyKind::Grim, _) => 'G',
            (StrategyKind::AllC, _) => 'C',
            (StrategyKind::AllD, _) => 'D',
            (StrategyKind::Random, _) => 'R',
            (StrategyKind::Adaptive, _) => 'A',
            (StrategyKind::Csmsm, None) => unreachable!(),
        }
    }

    pub fn from_glyph(c: char) -> Result<CellState, GridError> {
        Ok(match c {
            'M' => CellState::csmsm(Role::Master),
            'm' => CellState::csmsm(Role::Slave),
            'T' => CellState::plain(StrategyKind::Tft),
            't' => CellState::plain(StrategyKind::Tftt),
            'G' => CellState::plain(StrategyKind::Grim),
            'C' => CellState::plain(StrategyKind::AllC),
            'D' => CellState::plain(StrategyKind::AllD),
            'R' => CellState::plain(StrategyKind::Random),
            'A' => CellState::plain(StrategyKind::Adaptive),
            other => return Err(GridError::UnknownGlyph(other)),
        })
    }
}

/// Rectangular toroidal lattice plus a generation counter.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    width: u32,
    height: u32,
    cells: Vec<CellState>,
    generation: u64,
}

impl GridState {
    /// A homogeneous grid.
    pub fn uniform(width: u32, height: u32, cell: CellState) -> Result<GridState, GridError> {
        Self::from_cells(
            width,
            height,
            vec![cell; (width as usize) * (height as usize)],
        )
    }

    pub(crate) fn from_cells(
        width: u32,
        height: u32,
        cells: Vec<CellState>,
    ) -> Result<GridState, GridError> {
        if width < 3 || height < 3 {
            return Err(GridError::DegenerateDimensions { width, height });
        }
        assert_eq!(cells.len(), (width as usize) * (height as usize));
        Ok(GridState {
            width,
            height,
            cells,
            generation: 0,
        })
    }

    /// Draws every cell's kind independently from `mix` (pairs of kind and
    /// fraction; fractions must be nonnegative and sum to 1). Collective
    /// cells all start as masters.
    pub fn init_random(
        width: u32,
        height: u32,
        mix: &[(StrategyKind, f64)],
        rng: &RngPolicy,
    ) -> Result<GridState, GridError> {
        if mix.is_empty() {
            return Err(GridError::EmptyMix);
        }
        for &(kind, f) in mix {
            if f.is_nan() || f < 0.0 {
                return Err(GridError::NegativeFraction(f, kind));
            }
        }
        let total: f64 = mix.iter().map(|&(_, f)| f).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(GridError::FractionsDoNotSumToOne(total));
        }
        let n = (width as usize) * (height as usize);
        let cells = (0..n)
            .map(|i| {
                let u: f64 = rng.stream(StreamPurpose::Init, 0, i as u64).gen();
                let mut acc = 0.0;
                let mut chosen = mix.last().unwrap().0;
                for &(kind, f) in mix {
                    acc += f;
                    if u < acc {
                        chosen = kind;
                        break;
                    }
                }
                match chosen {
                    StrategyKind::Csmsm => CellState::csmsm(Role::Master),
                    kind => CellState::plain(kind),
                }
            })
            .collect();
        Self::from_cells(width, height, cells)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub(crate) fn set_generation(&mut self, generation: u64) {
        self.generation = generation;
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn index_of(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize) * (self.width as usize) + (x as usize)
    }

    pub fn coords_of(&self, idx: usize) -> (u32, u32) {
        let x = (idx % self.width as usize) as u32;
        let y = (idx / self.width as usize) as u32;
        (x, y)
    }

    pub fn cell(&self, idx: usize) -> CellState {
        self.cells[idx]
    }

    pub fn cell_at(&self, x: u32, y: u32) -> CellState {
        self.cells[self.index_of(x, y)]
    }

    pub(crate) fn set_cell(&mut self, idx: usize, cell: CellState) {
        self.cells[idx] = cell;
    }

    /// The eight Moore neighbours under toroidal wrap, in the fixed scan
    /// order NW, N, NE, W, E, SW, S, SE.
    pub fn neighbors(&self, idx: usize) -> [usize; 8] {
        let (x, y) = self.coords_of(idx);
        let w = self.width;
        let h = self.height;
        let left = (x + w - 1) % w;
        let right = (x + 1) % w;
        let up = (y + h - 1) % h;
        let down = (y + 1) % h;
        [
            self.index_of(left, up),
            self.index_of(x, up),
            self.index_of(right, up),
            self.index_of(left, y),
            self.index_of(right, y),
            self.index_of(left, down),
            self.index_of(x, down),
            self.index_of(right, down),
        ]
    }

    /// Cell counts in the canonical kind order.
    pub fn kind_counts(&self) -> [u64; ALL_KINDS.len()] {
        let mut counts = [0u64; ALL_KINDS.len()];
        for cell in &self.cells {
            counts[cell.kind().index()] += 1;
        }
        counts
    }

    /// The single kind occupying every cell, if any.
    pub fn homogeneous_kind(&self) -> Option<StrategyKind> {
        let first = self.cells.first()?.kind();
        self.cells
            .iter()
            .all(|c| c.kind() == first)
            .then_some(first)
    }

    /// Plain-text snapshot: one glyph per cell, one row per line.
    pub fn to_snapshot(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() + self.height as usize);
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(self.cell_at(x, y).glyph());
            }
            out.push('\n');
        }
        out
    }

    /// Rebuilds a grid (generation 0) from snapshot text.
    pub fn from_snapshot(text: &str) -> Result<GridState, GridError> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
        if rows.is_empty() {
            return Err(GridError::EmptySnapshot);
        }
        let width = rows[0].chars().count();
        let mut cells = Vec::with_capacity(rows.len() * width);
        for (i, row) in rows.iter().enumerate() {
            let mut count = 0;
            for c in row.chars() {
                cells.push(CellState::from_glyph(c)?);
                count += 1;
            }
            if count != width {
                return Err(GridError::RaggedSnapshot {
                    row: i,
                    got: count,
                    expected: width,
                });
            }
        }
        Self::from_cells(width as u32, rows.len() as u32, cells)
    }

    /// Debug rendering used in error reports and logs.
    pub fn render_compact(&self) -> String {
        let counts = self.kind_counts();
        let mut out = String::new();
        write!(
            out,
            "{}x{} gen {}:",
            self.width, self.height, self.generation
        )
        .unwrap();
        for (kind, count) in ALL_KINDS.iter().zip(counts) {
            if count > 0 {
                write!(out, " {kind}={count}").unwrap();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_of_3x3_sees_all_other_cells() {
        let g = GridState::uniform(3, 3, CellState::plain(StrategyKind::Tft)).unwrap();
        let center = g.index_of(1, 1);
        let mut nbrs = g.neighbors(center).to_vec();
        nbrs.sort_unstable();
        assert_eq!(nbrs, vec![0, 1, 2, 3, 5, 6, 7, 8]);
    }

    #[test]
    fn corner_wraps_around_the_torus() {
        let g = GridState::uniform(5, 5, CellState::plain(StrategyKind::Tft)).unwrap();
        let nbrs = g.neighbors(g.index_of(0, 0));
        for idx in nbrs {
            let (x, y) = g.coords_of(idx);
            assert!([4, 0, 1].contains(&x), "x={x}");
            assert!([4, 0, 1].contains(&y), "y={y}");
        }
        // NW of the origin is the far corner.
        assert_eq!(nbrs[0], g.index_of(4, 4));
    }

    #[test]
    fn every_cell_of_minimal_torus_sees_the_rest() {
        let g = GridState::uniform(3, 3, CellState::plain(StrategyKind::Grim)).unwrap();
        for idx in 0..g.cell_count() {
            let mut nbrs = g.neighbors(idx).to_vec();
            nbrs.sort_unstable();
            nbrs.dedup();
            assert_eq!(nbrs.len(), 8);
            assert!(!nbrs.contains(&idx));
        }
    }

    #[test]
    fn degenerate_dimensions_rejected() {
        assert!(matches!(
            GridState::uniform(2, 5, CellState::plain(StrategyKind::Tft)),
            Err(GridError::DegenerateDimensions { .. })
        ));
    }

    #[test]
    fn init_random_respects_mix() {
        let rng = RngPolicy::new(11);
        let mix = [(StrategyKind::Csmsm, 0.5), (StrategyKind::Tft, 0.5)];
        let g = GridState::init_random(100, 100, &mix, &rng).unwrap();
        let counts = g.kind_counts();
        let csmsm = counts[StrategyKind::Csmsm.index()] as f64 / 10_000.0;
        assert!((csmsm - 0.5).abs() < 0.03, "csmsm fraction {csmsm}");
        // Every collective cell starts as a master.
        assert!(g
            .cells()
            .iter()
            .filter(|c| c.kind() == StrategyKind::Csmsm)
            .all(|c| c.role() == Some(Role::Master)));
    }

    #[test]
    fn init_random_single_kind() {
        let rng = RngPolicy::new(0);
        let g = GridState::init_random(3, 3, &[(StrategyKind::Tft, 1.0)], &rng).unwrap();
        assert_eq!(g.homogeneous_kind(), Some(StrategyKind::Tft));
    }

    #[test]
    fn bad_mixes_rejected() {
        let rng = RngPolicy::new(0);
        assert!(matches!(
            GridState::init_random(3, 3, &[(StrategyKind::Tft, 0.4)], &rng),
            Err(GridError::FractionsDoNotSumToOne(_))
        ));
        assert!(matches!(
            GridState::init_random(
                3,
                3,
                &[(StrategyKind::Tft, 1.5), (StrategyKind::AllD, -0.5)],
                &rng
            ),
            Err(GridError::NegativeFraction(..))
        ));
        assert!(matches!(
            GridState::init_random(3, 3, &[], &rng),
            Err(GridError::EmptyMix)
        ));
    }

    #[test]
    fn snapshot_round_trips() {
        let rng = RngPolicy::new(5);
        let mix = [
            (StrategyKind::Csmsm, 0.3),
            (StrategyKind::Tft, 0.3),
            (StrategyKind::AllD, 0.4),
        ];
        let g = GridState::init_random(12, 7, &mix, &rng).unwrap();
        let text = g.to_snapshot();
        let back = GridState::from_snapshot(&text).unwrap();
        assert_eq!(back.cells(), g.cells());
        assert_eq!(back.width(), 12);
        assert_eq!(back.height(), 7);
    }

    #[test]
    fn snapshot_parse_errors() {
        assert!(matches!(
            GridState::from_snapshot(""),
            Err(GridError::EmptySnapshot)
        ));
        assert!(matches!(
            GridState::from_snapshot("TTT\nTT\nTTT\n"),
            Err(GridError::RaggedSnapshot { row: 1, .. })
        ));
        assert!(matches!(
            GridState::from_snapshot("TTT\nTXT\nTTT\n"),
            Err(GridError::UnknownGlyph('X'))
        ));
    }
}
