//! Dense row-major matrix used by every raster in the crate.

use alloc::vec;
use alloc::vec::Vec;

/// A `(row, col)` cell coordinate.
pub type Cell = (usize, usize);

/// Dense row-major 2-D matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }
}

impl<T> Grid<T> {
    /// Wraps row-major `data`; returns `None` when the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Option<Self> {
        (rows * cols == data.len()).then_some(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn contains(&self, row: usize, col: usize) -> bool {
        row < self.rows && col < self.cols
    }

    /// Bounds check for signed coordinates.
    #[inline]
    pub fn contains_signed(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.rows && (col as usize) < self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<&T> {
        if self.contains(row, col) {
            Some(&self.data[row * self.cols + col])
        } else {
            None
        }
    }

    #[inline]
    pub fn get_mut(&mut self, row: usize, col: usize) -> Option<&mut T> {
        if self.contains(row, col) {
            Some(&mut self.data[row * self.cols + col])
        } else {
            None
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Iterates `((row, col), &value)` in row-major order.
    pub fn iter_cells(&self) -> impl Iterator<Item = (Cell, &T)> + '_ {
        let cols = self.cols.max(1);
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| ((k / cols, k % cols), v))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// In-bounds Moore (8-connected) neighbours of `(row, col)`, in a fixed order.
    pub fn moore_neighbors(&self, row: usize, col: usize) -> impl Iterator<Item = Cell> + '_ {
        MOORE
            .iter()
            .filter_map(move |&(dr, dc)| self.offset(row, col, dr, dc))
    }

    /// In-bounds von Neumann (4-connected) neighbours of `(row, col)`.
    pub fn edge_neighbors(&self, row: usize, col: usize) -> impl Iterator<Item = Cell> + '_ {
        EDGE.iter()
            .filter_map(move |&(dr, dc)| self.offset(row, col, dr, dc))
    }

    fn offset(&self, row: usize, col: usize, dr: isize, dc: isize) -> Option<Cell> {
        let r = row as isize + dr;
        let c = col as isize + dc;
        self.contains_signed(r, c).then_some((r as usize, c as usize))
    }
}

impl<T> core::ops::Index<Cell> for Grid<T> {
    type Output = T;

    #[inline]
    fn index(&self, (row, col): Cell) -> &T {
        assert!(self.contains(row, col), "cell ({row}, {col}) out of bounds");
        &self.data[row * self.cols + col]
    }
}

impl<T> core::ops::IndexMut<Cell> for Grid<T> {
    #[inline]
    fn index_mut(&mut self, (row, col): Cell) -> &mut T {
        assert!(self.contains(row, col), "cell ({row}, {col}) out of bounds");
        &mut self.data[row * self.cols + col]
    }
}

pub(crate) const MOORE: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

pub(crate) const EDGE: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
