use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// A `K x L` torus, sites indexed row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "(usize, usize)", try_from = "(usize, usize)")]
pub struct LatticeGeometry {
    rows: usize,
    cols: usize,
    neighbors: Vec<[usize; 4]>,
}

impl LatticeGeometry {
    /// Builds the torus; both dimensions must be at least 3 so that every
    /// site has four distinct neighbours.
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows < 3 || cols < 3 {
            return Err(contract(format!(
                "torus dimensions must be at least 3x3, got {rows}x{cols}"
            )));
        }
        let mut neighbors = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let up = ((r + rows - 1) % rows) * cols + c;
                let down = ((r + 1) % rows) * cols + c;
                let left = r * cols + (c + cols - 1) % cols;
                let right = r * cols + (c + 1) % cols;
                neighbors.push([up, down, left, right]);
            }
        }
        Ok(Self { rows, cols, neighbors })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn edge_count(&self) -> usize {
        2 * self.sites()
    }

    /// Up, down, left, right.
    #[inline]
    pub fn neighbors(&self, site: usize) -> &[usize; 4] {
        &self.neighbors[site]
    }

    #[inline]
    pub fn site(&self, row: usize, col: usize) -> usize {
        (row % self.rows) * self.cols + col % self.cols
    }

    #[inline]
    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site / self.cols, site % self.cols)
    }

    /// Each undirected edge exactly once: (x, down(x)) and (x, right(x)).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(x, n)| [(x, n[1]), (x, n[3])])
    }
}

impl From<LatticeGeometry> for (usize, usize) {
    fn from(g: LatticeGeometry) -> Self {
        (g.rows, g.cols)
    }
}

impl TryFrom<(usize, usize)> for LatticeGeometry {
    type Error = crate::Error;
    fn try_from((r, c): (usize, usize)) -> Result<Self> {
        Self::new(r, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn rejects_thin_tori() {
        assert!(LatticeGeometry::new(2, 5).is_err());
        assert!(LatticeGeometry::new(5, 1).is_err());
    }

    #[test]
    fn neighbor_table_is_symmetric_with_four_distinct_entries() {
        for (k, l) in [(3, 3), (3, 4), (5, 7)] {
            let g = LatticeGeometry::new(k, l).unwrap();
            for x in 0..g.sites() {
                let n = g.neighbors(x);
                let distinct: HashSet<_> = n.iter().collect();
                assert_eq!(distinct.len(), 4);
                assert!(!n.contains(&x));
                for &y in n {
                    assert!(g.neighbors(y).contains(&x));
                }
            }
        }
    }

    #[test]
    fn edge_count_is_twice_the_sites() {
        let g = LatticeGeometry::new(4, 6).unwrap();
        let edges: HashSet<_> = g.edges().map(|(a, b)| (a.min(b), a.max(b))).collect();
        assert_eq!(edges.len(), 48);
        assert_eq!(g.edge_count(), 48);
    }
}
