use crate::field::Point;
use crate::forward::{Obstacle, ScanGrid};
use serde::{Deserialize, Serialize};

/// Indicator values on a [`ScanGrid`]; cell `(i, j)` is stored at `j * nx + i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorGrid {
    pub grid: ScanGrid,
    pub values: Vec<f64>,
    /// `true` where no value could be computed; the stored value is then 0.
    pub mask: Vec<bool>,
}

impl IndicatorGrid {
    pub fn from_cells(grid: ScanGrid, cells: Vec<Option<f64>>) -> Self {
        let mask = cells.iter().map(Option::is_none).collect();
        let values = cells.into_iter().map(|c| c.unwrap_or(0.0)).collect();
        IndicatorGrid { grid, values, mask }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, k: usize) -> Point {
        self.grid.point(k % self.grid.nx, k / self.grid.nx)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = j * self.grid.nx + i;
        (!self.mask[k] && self.values[k].is_finite()).then_some(self.values[k])
    }

    fn valid(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().filter(|(k, v)| !self.mask[*k] && v.is_finite()).map(|(k, v)| (k, *v))
    }

    /// Smallest and largest unmasked finite values.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.valid().fold(None, |acc, (_, v)| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    /// Mean over cells inside the obstacle divided by the mean over cells outside.
    pub fn contrast(&self, obstacle: &Obstacle) -> f64 {
        let (mut si, mut ni, mut so, mut no) = (0.0, 0usize, 0.0, 0usize);
        for (k, v) in self.valid() {
            if obstacle.contains(self.point(k)) {
                si += v;
                ni += 1;
            } else {
                so += v;
                no += 1;
            }
        }
        (si / ni as f64) / (so / no as f64)
    }

    /// Area of the symmetric difference between `{value >= frac * max}` and the
    /// obstacle, relative to the obstacle area.
    pub fn level_set_mismatch(&self, obstacle: &Obstacle, frac: f64) -> f64 {
        let Some((_, hi)) = self.range() else { return f64::NAN };
        let dx = (self.grid.max[0] - self.grid.min[0]) / (self.grid.nx - 1) as f64;
        let dy = (self.grid.max[1] - self.grid.min[1]) / (self.grid.ny - 1) as f64;
        let wrong = (0..self.len())
            .filter(|&k| {
                let on = !self.mask[k] && self.values[k] >= frac * hi;
                on != obstacle.contains(self.point(k))
            })
            .count();
        wrong as f64 * dx * dy / obstacle.area()
    }

    /// Cells that are local maxima along at least one of the four grid lines through
    /// them (horizontal, vertical, both diagonals) with min-max normalized value at
    /// least `frac`.
    pub fn ridge(&self, frac: f64) -> Vec<usize> {
        let Some((lo, hi)) = self.range() else { return Vec::new() };
        let floor = lo + frac * (hi - lo);
        let (nx, ny) = (self.grid.nx as i64, self.grid.ny as i64);
        let at = |i: i64, j: i64| {
            if i < 0 || j < 0 || i >= nx || j >= ny {
                None
            } else {
                self.get(i as usize, j as usize)
            }
        };
        (0..self.len())
            .filter(|&k| {
                let (i, j) = ((k as i64) % nx, (k as i64) / nx);
                let Some(v) = at(i, j) else { return false };
                v >= floor
                    && [(1, 0), (0, 1), (1, 1), (1, -1)].iter().any(|&(di, dj)| {
                        match (at(i - di, j - dj), at(i + di, j + dj)) {
                            (Some(a), Some(b)) => v >= a && v >= b && (v > a || v > b),
                            _ => false,
                        }
                    })
            })
            .collect()
    }

    /// Distance from `p` to the nearest cell in `cells`, in grid cells.
    pub fn distance_in_cells(&self, p: Point, cells: &[usize]) -> f64 {
        let c = self.grid.cell();
        cells
            .iter()
            .map(|&k| {
                let q = self.point(k);
                (q[0] - p[0]).hypot(q[1] - p[1]) / c
            })
            .fold(f64::INFINITY, f64::min)
    }
}
