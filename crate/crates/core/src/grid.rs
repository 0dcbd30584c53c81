//! Uniform grids aligned to the origin and sampled profiles on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `x_j = (first + j) * dx`, `j = 0..n`.
///
/// Nodes are integer multiples of `dx`, so `x = 0` is an exact node whenever
/// it lies in range, and sub-grids of a grid share its nodes bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dx: f64,
    first: i64,
    n: usize,
}

impl Grid {
    /// Grid on `[-L, L]` with `nodes` points; `nodes` must be odd and ≥ 3.
    pub fn symmetric(half_width: f64, nodes: usize) -> Result<Grid> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::config("grid.half_width", "must be positive"));
        }
        if nodes < 3 {
            return Err(Error::config("grid.nodes", format!("need at least 3 nodes, got {nodes}")));
        }
        if nodes % 2 == 0 {
            return Err(Error::config(
                "grid.nodes",
                format!("node count must be odd so that x = 0 is a node, got {nodes}"),
            ));
        }
        let mid = (nodes - 1) / 2;
        Ok(Grid {
            dx: half_width / mid as f64,
            first: -(mid as i64),
            n: nodes,
        })
    }

    /// Grid on `[-L, L]` with spacing `dx`; `L / dx` must be an integer.
    pub fn with_spacing(half_width: f64, dx: f64) -> Result<Grid> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::config("grid.dx", "must be positive"));
        }
        let cells = half_width / dx;
        let mid = cells.round();
        if (cells - mid).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::config(
                "grid.dx",
                format!("half_width / dx = {cells} is not an integer"),
            ));
        }
        let mid = mid as usize;
        Grid::symmetric(half_width, 2 * mid + 1).map(|g| Grid { dx, ..g })
    }

    /// Nodes of the `dx`-lattice inside `[lo, hi]`.
    pub fn aligned(lo: f64, hi: f64, dx: f64) -> Result<Grid> {
        if !(dx > 0.0 && lo < hi) {
            return Err(Error::Argument(format!("bad aligned grid [{lo}, {hi}] / {dx}")));
        }
        let first = (lo / dx - 1e-9).ceil() as i64;
        let last = (hi / dx + 1e-9).floor() as i64;
        if last < first + 2 {
            return Err(Error::Argument("aligned grid needs at least 3 nodes".into()));
        }
        Ok(Grid {
            dx,
            first,
            n: (last - first + 1) as usize,
        })
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        (self.first + j as i64) as f64 * self.dx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn x_min(&self) -> f64 {
        self.x(0)
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.n - 1)
    }

    /// Lattice index of the first node (`x_0 = first * dx`).
    pub fn first_index(&self) -> i64 {
        self.first
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.x(j))
    }

    /// Index of the node nearest to `x`, if `x` is within half a cell of the grid.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let k = (x / self.dx).round() as i64 - self.first;
        if k < 0 || k >= self.n as i64 {
            None
        } else {
            Some(k as usize)
        }
    }

    /// Index range of nodes with `lo <= x <= hi` (inclusive, tolerant to rounding).
    pub fn index_range(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let a = ((lo / self.dx) - 1e-9).ceil() as i64 - self.first;
        let b = ((hi / self.dx) + 1e-9).floor() as i64 - self.first;
        let a = a.max(0);
        let b = b.min(self.n as i64 - 1);
        if a > b {
            None
        } else {
            Some((a as usize, b as usize))
        }
    }

    /// Sub-grid of nodes `j0..=j1`.
    pub fn slice(&self, j0: usize, j1: usize) -> Grid {
        assert!(j0 <= j1 && j1 < self.n);
        Grid {
            dx: self.dx,
            first: self.first + j0 as i64,
            n: j1 - j0 + 1,
        }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            half_width: 0.5 * (self.x_max() - self.x_min()),
            nodes: Some(self.n),
            dx: Some(self.dx),
        }
    }
}

/// Serialized grid description: `half_width` plus either `nodes` or `dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
}

impl GridSpec {
    pub fn resolve(&self) -> Result<Grid> {
        match (self.nodes, self.dx) {
            (Some(n), None) => Grid::symmetric(self.half_width, n),
            (None, Some(dx)) => Grid::with_spacing(self.half_width, dx),
            (Some(n), Some(dx)) => {
                let g = Grid::symmetric(self.half_width, n)?;
                if (g.dx() - dx).abs() > 1e-9 * dx {
                    return Err(Error::config(
                        "grid.dx",
                        format!("dx = {dx} disagrees with nodes = {n} (dx would be {})", g.dx()),
                    ));
                }
                Ok(Grid { dx, ..g })
            }
            (None, None) => Err(Error::config("grid", "one of `nodes` or `dx` is required")),
        }
    }
}

/// A function of `x` sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Profile> {
        if values.len() != grid.len() {
            return Err(Error::Argument(format!(
                "profile has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at x = {}", grid.x(j))));
        }
        Ok(Profile { grid, values })
    }

    pub(crate) fn new_unchecked(grid: Grid, values: Vec<f64>) -> Profile {
        debug_assert_eq!(values.len(), grid.len());
        Profile { grid, values }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, f: F) -> Profile {
        let values = grid.nodes().map(f).collect();
        Profile { grid, values }
    }

    pub fn constant(grid: Grid, value: f64) -> Profile {
        Profile {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.grid.x(j)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Restriction to the nodes inside `[lo, hi]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Profile> {
        let (a, b) = self
            .grid
            .index_range(lo, hi)
            .ok_or_else(|| Error::Argument(format!("window [{lo}, {hi}] misses the grid")))?;
        Ok(Profile {
            grid: self.grid.slice(a, b),
            values: self.values[a..=b].to_vec(),
        })
    }

    /// Linear interpolation; `None` outside the grid.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        let s = x / self.grid.dx() - self.grid.first_index() as f64;
        if s < -1e-9 || s > (self.len() - 1) as f64 + 1e-9 {
            return None;
        }
        let s = s.clamp(0.0, (self.len() - 1) as f64);
        let j = (s.floor() as usize).min(self.len() - 2);
        let w = s - j as f64;
        Some((1.0 - w) * self.values[j] + w * self.values[j + 1])
    }

    /// Centered differences inside, one-sided second order at the ends.
    pub fn derivative(&self) -> Vec<f64> {
        let v = &self.values;
        let n = v.len();
        let h = self.grid.dx();
        let mut d = vec![0.0; n];
        for j in 1..n - 1 {
            d[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
        }
        if n >= 3 {
            d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
            d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        }
        d
    }

    /// Fourth-order centered first derivative; second-order within two
    /// nodes of the ends.
    pub fn derivative4(&self) -> Vec<f64> {
        let mut d = self.derivative();
        let v = &self.values;
        let h = self.grid.dx();
        for j in 2..v.len().saturating_sub(2) {
            d[j] = (-v[j + 2] + 8.0 * v[j + 1] - 8.0 * v[j - 1] + v[j - 2]) / (12.0 * h);
        }
        d
    }

    /// Pointwise difference on the common nodes of two aligned profiles.
    pub fn difference(&self, other: &Profile) -> Result<Profile> {
        if (self.grid.dx() - other.grid.dx()).abs() > 1e-12 * self.grid.dx() {
            return Err(Error::Argument("profiles live on grids with different dx".into()));
        }
        let lo = self.grid.first_index().max(other.grid.first_index());
        let hi = (self.grid.first_index() + self.len() as i64)
            .min(other.grid.first_index() + other.len() as i64)
            - 1;
        if hi < lo {
            return Err(Error::Argument("profiles do not overlap".into()));
        }
        let a = (lo - self.grid.first_index()) as usize;
        let b = (lo - other.grid.first_index()) as usize;
        let n = (hi - lo + 1) as usize;
        let values = (0..n).map(|k| self.values[a + k] - other.values[b + k]).collect();
        Ok(Profile {
            grid: self.grid.slice(a, a + n - 1),
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_an_exact_node() {
        let g = Grid::with_spacing(60.0, 0.05).unwrap();
        assert_eq!(g.len(), 2401);
        assert_eq!(g.x(1200), 0.0);
        assert!((g.x_min() + 60.0).abs() < 1e-12);
        assert!((g.x_max() - 60.0).abs() < 1e-12);
    }

    #[test]
    fn even_node_count_names_the_field() {
        match Grid::symmetric(10.0, 100) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "grid.nodes"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn restriction_keeps_alignment() {
        let g = Grid::with_spacing(10.0, 0.5).unwrap();
        let p = Profile::from_fn(g, |x| x * x);
        let r = p.restrict(-2.0, 3.0).unwrap();
        assert_eq!(r.len(), 11);
        assert_eq!(r.x(4), 0.0);
        assert_eq!(r.values()[0], 4.0);
        assert_eq!(p.value_at(0.25), Some(0.125));
        assert_eq!(p.value_at(11.0), None);
    }

    #[test]
    fn fourth_order_derivative() {
        let g = Grid::with_spacing(3.0, 0.1).unwrap();
        let p = Profile::from_fn(g, f64::sin);
        let d = p.derivative4();
        for j in 2..g.len() - 2 {
            assert!((d[j] - g.x(j).cos()).abs() < 5e-6);
        }
    }

    #[test]
    fn difference_on_overlap() {
        let g = Grid::with_spacing(4.0, 0.5).unwrap();
        let h = Grid::aligned(-1.0, 6.0, 0.5).unwrap();
        let a = Profile::from_fn(g, |x| x);
        let b = Profile::from_fn(h, |x| 2.0 * x);
        let d = a.difference(&b).unwrap();
        assert_eq!(d.grid().x_min(), -1.0);
        assert_eq!(d.grid().x_max(), 4.0);
        for j in 0..d.len() {
            assert_eq!(d.values()[j], -d.x(j));
        }
    }
}
