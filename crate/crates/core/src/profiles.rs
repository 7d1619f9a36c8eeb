//! Piecewise-constant density profiles and exact measure-theoretic primitives.
//!
//! A profile is finitely many cells between strictly increasing breakpoints,
//! flanked by constant tail states on both unbounded sides. All integrals
//! (L¹ distances, masses) are computed exactly on merged breakpoint sets,
//! never by quadrature.

use crate::error::{Error, Result};

/// A compact interval used to localize total variation, L¹ distances, and masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    lo: f64,
    hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidInput(format!(
                "window [{lo}, {hi}] must be finite with hi > lo"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// A nonnegative density that is constant on each cell, right-continuous at
/// breakpoints, and equal to `left_state`/`right_state` on the unbounded tails.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantProfile {
    /// Strictly increasing positions, length N + 1.
    breakpoints: Vec<f64>,
    /// Cell densities, length N (empty for a pure two-state step).
    cell_values: Vec<f64>,
    left_state: f64,
    right_state: f64,
}

impl PiecewiseConstantProfile {
    pub fn new(
        breakpoints: Vec<f64>,
        cell_values: Vec<f64>,
        left_state: f64,
        right_state: f64,
    ) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidInput("profile needs at least one breakpoint".into()));
        }
        if cell_values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints require {} cell values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                cell_values.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("breakpoints must be finite and strictly increasing".into()));
        }
        let bad = |v: &f64| !v.is_finite() || *v < 0.0;
        if cell_values.iter().any(bad) || bad(&left_state) || bad(&right_state) {
            return Err(Error::InvalidInput("densities must be finite and nonnegative".into()));
        }
        Ok(Self { breakpoints, cell_values, left_state, right_state })
    }

    /// Constant density on the whole line.
    pub fn constant(value: f64) -> Self {
        Self::new(vec![0.0], vec![], value, value).expect("constant profile is valid")
    }

    /// Two-state step with a single jump at `x`.
    pub fn riemann(x: f64, left: f64, right: f64) -> Self {
        Self::new(vec![x], vec![], left, right).expect("step profile is valid")
    }

    /// Single block of density `inside` on `(lo, hi)` over a zero background.
    pub fn block(lo: f64, hi: f64, inside: f64) -> Self {
        Self::new(vec![lo, hi], vec![inside], 0.0, 0.0).expect("block profile is valid")
    }

    /// Step datum `0.5·1_(-0.5,0.5)`.
    pub fn fig1() -> Self {
        Self::block(-0.5, 0.5, 0.5)
    }

    /// Triangle datum `(1 - 2|x|)·1_(-0.5,0.5)` sampled at cell midpoints.
    ///
    /// Midpoint sampling integrates each linear flank exactly, so the mass of
    /// the sampled profile equals the triangle area 1/2 for even cell counts.
    pub fn fig2(cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidInput("triangle datum needs at least 2 cells".into()));
        }
        let n = cells;
        let mut breakpoints = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n);
        for i in 0..=n {
            breakpoints.push(-0.5 + i as f64 / n as f64);
        }
        for i in 0..n {
            let mid = 0.5 * (breakpoints[i] + breakpoints[i + 1]);
            values.push((1.0 - 2.0 * mid.abs()).max(0.0));
        }
        Self::new(breakpoints, values, 0.0, 0.0)
    }

    /// Staircase of unit blocks, block `n` occupying
    /// `(1/(n+1), 1/(n+1) + 1/(2n(n+1)))` for `n = 1..=n_max`.
    ///
    /// The block's upper endpoint is read as `1/(n+1) + 1/(2n(n+1))`, which
    /// keeps the blocks pairwise disjoint with gaps. Total variation is
    /// exactly `2·n_max` on any window containing all blocks.
    pub fn fig3(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidInput("staircase datum needs n_max >= 1".into()));
        }
        let mut breakpoints = Vec::with_capacity(2 * n_max);
        for n in (1..=n_max).rev() {
            let nf = n as f64;
            let lo = 1.0 / (nf + 1.0);
            let hi = lo + 1.0 / (2.0 * nf * (nf + 1.0));
            breakpoints.push(lo);
            breakpoints.push(hi);
        }
        // cells alternate block/gap, starting and ending with a block
        let mut cells = Vec::with_capacity(2 * n_max - 1);
        for i in 0..(2 * n_max - 1) {
            cells.push(if i % 2 == 0 { 1.0 } else { 0.0 });
        }
        Self::new(breakpoints, cells, 0.0, 0.0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cell_values(&self) -> &[f64] {
        &self.cell_values
    }

    pub fn left_state(&self) -> f64 {
        self.left_state
    }

    pub fn right_state(&self) -> f64 {
        self.right_state
    }

    pub fn num_cells(&self) -> usize {
        self.cell_values.len()
    }

    /// Value immediately right of breakpoint `i` (tail state past the end).
    pub fn value_right_of(&self, i: usize) -> f64 {
        if i < self.cell_values.len() {
            self.cell_values[i]
        } else {
            self.right_state
        }
    }

    /// Value immediately left of breakpoint `i` (tail state before the start).
    pub fn value_left_of(&self, i: usize) -> f64 {
        if i == 0 {
            self.left_state
        } else {
            self.cell_values[i - 1]
        }
    }

    /// Pointwise evaluation, right-continuous at breakpoints.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.breakpoints[0] {
            return self.left_state;
        }
        let last = *self.breakpoints.last().unwrap();
        if x >= last {
            return self.right_state;
        }
        // index of the cell [b_i, b_{i+1}) containing x
        let i = self.breakpoints.partition_point(|&b| b <= x) - 1;
        self.cell_values[i]
    }

    /// Essential range `[ess inf, ess sup]` over the whole line.
    pub fn range(&self) -> (f64, f64) {
        let mut lo = self.left_state.min(self.right_state);
        let mut hi = self.left_state.max(self.right_state);
        for &v in &self.cell_values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Sum of absolute jumps at breakpoints strictly inside the window.
    pub fn total_variation(&self, k: Window) -> f64 {
        let mut tv = 0.0;
        for (i, &b) in self.breakpoints.iter().enumerate() {
            if k.lo() < b && b < k.hi() {
                tv += (self.value_right_of(i) - self.value_left_of(i)).abs();
            }
        }
        tv
    }

    /// Exact integral of the density over the window.
    pub fn mass(&self, k: Window) -> f64 {
        let grid = self.merged_grid(&[], k);
        integrate_segments(&grid, |mid| self.eval(mid))
    }

    /// Exact L¹ distance to `other` over the window, computed on the merged
    /// breakpoint set.
    pub fn l1_distance(&self, other: &Self, k: Window) -> f64 {
        let grid = self.merged_grid(other.breakpoints(), k);
        integrate_segments(&grid, |mid| (self.eval(mid) - other.eval(mid)).abs())
    }

    /// Splits every cell wider than `max_width` into equal parts, preserving
    /// values (and hence all integrals) exactly.
    pub fn subdivided(&self, max_width: f64) -> Result<Self> {
        if !max_width.is_finite() || max_width <= 0.0 {
            return Err(Error::InvalidInput("max_width must be positive".into()));
        }
        let mut breakpoints = Vec::with_capacity(self.breakpoints.len());
        let mut values = Vec::with_capacity(self.cell_values.len());
        for i in 0..self.cell_values.len() {
            let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
            breakpoints.push(a);
            let parts = ((b - a) / max_width).ceil().max(1.0) as usize;
            for j in 1..parts {
                breakpoints.push(a + (b - a) * j as f64 / parts as f64);
            }
            for _ in 0..parts {
                values.push(self.cell_values[i]);
            }
        }
        breakpoints.push(*self.breakpoints.last().unwrap());
        Self::new(breakpoints, values, self.left_state, self.right_state)
    }

    /// Breakpoints of `self` and `extra` inside the window, with the window
    /// ends, sorted.
    fn merged_grid(&self, extra: &[f64], k: Window) -> Vec<f64> {
        let mut grid = Vec::with_capacity(self.breakpoints.len() + extra.len() + 2);
        grid.push(k.lo());
        for &b in self.breakpoints.iter().chain(extra.iter()) {
            if k.lo() < b && b < k.hi() {
                grid.push(b);
            }
        }
        grid.push(k.hi());
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        grid
    }
}

fn integrate_segments(grid: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for pair in grid.windows(2) {
        let len = pair[1] - pair[0];
        if len > 0.0 {
            total += len * f(0.5 * (pair[0] + pair[1]));
        }
    }
    total
}
