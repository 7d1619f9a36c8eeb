//! Exact evaluation of the forward-looking nonlocal average
//!
//!   W(x) = (1/ε) ∫ₓ^∞ η((x-y)/ε) ρ(y) dy
//!
//! for piecewise-constant densities, with η the exponential weight
//! `exp(·)·1_(-∞,0]` or the box weight `1_(0,ε)`. Both kernels have unit
//! mass, so W is a weighted average of the density ahead.
//!
//! For the exponential kernel the evaluation runs right-to-left through the
//! cells: inside cell i with value ρᵢ,
//!
//!   W(x) = ρᵢ + (W(x_{i+1}) - ρᵢ) · e^{(x - x_{i+1})/ε},
//!
//! seeded by the right tail, where W equals the tail state exactly. The
//! spatial derivative then satisfies ∂ₓW = (W - ρ)/ε pointwise, which is
//! used directly instead of any differencing. For the box kernel W is
//! piecewise linear; its slopes are (ρ(x+ε) - ρ(x))/ε in closed form.

use crate::error::{Error, Result};
use crate::profiles::{PiecewiseConstantProfile, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Exponential,
    Box,
}

/// Kernel family plus the look-ahead length ε > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    eps: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidInput(format!("kernel width eps = {eps} must be positive")));
        }
        Ok(Self { family, eps })
    }

    pub fn exponential(eps: f64) -> Result<Self> {
        Self::new(KernelFamily::Exponential, eps)
    }

    pub fn box_kernel(eps: f64) -> Result<Self> {
        Self::new(KernelFamily::Box, eps)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// The nonlocal average of a profile: exact node values at the profile's
/// breakpoints plus enough structure to evaluate W and its slopes anywhere.
#[derive(Debug, Clone)]
pub struct WField {
    spec: KernelSpec,
    profile: PiecewiseConstantProfile,
    /// W at the profile breakpoints.
    values: Vec<f64>,
    /// Box kernel only: kink positions and W there; W is linear in between
    /// and constant beyond both ends.
    pwl: Option<BoxPwl>,
}

#[derive(Debug, Clone)]
struct BoxPwl {
    xs: Vec<f64>,
    ws: Vec<f64>,
    /// Constant slope of each linear piece, from the closed form
    /// (ρ(x+ε) - ρ(x))/ε at the piece midpoint.
    slopes: Vec<f64>,
}

/// Builds the exponentially-weighted nonlocal average of `p`. O(N).
pub fn exp_nonlocal(p: &PiecewiseConstantProfile, eps: f64) -> Result<WField> {
    WField::build(p, KernelSpec::exponential(eps)?)
}

/// Builds the box-averaged field W(x) = (1/ε)∫ₓ^{x+ε} ρ of `p`. O(N log N).
pub fn box_nonlocal(p: &PiecewiseConstantProfile, eps: f64) -> Result<WField> {
    WField::build(p, KernelSpec::box_kernel(eps)?)
}

/// Node values of ∂ₓW from the identity ∂ₓW = (W - ρ)/ε, using the
/// right-limit of ρ at each node. Exponential kernel only.
pub fn exp_derivative(w: &WField) -> Result<Vec<f64>> {
    w.derivative_at_nodes()
}

impl WField {
    pub fn build(p: &PiecewiseConstantProfile, spec: KernelSpec) -> Result<Self> {
        let field = match spec.family {
            KernelFamily::Exponential => Self::build_exponential(p, spec),
            KernelFamily::Box => Self::build_box(p, spec),
        };
        #[cfg(debug_assertions)]
        field.assert_envelope();
        Ok(field)
    }

    fn build_exponential(p: &PiecewiseConstantProfile, spec: KernelSpec) -> Self {
        let bs = p.breakpoints();
        let n = bs.len();
        let mut values = vec![0.0; n];
        values[n - 1] = p.right_state();
        for i in (0..n - 1).rev() {
            let q = ((bs[i] - bs[i + 1]) / spec.eps).exp();
            let v = p.cell_values()[i];
            values[i] = v + q * (values[i + 1] - v);
        }
        Self { spec, profile: p.clone(), values, pwl: None }
    }

    fn build_box(p: &PiecewiseConstantProfile, spec: KernelSpec) -> Self {
        let eps = spec.eps;
        let bs = p.breakpoints();
        let mut xs: Vec<f64> = Vec::with_capacity(2 * bs.len());
        xs.extend(bs.iter().map(|&b| b - eps));
        xs.extend_from_slice(bs);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();

        // prefix mass anchored at the first breakpoint
        let mut prefix = Vec::with_capacity(bs.len());
        prefix.push(0.0);
        for i in 0..p.num_cells() {
            let m = p.cell_values()[i] * (bs[i + 1] - bs[i]);
            prefix.push(prefix[i] + m);
        }
        let cumulative = |x: f64| -> f64 {
            if x <= bs[0] {
                return (x - bs[0]) * p.left_state();
            }
            let last = *bs.last().unwrap();
            if x >= last {
                return prefix[bs.len() - 1] + (x - last) * p.right_state();
            }
            let i = bs.partition_point(|&b| b <= x) - 1;
            prefix[i] + p.cell_values()[i] * (x - bs[i])
        };

        let ws: Vec<f64> = xs.iter().map(|&x| (cumulative(x + eps) - cumulative(x)) / eps).collect();
        let slopes: Vec<f64> = xs
            .windows(2)
            .map(|seg| {
                let mid = 0.5 * (seg[0] + seg[1]);
                (p.eval(mid + eps) - p.eval(mid)) / eps
            })
            .collect();
        let values = bs.iter().map(|&b| (cumulative(b + eps) - cumulative(b)) / eps).collect();
        Self { spec, profile: p.clone(), values, pwl: Some(BoxPwl { xs, ws, slopes }) }
    }

    pub fn kernel(&self) -> KernelSpec {
        self.spec
    }

    pub fn profile(&self) -> &PiecewiseConstantProfile {
        &self.profile
    }

    /// Node positions (the profile's breakpoints).
    pub fn node_positions(&self) -> &[f64] {
        self.profile.breakpoints()
    }

    /// W at the node positions.
    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    /// Exact evaluation of W anywhere on the line.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.pwl {
            Some(pwl) => pwl.eval(x, self.profile.left_state(), self.profile.right_state()),
            None => {
                let bs = self.profile.breakpoints();
                if x >= *bs.last().unwrap() {
                    return self.profile.right_state();
                }
                let (anchor, w_anchor, v) = if x < bs[0] {
                    (bs[0], self.values[0], self.profile.left_state())
                } else {
                    let i = bs.partition_point(|&b| b <= x) - 1;
                    (bs[i + 1], self.values[i + 1], self.profile.cell_values()[i])
                };
                v + (w_anchor - v) * ((x - anchor) / self.spec.eps).exp()
            }
        }
    }

    /// ∂ₓW at the nodes via the identity (W - ρ)/ε with the right-limit of ρ.
    pub fn derivative_at_nodes(&self) -> Result<Vec<f64>> {
        if self.spec.family != KernelFamily::Exponential {
            return Err(Error::KernelMismatch { required: "exponential" });
        }
        Ok((0..self.values.len())
            .map(|i| (self.values[i] - self.profile.value_right_of(i)) / self.spec.eps)
            .collect())
    }

    /// One-sided slope of W just right of node `i`.
    pub fn right_slope(&self, i: usize) -> f64 {
        match &self.pwl {
            None => (self.values[i] - self.profile.value_right_of(i)) / self.spec.eps,
            Some(pwl) => pwl.slope_right_of(self.profile.breakpoints()[i]),
        }
    }

    /// One-sided slope of W just left of node `i`.
    pub fn left_slope(&self, i: usize) -> f64 {
        match &self.pwl {
            None => (self.values[i] - self.profile.value_left_of(i)) / self.spec.eps,
            Some(pwl) => pwl.slope_left_of(self.profile.breakpoints()[i]),
        }
    }

    /// Exact infimum of ∂ₓW over the whole line.
    ///
    /// W is continuous and piecewise C¹ with monotone slope magnitude inside
    /// each mesh region, so the infimum of all difference quotients is
    /// attained among the one-sided node slopes (or 0 in the tails).
    pub fn min_slope(&self) -> f64 {
        let mut min = 0.0f64;
        match &self.pwl {
            None => {
                for i in 0..self.values.len() {
                    min = min.min(self.right_slope(i)).min(self.left_slope(i));
                }
            }
            Some(pwl) => {
                for &s in &pwl.slopes {
                    min = min.min(s);
                }
            }
        }
        min
    }

    /// Points splitting the window into segments on which W is monotone.
    fn monotone_grid(&self, k: Window) -> Vec<f64> {
        let inner: &[f64] = match &self.pwl {
            None => self.profile.breakpoints(),
            Some(pwl) => &pwl.xs,
        };
        let mut grid = Vec::with_capacity(inner.len() + 2);
        grid.push(k.lo());
        for &x in inner {
            if k.lo() < x && x < k.hi() {
                grid.push(x);
            }
        }
        grid.push(k.hi());
        grid
    }

    /// Exact total variation of W over the window (W is continuous, so this
    /// is the sum of |ΔW| over monotone segments; no jump part).
    pub fn tv_on(&self, k: Window) -> f64 {
        let grid = self.monotone_grid(k);
        let mut tv = 0.0;
        let mut prev = self.eval(grid[0]);
        for &x in &grid[1..] {
            let w = self.eval(x);
            tv += (w - prev).abs();
            prev = w;
        }
        tv
    }

    /// Exact (min, max) of W over the window.
    pub fn range_on(&self, k: Window) -> (f64, f64) {
        let grid = self.monotone_grid(k);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &x in &grid {
            let w = self.eval(x);
            lo = lo.min(w);
            hi = hi.max(w);
        }
        (lo, hi)
    }

    /// Exact sup of |W| over the window.
    pub fn sup_abs_on(&self, k: Window) -> f64 {
        let (lo, hi) = self.range_on(k);
        lo.abs().max(hi.abs())
    }

    /// Largest pointwise variation of W across a single mesh region
    /// (cell width × largest in-cell slope); used as a mesh margin by the
    /// bound checkers.
    pub fn mesh_slope_margin(&self) -> f64 {
        match &self.pwl {
            None => {
                let bs = self.profile.breakpoints();
                let eps = self.spec.eps;
                let mut margin = (self.values[0] - self.profile.left_state()).abs();
                for i in 0..self.profile.num_cells() {
                    let w = bs[i + 1] - bs[i];
                    let peak = (self.values[i + 1] - self.profile.cell_values()[i]).abs() / eps;
                    margin = margin.max(w * peak);
                }
                margin
            }
            Some(pwl) => {
                let mut margin = 0.0f64;
                for pair in pwl.ws.windows(2) {
                    margin = margin.max((pair[1] - pair[0]).abs());
                }
                margin
            }
        }
    }

    #[cfg(debug_assertions)]
    fn assert_envelope(&self) {
        // each node value is an average of the density ahead of it
        let p = &self.profile;
        let mut lo = p.right_state();
        let mut hi = p.right_state();
        for i in (0..self.values.len()).rev() {
            debug_assert!(
                self.values[i] >= lo - 1e-12 && self.values[i] <= hi + 1e-12,
                "W node {i} = {} outside the forward envelope [{lo}, {hi}]",
                self.values[i]
            );
            if i > 0 {
                let v = p.cell_values()[i - 1];
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
}

impl BoxPwl {
    fn eval(&self, x: f64, left_state: f64, right_state: f64) -> f64 {
        if x <= self.xs[0] {
            return left_state;
        }
        if x >= *self.xs.last().unwrap() {
            return right_state;
        }
        let j = self.xs.partition_point(|&p| p <= x) - 1;
        let t = (x - self.xs[j]) / (self.xs[j + 1] - self.xs[j]);
        self.ws[j] + t * (self.ws[j + 1] - self.ws[j])
    }

    fn kink_index(&self, x: f64) -> usize {
        // x is always one of the kinks up to representation noise
        let j = self.xs.partition_point(|&p| p < x);
        j.min(self.xs.len() - 1)
    }

    fn slope_right_of(&self, x: f64) -> f64 {
        let j = self.kink_index(x);
        if j >= self.slopes.len() {
            0.0
        } else {
            self.slopes[j]
        }
    }

    fn slope_left_of(&self, x: f64) -> f64 {
        let j = self.kink_index(x);
        if j == 0 {
            0.0
        } else {
            self.slopes[j - 1]
        }
    }
}
