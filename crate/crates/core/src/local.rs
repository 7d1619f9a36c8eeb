//! Entropy-admissible reference solutions of the local conservation law
//!
//!   ∂ₜρ + ∂ₓ(ρ V(ρ)) = 0
//!
//! via a first-order Godunov finite-volume scheme, plus a self-similar exact
//! Riemann evaluator for strictly concave fluxes. The scheme is monotone, so
//! it satisfies a discrete maximum principle and converges to the unique
//! entropy solution; higher order would buy nothing here since the nonlocal
//! comparisons are dominated by the kernel width.

use crate::error::{Error, Result};
use crate::profiles::{PiecewiseConstantProfile, Window};
use crate::velocity::VelocityModel;

/// Uniform finite-volume grid; ghost cells take the datum's tail states.
#[derive(Debug, Clone)]
pub struct LocalGrid {
    lo: f64,
    dx: f64,
    n_cells: usize,
}

impl LocalGrid {
    /// Grid over `window` with the requested cell width. The window length
    /// must be an integer multiple of `dx` (up to round-off).
    pub fn new(window: Window, dx: f64) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidInput(format!("dx = {dx} must be positive")));
        }
        let n = (window.length() / dx).round();
        if n < 1.0 || ((n * dx - window.length()) / window.length()).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "window length {} is not a multiple of dx = {dx}",
                window.length()
            )));
        }
        Ok(Self { lo: window.lo(), dx, n_cells: n as usize })
    }

    pub fn from_cells(lo: f64, dx: f64, n_cells: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) || n_cells == 0 {
            return Err(Error::InvalidInput("grid needs dx > 0 and at least one cell".into()));
        }
        Ok(Self { lo, dx, n_cells })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + self.dx * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| self.node(i)).collect()
    }
}

/// Flux f(ρ) = ρ·V(ρ) with exact derivative and Godunov interface values.
#[derive(Debug, Clone)]
pub struct FluxFn {
    model: VelocityModel,
}

impl FluxFn {
    pub fn new(model: VelocityModel) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &VelocityModel {
        &self.model
    }

    pub fn flux(&self, rho: f64) -> Result<f64> {
        Ok(rho * self.model.eval_v(rho)?)
    }

    /// f′(ρ) = V(ρ) + ρV′(ρ).
    pub fn dflux(&self, rho: f64) -> Result<f64> {
        Ok(self.model.eval_v(rho)? + rho * self.model.eval_dv(rho)?)
    }

    /// f″(ρ) = 2V′(ρ) + ρV″(ρ).
    pub fn d2flux(&self, rho: f64) -> Result<f64> {
        Ok(2.0 * self.model.eval_dv(rho)? + rho * self.model.eval_d2v(rho)?)
    }

    /// Interior critical point of f in closed form for the catalog families.
    pub fn critical_density(&self) -> Option<f64> {
        match &self.model {
            VelocityModel::Greenshields { rho_max, .. } => Some(rho_max / 2.0),
            VelocityModel::GenGreenshields { rho_max, n, .. } => {
                Some(rho_max * (1.0 / (*n as f64 + 1.0)).powf(1.0 / *n as f64))
            }
            VelocityModel::Underwood { rho_max, .. } => Some(*rho_max),
            VelocityModel::Greenberg { rho_max, .. } => Some(rho_max / std::f64::consts::E),
            VelocityModel::GenCalifornia { rho_max, alpha, regularized, .. } => {
                if *regularized {
                    None // no clean closed form; the golden-section fallback handles it
                } else {
                    Some(rho_max * (1.0 - alpha).powf(1.0 / alpha))
                }
            }
            VelocityModel::Custom(_) => None,
        }
    }

    fn max_on(&self, lo: f64, hi: f64) -> Result<f64> {
        let mut best = self.flux(lo)?.max(self.flux(hi)?);
        if let Some(crit) = self.critical_density() {
            if lo < crit && crit < hi {
                best = best.max(self.flux(crit)?);
            }
        } else if hi > lo {
            best = best.max(self.flux(self.golden_section(lo, hi, true)?)?);
        }
        Ok(best)
    }

    fn min_on(&self, lo: f64, hi: f64) -> Result<f64> {
        // concave fluxes take their minimum at an endpoint; the golden-section
        // candidate only matters for a non-concave Custom flux
        let mut best = self.flux(lo)?.min(self.flux(hi)?);
        if self.critical_density().is_none() && hi > lo {
            best = best.min(self.flux(self.golden_section(lo, hi, false)?)?);
        }
        Ok(best)
    }

    fn golden_section(&self, mut a: f64, mut b: f64, maximize: bool) -> Result<f64> {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = self.flux(c)?;
        let mut fd = self.flux(d)?;
        while b - a > 1e-12 {
            let keep_left = if maximize { fc > fd } else { fc < fd };
            if keep_left {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = self.flux(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = self.flux(d)?;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Godunov numerical flux: min of f over [a, b] when a ≤ b, max of f
    /// over [b, a] otherwise.
    pub fn godunov_flux(&self, a: f64, b: f64) -> Result<f64> {
        if a <= b {
            self.min_on(a, b)
        } else {
            self.max_on(b, a)
        }
    }

    /// Largest |f′| over [lo, hi]; endpoints dominate for concave f, the
    /// Chebyshev sweep covers Custom fluxes.
    pub fn max_abs_dflux_on(&self, lo: f64, hi: f64) -> Result<f64> {
        let mut sup = self.dflux(lo)?.abs().max(self.dflux(hi)?.abs());
        if matches!(self.model, VelocityModel::Custom(_)) {
            for k in 1..64 {
                let x = lo + (hi - lo) * k as f64 / 64.0;
                sup = sup.max(self.dflux(x)?.abs());
            }
        }
        Ok(sup)
    }
}

/// Snapshots of a Godunov run, resampled as piecewise-constant profiles.
#[derive(Debug, Clone)]
pub struct LocalTrajectory {
    pub times: Vec<f64>,
    pub profiles: Vec<PiecewiseConstantProfile>,
}

/// First-order Godunov evolution of `rho0` on `grid` up to `final_time`,
/// with dt = cfl·Δx / max|f′| over the current data range and snapshots at
/// the requested times (hit exactly).
pub fn simulate_local(
    rho0: &PiecewiseConstantProfile,
    flux: &FluxFn,
    grid: &LocalGrid,
    final_time: f64,
    cfl: f64,
    snapshot_times: &[f64],
) -> Result<LocalTrajectory> {
    if !cfl.is_finite() || cfl <= 0.0 || cfl >= 1.0 {
        return Err(Error::InvalidInput(format!("cfl = {cfl} must lie in (0, 1)")));
    }
    if !final_time.is_finite() || final_time <= 0.0 {
        return Err(Error::InvalidInput("final_time must be positive".into()));
    }
    if snapshot_times.windows(2).any(|w| w[1] <= w[0])
        || snapshot_times.iter().any(|&t| t < 0.0 || t > final_time)
    {
        return Err(Error::InvalidInput("snapshot times must be increasing within [0, T]".into()));
    }

    // exact cell averages of the datum; cells not straddling a breakpoint
    // take the pointwise value with no rounding at all
    let dx = grid.dx();
    let mut u: Vec<f64> = (0..grid.n_cells())
        .map(|i| {
            let (a, b) = (grid.node(i), grid.node(i + 1));
            let straddles = rho0.breakpoints().iter().any(|&p| a < p && p < b);
            if straddles {
                rho0.mass(Window::new(a, b).expect("grid cell")) / dx
            } else {
                rho0.eval(0.5 * (a + b))
            }
        })
        .collect();
    let ghost_left = rho0.left_state();
    let ghost_right = rho0.right_state();

    let mut out = LocalTrajectory { times: Vec::new(), profiles: Vec::new() };
    let mut emit = |t: f64, u: &[f64]| -> Result<()> {
        out.times.push(t);
        out.profiles.push(PiecewiseConstantProfile::new(
            grid.nodes(),
            u.to_vec(),
            ghost_left,
            ghost_right,
        )?);
        Ok(())
    };

    let mut pending = snapshot_times.iter().copied().peekable();
    let mut t = 0.0;
    if pending.peek() == Some(&0.0) {
        emit(0.0, &u)?;
        pending.next();
    }

    let mut fluxes = vec![0.0; grid.n_cells() + 1];
    while t < final_time {
        let (lo, hi) = u
            .iter()
            .chain([ghost_left, ghost_right].iter())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let speed = flux.max_abs_dflux_on(lo, hi)?;
        let mut dt = if speed > 1e-300 { cfl * dx / speed } else { f64::INFINITY };
        let stop = pending.peek().copied().unwrap_or(final_time);
        let clipped = stop - t <= dt;
        if clipped {
            dt = stop - t;
        }

        if dt > 0.0 {
            for i in 0..=grid.n_cells() {
                let a = if i == 0 { ghost_left } else { u[i - 1] };
                let b = if i == grid.n_cells() { ghost_right } else { u[i] };
                fluxes[i] = flux.godunov_flux(a, b)?;
            }
            let lambda = dt / dx;
            for i in 0..grid.n_cells() {
                u[i] -= lambda * (fluxes[i + 1] - fluxes[i]);
            }
        }

        t = if clipped { stop } else { t + dt };
        while pending.peek() == Some(&t) {
            emit(t, &u)?;
            pending.next();
        }
    }

    Ok(out)
}

/// Exact self-similar solution ρ(ξ) of the Riemann problem with states
/// (ρL, ρR) at ξ = x/t, for strictly concave flux: upward jumps travel as
/// shocks at the Rankine–Hugoniot speed, downward jumps open rarefactions.
pub fn riemann_eval(flux: &FluxFn, rho_l: f64, rho_r: f64, xi: f64) -> Result<f64> {
    if rho_l == rho_r {
        return Ok(rho_l);
    }
    let (lo, hi) = (rho_l.min(rho_r), rho_l.max(rho_r));
    // strict concavity between the states, by sampling
    for k in 0..=128 {
        let x = lo + (hi - lo) * k as f64 / 128.0;
        if flux.d2flux(x)? >= 0.0 {
            return Err(Error::NonConcave { a: rho_l, b: rho_r });
        }
    }

    if rho_l < rho_r {
        // admissible shock
        let s = (flux.flux(rho_r)? - flux.flux(rho_l)?) / (rho_r - rho_l);
        Ok(if xi < s { rho_l } else { rho_r })
    } else {
        // rarefaction fan between the characteristic speeds
        let (sl, sr) = (flux.dflux(rho_l)?, flux.dflux(rho_r)?);
        if xi <= sl {
            return Ok(rho_l);
        }
        if xi >= sr {
            return Ok(rho_r);
        }
        // invert f′ (strictly decreasing in ρ) by bisection
        let (mut a, mut b) = (rho_r, rho_l); // f′(a) ≥ ξ ≥ f′(b)
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if flux.dflux(mid)? >= xi {
                a = mid;
            } else {
                b = mid;
            }
            if (b - a).abs() < 1e-14 * hi.max(1.0) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }
}
