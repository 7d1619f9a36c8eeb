//! Vanishing-kernel-width studies: run the nonlocal solver over a list of
//! decreasing ε, compare each run (density and nonlocal term) against a
//! shared fine Godunov reference in L¹ over a window, and report error
//! tables with monotonicity verdicts and fitted decay exponents.
//!
//! The reference is a Godunov run rather than the exact Riemann evaluator so
//! arbitrary data are supported; Riemann cases double as a cross-check of
//! the reference itself. No convergence *rate* is asserted anywhere: the
//! fitted exponents are exploratory metadata.

use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec, WField};
use crate::local::{simulate_local, FluxFn, LocalGrid};
use crate::nonlocal::{simulate, SimConfig};
use crate::profiles::{PiecewiseConstantProfile, Window};
use crate::velocity::{VelocityModel, DEFAULT_ASSUMPTION_SAMPLES};

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Kernel widths, strictly decreasing.
    pub eps_list: Vec<f64>,
    /// Comparison window for the L¹ errors.
    pub window: Window,
    /// Comparison times, strictly increasing and positive.
    pub times: Vec<f64>,
    pub datum: PiecewiseConstantProfile,
    pub velocity: VelocityModel,
    pub family: KernelFamily,
    /// Reference grid rule: dx = min(smallest ε / 8, dx_cap).
    pub dx_cap: f64,
    /// Concurrent nonlocal runs; 0 or 1 means serial.
    pub parallelism: usize,
}

impl SweepConfig {
    pub fn new(
        datum: PiecewiseConstantProfile,
        velocity: VelocityModel,
        window: Window,
        times: Vec<f64>,
    ) -> Self {
        Self {
            eps_list: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            window,
            times,
            datum,
            velocity,
            family: KernelFamily::Exponential,
            dx_cap: 1.0 / 400.0,
            parallelism: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty()
            || self.eps_list.windows(2).any(|w| w[1] >= w[0])
            || self.eps_list.iter().any(|&e| !e.is_finite() || e <= 0.0)
        {
            return Err(Error::InvalidInput("eps list must be strictly decreasing and positive".into()));
        }
        if self.times.is_empty()
            || self.times.windows(2).any(|w| w[1] <= w[0])
            || self.times.iter().any(|&t| !t.is_finite() || t <= 0.0)
        {
            return Err(Error::InvalidInput("comparison times must be increasing and positive".into()));
        }
        if !self.dx_cap.is_finite() || self.dx_cap <= 0.0 {
            return Err(Error::InvalidInput("dx_cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub t: f64,
    /// ‖ρ_ε - ρ_ref‖ in L¹ over the window.
    pub err_rho: f64,
    /// ‖W_ε - ρ_ref‖ in L¹ over the window.
    pub err_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMetric {
    Rho,
    W,
}

/// Error table over the full ε × t grid, sorted by (t, ε descending).
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Per comparison time: are err_rho and err_w strictly decreasing in ε?
    pub monotone: Vec<(f64, bool, bool)>,
    /// Per comparison time: fitted log-log decay exponents of (err_rho,
    /// err_w); None where the fit is degenerate. Exploratory metadata only.
    pub decay: Vec<(f64, Option<f64>, Option<f64>)>,
}

impl SweepTable {
    pub fn rows_at(&self, t: f64, metric: ErrorMetric) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.t == t)
            .map(|r| (r.eps, if metric == ErrorMetric::Rho { r.err_rho } else { r.err_w }))
            .collect()
    }
}

/// Least-squares slope of log err against log ε at one comparison time.
pub fn fit_decay(table: &SweepTable, t: f64, metric: ErrorMetric) -> Result<f64> {
    let pts = table.rows_at(t, metric);
    fit_decay_points(&pts)
}

fn fit_decay_points(pts: &[(f64, f64)]) -> Result<f64> {
    if pts.len() < 3 {
        return Err(Error::DegenerateFit { reason: "need at least 3 kernel widths" });
    }
    if pts.iter().any(|&(_, err)| err <= 0.0) {
        return Err(Error::DegenerateFit { reason: "zero error leaves the log-fit undefined" });
    }
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(eps, err) in pts {
        let x = eps.ln();
        let y = err.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Runs the sweep: one shared Godunov reference, one nonlocal run per ε
/// (optionally in parallel), exact L¹ errors on the window.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let (m, big_m) = cfg.datum.range();
    let rep = cfg.velocity.check_assumptions(m, big_m, DEFAULT_ASSUMPTION_SAMPLES)?;
    let w_path = rep.kappa_w().is_some();
    // the g-path also needs a strictly negative V' for the limit statement
    let g_path = rep.kappa_g().is_some() && rep.sup_dv < 0.0;
    if !(w_path || g_path) {
        return Err(Error::MissingAssumption {
            needed: "a verified hypothesis set for the vanishing-width limit",
        });
    }

    let final_time = *cfg.times.last().unwrap();
    let flux = FluxFn::new(cfg.velocity.clone());
    let eps_max = cfg.eps_list[0];
    let eps_min = *cfg.eps_list.last().unwrap();
    let dx = (eps_min / 8.0).min(cfg.dx_cap);

    // reference domain: comparison window widened by the information spread
    let speed = flux.max_abs_dflux_on(m, big_m)?.max(cfg.velocity.eval_v(m)?.abs());
    let margin = speed * final_time + 8.0 * eps_max + 0.5;
    let lo = cfg.window.lo() - margin;
    let cells = ((cfg.window.hi() + margin - lo) / dx).ceil() as usize;
    let grid = LocalGrid::from_cells(lo, dx, cells)?;
    let reference = simulate_local(&cfg.datum, &flux, &grid, final_time, 0.45, &cfg.times)?;

    // one nonlocal run per eps, deterministic order, bounded concurrency
    let mut per_eps: Vec<Option<Vec<(f64, f64)>>> = vec![None; cfg.eps_list.len()];
    let workers = cfg.parallelism.max(1).min(cfg.eps_list.len());
    if workers <= 1 {
        for (slot, &eps) in per_eps.iter_mut().zip(&cfg.eps_list) {
            *slot = Some(one_eps_errors(cfg, eps, &reference, &grid)?);
        }
    } else {
        for (chunk_idx, chunk) in cfg.eps_list.chunks(workers).enumerate() {
            let results: Vec<Result<Vec<(f64, f64)>>> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|&eps| {
                        let reference = &reference;
                        let grid = &grid;
                        scope.spawn(move || one_eps_errors(cfg, eps, reference, grid))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
            });
            for (j, res) in results.into_iter().enumerate() {
                per_eps[chunk_idx * workers + j] = Some(res?);
            }
        }
    }

    let mut rows = Vec::with_capacity(cfg.eps_list.len() * cfg.times.len());
    for (ti, &t) in cfg.times.iter().enumerate() {
        for (ei, &eps) in cfg.eps_list.iter().enumerate() {
            let (err_rho, err_w) = per_eps[ei].as_ref().unwrap()[ti];
            rows.push(SweepRow { eps, t, err_rho, err_w });
        }
    }

    let monotone = cfg
        .times
        .iter()
        .map(|&t| {
            let at: Vec<&SweepRow> = rows.iter().filter(|r| r.t == t).collect();
            let dec = |f: fn(&SweepRow) -> f64| at.windows(2).all(|w| f(w[1]) < f(w[0]));
            (t, dec(|r| r.err_rho), dec(|r| r.err_w))
        })
        .collect();

    let table = SweepTable { rows, monotone, decay: Vec::new() };
    let decay = cfg
        .times
        .iter()
        .map(|&t| {
            (
                t,
                fit_decay(&table, t, ErrorMetric::Rho).ok(),
                fit_decay(&table, t, ErrorMetric::W).ok(),
            )
        })
        .collect();

    Ok(SweepTable { decay, ..table })
}

fn one_eps_errors(
    cfg: &SweepConfig,
    eps: f64,
    reference: &crate::local::LocalTrajectory,
    grid: &LocalGrid,
) -> Result<Vec<(f64, f64)>> {
    let kernel = KernelSpec::new(cfg.family, eps)?;
    let mut sim_cfg = SimConfig::new(kernel, cfg.velocity.clone(), *cfg.times.last().unwrap());
    sim_cfg.snapshot_times = cfg.times.clone();
    let traj = simulate(&cfg.datum, &sim_cfg)?;

    let mut out = Vec::with_capacity(cfg.times.len());
    for (snap, ref_profile) in traj.snapshots.iter().zip(&reference.profiles) {
        let err_rho = snap.profile.l1_distance(ref_profile, cfg.window);
        let w_profile = resample_field(&snap.w, grid)?;
        let err_w = w_profile.l1_distance(ref_profile, cfg.window);
        out.push((err_rho, err_w));
    }
    Ok(out)
}

/// Piecewise-constant sampling of W at the reference cell midpoints.
pub fn resample_field(w: &WField, grid: &LocalGrid) -> Result<PiecewiseConstantProfile> {
    let values: Vec<f64> = (0..grid.n_cells())
        .map(|i| w.eval(0.5 * (grid.node(i) + grid.node(i + 1))).max(0.0))
        .collect();
    let left = *values.first().unwrap_or(&0.0);
    let right = *values.last().unwrap_or(&0.0);
    PiecewiseConstantProfile::new(grid.nodes(), values, left, right)
}
