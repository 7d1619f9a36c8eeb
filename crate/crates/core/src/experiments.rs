//! Canned experiment recipes: evolve a preset datum under the standard
//! linear velocity, track an inequality diagnostic over a time grid, and
//! emit observed-versus-bound series as CSV.
//!
//! * figure 1: step datum, both kernels, -inf ∂ₓW against 1/(κt);
//! * figure 2: sampled triangle datum, both kernels, same metric;
//! * figure 3: unbounded-variation staircase datum, exponential kernel,
//!   TV of W over a window against 2(|K|/(2t) + ‖W‖∞).
//!
//! Box-kernel series are marked exploratory: they are emitted for
//! comparison and never asserted.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::nonlocal::{simulate, SimConfig};
use crate::profiles::{PiecewiseConstantProfile, Window};
use crate::velocity::{VelocityModel, DEFAULT_ASSUMPTION_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureMetric {
    /// -inf ∂ₓW versus 1/(κt).
    NegMinSlope,
    /// TV of W over the window versus 2(|K|/(2t) + ‖W‖∞).
    TvOnWindow,
}

#[derive(Debug, Clone)]
pub struct FigureRecipe {
    pub id: u8,
    pub datum: PiecewiseConstantProfile,
    pub velocity: VelocityModel,
    pub kernels: Vec<KernelFamily>,
    pub eps_list: Vec<f64>,
    pub times: Vec<f64>,
    pub metric: FigureMetric,
    /// Window for the TV metric.
    pub window: Option<Window>,
}

impl FigureRecipe {
    /// The three standard recipes. Kernel widths default to
    /// {0.2, 0.1, 0.05, 0.025}; the time grid is t = 0.02k up to 1.
    pub fn standard(id: u8) -> Result<Self> {
        let times: Vec<f64> = (1..=50).map(|k| 0.02 * k as f64).collect();
        let velocity = VelocityModel::greenshields(1.0, 1.0)?;
        let eps_list = vec![0.2, 0.1, 0.05, 0.025];
        match id {
            1 => Ok(Self {
                id,
                datum: PiecewiseConstantProfile::fig1(),
                velocity,
                kernels: vec![KernelFamily::Exponential, KernelFamily::Box],
                eps_list,
                times,
                metric: FigureMetric::NegMinSlope,
                window: None,
            }),
            2 => Ok(Self {
                id,
                datum: PiecewiseConstantProfile::fig2(1000)?,
                velocity,
                kernels: vec![KernelFamily::Exponential, KernelFamily::Box],
                eps_list,
                times,
                metric: FigureMetric::NegMinSlope,
                window: None,
            }),
            3 => Ok(Self {
                id,
                datum: PiecewiseConstantProfile::fig3(50)?,
                velocity,
                kernels: vec![KernelFamily::Exponential],
                eps_list,
                times,
                metric: FigureMetric::TvOnWindow,
                window: Some(Window::new(-0.5, 1.5)?),
            }),
            _ => Err(Error::InvalidInput(format!("unknown figure id {id}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct FigureSeries {
    pub figure: u8,
    pub kernel: KernelFamily,
    pub eps: f64,
    pub exploratory: bool,
    pub rows: Vec<SeriesRow>,
}

/// Runs every (kernel, ε) combination of the recipe.
pub fn run_figure(recipe: &FigureRecipe) -> Result<Vec<FigureSeries>> {
    let (m, big_m) = recipe.datum.range();
    let rep = recipe.velocity.check_assumptions(m, big_m, DEFAULT_ASSUMPTION_SAMPLES)?;
    let kappa = rep.kappa_w().ok_or(Error::MissingAssumption {
        needed: "a one-sided slope constant for the figure bound",
    })?;
    let final_time = *recipe.times.last().unwrap();

    let mut out = Vec::new();
    for &family in &recipe.kernels {
        for &eps in &recipe.eps_list {
            let kernel = KernelSpec::new(family, eps)?;
            let mut cfg = SimConfig::new(kernel, recipe.velocity.clone(), final_time);
            cfg.snapshot_times = recipe.times.clone();
            let traj = simulate(&recipe.datum, &cfg)?;
            let rows = traj
                .snapshots
                .iter()
                .map(|snap| {
                    let (value, bound) = match recipe.metric {
                        FigureMetric::NegMinSlope => {
                            (-snap.w.min_slope(), 1.0 / (kappa * snap.time))
                        }
                        FigureMetric::TvOnWindow => {
                            let k = recipe.window.expect("TV metric needs a window");
                            let tv = snap.w.tv_on(k);
                            let sup = snap.w.sup_abs_on(k);
                            (tv, 2.0 * (k.length() / (2.0 * snap.time) + sup))
                        }
                    };
                    SeriesRow { t: snap.time, value, bound }
                })
                .collect();
            out.push(FigureSeries {
                figure: recipe.id,
                kernel: family,
                eps,
                exploratory: family == KernelFamily::Box,
                rows,
            });
        }
    }
    Ok(out)
}

fn kernel_tag(family: KernelFamily) -> &'static str {
    match family {
        KernelFamily::Exponential => "exp",
        KernelFamily::Box => "box",
    }
}

/// Renders one series in the `t,value,bound,kernel,eps,exploratory` layout.
pub fn render_series_csv(series: &FigureSeries) -> String {
    let mut out = String::from("t,value,bound,kernel,eps,exploratory\n");
    for row in &series.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.t,
            row.value,
            row.bound,
            kernel_tag(series.kernel),
            series.eps,
            u8::from(series.exploratory)
        )
        .expect("string write");
    }
    out
}

/// Writes one CSV per series plus a manifest listing them; returns the
/// written paths (manifest last).
pub fn write_figure_csvs(series: &[FigureSeries], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    let mut manifest = String::new();
    for s in series {
        let name = format!("fig{}_{}_eps{}.csv", s.figure, kernel_tag(s.kernel), s.eps);
        let path = dir.join(&name);
        std::fs::write(&path, render_series_csv(s))?;
        manifest.push_str(&name);
        manifest.push('\n');
        paths.push(path);
    }
    let manifest_path = dir.join(format!(
        "fig{}_manifest.txt",
        series.first().map(|s| s.figure).unwrap_or(0)
    ));
    std::fs::write(&manifest_path, manifest)?;
    paths.push(manifest_path);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn light_fig1() -> FigureRecipe {
        let mut r = FigureRecipe::standard(1).unwrap();
        r.eps_list = vec![0.1];
        r.times = (1..=10).map(|k| 0.1 * k as f64).collect();
        r
    }

    #[test]
    fn fig1_exponential_series_stays_below_envelope() {
        let mut recipe = light_fig1();
        recipe.kernels = vec![KernelFamily::Exponential];
        let series = run_figure(&recipe).unwrap();
        assert_eq!(series.len(), 1);
        for row in &series[0].rows {
            assert!(
                row.value <= 1.05 * row.bound,
                "t = {}: {} above 1/t = {}",
                row.t,
                row.value,
                row.bound
            );
        }
        assert!(!series[0].exploratory);
    }

    #[test]
    fn fig2_series_starts_at_the_datum_lipschitz_constant() {
        let mut recipe = FigureRecipe::standard(2).unwrap();
        recipe.kernels = vec![KernelFamily::Exponential];
        recipe.eps_list = vec![0.05];
        recipe.times = vec![0.02, 0.5, 1.0];
        let series = run_figure(&recipe).unwrap();
        let first = &series[0].rows[0];
        // averaged continuous data are no steeper than the datum (Lip = 2),
        // up to the sampling staircase of the 1000-cell triangle
        assert!(first.value <= 2.0 + 2e-3 / 0.05 + 0.05, "initial slope {}", first.value);
        let last = series[0].rows.last().unwrap();
        assert!(last.value <= 1.05 * last.bound + 0.1);
    }

    #[test]
    fn fig3_tv_stays_bounded_despite_unbounded_datum_variation() {
        let mut recipe = FigureRecipe::standard(3).unwrap();
        recipe.eps_list = vec![0.1];
        recipe.times = vec![0.25, 0.5, 1.0];
        let series = run_figure(&recipe).unwrap();
        for row in &series[0].rows {
            assert!(row.value.is_finite());
            assert!(
                row.value <= 1.05 * row.bound,
                "t = {}: TV {} vs bound {}",
                row.t,
                row.value,
                row.bound
            );
        }
        // the datum itself has variation 100 on this window
        let k = recipe.window.unwrap();
        assert_eq!(recipe.datum.total_variation(k), 100.0);
    }

    #[test]
    fn box_series_are_exploratory() {
        let mut recipe = light_fig1();
        recipe.kernels = vec![KernelFamily::Box];
        recipe.times = vec![0.5];
        let series = run_figure(&recipe).unwrap();
        assert!(series[0].exploratory);
        let csv = render_series_csv(&series[0]);
        assert!(csv.lines().nth(1).unwrap().ends_with(",box,0.1,1"));
    }

    #[test]
    fn halving_resolution_changes_series_by_under_two_percent() {
        let mut recipe = light_fig1();
        recipe.kernels = vec![KernelFamily::Exponential];
        recipe.times = (1..=10).map(|k| 0.1 * k as f64).collect();

        let run_with = |target: Option<f64>| {
            let mut cfg = SimConfig::new(
                KernelSpec::exponential(0.1).unwrap(),
                recipe.velocity.clone(),
                1.0,
            );
            cfg.snapshot_times = recipe.times.clone();
            cfg.refine_target = target;
            let traj = simulate(&recipe.datum, &cfg).unwrap();
            traj.snapshots.iter().map(|s| -s.w.min_slope()).collect::<Vec<f64>>()
        };
        let fine = run_with(Some(1600.0));
        let coarse = run_with(Some(800.0));
        let sup: f64 = fine.iter().max_by(|a, b| a.partial_cmp(b).unwrap()).copied().unwrap();
        let sup_diff: f64 = fine
            .iter()
            .zip(&coarse)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup_diff / sup < 0.02, "relative change {}", sup_diff / sup);
    }
}
