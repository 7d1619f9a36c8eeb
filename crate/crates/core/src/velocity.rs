//! Velocity models V(ξ) with exact first and second derivatives, and a
//! sampling-based checker for the hypotheses under which the one-sided
//! slope bounds hold.
//!
//! Catalog families (speed as a nonincreasing function of density):
//!
//! * Greenshields:      V(ξ) = v_max (1 - ξ/ρ_max)
//! * Underwood:         V(ξ) = v₀ exp(-ξ/ρ_max)
//! * GenGreenshields:   V(ξ) = v₀ (1 - (ξ/ρ_max)ⁿ)
//! * GenCalifornia:     V(ξ) = v₀ (ξ^-α - ρ_max^-α), optionally regularized
//!   by shifting ξ^α by v₀^α/(v₀^α + 1)
//! * Greenberg:         V(ξ) = v₀ ln(ρ_max/ξ)
//!
//! plus a piecewise-polynomial `Custom` family carrying its own coefficient
//! tables for V, V′, V″.

use crate::error::{Error, Result};

/// Default number of Chebyshev sample points for hypothesis checking.
pub const DEFAULT_ASSUMPTION_SAMPLES: usize = 4097;

/// Absolute slack used when certifying sampled inequalities.
const MARGIN: f64 = 1e-9;

/// Tolerance under which V″ξ + V′ counts as identically zero.
const ZERO_H_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum VelocityModel {
    Greenshields { v_max: f64, rho_max: f64 },
    Underwood { v0: f64, rho_max: f64 },
    GenGreenshields { v0: f64, rho_max: f64, n: u32 },
    GenCalifornia { v0: f64, rho_max: f64, alpha: f64, regularized: bool },
    Greenberg { v0: f64, rho_max: f64 },
    Custom(CustomVelocity),
}

/// Piecewise-polynomial velocity with caller-supplied derivative tables.
///
/// Coefficients are in ascending powers of ξ, one row per piece. The tables
/// for V′ and V″ are trusted but cross-checked against finite differences of
/// V at construction time.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomVelocity {
    pieces: Vec<f64>,
    v: Vec<Vec<f64>>,
    dv: Vec<Vec<f64>>,
    d2v: Vec<Vec<f64>>,
}

impl CustomVelocity {
    pub fn new(pieces: Vec<f64>, v: Vec<Vec<f64>>, dv: Vec<Vec<f64>>, d2v: Vec<Vec<f64>>) -> Result<Self> {
        if pieces.len() < 2
            || pieces.iter().any(|p| !p.is_finite())
            || pieces.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidInput("custom velocity needs increasing piece edges".into()));
        }
        let p = pieces.len() - 1;
        if v.len() != p || dv.len() != p || d2v.len() != p {
            return Err(Error::InvalidInput("custom velocity tables must have one row per piece".into()));
        }
        let out = Self { pieces, v, dv, d2v };
        // derivative tables must be consistent with V
        let (lo, hi) = (out.pieces[0], *out.pieces.last().unwrap());
        let h = 1e-6 * (hi - lo).max(1.0);
        for k in 0..=64 {
            let x = lo + (hi - lo) * k as f64 / 64.0;
            if x - h < lo || x + h > hi {
                continue;
            }
            let fd = (out.eval(&out.v, x + h) - out.eval(&out.v, x - h)) / (2.0 * h);
            let dv = out.eval(&out.dv, x);
            if (fd - dv).abs() > 1e-3 * (1.0 + dv.abs()) {
                return Err(Error::InvalidInput(format!(
                    "custom dV table disagrees with finite differences of V at {x}"
                )));
            }
        }
        Ok(out)
    }

    fn piece_index(&self, x: f64) -> usize {
        let idx = self.pieces.partition_point(|&b| b <= x);
        idx.saturating_sub(1).min(self.v.len() - 1)
    }

    fn eval(&self, table: &[Vec<f64>], x: f64) -> f64 {
        let coeffs = &table[self.piece_index(x)];
        let mut acc = 0.0;
        for &c in coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

/// Validity interval of a model; open endpoints are excluded strictly.
#[derive(Debug, Clone, Copy)]
pub struct Validity {
    pub lo: f64,
    pub lo_open: bool,
    pub hi: f64,
}

impl Validity {
    fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open { x > self.lo } else { x >= self.lo - MARGIN };
        // closed upper endpoints tolerate round-off excursions
        above && x <= self.hi + MARGIN * self.hi.abs().max(1.0)
    }
}

/// Outcome of sampling the slope-bound hypotheses on a data range [m, M].
///
/// Constant fields hold the tightest values witnessed by the sampling; they
/// are populated only when the corresponding condition holds.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    /// The checked data range [ess inf ρ₀, ess sup ρ₀].
    pub range: (f64, f64),
    /// V′ ≡ -δ < 0 on the range; holds with the witnessed δ.
    pub linear: Option<f64>,
    /// 0 ≤ V′ + V″ξ ≤ κ₁ and V′ ≤ -κ₂ with κ₂ > κ₁; holds with (κ₁, κ₂).
    pub conv_more: Option<(f64, f64)>,
    /// 0 ≤ (-V′ - V″ξ)(M - m) ≤ -V′ξ on the range.
    pub ob2: bool,
    /// -V′ ≤ V″ξ ≤ -(2 - κ₁)V′ on the range; holds with the witnessed κ₁.
    pub ob3: Option<f64>,
    /// V″ξ + V′ vanishes identically on the range (within 1e-12).
    pub greenberg_zero_h: bool,
    /// V, V′, V″ all finite on the range.
    pub lipschitz_at_range: bool,
    /// Largest V′ witnessed (≤ 0 for admissible models).
    pub sup_dv: f64,
    /// Largest |V′| witnessed; used for stiffness estimates downstream.
    pub sup_abs_dv: f64,
}

impl AssumptionReport {
    /// Constant κ for the one-sided difference-quotient bound -1/(κt) on the
    /// nonlocal average: δ on the linear path, κ₂ - κ₁ on the convexity path.
    pub fn kappa_w(&self) -> Option<f64> {
        if let Some(delta) = self.linear {
            Some(delta)
        } else {
            self.conv_more.map(|(k1, k2)| k2 - k1)
        }
    }

    /// Constant κ for the one-sided bound ‖ρ₀‖∞/(κt) on V′(W)·W·∂ₓW:
    /// 1 on the oscillation path and for vanishing V″ξ + V′, else the
    /// witnessed κ₁.
    pub fn kappa_g(&self) -> Option<f64> {
        if self.ob2 || self.greenberg_zero_h {
            Some(1.0)
        } else {
            self.ob3
        }
    }
}

impl VelocityModel {
    pub fn greenshields(v_max: f64, rho_max: f64) -> Result<Self> {
        require_positive(&[("v_max", v_max), ("rho_max", rho_max)])?;
        Ok(Self::Greenshields { v_max, rho_max })
    }

    pub fn underwood(v0: f64, rho_max: f64) -> Result<Self> {
        require_positive(&[("v0", v0), ("rho_max", rho_max)])?;
        Ok(Self::Underwood { v0, rho_max })
    }

    pub fn gen_greenshields(v0: f64, rho_max: f64, n: u32) -> Result<Self> {
        require_positive(&[("v0", v0), ("rho_max", rho_max)])?;
        if n == 0 {
            return Err(Error::InvalidInput("exponent n must be >= 1".into()));
        }
        Ok(Self::GenGreenshields { v0, rho_max, n })
    }

    pub fn gen_california(v0: f64, rho_max: f64, alpha: f64, regularized: bool) -> Result<Self> {
        require_positive(&[("v0", v0), ("rho_max", rho_max)])?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        Ok(Self::GenCalifornia { v0, rho_max, alpha, regularized })
    }

    pub fn greenberg(v0: f64, rho_max: f64) -> Result<Self> {
        require_positive(&[("v0", v0), ("rho_max", rho_max)])?;
        Ok(Self::Greenberg { v0, rho_max })
    }

    pub fn custom(custom: CustomVelocity) -> Result<Self> {
        let model = Self::Custom(custom);
        // nonincreasing on the declared validity interval, by sampling
        let val = model.validity();
        for k in 0..=256 {
            let x = val.lo + (val.hi - val.lo) * k as f64 / 256.0;
            if model.eval_dv(x)? > MARGIN {
                return Err(Error::InvalidInput(format!("custom velocity increases near {x}")));
            }
        }
        Ok(model)
    }

    pub fn validity(&self) -> Validity {
        match self {
            Self::Greenshields { rho_max, .. } | Self::GenGreenshields { rho_max, .. } => {
                Validity { lo: 0.0, lo_open: false, hi: *rho_max }
            }
            Self::Underwood { .. } => Validity { lo: 0.0, lo_open: false, hi: f64::INFINITY },
            Self::GenCalifornia { regularized, .. } => {
                Validity { lo: 0.0, lo_open: !regularized, hi: f64::INFINITY }
            }
            Self::Greenberg { .. } => Validity { lo: 0.0, lo_open: true, hi: f64::INFINITY },
            Self::Custom(c) => Validity { lo: c.pieces[0], lo_open: false, hi: *c.pieces.last().unwrap() },
        }
    }

    fn check_domain(&self, xi: f64) -> Result<()> {
        let val = self.validity();
        if !xi.is_finite() || !val.contains(xi) {
            return Err(Error::Domain { value: xi, lo: val.lo, hi: val.hi });
        }
        Ok(())
    }

    /// Speed at density ξ.
    pub fn eval_v(&self, xi: f64) -> Result<f64> {
        self.check_domain(xi)?;
        Ok(match self {
            Self::Greenshields { v_max, rho_max } => v_max * (1.0 - xi / rho_max),
            Self::Underwood { v0, rho_max } => v0 * (-xi / rho_max).exp(),
            Self::GenGreenshields { v0, rho_max, n } => v0 * (1.0 - (xi / rho_max).powi(*n as i32)),
            Self::GenCalifornia { v0, rho_max, alpha, regularized } => {
                if *regularized {
                    let c = reg_shift(*v0, *alpha);
                    v0 * (1.0 / (xi.powf(*alpha) + c) - rho_max.powf(-*alpha))
                } else {
                    v0 * (xi.powf(-*alpha) - rho_max.powf(-*alpha))
                }
            }
            Self::Greenberg { v0, rho_max } => v0 * (rho_max / xi).ln(),
            Self::Custom(c) => c.eval(&c.v, xi),
        })
    }

    /// Exact first derivative V′(ξ).
    pub fn eval_dv(&self, xi: f64) -> Result<f64> {
        self.check_domain(xi)?;
        Ok(match self {
            Self::Greenshields { v_max, rho_max } => -v_max / rho_max,
            Self::Underwood { v0, rho_max } => -v0 / rho_max * (-xi / rho_max).exp(),
            Self::GenGreenshields { v0, rho_max, n } => {
                let nf = *n as f64;
                -v0 * nf * (xi / rho_max).powi(*n as i32 - 1) / rho_max
            }
            Self::GenCalifornia { v0, rho_max: _, alpha, regularized } => {
                if *regularized {
                    let c = reg_shift(*v0, *alpha);
                    let d = xi.powf(*alpha) + c;
                    -v0 * alpha * xi.powf(*alpha - 1.0) / (d * d)
                } else {
                    -v0 * alpha * xi.powf(-*alpha - 1.0)
                }
            }
            Self::Greenberg { v0, .. } => -v0 / xi,
            Self::Custom(c) => c.eval(&c.dv, xi),
        })
    }

    /// Exact second derivative V″(ξ).
    pub fn eval_d2v(&self, xi: f64) -> Result<f64> {
        self.check_domain(xi)?;
        Ok(match self {
            Self::Greenshields { .. } => 0.0,
            Self::Underwood { v0, rho_max } => v0 / (rho_max * rho_max) * (-xi / rho_max).exp(),
            Self::GenGreenshields { v0, rho_max, n } => {
                if *n == 1 {
                    0.0
                } else {
                    let nf = *n as f64;
                    -v0 * nf * (nf - 1.0) * (xi / rho_max).powi(*n as i32 - 2) / (rho_max * rho_max)
                }
            }
            Self::GenCalifornia { v0, rho_max: _, alpha, regularized } => {
                if *regularized {
                    let a = *alpha;
                    let c = reg_shift(*v0, a);
                    let s = xi.powf(a);
                    let d = s + c;
                    -v0 * a * xi.powf(a - 2.0) * ((a - 1.0) * d - 2.0 * a * s) / (d * d * d)
                } else {
                    v0 * alpha * (alpha + 1.0) * xi.powf(-*alpha - 2.0)
                }
            }
            Self::Greenberg { v0, .. } => v0 / (xi * xi),
            Self::Custom(c) => c.eval(&c.d2v, xi),
        })
    }

    /// Largest |V′| over [m, M], by Chebyshev sampling.
    pub fn max_abs_dv_on(&self, m: f64, hi: f64, samples: usize) -> Result<f64> {
        let mut sup = 0.0f64;
        for x in chebyshev_points(m, hi, samples.max(2)) {
            sup = sup.max(self.eval_dv(x)?.abs());
        }
        Ok(sup)
    }

    /// Certifies each hypothesis set on [m, M] by dense sampling at Chebyshev
    /// points with a small safety margin, recording the tightest witnessed
    /// constants.
    pub fn check_assumptions(&self, m: f64, big_m: f64, samples: usize) -> Result<AssumptionReport> {
        let big = big_m;
        if !(m.is_finite() && big.is_finite() && 0.0 <= m && m <= big) {
            return Err(Error::InvalidInput(format!("invalid data range [{m}, {big}]")));
        }
        if samples < 2 {
            return Err(Error::InvalidInput("need at least 2 sample points".into()));
        }
        // endpoints must be admissible; this also rejects open endpoints
        self.check_domain(m)?;
        self.check_domain(big)?;

        let points = chebyshev_points(m, big, samples);
        let mut sup_dv = f64::NEG_INFINITY;
        let mut inf_dv = f64::INFINITY;
        let mut sup_abs_dv = 0.0f64;
        let mut sup_h = f64::NEG_INFINITY;
        let mut inf_h = f64::INFINITY;
        let mut sup_abs_h = 0.0f64;
        let mut all_finite = true;
        let mut ob2_holds = true;
        let mut ob3_first = true;
        let mut ob3_kappa1 = f64::INFINITY;

        let osc = big - m;
        for &x in &points {
            let v = self.eval_v(x)?;
            let dv = self.eval_dv(x)?;
            let d2v = self.eval_d2v(x)?;
            if !(v.is_finite() && dv.is_finite() && d2v.is_finite()) {
                all_finite = false;
                continue;
            }
            let h = dv + d2v * x;
            sup_dv = sup_dv.max(dv);
            inf_dv = inf_dv.min(dv);
            sup_abs_dv = sup_abs_dv.max(dv.abs());
            sup_h = sup_h.max(h);
            inf_h = inf_h.min(h);
            sup_abs_h = sup_abs_h.max(h.abs());

            // 0 ≤ (-V′ - V″ξ)(M - m) ≤ -V′ξ
            if h > MARGIN || (-h) * osc > -dv * x + MARGIN {
                ob2_holds = false;
            }
            // -V′ ≤ V″ξ ≤ -(2 - κ₁)V′
            let neg_dv = -dv;
            if neg_dv > MARGIN * (1.0 + sup_abs_dv) * 1e-3 {
                if d2v * x < neg_dv - MARGIN {
                    ob3_first = false;
                }
                ob3_kappa1 = ob3_kappa1.min(2.0 - d2v * x / neg_dv);
            } else if (d2v * x).abs() > MARGIN {
                // V′ ≈ 0 forces V″ξ ≈ 0 for both inequalities to hold
                ob3_first = false;
            }
        }

        if !all_finite {
            // derivatives blow up inside the range (e.g. unregularized models
            // sampled at 0); nothing can be certified
            return Ok(AssumptionReport {
                range: (m, big),
                linear: None,
                conv_more: None,
                ob2: false,
                ob3: None,
                greenberg_zero_h: false,
                lipschitz_at_range: false,
                sup_dv: f64::NAN,
                sup_abs_dv: f64::NAN,
            });
        }

        let linear = if sup_dv < 0.0 && (sup_dv - inf_dv) <= MARGIN * sup_abs_dv.max(1.0) {
            Some(-sup_dv)
        } else {
            None
        };

        let conv_more = {
            let kappa2 = -sup_dv;
            // witnessed κ₁ is floored at the safety margin so it stays positive
            let kappa1 = sup_h.max(MARGIN);
            if inf_h >= -MARGIN && kappa2 > 0.0 && kappa2 - kappa1 > MARGIN {
                Some((kappa1, kappa2))
            } else {
                None
            }
        };

        let ob3 = if ob3_first && ob3_kappa1.is_finite() && ob3_kappa1 >= MARGIN {
            Some(ob3_kappa1)
        } else {
            None
        };

        Ok(AssumptionReport {
            range: (m, big),
            linear,
            conv_more,
            ob2: ob2_holds,
            ob3,
            greenberg_zero_h: sup_abs_h <= ZERO_H_TOL * sup_abs_dv.max(1.0),
            lipschitz_at_range: true,
            sup_dv,
            sup_abs_dv,
        })
    }
}

fn require_positive(params: &[(&str, f64)]) -> Result<()> {
    for (name, value) in params {
        if !(value.is_finite() && *value > 0.0) {
            return Err(Error::InvalidInput(format!("{name} = {value} must be positive")));
        }
    }
    Ok(())
}

fn reg_shift(v0: f64, alpha: f64) -> f64 {
    let va = v0.powf(alpha);
    va / (va + 1.0)
}

fn chebyshev_points(m: f64, hi: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    (0..n)
        .map(|k| {
            let theta = std::f64::consts::PI * k as f64 / (n - 1) as f64;
            m + (hi - m) * 0.5 * (1.0 - theta.cos())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: usize = DEFAULT_ASSUMPTION_SAMPLES;

    #[test]
    fn greenshields_closed_forms() {
        let v = VelocityModel::greenshields(1.0, 1.0).unwrap();
        assert_eq!(v.eval_v(0.3).unwrap(), 0.7);
        assert_eq!(v.eval_dv(0.3).unwrap(), -1.0);
        assert_eq!(v.eval_d2v(0.3).unwrap(), 0.0);
    }

    #[test]
    fn underwood_at_zero() {
        let v = VelocityModel::underwood(1.0, 1.0).unwrap();
        assert_eq!(v.eval_v(0.0).unwrap(), 1.0);
    }

    #[test]
    fn greenberg_closed_forms() {
        // hand-differentiated v₀ ln(ρ_max/ξ) at ξ = 1
        let v = VelocityModel::greenberg(1.0, 1.0).unwrap();
        assert_eq!(v.eval_v(1.0).unwrap(), 0.0);
        assert_eq!(v.eval_dv(1.0).unwrap(), -1.0);
        assert_eq!(v.eval_d2v(1.0).unwrap(), 1.0);
    }

    #[test]
    fn greenberg_rejects_zero_density() {
        let v = VelocityModel::greenberg(1.0, 1.0).unwrap();
        assert!(matches!(v.eval_v(0.0), Err(Error::Domain { .. })));
        assert!(matches!(v.check_assumptions(0.0, 1.0, S), Err(Error::Domain { .. })));
    }

    fn catalog() -> Vec<(VelocityModel, f64, f64)> {
        vec![
            (VelocityModel::greenshields(1.3, 0.9).unwrap(), 0.05, 0.85),
            (VelocityModel::underwood(1.0, 0.7).unwrap(), 0.0, 2.0),
            (VelocityModel::gen_greenshields(1.1, 1.0, 3).unwrap(), 0.0, 0.95),
            (VelocityModel::gen_california(1.0, 1.0, 0.5, false).unwrap(), 0.1, 2.0),
            (VelocityModel::gen_california(1.0, 1.0, 0.4, true).unwrap(), 0.1, 2.0),
            (VelocityModel::greenberg(0.8, 1.2).unwrap(), 0.05, 2.0),
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for (model, lo, hi) in catalog() {
            for k in 1..40 {
                let xi = lo + (hi - lo) * k as f64 / 40.0;
                let h = 1e-5 * xi.max(1.0);
                if xi - h <= lo {
                    continue;
                }
                let fd1 = (model.eval_v(xi + h).unwrap() - model.eval_v(xi - h).unwrap()) / (2.0 * h);
                let dv = model.eval_dv(xi).unwrap();
                assert!(
                    (fd1 - dv).abs() <= 1e-6 * dv.abs().max(1.0),
                    "{model:?} dV mismatch at {xi}: fd {fd1} vs {dv}"
                );
                let fd2 = (model.eval_dv(xi + h).unwrap() - model.eval_dv(xi - h).unwrap()) / (2.0 * h);
                let d2v = model.eval_d2v(xi).unwrap();
                assert!(
                    (fd2 - d2v).abs() <= 1e-6 * d2v.abs().max(1.0),
                    "{model:?} d2V mismatch at {xi}: fd {fd2} vs {d2v}"
                );
            }
        }
    }

    #[test]
    fn greenshields_is_linear_with_unit_delta() {
        let v = VelocityModel::greenshields(1.0, 1.0).unwrap();
        let rep = v.check_assumptions(0.0, 1.0, S).unwrap();
        assert_eq!(rep.linear, Some(1.0));
        assert_eq!(rep.kappa_w(), Some(1.0));
        assert!(rep.conv_more.is_none());
        assert!(rep.lipschitz_at_range);
    }

    #[test]
    fn greenshields_oscillation_condition_depends_on_range() {
        let v = VelocityModel::greenshields(1.0, 1.0).unwrap();
        // with V′ = -1, V″ = 0 the condition reduces to M - m ≤ m
        assert!(v.check_assumptions(0.6, 1.0, S).unwrap().ob2);
        assert!(!v.check_assumptions(0.2, 1.0, S).unwrap().ob2);
        assert_eq!(v.check_assumptions(0.6, 1.0, S).unwrap().kappa_g(), Some(1.0));
    }

    /// Bisection of the checker's ob2 verdict on the ratio m/M.
    fn ob2_threshold(model: &VelocityModel, cap: f64) -> f64 {
        let (mut lo, mut hi) = (1e-6, 1.0 - 1e-9);
        assert!(!model.check_assumptions(lo * cap, cap, 513).unwrap().ob2);
        assert!(model.check_assumptions(hi * cap, cap, 513).unwrap().ob2);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if model.check_assumptions(mid * cap, cap, 513).unwrap().ob2 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn gen_greenshields_threshold_is_n_over_n_plus_1() {
        for n in [1u32, 2, 3, 5] {
            let v = VelocityModel::gen_greenshields(1.0, 1.0, n).unwrap();
            let found = ob2_threshold(&v, 1.0);
            let expected = n as f64 / (n as f64 + 1.0);
            assert!(
                (found - expected).abs() < 1e-6,
                "n = {n}: found {found}, expected {expected}"
            );
        }
    }

    #[test]
    fn underwood_threshold_matches_worst_case_analysis() {
        // The sampled condition for V = v₀ e^{-ξ/ρm} reduces, after the
        // exponential factor cancels, to (1 - ξ/ρm)(M - m) ≤ ξ, whose worst
        // case is ξ = m. With M = ρ_max the transition ratio solves
        // (1 - r)² = r, i.e. r = (3 - √5)/2.
        let v = VelocityModel::underwood(1.0, 1.0).unwrap();
        let found = ob2_threshold(&v, 1.0);
        let expected = (3.0 - 5.0f64.sqrt()) / 2.0;
        assert!((found - expected).abs() < 1e-6, "found {found}, expected {expected}");
    }

    #[test]
    fn greenberg_has_vanishing_h_and_unit_kappa() {
        let v = VelocityModel::greenberg(1.0, 1.0).unwrap();
        let rep = v.check_assumptions(0.2, 1.0, S).unwrap();
        assert!(rep.greenberg_zero_h);
        assert_eq!(rep.kappa_g(), Some(1.0));
        // V′ + V″ξ ≡ 0 also sits inside the convexity window with κ₁ at the floor
        let (k1, k2) = rep.conv_more.expect("conv_more should hold for Greenberg away from 0");
        assert!(k1 <= 1e-8);
        assert!((k2 - 1.0).abs() < 1e-9); // κ₂ = -sup V′ = v₀/M = 1
    }

    #[test]
    fn gen_california_ratio_constant() {
        // V″ξ/(-V′) = α + 1, so the witnessed κ₁ is 1 - α
        let alpha = 0.3;
        let v = VelocityModel::gen_california(1.0, 1.0, alpha, false).unwrap();
        let rep = v.check_assumptions(0.2, 2.0, S).unwrap();
        let k1 = rep.ob3.expect("ratio condition should hold");
        assert!((k1 - (1.0 - alpha)).abs() < 1e-9);
        assert_eq!(rep.kappa_g(), Some(k1));

        // V′ + V″ξ = v₀α²ξ^{-α-1} ≥ 0 sits in the convexity window exactly
        // when (m/M)^{α+1} > α; [0.5, 1.0] qualifies, [0.2, 2.0] does not
        let narrow = v.check_assumptions(0.5, 1.0, S).unwrap();
        let (k1c, k2c) = narrow.conv_more.expect("convexity window should hold on [0.5, 1.0]");
        assert!((k1c - alpha * alpha * 0.5f64.powf(-alpha - 1.0)).abs() < 1e-9);
        assert!((k2c - alpha).abs() < 1e-9); // -sup V′ = v₀α M^{-α-1} at M = 1
        assert!(rep.conv_more.is_none());
    }

    #[test]
    fn conditions_are_monotone_under_range_shrinking() {
        let cases = [
            (VelocityModel::greenshields(1.0, 1.0).unwrap(), 0.55, 1.0),
            (VelocityModel::underwood(1.0, 1.0).unwrap(), 0.4, 1.0),
            (VelocityModel::gen_greenshields(1.0, 1.0, 2).unwrap(), 0.7, 1.0),
        ];
        for (model, m, hi) in cases {
            let outer = model.check_assumptions(m, hi, S).unwrap();
            for k in 0..8 {
                let m2 = m + (hi - m) * 0.4 * k as f64 / 8.0;
                let hi2 = hi - (hi - m) * 0.3 * k as f64 / 8.0;
                let inner = model.check_assumptions(m2, hi2, S).unwrap();
                if outer.ob2 {
                    assert!(inner.ob2, "{model:?} ob2 lost on [{m2}, {hi2}]");
                }
                if outer.linear.is_some() {
                    assert!(inner.linear.is_some());
                }
            }
        }
    }

    #[test]
    fn unregularized_california_blows_up_at_zero() {
        let v = VelocityModel::gen_california(1.0, 1.0, 0.5, false).unwrap();
        assert!(matches!(v.eval_v(0.0), Err(Error::Domain { .. })));
        let reg = VelocityModel::gen_california(1.0, 1.0, 0.5, true).unwrap();
        assert!(reg.eval_v(0.0).unwrap().is_finite());
    }

    #[test]
    fn custom_velocity_round_trip() {
        // V = 1 - ξ² on [0, 1]
        let c = CustomVelocity::new(
            vec![0.0, 1.0],
            vec![vec![1.0, 0.0, -1.0]],
            vec![vec![0.0, -2.0]],
            vec![vec![-2.0]],
        )
        .unwrap();
        let v = VelocityModel::custom(c).unwrap();
        assert!((v.eval_v(0.5).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(v.eval_dv(0.5).unwrap(), -1.0);
        assert_eq!(v.eval_d2v(0.5).unwrap(), -2.0);
    }

    #[test]
    fn custom_velocity_rejects_increasing() {
        let c = CustomVelocity::new(
            vec![0.0, 1.0],
            vec![vec![0.0, 1.0]],
            vec![vec![1.0]],
            vec![vec![0.0]],
        )
        .unwrap();
        assert!(VelocityModel::custom(c).is_err());
    }
}
