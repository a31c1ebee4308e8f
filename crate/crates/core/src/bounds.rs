//! Closed-form query and sample complexity bounds and the stylized annulus
//! scenario used to compare them.
//!
//! Chernoff-style terms use natural logarithms; only the bisection term uses
//! `⌈log₂ n⌉`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::datasets::{validate_annulus, ANNULUS_HALF_SIDE};
use crate::{Error, Execution, Result};

/// `√9 − √8`, the reach fraction that bounds usable tube radii.
pub fn reach_fraction() -> f64 {
    3.0 - 8f64.sqrt()
}

/// Margin subtracted from the feasibility limit when choosing γ.
pub const GAMMA_MARGIN: f64 = 1e-5;

/// Largest γ used by the annulus scenario: `(√9 − √8)τ − w − 1e-5`.
pub fn feasible_gamma(tau: f64, w: f64) -> Result<f64> {
    let limit = reach_fraction() * tau - w;
    if !(limit > GAMMA_MARGIN) {
        return Err(Error::Infeasible(format!(
            "no admissible gamma: need (sqrt 9 - sqrt 8) tau - w > {GAMMA_MARGIN}, got {limit:e} (tau = {tau}, w = {w})"
        )));
    }
    Ok(limit - GAMMA_MARGIN)
}

/// Whether `gamma < (√9 − √8)τ − w`.
pub fn gamma_is_feasible(tau: f64, w: f64, gamma: f64) -> bool {
    gamma > 0.0 && gamma < reach_fraction() * tau - w
}

/// Open interval of admissible ε for the labeled Čech complex, or `None` when the
/// radicand `(w+γ)² + τ² − 6τ(w+γ)` is negative.
pub fn epsilon_interval(tau: f64, w: f64, gamma: f64) -> Option<(f64, f64)> {
    let s = w + gamma;
    let radicand = s * s + tau * tau - 6.0 * tau * s;
    if radicand < 0.0 {
        return None;
    }
    let root = radicand.sqrt();
    Some(((s + tau - root) / 2.0, (s + tau + root) / 2.0))
}

/// Minimal number of radius-`r` balls centered on a circle of radius `tau` that
/// cover it.
pub fn covering_number_circle(tau: f64, r: f64) -> u64 {
    if r >= 2.0 * tau {
        return 1;
    }
    // each ball covers an arc of half-angle 2·asin(r / 2τ)
    let x = PI / (2.0 * (r / (2.0 * tau)).asin());
    (x * (1.0 - 1e-12)).ceil() as u64
}

/// Area of the intersection of two disks with radii `r1`, `r2` and center distance `d`.
pub fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1))
        .clamp(-1.0, 1.0)
        .acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2))
        .clamp(-1.0, 1.0)
        .acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
        .max(0.0)
        .sqrt();
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k
}

/// Every symbol entering the bounds, with derived annulus quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsScenario {
    pub tau: f64,
    pub w: f64,
    pub gamma: f64,
    /// Midpoint of the admissible ε interval when it is nonempty.
    pub epsilon: Option<f64>,
    pub epsilon_interval: Option<(f64, f64)>,
    pub delta: f64,
    pub beta: f64,
    pub p_y1: f64,
    pub domain_area: f64,
    /// `N_{γ/4}`.
    pub n_cover_quarter: u64,
    /// `N_{w+γ}`.
    pub n_cover_tube: u64,
    /// `h_{w+γ}`.
    pub h_tube: f64,
    /// `ρ⁰_{γ/4}`.
    pub rho0: f64,
    /// `ρ¹_{γ/4}`.
    pub rho1: f64,
}

/// Class-conditional and marginal ball measures for the annulus scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusMeasures {
    pub h_tube: f64,
    pub rho0: f64,
    pub rho1: f64,
}

impl BoundsScenario {
    /// The stylized annulus: a circular boundary of radius `tau` in the 5×5 square,
    /// classes overlapping on the tube of radius `w`, `P(y=1) = πτ²/25` and β equal
    /// to that prior.
    pub fn annulus(tau: f64, w: f64, delta: f64) -> Result<Self> {
        check_probability("delta", delta)?;
        validate_annulus(tau, w)?;
        let gamma = feasible_gamma(tau, w)?;
        let domain_area = (2.0 * ANNULUS_HALF_SIDE).powi(2);
        let p_y1 = PI * tau * tau / domain_area;
        let epsilon_interval = epsilon_interval(tau, w, gamma);
        let mut s = BoundsScenario {
            tau,
            w,
            gamma,
            epsilon: epsilon_interval.map(|(a, b)| 0.5 * (a + b)),
            epsilon_interval,
            delta,
            beta: p_y1,
            p_y1,
            domain_area,
            n_cover_quarter: covering_number_circle(tau, gamma / 4.0),
            n_cover_tube: covering_number_circle(tau, w + gamma),
            h_tube: 0.0,
            rho0: 0.0,
            rho1: 0.0,
        };
        let m = annulus_measures(&s)?;
        s.h_tube = m.h_tube;
        s.rho0 = m.rho0;
        s.rho1 = m.rho1;
        Ok(s)
    }

    pub fn is_feasible(&self) -> bool {
        gamma_is_feasible(self.tau, self.w, self.gamma)
    }

    /// `1 − √(1 − δ)`, the per-phase confidence split, computed without cancellation.
    pub fn split_confidence(&self) -> f64 {
        split_confidence(self.delta)
    }
}

/// `1 − √(1 − δ)` as `δ / (1 + √(1 − δ))`.
pub fn split_confidence(delta: f64) -> f64 {
    delta / (1.0 + (1.0 - delta).sqrt())
}

fn check_probability(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must lie in (0, 1), got {v}"
        )))
    }
}

/// Ball measures at a point of the circular boundary (all points are equivalent by
/// symmetry).
pub fn annulus_measures(s: &BoundsScenario) -> Result<AnnulusMeasures> {
    validate_annulus(s.tau, s.w)?;
    let (tau, w) = (s.tau, s.w);
    let r_small = s.gamma / 4.0;
    let r_tube = s.w + s.gamma;
    if !(r_small > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "gamma must be positive, got {}",
            s.gamma
        )));
    }
    if tau + r_tube.max(r_small) > ANNULUS_HALF_SIDE {
        return Err(Error::InvalidGeometry(
            "ball around the boundary leaves the square".into(),
        ));
    }
    let area_x0 = s.domain_area - PI * (tau - w).powi(2);
    let area_x1 = PI * (tau + w).powi(2);
    let (d0, d1) = (1.0 / area_x0, 1.0 / area_x1);
    // class 1 lives on the disk of radius τ + w, class 0 on the square minus the disk
    // of radius τ − w; the ball is centered at distance τ from the origin
    let in_x1 = |r: f64| lens_area(r, tau + w, tau);
    let in_x0 = |r: f64| PI * r * r - lens_area(r, tau - w, tau);
    let p0 = 1.0 - s.p_y1;
    Ok(AnnulusMeasures {
        h_tube: p0 * d0 * in_x0(r_tube) + s.p_y1 * d1 * in_x1(r_tube),
        rho0: d0 * in_x0(r_small),
        rho1: d1 * in_x1(r_small),
    })
}

/// Passive sample complexity:
/// `max_y (1 / (P(y) ρ^y_{γ/4})) · [ln(2 N_{γ/4}) + ln(1 / confidence)]`.
pub fn passive_sample_bound(s: &BoundsScenario, confidence: f64) -> Result<f64> {
    check_probability("confidence", confidence)?;
    let tail = (2.0 * s.n_cover_quarter as f64).ln() - confidence.ln();
    let per_class = [(1.0 - s.p_y1) * s.rho0, s.p_y1 * s.rho1];
    if per_class.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::InvalidParameter(
            "class priors and ball measures must be positive".into(),
        ));
    }
    Ok(per_class
        .iter()
        .map(|m| tail / m)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `⌈log₂ n⌉` for `n ≥ 1`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Active query complexity:
/// `ln{1/[β(1−√(1−δ))]} / ln[1/(1−β)] + n N_{w+γ} h_{w+γ} (⌈log₂ n⌉ + 1)`.
pub fn active_query_bound(s: &BoundsScenario, n_unlabeled: u64) -> Result<f64> {
    check_probability("beta", s.beta)?;
    check_probability("delta", s.delta)?;
    if n_unlabeled == 0 {
        return Err(Error::InvalidParameter(
            "n_unlabeled must be at least 1".into(),
        ));
    }
    let first = -(s.beta * s.split_confidence()).ln() / -(-s.beta).ln_1p();
    let n = n_unlabeled as f64;
    let second = n * s.n_cover_tube as f64 * s.h_tube * (ceil_log2(n_unlabeled) + 1) as f64;
    Ok(first + second)
}

/// Which parameter a ratio scan varies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanMode {
    /// Vary τ at fixed `w`.
    VaryTau { w: f64 },
    /// Vary `w` at fixed τ.
    VaryW { tau: f64 },
}

impl ScanMode {
    pub fn vary_tau(w: f64) -> Self {
        ScanMode::VaryTau { w }
    }

    pub fn vary_w(tau: f64) -> Self {
        ScanMode::VaryW { tau }
    }

    fn tau_w(self, param: f64) -> (f64, f64) {
        match self {
            ScanMode::VaryTau { w } => (param, w),
            ScanMode::VaryW { tau } => (tau, param),
        }
    }
}

/// One row of a complexity ratio scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub param: f64,
    /// `None` when the grid point is infeasible.
    pub scenario: Option<BoundsScenario>,
    pub active_bound: f64,
    pub passive_bound: f64,
    pub ratio: f64,
    /// Why the row is infeasible.
    pub reason: Option<String>,
}

impl ScanRow {
    pub fn feasible(&self) -> bool {
        self.scenario.is_some()
    }
}

/// Evaluates the annulus scenario at each grid value.
///
/// The passive bound uses confidence `1 − √(1 − δ)`; its ceiling is the unlabeled
/// pool size fed to the active bound. Infeasible grid points produce flagged rows.
pub fn complexity_ratio_scan(mode: ScanMode, grid: &[f64], delta: f64) -> Vec<ScanRow> {
    complexity_ratio_scan_with(mode, grid, delta, Execution::default())
}

pub fn complexity_ratio_scan_with(
    mode: ScanMode,
    grid: &[f64],
    delta: f64,
    exec: Execution,
) -> Vec<ScanRow> {
    exec.map_slice(grid, |&param| {
        let (tau, w) = mode.tau_w(param);
        match scan_point(tau, w, delta) {
            Ok((s, active, passive)) => ScanRow {
                param,
                scenario: Some(s),
                active_bound: active,
                passive_bound: passive,
                ratio: active / passive,
                reason: None,
            },
            Err(e) => ScanRow {
                param,
                scenario: None,
                active_bound: f64::NAN,
                passive_bound: f64::NAN,
                ratio: f64::NAN,
                reason: Some(e.to_string()),
            },
        }
    })
}

fn scan_point(tau: f64, w: f64, delta: f64) -> Result<(BoundsScenario, f64, f64)> {
    let s = BoundsScenario::annulus(tau, w, delta)?;
    let passive = passive_sample_bound(&s, s.split_confidence())?;
    let pool = passive.ceil() as u64;
    let active = active_query_bound(&s, pool)?;
    Ok((s, active, passive))
}

/// `start:stop:count` evenly spaced grid, endpoints included.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("grid `{spec}` is not start:stop:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    Ok(linspace(start, stop, count))
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

pub const SCAN_HEADER: &str =
    "param,gamma,N_cover,h,rho0,rho1,active_bound,passive_bound,ratio,feasible";

/// Scan table as CSV. `N_cover` is `N_{w+γ}`, the covering number paired with `h`.
pub fn scan_to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    for r in rows {
        match &r.scenario {
            Some(s) => writeln!(
                out,
                "{:?},{:?},{},{:?},{:?},{:?},{:?},{:?},{:?},true",
                r.param,
                s.gamma,
                s.n_cover_tube,
                s.h_tube,
                s.rho0,
                s.rho1,
                r.active_bound,
                r.passive_bound,
                r.ratio
            ),
            None => writeln!(out, "{:?},,,,,,,,,false", r.param),
        }
        .expect("writing to a String");
    }
    out
}

pub fn save_scan_csv(rows: &[ScanRow], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scan_to_csv(rows))?;
    Ok(())
}
