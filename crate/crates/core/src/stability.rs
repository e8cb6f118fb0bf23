//! Stability of an equilibrium in the characteristic-parameter plane.
//!
//! The characteristic equation of the linearisation is
//! `(z+1)^2 - α H(z)(z+1) + β H(z)^2 = 0`. For a kernel with mean delay
//! `τ` the boundary of the stability region `S(α, β)` is made of
//!
//! - the saddle-node line `l0: β = α - 1`,
//! - the Hopf curve `γτ(ω) = (2 Re Qτ(iω), |Qτ(iω)|^2)` where
//!   `Qτ(z) = (z + τ) / (τ Ĥ(z))`,
//! - and, when `ω cos θ(ω) + τ sin θ(ω) = 0` has a smallest positive root
//!   `ωτ`, the Hopf line `lτ: β = μτ (α - μτ)` with
//!   `μτ = 1 / (ρ(ωτ) cos θ(ωτ))`.
//!
//! With a root the region is bounded by a segment of `l0`, a segment of
//! `lτ` and the arc of `γτ` over `(0, ωτ)`. Without one it is unbounded,
//! enclosed by the half-line `α <= 2` of `l0` and the full curve.
//!
//! Region membership is decided by casting a ray in the `+α` direction.
//! Because `β` is strictly increasing along the Hopf curve, the crossing
//! with the curve is found exactly by a one-dimensional root solve, so no
//! polyline approximation enters the verdict.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernel::{polar_transform, KernelSpec};
use crate::{Error, Result};

/// Tolerances and sampling controls. All fields may be overridden.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    /// Distance to the boundary below which a point is `Marginal`.
    pub marginal_tol: f64,
    /// Marginal band for the non-delayed test.
    pub nondelayed_marginal_tol: f64,
    /// Maximal chord length between consecutive Hopf-curve samples.
    pub arc_tol: f64,
    /// Left end of the sampled saddle-node half-line (unbounded regions).
    pub alpha_min: f64,
    /// Minimal radius in the `(α, β)` plane that sampled unbounded curves reach.
    pub far_radius: f64,
    /// Step in θ for bracketing the root of `ω cos θ + τ sin θ`.
    pub theta_step: f64,
    /// Absolute tolerance on frequency roots.
    pub omega_tol: f64,
    /// Relative tolerance for the critical-delay bisection.
    pub critical_rel_tol: f64,
    /// Number of log-spaced delays in the critical-delay guard scan.
    pub critical_scan_points: usize,
    pub max_iter: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            marginal_tol: 1e-6,
            nondelayed_marginal_tol: 1e-9,
            arc_tol: 0.05,
            alpha_min: -100.0,
            far_radius: 100.0,
            theta_step: PI / 64.0,
            omega_tol: 1e-13,
            critical_rel_tol: 1e-9,
            critical_scan_points: 400,
            max_iter: 400,
        }
    }
}

impl StabilityConfig {
    /// Applies a `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
        };
        match key {
            "marginal_tol" => self.marginal_tol = num()?,
            "nondelayed_marginal_tol" => self.nondelayed_marginal_tol = num()?,
            "arc_tol" => self.arc_tol = num()?,
            "alpha_min" => self.alpha_min = num()?,
            "far_radius" => self.far_radius = num()?,
            "theta_step" => self.theta_step = num()?,
            "omega_tol" => self.omega_tol = num()?,
            "critical_rel_tol" => self.critical_rel_tol = num()?,
            "critical_scan_points" => self.critical_scan_points = num()? as usize,
            "max_iter" => self.max_iter = num()? as usize,
            _ => return Err(Error::Config(format!("unknown tolerance key `{key}`"))),
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cause {
    DelayIndependentStable,
    DelayIndependentUnstable,
    InsideRegion,
    OutsideRegion,
    OnBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub cause: Cause,
    pub distance_to_boundary: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DelayIndependence {
    StableForAllKernels,
    UnstableForAllKernels,
    Indeterminate,
}

/// Smallest positive root of `ω cos θ(ω) + τ sin θ(ω) = 0` and
/// `μτ = 1 / (ρ(ωτ) cos θ(ωτ))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaTau {
    pub omega_tau: f64,
    pub mu_tau: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingType {
    HopfLine,
    HopfCurve,
    SaddleNode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalDelay {
    pub tau_star: f64,
    /// Rescaled frequency: the roots on the imaginary axis are `±i ω / τ*`.
    pub crossing_omega: f64,
    pub crossing_type: CrossingType,
    /// Value from the direct crossing equations, before the bisection
    /// on region membership.
    pub direct_tau: Option<f64>,
}

/// Stability of the non-delayed system (`H ≡ 1`): stable iff
/// `α < min{2, β + 1}`.
pub fn classify_nondelayed(alpha: f64, beta: f64) -> ClassificationResult {
    classify_nondelayed_with(alpha, beta, &StabilityConfig::default())
}

pub fn classify_nondelayed_with(alpha: f64, beta: f64, cfg: &StabilityConfig) -> ClassificationResult {
    let margin = alpha - 2.0f64.min(beta + 1.0);
    // boundary: vertical half-line α = 2 (β >= 1) and l0 for α <= 2
    let d_vertical = dist_point_ray((alpha, beta), (2.0, 1.0), (0.0, 1.0));
    let d_line = dist_point_ray((alpha, beta), (2.0, 1.0), (-1.0, -1.0));
    let distance = d_vertical.min(d_line);
    let (verdict, cause) = if margin.abs() < cfg.nondelayed_marginal_tol {
        (Verdict::Marginal, Cause::OnBoundary)
    } else if margin < 0.0 {
        (Verdict::Stable, Cause::InsideRegion)
    } else {
        (Verdict::Unstable, Cause::OutsideRegion)
    };
    ClassificationResult { verdict, cause, distance_to_boundary: distance }
}

/// Kernel-independent shortcuts: `|α| + |β| < 1` is stable and `β < α - 1`
/// unstable for every kernel.
pub fn delay_independent_test(alpha: f64, beta: f64) -> DelayIndependence {
    if alpha.abs() + beta.abs() < 1.0 {
        DelayIndependence::StableForAllKernels
    } else if beta < alpha - 1.0 {
        DelayIndependence::UnstableForAllKernels
    } else {
        DelayIndependence::Indeterminate
    }
}

/// True on the saddle-node line away from the Bogdanov-Takens point.
pub fn saddle_node_test(alpha: f64, beta: f64) -> bool {
    (beta - (alpha - 1.0)).abs() < 1e-9 && (alpha - 2.0).abs() > 1e-9
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> f64 {
    let mut flo = f(lo);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Frequency at which the normalised phase reaches `target`, if it does
/// within the kernel's valid range.
fn omega_at_phase(kernel: KernelSpec, target: f64) -> Option<f64> {
    match kernel {
        KernelSpec::Dirac => Some(target),
        KernelSpec::Uniform { eps } => (target < PI / eps).then_some(target),
        KernelSpec::Gamma { order } => {
            let p = f64::from(order);
            (target < p * PI / 2.0).then(|| p * (target / p).tan())
        }
    }
}

fn eq16(kernel: KernelSpec, tau: f64, omega: f64) -> Result<f64> {
    let pt = polar_transform(kernel, omega)?;
    Ok(omega * pt.theta.cos() + tau * pt.theta.sin())
}

/// Smallest positive root of `ω cos θ(ω) + τ sin θ(ω) = 0`, or `None`
/// when the equation has no positive root.
pub fn omega_tau(kernel: KernelSpec, tau: f64) -> Result<Option<OmegaTau>> {
    omega_tau_with(kernel, tau, &StabilityConfig::default())
}

pub fn omega_tau_with(kernel: KernelSpec, tau: f64, cfg: &StabilityConfig) -> Result<Option<OmegaTau>> {
    kernel.validate()?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("mean delay must be positive, got {tau}")));
    }
    // both terms are positive while θ < π/2
    let Some(start) = omega_at_phase(kernel, PI / 2.0) else {
        return match kernel {
            KernelSpec::Uniform { .. } => Err(Error::AnalysisRangeExceeded(
                "phase never reaches pi/2 inside the valid frequency range".into(),
            )),
            _ => Ok(None),
        };
    };
    let limit = kernel.omega_limit().unwrap_or(f64::INFINITY);
    let mut lo = start;
    let mut phase = PI / 2.0;
    let mut steps = 0usize;
    let hi = loop {
        phase += cfg.theta_step;
        steps += 1;
        let next = match omega_at_phase(kernel, phase) {
            Some(w) => w,
            // phase saturates below the target: continue in ω geometrically
            None => lo * 2.0 + 1.0,
        };
        if next >= limit {
            let edge = limit * (1.0 - 1e-12);
            if eq16(kernel, tau, edge)? <= 0.0 {
                break edge;
            }
            return Err(Error::AnalysisRangeExceeded(format!(
                "no root of the crossing equation below omega = {limit}"
            )));
        }
        if eq16(kernel, tau, next)? <= 0.0 {
            break next;
        }
        lo = next;
        if steps > 100_000 || !lo.is_finite() {
            return Err(Error::NoConvergence("bracketing the crossing frequency".into()));
        }
    };
    let omega = bisect(
        |w| eq16(kernel, tau, w).unwrap_or(f64::NAN),
        lo,
        hi,
        cfg.omega_tol * hi.max(1.0),
        cfg.max_iter,
    );
    let pt = polar_transform(kernel, omega)?;
    let mu = 1.0 / (pt.rho * pt.theta.cos());
    if !(mu < 0.0) {
        return Err(Error::UnsupportedKernel(format!(
            "mu_tau = {mu} is not negative for {kernel} at tau = {tau}"
        )));
    }
    Ok(Some(OmegaTau { omega_tau: omega, mu_tau: mu }))
}

/// Point `(α, β)` of the Hopf curve at rescaled frequency `omega`.
pub fn hopf_curve_point(kernel: KernelSpec, tau: f64, omega: f64) -> Result<(f64, f64)> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("mean delay must be positive, got {tau}")));
    }
    let pt = polar_transform(kernel, omega)?;
    let r = omega / tau;
    let alpha = 2.0 / pt.rho * (pt.theta.cos() - r * pt.theta.sin());
    let beta = (1.0 + r * r) / (pt.rho * pt.rho);
    Ok((alpha, beta))
}

/// Exact region geometry for one kernel and mean delay.
#[derive(Clone, Copy, Debug)]
pub struct RegionGeometry {
    pub kernel: KernelSpec,
    pub tau: f64,
    pub omega_tau: Option<OmegaTau>,
}

impl RegionGeometry {
    pub fn new(kernel: KernelSpec, tau: f64, cfg: &StabilityConfig) -> Result<Self> {
        Ok(RegionGeometry { kernel, tau, omega_tau: omega_tau_with(kernel, tau, cfg)? })
    }

    pub fn bounded(&self) -> bool {
        self.omega_tau.is_some()
    }

    fn curve(&self, omega: f64) -> (f64, f64) {
        hopf_curve_point(self.kernel, self.tau, omega).expect("frequency inside the valid range")
    }

    /// Frequency on the Hopf arc where `β = beta` (`beta >= 1`).
    fn curve_omega_at_beta(&self, beta: f64) -> f64 {
        let beta_of = |w: f64| self.curve(w).1 - beta;
        let hi = match self.omega_tau {
            Some(ot) => ot.omega_tau,
            None => {
                let mut hi = 1.0;
                while beta_of(hi) < 0.0 {
                    hi *= 2.0;
                }
                hi
            }
        };
        bisect(beta_of, 0.0, hi, 1e-15 * hi.max(1.0), 400)
    }

    /// Distance from `(alpha, beta)` to the straight boundary pieces.
    fn line_distance(&self, p: (f64, f64)) -> f64 {
        match self.omega_tau {
            Some(ot) => {
                let mu = ot.mu_tau;
                let l0 = dist_point_segment(p, (1.0 + mu, mu), (2.0, 1.0));
                let lt = dist_point_segment(p, (2.0 * mu, mu * mu), (1.0 + mu, mu));
                l0.min(lt)
            }
            None => dist_point_ray(p, (2.0, 1.0), (-1.0, -1.0)),
        }
    }

    /// Distance from `(alpha, beta)` to the boundary without materialising
    /// the sampled curve. Arc pieces that cannot beat the current best are
    /// skipped.
    pub fn distance(&self, alpha: f64, beta: f64, arc_tol: f64) -> f64 {
        let p = (alpha, beta);
        let mut best = self.line_distance(p);
        let dist_at = |w: f64| {
            let (a, b) = self.curve(w);
            (a - alpha).hypot(b - beta)
        };
        let omega_end = match self.omega_tau {
            Some(ot) => ot.omega_tau,
            None => {
                let reach = alpha.hypot(beta) + best + 1.0;
                let mut w = 1.0;
                while w < 1e12 {
                    let (a, b) = self.curve(w);
                    if a.hypot(b) > reach {
                        break;
                    }
                    w *= 2.0;
                }
                w
            }
        };
        let base = 64;
        let mut stack: Vec<(f64, f64, f64, f64, usize)> = Vec::new();
        let mut best_w = 0.0;
        let mut prev = (0.0, dist_at(0.0), self.curve(0.0));
        if prev.1 < best {
            best = prev.1;
        }
        for k in 1..=base {
            let w = omega_end * k as f64 / base as f64;
            let pt = self.curve(w);
            let d = (pt.0 - alpha).hypot(pt.1 - beta);
            let chord = (pt.0 - prev.2 .0).hypot(pt.1 - prev.2 .1);
            stack.push((prev.0, w, prev.1.min(d), chord, 30));
            prev = (w, d, pt);
        }
        let mut pieces = Vec::new();
        while let Some((w0, w1, dmin, chord, depth)) = stack.pop() {
            if dmin - 2.0 * chord > best {
                continue;
            }
            let (a0, b0) = self.curve(w0);
            let (a1, b1) = self.curve(w1);
            let d0 = (a0 - alpha).hypot(b0 - beta);
            let d1 = (a1 - alpha).hypot(b1 - beta);
            for (d, w) in [(d0, w0), (d1, w1)] {
                if d < best {
                    best = d;
                    best_w = w;
                }
            }
            if chord > arc_tol && depth > 0 {
                let wm = 0.5 * (w0 + w1);
                let (am, bm) = self.curve(wm);
                let dm = (am - alpha).hypot(bm - beta);
                stack.push((w0, wm, d0.min(dm), (am - a0).hypot(bm - b0), depth - 1));
                stack.push((wm, w1, dm.min(d1), (a1 - am).hypot(b1 - bm), depth - 1));
            } else {
                pieces.push((w0, w1));
            }
        }
        // local refinement on the pieces adjacent to the best sample
        for (w0, w1) in pieces {
            if w0 <= best_w && best_w <= w1 && w1 > w0 {
                best = best.min(golden_min(&dist_at, w0, w1, 60));
            }
        }
        best
    }

    /// Exact membership of `S(α, β)` by counting crossings of the ray
    /// `{(a, beta) : a > alpha}` with the boundary.
    pub fn contains(&self, alpha: f64, beta: f64) -> bool {
        let mut crossings = 0;
        let (l0_beta_lo, curve_beta_hi) = match self.omega_tau {
            Some(ot) => (ot.mu_tau, ot.mu_tau * ot.mu_tau),
            None => (f64::NEG_INFINITY, f64::INFINITY),
        };
        // l0 from (1 + μ, μ) (or -∞) to (2, 1)
        if beta >= l0_beta_lo && beta < 1.0 && beta + 1.0 > alpha {
            crossings += 1;
        }
        // lτ from (1 + μ, μ) to (2μ, μ²)
        if let Some(ot) = self.omega_tau {
            let mu = ot.mu_tau;
            if beta >= mu && beta < mu * mu && beta / mu + mu > alpha {
                crossings += 1;
            }
        }
        // Hopf arc from (2, 1) upwards
        if beta >= 1.0 && beta < curve_beta_hi {
            let w = self.curve_omega_at_beta(beta);
            if self.curve(w).0 > alpha {
                crossings += 1;
            }
        }
        crossings % 2 == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Assembled boundary of the stability region.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub kernel: KernelSpec,
    pub tau: f64,
    pub bounded: bool,
    pub omega_tau: Option<OmegaTau>,
    /// α interval of the saddle-node segment on `β = α - 1`. For unbounded
    /// regions the left end is the sampling clip `alpha_min`.
    pub saddle_node_segment: (f64, f64),
    /// α interval of the Hopf line segment on `β = μτ (α - μτ)`.
    pub hopf_line_segment: Option<(f64, f64)>,
    pub hopf_curve_samples: Vec<CurveSample>,
    pub bt_point: Option<(f64, f64)>,
    pub double_hopf_point: Option<(f64, f64)>,
    pub zero_hopf_point: Option<(f64, f64)>,
}

/// Adaptive sampling of the Hopf curve on `[0, omega_end]`.
fn sample_curve(geom: &RegionGeometry, omega_end: f64, arc_tol: f64) -> Vec<CurveSample> {
    let sample = |w: f64| {
        let (alpha, beta) = geom.curve(w);
        CurveSample { omega: w, alpha, beta }
    };
    let base = 64;
    let mut out = vec![sample(0.0)];
    for k in 1..=base {
        let s1 = if k == base { sample(omega_end) } else { sample(omega_end * k as f64 / base as f64) };
        let s0 = *out.last().unwrap();
        refine(&sample, s0, s1, arc_tol, 30, &mut out);
    }
    out
}

fn refine(
    sample: &impl Fn(f64) -> CurveSample,
    s0: CurveSample,
    s1: CurveSample,
    arc_tol: f64,
    depth: usize,
    out: &mut Vec<CurveSample>,
) {
    let chord = (s1.alpha - s0.alpha).hypot(s1.beta - s0.beta);
    if chord > arc_tol && depth > 0 {
        let mid = sample(0.5 * (s0.omega + s1.omega));
        refine(sample, s0, mid, arc_tol, depth - 1, out);
        refine(sample, mid, s1, arc_tol, depth - 1, out);
    } else {
        out.push(s1);
    }
}

/// Boundary of `S(α, β)` for a kernel and mean delay.
pub fn build_boundary(kernel: KernelSpec, tau: f64, arc_tol: f64) -> Result<BoundaryCurve> {
    let cfg = StabilityConfig { arc_tol, ..StabilityConfig::default() };
    build_boundary_with(kernel, tau, &cfg)
}

pub fn build_boundary_with(kernel: KernelSpec, tau: f64, cfg: &StabilityConfig) -> Result<BoundaryCurve> {
    if !(cfg.arc_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("arc_tol must be positive, got {}", cfg.arc_tol)));
    }
    let geom = RegionGeometry::new(kernel, tau, cfg)?;
    Ok(assemble(&geom, cfg.far_radius, cfg))
}

fn assemble(geom: &RegionGeometry, radius: f64, cfg: &StabilityConfig) -> BoundaryCurve {
    match geom.omega_tau {
        Some(ot) => {
            let mu = ot.mu_tau;
            BoundaryCurve {
                kernel: geom.kernel,
                tau: geom.tau,
                bounded: true,
                omega_tau: Some(ot),
                saddle_node_segment: (1.0 + mu, 2.0),
                hopf_line_segment: Some((2.0 * mu, 1.0 + mu)),
                hopf_curve_samples: sample_curve(geom, ot.omega_tau, cfg.arc_tol),
                bt_point: Some((2.0, 1.0)),
                double_hopf_point: Some((2.0 * mu, mu * mu)),
                zero_hopf_point: Some((1.0 + mu, mu)),
            }
        }
        None => {
            // presentation-only truncation of the unbounded curve
            let mut omega_max = 1.0;
            loop {
                let (a, b) = geom.curve(omega_max);
                if a.abs().max(b.abs()) >= radius || omega_max > 1e12 {
                    break;
                }
                omega_max *= 2.0;
            }
            BoundaryCurve {
                kernel: geom.kernel,
                tau: geom.tau,
                bounded: false,
                omega_tau: None,
                saddle_node_segment: (cfg.alpha_min.min(-radius), 2.0),
                hopf_line_segment: None,
                hopf_curve_samples: sample_curve(geom, omega_max, cfg.arc_tol),
                bt_point: Some((2.0, 1.0)),
                double_hopf_point: None,
                zero_hopf_point: None,
            }
        }
    }
}

fn dist_point_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

fn dist_point_ray(p: (f64, f64), origin: (f64, f64), dir: (f64, f64)) -> f64 {
    let len2 = dir.0 * dir.0 + dir.1 * dir.1;
    let t = (((p.0 - origin.0) * dir.0 + (p.1 - origin.1) * dir.1) / len2).max(0.0);
    (p.0 - origin.0 - t * dir.0).hypot(p.1 - origin.1 - t * dir.1)
}

impl BoundaryCurve {
    pub fn geometry(&self) -> RegionGeometry {
        RegionGeometry { kernel: self.kernel, tau: self.tau, omega_tau: self.omega_tau }
    }

    /// Minimal distance from `(alpha, beta)` to the boundary elements. The
    /// Hopf arc contribution is refined between samples.
    pub fn distance(&self, alpha: f64, beta: f64) -> f64 {
        let geom = self.geometry();
        let mut best = geom.line_distance((alpha, beta));
        let samples = &self.hopf_curve_samples;
        let d2 = |s: &CurveSample| (s.alpha - alpha).powi(2) + (s.beta - beta).powi(2);
        let (imin, _) = samples
            .iter()
            .enumerate()
            .map(|(i, s)| (i, d2(s)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let dist_at = |w: f64| {
            let (a, b) = geom.curve(w);
            (a - alpha).hypot(b - beta)
        };
        let lo = samples[imin.saturating_sub(1)].omega;
        let hi = samples[(imin + 1).min(samples.len() - 1)].omega;
        for (a, b) in [(lo, samples[imin].omega), (samples[imin].omega, hi)] {
            if b > a {
                best = best.min(golden_min(&dist_at, a, b, 60));
            } else {
                best = best.min(dist_at(a));
            }
        }
        best
    }

    /// Classification against this boundary.
    pub fn classify(&self, alpha: f64, beta: f64, cfg: &StabilityConfig) -> ClassificationResult {
        verdict_from(&self.geometry(), alpha, beta, self.distance(alpha, beta), cfg)
    }

    /// CSV with columns `segment,omega,alpha,beta`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "segment,omega,alpha,beta")?;
        let (lo, hi) = self.saddle_node_segment;
        writeln!(w, "l0,0,{},{}", lo, lo - 1.0)?;
        writeln!(w, "l0,0,{},{}", hi, hi - 1.0)?;
        if let (Some((lo, hi)), Some(ot)) = (self.hopf_line_segment, self.omega_tau) {
            let mu = ot.mu_tau;
            writeln!(w, "ltau,{},{},{}", ot.omega_tau, lo, mu * (lo - mu))?;
            writeln!(w, "ltau,{},{},{}", ot.omega_tau, hi, mu * (hi - mu))?;
        }
        for s in &self.hopf_curve_samples {
            writeln!(w, "gamma,{},{},{}", s.omega, s.alpha, s.beta)?;
        }
        Ok(())
    }

    /// Codimension-2 points and boundedness as JSON.
    pub fn codim2_json(&self) -> serde_json::Value {
        let pair = |p: Option<(f64, f64)>| match p {
            Some((a, b)) => serde_json::json!([a, b]),
            None => serde_json::Value::Null,
        };
        serde_json::json!({
            "kernel": self.kernel.to_string(),
            "tau": self.tau,
            "bounded": self.bounded,
            "omega_tau": self.omega_tau.map(|o| o.omega_tau),
            "mu_tau": self.omega_tau.map(|o| o.mu_tau),
            "bt": pair(self.bt_point),
            "double_hopf": pair(self.double_hopf_point),
            "zero_hopf": pair(self.zero_hopf_point),
        })
    }
}

fn verdict_from(
    geom: &RegionGeometry,
    alpha: f64,
    beta: f64,
    distance: f64,
    cfg: &StabilityConfig,
) -> ClassificationResult {
    let (verdict, cause) = if distance < cfg.marginal_tol {
        (Verdict::Marginal, Cause::OnBoundary)
    } else {
        match delay_independent_test(alpha, beta) {
            DelayIndependence::StableForAllKernels => (Verdict::Stable, Cause::DelayIndependentStable),
            DelayIndependence::UnstableForAllKernels => (Verdict::Unstable, Cause::DelayIndependentUnstable),
            DelayIndependence::Indeterminate => {
                if geom.contains(alpha, beta) {
                    (Verdict::Stable, Cause::InsideRegion)
                } else {
                    (Verdict::Unstable, Cause::OutsideRegion)
                }
            }
        }
    };
    ClassificationResult { verdict, cause, distance_to_boundary: distance }
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    f(a).min(f(b)).min(fc).min(fd)
}

/// Boundary whose sampled part reaches well beyond the query point.
fn boundary_for_query(kernel: KernelSpec, tau: f64, extent: f64, cfg: &StabilityConfig) -> Result<BoundaryCurve> {
    let geom = RegionGeometry::new(kernel, tau, cfg)?;
    let radius = cfg.far_radius.max(10.0 * extent);
    Ok(assemble(&geom, radius, cfg))
}

/// Stability verdict for `(alpha, beta)` with kernel `kernel` of mean delay `tau`.
pub fn classify(kernel: KernelSpec, tau: f64, alpha: f64, beta: f64) -> Result<ClassificationResult> {
    classify_with(kernel, tau, alpha, beta, &StabilityConfig::default())
}

pub fn classify_with(
    kernel: KernelSpec,
    tau: f64,
    alpha: f64,
    beta: f64,
    cfg: &StabilityConfig,
) -> Result<ClassificationResult> {
    let geom = RegionGeometry::new(kernel, tau, cfg)?;
    let distance = geom.distance(alpha, beta, cfg.arc_tol);
    Ok(verdict_from(&geom, alpha, beta, distance, cfg))
}

/// A raster of verdicts over a rectangular `(α, β)` lattice, row-major in β.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Raster {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub cells: Vec<Verdict>,
}

impl Raster {
    pub fn get(&self, i_alpha: usize, j_beta: usize) -> Verdict {
        self.cells[j_beta * self.alphas.len() + i_alpha]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, Verdict)> + '_ {
        let n = self.alphas.len();
        self.cells
            .iter()
            .enumerate()
            .map(move |(k, v)| (self.alphas[k % n], self.betas[k / n], *v))
    }

    /// CSV with columns `alpha,beta,verdict`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "alpha,beta,verdict")?;
        for (a, b, v) in self.iter() {
            writeln!(w, "{a},{b},{v:?}")?;
        }
        Ok(())
    }
}

fn lattice(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Classification on an `n_alpha × n_beta` lattice covering the given ranges.
pub fn region_scan(
    kernel: KernelSpec,
    tau: f64,
    alpha_range: (f64, f64),
    beta_range: (f64, f64),
    resolution: (usize, usize),
    cfg: &StabilityConfig,
) -> Result<Raster> {
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(Error::InvalidArgument("resolution must be >= 2 per axis".into()));
    }
    let alphas = lattice(alpha_range, resolution.0);
    let betas = lattice(beta_range, resolution.1);
    let extent = [alpha_range.0, alpha_range.1, beta_range.0, beta_range.1]
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        * std::f64::consts::SQRT_2;
    let boundary = boundary_for_query(kernel, tau, extent, cfg)?;
    let n = alphas.len();
    let cells = (0..n * betas.len())
        .into_par_iter()
        .map(|k| boundary.classify(alphas[k % n], betas[k / n], cfg).verdict)
        .collect();
    Ok(Raster { alphas, betas, cells })
}

fn is_inside(kernel: KernelSpec, tau: f64, alpha: f64, beta: f64, cfg: &StabilityConfig) -> Result<bool> {
    Ok(RegionGeometry::new(kernel, tau, cfg)?.contains(alpha, beta))
}

/// Candidate crossings from the direct equations.
fn direct_candidates(
    kernel: KernelSpec,
    alpha: f64,
    beta: f64,
    tau_max: f64,
    cfg: &StabilityConfig,
) -> Result<Vec<(f64, f64, CrossingType)>> {
    let mut out = Vec::new();
    let disc = alpha * alpha - 4.0 * beta;
    if disc >= 0.0 {
        // the point crosses the Hopf line: Qτ(iωτ) = μτ equals a real root λ
        let sq = disc.sqrt();
        let Some(w_lo) = omega_at_phase(kernel, PI / 2.0) else {
            return Ok(out);
        };
        let w_hi = omega_at_phase(kernel, PI)
            .or_else(|| kernel.omega_limit())
            .unwrap_or(w_lo * 1e4);
        for lambda in [(alpha - sq) / 2.0, (alpha + sq) / 2.0] {
            if lambda >= 0.0 {
                continue;
            }
            let target = 1.0 / lambda;
            let g = |w: f64| {
                let pt = polar_transform(kernel, w).expect("branch inside valid range");
                pt.rho * pt.theta.cos() - target
            };
            let n = 4000;
            let grid: Vec<f64> = (0..n)
                .map(|k| {
                    let s = (k as f64 / n as f64).max(1e-12);
                    if w_hi / w_lo > 100.0 {
                        w_lo * (w_hi / w_lo).powf(s)
                    } else {
                        w_lo + (w_hi - w_lo) * s
                    }
                })
                .collect();
            for pair in grid.windows(2) {
                let (g0, g1) = (g(pair[0]), g(pair[1]));
                if g0 == 0.0 || (g0 < 0.0) != (g1 < 0.0) {
                    let w = bisect(g, pair[0], pair[1], cfg.omega_tol * pair[1].max(1.0), cfg.max_iter);
                    let pt = polar_transform(kernel, w)?;
                    let tau = -w * pt.theta.cos() / pt.theta.sin();
                    let mu = lambda;
                    if tau > 0.0 && tau <= tau_max && alpha >= 2.0 * mu && alpha <= 1.0 + mu {
                        out.push((tau, w, CrossingType::HopfLine));
                    }
                }
            }
        }
    } else if beta > 1.0 {
        // the point crosses the Hopf arc: eliminate τ through |Qτ(iω)|² = β
        let tau_of = |w: f64| -> Option<f64> {
            let pt = polar_transform(kernel, w).ok()?;
            let s = beta * pt.rho * pt.rho - 1.0;
            (s > 0.0).then(|| w / s.sqrt())
        };
        let mut w_cap = tau_max * (beta - 1.0).sqrt();
        if let Some(limit) = kernel.omega_limit() {
            w_cap = w_cap.min(limit * (1.0 - 1e-9));
        }
        let g = |w: f64| -> Option<f64> {
            let tau = tau_of(w)?;
            Some(hopf_curve_point(kernel, tau, w).ok()?.0 - alpha)
        };
        let n = 4000;
        let grid: Vec<f64> = (0..=n).map(|k| w_cap * 1e-6f64.powf(1.0 - k as f64 / n as f64)).collect();
        for pair in grid.windows(2) {
            let (Some(g0), Some(g1)) = (g(pair[0]), g(pair[1])) else {
                continue;
            };
            if g0 == 0.0 || (g0 < 0.0) != (g1 < 0.0) {
                let w = bisect(
                    |w| g(w).unwrap_or(f64::NAN),
                    pair[0],
                    pair[1],
                    cfg.omega_tol * pair[1].max(1.0),
                    cfg.max_iter,
                );
                let Some(tau) = tau_of(w) else { continue };
                if tau <= 0.0 || tau > tau_max {
                    continue;
                }
                // only the arc below ωτ belongs to the boundary
                let on_arc = match omega_tau_with(kernel, tau, cfg)? {
                    Some(ot) => w < ot.omega_tau,
                    None => true,
                };
                if on_arc {
                    out.push((tau, w, CrossingType::HopfCurve));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Rescaled crossing frequency at a boundary delay.
fn crossing_frequency(kernel: KernelSpec, tau: f64, alpha: f64, beta: f64, cfg: &StabilityConfig) -> Result<(f64, CrossingType)> {
    let geom = RegionGeometry::new(kernel, tau, cfg)?;
    if alpha * alpha >= 4.0 * beta {
        if let Some(ot) = geom.omega_tau {
            return Ok((ot.omega_tau, CrossingType::HopfLine));
        }
        return Ok((0.0, CrossingType::SaddleNode));
    }
    Ok((geom.curve_omega_at_beta(beta), CrossingType::HopfCurve))
}

/// Smallest mean delay at which `(alpha, beta)` leaves the stability region,
/// searched on `(0, tau_max]`.
pub fn critical_delay(
    kernel: KernelSpec,
    alpha: f64,
    beta: f64,
    tau_max: f64,
    cfg: &StabilityConfig,
) -> Result<Option<CriticalDelay>> {
    kernel.validate()?;
    if !(tau_max > 0.0) {
        return Err(Error::InvalidArgument(format!("tau_max must be positive, got {tau_max}")));
    }
    if classify_nondelayed_with(alpha, beta, cfg).verdict != Verdict::Stable {
        return Err(Error::UnstableWithoutDelay);
    }
    let candidates = direct_candidates(kernel, alpha, beta, tau_max, cfg)?;

    // guard scan on region membership, independent of branch selection
    let n = cfg.critical_scan_points.max(2);
    let tau_lo = tau_max * 1e-6;
    let mut scan_bracket = None;
    let mut prev = tau_lo;
    if !is_inside(kernel, tau_lo, alpha, beta, cfg)? {
        return Err(Error::UnstableWithoutDelay);
    }
    for k in 1..n {
        let t = tau_lo * (tau_max / tau_lo).powf(k as f64 / (n - 1) as f64);
        if !is_inside(kernel, t, alpha, beta, cfg)? {
            scan_bracket = Some((prev, t));
            break;
        }
        prev = t;
    }

    let direct = candidates.first().copied();
    let bracket = match (direct, scan_bracket) {
        (Some((tc, _, _)), scan) => {
            let mut found = None;
            for widen in [1e-7, 1e-5, 1e-3] {
                let (lo, hi) = (tc * (1.0 - widen), tc * (1.0 + widen));
                if is_inside(kernel, lo, alpha, beta, cfg)? && !is_inside(kernel, hi, alpha, beta, cfg)? {
                    found = Some((lo, hi));
                    break;
                }
            }
            match (found, scan) {
                // an earlier exit than the direct candidate takes precedence
                (Some(b), Some(s)) if s.1 < b.0 => Some(s),
                (Some(b), _) => Some(b),
                (None, s) => s,
            }
        }
        (None, scan) => scan,
    };
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(None);
    };
    let mut iter = 0;
    while (hi - lo) > cfg.critical_rel_tol * hi * 1e-3 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if is_inside(kernel, mid, alpha, beta, cfg)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
        if iter > cfg.max_iter {
            return Err(Error::NoConvergence("critical delay bisection".into()));
        }
    }
    let tau_star = 0.5 * (lo + hi);
    let (crossing_omega, crossing_type) = match direct {
        Some((tc, w, ty)) if ((tc - tau_star) / tau_star).abs() < 1e-6 => (w, ty),
        _ => crossing_frequency(kernel, tau_star, alpha, beta, cfg)?,
    };
    Ok(Some(CriticalDelay {
        tau_star,
        crossing_omega,
        crossing_type,
        direct_tau: direct.map(|d| d.0),
    }))
}
