//! Delay-kernel families and their transforms.
//!
//! Every kernel is described in its mean-one form `ĥ(t) = τ h(τ t)`; the
//! transform of a kernel with mean delay `τ` is recovered as
//! `H(z) = Ĥ(τ z)`. On the imaginary axis the normalised transform is
//! written in polar form `Ĥ(iω) = ρ(ω) exp(-i θ(ω))`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// A delay-kernel family. The mean delay `τ` is supplied separately.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelSpec {
    /// All mass at the mean delay (discrete delay).
    Dirac,
    /// Gamma density of integer order `p`; `p = 1` is the weak kernel,
    /// `p = 2` the strong kernel.
    Gamma { order: u32 },
    /// Box density on `[τ(1-ε), τ(1+ε)]`.
    Uniform { eps: f64 },
}

impl KernelSpec {
    pub const WEAK_GAMMA: KernelSpec = KernelSpec::Gamma { order: 1 };
    pub const STRONG_GAMMA: KernelSpec = KernelSpec::Gamma { order: 2 };

    pub fn gamma(order: u32) -> Result<Self> {
        let k = KernelSpec::Gamma { order };
        k.validate()?;
        Ok(k)
    }

    pub fn uniform(eps: f64) -> Result<Self> {
        let k = KernelSpec::Uniform { eps };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Dirac => Ok(()),
            KernelSpec::Gamma { order } if order >= 1 => Ok(()),
            KernelSpec::Gamma { order } => {
                Err(Error::InvalidKernel(format!("gamma order must be >= 1, got {order}")))
            }
            KernelSpec::Uniform { eps } if eps > 0.0 && eps <= 1.0 => Ok(()),
            KernelSpec::Uniform { eps } => {
                Err(Error::InvalidKernel(format!("uniform eps must lie in (0, 1], got {eps}")))
            }
        }
    }

    /// Upper end of the frequency range on which the polar form is valid
    /// (first zero of the modulus), if any.
    pub fn omega_limit(&self) -> Option<f64> {
        match *self {
            KernelSpec::Uniform { eps } => Some(PI / eps),
            _ => None,
        }
    }

    /// Number of auxiliary chain stages per population for the linear chain
    /// reduction, if the kernel admits one.
    pub fn chain_order(&self) -> Option<u32> {
        match *self {
            KernelSpec::Gamma { order } => Some(order),
            _ => None,
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Dirac => write!(f, "dirac"),
            KernelSpec::Gamma { order } => write!(f, "gamma:p={order}"),
            KernelSpec::Uniform { eps } => write!(f, "uniform:eps={eps}"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// Parses `dirac`, `gamma:p=<int>` or `uniform:eps=<real>`, ignoring case.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (family, rest) = match lower.split_once(':') {
            Some((fam, rest)) => (fam.trim(), Some(rest.trim())),
            None => (lower.as_str(), None),
        };
        let param = |name: &str, rest: Option<&str>| -> Result<String> {
            let rest = rest.ok_or_else(|| Error::KernelParse(format!("{family} (missing {name}=<value>)")))?;
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::KernelParse(rest.to_string()))?;
            if key.trim() != name {
                return Err(Error::KernelParse(key.trim().to_string()));
            }
            Ok(value.trim().to_string())
        };
        let kernel = match family {
            "dirac" => {
                if let Some(rest) = rest {
                    return Err(Error::KernelParse(rest.to_string()));
                }
                KernelSpec::Dirac
            }
            "gamma" => {
                let value = param("p", rest)?;
                let order = value.parse::<u32>().map_err(|_| Error::KernelParse(value.clone()))?;
                KernelSpec::Gamma { order }
            }
            "uniform" => {
                let value = param("eps", rest)?;
                let eps = value.parse::<f64>().map_err(|_| Error::KernelParse(value.clone()))?;
                KernelSpec::Uniform { eps }
            }
            other => return Err(Error::KernelParse(other.to_string())),
        };
        kernel.validate()?;
        Ok(kernel)
    }
}

impl Serialize for KernelSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for KernelSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `Ĥ(iω) = rho · exp(-i theta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarTransform {
    pub rho: f64,
    pub theta: f64,
    pub omega: f64,
}

impl PolarTransform {
    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.rho, -self.theta)
    }
}

/// `sin(x)/x` with the removable singularity handled by its series.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Kernel density `h(t)` for mean delay `tau`.
pub fn density(kernel: KernelSpec, tau: f64, t: f64) -> Result<f64> {
    check_tau(tau)?;
    if t < 0.0 {
        return Ok(0.0);
    }
    match kernel {
        KernelSpec::Dirac => Err(Error::NoPointwiseDensity),
        KernelSpec::Gamma { order } => Ok(gamma_density(order, f64::from(order) / tau, t)),
        KernelSpec::Uniform { eps } => {
            let (lo, hi) = (tau * (1.0 - eps), tau * (1.0 + eps));
            Ok(if t >= lo && t <= hi { 1.0 / (2.0 * eps * tau) } else { 0.0 })
        }
    }
}

/// Density of the Gamma distribution with integer shape `k` and rate `rate`.
pub fn gamma_density(k: u32, rate: f64, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let x = rate * t;
    // rate * x^(k-1) e^{-x} / (k-1)!, accumulated to avoid overflow
    let mut term = rate * (-x).exp();
    for j in 1..k {
        term *= x / f64::from(j);
    }
    term
}

/// Upper tail `P(X > t)` of the Gamma distribution with integer shape `k`.
pub fn gamma_tail(k: u32, rate: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let x = rate * t;
    let mut term = (-x).exp();
    let mut sum = term;
    for j in 1..k {
        term *= x / f64::from(j);
        sum += term;
    }
    sum
}

/// Mass and first moment of the kernel over `[s0, s1]`:
/// `(∫ h(s) ds, ∫ s h(s) ds)`.
pub fn interval_moments(kernel: KernelSpec, tau: f64, s0: f64, s1: f64) -> Result<(f64, f64)> {
    check_tau(tau)?;
    match kernel {
        KernelSpec::Dirac => Err(Error::NoPointwiseDensity),
        KernelSpec::Gamma { order } => {
            let rate = f64::from(order) / tau;
            let m0 = gamma_tail(order, rate, s0) - gamma_tail(order, rate, s1);
            // s h_k(s) = (k / rate) h_{k+1}(s)
            let m1 = f64::from(order) / rate
                * (gamma_tail(order + 1, rate, s0) - gamma_tail(order + 1, rate, s1));
            Ok((m0, m1))
        }
        KernelSpec::Uniform { eps } => {
            let (lo, hi) = (tau * (1.0 - eps), tau * (1.0 + eps));
            let a = s0.max(lo);
            let b = s1.min(hi);
            if b <= a {
                return Ok((0.0, 0.0));
            }
            let height = 1.0 / (2.0 * eps * tau);
            Ok((height * (b - a), height * 0.5 * (b * b - a * a)))
        }
    }
}

/// Smallest `s` such that the kernel mass beyond `s` is below `cutoff_mass`.
pub fn truncation_point(kernel: KernelSpec, tau: f64, cutoff_mass: f64) -> Result<f64> {
    check_tau(tau)?;
    match kernel {
        KernelSpec::Dirac => Ok(tau),
        KernelSpec::Uniform { eps } => Ok(tau * (1.0 + eps)),
        KernelSpec::Gamma { order } => {
            let rate = f64::from(order) / tau;
            let mut hi = tau;
            while gamma_tail(order, rate, hi) > cutoff_mass {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if gamma_tail(order, rate, mid) > cutoff_mass {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(hi)
        }
    }
}

/// Polar form of the mean-one transform at frequency `omega >= 0`.
pub fn polar_transform(kernel: KernelSpec, omega: f64) -> Result<PolarTransform> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::InvalidArgument(format!("omega must be finite and >= 0, got {omega}")));
    }
    let (rho, theta) = match kernel {
        KernelSpec::Dirac => (1.0, omega),
        KernelSpec::Gamma { order } => {
            let p = f64::from(order);
            let r = omega / p;
            ((1.0 + r * r).powf(-0.5 * p), p * r.atan())
        }
        KernelSpec::Uniform { eps } => {
            let x = eps * omega;
            if x >= PI {
                return Err(Error::BeyondFirstModulusZero(x));
            }
            (sinc(x), omega)
        }
    };
    Ok(PolarTransform { rho, theta, omega })
}

/// Laplace transform `H(z)` of the kernel with mean delay `tau`.
pub fn laplace(kernel: KernelSpec, tau: f64, z: Complex64) -> Result<Complex64> {
    check_tau(tau)?;
    let zs = z * tau;
    match kernel {
        KernelSpec::Dirac => Ok((-zs).exp()),
        KernelSpec::Gamma { order } => {
            let p = f64::from(order);
            let w = Complex64::new(1.0, 0.0) + zs / p;
            if w.norm() < 1e-300 {
                return Err(Error::LaplacePole(-p / tau));
            }
            Ok(w.powi(-(order as i32)))
        }
        KernelSpec::Uniform { eps } => {
            let x = zs * eps;
            let ratio = if x.norm() < 1e-4 {
                Complex64::new(1.0, 0.0) + x * x / 6.0 + x * x * x * x / 120.0
            } else {
                x.sinh() / x
            };
            Ok((-zs).exp() * ratio)
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("mean delay must be positive, got {tau}")))
    }
}
