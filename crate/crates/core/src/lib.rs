//! Stability and bifurcation analysis for two-population Wilson-Cowan
//! systems whose couplings act through distributed delays.
//!
//! The crate is organised around the pipeline used to study such a system:
//!
//! - [`kernel`]: delay-kernel families (Dirac, Gamma, Uniform), their
//!   densities and mean-normalised Laplace transforms.
//! - [`model`]: parameters, the logistic activation, equilibria and the
//!   characteristic parameters `(alpha, beta)`.
//! - [`stability`]: delay-independent tests, the stability-region boundary
//!   in the `(alpha, beta)` plane, codimension-2 points, point
//!   classification and the critical mean delay.
//! - [`dde`]: time integration of the delayed system (method of steps,
//!   linear chain reduction, direct convolution) and trajectory diagnosis.
//! - [`cli`]: configuration handling and the commands behind the
//!   `delayed-wc` binary.
//!
//! ```
//! use delayed_wc::kernel::KernelSpec;
//! use delayed_wc::model::{Activation, ModelParams};
//! use delayed_wc::stability::{critical_delay, StabilityConfig};
//!
//! let params = ModelParams { a: -6.0, b: 3.0, c: 3.0, d: -6.0, theta_u: 0.1, theta_v: 0.2 };
//! let act = Activation::new(40.0).unwrap();
//! let eq = &delayed_wc::model::find_equilibria(&params, &act, 64).unwrap()[0];
//! let crit = critical_delay(KernelSpec::Dirac, eq.alpha, eq.beta, 10.0, &StabilityConfig::default())
//!     .unwrap()
//!     .unwrap();
//! assert!((crit.tau_star - 0.0674893).abs() < 1e-5);
//! ```

pub mod cli;
pub mod dde;
mod error;
pub mod kernel;
pub mod model;
pub mod stability;

pub use error::{Error, Result};
