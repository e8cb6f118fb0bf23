//! Densities, moments and transforms of the delay kernel families.

use delayed_wc::kernel::{density, interval_moments, laplace, polar_transform, truncation_point, KernelSpec};
use num_complex::Complex64;

fn main() -> delayed_wc::Result<()> {
    let tau = 0.5;
    let kernels = [KernelSpec::Dirac, KernelSpec::WEAK_GAMMA, KernelSpec::STRONG_GAMMA, KernelSpec::uniform(0.5)?];

    for k in kernels {
        println!("{k}");
        if k != KernelSpec::Dirac {
            let (mass, mean) = interval_moments(k, tau, 0.0, truncation_point(k, tau, 1e-12)?)?;
            println!("  mass {mass:.12}  mean {:.12}", mean / mass);
            for t in [0.1, 0.5, 1.0] {
                println!("  g({t}) = {:.6}", density(k, tau, t)?);
            }
        }
        for omega in [0.5, 2.0, 5.0] {
            let pt = polar_transform(k, omega)?;
            let h = laplace(k, tau, Complex64::new(0.0, omega / tau))?;
            println!("  omega {omega}: rho {:.6} theta {:.6}  H(i omega/tau) = {h:.6}", pt.rho, pt.theta);
        }
    }
    Ok(())
}
