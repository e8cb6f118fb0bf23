//! Critical mean delay of the reference equilibrium for every kernel.

use delayed_wc::kernel::KernelSpec;
use delayed_wc::model::{find_equilibria, Activation, ModelParams};
use delayed_wc::stability::{critical_delay, StabilityConfig};

fn main() -> delayed_wc::Result<()> {
    let params = ModelParams { a: -6.0, b: 3.0, c: 3.0, d: -6.0, theta_u: 0.1, theta_v: 0.2 };
    let eq = find_equilibria(&params, &Activation::new(40.0)?, 64)?[0];
    let cfg = StabilityConfig::default();

    let kernels = [
        KernelSpec::Dirac,
        KernelSpec::WEAK_GAMMA,
        KernelSpec::STRONG_GAMMA,
        KernelSpec::gamma(3)?,
        KernelSpec::uniform(0.5)?,
    ];
    for kernel in kernels {
        match critical_delay(kernel, eq.alpha, eq.beta, 10.0, &cfg)? {
            Some(c) => println!(
                "{kernel:>12}: tau* = {:.7}  omega = {:.5}  {:?}",
                c.tau_star, c.crossing_omega, c.crossing_type
            ),
            None => println!("{kernel:>12}: stable for every mean delay up to 10"),
        }
    }
    Ok(())
}
