//! Coarse text rendering of the stability region on an `(alpha, beta)` grid.

use delayed_wc::kernel::KernelSpec;
use delayed_wc::stability::{region_scan, StabilityConfig, Verdict};

fn main() -> delayed_wc::Result<()> {
    let cfg = StabilityConfig::default();
    let (na, nb) = (61, 25);
    let views = [
        (KernelSpec::Dirac, 1.0, (-6.0, 3.0), (-3.0, 8.0)),
        (KernelSpec::Dirac, 0.1, (-40.0, 4.0), (-20.0, 250.0)),
        (KernelSpec::STRONG_GAMMA, 1.0, (-20.0, 4.0), (-10.0, 90.0)),
    ];
    for (kernel, tau, alphas, betas) in views {
        let raster = region_scan(kernel, tau, alphas, betas, (na, nb), &cfg)?;
        println!("{kernel}, tau = {tau}   (# stable, . unstable, + marginal)");
        for j in (0..nb).rev() {
            let row: String = (0..na)
                .map(|i| match raster.get(i, j) {
                    Verdict::Stable => '#',
                    Verdict::Unstable => '.',
                    Verdict::Marginal => '+',
                })
                .collect();
            println!("{:>6.1} {row}", raster.betas[j]);
        }
        println!();
    }
    Ok(())
}
