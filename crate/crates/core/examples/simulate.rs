//! Integrates the delayed system on either side of the critical delay and
//! compares the diagnosed behaviour with the linear prediction.

use delayed_wc::dde::{detect_behavior, simulate, Engine, HistoryFunction, SimConfig};
use delayed_wc::kernel::KernelSpec;
use delayed_wc::model::{find_equilibria, Activation, ModelParams};
use delayed_wc::stability::{classify, critical_delay, StabilityConfig};

fn main() -> delayed_wc::Result<()> {
    let params = ModelParams { a: -6.0, b: 3.0, c: 3.0, d: -6.0, theta_u: 0.1, theta_v: 0.2 };
    let act = Activation::new(40.0)?;
    let eq = find_equilibria(&params, &act, 64)?[0];
    let history = HistoryFunction::perturbed(&eq, 1e-3);
    let cfg = SimConfig { dt: 1e-3, t_end: 150.0, record_stride: 10, ..SimConfig::default() };

    for kernel in [KernelSpec::Dirac, KernelSpec::STRONG_GAMMA, KernelSpec::uniform(0.5)?] {
        let tau_star = critical_delay(kernel, eq.alpha, eq.beta, 10.0, &StabilityConfig::default())?
            .map(|c| c.tau_star)
            .unwrap_or(1.0);
        for tau in [0.8 * tau_star, 1.2 * tau_star] {
            let linear = classify(kernel, tau, eq.alpha, eq.beta)?.verdict;
            let tr = simulate(&params, &act, kernel, tau, &history, &cfg, Engine::Auto)?;
            let r = detect_behavior(&tr, (eq.u_star, eq.v_star), 0.5)?;
            println!(
                "{kernel:>12} tau = {tau:.4}: linear {linear:?}, simulated {:?} (amplitude {:.3e}, period {:?})",
                r.verdict, r.amplitude, r.period
            );
        }
    }
    Ok(())
}
