//! Equilibria of an excitatory-inhibitory pair and their characteristic
//! parameters.

use delayed_wc::model::{find_equilibria, Activation, ModelParams};
use delayed_wc::stability::{classify_nondelayed, delay_independent_test};

fn main() -> delayed_wc::Result<()> {
    let params = ModelParams { a: -6.0, b: 3.0, c: 3.0, d: -6.0, theta_u: 0.1, theta_v: 0.2 };
    let act = Activation::new(40.0)?;

    for (i, eq) in find_equilibria(&params, &act, 64)?.iter().enumerate() {
        println!(
            "#{i}: u* = {:.7}, v* = {:.7}, alpha = {:.4}, beta = {:.4}",
            eq.u_star, eq.v_star, eq.alpha, eq.beta
        );
        println!("    without delay: {:?}", classify_nondelayed(eq.alpha, eq.beta).verdict);
        println!("    any kernel:    {:?}", delay_independent_test(eq.alpha, eq.beta));
    }

    // a bistable configuration
    let params = ModelParams { a: 10.0, b: -2.0, c: 2.0, d: 0.0, theta_u: 0.5, theta_v: 0.5 };
    let act = Activation::new(4.0)?;
    let eqs = find_equilibria(&params, &act, 128)?;
    println!("\nstrong self-excitation: {} equilibria", eqs.len());
    for eq in &eqs {
        println!("  ({:.5}, {:.5}) {:?}", eq.u_star, eq.v_star, classify_nondelayed(eq.alpha, eq.beta).verdict);
    }
    Ok(())
}
