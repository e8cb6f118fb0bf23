//! Sweep of the Dirac mean delay; each run is archived as a CSV phase
//! portrait and summarised on stdout.

use std::fs::File;
use std::io::BufWriter;

use delayed_wc::dde::{tau_sweep, SimConfig};
use delayed_wc::kernel::KernelSpec;
use delayed_wc::model::{find_equilibria, Activation, ModelParams};

fn main() -> delayed_wc::Result<()> {
    let params = ModelParams { a: -6.0, b: 3.0, c: 3.0, d: -6.0, theta_u: 0.1, theta_v: 0.2 };
    let act = Activation::new(40.0)?;
    let eq = find_equilibria(&params, &act, 64)?[0];

    let taus: Vec<f64> = (0..12).map(|k| 0.07 * (1.5f64 / 0.07).powf(k as f64 / 11.0)).collect();
    let cfg = SimConfig { dt: 1e-3, t_end: 200.0, record_stride: 20, ..SimConfig::default() };
    let sweep = tau_sweep(&params, &act, KernelSpec::Dirac, &eq, &taus, 1e-3, &cfg, 0.5)?;

    let dir = std::env::temp_dir().join("delayed-wc-portraits");
    std::fs::create_dir_all(&dir)?;
    for entry in &sweep {
        let path = dir.join(format!("dirac_tau_{:.4}.csv", entry.tau));
        entry.trajectory.write_csv(BufWriter::new(File::create(&path)?))?;
        println!(
            "tau {:.4}: {:?} amplitude {:.3e} peaks {}",
            entry.tau, entry.report.verdict, entry.report.amplitude, entry.report.peaks
        );
    }
    println!("portraits in {}", dir.display());
    Ok(())
}
