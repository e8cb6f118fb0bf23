//! Boundary of the stability region for each kernel at unit mean delay,
//! written as CSV next to a summary of the codimension-2 points.

use std::fs::File;
use std::io::BufWriter;

use delayed_wc::kernel::KernelSpec;
use delayed_wc::stability::build_boundary;

fn main() -> delayed_wc::Result<()> {
    let dir = std::env::temp_dir().join("delayed-wc-boundaries");
    std::fs::create_dir_all(&dir)?;
    for kernel in [KernelSpec::Dirac, KernelSpec::WEAK_GAMMA, KernelSpec::STRONG_GAMMA, KernelSpec::uniform(0.5)?] {
        let b = build_boundary(kernel, 1.0, 0.05)?;
        let path = dir.join(format!("{}.csv", kernel.to_string().replace([':', '='], "_")));
        b.write_csv(BufWriter::new(File::create(&path)?))?;
        println!("{}", b.codim2_json());
        println!("  {} curve samples -> {}", b.hopf_curve_samples.len(), path.display());
    }
    Ok(())
}
