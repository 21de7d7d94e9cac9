//! Configuration-driven experiment run: load the defaults, override a few
//! keys, run the particle surface and descent, and read back the manifest.
//!
//! ```text
//! cargo run --release --example run_experiment -- /tmp/ctrlnet-out
//! ```

use ctrlnet::experiments::{run_micro_descent, run_micro_surface, ExperimentConfig};

fn main() -> ctrlnet::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("ctrlnet-example")
            .display()
            .to_string()
    });
    let cfg = ExperimentConfig::load(None, &[format!("output_dir={out:?}"), "seed=11".into()])?;

    let (surface, manifest) = run_micro_surface(&cfg)?;
    println!(
        "surface: {} grid points, max relative error {:.2e}",
        surface.grid.len(),
        surface.errors.max
    );
    for f in &manifest.files {
        println!("  {} {}", f.sha256, f.name);
    }

    let (descent, _) = run_micro_descent(&cfg)?;
    let p = descent.descent.final_point();
    println!(
        "descent: final (w, b) = ({:.4}, {:.2e}), ensemble mean {:.4} against target {:.4}",
        p.w, p.b, descent.final_mean, descent.target
    );
    Ok(())
}
