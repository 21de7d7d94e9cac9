//! Projected gradient descent over a box: the iterate slides along the
//! boundary when the unconstrained minimiser lies outside.

use ctrlnet::optimize::{pgd, BoxDomain, PgdOptions};
use ctrlnet::surrogate::ParamPoint;

fn main() -> ctrlnet::Result<()> {
    let domain = BoxDomain::new(0.0, 1.0, 0.0, 1.0)?;
    let f = |p: ParamPoint| (p.w - 0.3).powi(2) + (p.b + 0.5).powi(2);
    let grad = |p: ParamPoint| [2.0 * (p.w - 0.3), 2.0 * (p.b + 0.5)];
    let start = domain.farthest_corner(ParamPoint::new(0.3, 0.0));
    let options = PgdOptions {
        step: 0.1,
        ..PgdOptions::default()
    };
    let trace = pgd(f, grad, start, &domain, options)?;
    let (p, value) = trace.last();
    println!("start {start:?}");
    println!(
        "after {} iterations ({:?}): {p:?}, objective {value:.6}",
        trace.iterations(),
        trace.stop_reason
    );
    Ok(())
}
