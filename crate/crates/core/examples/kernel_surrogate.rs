//! Gaussian-kernel surrogate of a smooth function on a parameter box: nodes
//! from stratified sampling, an interpolating fit, the relative-error field
//! over the grid, and the analytic gradient against finite differences.

use ctrlnet::surrogate::{
    fit_interpolation, relative_error_field, stratified_nodes, surrogate_eval, surrogate_grad,
    ParamGrid, ParamPoint,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn truth(p: ParamPoint) -> f64 {
    1.0 + 20.0 * (p.w - 0.1).powi(2) + 3e4 * (p.b - 1e-3).powi(2)
}

fn main() -> ctrlnet::Result<()> {
    let grid = ParamGrid::linspace((0.0, 0.25), 26, (0.0, 2.5e-3), 26)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let nodes: Vec<ParamPoint> = stratified_nodes(&grid, 20, &mut rng)?
        .into_iter()
        .map(|k| grid.point(k))
        .collect();
    let values: Vec<f64> = nodes.iter().map(|p| truth(*p)).collect();
    let s = fit_interpolation(&nodes, &values, 1e-2)?;
    println!("fit: {:?}", s.report());

    let field = relative_error_field(&s, truth, &grid.points());
    println!(
        "relative error over {} grid points: min {:.1e}, max {:.1e}",
        grid.len(),
        field.min,
        field.max
    );

    let p = ParamPoint::new(0.17, 4e-4);
    let g = surrogate_grad(&s, p);
    let h = 1e-6;
    let fd_w = (surrogate_eval(&s, ParamPoint::new(p.w + h, p.b))
        - surrogate_eval(&s, ParamPoint::new(p.w - h, p.b)))
        / (2.0 * h);
    println!(
        "∂/∂w at {p:?}: analytic {:.8}, central difference {:.8}",
        g[0], fd_w
    );
    Ok(())
}
