//! The uniform qubit ensemble: the exact parametric curve next to optimizer
//! curves for Fibonacci-lattice discretizations of the sphere.

use crdistill::tradeoff::uniform_curve_at_rates;
use crdistill::{named_ensemble, trace_curve, uniform_curve_closed_form, RGrid, SolverConfig};

fn main() -> crdistill::Result<()> {
    println!("lambda,R,D");
    for (r, d) in [0.01, 0.1, 1.0, 5.0, 10.0, 30.0]
        .iter()
        .zip(uniform_curve_closed_form(&[
            0.01, 0.1, 1.0, 5.0, 10.0, 30.0,
        ])?)
    {
        println!("{r},{:.6},{:.6}", d.0, d.1);
    }

    let grid = RGrid::new(0.1, 2.0, 5)?;
    let exact = uniform_curve_at_rates(&grid.values())?;
    let cfg = SolverConfig {
        starts: 2,
        ..Default::default()
    };
    let mut columns = Vec::new();
    for n in [8.0, 16.0] {
        let curve = trace_curve(&named_ensemble("uniform_sphere", &[n])?, &grid, &cfg)?;
        columns.push(curve.distilled());
    }
    println!("\nR,exact,N=8,N=16");
    for (i, r) in grid.values().iter().enumerate() {
        println!(
            "{r:.3},{:.4},{:.4},{:.4}",
            exact[i].1, columns[0][i], columns[1][i]
        );
    }
    Ok(())
}
