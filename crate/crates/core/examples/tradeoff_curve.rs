//! Traces `D*(R)` for the two-state ensemble and prints it as CSV together with
//! the time-sharing chord it must dominate.

use crdistill::{eval_pair, named_ensemble, trace_curve, RGrid, SolverConfig};

fn main() -> crdistill::Result<()> {
    let e = named_ensemble("two_state", &[])?;
    let cfg = SolverConfig::default();
    let curve = trace_curve(&e, &RGrid::new(0.0, 0.5, 21)?, &cfg)?;

    let sw = curve.sw;
    println!("R,C,D,chord");
    for p in &curve.points {
        let chord = sw.distilled * (p.comm_rate / sw.comm_rate).min(1.0);
        println!(
            "{:.4},{:.6},{:.6},{:.6}",
            p.comm_rate, p.cr_rate, p.distilled, chord
        );
    }

    // every point carries a channel that reproduces it
    let mid = &curve.points[8];
    let (rate, gain) = eval_pair(&e, &mid.channel)?;
    println!(
        "\nwitness at R = {:.3}: rate {rate:.9}, D {gain:.9}",
        mid.comm_rate
    );
    println!("shape violations: {:?}", curve.shape_violations(1e-4));
    for w in &curve.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
