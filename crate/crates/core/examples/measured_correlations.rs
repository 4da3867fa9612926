//! One-shot classical correlation `max_M I(X;B)` for pure states matches the
//! entanglement entropy; the measured trade-off curve of a Schmidt state.

use crdistill::{
    c1_curve, d1_infty, entanglement_entropy, BipartiteState, MeasurementConfig, RGrid,
    SolverConfig,
};

fn main() -> crdistill::Result<()> {
    let mcfg = MeasurementConfig::default();
    for (name, psi) in [
        ("bell", BipartiteState::bell()),
        (
            "schmidt(pi/8)",
            BipartiteState::schmidt_pair(std::f64::consts::FRAC_PI_8),
        ),
        (
            "schmidt(pi/6)",
            BipartiteState::schmidt_pair(std::f64::consts::FRAC_PI_6),
        ),
    ] {
        let rep = d1_infty(&psi, &mcfg)?;
        println!(
            "{name:<14} optimized {:.6}  entropy {:.6}",
            rep.value,
            entanglement_entropy(&psi)?
        );
    }

    let psi = BipartiteState::schmidt_pair(0.4);
    let c1 = c1_curve(
        &psi,
        &RGrid::new(0.0, 1.0, 6)?,
        &SolverConfig {
            starts: 8,
            ..Default::default()
        },
        &mcfg,
    )?;
    println!("\nR,D,D_hull,measurement");
    for ((p, h), m) in c1.curve.points.iter().zip(&c1.hull).zip(&c1.measurement) {
        println!("{:.2},{:.6},{:.6},{m}", p.comm_rate, p.distilled, h);
    }
    Ok(())
}
