//! Additivity of the measured correlation for separable and pure first factors.

use crdistill::{
    check_pure_additivity, check_separable_additivity, BipartiteState, DensityMatrix,
    MeasurementConfig, ProbVector,
};

fn main() -> crdistill::Result<()> {
    let cfg = MeasurementConfig::default();
    let plus = DensityMatrix::from_ket(&[
        crdistill::linalg::C64::new(0.5f64.sqrt(), 0.0),
        crdistill::linalg::C64::new(0.5f64.sqrt(), 0.0),
    ])?;
    let parts = vec![
        (DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 0)),
        (plus.clone(), plus),
    ];
    let rep = check_separable_additivity(
        &ProbVector::uniform(2),
        &parts,
        &BipartiteState::bell(),
        &cfg,
    )?;
    println!(
        "separable x bell: joint {:.6}  sum {:.6}  gap {:+.1e}",
        rep.joint, rep.sum, rep.gap
    );

    let psi = BipartiteState::schmidt_pair(std::f64::consts::FRAC_PI_8);
    let sigma = crdistill::swapped_embedding(&crdistill::named_ensemble("two_state", &[])?);
    let rep = check_pure_additivity(&psi, &sigma, &cfg)?;
    let (ent, resid) = rep.entanglement.expect("pure check reports the entropy");
    println!(
        "schmidt x two_state: joint {:.6}  sum {:.6}  gap {:+.1e}",
        rep.joint, rep.sum, rep.gap
    );
    println!(
        "first factor {:.6} vs entanglement entropy {ent:.6} (residual {resid:.1e})",
        rep.first.value
    );
    Ok(())
}
