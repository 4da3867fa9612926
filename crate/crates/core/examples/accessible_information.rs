//! Accessible information of the two-state ensemble: the optimized POVM against
//! a scan over real projective measurements, and the gap to the Holevo bound.

use crdistill::measurement::projective_scan;
use crdistill::{
    accessible_info, holevo_chi, named_ensemble, swapped_embedding, MeasurementConfig,
};

fn main() -> crdistill::Result<()> {
    let e = named_ensemble("two_state", &[])?;
    let rep = accessible_info(&e, &MeasurementConfig::default())?;
    let (angle, scan) = projective_scan(&swapped_embedding(&e), 720)?;
    println!(
        "optimized POVM: {:.6} bits with {} outcomes",
        rep.value, rep.n_outcomes
    );
    println!("projective scan: {scan:.6} bits at angle {angle:.4}");
    println!("Holevo bound:    {:.6} bits", holevo_chi(&e));
    for (i, eff) in rep.povm.elements().iter().enumerate() {
        println!(
            "E{i} = [[{:.4}, {:.4}], [{:.4}, {:.4}]]",
            eff[(0, 0)].re,
            eff[(0, 1)],
            eff[(1, 0)],
            eff[(1, 1)].re
        );
    }
    Ok(())
}
