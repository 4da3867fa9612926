//! Typical sets and projectors: exact sizes, traces and retained masses along a
//! blocklength ladder for the average state of the two-state ensemble.

use crdistill::typicality::rows_to_csv;
use crdistill::{
    named_ensemble, typical_projector, typical_set_size, verify_trace_bounds, AuxChannel,
    ProbVector, TypicalSetSpec,
};

fn main() -> crdistill::Result<()> {
    let spec = TypicalSetSpec::new(ProbVector::new(vec![0.7, 0.3])?, 20, 0.1)?;
    let size = typical_set_size(&spec);
    println!(
        "typical words of length 20: {:?} (log2 {:.3})",
        size.exact, size.log2
    );

    let e = named_ensemble("two_state", &[])?;
    let rho = e.average_state();
    for n in [8, 12, 16, 24] {
        let proj = typical_projector(&rho, n, 0.15)?;
        let mass = proj.retained_mass(&vec![rho.clone(); n])?;
        println!(
            "n = {n:>2}: log2 Tr = {:.3}, retained mass {mass:.4}",
            proj.trace().log2
        );
    }

    let rep = verify_trace_bounds(&e, &AuxChannel::identity(2), &[8, 12, 16], 0.15, 500, 7)?;
    println!("\n{}", rows_to_csv(&rep.rows));
    println!("fitted constants {:?}, bound {:.3}", rep.c_fit, rep.c_bound);
    Ok(())
}
