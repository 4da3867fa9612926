//! Single-letter optimality on a product of two ensembles: the joint optimum at
//! rate `R` equals the best split `R1 + R2 = R` of the factor curves.

use crdistill::{check_additivity, named_ensemble, orthogonal_pair, SolverConfig};

fn main() -> crdistill::Result<()> {
    let cfg = SolverConfig::default();
    let two = named_ensemble("two_state", &[])?;
    for r in [0.0, 0.4, 0.8] {
        let rep = check_additivity(&two, &two, r, &cfg)?;
        println!(
            "two_state^2  R = {r:.1}: joint {:.6}  split {:.6} at ({:.3}, {:.3})  gap {:+.1e}",
            rep.lhs, rep.rhs, rep.best_split.0, rep.best_split.1, rep.gap
        );
    }
    let rep = check_additivity(&orthogonal_pair(), &orthogonal_pair(), 0.0, &cfg)?;
    println!(
        "orthogonal^2 R = 0.0: joint {:.6}  split {:.6}",
        rep.lhs, rep.rhs
    );
    Ok(())
}
