//! The multi-start solver against an exhaustive mesh search over channels.

use crdistill::{brute_dstar, named_ensemble, solve_dstar, SolverConfig};

fn main() -> crdistill::Result<()> {
    let cfg = SolverConfig::default();
    for (name, mesh, rates) in [
        ("two_state", 24, [0.05, 0.1, 0.2, 0.3, 0.35]),
        ("three_state", 8, [0.0, 0.05, 0.1, 0.15, 0.2]),
    ] {
        let e = named_ensemble(name, &[])?;
        println!("{name} (mesh {mesh})");
        for r in rates {
            let solver = solve_dstar(&e, r, &cfg)?.distilled;
            let mesh_best = brute_dstar(&e, r, mesh)?.distilled;
            println!(
                "  R = {r:.2}: solver {solver:.6}  mesh {mesh_best:.6}  margin {:+.2e}",
                solver - mesh_best
            );
        }
    }
    Ok(())
}
