//! Common randomness without communication: the three-state qutrit ensemble
//! yields `h2(1/3)` bits at `R = 0`, the two-state ensemble yields nothing.

use crdistill::{binary_entropy, named_ensemble, solve_dstar, SolverConfig};

fn main() -> crdistill::Result<()> {
    let cfg = SolverConfig::default();
    let three = named_ensemble("three_state", &[])?;
    let p = solve_dstar(&three, 0.0, &cfg)?;
    println!(
        "three_state: D*(0) = {:.6} (h2(1/3) = {:.6})",
        p.distilled,
        binary_entropy(1.0 / 3.0)?
    );
    println!("witness rows:");
    for row in p.channel.rows() {
        println!(
            "  {}",
            row.iter()
                .map(|v| format!("{v:.3}"))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }

    let two = named_ensemble("two_state", &[])?;
    println!(
        "two_state:   D*(0) = {:.2e}",
        solve_dstar(&two, 0.0, &cfg)?.distilled
    );
    Ok(())
}
