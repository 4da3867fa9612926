//! Greedy construction of a map `g` from typical words to codewords of an
//! auxiliary variable, here a binary symmetric channel with flip probability 1/4.

use crdistill::{build_g, named_ensemble, AuxChannel};

fn main() -> crdistill::Result<()> {
    let e = named_ensemble("two_state", &[])?;
    let w = AuxChannel::binary_symmetric(0.25)?;
    let (n, delta) = (10, 0.15);
    let table = build_g(&e, &w, n, delta, 0.1)?;
    let covered = table.assignment.iter().filter(|a| a.is_some()).count();
    println!(
        "n = {n}: {} codewords cover {covered} of {} words",
        table.codewords.len(),
        table.assignment.len()
    );
    println!(
        "residual mass {:.4}{}",
        table.residual_mass,
        if table.stalled { " (stalled)" } else { "" }
    );
    println!(
        "H(X^n|g)/n = {:.4}  vs  H(X|U) = {:.4}",
        table.h_x_given_g, table.h_x_given_u
    );
    println!(
        "H(Q^n|g)/n <= {:.4}  vs  H(Q|U) = {:.4}",
        table.h_q_given_g, table.h_q_given_u
    );
    println!(
        "windows: x {}, q {}",
        table.x_window_ok(delta, 0.1),
        table.q_window_ok(delta, 0.1)
    );
    Ok(())
}
