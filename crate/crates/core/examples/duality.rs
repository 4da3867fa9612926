//! The compression curve `Q*(R)` and its link to `D*`: `D*(x) + Q*(D*(x) + x) = H(Q)`.

use crdistill::{
    check_duality, conditional_entropy_xq, named_ensemble, qstar_curve, RGrid, SolverConfig,
};

fn main() -> crdistill::Result<()> {
    let e = named_ensemble("two_state", &[])?;
    let cfg = SolverConfig::default();

    println!("R,Q*");
    for (r, q) in qstar_curve(&e, &RGrid::new(0.0, 1.0, 11)?, &cfg)? {
        println!("{r:.2},{q:.6}");
    }

    let hxq = conditional_entropy_xq(&e);
    let xs: Vec<f64> = (0..5).map(|i| hxq * i as f64 / 5.0).collect();
    let rep = check_duality(&e, &xs, &cfg)?;
    println!("\nH(Q) = {:.6}", rep.h_q);
    for (x, d, q, res) in &rep.rows {
        println!("x = {x:.4}  D* = {d:.6}  Q* = {q:.6}  residual {res:.1e}");
    }
    Ok(())
}
