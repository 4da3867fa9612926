//! Scalar summary of the built-in ensembles, plus a round trip through the JSON format.

use crdistill::io::{ensemble_to_json, parse_ensemble};
use crdistill::{
    conditional_entropy_xq, holevo_chi, named_ensemble, orthogonal_pair, shannon_entropy, sw_point,
    vn_entropy,
};

fn main() -> crdistill::Result<()> {
    let ensembles = vec![
        named_ensemble("two_state", &[])?,
        named_ensemble("three_state", &[])?,
        named_ensemble("bb84", &[std::f64::consts::FRAC_PI_8])?,
        orthogonal_pair(),
    ];
    println!(
        "{:<14} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "ensemble", "H(X)", "H(Q)", "chi", "H(X|Q)", "SW rate"
    );
    for e in &ensembles {
        let sw = sw_point(e);
        println!(
            "{:<14} {:>8.6} {:>8.6} {:>8.6} {:>8.6} {:>8.6}",
            e.label.as_deref().unwrap_or("orthogonal"),
            shannon_entropy(e.probs()),
            vn_entropy(&e.average_state()),
            holevo_chi(e),
            conditional_entropy_xq(e),
            sw.comm_rate,
        );
    }

    let text = ensemble_to_json(&ensembles[0]);
    let back = parse_ensemble(&text)?;
    println!("\n{text}");
    println!("round trip chi: {:.12}", holevo_chi(&back));
    Ok(())
}
