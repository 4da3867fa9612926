//! Randomized check of `S(σ) ≤ 1 + ε log2 D + (1 − ε) log2(Tr B + 1)` for
//! `0 ≤ B ≤ 1` with `Tr σB = 1 − ε`.

use crdistill::lemma3_check;

fn main() -> crdistill::Result<()> {
    for dim in [2, 4, 8, 16] {
        let rep = lemma3_check(dim, 1000, 42)?;
        println!(
            "D = {dim:>2}: {} trials, {} violations, largest excess {:.3e}",
            rep.trials, rep.violations, rep.max_excess
        );
    }
    Ok(())
}
