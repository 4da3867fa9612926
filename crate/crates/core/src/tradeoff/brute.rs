//! Exhaustive mesh search over channel matrices for small alphabets.

use rayon::prelude::*;

use super::{CurvePoint, Model};
use crate::ensembles::{AuxChannel, CQEnsemble};
use crate::error::{Error, Result};
use crate::info::entropy_of;
use crate::linalg::{eigh, xlog2x_neg, ComplexMatrix};

/// Largest alphabet the mesh oracle accepts.
pub const BRUTE_MAX_ALPHABET: usize = 3;

/// All vectors of `k` nonnegative integers summing to `n`, lexicographically descending.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=n).rev() {
            prefix.push(first);
            rec(n - first, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::new(), &mut out);
    out
}

fn eigenvalues3(a: &ComplexMatrix) -> [f64; 3] {
    let (a11, a22, a33) = (a[(0, 0)].re, a[(1, 1)].re, a[(2, 2)].re);
    let (a12, a13, a23) = (a[(0, 1)], a[(0, 2)], a[(1, 2)]);
    let off = a12.norm_sqr() + a13.norm_sqr() + a23.norm_sqr();
    let q = (a11 + a22 + a33) / 3.0;
    let p2 = (a11 - q).powi(2) + (a22 - q).powi(2) + (a33 - q).powi(2) + 2.0 * off;
    if p2 <= 1e-300 {
        return [q, q, q];
    }
    let p = (p2 / 6.0).sqrt();
    let (b11, b22, b33) = ((a11 - q) / p, (a22 - q) / p, (a33 - q) / p);
    let (b12, b13, b23) = (a12 / p, a13 / p, a23 / p);
    let det = b11 * b22 * b33 + 2.0 * (b12 * b23 * b13.conj()).re
        - b11 * b23.norm_sqr()
        - b22 * b13.norm_sqr()
        - b33 * b12.norm_sqr();
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [e1, 3.0 * q - e1 - e3, e3]
}

fn psd_entropy(a: &ComplexMatrix) -> f64 {
    match a.rows() {
        3 => eigenvalues3(a)
            .iter()
            .map(|&l| xlog2x_neg(l.max(0.0)))
            .sum(),
        _ => eigh(a)
            .eigenvalues
            .iter()
            .map(|&l| xlog2x_neg(l.max(0.0)))
            .sum(),
    }
}

struct Mesh {
    k: usize,
    rows: Vec<Vec<f64>>,
    /// Rows usable for the first input: nonincreasing entries, which fixes the output labelling.
    first_rows: Vec<usize>,
    row_entropy: Vec<f64>,
}

fn build_mesh(m: usize, mesh: usize) -> Mesh {
    let k = if m >= 3 { m } else { m + 1 };
    let comps = compositions(mesh, k);
    let rows: Vec<Vec<f64>> = comps
        .iter()
        .map(|c| c.iter().map(|&v| v as f64 / mesh as f64).collect())
        .collect();
    let first_rows = comps
        .iter()
        .enumerate()
        .filter(|(_, c)| c.windows(2).all(|w| w[0] >= w[1]))
        .map(|(i, _)| i)
        .collect();
    let row_entropy = rows.iter().map(|r| entropy_of(r)).collect();
    Mesh {
        k,
        rows,
        first_rows,
        row_entropy,
    }
}

fn decode(idx: usize, m: usize, n_rows: usize) -> Vec<usize> {
    let mut out = vec![0; m];
    let mut r = idx;
    for x in (0..m).rev() {
        out[x] = r % n_rows;
        r /= n_rows;
    }
    out
}

/// Best feasible mesh channel at each rate. For `|X| ≤ 2` the mesh runs over `|X| + 1`
/// outputs; for `|X| = 3` over `|X|` outputs to keep the enumeration tractable.
pub fn brute_dstar_many(e: &CQEnsemble, rates: &[f64], mesh: usize) -> Result<Vec<CurvePoint>> {
    let m = e.len();
    if m > BRUTE_MAX_ALPHABET {
        return Err(Error::EnvelopeExceeded(format!(
            "mesh oracle supports |X| <= {BRUTE_MAX_ALPHABET}, got {m}"
        )));
    }
    if mesh == 0 {
        return Err(Error::BadParam("mesh must be positive".into()));
    }
    let model = Model::new(e);
    let grid = build_mesh(m, mesh);
    let (k, n_rows) = (grid.k, grid.rows.len());
    let p = &model.p;
    let tail: usize = n_rows.pow((m - 1) as u32);

    // per first-row index: the best (gain, rate, flat index) per target rate
    let partial: Vec<Vec<Option<(f64, f64, usize)>>> = grid
        .first_rows
        .par_iter()
        .map(|&r0| {
            let mut best: Vec<Option<(f64, f64, usize)>> = vec![None; rates.len()];
            let mut sigma = vec![ComplexMatrix::zeros(model.d, model.d); k];
            for t in 0..tail {
                let idx = r0 * tail + t;
                let rows = decode(idx, m, n_rows);
                let mut pu = vec![0.0; k];
                let mut cond = 0.0;
                for (x, &ri) in rows.iter().enumerate() {
                    cond += p[x] * grid.row_entropy[ri];
                    for u in 0..k {
                        pu[u] += p[x] * grid.rows[ri][u];
                    }
                }
                let h_u = entropy_of(&pu);
                let mut blocks = 0.0;
                for u in 0..k {
                    if pu[u] <= 0.0 {
                        continue;
                    }
                    let s = &mut sigma[u];
                    *s = ComplexMatrix::zeros(model.d, model.d);
                    for (x, &ri) in rows.iter().enumerate() {
                        let wt = p[x] * grid.rows[ri][u];
                        if wt > 0.0 {
                            s.add_scaled(&model.states[x], wt);
                        }
                    }
                    blocks += psd_entropy(s);
                }
                let gain = model.h_avg + h_u - blocks;
                let rate = h_u - cond - gain;
                for (j, &r) in rates.iter().enumerate() {
                    if rate <= r + 1e-9 {
                        let better = match best[j] {
                            None => true,
                            Some((g, rt, _)) => gain > g + 1e-13 || (gain > g - 1e-13 && rate < rt),
                        };
                        if better {
                            best[j] = Some((gain, rate, idx));
                        }
                    }
                }
            }
            best
        })
        .collect();

    let mut out = Vec::with_capacity(rates.len());
    for (j, &r) in rates.iter().enumerate() {
        let mut pick: Option<(f64, f64, usize)> = None;
        for part in &partial {
            if let Some(c) = part[j] {
                let better = match pick {
                    None => true,
                    Some((g, rt, _)) => c.0 > g + 1e-13 || (c.0 > g - 1e-13 && c.1 < rt),
                };
                if better {
                    pick = Some(c);
                }
            }
        }
        let (_, _, idx) = pick.expect("constant channel lies on the mesh");
        let rows = decode(idx, m, n_rows)
            .into_iter()
            .map(|ri| grid.rows[ri].clone())
            .collect();
        let channel = AuxChannel::from_rows(rows)?;
        let (rate, gain) = super::eval_pair(e, &channel)?;
        out.push(CurvePoint::new(r, gain, channel, rate, None, true));
    }
    Ok(out)
}

/// Mesh-search lower bound on `D*(R)`.
pub fn brute_dstar(e: &CQEnsemble, r: f64, mesh: usize) -> Result<CurvePoint> {
    Ok(brute_dstar_many(e, &[r], mesh)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::named_ensemble;
    use crate::info::{conditional_entropy_xq, holevo_chi};
    use crate::linalg::{c, eigh};

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(24, 3).len(), 325);
        assert_eq!(
            compositions(4, 2),
            vec![vec![4, 0], vec![3, 1], vec![2, 2], vec![1, 3], vec![0, 4]]
        );
    }

    #[test]
    fn closed_form_eigenvalues() {
        let m = ComplexMatrix::new(
            3,
            3,
            vec![
                c(0.5, 0.0),
                c(0.1, 0.2),
                c(0.0, -0.1),
                c(0.1, -0.2),
                c(0.3, 0.0),
                c(0.05, 0.0),
                c(0.0, 0.1),
                c(0.05, 0.0),
                c(0.2, 0.0),
            ],
        )
        .unwrap();
        let fast = eigenvalues3(&m);
        let slow = eigh(&m).eigenvalues;
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn corners_are_on_the_mesh() {
        let e = named_ensemble("two_state", &[]).unwrap();
        let hxq = conditional_entropy_xq(&e);
        let pts = brute_dstar_many(&e, &[0.0, hxq + 1e-6], 6).unwrap();
        assert!(pts[0].distilled >= 0.0 && pts[0].distilled < 1e-9);
        assert!((pts[1].distilled - holevo_chi(&e)).abs() < 1e-9);
        assert!(brute_dstar(&named_ensemble("bb84", &[]).unwrap(), 0.1, 4).is_err());
    }
}
