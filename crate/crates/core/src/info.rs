//! Entropic functionals: Shannon and von Neumann entropies, Holevo information,
//! mutual informations of an auxiliary channel, conditional mutual information
//! on block-diagonal states, and the Slepian-Wolf point.

use std::collections::BTreeMap;

use crate::ensembles::{AuxChannel, BipartiteState, CQEnsemble, EhsState, ProbVector};
use crate::error::{Error, Result};
use crate::linalg::{entropy_unnormalized, vn_entropy, xlog2x_neg, ComplexMatrix};

/// Entropy in bits of a probability vector.
pub fn shannon_entropy(p: &ProbVector) -> f64 {
    entropy_of(p.as_slice())
}

/// `−Σ pᵢ log₂ pᵢ` over a slice, without any normalization.
pub fn entropy_of(p: &[f64]) -> f64 {
    p.iter().map(|&v| xlog2x_neg(v)).sum()
}

/// `h₂(p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::DomainError(format!("binary entropy of {p}")));
    }
    Ok(xlog2x_neg(p) + xlog2x_neg(1.0 - p))
}

/// `χ = H(Σ p(x) ρ_x) − Σ p(x) H(ρ_x)`.
pub fn holevo_chi(e: &CQEnsemble) -> f64 {
    let avg = vn_entropy(&e.average_state());
    let mean: f64 = e
        .probs()
        .as_slice()
        .iter()
        .zip(e.states())
        .map(|(p, s)| p * vn_entropy(s))
        .sum();
    (avg - mean).max(0.0)
}

/// `H(X|Q) = H(X) − χ`.
pub fn conditional_entropy_xq(e: &CQEnsemble) -> f64 {
    (e.probs().entropy() - holevo_chi(e)).max(0.0)
}

/// Mutual information between the rows and columns of a joint distribution.
pub fn classical_mutual_info(joint: &[Vec<f64>]) -> f64 {
    let cols = joint.first().map_or(0, |r| r.len());
    let row_m: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let col_m: Vec<f64> = (0..cols)
        .map(|j| joint.iter().map(|r| r[j]).sum())
        .collect();
    let flat: f64 = joint.iter().flatten().map(|&v| xlog2x_neg(v)).sum();
    (entropy_of(&row_m) + entropy_of(&col_m) - flat).max(0.0)
}

fn check_sizes(n: usize, w: &AuxChannel) -> Result<()> {
    if w.in_size() != n {
        return Err(Error::SizeMismatch(format!(
            "channel input {} vs alphabet {n}",
            w.in_size()
        )));
    }
    Ok(())
}

/// `I(U;X)` for the joint distribution `p(x) Q(u|x)`.
pub fn mutual_info_ux(p: &ProbVector, w: &AuxChannel) -> Result<f64> {
    check_sizes(p.len(), w)?;
    let pu = w.output_distribution(p);
    let cond: f64 = (0..p.len()).map(|x| p[x] * entropy_of(w.row(x))).sum();
    Ok((entropy_of(&pu) - cond).max(0.0))
}

/// Unnormalized conditional states `σ_u = Σ_x p(x) Q(u|x) ρ_x`.
pub(crate) fn conditional_blocks(e: &CQEnsemble, w: &AuxChannel) -> Vec<ComplexMatrix> {
    let d = e.dim();
    (0..w.out_size())
        .map(|u| {
            let mut m = ComplexMatrix::zeros(d, d);
            for (x, s) in e.states().iter().enumerate() {
                let wt = e.probs()[x] * w.get(x, u);
                if wt > 0.0 {
                    m.add_scaled(s.matrix(), wt);
                }
            }
            m
        })
        .collect()
}

/// `I(U;Q) = H(ρ̄) − Σ_u p(u) H(ρ_u)` for the chain `U → X → Q`.
pub fn mutual_info_uq(e: &CQEnsemble, w: &AuxChannel) -> Result<f64> {
    check_sizes(e.len(), w)?;
    let pu = w.output_distribution(e.probs());
    let blocks_entropy: f64 = conditional_blocks(e, w)
        .iter()
        .map(entropy_unnormalized)
        .sum();
    let value = vn_entropy(&e.average_state()) + entropy_of(&pu) - blocks_entropy;
    Ok(value.max(0.0))
}

/// The achievable pair `(C, R) = (H(X), H(X|Q))` and its excess `D = χ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwPoint {
    pub cr_rate: f64,
    pub comm_rate: f64,
    pub distilled: f64,
}

pub fn sw_point(e: &CQEnsemble) -> SwPoint {
    let cr_rate = e.probs().entropy();
    let chi = holevo_chi(e).min(cr_rate);
    let comm_rate = cr_rate - chi;
    SwPoint {
        cr_rate,
        comm_rate,
        distilled: cr_rate - comm_rate,
    }
}

/// Entropy of entanglement of a pure bipartite state.
pub fn entanglement_entropy(psi: &BipartiteState) -> Result<f64> {
    let purity = psi.state().purity();
    if purity < 1.0 - 1e-8 {
        return Err(Error::NotPure { purity });
    }
    Ok(vn_entropy(&psi.reduced_a()))
}

/// One register of an [`EhsState`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Register {
    Classical(usize),
    Quantum,
}

/// Registers `A`, `B` and the conditioning set `C` of `I(A;B|C)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub a: Vec<Register>,
    pub b: Vec<Register>,
    pub cond: Vec<Register>,
}

impl Partition {
    pub fn new(a: Vec<Register>, b: Vec<Register>, cond: Vec<Register>) -> Self {
        Self { a, b, cond }
    }
}

/// Joint entropy of a subset of registers.
pub fn subset_entropy(s: &EhsState, regs: &[Register]) -> Result<f64> {
    let nc = s.classical_dims().len();
    let mut kept = Vec::new();
    let mut quantum = false;
    for r in regs {
        match *r {
            Register::Classical(i) if i < nc => kept.push(i),
            Register::Classical(i) => {
                return Err(Error::BadPartition(format!("no classical register {i}")))
            }
            Register::Quantum => quantum = true,
        }
    }
    kept.sort_unstable();
    kept.dedup();
    let key = |idx: &[usize]| kept.iter().map(|&i| idx[i]).collect::<Vec<_>>();
    if quantum {
        let mut groups: BTreeMap<Vec<usize>, ComplexMatrix> = BTreeMap::new();
        for (idx, b) in s.blocks() {
            groups
                .entry(key(idx))
                .and_modify(|m| m.add_scaled(b, 1.0))
                .or_insert_with(|| b.clone());
        }
        Ok(groups.values().map(entropy_unnormalized).sum())
    } else {
        let mut groups: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (idx, b) in s.blocks() {
            *groups.entry(key(idx)).or_insert(0.0) += b.trace().re;
        }
        Ok(groups.values().map(|&p| xlog2x_neg(p)).sum())
    }
}

/// `I(A;B|C) = H(AC) + H(BC) − H(ABC) − H(C)`.
pub fn cond_mutual_info(s: &EhsState, part: &Partition) -> Result<f64> {
    if part.a.is_empty() || part.b.is_empty() {
        return Err(Error::BadPartition(
            "both sides of the mutual information need a register".into(),
        ));
    }
    let mut all: Vec<Register> = part
        .a
        .iter()
        .chain(&part.b)
        .chain(&part.cond)
        .copied()
        .collect();
    let n = all.len();
    all.sort();
    all.dedup();
    if all.len() != n {
        return Err(Error::BadPartition(
            "registers appear in more than one group".into(),
        ));
    }
    let join =
        |x: &[Register], y: &[Register]| -> Vec<Register> { x.iter().chain(y).copied().collect() };
    let h_ac = subset_entropy(s, &join(&part.a, &part.cond))?;
    let h_bc = subset_entropy(s, &join(&part.b, &part.cond))?;
    let h_c = subset_entropy(s, &part.cond)?;
    let h_abc = subset_entropy(s, &all)?;
    Ok(h_ac + h_bc - h_abc - h_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{
        ehs_embed, extend_with_channel, named_ensemble, orthogonal_pair, trivial_ensemble,
    };
    use crate::linalg::{partial_trace_multi, DensityMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use Register::*;

    const TWO_STATE_CHI: f64 = 0.600_876_036_692_856;

    fn closed_form_chi() -> f64 {
        binary_entropy((1.0 + 0.5f64.sqrt()) / 2.0).unwrap()
    }

    #[test]
    fn shannon_examples() {
        assert!((shannon_entropy(&ProbVector::uniform(2)) - 1.0).abs() < 1e-15);
        assert_eq!(
            shannon_entropy(&ProbVector::new(vec![1.0, 0.0]).unwrap()),
            0.0
        );
        assert!((shannon_entropy(&ProbVector::uniform(3)) - 1.584_963).abs() < 1e-6);
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert!((binary_entropy(1.0 / 3.0).unwrap() - 0.918_296).abs() < 1e-6);
        assert!(matches!(binary_entropy(1.5), Err(Error::DomainError(_))));
    }

    #[test]
    fn holevo_examples() {
        assert!((holevo_chi(&orthogonal_pair()) - 1.0).abs() < 1e-12);
        let e = named_ensemble("two_state", &[]).unwrap();
        assert!((holevo_chi(&e) - closed_form_chi()).abs() < 1e-12);
        assert!((holevo_chi(&e) - TWO_STATE_CHI).abs() < 1e-9);
        assert!(holevo_chi(&trivial_ensemble(DensityMatrix::maximally_mixed(3))).abs() < 1e-12);
    }

    #[test]
    fn mutual_info_examples() {
        let p = ProbVector::uniform(2);
        assert!((mutual_info_ux(&p, &AuxChannel::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            mutual_info_ux(&p, &AuxChannel::constant(2, 3)).unwrap(),
            0.0
        );

        let e = named_ensemble("two_state", &[]).unwrap();
        assert!(
            (mutual_info_uq(&e, &AuxChannel::identity(2)).unwrap() - holevo_chi(&e)).abs() < 1e-12
        );
        assert!(
            mutual_info_uq(&e, &AuxChannel::constant(2, 1))
                .unwrap()
                .abs()
                < 1e-12
        );
        assert!(mutual_info_uq(&e, &AuxChannel::identity(3)).is_err());
    }

    #[test]
    fn mutual_info_uq_matches_dense_route() {
        let e = named_ensemble("two_state", &[]).unwrap();
        let w = AuxChannel::binary_symmetric(0.25).unwrap();
        let fast = mutual_info_uq(&e, &w).unwrap();
        assert!(fast > 0.0 && fast < holevo_chi(&e));

        let s = extend_with_channel(&e, &w).unwrap();
        let dense = s.to_density_matrix();
        let dims = s.register_dims();
        let h = |keep: &[usize]| {
            let m = partial_trace_multi(dense.matrix(), &dims, keep).unwrap();
            vn_entropy(&DensityMatrix::from_trusted(m))
        };
        let slow = h(&[0]) + h(&[2]) - h(&[0, 2]);
        assert!((fast - slow).abs() < 1e-10);
        let structured = cond_mutual_info(
            &s,
            &Partition::new(vec![Classical(0)], vec![Quantum], vec![]),
        )
        .unwrap();
        assert!((fast - structured).abs() < 1e-10);
    }

    #[test]
    fn sw_point_examples() {
        let sw = sw_point(&named_ensemble("two_state", &[]).unwrap());
        assert!((sw.cr_rate - 1.0).abs() < 1e-12);
        assert!((sw.comm_rate - (1.0 - TWO_STATE_CHI)).abs() < 1e-9);
        assert_eq!(sw.distilled, sw.cr_rate - sw.comm_rate);

        let sw = sw_point(&named_ensemble("three_state", &[]).unwrap());
        assert!((sw.distilled - 1.318_879_858_516).abs() < 1e-9);
        assert!((sw.comm_rate - 0.266_082_642_205).abs() < 1e-9);

        let sw = sw_point(&orthogonal_pair());
        assert_eq!((sw.cr_rate, sw.comm_rate, sw.distilled), (1.0, 0.0, 1.0));
    }

    #[test]
    fn entanglement_examples() {
        assert!((entanglement_entropy(&BipartiteState::bell()).unwrap() - 1.0).abs() < 1e-12);
        let prod =
            BipartiteState::product(&DensityMatrix::basis(2, 0), &DensityMatrix::basis(2, 1));
        assert!(entanglement_entropy(&prod).unwrap().abs() < 1e-12);
        let t = std::f64::consts::PI / 8.0;
        let psi = BipartiteState::schmidt_pair(t);
        let expect = binary_entropy(t.sin().powi(2)).unwrap();
        assert!((entanglement_entropy(&psi).unwrap() - expect).abs() < 1e-12);
        assert!((expect - TWO_STATE_CHI).abs() < 1e-9);
        let mixed = BipartiteState::product(
            &DensityMatrix::maximally_mixed(2),
            &DensityMatrix::basis(2, 0),
        );
        assert!(matches!(
            entanglement_entropy(&mixed),
            Err(Error::NotPure { .. })
        ));
    }

    fn random_classical_state(rng: &mut ChaCha8Rng, dims: &[usize]) -> (EhsState, Vec<f64>) {
        let total: usize = dims.iter().product();
        let w: Vec<f64> = (0..total).map(|_| rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|v| v / s).collect();
        let mut blocks = Vec::new();
        for (flat, &pv) in p.iter().enumerate() {
            let mut idx = vec![0; dims.len()];
            let mut r = flat;
            for k in (0..dims.len()).rev() {
                idx[k] = r % dims[k];
                r /= dims[k];
            }
            blocks.push((idx, ComplexMatrix::from_real_diag(&[pv])));
        }
        (EhsState::new(dims.to_vec(), 1, blocks).unwrap(), p)
    }

    #[test]
    fn cond_mutual_info_classical_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dims = [2, 3, 2];
        for _ in 0..20 {
            let (s, p) = random_classical_state(&mut rng, &dims);
            let at = |a: usize, b: usize, c: usize| p[(a * 3 + b) * 2 + c];
            let mut oracle = 0.0;
            for c in 0..2 {
                let pc: f64 = (0..2)
                    .flat_map(|a| (0..3).map(move |b| (a, b)))
                    .map(|(a, b)| at(a, b, c))
                    .sum();
                for a in 0..2 {
                    let pac: f64 = (0..3).map(|b| at(a, b, c)).sum();
                    for b in 0..3 {
                        let pbc: f64 = (0..2).map(|a| at(a, b, c)).sum();
                        let pabc = at(a, b, c);
                        oracle += pabc * (pabc * pc / (pac * pbc)).log2();
                    }
                }
            }
            let got = cond_mutual_info(
                &s,
                &Partition::new(vec![Classical(0)], vec![Classical(1)], vec![Classical(2)]),
            )
            .unwrap();
            assert!((got - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn cond_mutual_info_examples() {
        let e = named_ensemble("bb84", &[]).unwrap();
        let s = ehs_embed(&e);
        assert!(cond_mutual_info(
            &s,
            &Partition::new(vec![Classical(0)], vec![Quantum], vec![Classical(0)])
        )
        .is_err());
        let w = AuxChannel::binary_symmetric(0.2).unwrap();
        let prod = trivial_ensemble(DensityMatrix::basis(2, 0))
            .tensor(&trivial_ensemble(DensityMatrix::basis(2, 0)));
        assert_eq!(prod.len(), 1);
        let two = named_ensemble("two_state", &[]).unwrap();
        let s = extend_with_channel(&two, &w).unwrap();
        let markov = cond_mutual_info(
            &s,
            &Partition::new(vec![Classical(0)], vec![Quantum], vec![Classical(1)]),
        )
        .unwrap();
        assert!(markov.abs() < 1e-12);
        let ux = cond_mutual_info(
            &s,
            &Partition::new(vec![Classical(0)], vec![Classical(1)], vec![]),
        )
        .unwrap();
        assert!((ux - mutual_info_ux(two.probs(), &w).unwrap()).abs() < 1e-12);
        assert!(matches!(
            cond_mutual_info(
                &s,
                &Partition::new(vec![Classical(5)], vec![Quantum], vec![])
            ),
            Err(Error::BadPartition(_))
        ));
    }

    #[test]
    fn chain_rule_and_strong_subadditivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..500 {
            let name = ["two_state", "three_state", "bb84"][trial % 3];
            let e = named_ensemble(name, &[]).unwrap();
            let k = e.len() + 1;
            let rows: Vec<Vec<f64>> = (0..e.len())
                .map(|_| {
                    let r: Vec<f64> = (0..k).map(|_| rng.random::<f64>().powi(3)).collect();
                    let s: f64 = r.iter().sum();
                    r.into_iter().map(|v| v / s).collect()
                })
                .collect();
            let w = AuxChannel::from_rows(rows).unwrap();
            let s = extend_with_channel(&e, &w).unwrap();
            let u_xq = cond_mutual_info(
                &s,
                &Partition::new(vec![Classical(0)], vec![Classical(1), Quantum], vec![]),
            )
            .unwrap();
            let u_q = mutual_info_uq(&e, &w).unwrap();
            let u_x_given_q = cond_mutual_info(
                &s,
                &Partition::new(vec![Classical(0)], vec![Classical(1)], vec![Quantum]),
            )
            .unwrap();
            assert!((u_xq - u_q - u_x_given_q).abs() < 1e-9);
            for part in [
                Partition::new(vec![Classical(0)], vec![Quantum], vec![Classical(1)]),
                Partition::new(vec![Classical(1)], vec![Quantum], vec![Classical(0)]),
                Partition::new(vec![Classical(0)], vec![Classical(1)], vec![Quantum]),
            ] {
                assert!(cond_mutual_info(&s, &part).unwrap() >= -1e-9);
            }
            assert!(u_q <= holevo_chi(&e) + 1e-9);
            assert!(u_q <= entropy_of(&w.output_distribution(e.probs())) + 1e-9);
        }
    }
}
