mod common;

use crdistill::cli::curve_csv;
use crdistill::linalg::{partial_trace_multi, C64};
use crdistill::measurement::{measured_information, random_povm, PovmObjective};
use crdistill::tradeoff::{lagrangian_gradient, lagrangian_value};
use crdistill::typicality::Cardinality;
use crdistill::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `G G†` for a `dim × rank` Gaussian `G`, unnormalized.
fn random_psd(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g: Vec<C64> = (0..dim * rank).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_fn(dim, dim, |i, j| {
        (0..rank)
            .map(|k| g[i * rank + k] * g[j * rank + k].conj())
            .sum()
    })
}

fn random_state(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    DensityMatrix::from_unnormalized(random_psd(dim, rank, rng)).unwrap()
}

fn random_probs(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

fn random_ensemble(seed: u64, letters: usize, dim: usize, pure: bool) -> CQEnsemble {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = ProbVector::new(random_probs(letters, &mut rng)).unwrap();
    let rank = if pure { 1 } else { dim };
    CQEnsemble::new(
        p,
        (0..letters)
            .map(|_| random_state(dim, rank, &mut rng))
            .collect(),
    )
    .unwrap()
}

fn random_channel(seed: u64, inputs: usize, outputs: usize) -> AuxChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    AuxChannel::from_rows(
        (0..inputs)
            .map(|_| random_probs(outputs, &mut rng))
            .collect(),
    )
    .unwrap()
}

fn random_ehs(seed: u64, classical: &[usize], qdim: usize) -> EhsState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: usize = classical.iter().product();
    let mut blocks = Vec::new();
    let mut mass = 0.0;
    for flat in 0..total {
        if rng.random_bool(0.2) {
            continue;
        }
        let mut idx = Vec::with_capacity(classical.len());
        let mut rest = flat;
        for &d in classical.iter().rev() {
            idx.push(rest % d);
            rest /= d;
        }
        idx.reverse();
        let rank = rng.random_range(1..=qdim);
        let m = random_psd(qdim, rank, &mut rng);
        mass += m.trace().re;
        blocks.push((idx, m));
    }
    if blocks.is_empty() {
        let m = random_psd(qdim, 1, &mut rng);
        mass = m.trace().re;
        blocks.push((vec![0; classical.len()], m));
    }
    let blocks = blocks
        .into_iter()
        .map(|(i, m)| (i, m.scale(1.0 / mass)))
        .collect();
    EhsState::new(classical.to_vec(), qdim, blocks).unwrap()
}

fn quick_solver() -> SolverConfig {
    SolverConfig {
        starts: 4,
        sweep_points: 10,
        ..Default::default()
    }
}

fn quick_measurement() -> MeasurementConfig {
    MeasurementConfig {
        starts: 4,
        ..Default::default()
    }
}

fn brute_typical_count(p: f64, n: usize, delta: f64) -> u128 {
    let spec = TypicalSetSpec::new(ProbVector::new(vec![p, 1.0 - p]).unwrap(), n, delta).unwrap();
    (0u32..1 << n)
        .filter(|w| {
            let word: Vec<usize> = (0..n).map(|i| ((w >> i) & 1) as usize).collect();
            let ones = word.iter().filter(|&&b| b == 1).count() as f64;
            let zeros = n as f64 - ones;
            let within = |count: f64, q: f64| {
                q > 0.0 && (count - n as f64 * q).abs() <= n as f64 * delta + 1e-9
                    || q == 0.0 && count == 0.0
            };
            let direct = within(zeros, p) && within(ones, 1.0 - p);
            assert_eq!(direct, typical_membership(&spec, &word).unwrap());
            direct
        })
        .count() as u128
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measured_outcomes_obey_holevo_bound(seed in any::<u64>(), letters in 2usize..5, dim in 2usize..4, k in 2usize..6, pure in any::<bool>()) {
        let e = random_ensemble(seed, letters, dim, pure);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let povm = random_povm(dim, k, &mut rng);
        prop_assert!(povm.completeness_residual() <= 1e-8);
        let rows: Vec<Vec<f64>> = e.states().iter().map(|s| povm.elements().iter().map(|m| m.trace_product_re(s.matrix()).max(0.0)).collect()).collect();
        let i_xy = common::classical_mi(e.probs().as_slice(), &rows);
        prop_assert!(i_xy <= holevo_chi(&e) + 1e-9, "{} > {}", i_xy, holevo_chi(&e));
    }

    #[test]
    fn auxiliary_information_bounds(seed in any::<u64>(), letters in 2usize..5, dim in 2usize..4, outputs in 1usize..6) {
        let e = random_ensemble(seed, letters, dim, false);
        let w = random_channel(seed, letters, outputs);
        let i_uq = mutual_info_uq(&e, &w).unwrap();
        let h_u = common_entropy(&w.output_distribution(e.probs()));
        prop_assert!(i_uq <= holevo_chi(&e) + 1e-9);
        prop_assert!(i_uq <= h_u + 1e-9);
        let (r, d) = eval_pair(&e, &w).unwrap();
        prop_assert!(r >= -1e-9 && d >= -1e-9);
    }

    #[test]
    fn chain_rule_on_extended_states(seed in any::<u64>(), letters in 2usize..4, dim in 2usize..4, outputs in 2usize..4) {
        use Register::*;
        let e = random_ensemble(seed, letters, dim, seed % 2 == 0);
        let w = random_channel(seed, letters, outputs);
        let s = extend_with_channel(&e, &w).unwrap();
        let whole = cond_mutual_info(&s, &Partition::new(vec![Classical(0)], vec![Classical(1), Quantum], vec![])).unwrap();
        let via_q = cond_mutual_info(&s, &Partition::new(vec![Classical(0)], vec![Quantum], vec![])).unwrap();
        let rest = cond_mutual_info(&s, &Partition::new(vec![Classical(0)], vec![Classical(1)], vec![Quantum])).unwrap();
        prop_assert!((whole - via_q - rest).abs() <= 1e-9);
        prop_assert!((via_q - mutual_info_uq(&e, &w).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn embeddings_have_the_right_marginals(seed in any::<u64>(), letters in 2usize..4, dim in 2usize..4, outputs in 1usize..4) {
        let e = random_ensemble(seed, letters, dim, false);
        let embedded = ehs_embed(&e).to_density_matrix();
        let avg = partial_trace_multi(embedded.matrix(), &[letters, dim], &[1]).unwrap();
        prop_assert!(avg.max_abs_diff(e.average_state().matrix()) <= 1e-10);
        let s = extend_with_channel(&e, &random_channel(seed, letters, outputs)).unwrap();
        let marginal = partial_trace_multi(s.to_density_matrix().matrix(), &s.register_dims(), &[1, 2]).unwrap();
        prop_assert!(marginal.max_abs_diff(embedded.matrix()) <= 1e-10);
    }

    #[test]
    fn measured_bipartite_states_give_distributions(seed in any::<u64>(), da in 2usize..5, db in 1usize..3, k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = BipartiteState::new(da, db, random_state(da * db, rng.random_range(1..=da * db), &mut rng)).unwrap();
        let povm = random_povm(da, k, &mut rng);
        let e = measure_ensemble(&rho, &povm).unwrap();
        let p = e.probs().as_slice();
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn lemma3_has_no_counterexamples(seed in any::<u64>(), dim in 2usize..9) {
        let rep = lemma3_check(dim, 20, seed).unwrap();
        prop_assert_eq!(rep.violations, 0);
    }

    #[test]
    fn csv_rows_add_up(points in prop::collection::vec((0.0f64..10.0, 0.0f64..2.0), 1..30)) {
        let csv = curve_csv("# test\n", &points, &[]);
        for line in csv.lines().filter(|l| !l.starts_with('#') && *l != "R,C,D") {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            prop_assert!((v[1] - v[0] - v[2]).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn strong_subadditivity(seed in any::<u64>(), d0 in 1usize..4, d1 in 1usize..4, qdim in 1usize..4, choice in 0usize..6) {
        use Register::*;
        let s = random_ehs(seed, &[d0, d1], qdim);
        let regs = [Classical(0), Classical(1), Quantum];
        let (a, b, c) = [(0, 1, 2), (0, 2, 1), (1, 2, 0), (1, 0, 2), (2, 0, 1), (2, 1, 0)][choice];
        let cmi = cond_mutual_info(&s, &Partition::new(vec![regs[a]], vec![regs[b]], vec![regs[c]])).unwrap();
        prop_assert!(cmi >= -1e-9, "{}", cmi);
        let mi = cond_mutual_info(&s, &Partition::new(vec![regs[a]], vec![regs[b], regs[c]], vec![])).unwrap();
        prop_assert!(mi >= -1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn typical_set_size_matches_enumeration(p in 0.0f64..=1.0, n in 1usize..=12, delta in 0.01f64..0.4) {
        let spec = TypicalSetSpec::new(ProbVector::new(vec![p, 1.0 - p]).unwrap(), n, delta).unwrap();
        let Cardinality { exact, log2 } = typical_set_size(&spec);
        let brute = brute_typical_count(p, n, delta);
        prop_assert_eq!(exact, Some(brute));
        if brute > 0 {
            prop_assert!((log2 - (brute as f64).log2()).abs() <= 1e-9);
        }
    }

    #[test]
    fn projector_traces_agree_with_dense(seed in any::<u64>(), dim in 2usize..4, n in 1usize..8, delta in 0.05f64..0.4) {
        prop_assume!(n as f64 * (dim as f64).log2() <= 12.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_state(dim, dim, &mut rng);
        let pi = typical_projector(&rho, n, delta).unwrap();
        let dense = pi.to_dense().unwrap();
        let exact = pi.trace().exact.unwrap() as f64;
        prop_assert!((dense.trace().re - exact).abs() <= 1e-8);
        let mut rho_n = rho.matrix().clone();
        for _ in 1..n {
            rho_n = tensor(&rho_n, rho.matrix());
        }
        let mass = pi.retained_mass(&vec![rho.clone(); n]).unwrap();
        prop_assert!((dense.trace_product_re(&rho_n) - mass).abs() <= 1e-9);
    }

    #[test]
    fn retained_mass_grows_with_delta(seed in any::<u64>(), n in 1usize..40, d1 in 0.01f64..0.3, extra in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_state(2, 2, &mut rng);
        let states = vec![rho.clone(); n];
        let m1 = typical_projector(&rho, n, d1).unwrap().retained_mass(&states).unwrap();
        let m2 = typical_projector(&rho, n, d1 + extra).unwrap().retained_mass(&states).unwrap();
        prop_assert!(m2 >= m1 - 1e-12 && m2 <= 1.0 + 1e-12);
    }

    #[test]
    fn lagrangian_gradient_matches_finite_differences(seed in any::<u64>(), letters in 2usize..4, dim in 2usize..4, s in 0.05f64..5.0) {
        let e = random_ensemble(seed, letters, dim, seed % 3 != 0);
        let w = random_channel(seed, letters, letters + 1);
        prop_assert!(gradient_error(&e, &w, s) <= 1e-4);
    }

    #[test]
    fn povm_objective_gradient_matches_finite_differences(seed in any::<u64>(), da in 2usize..4, db in 1usize..3, k in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = BipartiteState::new(da, db, random_state(da * db, da * db, &mut rng)).unwrap();
        prop_assert!(povm_gradient_error(&rho, k, &mut rng) <= 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solver_points_are_consistent(seed in any::<u64>(), letters in 2usize..4, r in 0.0f64..1.5) {
        let e = random_ensemble(seed, letters, 2, seed % 2 == 0);
        let p = solve_dstar(&e, r, &quick_solver()).unwrap();
        let (wr, wd) = eval_pair(&e, &p.channel).unwrap();
        prop_assert!((wr - p.witness_rate).abs() <= 1e-9 && (wd - p.distilled).abs() <= 1e-9);
        prop_assert!(p.witness_rate <= r + 1e-9);
        prop_assert!(p.distilled <= holevo_chi(&e) + 1e-9);
    }

    #[test]
    fn traced_curves_are_monotone_concave_and_plateau(seed in any::<u64>(), letters in 2usize..4) {
        let e = random_ensemble(seed, letters, 2, true);
        let plateau = conditional_entropy_xq(&e);
        let curve = trace_curve(&e, &RGrid::new(0.0, plateau + 0.3, 9).unwrap(), &quick_solver()).unwrap();
        prop_assert!(curve.shape_violations(1e-4).is_empty(), "{:?}", curve.shape_violations(1e-4));
        let last = curve.points.last().unwrap();
        prop_assert!((last.distilled - holevo_chi(&e)).abs() <= 1e-3);
        for p in &curve.points {
            let (wr, wd) = eval_pair(&e, &p.channel).unwrap();
            prop_assert!((wr - p.witness_rate).abs() <= 1e-9 && (wd - p.distilled).abs() <= 1e-9);
        }
    }

    #[test]
    fn measured_searches_respect_holevo(seed in any::<u64>(), letters in 2usize..5, dim in 2usize..4) {
        let e = random_ensemble(seed, letters, dim, seed % 2 == 0);
        let rep = accessible_info(&e, &quick_measurement()).unwrap();
        prop_assert!(rep.povm.completeness_residual() <= 1e-8);
        prop_assert!(rep.value <= holevo_chi(&e) + 1e-9);
        let d1 = d1_infty(&cq_state(&e), &quick_measurement()).unwrap();
        prop_assert!(d1.povm.completeness_residual() <= 1e-8);
        prop_assert!((d1.value - holevo_chi(&e)).abs() <= 1e-4, "{} vs {}", d1.value, holevo_chi(&e));
    }
}

#[test]
fn measured_curve_dominates_fixed_measurements() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let states = [
        BipartiteState::schmidt_pair(0.5),
        BipartiteState::new(2, 2, random_state(4, 2, &mut rng)).unwrap(),
    ];
    let grid = RGrid::new(0.0, 1.2, 7).unwrap();
    for rho in &states {
        let c1 = c1_curve(rho, &grid, &quick_solver(), &quick_measurement()).unwrap();
        for povm in [Povm::computational(2), random_povm(2, 3, &mut rng)] {
            let fixed = trace_curve(
                &measure_ensemble(rho, &povm).unwrap(),
                &grid,
                &quick_solver(),
            )
            .unwrap();
            for ((p, q), hull) in c1.curve.points.iter().zip(&fixed.points).zip(&c1.hull) {
                assert!(
                    hull.max(p.distilled) >= q.distilled - 2e-3,
                    "R = {}: {} < {}",
                    p.comm_rate,
                    p.distilled,
                    q.distilled
                );
            }
        }
        assert!(
            measured_information(rho, &Povm::computational(2)).unwrap()
                <= d1_infty(rho, &quick_measurement()).unwrap().value + 1e-9
        );
    }
}

fn common_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()).sum()
}

/// `‖g_fd − g‖∞ / ‖g‖∞` with central differences of step `1e-5`.
fn gradient_error(e: &CQEnsemble, w: &AuxChannel, s: f64) -> f64 {
    let (_, g) = lagrangian_gradient(e, w, s).unwrap();
    let x = w.entries().to_vec();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[i] += h;
        xm[i] -= h;
        let fd = (lagrangian_value(e, &xp, w.out_size(), s)
            - lagrangian_value(e, &xm, w.out_size(), s))
            / (2.0 * h);
        worst = worst.max((fd - g[i]).abs());
    }
    worst / g.iter().fold(1e-8f64, |m, v| m.max(v.abs()))
}

fn povm_gradient_error(rho: &BipartiteState, k: usize, rng: &mut ChaCha8Rng) -> f64 {
    let obj = PovmObjective::new(rho, k);
    let x: Vec<f64> = (0..obj.n_params())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let (_, g) = obj.value_and_gradient(&x);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[i] += h;
        xm[i] -= h;
        let fd = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs());
    }
    worst / g.iter().fold(1e-8f64, |m, v| m.max(v.abs()))
}
