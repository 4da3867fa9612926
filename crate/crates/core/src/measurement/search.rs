use rayon::prelude::*;

use super::objective::PovmObjective;
use super::povm::{gaussian_ket, Povm};
use crate::ensembles::{
    measure_ensemble, swapped_embedding, BipartiteState, CQEnsemble, ProbVector,
};
use crate::error::{Error, Result};
use crate::info::{entanglement_entropy, holevo_chi};
use crate::linalg::{c, ComplexMatrix, DensityMatrix, C64};
use crate::optim::{lbfgs, stream_rng, LbfgsOptions};
use crate::tradeoff::{trace_curve, CurvePoint, RGrid, SolverConfig, TradeoffCurve};

/// Largest measured dimension handled by the POVM search.
pub const MEASURE_MAX_DIM: usize = 4;

#[derive(Clone, Debug)]
pub struct MeasurementConfig {
    pub seed: u64,
    /// Random starts on top of the basis-aligned ones.
    pub starts: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    /// Random measurements added to the candidate set of [`c1_curve`].
    pub curve_measurements: usize,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            starts: 16,
            max_iter: 3000,
            rel_tol: 1e-13,
            curve_measurements: 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MeasurementReport {
    pub value: f64,
    pub povm: Povm,
    pub n_outcomes: usize,
    pub converged: bool,
}

/// `I(X;B)` when Alice measures `m`, i.e. the Holevo quantity of Bob's induced ensemble.
pub fn measured_information(rho: &BipartiteState, m: &Povm) -> Result<f64> {
    Ok(holevo_chi(&measure_ensemble(rho, m)?))
}

fn check_envelope(dim: usize) -> Result<()> {
    if dim > MEASURE_MAX_DIM {
        return Err(Error::EnvelopeExceeded(format!(
            "measured dimension {dim} exceeds {MEASURE_MAX_DIM}; reduce the local dimension"
        )));
    }
    Ok(())
}

fn basis_kets(u: &ComplexMatrix, total: usize) -> Vec<Vec<C64>> {
    let d = u.rows();
    let mut kets: Vec<Vec<C64>> = (0..d).map(|j| u.column(j)).collect();
    kets.resize(total, vec![c(0.0, 0.0); d]);
    kets
}

/// Merges outcomes with proportional rank-one effects and drops empty ones.
fn compress(p: &Povm) -> Povm {
    let mut kept: Vec<ComplexMatrix> = Vec::new();
    for e in p.pruned(1e-12).elements() {
        let te = e.trace().re;
        let twin = kept.iter_mut().find(|k| {
            let tk = k.trace().re;
            let overlap = e.trace_product_re(k);
            overlap >= (1.0 - 1e-10) * te * tk && is_rank_one(k) && is_rank_one(e)
        });
        match twin {
            Some(k) => k.add_scaled(e, 1.0),
            None => kept.push(e.clone()),
        }
    }
    Povm::new(kept).unwrap_or_else(|_| p.pruned(1e-12))
}

fn is_rank_one(m: &ComplexMatrix) -> bool {
    let t = m.trace().re;
    (m.trace_product_re(m) - t * t).abs() <= 1e-10 * t * t
}

/// `max_M I(X;B)` over rank-one POVMs with `dim_a²` outcomes on Alice's side.
pub fn d1_infty(rho: &BipartiteState, cfg: &MeasurementConfig) -> Result<MeasurementReport> {
    let da = rho.dim_a();
    check_envelope(da)?;
    let k = da * da;
    let obj = PovmObjective::new(rho, k);
    let mut starts: Vec<Vec<Vec<C64>>> = vec![
        basis_kets(&ComplexMatrix::identity(da), k),
        basis_kets(&rho.reduced_a().spectrum().eigenvectors, k),
    ];
    for i in 0..cfg.starts as u64 {
        let mut rng = stream_rng(cfg.seed, 0, i);
        starts.push((0..k).map(|_| gaussian_ket(da, &mut rng)).collect());
    }
    let opts = LbfgsOptions {
        max_iter: cfg.max_iter,
        rel_tol: cfg.rel_tol,
        window: 20,
        grad_tol: 1e-12,
        ..Default::default()
    };
    let results: Vec<(f64, Vec<f64>, bool)> = starts
        .into_par_iter()
        .map(|kets| {
            let x0 = PovmObjective::params(&kets);
            let start_value = obj.value(&x0);
            let res = lbfgs(
                |x, g| {
                    let (v, gr) = obj.value_and_gradient(x);
                    g.iter_mut().zip(gr).for_each(|(o, v)| *o = -v);
                    -v
                },
                x0.clone(),
                opts,
            );
            if -res.value >= start_value {
                (-res.value, res.x, res.converged)
            } else {
                (start_value, x0, true)
            }
        })
        .collect();
    let mut pick = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 > results[pick].0 + 1e-12 {
            pick = i;
        }
    }
    let (_, x, converged) = &results[pick];
    let povm = compress(&Povm::from_kets(&obj.kets(x))?);
    let value = measured_information(rho, &povm)?;
    Ok(MeasurementReport {
        value,
        n_outcomes: povm.len(),
        povm,
        converged: *converged,
    })
}

/// `max_M I(X;Y)` for a measurement `M` on the ensemble's quantum system.
pub fn accessible_info(e: &CQEnsemble, cfg: &MeasurementConfig) -> Result<MeasurementReport> {
    check_envelope(e.dim())?;
    let mut rep = d1_infty(&swapped_embedding(e), cfg)?;
    let chi = holevo_chi(e);
    if rep.value > chi + 1e-9 {
        log::error!(
            "accessible information {} exceeds the Holevo quantity {chi}",
            rep.value
        );
        rep.converged = false;
    }
    Ok(rep)
}

/// Measured trade-off curve: pointwise max over candidate measurements, and its concave hull.
#[derive(Clone, Debug)]
pub struct C1Curve {
    /// Raw pointwise maximum; each witness channel acts on the outcome of `povms[measurement[i]]`.
    pub curve: TradeoffCurve,
    pub measurement: Vec<usize>,
    pub povms: Vec<Povm>,
    /// Upper concave envelope of the raw maximum on the same grid.
    pub hull: Vec<f64>,
}

/// The `L = 1` trade-off curve of a bipartite state, with Alice measuring first.
pub fn c1_curve(
    rho: &BipartiteState,
    grid: &RGrid,
    cfg: &SolverConfig,
    mcfg: &MeasurementConfig,
) -> Result<C1Curve> {
    let da = rho.dim_a();
    check_envelope(da)?;
    let mut povms = vec![
        Povm::computational(da),
        Povm::from_basis(&rho.reduced_a().spectrum().eigenvectors),
        d1_infty(rho, mcfg)?.povm,
    ];
    for i in 0..mcfg.curve_measurements as u64 {
        let mut rng = stream_rng(mcfg.seed, 1, i);
        povms.push(super::random_povm(da, da, &mut rng));
    }
    let curves: Vec<TradeoffCurve> = povms
        .iter()
        .map(|m| trace_curve(&measure_ensemble(rho, m)?, grid, cfg))
        .collect::<Result<_>>()?;
    let n = grid.values().len();
    let mut measurement = vec![0; n];
    let mut points: Vec<CurvePoint> = curves[0].points.clone();
    let mut warnings = Vec::new();
    for (j, cv) in curves.iter().enumerate() {
        warnings.extend(cv.warnings.iter().map(|w| format!("measurement {j}: {w}")));
        for i in 0..n {
            if cv.points[i].distilled > points[i].distilled + 1e-12 {
                points[i] = cv.points[i].clone();
                measurement[i] = j;
            }
        }
    }
    let rates = grid.values();
    let raw: Vec<f64> = points.iter().map(|p| p.distilled).collect();
    let hull = concave_hull(&rates, &raw);
    let curve = TradeoffCurve {
        ensemble_id: "measured".into(),
        points,
        chi: curves.iter().map(|c| c.chi).fold(0.0, f64::max),
        sw: curves[2].sw,
        warnings,
    };
    Ok(C1Curve {
        curve,
        measurement,
        povms,
        hull,
    })
}

/// Upper concave envelope of `(x_i, y_i)` evaluated back at the `x_i`.
fn concave_hull(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..x.len() {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (x[a] - x[o]) * (y[i] - y[o]) - (y[a] - y[o]) * (x[i] - x[o]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = Vec::with_capacity(x.len());
    let mut seg = 0;
    for i in 0..x.len() {
        while seg + 1 < hull.len() && x[hull[seg + 1]] < x[i] {
            seg += 1;
        }
        if seg + 1 == hull.len() || x[hull[seg]] == x[i] {
            out.push(y[hull[seg]].max(y[i]));
        } else {
            let (a, b) = (hull[seg], hull[seg + 1]);
            let t = (x[i] - x[a]) / (x[b] - x[a]);
            out.push(y[a] + t * (y[b] - y[a]));
        }
    }
    out
}

/// `d1_infty(ρ ⊗ σ)` against `d1_infty(ρ) + d1_infty(σ)`.
#[derive(Clone, Debug)]
pub struct MeasuredAdditivity {
    pub first: MeasurementReport,
    pub second: MeasurementReport,
    /// Optimizer on the joint state.
    pub joint_solver: f64,
    /// The tensor product of the factor witnesses on the joint state; certifies `joint ≥ sum`.
    pub joint_product: f64,
    pub joint: f64,
    pub sum: f64,
    pub gap: f64,
    /// For a pure first factor: `(entanglement entropy, |d1_infty − entropy|)`.
    pub entanglement: Option<(f64, f64)>,
}

fn measured_additivity(
    rho: &BipartiteState,
    sigma: &BipartiteState,
    cfg: &MeasurementConfig,
) -> Result<MeasuredAdditivity> {
    let joint_dim = rho.dim_a() * sigma.dim_a();
    if joint_dim > MEASURE_MAX_DIM {
        return Err(Error::EnvelopeExceeded(format!(
            "joint measured dimension {joint_dim} exceeds {MEASURE_MAX_DIM}"
        )));
    }
    let first = d1_infty(rho, cfg)?;
    let second = d1_infty(sigma, cfg)?;
    let joint_state = rho.tensor(sigma);
    let joint_product = measured_information(&joint_state, &first.povm.tensor(&second.povm))?;
    let joint_solver = d1_infty(&joint_state, cfg)?.value;
    let joint = joint_solver.max(joint_product);
    let sum = first.value + second.value;
    Ok(MeasuredAdditivity {
        first,
        second,
        joint_solver,
        joint_product,
        joint,
        sum,
        gap: joint - sum,
        entanglement: None,
    })
}

/// Additivity check with a separable first factor `Σ_j q_j τ̂_j ⊗ τ_j`.
pub fn check_separable_additivity(
    weights: &ProbVector,
    parts: &[(DensityMatrix, DensityMatrix)],
    sigma: &BipartiteState,
    cfg: &MeasurementConfig,
) -> Result<MeasuredAdditivity> {
    let rho = BipartiteState::separable(weights, parts)?;
    measured_additivity(&rho, sigma, cfg)
}

/// Additivity check with a pure first factor; also compares its value with the entanglement entropy.
pub fn check_pure_additivity(
    psi: &BipartiteState,
    sigma: &BipartiteState,
    cfg: &MeasurementConfig,
) -> Result<MeasuredAdditivity> {
    let entropy = entanglement_entropy(psi)?;
    let mut rep = measured_additivity(psi, sigma, cfg)?;
    rep.entanglement = Some((entropy, (rep.first.value - entropy).abs()));
    Ok(rep)
}

/// Best projective measurement in the real plane of a qubit: `(angle, value)` over `steps + 1` angles in `[0, π]`.
pub fn projective_scan(rho: &BipartiteState, steps: usize) -> Result<(f64, f64)> {
    if rho.dim_a() != 2 {
        return Err(Error::DimensionMismatch(
            "projective scan needs a qubit on the measured side".into(),
        ));
    }
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=steps {
        let t = std::f64::consts::PI * i as f64 / steps as f64;
        let v = measured_information(rho, &real_projective(t))?;
        if v > best.1 {
            best = (t, v);
        }
    }
    Ok(best)
}

/// Projectors onto `cos(t/2)|0⟩ + sin(t/2)|1⟩` and its orthogonal complement.
pub fn real_projective(t: f64) -> Povm {
    let (cs, sn) = ((t / 2.0).cos(), (t / 2.0).sin());
    let u = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c(cs, 0.0),
        (1, 0) => c(sn, 0.0),
        (0, 1) => c(-sn, 0.0),
        _ => c(cs, 0.0),
    });
    Povm::from_basis(&u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{cq_state, named_ensemble, orthogonal_pair};
    use crate::info::binary_entropy;

    fn quick() -> MeasurementConfig {
        MeasurementConfig {
            starts: 4,
            max_iter: 800,
            ..Default::default()
        }
    }

    #[test]
    fn bell_and_product() {
        let rep = d1_infty(&BipartiteState::bell(), &quick()).unwrap();
        assert!((rep.value - 1.0).abs() < 1e-6, "{}", rep.value);
        assert!(rep.povm.completeness_residual() <= 1e-8);
        let prod = BipartiteState::product(
            &DensityMatrix::basis(2, 0),
            &DensityMatrix::maximally_mixed(2),
        );
        assert!(d1_infty(&prod, &quick()).unwrap().value.abs() < 1e-9);
    }

    #[test]
    fn schmidt_states_reach_entanglement_entropy() {
        let t = std::f64::consts::PI / 6.0;
        let rep = d1_infty(&BipartiteState::schmidt_pair(t), &quick()).unwrap();
        let h = binary_entropy(t.sin().powi(2)).unwrap();
        assert!((rep.value - h).abs() < 1e-6);
    }

    #[test]
    fn accessible_information_examples() {
        let rep = accessible_info(&orthogonal_pair(), &quick()).unwrap();
        assert!((rep.value - 1.0).abs() < 1e-9);
        let e = named_ensemble("two_state", &[]).unwrap();
        let rep = accessible_info(&e, &quick()).unwrap();
        let (_, scan) = projective_scan(&swapped_embedding(&e), 720).unwrap();
        assert!(
            (rep.value - 0.399124).abs() < 1e-4 && rep.value >= scan - 1e-9,
            "{} {scan}",
            rep.value
        );
        assert!(rep.value < holevo_chi(&e));
        let re = measured_information(&swapped_embedding(&e), &rep.povm).unwrap();
        assert!((re - rep.value).abs() < 1e-8);
    }

    #[test]
    fn classical_side_measurement_recovers_holevo() {
        let e = named_ensemble("three_state", &[]).unwrap();
        let rep = d1_infty(&cq_state(&e), &quick()).unwrap();
        assert!((rep.value - holevo_chi(&e)).abs() < 1e-4);
    }

    #[test]
    fn hull_dominates_raw() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.0, 0.2, 1.0, 1.1];
        let h = concave_hull(&x, &y);
        assert!(h.iter().zip(&y).all(|(a, b)| a >= b));
        assert!((h[1] - 0.5).abs() < 1e-12);
    }
}
