use super::{eval_pair, solve_dstar, trace_curve, RGrid, SolverConfig};
use crate::ensembles::{AuxChannel, CQEnsemble};
use crate::error::{Error, Result};

/// Largest product alphabet handled by the joint optimization.
pub const JOINT_MAX_ALPHABET: usize = 6;
const SPLIT_POINTS: usize = 41;

#[derive(Clone, Debug)]
pub struct AdditivityReport {
    pub comm_rate: f64,
    /// Joint optimizer on the product ensemble.
    pub joint_solver: f64,
    /// Product of the per-factor witnesses at the best split; a certified lower bound on the joint value.
    pub joint_product: f64,
    /// `max(joint_solver, joint_product)`.
    pub lhs: f64,
    /// `max_{R₁+R₂=R} D*₁(R₁) + D*₂(R₂)`.
    pub rhs: f64,
    pub best_split: (f64, f64),
    pub gap: f64,
}

/// `W₁ ⊗ W₂` on inputs `x₁·|X₂| + x₂` and outputs `u₁·|U₂| + u₂`.
pub fn product_channel(w1: &AuxChannel, w2: &AuxChannel) -> AuxChannel {
    let (k1, k2) = (w1.out_size(), w2.out_size());
    let mut rows = Vec::with_capacity(w1.in_size() * w2.in_size());
    for x1 in 0..w1.in_size() {
        for x2 in 0..w2.in_size() {
            let mut row = vec![0.0; k1 * k2];
            for u1 in 0..k1 {
                for u2 in 0..k2 {
                    row[u1 * k2 + u2] = w1.get(x1, u1) * w2.get(x2, u2);
                }
            }
            rows.push(row);
        }
    }
    AuxChannel::from_flat(w1.in_size() * w2.in_size(), k1 * k2, rows.concat())
}

/// Compares `D*` of the product ensemble with the best split of the rate between the factors.
pub fn check_additivity(
    e1: &CQEnsemble,
    e2: &CQEnsemble,
    r: f64,
    cfg: &SolverConfig,
) -> Result<AdditivityReport> {
    let joint_size = e1.len() * e2.len();
    if joint_size > JOINT_MAX_ALPHABET {
        return Err(Error::EnvelopeExceeded(format!(
            "product alphabet {joint_size} exceeds {JOINT_MAX_ALPHABET}"
        )));
    }
    if !(r >= 0.0) {
        return Err(Error::BadParam(format!("rate {r} must be nonnegative")));
    }
    let joint = e1.tensor(e2);
    let grid = if r > 0.0 {
        RGrid::new(0.0, r, SPLIT_POINTS)?
    } else {
        RGrid::new(0.0, 0.0, 1)?
    };
    let c1 = trace_curve(e1, &grid, cfg)?;
    let c2 = trace_curve(e2, &grid, cfg)?;
    let n = c1.points.len();
    let mut best = (f64::NEG_INFINITY, 0);
    for i in 0..n {
        let v = c1.points[i].distilled + c2.points[n - 1 - i].distilled;
        if v > best.0 {
            best = (v, i);
        }
    }
    let (rhs, i) = best;
    let (p1, p2) = (&c1.points[i], &c2.points[n - 1 - i]);
    let prod = product_channel(&p1.channel, &p2.channel);
    let (prod_rate, prod_gain) = eval_pair(&joint, &prod)?;
    let joint_product = if prod_rate <= r + cfg.feas_tol {
        prod_gain
    } else {
        f64::NEG_INFINITY
    };
    let joint_solver = solve_dstar(&joint, r, cfg)?.distilled;
    let lhs = joint_solver.max(joint_product);
    Ok(AdditivityReport {
        comm_rate: r,
        joint_solver,
        joint_product,
        lhs,
        rhs,
        best_split: (p1.comm_rate, p2.comm_rate),
        gap: lhs - rhs,
    })
}
