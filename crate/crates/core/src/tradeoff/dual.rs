//! The compression curve `Q*(R) = min { H(Q|U) : I(U;X) = R }` for pure-state
//! ensembles, computed by a penalty method, and the identity linking it to `D*`.

use rayon::prelude::*;

use super::model::{softmax_pullback, softmax_rows, to_logits, Model};
use super::{solve_dstar_many, RGrid, SolverConfig};
use crate::ensembles::{AuxChannel, CQEnsemble};
use crate::error::{Error, Result};
use crate::linalg::vn_entropy;
use crate::optim::{dirichlet_row, lbfgs, stream_rng, LbfgsOptions};

/// Accepted equality-constraint violation `|I(U;X) − R|`.
const EQ_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct QstarPoint {
    pub comm_rate: f64,
    pub qstar: f64,
    pub channel: AuxChannel,
}

fn require_pure(e: &CQEnsemble) -> Result<()> {
    if e.is_pure() {
        Ok(())
    } else {
        Err(Error::NotPureEnsemble)
    }
}

/// Largest `I(U;Q)` found with `I(U;X) = r`, and its channel.
fn max_gain_at_rate(
    model: &Model,
    r: f64,
    cfg: &SolverConfig,
    point: u64,
) -> Option<(f64, Vec<f64>)> {
    let (m, k) = (model.m, model.m + 1);
    let mut starts: Vec<Option<u64>> = (0..cfg.starts.max(4) as u64).map(Some).collect();
    starts.insert(0, None);
    let results: Vec<Option<(f64, Vec<f64>)>> = starts
        .into_par_iter()
        .map(|st| {
            let w0: Vec<f64> = match st {
                // start from a mixture of identity and constant tuned only by the rate scale
                None => {
                    let hx = crate::info::entropy_of(&model.p);
                    let t = if hx > 0.0 {
                        (r / hx).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    let id = AuxChannel::identity_padded(m, k);
                    let cs = AuxChannel::constant(m, k);
                    id.entries()
                        .iter()
                        .zip(cs.entries())
                        .map(|(a, b)| t * a + (1.0 - t) * b)
                        .map(|v| 0.98 * v + 0.02 / k as f64)
                        .collect()
                }
                Some(i) => {
                    let mut rng = stream_rng(cfg.seed ^ 0x5157_4152, point, i);
                    (0..m).flat_map(|_| dirichlet_row(k, &mut rng)).collect()
                }
            };
            let mut theta = to_logits(&w0);
            let (mut lambda, mut mu) = (0.0f64, 20.0f64);
            for _ in 0..12 {
                let f = |th: &[f64], grad: &mut [f64]| {
                    let w = softmax_rows(th, k);
                    let a = model.analyze(&w, k);
                    let (g_uq, g_ux) = model.gradients(&w, k, &a);
                    let c = a.i_ux - r;
                    let val = a.i_uq - lambda * c - 0.5 * mu * c * c;
                    let coef = lambda + mu * c;
                    let gw: Vec<f64> = g_uq
                        .iter()
                        .zip(&g_ux)
                        .map(|(q, x)| q - coef * if x.is_finite() { *x } else { 0.0 })
                        .collect();
                    let gt = softmax_pullback(&w, &gw, k);
                    grad.iter_mut().zip(gt).for_each(|(o, v)| *o = -v);
                    -val
                };
                let res = lbfgs(
                    f,
                    theta,
                    LbfgsOptions {
                        max_iter: 300,
                        rel_tol: 1e-15,
                        window: 10,
                        ..Default::default()
                    },
                );
                theta = res.x;
                let (i_ux, _) = model.evaluate(&softmax_rows(&theta, k), k);
                let c = i_ux - r;
                lambda += mu * c;
                if c.abs() < 1e-11 {
                    break;
                }
                mu = (mu * 4.0).min(1e8);
            }
            let w = softmax_rows(&theta, k);
            let (i_ux, i_uq) = model.evaluate(&w, k);
            ((i_ux - r).abs() <= EQ_TOL).then_some((i_uq, w))
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| r.0 > b.0) {
            best = Some(r);
        }
    }
    best
}

/// `Q*(R)` at a single rate, by direct penalty optimization.
pub fn qstar_point(e: &CQEnsemble, r: f64, cfg: &SolverConfig) -> Result<QstarPoint> {
    require_pure(e)?;
    qstar_point_inner(e, &Model::new(e), r, cfg, 0)
}

fn qstar_point_inner(
    e: &CQEnsemble,
    model: &Model,
    r: f64,
    cfg: &SolverConfig,
    point: u64,
) -> Result<QstarPoint> {
    if !(r >= 0.0) {
        return Err(Error::BadParam(format!("rate {r} must be nonnegative")));
    }
    let (m, k) = (e.len(), e.len() + 1);
    let hq = model.h_avg;
    let hx = e.probs().entropy();
    if r >= hx - 1e-12 {
        return Ok(QstarPoint {
            comm_rate: r,
            qstar: 0.0,
            channel: AuxChannel::identity_padded(m, k),
        });
    }
    if r <= 1e-12 {
        return Ok(QstarPoint {
            comm_rate: r,
            qstar: hq,
            channel: AuxChannel::constant(m, k),
        });
    }
    match max_gain_at_rate(model, r, cfg, point) {
        Some((gain, w)) => Ok(QstarPoint {
            comm_rate: r,
            qstar: (hq - gain).max(0.0),
            channel: AuxChannel::from_flat(m, k, w),
        }),
        None => Err(Error::BadParam(format!(
            "no start met the rate constraint at R = {r}"
        ))),
    }
}

/// `Q*` on a grid as the lower convex envelope of the directly optimized points,
/// together with `(0, H(Q))` and `(H(X), 0)`.
pub fn qstar_curve(e: &CQEnsemble, grid: &RGrid, cfg: &SolverConfig) -> Result<Vec<(f64, f64)>> {
    require_pure(e)?;
    let model = Model::new(e);
    let hx = e.probs().entropy();
    let mut pts = vec![(0.0, model.h_avg), (hx, 0.0)];
    for (i, r) in grid.values().into_iter().enumerate() {
        if let Ok(q) = qstar_point_inner(e, &model, r, cfg, i as u64) {
            pts.push((r, q.qstar));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        if hull.last().is_some_and(|l| (l.0 - p.0).abs() < 1e-15) {
            continue;
        }
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(grid
        .values()
        .into_iter()
        .map(|r| {
            if r >= hx {
                return (r, 0.0);
            }
            let j = hull.partition_point(|p| p.0 <= r).clamp(1, hull.len() - 1);
            let (a, b) = (hull[j - 1], hull[j]);
            (r, a.1 + (b.1 - a.1) * (r - a.0) / (b.0 - a.0))
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct DualityReport {
    /// `(x, D*(x), Q*(D*(x) + x), residual)` per requested point.
    pub rows: Vec<(f64, f64, f64, f64)>,
    pub h_q: f64,
    pub max_residual: f64,
}

/// Residuals of `D*(x) + Q*(D*(x) + x) = H(Q)`.
pub fn check_duality(e: &CQEnsemble, xs: &[f64], cfg: &SolverConfig) -> Result<DualityReport> {
    require_pure(e)?;
    let model = Model::new(e);
    let h_q = vn_entropy(&e.average_state());
    let dpts = solve_dstar_many(e, xs, cfg)?;
    let mut rows = Vec::with_capacity(xs.len());
    for (i, (x, dp)) in xs.iter().zip(&dpts).enumerate() {
        let q = qstar_point_inner(e, &model, dp.distilled + x, cfg, 1000 + i as u64)?;
        rows.push((
            *x,
            dp.distilled,
            q.qstar,
            (dp.distilled + q.qstar - h_q).abs(),
        ));
    }
    let max_residual = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    Ok(DualityReport {
        rows,
        h_q,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::named_ensemble;
    use crate::linalg::DensityMatrix;

    #[test]
    fn qstar_endpoints() {
        let e = named_ensemble("two_state", &[]).unwrap();
        let cfg = SolverConfig {
            starts: 4,
            ..Default::default()
        };
        let hq = vn_entropy(&e.average_state());
        assert!((qstar_point(&e, 0.0, &cfg).unwrap().qstar - hq).abs() < 1e-12);
        assert_eq!(qstar_point(&e, 1.0, &cfg).unwrap().qstar, 0.0);
        let mixed = crate::ensembles::trivial_ensemble(DensityMatrix::maximally_mixed(2));
        assert!(matches!(
            qstar_point(&mixed, 0.5, &cfg),
            Err(Error::NotPureEnsemble)
        ));
    }
}
