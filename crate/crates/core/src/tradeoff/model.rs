//! Flat-array evaluation of the rate/gain pair, its gradients, and the
//! per-start local maximizer of `D − s·R`.

use crate::ensembles::{AuxChannel, CQEnsemble};
use crate::info::entropy_of;
use crate::linalg::{eigh, vn_entropy, xlog2x_neg, ComplexMatrix, C64};
use crate::optim::{lbfgs, LbfgsOptions};

const EIG_FLOOR: f64 = 1e-300;
const LIVE_MASS: f64 = 1e-300;
const LOGIT_FLOOR: f64 = -700.0;

/// Precomputed ensemble data; channels are row-major `m × k` slices.
pub(crate) struct Model {
    pub m: usize,
    pub d: usize,
    pub p: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    /// Row-major entries of every state, `m × d²`.
    flat: Vec<C64>,
    pub h_avg: f64,
}

/// Quantities of one channel.
pub(crate) struct Analysis {
    pub i_ux: f64,
    pub i_uq: f64,
    pub pu: Vec<f64>,
    /// `Tr ρ_x log₂ ρ_u`, row-major `m × k`; zero where `p(u) = 0`.
    pub cross: Vec<f64>,
}

impl Analysis {
    pub fn rate(&self) -> f64 {
        self.i_ux - self.i_uq
    }
}

impl Model {
    pub fn new(e: &CQEnsemble) -> Self {
        Self {
            m: e.len(),
            d: e.dim(),
            p: e.probs().as_slice().to_vec(),
            states: e.states().iter().map(|s| s.matrix().clone()).collect(),
            flat: e
                .states()
                .iter()
                .flat_map(|s| s.matrix().data().to_vec())
                .collect(),
            h_avg: vn_entropy(&e.average_state()),
        }
    }

    pub fn output_distribution(&self, w: &[f64], k: usize) -> Vec<f64> {
        let mut pu = vec![0.0; k];
        for x in 0..self.m {
            for u in 0..k {
                pu[u] += self.p[x] * w[x * k + u];
            }
        }
        pu
    }

    /// `Σ_x p(x) Σ_u W log₂ W`, i.e. `−H(U|X)`, without row normalization.
    fn neg_cond_entropy(&self, w: &[f64], k: usize) -> f64 {
        (0..self.m)
            .map(|x| -self.p[x] * entropy_of(&w[x * k..(x + 1) * k]))
            .sum()
    }

    /// Unnormalized conditional states `Σ_x p(x) W(u|x) ρ_x`, flattened `k × d²`.
    fn conditional_states(&self, w: &[f64], k: usize) -> Vec<C64> {
        let dd = self.d * self.d;
        let mut sig = vec![C64::new(0.0, 0.0); k * dd];
        for x in 0..self.m {
            let rho = &self.flat[x * dd..(x + 1) * dd];
            for (u, &wu) in w[x * k..(x + 1) * k].iter().enumerate() {
                let wt = self.p[x] * wu;
                if wt > 0.0 {
                    for (o, r) in sig[u * dd..(u + 1) * dd].iter_mut().zip(rho) {
                        *o += r * wt;
                    }
                }
            }
        }
        sig
    }

    fn block(&self, sig: &[C64], u: usize) -> ComplexMatrix {
        let (d, dd) = (self.d, self.d * self.d);
        ComplexMatrix::from_fn(d, d, |i, j| sig[u * dd + i * d + j])
    }

    /// Mutual informations only, no gradients.
    pub fn evaluate(&self, w: &[f64], k: usize) -> (f64, f64) {
        let pu = self.output_distribution(w, k);
        let h_u = entropy_of(&pu);
        let sig = self.conditional_states(w, k);
        let mut blocks = 0.0;
        for u in 0..k {
            if pu[u] > LIVE_MASS {
                blocks += eigh(&self.block(&sig, u))
                    .eigenvalues
                    .iter()
                    .map(|&l| xlog2x_neg(l.max(0.0)))
                    .sum::<f64>();
            }
        }
        (h_u + self.neg_cond_entropy(w, k), self.h_avg + h_u - blocks)
    }

    /// Mutual informations plus the cross terms needed for gradients and the fixed-point update.
    pub fn analyze(&self, w: &[f64], k: usize) -> Analysis {
        let (d, dd) = (self.d, self.d * self.d);
        let pu = self.output_distribution(w, k);
        let h_u = entropy_of(&pu);
        let sig = self.conditional_states(w, k);
        let mut blocks = 0.0;
        let mut cross = vec![0.0; self.m * k];
        let mut logm = vec![C64::new(0.0, 0.0); dd];
        for u in 0..k {
            if pu[u] <= LIVE_MASS {
                continue;
            }
            let spec = eigh(&self.block(&sig, u));
            let v = &spec.eigenvectors;
            let mut logs = Vec::with_capacity(d);
            for &l in &spec.eigenvalues {
                blocks += xlog2x_neg(l.max(0.0));
                logs.push((l.max(EIG_FLOOR) / pu[u]).log2());
            }
            // log₂(ρ_u) − log₂ p(u), transposed so the trace below runs over contiguous memory
            for i in 0..d {
                for j in 0..d {
                    logm[j * d + i] = (0..d).map(|l| v[(i, l)] * v[(j, l)].conj() * logs[l]).sum();
                }
            }
            for x in 0..self.m {
                let rho = &self.flat[x * dd..(x + 1) * dd];
                cross[x * k + u] = rho
                    .iter()
                    .zip(&logm)
                    .map(|(a, b)| a.re * b.re - a.im * b.im)
                    .sum();
            }
        }
        Analysis {
            i_ux: h_u + self.neg_cond_entropy(w, k),
            i_uq: self.h_avg + h_u - blocks,
            pu,
            cross,
        }
    }

    /// Gradients of `I(U;Q)` and `I(U;X)` with respect to the raw entries `W(u|x)`.
    pub fn gradients(&self, w: &[f64], k: usize, a: &Analysis) -> (Vec<f64>, Vec<f64>) {
        let mut g_uq = vec![0.0; self.m * k];
        let mut g_ux = vec![0.0; self.m * k];
        for x in 0..self.m {
            for u in 0..k {
                let i = x * k + u;
                g_uq[i] = self.p[x] * a.cross[i];
                if w[i] > 0.0 && a.pu[u] > 0.0 {
                    g_ux[i] = self.p[x] * (w[i] / a.pu[u]).log2();
                } else {
                    g_ux[i] = f64::NEG_INFINITY;
                }
            }
        }
        (g_uq, g_ux)
    }

    /// `G_s = (1+s) I(U;Q) − s I(U;X)` and its gradient in raw entries.
    pub fn lagrangian_grad(&self, w: &[f64], k: usize, s: f64) -> (f64, Vec<f64>) {
        let a = self.analyze(w, k);
        let (g_uq, g_ux) = self.gradients(w, k, &a);
        let g = g_uq
            .iter()
            .zip(&g_ux)
            .map(|(q, x)| (1.0 + s) * q - s * x)
            .collect();
        ((1.0 + s) * a.i_uq - s * a.i_ux, g)
    }

    /// One fixed-point step `W(u|x) ∝ p(u) 2^{β Tr ρ_x log₂ ρ_u}`, `β = (1+s)/s`, also
    /// writing `ln W` (floored at `LOGIT_FLOOR`) into `logs`.
    fn fixed_point_step(&self, w: &mut [f64], logs: &mut [f64], k: usize, beta: f64, a: &Analysis) {
        let lpu: Vec<f64> =
            a.pu.iter()
                .map(|&p| {
                    if p > LIVE_MASS {
                        p.log2()
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect();
        let mut expo = vec![f64::NEG_INFINITY; k];
        for x in 0..self.m {
            for u in 0..k {
                let e = lpu[u] + beta * a.cross[x * k + u];
                expo[u] = if e.is_finite() { e } else { f64::NEG_INFINITY };
            }
            let top = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let row = &mut w[x * k..(x + 1) * k];
            let mut total = 0.0;
            for u in 0..k {
                row[u] = (expo[u] - top).exp2();
                total += row[u];
            }
            row.iter_mut().for_each(|v| *v /= total);
            let shift = top + total.log2();
            for (l, e) in logs[x * k..(x + 1) * k].iter_mut().zip(&expo) {
                *l = ((e - shift) * std::f64::consts::LN_2).max(LOGIT_FLOOR);
            }
        }
    }
}

/// Row-wise softmax together with the floored natural logs of the result.
fn log_softmax_rows(theta: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut w = theta.to_vec();
    let mut logs = theta.to_vec();
    for (row, lrow) in w.chunks_mut(k).zip(logs.chunks_mut(k)) {
        let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - top).exp();
            total += *v;
        }
        row.iter_mut().for_each(|v| *v /= total);
        let shift = top + total.ln();
        lrow.iter_mut()
            .for_each(|l| *l = (*l - shift).max(LOGIT_FLOOR));
    }
    (w, logs)
}

pub(crate) fn softmax_rows(theta: &[f64], k: usize) -> Vec<f64> {
    let mut w = theta.to_vec();
    for row in w.chunks_mut(k) {
        let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - top).exp();
            total += *v;
        }
        row.iter_mut().for_each(|v| *v /= total);
    }
    w
}

/// Chain rule through the row-wise softmax.
pub(crate) fn softmax_pullback(w: &[f64], g: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    for ((wr, gr), or) in w.chunks(k).zip(g.chunks(k)).zip(out.chunks_mut(k)) {
        let mean: f64 = wr
            .iter()
            .zip(gr)
            .filter(|(wv, _)| **wv > 0.0)
            .map(|(wv, gv)| wv * gv)
            .sum();
        for u in 0..k {
            or[u] = if wr[u] > 0.0 {
                wr[u] * (gr[u] - mean)
            } else {
                0.0
            };
        }
    }
    out
}

pub(crate) fn to_logits(w: &[f64]) -> Vec<f64> {
    w.iter()
        .map(|&v| {
            if v > 0.0 {
                v.ln().max(LOGIT_FLOOR)
            } else {
                LOGIT_FLOOR
            }
        })
        .collect()
}

/// Result of one local maximization.
#[derive(Clone, Debug)]
pub(crate) struct LocalMax {
    pub w: Vec<f64>,
    pub objective: f64,
    pub rate: f64,
    pub gain: f64,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LocalOptions {
    pub max_iter: usize,
    pub rel_tol: f64,
    pub window: usize,
    pub polish_iter: usize,
}

/// Maximizes `D − s R` from `w0`: fixed-point iteration, then softmax-space L-BFGS polish.
pub(crate) fn local_maximize(
    model: &Model,
    k: usize,
    s: f64,
    w0: Vec<f64>,
    opts: LocalOptions,
) -> LocalMax {
    let value = |i_ux: f64, i_uq: f64| (1.0 + s) * i_uq - s * i_ux;
    let mut w = w0;
    let mut converged = false;
    if s > 0.0 {
        let beta = (1.0 + s) / s;
        let step = |w: &[f64], a: &Analysis| -> Option<(Vec<f64>, Vec<f64>)> {
            let mut next = w.to_vec();
            let mut logs = vec![0.0; w.len()];
            model.fixed_point_step(&mut next, &mut logs, k, beta, a);
            next.iter().all(|v| v.is_finite()).then_some((next, logs))
        };
        // SQUAREM: two plain steps, an extrapolated candidate in log space, keep the better
        let mut a = model.analyze(&w, k);
        let mut l0 = to_logits(&w);
        let mut trail = vec![value(a.i_ux, a.i_uq)];
        let window = (opts.window / 3).max(5);
        let mut iter = 0;
        while iter < opts.max_iter {
            let Some((w1, l1)) = step(&w, &a) else { break };
            let a1 = model.analyze(&w1, k);
            let Some((w2, l2)) = step(&w1, &a1) else {
                w = w1;
                break;
            };
            let a2 = model.analyze(&w2, k);
            iter += 3;
            let r: Vec<f64> = l1.iter().zip(&l0).map(|(x, y)| x - y).collect();
            let v: Vec<f64> = l2
                .iter()
                .zip(&l1)
                .zip(&l0)
                .map(|((x2, x1), x0)| x2 - 2.0 * x1 + x0)
                .collect();
            let (nr, nv) = (norm(&r), norm(&v));
            let mut next = (w2, l2, a2);
            if nv > 0.0 && nr.is_finite() && nv.is_finite() {
                let alpha = (-nr / nv).clamp(-1e4, -1.0);
                let lp: Vec<f64> = (0..l0.len())
                    .map(|i| l0[i] - 2.0 * alpha * r[i] + alpha * alpha * v[i])
                    .collect();
                let (wp, lp) = log_softmax_rows(&lp, k);
                if wp.iter().all(|x| x.is_finite()) {
                    let ap = model.analyze(&wp, k);
                    if value(ap.i_ux, ap.i_uq) >= value(next.2.i_ux, next.2.i_uq) {
                        next = (wp, lp, ap);
                    }
                }
            }
            let moved = next
                .0
                .iter()
                .zip(&w)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            (w, l0, a) = next;
            let g = value(a.i_ux, a.i_uq);
            trail.push(g);
            if moved < 1e-15 {
                converged = true;
                break;
            }
            if trail.len() > window {
                let old = trail[trail.len() - 1 - window];
                if (g - old).abs() <= opts.rel_tol * g.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
        }
    } else {
        converged = true;
    }
    if opts.polish_iter > 0 {
        let f = |theta: &[f64], grad: &mut [f64]| {
            let wt = softmax_rows(theta, k);
            let (g, gw) = model.lagrangian_grad(&wt, k, s);
            let gw: Vec<f64> = gw
                .into_iter()
                .map(|v| if v.is_finite() { v } else { 0.0 })
                .collect();
            let gt = softmax_pullback(&wt, &gw, k);
            grad.iter_mut().zip(gt).for_each(|(o, v)| *o = -v);
            -g
        };
        let before = {
            let (i_ux, i_uq) = model.evaluate(&w, k);
            value(i_ux, i_uq)
        };
        let r = lbfgs(
            f,
            to_logits(&w),
            LbfgsOptions {
                max_iter: opts.polish_iter,
                rel_tol: 1e-13,
                window: 10,
                ..Default::default()
            },
        );
        if -r.value > before {
            let cand = softmax_rows(&r.x, k);
            let (i_ux, i_uq) = model.evaluate(&cand, k);
            if value(i_ux, i_uq) > before {
                w = cand;
            }
        }
    }
    let (i_ux, i_uq) = model.evaluate(&w, k);
    LocalMax {
        objective: value(i_ux, i_uq),
        rate: i_ux - i_uq,
        gain: i_uq,
        w,
        converged,
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn channel_from(w: &[f64], m: usize, k: usize) -> AuxChannel {
    AuxChannel::from_flat(m, k, w.to_vec())
}
