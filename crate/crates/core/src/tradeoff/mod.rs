//! The distillable common randomness `D*(R)`: the largest `I(U;Q)` over auxiliary
//! channels `U|X` with `I(U;X) − I(U;Q) ≤ R`, and everything built on top of it.

mod additivity;
mod brute;
mod closed_form;
mod dual;
pub(crate) mod model;

use rayon::prelude::*;

use crate::ensembles::{AuxChannel, CQEnsemble};
use crate::error::{Error, Result};
use crate::info::{
    conditional_entropy_xq, holevo_chi, mutual_info_uq, mutual_info_ux, sw_point, SwPoint,
};
use crate::optim::{dirichlet_row, lbfgs, stream_rng, LbfgsOptions};
use model::{
    channel_from, local_maximize, softmax_pullback, softmax_rows, to_logits, LocalMax,
    LocalOptions, Model,
};

pub use additivity::{check_additivity, AdditivityReport};
pub use brute::{brute_dstar, brute_dstar_many};
pub use closed_form::{uniform_curve_at_rates, uniform_curve_closed_form};
pub use dual::{check_duality, qstar_curve, qstar_point, DualityReport, QstarPoint};

/// Below this Holevo information there is nothing to distill.
pub const DEGENERATE_CHI: f64 = 1e-12;

/// Knobs of the multi-start optimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub seed: u64,
    /// Random Dirichlet(1) starts per slope value.
    pub starts: usize,
    /// Adds the identity-like, constant-like and merged-pair starts.
    pub structured_starts: bool,
    pub max_iter: usize,
    /// Relative objective change that counts as converged over `stall_window` iterations.
    pub rel_tol: f64,
    pub stall_window: usize,
    /// L-BFGS iterations spent polishing each start in softmax coordinates.
    pub polish_iter: usize,
    /// Number of log-spaced slope values in the initial sweep.
    pub sweep_points: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub bisect_iter: usize,
    /// Random starts added at each bisection step on top of the two bracket channels.
    pub refine_starts: usize,
    /// A witness is feasible when its rate is at most `R + feas_tol`.
    pub feas_tol: f64,
    /// Runs a constrained solve at every grid rate while tracing a curve.
    pub direct_solves: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            starts: 32,
            structured_starts: true,
            max_iter: 20_000,
            rel_tol: 1e-9,
            stall_window: 50,
            polish_iter: 100,
            sweep_points: 24,
            s_min: 1e-3,
            s_max: 1e3,
            bisect_iter: 40,
            refine_starts: 2,
            feas_tol: 1e-9,
            direct_solves: true,
        }
    }
}

impl SolverConfig {
    fn local(&self) -> LocalOptions {
        LocalOptions {
            max_iter: self.max_iter,
            rel_tol: self.rel_tol,
            window: self.stall_window,
            polish_iter: self.polish_iter,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.s_min > 0.0 && self.s_max > self.s_min) || self.sweep_points < 2 {
            return Err(Error::BadParam(
                "slope sweep needs 0 < s_min < s_max and two points".into(),
            ));
        }
        if self.starts == 0 && !self.structured_starts {
            return Err(Error::BadParam("no starts configured".into()));
        }
        Ok(())
    }
}

/// Evenly spaced communication rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl RGrid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min >= 0.0)
            || !max.is_finite()
            || count == 0
            || (count > 1 && !(max > min))
            || max < min
        {
            return Err(Error::BadParam(format!("rate grid {min}:{max}:{count}")));
        }
        Ok(Self { min, max, count })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + step * i as f64
                }
            })
            .collect()
    }
}

impl std::fmt::Display for RGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.count)
    }
}

impl std::str::FromStr for RGrid {
    type Err = Error;

    /// Parses `min:max:count`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::BadParam(format!("grid `{s}` is not min:max:count")));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadParam(format!("grid entry `{t}`")))
        };
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::BadParam(format!("grid count `{}`", parts[2])))?;
        RGrid::new(num(parts[0])?, num(parts[1])?, count)
    }
}

/// One point of a trade-off curve.
#[derive(Clone, Debug)]
pub struct CurvePoint {
    pub comm_rate: f64,
    pub distilled: f64,
    pub cr_rate: f64,
    /// Channel achieving `distilled` at rate `witness_rate ≤ comm_rate`.
    pub channel: AuxChannel,
    pub witness_rate: f64,
    pub slope_param: Option<f64>,
    pub converged: bool,
}

impl CurvePoint {
    fn new(
        comm_rate: f64,
        distilled: f64,
        channel: AuxChannel,
        witness_rate: f64,
        slope: Option<f64>,
        converged: bool,
    ) -> Self {
        Self {
            comm_rate,
            distilled,
            cr_rate: comm_rate + distilled,
            channel,
            witness_rate,
            slope_param: slope,
            converged,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TradeoffCurve {
    pub ensemble_id: String,
    pub points: Vec<CurvePoint>,
    pub chi: f64,
    pub sw: SwPoint,
    pub warnings: Vec<String>,
}

impl TradeoffCurve {
    pub fn rates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.comm_rate).collect()
    }

    pub fn distilled(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.distilled).collect()
    }

    /// Violations of monotonicity, the `χ` ceiling and concavity, with the given slack.
    pub fn shape_violations(&self, slack: f64) -> Vec<String> {
        let mut out = Vec::new();
        let r = self.rates();
        let d = self.distilled();
        for i in 1..r.len() {
            if !(r[i] > r[i - 1]) {
                out.push(format!("rates not increasing at {i}"));
            }
            if d[i] < d[i - 1] - slack {
                out.push(format!("D decreases at R = {}", r[i]));
            }
        }
        for (i, v) in d.iter().enumerate() {
            if *v > self.chi + slack {
                out.push(format!("D = {v} exceeds chi at R = {}", r[i]));
            }
        }
        for i in 1..r.len().saturating_sub(1) {
            if second_difference(&r, &d, i) > slack {
                out.push(format!("convexity at R = {}", r[i]));
            }
        }
        out
    }
}

/// `D_{i+1} − 2 D_i + D_{i−1}`, rescaled to the local spacing for uneven grids.
pub fn second_difference(r: &[f64], d: &[f64], i: usize) -> f64 {
    let (h0, h1) = (r[i] - r[i - 1], r[i + 1] - r[i]);
    let h = (h0 + h1) / 2.0;
    h * h * (2.0 / (h0 + h1)) * ((d[i + 1] - d[i]) / h1 - (d[i] - d[i - 1]) / h0)
}

/// `(I(U;X) − I(U;Q), I(U;Q))`.
pub fn eval_pair(e: &CQEnsemble, w: &AuxChannel) -> Result<(f64, f64)> {
    let i_ux = mutual_info_ux(e.probs(), w)?;
    let i_uq = mutual_info_uq(e, w)?;
    Ok((i_ux - i_uq, i_uq))
}

#[derive(Clone, Debug)]
struct Achieved {
    rate: f64,
    gain: f64,
    channel: AuxChannel,
    slope: Option<f64>,
}

#[derive(Clone, Debug)]
struct SweepEntry {
    s: f64,
    best: LocalMax,
}

enum Start {
    Given(Vec<f64>),
    Random(u64),
}

/// Shared state of one ensemble's optimization: cached slope maximizers and achieved points.
struct Tracer<'a> {
    e: &'a CQEnsemble,
    cfg: &'a SolverConfig,
    model: Model,
    k: usize,
    chi: f64,
    hxq: f64,
    sweep: Vec<SweepEntry>,
    pool: Vec<Achieved>,
    next_point: u64,
    warnings: Vec<String>,
}

impl<'a> Tracer<'a> {
    fn new(e: &'a CQEnsemble, cfg: &'a SolverConfig) -> Self {
        let k = e.len() + 1;
        let mut t = Self {
            e,
            cfg,
            model: Model::new(e),
            k,
            chi: holevo_chi(e),
            hxq: conditional_entropy_xq(e),
            sweep: Vec::new(),
            pool: Vec::new(),
            next_point: 0,
            warnings: Vec::new(),
        };
        let constant = AuxChannel::constant(e.len(), k);
        let identity = AuxChannel::identity_padded(e.len(), k);
        for ch in [constant, identity] {
            let (rate, gain) = t.eval(ch.entries());
            t.pool.push(Achieved {
                rate,
                gain,
                channel: ch,
                slope: None,
            });
        }
        t
    }

    fn m(&self) -> usize {
        self.e.len()
    }

    fn eval(&self, w: &[f64]) -> (f64, f64) {
        let (i_ux, i_uq) = self.model.evaluate(w, self.k);
        (i_ux - i_uq, i_uq)
    }

    fn structured_starts(&self) -> Vec<Vec<f64>> {
        let (m, k) = (self.m(), self.k);
        let soften = |hard: Vec<f64>| -> Vec<f64> {
            hard.into_iter().map(|v| 0.9 * v + 0.1 / k as f64).collect()
        };
        let identity = AuxChannel::identity_padded(m, k).entries().to_vec();
        let constant = AuxChannel::constant(m, k).entries().to_vec();
        let mut best = (0, 1.min(m - 1), f64::NEG_INFINITY);
        for x in 0..m {
            for y in x + 1..m {
                let overlap = self.model.states[x].trace_product_re(&self.model.states[y]);
                if overlap > best.2 {
                    best = (x, y, overlap);
                }
            }
        }
        let mut merge: Vec<usize> = (0..m).collect();
        merge[best.1] = best.0;
        let merged = AuxChannel::deterministic(&merge, k).entries().to_vec();
        vec![soften(identity), soften(constant), soften(merged)]
    }

    fn random_start(&self, point: u64, idx: u64) -> Vec<f64> {
        let mut rng = stream_rng(self.cfg.seed, point, idx);
        (0..self.m())
            .flat_map(|_| dirichlet_row(self.k, &mut rng))
            .collect()
    }

    /// Best local maximizer of `D − sR` over the given warm starts plus random ones.
    fn maximize_at(
        &mut self,
        s: f64,
        warm: Vec<Vec<f64>>,
        n_random: usize,
        structured: bool,
    ) -> LocalMax {
        let point = self.next_point;
        self.next_point += 1;
        let mut starts: Vec<Start> = warm.into_iter().map(Start::Given).collect();
        if structured {
            starts.extend(self.structured_starts().into_iter().map(Start::Given));
        }
        starts.extend((0..n_random as u64).map(Start::Random));
        let opts = self.cfg.local();
        let this = &*self;
        let results: Vec<LocalMax> = starts
            .into_par_iter()
            .map(|st| {
                let w0 = match st {
                    Start::Given(w) => w,
                    Start::Random(i) => this.random_start(point, i),
                };
                local_maximize(&this.model, this.k, s, w0, opts)
            })
            .collect();
        let top = results
            .iter()
            .map(|r| r.objective)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut pick = 0;
        for (i, r) in results.iter().enumerate() {
            let near = r.objective >= top - 1e-12;
            if near
                && (results[pick].objective < top - 1e-12 || r.rate < results[pick].rate - 1e-12)
            {
                pick = i;
            }
        }
        for r in &results {
            self.pool.push(Achieved {
                rate: r.rate,
                gain: r.gain,
                channel: channel_from(&r.w, self.m(), self.k),
                slope: Some(s),
            });
        }
        let best = results[pick].clone();
        if !best.converged {
            self.warnings
                .push(format!("slope {s:.6e}: best start hit the iteration cap"));
        }
        best
    }

    fn insert_sweep(&mut self, s: f64, best: LocalMax) {
        let pos = self.sweep.partition_point(|e| e.s < s);
        self.sweep.insert(pos, SweepEntry { s, best });
    }

    fn ensure_sweep(&mut self) {
        if !self.sweep.is_empty() {
            return;
        }
        let n = self.cfg.sweep_points;
        let (lo, hi) = (self.cfg.s_min.ln(), self.cfg.s_max.ln());
        let mut prev: Option<Vec<f64>> = None;
        for i in 0..n {
            let s = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
            let warm = prev.take().into_iter().collect();
            let best = self.maximize_at(s, warm, self.cfg.starts, self.cfg.structured_starts);
            prev = Some(best.w.clone());
            self.insert_sweep(s, best);
        }
    }

    fn point(&self, r: f64, w: &[f64], slope: Option<f64>, converged: bool) -> CurvePoint {
        let (rate, gain) = self.eval(w);
        CurvePoint::new(
            r,
            gain,
            channel_from(w, self.m(), self.k),
            rate,
            slope,
            converged,
        )
    }

    /// Constrained maximization at a single rate; the witness keeps `|U| = |X| + 1`.
    fn dstar(&mut self, r: f64) -> CurvePoint {
        let (m, k) = (self.m(), self.k);
        if self.chi < DEGENERATE_CHI {
            return self.point(r, AuxChannel::constant(m, k).entries(), None, true);
        }
        if r >= self.hxq - 1e-12 {
            return self.point(
                r,
                AuxChannel::identity_padded(m, k).entries(),
                Some(0.0),
                true,
            );
        }
        self.ensure_sweep();
        let tol = self.cfg.feas_tol;

        // bracket: a has rate above r, b has rate at most r
        let mut a: Option<(f64, Vec<f64>, f64)> = None;
        let mut b: Option<(f64, Vec<f64>, f64)> = None;
        for i in (0..self.sweep.len()).rev() {
            let en = &self.sweep[i];
            if en.best.rate <= r + tol {
                b = Some((en.s, en.best.w.clone(), en.best.rate));
            } else {
                a = Some((en.s, en.best.w.clone(), en.best.rate));
                break;
            }
        }
        let mut a = a.unwrap_or((
            0.0,
            AuxChannel::identity_padded(m, k).entries().to_vec(),
            self.hxq,
        ));
        if b.is_none() {
            let mut s = self.sweep.last().map_or(self.cfg.s_max, |e| e.s);
            let mut warm = a.1.clone();
            while b.is_none() && s < 1e9 {
                s *= 10.0;
                let best = self.maximize_at(s, vec![warm.clone()], self.cfg.refine_starts, true);
                warm = best.w.clone();
                if best.rate <= r + tol {
                    b = Some((s, best.w.clone(), best.rate));
                } else {
                    a = (s, best.w.clone(), best.rate);
                }
                self.insert_sweep(s, best);
            }
        }
        let mut b = b.unwrap_or_else(|| {
            (
                f64::INFINITY,
                AuxChannel::constant(m, k).entries().to_vec(),
                0.0,
            )
        });
        let mut converged = true;
        if b.0.is_finite() {
            for _ in 0..self.cfg.bisect_iter {
                if b.2 >= r - 1e-9 || a.2 - b.2 < 1e-9 {
                    break;
                }
                let s_lo = if a.0 > 0.0 { a.0 } else { b.0 * 1e-3 };
                if b.0 / s_lo < 1.0 + 1e-9 {
                    break;
                }
                let s = (s_lo * b.0).sqrt();
                let best = self.maximize_at(
                    s,
                    vec![a.1.clone(), b.1.clone()],
                    self.cfg.refine_starts,
                    false,
                );
                converged &= best.converged;
                if best.rate <= r + tol {
                    b = (s, best.w.clone(), best.rate);
                } else {
                    a = (s, best.w.clone(), best.rate);
                }
                self.insert_sweep(s, best);
            }
        }

        let mut candidates: Vec<Vec<f64>> = vec![b.1.clone()];
        if a.2 > r {
            if let Some(mix) = self.mix_to_rate(&b.1, &a.1, r) {
                candidates.push(mix);
            }
        }
        let polished = self.penalty_polish(&a.1, &b.1, r);
        candidates.extend(polished);
        let snapped: Vec<Vec<f64>> = candidates.iter().map(|w| snap(w, k)).collect();
        candidates.extend(snapped);
        candidates.push(AuxChannel::constant(m, k).entries().to_vec());

        let mut best: Option<(f64, f64, Vec<f64>)> = None;
        for w in candidates {
            let (rate, gain) = self.eval(&w);
            if !(rate <= r + tol) || !gain.is_finite() || w.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let better = match &best {
                None => true,
                Some((br, bg, _)) => gain > bg + 1e-13 || (gain > bg - 1e-13 && rate < *br),
            };
            if better {
                best = Some((rate, gain, w));
            }
        }
        let (_, _, w) = best.expect("constant channel is always feasible");
        if !converged {
            self.warnings.push(format!(
                "R = {r}: bracketing maximizers hit the iteration cap"
            ));
        }
        let slope = if b.0.is_finite() { Some(b.0) } else { None };
        let pt = self.point(r, &w, slope, converged);
        self.pool.push(Achieved {
            rate: pt.witness_rate,
            gain: pt.distilled,
            channel: pt.channel.clone(),
            slope,
        });
        pt
    }

    /// Largest `t` with `rate((1−t) W_feasible + t W_other) ≤ r`, as a channel.
    fn mix_to_rate(&self, feasible: &[f64], other: &[f64], r: f64) -> Option<Vec<f64>> {
        let mix = |t: f64| -> Vec<f64> {
            feasible
                .iter()
                .zip(other)
                .map(|(f, o)| (1.0 - t) * f + t * o)
                .collect()
        };
        if self.eval(feasible).0 > r + self.cfg.feas_tol {
            return None;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        if self.eval(&mix(1.0)).0 <= r {
            return Some(mix(1.0));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.eval(&mix(mid)).0 <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(mix(lo))
    }

    /// Augmented-Lagrangian ascent on `I(U;Q)` subject to `rate ≤ r`, followed by a
    /// feasibility repair along the segment to the feasible bracket channel.
    fn penalty_polish(&self, above: &[f64], feasible: &[f64], r: f64) -> Vec<Vec<f64>> {
        let k = self.k;
        let mut out = Vec::new();
        for start in [feasible, above] {
            let mut theta = to_logits(start);
            let (mut lambda, mut mu) = (0.0f64, 50.0f64);
            for _ in 0..8 {
                let f = |th: &[f64], grad: &mut [f64]| {
                    let w = softmax_rows(th, k);
                    let a = self.model.analyze(&w, k);
                    let (g_uq, g_ux) = self.model.gradients(&w, k, &a);
                    let c = a.rate() - r;
                    let act = (c + lambda / mu).max(0.0);
                    let val = a.i_uq - 0.5 * mu * act * act;
                    let gw: Vec<f64> = g_uq
                        .iter()
                        .zip(&g_ux)
                        .map(|(q, x)| {
                            let gx = if x.is_finite() { *x } else { 0.0 };
                            q - mu * act * (gx - q)
                        })
                        .collect();
                    let gt = softmax_pullback(&w, &gw, k);
                    grad.iter_mut().zip(gt).for_each(|(o, v)| *o = -v);
                    -val
                };
                let res = lbfgs(
                    f,
                    theta,
                    LbfgsOptions {
                        max_iter: 200,
                        rel_tol: 1e-14,
                        window: 10,
                        ..Default::default()
                    },
                );
                theta = res.x;
                let c = self.eval(&softmax_rows(&theta, k)).0 - r;
                lambda = (lambda + mu * c).max(0.0);
                mu = (mu * 4.0).min(1e7);
            }
            let w = softmax_rows(&theta, k);
            if w.iter().any(|v| !v.is_finite()) {
                continue;
            }
            if self.eval(&w).0 <= r + self.cfg.feas_tol {
                out.push(w);
            } else if let Some(fixed) = self.mix_to_rate(feasible, &w, r) {
                out.push(fixed);
            }
        }
        out
    }

    /// Upper concave envelope of every achieved point, evaluated on the grid.
    fn envelope_curve(&self, grid: &[f64]) -> Vec<CurvePoint> {
        let mut pts: Vec<&Achieved> = self
            .pool
            .iter()
            .filter(|p| p.rate.is_finite() && p.gain.is_finite())
            .collect();
        pts.sort_by(|x, y| {
            x.rate
                .max(0.0)
                .total_cmp(&y.rate.max(0.0))
                .then(y.gain.total_cmp(&x.gain))
        });
        let mut hull: Vec<&Achieved> = Vec::new();
        for p in pts {
            let px = p.rate.max(0.0);
            if let Some(last) = hull.last() {
                if px <= last.rate.max(0.0) && p.gain <= last.gain {
                    continue;
                }
            }
            while hull.len() >= 2 {
                let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (a.rate.max(0.0) - o.rate.max(0.0)) * (p.gain - o.gain)
                    - (a.gain - o.gain) * (px - o.rate.max(0.0));
                if cross >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        let top = hull
            .iter()
            .map(|p| p.gain)
            .fold(f64::NEG_INFINITY, f64::max);
        let peak = hull.iter().position(|p| p.gain >= top - 1e-12).unwrap();
        hull.truncate(peak + 1);

        grid.iter()
            .map(|&r| {
                let j = hull.partition_point(|p| p.rate.max(0.0) <= r);
                if j == 0 {
                    // only reachable with rates below the first vertex, which sits at zero
                    let c = AuxChannel::constant(self.m(), self.k);
                    return CurvePoint::new(r, 0.0, c, 0.0, None, true);
                }
                let v = hull[j - 1];
                if j == hull.len() || (v.rate.max(0.0) - r).abs() <= 1e-15 {
                    return CurvePoint::new(r, v.gain, v.channel.clone(), v.rate, v.slope, true);
                }
                let nx = hull[j];
                let (r0, r1) = (v.rate.max(0.0), nx.rate.max(0.0));
                let lambda = (r1 - r) / (r1 - r0);
                let shared = AuxChannel::time_share(lambda, &v.channel, &nx.channel)
                    .expect("same input alphabet");
                let (rate, gain) = eval_pair(self.e, &shared).expect("sizes agree");
                let slope = match (v.slope, nx.slope) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                };
                CurvePoint::new(r, gain, shared, rate, slope, true)
            })
            .collect()
    }
}

/// Zeroes entries below `1e-6` and renormalizes rows.
fn snap(w: &[f64], k: usize) -> Vec<f64> {
    let mut out = w.to_vec();
    for row in out.chunks_mut(k) {
        let s: f64 = row.iter().filter(|v| **v >= 1e-6).sum();
        if s > 0.0 {
            row.iter_mut()
                .for_each(|v| *v = if *v < 1e-6 { 0.0 } else { *v / s });
        }
    }
    out
}

/// `D*(R)` with a witness channel on `|X| + 1` outputs.
pub fn solve_dstar(e: &CQEnsemble, r: f64, cfg: &SolverConfig) -> Result<CurvePoint> {
    if !(r >= 0.0) {
        return Err(Error::BadParam(format!("rate {r} must be nonnegative")));
    }
    cfg.validate()?;
    Ok(Tracer::new(e, cfg).dstar(r))
}

/// `D*` at several rates, sharing one slope sweep.
pub fn solve_dstar_many(
    e: &CQEnsemble,
    rates: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<CurvePoint>> {
    if let Some(r) = rates.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::BadParam(format!("rate {r} must be nonnegative")));
    }
    cfg.validate()?;
    let mut t = Tracer::new(e, cfg);
    Ok(rates.iter().map(|&r| t.dstar(r)).collect())
}

/// The curve `R ↦ D*(R)` on a grid: slope sweep, constrained solves at the grid rates,
/// and the upper concave envelope of everything achieved. Envelope points between
/// two achieved channels are witnessed by time-sharing between them.
pub fn trace_curve(e: &CQEnsemble, grid: &RGrid, cfg: &SolverConfig) -> Result<TradeoffCurve> {
    cfg.validate()?;
    let rates = grid.values();
    let mut t = Tracer::new(e, cfg);
    let chi = t.chi;
    if chi >= DEGENERATE_CHI {
        t.ensure_sweep();
        if cfg.direct_solves {
            for &r in &rates {
                t.dstar(r);
            }
        }
    }
    let points = t.envelope_curve(&rates);
    Ok(TradeoffCurve {
        ensemble_id: e.label.clone().unwrap_or_else(|| "ensemble".into()),
        points,
        chi,
        sw: sw_point(e),
        warnings: t.warnings,
    })
}

/// Analytic gradient of `G_s` with respect to the raw channel entries.
pub fn lagrangian_gradient(e: &CQEnsemble, w: &AuxChannel, s: f64) -> Result<(f64, Vec<f64>)> {
    if w.in_size() != e.len() {
        return Err(Error::SizeMismatch(format!(
            "channel input {} vs alphabet {}",
            w.in_size(),
            e.len()
        )));
    }
    Ok(Model::new(e).lagrangian_grad(w.entries(), w.out_size(), s))
}

/// `G_s = (1+s) I(U;Q) − s I(U;X)` evaluated on raw (not necessarily normalized) entries.
pub fn lagrangian_value(e: &CQEnsemble, entries: &[f64], out_size: usize, s: f64) -> f64 {
    let (i_ux, i_uq) = Model::new(e).evaluate(entries, out_size);
    (1.0 + s) * i_uq - s * i_ux
}
