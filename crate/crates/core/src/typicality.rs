//! Typical sequences and typical projectors at small blocklength.
//!
//! Quantum traces are evaluated letter by letter in the relevant eigenbases, so
//! every mass below is an exact sum over letter-count types rather than a dense
//! `dⁿ`-dimensional computation.

use std::collections::{BTreeMap, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::ensembles::{AuxChannel, CQEnsemble, ProbVector};
use crate::error::{Error, Result};
use crate::info::{entropy_of, mutual_info_ux};
use crate::linalg::{c, eigh, ComplexMatrix, DensityMatrix, C64};
use crate::optim::stream_rng;

const ZERO_PROB: f64 = 1e-12;
const WINDOW_SLACK: f64 = 1e-9;
const DEGENERATE: f64 = 1e-12;
/// Largest `n·log₂d` for which a dense projector is built.
pub const DENSE_MAX_BITS: f64 = 12.0;
/// Largest `|X|ⁿ` for the explicit table of [`build_g`].
pub const TABLE_MAX_WORDS: usize = 1 << 20;
const PAIR_BUDGET: usize = 1 << 27;

/// Letter distribution, blocklength and slack defining `T^n_{p,δ}`.
#[derive(Clone, Debug)]
pub struct TypicalSetSpec {
    distribution: ProbVector,
    n: usize,
    delta: f64,
}

impl TypicalSetSpec {
    pub fn new(distribution: ProbVector, n: usize, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadParam("blocklength must be at least 1".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::BadParam(format!("delta = {delta} must be positive")));
        }
        Ok(Self {
            distribution,
            n,
            delta,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.distribution.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn distribution(&self) -> &ProbVector {
        &self.distribution
    }
}

/// Allowed count range per letter for a block of length `len`; letters of zero
/// probability may not occur at all.
fn windows(p: &[f64], len: usize, delta: f64) -> Vec<(usize, usize)> {
    let l = len as f64;
    p.iter()
        .map(|&q| {
            if q < ZERO_PROB {
                return (0, 0);
            }
            let lo = (l * q - l * delta - WINDOW_SLACK).ceil().max(0.0) as usize;
            let hi = (l * q + l * delta + WINDOW_SLACK).floor().min(l) as usize;
            (lo, hi)
        })
        .collect()
}

fn counts_within(counts: &[usize], win: &[(usize, usize)]) -> bool {
    counts
        .iter()
        .zip(win)
        .all(|(c, (lo, hi))| c >= lo && c <= hi)
}

fn letter_counts(word: &[usize], size: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0; size];
    for &s in word {
        *counts.get_mut(s).ok_or_else(|| {
            Error::BadParam(format!("symbol {s} outside alphabet of size {size}"))
        })? += 1;
    }
    Ok(counts)
}

/// `|N(x|xⁿ) − n p(x)| ≤ nδ` for every letter.
pub fn typical_membership(spec: &TypicalSetSpec, word: &[usize]) -> Result<bool> {
    if word.len() != spec.n {
        return Err(Error::LengthMismatch {
            expected: spec.n,
            got: word.len(),
        });
    }
    let counts = letter_counts(word, spec.alphabet_size())?;
    Ok(counts_within(
        &counts,
        &windows(spec.distribution.as_slice(), spec.n, spec.delta),
    ))
}

/// A set size: exact when it fits in 128 bits, always as a base-2 logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cardinality {
    pub exact: Option<u128>,
    pub log2: f64,
}

impl Cardinality {
    fn one() -> Self {
        Self {
            exact: Some(1),
            log2: 0.0,
        }
    }

    fn times(self, other: Self) -> Self {
        Self {
            exact: self
                .exact
                .zip(other.exact)
                .and_then(|(a, b)| a.checked_mul(b)),
            log2: self.log2 + other.log2,
        }
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Number of words of length `len` whose letter counts lie in the windows.
fn count_words(len: usize, win: &[(usize, usize)], mult: &[usize]) -> Cardinality {
    let mut exact: Option<u128> = Some(0);
    let mut logs: Vec<f64> = Vec::new();
    let mut counts = vec![0usize; win.len()];
    fn rec(
        j: usize,
        left: usize,
        win: &[(usize, usize)],
        counts: &mut [usize],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if j + 1 == win.len() {
            if left >= win[j].0 && left <= win[j].1 {
                counts[j] = left;
                visit(counts);
            }
            return;
        }
        for c in win[j].0..=win[j].1.min(left) {
            counts[j] = c;
            rec(j + 1, left - c, win, counts, visit);
        }
    }
    let lf = ln_factorial(len);
    rec(0, len, win, &mut counts, &mut |cs: &[usize]| {
        let mut left = len;
        let mut multi: Option<u128> = Some(1);
        let mut log = lf / std::f64::consts::LN_2;
        for (&c, &m) in cs.iter().zip(mult) {
            let weight = (m as u128).checked_pow(c as u32);
            multi = multi
                .zip(binomial(left, c))
                .and_then(|(a, b)| a.checked_mul(b))
                .zip(weight)
                .and_then(|(a, b)| a.checked_mul(b));
            left -= c;
            log += (c as f64 * (m as f64).ln() - ln_factorial(c)) / std::f64::consts::LN_2;
        }
        exact = exact.zip(multi).and_then(|(a, b)| a.checked_add(b));
        logs.push(log);
    });
    let log2 = match logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) {
        top if top.is_finite() => top + logs.iter().map(|l| (l - top).exp2()).sum::<f64>().log2(),
        _ => f64::NEG_INFINITY,
    };
    Cardinality { exact, log2 }
}

/// `|T^n_{p,δ}|`, summed over admissible letter-count types.
pub fn typical_set_size(spec: &TypicalSetSpec) -> Cardinality {
    count_words(
        spec.n,
        &windows(spec.distribution.as_slice(), spec.n, spec.delta),
        &vec![1; spec.alphabet_size()],
    )
}

/// `|N((u,x)|(uⁿ,xⁿ)) − P(x|u) N(u|uⁿ)| ≤ nδ` for all pairs; `p` has rows indexed by `u`.
pub fn conditionally_typical_membership(
    p: &AuxChannel,
    u_word: &[usize],
    x_word: &[usize],
    delta: f64,
) -> Result<bool> {
    if u_word.len() != x_word.len() {
        return Err(Error::LengthMismatch {
            expected: u_word.len(),
            got: x_word.len(),
        });
    }
    let (nu, nx) = (p.in_size(), p.out_size());
    let n = u_word.len() as f64;
    let mut joint = vec![0usize; nu * nx];
    let mut single = vec![0usize; nu];
    for (&u, &x) in u_word.iter().zip(x_word) {
        if u >= nu || x >= nx {
            return Err(Error::BadParam(format!(
                "pair ({u}, {x}) outside a {nu}x{nx} matrix"
            )));
        }
        joint[u * nx + x] += 1;
        single[u] += 1;
    }
    Ok((0..nu).all(|u| {
        (0..nx).all(|x| {
            (joint[u * nx + x] as f64 - p.get(u, x) * single[u] as f64).abs()
                <= n * delta + WINDOW_SLACK
        })
    }))
}

/// Typical projector on a set of positions, in the eigenbasis of one state.
///
/// Eigen-indices with equal eigenvalues form one letter, so the projector does not
/// depend on the basis chosen inside a degenerate eigenspace.
#[derive(Clone, Debug)]
pub struct ProjectorBlock {
    pub positions: Vec<usize>,
    /// Eigenvectors as columns, matching `spectrum`.
    pub basis: ComplexMatrix,
    pub spectrum: Vec<f64>,
    pub delta: f64,
    /// Letter of each eigen-index.
    pub class_of: Vec<usize>,
}

impl ProjectorBlock {
    fn new(positions: Vec<usize>, basis: ComplexMatrix, spectrum: Vec<f64>, delta: f64) -> Self {
        let mut class_of: Vec<usize> = Vec::with_capacity(spectrum.len());
        let mut reps: Vec<f64> = Vec::new();
        for &l in &spectrum {
            match reps.iter().position(|&r| (r - l).abs() <= DEGENERATE) {
                Some(j) => class_of.push(j),
                None => {
                    class_of.push(reps.len());
                    reps.push(l);
                }
            }
        }
        Self {
            positions,
            basis,
            spectrum,
            delta,
            class_of,
        }
    }

    fn classes(&self) -> usize {
        self.class_of.iter().max().map_or(0, |m| m + 1)
    }

    fn class_weights(&self, per_index: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.classes()];
        for (k, &c) in self.class_of.iter().enumerate() {
            w[c] += per_index[k];
        }
        w
    }

    fn multiplicities(&self) -> Vec<usize> {
        let mut m = vec![0; self.classes()];
        self.class_of.iter().for_each(|&c| m[c] += 1);
        m
    }

    fn windows(&self) -> Vec<(usize, usize)> {
        windows(
            &self.class_weights(&self.spectrum),
            self.positions.len(),
            self.delta,
        )
    }
}

/// Tensor product of typical projectors over disjoint position blocks.
///
/// The retained index words are those whose eigen-index counts are typical within
/// every block; nothing of size `dⁿ` is stored.
#[derive(Clone, Debug)]
pub struct ProjectorHandle {
    pub n: usize,
    pub dim: usize,
    pub blocks: Vec<ProjectorBlock>,
}

impl ProjectorHandle {
    /// Exact trace: product of per-block typical counts.
    pub fn trace(&self) -> Cardinality {
        self.blocks.iter().fold(Cardinality::one(), |acc, b| {
            acc.times(count_words(
                b.positions.len(),
                &b.windows(),
                &b.multiplicities(),
            ))
        })
    }

    /// `Tr[(⊗_i ρ_i) Π]` for a product state given position by position.
    pub fn retained_mass(&self, states: &[DensityMatrix]) -> Result<f64> {
        if states.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: states.len(),
            });
        }
        let mut mass = 1.0;
        for b in &self.blocks {
            let dists: Vec<Vec<f64>> = b
                .positions
                .iter()
                .map(|&i| b.class_weights(&diagonal_in(&states[i], &b.basis)))
                .collect();
            mass *= window_mass(&dists, &b.windows());
        }
        Ok(mass)
    }

    /// Membership of an eigen-index word (one index per position, in that position's block basis).
    pub fn contains(&self, index_word: &[usize]) -> Result<bool> {
        if index_word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: index_word.len(),
            });
        }
        for b in &self.blocks {
            let mut sub = Vec::with_capacity(b.positions.len());
            for &i in &b.positions {
                let k = index_word[i];
                sub.push(*b.class_of.get(k).ok_or_else(|| {
                    Error::BadParam(format!("index {k} outside dimension {}", self.dim))
                })?);
            }
            if !counts_within(&letter_counts(&sub, b.classes())?, &b.windows()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The projector as a dense `dⁿ × dⁿ` matrix, within the dense envelope.
    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        if self.n as f64 * (self.dim as f64).log2() > DENSE_MAX_BITS {
            return Err(Error::EnvelopeExceeded(format!(
                "dense projector on {}^{} dimensions",
                self.dim, self.n
            )));
        }
        let mut basis_of = vec![0; self.n];
        for (j, b) in self.blocks.iter().enumerate() {
            for &i in &b.positions {
                basis_of[i] = j;
            }
        }
        let total = self.dim.pow(self.n as u32);
        let mut out = ComplexMatrix::zeros(total, total);
        let mut word = vec![0usize; self.n];
        for idx in 0..total {
            let mut r = idx;
            for i in (0..self.n).rev() {
                word[i] = r % self.dim;
                r /= self.dim;
            }
            if !self.contains(&word)? {
                continue;
            }
            let mut ket: Vec<C64> = vec![c(1.0, 0.0)];
            for i in 0..self.n {
                ket = crate::linalg::tensor_ket(
                    &ket,
                    &self.blocks[basis_of[i]].basis.column(word[i]),
                );
            }
            out.add_scaled(&ComplexMatrix::outer(&ket), 1.0);
        }
        Ok(out)
    }
}

fn diagonal_in(rho: &DensityMatrix, basis: &ComplexMatrix) -> Vec<f64> {
    (0..basis.cols())
        .map(|k| rho.matrix().expectation(&basis.column(k)).max(0.0))
        .collect()
}

/// Probability that independent letters with the given per-position laws have typical counts.
fn window_mass(dists: &[Vec<f64>], win: &[(usize, usize)]) -> f64 {
    let d = win.len();
    let mut layer: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
    layer.insert(vec![0; d], 1.0);
    for q in dists {
        let mut next: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
        for (counts, m) in &layer {
            for (k, &pk) in q.iter().enumerate() {
                if pk == 0.0 || counts[k] as usize + 1 > win[k].1 {
                    continue;
                }
                let mut c2 = counts.clone();
                c2[k] += 1;
                *next.entry(c2).or_insert(0.0) += m * pk;
            }
        }
        layer = next;
    }
    layer
        .iter()
        .filter(|(cs, _)| cs.iter().zip(win).all(|(&c, &(lo, _))| c as usize >= lo))
        .map(|(_, m)| m)
        .sum()
}

fn spectral_block(rho: &DensityMatrix, positions: Vec<usize>, delta: f64) -> ProjectorBlock {
    let spec = rho.spectrum();
    ProjectorBlock::new(
        positions,
        spec.eigenvectors,
        spec.eigenvalues.iter().map(|l| l.max(0.0)).collect(),
        delta,
    )
}

/// `Π^n_{ρ,δ}`: eigen-index words typical for the spectrum of `ρ`.
pub fn typical_projector(rho: &DensityMatrix, n: usize, delta: f64) -> Result<ProjectorHandle> {
    if n == 0 || !(delta > 0.0) {
        return Err(Error::BadParam(format!(
            "need n ≥ 1 and δ > 0, got n = {n}, δ = {delta}"
        )));
    }
    Ok(ProjectorHandle {
        n,
        dim: rho.dim(),
        blocks: vec![spectral_block(rho, (0..n).collect(), delta)],
    })
}

/// `⊗_u Π^{I_u}_{ρ_u,δ}` with `I_u = {i : u_i = u}` and `ρ_u` the ensemble's states.
pub fn cond_typical_projector(
    e: &CQEnsemble,
    u_word: &[usize],
    delta: f64,
) -> Result<ProjectorHandle> {
    if u_word.is_empty() || !(delta > 0.0) {
        return Err(Error::BadParam(format!(
            "need a nonempty word and δ > 0, got δ = {delta}"
        )));
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); e.len()];
    for (i, &u) in u_word.iter().enumerate() {
        groups
            .get_mut(u)
            .ok_or_else(|| {
                Error::BadParam(format!("letter {u} outside alphabet of size {}", e.len()))
            })?
            .push(i);
    }
    let blocks = groups
        .into_iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(u, g)| spectral_block(&e.states()[u], g, delta))
        .collect();
    Ok(ProjectorHandle {
        n: u_word.len(),
        dim: e.dim(),
        blocks,
    })
}

/// One line of a typicality report.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub n: usize,
    pub delta: f64,
    pub quantity: String,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Rows as CSV with header `n,delta,quantity,value,ci_low,ci_high`.
pub fn rows_to_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from("n,delta,quantity,value,ci_low,ci_high\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.9e},{:.9e},{:.9e}\n",
            r.n, r.delta, r.quantity, r.value, r.ci_low, r.ci_high
        ));
    }
    out
}

/// 95% Wilson score interval for `hits` successes in `trials`.
pub fn wilson_interval(hits: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let (k, t) = (hits as f64, trials as f64);
    let ph = k / t;
    let denom = 1.0 + z * z / t;
    let centre = (ph + z * z / (2.0 * t)) / denom;
    let half = z * (ph * (1.0 - ph) / t + z * z / (4.0 * t * t)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug)]
pub struct TraceBoundReport {
    pub rows: Vec<BoundRow>,
    /// `max_n ((1/n) log₂ Tr Π − H) / δ` per projector family.
    pub c_fit: Vec<(String, f64)>,
    /// `Σ_k |log₂ λ_k|` of the average state; no typical projector can exceed it.
    pub c_bound: f64,
    /// Exact retained mass of the average state's projector is nondecreasing along the ladder.
    pub mass_nondecreasing: bool,
}

impl TraceBoundReport {
    pub fn c_fit_of(&self, family: &str) -> Option<f64> {
        self.c_fit
            .iter()
            .find(|(f, _)| f == family)
            .map(|(_, v)| *v)
    }
}

fn sample_word(rng: &mut ChaCha8Rng, dist: &WeightedIndex<f64>, n: usize) -> Vec<usize> {
    (0..n).map(|_| dist.sample(rng)).collect()
}

fn weighted(p: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(p.iter().map(|v| v.max(0.0)))
        .map_err(|e| Error::InvalidProbabilities(e.to_string()))
}

/// Draws eigen-indices for the product state `⊗ states[i]` measured in the handle's bases.
fn sample_indices(
    rng: &mut ChaCha8Rng,
    h: &ProjectorHandle,
    states: &[&DensityMatrix],
) -> Result<Vec<usize>> {
    let mut word = vec![0; h.n];
    for b in &h.blocks {
        for &i in &b.positions {
            word[i] = weighted(&diagonal_in(states[i], &b.basis))?.sample(rng);
        }
    }
    Ok(word)
}

/// Exact log-traces and Monte Carlo retained masses of the unconditional,
/// `X`-conditional and `U`-conditional typical projectors along a ladder of blocklengths.
pub fn verify_trace_bounds(
    e: &CQEnsemble,
    w: &AuxChannel,
    n_list: &[usize],
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<TraceBoundReport> {
    if w.in_size() != e.len() {
        return Err(Error::SizeMismatch(format!(
            "channel input {} vs alphabet {}",
            w.in_size(),
            e.len()
        )));
    }
    if let Some(&n) = n_list.iter().find(|&&n| n == 0 || n > 64) {
        return Err(Error::EnvelopeExceeded(format!(
            "blocklength {n} outside 1..=64"
        )));
    }
    let avg = e.average_state();
    let p = e.probs().as_slice();
    let pu = w.output_distribution(e.probs());
    // reverse channel P(x|u) and the U-conditional states
    let states_u: Vec<DensityMatrix> = (0..w.out_size())
        .map(|u| {
            let mut m = ComplexMatrix::zeros(e.dim(), e.dim());
            for x in 0..e.len() {
                m.add_scaled(
                    e.states()[x].matrix(),
                    p[x] * w.get(x, u) / pu[u].max(1e-300),
                );
            }
            DensityMatrix::from_trusted(m)
        })
        .collect();
    let reverse: Vec<Vec<f64>> = (0..w.out_size())
        .map(|u| {
            (0..e.len())
                .map(|x| p[x] * w.get(x, u) / pu[u].max(1e-300))
                .collect()
        })
        .collect();
    let ens_u = CQEnsemble::new(
        ProbVector::normalized(pu.iter().map(|v| v.max(1e-300)).collect())?,
        states_u.clone(),
    )?;
    let h_q = avg.entropy();
    let h_q_x: f64 = p
        .iter()
        .zip(e.states())
        .map(|(px, s)| px * s.entropy())
        .sum();
    let h_q_u: f64 = pu.iter().zip(&states_u).map(|(q, s)| q * s.entropy()).sum();
    let delta_u = delta + e.len() as f64 * delta;
    let dist_x = weighted(p)?;
    let dist_u = weighted(&pu)?;
    let dist_rev: Vec<Option<WeightedIndex<f64>>> =
        reverse.iter().map(|r| weighted(r).ok()).collect();

    let mut rows = Vec::new();
    let mut fits: HashMap<&str, f64> = HashMap::new();
    let mut push_fit = |family: &'static str, v: f64| {
        let e = fits.entry(family).or_insert(f64::NEG_INFINITY);
        *e = e.max(v);
    };
    let mut exact_masses = Vec::new();
    for &n in n_list {
        let nf = n as f64;
        let pi_q = typical_projector(&avg, n, delta)?;
        let lt = pi_q.trace().log2 / nf;
        push_fit("q", (lt - h_q) / delta);
        rows.push(BoundRow {
            n,
            delta,
            quantity: "log2_trace_q_per_n".into(),
            value: lt,
            ci_low: lt,
            ci_high: lt,
        });
        let exact = pi_q.retained_mass(&vec![avg.clone(); n])?;
        exact_masses.push(exact);
        rows.push(BoundRow {
            n,
            delta,
            quantity: "mass_q_exact".into(),
            value: exact,
            ci_low: exact,
            ci_high: exact,
        });

        let (mut hits_q, mut hits_qx, mut hits_qu) = (0, 0, 0);
        let (mut lx_sum, mut lx_min, mut lx_max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
        let (mut lu_sum, mut lu_min, mut lu_max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
        for t in 0..trials as u64 {
            let mut rng = stream_rng(seed, n as u64, t);
            let xw = sample_word(&mut rng, &dist_x, n);
            let sx: Vec<&DensityMatrix> = xw.iter().map(|&x| &e.states()[x]).collect();
            hits_q += pi_q.contains(&sample_indices(&mut rng, &pi_q, &sx)?)? as usize;
            let pi_qx = cond_typical_projector(e, &xw, delta)?;
            let l = pi_qx.trace().log2 / nf;
            (lx_sum, lx_min, lx_max) = (lx_sum + l, lx_min.min(l), lx_max.max(l));
            hits_qx += pi_qx.contains(&sample_indices(&mut rng, &pi_qx, &sx)?)? as usize;

            let uw = sample_word(&mut rng, &dist_u, n);
            let xw2: Vec<usize> = uw
                .iter()
                .map(|&u| dist_rev[u].as_ref().map_or(0, |d| d.sample(&mut rng)))
                .collect();
            let sx2: Vec<&DensityMatrix> = xw2.iter().map(|&x| &e.states()[x]).collect();
            let pi_qu = cond_typical_projector(&ens_u, &uw, delta_u)?;
            let l = pi_qu.trace().log2 / nf;
            (lu_sum, lu_min, lu_max) = (lu_sum + l, lu_min.min(l), lu_max.max(l));
            hits_qu += pi_qu.contains(&sample_indices(&mut rng, &pi_qu, &sx2)?)? as usize;
        }
        let tf = trials.max(1) as f64;
        let mut mc = |name: &str, hits: usize| {
            let (lo, hi) = wilson_interval(hits, trials);
            rows.push(BoundRow {
                n,
                delta,
                quantity: name.into(),
                value: hits as f64 / tf,
                ci_low: lo,
                ci_high: hi,
            });
        };
        mc("mass_q_sampled", hits_q);
        mc("mass_q_given_x", hits_qx);
        mc("mass_q_given_u", hits_qu);
        if trials > 0 {
            push_fit("q_given_x", (lx_max - h_q_x) / delta);
            push_fit("q_given_u", (lu_max - h_q_u) / delta_u);
            rows.push(BoundRow {
                n,
                delta,
                quantity: "log2_trace_q_given_x_per_n".into(),
                value: lx_sum / tf,
                ci_low: lx_min,
                ci_high: lx_max,
            });
            rows.push(BoundRow {
                n,
                delta: delta_u,
                quantity: "log2_trace_q_given_u_per_n".into(),
                value: lu_sum / tf,
                ci_low: lu_min,
                ci_high: lu_max,
            });
        }
    }
    let spec = avg.spectrum();
    let c_bound = spec
        .eigenvalues
        .iter()
        .filter(|&&l| l > ZERO_PROB)
        .map(|l| -l.log2())
        .sum();
    let mut c_fit: Vec<(String, f64)> = fits.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    c_fit.sort_by(|a, b| a.0.cmp(&b.0));
    let mass_nondecreasing = exact_masses.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    Ok(TraceBoundReport {
        rows,
        c_fit,
        c_bound,
        mass_nondecreasing,
    })
}

#[derive(Clone, Debug)]
pub struct Lemma3Report {
    pub dim: usize,
    pub trials: usize,
    pub violations: usize,
    /// Largest `H(σ) − bound`; negative when every draw satisfies the inequality.
    pub max_excess: f64,
}

/// `(H(σ), 1 + ε log₂ D + (1 − ε) log₂(Tr B + 1))` with `ε = 1 − Tr σB`.
pub fn lemma3_sides(sigma: &DensityMatrix, b: &ComplexMatrix) -> (f64, f64) {
    let d = sigma.dim() as f64;
    let eps = (1.0 - sigma.matrix().trace_product_re(b)).clamp(0.0, 1.0);
    let tb = b.trace().re;
    (
        sigma.entropy(),
        1.0 + eps * d.log2() + (1.0 - eps) * (tb + 1.0).log2(),
    )
}

/// Random `(σ, B)` pairs with `0 ≤ B ≤ 1`, checking the entropy bound on each.
pub fn lemma3_check(dim: usize, trials: usize, seed: u64) -> Result<Lemma3Report> {
    if dim == 0 || dim > 16 {
        return Err(Error::EnvelopeExceeded(format!(
            "dimension {dim} outside 1..=16"
        )));
    }
    let mut violations = 0;
    let mut max_excess = f64::NEG_INFINITY;
    for t in 0..trials as u64 {
        let mut rng = stream_rng(seed, 0, t);
        let rank = rng.random_range(1..=dim);
        let g = ComplexMatrix::from_fn(dim, rank, |_, _| {
            c(
                rng.sample(rand_distr::StandardNormal),
                rng.sample(rand_distr::StandardNormal),
            )
        });
        let sigma = DensityMatrix::from_unnormalized(&g * &g.adjoint())?;
        let u = crate::measurement::random_unitary(dim, &mut rng);
        // eigenvalues of B: a mix of exact 0/1 (projector-like) and interior values
        let diag: Vec<f64> = (0..dim)
            .map(|_| match rng.random_range(0..3) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random::<f64>(),
            })
            .collect();
        let b = &(&u * &ComplexMatrix::from_real_diag(&diag)) * &u.adjoint();
        let (lhs, rhs) = lemma3_sides(&sigma, &b.hermitian_part());
        max_excess = max_excess.max(lhs - rhs);
        if lhs > rhs + 1e-9 {
            violations += 1;
        }
    }
    Ok(Lemma3Report {
        dim,
        trials,
        violations,
        max_excess,
    })
}

/// Result of the greedy extraction of a function `g: Xⁿ → Uⁿ ∪ {u₀}`.
#[derive(Clone, Debug)]
pub struct GTable {
    pub n: usize,
    /// `assignment[i]` is the codeword index of the `i`-th word of `Xⁿ` (lexicographic), or `None` for `u₀`.
    pub assignment: Vec<Option<usize>>,
    pub codewords: Vec<Vec<usize>>,
    pub residual_mass: f64,
    pub stalled: bool,
    /// `(1/n) H(Xⁿ | g)`.
    pub h_x_given_g: f64,
    /// Upper estimate of `(1/n) H(Qⁿ | g)`: the sum of per-position marginal entropies within each class.
    pub h_q_given_g: f64,
    pub h_x_given_u: f64,
    pub h_q_given_u: f64,
}

impl GTable {
    /// `|(1/n)H(Xⁿ|g) − H(X|U)| ≤ δ + slack`.
    pub fn x_window_ok(&self, delta: f64, slack: f64) -> bool {
        (self.h_x_given_g - self.h_x_given_u).abs() <= delta + slack
    }

    /// `(1/n)H(Qⁿ|g) ≤ H(Q|U) + δ + slack`.
    pub fn q_window_ok(&self, delta: f64, slack: f64) -> bool {
        self.h_q_given_g <= self.h_q_given_u + delta + slack
    }
}

fn decode(mut idx: usize, base: usize, n: usize) -> Vec<usize> {
    let mut w = vec![0; n];
    for i in (0..n).rev() {
        w[i] = idx % base;
        idx /= base;
    }
    w
}

/// Greedy covering of `Xⁿ` by conditionally typical sets of typical `uⁿ`.
pub fn build_g(
    e: &CQEnsemble,
    w: &AuxChannel,
    n: usize,
    delta: f64,
    epsilon: f64,
) -> Result<GTable> {
    if w.in_size() != e.len() {
        return Err(Error::SizeMismatch(format!(
            "channel input {} vs alphabet {}",
            w.in_size(),
            e.len()
        )));
    }
    if n == 0 || !(delta > 0.0) || !(0.0..1.0).contains(&epsilon) {
        return Err(Error::BadParam(format!(
            "need n ≥ 1, δ > 0, 0 ≤ ε < 1; got {n}, {delta}, {epsilon}"
        )));
    }
    let (mx, mu) = (e.len(), w.out_size());
    let nx = (mx as f64).powi(n as i32);
    if nx > TABLE_MAX_WORDS as f64 {
        return Err(Error::EnvelopeExceeded(format!(
            "|X|^n = {nx} exceeds {TABLE_MAX_WORDS}"
        )));
    }
    let nx = nx as usize;
    let p = e.probs().as_slice();
    let pu = w.output_distribution(e.probs());
    let reverse = AuxChannel::from_flat(
        mu,
        mx,
        (0..mu)
            .flat_map(|u| (0..mx).map(move |x| (u, x)))
            .map(|(u, x)| {
                if pu[u] > 0.0 {
                    p[x] * w.get(x, u) / pu[u]
                } else {
                    1.0 / mx as f64
                }
            })
            .collect(),
    );
    let spec_u = TypicalSetSpec::new(ProbVector::normalized(pu.clone())?, n, delta)?;
    let nu_words = (mu as f64).powi(n as i32);
    let typical_u: Vec<Vec<usize>> = if nu_words <= (1u64 << 24) as f64 {
        (0..nu_words as usize)
            .map(|i| decode(i, mu, n))
            .filter(|u| typical_membership(&spec_u, u).unwrap_or(false))
            .collect()
    } else {
        return Err(Error::EnvelopeExceeded(format!(
            "|U|^n = {nu_words} too large to enumerate"
        )));
    };
    if typical_u.len().saturating_mul(nx) > PAIR_BUDGET {
        return Err(Error::EnvelopeExceeded(format!(
            "{} typical u-words against {nx} x-words",
            typical_u.len()
        )));
    }
    let xprob: Vec<f64> = (0..nx)
        .map(|i| decode(i, mx, n).iter().map(|&x| p[x]).product())
        .collect();
    let xwords: Vec<Vec<usize>> = (0..nx).map(|i| decode(i, mx, n)).collect();
    let covers: Vec<Vec<u32>> = typical_u
        .iter()
        .map(|u| {
            (0..nx)
                .filter(|&i| {
                    xprob[i] > 0.0
                        && conditionally_typical_membership(&reverse, u, &xwords[i], delta)
                            .unwrap_or(false)
                })
                .map(|i| i as u32)
                .collect()
        })
        .collect();

    // lazy greedy: cached masses only shrink as the residual set does
    let mut taken = vec![false; nx];
    let mut assignment: Vec<Option<usize>> = vec![None; nx];
    let mut residual: f64 = xprob.iter().sum();
    let mass_of = |cov: &[u32], taken: &[bool]| -> f64 {
        cov.iter()
            .filter(|&&i| !taken[i as usize])
            .map(|&i| xprob[i as usize])
            .sum()
    };
    let mut cached: Vec<f64> = covers.iter().map(|cv| mass_of(cv, &taken)).collect();
    let mut codewords = Vec::new();
    let mut stalled = false;
    while residual > epsilon {
        let mut best: Option<(usize, f64)> = None;
        let mut order: Vec<usize> = (0..covers.len()).collect();
        order.sort_by(|&a, &b| cached[b].total_cmp(&cached[a]).then(a.cmp(&b)));
        for &j in &order {
            if let Some((bj, bm)) = best {
                if cached[j] < bm || (cached[j] == bm && j > bj) {
                    break;
                }
            }
            let m = mass_of(&covers[j], &taken);
            cached[j] = m;
            match best {
                Some((bj, bm)) if m < bm || (m == bm && j > bj) => {}
                _ => best = Some((j, m)),
            }
        }
        let Some((j, m)) = best else {
            stalled = true;
            break;
        };
        if m <= 0.0 {
            stalled = true;
            break;
        }
        let alpha = codewords.len();
        for &i in &covers[j] {
            if !taken[i as usize] {
                taken[i as usize] = true;
                assignment[i as usize] = Some(alpha);
                residual -= xprob[i as usize];
            }
        }
        cached[j] = 0.0;
        codewords.push(typical_u[j].clone());
    }

    // class masses and per-position marginals of each class
    let classes = codewords.len() + 1;
    let mut mass = vec![0.0; classes];
    let mut marg = vec![vec![vec![0.0; mx]; n]; classes];
    for i in 0..nx {
        let cl = assignment[i].unwrap_or(codewords.len());
        mass[cl] += xprob[i];
        for (pos, &x) in xwords[i].iter().enumerate() {
            marg[cl][pos][x] += xprob[i];
        }
    }
    let total: f64 = mass.iter().sum();
    let h_x: f64 = entropy_of(p) * n as f64;
    let h_g = entropy_of(&mass.iter().map(|m| m / total).collect::<Vec<_>>());
    let mut h_q_g = 0.0;
    for cl in 0..classes {
        if mass[cl] <= 0.0 {
            continue;
        }
        for pos in 0..n {
            let mut m = ComplexMatrix::zeros(e.dim(), e.dim());
            for x in 0..mx {
                m.add_scaled(e.states()[x].matrix(), marg[cl][pos][x] / mass[cl]);
            }
            h_q_g += mass[cl] / total * crate::linalg::spectrum_entropy(&eigh(&m).eigenvalues);
        }
    }
    let i_ux = mutual_info_ux(e.probs(), w)?;
    let states_u: Vec<f64> = (0..mu)
        .map(|u| {
            if pu[u] <= 0.0 {
                return 0.0;
            }
            let mut m = ComplexMatrix::zeros(e.dim(), e.dim());
            for x in 0..mx {
                m.add_scaled(e.states()[x].matrix(), reverse.get(u, x));
            }
            pu[u] * crate::linalg::spectrum_entropy(&eigh(&m).eigenvalues)
        })
        .collect();
    Ok(GTable {
        n,
        assignment,
        codewords,
        residual_mass: residual.max(0.0),
        stalled,
        h_x_given_g: (h_x - h_g) / n as f64,
        h_q_given_g: h_q_g / n as f64,
        h_x_given_u: entropy_of(p) - i_ux,
        h_q_given_u: states_u.iter().sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::named_ensemble;
    use crate::linalg::tensor;

    fn uniform_spec(n: usize, delta: f64) -> TypicalSetSpec {
        TypicalSetSpec::new(ProbVector::uniform(2), n, delta).unwrap()
    }

    #[test]
    fn membership_examples() {
        let s = uniform_spec(4, 0.25);
        assert!(typical_membership(&s, &[0, 0, 1, 1]).unwrap());
        assert!(!typical_membership(&s, &[0, 0, 0, 0]).unwrap());
        assert!(typical_membership(&uniform_spec(4, 1.0), &[0, 0, 0, 0]).unwrap());
        assert!(matches!(
            typical_membership(&s, &[0, 1]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn set_size_matches_enumeration() {
        assert_eq!(typical_set_size(&uniform_spec(4, 0.25)).exact, Some(14));
        assert_eq!(typical_set_size(&uniform_spec(10, 1e-9)).exact, Some(252));
        let one = TypicalSetSpec::new(ProbVector::uniform(3), 1, 1.0).unwrap();
        assert_eq!(typical_set_size(&one).exact, Some(3));
        for n in 1..=12 {
            for &(p, d) in &[(0.3, 0.1), (0.5, 0.05), (0.1, 0.2)] {
                let spec =
                    TypicalSetSpec::new(ProbVector::new(vec![p, 1.0 - p]).unwrap(), n, d).unwrap();
                let brute = (0..1usize << n)
                    .filter(|&i| typical_membership(&spec, &decode(i, 2, n)).unwrap())
                    .count();
                let got = typical_set_size(&spec);
                assert_eq!(got.exact, Some(brute as u128));
                if brute > 0 {
                    assert!((got.log2 - (brute as f64).log2()).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn conditional_membership_examples() {
        let id = AuxChannel::identity(2);
        let u = [0, 1, 1, 0, 1, 0];
        assert!(conditionally_typical_membership(&id, &u, &u, 0.01).unwrap());
        assert!(!conditionally_typical_membership(&id, &u, &[1, 0, 0, 1, 1, 0], 0.1).unwrap());
        let row = AuxChannel::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let x = [0, 1, 0, 0, 1, 1];
        let direct = conditionally_typical_membership(&row, &[0; 6], &x, 0.1).unwrap();
        let spec = TypicalSetSpec::new(ProbVector::uniform(2), 6, 0.1).unwrap();
        assert_eq!(direct, typical_membership(&spec, &x).unwrap());
    }

    #[test]
    fn projector_traces() {
        let pure = DensityMatrix::basis(2, 0);
        assert_eq!(
            typical_projector(&pure, 8, 0.3).unwrap().trace().exact,
            Some(1)
        );
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_eq!(
            typical_projector(&mixed, 9, 0.01).unwrap().trace().exact,
            Some(512)
        );
        let rho = DensityMatrix::diagonal(&[0.85355, 0.14645]).unwrap();
        assert_eq!(
            typical_projector(&rho, 10, 0.1).unwrap().trace().exact,
            Some(55)
        );
    }

    #[test]
    fn handle_matches_dense_projector() {
        let e = named_ensemble("two_state", &[]).unwrap();
        let avg = e.average_state();
        for n in 1..=6 {
            let h = typical_projector(&avg, n, 0.2).unwrap();
            let dense = h.to_dense().unwrap();
            assert!((dense.trace().re - h.trace().exact.unwrap() as f64).abs() < 1e-9);
            let big = (1..n).fold(avg.matrix().clone(), |acc, _| tensor(&acc, avg.matrix()));
            let direct = big.trace_product_re(&dense);
            let via = h.retained_mass(&vec![avg.clone(); n]).unwrap();
            assert!((direct - via).abs() < 1e-10);
            let sx: Vec<DensityMatrix> = (0..n).map(|i| e.states()[i % 2].clone()).collect();
            let big_x = (1..n).fold(sx[0].matrix().clone(), |acc, i| {
                tensor(&acc, sx[i].matrix())
            });
            assert!((big_x.trace_product_re(&dense) - h.retained_mass(&sx).unwrap()).abs() < 1e-10);
        }
        let u = [0, 1, 1, 0, 1];
        let h = cond_typical_projector(&e, &u, 0.3).unwrap();
        assert!((h.to_dense().unwrap().trace().re - h.trace().exact.unwrap() as f64).abs() < 1e-9);
    }

    #[test]
    fn conditional_projector_blocks() {
        let e = crate::ensembles::orthogonal_pair();
        assert_eq!(
            cond_typical_projector(&e, &[0; 5], 0.1)
                .unwrap()
                .trace()
                .exact,
            Some(1)
        );
        let h = cond_typical_projector(
            &named_ensemble("two_state", &[]).unwrap(),
            &[0, 1, 0, 1],
            5.0,
        )
        .unwrap();
        assert_eq!(h.blocks.len(), 2);
        let mixed = trivial(DensityMatrix::maximally_mixed(2));
        assert_eq!(
            cond_typical_projector(&mixed, &[0, 0, 0, 0, 0, 0], 2.0)
                .unwrap()
                .trace()
                .exact,
            Some(64)
        );
    }

    fn trivial(s: DensityMatrix) -> CQEnsemble {
        crate::ensembles::trivial_ensemble(s)
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        let (lo, hi) = wilson_interval(80, 100);
        assert!(lo < 0.8 && hi > 0.8 && lo > 0.7 && hi < 0.88);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn lemma3_edge_cases_and_random_draws() {
        let sigma = DensityMatrix::maximally_mixed(4);
        let (l, r) = lemma3_sides(&sigma, &ComplexMatrix::identity(4));
        assert!(l <= r && (r - (1.0 + 5f64.log2())).abs() < 1e-12);
        let (l, r) = lemma3_sides(&sigma, &ComplexMatrix::zeros(4, 4));
        assert!(l <= r && (r - 3.0).abs() < 1e-12);
        let rep = lemma3_check(8, 200, 7).unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn trace_bound_ladder() {
        let e = named_ensemble("two_state", &[]).unwrap();
        let rep =
            verify_trace_bounds(&e, &AuxChannel::identity(2), &[8, 12, 16], 0.15, 200, 42).unwrap();
        assert!(rep.mass_nondecreasing);
        let last = rep
            .rows
            .iter()
            .filter(|r| r.quantity == "mass_q_exact")
            .last()
            .unwrap();
        assert!(last.value >= 0.8 && last.n == 16);
        assert!(rep.c_fit_of("q").unwrap() <= rep.c_bound);
        let flat = crate::ensembles::trivial_ensemble(DensityMatrix::maximally_mixed(2));
        let rep =
            verify_trace_bounds(&flat, &AuxChannel::identity(1), &[5, 9], 0.05, 20, 1).unwrap();
        for r in rep
            .rows
            .iter()
            .filter(|r| r.quantity.starts_with("log2_trace_q") || r.quantity.starts_with("mass"))
        {
            assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
        }
        assert!(rows_to_csv(&rep.rows).starts_with("n,delta,quantity,value,ci_low,ci_high\n"));
    }

    #[test]
    fn build_g_limits() {
        let e = named_ensemble("two_state", &[]).unwrap();
        let g = build_g(&e, &AuxChannel::identity(2), 8, 0.01, 0.05).unwrap();
        for (i, a) in g.assignment.iter().enumerate() {
            if let Some(a) = a {
                assert_eq!(g.codewords[*a], decode(i, 2, 8));
            }
        }
        assert!(
            g.h_x_given_g <= g.residual_mass + 1e-12,
            "{} {}",
            g.h_x_given_g,
            g.residual_mass
        );
        let g = build_g(&e, &AuxChannel::constant(2, 1), 8, 0.3, 0.05).unwrap();
        assert_eq!(g.codewords.len(), 1);
        assert!((g.h_x_given_g - 1.0).abs() < 0.1);
    }
}
