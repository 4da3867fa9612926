//! Classical-quantum ensembles, auxiliary channels, bipartite states and their
//! block-diagonal ("enlarged Hilbert space") embeddings.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{c, partial_trace, tensor, ComplexMatrix, DensityMatrix, Keep, C64, STATE_TOL};
use crate::measurement::Povm;

/// Outcomes rarer than this are dropped by [`measure_ensemble`].
pub const OUTCOME_PRUNE: f64 = 1e-12;

/// A probability distribution over `0..len`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbabilities("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidProbabilities(format!("entry {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidProbabilities(format!("sum {total}")));
        }
        Ok(Self(probs))
    }

    /// Rescales nonnegative weights to sum one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidProbabilities(format!(
                "weights sum to {total}"
            )));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        crate::info::shannon_entropy(self)
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// An ensemble `{ρ_x, p(x)}` on a `dim`-dimensional quantum system.
#[derive(Clone, Debug)]
pub struct CQEnsemble {
    pub label: Option<String>,
    probs: ProbVector,
    states: Vec<DensityMatrix>,
}

impl CQEnsemble {
    pub fn new(probs: ProbVector, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.len() != states.len() {
            return Err(Error::SizeMismatch(format!(
                "{} probabilities for {} states",
                probs.len(),
                states.len()
            )));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::SizeMismatch("states of differing dimension".into()));
        }
        Ok(Self {
            label: None,
            probs,
            states,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn from_kets(probs: ProbVector, kets: &[Vec<C64>]) -> Result<Self> {
        let states = kets
            .iter()
            .map(|k| DensityMatrix::from_ket(k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(probs, states)
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// Alphabet size `|X|`.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn probs(&self) -> &ProbVector {
        &self.probs
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    /// `Σ_x p(x) ρ_x`.
    pub fn average_state(&self) -> DensityMatrix {
        let mut avg = ComplexMatrix::zeros(self.dim(), self.dim());
        for (p, s) in self.probs.as_slice().iter().zip(&self.states) {
            avg.add_scaled(s.matrix(), *p);
        }
        DensityMatrix::from_trusted(avg)
    }

    pub fn is_pure(&self) -> bool {
        self.states.iter().all(|s| s.is_pure(1e-8))
    }

    /// Product ensemble on `X₁×X₂` (index `x₁·|X₂| + x₂`) with states `ρ_x ⊗ σ_x'`.
    pub fn tensor(&self, other: &CQEnsemble) -> CQEnsemble {
        let mut probs = Vec::with_capacity(self.len() * other.len());
        let mut states = Vec::with_capacity(self.len() * other.len());
        for (p, r) in self.probs.as_slice().iter().zip(&self.states) {
            for (q, s) in other.probs.as_slice().iter().zip(&other.states) {
                probs.push(p * q);
                states.push(r.tensor(s));
            }
        }
        let total: f64 = probs.iter().sum();
        let probs = ProbVector(probs.into_iter().map(|p| p / total).collect());
        let label = match (&self.label, &other.label) {
            (Some(a), Some(b)) => Some(format!("{a}x{b}")),
            _ => None,
        };
        CQEnsemble {
            label,
            probs,
            states,
        }
    }
}

/// Stochastic matrix `Q(u|x)`; rows indexed by `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxChannel {
    in_size: usize,
    out_size: usize,
    entries: Vec<f64>,
}

impl AuxChannel {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::SizeMismatch("empty channel".into()));
        }
        let out_size = rows[0].len();
        if rows.iter().any(|r| r.len() != out_size) {
            return Err(Error::SizeMismatch("ragged channel rows".into()));
        }
        let in_size = rows.len();
        let mut entries = Vec::with_capacity(in_size * out_size);
        for r in rows {
            entries.extend(ProbVector::new(r)?.0);
        }
        Ok(Self {
            in_size,
            out_size,
            entries,
        })
    }

    /// Trusted constructor: rows are renormalized, entries assumed nonnegative.
    pub(crate) fn from_flat(in_size: usize, out_size: usize, mut entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), in_size * out_size);
        for row in entries.chunks_mut(out_size) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
        Self {
            in_size,
            out_size,
            entries,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::identity_padded(n, n)
    }

    /// `u = x` with `out_size - in_size` unused outputs.
    pub fn identity_padded(n: usize, out_size: usize) -> Self {
        assert!(out_size >= n);
        let mut entries = vec![0.0; n * out_size];
        for x in 0..n {
            entries[x * out_size + x] = 1.0;
        }
        Self {
            in_size: n,
            out_size,
            entries,
        }
    }

    /// Every input mapped to output 0.
    pub fn constant(n: usize, out_size: usize) -> Self {
        let mut entries = vec![0.0; n * out_size];
        for x in 0..n {
            entries[x * out_size] = 1.0;
        }
        Self {
            in_size: n,
            out_size,
            entries,
        }
    }

    /// Binary symmetric channel with the given flip probability.
    pub fn binary_symmetric(flip: f64) -> Result<Self> {
        Self::from_rows(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]])
    }

    /// Deterministic map `x ↦ f[x]`.
    pub fn deterministic(f: &[usize], out_size: usize) -> Self {
        let mut entries = vec![0.0; f.len() * out_size];
        for (x, &u) in f.iter().enumerate() {
            entries[x * out_size + u] = 1.0;
        }
        Self {
            in_size: f.len(),
            out_size,
            entries,
        }
    }

    /// Time-sharing: `(1, U₁)` with probability `lambda`, `(2, U₂)` otherwise.
    pub fn time_share(lambda: f64, first: &AuxChannel, second: &AuxChannel) -> Result<Self> {
        if first.in_size != second.in_size {
            return Err(Error::SizeMismatch(
                "time-sharing channels with different inputs".into(),
            ));
        }
        let out = first.out_size + second.out_size;
        let mut entries = Vec::with_capacity(first.in_size * out);
        for x in 0..first.in_size {
            entries.extend(first.row(x).iter().map(|v| v * lambda));
            entries.extend(second.row(x).iter().map(|v| v * (1.0 - lambda)));
        }
        Ok(Self {
            in_size: first.in_size,
            out_size: out,
            entries,
        })
    }

    pub fn in_size(&self) -> usize {
        self.in_size
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    #[inline]
    pub fn get(&self, x: usize, u: usize) -> f64 {
        self.entries[x * self.out_size + u]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.entries[x * self.out_size..(x + 1) * self.out_size]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.out_size)
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Output marginal `p(u) = Σ_x p(x) Q(u|x)`.
    pub fn output_distribution(&self, p: &ProbVector) -> Vec<f64> {
        let mut pu = vec![0.0; self.out_size];
        for x in 0..self.in_size {
            for (u, w) in self.row(x).iter().enumerate() {
                pu[u] += p[x] * w;
            }
        }
        pu
    }

    /// Zeroes entries below `threshold` and renormalizes rows.
    pub fn sparsified(&self, threshold: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|&v| if v < threshold { 0.0 } else { v })
            .collect();
        Self::from_flat(self.in_size, self.out_size, entries)
    }
}

/// A density operator on `C^{dim_a} ⊗ C^{dim_b}`.
#[derive(Clone, Debug)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    state: DensityMatrix,
}

impl BipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, state: DensityMatrix) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || state.dim() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "{}-dim state on {dim_a}x{dim_b}",
                state.dim()
            )));
        }
        Ok(Self {
            dim_a,
            dim_b,
            state,
        })
    }

    pub fn from_ket(dim_a: usize, dim_b: usize, ket: &[C64]) -> Result<Self> {
        Self::new(dim_a, dim_b, DensityMatrix::from_ket(ket)?)
    }

    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        Self {
            dim_a: a.dim(),
            dim_b: b.dim(),
            state: a.tensor(b),
        }
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell() -> Self {
        let s = FRAC_1_SQRT_2;
        Self::from_ket(2, 2, &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)])
            .expect("valid Bell state")
    }

    /// `cos θ |00⟩ + sin θ |11⟩`.
    pub fn schmidt_pair(theta: f64) -> Self {
        Self::from_ket(
            2,
            2,
            &[
                c(theta.cos(), 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(theta.sin(), 0.0),
            ],
        )
        .expect("valid Schmidt state")
    }

    /// `Σ_j q_j τ̂_j ⊗ τ_j`.
    pub fn separable(
        weights: &ProbVector,
        parts: &[(DensityMatrix, DensityMatrix)],
    ) -> Result<Self> {
        if weights.len() != parts.len() || parts.is_empty() {
            return Err(Error::SizeMismatch(
                "mixture weights and parts differ".into(),
            ));
        }
        let (da, db) = (parts[0].0.dim(), parts[0].1.dim());
        let mut m = ComplexMatrix::zeros(da * db, da * db);
        for (q, (a, b)) in weights.as_slice().iter().zip(parts) {
            if a.dim() != da || b.dim() != db {
                return Err(Error::DimensionMismatch(
                    "separable parts of differing dimension".into(),
                ));
            }
            m.add_scaled(&tensor(a.matrix(), b.matrix()), *q);
        }
        Self::new(da, db, DensityMatrix::from_trusted(m))
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn reduced_a(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(
            partial_trace(self.state.matrix(), self.dim_a, self.dim_b, Keep::A).unwrap(),
        )
    }

    pub fn reduced_b(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(
            partial_trace(self.state.matrix(), self.dim_a, self.dim_b, Keep::B).unwrap(),
        )
    }

    /// Exchanges the roles of the two parties.
    pub fn swapped(&self) -> Self {
        let (da, db) = (self.dim_a, self.dim_b);
        let m = self.state.matrix();
        let swapped = ComplexMatrix::from_fn(da * db, da * db, |r, s| {
            let (bi, ai) = (r / da, r % da);
            let (bj, aj) = (s / da, s % da);
            m[(ai * db + bi, aj * db + bj)]
        });
        Self {
            dim_a: db,
            dim_b: da,
            state: DensityMatrix::from_trusted(swapped),
        }
    }

    /// `ρ^{AB} ⊗ σ^{A'B'}` regrouped as a state on `(AA')(BB')`.
    pub fn tensor(&self, other: &BipartiteState) -> Self {
        let (a1, b1, a2, b2) = (self.dim_a, self.dim_b, other.dim_a, other.dim_b);
        let big = tensor(self.state.matrix(), other.state.matrix());
        let n = a1 * a2 * b1 * b2;
        // new index (a, a', b, b') -> old index (a, b, a', b')
        let old = |idx: usize| -> usize {
            let bb = idx % b2;
            let r = idx / b2;
            let b = r % b1;
            let r = r / b1;
            let aa = r % a2;
            let a = r / a2;
            ((a * b1 + b) * a2 + aa) * b2 + bb
        };
        let map: Vec<usize> = (0..n).map(old).collect();
        let m = ComplexMatrix::from_fn(n, n, |i, j| big[(map[i], map[j])]);
        Self {
            dim_a: a1 * a2,
            dim_b: b1 * b2,
            state: DensityMatrix::from_trusted(m),
        }
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.state.is_pure(tol)
    }
}

/// Block-diagonal state over classical registers and one quantum register.
///
/// Each block is the unnormalized operator `p(i₁,…,i_k) ρ_{i₁…i_k}` attached to
/// a classical index tuple; blocks with zero weight are omitted.
#[derive(Clone, Debug)]
pub struct EhsState {
    classical_dims: Vec<usize>,
    quantum_dim: usize,
    blocks: Vec<(Vec<usize>, ComplexMatrix)>,
}

impl EhsState {
    pub fn new(
        classical_dims: Vec<usize>,
        quantum_dim: usize,
        blocks: Vec<(Vec<usize>, ComplexMatrix)>,
    ) -> Result<Self> {
        for (idx, b) in &blocks {
            if idx.len() != classical_dims.len()
                || idx.iter().zip(&classical_dims).any(|(i, d)| i >= d)
            {
                return Err(Error::DimensionMismatch(format!(
                    "classical index {idx:?} for registers {classical_dims:?}"
                )));
            }
            if b.rows() != quantum_dim || b.cols() != quantum_dim {
                return Err(Error::DimensionMismatch("block of wrong size".into()));
            }
        }
        let total: f64 = blocks.iter().map(|(_, b)| b.trace().re).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!(
                "blocks carry total weight {total}"
            )));
        }
        Ok(Self {
            classical_dims,
            quantum_dim,
            blocks,
        })
    }

    pub fn classical_dims(&self) -> &[usize] {
        &self.classical_dims
    }

    pub fn quantum_dim(&self) -> usize {
        self.quantum_dim
    }

    pub fn blocks(&self) -> &[(Vec<usize>, ComplexMatrix)] {
        &self.blocks
    }

    /// Dense matrix, registers ordered classical first then quantum.
    pub fn to_density_matrix(&self) -> DensityMatrix {
        let cdim: usize = self.classical_dims.iter().product();
        let d = self.quantum_dim;
        let mut m = ComplexMatrix::zeros(cdim * d, cdim * d);
        for (idx, b) in &self.blocks {
            let flat = idx
                .iter()
                .zip(&self.classical_dims)
                .fold(0, |acc, (&i, &n)| acc * n + i);
            for i in 0..d {
                for j in 0..d {
                    m[(flat * d + i, flat * d + j)] += b[(i, j)];
                }
            }
        }
        DensityMatrix::from_trusted(m)
    }

    /// All register dimensions, quantum last.
    pub fn register_dims(&self) -> Vec<usize> {
        let mut dims = self.classical_dims.clone();
        dims.push(self.quantum_dim);
        dims
    }
}

/// `Σ_x p(x) |x⟩⟨x| ⊗ ρ_x`.
pub fn ehs_embed(e: &CQEnsemble) -> EhsState {
    let blocks = e
        .probs
        .as_slice()
        .iter()
        .zip(&e.states)
        .enumerate()
        .filter(|(_, (p, _))| **p > 0.0)
        .map(|(x, (p, s))| (vec![x], s.matrix().scale(*p)))
        .collect();
    EhsState {
        classical_dims: vec![e.len()],
        quantum_dim: e.dim(),
        blocks,
    }
}

/// `Σ_{x,u} p(x) Q(u|x) |u⟩⟨u| ⊗ |x⟩⟨x| ⊗ ρ_x`; registers ordered `[U, X]`.
pub fn extend_with_channel(e: &CQEnsemble, w: &AuxChannel) -> Result<EhsState> {
    if w.in_size() != e.len() {
        return Err(Error::SizeMismatch(format!(
            "channel input {} vs alphabet {}",
            w.in_size(),
            e.len()
        )));
    }
    let mut blocks = Vec::new();
    for u in 0..w.out_size() {
        for x in 0..e.len() {
            let weight = e.probs[x] * w.get(x, u);
            if weight > 0.0 {
                blocks.push((vec![u, x], e.states[x].matrix().scale(weight)));
            }
        }
    }
    Ok(EhsState {
        classical_dims: vec![w.out_size(), e.len()],
        quantum_dim: e.dim(),
        blocks,
    })
}

/// Classical-quantum state with Alice holding the ensemble states and Bob the label:
/// `Σ_x p(x) ρ_x ⊗ |x⟩⟨x|`.
pub fn swapped_embedding(e: &CQEnsemble) -> BipartiteState {
    let n = e.len();
    let mut m = ComplexMatrix::zeros(e.dim() * n, e.dim() * n);
    for (x, (p, s)) in e.probs.as_slice().iter().zip(&e.states).enumerate() {
        m.add_scaled(&tensor(s.matrix(), DensityMatrix::basis(n, x).matrix()), *p);
    }
    BipartiteState::new(e.dim(), n, DensityMatrix::from_trusted(m)).expect("dims agree")
}

/// Classical-quantum state with Alice holding the label: `Σ_x p(x) |x⟩⟨x| ⊗ ρ_x`.
pub fn cq_state(e: &CQEnsemble) -> BipartiteState {
    BipartiteState::new(e.len(), e.dim(), ehs_embed(e).to_density_matrix()).expect("dims agree")
}

/// `Tr_A((E ⊗ 1) ρ)` for an effect `E` on Alice's side.
pub(crate) fn conditional_operator(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    effect: &ComplexMatrix,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(dim_b, dim_b);
    for i in 0..dim_a {
        for j in 0..dim_a {
            let e = effect[(i, j)];
            if e.re == 0.0 && e.im == 0.0 {
                continue;
            }
            for k in 0..dim_b {
                for l in 0..dim_b {
                    out[(k, l)] += e * rho[(j * dim_b + k, i * dim_b + l)];
                }
            }
        }
    }
    out
}

/// Bob's ensemble after Alice measures `m`; negligible outcomes are dropped.
pub fn measure_ensemble(rho: &BipartiteState, m: &Povm) -> Result<CQEnsemble> {
    if m.dim() != rho.dim_a {
        return Err(Error::InvalidPovm(format!(
            "POVM on dimension {} for Alice dimension {}",
            m.dim(),
            rho.dim_a
        )));
    }
    let mut weights = Vec::new();
    let mut ops = Vec::new();
    for e in m.elements() {
        let op = conditional_operator(rho.state.matrix(), rho.dim_a, rho.dim_b, e).hermitian_part();
        let p = op.trace().re;
        if p >= OUTCOME_PRUNE {
            weights.push(p);
            ops.push(op.scale(1.0 / p));
        }
    }
    let probs = ProbVector::normalized(weights)?;
    let states = ops.into_iter().map(DensityMatrix::from_trusted).collect();
    CQEnsemble::new(probs, states)
}

/// The built-in ensembles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NamedEnsemble {
    /// `{|0⟩, |+⟩}`, equiprobable.
    TwoState,
    /// `{|0⟩, |+⟩, |2⟩}` in three dimensions, equiprobable.
    ThreeState,
    /// Four equiprobable qubit states at angles `0, θ, π/2, π/2 + θ`.
    Bb84(f64),
    /// Fibonacci-lattice discretization of the uniform Bloch-sphere ensemble.
    UniformSphere(usize),
}

impl NamedEnsemble {
    pub fn build(self) -> Result<CQEnsemble> {
        let s = FRAC_1_SQRT_2;
        let e = match self {
            NamedEnsemble::TwoState => CQEnsemble::from_kets(
                ProbVector::uniform(2),
                &[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(s, 0.0), c(s, 0.0)]],
            )?
            .with_label("two_state"),
            NamedEnsemble::ThreeState => {
                let z = c(0.0, 0.0);
                CQEnsemble::from_kets(
                    ProbVector::uniform(3),
                    &[
                        vec![c(1.0, 0.0), z, z],
                        vec![c(s, 0.0), c(s, 0.0), z],
                        vec![z, z, c(1.0, 0.0)],
                    ],
                )?
                .with_label("three_state")
            }
            NamedEnsemble::Bb84(theta) => {
                if !theta.is_finite() {
                    return Err(Error::BadParam(format!("bb84 angle {theta}")));
                }
                if !(theta > 0.0 && theta <= PI / 4.0) {
                    log::warn!("bb84 angle {theta} outside (0, pi/4]");
                }
                let (ct, st) = (theta.cos(), theta.sin());
                CQEnsemble::from_kets(
                    ProbVector::uniform(4),
                    &[
                        vec![c(1.0, 0.0), c(0.0, 0.0)],
                        vec![c(ct, 0.0), c(st, 0.0)],
                        vec![c(0.0, 0.0), c(1.0, 0.0)],
                        vec![c(-st, 0.0), c(ct, 0.0)],
                    ],
                )?
                .with_label(format!("bb84({theta})"))
            }
            NamedEnsemble::UniformSphere(n) => {
                if n == 0 {
                    return Err(Error::BadParam(
                        "uniform_sphere needs at least one point".into(),
                    ));
                }
                let golden = PI * (3.0 - 5f64.sqrt());
                let kets: Vec<Vec<C64>> = (0..n)
                    .map(|i| {
                        let z = 1.0 - (2 * i + 1) as f64 / n as f64;
                        let polar = z.clamp(-1.0, 1.0).acos();
                        let azimuth = golden * i as f64;
                        vec![
                            c((polar / 2.0).cos(), 0.0),
                            C64::from_polar((polar / 2.0).sin(), azimuth),
                        ]
                    })
                    .collect();
                CQEnsemble::from_kets(ProbVector::uniform(n), &kets)?
                    .with_label(format!("uniform_sphere({n})"))
            }
        };
        Ok(e)
    }
}

/// Builds a named ensemble from its identifier: `two_state`, `three_state`,
/// `bb84` (parameter θ, default π/8) or `uniform_sphere` (parameter N, default 64).
pub fn named_ensemble(name: &str, params: &[f64]) -> Result<CQEnsemble> {
    let named = match name {
        "two_state" => NamedEnsemble::TwoState,
        "three_state" => NamedEnsemble::ThreeState,
        "bb84" => NamedEnsemble::Bb84(params.first().copied().unwrap_or(PI / 8.0)),
        "uniform_sphere" => {
            let n = params.first().copied().unwrap_or(64.0);
            if !(n >= 1.0) || n.fract() != 0.0 {
                return Err(Error::BadParam(format!("uniform_sphere point count {n}")));
            }
            NamedEnsemble::UniformSphere(n as usize)
        }
        other => return Err(Error::UnknownName(other.to_string())),
    };
    named.build()
}

/// `{|0⟩, |1⟩}`, equiprobable.
pub fn orthogonal_pair() -> CQEnsemble {
    CQEnsemble::new(
        ProbVector::uniform(2),
        vec![DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)],
    )
    .expect("valid ensemble")
    .with_label("orthogonal_pair")
}

/// A single state with probability one.
pub fn trivial_ensemble(state: DensityMatrix) -> CQEnsemble {
    CQEnsemble::new(ProbVector::uniform(1), vec![state])
        .expect("valid ensemble")
        .with_label("trivial")
}
