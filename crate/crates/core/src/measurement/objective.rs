use crate::ensembles::BipartiteState;
use crate::linalg::{c, eigh, vn_entropy, xlog2x_neg, ComplexMatrix, Spectrum, C64};

const LIVE_OUTCOME: f64 = 1e-14;
const LOG_FLOOR: f64 = 1e-300;

/// `I(X;B)` of the outcome of a rank-one POVM on Alice's side, as a function of
/// `K` unnormalized kets packed as `[re, im]` pairs (ket-major).
///
/// The POVM is `E_x = S^{-1/2}|v_x⟩⟨v_x|S^{-1/2}`, so every parameter vector whose
/// kets span the space is a valid measurement.
#[derive(Clone, Debug)]
pub struct PovmObjective {
    dim_a: usize,
    dim_b: usize,
    outcomes: usize,
    /// `blocks[a * dim_a + b]` is the `(a, b)` block of the state, a `dim_b × dim_b` matrix.
    blocks: Vec<ComplexMatrix>,
    entropy_b: f64,
}

struct Frame {
    inv_sqrt: ComplexMatrix,
    spec: Spectrum,
}

impl PovmObjective {
    pub fn new(rho: &BipartiteState, outcomes: usize) -> Self {
        let (da, db) = (rho.dim_a(), rho.dim_b());
        let m = rho.state().matrix();
        let blocks = (0..da * da)
            .map(|ab| {
                let (a, b) = (ab / da, ab % da);
                ComplexMatrix::from_fn(db, db, |k, l| m[(a * db + k, b * db + l)])
            })
            .collect();
        Self {
            dim_a: da,
            dim_b: db,
            outcomes,
            blocks,
            entropy_b: vn_entropy(&rho.reduced_b()),
        }
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn n_params(&self) -> usize {
        2 * self.outcomes * self.dim_a
    }

    pub fn kets(&self, params: &[f64]) -> Vec<Vec<C64>> {
        params
            .chunks(2 * self.dim_a)
            .map(|k| k.chunks(2).map(|z| c(z[0], z[1])).collect())
            .collect()
    }

    pub fn params(kets: &[Vec<C64>]) -> Vec<f64> {
        kets.iter()
            .flat_map(|k| k.iter().flat_map(|z| [z.re, z.im]))
            .collect()
    }

    fn frame(&self, kets: &[Vec<C64>]) -> Option<Frame> {
        let mut s = ComplexMatrix::zeros(self.dim_a, self.dim_a);
        for v in kets {
            s.add_scaled(&ComplexMatrix::outer(v), 1.0);
        }
        let spec = eigh(&s);
        let low = *spec.eigenvalues.last().unwrap();
        if !(low > 1e-12 * spec.eigenvalues[0]) {
            return None;
        }
        Some(Frame {
            inv_sqrt: spec.apply(|t| t.powf(-0.5)),
            spec,
        })
    }

    /// Bob's unnormalized conditional state for the effect `|w⟩⟨w|`.
    fn conditional(&self, w: &[C64]) -> ComplexMatrix {
        let (da, db) = (self.dim_a, self.dim_b);
        let mut out = ComplexMatrix::zeros(db, db);
        for a in 0..da {
            for b in 0..da {
                let coef = w[a].conj() * w[b];
                if coef.norm_sqr() == 0.0 {
                    continue;
                }
                let blk = &self.blocks[a * da + b];
                for k in 0..db {
                    for l in 0..db {
                        out[(k, l)] += coef * blk[(k, l)];
                    }
                }
            }
        }
        out.hermitian_part()
    }

    /// `Σ_x [Tr σ_x log σ_x − p_x log p_x]` plus `S(B)`.
    pub fn value(&self, params: &[f64]) -> f64 {
        let kets = self.kets(params);
        let Some(fr) = self.frame(&kets) else {
            return f64::NEG_INFINITY;
        };
        let mut acc = self.entropy_b;
        for v in &kets {
            let w = fr.inv_sqrt.mul_vec(v);
            let spec = eigh(&self.conditional(&w));
            let p: f64 = spec.eigenvalues.iter().map(|l| l.max(0.0)).sum();
            if p < LIVE_OUTCOME {
                continue;
            }
            acc += spec
                .eigenvalues
                .iter()
                .map(|&l| -xlog2x_neg(l))
                .sum::<f64>()
                + xlog2x_neg(p);
        }
        acc
    }

    /// Value and gradient with respect to the packed ket parameters.
    pub fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let da = self.dim_a;
        let kets = self.kets(params);
        let mut grad = vec![0.0; params.len()];
        let Some(fr) = self.frame(&kets) else {
            return (f64::NEG_INFINITY, grad);
        };
        let t = &fr.inv_sqrt;
        let mut acc = self.entropy_b;
        let mut pulled: Vec<Vec<C64>> = Vec::with_capacity(kets.len());
        let mut yh = ComplexMatrix::zeros(da, da);
        for v in &kets {
            let w = t.mul_vec(v);
            let spec = eigh(&self.conditional(&w));
            let p: f64 = spec.eigenvalues.iter().map(|l| l.max(0.0)).sum();
            if p < LIVE_OUTCOME {
                pulled.push(vec![c(0.0, 0.0); da]);
                continue;
            }
            acc += spec
                .eigenvalues
                .iter()
                .map(|&l| -xlog2x_neg(l))
                .sum::<f64>()
                + xlog2x_neg(p);
            let lp = p.log2();
            let g = spec.apply(|l| l.max(LOG_FLOOR).log2() - lp);
            // M_ab = Tr(R_ab G), so that dF = Tr(dE M)
            let m = ComplexMatrix::from_fn(da, da, |a, b| trace_prod(&self.blocks[a * da + b], &g));
            let mw = m.mul_vec(&w);
            for i in 0..da {
                for j in 0..da {
                    yh[(i, j)] += v[i] * mw[j].conj() + mw[i] * v[j].conj();
                }
            }
            pulled.push(t.mul_vec(&mw));
        }
        // derivative through S^{-1/2}: Fréchet derivative via divided differences
        let z = frechet_adjoint(&fr.spec, &yh, |s| s.powf(-0.5), |s| -0.5 * s.powf(-1.5));
        for (x, v) in kets.iter().enumerate() {
            let zv = z.mul_vec(v);
            for i in 0..da {
                let gx = 2.0 * (pulled[x][i] + zv[i]);
                grad[2 * (x * da + i)] = gx.re;
                grad[2 * (x * da + i) + 1] = gx.im;
            }
        }
        (acc, grad)
    }
}

/// `Σ_ij a_ij b_ji`.
fn trace_prod(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.rows();
    let mut acc = c(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `Z` with `Tr(Df(S)[dS] Y) = Tr(dS Z)` for Hermitian `Y`.
fn frechet_adjoint(
    spec: &Spectrum,
    y: &ComplexMatrix,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
) -> ComplexMatrix {
    let n = spec.eigenvalues.len();
    let v = &spec.eigenvectors;
    let s = &spec.eigenvalues;
    let yt = &(&v.adjoint() * y) * v;
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| {
        let gap = s[i] - s[j];
        let dd = if gap.abs() > 1e-10 * s[i].abs().max(s[j].abs()) {
            (f(s[i]) - f(s[j])) / gap
        } else {
            df(0.5 * (s[i] + s[j]))
        };
        yt[(i, j)] * dd
    });
    &(v * &scaled) * &v.adjoint()
}
