use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, eigh, ComplexMatrix, C64};

const PSD_SLACK: f64 = 1e-9;
const COMPLETENESS_TOL: f64 = 1e-8;

/// A measurement: positive operators summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?
            .rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, e) in elements.iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::InvalidPovm(format!(
                    "element {i} has the wrong shape"
                )));
            }
            if e.hermitian_deviation() > COMPLETENESS_TOL {
                return Err(Error::InvalidPovm(format!("element {i} is not Hermitian")));
            }
            let low = *eigh(e).eigenvalues.last().unwrap();
            if low < -PSD_SLACK {
                return Err(Error::InvalidPovm(format!(
                    "element {i} has eigenvalue {low:.3e}"
                )));
            }
            sum.add_scaled(e, 1.0);
        }
        let resid = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if resid > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {resid:.3e}"
            )));
        }
        Ok(Self { dim, elements })
    }

    /// `E_x = S^{-1/2} |v_x⟩⟨v_x| S^{-1/2}` with `S = Σ_x |v_x⟩⟨v_x|`; the kets must span the space.
    pub fn from_kets(kets: &[Vec<C64>]) -> Result<Self> {
        let dim = kets
            .first()
            .ok_or_else(|| Error::InvalidPovm("no kets".into()))?
            .len();
        let (inv_sqrt, _) = frame_inverse_sqrt(kets, dim)?;
        let elements = kets
            .iter()
            .map(|v| {
                let w = inv_sqrt.mul_vec(v);
                ComplexMatrix::outer(&w)
            })
            .collect();
        Ok(Self { dim, elements })
    }

    /// Projectors onto the computational basis.
    pub fn computational(dim: usize) -> Self {
        Self::from_basis(&ComplexMatrix::identity(dim))
    }

    /// Projectors onto the columns of a unitary.
    pub fn from_basis(u: &ComplexMatrix) -> Self {
        let elements = (0..u.cols())
            .map(|j| ComplexMatrix::outer(&u.column(j)))
            .collect();
        Self {
            dim: u.rows(),
            elements,
        }
    }

    /// The single-outcome measurement `{1}`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            elements: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// `{E_x ⊗ F_y}` with outcome index `x·|F| + y`.
    pub fn tensor(&self, other: &Povm) -> Povm {
        let mut elements = Vec::with_capacity(self.len() * other.len());
        for e in &self.elements {
            for f in &other.elements {
                elements.push(crate::linalg::tensor(e, f));
            }
        }
        Povm {
            dim: self.dim * other.dim,
            elements,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Max entry-wise deviation of `Σ E_x` from the identity.
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.elements {
            sum.add_scaled(e, 1.0);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// Drops elements with trace below `tol`.
    pub fn pruned(&self, tol: f64) -> Povm {
        let elements: Vec<_> = self
            .elements
            .iter()
            .filter(|e| e.trace().re > tol)
            .cloned()
            .collect();
        let dropped: Vec<_> = self
            .elements
            .iter()
            .filter(|e| e.trace().re <= tol)
            .collect();
        let mut elements = elements;
        if let Some(first) = elements.first_mut() {
            for d in dropped {
                first.add_scaled(d, 1.0);
            }
        }
        Povm {
            dim: self.dim,
            elements,
        }
    }
}

/// `(S^{-1/2}, spectrum of S)` for the frame operator of a set of kets.
pub(crate) fn frame_inverse_sqrt(
    kets: &[Vec<C64>],
    dim: usize,
) -> Result<(ComplexMatrix, crate::linalg::Spectrum)> {
    let mut s = ComplexMatrix::zeros(dim, dim);
    for v in kets {
        if v.len() != dim {
            return Err(Error::InvalidPovm("kets of differing length".into()));
        }
        s.add_scaled(&ComplexMatrix::outer(v), 1.0);
    }
    let spec = eigh(&s);
    let smallest = *spec.eigenvalues.last().unwrap();
    if smallest <= 1e-12 * spec.eigenvalues[0].max(1e-300) {
        return Err(Error::InvalidPovm("kets do not span the space".into()));
    }
    Ok((spec.apply(|t| t.powf(-0.5)), spec))
}

/// A complex Gaussian vector; normalized, it is Haar distributed.
pub(crate) fn gaussian_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    (0..dim)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// A Haar-random unitary (columns from Gram-Schmidt on Gaussian vectors).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = gaussian_ket(dim, rng);
        for q in &cols {
            let ov: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= ov * y);
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Random `k`-outcome POVM. For `k ≥ dim` the outcomes are symmetrized Haar kets;
/// for `k < dim` they are sums of projectors onto a random basis, grouped.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Povm {
    assert!(k >= 1 && dim >= 1);
    if k == 1 {
        return Povm::trivial(dim);
    }
    if k < dim {
        let u = random_unitary(dim, rng);
        let mut elements = vec![ComplexMatrix::zeros(dim, dim); k];
        for j in 0..dim {
            elements[j % k].add_scaled(&ComplexMatrix::outer(&u.column(j)), 1.0);
        }
        return Povm { dim, elements };
    }
    loop {
        let kets: Vec<Vec<C64>> = (0..k).map(|_| gaussian_ket(dim, rng)).collect();
        if let Ok(p) = Povm::from_kets(&kets) {
            return p;
        }
    }
}
