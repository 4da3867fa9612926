//! Reference values computed without the library's numerics.

#![allow(dead_code)]

use std::f64::consts::{LN_2, PI};

pub fn h2(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

/// Holevo quantity of `{|0⟩, |+⟩}` with equal weights: the average state has
/// eigenvalues `(1 ± 2^{-1/2}) / 2`.
pub fn two_state_chi() -> f64 {
    h2((1.0 + 0.5f64.sqrt()) / 2.0)
}

/// Mutual information of a joint distribution given as `p(x) p(y|x)`.
pub fn classical_mi(px: &[f64], channel: &[Vec<f64>]) -> f64 {
    let ny = channel[0].len();
    let py: Vec<f64> = (0..ny)
        .map(|y| px.iter().zip(channel).map(|(p, row)| p * row[y]).sum())
        .collect();
    let mut acc = 0.0;
    for (p, row) in px.iter().zip(channel) {
        for (y, &q) in row.iter().enumerate() {
            let j = p * q;
            if j > 0.0 && py[y] > 0.0 {
                acc += j * (q / py[y]).log2();
            }
        }
    }
    acc
}

fn projective_info(px: &[f64], kets: &[(f64, f64)], t: f64) -> f64 {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    let rows: Vec<Vec<f64>> = kets
        .iter()
        .map(|&(a, b)| {
            let n = a * a + b * b;
            let first = (c * a + s * b).powi(2) / n;
            vec![first, 1.0 - first]
        })
        .collect();
    classical_mi(px, &rows)
}

/// Best two-outcome projective measurement in the real plane: 721-angle scan
/// followed by golden-section refinement around the best angle.
pub fn real_qubit_accessible(px: &[f64], kets: &[(f64, f64)]) -> f64 {
    let steps = 720;
    let f = |t: f64| projective_info(px, kets, t);
    let (mut best_t, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..=steps {
        let t = PI * i as f64 / steps as f64;
        let v = f(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best_t - PI / steps as f64, best_t + PI / steps as f64);
    for _ in 0..100 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if f(x1) > f(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    best.max(f(0.5 * (a + b)))
}

/// Rate and distilled bits of the uniform Bloch-sphere ensemble when the
/// auxiliary variable is drawn with density `∝ exp(κ u·x)`, `κ = λ/2`.
pub fn von_mises_fisher_point(lambda: f64) -> (f64, f64) {
    let kappa = lambda / 2.0;
    let mean_cos = 1.0 / kappa.tanh() - 1.0 / kappa;
    let i_ux = ((kappa / kappa.sinh()).ln() + kappa * mean_cos) / LN_2;
    let d = 1.0 - h2((1.0 - mean_cos) / 2.0);
    (i_ux - d, d)
}

/// The same curve sampled at prescribed rates by bisection in `ln λ`.
pub fn von_mises_fisher_at_rate(r: f64) -> f64 {
    let (mut a, mut b) = (1e-3f64.ln(), 200f64.ln());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if von_mises_fisher_point(m.exp()).0 < r {
            a = m;
        } else {
            b = m;
        }
    }
    von_mises_fisher_point((0.5 * (a + b)).exp()).1
}

/// `Tr ρ^{⊗n} Π` for a qubit with eigenvalues `(a, 1 − a)`: binomial mass of the
/// letter counts within `nδ` of their expectations.
pub fn qubit_typical_mass(a: f64, n: usize, delta: f64) -> f64 {
    let nf = n as f64;
    let mut binom = 1.0;
    let mut acc = 0.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        if (k as f64 - nf * a).abs() <= nf * delta + 1e-9 {
            acc += binom * a.powi(k as i32) * (1.0 - a).powi((n - k) as i32);
        }
    }
    acc
}
