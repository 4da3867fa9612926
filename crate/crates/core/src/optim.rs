//! Seeded random streams and a small L-BFGS minimizer shared by the solvers.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the private stream owned by one start of one point.
pub fn stream_seed(seed: u64, point: u64, start: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ point) ^ start.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn stream_rng(seed: u64, point: u64, start: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, point, start))
}

/// A Dirichlet(1, …, 1) draw.
pub fn dirichlet_row<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let v: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax_first(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ if v.is_nan() => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Clone, Copy, Debug)]
pub struct LbfgsOptions {
    pub max_iter: usize,
    pub memory: usize,
    /// Stop once the objective improves by less than this (relative) over `window` iterations.
    pub rel_tol: f64,
    pub window: usize,
    pub grad_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            memory: 8,
            rel_tol: 1e-12,
            window: 10,
            grad_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, which writes its gradient into the second argument and returns the value.
pub fn lbfgs(
    mut f: impl FnMut(&[f64], &mut [f64]) -> f64,
    x0: Vec<f64>,
    opts: LbfgsOptions,
) -> LbfgsResult {
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut hist_s: Vec<Vec<f64>> = Vec::new();
    let mut hist_y: Vec<Vec<f64>> = Vec::new();
    let mut trail = vec![fx];
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    if !fx.is_finite() {
        return LbfgsResult {
            x,
            value: fx,
            iterations: 0,
            converged: false,
        };
    }
    for it in 0..opts.max_iter {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm <= opts.grad_tol {
            return LbfgsResult {
                x,
                value: fx,
                iterations: it,
                converged: true,
            };
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist_s.len());
        for (s, y) in hist_s.iter().zip(&hist_y).rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push((a, rho));
        }
        if let (Some(s), Some(y)) = (hist_s.last(), hist_y.last()) {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        } else {
            let scale = 1.0 / gnorm.max(1.0);
            q.iter_mut().for_each(|v| *v *= scale);
        }
        for ((s, y), (a, rho)) in hist_s.iter().zip(&hist_y).zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            hist_s.clear();
            hist_y.clear();
            dir = g.iter().map(|v| -v / gnorm.max(1.0)).collect();
            slope = dot(&g, &dir);
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            xn.iter_mut()
                .zip(&x)
                .zip(&dir)
                .for_each(|((xi, x0), d)| *xi = x0 + step * d);
            let fnew = f(&xn, &mut gn);
            if fnew.is_finite() && fnew <= fx + 1e-4 * step * slope {
                let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
                if dot(&s, &y) > 1e-16 {
                    hist_s.push(s);
                    hist_y.push(y);
                    if hist_s.len() > opts.memory {
                        hist_s.remove(0);
                        hist_y.remove(0);
                    }
                }
                std::mem::swap(&mut x, &mut xn);
                std::mem::swap(&mut g, &mut gn);
                fx = fnew;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return LbfgsResult {
                x,
                value: fx,
                iterations: it,
                converged: true,
            };
        }
        trail.push(fx);
        if trail.len() > opts.window {
            let old = trail[trail.len() - 1 - opts.window];
            if (old - fx).abs() <= opts.rel_tol * fx.abs().max(1.0) {
                return LbfgsResult {
                    x,
                    value: fx,
                    iterations: it + 1,
                    converged: true,
                };
            }
        }
    }
    LbfgsResult {
        x,
        value: fx,
        iterations: opts.max_iter,
        converged: false,
    }
}

/// Maximizes a unimodal function on `[a, b]`.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lbfgs_rosenbrock() {
        let f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let r = lbfgs(
            f,
            vec![-1.2, 1.0],
            LbfgsOptions {
                max_iter: 2000,
                ..Default::default()
            },
        );
        assert!(
            (r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5,
            "{r:?}"
        );
    }

    #[test]
    fn streams_are_distinct_and_stable() {
        assert_eq!(stream_seed(42, 0, 0), stream_seed(42, 0, 0));
        assert_ne!(stream_seed(42, 0, 1), stream_seed(42, 1, 0));
        let mut rng = stream_rng(1, 2, 3);
        let row = dirichlet_row(5, &mut rng);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax_first([1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax_first([f64::NAN, 0.5]), Some(1));
        assert_eq!(argmax_first(Vec::<f64>::new()), None);
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, v) = golden_section_max(|t| -(t - 0.3).powi(2), 0.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-6 && v.abs() < 1e-10);
    }
}
