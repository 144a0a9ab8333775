//! Gaussian quadrature rules used throughout the crate.
//!
//! Gauss-Hermite nodes come from the Golub-Welsch eigenproblem and are then
//! polished by Newton steps on the normalized Hermite-function recurrence.
//! Weights are returned in "whole-line" form, i.e. `sum_j w_j f(x_j)`
//! approximates `int f(x) dx` directly (the Gaussian factor is folded in),
//! computed from `w_j = 1 / (n h_{n-1}(x_j)^2)` so that tiny tail weights keep
//! full relative precision.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Nodes and whole-line weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Normalized Hermite functions `h_0(x) .. h_{count-1}(x)`.
///
/// Uses `h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1}`, which never
/// forms the raw polynomials and so stays finite for large degrees.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let h0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(h0);
    if count == 1 {
        return out;
    }
    out.push(2f64.sqrt() * x * h0);
    for k in 1..count - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// `(h_n(x), h_{n-1}(x))` for `n >= 1`.
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let h = hermite_functions(n + 1, x);
    (h[n], h[n - 1])
}

fn tridiagonal_eigenvalues(off_diagonal: &[f64]) -> Vec<f64> {
    let n = off_diagonal.len() + 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, &b) in off_diagonal.iter().enumerate() {
        m[(i, i + 1)] = b;
        m[(i + 1, i)] = b;
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalue"));
    eig
}

/// `n`-point Gauss-Hermite rule with whole-line weights.
///
/// Exact for `p(x) exp(-x^2)` with `deg p <= 2n - 1`.
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n >= 1, "rule needs at least one node");
    if n == 1 {
        return Rule {
            nodes: vec![0.0],
            weights: vec![PI.sqrt()],
        };
    }
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut nodes = tridiagonal_eigenvalues(&off);
    let nf = n as f64;
    for x in nodes.iter_mut() {
        for _ in 0..8 {
            let (hn, hm) = hermite_pair(n, *x);
            let deriv = (2.0 * nf).sqrt() * hm - *x * hn;
            let step = hn / deriv;
            *x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
    }
    // Exact symmetry of the rule.
    for i in 0..n / 2 {
        let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (_, hm) = hermite_pair(n, x);
            1.0 / (nf * hm * hm)
        })
        .collect();
    Rule { nodes, weights }
}

/// Gauss-Hermite rule for integrands decaying like `exp(-scale^2 x^2)`.
///
/// Nodes are `y_j / scale`, so the rule is exact for `p(x) exp(-scale^2 x^2)`
/// with `deg p <= 2n - 1`.
pub fn scaled_gauss_hermite(n: usize, scale: f64) -> Rule {
    let base = gauss_hermite(n);
    Rule {
        nodes: base.nodes.iter().map(|y| y / scale).collect(),
        weights: base.weights.iter().map(|w| w / scale).collect(),
    }
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// `n`-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Rule {
    assert!(n >= 1, "rule needs at least one node");
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, descending order.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (pn, pm) = legendre_pair(n, x);
            let deriv = nf * (x * pn - pm) / (x * x - 1.0);
            let step = pn / deriv;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (pn, pm) = legendre_pair(n, x);
        let deriv = nf * (x * pn - pm) / (x * x - 1.0);
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * deriv * deriv));
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    Rule {
        nodes: nodes.iter().rev().map(|x| mid + half * x).collect(),
        weights: weights.iter().rev().map(|w| half * w).collect(),
    }
}

/// Composite Gauss-Legendre rule on `[0, 1]` with panels graded
/// geometrically toward the origin, for integrands with `log r` or `1/r`
/// type behaviour at `r = 0`.
pub fn graded_radial(levels: usize, ratio: f64, order_inner: usize, order_outer: usize) -> Rule {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut edges = vec![0.0];
    for l in (1..=levels).rev() {
        edges.push(ratio.powi(l as i32));
    }
    edges.push(1.0);
    for w in edges.windows(2) {
        let order = if w[1] == 1.0 { order_outer } else { order_inner };
        let r = gauss_legendre(order, w[0], w[1]);
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Rule { nodes, weights }
}

/// A point set with weights over the unit ball in `dim` dimensions, laid out
/// in polar/spherical coordinates, with the radial Jacobian folded into the
/// weights. Points come in antipodal pairs so odd singular parts cancel.
#[derive(Debug, Clone)]
pub struct BallRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Radius of each point.
    pub radii: Vec<f64>,
}

impl BallRule {
    /// `radial` is a rule on `[0, 1]`; `angular` controls the sphere
    /// resolution (ignored in 1D).
    pub fn new(dim: usize, radial: &Rule, angular: usize) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut radii = Vec::new();
        let mut push = |p: Vec<f64>, w: f64, r: f64| {
            points.push(p);
            weights.push(w);
            radii.push(r);
        };
        match dim {
            1 => {
                for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
                    push(vec![r], wr, r);
                    push(vec![-r], wr, r);
                }
            }
            2 => {
                let nphi = 2 * angular.max(1);
                let dphi = 2.0 * PI / nphi as f64;
                for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
                    for j in 0..nphi {
                        let phi = (j as f64 + 0.5) * dphi;
                        push(vec![r * phi.cos(), r * phi.sin()], wr * r * dphi, r);
                    }
                }
            }
            3 => {
                let theta = gauss_legendre(angular.max(1), -1.0, 1.0);
                let nphi = 2 * angular.max(1);
                let dphi = 2.0 * PI / nphi as f64;
                for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
                    for (&c, &wc) in theta.nodes.iter().zip(&theta.weights) {
                        let s = (1.0 - c * c).sqrt();
                        for j in 0..nphi {
                            let phi = (j as f64 + 0.5) * dphi;
                            push(
                                vec![r * s * phi.cos(), r * s * phi.sin(), r * c],
                                wr * r * r * wc * dphi,
                                r,
                            );
                        }
                    }
                }
            }
            _ => panic!("ball rule supports dimensions 1..=3"),
        }
        BallRule { points, weights, radii }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        const XK: [f64; 8] = [
            0.991_455_371_120_812_6,
            0.949_107_912_342_758_5,
            0.864_864_423_359_769_1,
            0.741_531_185_599_394_4,
            0.586_087_235_467_691_1,
            0.405_845_151_377_397_2,
            0.207_784_955_007_898_5,
            0.0,
        ];
        #[allow(clippy::excessive_precision)]
        const WK: [f64; 8] = [
            0.022_935_322_010_529_22,
            0.063_092_092_629_978_55,
            0.104_790_010_322_250_2,
            0.140_653_259_715_525_9,
            0.169_004_726_639_267_9,
            0.190_350_578_064_785_4,
            0.204_432_940_075_298_9,
            0.209_482_141_084_728_0,
        ];
        const WG: [f64; 4] = [
            0.129_484_966_168_869_7,
            0.279_705_391_489_276_7,
            0.381_830_050_505_118_9,
            0.417_959_183_673_469_4,
        ];
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WK[7] * fc;
        let mut g = WG[3] * fc;
        for i in 0..7 {
            let x = h * XK[i];
            let s = f(c - x) + f(c + x);
            k += WK[i] * s;
            if i % 2 == 1 {
                g += WG[i / 2] * s;
            }
        }
        (k * h, ((k - g) * h).abs())
    }

    // The tolerance is global: each panel gets its share of
    // rel_tol · ∫|f|, so round-off near zeros of f cannot force endless splits.
    let magnitude = gk15(&|x: f64| f(x).abs(), a, b).0.abs();
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(f, lo, hi);
        let scale = (hi - lo) / (b - a).abs().max(f64::MIN_POSITIVE);
        if err <= (rel_tol * magnitude).max(abs_tol) * scale || depth > 50 {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total
}
