//! The log-singular control potential `K(x) = log|x| 1_{|x| <= 1}` and the
//! singular integrals built on it.
//!
//! Grid multiplication is the pseudospectral realization of `ψ ↦ Kψ`. The
//! singular integrals (Hardy numerator, `∫ ψ̄ ∇K·∇ψ`, exact Galerkin
//! elements, `‖K‖_{L^p}`) are evaluated on rules adapted to the singularity:
//! a polar rule on the unit ball graded toward the origin, and for `|x|^{-2}`
//! the Gaussian representation `|x|^{-2} = ∫_0^∞ e^{-s|x|^2} ds`.

use crate::basis::{GridKind, HermiteBasis};
use crate::error::{Error, Result};
use crate::quadrature::{graded_radial, hermite_functions, scaled_gauss_hermite, BallRule, Rule};
use crate::state::SpectralState;
use crate::tensor::{apply_axis, coordinates, C64};
use ndarray::Dimension;
use ndarray::{Array2, ArrayD, IxDyn, Zip};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

/// `K` as a function of the radius. The boundary `|x| = 1` maps to 0.
pub fn k_of_radius(r: f64) -> f64 {
    if r < 1.0 {
        r.ln()
    } else {
        0.0
    }
}

/// Pointwise evaluation of `K`; the origin is rejected.
pub fn eval_k(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r == 0.0 {
                Err(Error::SingularEvaluation)
            } else {
                Ok(k_of_radius(r))
            }
        })
        .collect()
}

/// `K` sampled on one of the basis grids.
pub fn k_on_grid(basis: &HermiteBasis, grid: GridKind) -> ArrayD<f64> {
    let coords = coordinates(&basis.axis(grid).rule.nodes, basis.dim());
    let mut r2 = ArrayD::<f64>::zeros(coords[0].raw_dim());
    for c in &coords {
        Zip::from(&mut r2).and(c).for_each(|acc, x| *acc += x * x);
    }
    r2.mapv(|s| k_of_radius(s.sqrt()))
}

/// How `ψ ↦ Kψ` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KRule {
    /// Multiply point values on the `N`-node grid. This is the operator the
    /// time integrators use; it is Hermitian on the `N`-mode space.
    Collocation,
    /// Multiply point values on the `2N`-node grid and project.
    Quadrature,
    /// Exact matrix elements `∫ K h_j h_k` from a singularity-adapted
    /// polar rule. Costly in 3D.
    Galerkin,
}

/// `Kψ` projected back onto the basis.
pub fn multiply_k(state: &SpectralState, rule: KRule) -> SpectralState {
    match rule {
        KRule::Collocation | KRule::Quadrature => {
            let grid = if rule == KRule::Collocation {
                GridKind::Collocation
            } else {
                GridKind::Quadrature
            };
            let k = k_on_grid(state.basis(), grid);
            let mut f = state.to_grid(grid);
            Zip::from(&mut f.values).and(&k).for_each(|v, &k| *v *= k);
            f.to_coeffs()
        }
        KRule::Galerkin => galerkin_multiply_k(state),
    }
}

/// Polar rule on the unit ball sized for integrands built from two
/// band-limited factors.
pub fn ball_rule_for(basis: &HermiteBasis) -> BallRule {
    let n = basis.n_modes();
    let radial = graded_radial(16, 0.15, 14, (n + 12).max(16));
    BallRule::new(basis.dim(), &radial, 2 * n + 4)
}

/// `Σ_p v_p h_{k_1}(p_1)..h_{k_d}(p_d)`: the adjoint of point evaluation.
fn project_points(basis: &Arc<HermiteBasis>, points: &[Vec<f64>], values: &[C64]) -> ArrayD<C64> {
    let n = basis.n_modes();
    let d = basis.dim();
    let shape = basis.shape();
    // fixed chunks summed in order keep the result independent of threading
    let partials: Vec<ArrayD<C64>> = points
        .par_chunks(512)
        .zip(values.par_chunks(512))
        .map(|(pts, vals)| {
            let mut acc = ArrayD::<C64>::zeros(IxDyn(&shape));
            for (p, &v) in pts.iter().zip(vals) {
                let h: Vec<Vec<f64>> = p.iter().map(|&x| hermite_functions(n, x)).collect();
                for (idx, slot) in acc.indexed_iter_mut() {
                    let idx = idx.slice();
                    let prod: f64 = (0..d).map(|a| h[a][idx[a]]).product();
                    *slot += v * prod;
                }
            }
            acc
        })
        .collect();
    partials
        .into_iter()
        .fold(ArrayD::<C64>::zeros(IxDyn(&shape)), |a, b| a + b)
}

fn galerkin_multiply_k(state: &SpectralState) -> SpectralState {
    let basis = state.basis();
    let ball = ball_rule_for(basis);
    let vals = state.eval_points(&ball.points);
    let weighted: Vec<C64> = vals
        .iter()
        .zip(&ball.weights)
        .zip(&ball.radii)
        .map(|(((v, _), &w), &r)| v * (w * k_of_radius(r)))
        .collect();
    let coeffs = project_points(basis, &ball.points, &weighted);
    SpectralState::from_coeffs(basis, coeffs).expect("shape matches basis")
}

/// `∫ ψ̄ ∇K · ∇ψ dx` with `∇K = x / |x|^2` inside the unit ball and zero
/// outside. In 1D the integral is taken in the principal-value sense.
pub fn grad_k_dot_grad(state: &SpectralState) -> C64 {
    let ball = ball_rule_for(state.basis());
    let vals = state.eval_points(&ball.points);
    vals.iter()
        .zip(&ball.points)
        .zip(&ball.weights)
        .map(|(((v, g), p), &w)| {
            let r2: f64 = p.iter().map(|x| x * x).sum();
            let dot: C64 = p.iter().zip(g).map(|(x, gx)| gx * (*x / r2)).sum();
            v.conj() * dot * w
        })
        .sum()
}

/// Per-axis Gram matrix `∫ h_a h_b e^{-s x^2} dx` (exact).
fn gaussian_gram(n: usize, s: f64) -> Array2<f64> {
    let rule = scaled_gauss_hermite(n.max(1), (1.0 + s).sqrt());
    let mut g = Array2::<f64>::zeros((n, n));
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let h = hermite_functions(n, x);
        let wg = w * (-s * x * x).exp();
        for a in 0..n {
            for b in a..n {
                g[[a, b]] += wg * h[a] * h[b];
            }
        }
    }
    for a in 0..n {
        for b in 0..a {
            g[[a, b]] = g[[b, a]];
        }
    }
    g
}

/// `‖ |x|^{-1} ψ ‖_{L²}` in 3D.
///
/// Uses `∫ |ψ|^2 / |x|^2 = ∫_0^∞ ⟨ψ, e^{-s|x|^2} ψ⟩ ds`; the inner product is
/// exact for band-limited `ψ`, and the `s`-integral is a trapezoid rule in
/// `t = log s` (exponentially convergent) plus the `s^{-3/2}` tail.
pub fn inverse_radius_norm(state: &SpectralState) -> Result<f64> {
    let d = state.basis().dim();
    if d != 3 {
        return Err(Error::Dimension { expected: 3, got: d });
    }
    let n = state.basis().n_modes();
    let coeffs = state.coeffs();
    let quad = |s: f64| -> f64 {
        let g = gaussian_gram(n, s);
        let mut cur = apply_axis(coeffs, &g, 0);
        cur = apply_axis(&cur, &g, 1);
        cur = apply_axis(&cur, &g, 2);
        Zip::from(coeffs)
            .and(&cur)
            .fold(0.0, |acc, a, b| acc + (a.conj() * b).re)
    };
    let (t0, t1, h) = (-36.0, 50.0, 0.25);
    let steps = ((t1 - t0) / h) as usize;
    let terms: Vec<f64> = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let t = t0 + i as f64 * h;
            let s = t.exp();
            let end = if i == 0 || i == steps { 0.5 } else { 1.0 };
            end * h * s * quad(s)
        })
        .collect();
    let s_end = t1.exp();
    let tail = 2.0 * quad(s_end) * s_end * (-0.5 * t1).exp() * s_end.sqrt();
    let total: f64 = terms.iter().sum::<f64>() + tail;
    Ok(total.max(0.0).sqrt())
}

/// `‖ |x|^{-1} ψ ‖_{L²} / ‖ψ‖_{H¹}` (3D only; zero states are rejected).
pub fn hardy_quotient(state: &SpectralState) -> Result<f64> {
    let den = state.h1_norm();
    if state.basis().dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: state.basis().dim(),
        });
    }
    if den == 0.0 {
        return Err(Error::DegenerateState("Hardy quotient of the zero state".into()));
    }
    Ok(inverse_radius_norm(state)? / den)
}

/// `‖K‖_{L^p(R^d)} = (ω_d ∫_0^1 r^{d-1} |log r|^p dr)^{1/p}` on a graded
/// radial rule with `levels` geometric panels.
pub fn k_lp_norm(dim: usize, p: f64, levels: usize) -> f64 {
    let radial: Rule = graded_radial(levels, 0.15, 16, 16);
    let area = match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    };
    let d = dim as i32;
    (area * radial.integrate(|r| r.powi(d - 1) * r.ln().abs().powf(p))).powf(1.0 / p)
}

/// `‖K‖_{L^p}` by plain quadrature on the `2N`-node tensor grid.
pub fn k_lp_norm_grid(basis: &HermiteBasis, p: f64) -> f64 {
    let k = k_on_grid(basis, GridKind::Quadrature);
    let w = crate::tensor::product_weights(basis.weights(), basis.dim());
    Zip::from(&k)
        .and(&w)
        .fold(0.0, |acc, k, w| acc + w * k.abs().powf(p))
        .powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_gk;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(b: &Arc<HermiteBasis>, seed: u64) -> SpectralState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = SpectralState::zeros(b);
        let eig = b.eigenvalues().clone();
        Zip::from(s.coeffs_mut()).and(&eig).for_each(|c, &l| {
            *c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / l;
        });
        s
    }

    #[test]
    fn k_examples() {
        let e = (-1f64).exp();
        let v = eval_k(&[vec![e], vec![2.0, 0.0, 0.0], vec![1.0, 0.0], vec![0.6, 0.8]]).unwrap();
        assert_abs_diff_eq!(v[0], -1.0, epsilon = 1e-15);
        assert_eq!(v[1], 0.0);
        assert_eq!(v[2], 0.0);
        assert_abs_diff_eq!(v[3], 0.0, epsilon = 1e-15);
        assert!(matches!(eval_k(&[vec![0.0, 0.0]]), Err(Error::SingularEvaluation)));
    }

    #[test]
    fn k_is_nonpositive_on_grids() {
        let b = HermiteBasis::new(3, 6).unwrap();
        for grid in [GridKind::Quadrature, GridKind::Collocation] {
            assert!(k_on_grid(&b, grid).iter().all(|&k| k <= 0.0 && k.is_finite()));
        }
    }

    #[test]
    fn multiply_k_of_zero_is_zero() {
        let b = HermiteBasis::new(1, 8).unwrap();
        for rule in [KRule::Collocation, KRule::Quadrature, KRule::Galerkin] {
            let z = multiply_k(&SpectralState::zeros(&b), rule);
            assert_eq!(z.mass(), 0.0);
        }
    }

    #[test]
    fn galerkin_ground_coefficient_matches_adaptive_oracle() {
        // α_0 of K h_0 = ∫_{-1}^{1} log|x| e^{-x²}/√π dx
        let f = |x: f64| x.ln() * (-x * x).exp() / PI.sqrt();
        // split at a tiny radius so the adaptive rule sees a bounded integrand
        let oracle = 2.0 * (adaptive_gk(&f, 1e-14, 1e-6, 1e-13, 1e-16) + adaptive_gk(&f, 1e-6, 1.0, 1e-13, 1e-16));
        let b = HermiteBasis::new(1, 16).unwrap();
        let kg = multiply_k(&SpectralState::ground(&b), KRule::Galerkin);
        assert_abs_diff_eq!(kg.coeffs()[[0]].re, oracle, epsilon = 1e-8);
    }

    #[test]
    fn grid_ground_coefficient_is_the_grid_quadrature_and_converges() {
        let f = |x: f64| x.ln() * (-x * x).exp() / PI.sqrt();
        let oracle = 2.0 * (adaptive_gk(&f, 1e-14, 1e-6, 1e-13, 1e-16) + adaptive_gk(&f, 1e-6, 1.0, 1e-13, 1e-16));
        let mut last = f64::INFINITY;
        for n in [8, 32, 128] {
            let b = HermiteBasis::new(1, n).unwrap();
            let kq = multiply_k(&SpectralState::ground(&b), KRule::Quadrature);
            // α_0 equals Σ_j w_j K(x_j) h_0(x_j)^2 on the 2N grid
            let direct: f64 = b
                .nodes()
                .iter()
                .zip(b.weights())
                .map(|(&x, &w)| w * k_of_radius(x.abs()) * (-x * x).exp() / PI.sqrt())
                .sum();
            assert_abs_diff_eq!(kq.coeffs()[[0]].re, direct, epsilon = 1e-13);
            let err = (direct - oracle).abs();
            assert!(err < last, "grid error must shrink under refinement");
            last = err;
        }
    }

    #[test]
    fn multiply_k_ignores_states_outside_the_ball() {
        let b = HermiteBasis::new(2, 8).unwrap();
        let mut f = random_state(&b, 3).to_grid(GridKind::Collocation);
        let pts = f.points();
        for (v, p) in f.values.iter_mut().zip(&pts) {
            if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                *v = C64::new(0.0, 0.0);
            }
        }
        let s = f.to_coeffs();
        assert!(multiply_k(&s, KRule::Collocation).mass() < 1e-14);
    }

    #[test]
    fn multiply_k_is_linear() {
        let b = HermiteBasis::new(2, 6).unwrap();
        let x = random_state(&b, 1);
        let y = random_state(&b, 2);
        let (ca, cb) = (C64::new(0.3, -1.2), C64::new(2.0, 0.5));
        let mut comb = x.scaled(ca);
        comb.axpy(cb, &y);
        for rule in [KRule::Collocation, KRule::Quadrature] {
            let lhs = multiply_k(&comb, rule);
            let mut rhs = multiply_k(&x, rule).scaled(ca);
            rhs.axpy(cb, &multiply_k(&y, rule));
            assert!(lhs.sub(&rhs).mass() < 1e-12);
        }
    }

    #[test]
    fn hardy_ground_state_closed_form() {
        let b = HermiteBasis::new(3, 4).unwrap();
        let g = SpectralState::ground(&b);
        assert_abs_diff_eq!(inverse_radius_norm(&g).unwrap(), 2f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(hardy_quotient(&g).unwrap(), 2f64.sqrt() / 3f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn hardy_rejects_bad_inputs_and_is_homogeneous() {
        let b1 = HermiteBasis::new(1, 4).unwrap();
        assert!(hardy_quotient(&SpectralState::ground(&b1)).is_err());
        let b = HermiteBasis::new(3, 4).unwrap();
        assert!(matches!(
            hardy_quotient(&SpectralState::zeros(&b)),
            Err(Error::DegenerateState(_))
        ));
        let s = random_state(&b, 9);
        let q1 = hardy_quotient(&s).unwrap();
        let q2 = hardy_quotient(&s.scaled(C64::new(7.5, 0.0))).unwrap();
        assert_abs_diff_eq!(q1, q2, epsilon = 1e-12);
    }

    #[test]
    fn hardy_numerator_matches_ball_plus_grid_split() {
        // Independent route for a non-radial state: polar rule over a large
        // ball, where r² dr cancels the singularity.
        let b = HermiteBasis::new(3, 4).unwrap();
        let s = random_state(&b, 5);
        let radial = crate::quadrature::gauss_legendre(60, 0.0, 9.0);
        let ball = BallRule::new(3, &radial, 24);
        let vals = s.eval_points(&ball.points);
        let num: f64 = vals
            .iter()
            .zip(&ball.weights)
            .zip(&ball.radii)
            .map(|(((v, _), w), r)| w * v.norm_sqr() / (r * r))
            .sum();
        assert_abs_diff_eq!(inverse_radius_norm(&s).unwrap(), num.sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn grad_k_term_is_real_for_real_states() {
        for d in 1..=3 {
            let b = HermiteBasis::new(d, 4).unwrap();
            let g = grad_k_dot_grad(&SpectralState::ground(&b));
            assert!(g.im.abs() < 1e-14, "d={d}");
            let mut s = random_state(&b, 11);
            s.coeffs_mut().mapv_inplace(|c| C64::new(c.re, 0.0));
            assert!(grad_k_dot_grad(&s).im.abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn grad_k_term_matches_independent_oracle_1d() {
        // State: projection of e^{i x v} h_0(x - a). Oracle: adaptive quadrature of
        // the symmetrized integrand [g(x) - g(-x)] / x on (0, 1] with
        // g = ψ̄ ψ', built from direct Hermite-function evaluation.
        let b = HermiteBasis::new(1, 12).unwrap();
        let (v, a) = (0.7, 0.3);
        let f = crate::state::GridField::from_fn(&b, GridKind::Quadrature, |x| {
            C64::from_polar(PI.powf(-0.25) * (-0.5 * (x[0] - a).powi(2)).exp(), v * x[0])
        });
        let s = f.to_coeffs();
        let coeffs: Vec<C64> = s.coeffs().iter().copied().collect();
        let psi = |x: f64| -> (C64, C64) {
            let h = hermite_functions(14, x);
            let mut val = C64::new(0.0, 0.0);
            let mut der = C64::new(0.0, 0.0);
            for (k, c) in coeffs.iter().enumerate() {
                val += c * h[k];
                der += c * crate::basis::hermite_derivative(&h, k);
            }
            (val, der)
        };
        let g = |x: f64| {
            let (a, da) = psi(x);
            a.conj() * da
        };
        let re = |x: f64| ((g(x) - g(-x)) / x).re;
        let im = |x: f64| ((g(x) - g(-x)) / x).im;
        let oracle = C64::new(
            adaptive_gk(&re, 0.0, 1.0, 1e-13, 1e-15),
            adaptive_gk(&im, 0.0, 1.0, 1e-13, 1e-15),
        );
        let got = grad_k_dot_grad(&s);
        assert!((got - oracle).norm() < 1e-6, "{got} vs {oracle}");
        assert!(got.im.abs() > 1e-3, "boosted state should carry a current");
    }

    #[test]
    fn energy_rate_identity_via_galerkin() {
        // Im⟨Kψ, Hψ⟩ = Im ∫ ψ̄ ∇K·∇ψ, both on singularity-adapted rules.
        let b = HermiteBasis::new(1, 10).unwrap();
        let s = random_state(&b, 21);
        let kpsi = multiply_k(&s, KRule::Galerkin);
        let lhs = kpsi.inner(&s.apply_h()).im;
        let rhs = grad_k_dot_grad(&s).im;
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
    }

    #[test]
    fn k_lp_norms_match_closed_form_and_refine() {
        // ∫_0^1 r^{d-1} |log r|^p dr = Γ(p+1) / d^{p+1}
        let gamma = [1.0, 1.0, 2.0, 6.0, 24.0];
        for d in 1..=3usize {
            let area = [2.0, 2.0 * PI, 4.0 * PI][d - 1];
            for p in [2usize, 3, 4] {
                let exact = (area * gamma[p] / (d as f64).powi(p as i32 + 1)).powf(1.0 / p as f64);
                let mut prev = k_lp_norm(d, p as f64, 4);
                for levels in [8, 12, 16, 18] {
                    let cur = k_lp_norm(d, p as f64, levels);
                    assert!((cur - prev).abs() < 1e-4 || levels == 8);
                    prev = cur;
                }
                assert_abs_diff_eq!(prev, exact, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn k_lp_norm_on_tensor_grid_converges_slowly() {
        let exact = (4.0 * PI * 2.0 / 27.0f64).sqrt();
        let e8 = (k_lp_norm_grid(&HermiteBasis::new(3, 4).unwrap(), 2.0) - exact).abs();
        let e16 = (k_lp_norm_grid(&HermiteBasis::new(3, 16).unwrap(), 2.0) - exact).abs();
        assert!(e16 < e8);
    }
}
