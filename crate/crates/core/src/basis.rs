//! Hermite eigenbasis of the harmonic oscillator `H = -Δ + |x|^2`.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_hermite, hermite_functions, scaled_gauss_hermite, Rule};
use ndarray::{Array2, ArrayD, IxDyn};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Which tensor grid a set of point values lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    /// `2N` Gauss-Hermite nodes per axis: products of two basis functions
    /// integrate exactly. Used for transforms, projections and diagnostics.
    Quadrature,
    /// `N` Gauss-Hermite nodes per axis: the coefficient/value map is
    /// unitary, so pointwise phases conserve mass exactly. Used by the
    /// time integrators.
    Collocation,
}

/// Hermite functions and their derivatives sampled on a one-dimensional rule.
#[derive(Debug, Clone)]
pub struct AxisEval {
    pub rule: Rule,
    /// `values[[j, k]] = h_k(x_j)`.
    pub values: Array2<f64>,
    /// `derivs[[j, k]] = h_k'(x_j)`.
    pub derivs: Array2<f64>,
    /// `analysis[[k, j]] = w_j h_k(x_j)`, the discrete projection.
    pub analysis: Array2<f64>,
}

impl AxisEval {
    pub fn new(rule: Rule, n_modes: usize) -> Self {
        let n = rule.len();
        let mut values = Array2::zeros((n, n_modes));
        let mut derivs = Array2::zeros((n, n_modes));
        let mut analysis = Array2::zeros((n_modes, n));
        for (j, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let h = hermite_functions(n_modes + 1, x);
            for k in 0..n_modes {
                values[[j, k]] = h[k];
                analysis[[k, j]] = w * h[k];
                derivs[[j, k]] = hermite_derivative(&h, k);
            }
        }
        AxisEval {
            rule,
            values,
            derivs,
            analysis,
        }
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }
}

/// `h_k' = sqrt(k/2) h_{k-1} - sqrt((k+1)/2) h_{k+1}`; `h` must hold at least
/// `k + 2` entries.
pub fn hermite_derivative(h: &[f64], k: usize) -> f64 {
    let kf = k as f64;
    let down = if k > 0 { (kf / 2.0).sqrt() * h[k - 1] } else { 0.0 };
    down - ((kf + 1.0) / 2.0).sqrt() * h[k + 1]
}

/// Tensor Hermite basis in dimension 1..=3 with `n_modes` modes per axis.
///
/// Coefficients are stored row-major over the multi-index `(k_1, .., k_d)`.
#[derive(Debug)]
pub struct HermiteBasis {
    dim: usize,
    n_modes: usize,
    quadrature: AxisEval,
    collocation: AxisEval,
    eigs: ArrayD<f64>,
    lp_cache: Mutex<HashMap<u64, Arc<AxisEval>>>,
}

impl HermiteBasis {
    /// Builds the basis. `n_modes` must be even and at least 2 so that no
    /// node of either grid sits at the origin.
    pub fn new(dim: usize, n_modes: usize) -> Result<Arc<Self>> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidBasis(format!("dimension {dim} not in 1..=3")));
        }
        if n_modes < 2 || !n_modes.is_multiple_of(2) {
            return Err(Error::InvalidBasis(format!(
                "n_modes must be even and >= 2, got {n_modes}"
            )));
        }
        let quadrature = AxisEval::new(gauss_hermite(2 * n_modes), n_modes);
        let collocation = AxisEval::new(gauss_hermite(n_modes), n_modes);
        let eigs = ArrayD::from_shape_fn(IxDyn(&vec![n_modes; dim]), |idx| {
            (0..dim).map(|a| 2.0 * idx[a] as f64 + 1.0).sum()
        });
        Ok(Arc::new(HermiteBasis {
            dim,
            n_modes,
            quadrature,
            collocation,
            eigs,
            lp_cache: Mutex::new(HashMap::new()),
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Total number of coefficients, `N^d`.
    pub fn len(&self) -> usize {
        self.n_modes.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.n_modes; self.dim]
    }

    /// Per-axis quadrature abscissae (`2N` of them).
    pub fn nodes(&self) -> &[f64] {
        &self.quadrature.rule.nodes
    }

    /// Whole-line weights matching [`Self::nodes`].
    pub fn weights(&self) -> &[f64] {
        &self.quadrature.rule.weights
    }

    /// Eigenvalues `λ_k = Σ_i (2 k_i + 1)`, indexed like the coefficients.
    pub fn eigenvalues(&self) -> &ArrayD<f64> {
        &self.eigs
    }

    pub fn eigenvalue(&self, index: &[usize]) -> f64 {
        index.iter().map(|&k| 2.0 * k as f64 + 1.0).sum()
    }

    pub fn axis(&self, grid: GridKind) -> &AxisEval {
        match grid {
            GridKind::Quadrature => &self.quadrature,
            GridKind::Collocation => &self.collocation,
        }
    }

    /// Rule on which `|f|^p` and `|∇f|^p` of band-limited `f` integrate
    /// exactly for even `p` (nodes scaled to the `exp(-p x^2 / 2)` decay).
    pub fn lp_axis(&self, p: f64) -> Arc<AxisEval> {
        let key = p.to_bits();
        let mut cache = self.lp_cache.lock().expect("lp cache poisoned");
        cache
            .entry(key)
            .or_insert_with(|| {
                let n = ((p * self.n_modes as f64 + 1.0) / 2.0).ceil() as usize + 1;
                let rule = scaled_gauss_hermite(n.max(2), (p / 2.0).sqrt());
                Arc::new(AxisEval::new(rule, self.n_modes))
            })
            .clone()
    }

    /// Structural equality (same dimension and mode count).
    pub fn same_as(&self, other: &HermiteBasis) -> bool {
        std::ptr::eq(self, other) || (self.dim == other.dim && self.n_modes == other.n_modes)
    }

    /// Unflattens a row-major index.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.n_modes;
            flat /= self.n_modes;
        }
        idx
    }

    /// Discrete Gram matrix `Σ_j w_j h_a(x_j) h_b(x_j)` of one axis.
    pub fn gram(&self, grid: GridKind) -> Array2<f64> {
        let ax = self.axis(grid);
        ax.analysis.dot(&ax.values)
    }
}
