//! Spectral states, grid fields, transforms, the free propagator and the
//! Sobolev norms built on the Hermite calculus.

use crate::basis::{GridKind, HermiteBasis};
use crate::error::{Error, Result};
use crate::quadrature::hermite_functions;
use crate::tensor::{apply_axis, apply_separable, product_weights, C64};
use ndarray::Dimension;
use ndarray::{ArrayD, IxDyn, Zip};
use rayon::prelude::*;
use std::io::{Read, Write};
use std::sync::Arc;

/// Hermite coefficients `α_k` of a state.
#[derive(Debug, Clone)]
pub struct SpectralState {
    basis: Arc<HermiteBasis>,
    coeffs: ArrayD<C64>,
}

/// Point values of a function on one of the basis grids.
#[derive(Debug, Clone)]
pub struct GridField {
    pub basis: Arc<HermiteBasis>,
    pub grid: GridKind,
    pub values: ArrayD<C64>,
}

fn check_same(a: &HermiteBasis, b: &HermiteBasis) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::BasisMismatch(format!(
            "(d={}, N={}) vs (d={}, N={})",
            a.dim(),
            a.n_modes(),
            b.dim(),
            b.n_modes()
        )))
    }
}

impl SpectralState {
    pub fn zeros(basis: &Arc<HermiteBasis>) -> Self {
        SpectralState {
            basis: basis.clone(),
            coeffs: ArrayD::zeros(IxDyn(&basis.shape())),
        }
    }

    /// The normalized ground state `h_0 ⊗ .. ⊗ h_0`.
    pub fn ground(basis: &Arc<HermiteBasis>) -> Self {
        Self::mode(basis, &vec![0; basis.dim()], C64::new(1.0, 0.0))
    }

    /// A single basis function with the given amplitude.
    pub fn mode(basis: &Arc<HermiteBasis>, index: &[usize], amplitude: C64) -> Self {
        let mut s = Self::zeros(basis);
        s.coeffs[IxDyn(index)] = amplitude;
        s
    }

    pub fn from_coeffs(basis: &Arc<HermiteBasis>, coeffs: ArrayD<C64>) -> Result<Self> {
        if coeffs.shape() != basis.shape().as_slice() {
            return Err(Error::BasisMismatch(format!(
                "coefficient shape {:?} vs basis shape {:?}",
                coeffs.shape(),
                basis.shape()
            )));
        }
        Ok(SpectralState {
            basis: basis.clone(),
            coeffs,
        })
    }

    pub fn basis(&self) -> &Arc<HermiteBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &ArrayD<C64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut ArrayD<C64> {
        &mut self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `sqrt(Σ |α_k|^2)`.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `sqrt(Σ λ_k^s |α_k|^2)`; `s = 0` is the L² mass and `s = 1` the
    /// energy-space norm `‖H^{1/2} ψ‖`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        Zip::from(&self.coeffs)
            .and(self.basis.eigenvalues())
            .fold(0.0, |acc, c, &l| acc + l.powf(s) * c.norm_sqr())
            .sqrt()
    }

    pub fn h1_norm(&self) -> f64 {
        self.sobolev_norm(1.0)
    }

    /// `⟨self, other⟩ = Σ conj(α_k) β_k`.
    pub fn inner(&self, other: &SpectralState) -> C64 {
        Zip::from(&self.coeffs)
            .and(&other.coeffs)
            .fold(C64::new(0.0, 0.0), |acc, a, b| acc + a.conj() * b)
    }

    /// `e^{itH}`: multiplies `α_k` by `e^{i t λ_k}`.
    pub fn propagate_free(&self, t: f64) -> SpectralState {
        if t == 0.0 {
            return self.clone();
        }
        let mut out = self.clone();
        Zip::from(&mut out.coeffs)
            .and(self.basis.eigenvalues())
            .for_each(|c, &l| *c *= C64::from_polar(1.0, t * l));
        out
    }

    /// `H ψ` (no truncation needed: `H` is diagonal).
    pub fn apply_h(&self) -> SpectralState {
        let mut out = self.clone();
        Zip::from(&mut out.coeffs)
            .and(self.basis.eigenvalues())
            .for_each(|c, &l| *c *= l);
        out
    }

    pub fn scaled(&self, factor: C64) -> SpectralState {
        SpectralState {
            basis: self.basis.clone(),
            coeffs: self.coeffs.mapv(|c| c * factor),
        }
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: C64, other: &SpectralState) {
        Zip::from(&mut self.coeffs)
            .and(&other.coeffs)
            .for_each(|a, &b| *a += factor * b);
    }

    pub fn sub(&self, other: &SpectralState) -> SpectralState {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other);
        out
    }

    /// H¹ distance `‖self - other‖_{H¹}`.
    pub fn h1_distance(&self, other: &SpectralState) -> f64 {
        Zip::from(&self.coeffs)
            .and(&other.coeffs)
            .and(self.basis.eigenvalues())
            .fold(0.0, |acc, a, b, &l| acc + l * (a - b).norm_sqr())
            .sqrt()
    }

    /// Point values on the chosen grid.
    pub fn to_grid(&self, grid: GridKind) -> GridField {
        let ax = self.basis.axis(grid);
        let mats = vec![&ax.values; self.basis.dim()];
        GridField {
            basis: self.basis.clone(),
            grid,
            values: apply_separable(&self.coeffs, &mats),
        }
    }

    /// Gradient components sampled on an arbitrary per-axis evaluation rule.
    pub fn gradient_on(&self, ax: &crate::basis::AxisEval) -> Vec<ArrayD<C64>> {
        let d = self.basis.dim();
        (0..d)
            .map(|i| {
                let mats: Vec<_> = (0..d).map(|a| if a == i { &ax.derivs } else { &ax.values }).collect();
                apply_separable(&self.coeffs, &mats)
            })
            .collect()
    }

    /// Values sampled on an arbitrary per-axis evaluation rule.
    pub fn values_on(&self, ax: &crate::basis::AxisEval) -> ArrayD<C64> {
        let mats = vec![&ax.values; self.basis.dim()];
        apply_separable(&self.coeffs, &mats)
    }

    /// Value and gradient at arbitrary points (each of length `dim`).
    pub fn eval_points(&self, points: &[Vec<f64>]) -> Vec<(C64, Vec<C64>)> {
        let d = self.basis.dim();
        let n = self.basis.n_modes();
        points
            .par_iter()
            .map(|p| {
                // per-axis (values, derivatives) of the first n modes
                let axes: Vec<(Vec<f64>, Vec<f64>)> = p
                    .iter()
                    .map(|&x| {
                        let h = hermite_functions(n + 1, x);
                        let dh = (0..n).map(|k| crate::basis::hermite_derivative(&h, k)).collect();
                        (h[..n].to_vec(), dh)
                    })
                    .collect();
                let mut val = C64::new(0.0, 0.0);
                let mut grad = vec![C64::new(0.0, 0.0); d];
                for (flat, c) in self.coeffs.iter().enumerate() {
                    if c.re == 0.0 && c.im == 0.0 {
                        continue;
                    }
                    let idx = self.basis.multi_index(flat);
                    let vals: Vec<f64> = (0..d).map(|a| axes[a].0[idx[a]]).collect();
                    val += c * vals.iter().product::<f64>();
                    for (i, g) in grad.iter_mut().enumerate() {
                        let mut prod = axes[i].1[idx[i]];
                        for (a, v) in vals.iter().enumerate() {
                            if a != i {
                                prod *= v;
                            }
                        }
                        *g += c * prod;
                    }
                }
                (val, grad)
            })
            .collect()
    }

    /// Quadrature approximation of the `W^{s,p}` norm for `s ∈ {0, 1}`:
    /// `‖f‖_{L^p}` for `s = 0`, `‖∇f‖_{L^p} + ‖⟨x⟩ f‖_{L^p}` for `s = 1`.
    ///
    /// For even `p` the integrands are polynomials times a Gaussian and the
    /// rule used is exact.
    pub fn lebesgue_sobolev_norm(&self, s: u32, p: f64) -> Result<f64> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidBasis(format!(
                "L^p exponent must be finite and >= 1, got {p}"
            )));
        }
        let ax = self.basis.lp_axis(p);
        let d = self.basis.dim();
        let w = product_weights(&ax.rule.weights, d);
        let vals = self.values_on(&ax);
        match s {
            0 => {
                let sum = Zip::from(&vals)
                    .and(&w)
                    .fold(0.0, |acc, v, w| acc + w * v.norm().powf(p));
                Ok(sum.powf(1.0 / p))
            }
            1 => {
                let grads = self.gradient_on(&ax);
                let mut grad_sq = ArrayD::<f64>::zeros(vals.raw_dim());
                for g in &grads {
                    Zip::from(&mut grad_sq).and(g).for_each(|acc, v| *acc += v.norm_sqr());
                }
                let grad_part = Zip::from(&grad_sq)
                    .and(&w)
                    .fold(0.0, |acc, g2, w| acc + w * g2.powf(p / 2.0))
                    .powf(1.0 / p);
                let x = &ax.rule.nodes;
                let mut weight_part: f64 = 0.0;
                for (idx, v) in vals.indexed_iter() {
                    let idx = idx.slice();
                    let r2: f64 = idx.iter().map(|&j| x[j] * x[j]).sum();
                    weight_part += w[idx] * (1.0 + r2).powf(p / 2.0) * v.norm().powf(p);
                }
                Ok(grad_part + weight_part.powf(1.0 / p))
            }
            _ => Err(Error::InvalidBasis(format!(
                "L^p Sobolev norms support s in {{0, 1}}, got {s}"
            ))),
        }
    }

    /// Writes `k_1,..,k_d,re,im` rows (header included), floats with 17
    /// significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let d = self.basis.dim();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=d).map(|i| format!("k_{i}")).collect();
        header.push("re".into());
        header.push("im".into());
        w.write_record(&header)?;
        for (idx, c) in self.coeffs.indexed_iter() {
            let mut row: Vec<String> = idx.slice().iter().map(|k| k.to_string()).collect();
            row.push(fmt_f64(c.re));
            row.push(fmt_f64(c.im));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`Self::write_csv`]; missing indices are
    /// zero, indices `>= n_modes` are rejected.
    pub fn read_csv<R: Read>(basis: &Arc<HermiteBasis>, input: R) -> Result<Self> {
        let d = basis.dim();
        let n = basis.n_modes();
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        let mut expected: Vec<String> = (1..=d).map(|i| format!("k_{i}")).collect();
        expected.push("re".into());
        expected.push("im".into());
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::StateFormat(format!("expected header {expected:?}, got {got:?}")));
        }
        let mut s = Self::zeros(basis);
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let mut idx = Vec::with_capacity(d);
            for a in 0..d {
                let k: usize = rec[a]
                    .trim()
                    .parse()
                    .map_err(|_| Error::StateFormat(format!("row {}: bad index `{}`", line + 1, &rec[a])))?;
                if k >= n {
                    return Err(Error::StateFormat(format!(
                        "row {}: index {k} >= n_modes {n}",
                        line + 1
                    )));
                }
                idx.push(k);
            }
            let parse = |i: usize| -> Result<f64> {
                rec[i]
                    .trim()
                    .parse()
                    .map_err(|_| Error::StateFormat(format!("row {}: bad number `{}`", line + 1, &rec[i])))
            };
            s.coeffs[IxDyn(&idx)] = C64::new(parse(d)?, parse(d + 1)?);
        }
        Ok(s)
    }
}

/// 17 significant digits, round-trippable.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl GridField {
    /// Samples a function of position on the chosen grid.
    pub fn from_fn<F: Fn(&[f64]) -> C64>(basis: &Arc<HermiteBasis>, grid: GridKind, f: F) -> Self {
        let x = &basis.axis(grid).rule.nodes;
        let d = basis.dim();
        let values = ArrayD::from_shape_fn(IxDyn(&vec![x.len(); d]), |idx| {
            let p: Vec<f64> = (0..d).map(|a| x[idx[a]]).collect();
            f(&p)
        });
        GridField {
            basis: basis.clone(),
            grid,
            values,
        }
    }

    /// Discrete projection onto the first `N` modes per axis.
    pub fn to_coeffs(&self) -> SpectralState {
        let ax = self.basis.axis(self.grid);
        let mut cur = self.values.clone();
        for a in 0..self.basis.dim() {
            cur = apply_axis(&cur, &ax.analysis, a);
        }
        SpectralState {
            basis: self.basis.clone(),
            coeffs: cur,
        }
    }

    /// Like [`Self::to_coeffs`] but checks the field belongs to `basis`.
    pub fn to_coeffs_in(&self, basis: &HermiteBasis) -> Result<SpectralState> {
        check_same(&self.basis, basis)?;
        Ok(self.to_coeffs())
    }

    /// Node coordinates of each grid point, in storage order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let x = &self.basis.axis(self.grid).rule.nodes;
        let d = self.basis.dim();
        self.values
            .indexed_iter()
            .map(|(idx, _)| (0..d).map(|a| x[idx[a]]).collect())
            .collect()
    }

    /// Whole-space quadrature of `g(value)` over the grid.
    pub fn integrate<F: Fn(C64) -> f64>(&self, g: F) -> f64 {
        let w = product_weights(&self.basis.axis(self.grid).rule.weights, self.basis.dim());
        Zip::from(&self.values).and(&w).fold(0.0, |acc, v, w| acc + w * g(*v))
    }

    /// Writes `x_1,..,x_d,re,im` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let d = self.basis.dim();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
        header.push("re".into());
        header.push("im".into());
        w.write_record(&header)?;
        for (p, v) in self.points().iter().zip(self.values.iter()) {
            let mut row: Vec<String> = p.iter().map(|x| fmt_f64(*x)).collect();
            row.push(fmt_f64(v.re));
            row.push(fmt_f64(v.im));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Transform pair with basis checking.
pub fn to_coeffs(field: &GridField, basis: &Arc<HermiteBasis>) -> Result<SpectralState> {
    field.to_coeffs_in(basis)
}

pub fn from_coeffs(state: &SpectralState, grid: GridKind) -> GridField {
    state.to_grid(grid)
}

/// Checks two states share a basis.
pub fn ensure_same_basis(a: &SpectralState, b: &SpectralState) -> Result<()> {
    check_same(a.basis(), b.basis())
}
