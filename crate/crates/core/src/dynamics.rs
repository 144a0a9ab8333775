//! Time evolution of `i ψ_t + Hψ = u(t) K ψ - σ |ψ|^2 ψ`.
//!
//! Two integrators share one spatial discretization: `K` and `|ψ|^2 ψ` act
//! pointwise on the `N`-node collocation grid.
//!
//! * Strang splitting: half potential phase, exact `e^{i dt H}`, half phase.
//! * Picard iteration on the discrete Duhamel map (trapezoid rule in time),
//!   on adaptively chosen windows.

use crate::basis::{GridKind, HermiteBasis};
use crate::control::ControlSignal;
use crate::error::{Error, Result};
use crate::potential::k_on_grid;
use crate::state::SpectralState;
use crate::tensor::C64;
use ndarray::{ArrayD, Zip};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Largest step accepted by [`strang_step`].
pub const MAX_DT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Strang,
    Picard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    /// Nonlinearity switch, 0 or 1.
    pub sigma: u8,
    pub dt: f64,
    pub t_final: f64,
    pub integrator: Integrator,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
}

impl EvolutionConfig {
    pub fn strang(sigma: u8, dt: f64, t_final: f64) -> Self {
        EvolutionConfig {
            sigma,
            dt,
            t_final,
            integrator: Integrator::Strang,
            picard_tol: 1e-12,
            picard_max_iter: 60,
        }
    }

    pub fn picard(sigma: u8, dt: f64, t_final: f64) -> Self {
        EvolutionConfig {
            integrator: Integrator::Picard,
            ..Self::strang(sigma, dt, t_final)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma > 1 {
            return Err(Error::InvalidEvolution(format!(
                "sigma must be 0 or 1, got {}",
                self.sigma
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidEvolution(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt > MAX_DT {
            return Err(Error::InvalidEvolution(format!("dt = {} exceeds {MAX_DT}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidEvolution(format!(
                "T must be positive, got {}",
                self.t_final
            )));
        }
        if self.integrator == Integrator::Picard && !(self.picard_tol > 0.0) {
            return Err(Error::InvalidEvolution("picard_tol must be positive".into()));
        }
        if self.integrator == Integrator::Picard && self.picard_max_iter == 0 {
            return Err(Error::InvalidEvolution("picard_max_iter must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps and the uniform step that lands exactly on `T`.
    pub fn step_grid(&self) -> (usize, f64) {
        step_grid(self.t_final, self.dt)
    }

    pub fn sigma_f64(&self) -> f64 {
        self.sigma as f64
    }
}

pub(crate) fn step_grid(t_final: f64, dt: f64) -> (usize, f64) {
    let n = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    (n, t_final / n as f64)
}

/// Per-window Picard diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardWindow {
    pub start: f64,
    pub steps: usize,
    pub iterations: usize,
    /// Largest ratio of successive iterate differences (`L^∞_T H¹`).
    pub contraction: f64,
}

/// Samples `t_j` with the state at each.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralState>,
    pub picard: Vec<PicardWindow>,
}

impl Trajectory {
    pub fn basis(&self) -> &Arc<HermiteBasis> {
        self.states[0].basis()
    }

    pub fn final_state(&self) -> &SpectralState {
        self.states.last().expect("trajectory is never empty")
    }

    /// Uniform step of the sample grid (0 for a single sample).
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }
}

/// Pointwise operators on the collocation grid.
#[derive(Debug, Clone)]
pub struct Operators {
    basis: Arc<HermiteBasis>,
    k: ArrayD<f64>,
}

impl Operators {
    pub fn new(basis: &Arc<HermiteBasis>) -> Self {
        Operators {
            basis: basis.clone(),
            k: k_on_grid(basis, GridKind::Collocation),
        }
    }

    /// `K` on the collocation grid.
    pub fn k_grid(&self) -> &ArrayD<f64> {
        &self.k
    }

    /// `Kψ` (collocation).
    pub fn k_psi(&self, s: &SpectralState) -> SpectralState {
        let mut f = s.to_grid(GridKind::Collocation);
        Zip::from(&mut f.values).and(&self.k).for_each(|v, &k| *v *= k);
        f.to_coeffs()
    }

    /// `|ψ|^2 ψ` (collocation).
    pub fn cubic(&self, s: &SpectralState) -> SpectralState {
        let mut f = s.to_grid(GridKind::Collocation);
        f.values.mapv_inplace(|v| v * v.norm_sqr());
        f.to_coeffs()
    }

    /// `ψ ↦ exp(-i τ (ū K - σ|ψ|^2)) ψ` pointwise.
    pub fn phase(&self, s: &SpectralState, ubar: f64, sigma: f64, tau: f64) -> SpectralState {
        let mut f = s.to_grid(GridKind::Collocation);
        Zip::from(&mut f.values).and(&self.k).for_each(|v, &k| {
            let theta = -tau * (ubar * k - sigma * v.norm_sqr());
            *v *= C64::from_polar(1.0, theta);
        });
        f.to_coeffs()
    }

    /// One Strang step with cell-averaged control `ubar`.
    pub fn strang(&self, s: &SpectralState, ubar: f64, sigma: f64, dt: f64) -> SpectralState {
        if ubar == 0.0 && sigma == 0.0 {
            return s.propagate_free(dt);
        }
        let half = self.phase(s, ubar, sigma, 0.5 * dt);
        let lin = half.propagate_free(dt);
        self.phase(&lin, ubar, sigma, 0.5 * dt)
    }

    pub fn basis(&self) -> &Arc<HermiteBasis> {
        &self.basis
    }
}

/// One Strang step from `t` to `t + dt`.
pub fn strang_step(state: &SpectralState, u: &ControlSignal, t: f64, dt: f64, sigma: u8) -> Result<SpectralState> {
    if !(dt > 0.0) || dt > MAX_DT {
        return Err(Error::InvalidEvolution(format!("dt = {dt} outside (0, {MAX_DT}]")));
    }
    let ubar = u.cell_average(t, dt)?;
    Ok(Operators::new(state.basis()).strang(state, ubar, sigma as f64, dt))
}

fn check_control(u: &ControlSignal, t_final: f64) -> Result<()> {
    u.validate()?;
    let (start, end) = u.domain();
    if start > 0.0 || end < t_final * (1.0 - 1e-12) {
        return Err(Error::ControlDomain { t: t_final, start, end });
    }
    Ok(())
}

fn guard(s: &SpectralState, step: usize, t: f64) -> Result<()> {
    if s.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { step, t })
    }
}

/// Evolves `psi0` over `[0, T]` with the configured integrator, keeping every
/// step.
pub fn evolve(psi0: &SpectralState, u: &ControlSignal, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    check_control(u, cfg.t_final)?;
    guard(psi0, 0, 0.0)?;
    match cfg.integrator {
        Integrator::Strang => evolve_strang(psi0, u, cfg),
        Integrator::Picard => picard_solve(psi0, u, cfg),
    }
}

fn evolve_strang(psi0: &SpectralState, u: &ControlSignal, cfg: &EvolutionConfig) -> Result<Trajectory> {
    let ops = Operators::new(psi0.basis());
    let (n, dt) = cfg.step_grid();
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(psi0.clone());
    for j in 0..n {
        let t = j as f64 * dt;
        let ubar = u.cell_average(t, dt)?;
        let next = ops.strang(&states[j], ubar, cfg.sigma_f64(), dt);
        guard(&next, j + 1, t + dt)?;
        times.push((j + 1) as f64 * dt);
        states.push(next);
    }
    Ok(Trajectory {
        times,
        states,
        picard: Vec::new(),
    })
}

/// Discrete Duhamel integrals `D_j ≈ ∫_{t_0}^{t_j} e^{i(t_j-τ)H} w(τ) F(τ) dτ`
/// by the trapezoid rule, with one weight per cell:
/// `D_{j+1} = e^{i dt H}(D_j + dt/2 w_j F_j) + dt/2 w_j F_{j+1}`.
pub fn duhamel(forces: &[SpectralState], weights: &[f64], dt: f64) -> Vec<SpectralState> {
    let mut out = Vec::with_capacity(forces.len());
    out.push(SpectralState::zeros(forces[0].basis()));
    for j in 0..forces.len() - 1 {
        let half = C64::new(0.5 * dt * weights[j], 0.0);
        let mut acc = out[j].clone();
        acc.axpy(half, &forces[j]);
        let mut next = acc.propagate_free(dt);
        next.axpy(half, &forces[j + 1]);
        out.push(next);
    }
    out
}

/// Sum of the two Duhamel terms for a given path:
/// `-i ∫ u e^{i(t-τ)H} Kψ + i σ ∫ e^{i(t-τ)H} |ψ|^2 ψ`.
fn duhamel_terms(ops: &Operators, path: &[SpectralState], ubar: &[f64], sigma: f64, dt: f64) -> Vec<SpectralState> {
    let kf: Vec<SpectralState> = path.iter().map(|s| ops.k_psi(s)).collect();
    let mut total = duhamel(&kf, ubar, dt);
    for d in total.iter_mut() {
        *d = d.scaled(C64::new(0.0, -1.0));
    }
    if sigma != 0.0 {
        let nf: Vec<SpectralState> = path.iter().map(|s| ops.cubic(s)).collect();
        let ones = vec![1.0; ubar.len()];
        for (t, d) in total.iter_mut().zip(duhamel(&nf, &ones, dt)) {
            t.axpy(C64::new(0.0, sigma), &d);
        }
    }
    total
}

/// The discrete Duhamel map applied to a path on one window.
fn duhamel_map(
    ops: &Operators,
    start: &SpectralState,
    path: &[SpectralState],
    ubar: &[f64],
    sigma: f64,
    dt: f64,
) -> Vec<SpectralState> {
    let terms = duhamel_terms(ops, path, ubar, sigma, dt);
    terms
        .into_iter()
        .enumerate()
        .map(|(j, mut d)| {
            d.axpy(C64::new(1.0, 0.0), &start.propagate_free(j as f64 * dt));
            d
        })
        .collect()
}

fn path_distance(a: &[SpectralState], b: &[SpectralState]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.h1_distance(y)).fold(0.0, f64::max)
}

/// Iterates the Duhamel map on one window from the free flow.
/// Returns (path, iterations, contraction, converged).
fn picard_window(
    ops: &Operators,
    start: &SpectralState,
    ubar: &[f64],
    sigma: f64,
    dt: f64,
    tol: f64,
    max_iter: usize,
) -> (Vec<SpectralState>, usize, f64, bool) {
    let mut path: Vec<SpectralState> = (0..=ubar.len()).map(|j| start.propagate_free(j as f64 * dt)).collect();
    let mut prev_diff = f64::NAN;
    let mut contraction: f64 = 0.0;
    // ratios from round-off sized differences carry no information
    let floor = 1e-11 * start.h1_norm().max(1e-300);
    for it in 1..=max_iter {
        let next = duhamel_map(ops, start, &path, ubar, sigma, dt);
        let diff = path_distance(&next, &path);
        if prev_diff.is_finite() && prev_diff > floor {
            contraction = contraction.max(diff / prev_diff);
        }
        path = next;
        if !diff.is_finite() {
            return (path, it, f64::INFINITY, false);
        }
        if diff < tol {
            return (path, it, contraction, true);
        }
        prev_diff = diff;
    }
    (path, max_iter, contraction, false)
}

/// Iterates on a window only long enough to measure the contraction factor.
fn probe_contraction(ops: &Operators, start: &SpectralState, ubar: &[f64], sigma: f64, dt: f64) -> f64 {
    let (_, _, c, _) = picard_window(ops, start, ubar, sigma, dt, 0.0, 4);
    c
}

/// Contraction factor of the Picard map on the fixed window `[0, window]`.
pub fn contraction_factor(psi0: &SpectralState, u: &ControlSignal, sigma: u8, dt: f64, window: f64) -> Result<f64> {
    check_control(u, window)?;
    let ops = Operators::new(psi0.basis());
    let (n, dt) = step_grid(window, dt);
    let ubar = (0..n)
        .map(|j| u.cell_average(j as f64 * dt, dt))
        .collect::<Result<Vec<_>>>()?;
    Ok(probe_contraction(&ops, psi0, &ubar, sigma as f64, dt))
}

/// Fixed point of the discrete Duhamel map, advanced window by window. Each
/// window is halved until the measured contraction factor drops below 1/2.
pub fn picard_solve(psi0: &SpectralState, u: &ControlSignal, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    check_control(u, cfg.t_final)?;
    let ops = Operators::new(psi0.basis());
    let (n, dt) = cfg.step_grid();
    let ubar = (0..n)
        .map(|j| u.cell_average(j as f64 * dt, dt))
        .collect::<Result<Vec<_>>>()?;
    let sigma = cfg.sigma_f64();
    let mut times = vec![0.0];
    let mut states = vec![psi0.clone()];
    let mut windows = Vec::new();
    let mut pos = 0;
    let mut width = n;
    while pos < n {
        width = width.min(n - pos).max(1);
        let start = states[pos].clone();
        loop {
            let c = probe_contraction(&ops, &start, &ubar[pos..pos + width], sigma, dt);
            if c < 0.5 || width == 1 {
                break;
            }
            width = (width / 2).max(1);
        }
        let (path, iterations, contraction, ok) = picard_window(
            &ops,
            &start,
            &ubar[pos..pos + width],
            sigma,
            dt,
            cfg.picard_tol,
            cfg.picard_max_iter,
        );
        if !ok {
            return Err(Error::PicardNonConvergence {
                iterations,
                ratio: contraction,
            });
        }
        for (j, s) in path.into_iter().enumerate().skip(1) {
            guard(&s, pos + j, (pos + j) as f64 * dt)?;
            times.push((pos + j) as f64 * dt);
            states.push(s);
        }
        windows.push(PicardWindow {
            start: pos as f64 * dt,
            steps: width,
            iterations,
            contraction,
        });
        pos += width;
    }
    Ok(Trajectory {
        times,
        states,
        picard: windows,
    })
}

/// `max_j ‖ψ(t_j) - Φ(ψ)(t_j)‖_{H¹}` where `Φ` is the discrete Duhamel map
/// over the whole trajectory.
pub fn mild_residual(traj: &Trajectory, u: &ControlSignal, sigma: u8) -> Result<f64> {
    if traj.states.len() < 2 {
        return Ok(0.0);
    }
    let dt = traj.dt();
    let n = traj.states.len() - 1;
    let ubar = (0..n)
        .map(|j| u.cell_average(traj.times[j], dt))
        .collect::<Result<Vec<_>>>()?;
    let ops = Operators::new(traj.basis());
    let mapped = duhamel_map(&ops, &traj.states[0], &traj.states, &ubar, sigma as f64, dt);
    Ok(path_distance(&mapped, &traj.states))
}

/// `max_j ‖a_j - b_j‖_{H¹}` over two trajectories on the same grid.
pub fn linf_h1_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    path_distance(&a.states, &b.states)
}
