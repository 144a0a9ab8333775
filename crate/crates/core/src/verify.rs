//! Property suites run by `verify`. Each check reports its measured value
//! against a threshold.

use crate::analysis::{
    collocation_energy, energy, energy_rate_per_control, fit_growth_constant, growth_bound_excess, kpsi_constant,
    random_piecewise_control, random_state, KpsiProbe, RunRecord,
};
use crate::basis::{GridKind, HermiteBasis};
use crate::config::RunConfig;
use crate::control::ControlSignal;
use crate::dynamics::{evolve, linf_h1_distance, mild_residual, EvolutionConfig, Operators, Trajectory};
use crate::error::Result;
use crate::potential::{hardy_quotient, inverse_radius_norm};
use crate::state::SpectralState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Conservation,
    EnergyBound,
    Hardy,
    KpsiRatio,
    Convergence,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "conservation" => Some(Suite::Conservation),
            "energy_bound" => Some(Suite::EnergyBound),
            "hardy" => Some(Suite::Hardy),
            "lemma_kpsi" => Some(Suite::KpsiRatio),
            "convergence" => Some(Suite::Convergence),
            _ => None,
        }
    }
}

/// Deliberate defects for exercising the checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Evolve with `-u` while the checks assume `u`.
    ControlSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("<= {limit:e}"),
            pass: value <= limit,
        }
    }

    fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("in [{lo}, {hi}]"),
            pass: value >= lo && value <= hi,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {:.6e} ({})", self.name, self.value, self.bound)
    }
}

pub fn run_suite(suite: Suite, cfg: &RunConfig, fault: Option<Fault>) -> Result<Vec<Check>> {
    cfg.validate()?;
    match suite {
        Suite::Conservation => conservation(cfg),
        Suite::EnergyBound => energy_bound(cfg, fault),
        Suite::Hardy => hardy(cfg),
        Suite::KpsiRatio => kpsi_ratio(cfg),
        Suite::Convergence => convergence(cfg),
    }
}

fn conservation(cfg: &RunConfig) -> Result<Vec<Check>> {
    let basis = cfg.basis()?;
    let psi0 = cfg.initial_state(&basis)?;
    let traj = evolve(&psi0, &cfg.control, &cfg.evolution())?;
    let m0 = psi0.mass().max(f64::MIN_POSITIVE);
    let per_step = traj
        .states
        .windows(2)
        .map(|w| (w[1].mass() - w[0].mass()).abs() / m0)
        .fold(0.0, f64::max);
    let free = traj
        .times
        .iter()
        .map(|&t| (psi0.propagate_free(t).h1_norm() - psi0.h1_norm()).abs())
        .fold(0.0, f64::max);
    let mut checks = vec![
        Check::at_most("mass change per step (relative)", per_step, 1e-12),
        Check::at_most("free-flow H1 norm change", free, 1e-12),
    ];
    if cfg.control == ControlSignal::Zero {
        let drift = |f: fn(&SpectralState, u8) -> f64| {
            let e0 = f(&psi0, cfg.sigma);
            traj.states
                .iter()
                .map(|s| (f(s, cfg.sigma) - e0).abs() / e0)
                .fold(0.0, f64::max)
        };
        checks.push(Check::at_most(
            "energy drift with u = 0, N-node quartic term (relative)",
            drift(collocation_energy),
            1e-6,
        ));
        if cfg.sigma == 1 {
            checks.push(Check::at_most(
                "energy drift with u = 0, exact quartic term (relative)",
                drift(energy),
                1e-6,
            ));
        }
    }
    Ok(checks)
}

/// Largest mismatch between the per-step energy change and
/// `dt · ū · (rate(ψ_j) + rate(ψ_{j+1}))/2`, relative to the largest
/// predicted change.
pub fn energy_identity_mismatch(traj: &Trajectory, u: &ControlSignal) -> Result<f64> {
    let ops = Operators::new(traj.basis());
    let rates: Vec<f64> = traj
        .states
        .par_iter()
        .map(|s| energy_rate_per_control(&ops, s))
        .collect();
    let energies: Vec<f64> = traj.states.par_iter().map(|s| energy(s, 0)).collect();
    let dt = traj.dt();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in 0..traj.states.len() - 1 {
        let ubar = u.cell_average(traj.times[j], dt)?;
        let predicted = dt * ubar * 0.5 * (rates[j] + rates[j + 1]);
        worst = worst.max((energies[j + 1] - energies[j] - predicted).abs());
        scale = scale.max(predicted.abs());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

fn random_controls(rng: &mut ChaCha8Rng, count: usize, horizon: f64) -> Vec<ControlSignal> {
    (0..count)
        .map(|_| {
            let norm = rng.gen_range(0.5..3.0);
            random_piecewise_control(rng, 8, horizon, 1.0, norm)
        })
        .collect()
}

fn energy_bound(cfg: &RunConfig, fault: Option<Fault>) -> Result<Vec<Check>> {
    let basis = cfg.basis()?;
    let psi0 = cfg.initial_state(&basis)?;
    let evo = EvolutionConfig::strang(0, cfg.dt, cfg.t_final);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let training = random_controls(&mut rng, 20, cfg.t_final);
    let fresh = random_controls(&mut rng, 20, cfg.t_final);
    let sign = if fault == Some(Fault::ControlSign) { -1.0 } else { 1.0 };
    let run = |u: &ControlSignal| -> Result<(Trajectory, RunRecord)> {
        let traj = evolve(&psi0, &u.scaled(sign), &evo)?;
        let rec = RunRecord::from_trajectory(&traj, u, 0, false)?;
        Ok((traj, rec))
    };
    let train: Vec<(Trajectory, RunRecord)> = training.par_iter().map(run).collect::<Result<_>>()?;
    let records: Vec<RunRecord> = train.iter().map(|(_, r)| r.clone()).collect();
    let c_emp = fit_growth_constant(&records);
    let test: Vec<RunRecord> = fresh
        .par_iter()
        .map(|u| run(u).map(|(_, r)| r))
        .collect::<Result<_>>()?;
    let violations = test.iter().filter(|r| growth_bound_excess(r, c_emp) > 1e-12).count();
    let mismatch = train
        .iter()
        .zip(&training)
        .map(|((traj, _), u)| energy_identity_mismatch(traj, u))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut checks = vec![
        Check::at_most("energy identity mismatch (relative)", mismatch, 0.05),
        Check::at_most("growth bound violations on fresh controls", violations as f64, 0.0),
    ];
    if basis.len() <= 1024 {
        let c_star = crate::analysis::sharp_growth_constant(&Operators::new(&basis));
        checks.push(Check {
            name: format!("fitted c_emp = {c_emp:.6e} within sharp discrete constant"),
            value: c_emp,
            bound: format!("<= {c_star:.6e}"),
            pass: c_emp <= c_star * (1.0 + 1e-6),
        });
    }
    Ok(checks)
}

fn hardy(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n = if cfg.dim == 3 { cfg.n_modes } else { cfg.n_modes.min(16) };
    let basis = HermiteBasis::new(3, n)?;
    let g = SpectralState::ground(&basis);
    let num = inverse_radius_norm(&g)?;
    let q = hardy_quotient(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let states: Vec<SpectralState> = (0..100).map(|_| random_state(&basis, &mut rng)).collect();
    let worst = states
        .iter()
        .map(hardy_quotient)
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(vec![
        Check::at_most(
            "ground state |x|^-1 norm error vs sqrt(2)",
            (num - 2f64.sqrt()).abs(),
            1e-6,
        ),
        Check::at_most(
            "ground state quotient error vs sqrt(2)/sqrt(3)",
            (q - (2.0f64 / 3.0).sqrt()).abs(),
            1e-6,
        ),
        // ‖ψ/|x|‖ ≤ 2‖∇ψ‖ ≤ 2‖ψ‖_{H¹}
        Check::at_most("max quotient over 100 random states", worst, 2.0),
    ])
}

/// `(C_N, C_{2N})` for the `K_h ψ` ratio.
pub fn kpsi_doubling(dim: usize, n: usize, probe: &KpsiProbe) -> Result<(f64, f64)> {
    let a = kpsi_constant(&HermiteBasis::new(dim, n)?, probe)?;
    let b = kpsi_constant(&HermiteBasis::new(dim, 2 * n)?, probe)?;
    Ok((a, b))
}

fn kpsi_ratio(cfg: &RunConfig) -> Result<Vec<Check>> {
    let probe = KpsiProbe {
        trajectories: 20,
        q_list: vec![2.0, 4.0, 8.0],
        t_final: cfg.t_final.min(0.5),
        dt: cfg.dt.max(cfg.t_final.min(0.5) / 50.0),
        seed: cfg.seed,
    };
    let (a, b) = kpsi_doubling(cfg.dim, cfg.n_modes, &probe)?;
    Ok(vec![Check {
        name: format!(
            "ratio constant at N = {} vs N = {} ({a:.6e})",
            2 * cfg.n_modes,
            cfg.n_modes
        ),
        value: b,
        bound: format!("<= 1.05 x {a:.6e}"),
        pass: b <= 1.05 * a,
    }])
}

/// Observed order `log2(e1/e2 - 1)` from runs at `dt`, `dt/2` and a `dt/4`
/// reference.
pub fn strang_order(psi0: &SpectralState, u: &ControlSignal, sigma: u8, dt: f64, t_final: f64) -> Result<f64> {
    let run = |h: f64| evolve(psi0, u, &EvolutionConfig::strang(sigma, h, t_final));
    let (a, b, r) = (run(dt)?, run(dt / 2.0)?, run(dt / 4.0)?);
    let e1 = a.final_state().h1_distance(r.final_state());
    let e2 = b.final_state().h1_distance(r.final_state());
    Ok((e1 / e2 - 1.0).log2())
}

fn convergence(cfg: &RunConfig) -> Result<Vec<Check>> {
    let basis: Arc<HermiteBasis> = cfg.basis()?;
    let psi0 = cfg.initial_state(&basis)?;
    let order = strang_order(&psi0, &cfg.control, cfg.sigma, cfg.dt, cfg.t_final)?;
    let coarse = evolve(
        &psi0,
        &cfg.control,
        &EvolutionConfig::strang(cfg.sigma, cfg.dt, cfg.t_final),
    )?;
    let fine = evolve(
        &psi0,
        &cfg.control,
        &EvolutionConfig::strang(cfg.sigma, cfg.dt / 2.0, cfg.t_final),
    )?;
    let r1 = mild_residual(&coarse, &cfg.control, cfg.sigma)?;
    let r2 = mild_residual(&fine, &cfg.control, cfg.sigma)?;
    let t_short = cfg.t_final.min(0.1);
    let s = evolve(
        &psi0,
        &cfg.control,
        &EvolutionConfig::strang(cfg.sigma, cfg.dt, t_short),
    )?;
    let p = evolve(
        &psi0,
        &cfg.control,
        &EvolutionConfig::picard(cfg.sigma, cfg.dt, t_short),
    )?;
    let mut checks = vec![Check::within("Strang observed order", order, 1.8, 2.2)];
    if r2 > 1e-13 {
        checks.push(Check::within("mild residual ratio dt vs dt/2", r1 / r2, 3.0, 5.0));
    } else {
        checks.push(Check::at_most("mild residual", r1, 1e-10));
    }
    checks.push(Check::at_most(
        "Picard vs Strang L^inf_T H1 gap",
        linf_h1_distance(&s, &p),
        1e-4,
    ));
    Ok(checks)
}

/// Round trip, discrete orthonormality on both grids, and free-propagator
/// norm preservation over `steps` steps of size `dt`.
pub fn transform_checks(dim: usize, n_modes: usize, seed: u64, dt: f64, steps: usize) -> Result<Vec<Check>> {
    let basis = HermiteBasis::new(dim, n_modes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = random_state(&basis, &mut rng);
    let mut checks = Vec::new();
    for (grid, label) in [(GridKind::Quadrature, "2N-node"), (GridKind::Collocation, "N-node")] {
        let g = basis.gram(grid);
        let ortho = g
            .indexed_iter()
            .map(|((a, b), v)| (v - if a == b { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most(
            &format!("orthonormality error, {label} grid"),
            ortho,
            1e-12,
        ));
        let back = psi.to_grid(grid).to_coeffs();
        let err = back.sub(&psi).mass() / psi.mass();
        checks.push(Check::at_most(&format!("round trip error, {label} grid"), err, 1e-12));
    }
    let mut worst_mass: f64 = 0.0;
    let mut worst_hs: f64 = 0.0;
    let mut cur = psi.clone();
    for _ in 0..steps {
        let next = cur.propagate_free(dt);
        worst_mass = worst_mass.max((next.mass() - cur.mass()).abs());
        for s in [1.0, 2.0] {
            worst_hs = worst_hs.max((next.sobolev_norm(s) - cur.sobolev_norm(s)).abs() / cur.sobolev_norm(s));
        }
        cur = next;
    }
    checks.push(Check::at_most(
        "free propagator mass change per step",
        worst_mass,
        1e-13,
    ));
    checks.push(Check::at_most(
        "free propagator H^s change per step (relative)",
        worst_hs,
        1e-13,
    ));
    Ok(checks)
}
