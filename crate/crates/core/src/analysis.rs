//! Functionals along trajectories and the experiments built on them:
//! energy, `X¹_T` norms, the `ε_n` weak-limit quantity, attainable-set
//! sampling and greedy covering numbers.

use crate::basis::{GridKind, HermiteBasis};
use crate::control::{weak_family, ControlSignal};
use crate::dynamics::{duhamel, evolve, linf_h1_distance, EvolutionConfig, Operators, Trajectory};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_gk;
use crate::state::{fmt_f64, SpectralState};
use crate::tensor::C64;
use nalgebra::DMatrix;
use ndarray::Zip;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;

/// `E = ⟨ψ, Hψ⟩ + ‖ψ‖² + σ/2 ‖ψ‖_{L⁴}^4`. The quartic term is integrated
/// exactly.
pub fn energy(state: &SpectralState, sigma: u8) -> f64 {
    let quadratic = Zip::from(state.coeffs())
        .and(state.basis().eigenvalues())
        .fold(0.0, |acc, a, &l| acc + (l + 1.0) * a.norm_sqr());
    if sigma == 0 {
        return quadratic;
    }
    let l4 = state.lebesgue_sobolev_norm(0, 4.0).expect("p = 4 is valid");
    quadratic + 0.5 * sigma as f64 * l4.powi(4)
}

/// [`energy`] with the quartic term on the `N`-node collocation grid. This is
/// the functional the semi-discrete collocation flow conserves when `u = 0`;
/// it differs from [`energy`] by the aliasing error of `|ψ|^4`.
pub fn collocation_energy(state: &SpectralState, sigma: u8) -> f64 {
    let quadratic = energy(state, 0);
    if sigma == 0 {
        return quadratic;
    }
    let quartic = state
        .to_grid(GridKind::Collocation)
        .integrate(|v| v.norm_sqr() * v.norm_sqr());
    quadratic + 0.5 * sigma as f64 * quartic
}

/// `max |ψ|` on the quadrature grid.
pub fn linf_grid(state: &SpectralState) -> f64 {
    state
        .to_grid(GridKind::Quadrature)
        .values
        .iter()
        .fold(0.0, |m, v| m.max(v.norm()))
}

/// `∫_a^b |u|`.
pub fn abs_integral(u: &ControlSignal, a: f64, b: f64) -> Result<f64> {
    if let ControlSignal::PiecewiseConstant { .. } | ControlSignal::Zero = u {
        // |u| of a step function is a step function
        let abs = match u {
            ControlSignal::PiecewiseConstant { breakpoints, values } => ControlSignal::PiecewiseConstant {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|v| v.abs()).collect(),
            },
            _ => ControlSignal::Zero,
        };
        return abs.integral(a, b);
    }
    u.eval(a)?;
    u.eval(b)?;
    let f = |t: f64| u.eval(t).map(f64::abs).unwrap_or(0.0);
    Ok(adaptive_gk(&f, a, b, 1e-12, 1e-15))
}

/// Per-sample diagnostics of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub h1: Vec<f64>,
    pub linf_grid: Vec<f64>,
    pub w16: Option<Vec<f64>>,
    /// `∫_0^t |u|`.
    pub control_l1: Vec<f64>,
}

impl RunRecord {
    pub fn from_trajectory(traj: &Trajectory, u: &ControlSignal, sigma: u8, with_w16: bool) -> Result<Self> {
        let rows: Vec<(f64, f64, f64, f64, Option<f64>)> = traj
            .states
            .par_iter()
            .map(|s| {
                let w16 = if with_w16 {
                    Some(s.lebesgue_sobolev_norm(1, 6.0).expect("p = 6 is valid"))
                } else {
                    None
                };
                (s.mass(), energy(s, sigma), s.h1_norm(), linf_grid(s), w16)
            })
            .collect();
        let mut control_l1 = Vec::with_capacity(traj.times.len());
        let mut acc = 0.0;
        control_l1.push(0.0);
        for w in traj.times.windows(2) {
            acc += abs_integral(u, w[0], w[1])?;
            control_l1.push(acc);
        }
        Ok(RunRecord {
            times: traj.times.clone(),
            mass: rows.iter().map(|r| r.0).collect(),
            energy: rows.iter().map(|r| r.1).collect(),
            h1: rows.iter().map(|r| r.2).collect(),
            linf_grid: rows.iter().map(|r| r.3).collect(),
            w16: if with_w16 {
                Some(rows.iter().map(|r| r.4.expect("computed")).collect())
            } else {
                None
            },
            control_l1,
        })
    }

    /// `max_j |m_j - m_0| / m_0`.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        self.mass.iter().fold(0.0_f64, |acc, m| acc.max((m - m0).abs())) / m0.max(f64::MIN_POSITIVE)
    }

    /// `max_j |E_j - E_0| / E_0`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy.iter().fold(0.0_f64, |acc, e| acc.max((e - e0).abs())) / e0.max(f64::MIN_POSITIVE)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t", "mass", "energy", "h1", "linf_grid"];
        if self.w16.is_some() {
            header.push("w16");
        }
        header.push("control_l1");
        w.write_record(&header)?;
        for j in 0..self.times.len() {
            let mut row = vec![
                fmt_f64(self.times[j]),
                fmt_f64(self.mass[j]),
                fmt_f64(self.energy[j]),
                fmt_f64(self.h1[j]),
                fmt_f64(self.linf_grid[j]),
            ];
            if let Some(w16) = &self.w16 {
                row.push(fmt_f64(w16[j]));
            }
            row.push(fmt_f64(self.control_l1[j]));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// `(∫_0^T f^q)^{1/q}` by the trapezoid rule.
pub fn lq_time_norm(times: &[f64], values: &[f64], q: f64) -> f64 {
    let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(q)).collect();
    trapezoid(times, &powered).powf(1.0 / q)
}

/// The two parts of the `X¹_T` norm over the trajectory span `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct X1Norm {
    pub linf_h1: f64,
    pub l2_w16: f64,
}

impl X1Norm {
    pub fn total(&self) -> f64 {
        self.linf_h1 + self.l2_w16
    }
}

/// `(max_j ‖ψ_j‖_{H¹}, (∫_0^T ‖ψ‖_{W^{1,6}}^2)^{1/2})`.
pub fn x1t_norm(traj: &Trajectory) -> X1Norm {
    let (h1, w16): (Vec<f64>, Vec<f64>) = traj
        .states
        .par_iter()
        .map(|s| (s.h1_norm(), s.lebesgue_sobolev_norm(1, 6.0).expect("p = 6 is valid")))
        .unzip();
    X1Norm {
        linf_h1: h1.iter().fold(0.0, |a: f64, &b| a.max(b)),
        l2_w16: lq_time_norm(&traj.times, &w16, 2.0),
    }
}

/// `sup_j ‖∫_0^{t_j} (u_n - u) e^{i(t_j-τ)H} F(ψ(τ)) dτ‖_{H¹}` with `F = K`.
pub fn epsilon_n(traj: &Trajectory, u: &ControlSignal, u_n: &ControlSignal) -> Result<f64> {
    let ops = Operators::new(traj.basis());
    epsilon_n_with(traj, u, u_n, |s| ops.k_psi(s))
}

/// [`epsilon_n`] with the multiplier `ψ ↦ Kψ` replaced by `op`.
pub fn epsilon_n_with<F>(traj: &Trajectory, u: &ControlSignal, u_n: &ControlSignal, op: F) -> Result<f64>
where
    F: Fn(&SpectralState) -> SpectralState + Sync,
{
    if traj.states.len() < 2 {
        return Ok(0.0);
    }
    if u == u_n {
        return Ok(0.0);
    }
    let dt = traj.dt();
    let weights = traj.times[..traj.times.len() - 1]
        .iter()
        .map(|&t| Ok(u_n.cell_average(t, dt)? - u.cell_average(t, dt)?))
        .collect::<Result<Vec<f64>>>()?;
    let forces: Vec<SpectralState> = traj.states.par_iter().map(&op).collect();
    Ok(duhamel(&forces, &weights, dt)
        .iter()
        .fold(0.0, |m, d| m.max(d.h1_norm())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakLimitRow {
    pub n: u32,
    pub eps_n: f64,
    pub zn_linf_h1: f64,
    pub ratio: f64,
}

/// Removes repeated entries, keeping first occurrences. Returns the
/// deduplicated list and whether anything was removed.
pub fn dedup_preserving(n_list: &[u32]) -> (Vec<u32>, bool) {
    let mut seen = std::collections::BTreeSet::new();
    let out: Vec<u32> = n_list.iter().copied().filter(|n| seen.insert(*n)).collect();
    let removed = out.len() != n_list.len();
    (out, removed)
}

/// For each `n`: `ε_n`, `sup_t ‖ψ_n - ψ‖_{H¹}` with `u_n = u + sin(2πnt)`,
/// and their ratio.
pub fn weak_limit_experiment(
    psi0: &SpectralState,
    u: &ControlSignal,
    n_list: &[u32],
    cfg: &EvolutionConfig,
) -> Result<Vec<WeakLimitRow>> {
    weak_limit_experiment_with(psi0, u, n_list, cfg, weak_family)
}

/// [`weak_limit_experiment`] with an arbitrary family `n ↦ u_n`.
pub fn weak_limit_experiment_with<F>(
    psi0: &SpectralState,
    u: &ControlSignal,
    n_list: &[u32],
    cfg: &EvolutionConfig,
    family: F,
) -> Result<Vec<WeakLimitRow>>
where
    F: Fn(&ControlSignal, u32) -> ControlSignal + Sync,
{
    let (n_list, _) = dedup_preserving(n_list);
    if n_list.is_empty() {
        return Ok(Vec::new());
    }
    let base = evolve(psi0, u, cfg)?;
    n_list
        .par_iter()
        .map(|&n| {
            let u_n = family(u, n);
            let traj_n = evolve(psi0, &u_n, cfg)?;
            let eps_n = epsilon_n(&base, u, &u_n)?;
            let zn = linf_h1_distance(&base, &traj_n);
            let ratio = if eps_n > 0.0 { zn / eps_n } else { 0.0 };
            Ok(WeakLimitRow {
                n,
                eps_n,
                zn_linf_h1: zn,
                ratio,
            })
        })
        .collect()
}

pub fn write_weak_limit_csv<W: Write>(rows: &[WeakLimitRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "eps_n", "zn_linf_h1", "ratio"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            fmt_f64(r.eps_n),
            fmt_f64(r.zn_linf_h1),
            fmt_f64(r.ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One point of the sampled attainable set.
#[derive(Debug, Clone)]
pub struct ReachSample {
    pub sample_id: usize,
    pub control: ControlSignal,
    pub horizon: f64,
    pub r: f64,
    pub lr_norm: f64,
    /// `None` when the integrator failed; see `error`.
    pub state: Option<SpectralState>,
    pub h1: f64,
    pub error: Option<String>,
}

/// Terminal states `Φ^{u}(t)(ψ_0)` for each `(u, t)` pair. Integrator
/// failures are recorded per sample.
pub fn reach_sample(
    psi0: &SpectralState,
    pairs: &[(ControlSignal, f64)],
    r: f64,
    cfg: &EvolutionConfig,
) -> Vec<ReachSample> {
    pairs
        .par_iter()
        .enumerate()
        .map(|(id, (u, horizon))| {
            let lr = u.lr_norm(r, *horizon).unwrap_or(f64::NAN);
            let result = if *horizon == 0.0 {
                Ok(psi0.clone())
            } else {
                let cfg = EvolutionConfig {
                    t_final: *horizon,
                    dt: cfg.dt.min(*horizon),
                    ..cfg.clone()
                };
                evolve(psi0, u, &cfg).map(|t| t.final_state().clone())
            };
            match result {
                Ok(s) => ReachSample {
                    sample_id: id,
                    control: u.clone(),
                    horizon: *horizon,
                    r,
                    lr_norm: lr,
                    h1: s.h1_norm(),
                    state: Some(s),
                    error: None,
                },
                Err(e) => ReachSample {
                    sample_id: id,
                    control: u.clone(),
                    horizon: *horizon,
                    r,
                    lr_norm: lr,
                    h1: f64::NAN,
                    state: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

pub fn write_reach_csv<W: Write>(samples: &[ReachSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_id", "t", "r", "lr_norm", "h1"])?;
    for s in samples {
        w.write_record([
            s.sample_id.to_string(),
            fmt_f64(s.horizon),
            fmt_f64(s.r),
            fmt_f64(s.lr_norm),
            fmt_f64(s.h1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Pairwise `H¹` distances.
pub fn h1_distance_matrix(samples: &[SpectralState]) -> Vec<Vec<f64>> {
    let n = samples.len();
    (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| samples[i].h1_distance(&samples[j])).collect())
        .collect()
}

/// Greedy net on a distance matrix: scan in order, every uncovered point
/// becomes a center covering its closed `eps`-ball.
fn greedy_net(dist: &[Vec<f64>], eps: f64) -> usize {
    let n = dist.len();
    let mut covered = vec![false; n];
    let mut centers = 0;
    for i in 0..n {
        if covered[i] {
            continue;
        }
        centers += 1;
        for j in 0..n {
            if dist[i][j] <= eps {
                covered[j] = true;
            }
        }
    }
    centers
}

/// Greedy `ε`-net sizes for each radius, made monotone by keeping the best
/// net found at any radius `≤ ε` (a net at a smaller radius is an `ε`-net).
/// The greedy size only changes at pairwise distances, so those are the
/// radii scanned.
pub fn covering_curve_from_distances(dist: &[Vec<f64>], eps_list: &[f64]) -> Vec<usize> {
    let n = dist.len();
    if n == 0 {
        return vec![0; eps_list.len()];
    }
    let max_eps = eps_list.iter().copied().fold(0.0, f64::max);
    let mut radii: Vec<f64> = dist
        .iter()
        .flat_map(|row| row.iter().copied())
        .filter(|&d| d <= max_eps)
        .collect();
    radii.extend(eps_list.iter().copied());
    radii.sort_by(|a, b| a.partial_cmp(b).expect("finite distance"));
    radii.dedup();
    let mut best = n;
    let mut envelope = Vec::with_capacity(radii.len());
    for &r in &radii {
        best = best.min(greedy_net(dist, r));
        envelope.push((r, best));
    }
    eps_list
        .iter()
        .map(|&e| {
            let k = envelope.partition_point(|(r, _)| *r <= e);
            if k == 0 {
                n
            } else {
                envelope[k - 1].1
            }
        })
        .collect()
}

/// Size of a greedy `ε`-net of the samples in the `H¹` distance.
pub fn covering_number(samples: &[SpectralState], eps: f64) -> Result<usize> {
    Ok(covering_curve(samples, &[eps])?[0])
}

/// [`covering_number`] for several radii sharing one distance matrix.
pub fn covering_curve(samples: &[SpectralState], eps_list: &[f64]) -> Result<Vec<usize>> {
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::config("eps", format!("radius must be positive, got {e}")));
    }
    if let Some(first) = samples.first() {
        for s in samples {
            crate::state::ensure_same_basis(first, s)?;
        }
    }
    Ok(covering_curve_from_distances(&h1_distance_matrix(samples), eps_list))
}

pub fn write_covering_csv<W: Write>(eps_list: &[f64], sizes: &[usize], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eps", "net_size"])?;
    for (e, s) in eps_list.iter().zip(sizes) {
        w.write_record([fmt_f64(*e), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Band-limited state with complex Gaussian coefficients divided by `λ_k`.
pub fn random_state<R: Rng>(basis: &Arc<HermiteBasis>, rng: &mut R) -> SpectralState {
    let mut s = SpectralState::zeros(basis);
    let eig = basis.eigenvalues().clone();
    Zip::from(s.coeffs_mut()).and(&eig).for_each(|c, &l| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *c = C64::new(re, im) / l;
    });
    s
}

/// [`random_state`] rescaled to unit mass.
pub fn random_unit_state<R: Rng>(basis: &Arc<HermiteBasis>, rng: &mut R) -> SpectralState {
    let s = random_state(basis, rng);
    let m = s.mass();
    s.scaled(C64::new(1.0 / m, 0.0))
}

/// Uniform sample of the `H¹` sphere of the given radius in the `N`-mode
/// space (isotropic in the coordinates `sqrt(λ_k) α_k`).
pub fn uniform_sphere_state<R: Rng>(basis: &Arc<HermiteBasis>, radius: f64, rng: &mut R) -> SpectralState {
    let mut s = SpectralState::zeros(basis);
    let eig = basis.eigenvalues().clone();
    Zip::from(s.coeffs_mut()).and(&eig).for_each(|c, &l| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *c = C64::new(re, im) / l.sqrt();
    });
    let h1 = s.h1_norm();
    s.scaled(C64::new(radius / h1, 0.0))
}

/// Piecewise-constant control on `[0, horizon]` with `pieces` equal cells,
/// Gaussian values rescaled to `L^r` norm `norm`.
pub fn random_piecewise_control<R: Rng>(rng: &mut R, pieces: usize, horizon: f64, r: f64, norm: f64) -> ControlSignal {
    let values: Vec<f64> = (0..pieces).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let raw = ControlSignal::PiecewiseConstant {
        breakpoints: (0..=pieces).map(|i| horizon * i as f64 / pieces as f64).collect(),
        values,
    };
    let current = raw.lr_norm(r, horizon).expect("valid control");
    if current == 0.0 {
        raw
    } else {
        raw.scaled(norm / current)
    }
}

/// Largest per-step growth rate `|log(E_{j+1}/E_j)| / ∫_{t_j}^{t_{j+1}} |u|`
/// over the records: the smallest `c` with `E' ≤ c |u| E` on these runs.
pub fn fit_growth_constant(records: &[RunRecord]) -> f64 {
    records
        .iter()
        .flat_map(|r| {
            (0..r.times.len() - 1).filter_map(move |j| {
                let du = r.control_l1[j + 1] - r.control_l1[j];
                if du > 1e-14 {
                    Some((r.energy[j + 1] / r.energy[j]).ln().abs() / du)
                } else {
                    None
                }
            })
        })
        .fold(0.0, f64::max)
}

/// `log(E(T)/E(0)) - c ∫_0^T |u|`; nonpositive when the growth bound holds.
pub fn growth_bound_excess(record: &RunRecord, c: f64) -> f64 {
    let n = record.times.len() - 1;
    (record.energy[n] / record.energy[0]).ln() - c * record.control_l1[n]
}

/// `-2 Im⟨K_h ψ, Hψ⟩`: the rate `dE/dt` per unit control for the
/// collocation-discretized linear flow.
pub fn energy_rate_per_control(ops: &Operators, state: &SpectralState) -> f64 {
    -2.0 * ops.k_psi(state).inner(&state.apply_h()).im
}

/// Collocation matrix of `K` on the full `N^d`-mode space (real symmetric).
pub fn k_matrix(ops: &Operators) -> DMatrix<f64> {
    let basis = ops.basis();
    let m = basis.len();
    let mut out = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        let e = SpectralState::mode(basis, &basis.multi_index(j), C64::new(1.0, 0.0));
        let col = ops.k_psi(&e);
        for (i, c) in col.coeffs().iter().enumerate() {
            out[(i, j)] = c.re;
        }
    }
    out
}

/// Sharp constant `c*` in `|dE/dt| ≤ c* |u| E` for the collocation linear
/// flow: `2 ‖(H+1)^{-1/2} (HK - KH)/2 (H+1)^{-1/2}‖`.
pub fn sharp_growth_constant(ops: &Operators) -> f64 {
    let basis = ops.basis();
    let k = k_matrix(ops);
    let lam: Vec<f64> = basis.eigenvalues().iter().copied().collect();
    let m = lam.len();
    let b = DMatrix::from_fn(m, m, |i, j| {
        (lam[i] - lam[j]) * k[(i, j)] / ((lam[i] + 1.0) * (lam[j] + 1.0)).sqrt()
    });
    b.singular_values().max()
}

/// `‖K_h ψ‖_{L^q_T H¹} / ‖ψ‖_{X¹_T}` for each `q`.
pub fn kpsi_ratios(traj: &Trajectory, q_list: &[f64]) -> Vec<f64> {
    let ops = Operators::new(traj.basis());
    let kh1: Vec<f64> = traj.states.par_iter().map(|s| ops.k_psi(s).h1_norm()).collect();
    let x1 = x1t_norm(traj).total();
    q_list
        .iter()
        .map(|&q| lq_time_norm(&traj.times, &kh1, q) / x1)
        .collect()
}

/// Settings for the random trajectories behind [`kpsi_constant`].
#[derive(Debug, Clone, PartialEq)]
pub struct KpsiProbe {
    pub trajectories: usize,
    pub q_list: Vec<f64>,
    pub t_final: f64,
    pub dt: f64,
    pub seed: u64,
}

/// Largest [`kpsi_ratios`] value over random trajectories: unit-mass random
/// initial data, random 8-piece controls, `σ = 1`.
pub fn kpsi_constant(basis: &Arc<HermiteBasis>, probe: &KpsiProbe) -> Result<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(probe.seed);
    let jobs: Vec<(SpectralState, ControlSignal)> = (0..probe.trajectories)
        .map(|_| {
            let psi0 = random_unit_state(basis, &mut rng);
            let norm = rng.gen_range(0.1..2.0);
            let u = random_piecewise_control(&mut rng, 8, probe.t_final, 2.0, norm);
            (psi0, u)
        })
        .collect();
    let cfg = EvolutionConfig::strang(1, probe.dt, probe.t_final);
    let ratios = jobs
        .par_iter()
        .map(|(psi0, u)| {
            let traj = evolve(psi0, u, &cfg)?;
            Ok(kpsi_ratios(&traj, &probe.q_list).into_iter().fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Sampling parameters for [`reach_comparison`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReachSetup {
    pub n_samples: usize,
    /// Exponent of the control norm.
    pub r: f64,
    /// Bound on `‖u‖_{L^r}`.
    pub radius: f64,
    pub pieces: usize,
    /// Horizons are uniform in `(0, t_max]`.
    pub t_max: f64,
    pub eps_list: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct ReachComparison {
    pub samples: Vec<ReachSample>,
    /// Mean `H¹` norm of the terminal states; radius of the reference sphere.
    pub matched_radius: f64,
    pub reach_sizes: Vec<usize>,
    pub uniform_sizes: Vec<usize>,
}

impl ReachComparison {
    /// Number of `ε` values where the terminal-state net is strictly smaller.
    pub fn smaller_count(&self) -> usize {
        self.reach_sizes
            .iter()
            .zip(&self.uniform_sizes)
            .filter(|(a, b)| a < b)
            .count()
    }
}

/// Greedy nets of sampled terminal states against the same number of uniform
/// `H¹`-sphere states at the mean terminal radius.
pub fn reach_comparison(psi0: &SpectralState, setup: &ReachSetup, cfg: &EvolutionConfig) -> Result<ReachComparison> {
    if setup.n_samples == 0 {
        return Err(Error::config("n_samples", "must be at least 1"));
    }
    if setup.pieces == 0 {
        return Err(Error::config("pieces", "must be at least 1"));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(setup.seed);
    let pairs: Vec<(ControlSignal, f64)> = (0..setup.n_samples)
        .map(|_| {
            let horizon = setup.t_max * (1.0 - rng.gen::<f64>());
            let norm = setup.radius * rng.gen::<f64>();
            (
                random_piecewise_control(&mut rng, setup.pieces, horizon, setup.r, norm),
                horizon,
            )
        })
        .collect();
    let samples = reach_sample(psi0, &pairs, setup.r, cfg);
    let states: Vec<SpectralState> = samples.iter().filter_map(|s| s.state.clone()).collect();
    if states.is_empty() {
        return Err(Error::DegenerateState("every reach sample failed".into()));
    }
    let matched_radius = states.iter().map(SpectralState::h1_norm).sum::<f64>() / states.len() as f64;
    let uniform: Vec<SpectralState> = (0..states.len())
        .map(|_| uniform_sphere_state(psi0.basis(), matched_radius, &mut rng))
        .collect();
    let reach_sizes = covering_curve(&states, &setup.eps_list)?;
    let uniform_sizes = covering_curve(&uniform, &setup.eps_list)?;
    Ok(ReachComparison {
        samples,
        matched_radius,
        reach_sizes,
        uniform_sizes,
    })
}
