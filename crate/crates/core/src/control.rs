//! Scalar control signals `u(t)`.

use crate::error::{Error, Result};
use crate::quadrature::adaptive_gk;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A control signal. Piecewise-constant signals live on
/// `[breakpoints[0], breakpoints[last]]`; the other kinds on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlSignal {
    /// `values[i]` on `[breakpoints[i], breakpoints[i+1])`, right-continuous;
    /// the last value also holds at the final breakpoint.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// `amplitude · sin(2π frequency t + phase)`.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    Sum {
        terms: Vec<ControlSignal>,
    },
    Zero,
}

impl ControlSignal {
    pub fn zero() -> Self {
        ControlSignal::Zero
    }

    pub fn constant(value: f64, horizon: f64) -> Self {
        ControlSignal::PiecewiseConstant {
            breakpoints: vec![0.0, horizon],
            values: vec![value],
        }
    }

    pub fn sin(amplitude: f64, frequency: f64) -> Self {
        ControlSignal::Sinusoid {
            amplitude,
            frequency,
            phase: 0.0,
        }
    }

    /// Checks structural invariants (sorted breakpoints, finite values).
    pub fn validate(&self) -> Result<()> {
        match self {
            ControlSignal::PiecewiseConstant { breakpoints, values } => {
                if breakpoints.len() < 2 || values.len() + 1 != breakpoints.len() {
                    return Err(Error::InvalidControl(format!(
                        "{} breakpoints need {} values, got {}",
                        breakpoints.len(),
                        breakpoints.len().saturating_sub(1),
                        values.len()
                    )));
                }
                if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidControl("breakpoints must be strictly increasing".into()));
                }
                if breakpoints.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidControl("non-finite breakpoint or value".into()));
                }
                Ok(())
            }
            ControlSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => {
                if [amplitude, frequency, phase].iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidControl("non-finite sinusoid parameter".into()))
                }
            }
            ControlSignal::Sum { terms } => terms.iter().try_for_each(|t| t.validate()),
            ControlSignal::Zero => Ok(()),
        }
    }

    /// Interval on which the signal is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            ControlSignal::PiecewiseConstant { breakpoints, .. } => {
                (breakpoints[0], *breakpoints.last().expect("validated"))
            }
            ControlSignal::Sum { terms } => terms.iter().fold((0.0, f64::INFINITY), |(a, b), t| {
                let (c, d) = t.domain();
                (a.max(c), b.min(d))
            }),
            _ => (0.0, f64::INFINITY),
        }
    }

    fn check_interval(&self, a: f64, b: f64) -> Result<()> {
        let (start, end) = self.domain();
        let tol = 1e-12 * end.abs().clamp(1.0, 1e12);
        for t in [a, b] {
            if !(t >= start - tol && t <= end + tol) {
                return Err(Error::ControlDomain { t, start, end });
            }
        }
        Ok(())
    }

    /// `u(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_interval(t, t)?;
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        match self {
            ControlSignal::PiecewiseConstant { breakpoints, values } => {
                let i = breakpoints.partition_point(|&b| b <= t);
                values[i.saturating_sub(1).min(values.len() - 1)]
            }
            ControlSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => amplitude * (2.0 * PI * frequency * t + phase).sin(),
            ControlSignal::Sum { terms } => terms.iter().map(|c| c.eval_unchecked(t)).sum(),
            ControlSignal::Zero => 0.0,
        }
    }

    /// Exact `∫_a^b u`.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        self.check_interval(a, b)?;
        Ok(self.integral_unchecked(a, b))
    }

    fn integral_unchecked(&self, a: f64, b: f64) -> f64 {
        match self {
            ControlSignal::PiecewiseConstant { breakpoints, values } => {
                let mut acc = 0.0;
                for (i, v) in values.iter().enumerate() {
                    let lo = breakpoints[i].max(a);
                    let hi = breakpoints[i + 1].min(b);
                    if hi > lo {
                        acc += v * (hi - lo);
                    }
                }
                acc
            }
            ControlSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => {
                if *frequency == 0.0 {
                    amplitude * phase.sin() * (b - a)
                } else {
                    let w = 2.0 * PI * frequency;
                    amplitude * ((w * a + phase).cos() - (w * b + phase).cos()) / w
                }
            }
            ControlSignal::Sum { terms } => terms.iter().map(|c| c.integral_unchecked(a, b)).sum(),
            ControlSignal::Zero => 0.0,
        }
    }

    /// Average of `u` over `[t, t + dt]`.
    pub fn cell_average(&self, t: f64, dt: f64) -> Result<f64> {
        Ok(self.integral(t, t + dt)? / dt)
    }

    /// `(∫_0^horizon |u|^r)^{1/r}`, closed form where available.
    pub fn lr_norm(&self, r: f64, horizon: f64) -> Result<f64> {
        if !(r >= 1.0) || !r.is_finite() {
            return Err(Error::InvalidControl(format!("exponent r = {r} must be in [1, ∞)")));
        }
        if horizon == 0.0 {
            return Ok(0.0);
        }
        self.check_interval(0.0, horizon)?;
        match self {
            ControlSignal::Zero => Ok(0.0),
            ControlSignal::PiecewiseConstant { breakpoints, values } => {
                let mut acc = 0.0;
                for (i, v) in values.iter().enumerate() {
                    let lo = breakpoints[i].max(0.0);
                    let hi = breakpoints[i + 1].min(horizon);
                    if hi > lo {
                        acc += v.abs().powf(r) * (hi - lo);
                    }
                }
                Ok(acc.powf(1.0 / r))
            }
            ControlSignal::Sinusoid {
                amplitude, frequency, ..
            } if r == 2.0 && (frequency * horizon).fract() == 0.0 && *frequency != 0.0 => {
                // whole periods: mean of sin² is 1/2
                Ok(amplitude.abs() * (horizon / 2.0).sqrt())
            }
            _ => Ok(self.lr_norm_quadrature(r, horizon)),
        }
    }

    fn lr_norm_quadrature(&self, r: f64, horizon: f64) -> f64 {
        let f = |t: f64| self.eval_unchecked(t).abs().powf(r);
        // panels at kinks keep the adaptive rule on smooth pieces
        let mut cuts = vec![0.0, horizon];
        self.collect_breakpoints(&mut cuts, horizon);
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        cuts.dedup();
        let total: f64 = cuts
            .windows(2)
            .map(|w| adaptive_gk(&f, w[0], w[1], 1e-12, 1e-300))
            .sum();
        total.powf(1.0 / r)
    }

    fn collect_breakpoints(&self, out: &mut Vec<f64>, horizon: f64) {
        match self {
            ControlSignal::PiecewiseConstant { breakpoints, .. } => {
                out.extend(breakpoints.iter().filter(|&&b| b > 0.0 && b < horizon))
            }
            ControlSignal::Sinusoid { frequency, .. } if *frequency != 0.0 => {
                // half periods bound the zero crossings of |u|^r
                let half = 0.5 / frequency.abs();
                let count = (horizon / half).ceil() as usize;
                if count <= 100_000 {
                    out.extend((1..count).map(|k| k as f64 * half));
                }
            }
            ControlSignal::Sum { terms } => terms.iter().for_each(|t| t.collect_breakpoints(out, horizon)),
            _ => {}
        }
    }

    /// `c · u`.
    pub fn scaled(&self, c: f64) -> ControlSignal {
        match self {
            ControlSignal::PiecewiseConstant { breakpoints, values } => ControlSignal::PiecewiseConstant {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|v| c * v).collect(),
            },
            ControlSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => ControlSignal::Sinusoid {
                amplitude: c * amplitude,
                frequency: *frequency,
                phase: *phase,
            },
            ControlSignal::Sum { terms } => ControlSignal::Sum {
                terms: terms.iter().map(|t| t.scaled(c)).collect(),
            },
            ControlSignal::Zero => ControlSignal::Zero,
        }
    }
}

/// `u_n = base + sin(2π n t)`: converges weakly to `base` but not strongly.
pub fn weak_family(base: &ControlSignal, n: u32) -> ControlSignal {
    ControlSignal::Sum {
        terms: vec![base.clone(), ControlSignal::sin(1.0, n as f64)],
    }
}

/// `∫_a^b (u(t) - v(t)) φ(t) dt` by adaptive quadrature on smooth pieces.
pub fn weak_pairing<F: Fn(f64) -> f64>(u: &ControlSignal, v: &ControlSignal, phi: F, a: f64, b: f64) -> f64 {
    let g = |t: f64| (u.eval_unchecked(t) - v.eval_unchecked(t)) * phi(t);
    let mut cuts = vec![a, b];
    u.collect_breakpoints(&mut cuts, b);
    v.collect_breakpoints(&mut cuts, b);
    cuts.retain(|&c| c >= a && c <= b);
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    cuts.dedup();
    cuts.windows(2).map(|w| adaptive_gk(&g, w[0], w[1], 1e-12, 1e-15)).sum()
}
