//! Qualitative motion from the spectrum of the coupling matrix, plus an
//! empirical period detector for sampled trajectories.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::cxla::CNum;
use crate::integrate::Trajectory;
use crate::model::{CouplingSpec, Vec2};

/// Largest integer multiple of the fundamental frequency accepted as rational.
pub const MAX_MULTIPLIER: i64 = 64;

const RELATIVE_TOL: f64 = 1e-9;
const ABSOLUTE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("insufficient span: {0}")]
    InsufficientSpan(String),
}

impl ClassifyError {
    pub fn code(&self) -> &'static str {
        "InsufficientSpan"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionClass {
    /// Every eigenvalue has negative real part.
    pub all_damped: bool,
    /// Some eigenvalue is purely imaginary and nonzero.
    pub has_imaginary: bool,
    pub all_imaginary: bool,
    /// Common period of every trajectory, when the frequencies are commensurate.
    pub completely_periodic: Option<f64>,
    pub has_zero_mode: bool,
    /// Whether the rows of the coupling matrix sum to zero. Unknown when only
    /// the spectrum was supplied.
    pub row_sums_zero: Option<bool>,
    pub has_unstable: bool,
}

impl MotionClass {
    /// Short human-readable summary.
    pub fn summary(&self) -> &'static str {
        if self.completely_periodic.is_some() {
            "completely periodic"
        } else if self.all_imaginary {
            "multiply periodic"
        } else if self.all_damped {
            "standstill"
        } else if self.has_unstable {
            "escaping"
        } else if self.has_zero_mode && !self.has_imaginary {
            "zero mode"
        } else {
            "mixed"
        }
    }
}

/// `1e-9 * max|a|`, floored at `1e-12`.
pub fn default_tolerance(eigs: &[CNum]) -> f64 {
    let scale = eigs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    (RELATIVE_TOL * scale).max(ABSOLUTE_TOL)
}

pub fn classify(eigs: &[CNum], tol: f64) -> MotionClass {
    let mut m = MotionClass::default();
    if eigs.is_empty() {
        return m;
    }
    let is_zero = |a: &CNum| a.norm() <= tol;
    let is_imag = |a: &CNum| a.re.abs() <= tol && a.norm() > tol;

    m.all_damped = eigs.iter().all(|a| a.re < -tol);
    m.has_unstable = eigs.iter().any(|a| a.re > tol);
    m.has_zero_mode = eigs.iter().any(is_zero);
    m.has_imaginary = eigs.iter().any(is_imag);
    m.all_imaginary = eigs.iter().all(is_imag);
    if m.all_imaginary {
        let scale = eigs.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let freqs: Vec<f64> = eigs.iter().map(|a| a.im).collect();
        m.completely_periodic = rational_period(&freqs, (tol / scale).max(ABSOLUTE_TOL));
    }
    m
}

/// Classifies the spectrum of `alpha` and records whether its rows sum to zero.
pub fn classify_couplings(c: &CouplingSpec, eigs: &[CNum], tol: f64) -> MotionClass {
    let mut m = classify(eigs, tol);
    let n = c.n();
    let zero_rows = (0..n).all(|j| {
        let s: CNum = (0..n).map(|k| CNum::new(c.beta(j, k), c.gamma(j, k))).sum();
        s.norm() <= tol
    });
    m.row_sums_zero = Some(zero_rows);
    m
}

/// Continued-fraction approximation `p/q` of `x` with `q <= max_den`, stopping
/// at the first convergent within `rel_tol` of `x`.
fn rationalize(x: f64, rel_tol: f64, max_den: i64) -> Option<(i64, i64)> {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a = a as i64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den {
            return None;
        }
        if (x - p2 as f64 / q2 as f64).abs() <= rel_tol * x.abs() {
            return Some((p2, q2));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a as f64;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Minimal common period `2 pi / w0` of the given nonzero frequencies, where
/// each frequency is an integer multiple of `w0` of magnitude at most 64.
pub fn rational_period(frequencies: &[f64], tol: f64) -> Option<f64> {
    if frequencies.is_empty() || frequencies.iter().any(|w| !w.is_finite() || *w == 0.0) {
        return None;
    }
    let reference = frequencies.iter().map(|w| w.abs()).fold(f64::INFINITY, f64::min);
    let fractions: Vec<(i64, i64)> = frequencies
        .iter()
        .map(|w| rationalize(w / reference, tol, MAX_MULTIPLIER))
        .collect::<Option<_>>()?;
    let lcm = fractions.iter().fold(1i64, |l, &(_, q)| l / gcd(l, q) * q);
    if lcm > MAX_MULTIPLIER {
        return None;
    }
    let multipliers: Vec<i64> = fractions.iter().map(|&(p, q)| p * (lcm / q)).collect();
    let common = multipliers.iter().fold(0i64, |g, &m| gcd(g, m));
    let multipliers: Vec<f64> = multipliers.iter().map(|&m| (m / common) as f64).collect();
    if multipliers.iter().any(|m| m.abs() > MAX_MULTIPLIER as f64) {
        return None;
    }
    // Least-squares fundamental over all frequencies.
    let num: f64 = multipliers.iter().zip(frequencies).map(|(m, w)| m * w).sum();
    let den: f64 = multipliers.iter().map(|m| m * m).sum();
    Some(TAU / (num / den))
}

/// Cubic Hermite interpolation of particle positions at time `t`.
fn position_at(traj: &Trajectory, t: f64) -> Vec<Vec2> {
    let times = &traj.times;
    let last = times.len() - 1;
    let i = match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => return traj.states[i].positions.clone(),
        Err(i) => i.clamp(1, last) - 1,
    };
    let (t0, t1) = (times[i], times[i + 1]);
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (h00, h10, h01, h11) = (
        (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
        s * (1.0 - s) * (1.0 - s),
        s * s * (3.0 - 2.0 * s),
        s * s * (s - 1.0),
    );
    let (a, b) = (&traj.states[i], &traj.states[i + 1]);
    (0..a.len())
        .map(|j| {
            a.positions[j] * h00
                + a.velocities[j] * (h10 * h)
                + b.positions[j] * h01
                + b.velocities[j] * (h11 * h)
        })
        .collect()
}

fn distance_sq(a: &[Vec2], b: &[Vec2]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (*p - *q).norm_sqr()).sum()
}

fn norm_sq(a: &[Vec2]) -> f64 {
    a.iter().map(|p| p.norm_sqr()).sum()
}

/// Mean over sample times `t` with `t + lag` in range of the relative distance
/// between positions at `t` and `t + lag`, and the mean squared distance.
fn lag_distance(traj: &Trajectory, lag: f64) -> (f64, f64) {
    let end = *traj.times.last().unwrap();
    let mut rel = 0.0;
    let mut sq = 0.0;
    let mut count = 0usize;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        if t + lag > end {
            break;
        }
        let shifted = position_at(traj, t + lag);
        let d = distance_sq(&s.positions, &shifted);
        let scale = norm_sq(&s.positions).max(f64::MIN_POSITIVE);
        rel += (d / scale).sqrt();
        sq += d / scale;
        count += 1;
    }
    if count == 0 {
        return (f64::INFINITY, f64::INFINITY);
    }
    (rel / count as f64, sq / count as f64)
}

/// Golden-section minimization of the mean squared lag distance on `[lo, hi]`.
fn refine(traj: &Trajectory, lo: f64, hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = lag_distance(traj, c).1;
    let mut fd = lag_distance(traj, d).1;
    for _ in 0..80 {
        if (b - a).abs() <= 1e-14 * b.abs() {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = lag_distance(traj, c).1;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = lag_distance(traj, d).1;
        }
    }
    (a + b) / 2.0
}

/// Smallest period `T` such that positions at `t` and `t + T` agree on
/// average to relative distance `tol`. `seed` is tried first when given.
/// Fixed points and non-recurrent trajectories yield `None`.
pub fn detect_period(
    traj: &Trajectory,
    tol: f64,
    seed: Option<f64>,
) -> Result<Option<f64>, ClassifyError> {
    if traj.len() < 3 || traj.states.len() != traj.len() {
        return Err(ClassifyError::InsufficientSpan(format!(
            "need at least 3 samples, got {}",
            traj.len()
        )));
    }
    let t0 = traj.times[0];
    let span = traj.times[traj.len() - 1] - t0;
    if !(span > 0.0) {
        return Err(ClassifyError::InsufficientSpan("time grid is not increasing".into()));
    }

    let first = &traj.states[0].positions;
    let scale = norm_sq(first).sqrt().max(f64::MIN_POSITIVE);
    let moving = traj
        .states
        .iter()
        .any(|s| distance_sq(&s.positions, first).sqrt() > tol * scale);
    if !moving {
        return Ok(None);
    }

    let dt = span / (traj.len() - 1) as f64;
    let accept = |lag: f64| -> Option<f64> {
        let t = refine(traj, (lag - dt).max(dt * 0.5), lag + dt);
        (t <= span / 2.0 * (1.0 + 1e-6) && lag_distance(traj, t).0 <= tol).then_some(t)
    };

    if let Some(t_seed) = seed {
        if !(t_seed > 0.0) || 2.0 * t_seed > span {
            return Err(ClassifyError::InsufficientSpan(format!(
                "span {span} is shorter than twice the candidate period {t_seed}"
            )));
        }
        if let Some(t) = accept(t_seed) {
            return Ok(Some(t));
        }
    }

    let max_lag = (traj.len() - 1) / 2;
    let d: Vec<f64> = (0..=max_lag + 1)
        .map(|k| lag_distance(traj, k as f64 * dt).1)
        .collect();
    for k in 1..=max_lag {
        let left = d[k - 1];
        let right = if k + 1 < d.len() { d[k + 1] } else { f64::INFINITY };
        if d[k] <= left && d[k] <= right {
            if let Some(t) = accept(k as f64 * dt) {
                return Ok(Some(t));
            }
        }
    }
    Ok(None)
}
