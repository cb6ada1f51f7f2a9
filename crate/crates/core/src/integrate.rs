//! Adaptive Dormand-Prince 5(4) integration of second-order planar systems.
//!
//! The state vector is laid out as `[x_1, y_1, ..., x_n, y_n, vx_1, vy_1, ...]`.
//! Output samples come from a quartic Hermite interpolant through the step
//! endpoints, their derivatives and a fourth-order midpoint estimate.

use thiserror::Error;

use crate::model::{ModelError, PlaneState, Vec2};

/// States whose largest component exceeds this are reported as escaping.
pub const OVERFLOW_MAGNITUDE: f64 = 1e150;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

// Dormand-Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
/// Weights of the fourth-order continuous extension at the step midpoint.
const B_MID: [f64; 7] = [
    6025192743.0 / 30085553152.0 / 2.0,
    0.0,
    51252292925.0 / 65400821598.0 / 2.0,
    -2691868925.0 / 45128329728.0 / 2.0,
    187940372067.0 / 1594534317056.0 / 2.0,
    -1776094331.0 / 19743644256.0 / 2.0,
    11237099.0 / 235043384.0 / 2.0,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("particle {particle} reached the origin singularity at t = {t}")]
    OriginCollision { t: f64, particle: usize },
    #[error("step size {h:.3e} fell below the minimum at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("state magnitude {magnitude:.3e} exceeded {OVERFLOW_MAGNITUDE:e} at t = {t}")]
    Overflow { t: f64, magnitude: f64 },
    #[error("trajectory grids differ: {0}")]
    GridMismatch(String),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(ModelError),
}

impl IntegrateError {
    pub fn code(&self) -> &'static str {
        match self {
            IntegrateError::OriginCollision { .. } => "OriginCollision",
            IntegrateError::StepUnderflow { .. } => "StepUnderflow",
            IntegrateError::Overflow { .. } => "Overflow",
            IntegrateError::GridMismatch(_) => "GridMismatch",
            IntegrateError::InvalidConfig(_) => "ValidationError",
            IntegrateError::Model(e) => e.code(),
        }
    }
}

/// A second-order planar force law, `r'' = F(t, r, r')`.
pub trait ForceField: Send + Sync {
    /// Number of particles in the states this field acts on.
    fn particle_count(&self) -> usize;

    fn accelerations(&self, t: f64, state: &PlaneState) -> Result<Vec<Vec2>, ModelError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub t0: f64,
    pub t1: f64,
    pub sample_count: usize,
}

impl IntegratorConfig {
    pub fn new(t0: f64, t1: f64, sample_count: usize) -> Self {
        Self {
            t0,
            t1,
            sample_count,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |msg: &str| Err(IntegrateError::InvalidConfig(msg.to_string()));
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        if !self.t0.is_finite() || !self.t1.is_finite() || self.t0 == self.t1 {
            return bad("t_span endpoints must be finite and distinct");
        }
        if !(self.h_min > 0.0) || !(self.h_min < self.h_init) {
            return bad("require 0 < h_min < h_init");
        }
        if self.sample_count < 2 {
            return bad("sample_count must be at least 2");
        }
        Ok(())
    }

    /// Equally spaced sample times from `t0` to `t1` inclusive.
    pub fn sample_times(&self) -> Vec<f64> {
        let m = self.sample_count - 1;
        (0..=m)
            .map(|i| {
                if i == m {
                    self.t1
                } else {
                    self.t0 + (self.t1 - self.t0) * (i as f64 / m as f64)
                }
            })
            .collect()
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-14,
            t0: 0.0,
            t1: 1.0,
            sample_count: 101,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Time-sampled states from either solution path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub variant: String,
    pub times: Vec<f64>,
    pub states: Vec<PlaneState>,
    pub stats: Option<StepStats>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&PlaneState> {
        self.states.last()
    }
}

fn pack(s: &PlaneState) -> Vec<f64> {
    s.positions
        .iter()
        .chain(&s.velocities)
        .flat_map(|v| [v.x, v.y])
        .collect()
}

fn unpack(y: &[f64]) -> PlaneState {
    let n = y.len() / 4;
    let vecs = |slice: &[f64]| -> Vec<Vec2> {
        slice.chunks_exact(2).map(|p| Vec2::new(p[0], p[1])).collect()
    };
    PlaneState {
        positions: vecs(&y[..2 * n]),
        velocities: vecs(&y[2 * n..]),
    }
}

struct FirstOrder<'a> {
    field: &'a dyn ForceField,
    evaluations: usize,
}

impl FirstOrder<'_> {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), ModelError> {
        self.evaluations += 1;
        let half = y.len() / 2;
        let acc = self.field.accelerations(t, &unpack(y))?;
        dy[..half].copy_from_slice(&y[half..]);
        for (j, a) in acc.iter().enumerate() {
            dy[half + 2 * j] = a.x;
            dy[half + 2 * j + 1] = a.y;
        }
        Ok(())
    }
}

fn collision(t: f64, e: ModelError) -> IntegrateError {
    match e {
        ModelError::OriginState { particle, .. } | ModelError::PairCollision { particle, .. } => {
            IntegrateError::OriginCollision { t, particle }
        }
        other => IntegrateError::Model(other),
    }
}

/// Quartic through `y0`, `y_mid`, `y1` with end slopes `h f0`, `h f1`,
/// evaluated at `theta` in `[0, 1]`.
fn quartic_hermite(y0: f64, y_mid: f64, y1: f64, hf0: f64, hf1: f64, theta: f64) -> f64 {
    let a = 2.0 * (hf1 - hf0) - 8.0 * (y1 + y0) + 16.0 * y_mid;
    let b = 5.0 * hf0 - 3.0 * hf1 + 18.0 * y0 + 14.0 * y1 - 32.0 * y_mid;
    let c = hf1 - 4.0 * hf0 - 11.0 * y0 - 5.0 * y1 + 16.0 * y_mid;
    (((a * theta + b) * theta + c) * theta + hf0) * theta + y0
}

/// Integrates `field` from `s0` over `cfg`'s time span.
pub fn integrate(
    field: &dyn ForceField,
    s0: &PlaneState,
    cfg: &IntegratorConfig,
    variant: &str,
) -> Result<Trajectory, IntegrateError> {
    cfg.validate()?;
    if s0.len() != field.particle_count() {
        return Err(IntegrateError::InvalidConfig(format!(
            "initial state has {} particles, model expects {}",
            s0.len(),
            field.particle_count()
        )));
    }

    let dim = 4 * s0.len();
    let mut sys = FirstOrder {
        field,
        evaluations: 0,
    };
    let sample_times = cfg.sample_times();
    let mut states = Vec::with_capacity(sample_times.len());
    let mut stats = StepStats::default();

    let dir = (cfg.t1 - cfg.t0).signum();
    let mut t = cfg.t0;
    let mut y = pack(s0);
    let mut k = vec![vec![0.0; dim]; 7];
    sys.eval(t, &y, &mut k[0]).map_err(|e| collision(t, e))?;
    states.push(s0.clone());
    let mut next_sample = 1;

    let mut h = cfg.h_init.min((cfg.t1 - cfg.t0).abs());
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut last_rejected = false;

    while dir * (cfg.t1 - t) > 0.0 {
        if h < cfg.h_min {
            return Err(IntegrateError::StepUnderflow { t, h });
        }
        let remaining = (cfg.t1 - t).abs();
        let final_step = h >= remaining;
        let h_step = if final_step { remaining } else { h };
        let hs = dir * h_step;

        let mut stage_failed = false;
        for s in 1..7 {
            for i in 0..dim {
                let incr: f64 = (0..s).map(|r| A[s][r] * k[r][i]).sum();
                stage[i] = y[i] + hs * incr;
            }
            let ts = if s == 6 && final_step { cfg.t1 } else { t + C[s] * hs };
            if sys.eval(ts, &stage, &mut k[s]).is_err() {
                stage_failed = true;
                break;
            }
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
        }

        let err = if stage_failed {
            f64::INFINITY
        } else {
            let mut acc = 0.0;
            for i in 0..dim {
                let e: f64 = (0..7).map(|r| (B5[r] - B4[r]) * k[r][i]).sum::<f64>() * hs;
                let sc = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
                acc += (e / sc).powi(2);
            }
            (acc / dim as f64).sqrt()
        };

        if err.is_finite() && err <= 1.0 {
            let t_new = if final_step { cfg.t1 } else { t + hs };
            while next_sample < sample_times.len() {
                let ts = sample_times[next_sample];
                if dir * (ts - t_new) > 0.0 {
                    break;
                }
                if ts == t_new {
                    states.push(unpack(&y_new));
                } else {
                    let theta = (ts - t) / hs;
                    let sample: Vec<f64> = (0..dim)
                        .map(|i| {
                            let mid: f64 = y[i] + hs * (0..7).map(|r| B_MID[r] * k[r][i]).sum::<f64>();
                            quartic_hermite(y[i], mid, y_new[i], hs * k[0][i], hs * k[6][i], theta)
                        })
                        .collect();
                    states.push(unpack(&sample));
                }
                next_sample += 1;
            }

            t = t_new;
            y.copy_from_slice(&y_new);
            let first = k[6].clone();
            k[0] = first;
            stats.accepted += 1;

            let magnitude = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(magnitude <= OVERFLOW_MAGNITUDE) {
                return Err(IntegrateError::Overflow { t, magnitude });
            }

            let mut factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if last_rejected {
                factor = factor.min(1.0);
            }
            last_rejected = false;
            h = h_step * factor;
        } else {
            if stage_failed && h_step <= cfg.h_min * 1.0000001 {
                let probe = unpack(&stage);
                let e = field
                    .accelerations(t + hs, &probe)
                    .err()
                    .unwrap_or(ModelError::OriginState {
                        particle: 0,
                        radius: 0.0,
                    });
                return Err(collision(t, e));
            }
            stats.rejected += 1;
            last_rejected = true;
            let factor = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            } else {
                MIN_FACTOR
            };
            h = h_step * factor;
        }
    }

    stats.evaluations = sys.evaluations;
    Ok(Trajectory {
        variant: variant.to_string(),
        times: sample_times,
        states,
        stats: Some(stats),
    })
}

/// Largest deviations of one particle between two trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParticleDeviation {
    pub max_position_abs: f64,
    pub max_position_rel: f64,
    pub max_velocity_abs: f64,
    pub max_velocity_rel: f64,
    pub time_of_max_position: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonReport {
    pub particles: Vec<ParticleDeviation>,
    pub max_position_abs: f64,
    pub max_position_rel: f64,
    pub max_velocity_abs: f64,
    pub max_velocity_rel: f64,
    pub time_of_max_position: f64,
}

/// Deviations of `numeric` from `exact`. Relative values are scaled by the
/// largest magnitude the exact trajectory reaches for that particle.
pub fn compare(exact: &Trajectory, numeric: &Trajectory) -> Result<ComparisonReport, IntegrateError> {
    if exact.len() != numeric.len() {
        return Err(IntegrateError::GridMismatch(format!(
            "{} samples vs {}",
            exact.len(),
            numeric.len()
        )));
    }
    for (i, (a, b)) in exact.times.iter().zip(&numeric.times).enumerate() {
        if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
            return Err(IntegrateError::GridMismatch(format!(
                "sample {i}: t = {a} vs {b}"
            )));
        }
    }
    let n = exact.states.first().map_or(0, PlaneState::len);
    if numeric.states.iter().chain(&exact.states).any(|s| s.len() != n) {
        return Err(IntegrateError::GridMismatch("particle counts differ".into()));
    }

    let mut report = ComparisonReport::default();
    for j in 0..n {
        let pos_scale = exact.states.iter().map(|s| s.positions[j].norm()).fold(0.0, f64::max);
        let vel_scale = exact.states.iter().map(|s| s.velocities[j].norm()).fold(0.0, f64::max);
        let mut dev = ParticleDeviation::default();
        for (i, (a, b)) in exact.states.iter().zip(&numeric.states).enumerate() {
            let dp = (a.positions[j] - b.positions[j]).norm();
            let dv = (a.velocities[j] - b.velocities[j]).norm();
            if dp > dev.max_position_abs {
                dev.max_position_abs = dp;
                dev.time_of_max_position = exact.times[i];
            }
            dev.max_velocity_abs = dev.max_velocity_abs.max(dv);
        }
        dev.max_position_rel = relative(dev.max_position_abs, pos_scale);
        dev.max_velocity_rel = relative(dev.max_velocity_abs, vel_scale);

        if dev.max_position_abs > report.max_position_abs || j == 0 {
            report.max_position_abs = dev.max_position_abs;
            report.time_of_max_position = dev.time_of_max_position;
        }
        report.max_position_rel = report.max_position_rel.max(dev.max_position_rel);
        report.max_velocity_abs = report.max_velocity_abs.max(dev.max_velocity_abs);
        report.max_velocity_rel = report.max_velocity_rel.max(dev.max_velocity_rel);
        report.particles.push(dev);
    }
    Ok(report)
}

fn relative(abs: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        abs / scale
    } else {
        abs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{rhs_base, CouplingSpec};
    use std::f64::consts::TAU;

    struct Free;

    impl ForceField for Free {
        fn particle_count(&self) -> usize {
            1
        }
        fn accelerations(&self, _t: f64, s: &PlaneState) -> Result<Vec<Vec2>, ModelError> {
            rhs_base(&CouplingSpec::zeros(1), s)
        }
    }

    /// r'' = -r, a harmonic oscillator with no singularity.
    struct Spring;

    impl ForceField for Spring {
        fn particle_count(&self) -> usize {
            1
        }
        fn accelerations(&self, _t: f64, s: &PlaneState) -> Result<Vec<Vec2>, ModelError> {
            Ok(s.positions.iter().map(|&r| -r).collect())
        }
    }

    #[test]
    fn tableau_is_consistent() {
        for s in 0..7 {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-15, "row {s}");
        }
        assert!((B5.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((B4.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((B_MID.iter().sum::<f64>() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn quartic_hermite_reproduces_quartics() {
        let p = |x: f64| 3.0 * x.powi(4) - 2.0 * x.powi(3) + 0.5 * x * x - x + 7.0;
        let dp = |x: f64| 12.0 * x.powi(3) - 6.0 * x * x + x - 1.0;
        let h = 0.8;
        let t0 = 0.3;
        for theta in [0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
            let v = quartic_hermite(p(t0), p(t0 + h / 2.0), p(t0 + h), h * dp(t0), h * dp(t0 + h), theta);
            assert!((v - p(t0 + theta * h)).abs() < 1e-12);
        }
    }

    #[test]
    fn circular_orbit_closes() {
        let s0 = PlaneState::from_rows(&[[1.0, 0.0, 0.0, 1.0]]);
        let cfg = IntegratorConfig::new(0.0, TAU, 201);
        let traj = integrate(&Free, &s0, &cfg, "base").unwrap();
        let end = traj.last().unwrap().positions[0];
        assert!((end - Vec2::new(1.0, 0.0)).norm() <= 1e-8);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let exact = Vec2::new(t.cos(), t.sin());
            assert!((s.positions[0] - exact).norm() <= 1e-8, "t = {t}");
        }
        assert_eq!(traj.times.len(), 201);
        assert_eq!(traj.times[200], TAU);
    }

    #[test]
    fn backward_integration() {
        let s0 = PlaneState::from_rows(&[[1.0, 0.0, 0.0, 1.0]]);
        let cfg = IntegratorConfig::new(0.0, -1.0, 11);
        let traj = integrate(&Spring, &s0, &cfg, "spring").unwrap();
        let end = traj.last().unwrap().positions[0];
        assert!((end - Vec2::new((-1f64).cos(), (-1f64).sin())).norm() < 1e-9);
    }

    #[test]
    fn origin_state_is_rejected_up_front() {
        let s0 = PlaneState::from_rows(&[[0.0, 0.0, 1.0, 0.0]]);
        let err = integrate(&Free, &s0, &IntegratorConfig::default(), "base").unwrap_err();
        assert!(matches!(err, IntegrateError::OriginCollision { t, particle: 0 } if t == 0.0));
    }

    #[test]
    fn escape_reports_overflow() {
        // Radial escape z = exp(e^t - 1) under beta = 1 grows past 1e150 near t = 5.9.
        struct Escape;
        impl ForceField for Escape {
            fn particle_count(&self) -> usize {
                1
            }
            fn accelerations(&self, _t: f64, s: &PlaneState) -> Result<Vec<Vec2>, ModelError> {
                rhs_base(&CouplingSpec::new(vec![vec![1.0]], vec![vec![0.0]]).unwrap(), s)
            }
        }
        let s0 = PlaneState::from_rows(&[[1.0, 0.0, 1.0, 0.0]]);
        let err = integrate(&Escape, &s0, &IntegratorConfig::new(0.0, 10.0, 11), "base").unwrap_err();
        match err {
            IntegrateError::Overflow { t, .. } => assert!(t > 5.0 && t < 7.0, "t = {t}"),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn step_underflow() {
        let s0 = PlaneState::from_rows(&[[1.0, 0.0, 0.0, 1.0]]);
        let cfg = IntegratorConfig {
            rtol: 1e-30,
            atol: 1e-300,
            ..IntegratorConfig::new(0.0, 1.0, 3)
        };
        let err = integrate(&Spring, &s0, &cfg, "spring").unwrap_err();
        assert_eq!(err.code(), "StepUnderflow");
    }

    #[test]
    fn config_validation() {
        let bad = [
            IntegratorConfig { rtol: 0.0, ..Default::default() },
            IntegratorConfig { t1: 0.0, ..Default::default() },
            IntegratorConfig { h_min: 1.0, ..Default::default() },
            IntegratorConfig { sample_count: 1, ..Default::default() },
        ];
        for cfg in bad {
            assert_eq!(cfg.validate().unwrap_err().code(), "ValidationError");
        }
    }

    #[test]
    fn compare_with_self_is_zero() {
        let s0 = PlaneState::from_rows(&[[1.0, 0.0, 0.0, 1.0]]);
        let traj = integrate(&Spring, &s0, &IntegratorConfig::new(0.0, 1.0, 5), "spring").unwrap();
        let r = compare(&traj, &traj).unwrap();
        assert_eq!(r.max_position_abs, 0.0);
        assert_eq!(r.max_velocity_rel, 0.0);
        assert_eq!(r.particles.len(), 1);
    }

    #[test]
    fn compare_rejects_grid_mismatch() {
        let s0 = PlaneState::from_rows(&[[1.0, 0.0, 0.0, 1.0]]);
        let a = integrate(&Spring, &s0, &IntegratorConfig::new(0.0, 1.0, 5), "spring").unwrap();
        let b = integrate(&Spring, &s0, &IntegratorConfig::new(0.0, 1.0, 6), "spring").unwrap();
        assert_eq!(compare(&a, &b).unwrap_err().code(), "GridMismatch");
        let c = integrate(&Spring, &s0, &IntegratorConfig::new(0.0, 2.0, 5), "spring").unwrap();
        assert_eq!(compare(&a, &c).unwrap_err().code(), "GridMismatch");
    }
}
