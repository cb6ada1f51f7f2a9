//! Closed-form trajectories.
//!
//! With `f_j = z'_j / z_j` the equations of motion become `f' = A f`, so
//! `f_j(t) = sum_k phi_j^(k) e^{a_k t}` over the eigenpairs of `A`, and
//! integrating once more gives
//!
//! ```text
//! z_j(t) = z_j(0) exp( sum_k phi_j^(k) t phi1(a_k t) ),   phi1(x) = (e^x - 1) / x.
//! ```
//!
//! The coefficient vectors `phi^(k)` are the eigenvectors of `A` scaled so
//! that `sum_k phi_j^(k) = z'_j(0) / z_j(0)`.

use thiserror::Error;

use crate::cxla::{
    eig_unchecked, null_space, solve_linear, vec_norm, CMatrix, CNum, LinalgError,
    DEFAULT_EIG_TOL, DEFECTIVE_CONDITION,
};
use crate::model::{
    alpha_matrix, from_complex, to_complex, ComplexState, CouplingSpec, GeneralizedParams,
    ModelError, PairSpec, PairState, PlaneState, Vec2,
};

/// Below this magnitude `phi1` switches to its Taylor series.
pub const PHI1_SERIES_RADIUS: f64 = 1e-4;

/// Exponents with real part beyond this are reported as overflow.
pub const EXPONENT_LIMIT: f64 = 700.0;

/// Eigenvalues closer than this (relative to `||A||_F`) are merged when
/// recovering eigenspaces of a defective matrix.
const CLUSTER_RATIO: f64 = 1e-5;

/// Rank threshold of the eigenspace null-space computation.
const NULL_SPACE_RATIO: f64 = 1e-7;

/// Relative residual accepted for eigenvectors and for the initial-data fit
/// on the eigenspace fallback path.
const EIGENSPACE_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("exponent real part {exponent:.3e} out of range at t = {t}")]
    Overflow { t: f64, exponent: f64 },
}

impl ExactError {
    pub fn code(&self) -> &'static str {
        match self {
            ExactError::Model(e) => e.code(),
            ExactError::Linalg(e) => e.code(),
            ExactError::Overflow { .. } => "Overflow",
        }
    }
}

const ZERO: CNum = CNum::new(0.0, 0.0);
const ONE: CNum = CNum::new(1.0, 0.0);

/// `e^x - 1` without cancellation for small `x`.
fn expm1(x: CNum) -> CNum {
    let (sin, cos) = x.im.sin_cos();
    let half_sin = (0.5 * x.im).sin();
    CNum::new(
        x.re.exp_m1() * cos - 2.0 * half_sin * half_sin,
        x.re.exp() * sin,
    )
}

/// `(e^x - 1) / x`, continued by its limit `1` at `x = 0`.
pub fn phi1(x: CNum) -> CNum {
    if x.norm() < PHI1_SERIES_RADIUS {
        // 1 + x/2 + x^2/6 + x^3/24 + x^4/120, Horner form.
        ONE + x * (CNum::new(0.5, 0.0)
            + x * (CNum::new(1.0 / 6.0, 0.0)
                + x * (CNum::new(1.0 / 24.0, 0.0) + x * CNum::new(1.0 / 120.0, 0.0))))
    } else {
        expm1(x) / x
    }
}

/// One spectral component: eigenvalue `a_k` and scaled eigenvector `phi^(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub eigenvalue: CNum,
    pub coefficients: Vec<CNum>,
}

/// Everything needed to evaluate the closed form at any time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSolution {
    pub modes: Vec<Mode>,
    pub z0: Vec<CNum>,
}

impl SpectralSolution {
    pub fn n(&self) -> usize {
        self.z0.len()
    }

    pub fn eigenvalues(&self) -> Vec<CNum> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    /// `sum_k phi_j^(k)`, which equals `z'_j(0) / z_j(0)`.
    pub fn initial_ratios(&self) -> Vec<CNum> {
        (0..self.n())
            .map(|j| self.modes.iter().map(|m| m.coefficients[j]).sum())
            .collect()
    }

    /// Positions and logarithmic derivatives at complex time `tau`.
    fn evaluate(&self, tau: CNum, t: f64) -> Result<(Vec<CNum>, Vec<CNum>), ExactError> {
        let n = self.n();
        let mut exponent = vec![ZERO; n];
        let mut f = vec![ZERO; n];
        for mode in &self.modes {
            let x = mode.eigenvalue * tau;
            if x.re > EXPONENT_LIMIT {
                return Err(ExactError::Overflow { t, exponent: x.re });
            }
            let growth = x.exp();
            let integral = tau * phi1(x);
            for j in 0..n {
                exponent[j] += mode.coefficients[j] * integral;
                f[j] += mode.coefficients[j] * growth;
            }
        }
        let mut z = Vec::with_capacity(n);
        for (j, e) in exponent.iter().enumerate() {
            if e.re.abs() > EXPONENT_LIMIT {
                return Err(ExactError::Overflow { t, exponent: e.re });
            }
            z.push(self.z0[j] * e.exp());
        }
        Ok((z, f))
    }
}

/// Builds the spectral representation of the solution through `initial`.
pub fn spectral_solve(
    c: &CouplingSpec,
    initial: &ComplexState,
) -> Result<SpectralSolution, ExactError> {
    initial.check_origin()?;
    let f0: Vec<CNum> = initial
        .zdot
        .iter()
        .zip(&initial.z)
        .map(|(zd, z)| zd / z)
        .collect();
    let a = alpha_matrix(c);
    let decomposition = eig_unchecked(&a, DEFAULT_EIG_TOL)?;

    let modes = if decomposition.condition_estimate <= DEFECTIVE_CONDITION {
        let weights = solve_linear(&decomposition.eigenvectors, &f0)?;
        decomposition
            .eigenvalues
            .iter()
            .zip(&weights)
            .enumerate()
            .map(|(k, (&eigenvalue, &w))| Mode {
                eigenvalue,
                coefficients: decomposition.eigenvectors.column(k).iter().map(|v| v * w).collect(),
            })
            .collect()
    } else {
        eigenspace_modes(&a, &decomposition.eigenvalues, &f0).ok_or(LinalgError::DefectiveMatrix {
            condition: decomposition.condition_estimate,
            limit: DEFECTIVE_CONDITION,
        })?
    };

    Ok(SpectralSolution {
        modes,
        z0: initial.z.clone(),
    })
}

/// For a non-diagonalizable `A` the closed form still holds whenever the
/// initial ratios lie in the span of genuine eigenvectors. Recovers each
/// eigenspace as the null space of `A - a I` for the mean `a` of an
/// eigenvalue cluster, and expands `f0` in that basis. Returns `None` when
/// `f0` excites a Jordan chain.
fn eigenspace_modes(a: &CMatrix, eigenvalues: &[CNum], f0: &[CNum]) -> Option<Vec<Mode>> {
    let n = a.n();
    let scale = a.frobenius_norm();
    let radius = CLUSTER_RATIO * scale.max(f64::MIN_POSITIVE);

    let mut clusters: Vec<Vec<CNum>> = Vec::new();
    for &ev in eigenvalues {
        match clusters.iter_mut().find(|c| (c[0] - ev).norm() <= radius) {
            Some(cluster) => cluster.push(ev),
            None => clusters.push(vec![ev]),
        }
    }

    let mut basis: Vec<(CNum, Vec<CNum>)> = Vec::new();
    for cluster in &clusters {
        let mean = cluster.iter().sum::<CNum>() / cluster.len() as f64;
        let shifted = CMatrix::from_fn(n, |i, j| if i == j { a[(i, j)] - mean } else { a[(i, j)] });
        for v in null_space(&shifted, NULL_SPACE_RATIO) {
            let r: Vec<CNum> = a.mul_vec(&v).iter().zip(&v).map(|(x, y)| x - mean * y).collect();
            if vec_norm(&r) <= EIGENSPACE_RESIDUAL * scale {
                basis.push((mean, v));
            }
        }
    }
    if basis.is_empty() {
        return None;
    }

    // Least squares through the normal equations; the basis is small and
    // well conditioned within each eigenspace.
    let m = basis.len();
    let gram = CMatrix::from_fn(m, |p, q| {
        basis[p].1.iter().zip(&basis[q].1).map(|(x, y)| x.conj() * y).sum()
    });
    let rhs: Vec<CNum> = basis
        .iter()
        .map(|(_, v)| v.iter().zip(f0).map(|(x, y)| x.conj() * y).sum())
        .collect();
    let weights = solve_linear(&gram, &rhs).ok()?;

    let fitted: Vec<CNum> = (0..n)
        .map(|j| basis.iter().zip(&weights).map(|((_, v), w)| v[j] * w).sum())
        .collect();
    let misfit: Vec<CNum> = fitted.iter().zip(f0).map(|(x, y)| x - y).collect();
    if vec_norm(&misfit) > EIGENSPACE_RESIDUAL * vec_norm(f0).max(f64::MIN_POSITIVE) {
        return None;
    }

    Some(
        basis
            .into_iter()
            .zip(weights)
            .map(|((eigenvalue, v), w)| Mode {
                eigenvalue,
                coefficients: v.iter().map(|x| x * w).collect(),
            })
            .collect(),
    )
}

/// Logarithmic derivatives `f_j(t) = sum_k phi_j^(k) e^{a_k t}`.
pub fn eval_f(sol: &SpectralSolution, t: f64) -> Vec<CNum> {
    let mut f = vec![ZERO; sol.n()];
    for mode in &sol.modes {
        let growth = (mode.eigenvalue * t).exp();
        for (fj, phi) in f.iter_mut().zip(&mode.coefficients) {
            *fj += phi * growth;
        }
    }
    f
}

/// Positions and velocities of the base model at time `t`.
pub fn eval_z(sol: &SpectralSolution, t: f64) -> Result<ComplexState, ExactError> {
    let (z, f) = sol.evaluate(CNum::new(t, 0.0), t)?;
    let zdot = f.iter().zip(&z).map(|(f, z)| f * z).collect();
    Ok(ComplexState { z, zdot })
}

/// Complex time `tau(t) = (e^{(lambda + i omega) t} - 1) / (lambda + i omega)`.
pub fn tau_map(g: GeneralizedParams, t: f64) -> CNum {
    t * phi1(g.rate() * t)
}

/// State of the generalized model at time `t`: the base solution evaluated
/// at the complex time `tau(t)`, with velocities from the chain rule.
pub fn eval_generalized(
    sol: &SpectralSolution,
    g: GeneralizedParams,
    t: f64,
) -> Result<ComplexState, ExactError> {
    let rate_t = g.rate() * t;
    if rate_t.re > EXPONENT_LIMIT {
        return Err(ExactError::Overflow { t, exponent: rate_t.re });
    }
    let tau = tau_map(g, t);
    let tau_dot = rate_t.exp();
    let (z, f) = sol.evaluate(tau, t)?;
    let zdot = f.iter().zip(&z).map(|(f, z)| f * z * tau_dot).collect();
    Ok(ComplexState { z, zdot })
}

/// Free solution of `Z'' = mu Z'` for each center coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSolution {
    pub z0: Vec<CNum>,
    pub zdot0: Vec<CNum>,
    pub mu: Vec<CNum>,
}

/// `Z(t) = Z(0) + Z'(0) t phi1(mu t)` and `Z'(t) = Z'(0) e^{mu t}`.
pub fn eval_center(cs: &CenterSolution, t: f64) -> (Vec<CNum>, Vec<CNum>) {
    cs.z0
        .iter()
        .zip(&cs.zdot0)
        .zip(&cs.mu)
        .map(|((&z0, &zd0), &mu)| (z0 + zd0 * t * phi1(mu * t), zd0 * (mu * t).exp()))
        .unzip()
}

/// Relative motion from the base closed form plus free center motion.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSolution {
    pub relative: SpectralSolution,
    pub center: CenterSolution,
}

impl PairSolution {
    pub fn state_at(&self, t: f64) -> Result<PairState, ExactError> {
        let relative = from_complex(&eval_z(&self.relative, t)?);
        let (z, zdot) = eval_center(&self.center, t);
        let center = from_complex(&ComplexState { z, zdot });
        Ok(PairState::from_sum_difference(&center, &relative))
    }
}

pub fn solve_pair(p: &PairSpec, initial: &PairState) -> Result<PairSolution, ExactError> {
    initial.check_separated()?;
    let relative = spectral_solve(&p.base, &to_complex(&initial.difference())?)?;
    let sum = initial.sum();
    let center = CenterSolution {
        z0: sum.positions.iter().map(|r| r.to_complex()).collect(),
        zdot0: sum.velocities.iter().map(|v| v.to_complex()).collect(),
        mu: p.center_rates(),
    };
    Ok(PairSolution { relative, center })
}

/// State of the translation-invariant pair model at time `t`.
pub fn eval_pair(p: &PairSpec, initial: &PairState, t: f64) -> Result<PairState, ExactError> {
    solve_pair(p, initial)?.state_at(t)
}

/// Common rotation-dilation of all particles at rate `eta = lambda + i omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilaritySpec {
    pub eta: CNum,
    pub r0: Vec<Vec2>,
}

/// `r_j(t) = e^{lambda t} [cos(omega t) + sin(omega t) ẑ∧] r_j(0)`, with
/// velocity `(lambda + omega ẑ∧) r_j(t)`.
pub fn similarity_trajectory(s: &SimilaritySpec, t: f64) -> PlaneState {
    let growth = (s.eta.re * t).exp();
    let (sin, cos) = (s.eta.im * t).sin_cos();
    let positions: Vec<Vec2> = s
        .r0
        .iter()
        .map(|r| r.spin_scale(growth * cos, growth * sin))
        .collect();
    let velocities = positions
        .iter()
        .map(|r| r.spin_scale(s.eta.re, s.eta.im))
        .collect();
    PlaneState {
        positions,
        velocities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rhs_complex;
    use std::f64::consts::{E, FRAC_PI_2, PI, TAU};

    fn c(re: f64, im: f64) -> CNum {
        CNum::new(re, im)
    }

    fn single(beta: f64, gamma: f64, z: CNum, zdot: CNum) -> SpectralSolution {
        let cs = CouplingSpec::new(vec![vec![beta]], vec![vec![gamma]]).unwrap();
        spectral_solve(&cs, &ComplexState { z: vec![z], zdot: vec![zdot] }).unwrap()
    }

    /// Taylor series of (e^x - 1)/x with compensated summation over many
    /// terms; independent of the five-term branch in `phi1`.
    fn phi1_reference(x: f64) -> f64 {
        let (mut sum, mut comp, mut term) = (0.0f64, 0.0f64, 1.0f64);
        for k in 1..40 {
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            term *= x / (k as f64 + 1.0);
        }
        sum
    }

    #[test]
    fn phi1_values() {
        assert_eq!(phi1(ZERO), ONE);
        assert!((phi1(ONE) - c(E - 1.0, 0.0)).norm() < 1e-15);
        assert!((phi1(c(1e-13, 0.0)) - ONE).norm() <= 1e-12);
        for x in [1e-13, -3e-9, 5e-6, 9.99e-5, -9.99e-5] {
            let got = phi1(c(x, 0.0));
            assert!((got.re - phi1_reference(x)).abs() <= 1e-15, "x = {x}");
            assert_eq!(got.im, 0.0);
        }
    }

    #[test]
    fn phi1_continuous_at_series_switch() {
        for angle in [0.0, 0.7, FRAC_PI_2, 2.0, PI, 4.0] {
            let inside = CNum::from_polar(PHI1_SERIES_RADIUS * (1.0 - 1e-12), angle);
            let outside = CNum::from_polar(PHI1_SERIES_RADIUS * (1.0 + 1e-12), angle);
            let jump = (phi1(inside) - phi1(outside)).norm() / phi1(inside).norm();
            assert!(jump <= 1e-15, "angle {angle}: jump {jump}");
        }
    }

    #[test]
    fn phi1_purely_imaginary() {
        // (e^{iy} - 1)/(iy) = (sin y)/y + i (1 - cos y)/y
        let y: f64 = 2.3;
        let expected = c(y.sin() / y, (1.0 - y.cos()) / y);
        assert!((phi1(c(0.0, y)) - expected).norm() < 1e-15);
    }

    #[test]
    fn spectral_solve_zero_coupling() {
        let sol = single(0.0, 0.0, ONE, c(0.0, 1.0));
        assert_eq!(sol.modes.len(), 1);
        assert_eq!(sol.modes[0].eigenvalue, ZERO);
        assert_eq!(sol.modes[0].coefficients, vec![c(0.0, 1.0)]);
    }

    #[test]
    fn spectral_solve_diagonal_is_decoupled() {
        let diag = [c(-1.0, 0.5), c(0.2, 2.0), c(0.0, -1.0)];
        let cs = CouplingSpec::from_alpha(&CMatrix::from_diagonal(&diag));
        let init = ComplexState {
            z: vec![c(1.0, 1.0), c(-0.5, 2.0), c(0.3, -0.7)],
            zdot: vec![c(0.2, -0.1), c(1.0, 0.0), c(-0.4, 0.9)],
        };
        let sol = spectral_solve(&cs, &init).unwrap();
        for mode in &sol.modes {
            let k = diag.iter().position(|&d| d == mode.eigenvalue).unwrap();
            for j in 0..3 {
                let expected = if j == k { init.zdot[k] / init.z[k] } else { ZERO };
                assert!((mode.coefficients[j] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn spectral_solve_rejects_origin() {
        let cs = CouplingSpec::zeros(1);
        let err = spectral_solve(&cs, &ComplexState { z: vec![ZERO], zdot: vec![ONE] }).unwrap_err();
        assert_eq!(err.code(), "OriginState");
    }

    #[test]
    fn jordan_block_with_generic_data_is_defective() {
        let cs = CouplingSpec::new(vec![vec![0.0, 1.0], vec![0.0, 0.0]], vec![vec![0.0; 2]; 2]).unwrap();
        let init = ComplexState {
            z: vec![ONE, ONE],
            zdot: vec![c(0.5, 0.0), c(0.25, 0.1)],
        };
        assert_eq!(spectral_solve(&cs, &init).unwrap_err().code(), "DefectiveMatrix");
    }

    #[test]
    fn jordan_block_with_eigenvector_data_is_solved() {
        // f(0) proportional to e_1, the only eigenvector of [[0,1],[0,0]].
        let cs = CouplingSpec::new(vec![vec![0.0, 1.0], vec![0.0, 0.0]], vec![vec![0.0; 2]; 2]).unwrap();
        let init = ComplexState {
            z: vec![ONE, c(0.0, 2.0)],
            zdot: vec![c(0.5, 0.3), ZERO],
        };
        let sol = spectral_solve(&cs, &init).unwrap();
        let f0 = sol.initial_ratios();
        assert!((f0[0] - c(0.5, 0.3)).norm() < 1e-15 && f0[1].norm() < 1e-15);
        let s = eval_z(&sol, 2.0).unwrap();
        let expected = (c(0.5, 0.3) * 2.0).exp();
        assert!((s.z[0] - expected).norm() < 1e-13);
        assert!((s.z[1] - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_f_examples() {
        let sol = single(1.0, 0.0, ONE, ONE);
        for t in [0.0, 0.5, 2.0] {
            assert!((eval_f(&sol, t)[0] - c(t.exp(), 0.0)).norm() < 1e-14 * t.exp());
        }
    }

    #[test]
    fn eval_z_circle() {
        let sol = single(0.0, 0.0, ONE, c(0.0, 1.0));
        let s = eval_z(&sol, FRAC_PI_2).unwrap();
        assert!((s.z[0] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((s.zdot[0] - c(-1.0, 0.0)).norm() < 1e-15);
        let s0 = eval_z(&sol, 0.0).unwrap();
        assert_eq!(s0.z, vec![ONE]);
        assert_eq!(s0.zdot, vec![c(0.0, 1.0)]);
    }

    #[test]
    fn eval_z_double_exponential() {
        let sol = single(1.0, 0.0, ONE, ONE);
        let s = eval_z(&sol, 2f64.ln()).unwrap();
        assert!((s.z[0] - c(E, 0.0)).norm() < 1e-14 * E);
    }

    #[test]
    fn eval_z_reports_overflow() {
        let sol = single(1.0, 0.0, ONE, ONE);
        // exp(e^t - 1) with e^7 - 1 > 700.
        assert!(eval_z(&sol, 6.0).is_ok());
        match eval_z(&sol, 7.0) {
            Err(ExactError::Overflow { t, .. }) => assert_eq!(t, 7.0),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn eval_z_second_difference_matches_force() {
        let cs = CouplingSpec::new(
            vec![vec![0.2, -0.5], vec![0.3, -0.1]],
            vec![vec![0.4, 0.1], vec![-0.6, 0.2]],
        )
        .unwrap();
        let init = ComplexState {
            z: vec![c(1.0, 0.3), c(-0.4, 1.2)],
            zdot: vec![c(0.1, 0.5), c(-0.3, 0.2)],
        };
        let sol = spectral_solve(&cs, &init).unwrap();
        let (t, h) = (0.7, 1e-3);
        let zm = eval_z(&sol, t - h).unwrap().z;
        let z0 = eval_z(&sol, t).unwrap();
        let zp = eval_z(&sol, t + h).unwrap().z;
        let force = rhs_complex(&cs, &z0).unwrap();
        for j in 0..2 {
            let fd = (zp[j] - z0.z[j] * 2.0 + zm[j]) / (h * h);
            assert!((fd - force[j]).norm() < 1e-5, "{fd} vs {}", force[j]);
        }
    }

    #[test]
    fn tau_map_examples() {
        let t = 1.234;
        assert_eq!(tau_map(GeneralizedParams::new(0.0, 0.0).unwrap(), t), c(t, 0.0));
        assert!(tau_map(GeneralizedParams::new(0.0, 1.0).unwrap(), TAU).norm() < 1e-15);
        assert!((tau_map(GeneralizedParams::new(1.0, 0.0).unwrap(), 1.0) - c(E - 1.0, 0.0)).norm() < 1e-15);
        let g = GeneralizedParams::new(0.0, 2.5).unwrap();
        let period = TAU / 2.5;
        for t in [0.1, 1.0, 3.3] {
            assert!((tau_map(g, t + period) - tau_map(g, t)).norm() < 1e-14);
        }
    }

    #[test]
    fn generalized_without_drive_matches_base() {
        let sol = single(0.3, -0.8, c(1.0, 0.5), c(0.2, 0.4));
        let g = GeneralizedParams::new(0.0, 0.0).unwrap();
        for t in [0.0, 0.4, 1.5] {
            assert_eq!(eval_generalized(&sol, g, t).unwrap(), eval_z(&sol, t).unwrap());
        }
    }

    #[test]
    fn generalized_is_periodic() {
        let sol = single(0.3, -0.8, c(1.0, 0.5), c(0.2, 0.4));
        let g = GeneralizedParams::new(0.0, 1.0).unwrap();
        let s0 = eval_generalized(&sol, g, 0.0).unwrap();
        let s1 = eval_generalized(&sol, g, TAU).unwrap();
        for j in 0..1 {
            assert!((s0.z[j] - s1.z[j]).norm() < 1e-12);
            assert!((s0.zdot[j] - s1.zdot[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn eval_center_examples() {
        let cs = CenterSolution {
            z0: vec![c(1.0, 2.0), ZERO],
            zdot0: vec![c(0.5, -1.0), ONE],
            mu: vec![ZERO, ONE],
        };
        let (z, zd) = eval_center(&cs, 1.0);
        assert_eq!(z[0], c(1.5, 1.0));
        assert_eq!(zd[0], c(0.5, -1.0));
        assert!((z[1] - c(E - 1.0, 0.0)).norm() < 1e-15);
        assert!((zd[1] - c(E, 0.0)).norm() < 1e-15);
        let (z, zd) = eval_center(&cs, 0.0);
        assert_eq!(z, cs.z0);
        assert_eq!(zd, cs.zdot0);
    }

    #[test]
    fn eval_center_second_difference() {
        let mu = c(-0.3, 1.7);
        let cs = CenterSolution {
            z0: vec![c(0.2, 0.1)],
            zdot0: vec![c(1.0, -0.4)],
            mu: vec![mu],
        };
        let (t, h) = (0.9, 1e-3);
        let zm = eval_center(&cs, t - h).0[0];
        let (z0, zd0) = eval_center(&cs, t);
        let zp = eval_center(&cs, t + h).0[0];
        let fd = (zp - z0[0] * 2.0 + zm) / (h * h);
        assert!((fd - mu * zd0[0]).norm() < 1e-5);
    }

    #[test]
    fn pair_with_static_center_keeps_midpoint() {
        let p = PairSpec::new(
            CouplingSpec::new(vec![vec![0.1, 0.2], vec![-0.3, 0.0]], vec![vec![0.5, 0.0], vec![0.1, -0.2]]).unwrap(),
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        )
        .unwrap();
        let plus = PlaneState::from_rows(&[[1.0, 0.5, 0.2, 0.1], [-0.5, 1.0, 0.0, 0.3]]);
        // Minus family moves opposite so the center velocity vanishes.
        let minus = PlaneState::from_rows(&[[-0.2, 0.1, -0.2, -0.1], [0.4, 0.3, 0.0, -0.3]]);
        let init = PairState { plus, minus };
        let mid0 = init.sum().positions;
        for t in [0.3, 1.0] {
            let s = eval_pair(&p, &init, t).unwrap();
            for (a, b) in s.sum().positions.iter().zip(&mid0) {
                assert!((*a - *b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn similarity_examples() {
        let r0 = vec![Vec2::new(1.0, 0.0)];
        let still = SimilaritySpec { eta: ZERO, r0: r0.clone() };
        assert_eq!(similarity_trajectory(&still, 5.0).positions, r0);

        let spin = SimilaritySpec { eta: c(0.0, 1.0), r0: r0.clone() };
        let s = similarity_trajectory(&spin, FRAC_PI_2);
        assert!((s.positions[0] - Vec2::new(0.0, 1.0)).norm() < 1e-15);

        let grow = SimilaritySpec { eta: ONE, r0 };
        let s = similarity_trajectory(&grow, 1.0);
        assert!((s.positions[0] - Vec2::new(E, 0.0)).norm() < 1e-15);
        assert!((s.velocities[0] - Vec2::new(E, 0.0)).norm() < 1e-15);
    }
}
