//! Couplings, particle states and the force laws of every model variant.
//!
//! Forces are evaluated in real two-vector arithmetic. The complex form
//! [`rhs_complex`] is computed separately so it can act as an independent
//! check on [`rhs_base`].

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use thiserror::Error;

use crate::cxla::{CMatrix, CNum};

/// A particle closer to the origin than this fraction of the largest radius
/// is treated as sitting on the singularity of the force law.
pub const ORIGIN_GUARD_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("particle {particle} is at the origin (|r| = {radius:.3e})")]
    OriginState { particle: usize, radius: f64 },
    #[error("pair {particle} has coincident members (|r+ - r-| = {separation:.3e})")]
    PairCollision { particle: usize, separation: f64 },
    #[error("{field}: {detail}")]
    Invalid { field: &'static str, detail: String },
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::OriginState { .. } => "OriginState",
            ModelError::PairCollision { .. } => "PairCollision",
            ModelError::Invalid { .. } => "ValidationError",
        }
    }
}

/// Real planar vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Quarter turn counterclockwise, `(x, y) -> (-y, x)`.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// `(a + b ẑ∧) self`: scaling by `a` plus quarter-turned scaling by `b`.
    pub fn spin_scale(self, a: f64, b: f64) -> Vec2 {
        Vec2::new(a * self.x - b * self.y, a * self.y + b * self.x)
    }

    pub fn to_complex(self) -> CNum {
        CNum::new(self.x, self.y)
    }

    pub fn from_complex(z: CNum) -> Self {
        Vec2::new(z.re, z.im)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

/// Real coupling matrices `beta` and `gamma`, both `n x n`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    n: usize,
    beta: Vec<f64>,
    gamma: Vec<f64>,
}

impl CouplingSpec {
    pub fn new(beta: Vec<Vec<f64>>, gamma: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = beta.len();
        if n == 0 {
            return Err(ModelError::Invalid {
                field: "beta",
                detail: "at least one particle is required".into(),
            });
        }
        let flat = |rows: Vec<Vec<f64>>, field: &'static str| -> Result<Vec<f64>, ModelError> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(ModelError::Invalid {
                    field,
                    detail: format!("must be {n}x{n}"),
                });
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            if flat.iter().any(|x| !x.is_finite()) {
                return Err(ModelError::Invalid {
                    field,
                    detail: "entries must be finite".into(),
                });
            }
            Ok(flat)
        };
        Ok(Self {
            n,
            beta: flat(beta, "beta")?,
            gamma: flat(gamma, "gamma")?,
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            beta: vec![0.0; n * n],
            gamma: vec![0.0; n * n],
        }
    }

    /// Splits a complex coupling matrix into real and imaginary parts.
    pub fn from_alpha(a: &CMatrix) -> Self {
        Self {
            n: a.n(),
            beta: a.as_slice().iter().map(|z| z.re).collect(),
            gamma: a.as_slice().iter().map(|z| z.im).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self, j: usize, k: usize) -> f64 {
        self.beta[j * self.n + k]
    }

    pub fn gamma(&self, j: usize, k: usize) -> f64 {
        self.gamma[j * self.n + k]
    }

    pub fn beta_rows(&self) -> Vec<Vec<f64>> {
        self.beta.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn gamma_rows(&self) -> Vec<Vec<f64>> {
        self.gamma.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

/// The complex coupling matrix `beta + i gamma`.
pub fn alpha_matrix(c: &CouplingSpec) -> CMatrix {
    CMatrix::from_fn(c.n, |j, k| CNum::new(c.beta(j, k), c.gamma(j, k)))
}

/// Positions and velocities of `n` particles.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneState {
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
}

impl PlaneState {
    pub fn new(positions: Vec<Vec2>, velocities: Vec<Vec2>) -> Result<Self, ModelError> {
        if positions.len() != velocities.len() {
            return Err(ModelError::Invalid {
                field: "velocities",
                detail: format!(
                    "expected {} velocities, got {}",
                    positions.len(),
                    velocities.len()
                ),
            });
        }
        if positions.iter().chain(&velocities).any(|v| !v.is_finite()) {
            return Err(ModelError::Invalid {
                field: "state",
                detail: "components must be finite".into(),
            });
        }
        Ok(Self {
            positions,
            velocities,
        })
    }

    /// Builds a state from `[x, y, vx, vy]` rows.
    pub fn from_rows(rows: &[[f64; 4]]) -> Self {
        Self {
            positions: rows.iter().map(|r| Vec2::new(r[0], r[1])).collect(),
            velocities: rows.iter().map(|r| Vec2::new(r[2], r[3])).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            positions: self.positions.iter().map(|r| r.rotated(angle)).collect(),
            velocities: self.velocities.iter().map(|v| v.rotated(angle)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            positions: self.positions.iter().map(|&r| r * s).collect(),
            velocities: self.velocities.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn translated(&self, shift: Vec2) -> Self {
        Self {
            positions: self.positions.iter().map(|&r| r + shift).collect(),
            velocities: self.velocities.clone(),
        }
    }

    /// Checks that no particle is numerically at the origin.
    pub fn check_origin(&self) -> Result<(), ModelError> {
        check_nonzero(&self.positions).map_err(|(particle, radius)| ModelError::OriginState {
            particle,
            radius,
        })
    }
}

/// Returns the offending index when some vector is below the relative
/// origin guard (or all of them vanish).
fn check_nonzero(points: &[Vec2]) -> Result<(), (usize, f64)> {
    let scale = points.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let floor = ORIGIN_GUARD_RATIO * scale;
    for (j, r) in points.iter().enumerate() {
        let radius = r.norm();
        if radius == 0.0 || radius < floor || !radius.is_finite() {
            return Err((j, radius));
        }
    }
    Ok(())
}

/// Complex image of a [`PlaneState`]: `z_j = x_j + i y_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexState {
    pub z: Vec<CNum>,
    pub zdot: Vec<CNum>,
}

impl ComplexState {
    pub fn check_origin(&self) -> Result<(), ModelError> {
        let pts: Vec<Vec2> = self.z.iter().map(|&z| Vec2::from_complex(z)).collect();
        check_nonzero(&pts).map_err(|(particle, radius)| ModelError::OriginState {
            particle,
            radius,
        })
    }
}

pub fn to_complex(s: &PlaneState) -> Result<ComplexState, ModelError> {
    s.check_origin()?;
    Ok(ComplexState {
        z: s.positions.iter().map(|r| r.to_complex()).collect(),
        zdot: s.velocities.iter().map(|v| v.to_complex()).collect(),
    })
}

pub fn from_complex(c: &ComplexState) -> PlaneState {
    PlaneState {
        positions: c.z.iter().map(|&z| Vec2::from_complex(z)).collect(),
        velocities: c.zdot.iter().map(|&z| Vec2::from_complex(z)).collect(),
    }
}

/// Parameters `lambda` (growth) and `omega` (rotation) of the time-dependent
/// generalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedParams {
    pub lambda: f64,
    pub omega: f64,
}

impl GeneralizedParams {
    pub fn new(lambda: f64, omega: f64) -> Result<Self, ModelError> {
        if !lambda.is_finite() || !omega.is_finite() {
            return Err(ModelError::Invalid {
                field: "generalized_params",
                detail: "lambda and omega must be finite".into(),
            });
        }
        Ok(Self { lambda, omega })
    }

    /// `lambda + i omega`.
    pub fn rate(&self) -> CNum {
        CNum::new(self.lambda, self.omega)
    }
}

/// Couplings of the translation-invariant pair model: base couplings for the
/// relative coordinates plus per-pair growth and rotation rates for the
/// center coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSpec {
    pub base: CouplingSpec,
    pub center_growth: Vec<f64>,
    pub center_rotation: Vec<f64>,
}

impl PairSpec {
    pub fn new(
        base: CouplingSpec,
        center_growth: Vec<f64>,
        center_rotation: Vec<f64>,
    ) -> Result<Self, ModelError> {
        for (field, v) in [("center_growth", &center_growth), ("center_rotation", &center_rotation)] {
            if v.len() != base.n() {
                return Err(ModelError::Invalid {
                    field,
                    detail: format!("expected {} entries, got {}", base.n(), v.len()),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ModelError::Invalid {
                    field,
                    detail: "entries must be finite".into(),
                });
            }
        }
        Ok(Self {
            base,
            center_growth,
            center_rotation,
        })
    }

    /// Complex center rates `growth_j + i rotation_j`.
    pub fn center_rates(&self) -> Vec<CNum> {
        self.center_growth
            .iter()
            .zip(&self.center_rotation)
            .map(|(&g, &w)| CNum::new(g, w))
            .collect()
    }
}

/// Two families of `n` particles each.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    pub plus: PlaneState,
    pub minus: PlaneState,
}

impl PairState {
    /// Relative coordinates `r+ - r-`.
    pub fn difference(&self) -> PlaneState {
        PlaneState {
            positions: zip_with(&self.plus.positions, &self.minus.positions, |a, b| a - b),
            velocities: zip_with(&self.plus.velocities, &self.minus.velocities, |a, b| a - b),
        }
    }

    /// Center coordinates `r+ + r-`.
    pub fn sum(&self) -> PlaneState {
        PlaneState {
            positions: zip_with(&self.plus.positions, &self.minus.positions, |a, b| a + b),
            velocities: zip_with(&self.plus.velocities, &self.minus.velocities, |a, b| a + b),
        }
    }

    /// Recovers both families from sum and difference coordinates.
    pub fn from_sum_difference(sum: &PlaneState, diff: &PlaneState) -> Self {
        let half = |a: Vec2, b: Vec2| (a + b) * 0.5;
        let half_diff = |a: Vec2, b: Vec2| (a - b) * 0.5;
        Self {
            plus: PlaneState {
                positions: zip_with(&sum.positions, &diff.positions, half),
                velocities: zip_with(&sum.velocities, &diff.velocities, half),
            },
            minus: PlaneState {
                positions: zip_with(&sum.positions, &diff.positions, half_diff),
                velocities: zip_with(&sum.velocities, &diff.velocities, half_diff),
            },
        }
    }

    /// Flattens into a single state listing the plus family then the minus family.
    pub fn to_plane(&self) -> PlaneState {
        let mut positions = self.plus.positions.clone();
        positions.extend_from_slice(&self.minus.positions);
        let mut velocities = self.plus.velocities.clone();
        velocities.extend_from_slice(&self.minus.velocities);
        PlaneState {
            positions,
            velocities,
        }
    }

    /// Inverse of [`PairState::to_plane`]; the state must hold an even number of particles.
    pub fn from_plane(s: &PlaneState) -> Self {
        let n = s.len() / 2;
        Self {
            plus: PlaneState {
                positions: s.positions[..n].to_vec(),
                velocities: s.velocities[..n].to_vec(),
            },
            minus: PlaneState {
                positions: s.positions[n..].to_vec(),
                velocities: s.velocities[n..].to_vec(),
            },
        }
    }

    pub fn translated(&self, shift: Vec2) -> Self {
        Self {
            plus: self.plus.translated(shift),
            minus: self.minus.translated(shift),
        }
    }

    pub fn check_separated(&self) -> Result<(), ModelError> {
        check_nonzero(&self.difference().positions).map_err(|(particle, separation)| {
            ModelError::PairCollision {
                particle,
                separation,
            }
        })
    }
}

fn zip_with(a: &[Vec2], b: &[Vec2], f: impl Fn(Vec2, Vec2) -> Vec2) -> Vec<Vec2> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

/// Accelerations of the base model for the given (possibly time-dependent)
/// couplings, with an optional extra `(lambda + omega ẑ∧) v_j` term.
fn accelerations(
    beta: impl Fn(usize, usize) -> f64,
    gamma: impl Fn(usize, usize) -> f64,
    s: &PlaneState,
    self_drive: Option<GeneralizedParams>,
) -> Vec<Vec2> {
    let r = &s.positions;
    let v = &s.velocities;
    let n = r.len();
    // Work with unit directions and rates v / |r| so that intermediate
    // products stay on the scale of the result.
    let radius: Vec<f64> = r.iter().map(|p| p.norm()).collect();
    let u: Vec<Vec2> = r.iter().zip(&radius).map(|(&p, &rho)| p / rho).collect();
    let q: Vec<Vec2> = v.iter().zip(&radius).map(|(&w, &rho)| w / rho).collect();

    (0..n)
        .map(|j| {
            let (rj, vj) = (r[j], v[j]);
            let mut acc = vj * (2.0 * q[j].dot(u[j])) - rj * q[j].norm_sqr();
            for k in 0..n {
                let w = q[k] * u[k].dot(rj) + rj * q[k].dot(u[k]) - u[k] * q[k].dot(rj);
                acc += w.spin_scale(beta(j, k), gamma(j, k));
            }
            if let Some(g) = self_drive {
                acc += vj.spin_scale(g.lambda, g.omega);
            }
            acc
        })
        .collect()
}

/// Accelerations of the autonomous base model.
pub fn rhs_base(c: &CouplingSpec, s: &PlaneState) -> Result<Vec<Vec2>, ModelError> {
    s.check_origin()?;
    Ok(accelerations(|j, k| c.beta(j, k), |j, k| c.gamma(j, k), s, None))
}

/// `z''_j = z'_j^2 / z_j + sum_k alpha_jk z_j z'_k / z_k`.
pub fn rhs_complex(c: &CouplingSpec, cs: &ComplexState) -> Result<Vec<CNum>, ModelError> {
    cs.check_origin()?;
    let alpha = alpha_matrix(c);
    let ratios: Vec<CNum> = cs.zdot.iter().zip(&cs.z).map(|(zd, z)| zd / z).collect();
    Ok((0..c.n)
        .map(|j| {
            let coupled: CNum = (0..c.n).map(|k| alpha[(j, k)] * ratios[k]).sum();
            cs.zdot[j] * cs.zdot[j] / cs.z[j] + cs.z[j] * coupled
        })
        .collect())
}

/// Time-dependent couplings of the generalized model, `(beta + i gamma) e^{(lambda + i omega) t}`
/// split into real and imaginary parts.
pub fn couplings_at(c: &CouplingSpec, g: GeneralizedParams, t: f64) -> CouplingSpec {
    let growth = (g.lambda * t).exp();
    let (sin, cos) = (g.omega * t).sin_cos();
    let mut out = c.clone();
    for idx in 0..c.n * c.n {
        let (b, gm) = (c.beta[idx], c.gamma[idx]);
        out.beta[idx] = (b * cos - gm * sin) * growth;
        out.gamma[idx] = (gm * cos + b * sin) * growth;
    }
    out
}

/// Accelerations of the generalized model at time `t`.
pub fn rhs_generalized(
    c: &CouplingSpec,
    g: GeneralizedParams,
    t: f64,
    s: &PlaneState,
) -> Result<Vec<Vec2>, ModelError> {
    if g.lambda == 0.0 && g.omega == 0.0 {
        return rhs_base(c, s);
    }
    s.check_origin()?;
    let ct = couplings_at(c, g, t);
    Ok(accelerations(|j, k| ct.beta(j, k), |j, k| ct.gamma(j, k), s, Some(g)))
}

/// Accelerations `(plus, minus)` of the translation-invariant pair model.
pub fn rhs_pair(p: &PairSpec, s: &PairState) -> Result<(Vec<Vec2>, Vec<Vec2>), ModelError> {
    s.check_separated()?;
    let diff = s.difference();
    let relative = accelerations(|j, k| p.base.beta(j, k), |j, k| p.base.gamma(j, k), &diff, None);
    let sum = s.sum();
    let center: Vec<Vec2> = sum
        .velocities
        .iter()
        .enumerate()
        .map(|(j, v)| v.spin_scale(p.center_growth[j], p.center_rotation[j]))
        .collect();
    let plus = zip_with(&center, &relative, |c, r| (c + r) * 0.5);
    let minus = zip_with(&center, &relative, |c, r| (c - r) * 0.5);
    Ok((plus, minus))
}
