//! Closed-form and numerical trajectories for a rotation-invariant, solvable
//! many-body system in the plane.
//!
//! The planar equations of motion become linear first-order equations for
//! the logarithmic derivatives `f_j = z'_j / z_j` once each particle position
//! `(x, y)` is read as the complex number `z = x + i y`. The [`exact`] module
//! evaluates that closed form, [`integrate`] integrates the real Newtonian
//! equations directly, and [`classify`] maps the coupling spectrum to the
//! qualitative motion it implies.
//!
//! Model variants (base, generalized time-dependent, translation-invariant
//! pair) sit behind the [`variant::ModelVariant`] trait and are selected by
//! name through a [`variant::VariantRegistry`].

// Negated float comparisons are used on purpose so that NaN fails checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cxla;
pub mod exact;
pub mod integrate;
pub mod model;
pub mod variant;

pub use cxla::{CMatrix, CNum};
pub use model::{CouplingSpec, PlaneState, Vec2};
