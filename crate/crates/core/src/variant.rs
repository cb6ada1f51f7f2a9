//! Model variants behind a common trait, registered by name.

use std::collections::BTreeMap;

use crate::exact::{eval_generalized, eval_z, solve_pair, spectral_solve, ExactError, PairSolution, SpectralSolution};
use crate::integrate::{ForceField, Trajectory};
use crate::model::{
    from_complex, rhs_base, rhs_generalized, rhs_pair, to_complex, CouplingSpec, GeneralizedParams,
    ModelError, PairSpec, PairState, PlaneState, Vec2,
};

/// Closed-form evolution from a fixed initial state.
pub trait ExactFlow: Send + Sync {
    fn state_at(&self, t: f64) -> Result<PlaneState, ExactError>;
}

/// A model variant: a force law, its coupling matrix, and its exact solution.
///
/// States are flat [`PlaneState`]s. Pair variants use `2n` particles, the
/// `+` family first.
pub trait ModelVariant: ForceField {
    fn name(&self) -> &str;

    /// Couplings whose spectrum governs the motion.
    fn couplings(&self) -> &CouplingSpec;

    fn exact_flow(&self, initial: &PlaneState) -> Result<Box<dyn ExactFlow>, ExactError>;
}

/// Samples `flow` on `times`.
pub fn exact_trajectory(
    flow: &dyn ExactFlow,
    times: &[f64],
    variant: &str,
) -> Result<Trajectory, ExactError> {
    let states = times.iter().map(|&t| flow.state_at(t)).collect::<Result<_, _>>()?;
    Ok(Trajectory {
        variant: variant.to_string(),
        times: times.to_vec(),
        states,
        stats: None,
    })
}

fn check_len(expected: usize, s: &PlaneState) -> Result<(), ModelError> {
    if s.len() != expected {
        return Err(ModelError::Invalid {
            field: "initial_state",
            detail: format!("expected {expected} particles, got {}", s.len()),
        });
    }
    Ok(())
}

pub struct BaseModel {
    pub couplings: CouplingSpec,
}

struct BaseFlow(SpectralSolution);

impl ExactFlow for BaseFlow {
    fn state_at(&self, t: f64) -> Result<PlaneState, ExactError> {
        Ok(from_complex(&eval_z(&self.0, t)?))
    }
}

impl ForceField for BaseModel {
    fn particle_count(&self) -> usize {
        self.couplings.n()
    }

    fn accelerations(&self, _t: f64, s: &PlaneState) -> Result<Vec<Vec2>, ModelError> {
        rhs_base(&self.couplings, s)
    }
}

impl ModelVariant for BaseModel {
    fn name(&self) -> &str {
        "base"
    }

    fn couplings(&self) -> &CouplingSpec {
        &self.couplings
    }

    fn exact_flow(&self, initial: &PlaneState) -> Result<Box<dyn ExactFlow>, ExactError> {
        check_len(self.particle_count(), initial)?;
        let sol = spectral_solve(&self.couplings, &to_complex(initial)?)?;
        Ok(Box::new(BaseFlow(sol)))
    }
}

pub struct GeneralizedModel {
    pub couplings: CouplingSpec,
    pub params: GeneralizedParams,
}

struct GeneralizedFlow(SpectralSolution, GeneralizedParams);

impl ExactFlow for GeneralizedFlow {
    fn state_at(&self, t: f64) -> Result<PlaneState, ExactError> {
        Ok(from_complex(&eval_generalized(&self.0, self.1, t)?))
    }
}

impl ForceField for GeneralizedModel {
    fn particle_count(&self) -> usize {
        self.couplings.n()
    }

    fn accelerations(&self, t: f64, s: &PlaneState) -> Result<Vec<Vec2>, ModelError> {
        rhs_generalized(&self.couplings, self.params, t, s)
    }
}

impl ModelVariant for GeneralizedModel {
    fn name(&self) -> &str {
        "generalized"
    }

    fn couplings(&self) -> &CouplingSpec {
        &self.couplings
    }

    fn exact_flow(&self, initial: &PlaneState) -> Result<Box<dyn ExactFlow>, ExactError> {
        check_len(self.particle_count(), initial)?;
        // The time-dependent couplings coincide with the base ones at t = 0.
        let sol = spectral_solve(&self.couplings, &to_complex(initial)?)?;
        Ok(Box::new(GeneralizedFlow(sol, self.params)))
    }
}

pub struct PairModel {
    pub spec: PairSpec,
}

struct PairFlow(PairSolution);

impl ExactFlow for PairFlow {
    fn state_at(&self, t: f64) -> Result<PlaneState, ExactError> {
        Ok(self.0.state_at(t)?.to_plane())
    }
}

impl ForceField for PairModel {
    fn particle_count(&self) -> usize {
        2 * self.spec.base.n()
    }

    fn accelerations(&self, _t: f64, s: &PlaneState) -> Result<Vec<Vec2>, ModelError> {
        let (mut plus, minus) = rhs_pair(&self.spec, &PairState::from_plane(s))?;
        plus.extend(minus);
        Ok(plus)
    }
}

impl ModelVariant for PairModel {
    fn name(&self) -> &str {
        "pair"
    }

    fn couplings(&self) -> &CouplingSpec {
        &self.spec.base
    }

    fn exact_flow(&self, initial: &PlaneState) -> Result<Box<dyn ExactFlow>, ExactError> {
        check_len(self.particle_count(), initial)?;
        Ok(Box::new(PairFlow(solve_pair(&self.spec, &PairState::from_plane(initial))?)))
    }
}

/// Center rates of the pair model.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCenter {
    pub growth: Vec<f64>,
    pub rotation: Vec<f64>,
}

/// Everything a variant constructor may need.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantParams {
    pub couplings: CouplingSpec,
    pub generalized: Option<GeneralizedParams>,
    pub pair: Option<PairCenter>,
}

impl VariantParams {
    pub fn base(couplings: CouplingSpec) -> Self {
        Self {
            couplings,
            generalized: None,
            pair: None,
        }
    }
}

pub type VariantConstructor = fn(&VariantParams) -> Result<Box<dyn ModelVariant>, ModelError>;

fn missing(field: &'static str, variant: &str) -> ModelError {
    ModelError::Invalid {
        field,
        detail: format!("required by the {variant} variant"),
    }
}

fn unexpected(field: &'static str, variant: &str) -> ModelError {
    ModelError::Invalid {
        field,
        detail: format!("not used by the {variant} variant"),
    }
}

fn build_base(p: &VariantParams) -> Result<Box<dyn ModelVariant>, ModelError> {
    if p.generalized.is_some() {
        return Err(unexpected("generalized_params", "base"));
    }
    if p.pair.is_some() {
        return Err(unexpected("pair_params", "base"));
    }
    Ok(Box::new(BaseModel {
        couplings: p.couplings.clone(),
    }))
}

fn build_generalized(p: &VariantParams) -> Result<Box<dyn ModelVariant>, ModelError> {
    let params = p.generalized.ok_or_else(|| missing("generalized_params", "generalized"))?;
    if p.pair.is_some() {
        return Err(unexpected("pair_params", "generalized"));
    }
    Ok(Box::new(GeneralizedModel {
        couplings: p.couplings.clone(),
        params,
    }))
}

fn build_pair(p: &VariantParams) -> Result<Box<dyn ModelVariant>, ModelError> {
    let center = p.pair.as_ref().ok_or_else(|| missing("pair_params", "pair"))?;
    if p.generalized.is_some() {
        return Err(unexpected("generalized_params", "pair"));
    }
    let spec = PairSpec::new(p.couplings.clone(), center.growth.clone(), center.rotation.clone())?;
    Ok(Box::new(PairModel { spec }))
}

/// Name-to-constructor table for model variants.
pub struct VariantRegistry {
    constructors: BTreeMap<String, VariantConstructor>,
}

impl VariantRegistry {
    pub fn empty() -> Self {
        Self {
            constructors: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, ctor: VariantConstructor) {
        self.constructors.insert(name.to_string(), ctor);
    }

    pub fn names(&self) -> Vec<&str> {
        self.constructors.keys().map(String::as_str).collect()
    }

    pub fn build(&self, name: &str, params: &VariantParams) -> Result<Box<dyn ModelVariant>, ModelError> {
        let ctor = self.constructors.get(name).ok_or_else(|| ModelError::Invalid {
            field: "variant",
            detail: format!("unknown variant {name:?}; expected one of {}", self.names().join(", ")),
        })?;
        ctor(params)
    }
}

impl Default for VariantRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("base", build_base);
        r.register("generalized", build_generalized);
        r.register("pair", build_pair);
        r
    }
}
