//! Scenario files: TOML with `[scenario]`, `[couplings]`, optional
//! `[generalized_params]` / `[pair_params]`, `[initial_state]`,
//! `[integrator]` and `[outputs]` tables.

use std::path::Path;

use serde::Deserialize;
use solvable_plane::integrate::IntegratorConfig;
use solvable_plane::model::{CouplingSpec, GeneralizedParams, ModelError, PlaneState};
use solvable_plane::variant::{PairCenter, VariantParams, VariantRegistry};

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    scenario: RawMeta,
    couplings: RawCouplings,
    generalized_params: Option<RawGeneralized>,
    pair_params: Option<RawPair>,
    initial_state: RawInitial,
    #[serde(default)]
    integrator: RawIntegrator,
    #[serde(default)]
    outputs: Outputs,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeta {
    name: Option<String>,
    #[serde(default = "default_variant")]
    variant: String,
}

fn default_variant() -> String {
    "base".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCouplings {
    n: usize,
    beta: Option<Vec<Vec<f64>>>,
    gamma: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeneralized {
    lambda: f64,
    omega: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    center_growth: Vec<f64>,
    center_rotation: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    particles: Option<Vec<Vec<f64>>>,
    plus: Option<Vec<Vec<f64>>>,
    minus: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    t0: Option<f64>,
    t1: Option<f64>,
    samples: Option<usize>,
    rtol: Option<f64>,
    atol: Option<f64>,
    h_init: Option<f64>,
    h_min: Option<f64>,
}

/// Which artifacts to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub trajectory: bool,
    pub comparison: bool,
    pub classification: bool,
    pub plot_data: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            trajectory: true,
            comparison: true,
            classification: true,
            plot_data: false,
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub variant: String,
    pub params: VariantParams,
    /// Flat initial state; pair scenarios list the `plus` family first.
    pub initial: PlaneState,
    pub integrator: IntegratorConfig,
    pub outputs: Outputs,
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let fallback = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    Scenario::from_toml(&text, fallback.as_deref().unwrap_or("scenario"))
}

fn model_error(e: ModelError, prefix: &str) -> CliError {
    match e {
        ModelError::Invalid { field, detail } => CliError::validation(join(prefix, field), detail),
        other => CliError::validation(prefix, other.to_string()),
    }
}

fn join(prefix: &str, field: &str) -> String {
    if prefix.is_empty() || field.starts_with(prefix) {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

fn square(rows: Option<Vec<Vec<f64>>>, n: usize, field: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let rows = rows.unwrap_or_else(|| vec![vec![0.0; n]; n]);
    let cols: Vec<usize> = rows.iter().map(Vec::len).collect();
    if rows.len() != n || cols.iter().any(|&c| c != n) {
        return Err(CliError::validation(
            field,
            format!("expected a {n}x{n} matrix, got {} rows with lengths {cols:?}", rows.len()),
        ));
    }
    Ok(rows)
}

fn particles(rows: &[Vec<f64>], expected: usize, field: &str) -> Result<PlaneState, CliError> {
    if rows.len() != expected {
        return Err(CliError::validation(
            field,
            format!("expected {expected} particles, got {}", rows.len()),
        ));
    }
    let mut flat = Vec::with_capacity(rows.len());
    for (j, row) in rows.iter().enumerate() {
        let Ok(r) = <[f64; 4]>::try_from(row.as_slice()) else {
            return Err(CliError::validation(
                field,
                format!("particle {} must be [x, y, vx, vy], got {} values", j + 1, row.len()),
            ));
        };
        if r.iter().any(|v| !v.is_finite()) {
            return Err(CliError::validation(field, format!("particle {} has non-finite entries", j + 1)));
        }
        flat.push(r);
    }
    Ok(PlaneState::from_rows(&flat))
}

impl Scenario {
    pub fn from_toml(text: &str, default_name: &str) -> Result<Self, CliError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string().trim().replace('\n', " ")))?;
        let n = raw.couplings.n;
        if n == 0 {
            return Err(CliError::validation("couplings.n", "must be at least 1"));
        }
        let beta = square(raw.couplings.beta, n, "couplings.beta")?;
        let gamma = square(raw.couplings.gamma, n, "couplings.gamma")?;
        let couplings = CouplingSpec::new(beta, gamma).map_err(|e| model_error(e, "couplings"))?;

        let generalized = raw
            .generalized_params
            .map(|g| GeneralizedParams::new(g.lambda, g.omega))
            .transpose()
            .map_err(|e| model_error(e, ""))?;
        let pair = raw.pair_params.map(|p| PairCenter {
            growth: p.center_growth,
            rotation: p.center_rotation,
        });
        let params = VariantParams {
            couplings,
            generalized,
            pair,
        };
        let variant = raw.scenario.variant;
        // Builds the variant once so that missing or extra parameter tables
        // are reported here, at parse time.
        VariantRegistry::default()
            .build(&variant, &params)
            .map_err(|e| match e {
                ModelError::Invalid { field, detail } => {
                    let path = match field {
                        "variant" => "scenario.variant".to_string(),
                        "center_growth" | "center_rotation" => format!("pair_params.{field}"),
                        other => other.to_string(),
                    };
                    CliError::validation(path, detail)
                }
                other => CliError::validation("couplings", other.to_string()),
            })?;

        let init = raw.initial_state;
        let initial = if variant == "pair" {
            if init.particles.is_some() {
                return Err(CliError::validation(
                    "initial_state.particles",
                    "pair scenarios give `plus` and `minus` instead",
                ));
            }
            let plus = init
                .plus
                .ok_or_else(|| CliError::validation("initial_state.plus", "required by the pair variant"))?;
            let minus = init
                .minus
                .ok_or_else(|| CliError::validation("initial_state.minus", "required by the pair variant"))?;
            let mut s = particles(&plus, n, "initial_state.plus")?;
            let m = particles(&minus, n, "initial_state.minus")?;
            s.positions.extend(m.positions);
            s.velocities.extend(m.velocities);
            s
        } else {
            if init.plus.is_some() || init.minus.is_some() {
                return Err(CliError::validation(
                    "initial_state.plus",
                    format!("only used by the pair variant, not {variant}"),
                ));
            }
            let rows = init
                .particles
                .ok_or_else(|| CliError::validation("initial_state.particles", "missing"))?;
            particles(&rows, n, "initial_state.particles")?
        };

        let d = IntegratorConfig::default();
        let r = raw.integrator;
        let integrator = IntegratorConfig {
            t0: r.t0.unwrap_or(d.t0),
            t1: r.t1.unwrap_or(d.t1),
            sample_count: r.samples.unwrap_or(d.sample_count),
            rtol: r.rtol.unwrap_or(d.rtol),
            atol: r.atol.unwrap_or(d.atol),
            h_init: r.h_init.unwrap_or(d.h_init),
            h_min: r.h_min.unwrap_or(d.h_min),
        };
        validate_integrator(&integrator)?;

        Ok(Scenario {
            name: raw.scenario.name.unwrap_or_else(|| default_name.to_string()),
            variant,
            params,
            initial,
            integrator,
            outputs: raw.outputs,
        })
    }
}

pub fn validate_integrator(cfg: &IntegratorConfig) -> Result<(), CliError> {
    cfg.validate()
        .map_err(|e| CliError::validation("integrator", e.to_string()))
}
