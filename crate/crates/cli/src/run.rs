//! The solve / integrate / compare / classify pipelines.

use std::path::{Path, PathBuf};
use std::time::Instant;

use solvable_plane::classify::{classify_couplings, default_tolerance, detect_period, MotionClass};
use solvable_plane::cxla::{eig, eigenvalues, DEFAULT_EIG_TOL};
use solvable_plane::exact::{similarity_trajectory, SimilaritySpec};
use solvable_plane::integrate::{compare, integrate, ComparisonReport, Trajectory};
use solvable_plane::model::alpha_matrix;
use solvable_plane::variant::{exact_trajectory, ModelVariant, VariantRegistry};
use solvable_plane::CNum;

use crate::error::CliError;
use crate::output::{fmt_f64, plot_columns, trajectory_csv, write, Report};
use crate::scenario::Scenario;

/// Relative agreement required of the initial velocity ratios before a run
/// is treated as a similarity configuration.
const SIMILARITY_RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Closed form only.
    Solve,
    /// Numerical integration only.
    Integrate,
    /// Both, plus a deviation report.
    Compare,
    /// Spectrum only.
    Classify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Integrate => "integrate",
            Mode::Compare => "compare",
            Mode::Classify => "classify",
        }
    }
}

#[derive(Debug, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub exact: Option<Trajectory>,
    pub numeric: Option<Trajectory>,
    pub comparison: Option<ComparisonReport>,
    pub classification: Option<MotionClass>,
}

pub fn run(mode: Mode, scenario: &Scenario, out_dir: &Path) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let model = VariantRegistry::default()
        .build(&scenario.variant, &scenario.params)
        .map_err(|e| CliError::validation("scenario.variant", e.to_string()))?;
    let times = scenario.integrator.sample_times();
    let mut out = RunOutcome::default();
    let mut meta = Report::default();
    meta.push("command", mode.name());
    meta.push("scenario", &scenario.name);
    meta.push("variant", &scenario.variant);
    meta.push("particles", scenario.initial.len());

    if matches!(mode, Mode::Solve | Mode::Compare) {
        let t = Instant::now();
        let flow = model.exact_flow(&scenario.initial)?;
        out.exact = Some(exact_trajectory(flow.as_ref(), &times, &scenario.variant)?);
        meta.push("exact_seconds", format!("{:.6}", t.elapsed().as_secs_f64()));
    }
    if matches!(mode, Mode::Integrate | Mode::Compare) {
        let t = Instant::now();
        let traj = integrate(model.as_ref(), &scenario.initial, &scenario.integrator, &scenario.variant)?;
        meta.push("integrate_seconds", format!("{:.6}", t.elapsed().as_secs_f64()));
        if let Some(stats) = traj.stats {
            meta.push("accepted_steps", stats.accepted);
            meta.push("rejected_steps", stats.rejected);
            meta.push("rhs_evaluations", stats.evaluations);
        }
        out.numeric = Some(traj);
    }

    if scenario.outputs.trajectory {
        if let Some(t) = &out.exact {
            out.files.push(write(out_dir, "trajectory_exact.csv", &trajectory_csv(t))?);
        }
        if let Some(t) = &out.numeric {
            out.files.push(write(out_dir, "trajectory_numeric.csv", &trajectory_csv(t))?);
        }
    }

    if let (Some(exact), Some(numeric)) = (&out.exact, &out.numeric) {
        let cmp = compare(exact, numeric)?;
        if scenario.outputs.comparison {
            let report = comparison_report(scenario, &cmp, numeric, exact);
            out.files.push(write(out_dir, "comparison.txt", &report.render())?);
        }
        out.comparison = Some(cmp);
    }

    if mode == Mode::Classify || scenario.outputs.classification {
        let traj = out.numeric.as_ref().or(out.exact.as_ref());
        let (class, report) = classification_report(scenario, model.as_ref(), traj)?;
        out.files.push(write(out_dir, "classification.txt", &report.render())?);
        out.classification = Some(class);
    }

    if scenario.outputs.plot_data {
        out.files.extend(write_plot_data(out_dir, &out)?);
    }

    meta.push("total_seconds", format!("{:.6}", started.elapsed().as_secs_f64()));
    out.files.push(write(out_dir, "run.txt", &meta.render())?);
    Ok(out)
}

fn comparison_report(scenario: &Scenario, cmp: &ComparisonReport, numeric: &Trajectory, exact: &Trajectory) -> Report {
    let cfg = &scenario.integrator;
    let mut r = Report::default();
    r.push("variant", &scenario.variant);
    r.push("samples", numeric.len());
    r.push_f64("t0", cfg.t0);
    r.push_f64("t1", cfg.t1);
    r.push_f64("rtol", cfg.rtol);
    r.push_f64("atol", cfg.atol);
    r.push_f64("max_position_abs", cmp.max_position_abs);
    r.push_f64("max_position_rel", cmp.max_position_rel);
    r.push_f64("max_velocity_abs", cmp.max_velocity_abs);
    r.push_f64("max_velocity_rel", cmp.max_velocity_rel);
    r.push_f64("time_of_max_position", cmp.time_of_max_position);
    for (j, p) in cmp.particles.iter().enumerate() {
        let k = j + 1;
        r.push_f64(format!("particle_{k}_position_abs"), p.max_position_abs);
        r.push_f64(format!("particle_{k}_position_rel"), p.max_position_rel);
        r.push_f64(format!("particle_{k}_velocity_abs"), p.max_velocity_abs);
        r.push_f64(format!("particle_{k}_velocity_rel"), p.max_velocity_rel);
        r.push_f64(format!("particle_{k}_time_of_max"), p.time_of_max_position);
    }
    if let Some(eta) = similarity_rate(scenario) {
        let spec = SimilaritySpec {
            eta,
            r0: scenario.initial.positions.clone(),
        };
        let mut worst = 0.0f64;
        let mut worst_numeric = 0.0f64;
        for ((t, e), n) in exact.times.iter().zip(&exact.states).zip(&numeric.states) {
            let s = similarity_trajectory(&spec, *t);
            for j in 0..s.len() {
                let scale = s.positions[j].norm();
                worst = worst.max((e.positions[j] - s.positions[j]).norm() / scale);
                worst_numeric = worst_numeric.max((n.positions[j] - s.positions[j]).norm() / scale);
            }
        }
        r.push("similarity_eta", format!("{} {}", fmt_f64(eta.re), fmt_f64(eta.im)));
        r.push_f64("similarity_exact_max_rel", worst);
        r.push_f64("similarity_numeric_max_rel", worst_numeric);
    }
    r
}

/// The common ratio `eta = z'_j / z_j` when the couplings have zero row sums
/// and every particle starts with the same ratio.
fn similarity_rate(scenario: &Scenario) -> Option<CNum> {
    if scenario.variant != "base" {
        return None;
    }
    let c = &scenario.params.couplings;
    let n = c.n();
    let alpha = alpha_matrix(c);
    let scale = alpha.frobenius_norm();
    let zero_rows = (0..n).all(|j| {
        let s: CNum = (0..n).map(|k| alpha[(j, k)]).sum();
        s.norm() <= 1e-12 * scale.max(1.0)
    });
    if !zero_rows {
        return None;
    }
    let s = &scenario.initial;
    let ratios: Vec<CNum> = s
        .positions
        .iter()
        .zip(&s.velocities)
        .map(|(r, v)| v.to_complex() / r.to_complex())
        .collect();
    let eta = ratios[0];
    ratios
        .iter()
        .all(|r| (r - eta).norm() <= SIMILARITY_RATIO_TOL * eta.norm().max(1.0))
        .then_some(eta)
}

fn classification_report(
    scenario: &Scenario,
    model: &dyn ModelVariant,
    traj: Option<&Trajectory>,
) -> Result<(MotionClass, Report), CliError> {
    let c = model.couplings();
    let alpha = alpha_matrix(c);
    let eigs = eigenvalues(&alpha, DEFAULT_EIG_TOL)?;
    let tol = default_tolerance(&eigs);
    let class = classify_couplings(c, &eigs, tol);

    let mut r = Report::default();
    r.push("variant", &scenario.variant);
    r.push("n", c.n());
    for (k, a) in eigs.iter().enumerate() {
        r.push(format!("eigenvalue_{}", k + 1), format!("{} {}", fmt_f64(a.re), fmt_f64(a.im)));
    }
    match eig(&alpha, DEFAULT_EIG_TOL) {
        Ok(d) => {
            r.push("diagonalizable", true);
            r.push_f64("condition_estimate", d.condition_estimate);
        }
        Err(_) => r.push("diagonalizable", false),
    }
    r.push_f64("tolerance", tol);
    r.push("summary", class.summary());
    r.push("all_damped", class.all_damped);
    r.push("has_imaginary", class.has_imaginary);
    r.push("all_imaginary", class.all_imaginary);
    r.push("completely_periodic", class.completely_periodic.is_some());
    if let Some(t) = class.completely_periodic {
        r.push_f64("period", t);
    }
    r.push("has_zero_mode", class.has_zero_mode);
    r.push("row_sums_zero", class.row_sums_zero.unwrap_or(false));
    r.push("has_unstable", class.has_unstable);

    // Period detection only applies to the base model: the generalized
    // flow's period comes from omega, and the pair centers drift.
    if let (Some(traj), Some(period), "base") = (traj, class.completely_periodic, scenario.variant.as_str()) {
        let span = traj.times.last().unwrap() - traj.times[0];
        if span >= 2.0 * period {
            match detect_period(traj, 1e-6, Some(period))? {
                Some(t) => r.push_f64("detected_period", t),
                None => r.push("detected_period", "none"),
            }
        }
    }
    Ok((class, r))
}

fn write_plot_data(dir: &Path, out: &RunOutcome) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for (label, traj) in [("exact", &out.exact), ("numeric", &out.numeric)] {
        let Some(traj) = traj else { continue };
        let n = traj.states.first().map_or(0, |s| s.len());
        for j in 0..n {
            let radius = traj.states.iter().map(|s| s.positions[j].norm());
            let name = format!("radius_{}_{label}.dat", j + 1);
            files.push(write(dir, &name, &plot_columns(&traj.times, radius))?);
        }
    }
    if let (Some(e), Some(n)) = (&out.exact, &out.numeric) {
        let count = e.states.first().map_or(0, |s| s.len());
        for j in 0..count {
            let dev = e.states.iter().zip(&n.states).map(|(a, b)| (a.positions[j] - b.positions[j]).norm());
            let name = format!("deviation_{}.dat", j + 1);
            files.push(write(dir, &name, &plot_columns(&e.times, dev))?);
        }
    }
    Ok(files)
}
