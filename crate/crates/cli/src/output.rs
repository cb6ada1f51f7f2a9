//! Trajectory CSVs, key-value reports and two-column plot data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use solvable_plane::integrate::Trajectory;

use crate::error::CliError;

/// Header `t,x_1,y_1,vx_1,vy_1,...` for `n` particles.
pub fn csv_header(n: usize) -> String {
    let mut h = String::from("t");
    for j in 1..=n {
        write!(h, ",x_{j},y_{j},vx_{j},vy_{j}").unwrap();
    }
    h
}

/// Round-trip exact formatting: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.states.first().map_or(0, |s| s.len());
    let mut out = csv_header(n);
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        out.push_str(&fmt_f64(*t));
        for (r, v) in s.positions.iter().zip(&s.velocities) {
            for x in [r.x, r.y, v.x, v.y] {
                out.push(',');
                out.push_str(&fmt_f64(x));
            }
        }
        out.push('\n');
    }
    out
}

/// Ordered `key: value` lines.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }

    /// Parses text produced by [`Report::render`].
    pub fn parse(text: &str) -> Self {
        let lines = text
            .lines()
            .filter_map(|l| l.split_once(": "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self { lines }
    }
}

/// Two-column `t value` data.
pub fn plot_columns(times: &[f64], values: impl Iterator<Item = f64>) -> String {
    times
        .iter()
        .zip(values)
        .map(|(t, v)| format!("{} {}\n", fmt_f64(*t), fmt_f64(v)))
        .collect()
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<std::path::PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}
