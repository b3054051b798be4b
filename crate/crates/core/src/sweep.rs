//! Parameter sweeps and their CSV / JSON serialization.

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::f64::consts::PI;

use crate::closed_form::{mean_photon_final, postselect_probability, wigner_closed};
use crate::error::{Error, Result};
use crate::model::{InteractionConfig, ThermalPointer, P_FLOOR};
use crate::numeric::linspace;

/// Cross-phase per photon used for the published operating points.
pub const PUBLISHED_PHI0: f64 = 2.0 * PI * 1e-5;

/// Pointer parameters of the published operating points.
pub const PUBLISHED_Z: [f64; 3] = [0.001, 0.5, 0.99999];

/// A named column; `None` marks a cell where postselection is degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis_values: Vec<f64>,
    pub columns: Vec<Column>,
}

impl SweepResult {
    pub fn new(axis_name: impl Into<String>, axis_values: Vec<f64>, columns: Vec<Column>) -> Result<Self> {
        let len = axis_values.len();
        if let Some(bad) = columns.iter().find(|c| c.values.len() != len) {
            return Err(Error::invalid(format!(
                "column {} has {} values, axis has {len}",
                bad.name,
                bad.values.len()
            )));
        }
        Ok(Self {
            axis_name: axis_name.into(),
            axis_values,
            columns,
        })
    }

    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// CSV with a header line, 17 significant digits, `,` separators and LF line ends.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.axis_name);
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.name);
        }
        out.push('\n');
        for (i, x) in self.axis_values.iter().enumerate() {
            out.push_str(&format_number(*x));
            for c in &self.columns {
                out.push(',');
                if let Some(v) = c.values[i] {
                    out.push_str(&format_number(v));
                }
            }
            out.push('\n');
        }
        out
    }

    /// `{"axis": {"name", "values"}, "columns": {name: [..]}}`, degenerate cells as `null`.
    pub fn to_json(&self) -> String {
        let mut columns = Map::new();
        for c in &self.columns {
            let vals: Vec<Value> = c.values.iter().map(|v| json_number(*v)).collect();
            columns.insert(c.name.clone(), Value::Array(vals));
        }
        let axis_vals: Vec<Value> = self.axis_values.iter().map(|v| json_number(Some(*v))).collect();
        let doc = json!({
            "axis": { "name": self.axis_name, "values": axis_vals },
            "columns": columns,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("sweep serializes");
        s.push('\n');
        s
    }
}

/// Seventeen significant digits in scientific notation; round-trips exactly.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn json_number(v: Option<f64>) -> Value {
    v.and_then(serde_json::Number::from_f64)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn fail_if_all_empty(result: &SweepResult, key: &str) -> Result<()> {
    let col = result.column(key).unwrap_or(&[]);
    if !col.is_empty() && col.iter().all(Option::is_none) {
        return Err(Error::DegeneratePostselection { probability: 0.0 });
    }
    Ok(())
}

struct Cell {
    p: f64,
    mean: Option<(f64, f64)>,
}

fn evaluate_cell(z: f64, cfg: &InteractionConfig) -> Result<Cell> {
    let pointer = ThermalPointer::new(z)?;
    let p = postselect_probability(&pointer, cfg);
    let mean = if p > P_FLOOR && z > 0.0 {
        Some(mean_photon_final(&pointer, cfg)?)
    } else {
        None
    };
    Ok(Cell { p, mean })
}

fn cells_to_result(axis: &str, grid: Vec<f64>, cells: Vec<Cell>) -> Result<SweepResult> {
    let p = cells.iter().map(|c| Some(c.p)).collect();
    let mean = cells.iter().map(|c| c.mean.map(|m| m.0)).collect();
    let ratio = cells.iter().map(|c| c.mean.map(|m| m.1)).collect();
    let result = SweepResult::new(
        axis,
        grid,
        vec![
            Column { name: "P".into(), values: p },
            Column { name: "n_bar_f".into(), values: mean },
            Column { name: "R".into(), values: ratio },
        ],
    )?;
    fail_if_all_empty(&result, "R")?;
    Ok(result)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("sweep grid is empty"));
    }
    Ok(())
}

/// `P`, `n̄_f` and `R` as functions of the pointer parameter `z`.
pub fn sweep_z(phi0: f64, theta: f64, z_grid: &[f64]) -> Result<SweepResult> {
    check_grid(z_grid)?;
    let cfg = InteractionConfig::new(phi0, theta)?;
    let cells = z_grid
        .par_iter()
        .map(|&z| evaluate_cell(z, &cfg))
        .collect::<Result<Vec<_>>>()?;
    cells_to_result("z", z_grid.to_vec(), cells)
}

/// `P`, `n̄_f` and `R` as functions of the phase-shifter angle.
pub fn sweep_theta(z: f64, phi0: f64, theta_grid: &[f64]) -> Result<SweepResult> {
    check_grid(theta_grid)?;
    ThermalPointer::new(z)?;
    let cells = theta_grid
        .par_iter()
        .map(|&theta| evaluate_cell(z, &InteractionConfig::new(phi0, theta)?))
        .collect::<Result<Vec<_>>>()?;
    cells_to_result("theta", theta_grid.to_vec(), cells)
}

/// Slice `W(x, p)` for `x` on `points` evenly spaced values in `[-window, window]`.
pub fn wigner_grid(z: f64, phi0: f64, theta: f64, window: f64, points: usize, p: f64) -> Result<SweepResult> {
    if points == 0 || !(window > 0.0 && window.is_finite()) {
        return Err(Error::invalid("wigner grid needs points > 0 and a finite window > 0"));
    }
    let pointer = ThermalPointer::new(z)?;
    let cfg = InteractionConfig::new(phi0, theta)?;
    let xs = linspace(-window, window, points);
    let values = xs
        .par_iter()
        .map(|&x| match wigner_closed(&pointer, &cfg, x, p) {
            Ok(w) => Ok(Some(w)),
            Err(Error::DegeneratePostselection { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    let result = SweepResult::new("x", xs, vec![Column { name: "W".into(), values }])?;
    fail_if_all_empty(&result, "W")?;
    Ok(result)
}

/// The published operating points: `P`, `n̄_f`, `R` at `φ₀ = 2π·10⁻⁵`, `θ = 0`.
pub fn reproduce() -> Result<SweepResult> {
    sweep_z(PUBLISHED_PHI0, 0.0, &PUBLISHED_Z)
}

/// Evenly spaced angles `-π + 2πk/count`, `k = 1..=count`, covering `(-π, π]`.
/// When `count` is even the grid contains `θ = 0`.
pub fn theta_grid(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| {
            if 2 * k == count {
                0.0
            } else {
                -PI + 2.0 * PI * k as f64 / count as f64
            }
        })
        .collect()
}

/// Angle of the largest `R(θ)` on a uniform grid of `count` angles, with that `R`.
pub fn ratio_argmax_theta(z: f64, phi0: f64, count: usize) -> Result<(f64, f64)> {
    let sweep = sweep_theta(z, phi0, &theta_grid(count))?;
    let ratio = sweep.column("R").expect("R column");
    sweep
        .axis_values
        .iter()
        .zip(ratio)
        .filter_map(|(t, r)| r.map(|r| (*t, r)))
        .fold(None, |best: Option<(f64, f64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
        .ok_or(Error::DegeneratePostselection { probability: 0.0 })
}
