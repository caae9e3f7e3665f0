//! Two-parameter grid scans, feasibility-frontier extraction, and CSV/SVG
//! export.
//!
//! Cells are evaluated independently (rayon, one task per cell) and gathered
//! into a preallocated grid, so the output never depends on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{with_unknown, Unknown};
use crate::quantities::{ExperimentConfig, PhysicalConstants};
use crate::rates::{self, ChannelId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisScale {
    #[serde(rename = "log")]
    Log,
    #[serde(rename = "linear")]
    Linear,
}

/// One sweep axis: which unknown varies, over what range, how densely.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Axis {
    pub unknown: Unknown,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn new(unknown: Unknown, min: f64, max: f64, points: usize, scale: AxisScale) -> Result<Self> {
        if !(min < max) {
            return Err(Error::config("axis", format!("min {min} must be < max {max}")));
        }
        if points < 2 {
            return Err(Error::config("axis.points", "must be >= 2"));
        }
        if scale == AxisScale::Log && !(min > 0.0) {
            return Err(Error::config("axis.min", "log scale requires min > 0"));
        }
        Ok(Axis {
            unknown,
            min,
            max,
            points,
            scale,
        })
    }

    /// Grid coordinates, linearly or geometrically spaced.
    pub fn coordinates(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                match self.scale {
                    AxisScale::Linear => self.min + t * (self.max - self.min),
                    AxisScale::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }
}

/// Sweep request: a base configuration and two axes.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub axis1: Axis,
    pub axis2: Axis,
}

/// Successful evaluation of one grid cell.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CellResult {
    pub feasible: bool,
    /// Smallest finite channel margin; `None` when every rate is zero.
    pub min_margin: Option<f64>,
    pub binding: Option<ChannelId>,
}

/// Cell outcome: evaluated, or invalid with the domain error message.
#[derive(Debug, Clone, Serialize)]
pub enum Cell {
    Ok(CellResult),
    Invalid(String),
}

/// Evaluated sweep grid. Cells are stored row-major: `cells[i1 * n2 + i2]`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    pub axis1: Axis,
    pub axis2: Axis,
    pub coords1: Vec<f64>,
    pub coords2: Vec<f64>,
    pub cells: Vec<Cell>,
}

impl SweepGrid {
    pub fn cell(&self, i1: usize, i2: usize) -> &Cell {
        &self.cells[i1 * self.coords2.len() + i2]
    }

    pub fn invalid_fraction(&self) -> f64 {
        let bad = self.cells.iter().filter(|c| matches!(c, Cell::Invalid(_))).count();
        bad as f64 / self.cells.len() as f64
    }
}

/// Evaluates the rate budget over the full grid. Per-cell domain errors are
/// recorded as invalid cells rather than aborting the sweep.
pub fn run_sweep(c: &PhysicalConstants, spec: &SweepSpec) -> Result<SweepGrid> {
    let coords1 = spec.axis1.coordinates();
    let coords2 = spec.axis2.coordinates();
    let n2 = coords2.len();
    let cells: Vec<Cell> = (0..coords1.len() * n2)
        .into_par_iter()
        .map(|idx| {
            let u1 = coords1[idx / n2];
            let u2 = coords2[idx % n2];
            evaluate_cell(c, spec, u1, u2)
        })
        .collect();
    Ok(SweepGrid {
        axis1: spec.axis1,
        axis2: spec.axis2,
        coords1,
        coords2,
        cells,
    })
}

fn evaluate_cell(c: &PhysicalConstants, spec: &SweepSpec, u1: f64, u2: f64) -> Cell {
    let result = with_unknown(&spec.base, spec.axis1.unknown, u1)
        .and_then(|cfg| with_unknown(&cfg, spec.axis2.unknown, u2))
        .and_then(|cfg| rates::rate_budget(c, &cfg));
    match result {
        Ok(budget) => Cell::Ok(CellResult {
            feasible: budget.feasible,
            min_margin: budget.min_margin(),
            binding: budget.binding_channel,
        }),
        Err(e) => Cell::Invalid(e.to_string()),
    }
}

/// Feasibility boundary: one axis2 crossing per axis1 column.
#[derive(Debug, Clone, Serialize)]
pub struct Frontier {
    /// (axis1, axis2) crossing points, sorted by axis1.
    pub points: Vec<(f64, f64)>,
    /// Columns without a crossing, with the reason.
    pub skipped: Vec<String>,
}

/// Locates the feasibility crossing in every axis1 column by bisection
/// between the straddling cells, re-evaluating the budget, to a relative
/// 1e-3 on axis2.
pub fn frontier(c: &PhysicalConstants, spec: &SweepSpec, grid: &SweepGrid) -> Result<Frontier> {
    let mut any_feasible = false;
    let mut any_infeasible = false;
    for cell in &grid.cells {
        if let Cell::Ok(r) = cell {
            if r.feasible {
                any_feasible = true;
            } else {
                any_infeasible = true;
            }
        }
    }
    if !any_feasible || !any_infeasible {
        return Err(Error::numerical(format!(
            "no feasibility boundary: every valid cell is {}",
            if any_feasible { "feasible" } else { "infeasible" }
        )));
    }

    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (i1, &u1) in grid.coords1.iter().enumerate() {
        let mut crossing = None;
        for i2 in 0..grid.coords2.len() - 1 {
            let a = grid.cell(i1, i2);
            let b = grid.cell(i1, i2 + 1);
            if let (Cell::Ok(ra), Cell::Ok(rb)) = (a, b) {
                if ra.feasible != rb.feasible {
                    crossing = Some((grid.coords2[i2], grid.coords2[i2 + 1]));
                    break;
                }
            }
        }
        match crossing {
            Some((lo, hi)) => {
                let u2 = bisect_column(c, spec, u1, lo, hi)?;
                points.push((u1, u2));
            }
            None => skipped.push(format!("axis1 = {u1:e}: no feasibility crossing in column")),
        }
    }
    Ok(Frontier { points, skipped })
}

fn bisect_column(c: &PhysicalConstants, spec: &SweepSpec, u1: f64, lo0: f64, hi0: f64) -> Result<f64> {
    let feasible_at = |u2: f64| -> Result<bool> {
        let cfg = with_unknown(&spec.base, spec.axis1.unknown, u1)?;
        let cfg = with_unknown(&cfg, spec.axis2.unknown, u2)?;
        Ok(rates::rate_budget(c, &cfg)?.feasible)
    };
    let mut lo = lo0;
    let mut hi = hi0;
    let f_lo = feasible_at(lo)?;
    let log_scale = spec.axis2.scale == AxisScale::Log;
    for _ in 0..80 {
        let done = if log_scale {
            hi / lo <= 1.0 + 1e-3
        } else {
            (hi - lo).abs() <= 1e-3 * 0.5 * (lo.abs() + hi.abs())
        };
        if done {
            break;
        }
        let mid = if log_scale { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if feasible_at(mid)? == f_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if log_scale { (lo * hi).sqrt() } else { 0.5 * (lo + hi) })
}

// ---------------------------------------------------------------------------
// exports
// ---------------------------------------------------------------------------

/// RFC-4180 CSV of the grid, row-major, full float precision.
pub fn grid_csv(grid: &SweepGrid) -> String {
    let mut out = format!(
        "axis1_{},axis2_{},valid,feasible,min_margin,binding_channel\r\n",
        grid.axis1.unknown, grid.axis2.unknown
    );
    for (i1, &u1) in grid.coords1.iter().enumerate() {
        for (i2, &u2) in grid.coords2.iter().enumerate() {
            match grid.cell(i1, i2) {
                Cell::Ok(r) => {
                    let margin = match r.min_margin {
                        Some(m) => m.to_string(),
                        None => "inf".to_string(),
                    };
                    let binding = r.binding.map(|b| b.name()).unwrap_or("");
                    out.push_str(&format!(
                        "{},{},true,{},{},{}\r\n",
                        u1, u2, r.feasible, margin, binding
                    ));
                }
                Cell::Invalid(_) => {
                    out.push_str(&format!("{},{},false,,,\r\n", u1, u2));
                }
            }
        }
    }
    out
}

/// One parsed grid CSV row; used for round-trip checks and reimports.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCsvRow {
    pub axis1: f64,
    pub axis2: f64,
    pub valid: bool,
    pub feasible: Option<bool>,
    pub min_margin: Option<f64>,
    pub binding: Option<String>,
}

/// Parses a grid CSV produced by [`grid_csv`].
pub fn read_grid_csv(text: &str) -> Result<Vec<GridCsvRow>> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if k == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::numerical(format!(
                "grid csv line {k}: expected 6 fields, got {}",
                fields.len()
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::numerical(format!("grid csv line {k}, {what}: {e}")))
        };
        let valid = fields[2] == "true";
        rows.push(GridCsvRow {
            axis1: parse(fields[0], "axis1")?,
            axis2: parse(fields[1], "axis2")?,
            valid,
            feasible: if valid { Some(fields[3] == "true") } else { None },
            min_margin: if valid { Some(parse(fields[4], "margin")?) } else { None },
            binding: if valid && !fields[5].is_empty() {
                Some(fields[5].to_string())
            } else {
                None
            },
        });
    }
    Ok(rows)
}

/// CSV of the frontier polyline.
pub fn frontier_csv(grid: &SweepGrid, frontier: &Frontier) -> String {
    let mut out = format!("axis1_{},axis2_{}\r\n", grid.axis1.unknown, grid.axis2.unknown);
    for (u1, u2) in &frontier.points {
        out.push_str(&format!("{},{}\r\n", u1, u2));
    }
    out
}

fn axis_pos(v: f64, axis: &Axis) -> f64 {
    match axis.scale {
        AxisScale::Linear => (v - axis.min) / (axis.max - axis.min),
        AxisScale::Log => (v / axis.min).ln() / (axis.max / axis.min).ln(),
    }
}

fn axis_ticks(axis: &Axis) -> Vec<f64> {
    match axis.scale {
        AxisScale::Linear => (0..5)
            .map(|k| axis.min + (axis.max - axis.min) * k as f64 / 4.0)
            .collect(),
        AxisScale::Log => {
            let lo = axis.min.log10().ceil() as i64;
            let hi = axis.max.log10().floor() as i64;
            let mut ticks: Vec<f64> = (lo..=hi).map(|e| 10f64.powi(e as i32)).collect();
            if ticks.len() > 8 {
                let stride = ticks.len().div_ceil(8);
                ticks = ticks.into_iter().step_by(stride).collect();
            }
            if ticks.is_empty() {
                ticks = vec![axis.min, axis.max];
            }
            ticks
        }
    }
}

/// SVG heat map of the feasibility grid with the frontier polyline overlaid.
/// Byte-deterministic for identical inputs.
pub fn grid_svg(grid: &SweepGrid, frontier: Option<&Frontier>) -> String {
    const W: f64 = 800.0;
    const H: f64 = 600.0;
    const L: f64 = 110.0;
    const R: f64 = 30.0;
    const T: f64 = 30.0;
    const B: f64 = 80.0;
    let pw = W - L - R;
    let ph = H - T - B;
    let x_of = |v: f64| L + axis_pos(v, &grid.axis1) * pw;
    let y_of = |v: f64| T + (1.0 - axis_pos(v, &grid.axis2)) * ph;

    // cell edges at midpoints between neighbouring coordinates
    let edges = |coords: &[f64], axis: &Axis| -> Vec<f64> {
        let mut e = Vec::with_capacity(coords.len() + 1);
        e.push(coords[0]);
        for w in coords.windows(2) {
            e.push(match axis.scale {
                AxisScale::Linear => 0.5 * (w[0] + w[1]),
                AxisScale::Log => (w[0] * w[1]).sqrt(),
            });
        }
        e.push(coords[coords.len() - 1]);
        e
    };
    let e1 = edges(&grid.coords1, &grid.axis1);
    let e2 = edges(&grid.coords2, &grid.axis2);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n");

    for (i1, _) in grid.coords1.iter().enumerate() {
        for (i2, _) in grid.coords2.iter().enumerate() {
            let color = match grid.cell(i1, i2) {
                Cell::Ok(r) if r.feasible => "#7fbf7b",
                Cell::Ok(_) => "#bdbdbd",
                Cell::Invalid(_) => "#ffffff",
            };
            let x0 = x_of(e1[i1]);
            let x1 = x_of(e1[i1 + 1]);
            let y0 = y_of(e2[i2 + 1]);
            let y1 = y_of(e2[i2]);
            svg.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>\n",
                x0,
                y0,
                x1 - x0,
                y1 - y0,
                color
            ));
        }
    }

    if let Some(fr) = frontier {
        if !fr.points.is_empty() {
            let pts: Vec<String> = fr
                .points
                .iter()
                .map(|(u1, u2)| format!("{:.2},{:.2}", x_of(*u1), y_of(*u2)))
                .collect();
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"/>\n",
                pts.join(" ")
            ));
        }
    }

    // frame
    svg.push_str(&format!(
        "<rect x=\"{L}\" y=\"{T}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#333333\"/>\n"
    ));
    // ticks and labels
    for t in axis_ticks(&grid.axis1) {
        let x = x_of(t);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333333\"/>\n",
            T + ph,
            T + ph + 6.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{t:e}</text>\n",
            T + ph + 22.0
        ));
    }
    for t in axis_ticks(&grid.axis2) {
        let y = y_of(t);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{L}\" y2=\"{y:.2}\" stroke=\"#333333\"/>\n",
            L - 6.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{t:e}</text>\n",
            L - 10.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        L + pw / 2.0,
        H - 20.0,
        grid.axis1.unknown
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {:.2})\">{}</text>\n",
        T + ph / 2.0,
        T + ph / 2.0,
        grid.axis2.unknown
    ));
    svg.push_str(&format!(
        "<text x=\"{L}\" y=\"20\" font-size=\"12\">feasible: green, infeasible: grey</text>\n"
    ));
    svg.push_str("</svg>\n");
    svg
}
