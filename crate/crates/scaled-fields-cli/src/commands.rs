//! Command implementations. Each returns rendered output plus an exit code;
//! errors carry the config/runtime distinction that drives exit 2 vs 1.

use std::fmt;

use serde::Serialize;

use scaled_fields::checks::{self, PropertyCheck, Requirement};
use scaled_fields::{
    covariant_derivative, covariant_derivative_richardson, du_invariance_check, grid_rows,
    lifted_global_integral_with_estimate, local_integral_with_estimate, scaled_distance_element,
    scaled_wave_packet, Error, TaggedCoordinate,
};

use crate::config::{ConfigError, RunConfig};
use crate::output::{Cell, Format, Table};

#[derive(Debug)]
pub enum CmdError {
    /// Bad configuration: exit 2.
    Config(String),
    /// Numeric or domain failure while computing: exit 1.
    Run(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Config(m) => write!(f, "config error: {m}"),
            CmdError::Run(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e.0)
    }
}

fn run_err(e: Error) -> CmdError {
    CmdError::Run(e.to_string())
}

/// Rendered output plus process exit code.
pub struct CmdOutput {
    pub rendered: String,
    pub exit: i32,
    /// Side files to write (path, contents), e.g. grid dumps.
    pub side_files: Vec<(std::path::PathBuf, String)>,
}

impl CmdOutput {
    fn ok(rendered: String) -> Self {
        Self {
            rendered,
            exit: 0,
            side_files: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    seed: u64,
    total: usize,
    failed: usize,
    checks: Vec<PropertyCheck>,
}

/// Runs every invariant suite; exit 0 iff all pass. A config adds suites for
/// its own chart and theta over the configured quadrature box.
pub fn cmd_verify(
    config: Option<&RunConfig>,
    seed: u64,
    format: Format,
) -> Result<CmdOutput, CmdError> {
    let mut all = checks::run_all(seed).map_err(run_err)?;
    if let Some(config) = config {
        let sample_box: Vec<(f64, f64)> = match &config.quadrature {
            Some(q) => q.bounds.clone(),
            None => vec![(-2.0, 2.0); config.dimension],
        };
        if config.chart.is_some() {
            let chart = config.build_chart()?;
            all.extend(
                checks::chart_suite("config", &chart, &sample_box, 300, seed).map_err(run_err)?,
            );
        }
        if config.theta.is_some() {
            let theta = config.build_theta()?;
            all.extend(
                checks::theta_suite("config", &theta, &sample_box, 200, seed).map_err(run_err)?,
            );
        }
    }
    let failed = all.iter().filter(|c| !c.passed).count();
    let rendered = match format {
        Format::Json => {
            let report = VerifyReport {
                seed,
                total: all.len(),
                failed,
                checks: all.clone(),
            };
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| CmdError::Run(format!("report serialization: {e}")))?;
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut table = Table::new(&["name", "observed", "requirement", "threshold", "passed"]);
            for c in &all {
                let requirement = match c.requirement {
                    Requirement::AtMost => "at_most",
                    Requirement::AtLeast => "at_least",
                };
                table.push(vec![
                    Cell::Str(c.name.clone()),
                    Cell::Float(c.observed),
                    Cell::Str(requirement.into()),
                    Cell::Float(c.threshold),
                    Cell::Bool(c.passed),
                ]);
            }
            table.render(Format::Csv)
        }
    };
    Ok(CmdOutput {
        rendered,
        exit: if failed == 0 { 0 } else { 1 },
        side_files: Vec::new(),
    })
}

/// Local and lifted integrals of the configured field, their step-halving
/// error estimates, and the scaled/unscaled ratio.
pub fn cmd_integrate(
    config: &RunConfig,
    cells_override: Option<usize>,
    format: Format,
) -> Result<CmdOutput, CmdError> {
    let tag = config.universe_tag()?;
    let field = config.build_field(&tag)?;
    let theta = config.build_theta()?;
    let spec = config.build_quadrature(cells_override)?;
    let reference = config.build_reference(&tag)?;

    let unscaled = local_integral_with_estimate(&field, &spec).map_err(run_err)?;
    let scaled =
        lifted_global_integral_with_estimate(&field, &theta, &reference, &spec).map_err(run_err)?;
    let u = unscaled.integral.ext();
    let s = scaled.integral.ext();
    if u.re == 0.0 && u.im == 0.0 {
        return Err(CmdError::Run(
            "unscaled integral is zero; ratio undefined".into(),
        ));
    }
    let ratio = s / u;

    let mut table = Table::new(&["quantity", "re", "im", "error_estimate"]);
    let estimate = |e: Option<f64>| Cell::Float(e.unwrap_or(f64::NAN));
    table.push(vec![
        Cell::Str("unscaled".into()),
        Cell::Float(u.re),
        Cell::Float(u.im),
        estimate(unscaled.error_estimate),
    ]);
    table.push(vec![
        Cell::Str("scaled".into()),
        Cell::Float(s.re),
        Cell::Float(s.im),
        estimate(scaled.error_estimate),
    ]);
    table.push(vec![
        Cell::Str("ratio".into()),
        Cell::Float(ratio.re),
        Cell::Float(ratio.im),
        Cell::Float(f64::NAN),
    ]);

    let mut out = CmdOutput::ok(table.render(format));
    if let Some(path) = &config.grid_dump {
        let rows = grid_rows(&field, Some((&theta, &reference)), &spec).map_err(run_err)?;
        let mut columns: Vec<String> = (0..spec.dim()).map(|i| format!("u{i}")).collect();
        columns.extend(["weight", "integrand_re", "integrand_im", "factor"].map(String::from));
        let names: Vec<&str> = columns.iter().map(String::as_str).collect();
        let mut dump = Table::new(&names);
        for row in rows {
            let mut cells: Vec<Cell> = row.u.iter().map(|&x| Cell::Float(x)).collect();
            cells.push(Cell::Float(row.weight));
            cells.push(Cell::Float(row.integrand.re));
            cells.push(Cell::Float(row.integrand.im));
            cells.push(Cell::Float(row.factor));
            dump.push(cells);
        }
        out.side_files.push((path.clone(), dump.render(Format::Csv)));
    }
    Ok(out)
}

/// Scaled covariant derivative of the configured section at one point, with
/// its Richardson-extrapolated value.
pub fn cmd_derivative(config: &RunConfig, format: Format) -> Result<CmdOutput, CmdError> {
    let tag = config.universe_tag()?;
    let psi = config.build_section(&tag)?;
    let theta = config.build_theta()?;
    let (dconfig, link) = config.build_derivative()?;
    let at = TaggedCoordinate::new(tag, dconfig.at.clone()).map_err(run_err)?;

    let plain =
        covariant_derivative(&psi, dconfig.axis, &at, &theta, &link, dconfig.step).map_err(run_err)?;
    let extrapolated =
        covariant_derivative_richardson(&psi, dconfig.axis, &at, &theta, &link, dconfig.step)
            .map_err(run_err)?;

    let mut table = Table::new(&["component", "re", "im", "richardson_re", "richardson_im"]);
    for (i, (d, r)) in plain.iter().zip(&extrapolated).enumerate() {
        table.push(vec![
            Cell::Int(i as i64),
            Cell::Float(d.re),
            Cell::Float(d.im),
            Cell::Float(r.re),
            Cell::Float(r.im),
        ]);
    }
    Ok(CmdOutput::ok(table.render(format)))
}

/// Midpoint discretization of the scaled wave packet; one row per cell with
/// the component and its contribution to the squared norm.
pub fn cmd_wavepacket(
    config: &RunConfig,
    cells_override: Option<usize>,
    format: Format,
) -> Result<CmdOutput, CmdError> {
    let tag = config.universe_tag()?;
    let amplitude = config.build_field(&tag)?;
    let theta = config.build_theta()?;
    let spec = config.build_quadrature(cells_override)?;
    let reference = config.build_reference(&tag)?;

    let packet = scaled_wave_packet(&amplitude, &theta, &reference, &spec).map_err(run_err)?;
    let dv = packet.cell_volume;
    let mut table = Table::new(&["index", "re", "im", "norm_contribution"]);
    for (i, c) in packet.packet.ext().iter().enumerate() {
        table.push(vec![
            Cell::Int(i as i64),
            Cell::Float(c.re),
            Cell::Float(c.im),
            Cell::Float(c.norm_sqr() / dv),
        ]);
    }
    Ok(CmdOutput::ok(table.render(format)))
}

/// Step-invariance samples: the scaled-increment ratio and its deviation
/// from 1 for a halving sequence of steps, plus the fitted slope (JSON).
pub fn cmd_du_check(config: &RunConfig, format: Format) -> Result<CmdOutput, CmdError> {
    let tag = config.universe_tag()?;
    let theta = config.build_theta()?;
    let (dconfig, steps) = config.build_du_check()?;
    let at = TaggedCoordinate::new(tag, dconfig.at.clone()).map_err(run_err)?;

    let report = du_invariance_check(&theta, &at, dconfig.axis, &steps).map_err(run_err)?;
    let mut table = Table::new(&["h", "rho", "deviation"]);
    for s in &report.samples {
        table.push(vec![
            Cell::Float(s.h),
            Cell::Float(s.rho),
            Cell::Float(s.deviation),
        ]);
    }
    let rendered = match format {
        Format::Csv => table.render(format),
        Format::Json => {
            let slope = match report.slope {
                Some(s) => crate::fmt_f64(s),
                None => "null".into(),
            };
            format!("{{\"slope\": {slope}, \"samples\": {}}}\n", table.render(format).trim_end())
        }
    };
    Ok(CmdOutput::ok(rendered))
}

/// Expansion-history table: theta, the scale factor relative to the present
/// age, and the scaled distance element along the configured time grid.
pub fn cmd_cosmo(config: &RunConfig, format: Format) -> Result<CmdOutput, CmdError> {
    let tag = config.universe_tag()?;
    let theta = config.build_theta()?;
    let (cconfig, grid) = config.build_cosmo()?;
    let present = TaggedCoordinate::new(tag.clone(), vec![cconfig.t_present]).map_err(run_err)?;

    let mut table = Table::new(&["t", "theta", "factor", "scaled_ds2"]);
    for &t in &grid {
        let here = TaggedCoordinate::new(tag.clone(), vec![t]).map_err(run_err)?;
        let value = theta.value_at(&here).map_err(run_err)?;
        let factor = theta.scale_factor(&here, &present).map_err(run_err)?.get();
        let ds2 = scaled_distance_element(cconfig.ds2, &theta, &here, &present).map_err(run_err)?;
        table.push(vec![
            Cell::Float(t),
            Cell::Float(value),
            Cell::Float(factor),
            Cell::Float(ds2),
        ]);
    }
    Ok(CmdOutput::ok(table.render(format)))
}
