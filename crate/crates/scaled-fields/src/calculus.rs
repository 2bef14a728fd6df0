//! Numerical calculus over tagged charts: local and lifted integrals,
//! scaled wave packets, covariant derivatives, scaled distance elements,
//! and the step-size invariance check.
//!
//! All integrals run on tensor-product grids over a finite box. Nodes are
//! visited in a fixed lexicographic order and accumulated sequentially, so
//! every result is reproducible bit for bit. The lifted integral multiplies
//! each integrand sample by exactly one factor `e^{theta(u) - theta(ref)}`;
//! with constant theta that factor is exactly 1.0 and the lifted sum
//! collapses bitwise to the local one.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::charts::{check_same_universe, TaggedCoordinate, UniverseTag};
use crate::error::{Error, Result};
use crate::linear::ScaledVector;
use crate::numbers::{ScaledScalar, ScalingFactor, EXP_ARG_LIMIT};
use crate::theta::ThetaField;

/// Hard cap on total grid nodes, to fail fast instead of looping for hours.
pub const MAX_GRID_NODES: u128 = 1 << 26;

/// Quadrature rule on a uniform per-axis grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    Midpoint,
    Trapezoid,
    Simpson,
}

impl QuadRule {
    /// Expected order of convergence for smooth integrands.
    pub fn order(self) -> f64 {
        match self {
            QuadRule::Midpoint | QuadRule::Trapezoid => 2.0,
            QuadRule::Simpson => 4.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuadRule::Midpoint => "midpoint",
            QuadRule::Trapezoid => "trapezoid",
            QuadRule::Simpson => "simpson",
        }
    }
}

/// Integration domain, per-axis resolution, rule, and convergence target.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    bounds: Vec<(f64, f64)>,
    cells: Vec<usize>,
    rule: QuadRule,
    tolerance: f64,
}

impl QuadratureSpec {
    pub fn new(
        bounds: &[(f64, f64)],
        cells: &[usize],
        rule: QuadRule,
        tolerance: f64,
    ) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidArgument("quadrature needs at least one axis".into()));
        }
        if cells.len() != bounds.len() {
            return Err(Error::DimensionMismatch(cells.len(), bounds.len()));
        }
        for &(a, b) in bounds {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFinite("quadrature bound".into()));
            }
            if b <= a {
                return Err(Error::InvalidArgument(format!(
                    "quadrature axis [{a}, {b}] is empty"
                )));
            }
        }
        let mut total: u128 = 1;
        for &n in cells {
            if n < 2 {
                return Err(Error::InvalidArgument(format!(
                    "quadrature needs at least 2 cells per axis, got {n}"
                )));
            }
            if rule == QuadRule::Simpson && n % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "simpson rule needs even cell counts, got {n}"
                )));
            }
            total = total.saturating_mul(n as u128 + 1);
        }
        if total > MAX_GRID_NODES {
            return Err(Error::InvalidArgument(format!(
                "quadrature grid of ~{total} nodes exceeds the {MAX_GRID_NODES} node cap"
            )));
        }
        if !tolerance.is_finite() || tolerance <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "quadrature tolerance must be positive, got {tolerance}"
            )));
        }
        Ok(Self {
            bounds: bounds.to_vec(),
            cells: cells.to_vec(),
            rule,
            tolerance,
        })
    }

    /// Same box and rule with `n` cells on every axis.
    pub fn uniform(bounds: &[(f64, f64)], n: usize, rule: QuadRule, tolerance: f64) -> Result<Self> {
        Self::new(bounds, &vec![n; bounds.len()], rule, tolerance)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn rule(&self) -> QuadRule {
        self.rule
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_cells(&self, n: usize) -> Result<Self> {
        Self::uniform(&self.bounds, n, self.rule, self.tolerance)
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.bounds
            .iter()
            .zip(&self.cells)
            .map(|(&(a, b), &n)| (b - a) / n as f64)
            .product()
    }

    /// The same spec at half resolution, when that is still a valid spec.
    fn halved(&self) -> Option<Self> {
        let cells: Vec<usize> = self.cells.iter().map(|&n| n / 2).collect();
        if self.cells.iter().any(|&n| n % 2 != 0) {
            return None;
        }
        Self::new(&self.bounds, &cells, self.rule, self.tolerance).ok()
    }

    fn axis_nodes(&self, axis: usize) -> Vec<(f64, f64)> {
        let (a, b) = self.bounds[axis];
        let n = self.cells[axis];
        let h = (b - a) / n as f64;
        match self.rule {
            QuadRule::Midpoint => (0..n)
                .map(|i| (a + (i as f64 + 0.5) * h, h))
                .collect(),
            QuadRule::Trapezoid => (0..=n)
                .map(|i| {
                    let pos = if i == n { b } else { a + i as f64 * h };
                    let w = if i == 0 || i == n { 0.5 * h } else { h };
                    (pos, w)
                })
                .collect(),
            QuadRule::Simpson => (0..=n)
                .map(|i| {
                    let pos = if i == n { b } else { a + i as f64 * h };
                    let c = if i == 0 || i == n {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    (pos, c * h / 3.0)
                })
                .collect(),
        }
    }

    /// Visits every grid node in lexicographic order with its total weight.
    fn for_each_node<F>(&self, mut visit: F) -> Result<()>
    where
        F: FnMut(&[f64], f64) -> Result<()>,
    {
        let axes: Vec<Vec<(f64, f64)>> = (0..self.dim()).map(|i| self.axis_nodes(i)).collect();
        let dim = axes.len();
        let mut idx = vec![0usize; dim];
        let mut u = vec![0.0f64; dim];
        loop {
            let mut w = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                let (pos, wd) = axes[d][i];
                u[d] = pos;
                w *= wd;
            }
            visit(&u, w)?;
            let mut d = dim;
            loop {
                if d == 0 {
                    return Ok(());
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < axes[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    /// Midpoint nodes of this spec's cells, regardless of rule.
    fn for_each_cell_midpoint<F>(&self, mut visit: F) -> Result<()>
    where
        F: FnMut(&[f64]) -> Result<()>,
    {
        let mid = Self::new(&self.bounds, &self.cells, QuadRule::Midpoint, self.tolerance)?;
        mid.for_each_node(|u, _| visit(u))
    }
}

type ScalarFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;
type VectorFn = dyn Fn(&[f64]) -> Vec<Complex64> + Send + Sync;

/// Complex-valued field on the coordinates of one universe.
#[derive(Clone)]
pub struct FieldOnChart {
    tag: UniverseTag,
    eval: Arc<ScalarFn>,
}

impl FieldOnChart {
    pub fn new<F>(tag: UniverseTag, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            tag,
            eval: Arc::new(eval),
        }
    }

    pub fn tag(&self) -> &UniverseTag {
        &self.tag
    }

    pub fn eval(&self, u: &[f64]) -> Result<Complex64> {
        let v = (self.eval)(u);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite(format!("integrand at {u:?}")));
        }
        Ok(v)
    }
}

impl fmt::Debug for FieldOnChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldOnChart {{ tag: {} }}", self.tag)
    }
}

/// Vector-valued field on the coordinates of one universe.
#[derive(Clone)]
pub struct VectorFieldOnChart {
    tag: UniverseTag,
    components: usize,
    eval: Arc<VectorFn>,
}

impl VectorFieldOnChart {
    pub fn new<F>(tag: UniverseTag, components: usize, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<Complex64> + Send + Sync + 'static,
    {
        if components == 0 {
            return Err(Error::InvalidArgument("vector field needs components".into()));
        }
        Ok(Self {
            tag,
            components,
            eval: Arc::new(eval),
        })
    }

    pub fn tag(&self) -> &UniverseTag {
        &self.tag
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn eval(&self, u: &[f64]) -> Result<Vec<Complex64>> {
        let v = (self.eval)(u);
        if v.len() != self.components {
            return Err(Error::DimensionMismatch(v.len(), self.components));
        }
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite(format!("field value at {u:?}")));
        }
        Ok(v)
    }
}

impl fmt::Debug for VectorFieldOnChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "VectorFieldOnChart {{ tag: {}, components: {} }}",
            self.tag, self.components
        )
    }
}

/// Integral value with an optional step-halving error estimate.
#[derive(Debug, Clone)]
pub struct IntegralResult {
    pub integral: ScaledScalar,
    /// |I(n) - I(n/2)|, absent when the grid cannot be halved.
    pub error_estimate: Option<f64>,
}

fn quad_sum<F>(spec: &QuadratureSpec, mut term: F) -> Result<Complex64>
where
    F: FnMut(&[f64]) -> Result<Complex64>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    spec.for_each_node(|u, w| {
        let t = term(u)?;
        acc += t.scale(w);
        Ok(())
    })?;
    if !acc.re.is_finite() || !acc.im.is_finite() {
        return Err(Error::NonFinite("integral accumulator".into()));
    }
    Ok(acc)
}

/// Plain integral of `f` over the box, in the universe of `f`.
pub fn local_integral(f: &FieldOnChart, spec: &QuadratureSpec) -> Result<ScaledScalar> {
    let total = quad_sum(spec, |u| f.eval(u))?;
    ScaledScalar::from_external(f.tag().clone(), ScalingFactor::ONE, total)
}

/// The scaling exponent of `u` relative to the reference value, checked
/// against the representable range.
fn node_factor(theta: &ThetaField, u: &[f64], theta_ref: f64) -> Result<f64> {
    let dtheta = theta.value(u)? - theta_ref;
    if !dtheta.is_finite() || dtheta.abs() > EXP_ARG_LIMIT {
        return Err(Error::Overflow(dtheta));
    }
    Ok(dtheta.exp())
}

/// Lifted global integral: every integrand sample is carried to the
/// reference universe point with one factor `e^{theta(u) - theta(ref)}`.
pub fn lifted_global_integral(
    f: &FieldOnChart,
    theta: &ThetaField,
    reference: &TaggedCoordinate,
    spec: &QuadratureSpec,
) -> Result<ScaledScalar> {
    check_same_universe(f.tag(), reference.tag())?;
    if reference.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(reference.dim(), spec.dim()));
    }
    let theta_ref = theta.value(reference.u())?;
    let total = quad_sum(spec, |u| {
        let factor = node_factor(theta, u, theta_ref)?;
        Ok(f.eval(u)?.scale(factor))
    })?;
    ScaledScalar::from_external(reference.tag().clone(), ScalingFactor::ONE, total)
}

/// [`local_integral`] plus a step-halving error estimate.
pub fn local_integral_with_estimate(
    f: &FieldOnChart,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let integral = local_integral(f, spec)?;
    let error_estimate = match spec.halved() {
        Some(h) => Some((integral.ext() - local_integral(f, &h)?.ext()).norm()),
        None => None,
    };
    Ok(IntegralResult {
        integral,
        error_estimate,
    })
}

/// [`lifted_global_integral`] plus a step-halving error estimate.
pub fn lifted_global_integral_with_estimate(
    f: &FieldOnChart,
    theta: &ThetaField,
    reference: &TaggedCoordinate,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let integral = lifted_global_integral(f, theta, reference, spec)?;
    let error_estimate = match spec.halved() {
        Some(h) => {
            Some((integral.ext() - lifted_global_integral(f, theta, reference, &h)?.ext()).norm())
        }
        None => None,
    };
    Ok(IntegralResult {
        integral,
        error_estimate,
    })
}

/// One quadrature node of a grid dump.
#[derive(Debug, Clone)]
pub struct GridRow {
    pub u: Vec<f64>,
    pub weight: f64,
    pub integrand: Complex64,
    pub factor: f64,
}

/// Per-node dump of an integral: coordinates, weight, integrand sample, and
/// the scaling factor (1.0 when no theta is supplied).
pub fn grid_rows(
    f: &FieldOnChart,
    theta: Option<(&ThetaField, &TaggedCoordinate)>,
    spec: &QuadratureSpec,
) -> Result<Vec<GridRow>> {
    let theta_ref = match theta {
        Some((th, reference)) => Some((th, th.value(reference.u())?)),
        None => None,
    };
    let mut rows = Vec::new();
    spec.for_each_node(|u, w| {
        let factor = match theta_ref {
            Some((th, tref)) => node_factor(th, u, tref)?,
            None => 1.0,
        };
        rows.push(GridRow {
            u: u.to_vec(),
            weight: w,
            integrand: f.eval(u)?,
            factor,
        });
        Ok(())
    })?;
    Ok(rows)
}

/// Discretized scaled wave packet.
#[derive(Debug, Clone)]
pub struct WavePacket {
    /// Component `i` is `e^{theta(u_i) - theta(ref)} psi(u_i) * dV`.
    pub packet: ScaledVector,
    /// Riemann sum of `e^{2(theta - theta_ref)} |psi|^2` over the cells.
    pub norm_sq: f64,
    pub cells: Vec<usize>,
    pub cell_volume: f64,
}

/// Midpoint discretization of the position-basis packet
/// `integral of e^{theta(u) - theta(ref)} |u> psi(u) du`, in dimension 1 or 3.
pub fn scaled_wave_packet(
    amplitude: &FieldOnChart,
    theta: &ThetaField,
    reference: &TaggedCoordinate,
    spec: &QuadratureSpec,
) -> Result<WavePacket> {
    check_same_universe(amplitude.tag(), reference.tag())?;
    if spec.dim() != 1 && spec.dim() != 3 {
        return Err(Error::Domain(format!(
            "wave packets are defined in dimension 1 or 3, got {}",
            spec.dim()
        )));
    }
    if reference.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(reference.dim(), spec.dim()));
    }
    let theta_ref = theta.value(reference.u())?;
    let dv = spec.cell_volume();
    let mut components = Vec::new();
    let mut norm_sq = 0.0f64;
    spec.for_each_cell_midpoint(|u| {
        let factor = node_factor(theta, u, theta_ref)?;
        let psi = amplitude.eval(u)?;
        components.push(psi.scale(factor * dv));
        norm_sq += factor * factor * psi.norm_sqr() * dv;
        Ok(())
    })?;
    if !norm_sq.is_finite() {
        return Err(Error::NonFinite("wave packet norm".into()));
    }
    let packet = ScaledVector::from_external(reference.tag().clone(), ScalingFactor::ONE, components)?;
    Ok(WavePacket {
        packet,
        norm_sq,
        cells: spec.cells().to_vec(),
        cell_volume: dv,
    })
}

/// Real phase field `alpha_mu(u)` for the abelian gauge sector.
pub type PhaseFn = dyn Fn(&[f64], usize) -> f64 + Send + Sync;

/// Parallel-transport factor of the gauge sector across one grid step.
#[derive(Clone)]
pub enum GaugeLink {
    Identity,
    /// `U(u, u + h e_mu) = e^{i alpha_mu(u) h}` for a real phase field.
    U1Phase(Arc<PhaseFn>),
}

impl GaugeLink {
    pub fn identity() -> Self {
        GaugeLink::Identity
    }

    pub fn u1<F>(alpha: F) -> Self
    where
        F: Fn(&[f64], usize) -> f64 + Send + Sync + 'static,
    {
        GaugeLink::U1Phase(Arc::new(alpha))
    }

    /// Link value across `[u, u + h e_mu]`; always unit modulus.
    pub fn value(&self, u: &[f64], mu: usize, h: f64) -> Result<Complex64> {
        match self {
            GaugeLink::Identity => Ok(Complex64::new(1.0, 0.0)),
            GaugeLink::U1Phase(alpha) => {
                let a = alpha(u, mu);
                if !a.is_finite() {
                    return Err(Error::NonFinite("gauge phase".into()));
                }
                Ok(Complex64::from_polar(1.0, a * h))
            }
        }
    }
}

impl fmt::Debug for GaugeLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeLink::Identity => write!(f, "GaugeLink::Identity"),
            GaugeLink::U1Phase(_) => write!(f, "GaugeLink::U1Phase"),
        }
    }
}

/// Scaled covariant derivative along axis `mu` by forward difference:
/// `[e^{A_mu(u) h} U(u, u+h) psi(u + h e_mu) - psi(u)] / h` with `A = grad theta`.
///
/// As `h -> 0` this converges (first order) to `d_mu psi + A_mu psi` plus
/// the gauge generator term.
pub fn covariant_derivative(
    psi: &VectorFieldOnChart,
    mu: usize,
    at: &TaggedCoordinate,
    theta: &ThetaField,
    link: &GaugeLink,
    h: f64,
) -> Result<Vec<Complex64>> {
    check_same_universe(psi.tag(), at.tag())?;
    if mu >= at.dim() {
        return Err(Error::InvalidArgument(format!(
            "axis {mu} out of range for dimension {}",
            at.dim()
        )));
    }
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let u = at.u();
    let a_mu = theta.gradient(u)?[mu];
    let scale_exp = a_mu * h;
    if scale_exp.abs() > EXP_ARG_LIMIT {
        return Err(Error::Overflow(scale_exp));
    }
    let r = scale_exp.exp();
    let link_val = link.value(u, mu, h)?;
    let mut shifted = u.to_vec();
    shifted[mu] += h;
    let psi_fwd = psi.eval(&shifted)?;
    let psi_here = psi.eval(u)?;
    Ok(psi_fwd
        .iter()
        .zip(&psi_here)
        .map(|(fwd, here)| ((link_val * fwd).scale(r) - here).unscale(h))
        .collect())
}

/// Richardson-extrapolated covariant derivative, `2 D(h/2) - D(h)`,
/// cancelling the leading first-order error of the forward difference.
pub fn covariant_derivative_richardson(
    psi: &VectorFieldOnChart,
    mu: usize,
    at: &TaggedCoordinate,
    theta: &ThetaField,
    link: &GaugeLink,
    h: f64,
) -> Result<Vec<Complex64>> {
    let coarse = covariant_derivative(psi, mu, at, theta, link, h)?;
    let fine = covariant_derivative(psi, mu, at, theta, link, h / 2.0)?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| f.scale(2.0) - c)
        .collect())
}

/// Scaled representation of a squared distance element measured at `far`,
/// expressed in the universe structure local to `local`:
/// `e^{theta(far) - theta(local)} * ds2`.
pub fn scaled_distance_element(
    ds2: f64,
    theta: &ThetaField,
    far: &TaggedCoordinate,
    local: &TaggedCoordinate,
) -> Result<f64> {
    if !ds2.is_finite() || ds2 <= 0.0 {
        return Err(Error::Domain(format!(
            "distance element must be positive, got {ds2}"
        )));
    }
    let factor = theta.scale_factor(far, local)?;
    Ok(factor.get() * ds2)
}

/// One probe of the step-size invariance check.
#[derive(Debug, Clone)]
pub struct DuSample {
    pub h: f64,
    /// Scaled-increment ratio `e^{theta(u + h e_axis) - theta(u)}`.
    pub rho: f64,
    pub deviation: f64,
}

/// Report of [`du_invariance_check`].
#[derive(Debug, Clone)]
pub struct DuInvarianceReport {
    pub samples: Vec<DuSample>,
    /// Log-log slope of |rho - 1| against h; `None` when every deviation
    /// sits at the floating-point floor (e.g. constant theta).
    pub slope: Option<f64>,
}

/// Deviations below this are floating-point noise and excluded from fits.
const DU_NOISE_FLOOR: f64 = 1e-13;

/// Checks that the scaled increment `e^{dtheta} h` converges to `h`: the
/// ratio `rho(h)` tends to 1 with `|rho - 1| = O(h)` (order 2 where the
/// gradient vanishes). Fits the log-log slope over the supplied steps.
pub fn du_invariance_check(
    theta: &ThetaField,
    at: &TaggedCoordinate,
    axis: usize,
    steps: &[f64],
) -> Result<DuInvarianceReport> {
    if axis >= at.dim() {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} out of range for dimension {}",
            at.dim()
        )));
    }
    if steps.is_empty() {
        return Err(Error::InvalidArgument("invariance check needs steps".into()));
    }
    let theta_here = theta.value_at(at)?;
    let mut samples = Vec::with_capacity(steps.len());
    for &h in steps {
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
        }
        let mut step = vec![0.0; at.dim()];
        step[axis] = h;
        let shifted = at.translated(&step)?;
        let dtheta = theta.value_at(&shifted)? - theta_here;
        if dtheta.abs() > EXP_ARG_LIMIT {
            return Err(Error::Overflow(dtheta));
        }
        let rho = dtheta.exp();
        samples.push(DuSample {
            h,
            rho,
            deviation: (rho - 1.0).abs(),
        });
    }
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.deviation > DU_NOISE_FLOOR)
        .map(|s| (s.h, s.deviation))
        .collect();
    Ok(DuInvarianceReport {
        slope: log_log_slope(&points),
        samples,
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` below 2 points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}
