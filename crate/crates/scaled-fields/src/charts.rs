//! Universe tags, tagged coordinates, and shared coordinate charts.
//!
//! The manifold is flat and carries one global parameterization, so a single
//! chart definition serves every universe: the member charts of a family
//! differ only in the tag they attach to their output. Transporting a
//! coordinate tuple between universes therefore never changes its numbers.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest manifold dimension the chart presets support.
pub const MAX_DIM: usize = 4;

/// Residual tolerance for Newton inversion of forward-only charts.
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITERS: usize = 50;

/// Distance from ±1 below which a tanh-warped coordinate is treated as
/// saturated and refused rather than inverted to a garbage atanh.
const TANH_MARGIN: f64 = 1e-10;

fn check_tuple(what: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() || p.len() > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "{what} dimension {} outside 1..={MAX_DIM}",
            p.len()
        )));
    }
    if p.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(what.to_string()));
    }
    Ok(())
}

/// Identifies the universe bound to a point of the manifold.
///
/// The point is held in the fixed reference parameterization, so two tags
/// compare equal exactly when they name the same universe.
#[derive(Debug, Clone, PartialEq)]
pub struct UniverseTag {
    point: Vec<f64>,
}

impl UniverseTag {
    pub fn at(point: &[f64]) -> Result<Self> {
        check_tuple("universe point", point)?;
        Ok(Self {
            point: point.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }
}

impl fmt::Display for UniverseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U(")?;
        for (i, x) in self.point.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A coordinate tuple together with the universe it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedCoordinate {
    tag: UniverseTag,
    u: Vec<f64>,
}

impl TaggedCoordinate {
    pub fn new(tag: UniverseTag, u: Vec<f64>) -> Result<Self> {
        if u.len() != tag.dim() {
            return Err(Error::DimensionMismatch(u.len(), tag.dim()));
        }
        check_tuple("coordinate", &u)?;
        Ok(Self { tag, u })
    }

    pub fn tag(&self) -> &UniverseTag {
        &self.tag
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Componentwise difference, defined only within one universe.
    pub fn delta(&self, other: &Self) -> Result<Vec<f64>> {
        check_same_universe(&self.tag, &other.tag)?;
        Ok(self
            .u
            .iter()
            .zip(&other.u)
            .map(|(a, b)| a - b)
            .collect())
    }

    /// The coordinate shifted by `step`, staying in the same universe.
    pub fn translated(&self, step: &[f64]) -> Result<Self> {
        if step.len() != self.u.len() {
            return Err(Error::DimensionMismatch(step.len(), self.u.len()));
        }
        let shifted: Vec<f64> = self.u.iter().zip(step).map(|(a, s)| a + s).collect();
        Self::new(self.tag.clone(), shifted)
    }

    pub(crate) fn with_tag(&self, to: &UniverseTag) -> Self {
        Self {
            tag: to.clone(),
            u: self.u.clone(),
        }
    }
}

pub(crate) fn check_same_universe(a: &UniverseTag, b: &UniverseTag) -> Result<()> {
    if a != b {
        return Err(Error::CrossUniverse(a.to_string(), b.to_string()));
    }
    Ok(())
}

/// Moves a coordinate to another universe without touching its numbers.
///
/// The output tuple is bitwise identical to the input tuple; only the tag
/// changes.
pub fn transport_point(c: &TaggedCoordinate, to: &UniverseTag) -> Result<TaggedCoordinate> {
    if to.dim() != c.dim() {
        return Err(Error::DimensionMismatch(to.dim(), c.dim()));
    }
    Ok(c.with_tag(to))
}

type ForwardFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type InverseFn = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;

/// A family of charts, one member per universe, all computing the same map.
#[derive(Clone)]
pub struct ChartFamily {
    dim: usize,
    kind: ChartKind,
}

#[derive(Clone)]
enum ChartKind {
    Identity,
    Affine {
        matrix: Vec<f64>,
        inverse: Vec<f64>,
        offset: Vec<f64>,
    },
    TanhWarp {
        scale: f64,
    },
    Custom {
        forward: Arc<ForwardFn>,
        inverse: Option<Arc<InverseFn>>,
    },
}

impl fmt::Debug for ChartFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            ChartKind::Identity => "identity".to_string(),
            ChartKind::Affine { .. } => "affine".to_string(),
            ChartKind::TanhWarp { scale } => format!("tanh(scale={scale})"),
            ChartKind::Custom { inverse, .. } => {
                format!("custom(inverse={})", inverse.is_some())
            }
        };
        write!(f, "ChartFamily {{ dim: {}, kind: {kind} }}", self.dim)
    }
}

impl ChartFamily {
    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            kind: ChartKind::Identity,
        })
    }

    /// `u = A p + b` with `A` given in row-major order. `A` must be invertible.
    pub fn affine(matrix: &[f64], offset: &[f64]) -> Result<Self> {
        let dim = offset.len();
        check_dim(dim)?;
        if matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch(matrix.len(), dim * dim));
        }
        if matrix.iter().chain(offset).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("affine chart coefficients".into()));
        }
        let inverse = invert_matrix(dim, matrix)?;
        Ok(Self {
            dim,
            kind: ChartKind::Affine {
                matrix: matrix.to_vec(),
                inverse,
                offset: offset.to_vec(),
            },
        })
    }

    /// `u_i = tanh(scale * p_i)`, mapping each axis onto (-1, 1).
    pub fn tanh_warp(dim: usize, scale: f64) -> Result<Self> {
        check_dim(dim)?;
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tanh chart scale must be positive, got {scale}"
            )));
        }
        Ok(Self {
            dim,
            kind: ChartKind::TanhWarp { scale },
        })
    }

    /// User-supplied chart. Without an explicit inverse, `invert` falls back
    /// to Newton iteration seeded at the target coordinate, which assumes the
    /// forward map is smooth and not far from the identity.
    pub fn custom<F>(dim: usize, forward: F, inverse: Option<Arc<InverseFn>>) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        check_dim(dim)?;
        Ok(Self {
            dim,
            kind: ChartKind::Custom {
                forward: Arc::new(forward),
                inverse,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Chart coordinates of manifold point `p`.
    pub fn forward(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch(p.len(), self.dim));
        }
        check_tuple("manifold point", p)?;
        let u = match &self.kind {
            ChartKind::Identity => p.to_vec(),
            ChartKind::Affine { matrix, offset, .. } => {
                let mut u = mat_vec(self.dim, matrix, p);
                for (ui, bi) in u.iter_mut().zip(offset) {
                    *ui += bi;
                }
                u
            }
            ChartKind::TanhWarp { scale } => p.iter().map(|x| (scale * x).tanh()).collect(),
            ChartKind::Custom { forward, .. } => forward(p),
        };
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch(u.len(), self.dim));
        }
        check_tuple("chart coordinate", &u)?;
        Ok(u)
    }

    /// Manifold point with chart coordinates `u`.
    pub fn invert(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch(u.len(), self.dim));
        }
        check_tuple("chart coordinate", u)?;
        match &self.kind {
            ChartKind::Identity => Ok(u.to_vec()),
            ChartKind::Affine {
                inverse, offset, ..
            } => {
                let shifted: Vec<f64> = u.iter().zip(offset).map(|(ui, bi)| ui - bi).collect();
                Ok(mat_vec(self.dim, inverse, &shifted))
            }
            ChartKind::TanhWarp { scale } => u
                .iter()
                .map(|&ui| {
                    if 1.0 - ui.abs() < TANH_MARGIN {
                        Err(Error::ChartRange(format!(
                            "coordinate {ui} saturates the tanh chart"
                        )))
                    } else {
                        Ok(ui.atanh() / scale)
                    }
                })
                .collect(),
            ChartKind::Custom { forward, inverse } => match inverse {
                Some(inv) => {
                    let p = inv(u)?;
                    if p.len() != self.dim {
                        return Err(Error::DimensionMismatch(p.len(), self.dim));
                    }
                    Ok(p)
                }
                None => newton_invert(self.dim, forward.as_ref(), u),
            },
        }
    }

    /// Applies the family member for `tag` to the manifold point `p`.
    pub fn apply(&self, tag: &UniverseTag, p: &[f64]) -> Result<TaggedCoordinate> {
        if tag.dim() != self.dim {
            return Err(Error::DimensionMismatch(tag.dim(), self.dim));
        }
        TaggedCoordinate::new(tag.clone(), self.forward(p)?)
    }

    /// Recovers the manifold point from a tagged coordinate.
    pub fn invert_coordinate(&self, c: &TaggedCoordinate) -> Result<Vec<f64>> {
        self.invert(c.u())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "chart dimension {dim} outside 1..={MAX_DIM}"
        )));
    }
    Ok(())
}

fn mat_vec(dim: usize, m: &[f64], v: &[f64]) -> Vec<f64> {
    (0..dim)
        .map(|i| (0..dim).map(|j| m[i * dim + j] * v[j]).sum())
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting; small fixed dimension only.
fn invert_matrix(dim: usize, m: &[f64]) -> Result<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; dim * dim];
    for i in 0..dim {
        inv[i * dim + i] = 1.0;
    }
    for col in 0..dim {
        let pivot_row = (col..dim)
            .max_by(|&r, &s| {
                a[r * dim + col]
                    .abs()
                    .total_cmp(&a[s * dim + col].abs())
            })
            .unwrap();
        if a[pivot_row * dim + col].abs() < 1e-300 {
            return Err(Error::SingularMatrix);
        }
        if pivot_row != col {
            for j in 0..dim {
                a.swap(col * dim + j, pivot_row * dim + j);
                inv.swap(col * dim + j, pivot_row * dim + j);
            }
        }
        let pivot = a[col * dim + col];
        for j in 0..dim {
            a[col * dim + j] /= pivot;
            inv[col * dim + j] /= pivot;
        }
        for r in 0..dim {
            if r == col {
                continue;
            }
            let factor = a[r * dim + col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..dim {
                a[r * dim + j] -= factor * a[col * dim + j];
                inv[r * dim + j] -= factor * inv[col * dim + j];
            }
        }
    }
    Ok(inv)
}

/// Solves the square system in place; `a` is destroyed, `rhs` becomes x.
fn solve_linear(dim: usize, a: &mut [f64], rhs: &mut [f64]) -> Result<()> {
    for col in 0..dim {
        let pivot_row = (col..dim)
            .max_by(|&r, &s| {
                a[r * dim + col]
                    .abs()
                    .total_cmp(&a[s * dim + col].abs())
            })
            .unwrap();
        if a[pivot_row * dim + col].abs() < 1e-300 {
            return Err(Error::SingularMatrix);
        }
        if pivot_row != col {
            for j in 0..dim {
                a.swap(col * dim + j, pivot_row * dim + j);
            }
            rhs.swap(col, pivot_row);
        }
        for r in (col + 1)..dim {
            let factor = a[r * dim + col] / a[col * dim + col];
            if factor == 0.0 {
                continue;
            }
            for j in col..dim {
                a[r * dim + j] -= factor * a[col * dim + j];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    for col in (0..dim).rev() {
        let mut x = rhs[col];
        for j in (col + 1)..dim {
            x -= a[col * dim + j] * rhs[j];
        }
        rhs[col] = x / a[col * dim + col];
    }
    Ok(())
}

fn newton_invert(dim: usize, forward: &ForwardFn, target: &[f64]) -> Result<Vec<f64>> {
    let mut x = target.to_vec();
    let mut residual = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITERS {
        let fx = forward(&x);
        if fx.len() != dim {
            return Err(Error::DimensionMismatch(fx.len(), dim));
        }
        let mut rhs: Vec<f64> = fx.iter().zip(target).map(|(f, t)| f - t).collect();
        residual = rhs.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if !residual.is_finite() {
            return Err(Error::NonFinite("chart inversion residual".into()));
        }
        if residual <= NEWTON_TOL {
            return Ok(x);
        }
        let mut jac = vec![0.0; dim * dim];
        for j in 0..dim {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fp = forward(&xp);
            let fm = forward(&xm);
            for i in 0..dim {
                jac[i * dim + j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        solve_linear(dim, &mut jac, &mut rhs)?;
        for (xi, di) in x.iter_mut().zip(&rhs) {
            *xi -= di;
        }
    }
    Err(Error::NoConvergence {
        iters: NEWTON_MAX_ITERS,
        residual,
    })
}

/// Result of probing whether two universes see the same chart.
#[derive(Debug, Clone)]
pub struct SamenessReport {
    pub samples: usize,
    /// Max |phi_x(phi_y^-1(u)) - u| over all samples and components.
    pub max_coord_dev: f64,
    /// Max |phi^-1(phi(p)) - p| over the same samples.
    pub max_round_trip_dev: f64,
}

/// Samples manifold points in `sample_box` and checks that pushing a
/// coordinate through universe y's inverse chart and universe x's forward
/// chart reproduces the tuple.
pub fn same_chart_check(
    family: &ChartFamily,
    tag_x: &UniverseTag,
    tag_y: &UniverseTag,
    sample_box: &[(f64, f64)],
    samples: usize,
    seed: u64,
) -> Result<SamenessReport> {
    if sample_box.len() != family.dim() {
        return Err(Error::DimensionMismatch(sample_box.len(), family.dim()));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("sameness check needs samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_coord_dev = 0.0f64;
    let mut max_round_trip_dev = 0.0f64;
    for _ in 0..samples {
        let p: Vec<f64> = sample_box
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..=hi))
            .collect();
        let u_y = family.apply(tag_y, &p)?;
        let p_back = family.invert_coordinate(&u_y)?;
        let u_x = family.apply(tag_x, &p_back)?;
        for ((a, b), (orig, back)) in u_x.u().iter().zip(u_y.u()).zip(p.iter().zip(&p_back)) {
            max_coord_dev = max_coord_dev.max((a - b).abs());
            max_round_trip_dev = max_round_trip_dev.max((orig - back).abs());
        }
    }
    Ok(SamenessReport {
        samples,
        max_coord_dev,
        max_round_trip_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag(p: &[f64]) -> UniverseTag {
        UniverseTag::at(p).unwrap()
    }

    #[test]
    fn affine_forward_and_invert() {
        let chart = ChartFamily::affine(&[2.0], &[1.0]).unwrap();
        assert_eq!(chart.forward(&[3.0]).unwrap(), vec![7.0]);
        assert_eq!(chart.invert(&[7.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn tanh_chart_origin_and_saturation() {
        let chart = ChartFamily::tanh_warp(1, 1.0).unwrap();
        assert_eq!(chart.forward(&[0.0]).unwrap(), vec![0.0]);
        let err = chart.invert(&[0.99999999999]).unwrap_err();
        assert!(matches!(err, Error::ChartRange(_)));
    }

    #[test]
    fn singular_affine_rejected() {
        let err = ChartFamily::affine(&[1.0, 2.0, 2.0, 4.0], &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::SingularMatrix));
    }

    #[test]
    fn transport_preserves_numbers_exactly() {
        let x = tag(&[0.0, 0.0]);
        let y = tag(&[1.0, 0.0]);
        let c = TaggedCoordinate::new(y.clone(), vec![0.3, -1.7]).unwrap();
        let moved = transport_point(&c, &x).unwrap();
        assert_eq!(moved.tag(), &x);
        assert_eq!(moved.u(), c.u());
        assert_eq!(moved.u()[0].to_bits(), c.u()[0].to_bits());
        assert_eq!(moved.u()[1].to_bits(), c.u()[1].to_bits());
    }

    #[test]
    fn delta_refuses_cross_universe_operands() {
        let a = TaggedCoordinate::new(tag(&[0.0]), vec![1.0]).unwrap();
        let b = TaggedCoordinate::new(tag(&[1.0]), vec![2.0]).unwrap();
        assert!(matches!(a.delta(&b), Err(Error::CrossUniverse(_, _))));
    }

    #[test]
    fn newton_inverts_forward_only_chart() {
        // u = p + 0.1 sin(p), monotone and close to the identity.
        let chart = ChartFamily::custom(
            1,
            |p: &[f64]| vec![p[0] + 0.1 * p[0].sin()],
            None,
        )
        .unwrap();
        let u = chart.forward(&[0.8]).unwrap();
        let p = chart.invert(&u).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-10);
    }

    #[test]
    fn sameness_holds_for_presets() {
        let x = tag(&[0.0]);
        let y = tag(&[2.0]);
        for chart in [
            ChartFamily::identity(1).unwrap(),
            ChartFamily::affine(&[1.5], &[-0.25]).unwrap(),
            ChartFamily::tanh_warp(1, 1.0).unwrap(),
        ] {
            let report =
                same_chart_check(&chart, &x, &y, &[(-2.0, 2.0)], 200, 7).unwrap();
            assert!(report.max_coord_dev <= 1e-8, "{report:?}");
        }
    }

    #[test]
    fn matrix_inverse_matches_hand_computed() {
        let m = [1.0, 2.0, 3.0, 4.0];
        let inv = invert_matrix(2, &m).unwrap();
        // det = -2; inverse = [-2, 1; 1.5, -0.5].
        let expect = [-2.0, 1.0, 1.5, -0.5];
        for (a, b) in inv.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
