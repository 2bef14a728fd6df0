//! Scaled real and complex numbers.
//!
//! A scaled number stores the external representation `ext = r * c` of the
//! value `c` it denotes. Addition and subtraction act on `ext` unchanged;
//! multiplication divides its plain product by `r` and division multiplies
//! its plain quotient by `r`, so the map `c -> r*c` is a field isomorphism.
//! At `r = 1` every operation collapses bitwise to ordinary arithmetic.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::charts::{check_same_universe, UniverseTag};
use crate::error::{Error, Result};

/// Largest exponent magnitude accepted when deriving a factor from `exp`;
/// beyond it `exp` overflows to infinity or underflows to zero.
pub const EXP_ARG_LIMIT: f64 = 709.0;

/// Strictly positive, finite scaling factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFactor(f64);

impl ScalingFactor {
    pub const ONE: ScalingFactor = ScalingFactor(1.0);

    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::InvalidScale(r));
        }
        Ok(Self(r))
    }

    /// `e^{dtheta}`, refusing exponents outside the representable range.
    pub fn from_log(dtheta: f64) -> Result<Self> {
        if !dtheta.is_finite() || dtheta.abs() > EXP_ARG_LIMIT {
            return Err(Error::Overflow(dtheta));
        }
        Self::new(dtheta.exp())
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn times(self, other: Self) -> Result<Self> {
        Self::new(self.0 * other.0)
    }
}

impl fmt::Display for ScalingFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether a scalar is known to lie in the real subfield.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumberKind {
    Real,
    Complex,
}

impl NumberKind {
    fn join(a: NumberKind, b: NumberKind) -> NumberKind {
        if a == NumberKind::Real && b == NumberKind::Real {
            NumberKind::Real
        } else {
            NumberKind::Complex
        }
    }
}

/// A number of one universe, stored in external representation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledScalar {
    tag: UniverseTag,
    r: ScalingFactor,
    ext: Complex64,
    kind: NumberKind,
}

impl ScaledScalar {
    /// Wraps the value `c`, storing `ext = r * c`.
    pub fn new(tag: UniverseTag, r: ScalingFactor, c: Complex64) -> Result<Self> {
        Self::build(tag, r, c.scale(r.get()), NumberKind::Complex)
    }

    /// Real-subfield variant of [`ScaledScalar::new`].
    pub fn new_real(tag: UniverseTag, r: ScalingFactor, x: f64) -> Result<Self> {
        Self::build(tag, r, Complex64::new(r.get() * x, 0.0), NumberKind::Real)
    }

    /// Wraps an already scaled external representation.
    pub fn from_external(tag: UniverseTag, r: ScalingFactor, ext: Complex64) -> Result<Self> {
        Self::build(tag, r, ext, NumberKind::Complex)
    }

    /// The additive identity; its external representation is 0.
    pub fn zero(tag: UniverseTag, r: ScalingFactor) -> Self {
        Self {
            tag,
            r,
            ext: Complex64::new(0.0, 0.0),
            kind: NumberKind::Real,
        }
    }

    /// The multiplicative identity; its external representation is `r`.
    pub fn one(tag: UniverseTag, r: ScalingFactor) -> Self {
        Self {
            tag,
            r,
            ext: Complex64::new(r.get(), 0.0),
            kind: NumberKind::Real,
        }
    }

    fn build(tag: UniverseTag, r: ScalingFactor, ext: Complex64, kind: NumberKind) -> Result<Self> {
        if !ext.re.is_finite() || !ext.im.is_finite() {
            return Err(Error::NonFinite("scalar".into()));
        }
        let kind = if kind == NumberKind::Real && ext.im == 0.0 {
            NumberKind::Real
        } else {
            NumberKind::Complex
        };
        Ok(Self { tag, r, ext, kind })
    }

    pub fn tag(&self) -> &UniverseTag {
        &self.tag
    }

    pub fn scaling(&self) -> ScalingFactor {
        self.r
    }

    /// External representation `r * value`.
    pub fn ext(&self) -> Complex64 {
        self.ext
    }

    /// The value the scalar denotes, `ext / r`.
    pub fn value(&self) -> Complex64 {
        self.ext.unscale(self.r.get())
    }

    pub fn kind(&self) -> NumberKind {
        self.kind
    }

    fn check_compat(&self, other: &Self) -> Result<()> {
        check_same_universe(&self.tag, &other.tag)?;
        if self.r != other.r {
            return Err(Error::ScaleMismatch(self.r.get(), other.r.get()));
        }
        Ok(())
    }

    fn derived(&self, ext: Complex64, kind: NumberKind) -> Result<Self> {
        Self::build(self.tag.clone(), self.r, ext, kind)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        self.derived(self.ext + other.ext, NumberKind::join(self.kind, other.kind))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        self.derived(self.ext - other.ext, NumberKind::join(self.kind, other.kind))
    }

    /// Scaled product: `ext = ext(a) * ext(b) / r`, so values multiply.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let ext = (self.ext * other.ext).unscale(self.r.get());
        self.derived(ext, NumberKind::join(self.kind, other.kind))
    }

    /// Scaled quotient: `ext = r * ext(a) / ext(b)`, so values divide.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        if other.ext.re == 0.0 && other.ext.im == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let ext = (self.ext / other.ext).scale(self.r.get());
        self.derived(ext, NumberKind::join(self.kind, other.kind))
    }

    pub fn neg(&self) -> Self {
        Self {
            tag: self.tag.clone(),
            r: self.r,
            ext: -self.ext,
            kind: self.kind,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            tag: self.tag.clone(),
            r: self.r,
            ext: self.ext.conj(),
            kind: self.kind,
        }
    }

    /// Applies an analytic function through the scaling isomorphism:
    /// the result represents `f(value)`, stored as `r * f(ext / r)`.
    pub fn apply_analytic(&self, f: &AnalyticFn) -> Result<Self> {
        let out = f.eval(self.value());
        if !out.re.is_finite() || !out.im.is_finite() {
            return Err(Error::Domain(format!(
                "analytic function produced non-finite output at {}",
                self.value()
            )));
        }
        let kind = if self.kind == NumberKind::Real && out.im == 0.0 {
            NumberKind::Real
        } else {
            NumberKind::Complex
        };
        self.derived(out.scale(self.r.get()), kind)
    }

    pub(crate) fn with_tag(&self, to: &UniverseTag) -> Self {
        Self {
            tag: to.clone(),
            r: self.r,
            ext: self.ext,
            kind: self.kind,
        }
    }

    pub(crate) fn rescaled(&self, w: ScalingFactor) -> Result<Self> {
        let r = self.r.times(w)?;
        let ext = self.ext.scale(w.get());
        if !ext.re.is_finite() || !ext.im.is_finite() {
            return Err(Error::NonFinite("rescaled scalar".into()));
        }
        Ok(Self {
            tag: self.tag.clone(),
            r,
            ext,
            kind: self.kind,
        })
    }
}

type CustomFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// Entire functions that can be pushed through the scaling isomorphism.
#[derive(Clone)]
pub enum AnalyticFn {
    /// Coefficients in ascending order of degree.
    Polynomial(Vec<Complex64>),
    Exp,
    Sin,
    Cos,
    Custom(Arc<CustomFn>),
}

impl AnalyticFn {
    pub fn identity() -> Self {
        AnalyticFn::Polynomial(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    pub fn real_polynomial(coeffs: &[f64]) -> Self {
        AnalyticFn::Polynomial(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            AnalyticFn::Polynomial(coeffs) => horner(coeffs, z),
            AnalyticFn::Exp => z.exp(),
            AnalyticFn::Sin => z.sin(),
            AnalyticFn::Cos => z.cos(),
            AnalyticFn::Custom(f) => f(z),
        }
    }
}

impl fmt::Debug for AnalyticFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticFn::Polynomial(c) => write!(f, "Polynomial(deg {})", c.len().saturating_sub(1)),
            AnalyticFn::Exp => write!(f, "Exp"),
            AnalyticFn::Sin => write!(f, "Sin"),
            AnalyticFn::Cos => write!(f, "Cos"),
            AnalyticFn::Custom(_) => write!(f, "Custom"),
        }
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + *c;
    }
    acc
}
