//! Scaled vectors and Hilbert-space structure.
//!
//! A scaled vector stores `ext = r * v` componentwise. Addition is plain;
//! scalar multiplication by a scaled scalar divides the plain product by `r`
//! (matching scaled number multiplication), the inner product divides by `r`,
//! and the norm is taken directly on `ext`, so norms scale linearly with `r`.
//! Scaling the whole structure this way keeps the vector space isomorphic to
//! the n-fold product of the scaled scalars; `hilbert_iso_check` probes that
//! isomorphism numerically.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charts::{check_same_universe, UniverseTag};
use crate::error::{Error, Result};
use crate::numbers::{ScaledScalar, ScalingFactor};

/// A vector of one universe, stored in external representation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledVector {
    tag: UniverseTag,
    r: ScalingFactor,
    ext: Vec<Complex64>,
}

impl ScaledVector {
    /// Wraps the value tuple `v`, storing `ext = r * v`.
    pub fn new(tag: UniverseTag, r: ScalingFactor, v: &[Complex64]) -> Result<Self> {
        let ext: Vec<Complex64> = v.iter().map(|c| c.scale(r.get())).collect();
        Self::from_external(tag, r, ext)
    }

    /// Wraps an already scaled external representation.
    pub fn from_external(tag: UniverseTag, r: ScalingFactor, ext: Vec<Complex64>) -> Result<Self> {
        if ext.is_empty() {
            return Err(Error::InvalidArgument("empty vector".into()));
        }
        if ext.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("vector component".into()));
        }
        Ok(Self { tag, r, ext })
    }

    pub fn zero(tag: UniverseTag, r: ScalingFactor, dim: usize) -> Result<Self> {
        Self::from_external(tag, r, vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn tag(&self) -> &UniverseTag {
        &self.tag
    }

    pub fn scaling(&self) -> ScalingFactor {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.ext.len()
    }

    /// External representation `r * value`.
    pub fn ext(&self) -> &[Complex64] {
        &self.ext
    }

    /// The value tuple the vector denotes, `ext / r`.
    pub fn value(&self) -> Vec<Complex64> {
        self.ext.iter().map(|c| c.unscale(self.r.get())).collect()
    }

    /// Component `i` as a scaled scalar of the same universe and factor.
    pub fn component(&self, i: usize) -> Result<ScaledScalar> {
        let ext = *self
            .ext
            .get(i)
            .ok_or_else(|| Error::InvalidArgument(format!("component {i} of {}-vector", self.dim())))?;
        ScaledScalar::from_external(self.tag.clone(), self.r, ext)
    }

    fn check_compat(&self, other: &Self) -> Result<()> {
        check_same_universe(&self.tag, &other.tag)?;
        if self.r != other.r {
            return Err(Error::ScaleMismatch(self.r.get(), other.r.get()));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let ext = self.ext.iter().zip(&other.ext).map(|(a, b)| a + b).collect();
        Self::from_external(self.tag.clone(), self.r, ext)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let ext = self.ext.iter().zip(&other.ext).map(|(a, b)| a - b).collect();
        Self::from_external(self.tag.clone(), self.r, ext)
    }

    pub fn neg(&self) -> Self {
        Self {
            tag: self.tag.clone(),
            r: self.r,
            ext: self.ext.iter().map(|c| -c).collect(),
        }
    }

    /// Scaled scalar multiplication: `ext = ext(c) * ext(v) / r` componentwise.
    pub fn scalar_mul(&self, c: &ScaledScalar) -> Result<Self> {
        check_same_universe(&self.tag, c.tag())?;
        if self.r != c.scaling() {
            return Err(Error::ScaleMismatch(self.r.get(), c.scaling().get()));
        }
        let r = self.r.get();
        let ext = self
            .ext
            .iter()
            .map(|v| (c.ext() * v).unscale(r))
            .collect();
        Self::from_external(self.tag.clone(), self.r, ext)
    }

    /// Scaled inner product, conjugate-linear in `self`:
    /// `ext = <ext(self), ext(other)> / r`.
    pub fn inner(&self, other: &Self) -> Result<ScaledScalar> {
        self.check_compat(other)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.ext.iter().zip(&other.ext) {
            acc += a.conj() * b;
        }
        ScaledScalar::from_external(self.tag.clone(), self.r, acc.unscale(self.r.get()))
    }

    /// Norm of the external representation, `r * |value|`.
    pub fn norm(&self) -> f64 {
        self.ext.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn with_tag(&self, to: &UniverseTag) -> Self {
        Self {
            tag: to.clone(),
            r: self.r,
            ext: self.ext.clone(),
        }
    }

    pub(crate) fn rescaled(&self, w: ScalingFactor) -> Result<Self> {
        let r = self.r.times(w)?;
        let ext: Vec<Complex64> = self.ext.iter().map(|c| c.scale(w.get())).collect();
        Self::from_external(self.tag.clone(), r, ext)
    }
}

/// Worst relative deviation seen while probing the isomorphism between the
/// scaled n-vector space and the n-fold product of scaled scalars.
#[derive(Debug, Clone)]
pub struct IsoReport {
    pub dim: usize,
    pub r: f64,
    pub samples: usize,
    pub max_rel_dev: f64,
}

fn rel_dev(a: Complex64, b: Complex64) -> f64 {
    let denom = a.norm().max(b.norm());
    if denom == 0.0 {
        0.0
    } else {
        (a - b).norm() / denom
    }
}

/// Checks that vector-space operations agree componentwise with scaled
/// scalar arithmetic: addition, scalar multiplication, and the inner product
/// computed both ways must coincide.
pub fn hilbert_iso_check(
    dim: usize,
    r: ScalingFactor,
    samples: usize,
    seed: u64,
) -> Result<IsoReport> {
    if dim == 0 {
        return Err(Error::InvalidArgument("isomorphism check needs dim >= 1".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("isomorphism check needs samples".into()));
    }
    let tag = UniverseTag::at(&[0.0])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Complex64 {
        Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
    };
    let mut max_rel_dev = 0.0f64;

    for _ in 0..samples {
        let va: Vec<Complex64> = (0..dim).map(|_| draw(&mut rng)).collect();
        let vb: Vec<Complex64> = (0..dim).map(|_| draw(&mut rng)).collect();
        let c = ScaledScalar::new(tag.clone(), r, draw(&mut rng))?;
        let a = ScaledVector::new(tag.clone(), r, &va)?;
        let b = ScaledVector::new(tag.clone(), r, &vb)?;

        let sum = a.add(&b)?;
        let scaled = a.scalar_mul(&c)?;
        for i in 0..dim {
            let ai = a.component(i)?;
            let bi = b.component(i)?;
            max_rel_dev = max_rel_dev.max(rel_dev(sum.component(i)?.ext(), ai.add(&bi)?.ext()));
            max_rel_dev =
                max_rel_dev.max(rel_dev(scaled.component(i)?.ext(), c.mul(&ai)?.ext()));
        }

        // Inner product through the vector route vs a chain of scaled
        // scalar products; the 1/r lives inside scaled multiplication.
        let inner_vec = a.inner(&b)?;
        let mut inner_comp = ScaledScalar::zero(tag.clone(), r);
        for i in 0..dim {
            let term = a.component(i)?.conj().mul(&b.component(i)?)?;
            inner_comp = inner_comp.add(&term)?;
        }
        max_rel_dev = max_rel_dev.max(rel_dev(inner_vec.ext(), inner_comp.ext()));
    }

    Ok(IsoReport {
        dim,
        r: r.get(),
        samples,
        max_rel_dev,
    })
}
