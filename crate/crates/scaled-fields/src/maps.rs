//! Maps between the structures of different universes.
//!
//! Every structure map factors as a value-preserving transport (change the
//! tag and nothing else) followed by a scaling (multiply the external
//! representation and the recorded factor by the same `w`). By construction
//! the value is invariant on both legs: the transport copies bits, and the
//! scaling cancels in `ext / r`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charts::{check_same_universe, TaggedCoordinate, UniverseTag};
use crate::error::{Error, Result};
use crate::linear::ScaledVector;
use crate::numbers::{ScaledScalar, ScalingFactor};
use crate::theta::ThetaField;

/// Structures that carry a universe tag and can be re-tagged bit-for-bit.
pub trait Tagged: Sized {
    fn universe_tag(&self) -> &UniverseTag;
    fn retagged(&self, to: &UniverseTag) -> Self;
}

impl Tagged for ScaledScalar {
    fn universe_tag(&self) -> &UniverseTag {
        self.tag()
    }
    fn retagged(&self, to: &UniverseTag) -> Self {
        self.with_tag(to)
    }
}

impl Tagged for ScaledVector {
    fn universe_tag(&self) -> &UniverseTag {
        self.tag()
    }
    fn retagged(&self, to: &UniverseTag) -> Self {
        self.with_tag(to)
    }
}

impl Tagged for TaggedCoordinate {
    fn universe_tag(&self) -> &UniverseTag {
        self.tag()
    }
    fn retagged(&self, to: &UniverseTag) -> Self {
        self.with_tag(to)
    }
}

/// Value-preserving map: the output is the input with the tag replaced and
/// every number bitwise identical.
pub fn same_value_map<T: Tagged>(x: &T, to: &UniverseTag) -> T {
    x.retagged(to)
}

/// Rescales a structure in place: `ext` and the recorded factor are both
/// multiplied by `w`, so the denoted value does not move.
pub fn rescale_scalar(s: &ScaledScalar, w: ScalingFactor) -> Result<ScaledScalar> {
    s.rescaled(w)
}

pub fn rescale_vector(v: &ScaledVector, w: ScalingFactor) -> Result<ScaledVector> {
    v.rescaled(w)
}

/// Scaled representation of `s` at `at`, relative to `reference`: the
/// structure is rescaled by `e^{theta(at) - theta(reference)}`.
///
/// All three tags must agree; transport across universes first.
pub fn scaled_representation(
    s: &ScaledScalar,
    theta: &ThetaField,
    at: &TaggedCoordinate,
    reference: &TaggedCoordinate,
) -> Result<ScaledScalar> {
    check_same_universe(s.tag(), at.tag())?;
    check_same_universe(at.tag(), reference.tag())?;
    let w = theta.scale_factor(at, reference)?;
    s.rescaled(w)
}

/// Vector counterpart of [`scaled_representation`].
pub fn scaled_vector_representation(
    v: &ScaledVector,
    theta: &ThetaField,
    at: &TaggedCoordinate,
    reference: &TaggedCoordinate,
) -> Result<ScaledVector> {
    check_same_universe(v.tag(), at.tag())?;
    check_same_universe(at.tag(), reference.tag())?;
    let w = theta.scale_factor(at, reference)?;
    v.rescaled(w)
}

/// A map between universe structures, already factored into its transport
/// and scaling parts.
#[derive(Debug, Clone)]
pub struct StructureMap {
    from: UniverseTag,
    to: UniverseTag,
    scaling: ScalingFactor,
}

impl StructureMap {
    /// Transport only: `w = 1`.
    pub fn value_preserving(from: UniverseTag, to: UniverseTag) -> Self {
        Self {
            from,
            to,
            scaling: ScalingFactor::ONE,
        }
    }

    /// Transport followed by rescaling with `w`.
    pub fn with_scaling(from: UniverseTag, to: UniverseTag, w: ScalingFactor) -> Self {
        Self {
            from,
            to,
            scaling: w,
        }
    }

    /// Map whose scaling is read off a theta field at two coordinates of the
    /// target universe.
    pub fn from_theta(
        from: UniverseTag,
        theta: &ThetaField,
        at: &TaggedCoordinate,
        reference: &TaggedCoordinate,
    ) -> Result<Self> {
        check_same_universe(at.tag(), reference.tag())?;
        let w = theta.scale_factor(at, reference)?;
        Ok(Self {
            from,
            to: at.tag().clone(),
            scaling: w,
        })
    }

    pub fn source(&self) -> &UniverseTag {
        &self.from
    }

    pub fn target(&self) -> &UniverseTag {
        &self.to
    }

    pub fn scaling(&self) -> ScalingFactor {
        self.scaling
    }

    /// The two factors of the map, transport first.
    pub fn factors(&self) -> (StructureMap, StructureMap) {
        (
            StructureMap::value_preserving(self.from.clone(), self.to.clone()),
            StructureMap::with_scaling(self.to.clone(), self.to.clone(), self.scaling),
        )
    }

    pub fn apply_scalar(&self, s: &ScaledScalar) -> Result<ScaledScalar> {
        check_same_universe(s.tag(), &self.from)?;
        same_value_map(s, &self.to).rescaled(self.scaling)
    }

    pub fn apply_vector(&self, v: &ScaledVector) -> Result<ScaledVector> {
        check_same_universe(v.tag(), &self.from)?;
        same_value_map(v, &self.to).rescaled(self.scaling)
    }
}

/// Worst deviation seen while checking that applying a structure map agrees
/// with applying its transport and scaling factors in sequence.
#[derive(Debug, Clone)]
pub struct FactorizationReport {
    pub pairs: usize,
    pub max_rel_dev: f64,
    /// Whether constant theta collapsed every map to bitwise transport.
    pub constant_theta_bitwise: bool,
}

fn rel_dev(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs());
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

/// Draws random scalars and coordinate pairs in `sample_box`, builds the
/// theta-induced structure map for each pair, and compares the one-shot
/// application against the two-leg factored application.
pub fn factorization_check(
    theta: &ThetaField,
    sample_box: &[(f64, f64)],
    pairs: usize,
    seed: u64,
) -> Result<FactorizationReport> {
    if pairs == 0 {
        return Err(Error::InvalidArgument("factorization check needs pairs".into()));
    }
    let dim = sample_box.len();
    if dim == 0 {
        return Err(Error::InvalidArgument("factorization check needs a sample box".into()));
    }
    let tag_from = UniverseTag::at(&vec![0.0; dim])?;
    let tag_to = UniverseTag::at(&vec![1.0; dim])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel_dev = 0.0f64;
    let mut constant_theta_bitwise = true;

    for _ in 0..pairs {
        let draw_coord = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            sample_box
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..=hi))
                .collect()
        };
        let at = TaggedCoordinate::new(tag_to.clone(), draw_coord(&mut rng))?;
        let reference = TaggedCoordinate::new(tag_to.clone(), draw_coord(&mut rng))?;
        let value = num_complex::Complex64::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
        );
        let r = ScalingFactor::new(10f64.powf(rng.random_range(-2.0..2.0)))?;
        let s = ScaledScalar::new(tag_from.clone(), r, value)?;

        let map = StructureMap::from_theta(tag_from.clone(), theta, &at, &reference)?;
        let direct = map.apply_scalar(&s)?;

        let (transport, scaling) = map.factors();
        let staged = scaling.apply_scalar(&transport.apply_scalar(&s)?)?;

        max_rel_dev = max_rel_dev.max(rel_dev(direct.ext().re, staged.ext().re));
        max_rel_dev = max_rel_dev.max(rel_dev(direct.ext().im, staged.ext().im));
        max_rel_dev = max_rel_dev.max(rel_dev(
            direct.scaling().get(),
            staged.scaling().get(),
        ));

        if map.scaling() == ScalingFactor::ONE {
            let transported = transport.apply_scalar(&s)?;
            let same_bits = direct.ext().re.to_bits() == transported.ext().re.to_bits()
                && direct.ext().im.to_bits() == transported.ext().im.to_bits()
                && direct.scaling().get().to_bits() == transported.scaling().get().to_bits();
            constant_theta_bitwise &= same_bits;
        }
    }

    Ok(FactorizationReport {
        pairs,
        max_rel_dev,
        constant_theta_bitwise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn tag(p: &[f64]) -> UniverseTag {
        UniverseTag::at(p).unwrap()
    }

    fn coord(t: &UniverseTag, u: &[f64]) -> TaggedCoordinate {
        TaggedCoordinate::new(t.clone(), u.to_vec()).unwrap()
    }

    #[test]
    fn same_value_map_copies_bits() {
        let from = tag(&[0.0]);
        let to = tag(&[1.0]);
        let s = ScaledScalar::new(
            from.clone(),
            ScalingFactor::new(2.0).unwrap(),
            Complex64::new(0.1 + 0.2, -7.25),
        )
        .unwrap();
        let moved = same_value_map(&s, &to);
        assert_eq!(moved.tag(), &to);
        assert_eq!(moved.ext().re.to_bits(), s.ext().re.to_bits());
        assert_eq!(moved.ext().im.to_bits(), s.ext().im.to_bits());
        assert_eq!(moved.scaling(), s.scaling());
    }

    #[test]
    fn scaled_representation_moves_ext_and_r_together() {
        let t = tag(&[0.0]);
        let theta = ThetaField::linear(&[1.0]).unwrap();
        let at = coord(&t, &[2.0f64.ln()]);
        let reference = coord(&t, &[0.0]);
        let s = ScaledScalar::new_real(t.clone(), ScalingFactor::new(1.5).unwrap(), 2.0).unwrap();
        let out = scaled_representation(&s, &theta, &at, &reference).unwrap();
        assert!((out.ext().re - 6.0).abs() < 1e-12);
        assert!((out.scaling().get() - 3.0).abs() < 1e-12);
        assert_eq!(out.value(), s.value());
    }

    #[test]
    fn representation_requires_matching_tags() {
        let t = tag(&[0.0]);
        let other = tag(&[1.0]);
        let theta = ThetaField::constant(0.0).unwrap();
        let at = coord(&other, &[1.0]);
        let reference = coord(&other, &[0.0]);
        let s = ScaledScalar::new_real(t, ScalingFactor::ONE, 2.0).unwrap();
        assert!(matches!(
            scaled_representation(&s, &theta, &at, &reference),
            Err(Error::CrossUniverse(_, _))
        ));
    }

    #[test]
    fn factored_application_matches_direct_application() {
        let theta = ThetaField::gaussian_bump(&[0.0], 2.0, 1.0).unwrap();
        let report = factorization_check(&theta, &[(-1.5, 1.5)], 100, 17).unwrap();
        assert!(report.max_rel_dev <= 1e-12, "{report:?}");
    }

    #[test]
    fn constant_theta_collapses_to_bitwise_transport() {
        let theta = ThetaField::constant(3.25).unwrap();
        let report = factorization_check(&theta, &[(-1.0, 1.0)], 50, 5).unwrap();
        assert!(report.constant_theta_bitwise);
        assert_eq!(report.max_rel_dev, 0.0);
    }

    #[test]
    fn map_application_checks_source_tag() {
        let from = tag(&[0.0]);
        let to = tag(&[1.0]);
        let map = StructureMap::value_preserving(from, to.clone());
        let s = ScaledScalar::new_real(to, ScalingFactor::ONE, 1.0).unwrap();
        assert!(matches!(
            map.apply_scalar(&s),
            Err(Error::CrossUniverse(_, _))
        ));
    }
}
