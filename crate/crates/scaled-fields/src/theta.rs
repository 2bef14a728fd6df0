//! The scalar field that assigns each coordinate its scaling exponent.
//!
//! The factor attached to a point is `e^{theta(u)}`, so only differences of
//! theta ever enter a computation: adding a constant offset to the field
//! changes nothing observable. `scale_factor` exposes exactly that
//! difference, `e^{theta(from) - theta(to)}`.

use std::fmt;
use std::sync::Arc;

use crate::charts::{check_same_universe, TaggedCoordinate};
use crate::error::{Error, Result};
use crate::numbers::ScalingFactor;

/// Relative step for finite-difference gradients.
const FD_STEP_REL: f64 = 1e-5;

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Scaling exponent field over chart coordinates.
#[derive(Clone)]
pub struct ThetaField {
    preset: Preset,
    offset: f64,
}

#[derive(Clone)]
enum Preset {
    Constant {
        value: f64,
    },
    /// `theta(u) = a . u`; the gradient is the constant tuple `a`.
    Linear {
        coeffs: Vec<f64>,
    },
    /// `theta(u) = height * exp(-|u - center|^2 / width^2)`.
    GaussianBump {
        center: Vec<f64>,
        width: f64,
        height: f64,
    },
    /// Expansion-history profile in the last coordinate (cosmic time):
    /// `theta(t) = plateau * (1 - e^{-rate t}) + ln(t / t0)`, t > 0.
    Inflation {
        t0: f64,
        rate: f64,
        plateau: f64,
    },
    Custom {
        eval: Arc<EvalFn>,
        grad: Option<Arc<GradFn>>,
    },
}

impl fmt::Debug for ThetaField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.preset {
            Preset::Constant { value } => format!("constant({value})"),
            Preset::Linear { coeffs } => format!("linear({coeffs:?})"),
            Preset::GaussianBump { center, width, height } => {
                format!("gaussian_bump(center={center:?}, width={width}, height={height})")
            }
            Preset::Inflation { t0, rate, plateau } => {
                format!("inflation(t0={t0}, rate={rate}, plateau={plateau})")
            }
            Preset::Custom { grad, .. } => format!("custom(grad={})", grad.is_some()),
        };
        write!(f, "ThetaField {{ {name}, offset: {} }}", self.offset)
    }
}

impl ThetaField {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite("constant theta".into()));
        }
        Ok(Self::wrap(Preset::Constant { value }))
    }

    pub fn linear(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("linear theta needs finite coefficients".into()));
        }
        Ok(Self::wrap(Preset::Linear {
            coeffs: coeffs.to_vec(),
        }))
    }

    pub fn gaussian_bump(center: &[f64], width: f64, height: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("gaussian bump needs a finite center".into()));
        }
        if !width.is_finite() || width <= 0.0 || !height.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gaussian bump needs width > 0 and finite height, got width {width} height {height}"
            )));
        }
        Ok(Self::wrap(Preset::GaussianBump {
            center: center.to_vec(),
            width,
            height,
        }))
    }

    pub fn inflation(t0: f64, rate: f64, plateau: f64) -> Result<Self> {
        if !t0.is_finite() || t0 <= 0.0 || !rate.is_finite() || rate <= 0.0 || !plateau.is_finite()
        {
            return Err(Error::InvalidArgument(format!(
                "inflation profile needs t0 > 0 and rate > 0, got t0 {t0} rate {rate} plateau {plateau}"
            )));
        }
        Ok(Self::wrap(Preset::Inflation { t0, rate, plateau }))
    }

    pub fn custom<F>(eval: F, grad: Option<Arc<GradFn>>) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::wrap(Preset::Custom {
            eval: Arc::new(eval),
            grad,
        })
    }

    fn wrap(preset: Preset) -> Self {
        Self { preset, offset: 0.0 }
    }

    /// The same field shifted by a constant; observables must not change.
    pub fn with_offset(mut self, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::NonFinite("theta offset".into()));
        }
        self.offset = offset;
        Ok(self)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Field value at chart coordinates `u`.
    pub fn value(&self, u: &[f64]) -> Result<f64> {
        let v = match &self.preset {
            Preset::Constant { value } => *value,
            Preset::Linear { coeffs } => {
                if coeffs.len() != u.len() {
                    return Err(Error::DimensionMismatch(u.len(), coeffs.len()));
                }
                coeffs.iter().zip(u).map(|(a, x)| a * x).sum()
            }
            Preset::GaussianBump { center, width, height } => {
                if center.len() != u.len() {
                    return Err(Error::DimensionMismatch(u.len(), center.len()));
                }
                let d2: f64 = center.iter().zip(u).map(|(c, x)| (x - c) * (x - c)).sum();
                height * (-d2 / (width * width)).exp()
            }
            Preset::Inflation { t0, rate, plateau } => {
                let t = *u.last().ok_or_else(|| {
                    Error::InvalidArgument("inflation profile needs a time coordinate".into())
                })?;
                if t <= 0.0 {
                    return Err(Error::Domain(format!(
                        "inflation profile is defined for t > 0, got t = {t}"
                    )));
                }
                plateau * (1.0 - (-rate * t).exp()) + (t / t0).ln()
            }
            Preset::Custom { eval, .. } => eval(u),
        };
        let v = v + self.offset;
        if !v.is_finite() {
            return Err(Error::NonFinite("theta value".into()));
        }
        Ok(v)
    }

    /// Gradient at `u`: analytic for the presets, finite differences for
    /// custom fields that do not supply one.
    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        match &self.preset {
            Preset::Constant { .. } => Ok(vec![0.0; u.len()]),
            Preset::Linear { coeffs } => {
                if coeffs.len() != u.len() {
                    return Err(Error::DimensionMismatch(u.len(), coeffs.len()));
                }
                Ok(coeffs.clone())
            }
            Preset::GaussianBump { center, width, height } => {
                if center.len() != u.len() {
                    return Err(Error::DimensionMismatch(u.len(), center.len()));
                }
                let w2 = width * width;
                let d2: f64 = center.iter().zip(u).map(|(c, x)| (x - c) * (x - c)).sum();
                let common = height * (-d2 / w2).exp() * (-2.0 / w2);
                Ok(center.iter().zip(u).map(|(c, x)| common * (x - c)).collect())
            }
            Preset::Inflation { rate, plateau, .. } => {
                let t = *u.last().ok_or_else(|| {
                    Error::InvalidArgument("inflation profile needs a time coordinate".into())
                })?;
                if t <= 0.0 {
                    return Err(Error::Domain(format!(
                        "inflation profile is defined for t > 0, got t = {t}"
                    )));
                }
                let mut g = vec![0.0; u.len()];
                *g.last_mut().unwrap() = plateau * rate * (-rate * t).exp() + 1.0 / t;
                Ok(g)
            }
            Preset::Custom { grad, .. } => match grad {
                Some(g) => {
                    let out = g(u);
                    if out.len() != u.len() {
                        return Err(Error::DimensionMismatch(out.len(), u.len()));
                    }
                    Ok(out)
                }
                None => self.fd_gradient(u),
            },
        }
    }

    /// Central-difference gradient with per-axis step `1e-5 * max(1, |u_i|)`.
    pub fn fd_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut grad = Vec::with_capacity(u.len());
        let mut probe = u.to_vec();
        for i in 0..u.len() {
            let h = FD_STEP_REL * u[i].abs().max(1.0);
            probe[i] = u[i] + h;
            let plus = self.value(&probe)?;
            probe[i] = u[i] - h;
            let minus = self.value(&probe)?;
            probe[i] = u[i];
            grad.push((plus - minus) / (2.0 * h));
        }
        Ok(grad)
    }

    pub fn value_at(&self, c: &TaggedCoordinate) -> Result<f64> {
        self.value(c.u())
    }

    pub fn gradient_at(&self, c: &TaggedCoordinate) -> Result<Vec<f64>> {
        self.gradient(c.u())
    }

    /// `e^{theta(from) - theta(to)}`: the factor that carries a structure
    /// scaled for `to` into one scaled for `from`.
    pub fn scale_factor(
        &self,
        from: &TaggedCoordinate,
        to: &TaggedCoordinate,
    ) -> Result<ScalingFactor> {
        check_same_universe(from.tag(), to.tag())?;
        let dtheta = self.value_at(from)? - self.value_at(to)?;
        ScalingFactor::from_log(dtheta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::UniverseTag;

    fn coord(u: &[f64]) -> TaggedCoordinate {
        let tag = UniverseTag::at(&vec![0.0; u.len()]).unwrap();
        TaggedCoordinate::new(tag, u.to_vec()).unwrap()
    }

    #[test]
    fn linear_field_matches_dot_product() {
        let theta = ThetaField::linear(&[1.0, 0.0]).unwrap();
        assert_eq!(theta.value(&[2.0, 5.0]).unwrap(), 2.0);
    }

    #[test]
    fn scale_factor_exponentiates_the_difference() {
        let theta = ThetaField::linear(&[1.0]).unwrap();
        let a = coord(&[4.0f64.ln()]);
        let b = coord(&[0.0]);
        let f = theta.scale_factor(&a, &b).unwrap();
        assert!((f.get() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn scale_factor_cocycle_and_reciprocal() {
        let theta = ThetaField::gaussian_bump(&[0.5], 1.3, 0.8).unwrap();
        let (a, b, c) = (coord(&[-0.4]), coord(&[0.9]), coord(&[2.2]));
        let fab = theta.scale_factor(&a, &b).unwrap().get();
        let fbc = theta.scale_factor(&b, &c).unwrap().get();
        let fac = theta.scale_factor(&a, &c).unwrap().get();
        assert!((fab * fbc - fac).abs() <= 1e-12 * fac.abs());
        let fba = theta.scale_factor(&b, &a).unwrap().get();
        assert!((fab * fba - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn offset_does_not_change_scale_factors() {
        let base = ThetaField::linear(&[0.7]).unwrap();
        let shifted = ThetaField::linear(&[0.7]).unwrap().with_offset(5.0).unwrap();
        let (a, b) = (coord(&[1.3]), coord(&[-0.2]));
        let f0 = base.scale_factor(&a, &b).unwrap().get();
        let f5 = shifted.scale_factor(&a, &b).unwrap().get();
        assert!((f0 - f5).abs() <= 1e-12 * f0);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let fields = [
            ThetaField::constant(2.0).unwrap(),
            ThetaField::linear(&[0.3, -1.1]).unwrap(),
            ThetaField::gaussian_bump(&[0.2, -0.4], 1.5, 0.9).unwrap(),
        ];
        let u = [0.7, -0.3];
        for theta in &fields {
            let a = theta.gradient(&u).unwrap();
            let fd = theta.fd_gradient(&u).unwrap();
            for (x, y) in a.iter().zip(&fd) {
                assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "{theta:?}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn inflation_profile_requires_positive_time() {
        let theta = ThetaField::inflation(1.0, 1.0, 5.0).unwrap();
        assert!(matches!(theta.value(&[0.0]), Err(Error::Domain(_))));
        assert!(matches!(theta.value(&[-3.0]), Err(Error::Domain(_))));
        assert!(theta.value(&[2.0]).is_ok());
    }

    #[test]
    fn inflation_gradient_lives_in_the_time_axis() {
        let theta = ThetaField::inflation(1.0, 2.0, 5.0).unwrap();
        let g = theta.gradient(&[0.3, 0.3, 0.3, 1.5]).unwrap();
        assert_eq!(&g[..3], &[0.0, 0.0, 0.0]);
        let expect = 5.0 * 2.0 * (-2.0 * 1.5f64).exp() + 1.0 / 1.5;
        assert!((g[3] - expect).abs() < 1e-12);
    }

    #[test]
    fn overflow_exponent_is_rejected() {
        let theta = ThetaField::linear(&[1.0]).unwrap();
        let far = coord(&[800.0]);
        let origin = coord(&[0.0]);
        assert!(matches!(
            theta.scale_factor(&far, &origin),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn custom_field_falls_back_to_finite_differences() {
        let theta = ThetaField::custom(|u: &[f64]| (u[0] * u[0]).sin(), None);
        let g = theta.gradient(&[0.8]).unwrap();
        let expect = 2.0 * 0.8 * (0.8f64 * 0.8).cos();
        assert!((g[0] - expect).abs() < 1e-8);
    }
}
