//! Named property suites over every module, reported as pass/fail records.
//!
//! Each check compares an observed worst-case deviation (or separation)
//! against a fixed threshold. Deviations of identities that involve
//! cancellation-prone additions are measured relative to the operand scale,
//! not the result, so the suites are stable across seeds.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::{
    covariant_derivative, du_invariance_check, lifted_global_integral, local_integral,
    log_log_slope, scaled_distance_element, scaled_wave_packet, FieldOnChart, GaugeLink, QuadRule,
    QuadratureSpec, VectorFieldOnChart,
};
use crate::charts::{same_chart_check, ChartFamily, TaggedCoordinate, UniverseTag};
use crate::error::{Error, Result};
use crate::linear::{hilbert_iso_check, ScaledVector};
use crate::maps::{factorization_check, same_value_map, scaled_representation, StructureMap};
use crate::numbers::{AnalyticFn, ScaledScalar, ScalingFactor};
use crate::theta::ThetaField;

/// Direction of a check's threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Requirement {
    AtMost,
    AtLeast,
}

/// One verified property: an observed value against its threshold.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub observed: f64,
    pub threshold: f64,
    pub requirement: Requirement,
    pub passed: bool,
}

impl PropertyCheck {
    pub fn at_most(name: impl Into<String>, observed: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            threshold,
            requirement: Requirement::AtMost,
            passed: observed.is_finite() && observed <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            threshold,
            requirement: Requirement::AtLeast,
            passed: observed.is_finite() && observed >= threshold,
        }
    }
}

/// |a - b| relative to the larger magnitude; 0 when both vanish.
pub fn rel_dev(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs());
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

/// Complex counterpart of [`rel_dev`].
pub fn rel_dev_c(a: Complex64, b: Complex64) -> f64 {
    let denom = a.norm().max(b.norm());
    if denom == 0.0 {
        0.0
    } else {
        (a - b).norm() / denom
    }
}

fn scaled_dev(a: Complex64, b: Complex64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(1e-300)
}

fn tag0() -> Result<UniverseTag> {
    UniverseTag::at(&[0.0])
}

fn tag1() -> Result<UniverseTag> {
    UniverseTag::at(&[1.0])
}

fn draw_signed_magnitude(rng: &mut ChaCha8Rng) -> f64 {
    let m = 10f64.powf(rng.random_range(-1.0..1.0));
    if rng.random::<bool>() {
        m
    } else {
        -m
    }
}

fn draw_value(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(draw_signed_magnitude(rng), draw_signed_magnitude(rng))
}

fn draw_scale(rng: &mut ChaCha8Rng) -> Result<ScalingFactor> {
    ScalingFactor::new(10f64.powf(rng.random_range(-6.0..6.0)))
}

/// Arithmetic homomorphism and field-axiom suite for scaled scalars.
pub fn number_checks(samples: usize, seed: u64) -> Result<Vec<PropertyCheck>> {
    let tag = tag0()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hom = [0.0f64; 4];
    let mut axiom = [0.0f64; 9];

    for _ in 0..samples {
        let r = draw_scale(&mut rng)?;
        let (va, vb, vc) = (draw_value(&mut rng), draw_value(&mut rng), draw_value(&mut rng));
        let a = ScaledScalar::new(tag.clone(), r, va)?;
        let b = ScaledScalar::new(tag.clone(), r, vb)?;
        let c = ScaledScalar::new(tag.clone(), r, vc)?;
        let scale = va.norm().max(vb.norm()).max(vc.norm());

        // Value homomorphism, oracle computed on the unscaled values.
        hom[0] = hom[0].max(scaled_dev(a.add(&b)?.value(), va + vb, scale));
        hom[1] = hom[1].max(scaled_dev(a.sub(&b)?.value(), va - vb, scale));
        hom[2] = hom[2].max(rel_dev_c(a.mul(&b)?.value(), va * vb));
        hom[3] = hom[3].max(rel_dev_c(a.div(&b)?.value(), va / vb));

        // Field axioms on external representations, deviations measured
        // against the operand scale r*|v| to stay meaningful under
        // cancellation.
        let ext_scale = r.get() * scale;
        let zero = ScaledScalar::zero(tag.clone(), r);
        let one = ScaledScalar::one(tag.clone(), r);
        axiom[0] = axiom[0].max(scaled_dev(a.add(&b)?.ext(), b.add(&a)?.ext(), ext_scale));
        axiom[1] = axiom[1].max(scaled_dev(
            a.add(&b)?.add(&c)?.ext(),
            a.add(&b.add(&c)?)?.ext(),
            ext_scale,
        ));
        axiom[2] = axiom[2].max(scaled_dev(a.add(&zero)?.ext(), a.ext(), ext_scale));
        axiom[3] = axiom[3].max(scaled_dev(a.add(&a.neg())?.ext(), zero.ext(), ext_scale));
        axiom[4] = axiom[4].max(scaled_dev(a.mul(&b)?.ext(), b.mul(&a)?.ext(), ext_scale));
        axiom[5] = axiom[5].max(rel_dev_c(a.mul(&b)?.mul(&c)?.ext(), a.mul(&b.mul(&c)?)?.ext()));
        axiom[6] = axiom[6].max(rel_dev_c(a.mul(&one)?.ext(), a.ext()));
        axiom[7] = axiom[7].max(rel_dev_c(a.mul(&one.div(&a)?)?.ext(), one.ext()));
        axiom[8] = axiom[8].max(scaled_dev(
            a.mul(&b.add(&c)?)?.ext(),
            a.mul(&b)?.add(&a.mul(&c)?)?.ext(),
            ext_scale * scale,
        ));
    }

    let mut checks = vec![
        PropertyCheck::at_most("numbers/homomorphism_add", hom[0], 1e-12),
        PropertyCheck::at_most("numbers/homomorphism_sub", hom[1], 1e-12),
        PropertyCheck::at_most("numbers/homomorphism_mul", hom[2], 1e-12),
        PropertyCheck::at_most("numbers/homomorphism_div", hom[3], 1e-12),
    ];
    let names = [
        "add_commutative",
        "add_associative",
        "add_identity",
        "add_inverse",
        "mul_commutative",
        "mul_associative",
        "mul_identity",
        "mul_inverse",
        "distributive",
    ];
    for (name, dev) in names.iter().zip(axiom) {
        checks.push(PropertyCheck::at_most(format!("numbers/axiom_{name}"), dev, 1e-10));
    }
    checks.push(r1_collapse_check(samples.min(200), seed ^ 0xb17)?);
    Ok(checks)
}

fn r1_collapse_check(samples: usize, seed: u64) -> Result<PropertyCheck> {
    let tag = tag0()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0usize;
    for _ in 0..samples {
        let (va, vb) = (draw_value(&mut rng), draw_value(&mut rng));
        let a = ScaledScalar::new(tag.clone(), ScalingFactor::ONE, va)?;
        let b = ScaledScalar::new(tag.clone(), ScalingFactor::ONE, vb)?;
        let pairs = [
            (a.add(&b)?.ext(), va + vb),
            (a.sub(&b)?.ext(), va - vb),
            (a.mul(&b)?.ext(), va * vb),
            (a.div(&b)?.ext(), va / vb),
        ];
        for (got, want) in pairs {
            if got.re.to_bits() != want.re.to_bits() || got.im.to_bits() != want.im.to_bits() {
                mismatches += 1;
            }
        }
    }
    Ok(PropertyCheck::at_most(
        "numbers/r1_bitwise_collapse",
        mismatches as f64,
        0.0,
    ))
}

/// Analytic-function correspondence: the scaled application must match the
/// independently evaluated `r * f(value)`. Deviations are relative to
/// `max(|f(value)|, 1)` so near-zeros of f do not blow up the ratio.
pub fn analytic_checks(polynomials: usize, seed: u64) -> Result<Vec<PropertyCheck>> {
    let tag = tag0()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut named_dev = [0.0f64; 3];
    let named = [AnalyticFn::Exp, AnalyticFn::Sin, AnalyticFn::Cos];
    let oracles: [fn(Complex64) -> Complex64; 3] = [|z| z.exp(), |z| z.sin(), |z| z.cos()];

    for _ in 0..200 {
        let r = draw_scale(&mut rng)?;
        let c = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let a = ScaledScalar::new(tag.clone(), r, c)?;
        for i in 0..3 {
            let applied = a.apply_analytic(&named[i])?;
            let expect = oracles[i](c).scale(r.get());
            let dev = (applied.ext() - expect).norm() / expect.norm().max(r.get());
            named_dev[i] = named_dev[i].max(dev);
        }
    }

    let mut poly_dev = 0.0f64;
    for _ in 0..polynomials {
        let degree = rng.random_range(1..=8usize);
        let coeffs: Vec<Complex64> = (0..=degree)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let r = draw_scale(&mut rng)?;
        let c = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let a = ScaledScalar::new(tag.clone(), r, c)?;
        let applied = a.apply_analytic(&AnalyticFn::Polynomial(coeffs.clone()))?;
        // Independent oracle: explicit powers instead of Horner, applied to
        // the pre-roundtrip value.
        let mut expect = Complex64::new(0.0, 0.0);
        let mut z = Complex64::new(1.0, 0.0);
        for coef in &coeffs {
            expect += coef * z;
            z *= c;
        }
        let dev = (applied.ext() - expect.scale(r.get())).norm()
            / (expect.norm().max(1.0) * r.get());
        poly_dev = poly_dev.max(dev);
    }

    Ok(vec![
        PropertyCheck::at_most("numbers/analytic_exp", named_dev[0], 1e-10),
        PropertyCheck::at_most("numbers/analytic_sin", named_dev[1], 1e-10),
        PropertyCheck::at_most("numbers/analytic_cos", named_dev[2], 1e-10),
        PropertyCheck::at_most("numbers/analytic_polynomials", poly_dev, 1e-10),
    ])
}

/// Vector and Hilbert structure suite.
pub fn linear_checks(samples: usize, seed: u64) -> Result<Vec<PropertyCheck>> {
    let tag = tag0()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cauchy_schwarz = 0.0f64;
    let mut self_inner_imag = 0.0f64;
    let mut self_inner_negative = 0.0f64;
    let mut norm_consistency = 0.0f64;
    let mut inner_hom = 0.0f64;

    for _ in 0..samples {
        let r = ScalingFactor::new(10f64.powf(rng.random_range(-3.0..3.0)))?;
        let dim = rng.random_range(1..=4usize);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
            (0..dim)
                .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect()
        };
        let va = draw(&mut rng);
        let vb = draw(&mut rng);
        let a = ScaledVector::new(tag.clone(), r, &va)?;
        let b = ScaledVector::new(tag.clone(), r, &vb)?;

        // Scaled Cauchy-Schwarz. The right side is the scaled product of the
        // two norms, whose external representation is norm(a)*norm(b)/r.
        let lhs = a.inner(&b)?.ext().norm();
        let rhs = a.norm() * b.norm() / r.get();
        if rhs > 0.0 {
            cauchy_schwarz = cauchy_schwarz.max((lhs - rhs) / rhs);
        }

        let self_inner = a.inner(&a)?;
        let ext = self_inner.ext();
        let scale = ext.norm().max(1e-300);
        self_inner_imag = self_inner_imag.max(ext.im.abs() / scale);
        self_inner_negative = self_inner_negative.max((-ext.re).max(0.0) / scale);
        norm_consistency = norm_consistency.max(rel_dev(a.norm() * a.norm(), r.get() * ext.re));

        let value_inner: Complex64 = va.iter().zip(&vb).map(|(x, y)| x.conj() * y).sum();
        let mag = value_inner.norm().max(
            va.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
                * vb.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
        );
        inner_hom = inner_hom.max(scaled_dev(a.inner(&b)?.value(), value_inner, mag));
    }

    let mut iso_dev = 0.0f64;
    for dim in [1usize, 2, 3, 8] {
        for rv in [0.5, 1.0, 3.0] {
            let report = hilbert_iso_check(dim, ScalingFactor::new(rv)?, 40, seed ^ 0x150)?;
            iso_dev = iso_dev.max(report.max_rel_dev);
        }
    }

    Ok(vec![
        PropertyCheck::at_most("linear/cauchy_schwarz_scaled", cauchy_schwarz, 1e-12),
        PropertyCheck::at_most("linear/self_inner_imaginary", self_inner_imag, 1e-12),
        PropertyCheck::at_most("linear/self_inner_nonnegative", self_inner_negative, 1e-12),
        PropertyCheck::at_most("linear/norm_sq_vs_inner", norm_consistency, 1e-10),
        PropertyCheck::at_most("linear/inner_homomorphism", inner_hom, 1e-10),
        PropertyCheck::at_most("linear/hilbert_isomorphism", iso_dev, 1e-10),
    ])
}

/// Chart suite: round trip, cross-tag sameness, exact transport.
pub fn chart_suite(
    label: &str,
    chart: &ChartFamily,
    sample_box: &[(f64, f64)],
    samples: usize,
    seed: u64,
) -> Result<Vec<PropertyCheck>> {
    let dim = chart.dim();
    let tag_x = UniverseTag::at(&vec![0.0; dim])?;
    let tag_y = UniverseTag::at(&vec![1.0; dim])?;
    let report = same_chart_check(chart, &tag_x, &tag_y, sample_box, samples, seed)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a9);
    let mut transport_mismatches = 0usize;
    for _ in 0..samples.min(100) {
        let p: Vec<f64> = sample_box
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..=hi))
            .collect();
        let c = chart.apply(&tag_y, &p)?;
        let moved = crate::charts::transport_point(&c, &tag_x)?;
        let back = crate::charts::transport_point(&moved, &tag_y)?;
        let same = c
            .u()
            .iter()
            .zip(moved.u().iter().zip(back.u()))
            .all(|(orig, (m, b))| {
                orig.to_bits() == m.to_bits() && orig.to_bits() == b.to_bits()
            });
        if !same || back.tag() != &tag_y {
            transport_mismatches += 1;
        }
    }

    Ok(vec![
        PropertyCheck::at_most(
            format!("charts/{label}/round_trip"),
            report.max_round_trip_dev,
            1e-9,
        ),
        PropertyCheck::at_most(
            format!("charts/{label}/cross_tag_sameness"),
            report.max_coord_dev,
            1e-8,
        ),
        PropertyCheck::at_most(
            format!("charts/{label}/transport_bitwise"),
            transport_mismatches as f64,
            0.0,
        ),
    ])
}

/// Theta-field suite: cocycle, reciprocal, gradient, offset invariance.
pub fn theta_suite(
    label: &str,
    theta: &ThetaField,
    sample_box: &[(f64, f64)],
    samples: usize,
    seed: u64,
) -> Result<Vec<PropertyCheck>> {
    let dim = sample_box.len();
    let tag = UniverseTag::at(&vec![0.0; dim])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Result<TaggedCoordinate> {
        let u: Vec<f64> = sample_box
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..=hi))
            .collect();
        TaggedCoordinate::new(tag.clone(), u)
    };

    let shifted = theta.clone().with_offset(theta.offset() + 5.0)?;
    let mut cocycle = 0.0f64;
    let mut reciprocal = 0.0f64;
    let mut offset_dev = 0.0f64;
    let mut grad_dev = 0.0f64;

    for _ in 0..samples {
        let a = draw(&mut rng)?;
        let b = draw(&mut rng)?;
        let c = draw(&mut rng)?;
        let fab = theta.scale_factor(&a, &b)?.get();
        let fbc = theta.scale_factor(&b, &c)?.get();
        let fac = theta.scale_factor(&a, &c)?.get();
        cocycle = cocycle.max(rel_dev(fab * fbc, fac));
        let fba = theta.scale_factor(&b, &a)?.get();
        reciprocal = reciprocal.max((fab * fba - 1.0).abs());
        offset_dev = offset_dev.max(rel_dev(fab, shifted.scale_factor(&a, &b)?.get()));

        // Gradient deviation relative to the gradient magnitude, floored at
        // 1e-2 so exact critical points compare absolutely.
        let analytic = theta.gradient(a.u())?;
        let fd = theta.fd_gradient(a.u())?;
        let mag = analytic
            .iter()
            .chain(&fd)
            .fold(0.0f64, |m, g| m.max(g.abs()))
            .max(1e-2);
        for (x, y) in analytic.iter().zip(&fd) {
            grad_dev = grad_dev.max((x - y).abs() / mag);
        }
    }

    Ok(vec![
        PropertyCheck::at_most(format!("theta/{label}/cocycle"), cocycle, 1e-12),
        PropertyCheck::at_most(format!("theta/{label}/reciprocal"), reciprocal, 1e-12),
        PropertyCheck::at_most(format!("theta/{label}/gradient_vs_fd"), grad_dev, 1e-6),
        PropertyCheck::at_most(format!("theta/{label}/offset_invariance"), offset_dev, 1e-12),
    ])
}

/// Structure-map suite: exact transport, value preservation, factorization.
pub fn map_checks(samples: usize, seed: u64) -> Result<Vec<PropertyCheck>> {
    let from = tag0()?;
    let to = tag1()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut transport_mismatches = 0usize;
    let mut value_dev = 0.0f64;
    let theta = ThetaField::gaussian_bump(&[0.3], 1.4, 0.9)?;
    for _ in 0..samples {
        let r = draw_scale(&mut rng)?;
        let s = ScaledScalar::new(from.clone(), r, draw_value(&mut rng))?;
        let moved = same_value_map(&s, &to);
        if moved.ext().re.to_bits() != s.ext().re.to_bits()
            || moved.ext().im.to_bits() != s.ext().im.to_bits()
            || moved.scaling().get().to_bits() != s.scaling().get().to_bits()
            || moved.tag() != &to
        {
            transport_mismatches += 1;
        }

        let at = TaggedCoordinate::new(to.clone(), vec![rng.random_range(-1.0..1.0)])?;
        let reference = TaggedCoordinate::new(to.clone(), vec![rng.random_range(-1.0..1.0)])?;
        let rep = scaled_representation(&moved, &theta, &at, &reference)?;
        value_dev = value_dev.max(rel_dev_c(rep.value(), moved.value()));
    }

    let fact = factorization_check(&theta, &[(-1.5, 1.5)], samples, seed ^ 0x41)?;
    let flat = factorization_check(&ThetaField::constant(1.0)?, &[(-1.5, 1.5)], 50, seed ^ 0x42)?;

    Ok(vec![
        PropertyCheck::at_most(
            "maps/same_value_bitwise",
            transport_mismatches as f64,
            0.0,
        ),
        PropertyCheck::at_most("maps/representation_preserves_value", value_dev, 1e-12),
        PropertyCheck::at_most("maps/factorization", fact.max_rel_dev, 1e-12),
        PropertyCheck::at_most(
            "maps/constant_theta_collapse",
            if flat.constant_theta_bitwise { 0.0 } else { 1.0 },
            0.0,
        ),
    ])
}

fn unit_tag_field() -> Result<(UniverseTag, FieldOnChart)> {
    let tag = tag0()?;
    let f = FieldOnChart::new(tag.clone(), |_| Complex64::new(1.0, 0.0));
    Ok((tag, f))
}

/// Quadrature and lifted-integral suite with closed-form oracles.
pub fn integral_checks(seed: u64) -> Result<Vec<PropertyCheck>> {
    let (tag, one) = unit_tag_field()?;
    let e_minus_1 = std::f64::consts::E - 1.0;

    // Convergence ratios on the exp oracle.
    let exp_field = FieldOnChart::new(tag.clone(), |u| Complex64::new(u[0].exp(), 0.0));
    let mut checks = Vec::new();
    for (rule, expect) in [
        (QuadRule::Midpoint, 4.0),
        (QuadRule::Trapezoid, 4.0),
        (QuadRule::Simpson, 16.0),
    ] {
        let err = |n: usize| -> Result<f64> {
            let spec = QuadratureSpec::uniform(&[(0.0, 1.0)], n, rule, 1e-10)?;
            Ok((local_integral(&exp_field, &spec)?.ext().re - e_minus_1).abs())
        };
        let ratio = err(16)? / err(32)?;
        checks.push(PropertyCheck::at_most(
            format!("calculus/convergence_{}", rule.name()),
            (ratio / expect - 1.0).abs(),
            0.3,
        ));
    }

    // Lifted-integral closed forms.
    let reference = TaggedCoordinate::new(tag.clone(), vec![0.0])?;
    let spec = QuadratureSpec::uniform(&[(0.0, 1.0)], 256, QuadRule::Simpson, 1e-10)?;
    let theta_u = ThetaField::linear(&[1.0])?;
    let lifted = lifted_global_integral(&one, &theta_u, &reference, &spec)?;
    checks.push(PropertyCheck::at_most(
        "calculus/lifted_exp_oracle",
        (lifted.ext().re - e_minus_1).abs() / e_minus_1,
        1e-8,
    ));

    let f_u = FieldOnChart::new(tag.clone(), |u| Complex64::new(u[0], 0.0));
    let theta_log = ThetaField::custom(|u: &[f64]| (1.0 + u[0]).ln(), None);
    let lifted_poly = lifted_global_integral(&f_u, &theta_log, &reference, &spec)?;
    checks.push(PropertyCheck::at_most(
        "calculus/lifted_poly_oracle",
        (lifted_poly.ext().re - 5.0 / 6.0).abs() / (5.0 / 6.0),
        1e-8,
    ));

    // Constant theta collapses bitwise onto the local integral.
    let wavy = FieldOnChart::new(tag.clone(), |u| {
        Complex64::new((2.7 * u[0]).sin(), (1.3 * u[0]).cos())
    });
    let flat = ThetaField::constant(2.5)?;
    let mut bitwise_mismatch = 0.0;
    for rule in [QuadRule::Midpoint, QuadRule::Trapezoid, QuadRule::Simpson] {
        let s = QuadratureSpec::uniform(&[(0.0, 1.0)], 32, rule, 1e-10)?;
        let a = local_integral(&wavy, &s)?.ext();
        let b = lifted_global_integral(&wavy, &flat, &reference, &s)?.ext();
        if a.re.to_bits() != b.re.to_bits() || a.im.to_bits() != b.im.to_bits() {
            bitwise_mismatch += 1.0;
        }
    }
    checks.push(PropertyCheck::at_most(
        "calculus/scaling_neutrality_bitwise",
        bitwise_mismatch,
        0.0,
    ));

    // Moving the reference multiplies the integral by one factor.
    let theta_bump = ThetaField::gaussian_bump(&[0.2], 1.2, 0.8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut covariance_dev = 0.0f64;
    let spec64 = QuadratureSpec::uniform(&[(0.0, 1.0)], 64, QuadRule::Simpson, 1e-10)?;
    for _ in 0..50 {
        let v1 = TaggedCoordinate::new(tag.clone(), vec![rng.random_range(-1.0..1.0)])?;
        let v2 = TaggedCoordinate::new(tag.clone(), vec![rng.random_range(-1.0..1.0)])?;
        let i1 = lifted_global_integral(&one, &theta_bump, &v1, &spec64)?.ext().re;
        let i2 = lifted_global_integral(&one, &theta_bump, &v2, &spec64)?.ext().re;
        let w = theta_bump.scale_factor(&v2, &v1)?.get();
        covariance_dev = covariance_dev.max(rel_dev(i1, w * i2));
    }
    checks.push(PropertyCheck::at_most(
        "calculus/reference_covariance",
        covariance_dev,
        1e-10,
    ));

    // A deliberately double-scaled integrand must differ for varying theta.
    let theta_ref = theta_u.value(reference.u())?;
    let double_scaled = FieldOnChart::new(tag.clone(), move |u| {
        Complex64::new((2.0 * (u[0] - theta_ref)).exp(), 0.0)
    });
    let single = lifted_global_integral(&one, &theta_u, &reference, &spec)?.ext().re;
    let double = local_integral(&double_scaled, &spec)?.ext().re;
    checks.push(PropertyCheck::at_least(
        "calculus/single_factor_separation",
        rel_dev(single, double),
        1e-3,
    ));

    Ok(checks)
}

/// Covariant-derivative suite: covariant constancy and first-order
/// convergence to the product-rule limit.
pub fn derivative_checks() -> Result<Vec<PropertyCheck>> {
    let tag = tag0()?;
    let at = TaggedCoordinate::new(tag.clone(), vec![1.0])?;
    let link = GaugeLink::identity();

    let presets: Vec<(&str, ThetaField)> = vec![
        ("constant", ThetaField::constant(0.4)?),
        ("linear", ThetaField::linear(&[0.6])?),
        ("gaussian_bump", ThetaField::gaussian_bump(&[0.0], 2.0, 0.5)?),
    ];

    let mut constancy = 0.0f64;
    for (_, theta) in &presets {
        let th = theta.clone();
        let psi = VectorFieldOnChart::new(tag.clone(), 1, move |u| {
            vec![Complex64::new((-th.value(u).unwrap()).exp(), 0.0)]
        })?;
        let d = covariant_derivative(&psi, 0, &at, theta, &link, 1e-6)?;
        constancy = constancy.max(d[0].norm());
    }

    // psi(u) = sin u with linear theta: D -> cos u + a sin u.
    let theta = ThetaField::linear(&[0.6])?;
    let psi = VectorFieldOnChart::new(tag.clone(), 1, |u: &[f64]| {
        vec![Complex64::new(u[0].sin(), 0.0)]
    })?;
    let u0 = at.u()[0];
    let limit = u0.cos() + 0.6 * u0.sin();
    let hs = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4];
    let mut points = Vec::new();
    for &h in &hs {
        let d = covariant_derivative(&psi, 0, &at, &theta, &link, h)?;
        points.push((h, (d[0].re - limit).abs()));
    }
    let slope = log_log_slope(&points).unwrap_or(f64::NAN);

    // Richardson extrapolation must beat the plain forward difference.
    let h = 1e-3;
    let plain = covariant_derivative(&psi, 0, &at, &theta, &link, h)?[0].re;
    let extrapolated =
        crate::calculus::covariant_derivative_richardson(&psi, 0, &at, &theta, &link, h)?[0].re;
    let improvement = (plain - limit).abs() / (extrapolated - limit).abs().max(1e-300);

    Ok(vec![
        PropertyCheck::at_most("calculus/covariant_constancy", constancy, 1e-6),
        PropertyCheck::at_most("calculus/derivative_order_slope", (slope - 1.0).abs(), 0.1),
        PropertyCheck::at_least("calculus/richardson_improvement", improvement, 10.0),
    ])
}

/// Wave-packet suite: uniform scaling of components and norm.
pub fn wave_packet_checks() -> Result<Vec<PropertyCheck>> {
    let tag = tag0()?;
    let amplitude = FieldOnChart::new(tag.clone(), |u| Complex64::new((-u[0] * u[0]).exp(), 0.0));
    let spec = QuadratureSpec::uniform(&[(-3.0, 3.0)], 64, QuadRule::Midpoint, 1e-10)?;
    let reference = TaggedCoordinate::new(tag.clone(), vec![0.0])?;

    let flat = ThetaField::constant(0.0)?;
    let base = scaled_wave_packet(&amplitude, &flat, &reference, &spec)?;

    let dtheta = 0.35f64;
    let stepped = ThetaField::custom(
        move |u: &[f64]| if u[0] < -99.0 { 0.0 } else { dtheta },
        None,
    );
    let far_ref = TaggedCoordinate::new(tag.clone(), vec![-100.0])?;
    let packet = scaled_wave_packet(&amplitude, &stepped, &far_ref, &spec)?;

    let factor = dtheta.exp();
    let mut component_dev = 0.0f64;
    for (a, b) in packet.packet.ext().iter().zip(base.packet.ext()) {
        component_dev = component_dev.max(scaled_dev(*a, b.scale(factor), factor * base.cell_volume));
    }
    let norm_dev = rel_dev(packet.norm_sq, factor * factor * base.norm_sq);

    Ok(vec![
        PropertyCheck::at_most("calculus/wave_packet_uniform_components", component_dev, 1e-10),
        PropertyCheck::at_most("calculus/wave_packet_norm_scaling", norm_dev, 1e-10),
    ])
}

/// Step-invariance suite at a generic point and at a critical point.
pub fn du_checks() -> Result<Vec<PropertyCheck>> {
    let tag = tag0()?;
    let hs: Vec<f64> = (0..10).map(|k| 1e-2 / 2f64.powi(k)).collect();

    let linear = ThetaField::linear(&[1.0])?;
    let at = TaggedCoordinate::new(tag.clone(), vec![0.5])?;
    let slope_linear = du_invariance_check(&linear, &at, 0, &hs)?
        .slope
        .unwrap_or(f64::NAN);

    let bump = ThetaField::gaussian_bump(&[0.0], 1.0, 0.8)?;
    let peak = TaggedCoordinate::new(tag.clone(), vec![0.0])?;
    let hs2: Vec<f64> = (0..8).map(|k| 1e-1 / 2f64.powi(k)).collect();
    let slope_peak = du_invariance_check(&bump, &peak, 0, &hs2)?
        .slope
        .unwrap_or(f64::NAN);

    Ok(vec![
        PropertyCheck::at_most("calculus/du_slope_linear", (slope_linear - 1.0).abs(), 0.1),
        PropertyCheck::at_least("calculus/du_slope_critical_point", slope_peak, 1.9),
    ])
}

/// Inflation distance-element scenario.
pub fn cosmology_checks() -> Result<Vec<PropertyCheck>> {
    let tag = tag0()?;
    let (t0, rate, plateau) = (1.0, 1.0, 5.0);
    let theta = ThetaField::inflation(t0, rate, plateau)?;
    let t_present = 14.0;
    let present = TaggedCoordinate::new(tag.clone(), vec![t_present])?;

    let early = TaggedCoordinate::new(tag.clone(), vec![t0 / 100.0])?;
    let early_factor = theta.scale_factor(&early, &present)?.get();

    // Log-spaced grid; the factor column must be monotone nondecreasing.
    let steps = 200;
    let (t_lo, t_hi) = (t0 / 100.0, 10.0 * t0);
    let mut worst_decrease = 0.0f64;
    let mut prev: Option<f64> = None;
    for k in 0..=steps {
        let t = t_lo * (t_hi / t_lo).powf(k as f64 / steps as f64);
        let c = TaggedCoordinate::new(tag.clone(), vec![t])?;
        let factor = theta.scale_factor(&c, &present)?.get();
        if let Some(p) = prev {
            worst_decrease = worst_decrease.max(p - factor);
        }
        prev = Some(factor);
    }

    // At large t the exponential part of the profile has settled: theta
    // minus its logarithmic tail must sit within 1% of the plateau.
    let t_late = 10.0 * t0;
    let settled = theta.value(&[t_late])? - (t_late / t0).ln() - theta.offset();
    let plateau_dev = (settled - plateau).abs() / plateau;

    let shifted = ThetaField::inflation(t0, rate, plateau)?.with_offset(5.0)?;
    let offset_dev = rel_dev(
        theta.scale_factor(&early, &present)?.get(),
        shifted.scale_factor(&early, &present)?.get(),
    );

    let ds2 = scaled_distance_element(1.0, &theta, &early, &present)?;

    Ok(vec![
        PropertyCheck::at_most("cosmology/early_contraction_factor", early_factor, 1e-3),
        PropertyCheck::at_most("cosmology/factor_monotone", worst_decrease, 0.0),
        PropertyCheck::at_most("cosmology/plateau_settled", plateau_dev, 0.01),
        PropertyCheck::at_most("cosmology/offset_invariance", offset_dev, 1e-12),
        PropertyCheck::at_most("cosmology/early_ds2_contracted", ds2, 1e-3),
    ])
}

/// Every cross-universe probe must raise the cross-universe error.
pub fn guard_checks() -> Result<Vec<PropertyCheck>> {
    let t_x = tag0()?;
    let t_y = tag1()?;
    let r = ScalingFactor::new(2.0)?;
    let a = ScaledScalar::new_real(t_x.clone(), r, 1.5)?;
    let b = ScaledScalar::new_real(t_y.clone(), r, -0.5)?;
    let va = ScaledVector::new(t_x.clone(), r, &[Complex64::new(1.0, 0.0)])?;
    let vb = ScaledVector::new(t_y.clone(), r, &[Complex64::new(0.0, 1.0)])?;
    let ca = TaggedCoordinate::new(t_x.clone(), vec![0.25])?;
    let cb = TaggedCoordinate::new(t_y.clone(), vec![0.75])?;
    let theta = ThetaField::linear(&[1.0])?;
    let spec = QuadratureSpec::uniform(&[(0.0, 1.0)], 4, QuadRule::Midpoint, 1e-10)?;
    let field_y = FieldOnChart::new(t_y.clone(), |_| Complex64::new(1.0, 0.0));
    let psi_y = VectorFieldOnChart::new(t_y.clone(), 1, |_| vec![Complex64::new(1.0, 0.0)])?;
    let map = StructureMap::value_preserving(t_y.clone(), t_x.clone());

    let outcomes = [
        a.add(&b).err(),
        a.sub(&b).err(),
        a.mul(&b).err(),
        a.div(&b).err(),
        va.add(&vb).err(),
        va.sub(&vb).err(),
        va.inner(&vb).err(),
        va.scalar_mul(&b).err(),
        ca.delta(&cb).err(),
        theta.scale_factor(&ca, &cb).err(),
        scaled_representation(&a, &theta, &cb, &cb).err(),
        map.apply_scalar(&a).err(),
        lifted_global_integral(&field_y, &theta, &ca, &spec).err(),
        scaled_wave_packet(&field_y, &theta, &ca, &spec).err(),
        covariant_derivative(&psi_y, 0, &ca, &theta, &GaugeLink::identity(), 1e-4).err(),
        scaled_distance_element(1.0, &theta, &ca, &cb).err(),
    ];
    let attempted = outcomes.len();
    let raised = outcomes
        .iter()
        .filter(|e| matches!(e, Some(Error::CrossUniverse(_, _))))
        .count();

    Ok(vec![PropertyCheck::at_most(
        "guards/cross_universe_rejections",
        (attempted - raised) as f64,
        0.0,
    )])
}

/// A labeled preset paired with the coordinate box to sample it over.
pub type BoxedPreset<T> = (String, T, Vec<(f64, f64)>);

/// The built-in chart presets with matching sample boxes.
pub fn builtin_charts() -> Result<Vec<BoxedPreset<ChartFamily>>> {
    Ok(vec![
        (
            "identity".into(),
            ChartFamily::identity(2)?,
            vec![(-2.0, 2.0), (-2.0, 2.0)],
        ),
        (
            "affine".into(),
            ChartFamily::affine(&[1.5, 0.2, -0.3, 0.9], &[0.4, -1.1])?,
            vec![(-2.0, 2.0), (-2.0, 2.0)],
        ),
        (
            "tanh".into(),
            ChartFamily::tanh_warp(1, 1.0)?,
            vec![(-2.0, 2.0)],
        ),
    ])
}

/// The built-in theta presets with matching sample boxes.
pub fn builtin_thetas() -> Result<Vec<BoxedPreset<ThetaField>>> {
    Ok(vec![
        ("constant".into(), ThetaField::constant(0.7)?, vec![(-2.0, 2.0)]),
        (
            "linear".into(),
            ThetaField::linear(&[0.3, -1.1])?,
            vec![(-2.0, 2.0), (-2.0, 2.0)],
        ),
        (
            "gaussian_bump".into(),
            ThetaField::gaussian_bump(&[0.2, -0.4], 1.5, 0.9)?,
            vec![(-2.0, 2.0), (-2.0, 2.0)],
        ),
        (
            "inflation".into(),
            ThetaField::inflation(1.0, 1.0, 5.0)?,
            vec![(0.1, 10.0)],
        ),
    ])
}

/// Runs every suite with its built-in presets.
pub fn run_all(seed: u64) -> Result<Vec<PropertyCheck>> {
    let mut checks = Vec::new();
    checks.extend(number_checks(1000, seed)?);
    checks.extend(analytic_checks(100, seed ^ 0x2)?);
    checks.extend(linear_checks(400, seed ^ 0x3)?);
    for (label, chart, sample_box) in builtin_charts()? {
        checks.extend(chart_suite(&label, &chart, &sample_box, 300, seed ^ 0x4)?);
    }
    for (label, theta, sample_box) in builtin_thetas()? {
        checks.extend(theta_suite(&label, &theta, &sample_box, 200, seed ^ 0x5)?);
    }
    checks.extend(map_checks(200, seed ^ 0x6)?);
    checks.extend(integral_checks(seed ^ 0x7)?);
    checks.extend(derivative_checks()?);
    checks.extend(wave_packet_checks()?);
    checks.extend(du_checks()?);
    checks.extend(cosmology_checks()?);
    checks.extend(guard_checks()?);
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtin_suites_pass() {
        let checks = run_all(0x5ca1ed).unwrap();
        assert!(!checks.is_empty());
        let failures: Vec<String> = checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} observed {} vs {:?} {}", c.name, c.observed, c.requirement, c.threshold))
            .collect();
        assert!(failures.is_empty(), "{failures:#?}");
    }

    #[test]
    fn suites_are_deterministic_for_a_seed() {
        let a = run_all(7).unwrap();
        let b = run_all(7).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.observed.to_bits(), y.observed.to_bits());
        }
    }

    #[test]
    fn thresholds_fail_when_violated() {
        let c = PropertyCheck::at_most("x", 2.0, 1.0);
        assert!(!c.passed);
        let c = PropertyCheck::at_least("x", 0.5, 1.0);
        assert!(!c.passed);
        let c = PropertyCheck::at_most("x", f64::NAN, 1.0);
        assert!(!c.passed);
    }
}
