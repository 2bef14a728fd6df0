//! End-to-end acceptance gate: ten numbered criteria covering the scaled
//! arithmetic, Hilbert structure, charts, lifted integrals, covariant
//! derivatives, step invariance, the expansion-history scenario, and tag
//! discipline. Each test prints one `criterion N PASS/FAIL` line.

use num_complex::Complex64;
use scaled_fields::checks;
use scaled_fields::{
    covariant_derivative, covariant_derivative_richardson, du_invariance_check,
    hilbert_iso_check, lifted_global_integral, local_integral, log_log_slope, same_chart_check,
    scaled_distance_element, FieldOnChart, GaugeLink, QuadRule, QuadratureSpec, ScalingFactor,
    TaggedCoordinate, ThetaField, UniverseTag, VectorFieldOnChart,
};

const SEED: u64 = 0xACCE97;

fn report(n: usize, name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {n:2} {} {name}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

fn tag1d() -> UniverseTag {
    UniverseTag::at(&[0.0]).unwrap()
}

fn coord(u: &[f64]) -> TaggedCoordinate {
    let tag = UniverseTag::at(&vec![0.0; u.len()]).unwrap();
    TaggedCoordinate::new(tag, u.to_vec()).unwrap()
}

#[test]
fn criterion_01_field_axioms_across_scales() {
    // 1000 samples, scaling factors log-uniform in [1e-6, 1e6], every field
    // axiom within 1e-10 and the value homomorphism within 1e-12.
    let checks = checks::number_checks(1000, SEED).unwrap();
    let worst = checks
        .iter()
        .fold(0.0f64, |m, c| m.max(c.observed / c.threshold.max(1e-300)));
    let ok = checks.iter().all(|c| c.passed);
    report(
        1,
        "scaled field axioms",
        ok,
        &format!("{} identities, worst observed/threshold = {worst:.3e}", checks.len()),
    );
}

#[test]
fn criterion_02_analytic_function_correspondence() {
    // exp, sin, cos plus 100 random polynomials of degree <= 8: applying f
    // through the scaled representation matches r * f(value) within 1e-10.
    let checks = checks::analytic_checks(100, SEED).unwrap();
    let worst = checks.iter().fold(0.0f64, |m, c| m.max(c.observed));
    report(
        2,
        "analytic correspondence",
        checks.iter().all(|c| c.passed),
        &format!("max deviation {worst:.3e} (tolerance 1e-10)"),
    );
}

#[test]
fn criterion_03_hilbert_space_isomorphism() {
    // Componentwise scalar structure reproduces vector operations for
    // dimensions 1, 2, 3, 8 and scaling factors 0.5, 1, 3 within 1e-10.
    let mut worst = 0.0f64;
    for dim in [1usize, 2, 3, 8] {
        for r in [0.5, 1.0, 3.0] {
            let rep = hilbert_iso_check(dim, ScalingFactor::new(r).unwrap(), 250, SEED).unwrap();
            worst = worst.max(rep.max_rel_dev);
        }
    }
    report(
        3,
        "Hilbert isomorphism",
        worst <= 1e-10,
        &format!("max deviation {worst:.3e} over 12 (dim, r) combinations"),
    );
}

#[test]
fn criterion_04_charts_agree_across_universes() {
    // For each chart preset, 1000 sampled points seen from two universes
    // give identical coordinates within 1e-8.
    let mut worst = 0.0f64;
    for (label, chart, sample_box) in checks::builtin_charts().unwrap() {
        let dim = chart.dim();
        let tag_x = UniverseTag::at(&vec![0.0; dim]).unwrap();
        let tag_y = UniverseTag::at(&vec![1.0; dim]).unwrap();
        let rep = same_chart_check(&chart, &tag_x, &tag_y, &sample_box, 1000, SEED).unwrap();
        worst = worst.max(rep.max_coord_dev);
        let _ = label;
    }
    report(
        4,
        "chart sameness",
        worst <= 1e-8,
        &format!("max coordinate deviation {worst:.3e} over 3 chart presets"),
    );
}

#[test]
fn criterion_05_lifted_integrals_hit_closed_forms() {
    let tag = tag1d();
    let reference = coord(&[0.0]);
    let spec = QuadratureSpec::uniform(&[(0.0, 1.0)], 256, QuadRule::Simpson, 1e-10).unwrap();

    // integral of e^u over [0,1] via theta(u) = u and unit density.
    let one = FieldOnChart::new(tag.clone(), |_| Complex64::new(1.0, 0.0));
    let theta_u = ThetaField::linear(&[1.0]).unwrap();
    let e_minus_1 = std::f64::consts::E - 1.0;
    let got_exp = lifted_global_integral(&one, &theta_u, &reference, &spec)
        .unwrap()
        .ext()
        .re;
    let dev_exp = (got_exp - e_minus_1).abs() / e_minus_1;

    // integral of u(1+u) over [0,1] = 5/6 via theta = ln(1+u), f = u.
    let f_u = FieldOnChart::new(tag.clone(), |u: &[f64]| Complex64::new(u[0], 0.0));
    let theta_log = ThetaField::custom(|u: &[f64]| (1.0 + u[0]).ln(), None);
    let got_poly = lifted_global_integral(&f_u, &theta_log, &reference, &spec)
        .unwrap()
        .ext()
        .re;
    let dev_poly = (got_poly - 5.0 / 6.0).abs() / (5.0 / 6.0);

    // Constant theta must reproduce the local integral bit for bit.
    let wavy = FieldOnChart::new(tag.clone(), |u: &[f64]| {
        Complex64::new((2.7 * u[0]).sin(), (1.3 * u[0]).cos())
    });
    let flat = ThetaField::constant(2.5).unwrap();
    let mut bitwise = true;
    for rule in [QuadRule::Midpoint, QuadRule::Trapezoid, QuadRule::Simpson] {
        let s = QuadratureSpec::uniform(&[(0.0, 1.0)], 32, rule, 1e-10).unwrap();
        let a = local_integral(&wavy, &s).unwrap().ext();
        let b = lifted_global_integral(&wavy, &flat, &reference, &s)
            .unwrap()
            .ext();
        bitwise &= a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits();
    }

    // Simpson convergence order on the exp oracle.
    let exp_field = FieldOnChart::new(tag, |u: &[f64]| Complex64::new(u[0].exp(), 0.0));
    let mut points = Vec::new();
    for n in [8usize, 16, 32, 64] {
        let s = QuadratureSpec::uniform(&[(0.0, 1.0)], n, QuadRule::Simpson, 1e-10).unwrap();
        let err = (local_integral(&exp_field, &s).unwrap().ext().re - e_minus_1).abs();
        points.push((1.0 / n as f64, err));
    }
    let slope = log_log_slope(&points).unwrap_or(f64::NAN);

    let ok = dev_exp <= 1e-8 && dev_poly <= 1e-8 && bitwise && slope >= 3.7;
    report(
        5,
        "lifted integrals",
        ok,
        &format!(
            "exp oracle dev {dev_exp:.3e}, poly oracle dev {dev_poly:.3e}, \
             constant-theta bitwise {bitwise}, Simpson order {slope:.2}"
        ),
    );
}

#[test]
fn criterion_06_reference_point_covariance() {
    // Moving the lifted integral's reference multiplies it by exactly one
    // scale factor: 50 random reference pairs agree within 1e-10.
    let checks = checks::integral_checks(SEED).unwrap();
    let cov = checks
        .iter()
        .find(|c| c.name == "calculus/reference_covariance")
        .unwrap();
    report(
        6,
        "reference covariance",
        cov.passed,
        &format!("max deviation {:.3e} over 50 reference pairs", cov.observed),
    );
}

#[test]
fn criterion_07_covariant_derivative() {
    let tag = tag1d();
    let at = coord(&[1.0]);
    let link = GaugeLink::identity();

    // e^{-theta} c is covariantly constant for each theta preset.
    let presets = [
        ThetaField::constant(0.4).unwrap(),
        ThetaField::linear(&[0.6]).unwrap(),
        ThetaField::gaussian_bump(&[0.0], 2.0, 0.5).unwrap(),
    ];
    let mut constancy = 0.0f64;
    for theta in &presets {
        let th = theta.clone();
        let psi = VectorFieldOnChart::new(tag.clone(), 1, move |u: &[f64]| {
            vec![Complex64::new((-th.value(u).unwrap()).exp(), 0.0)]
        })
        .unwrap();
        let d = covariant_derivative(&psi, 0, &at, theta, &link, 1e-6).unwrap();
        constancy = constancy.max(d[0].norm());
    }

    // With the identity link, D psi converges to d psi + (grad theta) psi at
    // first order in h.
    let theta = ThetaField::linear(&[0.6]).unwrap();
    let psi = VectorFieldOnChart::new(tag, 1, |u: &[f64]| {
        vec![Complex64::new(u[0].sin(), 0.0)]
    })
    .unwrap();
    let u0 = at.u()[0];
    let limit = u0.cos() + 0.6 * u0.sin();
    let mut points = Vec::new();
    for k in 0..5 {
        let h = 1e-2 / 2f64.powi(k);
        let d = covariant_derivative(&psi, 0, &at, &theta, &link, h).unwrap();
        points.push((h, (d[0].re - limit).abs()));
    }
    let slope = log_log_slope(&points).unwrap_or(f64::NAN);

    let h = 1e-3;
    let plain = covariant_derivative(&psi, 0, &at, &theta, &link, h).unwrap()[0].re;
    let extr = covariant_derivative_richardson(&psi, 0, &at, &theta, &link, h).unwrap()[0].re;
    let improvement = (plain - limit).abs() / (extr - limit).abs().max(1e-300);

    let ok = constancy <= 1e-6 && (slope - 1.0).abs() <= 0.1 && improvement >= 10.0;
    report(
        7,
        "covariant derivative",
        ok,
        &format!(
            "covariant constancy {constancy:.3e} at h=1e-6, error order {slope:.3}, \
             extrapolation improves {improvement:.1}x"
        ),
    );
}

#[test]
fn criterion_08_step_invariance_orders() {
    // |rho(h) - 1| falls off at first order for linear theta and at second
    // order (or faster) where the gradient vanishes.
    let hs: Vec<f64> = (0..10).map(|k| 1e-2 / 2f64.powi(k)).collect();
    let linear = ThetaField::linear(&[1.0]).unwrap();
    let slope_linear = du_invariance_check(&linear, &coord(&[0.5]), 0, &hs)
        .unwrap()
        .slope
        .unwrap_or(f64::NAN);

    let bump = ThetaField::gaussian_bump(&[0.0], 1.0, 0.8).unwrap();
    let hs2: Vec<f64> = (0..8).map(|k| 1e-1 / 2f64.powi(k)).collect();
    let slope_peak = du_invariance_check(&bump, &coord(&[0.0]), 0, &hs2)
        .unwrap()
        .slope
        .unwrap_or(f64::NAN);

    let ok = (slope_linear - 1.0).abs() <= 0.1 && slope_peak >= 1.9;
    report(
        8,
        "step invariance",
        ok,
        &format!("linear slope {slope_linear:.3}, critical-point slope {slope_peak:.3}"),
    );
}

#[test]
fn criterion_09_expansion_history_scenario() {
    // Inflation profile theta(t) = plateau (1 - e^{-rate t}) + ln(t / t0).
    let (t0, rate, plateau) = (1.0, 1.0, 5.0);
    let theta = ThetaField::inflation(t0, rate, plateau).unwrap();
    let present = coord(&[14.0]);
    let early = coord(&[t0 / 100.0]);

    // Early distances are contracted by better than 1e-3.
    let early_factor = theta.scale_factor(&early, &present).unwrap().get();
    let ds2 = scaled_distance_element(1.0, &theta, &early, &present).unwrap();

    // The factor grows monotonically along a log-spaced time grid.
    let mut monotone = true;
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=400 {
        let t = 0.01 * (1000.0f64).powf(k as f64 / 400.0);
        let f = theta.scale_factor(&coord(&[t]), &present).unwrap().get();
        monotone &= f >= prev;
        prev = f;
    }

    // Late times: the saturating component of theta sits within 1% of the
    // plateau once t >= 10 t0.
    let t_late = 10.0 * t0;
    let settled = theta.value(&[t_late]).unwrap() - (t_late / t0).ln() - theta.offset();
    let plateau_dev = (settled - plateau).abs() / plateau;

    // A constant offset of theta never changes a factor.
    let shifted = ThetaField::inflation(t0, rate, plateau)
        .unwrap()
        .with_offset(4.0)
        .unwrap();
    let offset_dev = (theta.scale_factor(&early, &present).unwrap().get()
        - shifted.scale_factor(&early, &present).unwrap().get())
    .abs()
        / early_factor;

    let ok = early_factor <= 1e-3
        && ds2 <= 1e-3
        && monotone
        && plateau_dev <= 0.01
        && offset_dev <= 1e-12;
    report(
        9,
        "expansion history",
        ok,
        &format!(
            "early factor {early_factor:.3e}, monotone {monotone}, \
             plateau deviation {plateau_dev:.3e}, offset deviation {offset_dev:.3e}"
        ),
    );
}

#[test]
fn criterion_10_cross_universe_guard() {
    // Every operation that mixes universe tags raises the cross-universe
    // error: 16 distinct probes across the API.
    let checks = checks::guard_checks().unwrap();
    let c = &checks[0];
    report(
        10,
        "tag discipline",
        c.passed,
        &format!("{} probes escaped the guard (must be 0)", c.observed),
    );
}
