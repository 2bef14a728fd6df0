//! Local arithmetic, linear algebra, and calculus in which every number
//! carries an explicit scaling factor and a tag naming the universe point
//! whose structures it belongs to.
//!
//! A scaled scalar stores the external representation `r * value`; arithmetic
//! is arranged so that the map `value -> scaled value` is a field isomorphism
//! and collapses bitwise onto plain arithmetic at `r = 1`. Vectors and inner
//! products follow the same discipline. A scalar exponent field ([`theta::ThetaField`])
//! assigns each coordinate its scaling, `e^{theta(u) - theta(v)}` carries
//! structures between points, and the calculus layer builds quadrature,
//! lifted global integrals, wave packets, and scaled covariant derivatives on
//! top. Mixing values tagged with different universe points is always an
//! error, never a silent coercion.
//!
//! [`checks::run_all`] exercises every documented invariant and returns
//! named pass/fail records; the companion CLI exposes it as `verify`.

pub mod calculus;
pub mod charts;
pub mod checks;
pub mod error;
pub mod linear;
pub mod maps;
pub mod numbers;
pub mod report;
pub mod theta;

pub use calculus::{
    covariant_derivative, covariant_derivative_richardson, du_invariance_check, grid_rows,
    lifted_global_integral, lifted_global_integral_with_estimate, local_integral,
    local_integral_with_estimate, log_log_slope, scaled_distance_element, scaled_wave_packet,
    DuInvarianceReport, DuSample, FieldOnChart, GaugeLink, GridRow, IntegralResult, PhaseFn,
    QuadRule, QuadratureSpec, VectorFieldOnChart, WavePacket, MAX_GRID_NODES,
};
pub use charts::{
    same_chart_check, transport_point, ChartFamily, SamenessReport, TaggedCoordinate, UniverseTag,
    MAX_DIM,
};
pub use checks::{run_all, PropertyCheck, Requirement};
pub use error::{Error, Result};
pub use linear::{hilbert_iso_check, IsoReport, ScaledVector};
pub use maps::{
    factorization_check, rescale_scalar, rescale_vector, same_value_map, scaled_representation,
    scaled_vector_representation, FactorizationReport, StructureMap, Tagged,
};
pub use numbers::{AnalyticFn, NumberKind, ScaledScalar, ScalingFactor, EXP_ARG_LIMIT};
pub use theta::ThetaField;
