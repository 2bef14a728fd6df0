//! The config parser and every builder behind it must reject arbitrary
//! input with an error, never a panic.

#![no_main]

use libfuzzer_sys::fuzz_target;
use scaled_fields_cli::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(config) = RunConfig::from_json(text) else { return };
    let Ok(tag) = config.universe_tag() else { return };
    let _ = config.build_chart();
    let _ = config.build_theta();
    let _ = config.build_field(&tag);
    let _ = config.build_section(&tag);
    let _ = config.build_quadrature(None);
    let _ = config.build_reference(&tag);
    let _ = config.build_derivative();
    let _ = config.build_du_check();
    let _ = config.build_cosmo();
});
