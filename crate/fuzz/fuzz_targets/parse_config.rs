#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = satmodel_cli::parse_config(text) {
            // Accepted configs must satisfy the invariants checked up front.
            assert!(config.model.constant().exceeds_one());
            assert!(config.model.rotations(config.horizon + 1).is_ok());
            assert!(config.resolved_precision >= 32);
        }
    }
});
