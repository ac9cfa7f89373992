//! Fuzz the run-configuration parser: arbitrary text must never panic, and
//! any config it accepts must survive a serialize/reparse cycle unchanged.

#![no_main]

use libfuzzer_sys::fuzz_target;
use preydef::config::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(text) {
        let round = parse_config(&cfg.to_config_string())
            .expect("serialized form of an accepted config must reparse");
        assert_eq!(cfg, round, "round-trip changed the config");
    }
});
