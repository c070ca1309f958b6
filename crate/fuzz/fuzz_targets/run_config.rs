#![no_main]
use libfuzzer_sys::fuzz_target;
use qtomo::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for cfg in [RunConfig::from_toml_str(text), RunConfig::from_json_str(text)]
        .into_iter()
        .flatten()
    {
        if cfg.validate().is_err() {
            continue;
        }
        let line = cfg.to_json_line();
        // Unused non-finite fields serialize as null and are allowed to fail.
        if let Ok(again) = RunConfig::from_json_str(&line) {
            assert_eq!(again.to_json_line(), line);
        }
    }
});
