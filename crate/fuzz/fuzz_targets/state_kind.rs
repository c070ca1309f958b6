#![no_main]
use libfuzzer_sys::fuzz_target;
use qtomo::StateKind;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(kind) = text.parse::<StateKind>() {
        assert_eq!(kind.name().parse::<StateKind>().ok(), Some(kind));
    }
});
