#![no_main]
use libfuzzer_sys::fuzz_target;
use qtomo::io::grid_from_csv;
use qtomo::moments::SampledTomogram;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(file) = grid_from_csv(text) else { return };
    let q = file.meta.as_ref().map_or(0.9, |m| m.q);
    let Ok(d) = qtomo::DeformationParam::new(q) else { return };
    if let Ok(grid) = file.into_grid(&d) {
        let _ = SampledTomogram::new(&grid);
    }
});
