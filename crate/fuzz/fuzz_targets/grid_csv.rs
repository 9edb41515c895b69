#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = holder_core::grid::parse_csv(text) {
        // Accepted inputs must round-trip bit-exactly through the writer.
        let rendered = holder_core::grid::to_csv_string(&f);
        let g = holder_core::grid::parse_csv(&rendered).expect("writer output reparses");
        assert_eq!(f.values(), g.values());
        assert_eq!(f.grid(), g.grid());
        assert_eq!(f.ycomp(), g.ycomp());
    }
});
