#![no_main]

use libfuzzer_sys::fuzz_target;

use holder_core::modulus::{parse_table_csv, Modulus};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(knots) = parse_table_csv(text) {
        // Parsed knot lists either fail validation cleanly or produce a
        // modulus that is monotone on its knots.
        if let Ok(m) = Modulus::tabulated(knots.clone(), true) {
            let mut prev = 0.0_f64;
            for (t, _) in &knots {
                let v = m.eval(*t).unwrap();
                assert!(v.is_finite() && v > 0.0);
                assert!(v >= prev * (1.0 - 1e-12));
                prev = v;
            }
        }
    }
});
