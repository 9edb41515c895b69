#![no_main]

use libfuzzer_sys::fuzz_target;

use holder_core::modulus::{load_literal, parse_literal, ModulusLiteral};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(lit) = parse_literal(text) {
        match lit {
            // Table literals name a file; resolving them is I/O, not parsing.
            ModulusLiteral::Table(_) => {}
            other => {
                let m = load_literal(&other).expect("accepted literal evaluates");
                assert_eq!(m.eval(0.0).unwrap(), 0.0);
                let v = m.eval(1.0).unwrap();
                assert!(v.is_finite() && v > 0.0);
            }
        }
    }
});
