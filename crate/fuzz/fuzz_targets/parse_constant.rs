#![no_main]

use libfuzzer_sys::fuzz_target;
use satmodel::model::Constant;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(c) = text.parse::<Constant>() {
            // Display output parses back to the same constant.
            let again: Constant = c.to_string().parse().expect("display round-trips");
            assert_eq!(again, c);
        }
    }
});
