#![no_main]

use libfuzzer_sys::fuzz_target;
use satmodel::model::RotationNumber;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(r) = text.parse::<RotationNumber>() {
            assert!(r.p() >= 1 && r.q().exceeds(r.p()));
            assert_eq!(r.q().gcd_with(r.p()), 1);
            assert_eq!(r.to_string().parse::<RotationNumber>().unwrap(), r);
        }
    }
});
