#![no_main]
use hflz::lts::{parse_lts, print_lts};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_lts(text) {
        let again = parse_lts(&print_lts(&m)).expect("printed system reparses");
        assert_eq!(m, again);
    }
});
