#![no_main]
use hflz::transforms::parse_predicates;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_predicates(text) {
        assert_eq!(parse_predicates(&p.to_string()).as_ref(), Ok(&p));
    }
});
