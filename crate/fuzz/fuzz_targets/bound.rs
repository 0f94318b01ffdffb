#![no_main]
use hflz::transforms::parse_bound;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(b) = parse_bound(text) {
        assert_eq!(parse_bound(&b.to_string()).as_ref(), Ok(&b));
    }
});
