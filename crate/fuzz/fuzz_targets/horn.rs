#![no_main]
use hflz::chc::{chc_to_hfl, emit_smtlib_horn, parse_horn};
use hflz::syntax::typecheck_closed;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(s) = parse_horn(text) else { return };
    let again = parse_horn(&emit_smtlib_horn(&s)).expect("emitted script reparses");
    assert_eq!(s, again);
    if let Ok(f) = chc_to_hfl(&s) {
        assert!(typecheck_closed(&f).is_ok());
    }
});
