#![no_main]
use hflz::program::{parse_program, translate_program};
use hflz::syntax::{typecheck_closed, FixKind, Type};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_program(text) {
        // accepted programs translate to closed propositions
        let f = translate_program(&p, FixKind::Mu);
        assert_eq!(typecheck_closed(&f), Ok(Type::Prop));
    }
});
