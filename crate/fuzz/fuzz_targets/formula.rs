#![no_main]
use hflz::syntax::{alpha_eq, dualize, parse_formula, typecheck_closed};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(f) = parse_formula(text) else { return };
    let printed = f.to_string();
    let g = parse_formula(&printed).expect("printed formula reparses");
    assert!(alpha_eq(&f, &g), "{}", printed);
    if let Ok(t) = typecheck_closed(&f) {
        let d = dualize(&f);
        assert_eq!(typecheck_closed(&d), Ok(t));
        assert!(alpha_eq(&dualize(&d), &f));
    }
});
