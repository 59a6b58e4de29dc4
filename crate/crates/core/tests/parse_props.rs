use proptest::prelude::*;

use padyn_core::parse::{parse_domain, parse_map};
use padyn_core::{Error, Prime};

fn has_offset(e: &Error, len: usize) -> bool {
    match e {
        Error::Syntax { offset, .. } => *offset <= len,
        Error::ZeroDenominator { offset: Some(o) } => *o <= len,
        _ => false,
    }
}

/// Strings over the grammar's alphabet, which reach deeper into the parser
/// than arbitrary bytes.
fn grammar_soup() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop::sample::select(vec![
            "x", "0", "1", "7", "12", "+", "-", "*", "/", "^", "(", ")", " ", "2x", "^3", "Zp",
            "B(", ",", "-1", "Qp",
        ]),
        0..24,
    )
    .prop_map(|parts| parts.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn maps_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let text = String::from_utf8_lossy(&bytes);
        if let Err(e) = parse_map(&text, Prime::new(5).unwrap()) {
            prop_assert!(has_offset(&e, text.len()), "{:?}", e);
        }
    }

    #[test]
    fn grammar_like_maps(text in grammar_soup()) {
        if let Err(e) = parse_map(&text, Prime::new(3).unwrap()) {
            prop_assert!(has_offset(&e, text.len()), "{:?} for {:?}", e, text);
        }
    }

    #[test]
    fn domains_never_panic(text in grammar_soup()) {
        match parse_domain(&text, Prime::new(3).unwrap()) {
            Ok(_) | Err(Error::EmptyDomain) => {}
            Err(e) => prop_assert!(has_offset(&e, text.len()), "{:?} for {:?}", e, text),
        }
    }
}
