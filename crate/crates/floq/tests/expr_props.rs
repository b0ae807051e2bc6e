//! Property tests for the expression language.

use floq::expr::parse;
use proptest::prelude::*;

/// Random well-formed expression text, fully parenthesized so validity is
/// guaranteed by construction.
fn arb_expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("t".to_string()),
        Just("pi".to_string()),
        Just("e".to_string()),
        (1u32..1000).prop_map(|n| n.to_string()),
        (0u32..100, 1u32..100).prop_map(|(a, b)| format!("{a}.{b}")),
        (1u32..50, -8i32..8).prop_map(|(m, e)| format!("{m}e{e}")),
    ];
    leaf.prop_recursive(5, 48, 8, |inner| {
        let func = prop_oneof![
            Just("sin"),
            Just("cos"),
            Just("tan"),
            Just("sinh"),
            Just("cosh"),
            Just("tanh"),
            Just("exp"),
            Just("ln"),
            Just("sqrt"),
            Just("abs"),
            Just("erf"),
            Just("erfi"),
        ];
        let op = prop_oneof![Just("+"), Just("-"), Just("*"), Just("/")];
        prop_oneof![
            (inner.clone(), op, inner.clone())
                .prop_map(|(a, op, b)| format!("({a}) {op} ({b})")),
            (inner.clone(), 0u32..4).prop_map(|(a, p)| format!("({a})^{p}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (func, inner).prop_map(|(f, a)| format!("{f}({a})")),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_is_identity_on_the_tree(src in arb_expression()) {
        let first = parse(&src).expect("generated expressions are well-formed");
        let printed = first.pretty();
        let second = parse(&printed)
            .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
        prop_assert!(first == second, "`{}` reparsed differently", printed);
        // and printing is a fixed point from the second round on
        prop_assert_eq!(printed, second.pretty());
    }

    #[test]
    fn parser_never_panics_on_arbitrary_strings(src in any::<String>()) {
        let _ = parse(&src);
    }

    #[test]
    fn parser_never_panics_on_operator_soup(
        src in proptest::collection::vec(
            prop_oneof![
                Just('t'), Just('p'), Just('i'), Just('e'), Just('s'), Just('n'),
                Just('('), Just(')'), Just('+'), Just('-'), Just('*'), Just('/'),
                Just('^'), Just('.'), Just('1'), Just('2'), Just('9'), Just(' '),
            ],
            0..64
        ).prop_map(|cs| cs.into_iter().collect::<String>())
    ) {
        let _ = parse(&src);
    }

    #[test]
    fn pythagorean_identity(t in -50.0f64..50.0) {
        let e = parse("sin(t)^2 + cos(t)^2").unwrap();
        let v = e.eval(t).unwrap();
        prop_assert!((v - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn erfi_odd_in_sign(t in -20.0f64..20.0) {
        let pos = parse("erfi(t)").unwrap();
        let neg = parse("erfi(-t)").unwrap();
        let a = pos.eval(t).unwrap();
        let b = neg.eval(t).unwrap();
        prop_assert_eq!(a, -b);
    }

    #[test]
    fn evaluation_yields_finite_or_structured_error(src in arb_expression(), t in -5.0f64..5.0) {
        let e = parse(&src).unwrap();
        match e.eval(t) {
            Ok(v) => prop_assert!(v.is_finite()),
            Err(err) => prop_assert!(!err.fragment.is_empty()),
        }
    }
}
