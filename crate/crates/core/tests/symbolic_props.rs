use std::collections::BTreeMap;

use proptest::prelude::*;
use singmech::symbolic::{central_difference, is_zero, parse, Binding, Expr, Sampler, Symbol, SymbolTable};

fn table() -> SymbolTable {
    let mut t = SymbolTable::new();
    t.insert(Symbol::time()).unwrap();
    for c in ["q1", "q2", "q3"] {
        t.insert_coordinate(c).unwrap();
    }
    t
}

fn coords() -> Vec<Symbol> {
    ["q1", "q2", "q3"].iter().map(|c| Symbol::coordinate(c)).collect()
}

// Expression source text. Functions are wrapped so that every generated
// expression is defined and of moderate size on [-2, 2]^3.
fn source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["q1", "q2", "q3"]).prop_map(String::from),
        (-5i64..=5).prop_map(|n| format!("({n})")),
        (1i64..=4, 2i64..=5).prop_map(|(a, b)| format!("({a}/{b})")),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} / (1 + ({b})^2))")),
            (inner.clone(), 0i64..=3).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.prop_map(|a| format!("log(1 + ({a})^2)")),
        ]
    })
}

fn expr() -> impl Strategy<Value = Expr> {
    source().prop_map(|s| parse(&s, &table()).unwrap())
}

fn points(seed: u64, n: usize) -> Vec<Binding> {
    Sampler { seed, samples: n, range: 2.0, exclusion: 1e-3 }.bindings(&coords())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn derivative_matches_central_difference(e in expr(), which in 0usize..3, seed in 0u64..1000) {
        let s = &coords()[which];
        let d = e.diff(s);
        for b in points(seed, 100) {
            let exact = d.evaluate(&b).unwrap();
            let fd = central_difference(&e, s, &b, 1e-6).unwrap();
            // roundoff of the difference quotient scales with |f|
            let scale = 1.0 + exact.abs() + 1e-4 * e.evaluate(&b).unwrap().abs();
            prop_assert!((exact - fd).abs() / scale < 1e-6, "{} at {:?}: {} vs {}", e, b, exact, fd);
        }
    }

    #[test]
    fn mixed_partials_commute(e in expr(), i in 0usize..3, j in 0usize..3) {
        let (si, sj) = (&coords()[i], &coords()[j]);
        let gap = e.diff(si).diff(sj) - e.diff(sj).diff(si);
        prop_assert!(is_zero(&gap, &Sampler::default(), 1e-8).is_zero(), "{}", e);
    }

    #[test]
    fn substitution_commutes_with_evaluation(e in expr(), r1 in expr(), r2 in expr(), seed in 0u64..1000) {
        let c = coords();
        let mut m = BTreeMap::new();
        m.insert(c[0].clone(), r1.simplify());
        m.insert(c[1].clone(), r2.simplify());
        let substituted = e.substitute(&m);
        for b in points(seed, 20) {
            let extended = b.clone().with(&c[0], r1.evaluate(&b).unwrap()).with(&c[1], r2.evaluate(&b).unwrap());
            let (lhs, rhs) = (substituted.evaluate(&b).unwrap(), e.evaluate(&extended).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()) * 1e2, "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn simplify_is_idempotent_and_preserves_value(e in expr(), seed in 0u64..1000) {
        let s = e.simplify();
        prop_assert_eq!(s.simplify(), s.clone());
        for b in points(seed, 20) {
            let (raw, simple) = (e.evaluate(&b).unwrap(), s.evaluate(&b).unwrap());
            prop_assert!((raw - simple).abs() <= 1e-12 * (1.0 + raw.abs()) * 1e2, "{} vs {}", raw, simple);
        }
    }

    #[test]
    fn rendering_parses_back(e in expr()) {
        let s = e.simplify();
        let back = parse(&s.to_string(), &table()).unwrap().simplify();
        prop_assert_eq!(back, s);
        let raw_back = parse(&e.to_string(), &table()).unwrap();
        prop_assert!(is_zero(&(raw_back - e.simplify()), &Sampler::default(), 1e-9).is_zero());
    }
}

#[test]
fn parse_examples() {
    let t = table();
    let e = parse("q1_dot*q2 - 0.5*(q1^2 + q2^2)", &t).unwrap();
    assert_eq!(e.free_symbols().len(), 3);
    match parse("q1 +", &t) {
        Err(singmech::symbolic::ExprError::Syntax { position, .. }) => assert_eq!(position, 5),
        other => panic!("unexpected {other:?}"),
    }
    let b = Binding::new().with(&Symbol::coordinate("q1"), 0.37);
    let v = parse("sin(q1)^2 + cos(q1)^2", &t).unwrap().evaluate(&b).unwrap();
    assert!((v - (0.37f64.sin().powi(2) + 0.37f64.cos().powi(2))).abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
}

#[test]
fn evaluation_examples() {
    let t = table();
    let q1 = Symbol::coordinate("q1");
    let b = Binding::new().with(&q1, 2.0).with(&Symbol::coordinate("q2"), 1.0);
    assert_eq!(parse("q1^2+q2", &t).unwrap().evaluate(&b).unwrap(), 5.0);
    let zero = Binding::new().with(&q1, 0.0);
    assert!(matches!(parse("1/q1", &t).unwrap().evaluate(&zero), Err(singmech::symbolic::ExprError::Domain(_))));
    let b = Binding::new().with(&q1, 3.5);
    assert!((parse("exp(log(q1))", &t).unwrap().evaluate(&b).unwrap() - 3.5).abs() < 1e-12);
    let unbound = parse("q1 + q2", &t).unwrap().evaluate(&b);
    assert!(matches!(unbound, Err(singmech::symbolic::ExprError::UnboundSymbol(s)) if s == "q2"));
}

#[test]
fn derivative_of_product_with_exponential() {
    let t = table();
    let e = parse("sin(q1)*exp(q2)", &t).unwrap();
    let q1 = Symbol::coordinate("q1");
    let b = Binding::new().with(&q1, 0.3).with(&Symbol::coordinate("q2"), -0.7);
    let exact = e.diff(&q1).evaluate(&b).unwrap();
    // independent closed form: cos(q1) exp(q2)
    let expected = 0.3f64.cos() * (-0.7f64).exp();
    assert!((exact - expected).abs() < 1e-15);
    let fd = central_difference(&e, &q1, &b, 1e-6).unwrap();
    assert!((exact - fd).abs() / exact.abs() < 1e-6);
}

#[test]
fn zero_test_examples() {
    use singmech::symbolic::ZeroVerdict;
    let t = table();
    let z = |s: &str| is_zero(&parse(s, &t).unwrap(), &Sampler::default(), 1e-10);
    assert_eq!(z("sin(q1)^2+cos(q1)^2-1"), ZeroVerdict::NumericZero);
    assert_eq!(z("q1-q1"), ZeroVerdict::SymbolicZero);
    match z("q1*q2") {
        ZeroVerdict::NonZero { witness, .. } => {
            assert!(witness.iter().all(|(_, v)| v == 1.0) && witness.len() == 2);
        }
        other => panic!("unexpected {other:?}"),
    }
}
