use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symlab_core::expr::{canonicalize, parse, random_assignment, Assignment, Expr};

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("u0".to_string()),
        Just("u1".to_string()),
        Just("u2".to_string()),
        Just("u3".to_string()),
        Just("alpha0".to_string()),
        Just("beta0'".to_string()),
        Just("gamma0".to_string()),
        Just("k".to_string()),
        (1i32..5).prop_map(|n| n.to_string()),
        Just("exp(u3)".to_string()),
        Just("exp(-2*u1 + u2)".to_string()),
        Just("sin(u3*sin(alpha))".to_string()),
        Just("cos(u1 - u2)".to_string()),
        Just("sin(2*u3 + 1)".to_string()),
    ]
}

fn corpus_expr() -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            inner.clone().prop_map(|a| format!("({a})^2")),
            inner.clone().prop_map(|a| format!("({a})/(2 + sin(u1))")),
            inner.prop_map(|a| format!("({a})/(u2^2 + 3)")),
        ]
    })
}

/// Concrete functions of u0 standing in for the abstract symbols.
fn bind(e: &Expr) -> Expr {
    let mut out = e.clone();
    for (name, f) in [("alpha0", "sin(u0) + u0"), ("beta0", "exp(u0)*cos(u0)"), ("gamma0", "u0^3 - 1")] {
        out = out.substitute_func(name, &parse(f).unwrap()).unwrap();
    }
    out
}

fn sample_points(seed: u64, n: usize, e: &Expr) -> Vec<Assignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_assignment(&mut rng, &e.funcs(), &e.params())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]

    #[test]
    fn canonicalization_is_idempotent(s in corpus_expr()) {
        let e = parse(&s).unwrap();
        let once = canonicalize(&e);
        prop_assert_eq!(&canonicalize(&once), &once);
        prop_assert_eq!(&parse(&once.to_string()).unwrap(), &once);
    }

    #[test]
    fn derivative_matches_finite_differences(s in corpus_expr(), seed in any::<u64>()) {
        let e = bind(&parse(&s).unwrap());
        let h = 1e-5;
        for a in sample_points(seed, 10, &e) {
            for i in 0..4 {
                let d = bind(&e.diff(i)).evaluate(&a).unwrap();
                let mut ap = a.clone();
                let mut am = a.clone();
                ap.coords[i] += h;
                am.coords[i] -= h;
                let fd = (e.evaluate(&ap).unwrap() - e.evaluate(&am).unwrap()) / (2.0 * h);
                prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "{s}: d{i} {d} vs {fd}");
            }
        }
    }

    #[test]
    fn partials_commute(s in corpus_expr()) {
        let e = parse(&s).unwrap();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let r = e.diff(i).diff(j) - e.diff(j).diff(i);
                prop_assert!(r.is_zero().unwrap(), "{s}: ({i},{j}) -> {r}");
            }
        }
    }

    #[test]
    fn zero_verdict_is_sound(a in corpus_expr(), b in corpus_expr()) {
        // (a + b)^2 - a^2 - 2ab - b^2 is zero; so is the expansion check of
        // a difference with itself.
        let (ea, eb) = (parse(&a).unwrap(), parse(&b).unwrap());
        let sq = (&ea + &eb) * (&ea + &eb);
        let r = sq - &ea * &ea - (&ea * &eb).scale(symlab_core::expr::Coeff::int(2)) - &eb * &eb;
        if r.is_zero().unwrap() {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let (f, p) = (r.funcs(), r.params());
            for _ in 0..100 {
                let pt = random_assignment(&mut rng, &f, &p);
                prop_assert!(r.evaluate_complex(&pt).unwrap().norm() < 1e-10);
            }
        }
        // A visibly nonzero expression must not test zero.
        let nz = &ea * &ea + Expr::one();
        if !nz.is_zero().unwrap() {
            let pt = random_assignment(&mut ChaCha8Rng::seed_from_u64(rng_seed(&a)), &nz.funcs(), &nz.params());
            prop_assert!(nz.evaluate(&pt).is_ok());
        }
    }
}

fn rng_seed(s: &str) -> u64 {
    s.bytes().fold(17u64, |h, b| h.wrapping_mul(31).wrapping_add(b as u64))
}

#[test]
fn zero_differences_sample_to_zero() {
    let cases = [
        ("sin(u1 + u2)", "sin(u1)*cos(u2) + cos(u1)*sin(u2)"),
        ("exp(u3)^3/exp(u3)", "exp(2*u3)"),
        ("(u1^3 - 1)/(u1 - 1)", "u1^2 + u1 + 1"),
        ("cos(u3*sin(alpha))^2", "1 - sin(u3*sin(alpha))^2"),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (a, b) in cases {
        let r = parse(a).unwrap() - parse(b).unwrap();
        assert!(r.is_zero().unwrap(), "{a} vs {b}: {r}");
        for _ in 0..100 {
            let mut pt = random_assignment(&mut rng, &r.funcs(), &r.params());
            pt.coords[1] += 3.0 + rng.gen::<f64>();
            assert!(r.evaluate_complex(&pt).unwrap().norm() < 1e-10);
        }
    }
}
