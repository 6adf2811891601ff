//! Exact Haar moments against sampling, plus closed forms known from the
//! orthogonal Weingarten function at degree 4.

use orthoinv_core::montecarlo::{estimate_query_moment, ACCEPTANCE_SIGMAS};
use orthoinv_core::weingarten::{exact_moment_with, theorem3_moment};
use orthoinv_core::{exact_moment, Limits, MomentQuery, PivotOrder, Rational, SamplerConfig};

const QUERIES: [(usize, &str); 12] = [
    (2, "1,1;1,1"),
    (2, "1,1;1,1;1,1;1,1"),
    (2, "1,1;1,2;2,1;2,2"),
    (2, "1,1;1,1;2,2;2,2"),
    (2, "1,1;1,1;1,2;1,2"),
    (2, "1,1;1,1;2,1;2,1"),
    (2, "1,1;1,1;1,1;1,1;1,1;1,1"),
    (3, "1,1;1,1;1,1;1,1"),
    (3, "1,1;1,1;2,2;2,2"),
    (3, "1,1;1,2;2,1;2,2"),
    (3, "1,1;1,1;2,2;2,2;3,3;3,3"),
    (3, "1,1;1,2;2,1;2,2;3,3;3,3"),
];

#[test]
fn exact_moments_match_sampling() {
    let limits = Limits::default();
    for (n, text) in QUERIES {
        let q = MomentQuery::parse(text, n).unwrap();
        let exact = exact_moment(&q, &limits).unwrap();
        let config = SamplerConfig::new(n, 42, 1_000_000)
            .unwrap()
            .with_workers(4);
        let est = estimate_query_moment(&q, &config).unwrap();
        let target = orthoinv_core::linalg::to_f64(&exact);
        assert!(
            est.agrees_with(target, ACCEPTANCE_SIGMAS),
            "{text} at n = {n}: exact {exact}, mc {} ± {}",
            est.mean,
            est.stderr
        );
    }
}

#[test]
fn degree_four_closed_forms() {
    // E(x_{1a}^2 x_{2b}^2) for a != b is (n+1)/(n(n-1)(n+2)); for a = b it is 1/(n(n+2)).
    let limits = Limits::default();
    for n in 2..=6usize {
        let ni = n as i64;
        let q = MomentQuery::parse("1,1;1,1;2,2;2,2", n).unwrap();
        assert_eq!(
            exact_moment(&q, &limits).unwrap(),
            Rational::new((ni + 1).into(), (ni * (ni - 1) * (ni + 2)).into())
        );
        let q = MomentQuery::parse("1,1;1,1;2,1;2,1", n).unwrap();
        assert_eq!(
            exact_moment(&q, &limits).unwrap(),
            Rational::new(1.into(), (ni * (ni + 2)).into())
        );
        assert_eq!(
            theorem3_moment(&q, &limits).unwrap(),
            Rational::new(1.into(), (ni * ni).into())
        );
    }
}

#[test]
fn pivot_order_does_not_change_moments_with_singular_gram() {
    let limits = Limits::default();
    for text in [
        "1,1;1,1;2,2;2,2;1,2;1,2",
        "1,1;2,1;1,2;2,2;1,1;2,2",
        "1,2;1,2;1,2;1,2;2,1;2,1",
    ] {
        let q = MomentQuery::parse(text, 2).unwrap();
        assert_eq!(
            exact_moment_with(&q, &limits, PivotOrder::Natural).unwrap(),
            exact_moment_with(&q, &limits, PivotOrder::Reversed).unwrap(),
            "{text}"
        );
    }
}
