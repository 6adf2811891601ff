//! Verification suites behind `orthoinv verify`.
//!
//! Each suite is a fixed list of checks. Monte Carlo checks use the seed,
//! sample count and worker count given on the command line, so a report is
//! a pure function of those three values.

use clap::ValueEnum;
use itertools::Itertools;
use num_traits::{One, Zero};
use orthoinv_core::combinat::{apply_permutation, join_block_count, permutation_sign};
use orthoinv_core::invariant_algebra::{
    corollary1_identity, corollary2_check, evaluate_combination_dense, evaluate_combination_exact,
    gram_inner, gram_row_sum, sft_relation,
};
use orthoinv_core::linalg::{mat_vec, to_f64};
use orthoinv_core::moments::{
    generalized_expectation, pair_moment_cor3, rational_string, veronese_expectation,
};
use orthoinv_core::montecarlo::{
    estimate_dot_power, estimate_lemma3, estimate_pair_moment, estimate_query_moment,
    estimate_tensor_expectation, sample_haar_orthogonal, DMatrix, ACCEPTANCE_SIGMAS,
};
use orthoinv_core::tensor_numeric::{inner, standard_invariant_dense};
use orthoinv_core::weingarten::{compare_methods, ExactMomentSolver, McSummary, Verdict};
use orthoinv_core::{
    enumerate_pairings, exact_moment, gram_matrix, mu, p_poly, pairing_count, theorem3_moment,
    IndexPermutation, Limits, MomentQuery, Pairing, PivotOrder, Rational, Result, SamplerConfig,
    SetPartition,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::McArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Combinat,
    Gram,
    Moments,
    Sft,
    Corollary1,
    Corollary2,
    Weingarten,
    Montecarlo,
    All,
}

impl Suite {
    const EACH: [Suite; 8] = [
        Suite::Combinat,
        Suite::Gram,
        Suite::Moments,
        Suite::Sft,
        Suite::Corollary1,
        Suite::Corollary2,
        Suite::Weingarten,
        Suite::Montecarlo,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// A Monte Carlo arbitration that could not separate the candidates.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub status: Status,
    pub details: Value,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub samples: u64,
    pub workers: usize,
    pub status: Status,
    pub summary: Summary,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn has_failures(&self) -> bool {
        self.summary.fail > 0
    }
}

struct Runner<'a> {
    suite: Suite,
    mc: &'a McArgs,
    limits: &'a Limits,
    checks: Vec<Check>,
}

impl Runner<'_> {
    /// Records a check; an error inside `f` counts as a failure.
    fn check(&mut self, name: impl Into<String>, f: impl FnOnce() -> Result<(Status, Value)>) {
        let (status, details) =
            f().unwrap_or_else(|e| (Status::Fail, json!({ "error": e.to_string() })));
        self.checks.push(Check {
            suite: self.suite,
            name: name.into(),
            status,
            details,
        });
    }

    fn config(&self, n: usize) -> Result<SamplerConfig> {
        Ok(SamplerConfig::new(n, self.mc.seed, self.mc.samples)?.with_workers(self.mc.workers))
    }
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

pub fn run(suite: Suite, mc: &McArgs, limits: &Limits) -> Report {
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::EACH.to_vec(),
        one => vec![one],
    };
    let mut checks = Vec::new();
    for s in suites {
        let mut runner = Runner {
            suite: s,
            mc,
            limits,
            checks: Vec::new(),
        };
        match s {
            Suite::Combinat => combinat(&mut runner),
            Suite::Gram => gram(&mut runner),
            Suite::Moments => moments(&mut runner),
            Suite::Sft => sft(&mut runner),
            Suite::Corollary1 => corollary1(&mut runner),
            Suite::Corollary2 => corollary2(&mut runner),
            Suite::Weingarten => weingarten(&mut runner),
            Suite::Montecarlo => montecarlo(&mut runner),
            Suite::All => unreachable!(),
        }
        checks.append(&mut runner.checks);
    }
    let mut summary = Summary::default();
    for c in &checks {
        match c.status {
            Status::Pass => summary.pass += 1,
            Status::Fail => summary.fail += 1,
            Status::Inconclusive => summary.inconclusive += 1,
        }
    }
    let status = if summary.fail > 0 {
        Status::Fail
    } else if summary.inconclusive > 0 {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Report {
        suite,
        seed: mc.seed,
        samples: mc.samples,
        workers: mc.workers,
        status,
        summary,
        checks,
    }
}

fn combinat(r: &mut Runner) {
    let limits = *r.limits;
    r.check("pairing_counts", || {
        let mut rows = Vec::new();
        let mut ok = true;
        for k in 1..=6usize {
            let listed = enumerate_pairings(k, &limits)?.len();
            let double_factorial: usize = (1..=k).map(|i| 2 * i - 1).product();
            ok &= listed == double_factorial && pairing_count(k) == double_factorial.into();
            rows.push(json!({ "k": k, "enumerated": listed, "expected": double_factorial }));
        }
        Ok((status(ok), json!({ "counts": rows })))
    });
    r.check("canonical_order_k2", || {
        let listed: Vec<String> = enumerate_pairings(2, &limits)?
            .iter()
            .map(ToString::to_string)
            .collect();
        let ok = listed == ["(1,2)(3,4)", "(1,3)(2,4)", "(1,4)(2,3)"];
        Ok((status(ok), json!({ "pairings": listed })))
    });
    r.check("join_bounds_k3", || {
        let ps = enumerate_pairings(3, &limits)?;
        let mut ok = true;
        for (p, q) in ps.iter().cartesian_product(&ps) {
            let l = join_block_count(p, q)?;
            ok &= l == join_block_count(q, p)? && (1..=3).contains(&l) && ((l == 3) == (p == q));
        }
        Ok((status(ok), json!({ "pairs": ps.len() * ps.len() })))
    });
    r.check("symmetric_group_action_k2", || {
        let p0 = Pairing::standard(2)?;
        let mut orbit = std::collections::BTreeSet::new();
        let mut ok = true;
        let perms: Vec<IndexPermutation> = (1..=4usize)
            .permutations(4)
            .map(IndexPermutation::new)
            .collect::<Result<_>>()?;
        for s in &perms {
            orbit.insert(apply_permutation(s, &p0)?);
            for t in &perms {
                let st = s.compose(t)?;
                ok &= permutation_sign(&st) == permutation_sign(s) * permutation_sign(t);
                ok &= apply_permutation(&st, &p0)?
                    == apply_permutation(s, &apply_permutation(t, &p0)?)?;
            }
        }
        ok &= orbit.len() == 3;
        Ok((
            status(ok),
            json!({ "orbit_size": orbit.len(), "group_order": perms.len() }),
        ))
    });
}

fn gram(r: &mut Runner) {
    let limits = *r.limits;
    for k in 1..=5usize {
        r.check(format!("row_sum_k{k}"), || {
            let row_sum = gram_row_sum(k, &limits)?;
            let expected = p_poly(k);
            Ok((
                status(row_sum == expected),
                json!({ "row_sum": row_sum.to_string(), "expected": expected.to_string() }),
            ))
        });
    }
    r.check("symbolic_k2", || {
        let json = gram_matrix(2, &limits)?.symbolic_json();
        let ok = json["entries"]
            == json!([
                ["n^2", "n^1", "n^1"],
                ["n^1", "n^2", "n^1"],
                ["n^1", "n^1", "n^2"]
            ]);
        Ok((status(ok), json))
    });
    r.check("dense_inner_products", || {
        let mut compared = 0;
        let mut ok = true;
        for k in 1..=3usize {
            let ps = enumerate_pairings(k, &limits)?;
            for n in 1..=3usize {
                let dense: Vec<_> = ps
                    .iter()
                    .map(|p| standard_invariant_dense(p, n, &limits))
                    .collect::<Result<_>>()?;
                for (i, j) in (0..ps.len()).cartesian_product(0..ps.len()) {
                    let expected = n.pow(join_block_count(&ps[i], &ps[j])? as u32) as f64;
                    ok &= inner(&dense[i], &dense[j])? == expected;
                    compared += 1;
                }
            }
        }
        Ok((status(ok), json!({ "compared": compared })))
    });
    r.check("entry_average_is_inverse_mu", || {
        let mut rows = Vec::new();
        let mut ok = true;
        for k in 1..=4usize {
            let g = gram_matrix(k, &limits)?;
            for n in [2usize, 3, 5] {
                let total: num_bigint::BigInt = g.evaluate(n).iter().flatten().sum();
                let size = g.size() as i64;
                let average = Rational::new(total, (size * size).into());
                let expected = mu(k, n)?.recip();
                ok &= average == expected;
                rows.push(json!({ "k": k, "n": n, "average": rational_string(&average) }));
            }
        }
        Ok((status(ok), json!({ "cases": rows })))
    });
}

fn moments(r: &mut Runner) {
    let limits = *r.limits;
    r.check("normal_equations", || {
        let mut ok = true;
        let mut cases = Vec::new();
        for k in 1..=4usize {
            let g = gram_matrix(k, &limits)?;
            for n in [1usize, 2, 3, 5] {
                let weight = Rational::new(1.into(), p_poly(k).eval_usize(n));
                let lhs = mat_vec(&g.evaluate(n), &vec![weight.clone(); g.size()]);
                ok &= lhs.iter().all(One::is_one);
                cases.push(json!({ "k": k, "n": n, "weight": rational_string(&weight) }));
            }
        }
        Ok((status(ok), json!({ "cases": cases })))
    });
    r.check("mu_values", || {
        let cases = [
            (1usize, 2usize, rat(1, 2)),
            (2, 3, rat(1, 5)),
            (3, 5, rat(1, 21)),
            (2, 1, rat(1, 1)),
        ];
        let mut ok = true;
        let mut rows = Vec::new();
        for (k, n, expected) in cases {
            let value = mu(k, n)?;
            ok &= value == expected;
            rows.push(json!({ "k": k, "n": n, "mu": rational_string(&value) }));
        }
        Ok((status(ok), json!({ "cases": rows })))
    });
    r.check("veronese_self_pairing_is_mu", || {
        let mut ok = true;
        for k in 1..=4usize {
            for n in [2usize, 3, 5] {
                let e = veronese_expectation(2 * k, n, &limits)?;
                ok &= gram_inner(&e, &e, n)? == mu(k, n)?;
            }
        }
        Ok((status(ok), json!({ "k_max": 4, "n": [2, 3, 5] })))
    });
    r.check("generalized_expectation_terms", || {
        let partition = SetPartition::new(6, vec![vec![1, 2, 3, 4], vec![5, 6]])?;
        let e = generalized_expectation(&partition, 3, &limits)?;
        let combination = e.to_combination()?;
        // mu(2, 3) * mu(1, 3) spread over 3 * 1 pairings.
        let ok = combination.len() == 3 && combination.terms().all(|(_, c)| *c == rat(1, 45));
        Ok((
            status(ok),
            json!({ "partition": partition, "n": 3, "terms": combination.len(), "expectation": combination }),
        ))
    });
    r.check("odd_orders_vanish", || {
        let partition = SetPartition::new(4, vec![vec![1, 2, 3], vec![4]])?;
        let ok = generalized_expectation(&partition, 3, &limits)?.is_zero()
            && veronese_expectation(5, 3, &limits)?.is_zero();
        Ok((status(ok), json!({})))
    });
}

fn sft(r: &mut Runner) {
    let limits = *r.limits;
    let cases = [
        (2usize, 1usize, true),
        (3, 1, true),
        (3, 2, true),
        (4, 3, true),
        (2, 2, false),
        (3, 3, false),
    ];
    for (k, n, vanishes) in cases {
        r.check(format!("relation_k{k}_n{n}"), || {
            let relation = sft_relation(k, None)?;
            let entries = evaluate_combination_exact(&relation, n, &limits)?;
            let nonzero = entries.iter().filter(|e| !e.is_zero()).count();
            Ok((
                status((nonzero == 0) == vanishes),
                json!({ "k": k, "n": n, "terms": relation.len(), "nonzero_entries": nonzero, "expected_zero": vanishes }),
            ))
        });
    }
}

fn corollary1(r: &mut Runner) {
    let limits = *r.limits;
    for (k, n) in [(1usize, 2usize), (2, 1), (2, 3), (3, 2)] {
        r.check(format!("identity_k{k}_n{n}"), || {
            let report = corollary1_identity(k, n, &limits)?;
            Ok((
                status(report.residual.is_zero()),
                serde_json::to_value(&report).unwrap_or_default(),
            ))
        });
    }
}

fn corollary2(r: &mut Runner) {
    let limits = *r.limits;
    for k in 1..=4usize {
        r.check(format!("kronecker_rows_k{k}"), || {
            let report = corollary2_check(k, &limits)?;
            Ok((
                status(report.passed),
                json!({ "k": k, "rows": report.rows.len(), "kronecker_profile": report.kronecker_profile }),
            ))
        });
    }
}

/// Fixed set of Haar moment queries checked against sampling.
pub const WEINGARTEN_MC_QUERIES: [(usize, &str); 12] = [
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

fn weingarten(r: &mut Runner) {
    let limits = *r.limits;
    r.check("single_row_index_methods_agree", || {
        let mut compared = 0usize;
        let mut mismatches = Vec::new();
        for n in [2usize, 3, 5] {
            for m in 1..=6usize {
                let mut solver = (m % 2 == 0)
                    .then(|| ExactMomentSolver::new(n, m, &limits, PivotOrder::Natural))
                    .transpose()?;
                for cols in (0..m).map(|_| 1..=n).multi_cartesian_product() {
                    for row in 1..=n {
                        let q = MomentQuery::new(n, cols.iter().map(|&j| (row, j)).collect())?;
                        let exact = match solver.as_mut() {
                            Some(s) => s.moment(&q)?,
                            None => exact_moment(&q, &limits)?,
                        };
                        if theorem3_moment(&q, &limits)? != exact {
                            mismatches.push(json!({ "n": n, "query": q }));
                        }
                        compared += 1;
                    }
                }
            }
        }
        Ok((
            status(mismatches.is_empty()),
            json!({ "compared": compared, "mismatches": mismatches }),
        ))
    });
    for n in [2usize, 3, 5] {
        let mc = r.config(n);
        r.check(format!("x11^4_n{n}"), || {
            let q = MomentQuery::parse("1,1;1,1;1,1;1,1", n)?;
            let (t3, exact) = (theorem3_moment(&q, &limits)?, exact_moment(&q, &limits)?);
            let expected = rat(3, (n * (n + 2)) as i64);
            let config = mc?;
            let estimate = estimate_query_moment(&q, &config)?;
            let ok = t3 == expected
                && exact == expected
                && estimate.agrees_with(to_f64(&expected), ACCEPTANCE_SIGMAS);
            Ok((
                status(ok),
                json!({
                    "theorem3": rational_string(&t3),
                    "exact": rational_string(&exact),
                    "mc": McSummary::new(estimate, &config),
                    "z": estimate.z_score(to_f64(&expected)),
                }),
            ))
        });
    }
    for (n, text) in WEINGARTEN_MC_QUERIES {
        let mc = r.config(n);
        r.check(format!("exact_vs_mc_n{n}_{text}"), || {
            let q = MomentQuery::parse(text, n)?;
            let report = compare_methods(&q, &mc?, &limits)?;
            Ok((
                status(report.exact_agrees),
                serde_json::to_value(&report).unwrap_or_default(),
            ))
        });
    }
    let mc = r.config(2);
    r.check("arbitration_n2_x11^2_x22^2", || {
        let q = MomentQuery::parse("1,1;1,1;2,2;2,2", 2)?;
        let report = compare_methods(&q, &mc?, &limits)?;
        let (state, supported) = match report.verdict {
            Verdict::SupportsExact => (Status::Pass, "exact"),
            Verdict::SupportsTheorem3 => (Status::Pass, "theorem3"),
            Verdict::Concordant => (Status::Pass, "both"),
            Verdict::Discordant => (Status::Fail, "neither"),
            Verdict::Inconclusive => (Status::Inconclusive, "undecided"),
        };
        let mut details = serde_json::to_value(&report).unwrap_or_default();
        details["supported"] = supported.into();
        Ok((state, details))
    });
}

fn montecarlo(r: &mut Runner) {
    let limits = *r.limits;
    for k in 1..=3usize {
        for n in [2usize, 3, 5] {
            let mc = r.config(n);
            r.check(format!("dot_power_k{k}_n{n}"), || {
                let exact = mu(k, n)?;
                let estimate = estimate_dot_power(n, k, &mc?)?;
                Ok((
                    status(estimate.agrees_with(to_f64(&exact), ACCEPTANCE_SIGMAS)),
                    json!({ "exact": rational_string(&exact), "estimate": estimate, "z": estimate.z_score(to_f64(&exact)) }),
                ))
            });
        }
    }
    let partitions = [
        ("veronese_m4", SetPartition::single_block(4)),
        (
            "placed_12_34",
            SetPartition::new(4, vec![vec![1, 2], vec![3, 4]]).expect("valid partition"),
        ),
    ];
    for (label, partition) in &partitions {
        for n in [2usize, 3] {
            let mc = r.config(n);
            r.check(format!("{label}_n{n}"), || {
                let exact = evaluate_combination_dense(
                    &generalized_expectation(partition, n, &limits)?.to_combination()?,
                    n,
                    &limits,
                )?;
                let estimate = estimate_tensor_expectation(partition, &mc?, &limits)?;
                let z = estimate.max_z_score(&exact)?;
                Ok((
                    status(z < ACCEPTANCE_SIGMAS),
                    json!({ "entries": exact.entries().len(), "max_z": z }),
                ))
            });
        }
    }
    let pairs = [
        ("(1,2)", "(1,2)"),
        ("(1,2)(3,4)", "(1,2)(3,4)"),
        ("(1,2)(3,4)", "(1,3)(2,4)"),
        ("(1,3)(2,4)", "(1,3)(2,4)"),
        ("(1,3)(2,4)", "(1,4)(2,3)"),
        ("(1,2)(3,4)", "(1,4)(2,3)"),
    ];
    let ps1 = enumerate_pairings(1, &limits).unwrap_or_default();
    let ps2 = enumerate_pairings(2, &limits).unwrap_or_default();
    let find = |label: &str| {
        ps1.iter()
            .chain(&ps2)
            .find(|p| p.to_string() == label)
            .cloned()
    };
    for (a, b) in pairs {
        for n in [2usize, 3] {
            let mc = r.config(n);
            let (p, q) = (find(a), find(b));
            r.check(format!("pair_moment_{a}_{b}_n{n}"), || {
                let (Some(p), Some(q)) = (p, q) else {
                    return Err(orthoinv_core::Error::Internal("pairing lookup failed".into()));
                };
                let exact = pair_moment_cor3(&p, &q, n)?;
                let estimate = estimate_pair_moment(&p, &q, &mc?)?;
                Ok((
                    status(estimate.agrees_with(to_f64(&exact), ACCEPTANCE_SIGMAS)),
                    json!({ "exact": rational_string(&exact), "estimate": estimate, "z": estimate.z_score(to_f64(&exact)) }),
                ))
            });
        }
    }
    for n in [2usize, 3] {
        let mc = r.config(n);
        r.check(format!("projection_norm_m4_n{n}"), || {
            let report = estimate_lemma3(n, 4, &mc?, &limits)?;
            Ok((
                status(report.agrees),
                serde_json::to_value(&report).unwrap_or_default(),
            ))
        });
    }
    let mc = r.config(4);
    r.check("haar_orthogonality_n4", || {
        let mut rng = mc?.rng(0);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let x = sample_haar_orthogonal(4, &mut rng);
            let defect = (x.transpose() * &x - DMatrix::<f64>::identity(4, 4))
                .abs()
                .max();
            worst = worst.max(defect);
        }
        Ok((
            status(worst < 1e-12),
            json!({ "matrices": 1000, "max_defect": worst }),
        ))
    });
}
