use super::*;
use crate::equation::{evaluate, Term};
use crate::ntheory::{carmichael, factorize_u64, smooth_sieve, SmoothnessSpec};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn eq(s: &str) -> Equation {
    s.parse().unwrap()
}

fn v(name: &str) -> Var {
    Var::new(name).unwrap()
}

fn pp(q: u64) -> PrimePower {
    PrimePower::from_value(q).unwrap()
}

fn modulus(text: &str) -> Factorization {
    Factorization::parse(text).unwrap()
}

const ELEVEN: &str = "2^x1*3^x2 + 5^x3*7^x4 - 11^x5*13^x6 = 11";

fn solve(e: &Equation, m: &str) -> Solvability {
    let out = solvable_mod(e, &modulus(m), None, &Limits::default()).unwrap();
    replay_trace(e, out.trace()).unwrap();
    out
}

#[test]
fn forced_value_mod_16() {
    let out = constraints_mod_prime_power(&eq(ELEVEN), pp(16), &Limits::default()).unwrap();
    let LocalConstraints::Constraints(cs) = out else { panic!("expected constraints") };
    assert_eq!(cs[0].var, v("x1"));
    assert_eq!(cs[0].forced_value(), Some(0));
    assert!(cs[1..].iter().all(|c| c.forced_value().is_none()));
}

#[test]
fn unsat_mod_3() {
    let e = eq("4 + 11^a - 19^b = 0");
    let out = constraints_mod_prime_power(&e, pp(3), &Limits::default()).unwrap();
    assert_eq!(out, LocalConstraints::Unsat);
    assert!(solve(&e, "3").is_unsat());
}

#[test]
fn odd_bases_mod_2_admit_zero() {
    let e = eq("3^x + 5^y - 7^z = 1");
    let LocalConstraints::Constraints(cs) = constraints_mod_prime_power(&e, pp(2), &Limits::default()).unwrap() else {
        panic!("expected constraints")
    };
    assert!(cs.iter().all(|c| c.allows(0)));
}

#[test]
fn eleven_is_unsat_modulo_the_certificate() {
    let e = eq(ELEVEN);
    let out = solve(&e, "7031324575728");
    assert!(out.is_unsat());
    let trace = out.trace();
    let c = trace.constraint_after(16, &v("x1")).expect("factor 16 used");
    assert_eq!(c.forced_value(), Some(0));
}

#[test]
fn eleven_unsat_in_ascending_order_too() {
    let e = eq(ELEVEN);
    let m = modulus("2^4*3^2*17*19*37*73*97*577");
    let order: Vec<PrimePower> = [16, 9, 17, 19, 37, 73, 97, 577].into_iter().map(pp).collect();
    let out = solvable_mod(&e, &m, Some(&order), &Limits::default()).unwrap();
    assert!(out.is_unsat());
    assert_eq!(out.trace().steps[0].constraints[0].forced_value(), Some(0));
    replay_trace(&e, out.trace()).unwrap();
}

#[test]
fn tampered_trace_is_rejected_at_the_tampered_step() {
    let e = eq(ELEVEN);
    let out = solve(&e, "7031324575728");
    let trace = out.trace();
    for k in 0..trace.steps.len() {
        let Some(i) = trace.steps[k].constraints.iter().position(|c| !c.residues.is_empty()) else {
            continue;
        };
        let mut bad = trace.clone();
        let r = *bad.steps[k].constraints[i].residues.first().unwrap();
        bad.steps[k].constraints[i].residues.remove(&r);
        assert_eq!(replay_trace(&e, &bad).unwrap_err().step, k);
    }
    let mut bad = trace.clone();
    bad.status = TraceStatus::Sat(e.assignment_from_tuple(&[0; 6]).unwrap());
    assert!(replay_trace(&e, &bad).is_err());
    let mut bad = trace.clone();
    bad.steps.pop();
    assert!(replay_trace(&e, &bad).is_err());
}

#[test]
fn sat_witness_for_sum_of_coefficients() {
    let e = eq("2^x*3^y + 5^z - 7^w = 1");
    match solve(&e, "2^4*3^2*5*7*13") {
        Solvability::Sat { witness, .. } => assert!(witness.values().all(|&a| a == 0)),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn reduced_equation_bounds_exponent_of_five() {
    let e = eq("3^a2 + 5^a3 - 13^a6 = 1");
    let out = solve(&e, "5^2*7*11*31*41");
    let Solvability::Sat { trace, .. } = out else { panic!("has solutions") };
    let last = &trace.steps.last().unwrap().constraints;
    let a3 = last.iter().find(|c| c.var == v("a3")).unwrap();
    assert_eq!(a3.max_value(), Some(1));
}

#[test]
fn repeated_base_trace_replays() {
    // 1 + 5^α1 + … + 5^α8 - 17^α9 = 0 with α1 = α2 = α3 = 0.
    let e = eq("4 + 5^a4 + 5^a5 + 5^a6 + 5^a7 + 5^a8 - 17^a9 = 0");
    let out = solve(&e, "2*3*5^2*7*13*31*601");
    replay_trace(&e, out.trace()).unwrap();
}

#[test]
fn single_factor_matches_local_constraints() {
    let e = eq(ELEVEN);
    for q in [16u64, 9, 17, 19] {
        let local = constraints_mod_prime_power(&e, pp(q), &Limits::default()).unwrap();
        let m = Factorization::from_prime_powers(&[pp(q)]);
        let joint = solvable_mod(&e, &m, None, &Limits::default()).unwrap();
        match local {
            LocalConstraints::Unsat => assert!(joint.is_unsat()),
            LocalConstraints::Constraints(cs) => assert_eq!(cs, joint.trace().steps[0].constraints),
        }
    }
}

#[test]
fn long_tracks_are_refused_before_listing() {
    // The order of 2 modulo 19^6 is about 4.5e7.
    let e = eq("2^x - 3^y = 5");
    let err = solvable_mod(&e, &modulus("19^6"), None, &Limits::with_ceiling(1 << 10).without_probe()).unwrap_err();
    assert!(matches!(err, Error::ResourceLimit { ceiling: 1024, .. }), "{err}");
    assert!(JointSet::new(&e).growth(47_045_881).unwrap() > 1 << 20);
}

#[test]
fn ceiling_is_reported() {
    let e = eq(ELEVEN);
    let m = modulus("577");
    let err = solvable_mod(&e, &m, None, &Limits::with_ceiling(4).without_probe()).unwrap_err();
    assert!(matches!(err, Error::ResourceLimit { .. }));
}

#[test]
fn known_solutions_survive_random_smooth_moduli() {
    let e = eq("3^a1 + 5^a2 + 11^a3 + 13^a4 + 17^a5 - 19^a6 = 0");
    let primes: Vec<u64> = smooth_sieve(&SmoothnessSpec::with_bound(200));
    let powers = [2u64, 4, 8, 16, 3, 9, 5, 25];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let mut parts: Vec<u64> = Vec::new();
        parts.push(powers[rng.gen_range(0..powers.len())]);
        for _ in 0..rng.gen_range(1..=4) {
            parts.push(primes[rng.gen_range(0..primes.len())]);
        }
        parts.sort_unstable();
        parts.dedup_by(|a, b| factorize_u64(*a)[0].0 == factorize_u64(*b)[0].0);
        let pps: Vec<PrimePower> = parts.iter().map(|&q| pp(q)).collect();
        let m = Factorization::from_prime_powers(&pps);
        let out = solvable_mod(&e, &m, None, &Limits::with_ceiling(1 << 18)).unwrap();
        assert!(!out.is_unsat(), "m = {m}");
        replay_trace(&e, out.trace()).unwrap();
    }
}

#[test]
fn adding_a_factor_keeps_unsat() {
    let e = eq("4 + 11^a - 19^b = 0");
    let base = solve(&e, "3");
    assert!(base.is_unsat());
    for extra in ["3*7", "3*5^2*31", "2^4*3*13"] {
        assert!(solve(&e, extra).is_unsat(), "{extra}");
    }
}

/// Direct enumeration: exponents below `max tail + λ(m)` cover every
/// residue pattern modulo `m`.
fn brute_force_sat(e: &Equation, m: u64) -> bool {
    let n = e.variables().len();
    let tail = factorize_u64(m).iter().map(|&(_, k)| k as u64).max().unwrap_or(0);
    let span = tail + carmichael(m);
    let total = span.pow(n as u32);
    (0..total).any(|code| {
        let mut c = code;
        let values: Vec<u64> = (0..n)
            .map(|_| {
                let x = c % span;
                c /= span;
                x
            })
            .collect();
        let a = e.assignment_from_tuple(&values).unwrap();
        let r = evaluate(e, &a).unwrap() % BigInt::from(m);
        r == BigInt::from(0)
    })
}

fn small_instance() -> impl Strategy<Value = (Equation, u64)> {
    let term = (
        prop_oneof![-6i64..=-1, 1i64..=6],
        prop::sample::subsequence(vec![2u64, 3, 4, 5, 6, 7], 0..=2),
    );
    (prop::collection::vec(term, 1..=3), -20i64..=20, 2u64..=500).prop_filter_map("valid", |(terms, rhs, m)| {
        let mut k = 0;
        let terms: Vec<Term> = terms
            .into_iter()
            .map(|(c, bases)| Term {
                coefficient: BigInt::from(c),
                powers: bases
                    .into_iter()
                    .map(|b| {
                        k += 1;
                        crate::equation::Power { base: b, var: Var::new(&format!("v{k}")).unwrap() }
                    })
                    .collect(),
            })
            .collect();
        if k > 3 {
            return None;
        }
        Equation::new(terms, rhs, Vec::new()).ok().map(|e| (e, m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn agrees_with_brute_force((e, m) in small_instance()) {
        let f = Factorization::parse(&m.to_string()).unwrap();
        let out = solvable_mod(&e, &f, None, &Limits::default()).unwrap();
        prop_assert_eq!(!out.is_unsat(), brute_force_sat(&e, m));
        if let Solvability::Sat { witness, .. } = &out {
            let r = evaluate(&e, witness).unwrap() % BigInt::from(m);
            prop_assert_eq!(r, BigInt::from(0));
        }
        prop_assert!(replay_trace(&e, out.trace()).is_ok());
        for step in out.trace().steps.windows(2) {
            for (fine, coarse) in step[1].constraints.iter().zip(&step[0].constraints) {
                prop_assert!(fine.refines(coarse));
            }
        }
    }
}
