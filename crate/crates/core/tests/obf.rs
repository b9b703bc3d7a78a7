mod common;

use proptest::prelude::*;
use qlab_core::obf::{
    adversary_checker, adversary_homomorphic, blackbox_baseline, combine, make_checker_circuit,
    make_lemma_family, make_point_circuit, sample_unobf_family, sample_unobf_family_with,
    AdviceCodec, BasisStateObfuscator, FamilyLayout, Interpreter, Obfuscator, PlainObfuscator,
    SELECTOR_MAIN,
};
use qlab_core::simcore::{
    fidelity, run_circuit, sample_random_mixed_state, sample_random_state, trace_distance,
    trial_rng, BitString, CountingOracle, QuantumCircuit, QuantumState,
};
use qlab_core::Error;

use common::{build_circuit, build_classical_circuit, gate_specs};

fn bits(s: &str) -> BitString {
    BitString::parse(s).unwrap()
}

fn all_bits(n: usize) -> impl Iterator<Item = BitString> {
    (0..1usize << n).map(move |v| BitString::from_usize(v, n))
}

fn basis(b: &BitString) -> QuantumState {
    QuantumState::basis(b).unwrap()
}

#[test]
fn point_circuit_truth_table() {
    let n = 2;
    for a in all_bits(n) {
        for b in all_bits(n) {
            let c = make_point_circuit(&a, &b).unwrap();
            let mut twice = c.clone();
            twice.append(&c, &[0, 1, 2, 3]).unwrap();
            for x in all_bits(n) {
                for y in all_bits(n) {
                    let input = x.concat(&y);
                    let want = if x == a {
                        x.concat(&y.xor(&b).unwrap())
                    } else {
                        input.clone()
                    };
                    assert_eq!(c.eval_classical(&input).unwrap(), want);
                    assert_eq!(twice.eval_classical(&input).unwrap(), input);
                }
            }
        }
    }
    assert!(matches!(
        make_point_circuit(&bits("10"), &bits("1")),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn plain_obfuscation_is_canonical_and_parses_back() {
    let obf = PlainObfuscator::default();
    let c = make_point_circuit(&bits("011"), &bits("110")).unwrap();
    let r = bits("1011");
    let p1 = obf.obfuscate(&c, &r).unwrap();
    let p2 = obf.obfuscate(&c, &r).unwrap();
    assert_eq!(p1.description().unwrap(), p2.description().unwrap());
    assert_eq!(p1.circuit().unwrap().gates(), c.gates());
    assert!(p1.uses_remaining().is_none());

    let mut id = obf.obfuscate(&QuantumCircuit::identity(2), &r).unwrap();
    let rho = sample_random_mixed_state(2, 2, &mut trial_rng(300, 0)).unwrap();
    assert!(trace_distance(&id.interpret(&rho).unwrap(), &rho).unwrap() < 1e-12);

    let mut p = obf.obfuscate(&c, &r).unwrap();
    let out = p.interpret(&basis(&bits("011000"))).unwrap();
    assert!(fidelity(&out, &basis(&bits("011110"))).unwrap() > 1.0 - 1e-12);
}

#[test]
fn finite_programs_run_out() {
    let mut p = PlainObfuscator::with_uses(1)
        .obfuscate(&QuantumCircuit::identity(1), &bits(""))
        .unwrap();
    let zero = QuantumState::zero(1).unwrap();
    p.interpret(&zero).unwrap();
    assert_eq!(p.uses_remaining(), Some(0));
    assert!(matches!(p.interpret(&zero), Err(Error::UsesExhausted)));
}

#[test]
fn state_form_matches_description_form_on_every_point() {
    let n = 2;
    let mut rng = trial_rng(301, 0);
    let plain = PlainObfuscator::default();
    for a in all_bits(n) {
        for b in all_bits(n) {
            let c = make_point_circuit(&a, &b).unwrap();
            let rho = sample_random_state(2 * n, &mut rng).unwrap();
            let want = plain
                .obfuscate(&c, &bits(""))
                .unwrap()
                .interpret(&rho)
                .unwrap();
            for interp in [
                Interpreter::PointCoherent { n },
                Interpreter::MeasureDispatch(AdviceCodec::Point { n }),
            ] {
                let mut p = BasisStateObfuscator::new(interp)
                    .obfuscate(&c, &bits(""))
                    .unwrap();
                assert!(p.description().is_err());
                let got = p.interpret(&rho).unwrap();
                assert!(
                    trace_distance(&got, &want).unwrap() < 1e-10,
                    "{}",
                    interp.id()
                );
            }
        }
    }
}

fn checker_fires(checker: &QuantumCircuit, advice: &BitString) -> f64 {
    run_circuit(checker, &basis(advice))
        .unwrap()
        .probabilities()[1]
}

#[test]
fn checker_fires_on_its_point_only() {
    let n = 2;
    let m = 2 * n + 1;
    let point = BasisStateObfuscator::new(Interpreter::PointCoherent { n });
    let mut fired = 0.0;
    let mut total = 0.0;
    for a in all_bits(n) {
        for b in all_bits(n) {
            let d = make_checker_circuit(&a, &b, m).unwrap();
            let own = point
                .find_advice(&make_point_circuit(&a, &b).unwrap())
                .unwrap();
            assert!((checker_fires(&d, &own) - 1.0).abs() < 1e-12);
            let id = point.find_advice(&QuantumCircuit::identity(2 * n)).unwrap();
            if !b.is_zero() {
                assert!(checker_fires(&d, &id) < 1e-12);
            }
            for advice in all_bits(m) {
                fired += checker_fires(&d, &advice);
                total += 1.0;
            }
        }
    }
    assert!(fired / total <= 0.5f64.powi(n as i32) + 1e-12);
    assert!(matches!(
        make_checker_circuit(&bits("10"), &bits("01"), 4),
        Err(Error::UnknownInterpreter(_))
    ));
}

#[test]
fn checker_uncomputes_its_work_register() {
    let n = 2;
    let m = 2 * n + 1;
    for a in all_bits(n) {
        for b in all_bits(n) {
            let mut d = make_checker_circuit(&a, &b, m).unwrap();
            d.set_outputs((0..m + 2 * n + 1).collect()).unwrap();
            let work: Vec<usize> = (m..m + 2 * n).collect();
            let want = basis(&a.concat(&BitString::zeros(n)));
            for advice in all_bits(m) {
                let out = run_circuit(&d, &basis(&advice)).unwrap();
                let w = out.partial_trace(&work).unwrap();
                assert!(fidelity(&w, &want).unwrap() >= 1.0 - 1e-9);
            }
        }
    }
}

#[test]
fn checker_adversary_through_obfuscated_programs() {
    let n = 2;
    let mut rng = trial_rng(302, 0);
    let plain = PlainObfuscator::default();
    for _ in 0..10 {
        let a = BitString::random(n, &mut rng);
        let b = loop {
            let b = BitString::random(n, &mut rng);
            if !b.is_zero() {
                break b;
            }
        };
        let mut d = plain
            .obfuscate(&make_checker_circuit(&a, &b, 2 * n + 1).unwrap(), &bits(""))
            .unwrap();
        let u = plain
            .obfuscate(&make_point_circuit(&a, &b).unwrap(), &bits(""))
            .unwrap();
        let id = plain
            .obfuscate(&QuantumCircuit::identity(2 * n), &bits(""))
            .unwrap();
        assert!(adversary_checker(&u, &mut d, n, &mut rng).unwrap());
        assert!(!adversary_checker(&id, &mut d, n, &mut rng).unwrap());
    }
}

#[test]
fn combine_examples() {
    let mut x = QuantumCircuit::new(1);
    x.x(0).unwrap();
    let c = combine(vec![x, QuantumCircuit::identity(1)])
        .unwrap()
        .to_circuit()
        .unwrap();
    assert_eq!(c.eval_classical(&bits("00")).unwrap(), bits("01"));
    assert_eq!(c.eval_classical(&bits("10")).unwrap(), bits("10"));

    let a = bits("10");
    let b = bits("11");
    let mut other = QuantumCircuit::new(4);
    other.h(0).unwrap();
    let cc = combine(vec![make_point_circuit(&a, &b).unwrap(), other]).unwrap();
    let out = run_circuit(&cc.to_circuit().unwrap(), &basis(&bits("01000"))).unwrap();
    assert!(fidelity(&out, &basis(&bits("01011"))).unwrap() > 1.0 - 1e-12);

    assert!(combine(vec![QuantumCircuit::identity(1)]).is_err());
    assert!(matches!(
        combine(vec![
            QuantumCircuit::identity(1),
            QuantumCircuit::identity(2)
        ]),
        Err(Error::ArityMismatch { .. })
    ));
}

#[test]
fn family_samples_behave_as_described() {
    let n = 2;
    let mut rng = trial_rng(303, 0);
    let l = FamilyLayout::new(n);
    for secret in [false, true] {
        let s = sample_unobf_family_with(n, secret, &mut rng).unwrap();
        assert_eq!(s.secret, secret);
        let w = &s.witness;
        let main = s.circuit.branch(SELECTOR_MAIN).unwrap();
        for x in all_bits(n) {
            let rest = BitString::zeros(main.arity() - 2 * n);
            let input = x.concat(&BitString::zeros(n)).concat(&rest);
            let out = main.eval_classical(&input).unwrap();
            let y = out.slice(n..2 * n);
            if !secret && x == w.a {
                assert_eq!(y, w.b);
            } else {
                assert!(y.is_zero());
            }
        }
        let lemma = make_lemma_family(&w.k, &w.a, &w.b, &w.r).unwrap();
        assert_eq!(&s.circuit.branches()[1..], lemma.branches());
        assert_eq!(main.arity(), l.register_width());
    }
    let s = sample_unobf_family(n, &mut rng).unwrap();
    assert!(!s.witness.b.is_zero());
}

#[test]
fn homomorphic_attack_spends_the_documented_uses() {
    let n = 2;
    let mut rng = trial_rng(304, 0);
    for secret in [false, true] {
        let s = sample_unobf_family_with(n, secret, &mut rng).unwrap();
        let c = s.circuit.to_circuit().unwrap();

        let budget = 64;
        let mut copies = [PlainObfuscator::with_uses(budget)
            .obfuscate(&c, &bits("01"))
            .unwrap()];
        let out = adversary_homomorphic(&mut copies, n, &mut rng).unwrap();
        assert_eq!(out.guess, !secret);
        assert_eq!(out.interpretations, out.gates + 3);
        assert_eq!(
            copies[0].uses_remaining(),
            Some(budget - out.interpretations as u32)
        );

        let state_obf =
            BasisStateObfuscator::new(Interpreter::MeasureDispatch(AdviceCodec::UnobfFamily { n }))
                .with_uses(budget);
        let mut copies = [
            state_obf.obfuscate(&c, &bits("")).unwrap(),
            state_obf.obfuscate(&c, &bits("")).unwrap(),
        ];
        let out = adversary_homomorphic(&mut copies, n, &mut rng).unwrap();
        assert_eq!(out.guess, !secret);
        assert_eq!(out.interpretations, out.gates + 4);
        assert_eq!(
            copies[0].uses_remaining(),
            Some(budget - out.gates as u32 - 3)
        );
        assert_eq!(copies[1].uses_remaining(), Some(budget - 1));

        let mut one = [state_obf.obfuscate(&c, &bits("")).unwrap()];
        assert!(matches!(
            adversary_homomorphic(&mut one, n, &mut rng),
            Err(Error::InsufficientCopies { need: 2, got: 1 })
        ));
    }
}

/// Success rate of the random-probe baseline at telling `U_{a,b}` from the
/// identity, each with probability one half.
fn baseline_success(n: usize, q: usize, trials: usize, seed: u64, hinted: bool) -> f64 {
    let mut wins = 0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let a = BitString::random(n, &mut rng);
        let b = BitString::ones(n);
        let marked = BitString::random(1, &mut rng).get(0);
        let c = if marked {
            make_point_circuit(&a, &b).unwrap()
        } else {
            QuantumCircuit::identity(2 * n)
        };
        let mut o = [CountingOracle::new(c)];
        let guess = blackbox_baseline(&mut o, q, &mut rng, hinted.then_some(&a)).unwrap();
        assert_eq!(o[0].queries(), q);
        wins += usize::from(guess == marked);
    }
    wins as f64 / trials as f64
}

#[test]
fn baseline_without_queries_is_blind() {
    let trials = 10_000;
    let p = baseline_success(8, 0, trials, 305, false);
    let sigma = 0.5 / (trials as f64).sqrt();
    assert!((p - 0.5).abs() <= 3.0 * sigma, "{p}");
}

#[test]
fn baseline_few_queries_barely_help() {
    let p = baseline_success(8, 4, 5000, 306, false);
    assert!(p <= 0.5 + 4.0 / 256.0 + 0.05, "{p}");
}

#[test]
fn baseline_told_the_point_always_wins() {
    assert_eq!(baseline_success(8, 1, 500, 307, true), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn plain_obfuscation_preserves_function(
        n in 1usize..=4,
        specs in gate_specs(20),
        measure in any::<Option<usize>>(),
        seed in any::<u64>(),
    ) {
        let mut c = build_circuit(n, &specs);
        if let Some(w) = measure {
            c.measure(w % n).unwrap();
        }
        let mut rng = trial_rng(seed, 0);
        let rho = sample_random_mixed_state(n, 2, &mut rng).unwrap();
        let obf = PlainObfuscator::default();
        let mut p = obf.obfuscate(&c, &BitString::random(16, &mut rng)).unwrap();
        prop_assert!(p.size() <= obf.size_bound(&c));
        let got = p.interpret(&rho).unwrap();
        prop_assert!(trace_distance(&got, &run_circuit(&c, &rho).unwrap()).unwrap() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn combined_circuit_dispatches_exactly(
        n in 1usize..=3,
        k in 2usize..=4,
        specs in prop::collection::vec(gate_specs(8), 4),
    ) {
        let branches: Vec<QuantumCircuit> = specs[..k].iter().map(|s| build_classical_circuit(n, s)).collect();
        let cc = combine(branches.clone()).unwrap();
        let s = cc.selector_width();
        prop_assert_eq!(s, (k as f64).log2().ceil() as usize);
        let c = cc.to_circuit().unwrap();
        for sel in 0..1usize << s {
            let sb = BitString::from_usize(sel, s);
            for x in all_bits(n) {
                let out = c.eval_classical(&sb.concat(&x)).unwrap();
                let want = match branches.get(sel) {
                    Some(b) => b.eval_classical(&x).unwrap(),
                    None => x.clone(),
                };
                prop_assert_eq!(out, sb.concat(&want));
            }
        }
    }
}
