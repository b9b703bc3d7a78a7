use nalgebra::DMatrix;
use qlab_core::obf::PlainObfuscator;
use qlab_core::simcore::{
    channel_distance_estimate, fidelity, sample_random_mixed_state, sample_random_state, trial_rng,
    BitString, QuantumState, C64,
};
use qlab_core::witenc::{
    encryption_circuit, soundness_bound, we_decrypt, we_encrypt, ToyVerifier, MAX_PAYLOAD_QUBITS,
    MAX_WITNESS_QUBITS,
};
use qlab_core::Error;

/// The acceptance operator `A` with `p(w) = <w|A|w>`, recovered by
/// polarization from acceptance probabilities of basis states and their
/// pairwise superpositions.
fn acceptance_operator(v: &ToyVerifier) -> DMatrix<C64> {
    let n = v.witness_qubits();
    let d = 1usize << n;
    let p = |amps: Vec<C64>| {
        v.acceptance_probability(&QuantumState::from_amplitudes_normalized(amps).unwrap())
            .unwrap()
    };
    let e = |i: usize, j: usize, phase: C64| {
        let mut a = vec![C64::new(0.0, 0.0); d];
        a[i] += C64::new(1.0, 0.0);
        a[j] += phase;
        a
    };
    let mut m = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(p(e(i, i, C64::new(0.0, 0.0))), 0.0);
    }
    for i in 0..d {
        for j in i + 1..d {
            // p(|i> + φ|j>) = (A_ii + A_jj + 2 Re(φ A_ij)) / 2
            let re = p(e(i, j, C64::new(1.0, 0.0))) - (m[(i, i)].re + m[(j, j)].re) / 2.0;
            let im = p(e(i, j, C64::new(0.0, 1.0))) - (m[(i, i)].re + m[(j, j)].re) / 2.0;
            m[(i, j)] = C64::new(re, -im);
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    m
}

fn largest_eigenvalue(m: DMatrix<C64>) -> f64 {
    m.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::MIN, f64::max)
}

#[test]
fn verifier_profiles() {
    let mut rng = trial_rng(500, 0);
    for n in 1..=MAX_WITNESS_QUBITS {
        let yes = ToyVerifier::yes_instance(n, &mut rng).unwrap();
        let a = acceptance_operator(&yes);
        assert!((largest_eigenvalue(a.clone()) - 1.0).abs() < 1e-9);
        let w = yes.witness().unwrap().amplitudes().unwrap();
        assert!((w.dotc(&(&a * w)).re - 1.0).abs() < 1e-9);

        let no = ToyVerifier::no_instance(n, &mut rng).unwrap();
        assert!(largest_eigenvalue(acceptance_operator(&no)) <= soundness_bound(n) + 1e-12);
        assert!(soundness_bound(n) <= 0.5f64.powi(n as i32));
    }
    assert!(matches!(
        ToyVerifier::yes_instance(MAX_WITNESS_QUBITS + 1, &mut rng),
        Err(Error::TooLarge { .. })
    ));
}

#[test]
fn completeness_over_yes_instances() {
    let mut rng = trial_rng(501, 0);
    let obf = PlainObfuscator::default();
    for n in 2..=3 {
        for i in 0..20 {
            let v = ToyVerifier::yes_instance(n, &mut rng).unwrap();
            let rho = if i % 2 == 0 {
                sample_random_state(1 + i % MAX_PAYLOAD_QUBITS, &mut rng).unwrap()
            } else {
                sample_random_mixed_state(1, 2, &mut rng).unwrap()
            };
            let mut ct = we_encrypt(&v, &rho, &obf, &mut rng).unwrap();
            let out = we_decrypt(&mut ct, v.witness().unwrap()).unwrap();
            let f = fidelity(&out, &rho).unwrap();
            assert!(f >= 1.0 - 0.5f64.powi(n as i32) - 1e-6, "n={n}: {f}");
        }
    }
}

#[test]
fn garbage_witness_yields_mostly_zero() {
    let mut rng = trial_rng(502, 0);
    let obf = PlainObfuscator::default();
    for n in 2..=3 {
        let v = ToyVerifier::yes_instance(n, &mut rng).unwrap();
        let rho = sample_random_state(2, &mut rng).unwrap();
        let mut ct = we_encrypt(&v, &rho, &obf, &mut rng).unwrap();
        let out = we_decrypt(&mut ct, &QuantumState::maximally_mixed(n).unwrap()).unwrap();
        let zero = QuantumState::zero(2).unwrap();
        assert!(fidelity(&out, &zero).unwrap() >= 1.0 - 0.5f64.powi(n as i32) - 1e-9);
    }
}

#[test]
fn no_instance_encryptions_are_close_channels() {
    let mut rng = trial_rng(503, 0);
    for n in 2..=3 {
        for _ in 0..20 {
            let v = ToyVerifier::no_instance(n, &mut rng).unwrap();
            let r1 = sample_random_mixed_state(1, 2, &mut rng).unwrap();
            let r2 = sample_random_state(1, &mut rng).unwrap();
            let d = channel_distance_estimate(
                &encryption_circuit(&v, &r1).unwrap(),
                &encryption_circuit(&v, &r2).unwrap(),
            )
            .unwrap();
            assert!(
                d.estimate <= 0.5f64.powi(n as i32) + 1e-4,
                "n={n}: {}",
                d.estimate
            );
            assert!(d.lower <= d.estimate + 1e-12);
        }
    }
}

#[test]
fn ciphertexts_are_one_shot_when_asked() {
    let mut rng = trial_rng(504, 0);
    let v = ToyVerifier::yes_instance(2, &mut rng).unwrap();
    let rho = QuantumState::basis(&BitString::parse("1").unwrap()).unwrap();
    let mut ct = we_encrypt(&v, &rho, &PlainObfuscator::with_uses(1), &mut rng).unwrap();
    let w = v.witness().unwrap();
    assert!(fidelity(&we_decrypt(&mut ct, w).unwrap(), &rho).unwrap() > 0.75);
    assert!(matches!(we_decrypt(&mut ct, w), Err(Error::UsesExhausted)));

    assert!(matches!(
        encryption_circuit(&v, &QuantumState::zero(MAX_PAYLOAD_QUBITS + 1).unwrap()),
        Err(Error::PayloadTooLarge { .. })
    ));
}
