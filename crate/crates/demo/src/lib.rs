//! Browser demo: three small experiments exposed through wasm-bindgen.
//!
//! Each export has a plain Rust twin so the numbers can be tested natively.

use wasm_bindgen::prelude::*;

use qlab_core::money;
use qlab_core::obf::{blackbox_baseline, make_point_circuit, PlainObfuscator};
use qlab_core::simcore::{
    fidelity, pauli_apply, sample_random_mixed_state, trial_rng, BitString, CountingOracle,
    PauliString, QuantumCircuit, QuantumState, C64,
};
use qlab_core::Result;

fn js(e: qlab_core::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Largest entry of `rho − I/d`.
fn distance_from_uniform(rho: &QuantumState) -> f64 {
    let m = rho.density();
    let d = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { 1.0 / d as f64 } else { 0.0 };
            worst = worst.max((m[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// `[one pad, full twirl]`: distance from `I/2^n` of a single random-pad
/// ciphertext and of the average over all `4^n` pads.
pub fn otp_deviation(n: usize, seed: u32) -> Result<Vec<f64>> {
    let mut rng = trial_rng(u64::from(seed), 0);
    let rho = sample_random_mixed_state(n, 1, &mut rng)?;
    let one = pauli_apply(&PauliString::random(n, &mut rng), &rho)?;
    let d = (1usize << n) as f64;
    let mut twirl = None;
    for p in PauliString::all(n) {
        let term = pauli_apply(&p, &rho)?.density();
        twirl = Some(match twirl {
            None => term,
            Some(acc) => acc + term,
        });
    }
    let twirl =
        QuantumState::from_density(twirl.expect("at least one Pauli").scale(1.0 / (d * d)))?;
    Ok(vec![
        distance_from_uniform(&one),
        distance_from_uniform(&twirl),
    ])
}

/// Flattened `[w, accept, overlap]` triples for candidates
/// `w·ψ + (1 − w)·φ` (normalized) against a fresh bill.
pub fn accept_curve(n: usize, seed: u32, steps: usize) -> Result<Vec<f64>> {
    let mut rng = trial_rng(u64::from(seed), 0);
    let mut bill = money::mint(n, &PlainObfuscator::default(), &mut rng)?;
    let noise = qlab_core::simcore::sample_random_state(n, &mut rng)?;
    let steps = steps.max(1);
    let mut out = Vec::with_capacity(3 * (steps + 1));
    for s in 0..=steps {
        let w = s as f64 / steps as f64;
        let amps: Vec<C64> = bill
            .note()
            .amplitudes()
            .expect("notes are pure")
            .iter()
            .zip(noise.amplitudes().expect("pure").iter())
            .map(|(a, b)| a * w + b * (1.0 - w))
            .collect();
        let phi = QuantumState::from_amplitudes_normalized(amps)?;
        let overlap = fidelity(bill.note(), &phi)?;
        let accept = money::verify(bill.verifier_mut(), &phi)?.accept_prob;
        out.extend([w, accept, overlap]);
    }
    Ok(out)
}

/// Win rate of the random-probe baseline for `q = 0..=max_q` at
/// `trials` games each (point circuit or identity, fair coin).
pub fn baseline_curve(n: usize, max_q: usize, trials: usize, seed: u32) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(max_q + 1);
    for q in 0..=max_q {
        let mut wins = 0usize;
        for t in 0..trials {
            let mut rng = trial_rng(u64::from(seed) ^ ((q as u64) << 32), t as u64);
            let secret = BitString::random(1, &mut rng).get(0);
            let a = BitString::random(n, &mut rng);
            let mut b = BitString::random(n, &mut rng);
            if b.is_zero() {
                b.set(n - 1, true);
            }
            let circuit = if secret {
                QuantumCircuit::identity(2 * n)
            } else {
                make_point_circuit(&a, &b)?
            };
            let mut oracle = [CountingOracle::new(circuit)];
            if blackbox_baseline(&mut oracle, q, &mut rng, None)? != secret {
                wins += 1;
            }
        }
        out.push(wins as f64 / trials.max(1) as f64);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn otp_mixture_deviation(n: usize, seed: u32) -> std::result::Result<Vec<f64>, JsValue> {
    otp_deviation(n.clamp(1, 4), seed).map_err(js)
}

#[wasm_bindgen]
pub fn money_accept_curve(
    n: usize,
    seed: u32,
    steps: usize,
) -> std::result::Result<Vec<f64>, JsValue> {
    accept_curve(n.clamp(1, 5), seed, steps.min(64)).map_err(js)
}

#[wasm_bindgen]
pub fn baseline_success_curve(
    n: usize,
    max_q: usize,
    trials: usize,
    seed: u32,
) -> std::result::Result<Vec<f64>, JsValue> {
    baseline_curve(n.clamp(1, 10), max_q.min(1 << 10), trials.min(20_000), seed).map_err(js)
}
