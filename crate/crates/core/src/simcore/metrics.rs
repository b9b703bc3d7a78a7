use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::circuit::QuantumCircuit;
use super::random::{sample_random_state, trial_rng};
use super::sim::run_circuit;
use super::state::QuantumState;
use crate::{Error, Result};

fn same_size(a: &QuantumState, b: &QuantumState) -> Result<()> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} qubits",
            a.num_qubits(),
            b.num_qubits()
        )));
    }
    Ok(())
}

fn inner(a: &QuantumState, b: &QuantumState) -> Option<C64> {
    let (x, y) = (a.amplitudes()?, b.amplitudes()?);
    Some(x.iter().zip(y.iter()).map(|(p, q)| p.conj() * q).sum())
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().iter().copied().collect()
}

/// `½‖ρ_a − ρ_b‖_1`, in `[0, 1]`.
pub fn trace_distance(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    same_size(a, b)?;
    if let (Some(x), Some(y)) = (a.amplitudes(), b.amplitudes()) {
        // √(1 − |<a|b>|²) written through s = ‖a − e^{iφ} b‖², which avoids
        // the cancellation in 1 − |<a|b>|² for nearly equal states.
        let gap = |x: &nalgebra::DVector<C64>, y: &nalgebra::DVector<C64>| {
            let ov: C64 = y.iter().zip(x.iter()).map(|(p, q)| p.conj() * q).sum();
            let phase = if ov.norm() > 0.0 {
                ov / ov.norm()
            } else {
                C64::new(1.0, 0.0)
            };
            x.iter()
                .zip(y.iter())
                .map(|(p, q)| (p - phase * q).norm_sqr())
                .sum::<f64>()
        };
        let s = 0.5 * (gap(x, y) + gap(y, x));
        return Ok((s - s * s / 4.0).clamp(0.0, 1.0).sqrt());
    }
    let d = a.density() - b.density();
    // Averaging over both signs makes the result exactly symmetric.
    let one = |m: &DMatrix<C64>| {
        hermitian_eigenvalues(m)
            .iter()
            .map(|l| l.abs())
            .sum::<f64>()
    };
    let s = 0.5 * (one(&d) + one(&(-&d)));
    Ok((0.5 * s).clamp(0.0, 1.0))
}

/// Squared fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    same_size(a, b)?;
    if let Some(ov) = inner(a, b) {
        return Ok(ov.norm_sqr());
    }
    let pure_mixed = |p: &QuantumState, m: &QuantumState| {
        let v = p.amplitudes().expect("pure");
        (v.adjoint() * m.density() * v)[(0, 0)].re
    };
    if a.is_pure_mode() {
        return Ok(pure_mixed(a, b).clamp(0.0, 1.0));
    }
    if b.is_pure_mode() {
        return Ok(pure_mixed(b, a).clamp(0.0, 1.0));
    }
    let ra = a.density();
    let sqrt_a = psd_sqrt(&ra);
    let inner = &sqrt_a * b.density() * &sqrt_a;
    let tr: f64 = hermitian_eigenvalues(&inner)
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// `min_α ‖U − e^{iα} V‖` for unitary circuits of equal arity, in `[0, 2]`.
pub fn phase_invariant_distance(u: &QuantumCircuit, v: &QuantumCircuit) -> Result<f64> {
    if u.arity() != v.arity() {
        return Err(Error::ArityMismatch {
            expected: u.arity(),
            actual: v.arity(),
        });
    }
    let (mu, mv) = (u.unitary_matrix()?, v.unitary_matrix()?);
    let w = mv.adjoint() * mu;
    let (_, t) = w.schur().unpack();
    let phases: Vec<f64> = t.diagonal().iter().map(|z| z.arg()).collect();
    Ok(min_max_chord(&phases))
}

/// Minimizes over `α` the largest chord `|e^{iθ_k} − e^{iα}|`.
fn min_max_chord(phases: &[f64]) -> f64 {
    let chord = |a: f64, b: f64| 2.0 * ((a - b) / 2.0).sin().abs();
    let worst = |alpha: f64| phases.iter().map(|&t| chord(t, alpha)).fold(0.0, f64::max);
    let mut sorted: Vec<f64> = phases.iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
    sorted.sort_by(f64::total_cmp);
    // Midpoint of the smallest arc holding every phase.
    let k = sorted.len();
    let (mut gap, mut at) = (2.0 * PI - (sorted[k - 1] - sorted[0]), k - 1);
    for i in 0..k - 1 {
        let g = sorted[i + 1] - sorted[i];
        if g > gap {
            gap = g;
            at = i;
        }
    }
    let arc = 2.0 * PI - gap;
    let start = sorted[(at + 1) % k];
    let mut best = worst(start + arc / 2.0);
    // The optimum is equidistant from two phases; check those candidates too
    // when the spectrum is small enough.
    if k <= 64 {
        for i in 0..k {
            for j in i + 1..k {
                let mid = (sorted[i] + sorted[j]) / 2.0;
                best = best.min(worst(mid)).min(worst(mid + PI));
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDistance {
    /// Trace distance between the Choi states.
    pub lower: f64,
    /// Largest output trace distance over the probe set.
    pub estimate: f64,
}

/// Default number of random probes in [`channel_distance_estimate`].
pub const DEFAULT_PROBES: usize = 8;
const PROBE_SEED: u64 = 0x5eed_d157;

/// Probe-based estimate of the distance between two channels. See
/// [`channel_distance_estimate_with`].
pub fn channel_distance_estimate(
    c: &QuantumCircuit,
    d: &QuantumCircuit,
) -> Result<ChannelDistance> {
    channel_distance_estimate_with(c, d, DEFAULT_PROBES, PROBE_SEED)
}

/// Probes are: the maximally entangled input `Σ|i>|i>/√2^n` with an
/// `n`-qubit reference (giving `lower`), every computational basis input,
/// and `k` random pure inputs on system plus reference. `estimate` is the
/// maximum output trace distance over all of them.
pub fn channel_distance_estimate_with(
    c: &QuantumCircuit,
    d: &QuantumCircuit,
    k: usize,
    seed: u64,
) -> Result<ChannelDistance> {
    if c.arity() != d.arity() {
        return Err(Error::ArityMismatch {
            expected: c.arity(),
            actual: d.arity(),
        });
    }
    if c.output_arity() != d.output_arity() {
        return Err(Error::ArityMismatch {
            expected: c.output_arity(),
            actual: d.output_arity(),
        });
    }
    let n = c.arity();
    let (cr, dr) = (c.with_reference(n), d.with_reference(n));
    let dim = 1usize << n;
    let mut phi = vec![C64::new(0.0, 0.0); dim * dim];
    let amp = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
    for i in 0..dim {
        phi[(i << n) | i] = amp;
    }
    let choi = QuantumState::from_amplitudes(phi)?;
    let dist = |x: &QuantumCircuit, y: &QuantumCircuit, s: &QuantumState| -> Result<f64> {
        trace_distance(&run_circuit(x, s)?, &run_circuit(y, s)?)
    };
    let lower = dist(&cr, &dr, &choi)?;
    let mut estimate = lower;
    for j in 0..dim {
        let s = QuantumState::basis(&super::bits::BitString::from_usize(j, n))?;
        estimate = estimate.max(dist(c, d, &s)?);
    }
    for i in 0..k {
        let mut rng = trial_rng(seed, i as u64);
        let s = sample_random_state(2 * n, &mut rng)?;
        estimate = estimate.max(dist(&cr, &dr, &s)?);
    }
    Ok(ChannelDistance { lower, estimate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::gate::NamedGate;

    fn one(g: NamedGate) -> QuantumCircuit {
        let mut c = QuantumCircuit::new(1);
        c.named(g, &[0], &[]).unwrap();
        c
    }

    #[test]
    fn z_versus_identity() {
        let d = phase_invariant_distance(&one(NamedGate::Z), &QuantumCircuit::new(1)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn global_phase_is_free() {
        // Rz(θ) and Phase(θ) differ by a global phase.
        let d = phase_invariant_distance(&one(NamedGate::Rz(0.9)), &one(NamedGate::Phase(0.9)))
            .unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn chord_solver_matches_brute_force() {
        let phases = [0.1, 1.9, 2.5, 4.0, 5.9];
        let exact = min_max_chord(&phases);
        let brute = (0..200_000)
            .map(|i| {
                let a = i as f64 * 2.0 * PI / 200_000.0;
                phases
                    .iter()
                    .map(|&t| 2.0 * ((t - a) / 2.0).sin().abs())
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(exact <= brute + 1e-12);
        assert!(brute - exact < 1e-4);
    }

    #[test]
    fn channel_estimate_orders() {
        let z = channel_distance_estimate(&one(NamedGate::Z), &QuantumCircuit::new(1)).unwrap();
        assert!((z.lower - 1.0).abs() < 1e-12);
        let x = channel_distance_estimate(&one(NamedGate::X), &QuantumCircuit::new(1)).unwrap();
        assert!(x.estimate > 0.99);
        let same = channel_distance_estimate(&one(NamedGate::H), &one(NamedGate::H)).unwrap();
        assert!(same.lower < 1e-12 && same.estimate < 1e-12);
    }

    #[test]
    fn mixed_fidelity_matches_pure_formula() {
        let a = QuantumState::plus();
        let b = QuantumState::zero(1).unwrap();
        let f = fidelity(&a.to_mixed().unwrap(), &b.to_mixed().unwrap()).unwrap();
        assert!((f - 0.5).abs() < 1e-10);
    }
}
