use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::state::{check_mixed_size, check_pure_size, QuantumState};
use crate::{Error, Result};

/// Per-trial seed derived from a master seed and a counter (splitmix64
/// finalizer over both words).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The RNG for trial `index` under `master`.
pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

fn gaussian(rng: &mut (impl RngCore + ?Sized)) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Haar-random pure state: a normalized vector of complex Gaussians.
pub fn sample_random_state(n: usize, rng: &mut (impl RngCore + ?Sized)) -> Result<QuantumState> {
    check_pure_size(n)?;
    let amps: Vec<C64> = (0..1usize << n).map(|_| gaussian(rng)).collect();
    QuantumState::from_amplitudes_normalized(amps)
}

/// Random mixed state of rank `rank`: the reduction of a Haar-random pure
/// state with a `rank`-dimensional environment.
pub fn sample_random_mixed_state(
    n: usize,
    rank: usize,
    rng: &mut (impl RngCore + ?Sized),
) -> Result<QuantumState> {
    check_mixed_size(n)?;
    let d = 1usize << n;
    let g = DMatrix::<C64>::from_fn(d, rank.max(1), |_, _| gaussian(rng));
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    QuantumState::from_density(rho)
}

/// Haar-random unitary on `n` qubits (QR of a Ginibre matrix with the phases
/// of `R`'s diagonal pulled back into `Q`).
pub fn haar_unitary(n: usize, rng: &mut (impl RngCore + ?Sized)) -> Result<DMatrix<C64>> {
    check_mixed_size(n)?;
    let d = 1usize << n;
    let z = DMatrix::<C64>::from_fn(d, d, |_, _| gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// A unitary `U` with `U|0...0> = |ψ>` (a phased Householder reflection).
pub fn state_prep_unitary(psi: &DVector<C64>) -> Result<DMatrix<C64>> {
    let d = psi.len();
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::InvalidState(format!(
            "dimension {d} is not a power of two"
        )));
    }
    let phase = if psi[0].norm() > 0.0 {
        psi[0] / psi[0].norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let mut v = psi / phase;
    v[0] -= C64::new(1.0, 0.0);
    let vv = v.norm_squared();
    let id = DMatrix::<C64>::identity(d, d);
    let h = if vv < 1e-30 {
        id
    } else {
        id - (&v * v.adjoint()) * C64::new(2.0 / vv, 0.0)
    };
    Ok(h * phase)
}
