use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, RngCore};

use super::bits::BitString;
use super::kernel::{self, IndexSplit};
use crate::{Error, Result};

/// Tolerance for state invariants (norm, Hermiticity, trace, positivity).
pub const STATE_TOL: f64 = 1e-10;
/// Largest register simulated as a density operator.
pub const MAX_MIXED_QUBITS: usize = 12;
/// Largest register simulated as a state vector.
pub const MAX_PURE_QUBITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Pure,
    Mixed,
}

#[derive(Clone, Debug)]
enum Repr {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

/// A pure state vector or a density operator on `n` qubits.
///
/// Qubit 0 is the most significant bit of the computational-basis index, so
/// `|x, y>` with `x` on the first register reads left to right.
#[derive(Clone, Debug)]
pub struct QuantumState {
    qubits: usize,
    repr: Repr,
}

pub(crate) fn check_pure_size(qubits: usize) -> Result<()> {
    if qubits > MAX_PURE_QUBITS {
        return Err(Error::TooLarge {
            qubits,
            limit: MAX_PURE_QUBITS,
            mode: "pure",
        });
    }
    Ok(())
}

pub(crate) fn check_mixed_size(qubits: usize) -> Result<()> {
    if qubits > MAX_MIXED_QUBITS {
        return Err(Error::TooLarge {
            qubits,
            limit: MAX_MIXED_QUBITS,
            mode: "mixed",
        });
    }
    Ok(())
}

impl QuantumState {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(&BitString::zeros(n))
    }

    /// Computational basis state `|bits>`.
    pub fn basis(bits: &BitString) -> Result<Self> {
        let n = bits.len();
        check_pure_size(n)?;
        let mut amps = DVector::zeros(1 << n);
        amps[bits.to_usize()] = C64::new(1.0, 0.0);
        Ok(Self {
            qubits: n,
            repr: Repr::Pure(amps),
        })
    }

    /// `(|0> + |1>)/sqrt(2)`.
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_amplitudes(vec![C64::new(h, 0.0), C64::new(h, 0.0)])
            .expect("normalized by construction")
    }

    /// Builds a pure state, requiring unit norm within [`STATE_TOL`].
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = qubits_for_dim(amps.len())?;
        check_pure_size(n)?;
        let norm = kernel::norm_sqr(&amps).sqrt();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self {
            qubits: n,
            repr: Repr::Pure(DVector::from_vec(amps)),
        })
    }

    /// Builds a pure state after rescaling to unit norm.
    pub fn from_amplitudes_normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm = kernel::norm_sqr(&amps).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes(amps)
    }

    /// Builds a density operator, checking Hermiticity, trace and positivity.
    pub fn from_density(rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::InvalidState("density matrix is not square".into()));
        }
        let n = qubits_for_dim(rho.nrows())?;
        check_mixed_size(n)?;
        let state = Self {
            qubits: n,
            repr: Repr::Mixed(rho),
        };
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn from_density_unchecked(rho: DMatrix<C64>) -> Self {
        let n = rho.nrows().trailing_zeros() as usize;
        Self {
            qubits: n,
            repr: Repr::Mixed(rho),
        }
    }

    pub(crate) fn from_pure_unchecked(amps: DVector<C64>) -> Self {
        let n = amps.len().trailing_zeros() as usize;
        Self {
            qubits: n,
            repr: Repr::Pure(amps),
        }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_mixed_size(n)?;
        let d = 1usize << n;
        let rho = DMatrix::from_diagonal_element(d, d, C64::new(1.0 / d as f64, 0.0));
        Ok(Self::from_density_unchecked(rho))
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn mode(&self) -> Mode {
        match self.repr {
            Repr::Pure(_) => Mode::Pure,
            Repr::Mixed(_) => Mode::Mixed,
        }
    }

    pub fn is_pure_mode(&self) -> bool {
        self.mode() == Mode::Pure
    }

    pub fn amplitudes(&self) -> Option<&DVector<C64>> {
        match &self.repr {
            Repr::Pure(a) => Some(a),
            Repr::Mixed(_) => None,
        }
    }

    /// The density operator (computed as an outer product in pure mode).
    pub fn density(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Pure(a) => a * a.adjoint(),
            Repr::Mixed(r) => r.clone(),
        }
    }

    pub fn to_mixed(&self) -> Result<Self> {
        check_mixed_size(self.qubits)?;
        Ok(Self::from_density_unchecked(self.density()))
    }

    /// Checks the invariants of the current representation.
    pub fn validate(&self) -> Result<()> {
        match &self.repr {
            Repr::Pure(a) => {
                let norm = kernel::norm_sqr(a.as_slice()).sqrt();
                if (norm - 1.0).abs() > STATE_TOL {
                    return Err(Error::InvalidState(format!("norm {norm} is not 1")));
                }
            }
            Repr::Mixed(r) => {
                let herm = (r - r.adjoint()).camax();
                if herm > STATE_TOL {
                    return Err(Error::InvalidState(format!("not Hermitian ({herm:.3e})")));
                }
                let tr = r.trace();
                if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
                    return Err(Error::InvalidState(format!("trace {tr} is not 1")));
                }
                let hermitian = (r + r.adjoint()).scale(0.5);
                let min = hermitian
                    .symmetric_eigenvalues()
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                if min < -STATE_TOL {
                    return Err(Error::InvalidState(format!(
                        "negative eigenvalue {min:.3e}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Pure(a) => kernel::norm_sqr(a.as_slice()),
            Repr::Mixed(r) => r.trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 1.0,
            Repr::Mixed(r) => r.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// `self ⊗ other`; stays pure when both factors are pure.
    pub fn tensor(&self, other: &QuantumState) -> Result<Self> {
        let n = self.qubits + other.qubits;
        match (&self.repr, &other.repr) {
            (Repr::Pure(a), Repr::Pure(b)) => {
                check_pure_size(n)?;
                Ok(Self::from_pure_unchecked(a.kronecker(b)))
            }
            _ => {
                check_mixed_size(n)?;
                Ok(Self::from_density_unchecked(
                    self.density().kronecker(&other.density()),
                ))
            }
        }
    }

    fn check_wires(&self, wires: &[usize]) -> Result<()> {
        for (i, &w) in wires.iter().enumerate() {
            if w >= self.qubits {
                return Err(Error::IndexOutOfRange {
                    index: w,
                    qubits: self.qubits,
                });
            }
            if wires[..i].contains(&w) {
                return Err(Error::InvalidState(format!("wire {w} listed twice")));
            }
        }
        Ok(())
    }

    /// Reduced density operator on `keep` (in the order given).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        self.check_wires(keep)?;
        check_mixed_size(keep.len())?;
        let split = IndexSplit::new(self.qubits, keep);
        let kd = split.kept_dim();
        let mut out = DMatrix::<C64>::zeros(kd, kd);
        match &self.repr {
            Repr::Pure(a) => {
                let rd = split.rest_dim();
                let mut m = DMatrix::<C64>::zeros(kd, rd);
                for (i, amp) in a.iter().enumerate() {
                    let (k, r) = split.split(i);
                    m[(k, r)] = *amp;
                }
                out = &m * m.adjoint();
            }
            Repr::Mixed(rho) => {
                let d = self.dim();
                let parts: Vec<(usize, usize)> = (0..d).map(|i| split.split(i)).collect();
                for c in 0..d {
                    let (kc, rc) = parts[c];
                    for r in 0..d {
                        let (kr, rr) = parts[r];
                        if rr == rc {
                            out[(kr, kc)] += rho[(r, c)];
                        }
                    }
                }
            }
        }
        Ok(Self::from_density_unchecked(out))
    }

    /// Reduced state on `keep`, returned in pure mode when the register is
    /// (within `tol`) in a product state with the rest, otherwise mixed.
    pub fn reduce(&self, keep: &[usize], tol: f64) -> Result<Self> {
        if keep.len() == self.qubits && keep.iter().enumerate().all(|(i, &w)| i == w) {
            return Ok(self.clone());
        }
        if let Some(pure) = self.try_pure_reduction(keep, tol)? {
            return Ok(pure);
        }
        self.partial_trace(keep)
    }

    /// Pure factor on `keep` if the pure global state is a product across the
    /// cut (residual weight below `tol`).
    pub fn try_pure_reduction(&self, keep: &[usize], tol: f64) -> Result<Option<Self>> {
        self.check_wires(keep)?;
        let Repr::Pure(a) = &self.repr else {
            return Ok(None);
        };
        let split = IndexSplit::new(self.qubits, keep);
        let (kd, rd) = (split.kept_dim(), split.rest_dim());
        let mut cols = vec![C64::new(0.0, 0.0); kd * rd];
        for (i, amp) in a.iter().enumerate() {
            let (k, r) = split.split(i);
            cols[r * kd + k] = *amp;
        }
        let best = (0..rd)
            .max_by(|&x, &y| {
                let nx = kernel::norm_sqr(&cols[x * kd..(x + 1) * kd]);
                let ny = kernel::norm_sqr(&cols[y * kd..(y + 1) * kd]);
                nx.total_cmp(&ny)
            })
            .unwrap_or(0);
        let v = &cols[best * kd..(best + 1) * kd];
        let norm = kernel::norm_sqr(v).sqrt();
        if norm == 0.0 {
            return Ok(None);
        }
        let v: Vec<C64> = v.iter().map(|z| z / norm).collect();
        let mut residual = 0.0;
        for r in 0..rd {
            let col = &cols[r * kd..(r + 1) * kd];
            let proj: C64 = v.iter().zip(col).map(|(x, y)| x.conj() * y).sum();
            residual += col
                .iter()
                .zip(&v)
                .map(|(c, x)| (c - proj * x).norm_sqr())
                .sum::<f64>();
        }
        if residual > tol {
            return Ok(None);
        }
        Ok(Some(Self::from_pure_unchecked(DVector::from_vec(v))))
    }

    /// Computational-basis probabilities of the whole register.
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Pure(a) => a.iter().map(|z| z.norm_sqr()).collect(),
            Repr::Mixed(r) => (0..self.dim()).map(|i| r[(i, i)].re.max(0.0)).collect(),
        }
    }

    /// Marginal distribution of `wires` in the computational basis.
    pub fn marginal_probabilities(&self, wires: &[usize]) -> Result<Vec<f64>> {
        self.check_wires(wires)?;
        let split = IndexSplit::new(self.qubits, wires);
        let mut out = vec![0.0; split.kept_dim()];
        for (i, p) in self.probabilities().into_iter().enumerate() {
            out[split.split(i).0] += p;
        }
        Ok(out)
    }

    /// Samples a computational-basis measurement of `wires` without
    /// collapsing the state.
    pub fn sample_measurement(
        &self,
        wires: &[usize],
        rng: &mut (impl RngCore + ?Sized),
    ) -> Result<BitString> {
        let probs = self.marginal_probabilities(wires)?;
        let total: f64 = probs.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            if u < *p {
                pick = i;
                break;
            }
            u -= p;
        }
        Ok(BitString::from_usize(pick, wires.len()))
    }

    /// The most likely basis outcome of `wires` and its probability.
    pub fn most_likely(&self, wires: &[usize]) -> Result<(BitString, f64)> {
        let probs = self.marginal_probabilities(wires)?;
        let (i, p) = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, p)| (i, *p))
            .unwrap_or((0, 0.0));
        Ok((BitString::from_usize(i, wires.len()), p))
    }

    pub(crate) fn apply_matrix(
        &mut self,
        targets: &[usize],
        controls: &[(usize, bool)],
        m: &[C64],
    ) {
        let n = self.qubits;
        match &mut self.repr {
            Repr::Pure(a) => kernel::apply_matrix(a.as_mut_slice(), n, targets, controls, m),
            Repr::Mixed(rho) => {
                let (row_t, row_c) = shift_wires(targets, controls, n);
                kernel::apply_matrix(rho.as_mut_slice(), 2 * n, &row_t, &row_c, m);
                let conj: Vec<C64> = m.iter().map(|z| z.conj()).collect();
                kernel::apply_matrix(rho.as_mut_slice(), 2 * n, targets, controls, &conj);
            }
        }
    }

    /// Applies the two-operator channel `K0 = P_c' + P_c M0`, `K1 = P_c M1`
    /// where `P_c` projects onto the control-satisfied subspace.
    pub(crate) fn apply_controlled_channel(
        &mut self,
        target: usize,
        controls: &[(usize, bool)],
        m0: &[C64; 4],
        m1: &[C64; 4],
    ) {
        let n = self.qubits;
        let Repr::Mixed(rho) = &mut self.repr else {
            panic!("channel application requires mixed mode");
        };
        let mut branch = rho.clone();
        let (row_t, row_c) = shift_wires(&[target], controls, n);
        let conj = |m: &[C64; 4]| -> [C64; 4] { m.map(|z| z.conj()) };

        kernel::apply_matrix(rho.as_mut_slice(), 2 * n, &row_t, &row_c, m0);
        kernel::apply_matrix(rho.as_mut_slice(), 2 * n, &[target], controls, &conj(m0));

        kernel::apply_matrix(branch.as_mut_slice(), 2 * n, &row_t, &row_c, m1);
        kernel::apply_matrix(branch.as_mut_slice(), 2 * n, &[target], controls, &conj(m1));
        if !controls.is_empty() {
            kernel::zero_outside(branch.as_mut_slice(), 2 * n, &row_c);
            kernel::zero_outside(branch.as_mut_slice(), 2 * n, controls);
        }
        *rho += branch;
    }

    pub(crate) fn pure_amps_mut(&mut self) -> Option<&mut DVector<C64>> {
        match &mut self.repr {
            Repr::Pure(a) => Some(a),
            Repr::Mixed(_) => None,
        }
    }

    pub(crate) fn mixed_mut(&mut self) -> Option<&mut DMatrix<C64>> {
        match &mut self.repr {
            Repr::Mixed(r) => Some(r),
            Repr::Pure(_) => None,
        }
    }

    /// Conditions on `wire` reading `value`. Returns the outcome probability
    /// and, when it is nonzero, the normalized state of the other qubits.
    pub fn postselect(&self, wire: usize, value: bool) -> Result<(f64, Option<Self>)> {
        self.check_wires(&[wire])?;
        if self.qubits < 2 {
            return Err(Error::InvalidState(
                "nothing left after postselection".into(),
            ));
        }
        let bit = 1usize << (self.qubits - 1 - wire);
        let miss = |i: usize| (i & bit != 0) != value;
        let zero = C64::new(0.0, 0.0);
        let (p, repr) = match &self.repr {
            Repr::Pure(a) => {
                let mut a = a.clone();
                for (i, z) in a.iter_mut().enumerate() {
                    if miss(i) {
                        *z = zero;
                    }
                }
                let p = kernel::norm_sqr(a.as_slice());
                if p > 0.0 {
                    a /= C64::new(p.sqrt(), 0.0);
                }
                (p, Repr::Pure(a))
            }
            Repr::Mixed(r) => {
                let mut r = r.clone();
                let d = r.nrows();
                for j in 0..d {
                    for i in 0..d {
                        if miss(i) || miss(j) {
                            r[(i, j)] = zero;
                        }
                    }
                }
                let p = r.trace().re;
                if p > 0.0 {
                    r /= C64::new(p, 0.0);
                }
                (p, Repr::Mixed(r))
            }
        };
        if p <= 0.0 {
            return Ok((0.0, None));
        }
        let keep: Vec<usize> = (0..self.qubits).filter(|&w| w != wire).collect();
        let projected = Self {
            qubits: self.qubits,
            repr,
        };
        Ok((p, Some(projected.reduce(&keep, super::sim::PRODUCT_TOL)?)))
    }

    /// Appends `extra` qubits in `|0>`.
    pub fn with_zero_ancillas(&self, extra: usize) -> Result<Self> {
        if extra == 0 {
            return Ok(self.clone());
        }
        self.tensor(&Self::zero(extra)?)
    }
}

fn shift_wires(
    targets: &[usize],
    controls: &[(usize, bool)],
    n: usize,
) -> (Vec<usize>, Vec<(usize, bool)>) {
    (
        targets.iter().map(|t| t + n).collect(),
        controls.iter().map(|&(w, v)| (w + n, v)).collect(),
    )
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}
