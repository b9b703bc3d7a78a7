//! Amplitude-level kernels shared by the pure and mixed simulators.
//!
//! Wire `w` of an `n`-wire register is bit `n - 1 - w` of the basis index.
//! A density matrix of `n` qubits stored column-major is treated as a
//! `2n`-wire vector whose first `n` wires carry the column index and whose
//! last `n` wires carry the row index.

use num_complex::Complex64 as C64;

#[inline]
pub(crate) fn bit(nwires: usize, wire: usize) -> usize {
    1usize << (nwires - 1 - wire)
}

/// Bit masks describing where a (controlled) gate acts.
pub(crate) struct Footprint {
    free: usize,
    cmask: usize,
    cval: usize,
    offsets: Vec<usize>,
}

impl Footprint {
    pub(crate) fn new(nwires: usize, targets: &[usize], controls: &[(usize, bool)]) -> Self {
        let full = if nwires == usize::BITS as usize {
            usize::MAX
        } else {
            (1usize << nwires) - 1
        };
        let tmask = targets.iter().fold(0, |m, &t| m | bit(nwires, t));
        let (cmask, cval) = controls.iter().fold((0, 0), |(m, v), &(w, val)| {
            (m | bit(nwires, w), if val { v | bit(nwires, w) } else { v })
        });
        let k = targets.len();
        let offsets = (0..1usize << k)
            .map(|j| {
                targets.iter().enumerate().fold(0, |acc, (t, &w)| {
                    if (j >> (k - 1 - t)) & 1 == 1 {
                        acc | bit(nwires, w)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        Self {
            free: full & !tmask & !cmask,
            cmask,
            cval,
            offsets,
        }
    }

    /// Calls `f(base)` for every index whose target bits are zero and whose
    /// control bits match.
    #[inline]
    fn for_each_base(&self, mut f: impl FnMut(usize)) {
        let mut sub = 0usize;
        loop {
            f(sub | self.cval);
            if sub == self.free {
                break;
            }
            sub = sub.wrapping_sub(self.free) & self.free;
        }
    }

    #[inline]
    pub(crate) fn matches(&self, index: usize) -> bool {
        index & self.cmask == self.cval
    }
}

/// Applies the `2^k x 2^k` row-major matrix `m` to `targets`, conditioned on
/// `controls`. `m` need not be unitary.
pub(crate) fn apply_matrix(
    amps: &mut [C64],
    nwires: usize,
    targets: &[usize],
    controls: &[(usize, bool)],
    m: &[C64],
) {
    let fp = Footprint::new(nwires, targets, controls);
    let dim = fp.offsets.len();
    debug_assert_eq!(m.len(), dim * dim);
    if dim == 2 {
        let off = fp.offsets[1];
        let (m00, m01, m10, m11) = (m[0], m[1], m[2], m[3]);
        fp.for_each_base(|base| {
            let a0 = amps[base];
            let a1 = amps[base | off];
            amps[base] = m00 * a0 + m01 * a1;
            amps[base | off] = m10 * a0 + m11 * a1;
        });
        return;
    }
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    fp.for_each_base(|base| {
        for (j, off) in fp.offsets.iter().enumerate() {
            buf[j] = amps[base | off];
        }
        for (row, off) in fp.offsets.iter().enumerate() {
            let r = &m[row * dim..(row + 1) * dim];
            amps[base | off] = r.iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    });
}

/// Zeroes every amplitude whose control bits do not match.
pub(crate) fn zero_outside(amps: &mut [C64], nwires: usize, controls: &[(usize, bool)]) {
    let fp = Footprint::new(nwires, &[], controls);
    for (i, a) in amps.iter_mut().enumerate() {
        if !fp.matches(i) {
            *a = C64::new(0.0, 0.0);
        }
    }
}

pub(crate) fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Splits basis indices into (kept, rest) parts for a wire partition. Kept
/// wires appear in the order given; the rest keep their natural order.
pub(crate) struct IndexSplit {
    keep_bits: Vec<usize>,
    rest_bits: Vec<usize>,
}

impl IndexSplit {
    pub(crate) fn new(nwires: usize, keep: &[usize]) -> Self {
        let keep_bits = keep.iter().map(|&w| bit(nwires, w)).collect();
        let rest_bits = (0..nwires)
            .filter(|w| !keep.contains(w))
            .map(|w| bit(nwires, w))
            .collect();
        Self {
            keep_bits,
            rest_bits,
        }
    }

    #[inline]
    pub(crate) fn split(&self, index: usize) -> (usize, usize) {
        let gather = |bits: &[usize]| {
            bits.iter()
                .fold(0usize, |acc, &b| (acc << 1) | ((index & b != 0) as usize))
        };
        (gather(&self.keep_bits), gather(&self.rest_bits))
    }

    pub(crate) fn kept_dim(&self) -> usize {
        1 << self.keep_bits.len()
    }

    pub(crate) fn rest_dim(&self) -> usize {
        1 << self.rest_bits.len()
    }
}
