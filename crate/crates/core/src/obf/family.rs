use std::ops::Range;

use rand::{Rng, RngCore};

use super::circuits::{combine, make_point_circuit, CombinedCircuit};
use crate::qenc::{append_pad_lookup, ggm_pad, increment_tag, GateTable};
use crate::simcore::{BitString, QuantumCircuit};
use crate::{Error, Result};

pub const SELECTOR_MAIN: usize = 0;
pub const SELECTOR_E: usize = 1;
pub const SELECTOR_HOM: usize = 2;
pub const SELECTOR_B: usize = 3;

/// Register layout shared by every branch of a family sample (selector not
/// included): gate description, two ciphertext blocks of tag and payload,
/// then `n` ancillas. The first description wire doubles as the E branch's
/// "encrypt the payload" flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilyLayout {
    n: usize,
    g: usize,
}

impl FamilyLayout {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            g: GateTable::standard(2 * n).index_bits(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> GateTable {
        GateTable::standard(2 * self.n)
    }

    pub fn selector_width(&self) -> usize {
        2
    }

    pub fn desc(&self) -> Range<usize> {
        0..self.g
    }

    pub fn x_tag(&self) -> Range<usize> {
        self.g..self.g + self.n
    }

    pub fn x_payload(&self) -> Range<usize> {
        self.g + self.n..self.g + 2 * self.n
    }

    pub fn y_tag(&self) -> Range<usize> {
        self.g + 2 * self.n..self.g + 3 * self.n
    }

    pub fn y_payload(&self) -> Range<usize> {
        self.g + 3 * self.n..self.g + 4 * self.n
    }

    /// Both ciphertext blocks, contiguous.
    pub fn blocks(&self) -> Range<usize> {
        self.g..self.g + 4 * self.n
    }

    pub fn ancillas(&self) -> Range<usize> {
        self.g + 4 * self.n..self.g + 5 * self.n
    }

    pub fn register_width(&self) -> usize {
        self.g + 4 * self.n
    }

    /// Arity of the flattened program: selector plus register.
    pub fn program_arity(&self) -> usize {
        self.selector_width() + self.register_width()
    }
}

fn wires(r: Range<usize>) -> Vec<usize> {
    r.collect()
}

/// Secret parameters behind a family sample, for test assertions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyWitness {
    pub a: BitString,
    pub b: BitString,
    pub k: BitString,
    pub r: BitString,
}

#[derive(Clone, Debug)]
pub struct FamilySample {
    pub circuit: CombinedCircuit,
    /// `false` for the point-circuit family, `true` for the identity family.
    pub secret: bool,
    pub witness: FamilyWitness,
}

fn check_lengths(n: usize, parts: &[&BitString]) -> Result<()> {
    for p in parts {
        if p.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: p.len(),
            });
        }
    }
    Ok(())
}

fn branch(l: &FamilyLayout) -> QuantumCircuit {
    QuantumCircuit::with_ancillas(l.register_width(), l.n)
}

/// With the flag clear, loads `a` into the X payload; then XORs `r` into the
/// X tag and encrypts the X payload under the tag.
fn branch_e(
    l: &FamilyLayout,
    k: &BitString,
    a: &BitString,
    r: &BitString,
) -> Result<QuantumCircuit> {
    let mut c = branch(l);
    let flag = l.desc().start;
    for (i, w) in l.x_payload().enumerate() {
        if a.get(i) {
            c.mcx(&[(flag, false)], w)?;
        }
    }
    for (i, w) in l.x_tag().enumerate() {
        if r.get(i) {
            c.x(w)?;
        }
    }
    append_pad_lookup(
        &mut c,
        &wires(l.x_tag()),
        &wires(l.x_payload()),
        &|t| ggm_pad(k, t),
        false,
        &[],
    )?;
    Ok(c)
}

/// Decrypts both blocks, applies the described gate to the joint
/// plaintext, bumps both tags and re-encrypts.
fn branch_hom(l: &FamilyLayout, k: &BitString) -> Result<QuantumCircuit> {
    let mut c = branch(l);
    let pad = |t: &BitString| ggm_pad(k, t);
    let blocks = [(l.x_tag(), l.x_payload()), (l.y_tag(), l.y_payload())];
    for (t, p) in &blocks {
        append_pad_lookup(
            &mut c,
            &wires(t.clone()),
            &wires(p.clone()),
            &pad,
            true,
            &[],
        )?;
    }
    let plain: Vec<usize> = l.x_payload().chain(l.y_payload()).collect();
    l.table()
        .append_dispatch(&mut c, &wires(l.desc()), &plain, &[])?;
    for (t, p) in &blocks {
        increment_tag(&mut c, &wires(t.clone()), &[])?;
        append_pad_lookup(
            &mut c,
            &wires(t.clone()),
            &wires(p.clone()),
            &pad,
            false,
            &[],
        )?;
    }
    Ok(c)
}

/// Decrypts the Y block and measures it; the Y payload ends up holding `a`
/// if the plaintext read `b`, and `0^n` otherwise. The Y tag is cleared.
fn branch_b(
    l: &FamilyLayout,
    k: &BitString,
    a: &BitString,
    b: &BitString,
) -> Result<QuantumCircuit> {
    let mut c = branch(l);
    let yp = wires(l.y_payload());
    append_pad_lookup(
        &mut c,
        &wires(l.y_tag()),
        &yp,
        &|t| ggm_pad(k, t),
        true,
        &[],
    )?;
    for &w in &yp {
        c.measure(w)?;
    }
    let hit = QuantumCircuit::value_controls(&yp, b);
    for (i, w) in l.ancillas().enumerate() {
        if a.get(i) {
            c.mcx(&hit, w)?;
        }
    }
    for (&w, anc) in yp.iter().zip(l.ancillas()) {
        c.discard(w)?;
        c.swap(anc, w)?;
    }
    for w in l.y_tag() {
        c.discard(w)?;
    }
    Ok(c)
}

/// `E # Hom # B` for key `k`, point `(a, b)` and E-branch randomness `r`.
pub fn make_lemma_family(
    k: &BitString,
    a: &BitString,
    b: &BitString,
    r: &BitString,
) -> Result<CombinedCircuit> {
    let n = a.len();
    check_lengths(n, &[b, k, r])?;
    let l = FamilyLayout::new(n);
    combine(vec![
        branch_e(&l, k, a, r)?,
        branch_hom(&l, k)?,
        branch_b(&l, k, a, b)?,
    ])
}

/// `C # E # Hom # B` with `C = C_{a,b}` (secret clear) or the identity
/// (secret set), acting on the first `2n` register wires.
pub fn family_combined(
    n: usize,
    secret: bool,
    a: &BitString,
    b: &BitString,
    k: &BitString,
    r: &BitString,
) -> Result<CombinedCircuit> {
    check_lengths(n, &[a, b, k, r])?;
    let l = FamilyLayout::new(n);
    let mut main = branch(&l);
    if !secret {
        let map: Vec<usize> = (0..2 * n).collect();
        main.append(&make_point_circuit(a, b)?, &map)?;
    }
    let lemma = make_lemma_family(k, a, b, r)?;
    let mut branches = vec![main];
    branches.extend(lemma.branches().iter().cloned());
    combine(branches)
}

pub(crate) fn family_circuit(
    n: usize,
    secret: bool,
    a: &BitString,
    b: &BitString,
    k: &BitString,
    r: &BitString,
) -> Result<QuantumCircuit> {
    family_combined(n, secret, a, b, k, r)?.to_circuit()
}

/// Draws `a`, a nonzero `b`, key `k`, randomness `r` and the secret coin.
pub fn sample_unobf_family(n: usize, rng: &mut dyn RngCore) -> Result<FamilySample> {
    let secret: bool = rng.random();
    sample_unobf_family_with(n, secret, rng)
}

/// As [`sample_unobf_family`] with the secret fixed: `false` samples the
/// point-circuit family, `true` the identity family.
pub fn sample_unobf_family_with(
    n: usize,
    secret: bool,
    rng: &mut dyn RngCore,
) -> Result<FamilySample> {
    if n == 0 {
        return Err(Error::InvalidConfig("family needs n >= 1".into()));
    }
    let a = BitString::random(n, rng);
    let b = loop {
        let b = BitString::random(n, rng);
        if !b.is_zero() {
            break b;
        }
    };
    let k = BitString::random(n, rng);
    let r = BitString::random(n, rng);
    Ok(FamilySample {
        circuit: family_combined(n, secret, &a, &b, &k, &r)?,
        secret,
        witness: FamilyWitness { a, b, k, r },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qenc::{prf_scheme, Ciphertext, SymScheme};
    use crate::simcore::{run_circuit, trace_distance, QuantumState};

    fn bits(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    struct Fixture {
        l: FamilyLayout,
        c: QuantumCircuit,
        k: BitString,
        a: BitString,
        b: BitString,
        r: BitString,
    }

    fn fixture() -> Fixture {
        let (k, a, b, r) = (bits("10"), bits("01"), bits("11"), bits("10"));
        let c = family_circuit(2, false, &a, &b, &k, &r).unwrap();
        Fixture {
            l: FamilyLayout::new(2),
            c,
            k,
            a,
            b,
            r,
        }
    }

    fn run(f: &Fixture, sel: usize, desc: usize, blocks: &QuantumState) -> QuantumState {
        let head =
            BitString::from_usize(sel, 2).concat(&BitString::from_usize(desc, f.l.desc().len()));
        let input = QuantumState::basis(&head).unwrap().tensor(blocks).unwrap();
        run_circuit(&f.c, &input).unwrap()
    }

    fn block(out: &QuantumState, r: Range<usize>) -> QuantumState {
        let keep: Vec<usize> = r.map(|w| w + 2).collect();
        out.reduce(&keep, 1e-20).unwrap()
    }

    fn decrypt(f: &Fixture, ct: &QuantumState) -> QuantumState {
        let tag_wires: Vec<usize> = (0..2).collect();
        let (tag, _) = ct.most_likely(&tag_wires).unwrap();
        let payload = ct.reduce(&[2, 3], 1e-20).unwrap();
        prf_scheme(2)
            .decrypt(&f.k, Ciphertext::new(tag, payload))
            .unwrap()
    }

    #[test]
    fn layout_at_n2() {
        let l = FamilyLayout::new(2);
        assert_eq!(l.desc().len(), 6);
        assert_eq!(l.program_arity(), 16);
        assert_eq!(fixture().c.width(), 18);
    }

    #[test]
    fn e_branch_encrypts_a_with_tag_r() {
        let f = fixture();
        let out = run(&f, SELECTOR_E, 0, &QuantumState::zero(8).unwrap());
        let x = block(&out, f.l.x_tag().start..f.l.x_payload().end);
        assert_eq!(x.most_likely(&[0, 1]).unwrap().0, f.r);
        let want = QuantumState::basis(&f.a).unwrap();
        assert!(trace_distance(&decrypt(&f, &x), &want).unwrap() < 1e-12);
        // Flag set: the payload (here |0>) is encrypted instead of a.
        let out = run(&f, SELECTOR_E, 1 << 5, &QuantumState::zero(8).unwrap());
        let x = block(&out, f.l.x_tag().start..f.l.x_payload().end);
        let zero = QuantumState::zero(2).unwrap();
        assert!(trace_distance(&decrypt(&f, &x), &zero).unwrap() < 1e-12);
    }

    #[test]
    fn hom_branch_applies_x() {
        let f = fixture();
        let s = prf_scheme(2);
        let enc = |m: &str, r: &str| {
            let ct = s
                .encrypt_with(&f.k, &QuantumState::basis(&bits(m)).unwrap(), &bits(r))
                .unwrap();
            QuantumState::basis(&ct.tag)
                .unwrap()
                .tensor(&ct.payload)
                .unwrap()
        };
        let blocks = enc("00", "01").tensor(&enc("00", "11")).unwrap();
        let table = f.l.table();
        // X on plaintext qubit 0 (the first X-payload qubit).
        let v = table.index_of(&crate::qenc::TableGate::X(0)).unwrap();
        let out = run(&f, SELECTOR_HOM, v, &blocks);
        let x = block(&out, f.l.x_tag().start..f.l.x_payload().end);
        let y = block(&out, f.l.y_tag().start..f.l.y_payload().end);
        assert_eq!(x.most_likely(&[0, 1]).unwrap().0, bits("10"));
        assert_eq!(y.most_likely(&[0, 1]).unwrap().0, bits("00"));
        let one = QuantumState::basis(&bits("10")).unwrap();
        assert!(trace_distance(&decrypt(&f, &x), &one).unwrap() < 1e-12);
        let zero = QuantumState::zero(2).unwrap();
        assert!(trace_distance(&decrypt(&f, &y), &zero).unwrap() < 1e-12);
    }

    #[test]
    fn b_branch_releases_a_only_on_b() {
        let f = fixture();
        let s = prf_scheme(2);
        for (m, want) in [("11", f.a.clone()), ("10", bits("00")), ("00", bits("00"))] {
            let ct = s
                .encrypt_with(&f.k, &QuantumState::basis(&bits(m)).unwrap(), &bits("01"))
                .unwrap();
            let y = QuantumState::basis(&ct.tag)
                .unwrap()
                .tensor(&ct.payload)
                .unwrap();
            let blocks = QuantumState::zero(4).unwrap().tensor(&y).unwrap();
            let out = run(&f, SELECTOR_B, 0, &blocks);
            let yp = block(&out, f.l.y_payload());
            let (got, p) = yp.most_likely(&[0, 1]).unwrap();
            assert_eq!(got, want, "plaintext {m}");
            assert!(p > 1.0 - 1e-12);
            assert_eq!(f.b, bits("11"));
        }
    }

    #[test]
    fn main_branch_is_the_point_or_identity() {
        let f = fixture();
        let mut input = f.a.concat(&BitString::zeros(2));
        input = input.concat(&BitString::zeros(f.l.register_width() - 4));
        let full = BitString::zeros(2).concat(&input);
        let out = f.c.eval_classical(&full).unwrap();
        assert_eq!(out.slice(4..6), f.b);
        let g = family_circuit(2, true, &f.a, &f.b, &f.k, &f.r).unwrap();
        assert_eq!(g.eval_classical(&full).unwrap(), full);
    }
}
