use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, RngCore};

use super::{run_experiment, Experiment, ExperimentConfig, Findings};
use crate::money::{self, Strategy};
use crate::obf::{
    adversary_homomorphic, blackbox_baseline, make_point_circuit, sample_unobf_family_with,
    Obfuscator, PlainObfuscator,
};
use crate::qenc::{
    ideal_scheme, ind_game, prf_scheme, Adversary, BasisMeasurement, CoinFlip, ConstantPadScheme,
    GameMode, GameOptions, HomScheme, KnownPad, PkScheme, SymScheme, TableGate,
};
use crate::simcore::{
    channel_distance_estimate, derive_seed, fidelity, pauli_apply, phase_invariant_distance,
    run_circuit, sample_random_mixed_state, sample_random_state, trace_distance, trial_rng,
    BitString, CountingOracle, PauliString, QuantumCircuit, QuantumState, C64,
};
use crate::witenc::{self, ToyVerifier};
use crate::Result;

pub(super) fn dispatch(cfg: &ExperimentConfig, f: &mut Findings<'_>) -> Result<()> {
    match cfg.experiment {
        Experiment::OtpUniformity => otp_uniformity(cfg, f),
        Experiment::PrfRoundtrip => prf_roundtrip(cfg, f),
        Experiment::IndGame => ind_game_calibration(cfg, f),
        Experiment::UnobfAttack => unobf_attack(cfg, f),
        Experiment::BlackboxBaseline => blackbox(cfg, f),
        Experiment::HomPipeline => hom_pipeline(cfg, f),
        Experiment::MoneyVerify => money_verify(cfg, f),
        Experiment::MoneyCounterfeit => money_counterfeit(cfg, f),
        Experiment::WitencRoundtrip => witenc_roundtrip(cfg, f),
        Experiment::Metrics => metrics(f),
        Experiment::Determinism => determinism(cfg, f),
    }
}

/// Maps `0..len` in order, in parallel when the feature is on.
fn par_map<T: Send>(len: usize, op: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(op).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(op).collect()
    }
}

fn max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(0.0, f64::max)
}

fn min(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(1.0, f64::min)
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn rows(f: &mut Findings<'_>, label: &str, xs: &[f64]) {
    for (i, x) in xs.iter().enumerate() {
        f.row(label, i, *x);
    }
}

/// Random plaintext of varying rank: trial `t` uses rank `1 + t mod 2^m`.
fn plaintext(m: usize, t: usize, rng: &mut dyn RngCore) -> Result<QuantumState> {
    let rank = 1 + t % (1 << m);
    if rank == 1 {
        sample_random_state(m, rng)
    } else {
        sample_random_mixed_state(m, rank, rng)
    }
}

fn otp_uniformity(cfg: &ExperimentConfig, f: &mut Findings<'_>) -> Result<()> {
    let mut worst = 0.0f64;
    for m in 1..=cfg.n() {
        let master = derive_seed(cfg.seed, m as u64);
        let devs = par_map(cfg.trials(), |t| {
            let rho = plaintext(m, t, &mut trial_rng(master, t as u64))?;
            let d = 1usize << m;
            let mut twirl = DMatrix::<C64>::zeros(d, d);
            for p in PauliString::all(m) {
                twirl += pauli_apply(&p, &rho)?.density();
            }
            twirl /= C64::new((d * d) as f64, 0.0);
            let target = DMatrix::<C64>::from_diagonal_element(d, d, C64::new(1.0 / d as f64, 0.0));
            Ok((twirl - target).camax())
        })?;
        let label = format!("n{m}");
        rows(f, &label, &devs);
        f.metric(&format!("max_deviation_n{m}"), max(&devs));
        worst = worst.max(max(&devs));
    }
    f.at_most("max_deviation", worst, 1e-10);
    Ok(())
}

fn prf_roundtrip(cfg: &ExperimentConfig, f: &mut Findings<'_>) -> Result<()> {
    let n = cfg.n();
    let scheme = prf_scheme(n);
    let dists = par_map(cfg.trials(), |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let key = scheme.keygen(&mut rng);
        let rho = plaintext(n, t, &mut rng)?;
        let ct = scheme.encrypt(&key, &rho, &mut rng)?;
        trace_distance(&scheme.decrypt(&key, ct)?, &rho)
    })?;
    rows(f, "trace_distance", &dists);
    f.at_most("max_trace_distance", max(&dists), 1e-9);
    Ok(())
}

fn ind_game_calibration(cfg: &ExperimentConfig, f: &mut Findings<'_>) -> Result<()> {
    let n = cfg.n();
    // `trials` sizes the coin-flip game; the other two are capped.
    let t = cfg.trials();
    let (coin_t, broken_t, ideal_t) = (t, t.min(500), t.min(2000));
    let opts = GameOptions::default();

    let prf = prf_scheme(n);
    let coin = ind_game(
        &prf,
        &|| Box::new(CoinFlip) as Box<dyn Adversary>,
        GameMode::Cca1,
        coin_t,
        derive_seed(cfg.seed, 0),
        opts,
    )?;

    let pad = PauliString::random(n, &mut trial_rng(cfg.seed, u64::MAX));
    let broken = ConstantPadScheme::new(pad.clone());
    let broken_r = ind_game(
        &broken,
        &|| Box::new(KnownPad { pad: pad.clone() }) as Box<dyn Adversary>,
        GameMode::Ind,
        broken_t,
        derive_seed(cfg.seed, 1),
        opts,
    )?;

    let ideal = ideal_scheme(n);
    let ideal_r = ind_game(
        &ideal,
        &|| Box::new(BasisMeasurement) as Box<dyn Adversary>,
        GameMode::Ind,
        ideal_t,
        derive_seed(cfg.seed, 2),
        opts,
    )?;

    for (label, r) in [
        ("coin_flip", &coin),
        ("broken", &broken_r),
        ("ideal_basis", &ideal_r),
    ] {
        f.metric(&format!("{label}_trials"), r.trials as f64);
        f.metric(&format!("{label}_ci95"), r.ci95);
    }
    f.at_most("coin_flip_advantage", coin.advantage, 0.05);
    f.at_least("broken_advantage", broken_r.advantage, 0.9);
    f.at_most("ideal_basis_advantage", ideal_r.advantage, 0.1);
    Ok(())
}

struct FamilyTrial {
    attack_says_point: bool,
    baseline_says_point: bool,
}

fn unobf_attack(cfg: &ExperimentConfig, f: &mut Findings<'_>) -> Result<()> {
    let n = cfg.n();
    let q = cfg.q();
    let run = |secret: bool| {
        let master = derive_seed(cfg.seed, u64::from(secret));
        par_map(cfg.trials(), move |t| {
            let mut rng = trial_rng(master, t as u64);
            let s = sample_unobf_family_with(n, secret, &mut rng)?;
            let coins = BitString::random(64, &mut rng);
            let program = PlainObfuscator::default().obfuscate(&s.circuit.to_circuit()?, &coins)?;
            let out = adversary_homomorphic(&mut [program], n, &mut rng)?;

            let point = if secret {
                QuantumCircuit::identity(2 * n)
            } else {
                make_point_circuit(&s.witness.a, &s.witness.b)?
            };
            let mut oracle = [CountingOracle::new(point)];
            let baseline = blackbox_baseline(&mut oracle, q, &mut rng, None)?;
            Ok(FamilyTrial {
                attack_says_point: out.guess,
                baseline_says_point: baseline,
            })
        })
    };
    let fam_f = run(false)?;
    let fam_g = run(true)?;
    let rate = |xs: &[FamilyTrial], pick: fn(&FamilyTrial) -> bool| {
        xs.iter().filter(|x| pick(x)).count() as f64 / xs.len() as f64
    };
    let p_f = rate(&fam_f, |x| x.attack_says_point);
    let p_g = rate(&fam_g, |x| x.attack_says_point);
    let b_f = rate(&fam_f, |x| x.baseline_says_point);
    let b_g = rate(&fam_g, |x| x.baseline_says_point);
    for (label, fam) in [("F", &fam_f), ("G", &fam_g)] {
        for (i, x) in fam.iter().enumerate() {
            f.row(label, i, f64::from(u8::from(x.attack_says_point)));
        }
    }
    f.metric("p_accept_F", p_f);
    f.metric("p_accept_G", p_g);
    f.metric("baseline_q", q as f64);
    f.metric("baseline_advantage", (b_f - b_g).abs());
    f.at_least("gap", p_f - p_g, 0.9);
    Ok(())
}

fn blackbox(cfg: &ExperimentConfig, f: &mut Findings<'_>) -> Result<()> {
    let (n, q) = (cfg.n(), cfg.q());
    let wins = par_map(cfg.trials(), |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let secret: bool = rng.random();
        let a = BitString::random(n, &mut rng);
        let b = loop {
            let b = BitString::random(n, &mut rng);
            if !b.is_zero() {
                break b;
            }
        };
        let circuit = if secret {
            QuantumCircuit::identity(2 * n)
        } else {
            make_point_circuit(&a, &b)?
        };
        let mut oracle = [CountingOracle::new(circuit)];
        let guess = blackbox_baseline(&mut oracle, q, &mut rng, None)?;
        Ok(guess != secret)
    })?;
    let won = wins.iter().filter(|w| **w).count();
    let p = won as f64 / wins.len() as f64;
    let bound = 0.5 * (2.0 * q as f64 / (1u64 << n) as f64) + 0.05;
    for (i, w) in wins.iter().enumerate() {
        f.row("win", i, f64::from(u8::from(*w)));
    }
    f.metric("win_rate", p);
    f.metric("queries_per_trial", q as f64);
    f.at_most("advantage", (2.0 * p - 1.0).abs(), bound);
    Ok(())
}

/// The fixed test set: circuit `i` has `1 + i mod max_gates` gates drawn
/// uniformly from the table.
fn hom_test_circuit(table: &[TableGate], i: usize, max_gates: usize, seed: u64) -> Vec<TableGate> {
    let mut rng = trial_rng(seed, i as u64);
    (0..1 + i % max_gates.max(1))
        .map(|_| table[rng.random_range(0..table.len())])
        .collect()
}

fn hom_pipeline(cfg: &ExperimentConfig, f: &mut Findings<'_>) -> Result<()> {
    let n = cfg.n();
    let scheme = HomScheme::new(PkScheme::new(n, Arc::new(PlainObfuscator::default())));
    let table = scheme.table().entries().to_vec();
    let set_seed = derive_seed(cfg.seed, 0);
    let run_seed = derive_seed(cfg.seed, 1);
    let dists = par_map(cfg.trials(), |i| {
        let gates = hom_test_circuit(&table, i, cfg.q(), set_seed);
        let mut rng = trial_rng(run_seed, i as u64);
        let mut keys = scheme.keygen(&mut rng)?;
        let rho = sample_random_state(n, &mut rng)?;
        let mut ct = scheme.pk_scheme().encrypt(&mut keys.pk, &rho, &mut rng)?;
        let mut direct = QuantumCircuit::new(n);
        let wires: Vec<usize> = (0..n).collect();
        for g in &gates {
            ct = scheme.evaluate(&mut keys.eval, ct, g)?;
            g.append_to(&mut direct, &wires, &[])?;
        }
        let got = scheme.pk_scheme().decrypt(&keys.sk, ct)?;
        trace_distance(&got, &run_circuit(&direct, &rho)?)
    })?;
    rows(f, "trace_distance", &dists);
    f.metric("circuits", dists.len() as f64);
    f.at_most("max_trace_distance", max(&dists), 1e-8);
    Ok(())
}

/// A candidate with a spread of overlaps: `ψ` mixed with a random state at
/// weight `t / trials`.
fn candidate(note: &QuantumState, w: f64, rng: &mut dyn RngCore) -> Result<QuantumState> {
    let r = sample_random_state(note.num_qubits(), rng)?;
    let (a, b) = (
        note.amplitudes().expect("pure"),
        r.amplitudes().expect("pure"),
    );
    let v: Vec<C64> = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| x * w + y * (1.0 - w))
        .collect();
    QuantumState::from_amplitudes_normalized(v)
}

const REPEATS: usize = 5;

fn money_verify(cfg: &ExperimentConfig, f: &mut Findings<'_>) -> Result<()> {
    let n = cfg.n();
    let trials = cfg.trials();
    let obf = PlainObfuscator::default();
    let master = derive_seed(cfg.seed, 0);
    let per = par_map(trials, |t| {
        let mut rng = trial_rng(master, t as u64);
        let mut bill = money::mint(n, &obf, &mut rng)?;
        let phi = candidate(bill.note(), t as f64 / trials as f64, &mut rng)?;
        let expect = fidelity(bill.note(), &phi)?;
        let got = money::verify(bill.verifier_mut(), &phi)?.accept_prob;

        let original = bill.note().clone();
        let mut worst_accept = 1.0f64;
        for _ in 0..REPEATS {
            worst_accept = worst_accept.min(bill.self_check()?);
        }
        let kept = fidelity(bill.note(), &original)?;
        Ok(((got - expect).abs(), worst_accept, kept))
    })?;
    let errs: Vec<f64> = per.iter().map(|x| x.0).collect();
    let accepts: Vec<f64> = per.iter().map(|x| x.1).collect();
    let kept: Vec<f64> = per.iter().map(|x| x.2).collect();
    rows(f, "accept_error", &errs);
    f.at_most("max_accept_error", max(&errs), 1e-8);
    f.at_least("min_repeat_accept", min(&accepts), 1.0 - 1e-8);
    f.at_least("min_note_fidelity", min(&kept), 1.0 - 1e-8);

    // The forging baseline rides along at the largest note size.
    let cf = counterfeit_fidelities(
        money::MAX_NOTE_QUBITS,
        cfg.q(),
        5 * trials,
        &Strategy::RandomProbe,
        derive_seed(cfg.seed, 1),
    )?;
    f.metric("counterfeit_n", money::MAX_NOTE_QUBITS as f64);
    f.metric("counterfeit_trials", cf.len() as f64);
    f.at_most("counterfeit_mean_fidelity", mean(&cf), 0.1);
    Ok(())
}

fn counterfeit_fidelities(
    n: usize,
    q: usize,
    trials: usize,
    strategy: &Strategy,
    master: u64,
) -> Result<Vec<f64>> {
    let obf = PlainObfuscator::default();
    par_map(trials, |t| {
        let mut rng = trial_rng(master, t as u64);
        let bill = money::mint(n, &obf, &mut rng)?;
        let mut oracle = money::verifier_oracle(bill.verifier())?;
        let out = money::counterfeit_experiment(&mut oracle, bill.note(), q, strategy, &mut rng)?;
        Ok(out.fidelity)
    })
}

fn money_counterfeit(cfg: &ExperimentConfig, f: &mut Findings<'_>) -> Result<()> {
    let (n, q, trials) = (cfg.n(), cfg.q(), cfg.trials());
    let random = counterfeit_fidelities(
        n,
        q,
        trials,
        &Strategy::RandomProbe,
        derive_seed(cfg.seed, 0),
    )?;
    let basis = counterfeit_fidelities(
        n,
        q,
        trials,
        &Strategy::BasisProbe,
        derive_seed(cfg.seed, 1),
    )?;
    let blind = counterfeit_fidelities(
        n,
        0,
        trials,
        &Strategy::RandomProbe,
        derive_seed(cfg.seed, 2),
    )?;
    rows(f, "random-probe", &random);
    rows(f, "basis-probe", &basis);
    f.metric("blind_mean_fidelity", mean(&blind));
    f.metric("haar_expectation", 1.0 / (1u64 << n) as f64);
    f.metric("basis_probe_mean_fidelity", mean(&basis));
    f.at_most("random_probe_mean_fidelity", mean(&random), 0.1);
    Ok(())
}

fn witenc_roundtrip(cfg: &ExperimentConfig, f: &mut Findings<'_>) -> Result<()> {
    let obf = PlainObfuscator::default();
    for n in 2..=cfg.n() {
        let eps = 0.5f64.powi(n as i32);
        let yes_seed = derive_seed(cfg.seed, 2 * n as u64);
        let no_seed = derive_seed(cfg.seed, 2 * n as u64 + 1);
        let completeness = par_map(cfg.trials(), |t| {
            let mut rng = trial_rng(yes_seed, t as u64);
            let v = ToyVerifier::yes_instance(n, &mut rng)?;
            let rho = plaintext(1, t, &mut rng)?;
            let mut ct = witenc::we_encrypt(&v, &rho, &obf, &mut rng)?;
            let w = v.witness().expect("yes-instance").clone();
            fidelity(&witenc::we_decrypt(&mut ct, &w)?, &rho)
        })?;
        let closeness = par_map(cfg.trials(), |t| {
            let mut rng = trial_rng(no_seed, t as u64);
            let v = ToyVerifier::no_instance(n, &mut rng)?;
            let r1 = sample_random_mixed_state(1, 2, &mut rng)?;
            let r2 = sample_random_mixed_state(1, 2, &mut rng)?;
            let c1 = witenc::we_encrypt(&v, &r1, &obf, &mut rng)?.circuit()?;
            let c2 = witenc::we_encrypt(&v, &r2, &obf, &mut rng)?.circuit()?;
            Ok(channel_distance_estimate(&c1, &c2)?.estimate)
        })?;
        rows(f, &format!("completeness_n{n}"), &completeness);
        rows(f, &format!("no_instance_distance_n{n}"), &closeness);
        f.at_least(
            &format!("completeness_n{n}"),
            min(&completeness),
            1.0 - eps - 1e-6,
        );
        f.at_most(
            &format!("no_instance_distance_n{n}"),
            max(&closeness),
            eps + 1e-4,
        );
    }
    Ok(())
}

fn metrics(f: &mut Findings<'_>) -> Result<()> {
    let zero = QuantumState::zero(1)?;
    let td = trace_distance(&zero, &QuantumState::plus())?;
    f.at_most(
        "trace_zero_plus_error",
        (td - std::f64::consts::FRAC_1_SQRT_2).abs(),
        1e-10,
    );

    let mut z = QuantumCircuit::new(1);
    z.z(0)?;
    let id = QuantumCircuit::identity(1);
    let pid = phase_invariant_distance(&z, &id)?;
    f.at_most(
        "phase_z_vs_i_error",
        (pid - std::f64::consts::SQRT_2).abs(),
        1e-10,
    );

    let mut x = QuantumCircuit::new(1);
    x.x(0)?;
    f.at_least(
        "channel_x_vs_i",
        channel_distance_estimate(&x, &id)?.estimate,
        0.99,
    );
    Ok(())
}

/// Reduced configs for every other experiment.
fn determinism_suite(seed: u64) -> Vec<ExperimentConfig> {
    let c =
        |e: Experiment, trials: usize| ExperimentConfig::new(e).with_trials(trials).with_seed(seed);
    vec![
        c(Experiment::OtpUniformity, 3).with_n(2),
        c(Experiment::PrfRoundtrip, 10),
        c(Experiment::IndGame, 200),
        c(Experiment::UnobfAttack, 4),
        c(Experiment::BlackboxBaseline, 200),
        c(Experiment::HomPipeline, 4),
        c(Experiment::MoneyVerify, 4),
        c(Experiment::MoneyCounterfeit, 20),
        c(Experiment::WitencRoundtrip, 2),
        c(Experiment::Metrics, 1),
    ]
}

fn determinism(cfg: &ExperimentConfig, f: &mut Findings<'_>) -> Result<()> {
    let suite = determinism_suite(cfg.seed);
    let mut mismatches = 0usize;
    for (i, c) in suite.iter().enumerate() {
        let a = run_experiment(c)?.to_json_line()?;
        let b = run_experiment(c)?.to_json_line()?;
        let same = a == b;
        mismatches += usize::from(!same);
        f.row(c.experiment.name(), i, f64::from(u8::from(same)));
    }
    f.metric("configs", suite.len() as f64);
    f.at_most("mismatches", mismatches as f64, 0.0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hom_test_set_is_fixed_and_spans_lengths() {
        let t = crate::qenc::GateTable::standard(4).entries().to_vec();
        let a: Vec<_> = (0..16).map(|i| hom_test_circuit(&t, i, 8, 3)).collect();
        let b: Vec<_> = (0..16).map(|i| hom_test_circuit(&t, i, 8, 3)).collect();
        assert_eq!(a, b);
        let lens: std::collections::BTreeSet<usize> = a.iter().map(Vec::len).collect();
        assert_eq!(lens, (1..=8).collect());
    }

    #[test]
    fn candidates_cover_overlaps() {
        let mut rng = trial_rng(40, 0);
        let psi = sample_random_state(3, &mut rng).unwrap();
        let same = candidate(&psi, 1.0, &mut rng).unwrap();
        assert!((fidelity(&same, &psi).unwrap() - 1.0).abs() < 1e-12);
        let far = candidate(&psi, 0.0, &mut rng).unwrap();
        assert!(fidelity(&far, &psi).unwrap() < 0.9);
    }
}
