//! Adversarial simulations: an intercept–resend attacker on the walk
//! protocol, a man-in-the-middle detection check, and a classical BB84
//! baseline for QBER comparison.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::linalg::{c64, embed_unitary, ComplexMatrix};
use crate::metrics;
use crate::noise;
use crate::protocol::{
    self, recover_message, ProtocolConfig, ProtocolTranscript,
};
use crate::state::{DensityMatrix, StateVector};

/// How the eavesdropper picks her measurement basis per intercepted qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EveBasis {
    /// Uniformly computational or X basis, per qubit.
    RandomPerQubit,
    AlwaysComputational,
}

/// What Eve forwards after measuring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EveReencode {
    /// Forward the post-measurement eigenstate unchanged.
    MeasuredState,
    /// Scramble each forwarded qubit with an independent Haar-random
    /// single-qubit unitary.
    HaarRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EveConfig {
    pub basis: EveBasis,
    pub reencode: EveReencode,
    pub seed: u64,
}

impl EveConfig {
    pub fn new(basis: EveBasis, reencode: EveReencode, seed: u64) -> Self {
        EveConfig { basis, reencode, seed }
    }
}

/// 1 − P(correct).
pub fn qber_of(dist: &Distribution, correct: usize) -> Result<f64> {
    if correct >= dist.len() {
        return Err(Error::InvalidParameter(format!(
            "outcome {correct} outside the {}-outcome distribution",
            dist.len()
        )));
    }
    Ok(1.0 - dist.probability(correct))
}

/// QBER-threshold tamper check; any attack that breaks the periodic revival
/// pushes the error rate far past any reasonable threshold.
pub fn mitm_detection_check(transcript: &ProtocolTranscript, threshold: f64) -> Result<bool> {
    if !(0.0..1.0).contains(&threshold) || threshold <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "detection threshold {threshold} outside (0, 1)"
        )));
    }
    Ok(transcript.qber > threshold)
}

fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).unwrap()
}

/// Haar-random 2x2 unitary: QR of a complex Ginibre sample with the phase
/// convention fixed by the R diagonal.
fn haar_unitary(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut gauss = || {
        // Box–Muller
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let a = c64(gauss(), gauss());
    let b = c64(gauss(), gauss());
    let c = c64(gauss(), gauss());
    let d = c64(gauss(), gauss());
    // Gram–Schmidt on the columns (a,c) and (b,d)
    let n1 = (a.norm_sqr() + c.norm_sqr()).sqrt();
    let (q1a, q1c) = (a / n1, c / n1);
    let proj = q1a.conj() * b + q1c.conj() * d;
    let (r2a, r2c) = (b - proj * q1a, d - proj * q1c);
    let n2 = (r2a.norm_sqr() + r2c.norm_sqr()).sqrt();
    let (q2a, q2c) = (r2a / n2, r2c / n2);
    ComplexMatrix::from_rows(2, 2, vec![q1a, q2a, q1c, q2c]).unwrap()
}

/// Project qubit `q` of a pure state onto a sampled computational outcome
/// and renormalize. Returns the outcome bit.
fn collapse_qubit(amps: &mut [Complex64], q: usize, rng: &mut ChaCha8Rng) -> usize {
    let bit = 1usize << q;
    let p1: f64 = amps
        .iter()
        .enumerate()
        .filter(|(i, _)| i & bit != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    let outcome = usize::from(rng.gen::<f64>() < p1);
    let keep = if outcome == 1 { bit } else { 0 };
    let mut norm = 0.0;
    for (i, a) in amps.iter_mut().enumerate() {
        if i & bit != keep {
            *a = Complex64::new(0.0, 0.0);
        } else {
            norm += a.norm_sqr();
        }
    }
    let scale = 1.0 / norm.sqrt();
    for a in amps.iter_mut() {
        *a *= scale;
    }
    outcome
}

fn apply_unitary_on_qubit(amps: &mut [Complex64], q: usize, u: &ComplexMatrix) {
    crate::circuit::apply_single(amps, q, u, &[]);
}

/// Kill coherence between the two computational values of qubit `q`.
fn dephase_qubit(rho: &mut DensityMatrix, q: usize) {
    let bit = 1usize << q;
    let dim = rho.dim();
    let m = rho.matrix_mut();
    for r in 0..dim {
        for c in 0..dim {
            if (r & bit) != (c & bit) {
                m[(r, c)] = Complex64::new(0.0, 0.0);
            }
        }
    }
}

enum MidState {
    Pure(Vec<Complex64>),
    Mixed(DensityMatrix),
}

/// Apply Eve's intercept–resend to the in-transit register. Pure states get
/// per-qubit sampled projective collapse; mixed states get the equivalent
/// measure-and-forget dephasing channel.
fn eve_channel(
    state: &mut MidState,
    transit: &[usize],
    eve: &EveConfig,
    n_qubits: usize,
) -> Result<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(eve.seed);
    let mut log = Vec::new();
    for &q in transit {
        let x_basis = match eve.basis {
            EveBasis::AlwaysComputational => false,
            EveBasis::RandomPerQubit => rng.gen::<bool>(),
        };
        match state {
            MidState::Pure(amps) => {
                if x_basis {
                    apply_unitary_on_qubit(amps, q, &hadamard());
                }
                let outcome = collapse_qubit(amps, q, &mut rng);
                if x_basis {
                    apply_unitary_on_qubit(amps, q, &hadamard());
                }
                log.push(format!(
                    "eve: qubit {q} measured in {} basis -> {outcome}",
                    if x_basis { "X" } else { "Z" }
                ));
            }
            MidState::Mixed(rho) => {
                let h = embed_unitary(&hadamard(), &[q], n_qubits)?;
                if x_basis {
                    *rho = rho.conjugate(&h)?;
                }
                dephase_qubit(rho, q);
                if x_basis {
                    *rho = rho.conjugate(&h)?;
                }
                // burn one draw so pure and mixed modes stay seed-aligned
                let _ = rng.gen::<f64>();
                log.push(format!(
                    "eve: qubit {q} dephased in {} basis",
                    if x_basis { "X" } else { "Z" }
                ));
            }
        }
        if eve.reencode == EveReencode::HaarRandom {
            let u = haar_unitary(&mut rng);
            match state {
                MidState::Pure(amps) => apply_unitary_on_qubit(amps, q, &u),
                MidState::Mixed(rho) => {
                    *rho = rho.conjugate(&embed_unitary(&u, &[q], n_qubits)?)?;
                }
            }
            log.push(format!("eve: qubit {q} reencoded with a random unitary"));
        }
    }
    Ok(log)
}

/// Run the protocol with an optional eavesdropper on the return channel.
/// `eve = None` is an exact pass-through of [`protocol::run_protocol`].
pub fn run_protocol_with_eve(
    cfg: &ProtocolConfig,
    eve: Option<&EveConfig>,
) -> Result<ProtocolTranscript> {
    let Some(eve) = eve else {
        return protocol::run_protocol(cfg);
    };

    let pk = protocol::generate_public_key(cfg)?;
    let encoded = protocol::encrypt_message(&pk, cfg.message_k, cfg.k)?;
    let ideal = protocol::decrypt(&encoded, cfg)?;

    let (first, second, regs, mut events) = protocol::build_circuit_halves(cfg)?;
    let init = protocol::circuit_initial_state(cfg, regs.n_qubits())?;
    let transit = regs.bob_all();

    let observed = match &cfg.noise {
        None => {
            let mid = first.run_statevector(&init)?;
            let mut state = MidState::Pure(mid.amplitudes().to_vec());
            events.extend(eve_channel(&mut state, &transit, eve, regs.n_qubits())?);
            let MidState::Pure(amps) = state else { unreachable!() };
            let resumed = StateVector::new(amps)?;
            second.run_statevector(&resumed)?.probabilities(&regs.alice_pos)?
        }
        Some(spec) => {
            let rho = noise::apply_noise_to_run(&first, spec, &init)?;
            let mut state = MidState::Mixed(rho);
            events.extend(eve_channel(&mut state, &transit, eve, regs.n_qubits())?);
            let MidState::Mixed(rho) = state else { unreachable!() };
            let final_rho = noise::evolve_density(&second, spec, &rho)?;
            final_rho.probabilities(&regs.alice_pos)?
        }
    };
    let observed = match cfg.shots {
        Some(shots) => Distribution::from_counts(&observed.sample_counts(shots, cfg.seed)?),
        None => observed,
    };

    let k_prime = observed.argmax()?;
    let expected_k_prime = (cfg.message_k + cfg.init.x) % cfg.k;
    let mut depth_circuit = first;
    depth_circuit.extend(second.gates().iter().cloned())?;
    Ok(ProtocolTranscript {
        public_key_distribution: pk.position_distribution(cfg.k)?,
        encoded_distribution: encoded.position_distribution(cfg.k)?,
        decryption_distribution: observed.clone(),
        ideal_distribution: ideal.clone(),
        k_prime,
        recovered_k: recover_message(k_prime, cfg.init.x, cfg.k)?,
        expected_k_prime,
        hellinger_fidelity: metrics::hellinger_fidelity(&observed, &ideal),
        tvd: metrics::total_variation(&observed, &ideal),
        qber: qber_of(&observed, expected_k_prime)?,
        depth: depth_circuit.depth_report(),
        events,
        counts: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EveRunSummary {
    pub seed: u64,
    pub p_correct: f64,
    pub qber: f64,
    pub detected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttackReport {
    pub per_seed: Vec<EveRunSummary>,
    pub mean_p_correct: f64,
    pub mean_qber: f64,
    pub detection_rate: f64,
}

/// Monte-Carlo sweep over Eve seeds, aggregating success probability and
/// error rate.
pub fn eve_attack_sweep(
    cfg: &ProtocolConfig,
    basis: EveBasis,
    reencode: EveReencode,
    n_seeds: u64,
    detection_threshold: f64,
) -> Result<AttackReport> {
    if n_seeds == 0 {
        return Err(Error::InvalidParameter("n_seeds must be >= 1".into()));
    }
    let mut per_seed = Vec::with_capacity(n_seeds as usize);
    for seed in 0..n_seeds {
        let eve = EveConfig::new(basis, reencode, seed);
        let t = run_protocol_with_eve(cfg, Some(&eve))?;
        let detected = mitm_detection_check(&t, detection_threshold)?;
        per_seed.push(EveRunSummary {
            seed,
            p_correct: 1.0 - t.qber,
            qber: t.qber,
            detected,
        });
    }
    let n = per_seed.len() as f64;
    Ok(AttackReport {
        mean_p_correct: per_seed.iter().map(|s| s.p_correct).sum::<f64>() / n,
        mean_qber: per_seed.iter().map(|s| s.qber).sum::<f64>() / n,
        detection_rate: per_seed.iter().filter(|s| s.detected).count() as f64 / n,
        per_seed,
    })
}

// ---------------------------------------------------------------------------
// BB84 baseline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct Bb84Config {
    pub n_bits: u64,
    pub eve_present: bool,
    pub seed: u64,
    pub log_rounds: bool,
}

impl Bb84Config {
    pub fn new(n_bits: u64, eve_present: bool, seed: u64) -> Result<Self> {
        if n_bits == 0 {
            return Err(Error::InvalidParameter("n_bits must be >= 1".into()));
        }
        Ok(Bb84Config { n_bits, eve_present, seed, log_rounds: false })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Bb84Round {
    pub round: u64,
    pub alice_basis: char,
    pub bob_basis: char,
    pub bit: u8,
    pub sifted: bool,
    pub error: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Bb84Report {
    pub sifted_length: u64,
    pub errors: u64,
    pub qber: f64,
    pub rounds: Option<Vec<Bb84Round>>,
}

/// Prepare-and-measure BB84 with an optional intercept–resend attacker,
/// noiseless channel. A measurement in the preparation basis returns the
/// prepared bit; in the conjugate basis it returns a fair coin.
pub fn bb84_run(cfg: &Bb84Config) -> Result<Bb84Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sifted = 0u64;
    let mut errors = 0u64;
    let mut rounds = cfg.log_rounds.then(Vec::new);
    for round in 0..cfg.n_bits {
        let bit: u8 = rng.gen_range(0..2);
        let alice_basis: u8 = rng.gen_range(0..2);
        let (mut wire_bit, mut wire_basis) = (bit, alice_basis);
        if cfg.eve_present {
            let eve_basis: u8 = rng.gen_range(0..2);
            let eve_bit = if eve_basis == wire_basis {
                wire_bit
            } else {
                rng.gen_range(0..2)
            };
            wire_bit = eve_bit;
            wire_basis = eve_basis;
        }
        let bob_basis: u8 = rng.gen_range(0..2);
        let bob_bit = if bob_basis == wire_basis {
            wire_bit
        } else {
            rng.gen_range(0..2)
        };
        let keep = bob_basis == alice_basis;
        let err = keep && bob_bit != bit;
        if keep {
            sifted += 1;
            if err {
                errors += 1;
            }
        }
        if let Some(log) = rounds.as_mut() {
            log.push(Bb84Round {
                round,
                alice_basis: if alice_basis == 0 { 'Z' } else { 'X' },
                bob_basis: if bob_basis == 0 { 'Z' } else { 'X' },
                bit,
                sifted: keep,
                error: err,
            });
        }
    }
    Ok(Bb84Report {
        sifted_length: sifted,
        errors,
        qber: if sifted > 0 { errors as f64 / sifted as f64 } else { 0.0 },
        rounds,
    })
}
