//! Depolarizing noise: exact density-matrix channel evolution and a seeded
//! stochastic Pauli-insertion (trajectory) unraveling.
//!
//! Density matrices evolve in vectorized form: ρ is a length-4ⁿ amplitude
//! array indexed `row * 2ⁿ + col`, so a gate G acts as G on the row bits and
//! conj(G) on the column bits. Kraus mixtures are sums of such applications.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{apply_gate, apply_single, Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};
use crate::state::{DensityMatrix, StateVector};

/// Where depolarizing noise is inserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// Depolarize after every compiled gate block, with strength `p1` for
    /// one-qubit blocks and `p2` for two-qubit blocks. Gates are compiled
    /// the way a hardware transpiler schedules them before noise attaches:
    /// diagonal phase gates are merged away (frame changes are virtual on
    /// real devices) and a maximal run of gates confined to a single qubit
    /// or qubit pair counts as one noisy operation.
    PerGate,
    /// Run the circuit noiselessly, then depolarize every qubit once with
    /// strength `p1`.
    Terminal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    pub p1: f64,
    pub p2: f64,
    /// Use the stochastic trajectory unraveling instead of exact density
    /// evolution.
    pub trajectory: bool,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn per_gate(p1: f64, p2: f64) -> Result<Self> {
        check_probability(p1)?;
        check_probability(p2)?;
        Ok(NoiseSpec { mode: NoiseMode::PerGate, p1, p2, trajectory: false, seed: 0 })
    }

    /// Per-gate noise with the two-qubit strength defaulting to `p1`.
    pub fn per_gate_uniform(p1: f64) -> Result<Self> {
        Self::per_gate(p1, p1)
    }

    pub fn terminal(p1: f64) -> Result<Self> {
        check_probability(p1)?;
        Ok(NoiseSpec { mode: NoiseMode::Terminal, p1, p2: p1, trajectory: false, seed: 0 })
    }

    pub fn with_trajectory(mut self, seed: u64) -> Self {
        self.trajectory = true;
        self.seed = seed;
        self
    }

    fn strength_for(&self, unit: &NoiseUnit) -> f64 {
        if unit.qubits.len() == 2 {
            self.p2
        } else {
            self.p1
        }
    }
}

/// A compiled block: consecutive gates confined to at most two qubits,
/// followed by one depolarizing event on that support.
struct NoiseUnit {
    gates: Vec<Gate>,
    qubits: Vec<usize>,
}

/// Commute diagonal phase gates forward (through other diagonals and across
/// swaps), merging them into at most one residual phase per qubit. Exact:
/// the returned gate list implements the same unitary.
fn merge_phases(circuit: &Circuit) -> Vec<Gate> {
    let n = circuit.n_qubits();
    let mut acc = vec![0.0f64; n];
    let mut out = Vec::with_capacity(circuit.gates().len());
    let flush = |out: &mut Vec<Gate>, acc: &mut [f64], q: usize| {
        let theta = acc[q].rem_euclid(2.0 * std::f64::consts::PI);
        acc[q] = 0.0;
        if theta > 1e-9 && (2.0 * std::f64::consts::PI - theta) > 1e-9 {
            out.push(Gate::Phase { target: q, theta });
        }
    };
    for gate in circuit.gates() {
        match gate {
            Gate::Phase { target, theta } => acc[*target] += theta,
            Gate::Swap { a, b } => {
                acc.swap(*a, *b);
                out.push(gate.clone());
            }
            Gate::PauliZ { .. } | Gate::Cz { .. } | Gate::ControlledPhase { .. } => {
                out.push(gate.clone());
            }
            other => {
                for q in other.qubits() {
                    flush(&mut out, &mut acc, q);
                }
                out.push(other.clone());
            }
        }
    }
    for q in 0..n {
        flush(&mut out, &mut acc, q);
    }
    out
}

/// Group a gate stream into maximal runs whose combined support stays on
/// one qubit or one qubit pair.
fn compile_units(circuit: &Circuit) -> Vec<NoiseUnit> {
    let mut units: Vec<NoiseUnit> = Vec::new();
    for gate in merge_phases(circuit) {
        let gq = gate.qubits();
        if let Some(unit) = units.last_mut() {
            let mut support = unit.qubits.clone();
            for q in &gq {
                if !support.contains(q) {
                    support.push(*q);
                }
            }
            if support.len() <= 2 {
                unit.gates.push(gate);
                unit.qubits = support;
                continue;
            }
        }
        units.push(NoiseUnit { gates: vec![gate], qubits: gq });
    }
    units
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "depolarizing probability {p} outside [0, 1]"
        )));
    }
    Ok(())
}

fn pauli_matrix(which: usize) -> ComplexMatrix {
    match which {
        0 => ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
        1 => ComplexMatrix::from_rows(
            2,
            2,
            vec![c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)],
        )
        .unwrap(),
        _ => ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap(),
    }
}

/// Apply Pauli `which` (0=X, 1=Y, 2=Z) to qubit `q` of a vectorized ρ of
/// `n` qubits: P on the row bits and conj(P) on the column bits.
fn conjugate_pauli(amps: &mut [Complex64], q: usize, which: usize, n: usize) {
    let p = pauli_matrix(which);
    let p_conj = ComplexMatrix::from_fn(2, 2, |r, c| p[(r, c)].conj());
    apply_single(amps, q + n, &p, &[]);
    apply_single(amps, q, &p_conj, &[]);
}

/// Single-qubit depolarizing channel on qubit `q` of a vectorized ρ:
/// ρ → (1−p)ρ + (p/3)(XρX + YρY + ZρZ).
pub(crate) fn depolarize_qubit(amps: &mut [Complex64], q: usize, p: f64, n: usize) {
    if p == 0.0 {
        return;
    }
    let original = amps.to_vec();
    for a in amps.iter_mut() {
        *a *= 1.0 - p;
    }
    for which in 0..3 {
        let mut branch = original.clone();
        conjugate_pauli(&mut branch, q, which, n);
        for (a, b) in amps.iter_mut().zip(&branch) {
            *a += (p / 3.0) * b;
        }
    }
}

/// Two-qubit depolarizing channel on `(qa, qb)`: ρ → (1−p)ρ + (p/15)·Σ over
/// the fifteen non-identity Pauli pairs.
pub(crate) fn depolarize_pair(amps: &mut [Complex64], qa: usize, qb: usize, p: f64, n: usize) {
    if p == 0.0 {
        return;
    }
    let original = amps.to_vec();
    for a in amps.iter_mut() {
        *a *= 1.0 - p;
    }
    // index 0..4 per qubit: 0 = identity, 1..4 = X, Y, Z
    for ia in 0..4 {
        for ib in 0..4 {
            if ia == 0 && ib == 0 {
                continue;
            }
            let mut branch = original.clone();
            if ia > 0 {
                conjugate_pauli(&mut branch, qa, ia - 1, n);
            }
            if ib > 0 {
                conjugate_pauli(&mut branch, qb, ib - 1, n);
            }
            for (a, b) in amps.iter_mut().zip(&branch) {
                *a += (p / 15.0) * b;
            }
        }
    }
}

fn vectorize(init: &StateVector) -> Vec<Complex64> {
    let dim = init.dim();
    let amps = init.amplitudes();
    let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            rho[r * dim + c] = amps[r] * amps[c].conj();
        }
    }
    rho
}

fn devectorize(rho: Vec<Complex64>, dim: usize) -> Result<DensityMatrix> {
    DensityMatrix::from_matrix(ComplexMatrix::from_rows(dim, dim, rho)?)
}

/// Exact noisy run from a pure initial state.
pub fn apply_noise_to_run(
    circuit: &Circuit,
    spec: &NoiseSpec,
    init: &StateVector,
) -> Result<DensityMatrix> {
    if init.dim() != 1 << circuit.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "initial state dim {} does not match {} qubits",
            init.dim(),
            circuit.n_qubits()
        )));
    }
    evolve_density_vec(circuit, spec, vectorize(init))
}

/// Exact noisy run continuing from an already-mixed state.
pub fn evolve_density(
    circuit: &Circuit,
    spec: &NoiseSpec,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    if rho.dim() != 1 << circuit.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "density dim {} does not match {} qubits",
            rho.dim(),
            circuit.n_qubits()
        )));
    }
    evolve_density_vec(circuit, spec, rho.matrix().entries().to_vec())
}

fn evolve_density_vec(
    circuit: &Circuit,
    spec: &NoiseSpec,
    mut rho: Vec<Complex64>,
) -> Result<DensityMatrix> {
    let n = circuit.n_qubits();
    let dim = 1usize << n;
    for unit in compile_units(circuit) {
        for gate in &unit.gates {
            apply_gate(&mut rho, gate, n, false);
            apply_gate(&mut rho, gate, 0, true);
        }
        if spec.mode == NoiseMode::PerGate {
            let p = spec.strength_for(&unit);
            match unit.qubits[..] {
                [q] => depolarize_qubit(&mut rho, q, p, n),
                [a, b] => depolarize_pair(&mut rho, a, b, p, n),
                _ => unreachable!("units are confined to two qubits"),
            }
        }
    }
    if spec.mode == NoiseMode::Terminal {
        for q in 0..n {
            depolarize_qubit(&mut rho, q, spec.p1, n);
        }
    }
    devectorize(rho, dim)
}

const PAIR_PAULIS: [(usize, usize); 15] = [
    (0, 1), (0, 2), (0, 3),
    (1, 0), (1, 1), (1, 2), (1, 3),
    (2, 0), (2, 1), (2, 2), (2, 3),
    (3, 0), (3, 1), (3, 2), (3, 3),
];

fn random_pauli_on(amps: &mut [Complex64], q: usize, rng: &mut ChaCha8Rng) {
    let which = rng.gen_range(0..3);
    apply_single(amps, q, &pauli_matrix(which), &[]);
}

/// Trajectory unraveling: per shot, run the statevector with randomly
/// inserted Paulis and sample one measurement outcome. Deterministic for a
/// fixed spec seed.
pub fn trajectory_sample(
    circuit: &Circuit,
    spec: &NoiseSpec,
    init: &StateVector,
    measured: &[usize],
    shots: u64,
) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be >= 1".into()));
    }
    let n = circuit.n_qubits();
    if init.dim() != 1 << n {
        return Err(Error::DimensionMismatch(format!(
            "initial state dim {} does not match {n} qubits",
            init.dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut counts = vec![0u64; 1 << measured.len()];
    let units = compile_units(circuit);
    for _ in 0..shots {
        let mut amps = init.amplitudes().to_vec();
        for unit in &units {
            for gate in &unit.gates {
                apply_gate(&mut amps, gate, 0, false);
            }
            if spec.mode == NoiseMode::PerGate {
                let p = spec.strength_for(unit);
                if rng.gen::<f64>() < p {
                    match unit.qubits[..] {
                        [q] => random_pauli_on(&mut amps, q, &mut rng),
                        [a, b] => {
                            let &(ia, ib) = PAIR_PAULIS.choose(&mut rng).unwrap();
                            if ia > 0 {
                                apply_single(&mut amps, a, &pauli_matrix(ia - 1), &[]);
                            }
                            if ib > 0 {
                                apply_single(&mut amps, b, &pauli_matrix(ib - 1), &[]);
                            }
                        }
                        _ => unreachable!("units are confined to two qubits"),
                    }
                }
            }
        }
        if spec.mode == NoiseMode::Terminal {
            for q in 0..n {
                if rng.gen::<f64>() < spec.p1 {
                    random_pauli_on(&mut amps, q, &mut rng);
                }
            }
        }
        let outcome = sample_outcome(&amps, measured, &mut rng);
        counts[outcome] += 1;
    }
    Ok(counts)
}

fn sample_outcome(amps: &[Complex64], measured: &[usize], rng: &mut ChaCha8Rng) -> usize {
    let mut probs = vec![0.0f64; 1 << measured.len()];
    for (i, a) in amps.iter().enumerate() {
        let mut out = 0usize;
        for (pos, &q) in measured.iter().enumerate() {
            out |= ((i >> q) & 1) << pos;
        }
        probs[out] += a.norm_sqr();
    }
    let mut roll = rng.gen::<f64>() * probs.iter().sum::<f64>();
    for (i, &p) in probs.iter().enumerate() {
        roll -= p;
        if roll <= 0.0 {
            return i;
        }
    }
    probs.len() - 1
}
