//! Matrix-level discrete-time quantum walks on K-cycles: coins, shifts,
//! walk steps, Parrondo sequences, periodicity search, QFT diagonalization,
//! and position translation operators.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c64, kron, ComplexMatrix};
use crate::state::StateVector;

/// Parameters of the 2x2 coin unitary
/// [[√s, √(1−s)e^{iγ}], [√(1−s)e^{iδ}, −√s e^{i(γ+δ)}]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinParams {
    pub s: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl CoinParams {
    pub fn new(s: f64, gamma: f64, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParameter(format!("s = {s} outside [0, 1]")));
        }
        if !(0.0..=PI).contains(&gamma) || !(0.0..=PI).contains(&delta) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma}, delta = {delta}: both must lie in [0, pi]"
            )));
        }
        Ok(CoinParams { s, gamma, delta })
    }

    /// Chaotic coin A for the 4-cycle Parrondo pair.
    pub fn parrondo_a() -> Self {
        CoinParams { s: 0.998489, gamma: 0.0, delta: 0.0 }
    }

    /// Chaotic coin B for the 4-cycle Parrondo pair.
    pub fn parrondo_b() -> Self {
        CoinParams { s: 0.119545, gamma: 0.0, delta: 0.0 }
    }

    /// Chaotic coin A' for the 3-cycle Parrondo pair.
    pub fn parrondo_a_prime() -> Self {
        CoinParams { s: 0.264734, gamma: 0.0, delta: 0.0 }
    }

    /// Chaotic coin B' for the 3-cycle Parrondo pair.
    pub fn parrondo_b_prime() -> Self {
        CoinParams { s: 0.801571, gamma: 0.0, delta: 0.0 }
    }
}

/// 2x2 coin unitary for the given parameters.
pub fn coin_operator(p: &CoinParams) -> ComplexMatrix {
    let root_s = p.s.sqrt();
    let root_1ms = (1.0 - p.s).sqrt();
    let eg = Complex64::from_polar(1.0, p.gamma);
    let ed = Complex64::from_polar(1.0, p.delta);
    ComplexMatrix::from_rows(
        2,
        2,
        vec![
            c64(root_s, 0.0),
            root_1ms * eg,
            root_1ms * ed,
            -root_s * eg * ed,
        ],
    )
    .expect("2x2 shape")
}

/// Coin-conditioned shift on a K-cycle: block-diagonal [[F0, 0], [0, F1]]
/// with F0 the decrement and F1 the increment permutation.
pub fn shift_operator(k: usize) -> Result<ComplexMatrix> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("cycle length {k} < 2")));
    }
    let mut s = ComplexMatrix::zeros(2 * k, 2 * k);
    for x in 0..k {
        // coin |0>: x -> x-1 mod K
        s[((x + k - 1) % k, x)] = c64(1.0, 0.0);
        // coin |1>: x -> x+1 mod K
        s[(k + (x + 1) % k, k + x)] = c64(1.0, 0.0);
    }
    Ok(s)
}

/// Decrement permutation F0 alone.
pub fn decrement_operator(k: usize) -> Result<ComplexMatrix> {
    Ok(translation_operator((k - 1) % k, k)?)
}

/// Increment permutation F1 alone.
pub fn increment_operator(k: usize) -> Result<ComplexMatrix> {
    translation_operator(1 % k, k)
}

/// Single-step walk unitary W = S_K · (C ⊗ I_K).
pub fn walk_unitary(coin: &CoinParams, k: usize) -> Result<ComplexMatrix> {
    let c = coin_operator(coin);
    walk_unitary_from_matrix(&c, k)
}

/// Walk unitary from an explicit 2x2 coin matrix; lets tests inject C = I.
pub fn walk_unitary_from_matrix(coin: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    if coin.rows() != 2 || coin.cols() != 2 {
        return Err(Error::DimensionMismatch("coin must be 2x2".into()));
    }
    let s = shift_operator(k)?;
    s.matmul(&kron(coin, &ComplexMatrix::identity(k)))
}

/// Walker initialization: coin (cos(θ/2)|0⟩ + e^{iω} sin(θ/2)|1⟩) at vertex x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkerInit {
    pub theta: f64,
    pub omega: f64,
    pub x: usize,
    pub k: usize,
}

impl WalkerInit {
    pub fn new(theta: f64, omega: f64, x: usize, k: usize) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta = {theta} outside [0, pi]")));
        }
        if !(0.0..2.0 * PI).contains(&omega) {
            return Err(Error::InvalidParameter(format!("omega = {omega} outside [0, 2pi)")));
        }
        if x >= k {
            return Err(Error::InvalidParameter(format!("vertex {x} out of range for {k}-cycle")));
        }
        Ok(WalkerInit { theta, omega, x, k })
    }

    /// Coin basis state |l⟩ at vertex x (l ∈ {0, 1}).
    pub fn basis(l: usize, x: usize, k: usize) -> Result<Self> {
        let theta = match l {
            0 => 0.0,
            1 => PI,
            _ => return Err(Error::InvalidParameter(format!("coin label {l} not in {{0, 1}}"))),
        };
        Self::new(theta, 0.0, x, k)
    }
}

/// Build the coin⊗position state vector for a walker initialization.
pub fn initial_state(init: &WalkerInit) -> StateVector {
    let mut amps = vec![c64(0.0, 0.0); 2 * init.k];
    amps[init.x] = c64((init.theta / 2.0).cos(), 0.0);
    amps[init.k + init.x] = Complex64::from_polar((init.theta / 2.0).sin(), init.omega);
    StateVector::new(amps).expect("normalized by construction")
}

/// A named coin set with an ordered application pattern.
#[derive(Debug, Clone)]
pub struct ParrondoSequence {
    pub coins: HashMap<String, CoinParams>,
    pub pattern: Vec<String>,
    pub k: usize,
}

impl ParrondoSequence {
    /// The 4-cycle AABB pair, repeated `repeats` times.
    pub fn aabb(repeats: usize) -> Self {
        let mut coins = HashMap::new();
        coins.insert("A".to_string(), CoinParams::parrondo_a());
        coins.insert("B".to_string(), CoinParams::parrondo_b());
        let pattern = ["A", "A", "B", "B"]
            .iter()
            .cycle()
            .take(4 * repeats)
            .map(|s| s.to_string())
            .collect();
        ParrondoSequence { coins, pattern, k: 4 }
    }

    /// The 3-cycle A'A'B'B' pair, repeated `repeats` times.
    pub fn aabb_prime(repeats: usize) -> Self {
        let mut coins = HashMap::new();
        coins.insert("A'".to_string(), CoinParams::parrondo_a_prime());
        coins.insert("B'".to_string(), CoinParams::parrondo_b_prime());
        let pattern = ["A'", "A'", "B'", "B'"]
            .iter()
            .cycle()
            .take(4 * repeats)
            .map(|s| s.to_string())
            .collect();
        ParrondoSequence { coins, pattern, k: 3 }
    }

    pub fn resolve(&self, label: &str) -> Result<&CoinParams> {
        self.coins
            .get(label)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown coin label `{label}`")))
    }
}

/// Time-ordered product of walk unitaries for a coin pattern. The first
/// pattern element is applied first (rightmost factor).
pub fn sequence_unitary(seq: &ParrondoSequence) -> Result<ComplexMatrix> {
    if seq.pattern.is_empty() {
        return Err(Error::InvalidParameter("empty coin pattern".into()));
    }
    let mut product = ComplexMatrix::identity(2 * seq.k);
    for label in &seq.pattern {
        let w = walk_unitary(seq.resolve(label)?, seq.k)?;
        product = w.matmul(&product)?;
    }
    Ok(product)
}

/// Result of a periodicity search.
#[derive(Debug, Clone)]
pub struct PeriodicityReport {
    pub period: Option<usize>,
    pub deviation_at_period: f64,
    pub eigenvalues: Vec<Complex64>,
    pub searched_up_to: usize,
}

/// Smallest T ≤ t_max with max|W^T − I| ≤ tol, by explicit running product.
/// Eigenvalues are reported so the α_i^T = 1 criterion can be cross-checked.
pub fn find_period(w: &ComplexMatrix, t_max: usize, tol: f64) -> Result<PeriodicityReport> {
    if t_max < 1 {
        return Err(Error::InvalidParameter("t_max must be >= 1".into()));
    }
    if !w.is_unitary(1e-8) {
        return Err(Error::NotUnitary { deviation: w.unitarity_deviation() });
    }
    let identity = ComplexMatrix::identity(w.rows());
    let mut product = identity.clone();
    let mut best_deviation = f64::INFINITY;
    let mut period = None;
    for t in 1..=t_max {
        product = w.matmul(&product)?;
        let deviation = product.max_abs_diff(&identity);
        best_deviation = best_deviation.min(deviation);
        if deviation <= tol {
            period = Some(t);
            best_deviation = deviation;
            break;
        }
    }
    Ok(PeriodicityReport {
        period,
        deviation_at_period: best_deviation,
        eigenvalues: w.eigenvalues(),
        searched_up_to: t_max,
    })
}

/// Periodicity search over a cyclically applied coin pattern: step t applies
/// the walk of `pattern[t mod len]`.
pub fn find_sequence_period(
    seq: &ParrondoSequence,
    t_max: usize,
    tol: f64,
) -> Result<PeriodicityReport> {
    if t_max < 1 {
        return Err(Error::InvalidParameter("t_max must be >= 1".into()));
    }
    let steps: Vec<ComplexMatrix> = seq
        .pattern
        .iter()
        .map(|l| walk_unitary(seq.resolve(l)?, seq.k))
        .collect::<Result<_>>()?;
    if steps.is_empty() {
        return Err(Error::InvalidParameter("empty coin pattern".into()));
    }
    let identity = ComplexMatrix::identity(2 * seq.k);
    let mut product = identity.clone();
    let mut best_deviation = f64::INFINITY;
    let mut period = None;
    for t in 1..=t_max {
        product = steps[(t - 1) % steps.len()].matmul(&product)?;
        let deviation = product.max_abs_diff(&identity);
        best_deviation = best_deviation.min(deviation);
        if deviation <= tol {
            period = Some(t);
            best_deviation = deviation;
            break;
        }
    }
    let eigenvalues = sequence_unitary(seq)?.eigenvalues();
    Ok(PeriodicityReport {
        period,
        deviation_at_period: best_deviation,
        eigenvalues,
        searched_up_to: t_max,
    })
}

/// QFT matrix M[j][k] = r^{jk}/√K with r = e^{2πi/K}.
pub fn qft_matrix(k: usize) -> Result<ComplexMatrix> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("cycle length {k} < 2")));
    }
    let norm = 1.0 / (k as f64).sqrt();
    Ok(ComplexMatrix::from_fn(k, k, |j, l| {
        Complex64::from_polar(norm, 2.0 * PI * ((j * l) % k) as f64 / k as f64)
    }))
}

/// Conjugate a position-space shift (F0 or F1) into its diagonal Fourier
/// form 𝓡 = M·F·M†. Errors if the result is not diagonal to 1e-10.
pub fn diagonalize_shift(f: &ComplexMatrix, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if f.rows() != m.rows() || f.cols() != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "shift is {}x{}, QFT is {}x{}",
            f.rows(),
            f.cols(),
            m.rows(),
            m.cols()
        )));
    }
    let d = m.matmul(f)?.matmul(&m.dagger())?;
    for r in 0..d.rows() {
        for c in 0..d.cols() {
            if r != c && d[(r, c)].norm() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "conjugated shift not diagonal: |entry ({r},{c})| = {:.3e}",
                    d[(r, c)].norm()
                )));
            }
        }
    }
    Ok(d)
}

/// Position translation T_k |x⟩ = |(x+k) mod K⟩ (equals F1^k).
pub fn translation_operator(k_shift: usize, k: usize) -> Result<ComplexMatrix> {
    if k_shift >= k {
        return Err(Error::InvalidParameter(format!(
            "translation {k_shift} out of range for {k}-cycle"
        )));
    }
    let mut t = ComplexMatrix::zeros(k, k);
    for x in 0..k {
        t[((x + k_shift) % k, x)] = c64(1.0, 0.0);
    }
    Ok(t)
}

/// Fourier-frame form of T_k on a 4-cycle as a pair of single-qubit phase
/// gates (high-qubit factor, low-qubit factor), matching M·T_k·M† =
/// diag(r^{k·j}).
pub fn diagonalized_translation(k_shift: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if k_shift >= 4 {
        return Err(Error::InvalidParameter(format!(
            "translation {k_shift} out of range for the 4-cycle"
        )));
    }
    // diag(r^{k·(2·q1 + q0)}) factorizes as P(k·π) on q1 ⊗ P(k·π/2) on q0.
    let phase = |theta: f64| {
        ComplexMatrix::from_rows(
            2,
            2,
            vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), Complex64::from_polar(1.0, theta)],
        )
        .expect("2x2 shape")
    };
    let hi = phase(k_shift as f64 * PI);
    let lo = phase(k_shift as f64 * PI / 2.0);
    Ok((hi, lo))
}

/// Per-qubit phase angles (index = position qubit, qubit 0 least significant)
/// realizing diag(r^{m·j}) on an n-qubit position register of a 2^n-cycle.
/// Used by the circuit engine for 𝓡 powers and Fourier-frame translations.
pub fn diagonal_phase_angles(m: i64, k: usize) -> Vec<f64> {
    let n = k.trailing_zeros() as usize;
    (0..n)
        .map(|b| 2.0 * PI * (m * (1i64 << b)) as f64 / k as f64)
        .collect()
}
