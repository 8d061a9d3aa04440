//! Pure and mixed quantum states plus Born-rule measurement marginals.

use num_complex::Complex64;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub const NORM_TOL: f64 = 1e-9;

/// Pure state over a `dim`-dimensional Hilbert space. The space need not be
/// a power of two: walk-level states on a K-cycle live in 2K dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = StateVector { amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "state norm² = {norm}, expected 1"
            )));
        }
        Ok(state)
    }

    /// Computational basis state |index⟩ of the given dimension.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dim {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Apply a square matrix to the state.
    pub fn apply(&self, u: &ComplexMatrix) -> Result<StateVector> {
        if u.cols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but state has dim {}",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); u.rows()];
        for r in 0..u.rows() {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..u.cols() {
                acc += u[(r, c)] * self.amplitudes[c];
            }
            out[r] = acc;
        }
        Ok(StateVector { amplitudes: out })
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Probability distribution over all basis indices.
    pub fn full_distribution(&self) -> Distribution {
        Distribution::from_probabilities(self.amplitudes.iter().map(|a| a.norm_sqr()).collect())
    }

    /// Marginal distribution over the position subsystem of a coin⊗position
    /// state indexed as `coin * k + position`.
    pub fn position_distribution(&self, k: usize) -> Result<Distribution> {
        if self.dim() % k != 0 {
            return Err(Error::DimensionMismatch(format!(
                "dim {} is not a multiple of cycle length {k}",
                self.dim()
            )));
        }
        let mut probs = vec![0.0; k];
        for (i, a) in self.amplitudes.iter().enumerate() {
            probs[i % k] += a.norm_sqr();
        }
        Ok(Distribution::from_probabilities(probs))
    }

    /// Born-rule marginal over a subset of qubits; the state dimension must
    /// be a power of two. `measured[0]` becomes bit 0 of the outcome label.
    pub fn probabilities(&self, measured: &[usize]) -> Result<Distribution> {
        let n = qubit_count(self.dim())?;
        check_measured(measured, n)?;
        let mut probs = vec![0.0; 1 << measured.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            probs[extract_bits(i, measured)] += a.norm_sqr();
        }
        Ok(Distribution::from_probabilities(probs))
    }
}

/// Mixed state as a dense density matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: ComplexMatrix,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        let dim = state.dim();
        let amps = state.amplitudes();
        let entries =
            ComplexMatrix::from_fn(dim, dim, |r, c| amps[r] * amps[c].conj());
        DensityMatrix { entries }
    }

    pub fn from_matrix(entries: ComplexMatrix) -> Result<Self> {
        if entries.rows() != entries.cols() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        Ok(DensityMatrix { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn matrix_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.entries.max_abs_diff(&self.entries.dagger())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.entries
            .eigenvalues()
            .iter()
            .map(|e| e.re)
            .fold(f64::INFINITY, f64::min)
    }

    /// ρ → UρU†.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        let entries = u.matmul(&self.entries)?.matmul(&u.dagger())?;
        Ok(DensityMatrix { entries })
    }

    pub fn probabilities(&self, measured: &[usize]) -> Result<Distribution> {
        let n = qubit_count(self.dim())?;
        check_measured(measured, n)?;
        let mut probs = vec![0.0; 1 << measured.len()];
        for i in 0..self.dim() {
            probs[extract_bits(i, measured)] += self.entries[(i, i)].re;
        }
        Ok(Distribution::from_probabilities(probs))
    }

    pub fn position_distribution(&self, k: usize) -> Result<Distribution> {
        if self.dim() % k != 0 {
            return Err(Error::DimensionMismatch(format!(
                "dim {} is not a multiple of cycle length {k}",
                self.dim()
            )));
        }
        let mut probs = vec![0.0; k];
        for i in 0..self.dim() {
            probs[i % k] += self.entries[(i, i)].re;
        }
        Ok(Distribution::from_probabilities(probs))
    }
}

fn qubit_count(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "dim {dim} is not a power of two; qubit-indexed measurement undefined"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn check_measured(measured: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &q in measured {
        if q >= n {
            return Err(Error::InvalidQubit(format!(
                "measured qubit {q} out of range for {n} qubits"
            )));
        }
        if seen[q] {
            return Err(Error::InvalidQubit(format!("duplicate measured qubit {q}")));
        }
        seen[q] = true;
    }
    Ok(())
}

fn extract_bits(index: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (pos, &q)| acc | (((index >> q) & 1) << pos))
}
