//! Dense complex matrices and the handful of operations the walk engine and
//! circuit simulator need: products, Kronecker products, adjoints, powers,
//! and embedding of small unitaries into larger qubit registers.
//!
//! Qubit 0 is the least significant bit of a basis index throughout the
//! crate. A coin⊗position state on a K-cycle indexes as `coin * K + position`
//! (coin most significant).

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const UNITARITY_TOL: f64 = 1e-10;

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Real-valued convenience constructor, mostly for tests and permutation
    /// matrices.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_rows(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| e * factor).collect(),
        }
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrix addition".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    /// Largest entrywise absolute difference between two equally sized matrices.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |U†U − I|.
    pub fn unitarity_deviation(&self) -> f64 {
        let product = self.dagger().matmul(self).expect("square product");
        product.max_abs_diff(&ComplexMatrix::identity(self.cols))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.rows == self.cols && self.unitarity_deviation() <= tol
    }

    /// Matrix power by repeated multiplication. Walk periods stay small, so
    /// no exponentiation-by-squaring is needed.
    pub fn pow(&self, exponent: usize) -> Result<ComplexMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("pow of non-square matrix".into()));
        }
        let mut out = ComplexMatrix::identity(self.rows);
        for _ in 0..exponent {
            out = out.matmul(self)?;
        }
        Ok(out)
    }

    /// Eigenvalues via complex Schur decomposition. The QR iteration can
    /// stall on permutation-like matrices, so on a failed first attempt the
    /// matrix is conjugated by a fixed random unitary (which preserves the
    /// spectrum but breaks the stalling symmetry) and retried.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        use rand::{Rng, SeedableRng};
        let n = self.rows;
        let m = nalgebra::DMatrix::from_fn(n, n, |r, c| self[(r, c)]);
        if let Some(schur) = m.clone().try_schur(1e-13, 50 * n.max(4)) {
            let t = schur.unpack().1;
            return (0..n).map(|i| t[(i, i)]).collect();
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x51eb851f);
        let g = nalgebra::DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let q = g.qr().q();
        let t = (&q * m * q.adjoint()).schur().unpack().1;
        (0..n).map(|i| t[(i, i)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[r * self.cols + c]
    }
}

/// Kronecker product A⊗B.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ar in 0..a.rows() {
        for ac in 0..a.cols() {
            let v = a[(ar, ac)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for br in 0..b.rows() {
                for bc in 0..b.cols() {
                    out[(ar * b.rows() + br, ac * b.cols() + bc)] = v * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Embed a unitary acting on `targets` into an `n_total`-qubit space,
/// identity on all other qubits. `targets[0]` is the least significant bit
/// of the embedded unitary's own index space.
pub fn embed_unitary(
    u: &ComplexMatrix,
    targets: &[usize],
    n_total: usize,
) -> Result<ComplexMatrix> {
    let k = targets.len();
    if u.rows() != (1 << k) || u.cols() != (1 << k) {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{} but {} targets need {}x{}",
            u.rows(),
            u.cols(),
            k,
            1 << k,
            1 << k
        )));
    }
    let mut seen = vec![false; n_total];
    for &t in targets {
        if t >= n_total {
            return Err(Error::InvalidQubit(format!(
                "target {} out of range for {} qubits",
                t, n_total
            )));
        }
        if seen[t] {
            return Err(Error::InvalidQubit(format!("duplicate target {}", t)));
        }
        seen[t] = true;
    }

    let dim = 1usize << n_total;
    let mut out = ComplexMatrix::zeros(dim, dim);
    // Iterate over the non-target bits; within each slice the unitary acts
    // on the packed target-bit subindex.
    for row_sub in 0..(1 << k) {
        for col_sub in 0..(1 << k) {
            let v = u[(row_sub, col_sub)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for rest in 0..(dim >> k) {
                // Scatter `rest` into the non-target bit positions.
                let mut base = 0usize;
                let mut rest_bits = rest;
                for q in 0..n_total {
                    if !seen[q] {
                        base |= (rest_bits & 1) << q;
                        rest_bits >>= 1;
                    }
                }
                let mut row = base;
                let mut col = base;
                for (i, &t) in targets.iter().enumerate() {
                    row |= ((row_sub >> i) & 1) << t;
                    col |= ((col_sub >> i) & 1) << t;
                }
                out[(row, col)] = v;
            }
        }
    }
    Ok(out)
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn kron_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_dimension_law() {
        let a = ComplexMatrix::zeros(2, 2);
        let b = ComplexMatrix::zeros(4, 4);
        let p = kron(&a, &b);
        assert_eq!((p.rows(), p.cols()), (8, 8));
    }

    #[test]
    fn kron_x_with_identity_maps_basis_zero_to_two() {
        // X ⊗ I₂ on basis index 0 of the dim-4 product space lands on index 2.
        let p = kron(&pauli_x(), &ComplexMatrix::identity(2));
        for row in 0..4 {
            let expected = if row == 2 { 1.0 } else { 0.0 };
            assert!((p[(row, 0)].re - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn kron_mixed_product_rule() {
        let a = pauli_x();
        let b = ComplexMatrix::from_fn(2, 2, |r, c| c64((r + 2 * c) as f64, 0.3));
        let c = ComplexMatrix::from_fn(2, 2, |r, c| c64(0.5, (r * c) as f64));
        let d = pauli_x();
        let lhs = kron(&a, &b).matmul(&kron(&c, &d)).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap());
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn embed_x_on_qubit_zero_is_i_kron_x() {
        let embedded = embed_unitary(&pauli_x(), &[0], 2).unwrap();
        let expected = kron(&ComplexMatrix::identity(2), &pauli_x());
        assert!(embedded.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn embed_identity_is_identity() {
        let embedded = embed_unitary(&ComplexMatrix::identity(2), &[1], 3).unwrap();
        assert!(embedded.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-15);
    }

    #[test]
    fn embed_rejects_duplicate_targets() {
        let u = ComplexMatrix::identity(4);
        assert!(embed_unitary(&u, &[0, 0], 2).is_err());
    }

    #[test]
    fn embed_rejects_out_of_range_target() {
        assert!(embed_unitary(&pauli_x(), &[3], 2).is_err());
    }

    #[test]
    fn unitarity_deviation_of_pauli_is_zero() {
        assert!(pauli_x().unitarity_deviation() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_pauli_x() {
        let mut eigs: Vec<f64> = pauli_x().eigenvalues().iter().map(|e| e.re).collect();
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] + 1.0).abs() < 1e-10);
        assert!((eigs[1] - 1.0).abs() < 1e-10);
    }
}
