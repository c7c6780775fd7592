//! Fixed-basis operator algebra.
//!
//! Every operator in this crate lives on a truncated orthonormal basis
//! `{φ_1, ..., φ_L}`. Model operators (long-memory operator, short-memory
//! symbol, weights, normalizers) are simultaneously diagonal in that basis and
//! are represented by [`DiagonalOperator`]. Empirical operators such as the
//! periodogram are dense Hermitian matrices, represented by [`HermitianFrame`].

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::FrequencyGrid;

/// Absolute tolerance on `A - A^H` for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex matrix, used for products that need not be Hermitian.
pub type ComplexMatrix = DMatrix<Complex64>;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("basis size must be at least 1")]
    EmptyBasis,
    #[error("basis has {expected} elements but {found} labels were given")]
    LabelCount { expected: usize, found: usize },
    #[error("expected {expected} values for the basis, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operands live on different bases")]
    BasisMismatch,
    #[error("matrix is not Hermitian: max |A - A^H| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("positive operator has non-positive value {value} at index {index}")]
    NotPositive { index: usize, value: f64 },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("{frames} frames supplied for a grid with {nodes} nodes")]
    GridLength { frames: usize, nodes: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Truncated orthonormal basis `{φ_l}`, `l = 1..=L`.
///
/// The spectral family is the point measure that assigns the projection
/// `φ_l ⊗ φ_l` to index `l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    size: usize,
    labels: Option<Vec<String>>,
}

impl BasisSpec {
    pub fn new(size: usize) -> Result<Arc<Self>, OperatorError> {
        if size == 0 {
            return Err(OperatorError::EmptyBasis);
        }
        Ok(Arc::new(Self { size, labels: None }))
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Arc<Self>, OperatorError> {
        if labels.is_empty() {
            return Err(OperatorError::EmptyBasis);
        }
        Ok(Arc::new(Self {
            size: labels.len(),
            labels: Some(labels),
        }))
    }

    /// Truncation level `L`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

fn same_basis(a: &Arc<BasisSpec>, b: &Arc<BasisSpec>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Operator diagonal in the fixed basis, stored by its symbol values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    basis: Arc<BasisSpec>,
    values: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(basis: Arc<BasisSpec>, values: Vec<f64>) -> Result<Self, OperatorError> {
        if values.len() != basis.size() {
            return Err(OperatorError::DimensionMismatch {
                expected: basis.size(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(OperatorError::NonFinite { index });
        }
        Ok(Self { basis, values })
    }

    /// Like [`DiagonalOperator::new`] but additionally requires every value to be `> 0`.
    pub fn positive(basis: Arc<BasisSpec>, values: Vec<f64>) -> Result<Self, OperatorError> {
        let op = Self::new(basis, values)?;
        if let Some((index, &value)) = op.values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(OperatorError::NotPositive { index, value });
        }
        Ok(op)
    }

    pub fn identity(basis: Arc<BasisSpec>) -> Self {
        let values = vec![1.0; basis.size()];
        Self { basis, values }
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Embeds the operator as a dense Hermitian frame.
    pub fn to_frame(&self) -> HermitianFrame {
        let n = self.values.len();
        let entries = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(self.values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        HermitianFrame {
            basis: self.basis.clone(),
            entries,
        }
    }

    /// Writes `index,value` rows (1-based index).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), OperatorError> {
        writeln!(out, "index,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{:e}", i + 1, v)?;
        }
        Ok(())
    }
}

/// Dense `L × L` complex Hermitian matrix at a single frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianFrame {
    basis: Arc<BasisSpec>,
    entries: ComplexMatrix,
}

impl HermitianFrame {
    /// Validates that `entries` is square, matches the basis and is Hermitian
    /// to [`HERMITIAN_TOL`]. Nothing is symmetrized.
    pub fn new(basis: Arc<BasisSpec>, entries: ComplexMatrix) -> Result<Self, OperatorError> {
        let n = basis.size();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(OperatorError::DimensionMismatch {
                expected: n,
                found: entries.nrows().max(entries.ncols()),
            });
        }
        if let Some(index) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OperatorError::NonFinite { index });
        }
        let deviation = hermitian_deviation(&entries);
        if deviation > HERMITIAN_TOL {
            return Err(OperatorError::NotHermitian { deviation });
        }
        Ok(Self { basis, entries })
    }

    pub fn zeros(basis: Arc<BasisSpec>) -> Self {
        let n = basis.size();
        Self {
            basis,
            entries: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn identity(basis: Arc<BasisSpec>) -> Self {
        let n = basis.size();
        Self {
            basis,
            entries: ComplexMatrix::identity(n, n),
        }
    }

    /// `v ⊗ v̄`, i.e. the matrix with entries `v_i conj(v_j)`.
    pub fn rank_one(basis: Arc<BasisSpec>, v: &[Complex64]) -> Result<Self, OperatorError> {
        let n = basis.size();
        if v.len() != n {
            return Err(OperatorError::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        let mut entries = ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        // the diagonal of an outer product is real; drop rounding residue
        for i in 0..n {
            entries[(i, i)].im = 0.0;
        }
        Ok(Self { basis, entries })
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.basis.size()
    }

    /// Real parts of the diagonal entries.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            basis: self.basis.clone(),
            entries: self.entries.scale(c),
        }
    }

    /// Writes `row,col,re,im` rows (1-based indices).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), OperatorError> {
        writeln!(out, "row,col,re,im")?;
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                let z = self.entries[(i, j)];
                writeln!(out, "{},{},{:e},{:e}", i + 1, j + 1, z.re, z.im)?;
            }
        }
        Ok(())
    }
}

fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Trace (nuclear) norm: the sum of singular values.
pub fn trace_norm(f: &HermitianFrame) -> f64 {
    f.entries.clone().svd(false, false).singular_values.iter().sum()
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(f: &HermitianFrame) -> f64 {
    f.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Uniform (spectral) norm of a frame: the largest singular value.
pub fn op_norm(f: &HermitianFrame) -> f64 {
    f.entries
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |m, s| m.max(*s))
}

/// Uniform norm of a diagonal operator: `max_l |values[l]|`.
pub fn op_norm_diag(d: &DiagonalOperator) -> f64 {
    d.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Matrix product `f · diag(d)`.
///
/// The product of a Hermitian and a diagonal operator is in general not
/// Hermitian, so a plain [`ComplexMatrix`] is returned. Downstream code only
/// consumes its diagonal.
pub fn compose(f: &HermitianFrame, d: &DiagonalOperator) -> Result<ComplexMatrix, OperatorError> {
    if !same_basis(&f.basis, &d.basis) {
        return Err(OperatorError::BasisMismatch);
    }
    let mut out = f.entries.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= Complex64::new(d.values[j], 0.0);
    }
    Ok(out)
}

/// Quadrature sum `Σ_j weights[j] · frames[j]`.
pub fn integrate_frames(frames: &[HermitianFrame], grid: &FrequencyGrid) -> Result<HermitianFrame, OperatorError> {
    if frames.len() != grid.len() {
        return Err(OperatorError::GridLength {
            frames: frames.len(),
            nodes: grid.len(),
        });
    }
    let first = frames.first().ok_or(OperatorError::GridLength {
        frames: 0,
        nodes: grid.len(),
    })?;
    let basis = first.basis.clone();
    let n = basis.size();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (frame, &w) in frames.iter().zip(grid.weights()) {
        if !same_basis(&frame.basis, &basis) {
            return Err(OperatorError::BasisMismatch);
        }
        acc += frame.entries.scale(w);
    }
    Ok(HermitianFrame { basis, entries: acc })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_norms() {
        let b = BasisSpec::new(3).unwrap();
        let id = HermitianFrame::identity(b);
        assert!((trace_norm(&id) - 3.0).abs() < 1e-12);
        assert!((hs_norm(&id) - 3f64.sqrt()).abs() < 1e-12);
        assert!((op_norm(&id) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_rank_one_has_unit_trace_norm() {
        let b = BasisSpec::new(3).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let v = [c(s, 0.0), c(0.0, s), c(-s * 0.6, s * 0.8)];
        let f = HermitianFrame::rank_one(b, &v).unwrap();
        assert!((trace_norm(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_frame_has_zero_hs_norm() {
        let b = BasisSpec::new(4).unwrap();
        assert_eq!(hs_norm(&HermitianFrame::zeros(b)), 0.0);
    }

    #[test]
    fn diagonal_op_norm() {
        let b = BasisSpec::new(3).unwrap();
        let d = DiagonalOperator::new(b.clone(), vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(op_norm_diag(&d), 1.0);
        let d = DiagonalOperator::new(b, vec![0.2, -3.5, 1.0]).unwrap();
        assert_eq!(op_norm_diag(&d), 3.5);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let b = BasisSpec::new(2).unwrap();
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.1), c(0.5, 0.1), c(2.0, 0.0)]);
        assert!(matches!(
            HermitianFrame::new(b, m),
            Err(OperatorError::NotHermitian { .. })
        ));
    }

    #[test]
    fn positive_flag_is_checked() {
        let b = BasisSpec::new(2).unwrap();
        assert!(DiagonalOperator::positive(b.clone(), vec![1.0, 0.0]).is_err());
        assert!(DiagonalOperator::positive(b.clone(), vec![1.0, 2.0]).is_ok());
        assert!(DiagonalOperator::new(b, vec![1.0]).is_err());
    }

    #[test]
    fn compose_with_identities() {
        let b = BasisSpec::new(3).unwrap();
        let d = DiagonalOperator::new(b.clone(), vec![0.5, -1.0, 2.0]).unwrap();
        let out = compose(&HermitianFrame::identity(b.clone()), &d).unwrap();
        assert_eq!(out, d.to_frame().entries().clone());

        let m = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(1.0, 1.0),
                c(0.0, -2.0),
                c(1.0, -1.0),
                c(3.0, 0.0),
                c(0.5, 0.0),
                c(0.0, 2.0),
                c(0.5, 0.0),
                c(1.0, 0.0),
            ],
        );
        let f = HermitianFrame::new(b.clone(), m.clone()).unwrap();
        assert_eq!(compose(&f, &DiagonalOperator::identity(b)).unwrap(), m);
    }

    #[test]
    fn compose_rejects_other_basis() {
        let f = HermitianFrame::identity(BasisSpec::new(2).unwrap());
        let d = DiagonalOperator::identity(BasisSpec::new(3).unwrap());
        assert!(matches!(compose(&f, &d), Err(OperatorError::BasisMismatch)));
    }

    #[test]
    fn integrate_checks_length() {
        let b = BasisSpec::new(2).unwrap();
        let grid = FrequencyGrid::fourier(8).unwrap();
        let frames = vec![HermitianFrame::zeros(b); 3];
        assert!(matches!(
            integrate_frames(&frames, &grid),
            Err(OperatorError::GridLength { .. })
        ));
    }

    #[test]
    fn integrate_zero_and_constant_frames() {
        let b = BasisSpec::new(2).unwrap();
        let t = 16;
        let grid = FrequencyGrid::fourier(t).unwrap();
        let zeros = vec![HermitianFrame::zeros(b.clone()); t - 1];
        assert_eq!(hs_norm(&integrate_frames(&zeros, &grid).unwrap()), 0.0);

        let cst = HermitianFrame::new(
            b.clone(),
            ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(2.0, 0.0)]),
        )
        .unwrap();
        let frames = vec![cst.clone(); t - 1];
        let total = integrate_frames(&frames, &grid).unwrap();
        let expected = cst.scaled(2.0 * std::f64::consts::PI * (t as f64 - 1.0) / t as f64);
        assert!((total.entries() - expected.entries()).norm() < 1e-12);
    }

    #[test]
    fn integrate_sin_squared_identity() {
        let b = BasisSpec::new(2).unwrap();
        let grid = FrequencyGrid::fourier(64).unwrap();
        let frames: Vec<_> = grid
            .nodes()
            .iter()
            .map(|w| HermitianFrame::identity(b.clone()).scaled(w.sin().powi(2)))
            .collect();
        let total = integrate_frames(&frames, &grid).unwrap();
        for v in total.diagonal() {
            assert!((v - std::f64::consts::PI).abs() < 1e-3);
        }
    }

    #[test]
    fn csv_layouts() {
        let b = BasisSpec::new(2).unwrap();
        let mut buf = Vec::new();
        HermitianFrame::identity(b.clone()).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("row,col,re,im\n1,1,1e0,0e0"));

        let mut buf = Vec::new();
        DiagonalOperator::new(b, vec![0.5, 2.0])
            .unwrap()
            .write_csv(&mut buf)
            .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,value\n1,5e-1\n2,2e0\n");
    }
}
