//! Dense complex linear algebra for spaces of at most sixteen dimensions.
//!
//! Basis ordering: particle A is the most significant qubit and `|up>` is
//! index 0, so `|up up down>` is index 1.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

/// Largest supported Hilbert-space dimension (four spin-1/2 particles).
pub const MAX_DIM: usize = 16;
/// Tolerance for exact algebraic identities.
pub const STRUCTURAL_TOL: f64 = 1e-14;
/// Tolerance for state-level checks (norms, eigen-residuals, probabilities).
pub const STATE_TOL: f64 = 1e-12;
/// Outcomes below this probability cannot be collapsed onto.
pub const MIN_COLLAPSE_PROBABILITY: f64 = 1e-15;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow { dim, max: MAX_DIM });
    }
    if !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(())
}

fn all_finite(values: &[Complex64]) -> bool {
    values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Accepts amplitudes that are already normalized to within [`STATE_TOL`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        if !all_finite(&amplitudes) {
            return Err(Error::NonFinite);
        }
        let norm = l2_norm(&amplitudes);
        if (norm * norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        if !all_finite(&amplitudes) {
            return Err(Error::NonFinite);
        }
        let norm = l2_norm(&amplitudes);
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis state `index` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::DimensionMismatch { left: index, right: dim });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Tensor product `self (x) other`.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        check_dim(self.dim() * other.dim())?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector { amplitudes })
    }

    /// The projector `|self><self|`.
    pub fn projector(&self) -> DenseOperator {
        DenseOperator::outer(self, self)
    }
}

fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

fn inner(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter().zip(ket).map(|(a, b)| a.conj() * b).sum()
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    entries: Vec<Complex64>,
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseOperator({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl DenseOperator {
    pub fn from_entries(entries: Vec<Complex64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() {
            return Err(Error::NotSquare(entries.len()));
        }
        check_dim(dim)?;
        if !all_finite(&entries) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> Result<Self> {
        Self::from_entries(rows.iter().flatten().copied().collect())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, entries: vec![ZERO; dim * dim] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for k in 0..dim {
            m.entries[k * dim + k] = ONE;
        }
        Ok(m)
    }

    pub fn diag(values: &[Complex64]) -> Result<Self> {
        let mut m = Self::zeros(values.len())?;
        for (k, v) in values.iter().enumerate() {
            m.entries[k * m.dim + k] = *v;
        }
        Ok(m)
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Self {
        let dim = ket.dim();
        assert_eq!(dim, bra.dim(), "outer product of mismatched states");
        let entries = ket
            .amplitudes()
            .iter()
            .flat_map(|k| bra.amplitudes().iter().map(move |b| k * b.conj()))
            .collect();
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self { dim: d, entries }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// Applies the operator to a raw amplitude vector (no renormalization).
    pub fn apply(&self, state: &StateVector) -> Result<Vec<Complex64>> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: state.dim() });
        }
        Ok(self.apply_raw(state.amplitudes()))
    }

    fn apply_raw(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        assert_eq!(self.dim, other.dim, "comparing operators of different dimension");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        l2_norm(&self.entries)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (self * self).max_abs_diff(self) <= tol
    }

    /// Eigenvalues of a Hermitian operator in ascending order.
    ///
    /// `H = A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`,
    /// whose spectrum is that of `H` with every eigenvalue doubled, and
    /// diagonalized by cyclic Jacobi rotations.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let m = 2 * n;
        let mut s = vec![0.0f64; m * m];
        for r in 0..n {
            for c in 0..n {
                let z = self.get(r, c);
                // Symmetrize so round-off in the input cannot stall the sweep.
                let zt = self.get(c, r).conj();
                let (re, im) = (0.5 * (z.re + zt.re), 0.5 * (z.im + zt.im));
                s[r * m + c] = re;
                s[(r + n) * m + (c + n)] = re;
                s[r * m + (c + n)] = -im;
                s[(r + n) * m + c] = im;
            }
        }
        jacobi_symmetric(&mut s, m);
        let mut eig: Vec<f64> = (0..m).map(|k| s[k * m + k]).collect();
        eig.sort_by(f64::total_cmp);
        eig.chunks_exact(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        let gram = &self.adjoint() * self;
        let top = gram.hermitian_eigenvalues().last().copied().unwrap_or(0.0);
        top.max(0.0).sqrt()
    }
}

fn jacobi_symmetric(a: &mut [f64], n: usize) {
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c] * a[r * n + c])
            .sum();
        if off < 1e-30 {
            return;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;

    /// Matrix product. Panics on mismatched dimensions; use the checked
    /// free functions for untrusted input.
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "matrix product of mismatched dimensions");
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * rhs.entries[k * d + c];
                }
            }
        }
        DenseOperator { dim: d, entries }
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "sum of mismatched dimensions");
        DenseOperator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim, rhs.dim, "difference of mismatched dimensions");
        DenseOperator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &DenseOperator {
    type Output = DenseOperator;

    fn neg(self) -> DenseOperator {
        self.scale(-ONE)
    }
}

fn same_dim(a: &DenseOperator, b: &DenseOperator) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { left: a.dim, right: b.dim });
    }
    Ok(())
}

/// Kronecker product; entry `((i,k),(j,l)) = a[i,j] * b[k,l]`.
pub fn kron(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    let dim = a.dim * b.dim;
    check_dim(dim)?;
    let mut entries = vec![ZERO; dim * dim];
    for i in 0..a.dim {
        for j in 0..a.dim {
            let aij = a.get(i, j);
            for k in 0..b.dim {
                for l in 0..b.dim {
                    entries[(i * b.dim + k) * dim + (j * b.dim + l)] = aij * b.get(k, l);
                }
            }
        }
    }
    Ok(DenseOperator { dim, entries })
}

/// `ab - ba`.
pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    same_dim(a, b)?;
    Ok(&(a * b) - &(b * a))
}

/// `ab + ba`.
pub fn anticommutator(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    same_dim(a, b)?;
    Ok(&(a * b) + &(b * a))
}

/// `<state|op|state>`.
pub fn expectation(state: &StateVector, op: &DenseOperator) -> Result<Complex64> {
    let image = op.apply(state)?;
    Ok(inner(state.amplitudes(), &image))
}

/// Rayleigh quotient of `op` at `state` and the residual `|op s - lambda s|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenMatch {
    pub eigenvalue: Complex64,
    pub residual: f64,
}

/// Computes the Rayleigh quotient and its residual whether or not the state
/// is an eigenvector.
pub fn rayleigh(op: &DenseOperator, state: &StateVector) -> Result<EigenMatch> {
    let image = op.apply(state)?;
    let eigenvalue = inner(state.amplitudes(), &image);
    let residual = image
        .iter()
        .zip(state.amplitudes())
        .map(|(w, v)| (w - eigenvalue * v).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(EigenMatch { eigenvalue, residual })
}

/// Returns the eigenvalue when `state` is an eigenvector of `op` to within
/// `tol`, `None` otherwise.
pub fn eigencheck(op: &DenseOperator, state: &StateVector, tol: f64) -> Result<Option<EigenMatch>> {
    let m = rayleigh(op, state)?;
    Ok((m.residual <= tol).then_some(m))
}

fn validate_projectors(dim: usize, projectors: &[DenseOperator]) -> Result<()> {
    if projectors.is_empty() {
        return Err(Error::NotProjectorFamily("empty family".into()));
    }
    let mut total = DenseOperator::zeros(dim)?;
    for (k, p) in projectors.iter().enumerate() {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { left: p.dim(), right: dim });
        }
        let herm = p.hermiticity_residual();
        if herm > STATE_TOL {
            return Err(Error::NotProjectorFamily(format!(
                "element {k} is not Hermitian (residual {herm:e})"
            )));
        }
        let idem = (p * p).max_abs_diff(p);
        if idem > STATE_TOL {
            return Err(Error::NotProjectorFamily(format!(
                "element {k} is not idempotent (residual {idem:e})"
            )));
        }
        total = &total + p;
    }
    let completeness = total.max_abs_diff(&DenseOperator::identity(dim)?);
    if completeness > STATE_TOL {
        return Err(Error::NotProjectorFamily(format!(
            "elements do not sum to the identity (residual {completeness:e})"
        )));
    }
    Ok(())
}

/// Born-rule probabilities `<s|P_k|s>` for a complete projector family.
pub fn born_probabilities(state: &StateVector, projectors: &[DenseOperator]) -> Result<Vec<f64>> {
    validate_projectors(state.dim(), projectors)?;
    projectors
        .iter()
        .map(|p| expectation(state, p).map(|z| z.re))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub outcome_index: usize,
    pub probability: f64,
    pub post_state: StateVector,
}

/// Projective measurement driven by a caller-supplied uniform draw.
///
/// Outcome `k` is the first index whose cumulative probability exceeds
/// `rand01`.
pub fn collapse_measure(
    state: &StateVector,
    projectors: &[DenseOperator],
    rand01: f64,
) -> Result<MeasurementRecord> {
    if !(0.0..1.0).contains(&rand01) {
        return Err(Error::InvalidUniform(rand01));
    }
    let probs = born_probabilities(state, projectors)?;
    let mut cumulative = 0.0;
    let mut chosen = None;
    for (k, p) in probs.iter().enumerate() {
        cumulative += p;
        if rand01 < cumulative {
            chosen = Some(k);
            break;
        }
    }
    // Rounding can leave the total a hair under rand01; fall back to the
    // last outcome carrying weight.
    let outcome_index = chosen
        .or_else(|| probs.iter().rposition(|&p| p > MIN_COLLAPSE_PROBABILITY))
        .unwrap_or(probs.len() - 1);
    let probability = probs[outcome_index];
    if probability < MIN_COLLAPSE_PROBABILITY {
        return Err(Error::NegligibleOutcome { outcome: outcome_index, probability });
    }
    let projected = projectors[outcome_index].apply(state)?;
    let post_state = StateVector::normalized(projected)?;
    Ok(MeasurementRecord { outcome_index, probability, post_state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{identity2, minus_x, plus_x, plus_y, sigma_x, sigma_y, sigma_z, spin_projectors, up};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive_mul(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
        let d = a.dim();
        let mut e = Vec::with_capacity(d * d);
        for r in 0..d {
            for col in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += a.get(r, k) * b.get(k, col);
                }
                e.push(acc);
            }
        }
        DenseOperator::from_entries(e).unwrap()
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = identity2();
        assert_eq!(kron(&i2, &i2).unwrap(), DenseOperator::identity(4).unwrap());
        let zz = kron(&sigma_z(), &sigma_z()).unwrap();
        let expected = DenseOperator::diag(&[ONE, -ONE, -ONE, ONE]).unwrap();
        assert_eq!(zz, expected);
    }

    #[test]
    fn kron_rejects_overflow() {
        let i4 = DenseOperator::identity(4).unwrap();
        let i8 = DenseOperator::identity(8).unwrap();
        assert!(matches!(kron(&i4, &i8), Err(Error::DimensionOverflow { dim: 32, .. })));
        assert!(kron(&i4, &i4).is_ok());
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(DenseOperator::zeros(3), Err(Error::NotPowerOfTwo(3))));
        assert!(matches!(DenseOperator::from_entries(vec![ONE; 3]), Err(Error::NotSquare(3))));
        assert!(matches!(
            DenseOperator::from_entries(vec![c(f64::NAN, 0.0); 4]),
            Err(Error::NonFinite)
        ));
        assert!(matches!(StateVector::new(vec![ONE, ONE]), Err(Error::NotNormalized { .. })));
        assert!(matches!(StateVector::normalized(vec![ZERO, ZERO]), Err(Error::ZeroVector)));
    }

    #[test]
    fn commutator_examples() {
        let x = sigma_x();
        let y = sigma_y();
        assert_eq!(commutator(&x, &x).unwrap().max_abs(), 0.0);
        // Oracle: explicit 2x2 products, independent of the Mul impl.
        let oracle = &naive_mul(&x, &y) - &naive_mul(&y, &x);
        let got = commutator(&x, &y).unwrap();
        assert!(got.max_abs_diff(&oracle) <= STRUCTURAL_TOL);
        assert!(got.max_abs_diff(&sigma_z().scale(c(0.0, 2.0))) <= STRUCTURAL_TOL);
        let four = DenseOperator::identity(4).unwrap();
        assert!(matches!(commutator(&x, &four), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn anticommutator_examples() {
        let x = sigma_x();
        let y = sigma_y();
        assert!(anticommutator(&x, &y).unwrap().max_abs() <= STRUCTURAL_TOL);
        let two_i = DenseOperator::identity(2).unwrap().scale(c(2.0, 0.0));
        assert!(anticommutator(&x, &x).unwrap().max_abs_diff(&two_i) <= STRUCTURAL_TOL);
        let a = DenseOperator::from_rows([[c(1.0, 2.0), c(0.5, 0.0)], [c(-3.0, 1.0), c(0.0, -1.0)]])
            .unwrap();
        let got = anticommutator(&identity2(), &a).unwrap();
        assert!(got.max_abs_diff(&a.scale(c(2.0, 0.0))) <= STRUCTURAL_TOL);
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (sigma_x(), sigma_y(), sigma_z());
        let id = identity2();
        for s in [&x, &y, &z] {
            assert!((s * s).max_abs_diff(&id) <= STRUCTURAL_TOL);
        }
        let i = c(0.0, 1.0);
        assert!((&x * &y).max_abs_diff(&z.scale(i)) <= STRUCTURAL_TOL);
        assert!((&y * &z).max_abs_diff(&x.scale(i)) <= STRUCTURAL_TOL);
        assert!((&z * &x).max_abs_diff(&y.scale(i)) <= STRUCTURAL_TOL);
    }

    #[test]
    fn eigencheck_examples() {
        let m = eigencheck(&sigma_z(), &up(), STATE_TOL).unwrap().unwrap();
        assert!((m.eigenvalue - ONE).norm() <= STATE_TOL);
        // sigma_x up = down, so up is not an eigenstate: residual is 1.
        let r = rayleigh(&sigma_x(), &up()).unwrap();
        assert!((r.residual - 1.0).abs() < 1e-15);
        assert!(eigencheck(&sigma_x(), &up(), STATE_TOL).unwrap().is_none());
    }

    #[test]
    fn expectation_of_sigma_x_on_up_vanishes() {
        let e = expectation(&up(), &sigma_x()).unwrap();
        assert!(e.norm() <= STATE_TOL);
    }

    #[test]
    fn born_examples() {
        let (pu, pd) = spin_projectors(&sigma_z()).unwrap();
        let p = born_probabilities(&up(), &[pu.clone(), pd.clone()]).unwrap();
        assert!((p[0] - 1.0).abs() <= STATE_TOL && p[1].abs() <= STATE_TOL);
        let p = born_probabilities(&plus_x(), &[pu.clone(), pd.clone()]).unwrap();
        assert!((p[0] - 0.5).abs() <= STATE_TOL && (p[1] - 0.5).abs() <= STATE_TOL);
    }

    #[test]
    fn born_rejects_non_projectors() {
        let (pu, _) = spin_projectors(&sigma_z()).unwrap();
        let err = born_probabilities(&up(), std::slice::from_ref(&pu)).unwrap_err();
        assert!(err.to_string().contains("sum to the identity"), "{err}");
        let err = born_probabilities(&up(), &[sigma_x(), pu]).unwrap_err();
        assert!(err.to_string().contains("idempotent"), "{err}");
        let skew = DenseOperator::from_rows([[ZERO, ONE], [ZERO, ZERO]]).unwrap();
        let err = born_probabilities(&up(), &[skew]).unwrap_err();
        assert!(err.to_string().contains("Hermitian"), "{err}");
    }

    #[test]
    fn collapse_examples() {
        let z = spin_projectors(&sigma_z()).unwrap();
        let zfam = [z.0, z.1];
        let rec = collapse_measure(&up(), &zfam, 0.7).unwrap();
        assert_eq!(rec.outcome_index, 0);
        assert_eq!(rec.post_state, up());

        let rec = collapse_measure(&plus_x(), &zfam, 0.3).unwrap();
        assert_eq!(rec.outcome_index, 0);
        assert!((rec.probability - 0.5).abs() <= STATE_TOL);
        assert!((rec.post_state.inner(&up()).unwrap().norm() - 1.0).abs() <= STATE_TOL);

        let x = spin_projectors(&sigma_x()).unwrap();
        let rec = collapse_measure(&plus_y(), &[x.0, x.1], 0.9).unwrap();
        assert_eq!(rec.outcome_index, 1);
        assert!((rec.probability - 0.5).abs() <= STATE_TOL);
        assert!((rec.post_state.inner(&minus_x()).unwrap().norm() - 1.0).abs() <= STATE_TOL);
    }

    #[test]
    fn collapse_rejects_bad_draws() {
        let z = spin_projectors(&sigma_z()).unwrap();
        let zfam = [z.0, z.1];
        assert!(matches!(collapse_measure(&up(), &zfam, 1.0), Err(Error::InvalidUniform(_))));
        assert!(matches!(collapse_measure(&up(), &zfam, -0.1), Err(Error::InvalidUniform(_))));
        // Reversed family: the zero-probability outcome comes first, but a
        // draw of 0 still lands on the weighted one.
        let rev = [zfam[1].clone(), zfam[0].clone()];
        let rec = collapse_measure(&up(), &rev, 0.0).unwrap();
        assert_eq!(rec.outcome_index, 1);
    }

    #[test]
    fn spectral_norm_and_eigenvalues() {
        let ev = sigma_y().hermitian_eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-13 && (ev[1] - 1.0).abs() < 1e-13);
        let d = DenseOperator::diag(&[c(3.0, 0.0), c(-5.0, 0.0), ONE, ZERO]).unwrap();
        assert!((d.spectral_norm() - 5.0).abs() < 1e-12);
        let comm = commutator(&sigma_x(), &sigma_y()).unwrap();
        assert!((comm.spectral_norm() - 2.0).abs() < 1e-12);
    }

    fn arb_op(dim: usize) -> impl Strategy<Value = DenseOperator> {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), dim * dim).prop_map(|v| {
            DenseOperator::from_entries(v.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap()
        })
    }

    fn arb_state(dim: usize) -> impl Strategy<Value = StateVector> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
            .prop_filter_map("non-zero", |v| {
                StateVector::normalized(v.into_iter().map(|(r, i)| c(r, i)).collect()).ok()
            })
    }

    proptest! {
        #[test]
        fn kron_is_associative(a in arb_op(2), b in arb_op(2), cc in arb_op(2)) {
            let left = kron(&kron(&a, &b).unwrap(), &cc).unwrap();
            let right = kron(&a, &kron(&b, &cc).unwrap()).unwrap();
            prop_assert!(left.max_abs_diff(&right) <= STRUCTURAL_TOL);
        }

        #[test]
        fn hermitian_expectation_is_real(a in arb_op(4), s in arb_state(4)) {
            let h = &a + &a.adjoint();
            let e = expectation(&s, &h).unwrap();
            prop_assert!(e.im.abs() <= STATE_TOL);
        }

        #[test]
        fn remeasurement_is_idempotent(s in arb_state(2), r1 in 0.0f64..1.0, r2 in 0.0f64..1.0) {
            let (p, q) = spin_projectors(&sigma_x()).unwrap();
            let fam = [p, q];
            let first = collapse_measure(&s, &fam, r1);
            prop_assume!(first.is_ok());
            let first = first.unwrap();
            let second = collapse_measure(&first.post_state, &fam, r2).unwrap();
            prop_assert_eq!(second.outcome_index, first.outcome_index);
            prop_assert!((second.probability - 1.0).abs() <= STATE_TOL);
        }

        #[test]
        fn jacobi_spectrum_matches_trace_and_square_trace(a in arb_op(4)) {
            let h = &a + &a.adjoint();
            let ev = h.hermitian_eigenvalues();
            let tr: f64 = ev.iter().sum();
            let tr2: f64 = ev.iter().map(|x| x * x).sum();
            prop_assert!((tr - h.trace().re).abs() <= 1e-10);
            prop_assert!((tr2 - (&h * &h).trace().re).abs() <= 1e-9);
        }
    }
}
