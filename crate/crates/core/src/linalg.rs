//! Dense complex linear algebra.
//!
//! [`Operator`] is a square complex matrix stored row-major. Kronecker
//! products follow the usual ordering where the first factor is the most
//! significant subsystem, so qubit 0 is the leftmost bit of a basis index.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, SggdError};

pub type C64 = Complex64;

/// Tolerance for structural checks (unitarity, hermiticity).
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Eigenphases closer than this are treated as one eigenspace.
const PHASE_CLUSTER_TOL: f64 = 1e-8;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// A dense `dim x dim` complex matrix.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{})", self.dim, self.dim)?;
        if self.dim <= 8 {
            for i in 0..self.dim {
                let row: Vec<String> = self
                    .row(i)
                    .iter()
                    .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                    .collect();
                writeln!(f, "  [{}]", row.join(", "))?;
            }
        }
        Ok(())
    }
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "operator dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.data[i * dim + i] = ONE;
        }
        op
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                op.data[i * dim + j] = f(i, j);
            }
        }
        op
    }

    /// Builds an operator from row-major entries. Fails unless the entry
    /// count is a positive perfect square.
    pub fn from_vec(data: Vec<C64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != data.len() {
            return Err(SggdError::InvalidArgument(format!(
                "{} entries do not form a square matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| {
            assert_eq!(rows[i].len(), dim, "ragged rows");
            C64::new(rows[i][j], 0.0)
        })
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut op = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            op.data[i * entries.len() + i] = z;
        }
        op
    }

    /// Permutation matrix sending basis state `|j>` to `|perm[j]>`.
    pub fn from_permutation(perm: &[usize]) -> Self {
        let mut op = Self::zeros(perm.len());
        for (j, &i) in perm.iter().enumerate() {
            op.data[i * perm.len() + j] = ONE;
        }
        op
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len());
        Self::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add");
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in sub");
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, factor: C64) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
    }

    /// Matrix product `self * other`. Panics on dimension mismatch.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matmul");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(self.matmul(other))
    }

    /// `u† · self · u`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.adjoint().matmul(&self.matmul(u))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch in apply");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch in comparison");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm_sqr());
            }
        }
        worst.sqrt()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn require_unitary(&self) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect > STRUCTURE_TOL {
            return Err(SggdError::NotUnitary(defect));
        }
        Ok(())
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > STRUCTURE_TOL {
            return Err(SggdError::NotHermitian(defect));
        }
        Ok(())
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(SggdError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (da, db) = (a.dim, b.dim);
    let n = da * db;
    let mut out = Operator::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let aij = a.get(i, j);
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.data[(i * db + k) * n + j * db + l] = aij * b.get(k, l);
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of operators, first factor most significant.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Operator>) -> Operator {
    factors.into_iter().fold(Operator::identity(1), |acc, f| kron(&acc, f))
}

/// `a^{⊗k}`; `k = 0` gives the 1x1 identity.
pub fn kron_power(a: &Operator, k: usize) -> Operator {
    (0..k).fold(Operator::identity(1), |acc, _| kron(&acc, a))
}

/// Hilbert-Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    check_dims(a.dim, b.dim)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

/// Squared Hilbert-Schmidt norm `tr(a† a)`.
pub fn hs_norm_sq(a: &Operator) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum()
}

/// One eigenspace of a unitary: eigenvalue `exp(i * phase)` and the
/// orthogonal projector onto its eigenspace.
#[derive(Clone, Debug)]
pub struct SpectralComponent {
    pub phase: f64,
    pub projector: Operator,
}

/// Spectral decomposition `v = Σ exp(i φ_k) P_k` of a unitary.
///
/// Phases lie on the principal branch `(-π, π]`; eigenvalues within
/// `1e-8` in phase are merged into one eigenspace, and components come
/// out sorted by ascending phase.
pub fn spectral_decomposition(v: &Operator) -> Result<Vec<SpectralComponent>> {
    v.require_unitary()?;
    let n = v.dim;
    let (q, t) = Schur::new(v.to_nalgebra()).unpack();

    let mut eig: Vec<(f64, usize)> = (0..n).map(|k| (principal_phase(t[(k, k)]), k)).collect();
    eig.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut components: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for (phase, k) in eig {
        match components.last_mut() {
            Some((phases, cols)) if (phase - phases[0]).abs() <= PHASE_CLUSTER_TOL => {
                phases.push(phase);
                cols.push(k);
            }
            _ => components.push((vec![phase], vec![k])),
        }
    }
    // The cluster at +π may have a member that wrapped to just above -π.
    if components.len() > 1 {
        let first = components[0].0[0];
        let last = components[components.len() - 1].0[0];
        if first + 2.0 * PI - last <= PHASE_CLUSTER_TOL {
            let (_, cols) = components.remove(0);
            components.last_mut().unwrap().1.extend(cols);
        }
    }

    Ok(components
        .into_iter()
        .map(|(phases, cols)| {
            let phase = phases.iter().sum::<f64>() / phases.len() as f64;
            let mut projector = Operator::zeros(n);
            for &c in &cols {
                let col: Vec<C64> = (0..n).map(|i| q[(i, c)]).collect();
                projector.add_assign_scaled(&Operator::outer(&col, &col), ONE);
            }
            SpectralComponent { phase, projector }
        })
        .collect())
}

fn principal_phase(z: C64) -> f64 {
    let phase = z.arg();
    if phase <= -PI + PHASE_CLUSTER_TOL {
        PI
    } else {
        phase
    }
}

/// Principal fractional power `v^s` of a unitary.
pub fn unitary_fractional_power(v: &Operator, s: f64) -> Result<Operator> {
    let mut out = Operator::zeros(v.dim);
    for comp in spectral_decomposition(v)? {
        out.add_assign_scaled(&comp.projector, C64::from_polar(1.0, s * comp.phase));
    }
    Ok(out)
}

/// Eigenvalues of a Hermitian operator in ascending order.
pub fn hermitian_eigenvalues(a: &Operator) -> Result<Vec<f64>> {
    a.require_hermitian()?;
    let mut vals: Vec<f64> = SymmetricEigen::new(a.to_nalgebra())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Eigen-decomposition of a Hermitian operator: ascending eigenvalues and
/// the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigh(a: &Operator) -> Result<(Vec<f64>, Operator)> {
    a.require_hermitian()?;
    let eig = SymmetricEigen::new(a.to_nalgebra());
    let mut order: Vec<usize> = (0..a.dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = Operator::from_fn(a.dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// Standard one- and two-qubit matrices.
pub mod gates {
    use super::{Operator, C64};

    pub fn pauli_x() -> Operator {
        Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn pauli_y() -> Operator {
        Operator::from_fn(2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => C64::new(0.0, 0.0),
        })
    }

    pub fn pauli_z() -> Operator {
        Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    pub fn hadamard() -> Operator {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Operator::from_real_rows(&[&[h, h], &[h, -h]])
    }

    /// CNOT with qubit 0 as control.
    pub fn cnot() -> Operator {
        Operator::from_permutation(&[0, 1, 3, 2])
    }

    pub fn swap() -> Operator {
        Operator::from_permutation(&[0, 2, 1, 3])
    }

    pub fn cz() -> Operator {
        Operator::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
        ])
    }

    /// `exp(-i a σ/2)` for the Pauli axis `σ`.
    pub fn rx(a: f64) -> Operator {
        let (c, s) = ((a / 2.0).cos(), (a / 2.0).sin());
        Operator::from_fn(2, |i, j| if i == j { C64::new(c, 0.0) } else { C64::new(0.0, -s) })
    }

    pub fn ry(a: f64) -> Operator {
        let (c, s) = ((a / 2.0).cos(), (a / 2.0).sin());
        Operator::from_real_rows(&[&[c, -s], &[s, c]])
    }

    pub fn rz(a: f64) -> Operator {
        Operator::diagonal(&[C64::from_polar(1.0, -a / 2.0), C64::from_polar(1.0, a / 2.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_op(rng: &mut impl Rng, dim: usize) -> Operator {
        Operator::from_fn(dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn kron_examples() {
        let i2 = Operator::identity(2);
        assert_eq!(kron(&i2, &i2), Operator::identity(4));
        let zi = kron(&pauli_z(), &i2);
        let expected = Operator::diagonal(&[ONE, ONE, -ONE, -ONE]);
        assert!(zi.max_abs_diff(&expected) == 0.0);

        // X ⊗ Z by definition: [[0, Z], [Z, 0]].
        let xz = kron(&pauli_x(), &pauli_z());
        let z = pauli_z();
        let brute = Operator::from_fn(4, |i, j| {
            let (bi, bj) = (i / 2, j / 2);
            if bi != bj {
                z.get(i % 2, j % 2)
            } else {
                ZERO
            }
        });
        assert_eq!(xz, brute);
    }

    #[test]
    fn hs_inner_examples() {
        let i4 = Operator::identity(4);
        assert_eq!(hs_inner(&i4, &i4).unwrap(), C64::new(4.0, 0.0));
        assert_eq!(hs_inner(&swap(), &i4).unwrap(), C64::new(2.0, 0.0));
        let zi = kron(&pauli_z(), &Operator::identity(2));
        let xi = kron(&pauli_x(), &Operator::identity(2));
        assert_eq!(hs_inner(&zi, &xi).unwrap(), ZERO);
        assert!(matches!(
            hs_inner(&i4, &Operator::identity(2)),
            Err(SggdError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hs_norm_examples() {
        assert_eq!(hs_norm_sq(&Operator::zeros(4)), 0.0);
        assert_eq!(hs_norm_sq(&Operator::identity(4)), 4.0);
        // M swaps |01> and |11>.
        let m = Operator::from_permutation(&[0, 3, 2, 1]);
        let a = Operator::identity(4).scale_real(0.5).sub(&m);
        // Brute force: Σ |a_ij|².
        let mut brute = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                brute += a.get(i, j).norm_sqr();
            }
        }
        assert!((brute - 3.0).abs() < 1e-15);
        assert!((hs_norm_sq(&a) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn fractional_power_endpoints() {
        let cnot = cnot();
        assert!(
            unitary_fractional_power(&cnot, 0.0)
                .unwrap()
                .max_abs_diff(&Operator::identity(4))
                < 1e-12
        );
        assert!(unitary_fractional_power(&cnot, 1.0).unwrap().max_abs_diff(&cnot) < 1e-12);
    }

    #[test]
    fn cnot_square_root() {
        // Oracle: CNOT is a permutation with eigenvalue -1 on |1>⊗|->.
        let minus = [
            ZERO,
            ZERO,
            C64::new(0.5f64.sqrt(), 0.0),
            C64::new(-(0.5f64.sqrt()), 0.0),
        ];
        let p_minus = Operator::outer(&minus, &minus);
        let p_plus = Operator::identity(4).sub(&p_minus);
        let expected = p_plus.add(&p_minus.scale(C64::new(0.0, 1.0)));
        let half = unitary_fractional_power(&cnot(), 0.5).unwrap();
        assert!(half.max_abs_diff(&expected) < 1e-10);
        assert!(half.matmul(&half).max_abs_diff(&cnot()) < 1e-10);
    }

    #[test]
    fn non_unitary_rejected() {
        let a = Operator::identity(2).scale_real(2.0);
        assert!(matches!(
            unitary_fractional_power(&a, 0.5),
            Err(SggdError::NotUnitary(_))
        ));
    }

    #[test]
    fn spectral_decomposition_reconstructs() {
        for v in [cnot(), swap(), cz(), hadamard(), kron(&pauli_x(), &pauli_y())] {
            let comps = spectral_decomposition(&v).unwrap();
            let mut sum = Operator::zeros(v.dim());
            for (a, ca) in comps.iter().enumerate() {
                assert!(ca.projector.matmul(&ca.projector).max_abs_diff(&ca.projector) < 1e-10);
                for cb in comps.iter().skip(a + 1) {
                    assert!(ca.projector.matmul(&cb.projector).max_abs() < 1e-10);
                }
                sum.add_assign_scaled(&ca.projector, C64::from_polar(1.0, ca.phase));
            }
            assert!(sum.max_abs_diff(&v) < 1e-10);
            assert!(comps.windows(2).all(|w| w[0].phase < w[1].phase));
            assert!(comps.iter().all(|c| c.phase > -PI && c.phase <= PI));
        }
    }

    #[test]
    fn involution_power_closed_form() {
        // For V² = I: V^s = P₊ + e^{iπs} P₋.
        for v in [cnot(), swap(), kron(&pauli_x(), &pauli_z())] {
            let p_plus = Operator::identity(4).add(&v).scale_real(0.5);
            let p_minus = Operator::identity(4).sub(&v).scale_real(0.5);
            for s in [0.1, 0.37, 0.5, 0.9] {
                let closed = p_plus.add(&p_minus.scale(C64::from_polar(1.0, PI * s)));
                let got = unitary_fractional_power(&v, s).unwrap();
                assert!(got.max_abs_diff(&closed) < 1e-10);
            }
        }
    }

    #[test]
    fn hermitian_eigenvalues_of_pauli_products() {
        let vals = hermitian_eigenvalues(&kron(&pauli_z(), &pauli_x())).unwrap();
        let expected = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in vals.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(hermitian_eigenvalues(&cnot().scale(C64::new(0.0, 1.0))).is_err());
    }

    #[test]
    fn kron_associative_on_random_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (a, b, c) = (random_op(&mut rng, 2), random_op(&mut rng, 3), random_op(&mut rng, 2));
            let left = kron(&kron(&a, &b), &c);
            let right = kron(&a, &kron(&b, &c));
            assert!(left.max_abs_diff(&right) < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn hs_self_inner_real_nonnegative(seed in any::<u64>(), dim in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_op(&mut rng, dim);
            let z = hs_inner(&a, &a).unwrap();
            prop_assert!(z.im.abs() < 1e-12);
            prop_assert!(z.re >= 0.0);
            prop_assert!((z.re - hs_norm_sq(&a)).abs() < 1e-10);
        }

        #[test]
        fn fractional_powers_compose(s in 0.0f64..0.5, u in 0.0f64..0.5, pick in 0usize..4) {
            let v = [cnot(), swap(), cz(), kron(&hadamard(), &pauli_x())][pick].clone();
            let vs = unitary_fractional_power(&v, s).unwrap();
            let vu = unitary_fractional_power(&v, u).unwrap();
            let vsu = unitary_fractional_power(&v, s + u).unwrap();
            prop_assert!(vs.unitarity_defect() < 1e-10);
            prop_assert!(vs.matmul(&vu).max_abs_diff(&vsu) < 1e-10);
        }
    }
}
