//! Symmetry groups, twirling and symmetry-constraint residuals.
//!
//! The twirl `T(O)` of an operator is its average over a group acting by
//! conjugation. It is the Hilbert-Schmidt orthogonal projection onto the
//! group's commutant, so `‖T(O) − O‖²` measures how far `O` is from being
//! invariant.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SggdError};
use crate::linalg::{check_dims, hs_norm_sq, kron, kron_power, Operator, C64, ONE, ZERO};

/// Closure is verified for finite groups up to this many elements.
pub const CLOSURE_CHECK_LIMIT: usize = 24;

const CLOSURE_TOL: f64 = 1e-9;

/// Largest dimension for which lifted operators are materialized.
pub const MAX_LIFTED_DIM: usize = 4096;

#[derive(Clone, Debug)]
pub enum GroupKind {
    /// An explicit list of unitaries. `permutations[k]` is `Some(π)` when
    /// element `k` maps `|j>` to `|π(j)>`.
    Finite {
        elements: Vec<Operator>,
        permutations: Vec<Option<Vec<usize>>>,
        closure_checked: bool,
    },
    /// `{U^{⊗copies} | U ∈ U(d)}`.
    Collective { d: usize, copies: usize },
}

#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    kind: GroupKind,
    dim: usize,
}

fn as_permutation(op: &Operator) -> Option<Vec<usize>> {
    let n = op.dim();
    let mut perm = vec![usize::MAX; n];
    for i in 0..n {
        for (j, z) in op.row(i).iter().enumerate() {
            if *z == ONE {
                if perm[j] != usize::MAX {
                    return None;
                }
                perm[j] = i;
            } else if *z != ZERO {
                return None;
            }
        }
    }
    perm.iter().all(|&p| p != usize::MAX).then_some(perm)
}

/// Operator moving tensor factor `k` (of `perm.len()` factors, each of
/// dimension `d`) to position `perm[k]`.
pub fn factor_permutation(d: usize, perm: &[usize]) -> Operator {
    let t = perm.len();
    let n = d.pow(t as u32);
    let map: Vec<usize> = (0..n)
        .map(|idx| {
            let mut digits = vec![0; t];
            let mut rest = idx;
            for k in (0..t).rev() {
                digits[k] = rest % d;
                rest /= d;
            }
            let mut moved = vec![0; t];
            for k in 0..t {
                moved[perm[k]] = digits[k];
            }
            moved.iter().fold(0, |acc, &x| acc * d + x)
        })
        .collect();
    Operator::from_permutation(&map)
}

fn all_permutations(t: usize) -> Vec<Vec<usize>> {
    if t == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(t - 1) {
        for pos in 0..t {
            let mut q = p.clone();
            q.insert(pos, t - 1);
            out.push(q);
        }
    }
    out
}

impl SymmetryGroup {
    /// A finite group given by all its elements.
    pub fn finite(elements: Vec<Operator>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| SggdError::InvalidArgument("a group needs at least one element".into()))?;
        let dim = first.dim();
        for e in &elements {
            check_dims(dim, e.dim())?;
            e.require_unitary()?;
        }
        let id = Operator::identity(dim);
        if !elements.iter().any(|e| e.max_abs_diff(&id) <= CLOSURE_TOL) {
            return Err(SggdError::InvalidArgument("group does not contain the identity".into()));
        }
        let permutations: Vec<_> = elements.iter().map(as_permutation).collect();
        let closure_checked = elements.len() <= CLOSURE_CHECK_LIMIT;
        if closure_checked {
            check_closure(&elements, &permutations)?;
        }
        Ok(Self {
            kind: GroupKind::Finite {
                elements,
                permutations,
                closure_checked,
            },
            dim,
        })
    }

    pub fn trivial(dim: usize) -> Self {
        Self::finite(vec![Operator::identity(dim)]).expect("identity group")
    }

    /// `{I, SWAP}` on two qubits.
    pub fn swap2() -> Self {
        Self::finite(vec![Operator::identity(4), crate::linalg::gates::swap()]).expect("swap group")
    }

    /// Exchange of two `n`-qubit registers: qubit `i` with qubit `n + i`.
    pub fn register_swap(n: usize) -> Result<Self> {
        if n == 0 || 2 * n > crate::circuits::MAX_QUBITS {
            return Err(SggdError::SizeOverflow(format!("register-swap({n})")));
        }
        let exchange: Vec<usize> = (0..2 * n).map(|q| (q + n) % (2 * n)).collect();
        Self::finite(vec![Operator::identity(1 << (2 * n)), factor_permutation(2, &exchange)])
    }

    /// Cyclic shifts of `n` qubits, `n` elements.
    pub fn cyclic_shift(n: usize) -> Result<Self> {
        if n == 0 || n > crate::circuits::MAX_QUBITS {
            return Err(SggdError::SizeOverflow(format!("cyclic-shift({n})")));
        }
        let elements = (0..n)
            .map(|s| factor_permutation(2, &(0..n).map(|q| (q + s) % n).collect::<Vec<_>>()))
            .collect();
        Self::finite(elements)
    }

    /// `{U ⊗ U}` with `U` ranging over the unitaries of dimension `d`.
    pub fn local_unitary_pair(d: usize) -> Result<Self> {
        Self::collective(d, 2)
    }

    /// `{U^{⊗copies}}` with `U` ranging over the unitaries of dimension `d`.
    pub fn collective(d: usize, copies: usize) -> Result<Self> {
        if d < 2 || copies < 1 {
            return Err(SggdError::InvalidArgument(format!(
                "collective unitary group needs d >= 2 and copies >= 1, got {d} and {copies}"
            )));
        }
        let dim = (d as u64)
            .checked_pow(copies as u32)
            .filter(|&n| n <= MAX_LIFTED_DIM as u64)
            .ok_or_else(|| SggdError::SizeOverflow(format!("dimension {d}^{copies}")))?;
        if copies > 6 {
            return Err(SggdError::SizeOverflow(format!("{copies}! permutation operators")));
        }
        Ok(Self {
            kind: GroupKind::Collective { d, copies },
            dim: dim as usize,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    /// Elements of a finite group; `None` for continuous groups.
    pub fn elements(&self) -> Option<&[Operator]> {
        match &self.kind {
            GroupKind::Finite { elements, .. } => Some(elements),
            GroupKind::Collective { .. } => None,
        }
    }

    /// False when closure was not verified because the group is large.
    pub fn closure_checked(&self) -> bool {
        match &self.kind {
            GroupKind::Finite { closure_checked, .. } => *closure_checked,
            GroupKind::Collective { .. } => true,
        }
    }

    /// The group acting on `t` copies, each element `S` becoming `S^{⊗t}`.
    pub fn lift(&self, t: usize) -> Result<Self> {
        if t == 1 {
            return Ok(self.clone());
        }
        let dim = (self.dim as u64)
            .checked_pow(t as u32)
            .filter(|&n| n <= MAX_LIFTED_DIM as u64)
            .ok_or_else(|| SggdError::SizeOverflow(format!("dimension {}^{t}", self.dim)))? as usize;
        match &self.kind {
            GroupKind::Finite {
                elements,
                closure_checked,
                ..
            } => {
                let lifted: Vec<Operator> = elements.iter().map(|e| kron_power(e, t)).collect();
                let permutations = lifted.iter().map(as_permutation).collect();
                Ok(Self {
                    kind: GroupKind::Finite {
                        elements: lifted,
                        permutations,
                        closure_checked: *closure_checked,
                    },
                    dim,
                })
            }
            GroupKind::Collective { d, copies } => Self::collective(*d, copies * t),
        }
    }

    /// `T(O)`.
    pub fn twirl(&self, obs: &Operator) -> Result<Operator> {
        check_dims(self.dim, obs.dim())?;
        match &self.kind {
            GroupKind::Finite {
                elements, permutations, ..
            } => Ok(finite_twirl(elements, permutations, obs)),
            GroupKind::Collective { d, copies: 2 } => Ok(pair_twirl(*d, obs)),
            GroupKind::Collective { d, copies } => Ok(schur_weyl_twirl(*d, *copies, obs)),
        }
    }
}

fn check_closure(elements: &[Operator], perms: &[Option<Vec<usize>>]) -> Result<()> {
    if let Some(perms) = perms.iter().cloned().collect::<Option<Vec<_>>>() {
        for a in &perms {
            for b in &perms {
                let prod: Vec<usize> = b.iter().map(|&j| a[j]).collect();
                if !perms.contains(&prod) {
                    return Err(SggdError::InvalidArgument("group is not closed under products".into()));
                }
            }
        }
        return Ok(());
    }
    for a in elements {
        for b in elements {
            let prod = a.matmul(b);
            if !elements.iter().any(|e| e.max_abs_diff(&prod) <= CLOSURE_TOL) {
                return Err(SggdError::InvalidArgument("group is not closed under products".into()));
            }
        }
    }
    Ok(())
}

fn finite_twirl(elements: &[Operator], perms: &[Option<Vec<usize>>], obs: &Operator) -> Operator {
    let n = obs.dim();
    let mut acc = Operator::zeros(n);
    for (s, perm) in elements.iter().zip(perms) {
        match perm {
            Some(p) => {
                // (S O S†)[p(a), p(b)] = O[a, b]
                let out = acc.as_mut_slice();
                for a in 0..n {
                    let row = obs.row(a);
                    let base = p[a] * n;
                    for (b, z) in row.iter().enumerate() {
                        out[base + p[b]] += z;
                    }
                }
            }
            None => acc.add_assign_scaled(&s.matmul(obs).matmul(&s.adjoint()), ONE),
        }
    }
    acc.scale_real(1.0 / elements.len() as f64)
}

/// `tr(F O)` with `F` the swap of two `d`-dimensional factors.
fn swap_trace(d: usize, obs: &Operator) -> C64 {
    let mut acc = ZERO;
    for a in 0..d {
        for b in 0..d {
            acc += obs.get(a * d + b, b * d + a);
        }
    }
    acc
}

/// Moment-matched projection `c_I I + c_F F` onto the commutant of `U ⊗ U`.
fn pair_twirl(d: usize, obs: &Operator) -> Operator {
    let (c_i, c_f) = pair_twirl_coefficients(d, obs);
    let f = factor_permutation(d, &[1, 0]);
    Operator::identity(d * d).scale(c_i).add(&f.scale(c_f))
}

/// Coefficients `(c_I, c_F)` of the `U ⊗ U` twirl.
pub fn pair_twirl_coefficients(d: usize, obs: &Operator) -> (C64, C64) {
    let df = d as f64;
    let tr = obs.trace();
    let trf = swap_trace(d, obs);
    let denom = df * df - 1.0;
    ((tr - trf / df) / denom, (trf - tr / df) / denom)
}

/// Projection onto the span of the factor permutations, which is the
/// commutant of `U^{⊗n}`.
fn schur_weyl_twirl(d: usize, n: usize, obs: &Operator) -> Operator {
    let perms: Vec<Operator> = all_permutations(n).iter().map(|p| factor_permutation(d, p)).collect();
    let m = perms.len();
    let gram = DMatrix::from_fn(m, m, |i, j| {
        crate::linalg::hs_inner(&perms[i], &perms[j])
            .expect("same dimension")
            .re
    });
    let pinv = gram.pseudo_inverse(1e-9).expect("gram matrix pseudo-inverse");
    let rhs: Vec<C64> = perms
        .iter()
        .map(|p| crate::linalg::hs_inner(p, obs).expect("same dimension"))
        .collect();
    let mut out = Operator::zeros(obs.dim());
    for i in 0..m {
        let coeff: C64 = (0..m).map(|j| rhs[j] * pinv[(i, j)]).sum();
        out.add_assign_scaled(&perms[i], coeff);
    }
    out
}

/// Residual of the symmetry constraint `T(Õ) = Õ`.
#[derive(Clone, Debug)]
pub struct SceResidual {
    /// `T(Õ) − Õ`.
    pub residual: Operator,
    /// Squared Hilbert-Schmidt norm of the residual.
    pub penalty: f64,
}

impl SceResidual {
    pub fn is_satisfied(&self, tolerance: f64) -> bool {
        self.penalty <= tolerance
    }
}

pub fn sce_residual(group: &SymmetryGroup, obs_tilde: &Operator) -> Result<SceResidual> {
    obs_tilde.require_hermitian()?;
    let residual = group.twirl(obs_tilde)?.sub(obs_tilde);
    let penalty = hs_norm_sq(&residual);
    Ok(SceResidual { residual, penalty })
}

fn werner_eta(theta: f64) -> f64 {
    PI * theta.sin().powi(2)
}

/// Closed-form twirl coefficients `(α₁, α₂)` with `T(Õ(θ)) = α₁ I + α₂ SWAP`
/// for the `CNOT^{cos²θ}` circuit and the SWAP observable.
pub fn werner_twirl_analytic(theta: f64) -> (f64, f64) {
    let eta = werner_eta(theta);
    ((eta / 2.0).cos().powi(2) / 2.0, (eta / 2.0).sin().powi(2))
}

/// Closed-form penalty `(3/4)(sin²η + 2 cos η + 2)`, `η = π sin²θ`.
pub fn werner_penalty_analytic(theta: f64) -> f64 {
    let eta = werner_eta(theta);
    0.75 * (eta.sin().powi(2) + 2.0 * eta.cos() + 2.0)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Projector onto the symmetric subspace of `(C^d)^{⊗t}`, the average of
/// all `t!` factor permutations.
pub fn symmetric_projector(t: usize, d: usize) -> Result<Operator> {
    if t < 1 || d < 2 {
        return Err(SggdError::InvalidArgument(format!(
            "symmetric projector needs t >= 1 and d >= 2, got t={t}, d={d}"
        )));
    }
    let n = (d as u64)
        .checked_pow(t as u32)
        .filter(|&n| n <= MAX_LIFTED_DIM as u64)
        .ok_or_else(|| SggdError::SizeOverflow(format!("dimension {d}^{t}")))? as usize;
    // Entry (x, y) counts the permutations taking y to x: nonzero only when
    // the digit strings are rearrangements, and then Π m_k! / t!.
    let digits = |mut idx: usize| {
        let mut v = vec![0usize; t];
        for k in (0..t).rev() {
            v[k] = idx % d;
            idx /= d;
        }
        v
    };
    let mut sorted_keys = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for idx in 0..n {
        let mut v = digits(idx);
        v.sort_unstable();
        let mut counts = vec![0usize; d];
        for &x in &v {
            counts[x] += 1;
        }
        weights.push(counts.iter().map(|&m| factorial(m)).product::<f64>() / factorial(t));
        sorted_keys.push(v);
    }
    let mut p = Operator::zeros(n);
    for x in 0..n {
        for y in 0..n {
            if sorted_keys[x] == sorted_keys[y] {
                p.set(x, y, C64::new(weights[x], 0.0));
            }
        }
    }
    Ok(p)
}

fn fold_coefficients(coeffs: &[f64]) -> Result<Vec<f64>> {
    match coeffs.len() {
        0 => Err(SggdError::InvalidArgument("empty Taylor coefficient list".into())),
        1 => Ok(vec![coeffs[0], 0.0]),
        _ => Ok(coeffs.to_vec()),
    }
}

/// `F = Σ_k a_k O^{⊗k} ⊗ I^{⊗(t−k)}` with `t = coeffs.len() − 1` and
/// `a_k = h^{(k)}(0)/k!`. A single coefficient `[c]` is read as `[c, 0]`.
pub fn build_post_processing_operator(obs: &Operator, coeffs: &[f64]) -> Result<Operator> {
    let coeffs = fold_coefficients(coeffs)?;
    let t = coeffs.len() - 1;
    let d = obs.dim();
    let n = (d as u64)
        .checked_pow(t as u32)
        .filter(|&n| n <= MAX_LIFTED_DIM as u64)
        .ok_or_else(|| SggdError::SizeOverflow(format!("dimension {d}^{t}")))? as usize;
    let id = Operator::identity(d);
    let mut out = Operator::zeros(n);
    for (k, &a) in coeffs.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let term = kron(&kron_power(obs, k), &kron_power(&id, t - k));
        out.add_assign_scaled(&term, C64::new(a, 0.0));
    }
    Ok(out)
}

/// Which projection of the lifted residual the modified penalty measures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyVariant {
    /// `P R P`.
    #[default]
    TwoSided,
    /// `P R`.
    Left,
    /// `(I − P) R`.
    Complement,
}

/// Squared HS norm of the chosen projection of `residual`.
pub fn projected_penalty(residual: &Operator, projector: &Operator, variant: PenaltyVariant) -> Result<f64> {
    check_dims(projector.dim(), residual.dim())?;
    let projected = match variant {
        PenaltyVariant::TwoSided => projector.matmul(residual).matmul(projector),
        PenaltyVariant::Left => projector.matmul(residual),
        PenaltyVariant::Complement => Operator::identity(residual.dim()).sub(projector).matmul(residual),
    };
    Ok(hs_norm_sq(&projected))
}

/// Penalty for a model whose output is post-processed by the polynomial
/// with Taylor coefficients `coeffs`: the residual of the lifted observable
/// `(U†)^{⊗t} F U^{⊗t}` under the lifted group, projected per `variant`.
pub fn modified_penalty(
    group: &SymmetryGroup,
    circuit_unitary: &Operator,
    obs: &Operator,
    coeffs: &[f64],
    variant: PenaltyVariant,
) -> Result<f64> {
    check_dims(group.dim(), obs.dim())?;
    check_dims(obs.dim(), circuit_unitary.dim())?;
    let t = fold_coefficients(coeffs)?.len() - 1;
    let f = build_post_processing_operator(obs, coeffs)?;
    let u_t = kron_power(circuit_unitary, t);
    let o_f = f.conjugate_by(&u_t);
    let lifted = group.lift(t)?;
    let residual = lifted.twirl(&o_f)?.sub(&o_f);
    if t == 1 && variant == PenaltyVariant::TwoSided {
        return Ok(hs_norm_sq(&residual));
    }
    let p = symmetric_projector(t, obs.dim())?;
    projected_penalty(&residual, &p, variant)
}
