//! Parameterized quantum circuits.
//!
//! A [`ParamCircuit`] is an ordered gate list acting on `width` qubits.
//! Gates are applied in list order, so the first gate is the rightmost
//! factor of the circuit unitary. Qubit 0 is the most significant bit of a
//! basis index.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SggdError};
use crate::linalg::{gates, unitary_fractional_power, Operator, C64, ZERO};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedGate {
    X,
    Y,
    Z,
    H,
    Cnot,
    Cz,
    Swap,
}

impl FixedGate {
    pub fn arity(self) -> usize {
        match self {
            Self::X | Self::Y | Self::Z | Self::H => 1,
            Self::Cnot | Self::Cz | Self::Swap => 2,
        }
    }

    pub fn matrix(self) -> Operator {
        match self {
            Self::X => gates::pauli_x(),
            Self::Y => gates::pauli_y(),
            Self::Z => gates::pauli_z(),
            Self::H => gates::hadamard(),
            Self::Cnot => gates::cnot(),
            Self::Cz => gates::cz(),
            Self::Swap => gates::swap(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn rotation(self, angle: f64) -> Operator {
        match self {
            Self::X => gates::rx(angle),
            Self::Y => gates::ry(angle),
            Self::Z => gates::rz(angle),
        }
    }

    pub fn pauli(self) -> Operator {
        match self {
            Self::X => gates::pauli_x(),
            Self::Y => gates::pauli_y(),
            Self::Z => gates::pauli_z(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GateKind {
    Fixed {
        gate: FixedGate,
    },
    /// `exp(-i θ σ / 2)`.
    Rotation {
        axis: Axis,
        slot: usize,
    },
    /// `base^{cos²θ}`: the identity at `θ = π/2`, `base` at `θ = 0`.
    Switchable {
        base: FixedGate,
        slot: usize,
    },
}

impl GateKind {
    fn arity(&self) -> usize {
        match self {
            Self::Fixed { gate } | Self::Switchable { base: gate, .. } => gate.arity(),
            Self::Rotation { .. } => 1,
        }
    }

    pub fn slot(&self) -> Option<usize> {
        match self {
            Self::Fixed { .. } => None,
            Self::Rotation { slot, .. } | Self::Switchable { slot, .. } => Some(*slot),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    #[serde(flatten)]
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl GateSpec {
    pub fn fixed(gate: FixedGate, targets: &[usize]) -> Self {
        Self {
            kind: GateKind::Fixed { gate },
            targets: targets.to_vec(),
        }
    }

    pub fn rotation(axis: Axis, slot: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Rotation { axis, slot },
            targets: vec![target],
        }
    }

    pub fn switchable(base: FixedGate, slot: usize, targets: &[usize]) -> Self {
        Self {
            kind: GateKind::Switchable { base, slot },
            targets: targets.to_vec(),
        }
    }

    /// The gate's matrix on its own targets.
    pub fn local_matrix(&self, params: &[f64]) -> Result<Operator> {
        Ok(match &self.kind {
            GateKind::Fixed { gate } => gate.matrix(),
            GateKind::Rotation { axis, slot } => axis.rotation(params[*slot]),
            GateKind::Switchable { base, slot } => {
                let s = params[*slot].cos().powi(2);
                unitary_fractional_power(&base.matrix(), s)?
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct ParamCircuit {
    width: usize,
    gates: Vec<GateSpec>,
    param_count: usize,
}

#[derive(Deserialize)]
struct RawCircuit {
    width: usize,
    gates: Vec<GateSpec>,
}

impl TryFrom<RawCircuit> for ParamCircuit {
    type Error = SggdError;

    fn try_from(raw: RawCircuit) -> Result<Self> {
        Self::new(raw.width, raw.gates)
    }
}

fn validate_targets(targets: &[usize], width: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= width {
            return Err(SggdError::InvalidArgument(format!(
                "target qubit {t} outside a {width}-qubit register"
            )));
        }
        if targets[..i].contains(&t) {
            return Err(SggdError::InvalidArgument(format!(
                "target qubit {t} repeated in {targets:?}"
            )));
        }
    }
    Ok(())
}

impl ParamCircuit {
    pub fn new(width: usize, gates: Vec<GateSpec>) -> Result<Self> {
        if width == 0 || width > MAX_QUBITS {
            return Err(SggdError::SizeOverflow(format!(
                "register width {width} not in 1..={MAX_QUBITS}"
            )));
        }
        for g in &gates {
            if g.targets.len() != g.kind.arity() {
                return Err(SggdError::InvalidArgument(format!(
                    "gate {:?} needs {} targets, got {}",
                    g.kind,
                    g.kind.arity(),
                    g.targets.len()
                )));
            }
            validate_targets(&g.targets, width)?;
        }
        let param_count = gates.iter().filter_map(|g| g.kind.slot()).max().map_or(0, |m| m + 1);
        let mut used = vec![false; param_count];
        for slot in gates.iter().filter_map(|g| g.kind.slot()) {
            used[slot] = true;
        }
        if let Some(unused) = used.iter().position(|u| !u) {
            return Err(SggdError::InvalidArgument(format!(
                "parameter slot {unused} is not used by any gate"
            )));
        }
        Ok(Self {
            width,
            gates,
            param_count,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        1 << self.width
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    /// True when every parameterized gate is a Pauli rotation, which is
    /// what [`ParamCircuit::expectation_gradient`] needs.
    pub fn is_rotation_only(&self) -> bool {
        self.gates
            .iter()
            .all(|g| !matches!(g.kind, GateKind::Switchable { .. }))
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(SggdError::ParamCount {
                expected: self.param_count,
                found: params.len(),
            });
        }
        Ok(())
    }

    /// Bind parameters, producing the concrete gate sequence.
    pub fn bind(&self, params: &[f64]) -> Result<BoundCircuit> {
        self.check_params(params)?;
        let gates = self
            .gates
            .iter()
            .map(|g| Ok(LocalGate::new(g.local_matrix(params)?, g.targets.clone(), self.width)))
            .collect::<Result<_>>()?;
        Ok(BoundCircuit {
            width: self.width,
            gates,
        })
    }

    /// Gradient of `Σ_b w_b <ψ_b|U†(θ) O U(θ)|ψ_b>` by reverse-mode
    /// (adjoint) differentiation. Only defined for rotation-only circuits.
    pub fn expectation_gradient(
        &self,
        params: &[f64],
        states: &[Vec<C64>],
        weights: &[f64],
        obs: &Operator,
    ) -> Result<Vec<f64>> {
        if !self.is_rotation_only() {
            return Err(SggdError::InvalidArgument(
                "adjoint gradient needs a circuit without switchable gates".into(),
            ));
        }
        crate::linalg::check_dims(self.dim(), obs.dim())?;
        crate::linalg::check_dims(states.len(), weights.len())?;
        let bound = self.bind(params)?;
        let generators: Vec<Option<(usize, LocalGate)>> = self
            .gates
            .iter()
            .map(|g| match g.kind {
                GateKind::Rotation { axis, slot } => {
                    Some((slot, LocalGate::new(axis.pauli(), g.targets.clone(), self.width)))
                }
                _ => None,
            })
            .collect();

        let mut grad = vec![0.0; self.param_count];
        let mut scratch = vec![ZERO; self.dim()];
        for (psi, &w) in states.iter().zip(weights) {
            crate::linalg::check_dims(self.dim(), psi.len())?;
            if w == 0.0 {
                continue;
            }
            let mut phi = psi.clone();
            bound.apply(&mut phi);
            let mut lam = obs.apply(&phi);
            for (k, gate) in bound.gates.iter().enumerate().rev() {
                if let Some((slot, sigma)) = &generators[k] {
                    scratch.copy_from_slice(&phi);
                    sigma.apply(&mut scratch);
                    let overlap: C64 = lam.iter().zip(&scratch).map(|(l, s)| l.conj() * s).sum();
                    grad[*slot] += w * overlap.im;
                }
                gate.apply_adjoint(&mut phi);
                gate.apply_adjoint(&mut lam);
            }
        }
        Ok(grad)
    }
}

/// A gate matrix together with the qubits it acts on.
#[derive(Clone, Debug)]
pub struct LocalGate {
    matrix: Operator,
    adjoint: Operator,
    targets: Vec<usize>,
    masks: Vec<usize>,
    offsets: Vec<usize>,
    diagonal: Option<Vec<C64>>,
    width: usize,
}

impl LocalGate {
    fn new(matrix: Operator, targets: Vec<usize>, width: usize) -> Self {
        let k = targets.len();
        let masks: Vec<usize> = targets.iter().map(|&q| 1 << (width - 1 - q)).collect();
        let offsets = (0..1usize << k)
            .map(|l| (0..k).filter(|t| (l >> (k - 1 - t)) & 1 == 1).map(|t| masks[t]).sum())
            .collect();
        let n = matrix.dim();
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || matrix.get(i, j) == ZERO));
        let diagonal = is_diag.then(|| (0..n).map(|i| matrix.get(i, i)).collect());
        Self {
            adjoint: matrix.adjoint(),
            matrix,
            targets,
            masks,
            offsets,
            diagonal,
            width,
        }
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn apply(&self, state: &mut [C64]) {
        self.apply_with(state, &self.matrix, false);
    }

    pub fn apply_adjoint(&self, state: &mut [C64]) {
        self.apply_with(state, &self.adjoint, true);
    }

    /// `x <- G† x G` on a full-register operator.
    pub fn conjugate(&self, x: &mut Operator) {
        match self.full_diagonal() {
            Some(phase) => conjugate_diagonal(x, &phase),
            None => conjugate_dense(x, &self.matrix, &self.masks, &self.offsets),
        }
    }

    /// The diagonal of the embedded gate, when the gate is diagonal.
    fn full_diagonal(&self) -> Option<Vec<C64>> {
        let diag = self.diagonal.as_ref()?;
        let n = 1usize << self.width;
        let all: usize = self.masks.iter().sum();
        let mut phase = vec![ZERO; n];
        for base in (0..n).filter(|b| b & all == 0) {
            for (l, off) in self.offsets.iter().enumerate() {
                phase[base + off] = diag[l];
            }
        }
        Some(phase)
    }

    fn apply_with(&self, state: &mut [C64], m: &Operator, conj: bool) {
        let dim = 1usize << self.width;
        debug_assert_eq!(state.len(), dim);
        let all: usize = self.masks.iter().sum();
        if let Some(diag) = &self.diagonal {
            for base in (0..dim).filter(|b| b & all == 0) {
                for (l, off) in self.offsets.iter().enumerate() {
                    let d = if conj { diag[l].conj() } else { diag[l] };
                    state[base + off] *= d;
                }
            }
            return;
        }
        if let [mask] = self.masks[..] {
            let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
            mix_halves(state, mask, a, b, c, d);
            return;
        }
        let sub = self.offsets.len();
        let mut buf = vec![ZERO; sub];
        for base in (0..dim).filter(|b| b & all == 0) {
            for (slot, off) in buf.iter_mut().zip(&self.offsets) {
                *slot = state[base + off];
            }
            for (r, off) in self.offsets.iter().enumerate() {
                state[base + off] = m.row(r).iter().zip(&buf).map(|(a, x)| a * x).sum();
            }
        }
    }
}

/// In every block of `2 * half` entries, replace the halves `(u, v)` by
/// `(a u + b v, c u + d v)`.
fn mix_halves(data: &mut [C64], half: usize, a: C64, b: C64, c: C64, d: C64) {
    for block in data.chunks_exact_mut(2 * half) {
        let (lo, hi) = block.split_at_mut(half);
        for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
            let (p, q) = (*u, *v);
            *u = a * p + b * q;
            *v = c * p + d * q;
        }
    }
}

/// `x <- D† x D` for the diagonal matrix `D = diag(phase)`.
fn conjugate_diagonal(x: &mut Operator, phase: &[C64]) {
    let n = x.dim();
    for (row, left) in x.as_mut_slice().chunks_mut(n).zip(phase) {
        let left = left.conj();
        for (v, p) in row.iter_mut().zip(phase) {
            *v *= left * p;
        }
    }
}

/// `x <- M† x M` where `M` acts on the qubits behind `masks`; `offsets`
/// lists the index offsets of the local basis states.
fn conjugate_dense(x: &mut Operator, m: &Operator, masks: &[usize], offsets: &[usize]) {
    let n = x.dim();
    let all: usize = masks.iter().sum();
    let data = x.as_mut_slice();
    if let [mask] = masks[..] {
        let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
        // Columns: x M.
        for row in data.chunks_mut(n) {
            mix_halves(row, mask, a, c, b, d);
        }
        // Rows: M† x.
        mix_halves(data, mask * n, a.conj(), c.conj(), b.conj(), d.conj());
        return;
    }
    let sub = offsets.len();
    let mut buf = vec![ZERO; sub];
    for row in data.chunks_mut(n) {
        for base in (0..n).filter(|b| b & all == 0) {
            for (slot, off) in buf.iter_mut().zip(offsets) {
                *slot = row[base + off];
            }
            for (col, off) in offsets.iter().enumerate() {
                row[base + off] = (0..sub).map(|k| buf[k] * m.get(k, col)).sum();
            }
        }
    }
    let mut rows = vec![ZERO; sub * n];
    for base in (0..n).filter(|b| b & all == 0) {
        for (k, off) in offsets.iter().enumerate() {
            rows[k * n..(k + 1) * n].copy_from_slice(&data[(base + off) * n..(base + off + 1) * n]);
        }
        for (r, off) in offsets.iter().enumerate() {
            let out = &mut data[(base + off) * n..(base + off + 1) * n];
            out.fill(ZERO);
            for k in 0..sub {
                let w = m.get(k, r).conj();
                for (o, v) in out.iter_mut().zip(&rows[k * n..(k + 1) * n]) {
                    *o += w * v;
                }
            }
        }
    }
}

/// Deferred conjugations of [`BoundCircuit::conjugate`].
struct Pending {
    width: usize,
    local: Vec<Option<Operator>>,
    phase: Option<Vec<C64>>,
    phase_qubits: usize,
}

impl Pending {
    fn flush_local(&mut self, x: &mut Operator, q: usize) {
        if let Some(m) = self.local[q].take() {
            let mask = 1usize << (self.width - 1 - q);
            conjugate_dense(x, &m, &[mask], &[0, mask]);
        }
    }

    fn flush_phase(&mut self, x: &mut Operator) {
        if let Some(p) = self.phase.take() {
            conjugate_diagonal(x, &p);
        }
        self.phase_qubits = 0;
    }
}

/// A circuit with all parameters bound.
#[derive(Clone, Debug)]
pub struct BoundCircuit {
    width: usize,
    gates: Vec<LocalGate>,
}

impl BoundCircuit {
    pub fn dim(&self) -> usize {
        1 << self.width
    }

    /// `state <- U state`.
    pub fn apply(&self, state: &mut [C64]) {
        for g in &self.gates {
            g.apply(state);
        }
    }

    /// `state <- U† state`.
    pub fn apply_adjoint(&self, state: &mut [C64]) {
        for g in self.gates.iter().rev() {
            g.apply_adjoint(state);
        }
    }

    /// `U† O U`, one gate at a time. Gates are deferred and merged where
    /// they commute with what comes next: single-qubit gates per qubit, and
    /// diagonal gates into one phase vector.
    pub fn conjugate(&self, obs: &Operator) -> Result<Operator> {
        crate::linalg::check_dims(self.dim(), obs.dim())?;
        let mut support = support_qubits(obs, self.width);
        if support.is_empty() {
            return Ok(obs.clone());
        }
        // While the observable is local, work on the qubits it has reached.
        let mut local = restrict(obs, &support, self.width);
        let mut rest = self.gates.len();
        while rest > 0 && support.len() < self.width {
            let g = &self.gates[rest - 1];
            rest -= 1;
            let inside: Vec<usize> = g.targets.iter().filter_map(|q| support.binary_search(q).ok()).collect();
            // The identity part commutes with the gate, and so does a
            // diagonal gate with an operator block-diagonal on its qubits.
            if inside.is_empty() || (g.diagonal.is_some() && block_diagonal(&local, &inside, support.len())) {
                continue;
            }
            if inside.len() < g.targets.len() {
                let mut grown = support.clone();
                grown.extend(g.targets.iter().filter(|q| !support.contains(q)));
                grown.sort_unstable();
                let positions: Vec<usize> = support.iter().map(|q| grown.binary_search(q).unwrap_or(0)).collect();
                local = embed_unchecked(&local, &positions, grown.len());
                support = grown;
            }
            let mapped: Vec<usize> = g
                .targets
                .iter()
                .map(|q| support.binary_search(q).unwrap_or(0))
                .collect();
            LocalGate::new(g.matrix.clone(), mapped, support.len()).conjugate(&mut local);
        }
        let x = embed_unchecked(&local, &support, self.width);
        Ok(self.conjugate_gates(x, &self.gates[..rest]))
    }

    fn conjugate_gates(&self, mut x: Operator, gates: &[LocalGate]) -> Operator {
        let mut pending = Pending {
            width: self.width,
            local: vec![None; self.width],
            phase: None,
            phase_qubits: 0,
        };
        for g in gates.iter().rev() {
            let touched: usize = g.masks.iter().sum();
            if let [q] = g.targets[..] {
                if pending.phase_qubits & touched != 0 {
                    pending.flush_phase(&mut x);
                }
                pending.local[q] = Some(match pending.local[q].take() {
                    Some(m) => m.matmul(&g.matrix),
                    None => g.matrix.clone(),
                });
                continue;
            }
            for &q in &g.targets {
                pending.flush_local(&mut x, q);
            }
            match g.full_diagonal() {
                Some(d) => {
                    match &mut pending.phase {
                        Some(p) => p.iter_mut().zip(&d).for_each(|(a, b)| *a *= b),
                        None => pending.phase = Some(d),
                    }
                    pending.phase_qubits |= touched;
                }
                None => {
                    if pending.phase_qubits & touched != 0 {
                        pending.flush_phase(&mut x);
                    }
                    g.conjugate(&mut x);
                }
            }
        }
        pending.flush_phase(&mut x);
        for q in 0..self.width {
            pending.flush_local(&mut x, q);
        }
        x
    }

    pub fn unitary(&self) -> Operator {
        let n = self.dim();
        let columns: Vec<Vec<C64>> = (0..n)
            .map(|j| {
                let mut v = vec![ZERO; n];
                v[j] = C64::new(1.0, 0.0);
                self.apply(&mut v);
                v
            })
            .collect();
        Operator::from_fn(n, |i, j| columns[j][i])
    }
}

/// Embed a local gate acting on `targets` into a `width`-qubit register.
/// The first target is the most significant qubit of the local matrix.
pub fn embed(local: &Operator, targets: &[usize], width: usize) -> Result<Operator> {
    validate_targets(targets, width)?;
    crate::linalg::check_dims(1 << targets.len(), local.dim())?;
    Ok(embed_unchecked(local, targets, width))
}

fn embed_unchecked(local: &Operator, targets: &[usize], width: usize) -> Operator {
    let masks: Vec<usize> = targets.iter().map(|&q| 1 << (width - 1 - q)).collect();
    let all: usize = masks.iter().sum();
    let local_index = |i: usize| masks.iter().fold(0, |acc, m| (acc << 1) | usize::from(i & m != 0));
    Operator::from_fn(1 << width, |i, j| {
        if i & !all == j & !all {
            local.get(local_index(i), local_index(j))
        } else {
            ZERO
        }
    })
}

/// Whether `x` has no entries coupling different basis states of the
/// qubits at `positions`.
fn block_diagonal(x: &Operator, positions: &[usize], width: usize) -> bool {
    let mask: usize = positions.iter().map(|&q| 1usize << (width - 1 - q)).sum();
    let n = x.dim();
    (0..n).all(|i| (0..n).all(|j| (i ^ j) & mask == 0 || x.get(i, j) == ZERO))
}

/// Qubits on which `obs` acts as something other than the identity.
fn support_qubits(obs: &Operator, width: usize) -> Vec<usize> {
    let n = obs.dim();
    (0..width)
        .filter(|&q| {
            let m = 1usize << (width - 1 - q);
            (0..n).any(|i| {
                (0..n).any(|j| {
                    let v = obs.get(i, j);
                    if (i ^ j) & m != 0 {
                        v != ZERO
                    } else {
                        i & m == 0 && v != obs.get(i | m, j | m)
                    }
                })
            })
        })
        .collect()
}

/// The factor of `obs` on `support`, assuming `obs` is the identity
/// everywhere else.
fn restrict(obs: &Operator, support: &[usize], width: usize) -> Operator {
    let masks: Vec<usize> = support.iter().map(|&q| 1 << (width - 1 - q)).collect();
    let full = |a: usize| {
        masks
            .iter()
            .enumerate()
            .filter(|(t, _)| (a >> (masks.len() - 1 - t)) & 1 == 1)
            .map(|(_, m)| m)
            .sum::<usize>()
    };
    Operator::from_fn(1 << support.len(), |a, b| obs.get(full(a), full(b)))
}

/// `U(θ)`: gate matrices multiplied in list order.
pub fn circuit_unitary(circuit: &ParamCircuit, params: &[f64]) -> Result<Operator> {
    Ok(circuit.bind(params)?.unitary())
}

/// `Õ(θ) = U†(θ) O U(θ)`.
pub fn conjugated_observable(circuit: &ParamCircuit, params: &[f64], obs: &Operator) -> Result<Operator> {
    crate::linalg::check_dims(circuit.dim(), obs.dim())?;
    obs.require_hermitian()?;
    circuit.bind(params)?.conjugate(obs)
}

/// `CNOT^{cos²θ}` on two qubits.
pub fn werner_ansatz() -> ParamCircuit {
    ParamCircuit::new(2, vec![GateSpec::switchable(FixedGate::Cnot, 0, &[0, 1])]).expect("static circuit")
}

/// `CNOT_{B→A}^{cos²φ} CNOT_{A→B}^{cos²θ}` with parameters `(θ, φ)`.
pub fn double_cnot_ansatz() -> ParamCircuit {
    ParamCircuit::new(
        2,
        vec![
            GateSpec::switchable(FixedGate::Cnot, 0, &[0, 1]),
            GateSpec::switchable(FixedGate::Cnot, 1, &[1, 0]),
        ],
    )
    .expect("static circuit")
}

/// `(I⊗X)^{cos²φ} CNOT^{cos²θ}` with parameters `(θ, φ)`.
pub fn cnot_ix_ansatz() -> ParamCircuit {
    ParamCircuit::new(
        2,
        vec![
            GateSpec::switchable(FixedGate::Cnot, 0, &[0, 1]),
            GateSpec::switchable(FixedGate::X, 1, &[1]),
        ],
    )
    .expect("static circuit")
}

/// The cat-dog classifier uses the same circuit as [`cnot_ix_ansatz`].
pub fn catdog_ansatz() -> ParamCircuit {
    cnot_ix_ansatz()
}

/// Layers of `RY` then `RZ` on every qubit followed by a ring of CZ gates.
/// A two-qubit ring is the single pair `(0, 1)`.
pub fn hardware_efficient_ansatz(width: usize, layers: usize) -> Result<ParamCircuit> {
    if width < 2 || layers < 1 {
        return Err(SggdError::InvalidArgument(format!(
            "hardware-efficient ansatz needs width >= 2 and layers >= 1, got {width} and {layers}"
        )));
    }
    let mut gates = Vec::new();
    for layer in 0..layers {
        let offset = 2 * width * layer;
        for q in 0..width {
            gates.push(GateSpec::rotation(Axis::Y, offset + q, q));
        }
        for q in 0..width {
            gates.push(GateSpec::rotation(Axis::Z, offset + width + q, q));
        }
        for q in 0..width - 1 {
            gates.push(GateSpec::fixed(FixedGate::Cz, &[q, q + 1]));
        }
        if width > 2 {
            gates.push(GateSpec::fixed(FixedGate::Cz, &[width - 1, 0]));
        }
    }
    ParamCircuit::new(width, gates)
}
