//! Hardware-efficient ansatz construction for real-amplitude states, built
//! from uniformly controlled Y-rotations (UCRs), plus the exact inverse map
//! from a target state back to rotation angles.
//!
//! # Generator layout
//!
//! An `n`-qubit generator is a cascade: one Y-rotation on `q0`, then for each
//! level `m = 1..n` a UCR targeting `q_m` controlled on `q0..q_{m-1}`:
//!
//! ```text
//! q0 --Ry(s0)--o--------o-----------o--------
//!              |        |           |
//! q1 --------Ry(s1)-Ry(s2)--o-------|----o---      (level 1: slots 1..=2)
//!                           |       |    |
//! q2 -------------Ry(s3)--Ry(s5)--Ry(s4)-Ry(s6)    (level 2: slots 3..=6)
//! ```
//!
//! Level `m` owns slots `2^m - 1 ..= 2^{m+1} - 2`. A UCR over `m` controls
//! carries `2^m` rotation slots and `2^m - 1` CNOTs, so the generator totals
//! `2^n - 1` rotations and `2^n - n - 1` CNOTs.
//!
//! # UCR recursion and slot interleaving
//!
//! A UCR on controls `c0..c_{m-1}` is two copies of the UCR on `c1..c_{m-1}`
//! around a CNOT from `c0`: the first copy takes the even-indexed slots, the
//! second the odd-indexed ones, and products run left to right in time. The
//! base case over one control `c` is `Ry(a) . CX(c, t) . Ry(b)`.
//!
//! This exact ordering matters: block-diagonalizing the fragment over control
//! basis states shows each control value `l` rotates the target by a signed
//! sum of slot angles (a row of the order-`2^m` Hadamard matrix, column-
//! permuted by the CNOT structure), followed by a residual X flip on the
//! branches whose first control bit is 1 — the flips of CNOTs conditioned on
//! `c0` never cancel. [`ucr_branch_map`] records both facts per branch and is
//! what ties the forward build to the closed-form amplitude expressions and
//! to [`state_to_params`].

use crate::error::{Error, Result};
use crate::scalar::{norm, Real};
use crate::simulator::{CircuitTemplate, Gate, StateVector};

/// Rotation-slot count of the `n`-qubit generator: `2^n - 1`.
pub fn generator_param_count(n: usize) -> usize {
    (1 << n) - 1
}

/// CNOT count of the `n`-qubit generator: `2^n - n - 1`.
pub fn generator_cx_count(n: usize) -> usize {
    (1 << n) - n - 1
}

/// Rotation-slot count of the `n`-qubit discriminator: `2^{n+1} + n - 1`.
pub fn discriminator_param_count(n: usize) -> usize {
    (1 << (n + 1)) + n - 1
}

/// CNOT count of the `n`-qubit discriminator: `2^{n+1} - n - 2`.
pub fn discriminator_cx_count(n: usize) -> usize {
    (1 << (n + 1)) - n - 2
}

/// Uniformly controlled Y-rotation fragment on `controls` targeting
/// `target`, with parameter slots `slot_base .. slot_base + 2^m`.
pub fn build_ucr(
    num_qubits: usize,
    controls: &[usize],
    target: usize,
    slot_base: usize,
) -> Result<CircuitTemplate> {
    if controls.is_empty() {
        return Err(Error::invalid("a UCR needs at least one control"));
    }
    let mut seen = vec![false; num_qubits];
    for &q in controls.iter().chain(std::iter::once(&target)) {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange { index: q, num_qubits });
        }
        if seen[q] {
            return Err(Error::invalid(format!("qubit {q} appears twice in UCR")));
        }
        seen[q] = true;
    }
    let slots: Vec<usize> = (slot_base..slot_base + (1 << controls.len())).collect();
    let mut t = CircuitTemplate::new(num_qubits);
    ucr_into(&mut t, controls, target, &slots)?;
    Ok(t)
}

fn ucr_into(
    t: &mut CircuitTemplate,
    controls: &[usize],
    target: usize,
    slots: &[usize],
) -> Result<()> {
    if controls.len() == 1 {
        t.push_rotation(target, slots[0])?;
        t.push_controlled_not(controls[0], target)?;
        t.push_rotation(target, slots[1])?;
        return Ok(());
    }
    let even: Vec<usize> = slots.iter().copied().step_by(2).collect();
    let odd: Vec<usize> = slots.iter().copied().skip(1).step_by(2).collect();
    ucr_into(t, &controls[1..], target, &even)?;
    t.push_controlled_not(controls[0], target)?;
    ucr_into(t, &controls[1..], target, &odd)
}

/// The `n`-qubit generator template (`2^n - 1` slots).
pub fn build_generator(n: usize) -> CircuitTemplate {
    assert!(n >= 1, "generator needs at least one qubit");
    let mut t = CircuitTemplate::new(n);
    t.push_rotation(0, 0).expect("qubit 0 exists");
    for m in 1..n {
        let controls: Vec<usize> = (0..m).collect();
        let ucr = build_ucr(n, &controls, m, (1 << m) - 1).expect("valid UCR layout");
        t.append(&ucr).expect("same register width");
    }
    debug_assert_eq!(t.count_rotations(), generator_param_count(n));
    debug_assert_eq!(t.count_controlled_nots(), generator_cx_count(n));
    t
}

/// The `n`-qubit discriminator template on `n + 1` qubits: the generator
/// layout widened by one qubit (the readout ancilla, index `n`), followed by
/// one local Y-rotation on each of the `n` input qubits. Slots
/// `0 .. 2^{n+1} - 1` are the widened cascade, the final `n` slots the local
/// layer.
pub fn build_discriminator(n: usize) -> CircuitTemplate {
    assert!(n >= 1, "discriminator needs at least one input qubit");
    let mut t = CircuitTemplate::new(n + 1);
    for gate in build_generator(n + 1).gates() {
        match *gate {
            Gate::RotationY { target, slot } => t.push_rotation(target, slot),
            Gate::ControlledNot { control, target } => t.push_controlled_not(control, target),
        }
        .expect("generator gates are in range");
    }
    let cascade_slots = generator_param_count(n + 1);
    for q in 0..n {
        t.push_rotation(q, cascade_slots + q).expect("input qubits are in range");
    }
    debug_assert_eq!(t.count_rotations(), discriminator_param_count(n));
    debug_assert_eq!(t.count_controlled_nots(), discriminator_cx_count(n));
    t
}

/// Run the generator on |0...0>.
pub fn generator_state<T: Real>(n: usize, params: &[T]) -> Result<StateVector<T>> {
    build_generator(n).run(params)
}

/// Unnormalized Hadamard matrix of a power-of-two order `k`, the linear map
/// between a UCR's slot angles and its per-branch effective angles.
/// Satisfies `H_k H_k = k I`, so the inverse is `H_k / k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleTransform {
    order: usize,
    /// Row-major entries, each +1 or -1.
    matrix: Vec<i32>,
}

impl AngleTransform {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || !order.is_power_of_two() {
            return Err(Error::invalid(format!(
                "Hadamard order must be a power of two, got {order}"
            )));
        }
        let mut matrix = vec![0i32; order * order];
        for r in 0..order {
            for c in 0..order {
                // Sylvester construction: sign = parity of AND of indices.
                let sign = if (r & c).count_ones() % 2 == 0 { 1 } else { -1 };
                matrix[r * order + c] = sign;
            }
        }
        Ok(AngleTransform { order, matrix })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, row: usize, col: usize) -> i32 {
        self.matrix[row * self.order + col]
    }

    /// `H_k v`.
    pub fn apply<T: Real>(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.order {
            return Err(Error::DimensionMismatch(format!(
                "transform of order {} applied to length {}",
                self.order,
                v.len()
            )));
        }
        Ok((0..self.order)
            .map(|r| {
                (0..self.order)
                    .map(|c| {
                        if self.entry(r, c) > 0 {
                            v[c]
                        } else {
                            -v[c]
                        }
                    })
                    .sum()
            })
            .collect())
    }

    /// `H_k^{-1} v = H_k v / k`.
    pub fn apply_inverse<T: Real>(&self, v: &[T]) -> Result<Vec<T>> {
        let k = T::of(self.order as f64);
        Ok(self.apply(v)?.into_iter().map(|x| x / k).collect())
    }
}

/// Per-branch action of an `m`-control UCR fragment: for control basis value
/// `l` (bits read `c0..c_{m-1}`, `c0` highest), the target sees a Y-rotation
/// by `sum_j signs[l][j] * slot_j`, then an X flip iff `flip[l]`.
#[derive(Debug, Clone)]
pub struct UcrBranchMap {
    /// `2^m x 2^m` entries of +1/-1: row = branch, column = slot.
    signs: Vec<Vec<i8>>,
    /// Residual X flip per branch (true exactly when the top control bit is 1).
    flips: Vec<bool>,
}

impl UcrBranchMap {
    pub fn branches(&self) -> usize {
        self.signs.len()
    }

    pub fn sign(&self, branch: usize, slot: usize) -> i8 {
        self.signs[branch][slot]
    }

    pub fn flip(&self, branch: usize) -> bool {
        self.flips[branch]
    }

    /// Effective rotation angle of `branch` for the given slot angles.
    pub fn branch_angle<T: Real>(&self, branch: usize, slots: &[T]) -> T {
        self.signs[branch]
            .iter()
            .zip(slots)
            .map(|(&sgn, &s)| if sgn > 0 { s } else { -s })
            .sum()
    }

    /// Invert the map: slot angles realizing the given per-branch angles.
    /// The sign matrix is a column permutation of a Hadamard matrix times a
    /// diagonal of signs, so `W^T W = 2^m I` and the inverse is `W^T / 2^m`.
    pub fn slots_from_branch_angles<T: Real>(&self, branch_angles: &[T]) -> Vec<T> {
        let k = self.branches();
        let scale = T::of(k as f64);
        (0..k)
            .map(|j| {
                let mut acc = T::zero();
                for (l, angles_row) in self.signs.iter().enumerate() {
                    acc = if angles_row[j] > 0 {
                        acc + branch_angles[l]
                    } else {
                        acc - branch_angles[l]
                    };
                }
                acc / scale
            })
            .collect()
    }
}

/// Walk the UCR fragment once per control branch, accumulating each slot's
/// sign (flipped by every CNOT whose control bit is set so far) and the
/// final flip parity.
pub fn ucr_branch_map(num_controls: usize) -> UcrBranchMap {
    assert!(num_controls >= 1, "a UCR needs at least one control");
    let m = num_controls;
    let controls: Vec<usize> = (0..m).collect();
    let fragment = build_ucr(m + 1, &controls, m, 0).expect("canonical UCR layout");
    let k = 1usize << m;
    let mut signs = Vec::with_capacity(k);
    let mut flips = Vec::with_capacity(k);
    for l in 0..k {
        let mut row = vec![0i8; k];
        let mut parity = false;
        for gate in fragment.gates() {
            match *gate {
                Gate::RotationY { slot, .. } => row[slot] = if parity { -1 } else { 1 },
                Gate::ControlledNot { control, .. } => {
                    if (l >> (m - 1 - control)) & 1 == 1 {
                        parity = !parity;
                    }
                }
            }
        }
        debug_assert_eq!(parity, (l >> (m - 1)) & 1 == 1);
        signs.push(row);
        flips.push(parity);
    }
    UcrBranchMap { signs, flips }
}

/// Angles recovered by [`state_to_params`]. When `negated` is true the
/// angles prepare the negative of the requested state (the sign-flipped
/// chart was the one whose angles all fit the canonical range).
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredParams<T: Real = f64> {
    pub angles: Vec<T>,
    pub negated: bool,
}

/// Exact inverse of [`generator_state`]: rotation angles under which the
/// generator prepares the given unit vector.
///
/// Works level by level from the deepest UCR upward: each adjacent amplitude
/// pair collapses to its norm, the pair's direction fixes the branch angle
/// (read through the branch's residual flip), and the branch angles map back
/// to slot angles through the inverse of the fragment's sign matrix.
/// Zero-norm pairs are degenerate branches and get angle 0.
///
/// Branch angles can need the full `[-2pi, 2pi)` range (Y-rotations have
/// period 4pi), so exact recovery may leave the canonical `[-pi, pi)` range.
/// If the recovery fits the canonical range it is returned directly; else if
/// recovering the negated state fits, that is returned with `negated` set;
/// otherwise the exact out-of-range recovery is returned.
pub fn state_to_params<T: Real>(target: &[T]) -> Result<RecoveredParams<T>> {
    let dim = target.len();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::invalid(format!(
            "target length must be a power of two >= 2, got {dim}"
        )));
    }
    let n = norm(target);
    if (n - T::one()).abs() > T::unit_norm_tolerance() {
        return Err(Error::NotNormalized { norm: n.to_f64().unwrap_or(f64::NAN) });
    }

    let direct = recover_angles(target);
    if in_canonical_range(&direct) {
        return Ok(RecoveredParams { angles: direct, negated: false });
    }
    let negated_target: Vec<T> = target.iter().map(|&x| -x).collect();
    let flipped = recover_angles(&negated_target);
    if in_canonical_range(&flipped) {
        return Ok(RecoveredParams { angles: flipped, negated: true });
    }
    Ok(RecoveredParams { angles: direct, negated: false })
}

fn in_canonical_range<T: Real>(angles: &[T]) -> bool {
    angles.iter().all(|&a| -T::PI() <= a && a < T::PI())
}

/// Wrap into `[-2pi, 2pi)`, the period of a Y-rotation.
fn wrap_two_turns<T: Real>(x: T) -> T {
    let period = T::of(4.0) * T::PI();
    let shifted = x + T::of(2.0) * T::PI();
    x - period * (shifted / period).floor()
}

fn recover_angles<T: Real>(target: &[T]) -> Vec<T> {
    let n_qubits = target.len().trailing_zeros() as usize;
    let two = T::of(2.0);
    let mut work: Vec<T> = target.to_vec();
    // per_level[i] holds the slot angles for level n_qubits-1-i
    let mut per_level: Vec<Vec<T>> = Vec::new();
    for m in (1..n_qubits).rev() {
        let map = ucr_branch_map(m);
        let k = 1usize << m;
        let mut branch_angles = vec![T::zero(); k];
        let mut reduced = vec![T::zero(); k];
        for l in 0..k {
            let a = work[2 * l];
            let b = work[2 * l + 1];
            let r = a.hypot(b);
            reduced[l] = r;
            branch_angles[l] = if r == T::zero() {
                T::zero()
            } else if map.flip(l) {
                two * a.atan2(b)
            } else {
                two * b.atan2(a)
            };
        }
        let slots: Vec<T> = map
            .slots_from_branch_angles(&branch_angles)
            .into_iter()
            .map(wrap_two_turns)
            .collect();
        per_level.push(slots);
        work = reduced;
    }
    let mut angles = Vec::with_capacity(target.len() - 1);
    angles.push(wrap_two_turns(two * work[1].atan2(work[0])));
    for slots in per_level.into_iter().rev() {
        angles.extend(slots);
    }
    angles
}
