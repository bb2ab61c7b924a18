//! Real-amplitude statevector simulation.
//!
//! Everything in this crate works in the real Hilbert space spanned by
//! computational basis states: amplitudes are plain floats and the only
//! gates are Y-rotations and CNOTs, which preserve realness.
//!
//! # Basis convention
//!
//! Qubit `q0` is the **most significant bit** of the amplitude index, so for
//! two qubits index 0 is |00>, 1 is |01>, 2 is |10>, 3 is |11>, and qubit
//! `j` of an `n`-qubit register owns bit `n - 1 - j` of the index.
//!
//! # Rotation convention
//!
//! `Ry(theta) = [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]]`,
//! so `Ry(theta)|0> = cos(theta/2)|0> + sin(theta/2)|1>`.

use crate::error::{Error, Result};
use crate::scalar::{norm, Real};

/// Unitary-free circuit description: rotation angles are referenced by slot
/// index into a parameter vector supplied at run time, so one template can be
/// evaluated under many parameter sets without rebuilding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    RotationY { target: usize, slot: usize },
    ControlledNot { control: usize, target: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitTemplate {
    num_qubits: usize,
    num_slots: usize,
    gates: Vec<Gate>,
}

impl CircuitTemplate {
    pub fn new(num_qubits: usize) -> Self {
        assert!(num_qubits >= 1, "template needs at least one qubit");
        CircuitTemplate { num_qubits, num_slots: 0, gates: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of parameter slots referenced (max slot index + 1).
    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn count_rotations(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::RotationY { .. })).count()
    }

    pub fn count_controlled_nots(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::ControlledNot { .. })).count()
    }

    pub fn push_rotation(&mut self, target: usize, slot: usize) -> Result<()> {
        self.check_qubit(target)?;
        self.num_slots = self.num_slots.max(slot + 1);
        self.gates.push(Gate::RotationY { target, slot });
        Ok(())
    }

    pub fn push_controlled_not(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::invalid("CX control and target must differ"));
        }
        self.gates.push(Gate::ControlledNot { control, target });
        Ok(())
    }

    /// Append another template's gates; both must be declared on the same
    /// register width.
    pub fn append(&mut self, other: &CircuitTemplate) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "cannot append a {}-qubit fragment to a {}-qubit template",
                other.num_qubits, self.num_qubits
            )));
        }
        self.num_slots = self.num_slots.max(other.num_slots);
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// Apply the circuit in place. `params.len()` must cover every slot.
    pub fn apply<T: Real>(&self, state: &mut StateVector<T>, params: &[T]) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "template on {} qubits applied to a {}-qubit state",
                self.num_qubits,
                state.num_qubits()
            )));
        }
        if params.len() != self.num_slots {
            return Err(Error::DimensionMismatch(format!(
                "template has {} parameter slots, got {} values",
                self.num_slots,
                params.len()
            )));
        }
        for gate in &self.gates {
            match *gate {
                Gate::RotationY { target, slot } => state.apply_ry(target, params[slot])?,
                Gate::ControlledNot { control, target } => state.apply_cx(control, target)?,
            }
        }
        Ok(())
    }

    /// Run the circuit on |0...0>.
    pub fn run<T: Real>(&self, params: &[T]) -> Result<StateVector<T>> {
        let mut state = StateVector::zero_state(self.num_qubits);
        self.apply(&mut state, params)?;
        Ok(state)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            Err(Error::QubitOutOfRange { index: q, num_qubits: self.num_qubits })
        } else {
            Ok(())
        }
    }
}

/// Real statevector over `num_qubits` qubits, kept unit-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real = f64> {
    num_qubits: usize,
    amps: Vec<T>,
}

impl<T: Real> StateVector<T> {
    /// |0...0>.
    pub fn zero_state(num_qubits: usize) -> Self {
        assert!(
            (1..=28).contains(&num_qubits),
            "supported register sizes are 1..=28 qubits, got {num_qubits}"
        );
        let mut amps = vec![T::zero(); 1 << num_qubits];
        amps[0] = T::one();
        StateVector { num_qubits, amps }
    }

    /// Wrap explicit amplitudes. The length must be a power of two (at least
    /// 2) and the Euclidean norm must already be 1 within tolerance; the
    /// amplitudes are stored as given, not renormalized.
    pub fn from_amplitudes(amps: Vec<T>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count must be a power of two >= 2, got {dim}"
            )));
        }
        let n = norm(&amps);
        if (n - T::one()).abs() > T::unit_norm_tolerance() {
            return Err(Error::NotNormalized { norm: n.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(StateVector { num_qubits: dim.trailing_zeros() as usize, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[T] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<T> {
        self.amps
    }

    pub fn norm(&self) -> T {
        norm(&self.amps)
    }

    /// Bit position of `qubit` inside an amplitude index (q0 = MSB).
    fn bit(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, num_qubits: self.num_qubits });
        }
        Ok(self.num_qubits - 1 - qubit)
    }

    /// In-place Y-rotation of `target` by `angle`.
    pub fn apply_ry(&mut self, target: usize, angle: T) -> Result<()> {
        let stride = 1usize << self.bit(target)?;
        let half = angle * T::of(0.5);
        let (c, s) = (half.cos(), half.sin());
        let mut base = 0;
        while base < self.amps.len() {
            for i in base..base + stride {
                let j = i + stride;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = c * a - s * b;
                self.amps[j] = s * a + c * b;
            }
            base += stride << 1;
        }
        Ok(())
    }

    /// In-place CNOT flipping `target` where `control` is |1>.
    pub fn apply_cx(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(Error::invalid("CX control and target must differ"));
        }
        let cmask = 1usize << self.bit(control)?;
        let tmask = 1usize << self.bit(target)?;
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    /// Expectation value of Pauli Z on one qubit: sum of |amp|^2 with sign
    /// +1 where the qubit reads 0 and -1 where it reads 1.
    pub fn expect_z(&self, qubit: usize) -> Result<T> {
        let mask = 1usize << self.bit(qubit)?;
        let mut acc = T::zero();
        for (i, &a) in self.amps.iter().enumerate() {
            let p = a * a;
            acc = if i & mask == 0 { acc + p } else { acc - p };
        }
        Ok(acc)
    }
}
