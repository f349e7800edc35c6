//! Causal-inequality game, the quantum switch and temporal-order CHSH.

use crate::linalg::{hermitian_eigen, kron, partial_trace, pauli, ComplexMatrix, ComplexVector, SubsystemDims};
use crate::ops::{choi_vector_of_unitary, ChoiConvention, ChoiOperator};
use crate::process::{probability, ProcessMatrix};
use crate::{Error, Result, C64, TOL};

fn sign(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_bit(b: u8) -> Result<()> {
    if b > 1 {
        return Err(Error::Parameter(format!("{b} is not a bit")));
    }
    Ok(())
}

/// ½[𝟙 + s·P]
fn half_plus(s: f64, p: &ComplexMatrix) -> ComplexMatrix {
    (&ComplexMatrix::identity(2) + &p.scale_real(s)).scale_real(0.5)
}

/// Alice measures her input in z and reports x, then encodes a in z.
/// Bob (b' = 1) measures his input in z; (b' = 0) measures in x and encodes
/// b ⊕ y in z. Bit 0 is |0>, bit 1 is |1>.
#[derive(Debug, Clone)]
pub struct GameStrategy {
    bob_state: ComplexMatrix,
}

impl Default for GameStrategy {
    fn default() -> Self {
        GameStrategy { bob_state: ComplexMatrix::identity(2).scale_real(0.5) }
    }
}

impl GameStrategy {
    /// `bob_state` is what Bob sends out when b' = 1.
    pub fn with_bob_state(bob_state: ComplexMatrix) -> Result<Self> {
        if bob_state.rows() != 2 || bob_state.cols() != 2 {
            return Err(Error::Dimension("Bob's output state is a qubit".into()));
        }
        let low = hermitian_eigen(&bob_state)?.values[0];
        if low < -TOL || (bob_state.trace().re - 1.0).abs() > TOL {
            return Err(Error::NotPositive(low));
        }
        Ok(GameStrategy { bob_state })
    }

    pub fn bob_state(&self) -> &ComplexMatrix {
        &self.bob_state
    }

    /// M(x, a) = ¼[𝟙 + (−1)^x σ_z] ⊗ [𝟙 + (−1)^a σ_z]
    pub fn alice_choi(&self, x: u8, a: u8) -> Result<ChoiOperator> {
        check_bit(x)?;
        check_bit(a)?;
        let z = pauli::z();
        let m = kron(&half_plus(sign(x), &z), &half_plus(sign(a), &z).scale_real(2.0)).scale_real(0.5);
        ChoiOperator::new(2, 2, m, ChoiConvention::Transposed)
    }

    /// N(y, b, b') = b'·½[𝟙+(−1)^y σ_z]⊗ρ + (b'⊕1)·¼[𝟙+(−1)^y σ_x]⊗[𝟙+(−1)^{b+y} σ_z]
    pub fn bob_choi(&self, y: u8, b: u8, bp: u8) -> Result<ChoiOperator> {
        check_bit(y)?;
        check_bit(b)?;
        check_bit(bp)?;
        let m = if bp == 1 {
            kron(&half_plus(sign(y), &pauli::z()), &self.bob_state)
        } else {
            kron(&half_plus(sign(y), &pauli::x()), &half_plus(sign(b ^ y), &pauli::z()))
        };
        ChoiOperator::new(2, 2, m, ChoiConvention::Transposed)
    }
}

fn check_qubits(w: &ProcessMatrix) -> Result<()> {
    if w.dims() != [2; 4] {
        return Err(Error::Dimension(format!("game needs qubit labs, got {:?}", w.dims())));
    }
    Ok(())
}

/// P(x, y | a, b, b')
pub fn game_probability(w: &ProcessMatrix, s: &GameStrategy, x: u8, y: u8, a: u8, b: u8, bp: u8) -> Result<f64> {
    check_qubits(w)?;
    probability(w, &s.alice_choi(x, a)?, &s.bob_choi(y, b, bp)?)
}

/// ½[P(x = b | b' = 0) + P(y = a | b' = 1)] with uniform a, b.
pub fn success_probability(w: &ProcessMatrix, s: &GameStrategy) -> Result<f64> {
    let (alice_guess, bob_guess) = guess_probabilities(w, s)?;
    Ok(0.5 * (alice_guess + bob_guess))
}

/// (P(x = b | b' = 0), P(y = a | b' = 1)), averaged over uniform a, b.
pub fn guess_probabilities(w: &ProcessMatrix, s: &GameStrategy) -> Result<(f64, f64)> {
    check_qubits(w)?;
    let mut alice_guess = 0.0;
    let mut bob_guess = 0.0;
    for a in 0..2u8 {
        for b in 0..2u8 {
            for y in 0..2u8 {
                alice_guess += game_probability(w, s, b, y, a, b, 0)?;
            }
            for x in 0..2u8 {
                bob_guess += game_probability(w, s, x, a, a, b, 1)?;
            }
        }
    }
    Ok((alice_guess / 4.0, bob_guess / 4.0))
}

/// W̄^{B_I B_O}(a) = Tr_{A_I A_O}[W (Σ_x M(x, a) ⊗ 𝟙)]
pub fn reduced_for_bob(w: &ProcessMatrix, s: &GameStrategy, a: u8) -> Result<ComplexMatrix> {
    check_qubits(w)?;
    let m = &s.alice_choi(0, a)?.matrix().clone() + s.alice_choi(1, a)?.matrix();
    let prod = w.matrix() * &kron(&m, &ComplexMatrix::identity(4));
    partial_trace(&prod, &w.subsystem_dims(), &[2, 3])
}

/// ½[𝟙 + (−1)^bit σ_z/√2] ⊗ 𝟙, what either party sees of the OCB process
/// once the other's instrument element is fixed.
pub fn ocb_reduced_closed_form(bit: u8) -> Result<ComplexMatrix> {
    check_bit(bit)?;
    Ok(kron(&half_plus(sign(bit) * std::f64::consts::FRAC_1_SQRT_2, &pauli::z()), &ComplexMatrix::identity(2)))
}

/// W̄^{A_I A_O}(b, b') = Tr_{B_I B_O}[W (𝟙 ⊗ Σ_y N(y, b, b'))]
pub fn reduced_for_alice(w: &ProcessMatrix, s: &GameStrategy, b: u8, bp: u8) -> Result<ComplexMatrix> {
    check_qubits(w)?;
    let n = &s.bob_choi(0, b, bp)?.matrix().clone() + s.bob_choi(1, b, bp)?.matrix();
    let prod = w.matrix() * &kron(&ComplexMatrix::identity(4), &n);
    partial_trace(&prod, &w.subsystem_dims(), &[0, 1])
}

/// Target state and control amplitudes of a switch.
#[derive(Debug, Clone)]
pub struct SwitchSpec {
    target: ComplexVector,
    control: (C64, C64),
}

impl SwitchSpec {
    pub fn new(target: ComplexVector, control: (C64, C64)) -> Result<Self> {
        if target.dim() != 2 {
            return Err(Error::Dimension("switch target is a qubit".into()));
        }
        if (target.norm() - 1.0).abs() > TOL {
            return Err(Error::Parameter("target state is not normalized".into()));
        }
        if (control.0.norm_sqr() + control.1.norm_sqr() - 1.0).abs() > TOL {
            return Err(Error::Parameter("control amplitudes are not normalized".into()));
        }
        Ok(SwitchSpec { target, control })
    }

    /// Equal control amplitudes 1/√2.
    pub fn balanced(target: ComplexVector) -> Result<Self> {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new(target, (s, s))
    }

    pub fn target(&self) -> &ComplexVector {
        &self.target
    }

    pub fn control(&self) -> (C64, C64) {
        self.control
    }
}

fn check_unitary(u: &ComplexMatrix) -> Result<()> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(Error::Dimension("expected a 2x2 unitary".into()));
    }
    let err = u.unitarity_error();
    if err > TOL {
        return Err(Error::NotUnitary(err));
    }
    Ok(())
}

/// Control amplitude `c` attached to a target vector, as target ⊗ control.
fn attach_control(t: &ComplexVector, c0: C64, c1: C64) -> ComplexVector {
    let mut out = ComplexVector::zeros(4);
    for i in 0..2 {
        out[i * 2] += t[i] * c0;
        out[i * 2 + 1] += t[i] * c1;
    }
    out
}

/// c₀ U_B U_A|ψ>⊗|0> + c₁ U_A U_B|ψ>⊗|1>, ordered target ⊗ control.
pub fn switch_supermap_state(ua: &ComplexMatrix, ub: &ComplexMatrix, spec: &SwitchSpec) -> Result<ComplexVector> {
    check_unitary(ua)?;
    check_unitary(ub)?;
    let ba = (ub * ua).apply(&spec.target);
    let ab = (ua * ub).apply(&spec.target);
    let (c0, c1) = spec.control;
    Ok(attach_control(&ba, c0, C64::new(0.0, 0.0)).add(&attach_control(&ab, C64::new(0.0, 0.0), c1)))
}

/// Labels of the switch process vector.
pub const SWITCH_DIMS: [usize; 6] = [2; 6];

/// |w> over A_I ⊗ A_O ⊗ B_I ⊗ B_O ⊗ C_t ⊗ C_c with unnormalized links:
/// c₀|ψ>^{A_I}|𝟙>>^{A_O B_I}|𝟙>>^{B_O C_t}|0> + c₁|ψ>^{B_I}|𝟙>>^{B_O A_I}|𝟙>>^{A_O C_t}|1>.
pub fn switch_process_vector(spec: &SwitchSpec) -> ComplexVector {
    let (c0, c1) = spec.control;
    let psi = &spec.target;
    let mut w = ComplexVector::zeros(64);
    let idx = |d: [usize; 6]| d.iter().fold(0, |acc, &x| acc * 2 + x);
    for ai in 0..2 {
        for ao in 0..2 {
            for bo in 0..2 {
                // A first: A_I = ψ, A_O → B_I, B_O → C_t.
                w[idx([ai, ao, ao, bo, bo, 0])] += c0 * psi[ai];
                // B first: B_I = ψ, B_O → A_I, A_O → C_t.
                w[idx([ai, ao, bo, ai, ao, 1])] += c1 * psi[bo];
            }
        }
    }
    w
}

/// (<<A*| ⊗ <<B*|) |w>, returned on C_t ⊗ C_c. `a` and `b` are Choi vectors
/// |U*>> of the agents' unitaries.
pub fn contract_switch(w: &ComplexVector, a: &ComplexVector, b: &ComplexVector) -> Result<ComplexVector> {
    if w.dim() != 64 || a.dim() != 4 || b.dim() != 4 {
        return Err(Error::Dimension("switch contraction needs 64-, 4- and 4-dimensional vectors".into()));
    }
    let mut out = ComplexVector::zeros(4);
    for i in 0..64 {
        let ab = i >> 2;
        let (av, bv) = (ab >> 2, ab & 3);
        out[i & 3] += a[av].conj() * b[bv].conj() * w[i];
    }
    Ok(out)
}

/// Switch output computed through the process vector.
pub fn switch_via_process(ua: &ComplexMatrix, ub: &ComplexMatrix, spec: &SwitchSpec) -> Result<ComplexVector> {
    let w = switch_process_vector(spec);
    contract_switch(&w, &choi_vector_of_unitary(ua)?, &choi_vector_of_unitary(ub)?)
}

/// Project the control (last qubit) on |±>; returns the normalized target
/// and the outcome probability.
pub fn control_measurement(state: &ComplexVector, sign: i8) -> Result<(ComplexVector, f64)> {
    let s = match sign {
        1 => 1.0,
        -1 => -1.0,
        _ => return Err(Error::Parameter(format!("sign must be ±1, got {sign}"))),
    };
    if !state.dim().is_multiple_of(2) || state.dim() == 0 {
        return Err(Error::Dimension("state must end with a qubit control".into()));
    }
    let dt = state.dim() / 2;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let target = ComplexVector::new((0..dt).map(|t| (state[2 * t] + state[2 * t + 1] * s) * r).collect());
    let p = target.norm().powi(2);
    if p <= 1e-24 {
        return Err(Error::ZeroProbability);
    }
    Ok((target.scale_real(1.0 / p.sqrt()), p))
}

/// Probability <ψ|Π|ψ> of a generic measurement element on target ⊗ control.
pub fn charlie_probability(state: &ComplexVector, projector: &ComplexMatrix) -> Result<f64> {
    if projector.rows() != state.dim() || projector.cols() != state.dim() {
        return Err(Error::Dimension("projector does not match the switch output".into()));
    }
    Ok(state.inner(&projector.apply(state)).re)
}

fn check_dichotomic(o: &ComplexMatrix) -> Result<()> {
    if o.rows() != 2 || o.cols() != 2 || !o.is_hermitian(TOL) {
        return Err(Error::NotDichotomic);
    }
    if !(o * o).approx_eq(&ComplexMatrix::identity(2), TOL) {
        return Err(Error::NotDichotomic);
    }
    Ok(())
}

/// CHSH settings: [A_0, A_1, B_0, B_1].
pub fn chsh_settings() -> [ComplexMatrix; 4] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (y, z) = (pauli::y(), pauli::z());
    [(&y - &z).scale_real(r), (&y + &z).scale_real(r), y, z]
}

/// E(0,0) + E(0,1) + E(1,0) − E(1,1) on a density matrix.
pub fn chsh_value_mixed(rho: &ComplexMatrix, settings: &[ComplexMatrix; 4]) -> Result<f64> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(Error::Dimension("CHSH needs a two-qubit state".into()));
    }
    for o in settings {
        check_dichotomic(o)?;
    }
    let e = |i: usize, j: usize| rho.trace_product(&kron(&settings[i], &settings[2 + j])).re;
    Ok(e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1))
}

pub fn chsh_value(state: &ComplexVector, settings: &[ComplexMatrix; 4]) -> Result<f64> {
    if state.dim() != 4 {
        return Err(Error::Dimension("CHSH needs a two-qubit state".into()));
    }
    chsh_value_mixed(&state.projector(), settings)
}

/// Normalized 1/√2[U_{B1}U_{A1}|ψ₁> ⊗ U_{A2}U_{B2}|ψ₂> ± U_{A1}U_{B1}|ψ₁> ⊗ U_{B2}U_{A2}|ψ₂>]
/// on S₁ ⊗ S₂.
#[allow(clippy::too_many_arguments)]
pub fn temporal_order_state(
    u_a1: &ComplexMatrix,
    u_b1: &ComplexMatrix,
    u_a2: &ComplexMatrix,
    u_b2: &ComplexMatrix,
    psi1: &ComplexVector,
    psi2: &ComplexVector,
    sign: i8,
) -> Result<ComplexVector> {
    for u in [u_a1, u_b1, u_a2, u_b2] {
        check_unitary(u)?;
    }
    let s = match sign {
        1 => 1.0,
        -1 => -1.0,
        _ => return Err(Error::Parameter(format!("sign must be ±1, got {sign}"))),
    };
    let first = (u_b1 * u_a1).apply(psi1).kron(&(u_a2 * u_b2).apply(psi2));
    let second = (u_a1 * u_b1).apply(psi1).kron(&(u_b2 * u_a2).apply(psi2));
    let v = first.add(&second.scale_real(s));
    if v.norm() < 1e-12 {
        return Err(Error::Degenerate("the two temporal orders cancel".into()));
    }
    v.normalized()
}

/// U_{A1} = U_{B2} = H, U_{A2} = U_{B1} = σ_z. On |↑> the Hadamard acts like
/// (𝟙+σ_x)/√2, which is what the example needs, and it is unitary.
pub fn temporal_order_unitaries() -> [ComplexMatrix; 4] {
    [pauli::hadamard(), pauli::z(), pauli::z(), pauli::hadamard()]
}

/// Traced-out control of the balanced switch: ½(BA ρ A†B† + AB ρ B†A†).
pub fn switch_reduced_target(ua: &ComplexMatrix, ub: &ComplexMatrix, spec: &SwitchSpec) -> Result<ComplexMatrix> {
    let state = switch_supermap_state(ua, ub, spec)?;
    partial_trace(&state.projector(), &SubsystemDims::new(&[2, 2])?, &[0])
}
