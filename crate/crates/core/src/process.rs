//! Bipartite process matrices on A_I ⊗ A_O ⊗ B_I ⊗ B_O.

use rand::Rng;

use crate::linalg::{
    hermitian_eigen, kron, kron_all, partial_trace, pauli, permute_subsystems, ComplexMatrix, SubsystemDims,
};
use crate::ops::{ChoiConvention, ChoiOperator};
use crate::{random, Error, Result, C64, TOL};

/// Factor positions.
pub const A_I: usize = 0;
pub const A_O: usize = 1;
pub const B_I: usize = 2;
pub const B_O: usize = 3;

#[derive(Debug, Clone)]
pub struct ProcessMatrix {
    dims: [usize; 4],
    matrix: ComplexMatrix,
}

impl ProcessMatrix {
    /// Checked constructor: Hermitian, PSD and Tr W = d_AO d_BO.
    pub fn new(dims: [usize; 4], matrix: ComplexMatrix) -> Result<Self> {
        let w = Self::unchecked(dims, matrix)?;
        let herr = w.matrix.hermiticity_error();
        if herr > TOL {
            return Err(Error::NotHermitian(herr));
        }
        let low = hermitian_eigen(&w.matrix)?.values[0];
        if low < -TOL {
            return Err(Error::NotPositive(low));
        }
        let expected = (dims[A_O] * dims[B_O]) as f64;
        let dev = (w.matrix.trace() - C64::new(expected, 0.0)).norm();
        if dev > TOL * expected {
            return Err(Error::Parameter(format!("trace deviates from {expected} by {dev:.3e}")));
        }
        Ok(w)
    }

    /// Shape check only. Used to inspect candidate matrices that may be invalid.
    pub fn unchecked(dims: [usize; 4], matrix: ComplexMatrix) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.contains(&0) || matrix.rows() != n || matrix.cols() != n {
            return Err(Error::Dimension(format!(
                "process matrix is {}x{}, labels {dims:?} need {n}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(ProcessMatrix { dims, matrix })
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn subsystem_dims(&self) -> SubsystemDims {
        SubsystemDims::new(&self.dims).expect("dims are positive")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

fn check_party(choi: &ChoiOperator, d_in: usize, d_out: usize, who: &str) -> Result<()> {
    if choi.convention() != ChoiConvention::Transposed {
        return Err(Error::Convention("TRANSPOSED"));
    }
    if choi.d_in() != d_in || choi.d_out() != d_out {
        return Err(Error::Dimension(format!(
            "{who}'s Choi is {}->{}, process expects {d_in}->{d_out}",
            choi.d_in(),
            choi.d_out()
        )));
    }
    Ok(())
}

/// Tr[W (M ⊗ N)] for TRANSPOSED Choi operators.
pub fn probability(w: &ProcessMatrix, alice: &ChoiOperator, bob: &ChoiOperator) -> Result<f64> {
    let [ai, ao, bi, bo] = w.dims;
    check_party(alice, ai, ao, "Alice")?;
    check_party(bob, bi, bo, "Bob")?;
    let p = w.matrix.trace_product(&kron(alice.matrix(), bob.matrix()));
    if p.im.abs() > 1e-8 {
        return Err(Error::NotHermitian(p.im.abs()));
    }
    Ok(p.re)
}

/// W = ρ^{A_I B_I} ⊗ 𝟙^{A_O B_O}
pub fn state_process(rho: &ComplexMatrix, dims: [usize; 4]) -> Result<ProcessMatrix> {
    let [ai, ao, bi, bo] = dims;
    if rho.rows() != ai * bi || rho.cols() != ai * bi {
        return Err(Error::Dimension(format!("state must live on A_I ⊗ B_I of dimension {}", ai * bi)));
    }
    check_density(rho)?;
    let full = kron(rho, &ComplexMatrix::identity(ao * bo));
    let labels = SubsystemDims::new(&[ai, bi, ao, bo])?;
    let (m, _) = permute_subsystems(&full, &labels, &[0, 2, 1, 3])?;
    ProcessMatrix::new(dims, m)
}

fn check_density(rho: &ComplexMatrix) -> Result<()> {
    let herr = rho.hermiticity_error();
    if herr > TOL {
        return Err(Error::NotHermitian(herr));
    }
    let low = hermitian_eigen(rho)?.values[0];
    if low < -TOL {
        return Err(Error::NotPositive(low));
    }
    let dev = (rho.trace().re - 1.0).abs();
    if dev > TOL {
        return Err(Error::Parameter(format!("state trace deviates from 1 by {dev:.3e}")));
    }
    Ok(())
}

/// Direction of the channel in a one-way signalling process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signaling {
    /// Channel B_O → A_I, Bob's input prepared in ρ, Alice's output discarded.
    BobToAlice,
    /// Channel A_O → B_I, Alice's input prepared in ρ, Bob's output discarded.
    AliceToBob,
}

/// W = 𝟙^{A_O} ⊗ (C^{B_O A_I})^T ⊗ ρ^{B_I}, with the discarded output of the
/// same dimension as the channel input.
pub fn channel_process(rho_b: &ComplexMatrix, channel: &ChoiOperator) -> Result<ProcessMatrix> {
    channel_process_with(rho_b, channel, Signaling::BobToAlice, channel.d_in())
}

pub fn channel_process_with(
    rho: &ComplexMatrix,
    channel: &ChoiOperator,
    direction: Signaling,
    d_discarded: usize,
) -> Result<ProcessMatrix> {
    check_density(rho)?;
    let marginal = channel.output_marginal();
    let dev = marginal.max_abs_diff(&ComplexMatrix::identity(channel.d_in()));
    if dev > TOL {
        return Err(Error::NotTracePreserving(dev));
    }
    // PLAIN Choi = (TRANSPOSED Choi)^T, ordered (channel input, channel output).
    let c = channel.plain_matrix();
    let (cin, cout) = (channel.d_in(), channel.d_out());
    let d_rho = rho.rows();
    let id = ComplexMatrix::identity(d_discarded);
    match direction {
        Signaling::BobToAlice => {
            // Built as A_O ⊗ B_O ⊗ A_I ⊗ B_I, then reordered.
            let full = kron_all(&[&id, &c, rho]);
            let labels = SubsystemDims::new(&[d_discarded, cin, cout, d_rho])?;
            let (m, _) = permute_subsystems(&full, &labels, &[2, 0, 3, 1])?;
            ProcessMatrix::new([cout, d_discarded, d_rho, cin], m)
        }
        Signaling::AliceToBob => {
            let full = kron_all(&[rho, &c, &id]);
            ProcessMatrix::new([d_rho, cin, cout, d_discarded], full)
        }
    }
}

/// q·W1 + (1−q)·W2
pub fn causal_mixture(w1: &ProcessMatrix, w2: &ProcessMatrix, q: f64) -> Result<ProcessMatrix> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Parameter(format!("mixing weight {q} outside [0, 1]")));
    }
    if w1.dims != w2.dims {
        return Err(Error::Dimension("mixed processes have different labels".into()));
    }
    let m = &w1.matrix.scale_real(q) + &w2.matrix.scale_real(1.0 - q);
    Ok(ProcessMatrix { dims: w1.dims, matrix: m })
}

/// True when W = 𝟙^{k}/d_k ⊗ Tr_k W for the factor k (within tolerance).
/// With k = A_O this is the A⊀B type (Alice cannot signal to Bob); with
/// k = B_O the B⊀A type. Diagnostic only: it does not decide causal
/// separability.
pub fn is_trivial_on(w: &ProcessMatrix, factor: usize, tol: f64) -> Result<bool> {
    if factor > 3 {
        return Err(Error::IndexOutOfRange { index: factor, count: 4 });
    }
    let dims = w.subsystem_dims();
    let keep: Vec<usize> = (0..4).filter(|&k| k != factor).collect();
    let reduced = partial_trace(&w.matrix, &dims, &keep)?;
    let d = w.dims[factor];
    let with_id = kron(&ComplexMatrix::identity(d).scale_real(1.0 / d as f64), &reduced);
    let mut order = vec![factor];
    order.extend(&keep);
    let labels = SubsystemDims::new(&order.iter().map(|&k| w.dims[k]).collect::<Vec<_>>())?;
    let mut inverse = [0usize; 4];
    for (pos, &k) in order.iter().enumerate() {
        inverse[k] = pos;
    }
    let (rebuilt, _) = permute_subsystems(&with_id, &labels, &inverse)?;
    Ok(rebuilt.approx_eq(&w.matrix, tol))
}

/// Generalized Gell-Mann basis scaled so Tr(σ_i σ_j) = d δ_ij, σ_0 = 𝟙.
/// Ordering: identity, symmetric (j<k), antisymmetric (j<k), diagonal.
/// For d = 2 this is 𝟙, σ_x, σ_y, σ_z.
#[derive(Debug, Clone)]
pub struct HsBasis {
    d: usize,
    elements: Vec<ComplexMatrix>,
}

impl HsBasis {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("basis dimension must be positive".into()));
        }
        let s = (d as f64 / 2.0).sqrt();
        let mut elements = vec![ComplexMatrix::identity(d)];
        for j in 0..d {
            for k in j + 1..d {
                let m = &ComplexMatrix::unit(d, j, k) + &ComplexMatrix::unit(d, k, j);
                elements.push(m.scale_real(s));
            }
        }
        for j in 0..d {
            for k in j + 1..d {
                let m = &ComplexMatrix::unit(d, j, k).scale(C64::new(0.0, -1.0))
                    + &ComplexMatrix::unit(d, k, j).scale(C64::new(0.0, 1.0));
                elements.push(m.scale_real(s));
            }
        }
        for l in 1..d {
            let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut diag = vec![C64::new(0.0, 0.0); d];
            for x in diag.iter_mut().take(l) {
                *x = C64::new(1.0, 0.0);
            }
            diag[l] = C64::new(-(l as f64), 0.0);
            elements.push(ComplexMatrix::diagonal(&diag).scale_real(norm * s));
        }
        Ok(HsBasis { d, elements })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }
}

/// Coefficients w_{abcd} of W = Σ w_{abcd} σ_a ⊗ σ_b ⊗ σ_c ⊗ σ_d.
#[derive(Debug, Clone)]
pub struct HsCoefficients {
    bases: [HsBasis; 4],
    /// Big-endian over (a, b, c, d).
    coeffs: Vec<C64>,
}

impl HsCoefficients {
    pub fn get(&self, idx: [usize; 4]) -> C64 {
        self.coeffs[self.flat(idx)]
    }

    fn flat(&self, idx: [usize; 4]) -> usize {
        idx.iter().zip(&self.bases).fold(0, |acc, (&i, b)| acc * b.d * b.d + i)
    }

    /// Indices and values of coefficients with modulus above `tol`.
    pub fn nonzero(&self, tol: f64) -> Vec<([usize; 4], C64)> {
        let sizes: Vec<usize> = self.bases.iter().map(|b| b.d * b.d).collect();
        let labels = SubsystemDims::new(&sizes).expect("positive sizes");
        let mut digits = [0usize; 4];
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(i, &c)| {
                labels.digits(i, &mut digits);
                (digits, c)
            })
            .collect()
    }

    pub fn max_imaginary(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let n: usize = self.bases.iter().map(|b| b.d).product();
        let mut out = ComplexMatrix::zeros(n, n);
        for (idx, c) in self.nonzero(0.0) {
            let term = kron_all(&[
                &self.bases[0].elements[idx[0]],
                &self.bases[1].elements[idx[1]],
                &self.bases[2].elements[idx[2]],
                &self.bases[3].elements[idx[3]],
            ]);
            out = &out + &term.scale(c);
        }
        out
    }
}

pub fn hs_decompose(w: &ProcessMatrix) -> Result<HsCoefficients> {
    let bases =
        [HsBasis::new(w.dims[0])?, HsBasis::new(w.dims[1])?, HsBasis::new(w.dims[2])?, HsBasis::new(w.dims[3])?];
    let norm: f64 = w.dims.iter().map(|&d| d as f64).product();
    let mut coeffs = Vec::new();
    for a in &bases[0].elements {
        for b in &bases[1].elements {
            let ab = kron(a, b);
            for c in &bases[2].elements {
                let abc = kron(&ab, c);
                for d in &bases[3].elements {
                    let t = kron(&abc, d);
                    coeffs.push(w.matrix.trace_product(&t) / norm);
                }
            }
        }
    }
    Ok(HsCoefficients { bases, coeffs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub psd: bool,
    pub trace_ok: bool,
    pub max_norm_deviation: f64,
}

/// PSD and trace checks plus the deviation of Tr[W(M⊗N)] from 1 over random
/// CPTP pairs.
pub fn validate_process<R: Rng + ?Sized>(w: &ProcessMatrix, samples: usize, rng: &mut R) -> Result<ValidityReport> {
    if samples == 0 {
        return Err(Error::Parameter("at least one sample is required".into()));
    }
    let psd = match hermitian_eigen(&w.matrix) {
        Ok(e) => e.values[0] >= -TOL,
        Err(Error::NotHermitian(_)) => false,
        Err(e) => return Err(e),
    };
    let expected = (w.dims[A_O] * w.dims[B_O]) as f64;
    let trace_ok = (w.matrix.trace() - C64::new(expected, 0.0)).norm() <= TOL;
    let [ai, ao, bi, bo] = w.dims;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let m = random::any_cptp_operation(rng, ai, ao);
        let n = random::any_cptp_operation(rng, bi, bo);
        let mc = crate::ops::choi_of_operation(&m, ChoiConvention::Transposed);
        let nc = crate::ops::choi_of_operation(&n, ChoiConvention::Transposed);
        let p = w.matrix.trace_product(&kron(mc.matrix(), nc.matrix()));
        worst = worst.max((p - C64::new(1.0, 0.0)).norm());
    }
    Ok(ValidityReport { psd, trace_ok, max_norm_deviation: worst })
}

/// W = ¼[𝟙 + (σ_z^{A_O} σ_z^{B_I} + σ_z^{A_I} σ_x^{B_I} σ_z^{B_O})/√2]
pub fn ocb_process() -> ProcessMatrix {
    let (i, x, z) = (pauli::id(), pauli::x(), pauli::z());
    let t1 = kron_all(&[&i, &z, &z, &i]);
    let t2 = kron_all(&[&z, &i, &x, &z]);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = &ComplexMatrix::identity(16) + &(&t1 + &t2).scale_real(s);
    ProcessMatrix { dims: [2; 4], matrix: m.scale_real(0.25) }
}
