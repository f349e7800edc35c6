//! Quantum operations, instruments, Choi operators and dilations.

use crate::linalg::{
    hermitian_eigen, kron, orthonormalize, partial_trace, sqrt_psd, ComplexMatrix, ComplexVector, SubsystemDims,
};
use crate::{Error, Result, C64, TOL};

/// Trace-nonincreasing completely positive map in Kraus form.
#[derive(Debug, Clone)]
pub struct Operation {
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl Operation {
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if d_in == 0 || d_out == 0 || kraus.is_empty() {
            return Err(Error::Dimension("operation needs positive dimensions and a Kraus operator".into()));
        }
        if let Some(k) = kraus.iter().find(|k| k.rows() != d_out || k.cols() != d_in) {
            return Err(Error::Dimension(format!(
                "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                k.rows(),
                k.cols()
            )));
        }
        let op = Operation { d_in, d_out, kraus };
        let top = *hermitian_eigen(&op.effect_sum())?.values.last().expect("nonempty");
        if top > 1.0 + TOL {
            return Err(Error::TraceIncreasing(top));
        }
        Ok(op)
    }

    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        let err = u.unitarity_error();
        if err > TOL {
            return Err(Error::NotUnitary(err));
        }
        Operation::new(u.cols(), u.rows(), vec![u.clone()])
    }

    pub fn identity(d: usize) -> Self {
        Operation { d_in: d, d_out: d, kraus: vec![ComplexMatrix::identity(d)] }
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Σ E_i† E_i
    pub fn effect_sum(&self) -> ComplexMatrix {
        self.kraus.iter().fold(ComplexMatrix::zeros(self.d_in, self.d_in), |acc, k| &acc + &(&k.dagger() * k))
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.effect_sum().approx_eq(&ComplexMatrix::identity(self.d_in), tol)
    }

    /// Sequential composition: `self` after `first`.
    pub fn compose(&self, first: &Operation) -> Result<Operation> {
        if first.d_out != self.d_in {
            return Err(Error::Dimension(format!("cannot feed {} into {}", first.d_out, self.d_in)));
        }
        let kraus = self.kraus.iter().flat_map(|a| first.kraus.iter().map(move |b| a * b)).collect();
        Operation::new(first.d_in, self.d_out, kraus)
    }
}

/// Outcome-labelled family of operations.
#[derive(Debug, Clone)]
pub struct Instrument {
    d_in: usize,
    d_out: usize,
    elements: Vec<Operation>,
}

impl Instrument {
    /// Checks shapes only; completeness is what `validate_instrument` decides.
    pub fn new(elements: Vec<Operation>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::Dimension("instrument needs an element".into()))?;
        let (d_in, d_out) = (first.d_in, first.d_out);
        if elements.iter().any(|e| e.d_in != d_in || e.d_out != d_out) {
            return Err(Error::Dimension("instrument elements disagree on dimensions".into()));
        }
        Ok(Instrument { d_in, d_out, elements })
    }

    pub fn elements(&self) -> &[Operation] {
        &self.elements
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }
}

pub fn validate_instrument(instr: &Instrument) -> bool {
    let mut total = ComplexMatrix::zeros(instr.d_in, instr.d_in);
    for e in &instr.elements {
        let s = e.effect_sum();
        match hermitian_eigen(&s) {
            Ok(eig) if eig.values.last().is_some_and(|&v| v <= 1.0 + TOL) => {}
            _ => return false,
        }
        total = &total + &s;
    }
    total.approx_eq(&ComplexMatrix::identity(instr.d_in), TOL)
}

/// Unnormalized output Σ E_i ρ E_i†.
pub fn apply_operation(op: &Operation, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.rows() != op.d_in || rho.cols() != op.d_in {
        return Err(Error::Dimension(format!("state is {}x{}, operation expects {}", rho.rows(), rho.cols(), op.d_in)));
    }
    Ok(op.kraus.iter().fold(ComplexMatrix::zeros(op.d_out, op.d_out), |acc, k| &acc + &(&(k * rho) * &k.dagger())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoiConvention {
    /// σ = Σ_ij |i><j| ⊗ ℰ(|i><j|)
    Plain,
    /// E = σ^T in the product computational basis.
    Transposed,
}

/// Choi operator on H_in ⊗ H_out.
#[derive(Debug, Clone)]
pub struct ChoiOperator {
    d_in: usize,
    d_out: usize,
    matrix: ComplexMatrix,
    convention: ChoiConvention,
}

impl ChoiOperator {
    /// Rejects matrices that are not PSD, i.e. maps that are not CP.
    pub fn new(d_in: usize, d_out: usize, matrix: ComplexMatrix, convention: ChoiConvention) -> Result<Self> {
        let n = d_in * d_out;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::Dimension(format!(
                "Choi matrix is {}x{}, expected {n}x{n}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let scale = matrix.frobenius_norm().max(1.0);
        let low = hermitian_eigen(&matrix)?.values[0];
        if low < -TOL * scale {
            return Err(Error::NotPositive(low));
        }
        Ok(ChoiOperator { d_in, d_out, matrix, convention })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn convention(&self) -> ChoiConvention {
        self.convention
    }

    pub fn plain_matrix(&self) -> ComplexMatrix {
        match self.convention {
            ChoiConvention::Plain => self.matrix.clone(),
            ChoiConvention::Transposed => self.matrix.transpose(),
        }
    }

    pub fn to_convention(&self, convention: ChoiConvention) -> ChoiOperator {
        let matrix = if convention == self.convention { self.matrix.clone() } else { self.matrix.transpose() };
        ChoiOperator { d_in: self.d_in, d_out: self.d_out, matrix, convention }
    }

    /// Tr_out of the Choi matrix, which is 𝟙 (or its transpose) for TP maps.
    pub fn output_marginal(&self) -> ComplexMatrix {
        let dims = SubsystemDims::new(&[self.d_in, self.d_out]).expect("positive dims");
        partial_trace(&self.matrix, &dims, &[0]).expect("labels are consistent")
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.output_marginal().approx_eq(&ComplexMatrix::identity(self.d_in), tol)
    }
}

pub fn choi_of_operation(op: &Operation, convention: ChoiConvention) -> ChoiOperator {
    // σ = Σ_k |v_k><v_k| with v_k[i, m] = E_k[m, i].
    let n = op.d_in * op.d_out;
    let mut sigma = ComplexMatrix::zeros(n, n);
    for k in &op.kraus {
        let mut v = ComplexVector::zeros(n);
        for i in 0..op.d_in {
            for m in 0..op.d_out {
                v[i * op.d_out + m] = k[(m, i)];
            }
        }
        sigma = &sigma + &v.projector();
    }
    let matrix = match convention {
        ChoiConvention::Plain => sigma,
        ChoiConvention::Transposed => sigma.transpose(),
    };
    ChoiOperator { d_in: op.d_in, d_out: op.d_out, matrix, convention }
}

/// Inverse isomorphism. PLAIN: ℰ(A) = Σ_ij A_ij σ_(ij block);
/// TRANSPOSED: ℰ(ρ) = [Tr_in((ρ ⊗ 𝟙) E)]^T.
pub fn apply_choi(choi: &ChoiOperator, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (di, d) = (choi.d_in, choi.d_out);
    if a.rows() != di || a.cols() != di {
        return Err(Error::Dimension(format!("input is {}x{}, Choi expects {di}", a.rows(), a.cols())));
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..di {
        for j in 0..di {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for m in 0..d {
                for n in 0..d {
                    let s = match choi.convention {
                        ChoiConvention::Plain => choi.matrix[(i * d + m, j * d + n)],
                        ChoiConvention::Transposed => choi.matrix[(j * d + n, i * d + m)],
                    };
                    out[(m, n)] += aij * s;
                }
            }
        }
    }
    Ok(out)
}

/// Canonical Kraus form from the spectral decomposition of the Choi matrix.
/// Operators satisfy Tr(E_i E_j†) = λ_i δ_ij.
pub fn kraus_from_choi(choi: &ChoiOperator) -> Result<Operation> {
    let sigma = choi.plain_matrix();
    let eig = hermitian_eigen(&sigma)?;
    let scale = sigma.frobenius_norm().max(1.0);
    if eig.values[0] < -TOL * scale {
        return Err(Error::NotPositive(eig.values[0]));
    }
    let (di, d) = (choi.d_in, choi.d_out);
    let kraus: Vec<ComplexMatrix> = eig
        .values
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &lam)| lam > TOL)
        .map(|(col, &lam)| {
            let s = lam.sqrt();
            let mut k = ComplexMatrix::zeros(d, di);
            for i in 0..di {
                for m in 0..d {
                    k[(m, i)] = eig.vectors[(i * d + m, col)] * s;
                }
            }
            k
        })
        .collect();
    if kraus.is_empty() {
        return Operation::new(di, d, vec![ComplexMatrix::zeros(d, di)]);
    }
    Operation::new(di, d, kraus)
}

/// Unitary system–environment realization of an operation:
/// ℰ(ρ) = Tr_E[P U (ρ ⊗ |0><0|) U† P].
///
/// The input space is H_in ⊗ E_in and the output space is H_out ⊗ E_out,
/// with d_in · env_in_dim = d_out · env_dim.
#[derive(Debug, Clone)]
pub struct Dilation {
    pub unitary: ComplexMatrix,
    pub d_in: usize,
    pub d_out: usize,
    pub env_in_dim: usize,
    pub env_dim: usize,
    /// Present only for trace-decreasing operations.
    pub projector: Option<ComplexMatrix>,
}

impl Dilation {
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.d_in || rho.cols() != self.d_in {
            return Err(Error::Dimension("state does not match the dilation input".into()));
        }
        let env0 = ComplexVector::basis(self.env_in_dim, 0).projector();
        let joint = kron(rho, &env0);
        let mut out = &(&self.unitary * &joint) * &self.unitary.dagger();
        if let Some(p) = &self.projector {
            out = &(p * &out) * p;
        }
        let dims = SubsystemDims::new(&[self.d_out, self.env_dim])?;
        partial_trace(&out, &dims, &[0])
    }
}

pub fn stinespring_dilation(op: &Operation) -> Result<Dilation> {
    let (di, d) = (op.d_in, op.d_out);
    let k = op.kraus.len();
    let rest = &ComplexMatrix::identity(di) - &op.effect_sum();
    let top = hermitian_eigen(&rest)?.values.last().copied().unwrap_or(0.0);
    let extra = if top > 1e-12 { Some(sqrt_psd(&rest)?) } else { None };
    // The extra branch is a d_in-dimensional vector spread over H_out ⊗ (m flag levels).
    let flag_levels = if extra.is_some() { di.div_ceil(d) } else { 0 };
    let mut env = k + flag_levels;
    while !(d * env).is_multiple_of(di) {
        env += 1;
    }
    let total = d * env;
    let env_in = total / di;

    let mut columns: Vec<Option<ComplexVector>> = vec![None; total];
    let mut image = Vec::with_capacity(di);
    for i in 0..di {
        let mut v = ComplexVector::zeros(total);
        for (e, kr) in op.kraus.iter().enumerate() {
            for o in 0..d {
                v[o * env + e] = kr[(o, i)];
            }
        }
        if let Some(x) = &extra {
            for t in 0..di {
                v[(t % d) * env + k + t / d] = x[(t, i)];
            }
        }
        columns[i * env_in] = Some(v.clone());
        image.push(v);
    }
    let canonical: Vec<ComplexVector> = (0..total).map(|j| ComplexVector::basis(total, j)).collect();
    let mut completion = orthonormalize(&canonical, &image, 1e-8).into_iter();
    let cols: Vec<ComplexVector> = columns
        .into_iter()
        .map(|c| c.or_else(|| completion.next()))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Degenerate("unitary completion ran short".into()))?;
    let unitary = ComplexMatrix::from_columns(&cols)?;

    let projector = extra.map(|_| {
        let mut p = ComplexMatrix::zeros(total, total);
        for o in 0..d {
            for e in 0..k {
                p[(o * env + e, o * env + e)] = C64::new(1.0, 0.0);
            }
        }
        p
    });
    Ok(Dilation { unitary, d_in: di, d_out: d, env_in_dim: env_in, env_dim: env, projector })
}

/// Open-system operation ρ ↦ Tr_E[(𝟙⊗P) U (ρ ⊗ σ) U† (𝟙⊗P)] in Kraus form,
/// E_kn = √σ_n <k|P U|n>_E over the eigenbasis {|n>} of σ. `u` acts on
/// H_S ⊗ H_E.
pub fn open_system_operation(
    u: &ComplexMatrix,
    d_sys: usize,
    env_state: &ComplexMatrix,
    env_projector: &ComplexMatrix,
) -> Result<Operation> {
    let de = env_state.rows();
    if u.rows() != d_sys * de || !u.is_square() || env_projector.rows() != de || !env_state.is_square() {
        return Err(Error::Dimension("unitary, environment state and projector disagree".into()));
    }
    let err = u.unitarity_error();
    if err > TOL {
        return Err(Error::NotUnitary(err));
    }
    let pu = &kron(&ComplexMatrix::identity(d_sys), env_projector) * u;
    let eig = hermitian_eigen(env_state)?;
    let mut kraus = Vec::new();
    for (n, &w) in eig.values.iter().enumerate() {
        if w <= TOL {
            continue;
        }
        let s = w.sqrt();
        let vn = eig.vectors.column(n);
        for kk in 0..de {
            let mut e = ComplexMatrix::zeros(d_sys, d_sys);
            for o in 0..d_sys {
                for i in 0..d_sys {
                    let mut acc = C64::new(0.0, 0.0);
                    for m in 0..de {
                        acc += pu[(o * de + kk, i * de + m)] * vn[m];
                    }
                    e[(o, i)] = acc * s;
                }
            }
            kraus.push(e);
        }
    }
    Operation::new(d_sys, d_sys, kraus)
}

/// |U*>> = Σ_k |k> ⊗ U*|k>
pub fn choi_vector_of_unitary(u: &ComplexMatrix) -> Result<ComplexVector> {
    let err = u.unitarity_error();
    if err > TOL {
        return Err(Error::NotUnitary(err));
    }
    let d = u.rows();
    let mut v = ComplexVector::zeros(d * d);
    for k in 0..d {
        for m in 0..d {
            v[k * d + m] = u[(m, k)].conj();
        }
    }
    Ok(v)
}

/// Fixed qubit basis ρ_1..ρ_4 for tomographic reconstruction.
pub fn tomographic_basis() -> [ComplexMatrix; 4] {
    let c = |re: f64, im: f64| C64::new(re, im);
    [
        ComplexMatrix::from_rows(&[&[c(0.5, 0.), c(0.5, 0.)], &[c(0.5, 0.), c(0.5, 0.)]]),
        ComplexMatrix::from_rows(&[&[c(0.5, 0.), c(0., -0.5)], &[c(0., 0.5), c(0.5, 0.)]]),
        ComplexMatrix::from_rows(&[&[c(1., 0.), c(0., 0.)], &[c(0., 0.), c(0., 0.)]]),
        ComplexMatrix::from_rows(&[&[c(0.5, 0.), c(-0.5, 0.)], &[c(-0.5, 0.), c(0.5, 0.)]]),
    ]
}

/// Dual matrices D_i with Tr(D_i† ρ_j) = δ_ij.
pub fn tomographic_duals() -> [ComplexMatrix; 4] {
    let c = |re: f64, im: f64| C64::new(re, im);
    [
        ComplexMatrix::from_rows(&[&[c(0., 0.), c(0.5, 0.5)], &[c(0.5, -0.5), c(1., 0.)]]),
        ComplexMatrix::from_rows(&[&[c(0., 0.), c(0., -1.)], &[c(0., 1.), c(0., 0.)]]),
        ComplexMatrix::from_rows(&[&[c(1., 0.), c(0., 0.)], &[c(0., 0.), c(-1., 0.)]]),
        ComplexMatrix::from_rows(&[&[c(0., 0.), c(-0.5, 0.5)], &[c(-0.5, -0.5), c(1., 0.)]]),
    ]
}

/// ℰ(A) = Σ_i Tr(D_i† A) ℰ(ρ_i) from the images of the fixed basis.
pub fn tomographic_apply(images: &[ComplexMatrix; 4], a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() != 2 || a.cols() != 2 {
        return Err(Error::Dimension("tomographic reconstruction is for qubit inputs".into()));
    }
    let (r, c) = (images[0].rows(), images[0].cols());
    if images.iter().any(|m| m.rows() != r || m.cols() != c) {
        return Err(Error::Dimension("basis images differ in shape".into()));
    }
    let duals = tomographic_duals();
    Ok(images
        .iter()
        .zip(&duals)
        .fold(ComplexMatrix::zeros(r, c), |acc, (img, dual)| &acc + &img.scale(dual.dagger().trace_product(a))))
}
