//! Few-level agents scattering a photon in either order, detector
//! postselection, and the harmonic-oscillator trigger.
//!
//! Basis of the model space, big-endian: A₀..A₅ (6) ⊗ B₁..B₅ (5) ⊗
//! e₁..e₅ (5) ⊗ detector A (2) ⊗ detector B (2). A detector reads 1 when its
//! decay photon (e₆ for A, e₇ for B) was emitted, i.e. the agent absorbed
//! nothing.

use crate::grav::HBAR;
use crate::linalg::{expm_hermitian, pauli, ComplexMatrix, ComplexVector};
use crate::{Error, Result, C64, TOL};

pub const A_LEVELS: usize = 6;
pub const B_LEVELS: usize = 5;
pub const TARGET_LEVELS: usize = 5;
pub const MODEL_DIM: usize = A_LEVELS * B_LEVELS * TARGET_LEVELS * 4;
/// Agents ⊗ target, without detectors.
pub const SYSTEM_DIM: usize = A_LEVELS * B_LEVELS * TARGET_LEVELS;

/// Index of |A_a B_b e_e d_A d_B>. `b` and `e` are 1-based labels.
fn index(a: usize, b: usize, e: usize, da: usize, db: usize) -> usize {
    (((a * B_LEVELS + (b - 1)) * TARGET_LEVELS + (e - 1)) * 2 + da) * 2 + db
}

fn unit_phase(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

/// Absorption amplitudes of both agents. Unlisted channels (A for e₂, e₃, e₅;
/// B for e₃, e₄, e₅) never absorb.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentAmplitudes {
    pub c_1a: C64,
    pub c_4a: C64,
    pub c_1b: C64,
    pub c_2b: C64,
    pub f_ba: C64,
    pub f_ab: C64,
    /// δ_iA for i = 1..5
    pub delta_a: [f64; 5],
    /// δ_iB for i = 1..5
    pub delta_b: [f64; 5],
    pub gamma_ba: f64,
    pub gamma_ab: f64,
}

impl AgentAmplitudes {
    pub fn new(c_1a: C64, c_4a: C64, c_1b: C64, c_2b: C64, f_ba: C64, f_ab: C64) -> Result<Self> {
        let amps = AgentAmplitudes {
            c_1a,
            c_4a,
            c_1b,
            c_2b,
            f_ba,
            f_ab,
            delta_a: [0.0; 5],
            delta_b: [0.0; 5],
            gamma_ba: 0.0,
            gamma_ab: 0.0,
        };
        amps.validate()?;
        Ok(amps)
    }

    /// Every coupling certain.
    pub fn ideal() -> Self {
        let one = C64::new(1.0, 0.0);
        Self::new(one, one, one, one, one, one).expect("unit amplitudes are valid")
    }

    pub fn with_phases(mut self, delta_a: [f64; 5], delta_b: [f64; 5], gamma_ba: f64, gamma_ab: f64) -> Result<Self> {
        self.delta_a = delta_a;
        self.delta_b = delta_b;
        self.gamma_ba = gamma_ba;
        self.gamma_ab = gamma_ab;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        for (name, c) in [
            ("c_1A", self.c_1a),
            ("c_4A", self.c_4a),
            ("c_1B", self.c_1b),
            ("c_2B", self.c_2b),
            ("f_BA", self.f_ba),
            ("f_AB", self.f_ab),
        ] {
            if !(c.norm() <= 1.0 + TOL) || !c.is_finite() {
                return Err(Error::Parameter(format!("|{name}| = {} exceeds 1", c.norm())));
            }
        }
        let phases = self.delta_a.iter().chain(&self.delta_b).chain([&self.gamma_ba, &self.gamma_ab]);
        if phases.into_iter().any(|p| !p.is_finite()) {
            return Err(Error::Parameter("phases must be finite".into()));
        }
        Ok(())
    }

    /// c_iA for i = 1..5
    pub fn c_a(&self, i: usize) -> C64 {
        match i {
            1 => self.c_1a,
            4 => self.c_4a,
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn c_b(&self, i: usize) -> C64 {
        match i {
            1 => self.c_1b,
            2 => self.c_2b,
            _ => C64::new(0.0, 0.0),
        }
    }

    /// d_iA = e^{iδ_iA} √(1 − |c_iA|²)
    pub fn d_a(&self, i: usize) -> C64 {
        unit_phase(self.delta_a[i - 1]) * (1.0 - self.c_a(i).norm_sqr()).max(0.0).sqrt()
    }

    pub fn d_b(&self, i: usize) -> C64 {
        unit_phase(self.delta_b[i - 1]) * (1.0 - self.c_b(i).norm_sqr()).max(0.0).sqrt()
    }

    /// g_BA = e^{iγ_BA} √(1 − |f_BA|²)
    pub fn g_ba(&self) -> C64 {
        unit_phase(self.gamma_ba) * (1.0 - self.f_ba.norm_sqr()).max(0.0).sqrt()
    }

    pub fn g_ab(&self) -> C64 {
        unit_phase(self.gamma_ab) * (1.0 - self.f_ab.norm_sqr()).max(0.0).sqrt()
    }
}

/// Normalized state of agents, target and detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    vector: ComplexVector,
}

impl ModelState {
    pub fn new(vector: ComplexVector) -> Result<Self> {
        if vector.dim() != MODEL_DIM {
            return Err(Error::Dimension(format!("model state has dimension {MODEL_DIM}, got {}", vector.dim())));
        }
        if (vector.norm() - 1.0).abs() > TOL {
            return Err(Error::Parameter(format!("model state norm is {}", vector.norm())));
        }
        Ok(ModelState { vector })
    }

    /// |A₁>|B₁> Σ α_i|e_i> |0>_A|0>_B
    pub fn input(target: &ComplexVector) -> Result<Self> {
        if target.dim() != TARGET_LEVELS {
            return Err(Error::Dimension("target has five levels".into()));
        }
        let mut v = ComplexVector::zeros(MODEL_DIM);
        for e in 1..=TARGET_LEVELS {
            v[index(1, 1, e, 0, 0)] = target[e - 1];
        }
        Self::new(v)
    }

    /// |A_a B_b e_e d_A d_B>, with 1-based `b` and `e`.
    pub fn basis(a: usize, b: usize, e: usize, da: usize, db: usize) -> Result<Self> {
        if a >= A_LEVELS || !(1..=B_LEVELS).contains(&b) || !(1..=TARGET_LEVELS).contains(&e) || da > 1 || db > 1 {
            return Err(Error::Parameter(format!("no basis state A{a} B{b} e{e} {da}{db}")));
        }
        Self::new(ComplexVector::basis(MODEL_DIM, index(a, b, e, da, db)))
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.vector
    }

    pub fn amplitude(&self, a: usize, b: usize, e: usize, da: usize, db: usize) -> C64 {
        self.vector[index(a, b, e, da, db)]
    }

    /// Target amplitudes α_i of a state on |A₁ B₁ · 00>.
    fn input_amplitudes(&self) -> Result<[C64; TARGET_LEVELS]> {
        let mut alpha = [C64::new(0.0, 0.0); TARGET_LEVELS];
        let mut inside = 0.0;
        for (e, slot) in alpha.iter_mut().enumerate() {
            *slot = self.vector[index(1, 1, e + 1, 0, 0)];
            inside += slot.norm_sqr();
        }
        if (1.0 - inside).abs() > TOL {
            return Err(Error::MalformedInput);
        }
        Ok(alpha)
    }

    /// Component with detectors fixed to |d_A d_B>, on agents ⊗ target.
    pub fn detector_block(&self, da: usize, db: usize) -> ComplexVector {
        ComplexVector::new((0..SYSTEM_DIM).map(|s| self.vector[s * 4 + da * 2 + db]).collect())
    }
}

fn add(v: &mut ComplexVector, a: usize, b: usize, e: usize, da: usize, db: usize, amp: C64) {
    v[index(a, b, e, da, db)] += amp;
}

/// Path where A acts first: U_B U_A (|00>|ψ>).
pub fn apply_agent_a_then_b(amps: &AgentAmplitudes, input: &ModelState) -> Result<ModelState> {
    let al = input.input_amplitudes()?;
    let mut v = ComplexVector::zeros(MODEL_DIM);
    // both absorbed
    add(&mut v, 3, 5, 3, 0, 0, al[0] * amps.c_1a * amps.f_ba);
    // only A absorbed
    add(&mut v, 3, 5, 2, 0, 1, al[0] * amps.c_1a * amps.g_ba());
    add(&mut v, 5, 5, 5, 0, 1, al[3] * amps.c_4a);
    // only B absorbed
    add(&mut v, 5, 3, 4, 1, 0, al[0] * amps.d_a(1) * amps.c_1b);
    add(&mut v, 5, 5, 3, 1, 0, al[1] * amps.c_2b);
    // neither
    for i in 1..=TARGET_LEVELS {
        add(&mut v, 5, 5, i, 1, 1, al[i - 1] * amps.d_a(i) * amps.d_b(i));
    }
    ModelState::new(v)
}

/// Path where B acts first: U_A U_B (|00>|ψ>).
pub fn apply_agent_b_then_a(amps: &AgentAmplitudes, input: &ModelState) -> Result<ModelState> {
    let al = input.input_amplitudes()?;
    let mut v = ComplexVector::zeros(MODEL_DIM);
    add(&mut v, 5, 3, 5, 0, 0, al[0] * amps.c_1b * amps.f_ab);
    // only B absorbed
    add(&mut v, 5, 3, 4, 1, 0, al[0] * amps.c_1b * amps.g_ab());
    add(&mut v, 5, 5, 3, 1, 0, al[1] * amps.c_2b);
    // only A absorbed
    add(&mut v, 3, 5, 2, 0, 1, al[0] * amps.d_b(1) * amps.c_1a);
    add(&mut v, 5, 5, 5, 0, 1, al[3] * amps.c_4a);
    for i in 1..=TARGET_LEVELS {
        add(&mut v, 5, 5, i, 1, 1, al[i - 1] * amps.d_a(i) * amps.d_b(i));
    }
    ModelState::new(v)
}

/// Detector pattern of ζ: 0 both decay photons, 1 only e₆, 2 only e₇, 3 none.
pub fn detector_pattern(zeta: u8) -> Result<(usize, usize)> {
    match zeta {
        0 => Ok((1, 1)),
        1 => Ok((1, 0)),
        2 => Ok((0, 1)),
        3 => Ok((0, 0)),
        _ => Err(Error::Parameter(format!("ζ must be in 0..=3, got {zeta}"))),
    }
}

/// Projection onto the ζ pattern, renormalized. `None` for an empty
/// projection, with probability 0.
pub fn postselect(state: &ModelState, zeta: u8) -> Result<(Option<ModelState>, f64)> {
    let (da, db) = detector_pattern(zeta)?;
    let mut v = ComplexVector::zeros(MODEL_DIM);
    for s in 0..SYSTEM_DIM {
        let k = s * 4 + da * 2 + db;
        v[k] = state.vector[k];
    }
    let p = v.norm().powi(2);
    if p <= 1e-24 {
        return Ok((None, 0.0));
    }
    Ok((Some(ModelState::new(v.scale_real(1.0 / p.sqrt()))?), p))
}

/// Result of a diagonal measurement after postselection.
#[derive(Debug, Clone, PartialEq)]
pub enum SwitchOutput {
    /// Both orders left the agents in product with the target; the agents
    /// were measured along with the path and this is the target alone.
    Target(ComplexVector),
    /// Only the path was measured; the state on agents ⊗ target.
    Joint(ComplexVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchRun {
    pub output: SwitchOutput,
    /// P(ζ)
    pub postselection_probability: f64,
    /// P(diagonal outcome | ζ)
    pub outcome_probability: f64,
}

/// Splits a 150-dim agents ⊗ target vector into F ⊗ t if it has rank one.
/// F is normalized with its largest entry real and positive.
fn factorize(v: &ComplexVector) -> Option<(ComplexVector, ComplexVector)> {
    let agents = A_LEVELS * B_LEVELS;
    let (mut best, mut best_row, mut best_col) = (0.0, 0, 0);
    for r in 0..agents {
        for c in 0..TARGET_LEVELS {
            let m = v[r * TARGET_LEVELS + c].norm();
            if m > best {
                (best, best_row, best_col) = (m, r, c);
            }
        }
    }
    if best <= 1e-12 {
        return None;
    }
    let target = ComplexVector::new((0..TARGET_LEVELS).map(|c| v[best_row * TARGET_LEVELS + c]).collect());
    let pivot = v[best_row * TARGET_LEVELS + best_col];
    let col = ComplexVector::new((0..agents).map(|r| v[r * TARGET_LEVELS + best_col] / pivot).collect());
    let rebuilt = col.kron(&target);
    if rebuilt.max_abs_diff(v) > 1e-12 * v.norm().max(1.0) {
        return None;
    }
    // Move the normalization of F into t.
    let (mut top, mut phase) = (0.0, C64::new(1.0, 0.0));
    for x in col.data() {
        if x.norm() > top + 1e-15 {
            top = x.norm();
            phase = x / x.norm();
        }
    }
    let n = col.norm();
    let f = col.scale(phase.conj() / n);
    let t = target.scale(phase * n);
    Some((f, t))
}

/// Both orders in superposition with the path register, postselection on ζ,
/// then a diagonal measurement with sign ±1.
pub fn run_switch_model(
    amps: &AgentAmplitudes,
    target: &ComplexVector,
    path_amplitudes: (C64, C64),
    zeta: u8,
    sign: i8,
) -> Result<SwitchRun> {
    let s = match sign {
        1 => 1.0,
        -1 => -1.0,
        _ => return Err(Error::Parameter(format!("sign must be ±1, got {sign}"))),
    };
    let (p0, p1) = path_amplitudes;
    if (p0.norm_sqr() + p1.norm_sqr() - 1.0).abs() > TOL {
        return Err(Error::Parameter("path amplitudes are not normalized".into()));
    }
    let input = ModelState::input(target)?;
    let (da, db) = detector_pattern(zeta)?;
    let first_a = apply_agent_a_then_b(amps, &input)?.detector_block(da, db).scale(p0);
    let first_b = apply_agent_b_then_a(amps, &input)?.detector_block(da, db).scale(p1);
    let p_zeta = first_a.norm().powi(2) + first_b.norm().powi(2);
    if p_zeta <= 1e-24 {
        return Err(Error::ZeroProbability);
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    if let (Some((_, t1)), Some((_, t2))) = (factorize(&first_a), factorize(&first_b)) {
        // Project path ⊗ agents on |0>F₁ ± |1>F₂.
        let out = t1.add(&t2.scale_real(s)).scale_real(r);
        let p = out.norm().powi(2) / p_zeta;
        if p <= 1e-24 {
            return Err(Error::ZeroProbability);
        }
        return Ok(SwitchRun {
            output: SwitchOutput::Target(out.normalized()?),
            postselection_probability: p_zeta,
            outcome_probability: p,
        });
    }
    let out = first_a.add(&first_b.scale_real(s)).scale_real(r);
    let p = out.norm().powi(2) / p_zeta;
    if p <= 1e-24 {
        return Err(Error::ZeroProbability);
    }
    Ok(SwitchRun {
        output: SwitchOutput::Joint(out.normalized()?),
        postselection_probability: p_zeta,
        outcome_probability: p,
    })
}

/// Equal path amplitudes 1/√2.
pub fn balanced_paths() -> (C64, C64) {
    let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    (r, r)
}

/// Factor by which a quantity must exceed another to count as "much larger".
pub const LENGTH_MARGIN: f64 = 10.0;
pub const ENERGY_MARGIN: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeFlags {
    /// A ≥ 10 Δ
    pub amplitude_over_zone: bool,
    /// Δ ≥ 10 σ
    pub zone_over_width: bool,
    /// m ω² A²/2 ≥ 100 V₀
    pub energy_over_barrier: bool,
}

impl RegimeFlags {
    pub fn all(&self) -> bool {
        self.amplitude_over_zone && self.zone_over_width && self.energy_over_barrier
    }
}

/// Oscillator of period 4τ* whose packet crosses a potential step of height
/// V₀ and width Δ at x = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerParams {
    pub omega: f64,
    pub tau_star: f64,
    pub delta: f64,
    pub v0: f64,
    pub m: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub alpha0: f64,
}

impl TriggerParams {
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    /// ε = Δ/(ωA), time spent inside the zone.
    pub fn crossing_time(&self) -> f64 {
        self.delta / (self.omega * self.amplitude)
    }

    pub fn regime(&self) -> RegimeFlags {
        let kinetic = 0.5 * self.m * self.omega * self.omega * self.amplitude * self.amplitude;
        RegimeFlags {
            amplitude_over_zone: self.amplitude >= LENGTH_MARGIN * self.delta,
            zone_over_width: self.delta >= LENGTH_MARGIN * self.sigma,
            energy_over_barrier: kinetic >= ENERGY_MARGIN * self.v0,
        }
    }

    /// Same oscillation with a different barrier height.
    pub fn with_barrier(mut self, v0: f64) -> Self {
        self.v0 = v0;
        self
    }
}

/// ω = π/(2τ*), σ = √(ħ/mω), A = 2ΔV₀/(πħω), α₀ = A/(√2 σ).
pub fn trigger_params(tau_star: f64, delta: f64, v0: f64, m: f64) -> Result<TriggerParams> {
    for (name, x) in [("tau_star", tau_star), ("delta", delta), ("v0", v0), ("m", m)] {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Parameter(format!("{name} must be positive, got {x}")));
        }
    }
    let omega = std::f64::consts::PI / (2.0 * tau_star);
    let sigma = (HBAR / (m * omega)).sqrt();
    let amplitude = 2.0 * delta * v0 / (std::f64::consts::PI * HBAR * omega);
    Ok(TriggerParams { omega, tau_star, delta, v0, m, sigma, amplitude, alpha0: amplitude / (2f64.sqrt() * sigma) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingRotation {
    pub angle: f64,
    /// false when the perfect-transmission approximation is not justified
    pub regime_ok: bool,
}

/// V₀ ε/ħ
pub fn crossing_rotation_angle(p: &TriggerParams) -> CrossingRotation {
    CrossingRotation { angle: p.v0 * p.crossing_time() / HBAR, regime_ok: p.regime().all() }
}

/// exp(−iθσ_x) on span{|A₀>, |A₁>}.
pub fn crossing_unitary(angle: f64) -> ComplexMatrix {
    expm_hermitian(&pauli::x(), angle).expect("σ_x is Hermitian")
}

/// |A₀> after one crossing.
pub fn rotated_level(p: &TriggerParams) -> ComplexVector {
    crossing_unitary(crossing_rotation_angle(p).angle).apply(&ComplexVector::basis(2, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentLevel {
    A0,
    Rotating,
    A1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelinePoint {
    pub mean_position: f64,
    pub level: AgentLevel,
}

/// <x> = A cos ωτ; A₀ before the zone, rotating inside it, A₁ at τ*.
pub fn trigger_timeline(p: &TriggerParams, tau: f64) -> Result<TimelinePoint> {
    if !(0.0..=p.tau_star).contains(&tau) {
        return Err(Error::Parameter(format!("τ must lie in [0, τ*], got {tau}")));
    }
    let eps = p.crossing_time();
    let level = if tau >= p.tau_star {
        AgentLevel::A1
    } else if tau >= p.tau_star - eps {
        AgentLevel::Rotating
    } else {
        AgentLevel::A0
    };
    Ok(TimelinePoint { mean_position: p.amplitude * (p.omega * tau).cos(), level })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> ComplexVector {
        ComplexVector::basis(TARGET_LEVELS, i - 1)
    }

    fn generic() -> AgentAmplitudes {
        AgentAmplitudes::new(
            C64::new(0.6, 0.2),
            C64::new(0.1, -0.7),
            C64::new(-0.5, 0.5),
            C64::new(0.3, 0.0),
            C64::new(0.2, 0.9),
            C64::new(0.0, -0.4),
        )
        .unwrap()
        .with_phases([0.1, 0.2, 0.3, 0.4, 0.5], [1.0, -1.0, 0.5, 0.0, 2.0], 0.7, -0.3)
        .unwrap()
    }

    fn generic_target() -> ComplexVector {
        ComplexVector::new(vec![
            C64::new(0.5, 0.1),
            C64::new(-0.2, 0.3),
            C64::new(0.4, 0.0),
            C64::new(0.1, -0.5),
            C64::new(0.3, 0.2),
        ])
        .normalized()
        .unwrap()
    }

    #[test]
    fn ideal_e1_paths() {
        let amps = AgentAmplitudes::ideal();
        let input = ModelState::input(&e(1)).unwrap();
        let ab = apply_agent_a_then_b(&amps, &input).unwrap();
        assert_eq!(ab, ModelState::basis(3, 5, 3, 0, 0).unwrap());
        let ba = apply_agent_b_then_a(&amps, &input).unwrap();
        assert_eq!(ba, ModelState::basis(5, 3, 5, 0, 0).unwrap());
    }

    #[test]
    fn uncoupled_photon_passes() {
        let amps = AgentAmplitudes::ideal();
        let input = ModelState::input(&e(3)).unwrap();
        for out in [apply_agent_a_then_b(&amps, &input).unwrap(), apply_agent_b_then_a(&amps, &input).unwrap()] {
            assert_eq!(out, ModelState::basis(5, 5, 3, 1, 1).unwrap());
        }
    }

    #[test]
    fn e4_only_meets_a() {
        let amps = AgentAmplitudes::ideal();
        let input = ModelState::input(&e(4)).unwrap();
        let ba = apply_agent_b_then_a(&amps, &input).unwrap();
        assert_eq!(ba, ModelState::basis(5, 5, 5, 0, 1).unwrap());
        assert_eq!(apply_agent_a_then_b(&amps, &input).unwrap(), ba);
    }

    #[test]
    fn branch_norms_match_amplitudes() {
        let amps = generic();
        let t = generic_target();
        let al: Vec<C64> = t.data().to_vec();
        let out = apply_agent_a_then_b(&amps, &ModelState::input(&t).unwrap()).unwrap();
        let n = |v: ComplexVector| v.norm().powi(2);
        let both = (al[0] * amps.c_1a * amps.f_ba).norm_sqr();
        let only_a = (al[0] * amps.c_1a * amps.g_ba()).norm_sqr() + (al[3] * amps.c_4a).norm_sqr();
        let only_b = (al[0] * amps.d_a(1) * amps.c_1b).norm_sqr() + (al[1] * amps.c_2b).norm_sqr();
        let neither: f64 = (1..=5).map(|i| (al[i - 1] * amps.d_a(i) * amps.d_b(i)).norm_sqr()).sum();
        assert!((n(out.detector_block(0, 0)) - both).abs() < 1e-12);
        assert!((n(out.detector_block(0, 1)) - only_a).abs() < 1e-12);
        assert!((n(out.detector_block(1, 0)) - only_b).abs() < 1e-12);
        assert!((n(out.detector_block(1, 1)) - neither).abs() < 1e-12);
        assert!((both + only_a + only_b + neither - 1.0).abs() < 1e-12);
        let out = apply_agent_b_then_a(&amps, &ModelState::input(&t).unwrap()).unwrap();
        let both = (al[0] * amps.c_1b * amps.f_ab).norm_sqr();
        let only_b = (al[0] * amps.c_1b * amps.g_ab()).norm_sqr() + (al[1] * amps.c_2b).norm_sqr();
        let only_a = (al[0] * amps.d_b(1) * amps.c_1a).norm_sqr() + (al[3] * amps.c_4a).norm_sqr();
        assert!((n(out.detector_block(0, 0)) - both).abs() < 1e-12);
        assert!((n(out.detector_block(1, 0)) - only_b).abs() < 1e-12);
        assert!((n(out.detector_block(0, 1)) - only_a).abs() < 1e-12);
    }

    #[test]
    fn malformed_input_rejected() {
        let amps = AgentAmplitudes::ideal();
        let bad = ModelState::basis(0, 1, 1, 0, 0).unwrap();
        assert!(matches!(apply_agent_a_then_b(&amps, &bad), Err(Error::MalformedInput)));
        assert!(matches!(
            apply_agent_b_then_a(&amps, &ModelState::basis(1, 1, 1, 1, 0).unwrap()),
            Err(Error::MalformedInput)
        ));
        assert!(AgentAmplitudes::new(
            C64::new(1.1, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0)
        )
        .is_err());
    }

    #[test]
    fn postselection_examples() {
        let amps = AgentAmplitudes::ideal();
        let out = apply_agent_a_then_b(&amps, &ModelState::input(&e(1)).unwrap()).unwrap();
        let (s, p) = postselect(&out, 3).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert_eq!(s.unwrap(), out);
        let out = apply_agent_a_then_b(&amps, &ModelState::input(&e(3)).unwrap()).unwrap();
        assert_eq!(postselect(&out, 3).unwrap(), (None, 0.0));
        let out = apply_agent_b_then_a(&generic(), &ModelState::input(&generic_target()).unwrap()).unwrap();
        let total: f64 = (0..4).map(|z| postselect(&out, z).unwrap().1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(postselect(&out, 4).is_err());
    }

    #[test]
    fn switch_on_e1() {
        let amps = AgentAmplitudes::ideal();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for s in [1i8, -1] {
            let run = run_switch_model(&amps, &e(1), balanced_paths(), 3, s).unwrap();
            let expected = e(3).add(&e(5).scale_real(s as f64)).scale_real(r);
            match run.output {
                SwitchOutput::Target(t) => assert!(t.max_abs_diff(&expected) < 1e-12),
                SwitchOutput::Joint(_) => panic!("e1 output factorizes"),
            }
            assert!((run.postselection_probability - 1.0).abs() < 1e-12);
            assert!((run.outcome_probability - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn switch_on_e4_is_trivial() {
        let amps = AgentAmplitudes::ideal();
        let run = run_switch_model(&amps, &e(4), balanced_paths(), 2, 1).unwrap();
        assert_eq!(run.output, SwitchOutput::Target(e(5)));
        assert!((run.outcome_probability - 1.0).abs() < 1e-12);
        assert!(matches!(run_switch_model(&amps, &e(4), balanced_paths(), 2, -1), Err(Error::ZeroProbability)));
        assert!(matches!(run_switch_model(&amps, &e(4), balanced_paths(), 3, 1), Err(Error::ZeroProbability)));
    }

    #[test]
    fn orders_agree_without_e1() {
        let amps = generic();
        let t = ComplexVector::new(vec![
            C64::new(0.0, 0.0),
            C64::new(0.3, 0.1),
            C64::new(0.5, 0.0),
            C64::new(-0.4, 0.6),
            C64::new(0.2, 0.2),
        ])
        .normalized()
        .unwrap();
        let input = ModelState::input(&t).unwrap();
        let ab = apply_agent_a_then_b(&amps, &input).unwrap();
        let ba = apply_agent_b_then_a(&amps, &input).unwrap();
        for z in 0..4 {
            let (x, px) = postselect(&ab, z).unwrap();
            let (y, py) = postselect(&ba, z).unwrap();
            assert!((px - py).abs() < 1e-12);
            if let (Some(x), Some(y)) = (x, y) {
                assert!(x.vector().max_abs_diff(y.vector()) < 1e-12);
            }
        }
    }

    #[test]
    fn zeta3_forgets_other_components() {
        let amps = generic();
        let a = run_switch_model(&amps, &generic_target(), balanced_paths(), 3, 1).unwrap();
        let b = run_switch_model(&amps, &e(1), balanced_paths(), 3, 1).unwrap();
        match (a.output, b.output) {
            (SwitchOutput::Target(x), SwitchOutput::Target(y)) => assert!((x.fidelity(&y) - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn entangled_branches_return_joint_state() {
        let amps = generic();
        let run = run_switch_model(&amps, &generic_target(), balanced_paths(), 2, 1).unwrap();
        match run.output {
            SwitchOutput::Joint(v) => assert!((v.norm() - 1.0).abs() < 1e-12 && v.dim() == SYSTEM_DIM),
            SwitchOutput::Target(_) => panic!("ζ = 2 mixes A₃ and A₅ branches"),
        }
    }

    #[test]
    fn trigger_example() {
        let p = trigger_params(1.0, 1e-6, 1e-30, 1e-20).unwrap();
        assert!((p.omega - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((p.period() - 4.0).abs() < 1e-12);
        let a = 2.0 * p.delta * p.v0 / (std::f64::consts::PI * HBAR * p.omega);
        assert_eq!(p.amplitude, a);
        assert!(p.regime().all());
        let rot = crossing_rotation_angle(&p);
        assert!(rot.regime_ok);
        assert!((rot.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let doubled = crossing_rotation_angle(&p.with_barrier(2e-30));
        assert!((doubled.angle - std::f64::consts::PI).abs() < 1e-12);
        let s = rotated_level(&p);
        assert!((s[0].norm()) < 1e-12);
        assert!((s[1] - C64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn regime_flags_fail_for_wide_packets() {
        // Δ comparable to σ
        let p = trigger_params(1.0, 1e-6, 1e-21, 1e-25).unwrap();
        assert!(!p.regime().zone_over_width);
        let rot = crossing_rotation_angle(&p);
        assert!(!rot.regime_ok);
        assert!((rot.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(trigger_params(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn timeline() {
        let p = trigger_params(1.0, 1e-6, 1e-30, 1e-20).unwrap();
        let start = trigger_timeline(&p, 0.0).unwrap();
        assert_eq!(start, TimelinePoint { mean_position: p.amplitude, level: AgentLevel::A0 });
        let end = trigger_timeline(&p, 1.0).unwrap();
        assert_eq!(end.level, AgentLevel::A1);
        assert!(end.mean_position.abs() < 1e-12 * p.amplitude);
        let eps = p.crossing_time();
        assert!(eps < 1e-3 * p.tau_star);
        assert_eq!(trigger_timeline(&p, 1.0 - 0.5 * eps).unwrap().level, AgentLevel::Rotating);
        assert_eq!(trigger_timeline(&p, 1.0 - 2.0 * eps).unwrap().level, AgentLevel::A0);
        assert!(trigger_timeline(&p, 1.5).is_err());
    }
}
