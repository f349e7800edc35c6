//! Static spherically symmetric timing: lapse, light travel, event-ordering
//! thresholds, switch duration and a two-level clock model.
//!
//! Differences of nearly equal lapses are formed through `ln_1p`/`exp_m1`
//! so that Earth-scale numbers (R_S/R ~ 1e-9) keep full precision.

use crate::linalg::{partial_trace, ComplexVector, SubsystemDims};
use crate::{Error, Result, C64};

pub const C: f64 = 2.997_924_58e8;
pub const G: f64 = 6.674_30e-11;
pub const HBAR: f64 = 1.054_571_817e-34;

pub const EARTH_MASS: f64 = 5.9722e24;
pub const EARTH_RADIUS: f64 = 6.371e6;

/// Largest R_S/r accepted by weak-field formulas.
pub const WEAK_FIELD_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyConfig {
    mass: f64,
    radius: f64,
}

impl BodyConfig {
    pub fn new(mass: f64, radius: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Parameter(format!("mass must be positive, got {mass}")));
        }
        if !radius.is_finite() {
            return Err(Error::Parameter(format!("radius must be finite, got {radius}")));
        }
        let rs = 2.0 * G * mass / (C * C);
        if radius <= rs {
            return Err(Error::InsideHorizon { r: radius, rs });
        }
        Ok(BodyConfig { mass, radius })
    }

    pub fn earth() -> Self {
        BodyConfig { mass: EARTH_MASS, radius: EARTH_RADIUS }
    }

    /// M = 1e-10 kg compressed to R = 1e-15 m.
    pub fn small_mass() -> Self {
        BodyConfig { mass: 1e-10, radius: 1e-15 }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn schwarzschild_radius(&self) -> f64 {
        2.0 * G * self.mass / (C * C)
    }

    /// Φ(r)/c² = −R_S/(2r)
    pub fn potential_over_c2(&self, r: f64) -> f64 {
        -0.5 * self.schwarzschild_radius() / r
    }

    /// g = GM/R² at the surface.
    pub fn surface_gravity(&self) -> f64 {
        G * self.mass / (self.radius * self.radius)
    }

    fn check_weak_field(&self, r: f64) -> Result<()> {
        let ratio = self.schwarzschild_radius() / r;
        if !(ratio <= WEAK_FIELD_LIMIT) {
            return Err(Error::WeakField(ratio));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    /// −g₀₀ = 1 − R_S/r, g_rr = 1/(1 − R_S/r).
    SchwarzschildStandard,
    /// −g₀₀ = 1 + 2φ + 2βφ², g_rr = 1 − 2γφ with φ = −R_S/(2r).
    IsotropicWeakField { beta: f64, gamma: f64 },
}

impl MetricKind {
    pub fn isotropic() -> Self {
        MetricKind::IsotropicWeakField { beta: 1.0, gamma: 1.0 }
    }
}

fn check_radius(r: f64, body: &BodyConfig) -> Result<()> {
    let rs = body.schwarzschild_radius();
    if !(r > rs) || !r.is_finite() {
        return Err(Error::InsideHorizon { r, rs });
    }
    Ok(())
}

/// −g₀₀(r), checked to be positive.
fn lapse_squared(r: f64, body: &BodyConfig, kind: MetricKind) -> Result<f64> {
    check_radius(r, body)?;
    let rs = body.schwarzschild_radius();
    let n = match kind {
        MetricKind::SchwarzschildStandard => 1.0 - rs / r,
        MetricKind::IsotropicWeakField { beta, .. } => {
            let phi = -0.5 * rs / r;
            1.0 + 2.0 * phi + 2.0 * beta * phi * phi
        }
    };
    if !(n > 0.0) {
        return Err(Error::InsideHorizon { r, rs });
    }
    Ok(n)
}

/// ln(−g₀₀(r + h)) − ln(−g₀₀(r)), without cancellation.
fn delta_ln_lapse_squared(r: f64, h: f64, body: &BodyConfig, kind: MetricKind) -> Result<f64> {
    let n0 = lapse_squared(r, body, kind)?;
    lapse_squared(r + h, body, kind)?;
    let rs = body.schwarzschild_radius();
    let dn = match kind {
        MetricKind::SchwarzschildStandard => rs * h / (r * (r + h)),
        MetricKind::IsotropicWeakField { beta, .. } => {
            let dphi = 0.5 * rs * h / (r * (r + h));
            let sum = -0.5 * rs / r - 0.5 * rs / (r + h);
            2.0 * dphi * (1.0 + beta * sum)
        }
    };
    Ok((dn / n0).ln_1p())
}

/// dτ/dt = √(1 − R_S/r)
pub fn lapse(r: f64, body: &BodyConfig) -> Result<f64> {
    lapse_in(r, body, MetricKind::SchwarzschildStandard)
}

pub fn lapse_in(r: f64, body: &BodyConfig, kind: MetricKind) -> Result<f64> {
    Ok(lapse_squared(r, body, kind)?.sqrt())
}

/// l(r₂)/l(r₁)
pub fn lapse_ratio(r1: f64, r2: f64, body: &BodyConfig, kind: MetricKind) -> Result<f64> {
    Ok((0.5 * delta_ln_lapse_squared(r1, r2 - r1, body, kind)?).exp())
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Coordinate time for a radial light ray from r₁ up to r₂.
pub fn light_coordinate_time(r1: f64, r2: f64, body: &BodyConfig, kind: MetricKind) -> Result<f64> {
    check_radius(r1, body)?;
    check_radius(r2, body)?;
    if !(r1 < r2) {
        return Err(Error::Parameter(format!("light travel needs r1 < r2, got {r1} and {r2}")));
    }
    let rs = body.schwarzschild_radius();
    let dr = r2 - r1;
    match kind {
        MetricKind::SchwarzschildStandard => Ok((dr + rs * (dr / (r1 - rs)).ln_1p()) / C),
        MetricKind::IsotropicWeakField { beta, gamma } => {
            lapse_squared(r1, body, kind)?;
            // √(g_rr/−g₀₀) − 1 integrated in ln r.
            let excess = |r: f64| -> f64 {
                let phi = -0.5 * rs / r;
                let ln_n = (2.0 * phi + 2.0 * beta * phi * phi).ln_1p();
                (0.5 * ((-2.0 * gamma * phi).ln_1p() - ln_n)).exp_m1()
            };
            let span = (dr / r1).ln_1p();
            let panels = ((span / 0.05).ceil() as usize).max(4);
            let width = span / panels as f64;
            let nodes = gauss_legendre(10);
            let ln_r1 = r1.ln();
            let mut sum = 0.0;
            for p in 0..panels {
                let mid = (p as f64 + 0.5) * width;
                for &(x, w) in &nodes {
                    let u = mid + 0.5 * width * x;
                    let r = if u == 0.0 { r1 } else { (ln_r1 + u).exp() };
                    sum += w * excess(r) * r;
                }
            }
            Ok((dr + 0.5 * width * sum) / C)
        }
    }
}

/// Proper time at b when a photon sent by a at its proper time τ* arrives.
pub fn arrival_proper_time(tau_star: f64, r_a: f64, r_b: f64, body: &BodyConfig, kind: MetricKind) -> Result<f64> {
    let l_b = lapse_in(r_b, body, kind)?;
    let ratio_m1 = (0.5 * delta_ln_lapse_squared(r_a, r_b - r_a, body, kind)?).exp_m1();
    let t_c = if r_a == r_b { 0.0 } else { light_coordinate_time(r_a.min(r_b), r_a.max(r_b), body, kind)? };
    Ok(tau_star + (tau_star * ratio_m1 + l_b * t_c))
}

/// Smallest τ* for which a photon sent by a at τ* reaches b before b's clock
/// shows τ*. Needs b deeper in the potential (r_b < r_a).
pub fn min_tau_for_order(r_a: f64, r_b: f64, body: &BodyConfig, kind: MetricKind) -> Result<f64> {
    if !(r_b < r_a) {
        return Err(Error::Parameter(format!("ordering needs r_b < r_a, got r_a = {r_a}, r_b = {r_b}")));
    }
    let l_b = lapse_in(r_b, body, kind)?;
    let t_c = light_coordinate_time(r_b, r_a, body, kind)?;
    // 1 − l_b/l_a
    let denom = -(-0.5 * delta_ln_lapse_squared(r_b, r_a - r_b, body, kind)?).exp_m1();
    let threshold = l_b * t_c / denom;
    if !(denom > 0.0) || !threshold.is_finite() {
        return Err(Error::Degenerate("no dilation difference to order the events".into()));
    }
    Ok(threshold)
}

/// Lower bound on τ_a* such that, with τ_b* equal to the arrival time in the
/// configuration (a at r + L, b at r + L + h), the swapped configuration
/// (a at r, b at r + h) orders the events the other way.
pub fn asymmetric_order_threshold(r: f64, h: f64, l: f64, body: &BodyConfig, kind: MetricKind) -> Result<f64> {
    if !(r > 0.0 && h > 0.0) {
        return Err(Error::Parameter("r and h must be positive".into()));
    }
    if !(l > 0.0) {
        return Err(Error::Degenerate("L = 0 makes both configurations identical".into()));
    }
    body.check_weak_field(r)?;
    let (a, b, c, d) = (r, r + l, r + h, r + l + h);
    let l_a = lapse_in(a, body, kind)?;
    let up_far = lapse_ratio(c, d, body, kind)?;
    let t_far = light_coordinate_time(b, d, body, kind)?;
    let t_near = light_coordinate_time(a, c, body, kind)?;
    // 1 − l(a) l(d) / (l(b) l(c))
    let denom = match kind {
        MetricKind::SchwarzschildStandard => {
            let s = body.schwarzschild_radius();
            let x = -s * l * h * (2.0 * r + l + h - s)
                / (a * b * c * d)
                / (lapse_squared(b, body, kind)? * lapse_squared(c, body, kind)?);
            -(0.5 * x.ln_1p()).exp_m1()
        }
        MetricKind::IsotropicWeakField { .. } => {
            let near = delta_ln_lapse_squared(a, h, body, kind)?;
            let far = delta_ln_lapse_squared(b, h, body, kind)?;
            -(0.5 * (far - near)).exp_m1()
        }
    };
    let threshold = l_a * (up_far * t_far + t_near) / denom;
    if !(denom > 0.0) || !threshold.is_finite() {
        return Err(Error::Degenerate("configurations cannot order the events oppositely".into()));
    }
    Ok(threshold)
}

fn check_height(body: &BodyConfig, h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Parameter(format!("height must be positive, got {h}")));
    }
    check_radius(body.radius, body)
}

/// Δt_r/Δt_c = l(R+h)/(l(R+h) − l(R)) in Schwarzschild coordinates.
pub fn switch_ratio_exact(body: &BodyConfig, h: f64) -> Result<f64> {
    check_height(body, h)?;
    let (r, s) = (body.radius, body.schwarzschild_radius());
    let x = s * h / ((r + h) * (r - s));
    // 1 − l(R)/l(R+h)
    let denom = -(-0.5 * x.ln_1p()).exp_m1();
    if !(denom > 0.0) {
        return Err(Error::Degenerate("no dilation difference over h".into()));
    }
    Ok(1.0 / denom)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakFieldRatio {
    pub ratio: f64,
    /// c²/(g h)
    pub gravity_term: f64,
    /// −(c²/2) R₀₁₀₁/g²
    pub curvature_term: f64,
}

/// Weak-field expansion of the switch ratio with g = GM/R² and
/// R₀₁₀₁ = −c² R_S/R³.
pub fn switch_ratio_weak_field(body: &BodyConfig, h: f64) -> Result<WeakFieldRatio> {
    check_height(body, h)?;
    body.check_weak_field(body.radius)?;
    let g = body.surface_gravity();
    let r = body.radius;
    let riemann = -C * C * body.schwarzschild_radius() / (r * r * r);
    let gravity_term = C * C / (g * h);
    let curvature_term = -0.5 * C * C * riemann / (g * g);
    Ok(WeakFieldRatio { ratio: gravity_term + curvature_term, gravity_term, curvature_term })
}

/// Heights and horizontal separation of the protocol. The target crosses d
/// at height h in Δt_c, d/c for a photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchGeometry {
    pub h: f64,
    pub d: f64,
    pub dt_c: f64,
}

impl SwitchGeometry {
    pub fn photon(h: f64, d: f64) -> Result<Self> {
        Self::with_crossing_time(h, d, d / C)
    }

    pub fn with_crossing_time(h: f64, d: f64, dt_c: f64) -> Result<Self> {
        if !(h > 0.0 && d > 0.0 && dt_c > 0.0) {
            return Err(Error::Parameter("h, d and dt_c must be positive".into()));
        }
        Ok(SwitchGeometry { h, d, dt_c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationReport {
    /// Δt_r = Δt_v + Δt_s
    pub dt_r: f64,
    pub dt_exp_bounds: (f64, f64),
}

pub fn protocol_duration(body: &BodyConfig, geom: &SwitchGeometry) -> Result<DurationReport> {
    let dt_r = switch_ratio_exact(body, geom.h)? * geom.dt_c;
    Ok(DurationReport { dt_r, dt_exp_bounds: (dt_r, 2.0 * dt_r) })
}

/// Δt_r h/d, the prefactor in Δt_r ≈ k·d/h.
pub fn duration_coefficient(body: &BodyConfig, geom: &SwitchGeometry) -> Result<f64> {
    Ok(protocol_duration(body, geom)?.dt_r * geom.h / geom.d)
}

/// c R² d/(G M h), the near-surface estimate of Δt_r.
pub fn simple_duration(body: &BodyConfig, geom: &SwitchGeometry) -> f64 {
    C * body.radius * body.radius * geom.d / (G * body.mass * geom.h)
}

/// Two-level clock (|0> + e^{iφ₀}|1>)/√2 with gap E.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockModel {
    energy_gap: f64,
    initial_phase: f64,
}

impl ClockModel {
    /// A zero gap is allowed and describes a clock that does not tick.
    pub fn new(energy_gap: f64, initial_phase: f64) -> Result<Self> {
        if !(energy_gap >= 0.0 && energy_gap.is_finite()) || !initial_phase.is_finite() {
            return Err(Error::Parameter(format!("invalid clock: gap {energy_gap}, phase {initial_phase}")));
        }
        Ok(ClockModel { energy_gap, initial_phase })
    }

    pub fn energy_gap(&self) -> f64 {
        self.energy_gap
    }

    pub fn initial_phase(&self) -> f64 {
        self.initial_phase
    }

    /// State after resting for coordinate time t_k at potential φ_k for each
    /// segment, with τ = Σ t_k(1 + φ_k).
    fn evolve(&self, segments: &[(f64, f64)]) -> ComplexVector {
        let w = self.energy_gap / HBAR;
        // The large common phase and the small dilation shift are kept apart
        // so that shifts differing between branches are not lost to rounding.
        let common: f64 = segments.iter().map(|&(_, t)| w * t).sum();
        let shift: f64 = segments.iter().map(|&(phi, t)| w * t * phi).sum();
        let amp =
            C64::from_polar(1.0, self.initial_phase) * C64::from_polar(1.0, -common) * C64::from_polar(1.0, -shift);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        ComplexVector::new(vec![C64::new(r, 0.0), amp * r])
    }
}

/// K_AB places clock a at r_a and b at r_b; K_BA swaps the positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Configuration {
    KAB,
    KBA,
}

fn clock_potentials(r_a: f64, r_b: f64, body: &BodyConfig, t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!("time must be nonnegative, got {t}")));
    }
    for r in [r_a, r_b] {
        check_radius(r, body)?;
        body.check_weak_field(r)?;
    }
    Ok((body.potential_over_c2(r_a), body.potential_over_c2(r_b)))
}

/// Clocks a ⊗ b after coordinate time t in one configuration.
#[allow(clippy::too_many_arguments)]
pub fn grav_switch_clock_state(
    clock_a: &ClockModel,
    clock_b: &ClockModel,
    r_a: f64,
    r_b: f64,
    body: &BodyConfig,
    t: f64,
    config: Configuration,
) -> Result<ComplexVector> {
    let (pa, pb) = clock_potentials(r_a, r_b, body, t)?;
    let (phi_a, phi_b) = match config {
        Configuration::KAB => (pa, pb),
        Configuration::KBA => (pb, pa),
    };
    Ok(clock_a.evolve(&[(phi_a, t)]).kron(&clock_b.evolve(&[(phi_b, t)])))
}

/// Control ⊗ clock a ⊗ clock b with the control in |+> selecting K_AB (|0>)
/// or K_BA (|1>). With `resync`, each branch then spends another t in the
/// other configuration.
#[allow(clippy::too_many_arguments)]
pub fn grav_switch_joint_state(
    clock_a: &ClockModel,
    clock_b: &ClockModel,
    r_a: f64,
    r_b: f64,
    body: &BodyConfig,
    t: f64,
    resync: bool,
) -> Result<ComplexVector> {
    let (pa, pb) = clock_potentials(r_a, r_b, body, t)?;
    let branch = |first: (f64, f64), second: (f64, f64)| {
        let (sa, sb): (Vec<_>, Vec<_>) = if resync {
            (vec![(first.0, t), (second.0, t)], vec![(first.1, t), (second.1, t)])
        } else {
            (vec![(first.0, t)], vec![(first.1, t)])
        };
        clock_a.evolve(&sa).kron(&clock_b.evolve(&sb))
    };
    let ab = branch((pa, pb), (pb, pa));
    let ba = branch((pb, pa), (pa, pb));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let control0 = ComplexVector::new(vec![C64::new(r, 0.0), C64::new(0.0, 0.0)]);
    let control1 = ComplexVector::new(vec![C64::new(0.0, 0.0), C64::new(r, 0.0)]);
    Ok(control0.kron(&ab).add(&control1.kron(&ba)))
}

/// Tr(ρ_c²) of the first qubit of a pure state.
pub fn control_purity(state: &ComplexVector) -> Result<f64> {
    if !state.dim().is_multiple_of(2) || state.dim() == 0 {
        return Err(Error::Dimension("state must start with a qubit".into()));
    }
    let dims = SubsystemDims::new(&[2, state.dim() / 2])?;
    let rho = partial_trace(&state.projector(), &dims, &[0])?;
    Ok(rho.trace_product(&rho).re)
}

/// Control purity (before, after) a configuration swap of equal duration.
pub fn grav_switch_resync_purity(
    clock_a: &ClockModel,
    clock_b: &ClockModel,
    r_a: f64,
    r_b: f64,
    body: &BodyConfig,
    t: f64,
) -> Result<(f64, f64)> {
    let before = control_purity(&grav_switch_joint_state(clock_a, clock_b, r_a, r_b, body, t, false)?)?;
    let after = control_purity(&grav_switch_joint_state(clock_a, clock_b, r_a, r_b, body, t, true)?)?;
    Ok((before, after))
}
