use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, SQRT_2};

use causal_switch::agent::{
    apply_agent_a_then_b, apply_agent_b_then_a, balanced_paths, crossing_rotation_angle, postselect, rotated_level,
    run_switch_model, trigger_params, AgentAmplitudes, ModelState, SwitchOutput,
};
use causal_switch::grav::{
    arrival_proper_time, asymmetric_order_threshold, duration_coefficient, light_coordinate_time, min_tau_for_order,
    protocol_duration, simple_duration, switch_ratio_exact, switch_ratio_weak_field, BodyConfig, MetricKind,
    SwitchGeometry,
};
use causal_switch::linalg::{min_eigenvalue, pauli, ComplexMatrix, ComplexVector};
use causal_switch::order::{
    chsh_settings, chsh_value, chsh_value_mixed, control_measurement, guess_probabilities, ocb_reduced_closed_form,
    reduced_for_alice, reduced_for_bob, success_probability, switch_process_vector, switch_supermap_state,
    switch_via_process, temporal_order_state, temporal_order_unitaries, GameStrategy, SwitchSpec,
};
use causal_switch::process::{ocb_process, state_process, validate_process};
use causal_switch::random;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{num, Check, Report};
use crate::{CliError, Params, Scenario};

pub(crate) enum Failure {
    Cli(CliError),
    Model(causal_switch::Error),
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        Failure::Cli(e)
    }
}

impl From<causal_switch::Error> for Failure {
    fn from(e: causal_switch::Error) -> Self {
        Failure::Model(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

const MAX_SAMPLES: i64 = 1_000_000;

pub(crate) fn run(p: &Params, seed: u64, report: &mut Report) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match p.scenario {
        Scenario::OcbGame => ocb_game(p, report),
        Scenario::SwitchContract => switch_contract(p, &mut rng, report),
        Scenario::ChshTemporal => chsh_temporal(p, &mut rng, report),
        Scenario::ValidateProcess => process_validity(p, &mut rng, report),
        Scenario::GravDuration => grav_duration(p, report),
        Scenario::GravOrder => grav_order(p, report),
        Scenario::Trigger => trigger(p, report),
        Scenario::AgentSwitch => agent_switch(p, report),
    }
}

fn ocb_game(p: &Params, report: &mut Report) -> Outcome {
    let tol = p.tolerance("tol")?;
    let w = ocb_process();
    let s = GameStrategy::default();
    let succ = success_probability(&w, &s)?;
    let (alice, bob) = guess_probabilities(&w, &s)?;
    let mut dev_bob: f64 = 0.0;
    let mut dev_alice: f64 = 0.0;
    for bit in 0..2 {
        let closed = ocb_reduced_closed_form(bit)?;
        dev_bob = dev_bob.max(reduced_for_bob(&w, &s, bit)?.max_abs_diff(&closed));
        dev_alice = dev_alice.max(reduced_for_alice(&w, &s, bit, 0)?.max_abs_diff(&closed));
    }
    report.number("success_probability", succ);
    report.number("alice_guess_probability", alice);
    report.number("bob_guess_probability", bob);
    report.number("causal_bound", 0.75);
    report.number("reduced_bob_deviation", dev_bob);
    report.number("reduced_alice_deviation", dev_alice);
    report.check(Check::close("success_probability", (2.0 + SQRT_2) / 4.0, succ, tol));
    report.check(Check::at_least("exceeds_causal_bound", 0.75, succ, 0.0));
    report.check(Check::close("reduced_bob_closed_form", 0.0, dev_bob, tol));
    report.check(Check::close("reduced_alice_closed_form", 0.0, dev_alice, tol));
    Ok(())
}

fn switch_contract(p: &Params, rng: &mut ChaCha8Rng, report: &mut Report) -> Outcome {
    let samples = p.integer("samples", 1, MAX_SAMPLES)?;
    let tol = p.tolerance("tol")?;
    let mut min_fidelity: f64 = 1.0;
    let mut max_dev: f64 = 0.0;
    for _ in 0..samples {
        let ua = random::unitary(rng, 2);
        let ub = random::unitary(rng, 2);
        let spec = SwitchSpec::balanced(random::pure_state(rng, 2))?;
        let via = switch_via_process(&ua, &ub, &spec)?;
        let direct = switch_supermap_state(&ua, &ub, &spec)?;
        min_fidelity = min_fidelity.min(via.fidelity(&direct));
        max_dev = max_dev.max(via.max_abs_diff(&direct));
    }
    let norm = switch_process_vector(&SwitchSpec::balanced(ComplexVector::basis(2, 0))?).norm();
    // σ_x and σ_z anticommute: on |0> only the − outcome survives
    let anti = switch_supermap_state(&pauli::x(), &pauli::z(), &SwitchSpec::balanced(ComplexVector::basis(2, 0))?)?;
    let (_, p_minus) = control_measurement(&anti, -1)?;
    report.number("samples", samples as f64);
    report.number("min_fidelity", min_fidelity);
    report.number("max_amplitude_deviation", max_dev);
    report.number("process_vector_norm", norm);
    report.number("anticommuting_minus_probability", p_minus);
    report.check(Check::close("min_fidelity", 1.0, min_fidelity, tol));
    report.check(Check::close("max_amplitude_deviation", 0.0, max_dev, tol));
    report.check(Check::close("process_vector_norm", 2.0, norm, tol));
    report.check(Check::close("anticommuting_minus_probability", 1.0, p_minus, tol));
    Ok(())
}

fn chsh_temporal(p: &Params, rng: &mut ChaCha8Rng, report: &mut Report) -> Outcome {
    let samples = p.integer("samples", 1, MAX_SAMPLES)?;
    let terms = p.integer("terms", 1, 64)? as usize;
    let tol = p.tolerance("tol")?;
    let [a1, b1, a2, b2] = temporal_order_unitaries();
    let up = ComplexVector::basis(2, 0);
    let settings = chsh_settings();
    let minus = chsh_value(&temporal_order_state(&a1, &b1, &a2, &b2, &up, &up, -1)?, &settings)?;
    let plus = chsh_value(&temporal_order_state(&a1, &b1, &a2, &b2, &up, &up, 1)?, &settings)?;
    let mut max_sep: f64 = 0.0;
    for _ in 0..samples {
        let rho = random::separable_state(rng, 2, 2, terms);
        max_sep = max_sep.max(chsh_value_mixed(&rho, &settings)?.abs());
    }
    report.number("chsh_minus", minus);
    report.number("chsh_plus", plus);
    report.number("max_separable_chsh", max_sep);
    report.check(Check::close("chsh_minus", 2.0 * SQRT_2, minus, tol));
    report.check(Check::close("chsh_plus", -2.0 * SQRT_2, plus, tol));
    report.check(Check::at_most("separable_bound", 2.0, max_sep, tol));
    Ok(())
}

fn process_validity(p: &Params, rng: &mut ChaCha8Rng, report: &mut Report) -> Outcome {
    let which = p.choice("process", &["ocb", "maximally-mixed"])?;
    let samples = p.integer("samples", 1, MAX_SAMPLES)? as usize;
    let psd_tol = p.tolerance("psd_tol")?;
    let norm_tol = p.tolerance("norm_tol")?;
    let w = match which {
        "ocb" => ocb_process(),
        _ => state_process(&ComplexMatrix::identity(4).scale_real(0.25), [2; 4])?,
    };
    let validity = validate_process(&w, samples, rng)?;
    let min_eig = min_eigenvalue(w.matrix())?;
    let trace = w.matrix().trace().re;
    let [_, ao, _, bo] = w.dims();
    report.output("psd", validity.psd);
    report.output("trace_ok", validity.trace_ok);
    report.number("min_eigenvalue", min_eig);
    report.number("trace", trace);
    report.number("max_norm_deviation", validity.max_norm_deviation);
    report.check(Check::at_least("min_eigenvalue", 0.0, min_eig, psd_tol));
    report.check(Check::close("trace", (ao * bo) as f64, trace, psd_tol));
    report.check(Check::at_most("max_norm_deviation", 0.0, validity.max_norm_deviation, norm_tol));
    Ok(())
}

fn body(p: &Params) -> Result<BodyConfig, Failure> {
    Ok(match p.choice("body", &["earth", "small-mass", "custom"])? {
        "earth" => BodyConfig::earth(),
        "small-mass" => BodyConfig::small_mass(),
        _ => BodyConfig::new(p.num("mass"), p.num("radius"))?,
    })
}

fn grav_duration(p: &Params, report: &mut Report) -> Outcome {
    let body = body(p)?;
    let h = p.positive("h")?;
    let geom = SwitchGeometry::photon(h, p.positive("d")?)?;
    let duration = protocol_duration(&body, &geom)?;
    let coefficient = duration_coefficient(&body, &geom)?;
    report.number("schwarzschild_radius", body.schwarzschild_radius());
    report.number("surface_gravity", body.surface_gravity());
    report.number("crossing_time", geom.dt_c);
    report.number("ratio_exact", switch_ratio_exact(&body, h)?);
    match switch_ratio_weak_field(&body, h) {
        Ok(weak) => {
            report.number("ratio_weak_field", weak.ratio);
            report.number("gravity_term", weak.gravity_term);
            report.number("curvature_term", weak.curvature_term);
        }
        Err(e) => report.output("ratio_weak_field", format!("unavailable: {e}")),
    }
    report.number("dt_r", duration.dt_r);
    report.number("dt_exp_lo", duration.dt_exp_bounds.0);
    report.number("dt_exp_hi", duration.dt_exp_bounds.1);
    report.number("coefficient", coefficient);
    report.number("near_surface_estimate", simple_duration(&body, &geom));
    report.check(Check::within("dt_r", p.num("window_lo"), p.num("window_hi"), duration.dt_r));
    if p.text("body") == "earth" {
        let rel = p.tolerance("coefficient_tol")?;
        report.check(Check::relative("coefficient", p.num("coefficient"), coefficient, rel));
    }
    Ok(())
}

fn grav_order(p: &Params, report: &mut Report) -> Outcome {
    let body = body(p)?;
    let kind = match p.choice("metric", &["standard", "isotropic"])? {
        "standard" => MetricKind::SchwarzschildStandard,
        _ => MetricKind::isotropic(),
    };
    let (r_a, r_b) = (p.positive("r_a")?, p.positive("r_b")?);
    let (h, l) = (p.positive("h")?, p.positive("length")?);
    let margin = p.positive("margin")?;
    if margin >= 1.0 {
        return Err(p.invalid("margin", "must be below 1").into());
    }
    let (up, down) = (1.0 + margin, 1.0 - margin);

    let min_tau = min_tau_for_order(r_a, r_b, &body, kind)?;
    let (tau_hi, tau_lo) = (up * min_tau, down * min_tau);
    let arrival_hi = arrival_proper_time(tau_hi, r_a, r_b, &body, kind)?;
    let arrival_lo = arrival_proper_time(tau_lo, r_a, r_b, &body, kind)?;
    report.number("light_time", light_coordinate_time(r_b, r_a, &body, kind)?);
    report.number("min_tau", min_tau);
    report.number("tau_above", tau_hi);
    report.number("arrival_above", arrival_hi);
    report.number("tau_below", tau_lo);
    report.number("arrival_below", arrival_lo);
    report.check(Check::holds("ordered_above_min_tau", arrival_hi < tau_hi));
    report.check(Check::holds("unordered_below_min_tau", arrival_lo > tau_lo));

    // a at r+L and b at r+L+h, then the pair lowered by L with roles swapped
    let r = r_b;
    let threshold = asymmetric_order_threshold(r, h, l, &body, kind)?;
    let round_trip = |tau_a: f64| -> causal_switch::Result<f64> {
        let tau_b = arrival_proper_time(tau_a, r + l, r + l + h, &body, kind)?;
        arrival_proper_time(tau_b, r + h, r, &body, kind)
    };
    let (tau_hi, tau_lo) = (up * threshold, down * threshold);
    let back_hi = round_trip(tau_hi)?;
    let back_lo = round_trip(tau_lo)?;
    report.number("asymmetric_threshold", threshold);
    report.number("swapped_arrival_above", back_hi);
    report.number("swapped_arrival_below", back_lo);
    report.check(Check::holds("swapped_order_above_threshold", back_hi <= tau_hi));
    report.check(Check::holds("no_swapped_order_below_threshold", back_lo > tau_lo));
    Ok(())
}

fn trigger(p: &Params, report: &mut Report) -> Outcome {
    let tol = p.tolerance("tol")?;
    let tau_star = p.num("tau_star");
    let params = trigger_params(tau_star, p.num("delta"), p.num("v0"), p.num("m"))?;
    let rotation = crossing_rotation_angle(&params);
    let flags = params.regime();
    let fidelity = rotated_level(&params).fidelity(&ComplexVector::basis(2, 1));
    report.number("omega", params.omega);
    report.number("period", params.period());
    report.number("sigma", params.sigma);
    report.number("amplitude", params.amplitude);
    report.number("alpha0", params.alpha0);
    report.number("crossing_time", params.crossing_time());
    report.number("rotation_angle", rotation.angle);
    report.output("regime_ok", rotation.regime_ok);
    report.output("amplitude_over_zone", flags.amplitude_over_zone);
    report.output("zone_over_width", flags.zone_over_width);
    report.output("energy_over_barrier", flags.energy_over_barrier);
    report.number("fidelity_with_a1", fidelity);
    report.check(Check::close("rotation_angle", FRAC_PI_2, rotation.angle, tol));
    report.check(Check::close("fidelity_with_a1", 1.0, fidelity, tol));
    report.check(Check::relative("period", 4.0 * tau_star, params.period(), tol));
    Ok(())
}

fn state_json(v: &ComplexVector) -> Value {
    Value::Array(v.data().iter().map(|z| json!([num(z.re), num(z.im)])).collect())
}

fn agent_switch(p: &Params, report: &mut Report) -> Outcome {
    let input = p.integer("input", 1, 5)? as usize;
    let zeta = p.integer("zeta", 0, 3)? as u8;
    let sign: i8 = match p.integer("sign", -1, 1)? {
        0 => return Err(p.invalid("sign", "must be 1 or -1").into()),
        s => s as i8,
    };
    let tol = p.tolerance("tol")?;
    let amps = AgentAmplitudes::ideal();
    let target = ComplexVector::basis(5, input - 1);
    let start = ModelState::input(&target)?;
    let mut totals = [0.0; 2];
    for (total, out) in
        totals.iter_mut().zip([apply_agent_a_then_b(&amps, &start)?, apply_agent_b_then_a(&amps, &start)?])
    {
        for z in 0..4 {
            *total += postselect(&out, z)?.1;
        }
    }
    let run = run_switch_model(&amps, &target, balanced_paths(), zeta, sign)?;
    report.number("postselection_probability", run.postselection_probability);
    report.number("outcome_probability", run.outcome_probability);
    report.number("postselection_total_ab", totals[0]);
    report.number("postselection_total_ba", totals[1]);
    let e = |i: usize| ComplexVector::basis(5, i - 1);
    let expected = match (input, zeta, sign) {
        (1, 3, s) => Some(e(3).add(&e(5).scale_real(s as f64)).scale_real(FRAC_1_SQRT_2)),
        (4, 2, 1) => Some(e(5)),
        _ => None,
    };
    match &run.output {
        SwitchOutput::Target(t) => {
            report.output("output", "target");
            report.output("target_state", state_json(t));
        }
        SwitchOutput::Joint(_) => report.output("output", "joint"),
    }
    report.check(Check::close("postselection_total_ab", 1.0, totals[0], tol));
    report.check(Check::close("postselection_total_ba", 1.0, totals[1], tol));
    if let Some(expected) = expected {
        let fidelity = match &run.output {
            SwitchOutput::Target(t) => t.fidelity(&expected),
            SwitchOutput::Joint(_) => 0.0,
        };
        report.number("target_fidelity", fidelity);
        report.check(Check::close("target_fidelity", 1.0, fidelity, tol));
    }
    Ok(())
}
