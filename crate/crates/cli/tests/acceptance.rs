//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the summary prints in order; any failure exits nonzero.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use causal_switch::agent::{
    apply_agent_a_then_b, apply_agent_b_then_a, balanced_paths, crossing_rotation_angle, postselect, rotated_level,
    run_switch_model, trigger_params, AgentAmplitudes, ModelState, SwitchOutput,
};
use causal_switch::grav::{
    grav_switch_resync_purity, protocol_duration, switch_ratio_exact, switch_ratio_weak_field, BodyConfig, ClockModel,
    SwitchGeometry, C, EARTH_RADIUS, G, HBAR,
};
use causal_switch::linalg::{hermitian_eigen, is_psd, ComplexMatrix, ComplexVector};
use causal_switch::ops::{
    apply_choi, apply_operation, choi_of_operation, choi_vector_of_unitary, kraus_from_choi, stinespring_dilation,
    ChoiConvention, Operation,
};
use causal_switch::order::{
    chsh_settings, chsh_value, chsh_value_mixed, contract_switch, reduced_for_alice, reduced_for_bob,
    success_probability, switch_process_vector, switch_supermap_state, temporal_order_state, temporal_order_unitaries,
    GameStrategy, SwitchSpec,
};
use causal_switch::process::{
    causal_mixture, channel_process, channel_process_with, ocb_process, probability, validate_process, ProcessMatrix,
    Signaling,
};
use causal_switch::{random, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c1_ocb_violation() -> Verdict {
    let p = ok(success_probability(&ocb_process(), &GameStrategy::default()))?;
    let exact = (2.0 + 2f64.sqrt()) / 4.0;
    ensure((p - exact).abs() <= 1e-9, || format!("P_succ = {p}, expected {exact}"))?;
    ensure(p > 0.75, || format!("P_succ = {p} does not beat 3/4"))?;
    Ok(format!("P_succ = {p:.12}"))
}

fn one_way(rng: &mut ChaCha8Rng, direction: Signaling) -> Result<ProcessMatrix, String> {
    let rank = rng.random_range(1..=2);
    let rho = random::density_matrix(rng, 2, rank);
    let channel = random::any_cptp_operation(rng, 2, 2);
    ok(channel_process_with(&rho, &choi_of_operation(&channel, ChoiConvention::Transposed), direction, 2))
}

fn c2_causal_bound() -> Verdict {
    let mut rng = rng(2);
    let strategy = GameStrategy::default();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let ba = one_way(&mut rng, Signaling::BobToAlice)?;
        let ab = one_way(&mut rng, Signaling::AliceToBob)?;
        let q = rng.random_range(0.0..=1.0);
        let w = ok(causal_mixture(&ba, &ab, q))?;
        let p = ok(success_probability(&w, &strategy))?;
        worst = worst.max(p);
    }
    ensure(worst <= 0.75 + 1e-9, || format!("max P_succ = {worst}"))?;
    Ok(format!("max P_succ over 200 processes = {worst:.6}"))
}

fn c3_reduced_matrices() -> Verdict {
    let w = ocb_process();
    let s = GameStrategy::default();
    let r = 1.0 / (2.0 * 2f64.sqrt());
    let mut worst: f64 = 0.0;
    for bit in 0..2u8 {
        let sg = if bit == 0 { r } else { -r };
        // ½(𝟙 ± σ_z/√2) ⊗ 𝟙 written out entrywise
        let closed = ComplexMatrix::diagonal(&[
            C64::new(0.5 + sg, 0.0),
            C64::new(0.5 + sg, 0.0),
            C64::new(0.5 - sg, 0.0),
            C64::new(0.5 - sg, 0.0),
        ]);
        worst = worst.max(ok(reduced_for_bob(&w, &s, bit))?.max_abs_diff(&closed));
        worst = worst.max(ok(reduced_for_alice(&w, &s, bit, 0))?.max_abs_diff(&closed));
    }
    ensure(worst <= 1e-9, || format!("deviation {worst:e}"))?;
    Ok(format!("max entry deviation {worst:.1e}"))
}

fn c4_switch_contraction() -> Verdict {
    let mut rng = rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let ua = random::unitary(&mut rng, 2);
        let ub = random::unitary(&mut rng, 2);
        let psi = random::pure_state(&mut rng, 2);
        let spec = ok(SwitchSpec::balanced(psi.clone()))?;
        let contracted = ok(contract_switch(
            &switch_process_vector(&spec),
            &ok(choi_vector_of_unitary(&ua))?,
            &ok(choi_vector_of_unitary(&ub))?,
        ))?;
        // 1/√2 (U_B U_A|ψ>|0> + U_A U_B|ψ>|1>), target ⊗ control
        let ba = (&ub * &ua).apply(&psi);
        let ab = (&ua * &ub).apply(&psi);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let explicit = ComplexVector::new(vec![ba[0] * r, ab[0] * r, ba[1] * r, ab[1] * r]);
        let supermap = ok(switch_supermap_state(&ua, &ub, &spec))?;
        for f in [contracted.fidelity(&explicit), contracted.fidelity(&supermap)] {
            worst = worst.max((f - 1.0).abs());
        }
        worst = worst.max(contracted.max_abs_diff(&explicit));
    }
    ensure(worst <= 1e-9, || format!("deviation {worst:e}"))?;
    Ok(format!("50 pairs, max |1 − F| or amplitude error {worst:.1e}"))
}

fn c5_chsh() -> Verdict {
    let [a1, b1, a2, b2] = temporal_order_unitaries();
    let up = ComplexVector::basis(2, 0);
    let settings = chsh_settings();
    let target = 2.0 * 2f64.sqrt();
    let minus = ok(chsh_value(&ok(temporal_order_state(&a1, &b1, &a2, &b2, &up, &up, -1))?, &settings))?;
    let plus = ok(chsh_value(&ok(temporal_order_state(&a1, &b1, &a2, &b2, &up, &up, 1))?, &settings))?;
    ensure((minus - target).abs() <= 1e-9, || format!("ψ₋ gives {minus}"))?;
    ensure((plus + target).abs() <= 1e-9, || format!("ψ₊ gives {plus}"))?;
    let mut rng = rng(5);
    let mut worst: f64 = 0.0;
    for k in 0..500 {
        let rho = random::separable_state(&mut rng, 2, 2, 1 + k % 4);
        worst = worst.max(ok(chsh_value_mixed(&rho, &settings))?.abs());
    }
    ensure(worst <= 2.0 + 1e-9, || format!("separable state reached {worst}"))?;
    Ok(format!("ψ₋ → {minus:.9}, ψ₊ → {plus:.9}, separable max {worst:.4}"))
}

fn c6_channel_process() -> Verdict {
    let mut rng = rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let rho = random::density_matrix(&mut rng, 2, 2);
        let channel = random::any_cptp_operation(&mut rng, 2, 2);
        let w = ok(channel_process(&rho, &choi_of_operation(&channel, ChoiConvention::Transposed)))?;
        let m = random::cptp_operation(&mut rng, 2, 2, 2);
        let n = random::cptp_operation(&mut rng, 2, 2, 2);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let m_el = ok(Operation::new(2, 2, vec![m.kraus()[i].clone()]))?;
            let n_el = ok(Operation::new(2, 2, vec![n.kraus()[j].clone()]))?;
            let p = ok(probability(
                &w,
                &choi_of_operation(&m_el, ChoiConvention::Transposed),
                &choi_of_operation(&n_el, ChoiConvention::Transposed),
            ))?;
            let direct = ok(apply_operation(&n_el, &rho))?;
            let direct = ok(apply_operation(&channel, &direct))?;
            let direct = ok(apply_operation(&m_el, &direct))?.trace().re;
            worst = worst.max((p - direct).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("deviation {worst:e}"))?;
    Ok(format!("200 outcome pairs, max deviation {worst:.1e}"))
}

fn c7_round_trips() -> Verdict {
    let mut rng = rng(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d_in = rng.random_range(1..=3);
        let d_out = rng.random_range(1..=3);
        let mut op = random::any_cptp_operation(&mut rng, d_in, d_out);
        if rng.random_bool(0.3) {
            let s: f64 = rng.random_range(0.2..1.0);
            op = ok(Operation::new(d_in, d_out, op.kraus().iter().map(|k| k.scale_real(s.sqrt())).collect()))?;
        }
        let rho = random::density_matrix(&mut rng, d_in, d_in);
        let direct = ok(apply_operation(&op, &rho))?;
        for conv in [ChoiConvention::Plain, ChoiConvention::Transposed] {
            let choi = choi_of_operation(&op, conv);
            worst = worst.max(ok(apply_choi(&choi, &rho))?.max_abs_diff(&direct));
            let back = ok(kraus_from_choi(&choi))?;
            worst = worst.max(ok(apply_operation(&back, &rho))?.max_abs_diff(&direct));
            let rank = ok(hermitian_eigen(choi.matrix()))?.values.iter().filter(|&&v| v > 1e-9).count();
            ensure(back.kraus().len() == rank, || {
                format!("{} Kraus operators for Choi rank {rank}", back.kraus().len())
            })?;
        }
        let dil = ok(stinespring_dilation(&op))?;
        ensure(dil.unitary.is_unitary(1e-9), || "dilation is not unitary".into())?;
        worst = worst.max(ok(dil.apply(&rho))?.max_abs_diff(&direct));
    }
    ensure(worst <= 1e-9, || format!("deviation {worst:e}"))?;
    Ok(format!("100 operations, max action deviation {worst:.1e}"))
}

fn c8_process_validity() -> Verdict {
    let w = ocb_process();
    ensure(ok(is_psd(w.matrix(), 1e-9))?, || "not PSD".into())?;
    let tr = w.matrix().trace().re;
    ensure((tr - 4.0).abs() <= 1e-9, || format!("Tr W = {tr}"))?;
    let report = ok(validate_process(&w, 500, &mut rng(8)))?;
    ensure(report.max_norm_deviation < 1e-8, || format!("normalization deviation {}", report.max_norm_deviation))?;
    Ok(format!("Tr W = {tr}, max normalization deviation {:.1e}", report.max_norm_deviation))
}

fn c9_earth_timing() -> Verdict {
    let earth = BodyConfig::earth();
    let (d, h) = (0.3e-6, 1.0);
    let dt = ok(protocol_duration(&earth, &ok(SwitchGeometry::photon(h, d))?))?.dt_r;
    ensure((8.0..=10.0).contains(&dt), || format!("Δt_r = {dt} s"))?;
    let coefficient = dt * h / d;
    ensure((coefficient / 3e7 - 1.0).abs() <= 0.05, || format!("coefficient {coefficient:e}"))?;
    // first-order oracle: (c²/gh)(d/c)
    let g = G * earth.mass() / (EARTH_RADIUS * EARTH_RADIUS);
    let oracle = C * d / (g * h);
    ensure(((dt - oracle) / oracle).abs() < 1e-6, || format!("oracle {oracle} vs {dt}"))?;
    Ok(format!("Δt_r = {dt:.4} s, coefficient {coefficient:.4e} s"))
}

fn c10_small_mass_timing() -> Verdict {
    let body = ok(BodyConfig::new(1e-10, 1e-15))?;
    let mut seen = Vec::new();
    for h in [1e-12, 1e-10, 1e-6, 1.0] {
        let dt = ok(protocol_duration(&body, &ok(SwitchGeometry::photon(h, 1e-15))?))?.dt_r;
        ensure((4e-2..=6e-2).contains(&dt), || format!("h = {h}: Δt_r = {dt} s"))?;
        seen.push(dt);
    }
    let lo = seen.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = seen.iter().copied().fold(0.0, f64::max);
    Ok(format!("Δt_r ∈ [{lo:.4}, {hi:.4}] s for h from 1e3·R to 1e15·R"))
}

fn c11_weak_field() -> Verdict {
    let bodies = [BodyConfig::earth(), BodyConfig::small_mass(), ok(BodyConfig::new(7.35e22, 1.737e6))?];
    let mut worst: f64 = 0.0;
    for body in bodies {
        let r = body.radius();
        ensure(body.schwarzschild_radius() / r <= 1e-8, || "body outside the regime".into())?;
        for k in 0..=60 {
            let h = r * 10f64.powf(-3.0 + k as f64 / 10.0);
            let exact = ok(switch_ratio_exact(&body, h))?;
            let weak = ok(switch_ratio_weak_field(&body, h))?.ratio;
            worst = worst.max(((weak - exact) / exact).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("relative deviation {worst:e}"))?;
    Ok(format!("3 bodies × 61 heights, max relative deviation {worst:.1e}"))
}

fn c12_resync() -> Verdict {
    let earth = BodyConfig::earth();
    let mut rng = rng(12);
    let (mut worst_after, mut best_before): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let r_a = EARTH_RADIUS + rng.random_range(0.0..1e4);
        let r_b = r_a + rng.random_range(1.0..1e4);
        let t = rng.random_range(0.1..100.0);
        let dphi = (earth.potential_over_c2(r_a) - earth.potential_over_c2(r_b)).abs();
        let mut clock =
            || ok(ClockModel::new(HBAR * rng.random_range(0.3..2.8) / (t * dphi), rng.random_range(0.0..6.3)));
        let (a, b) = (clock()?, clock()?);
        let (before, after) = ok(grav_switch_resync_purity(&a, &b, r_a, r_b, &earth, t))?;
        worst_after = worst_after.max((after - 1.0).abs());
        best_before = best_before.max(before);
    }
    ensure(worst_after <= 1e-9, || format!("after-purity off by {worst_after:e}"))?;
    ensure(best_before < 1.0 - 1e-6, || format!("before-purity reached {best_before}"))?;
    Ok(format!("|after − 1| ≤ {worst_after:.1e}, before ≤ {best_before:.6}"))
}

fn c13_trigger() -> Verdict {
    let mut rng = rng(13);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let e = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
        let p = ok(trigger_params(
            e(&mut rng, -3.0, 3.0),
            e(&mut rng, -9.0, -3.0),
            e(&mut rng, -32.0, -18.0),
            e(&mut rng, -27.0, -18.0),
        ))?;
        let angle = crossing_rotation_angle(&p).angle;
        worst = worst.max((angle - std::f64::consts::FRAC_PI_2).abs());
        let v = rotated_level(&p);
        // up to a global phase: no weight on |A₀> and unit modulus on |A₁>
        worst = worst.max(v[0].norm()).max((v[1].norm() - 1.0).abs());
    }
    ensure(worst <= 1e-12, || format!("deviation {worst:e}"))?;
    Ok(format!("50 parameter sets, max deviation {worst:.1e}"))
}

fn c14_agents() -> Verdict {
    let amps = AgentAmplitudes::ideal();
    let e = |i: usize| ComplexVector::basis(5, i - 1);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for s in [1i8, -1] {
        let run = ok(run_switch_model(&amps, &e(1), balanced_paths(), 3, s))?;
        let expected = e(3).add(&e(5).scale_real(s as f64)).scale_real(r);
        match run.output {
            SwitchOutput::Target(t) => {
                ensure((t.fidelity(&expected) - 1.0).abs() <= 1e-9, || format!("sign {s}: {t:?}"))?
            }
            SwitchOutput::Joint(_) => return Err("e_1 output did not factorize".into()),
        }
    }
    let run = ok(run_switch_model(&amps, &e(4), balanced_paths(), 2, 1))?;
    match run.output {
        SwitchOutput::Target(t) => ensure((t.fidelity(&e(5)) - 1.0).abs() <= 1e-9, || format!("e_4 → {t:?}"))?,
        SwitchOutput::Joint(_) => return Err("e_4 output is entangled".into()),
    }
    let mut rng = rng(14);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let target = if k < 5 { e(k + 1) } else { random::pure_state(&mut rng, 5) };
        let input = ok(ModelState::input(&target))?;
        for out in [ok(apply_agent_a_then_b(&amps, &input))?, ok(apply_agent_b_then_a(&amps, &input))?] {
            let mut total = 0.0;
            for z in 0..4 {
                total += ok(postselect(&out, z))?.1;
            }
            worst = worst.max((total - 1.0).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("postselection total off by {worst:e}"))?;
    Ok(format!("targets match, postselection totals within {worst:.1e}"))
}

fn c15_determinism() -> Verdict {
    let suite = concat!(env!("CARGO_MANIFEST_DIR"), "/golden/suite.json");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_causal-switch"))
            .args(["suite", "--config", suite])
            .output()
            .map_err(|e| e.to_string())
    };
    let (first, second) = (run()?, run()?);
    ensure(first.status.success(), || format!("suite exited with {:?}", first.status.code()))?;
    ensure(!first.stdout.is_empty() && first.stdout == second.stdout, || "outputs differ".into())?;
    Ok(format!("{} identical bytes", first.stdout.len()))
}

fn main() {
    let criteria: [Criterion; 15] = [
        ("OCB violation", c1_ocb_violation),
        ("causal bound on separable processes", c2_causal_bound),
        ("reduced-matrix closed forms", c3_reduced_matrices),
        ("switch contraction identity", c4_switch_contraction),
        ("CHSH temporal order", c5_chsh),
        ("channel-process equivalence", c6_channel_process),
        ("Choi/Kraus/Stinespring round trips", c7_round_trips),
        ("process validity", c8_process_validity),
        ("Earth timing", c9_earth_timing),
        ("small-mass timing", c10_small_mass_timing),
        ("exact vs weak field", c11_weak_field),
        ("clock resynchronization", c12_resync),
        ("trigger rotation", c13_trigger),
        ("agent model", c14_agents),
        ("CLI determinism", c15_determinism),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of 15 criteria passed", 15 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
