//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Runs with `harness = false`. Criteria listed in `KNOWN_UNATTAINABLE` still
//! run and print their real verdict, but do not fail the process.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hartree_exact::exact_states::{
    fock_state, periodic_state, quasi_energy, trajectory_coherent_state, wrap_phase,
};
use hartree_exact::hamilton_ehrenfest::{
    closed_form, coherent_constants, uncertainty_invariant, Constants,
};
use hartree_exact::model::{Model, ModelParams};
use hartree_exact::oracle::{energy_expectation, run, run_sampled, SolverConfig};
use hartree_exact::propagator::{
    compose_auto, constants_for, evolve, inverse_evolve, KernelMatrix, KernelSpec,
};
use hartree_exact::symmetry::{
    apply_op, coherent_state, symmetry_apply, LinearKernelOp, ZERO_STATE_TOLERANCE,
};
use hartree_exact::wavefunction::{moments, Grid, WaveFunction};
use hartree_exact::Result;

/// The printed multiplication-law phase disagrees with the BCH phase by a
/// factor of two, so 8b cannot hold.
const KNOWN_UNATTAINABLE: &[&str] = &["8b"];

const SEED: u64 = 20_240_611;

fn model() -> Model {
    Model::new(ModelParams {
        m: 1.0,
        k: 1.0,
        e_charge: 1.0,
        e_field: 0.5,
        omega: 1.5,
        a: 0.3,
        b: 0.2,
        c: 0.1,
        kappa: 0.5,
        hbar: 1.0,
    })
    .expect("acceptance model")
}

fn grid() -> Grid {
    Grid::new(-16.0, 16.0, 1024).expect("acceptance grid")
}

fn gaussian(x0: f64, p0: f64, width_sq: f64) -> WaveFunction {
    WaveFunction::from_fn(grid(), |x| {
        let d = x - x0;
        Complex64::from_polar((-d * d / (4.0 * width_sq)).exp(), p0 * x)
    })
    .normalized()
    .expect("nonzero gaussian")
}

/// Ground Gaussian, displaced squeezed Gaussian and a Φ₀+Φ₂ mixture.
fn initial_states(model: &Model) -> Result<Vec<(&'static str, WaveFunction)>> {
    let hbar = model.params.hbar;
    let ground = hbar / (2.0 * model.params.m * model.freqs.omega_width);
    let phi0 = trajectory_coherent_state(model, &grid(), 0, 0.3, -0.2, 0.0)?;
    let phi2 = trajectory_coherent_state(model, &grid(), 2, 0.3, -0.2, 0.0)?;
    Ok(vec![
        ("ground", gaussian(0.0, 0.0, ground)),
        ("displaced", gaussian(1.2, -0.7, 0.6 * ground)),
        ("mixture", phi0.add(&phi2).normalized()?),
    ])
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(value: f64, tol: f64) -> bool {
    value.is_finite() && value < tol
}

fn c1_exact_solutions(model: &Model) -> Result<Vec<(String, Outcome)>> {
    let period = model.period();
    let config = SolverConfig {
        dt: 2.0 * PI / (4096.0 * model.params.omega),
        ..SolverConfig::default_for(model)
    };
    let (p0, x0) = (0.3, -0.2);
    let mut worst: f64 = 0.0;
    for n in 0..=3 {
        let psi0 = trajectory_coherent_state(model, &grid(), n, p0, x0, 0.0)?;
        let out = run_sampled(model, &psi0, 0.0, period, config, 512, true)?;
        let mut count = 0;
        for s in out.samples.iter().filter(|s| s.t > 0.0) {
            let exact = trajectory_coherent_state(model, &grid(), n, p0, x0, s.t)?;
            worst = worst.max(s.state.as_ref().expect("kept").l2_distance(&exact));
            count += 1;
        }
        assert_eq!(count, 8);
    }
    Ok(vec![(
        "1".into(),
        Outcome {
            pass: within(worst, 1e-4),
            detail: format!("max L2 = {worst:.3e} < 1e-4 (n ≤ 3, 8 times)"),
        },
    )])
}

fn c2_evolution_operator(model: &Model) -> Result<Vec<(String, Outcome)>> {
    let period = model.period();
    let config = SolverConfig {
        dt: period / 4096.0,
        ..SolverConfig::default_for(model)
    };
    let (mut err, mut norm): (f64, f64) = (0.0, 0.0);
    for (_, psi) in initial_states(model)? {
        let oracle = run_sampled(model, &psi, 0.0, period, config, 1024, true)?;
        for s in &oracle.samples {
            let exact = compose_auto(model, &psi, 0.0, s.t)?;
            err = err.max(exact.l2_distance(s.state.as_ref().expect("kept")));
            norm = norm.max((exact.norm_sq() - psi.norm_sq()).abs());
        }
    }
    Ok(vec![(
        "2".into(),
        Outcome {
            pass: within(err, 1e-4) && within(norm, 1e-8),
            detail: format!("max L2 vs oracle = {err:.3e} < 1e-4, norm drift = {norm:.3e} < 1e-8"),
        },
    )])
}

fn c3_left_inverse(model: &Model) -> Result<Vec<(String, Outcome)>> {
    let pairs = [(0.0, 0.5), (0.2, 1.7), (-0.4, 0.9), (1.0, 3.5), (0.3, -1.1)];
    let w = model.freqs.omega_width;
    let mut worst: f64 = 0.0;
    for (_, psi) in initial_states(model)? {
        for &(s, t) in &pairs {
            assert!((w * (t - s)).sin().abs() > 0.1);
            let back = inverse_evolve(model, &evolve(model, &psi, s, t)?, s, t)?;
            let forth = evolve(model, &inverse_evolve(model, &psi, s, t)?, s, t)?;
            worst = worst
                .max(back.l2_distance(&psi))
                .max(forth.l2_distance(&psi));
        }
    }
    Ok(vec![(
        "3".into(),
        Outcome {
            pass: within(worst, 1e-6),
            detail: format!("max ‖U⁻¹U ψ − ψ‖, ‖U U⁻¹ψ − ψ‖ = {worst:.3e} < 1e-6"),
        },
    )])
}

fn c4_moment_transport(model: &Model) -> Result<Vec<(String, Outcome)>> {
    let hbar = model.params.hbar;
    let times = [0.4, 1.1, 2.0, 3.3, 5.0];
    let (mut moment_err, mut const_err): (f64, f64) = (0.0, 0.0);
    for (_, psi) in initial_states(model)? {
        let c0 = constants_for(model, &psi, 0.0)?;
        for &t in &times {
            let evolved = compose_auto(model, &psi, 0.0, t)?;
            let ms = moments(&evolved, 2, hbar)?;
            let g = closed_form(model, &c0, t);
            for d in [
                ms.x_mean - g.x,
                ms.p_mean - g.p,
                ms.sigma_xx() - g.sigma_xx,
                ms.sigma_px() - g.sigma_px,
                ms.sigma_pp() - g.sigma_pp,
            ] {
                moment_err = moment_err.max(d.abs());
            }
            const_err = const_err.max(constants_for(model, &evolved, t)?.max_abs_diff(&c0));
        }
    }
    Ok(vec![(
        "4".into(),
        Outcome {
            pass: within(moment_err, 1e-6) && within(const_err, 1e-6),
            detail: format!(
                "moment error = {moment_err:.3e} < 1e-6, constant drift = {const_err:.3e} < 1e-6"
            ),
        },
    )])
}

fn c5_variance(model: &Model) -> Result<Vec<(String, Outcome)>> {
    let hbar = model.params.hbar;
    let w = model.freqs.omega_width;
    let mut worst: f64 = 0.0;
    for n in 0..=5 {
        for &(p0, x0, t) in &[(0.3, -0.2, 0.0), (-0.5, 0.8, 1.3)] {
            let psi = trajectory_coherent_state(model, &grid(), n, p0, x0, t)?;
            let ms = moments(&psi, 2, hbar)?;
            // Independent of t: Fock constants carry no oscillating width terms.
            let expected = hbar * (2 * n + 1) as f64 / (2.0 * model.params.m * w);
            worst = worst.max((ms.sigma_xx() - expected).abs());
        }
    }
    Ok(vec![(
        "5".into(),
        Outcome {
            pass: within(worst, 1e-10),
            detail: format!("max |σxx − ħ(2n+1)/(2mΩ)| = {worst:.3e} < 1e-10 (n ≤ 5)"),
        },
    )])
}

fn c6_uncertainty(model: &Model) -> Result<Vec<(String, Outcome)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut drift: f64 = 0.0;
    for _ in 0..20 {
        let mut c = [0.0; 5];
        for v in c.iter_mut().take(4) {
            *v = rng.gen_range(-1.0..1.0);
        }
        c[4] = rng.gen_range(0.2..2.0);
        let c = Constants(c);
        let i0 = uncertainty_invariant(&closed_form(model, &c, 0.0));
        for k in 1..=40 {
            let it = uncertainty_invariant(&closed_form(model, &c, 0.37 * k as f64));
            drift = drift.max(((it - i0) / i0).abs());
        }
    }
    let hbar = model.params.hbar;
    let mut saturation: f64 = 0.0;
    for _ in 0..6 {
        let alpha = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let t = rng.gen_range(0.0..model.period());
        let psi = coherent_state(model, &grid(), alpha, 0.3, -0.2, t)?;
        let ms = moments(&psi, 2, hbar)?;
        let inv = ms.sigma_pp() * ms.sigma_xx() - ms.sigma_px().powi(2);
        saturation = saturation.max((inv - hbar * hbar / 4.0).abs());
    }
    Ok(vec![(
        "6".into(),
        Outcome {
            pass: within(drift, 1e-10) && within(saturation, 1e-8),
            detail: format!("relative drift = {drift:.3e} < 1e-10, |I − ħ²/4| for Ψ_α = {saturation:.3e} < 1e-8"),
        },
    )])
}

fn c7_ladder(model: &Model) -> Result<Vec<(String, Outcome)>> {
    let (p0, x0, t) = (0.3, -0.2, 0.9);
    let plus = LinearKernelOp::LadderPlus { p0, x0 };
    let minus = LinearKernelOp::LadderMinus { p0, x0 };
    let state = |n: usize| trajectory_coherent_state(model, &grid(), n, p0, x0, t);
    let scaled = |psi: WaveFunction, f: f64| psi.scaled(Complex64::new(f, 0.0));

    let mut ladder: f64 = 0.0;
    for n in 0..=3 {
        let psi = state(n)?;
        let (up, _) = symmetry_apply(model, &plus, &psi, t)?;
        ladder = ladder.max(up.sup_distance(&scaled(state(n + 1)?, ((n + 1) as f64).sqrt())));
        let (down, _) = symmetry_apply(model, &minus, &psi, t)?;
        let target = if n == 0 {
            WaveFunction::zeros(grid())
        } else {
            scaled(state(n - 1)?, (n as f64).sqrt())
        };
        ladder = ladder.max(down.sup_distance(&target));
    }

    // [â, â⁺] = 1 on states at the reference time.
    let mut commutator: f64 = 0.0;
    for n in 0..=3 {
        let psi = trajectory_coherent_state(model, &grid(), n, p0, x0, 0.0)?;
        let ap = apply_op(model, &minus, &apply_op(model, &plus, &psi)?)?;
        // âΦ₀ vanishes up to rounding; its noise is not a resolvable state.
        let lowered = apply_op(model, &minus, &psi)?;
        let pa = if lowered.norm() <= ZERO_STATE_TOLERANCE {
            WaveFunction::zeros(grid())
        } else {
            apply_op(model, &plus, &lowered)?
        };
        commutator = commutator.max(ap.sub(&pa).l2_distance(&psi));
    }

    // Fock tower: (Â⁺)ⁿ Ψ₀ / √n! = Ψ_n.
    let mut tower: f64 = 0.0;
    let mut current = state(0)?;
    let mut factorial = 1.0;
    for n in 1..=4 {
        current = symmetry_apply(model, &plus, &current, t)?.0;
        factorial *= n as f64;
        tower = tower.max(scaled(current.clone(), 1.0 / factorial.sqrt()).sup_distance(&state(n)?));
    }
    Ok(vec![(
        "7".into(),
        Outcome {
            pass: within(ladder, 1e-5) && within(commutator, 1e-8) && within(tower, 1e-5),
            detail: format!(
                "A± sup = {ladder:.3e} < 1e-5, [â,â⁺]−1 = {commutator:.3e} < 1e-8, tower sup = {tower:.3e} < 1e-5"
            ),
        },
    )])
}

fn c8_displacement(model: &Model) -> Result<Vec<(String, Outcome)>> {
    let (p0, x0, t) = (0.3, -0.2, 0.7);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let disc = |rng: &mut ChaCha8Rng| loop {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm() <= 1.0 {
            return z;
        }
    };
    let d = |alpha: Complex64| LinearKernelOp::Displacement { alpha, p0, x0 };
    let psi = trajectory_coherent_state(model, &grid(), 1, p0, x0, t)?;
    let (mut group, mut printed, mut bch): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..10 {
        let (alpha, beta) = (disc(&mut rng), disc(&mut rng));
        let (s, r) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        // One-parameter group: D(sα) D(rα) = D((s+r)α).
        let lhs = symmetry_apply(
            model,
            &d(alpha * s),
            &symmetry_apply(model, &d(alpha * r), &psi, t)?.0,
            t,
        )?
        .0;
        let rhs = symmetry_apply(model, &d(alpha * (s + r)), &psi, t)?.0;
        group = group.max(lhs.sup_distance(&rhs));

        let product = symmetry_apply(
            model,
            &d(alpha),
            &symmetry_apply(model, &d(beta), &psi, t)?.0,
            t,
        )?
        .0;
        let sum = symmetry_apply(model, &d(alpha + beta), &psi, t)?.0;
        let exponent = alpha * beta.conj() - alpha.conj() * beta;
        printed = printed.max(product.sup_distance(&sum.scaled(exponent.exp())));
        bch = bch.max(product.sup_distance(&sum.scaled((exponent * 0.5).exp())));
    }
    Ok(vec![
        (
            "8a".into(),
            Outcome {
                pass: within(group, 1e-6),
                detail: format!("group property sup = {group:.3e} < 1e-6 (10 pairs)"),
            },
        ),
        (
            "8b".into(),
            Outcome {
                pass: within(printed, 1e-6),
                detail: format!("multiplication law with e^(αβ*−α*β): sup = {printed:.3e} < 1e-6"),
            },
        ),
        (
            "8c".into(),
            Outcome {
                pass: within(bch, 1e-6),
                detail: format!("informational, BCH phase e^((αβ*−α*β)/2): sup = {bch:.3e} < 1e-6"),
            },
        ),
    ])
}

/// Composite Simpson on [a, b] with an even number of panels.
fn simpson(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64, panels: usize) -> Result<f64> {
    let h = (b - a) / panels as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..panels {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h)?;
    }
    Ok(sum * h / 3.0)
}

fn c9_floquet(model: &Model) -> Result<Vec<(String, Outcome)>> {
    let hbar = model.params.hbar;
    let period = model.period();
    let mut floquet: f64 = 0.0;
    let mut aa: f64 = 0.0;
    for n in 0..=2 {
        let q = quasi_energy(model, n);
        for &t in &[0.0, 0.6, 2.5] {
            let a = periodic_state(model, &grid(), n, t)?;
            let b = periodic_state(model, &grid(), n, t + period)?;
            floquet = floquet.max(
                b.scaled(Complex64::from_polar(1.0, q.energy * period / hbar))
                    .sup_distance(&a),
            );
        }
        // γ = arg⟨Ψ(0), Ψ(T)⟩ + (1/ħ)∫⟨H⟩ dt, from grid states only.
        let start = periodic_state(model, &grid(), n, 0.0)?;
        let end = periodic_state(model, &grid(), n, period)?;
        let total = start.inner(&end).arg();
        let dynamic = simpson(
            |t| energy_expectation(model, &periodic_state(model, &grid(), n, t)?, t),
            0.0,
            period,
            256,
        )?;
        let gamma = wrap_phase(total + dynamic / hbar);
        aa = aa.max(wrap_phase(gamma - q.aa_phase).abs());
    }
    Ok(vec![(
        "9".into(),
        Outcome {
            pass: within(floquet, 1e-8) && within(aa, 1e-6),
            detail: format!(
                "Floquet sup = {floquet:.3e} < 1e-8, AA phase error = {aa:.3e} < 1e-6 (n ≤ 2)"
            ),
        },
    )])
}

fn c10_spectral(model: &Model) -> Result<Vec<(String, Outcome)>> {
    // The Fock sum of the kernel has unimodular weights, so it converges in
    // the applied sense: Σ Φ_n(t)⟨Φ_n(s), ψ⟩ against the kernel acting on ψ.
    let (p0, x0) = (0.3, -0.2);
    let c = coherent_constants(model, 0, p0, x0);
    let s = 0.2;
    let t = s + PI / (3.0 * model.freqs.omega_width);
    let spec = KernelSpec::new(model, &c, s, t)?;
    let matrix = KernelMatrix::build(&spec, &grid());
    let mut worst: f64 = 0.0;
    for psi in [gaussian(0.6, -0.4, 0.35), gaussian(-0.3, 0.5, 0.6)] {
        let exact = matrix.apply(&psi);
        let mut sum = WaveFunction::zeros(grid());
        for n in 0..60 {
            let at_s = fock_state(model, &grid(), n, &c, s)?;
            let at_t = fock_state(model, &grid(), n, &c, t)?;
            sum = sum.add(&at_t.scaled(at_s.inner(&psi)));
        }
        worst = worst.max(sum.sup_distance(&exact));
    }
    Ok(vec![(
        "10".into(),
        Outcome {
            pass: within(worst, 1e-6),
            detail: format!("applied N=60 sum vs kernel sup = {worst:.3e} < 1e-6 at Ω(t−s)=π/3"),
        },
    )])
}

fn c11_oracle(model: &Model) -> Result<Vec<(String, Outcome)>> {
    let m = model.params.m;
    let horizon = model.period() / 2.0;
    let (p0, x0) = (0.3, -0.2);
    let psi0 = trajectory_coherent_state(model, &grid(), 1, p0, x0, 0.0)?;
    let exact = trajectory_coherent_state(model, &grid(), 1, p0, x0, horizon)?;
    let base = SolverConfig::default_for(model);

    let mut errors = Vec::new();
    let mut ehrenfest = Vec::new();
    for steps in [128usize, 256, 512] {
        let dt = horizon / steps as f64;
        let config = SolverConfig { dt, ..base };
        errors.push(run(model, &psi0, 0.0, horizon, config)?.l2_distance(&exact));
        // Central difference of ⟨x⟩ against ⟨p⟩/m at interior samples.
        let sampled = run_sampled(model, &psi0, 0.0, horizon, config, 1, false)?;
        let xs: Vec<f64> = sampled
            .samples
            .iter()
            .map(|s| s.moments.as_ref().expect("moments").x_mean)
            .collect();
        let ps: Vec<f64> = sampled
            .samples
            .iter()
            .map(|s| s.moments.as_ref().expect("moments").p_mean)
            .collect();
        let residual = (1..xs.len() - 1)
            .map(|i| ((xs[i + 1] - xs[i - 1]) / (2.0 * dt) - ps[i] / m).abs())
            .fold(0.0, f64::max);
        ehrenfest.push(residual);
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let orders: Vec<f64> = ehrenfest.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let strang_ok = ratios.iter().all(|r| (r - 4.0).abs() <= 0.8);
    let ehrenfest_ok = orders.iter().all(|o| (o - 2.0).abs() <= 0.3);
    Ok(vec![(
        "11".into(),
        Outcome {
            pass: strang_ok && ehrenfest_ok,
            detail: format!(
                "halving ratios {:?} within 4±20%, Ehrenfest residuals {:?} with orders {:?} ≈ 2",
                ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
                ehrenfest
                    .iter()
                    .map(|r| format!("{r:.2e}"))
                    .collect::<Vec<_>>(),
                orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>(),
            ),
        },
    )])
}

type Criterion = (&'static str, fn(&Model) -> Result<Vec<(String, Outcome)>>);

fn main() {
    let model = model();
    let criteria: [Criterion; 11] = [
        ("1", c1_exact_solutions),
        ("2", c2_evolution_operator),
        ("3", c3_left_inverse),
        ("4", c4_moment_transport),
        ("5", c5_variance),
        ("6", c6_uncertainty),
        ("7", c7_ladder),
        ("8", c8_displacement),
        ("9", c9_floquet),
        ("10", c10_spectral),
        ("11", c11_oracle),
    ];
    let mut unexpected = Vec::new();
    for (id, check) in criteria {
        let started = Instant::now();
        let lines = check(&model).unwrap_or_else(|e| {
            vec![(
                id.to_string(),
                Outcome {
                    pass: false,
                    detail: format!("error: {e}"),
                },
            )]
        });
        let secs = started.elapsed().as_secs_f64();
        for (label, outcome) in lines {
            let verdict = if outcome.pass { "PASS" } else { "FAIL" };
            let known = !outcome.pass && KNOWN_UNATTAINABLE.contains(&label.as_str());
            let note = if known { " [known unattainable]" } else { "" };
            println!(
                "{verdict} criterion {label}: {} ({secs:.1}s){note}",
                outcome.detail
            );
            if !outcome.pass && !known {
                unexpected.push(label);
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
