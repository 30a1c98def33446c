//! Named experiments and their parameter schemas.

use serde_json::json;
use symbreak_core::dimer::{
    detuned_hop_eigenvalues, detuned_linear_matrix, instability_certificate, langevin_ensemble,
    lasing_fixed_point, mean_field_steady_state, mf_vs_exact_scan, phase_diffusion_estimate,
    predicted_phase_diffusion, DimerParams, LangevinOptions, ScanOptions, SemiclassicalModel,
};
use symbreak_core::ode::OdeOptions;
use symbreak_core::ssh::{
    added_loss_scan, dissipator_identity_for, dissipator_mode_identity_check, integration_estimate,
    limit_cycle_solve, mean_field_self_consistent, monodromy_multipliers, quantum_steady_state,
    random_chiral_hamiltonian, rate_equation_prediction, single_mode_no_go_scan, weak_zero_mode,
    AddedLossOptions, LimitCycleOptions, MeanFieldOptions, SSHParams, SshSteadyOptions,
};
use symbreak_core::stats::log_log_fit;
use symbreak_core::Result;

use crate::config::{ConfigError, Kind, ParamSpec, Params};
use crate::output::{Cell, Plot, ResultTable, Series};

pub struct Output {
    pub table: ResultTable,
    pub plot: Plot,
    pub summary: serde_json::Value,
}

#[derive(Debug)]
pub struct Experiment {
    pub name: &'static str,
    /// Figure or section reproduced.
    pub reference: &'static str,
    pub description: &'static str,
    pub params: &'static [ParamSpec],
    pub run: fn(&Params, u64) -> Result<Output>,
}

const fn spec(key: &'static str, kind: Kind, default: Option<&'static str>, doc: &'static str) -> ParamSpec {
    ParamSpec { key, kind, default, doc }
}

use Kind::{Count, Flag, Grid, Rate, RateGrid, Real};

pub static REGISTRY: [Experiment; 10] = [
    Experiment {
        name: "pt-threshold",
        reference: "SM I.B",
        description: "Mean-field lasing density and stability of the dimer against J",
        params: &[
            spec("j-grid", RateGrid, Some("0.1:3.0:0.05"), "hopping values J"),
            spec("kappa-a", Rate, None, "loss rate of mode a"),
            spec("kappa-b", Rate, None, "gain rate of mode b"),
            spec("n-star", Rate, Some("10"), "nonlinearity scale n*"),
        ],
        run: pt_threshold,
    },
    Experiment {
        name: "pt-mf-vs-exact",
        reference: "Fig. S1",
        description: "Exact steady-state photon number against mean field",
        params: &[
            spec("j", Rate, Some("1"), "hopping J"),
            spec("kappa-a", Rate, Some("4"), "loss rate of mode a"),
            spec("kappa-b", Rate, Some("1.5"), "gain rate of mode b"),
            spec("n-star", RateGrid, Some("7,14,24,36"), "nonlinearity scales n*"),
            spec("check-tol", Rate, Some("2e-3"), "truncation convergence tolerance in photons"),
        ],
        run: pt_mf_vs_exact,
    },
    Experiment {
        name: "pt-phase-diffusion",
        reference: "SM Eq. S36",
        description: "Langevin phase diffusion of the lasing dimer against r = kappa_b/kappa_a",
        params: &[
            spec("kappa-a", Rate, Some("1"), "loss rate of mode a"),
            spec("r", RateGrid, Some("0.1,0.2"), "ratios kappa_b/kappa_a"),
            spec("pump-ratio", Rate, Some("2"), "sqrt(kappa_a kappa_b)/(2J)"),
            spec("n-star", Rate, Some("200"), "nonlinearity scale n*"),
            spec("trajectories", Count, Some("200"), "ensemble size"),
            spec("t-burn", Rate, Some("200"), "discarded transient"),
            spec("t-window", Rate, Some("2000"), "recorded window"),
            spec("dt", Rate, Some("0.02"), "time step"),
            spec("sample-every", Count, Some("50"), "steps between samples"),
        ],
        run: pt_phase_diffusion,
    },
    Experiment {
        name: "pt-gain-sat-compare",
        reference: "Fig. S6",
        description: "Detuned nonlinear hopping against detuned gain saturation",
        params: &[
            spec("j", Rate, Some("1"), "hopping J"),
            spec("kappa", Rate, Some("1"), "kappa_a = kappa_b"),
            spec("n-star", Rate, Some("10"), "nonlinearity scale n*"),
            spec("delta", Grid, Some("0.1,0.3,1.0"), "detunings"),
            spec("n-max", Rate, Some("1e4"), "largest density sampled"),
            spec("n-points", Count, Some("2000"), "density samples"),
        ],
        run: pt_gain_sat_compare,
    },
    Experiment {
        name: "ssh-limit-cycle",
        reference: "Fig. S4",
        description: "Semiclassical limit cycle of the driven SSH chain",
        params: &[
            spec("n", Count, Some("21"), "odd number of sites"),
            spec("j", Rate, Some("1"), "hopping J"),
            spec("delta", Real, Some("-0.65"), "dimerization, negative is topological"),
            spec("u", Rate, Some("0.001"), "Kerr strength"),
            spec("kappa", Rate, Some("1"), "loss on B"),
            spec("eta", Rate, Some("0.2"), "pump ratio, gain eta^2 kappa on A"),
            spec("gamma", Rate, Some("0"), "extra loss on A"),
            spec("fft", Flag, Some("true"), "cross-check the frequency by long-time integration"),
        ],
        run: ssh_limit_cycle,
    },
    Experiment {
        name: "ssh-mf-overlap",
        reference: "Fig. 2",
        description: "Self-consistent edge mode: B-sublattice overlap against s = U|d0|^2",
        params: &[
            spec("n", Count, Some("21"), "odd number of sites"),
            spec("j", Rate, Some("1"), "hopping J"),
            spec("delta", Real, Some("-0.4"), "dimerization"),
            spec("u", Rate, Some("1"), "Kerr strength"),
            spec("eta2", RateGrid, Some("1e-4,1e-3,1e-2"), "target overlaps eta^2"),
            spec("s-max", Rate, Some("2"), "upper end of the s scan"),
            spec("curve-points", Count, Some("81"), "samples of the overlap curve"),
        ],
        run: ssh_mf_overlap,
    },
    Experiment {
        name: "ssh-fock-fidelity",
        reference: "Fig. 3",
        description: "Exact steady state and single-photon edge-mode fidelity",
        params: &[
            spec("n", Count, Some("5"), "odd number of sites"),
            spec("j", Rate, Some("1"), "hopping J"),
            spec("xi", Rate, None, "localization ratio in (0, 1)"),
            spec("u", Rate, Some("1"), "Kerr strength"),
            spec("kappa", Rate, Some("1"), "loss on B"),
            spec("eta", Rate, Some("auto"), "pump ratio; auto is xi^2"),
            spec("dims", Count, Some("3"), "levels per site"),
            spec("certify", Flag, Some("false"), "repeat with one more level per site"),
        ],
        run: ssh_fock_fidelity,
    },
    Experiment {
        name: "ssh-no-go",
        reference: "Fig. S3",
        description: "Single-mode single-photon fidelity over two-photon loss and linear loss",
        params: &[
            spec("gamma-min", Rate, Some("1e-2"), "smallest gamma/kappa_g"),
            spec("gamma-max", Rate, Some("1e2"), "largest gamma/kappa_g"),
            spec("gamma-points", Count, Some("17"), "log-spaced gamma samples"),
            spec("loss-ratios", RateGrid, Some("0,0.1,0.3,1"), "kappa_l/kappa_g values"),
            spec("dims", Count, Some("20"), "Fock levels"),
        ],
        run: ssh_no_go,
    },
    Experiment {
        name: "ssh-added-loss",
        reference: "Fig. S5",
        description: "Edge-mode infidelity against extra loss on the pumped sublattice",
        params: &[
            spec("n", Count, Some("3"), "odd number of sites"),
            spec("j", Rate, Some("1"), "hopping J"),
            spec("xi", Rate, Some("0.1"), "starting localization ratio"),
            spec("u", Rate, Some("1"), "Kerr strength"),
            spec("kappa", Rate, Some("1"), "starting loss on B"),
            spec("eta", Rate, Some("auto"), "starting pump ratio; auto is xi^2"),
            spec("gamma", RateGrid, Some("0,1e-3,3e-3,1e-2,3e-2,0.1"), "extra loss rates"),
            spec("dims", Count, Some("4"), "levels per site"),
            spec("budget", Count, Some("40"), "Nelder-Mead iterations per optimization"),
            spec("reoptimize", Flag, Some("false"), "optimize again at every gamma"),
        ],
        run: ssh_added_loss,
    },
    Experiment {
        name: "dissipator-identity",
        reference: "SM II.B",
        description: "Site-basis against mode-basis Liouvillian of the chiral chain",
        params: &[
            spec("n", Count, Some("3"), "odd number of sites of the SSH case"),
            spec("j", Rate, Some("1"), "hopping J"),
            spec("delta", Real, Some("-0.4"), "dimerization"),
            spec("kappa", Rate, Some("1"), "loss on B"),
            spec("eta", Rate, Some("0.3"), "pump ratio"),
            spec("dims", Count, Some("2"), "levels per site"),
            spec("random", Count, Some("10"), "random chiral Hamiltonians"),
            spec("random-sites", Count, Some("5"), "sites of the random Hamiltonians"),
        ],
        run: dissipator_identity,
    },
];

pub fn find(name: &str) -> std::result::Result<&'static Experiment, ConfigError> {
    if let Some(e) = REGISTRY.iter().find(|e| e.name == name) {
        return Ok(e);
    }
    let names: Vec<&str> = REGISTRY.iter().map(|e| e.name).collect();
    let close = names.iter().min_by_key(|n| strsim::levenshtein(n, name)).filter(|n| strsim::levenshtein(n, name) <= 4);
    let hint = match close {
        Some(n) => format!("did you mean `{n}`? available: {}", names.join(", ")),
        None => format!("available: {}", names.join(", ")),
    };
    Err(ConfigError::UnknownExperiment { name: name.to_string(), hint })
}

fn lines(title: &str, x: &str, y: &str, log: (bool, bool), series: Vec<Series>) -> Plot {
    Plot::Lines { title: title.into(), x_label: x.into(), y_label: y.into(), log_x: log.0, log_y: log.1, series }
}

fn series(label: impl Into<String>, points: Vec<(f64, f64)>) -> Series {
    Series { label: label.into(), points }
}

fn pt_threshold(p: &Params, _seed: u64) -> Result<Output> {
    let (ka, kb, ns) = (p.f64("kappa-a"), p.f64("kappa-b"), p.f64("n-star"));
    let mut table = ResultTable::new(&["J", "n_mf", "stable"]);
    let mut pts = Vec::new();
    for &j in p.grid("j-grid") {
        let mf = mean_field_steady_state(&DimerParams::new(j, ka, kb, ns)?)?;
        table.push(vec![j.into(), mf.density.into(), mf.stable.into()]);
        pts.push((j, mf.density));
    }
    Ok(Output {
        table,
        plot: lines("Mean-field lasing density", "J", "n", (false, false), vec![series("n_mf", pts)]),
        summary: json!({ "threshold_J": 0.5 * (ka * kb).sqrt() }),
    })
}

fn pt_mf_vs_exact(p: &Params, _seed: u64) -> Result<Output> {
    let points: Vec<DimerParams> = p
        .grid("n-star")
        .iter()
        .map(|&ns| DimerParams::new(p.f64("j"), p.f64("kappa-a"), p.f64("kappa-b"), ns))
        .collect::<Result<_>>()?;
    let opts = ScanOptions { check_tol: p.f64("check-tol"), ..Default::default() };
    let scan = mf_vs_exact_scan(&points, &opts)?;
    let mut table = ResultTable::new(&[
        "n_star", "dims_a", "dims_b", "n_exact", "n_semiclassical", "n_closure", "error", "closure_error",
        "truncation_change", "converged",
    ]);
    for s in &scan {
        table.push(vec![
            s.params.n_star.into(),
            s.dims[0].into(),
            s.dims[1].into(),
            s.n_exact.into(),
            s.n_semiclassical.into(),
            s.n_closure.into(),
            s.error.into(),
            s.closure_error.into(),
            s.truncation_change.into(),
            s.converged.into(),
        ]);
    }
    let n: Vec<f64> = scan.iter().map(|s| s.n_exact).collect();
    let e: Vec<f64> = scan.iter().map(|s| s.error).collect();
    let slope = if scan.len() >= 2 { log_log_fit(&n, &e).ok().map(|f| f.slope) } else { None };
    let mut plot_series = vec![series("|n_exact - n_mf|", n.iter().copied().zip(e.iter().copied()).collect())];
    let closure: Vec<(f64, f64)> = scan.iter().filter_map(|s| s.closure_error.map(|c| (s.n_exact, c))).collect();
    if !closure.is_empty() {
        plot_series.push(series("|n_exact - n_closure|", closure));
    }
    Ok(Output {
        table,
        plot: lines("Mean-field error", "<n> exact", "error", (true, true), plot_series),
        summary: json!({ "log_log_slope": slope }),
    })
}

fn pt_phase_diffusion(p: &Params, seed: u64) -> Result<Output> {
    let ka = p.f64("kappa-a");
    let opts = LangevinOptions {
        t_burn: p.f64("t-burn"),
        t_window: p.f64("t-window"),
        dt: p.f64("dt"),
        sample_every: p.usize("sample-every"),
        ..Default::default()
    };
    let mut table = ResultTable::new(&[
        "r", "J", "kappa_b", "rho_a2", "diffusion", "diffusion_stderr", "diffusion_rho_a2", "predicted_rho_a2",
    ]);
    let mut plot_series = Vec::new();
    let mut scaled = Vec::new();
    for &r in p.grid("r") {
        let kb = r * ka;
        let j = (ka * kb).sqrt() / (2.0 * p.f64("pump-ratio"));
        let dp = DimerParams::new(j, ka, kb, p.f64("n-star"))?;
        let runs = langevin_ensemble(&dp, &opts, seed, p.usize("trajectories"))?;
        let est = phase_diffusion_estimate(&runs)?;
        let rho_a2 = lasing_fixed_point(&dp).map_or(f64::NAN, |s| s.a.norm_sqr());
        let predicted = predicted_phase_diffusion(&dp).map(|d| d * rho_a2);
        table.push(vec![
            r.into(),
            j.into(),
            kb.into(),
            rho_a2.into(),
            est.coefficient.into(),
            est.stderr.into(),
            (est.coefficient * rho_a2).into(),
            predicted.into(),
        ]);
        scaled.push((r, est.coefficient * rho_a2, predicted));
        plot_series.push(series(
            format!("r = {r}"),
            est.times.iter().copied().zip(est.mean_square_phase.iter().copied()).collect(),
        ));
    }
    let ratio = match (scaled.first(), scaled.last()) {
        (Some(a), Some(b)) if scaled.len() >= 2 => json!({
            "measured": b.1 / a.1,
            "predicted": b.2.zip(a.2).map(|(x, y)| x / y),
        }),
        _ => serde_json::Value::Null,
    };
    Ok(Output {
        table,
        plot: lines("Phase diffusion", "t", "<dphi^2>", (false, false), plot_series),
        summary: json!({ "ratio_last_to_first": ratio }),
    })
}

/// Largest real part of the detuned gain-saturation matrix at `|b|² = x`.
fn gain_sat_growth(p: &DimerParams, x: f64) -> Result<f64> {
    let m = detuned_linear_matrix(p, x, SemiclassicalModel::DetunedGainSaturation)?;
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let root = (tr * tr * 0.25 - det).sqrt();
    Ok((tr * 0.5 + root).re.max((tr * 0.5 - root).re))
}

fn pt_gain_sat_compare(p: &Params, _seed: u64) -> Result<Output> {
    let k = p.f64("kappa");
    let n_max = p.f64("n-max");
    let mut table = ResultTable::new(&[
        "delta", "hop_min_growth", "hop_witness_n", "hop_unstable_everywhere", "gain_sat_best_growth",
        "gain_sat_stabilizing_b2", "gain_sat_stabilizes",
    ]);
    let mut plot_series = Vec::new();
    let samples: Vec<f64> = (0..=120).map(|i| n_max.powf(i as f64 / 120.0) * 1e-2f64.powf(1.0 - i as f64 / 120.0)).collect();
    for &delta in p.grid("delta") {
        let dp = DimerParams::new(p.f64("j"), k, k, p.f64("n-star"))?.with_delta(delta)?;
        let c = instability_certificate(&dp, n_max, p.usize("n-points").max(2))?;
        table.push(vec![
            delta.into(),
            c.witness_growth.into(),
            c.witness_n.into(),
            c.unstable_everywhere.into(),
            c.gain_sat_best_growth.into(),
            c.gain_sat_stabilizing_b2.into(),
            c.gain_sat_stabilizing_b2.is_some().into(),
        ]);
        plot_series.push(series(
            format!("hop, delta = {delta}"),
            samples.iter().map(|&n| (n, detuned_hop_eigenvalues(&dp, n)[1].re)).collect(),
        ));
        let sat: Vec<(f64, f64)> =
            samples.iter().map(|&x| gain_sat_growth(&dp, x).map(|g| (x, g))).collect::<Result<_>>()?;
        plot_series.push(series(format!("gain sat, delta = {delta}"), sat));
    }
    Ok(Output {
        table,
        plot: lines("Largest growth rate", "n (hop) or |b|^2 (gain sat)", "max Re lambda", (true, false), plot_series),
        summary: serde_json::Value::Null,
    })
}

fn ssh_params(p: &Params, delta: f64, eta: f64) -> Result<SSHParams> {
    SSHParams::new(p.usize("n"), p.f64("j"), delta, p.f64("u"), p.f64("kappa"), eta)
}

fn ssh_limit_cycle(p: &Params, _seed: u64) -> Result<Output> {
    let sp = ssh_params(p, p.f64("delta"), p.f64("eta"))?.with_gamma(p.f64("gamma"))?;
    let opts = LimitCycleOptions::default();
    let cycle = limit_cycle_solve(&sp, None, &opts)?;
    let fft = if p.flag("fft") {
        let est = integration_estimate(&sp, &weak_zero_mode(&sp, 1.0)?, &opts)?;
        Some(est.lambda)
    } else {
        None
    };
    let mut mult: Vec<f64> = monodromy_multipliers(&sp, &cycle, &OdeOptions::default())?.iter().map(|z| z.norm()).collect();
    mult.sort_by(|a, b| b.total_cmp(a));
    let mut table = ResultTable::new(&["site", "sublattice", "abs_d0", "arg_d0"]);
    let mut profile = Vec::new();
    for (i, z) in cycle.d0.iter().enumerate() {
        table.push(vec![i.into(), if i % 2 == 0 { "A" } else { "B" }.into(), z.norm().into(), z.arg().into()]);
        profile.push((i as f64, z.norm()));
    }
    Ok(Output {
        table,
        plot: lines("Limit-cycle amplitudes", "site", "|d0|", (false, false), vec![series("|d0|", profile)]),
        summary: json!({
            "lambda": cycle.lambda,
            "lambda_fft": fft,
            "residual": cycle.residual,
            "method": format!("{:?}", cycle.method),
            "photons": cycle.photons(),
            "period": cycle.period(),
            "stable": cycle.stable,
            "monodromy_abs": mult,
        }),
    })
}

fn ssh_mf_overlap(p: &Params, _seed: u64) -> Result<Output> {
    let targets = p.grid("eta2");
    let mut curve = Vec::new();
    let mut solutions = Vec::new();
    for &eta2 in targets {
        let sp = SSHParams::new(p.usize("n"), p.f64("j"), p.f64("delta"), p.f64("u"), 1.0, eta2.sqrt())?;
        let opts = MeanFieldOptions { s_max: p.f64("s-max"), curve_points: p.usize("curve-points"), ..Default::default() };
        let r = mean_field_self_consistent(&sp, &opts)?;
        solutions.push(json!({ "eta2": eta2, "s": r.s, "photons": r.photons, "energy": r.energy, "b_overlap": r.b_overlap }));
        if curve.is_empty() {
            curve = r.curve;
        }
    }
    let mut table = ResultTable::new(&["s", "b_overlap"]);
    for &(s, o) in &curve {
        table.push(vec![s.into(), o.into()]);
    }
    let s_end = curve.last().map_or(1.0, |c| c.0);
    let mut plot_series = vec![series("B overlap", curve.iter().copied().filter(|c| c.1 > 0.0).collect())];
    for &eta2 in targets {
        plot_series.push(series(format!("eta^2 = {eta2}"), vec![(curve.get(1).map_or(0.0, |c| c.0), eta2), (s_end, eta2)]));
    }
    Ok(Output {
        table,
        plot: lines("Edge-mode B-sublattice overlap", "s = U|d0|^2", "overlap", (false, true), plot_series),
        summary: json!({ "solutions": solutions }),
    })
}

fn ssh_fock_fidelity(p: &Params, _seed: u64) -> Result<Output> {
    let xi = p.f64("xi");
    let eta = p.opt_f64("eta").unwrap_or(xi * xi);
    let sp = SSHParams::from_xi(p.usize("n"), p.f64("j"), xi, p.f64("u"), p.f64("kappa"), eta)?;
    let opts = SshSteadyOptions { certify: p.flag("certify"), ..Default::default() };
    let s = quantum_steady_state(&sp, p.usize("dims"), &opts)?;
    let rate = rate_equation_prediction(xi)?;
    let mut cols: Vec<String> = ["xi", "delta", "eta", "eta_prime", "fidelity", "infidelity", "rate_equation_infidelity", "total", "edge_population", "truncation_change"]
        .iter()
        .map(|c| c.to_string())
        .collect();
    cols.extend((0..sp.n_sites).map(|i| format!("n_{i}")));
    let mut table = ResultTable::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    let mut row: Vec<Cell> = vec![
        xi.into(),
        sp.delta.into(),
        eta.into(),
        sp.eta_prime().into(),
        s.fidelity.into(),
        (1.0 - s.fidelity).into(),
        (1.0 - rate[1]).into(),
        s.total.into(),
        s.edge_population.into(),
        s.truncation_change.into(),
    ];
    row.extend(s.site_densities.iter().map(|&n| Cell::from(n)));
    table.push(row);
    let profile = s.site_densities.iter().enumerate().map(|(i, &n)| (i as f64, n)).collect();
    Ok(Output {
        table,
        plot: lines("Steady-state site densities", "site", "<n_i>", (false, false), vec![series("<n_i>", profile)]),
        summary: json!({ "residual": s.residual }),
    })
}

fn ssh_no_go(p: &Params, _seed: u64) -> Result<Output> {
    let (lo, hi, m) = (p.f64("gamma-min"), p.f64("gamma-max"), p.usize("gamma-points"));
    if !(lo > 0.0 && hi >= lo) {
        return Err(symbreak_core::Error::InvalidParameter("need 0 < gamma-min <= gamma-max".into()));
    }
    let gammas: Vec<f64> =
        (0..m).map(|k| if m == 1 { lo } else { lo * (hi / lo).powf(k as f64 / (m - 1) as f64) }).collect();
    let losses = p.grid("loss-ratios").to_vec();
    let scan = single_mode_no_go_scan(&gammas, &losses, p.usize("dims"))?;
    let mut table = ResultTable::new(&[
        "gamma_ratio", "loss_ratio", "fidelity", "root_fidelity", "edge_population", "truncation_change", "flagged",
    ]);
    for q in &scan.points {
        table.push(vec![
            q.gamma_ratio.into(),
            q.loss_ratio.into(),
            q.fidelity.into(),
            q.root_fidelity.into(),
            q.edge_population.into(),
            q.truncation_change.into(),
            q.flagged.into(),
        ]);
    }
    let z: Vec<Vec<f64>> = losses
        .iter()
        .enumerate()
        .map(|(il, _)| {
            (0..gammas.len())
                .map(|ig| {
                    let q = &scan.points[il * gammas.len() + ig];
                    if q.flagged { f64::NAN } else { q.root_fidelity }
                })
                .collect()
        })
        .collect();
    Ok(Output {
        table,
        plot: Plot::Heatmap {
            title: "sqrt <1|rho|1>".into(),
            x_label: "gamma / kappa_g".into(),
            y_label: "kappa_l / kappa_g".into(),
            log_x: true,
            xs: gammas,
            ys: losses,
            z,
        },
        summary: json!({ "best": scan.best, "hamiltonian_dependence": scan.hamiltonian_dependence }),
    })
}

fn ssh_added_loss(p: &Params, _seed: u64) -> Result<Output> {
    let xi = p.f64("xi");
    let eta = p.opt_f64("eta").unwrap_or(xi * xi);
    let base = SSHParams::from_xi(p.usize("n"), p.f64("j"), xi, p.f64("u"), p.f64("kappa"), eta)?;
    let opts = AddedLossOptions {
        dims: p.usize("dims"),
        budget: p.usize("budget") as u64,
        reoptimize: p.flag("reoptimize"),
        ..Default::default()
    };
    let pts = added_loss_scan(&base, p.grid("gamma"), &opts)?;
    let mut table = ResultTable::new(&[
        "gamma", "infidelity_fixed", "infidelity_optimized", "kappa", "eta", "xi", "evaluations", "budget_exhausted",
    ]);
    for q in &pts {
        table.push(vec![
            q.gamma.into(),
            q.infidelity_fixed.into(),
            q.infidelity_optimized.into(),
            q.kappa.into(),
            q.eta.into(),
            q.xi.into(),
            q.evaluations.into(),
            q.budget_exhausted.into(),
        ]);
    }
    let monotone = pts.windows(2).all(|w| w[1].infidelity_fixed >= w[0].infidelity_fixed - 1e-12);
    let positive: Vec<&_> = pts.iter().filter(|q| q.gamma > 0.0).collect();
    let fit_on = |f: &dyn Fn(&symbreak_core::ssh::AddedLossPoint) -> Option<f64>| {
        let (x, y): (Vec<f64>, Vec<f64>) = positive.iter().filter_map(|q| f(q).map(|v| (q.gamma / base.u, v))).unzip();
        if x.len() >= 2 { log_log_fit(&x, &y).ok().map(|l| l.slope) } else { None }
    };
    let slope_fixed = fit_on(&|q| Some(q.infidelity_fixed));
    let slope_optimized = fit_on(&|q| q.infidelity_optimized);
    let mut plot_series = vec![series("fixed", positive.iter().map(|q| (q.gamma, q.infidelity_fixed)).collect())];
    if opts.reoptimize {
        plot_series.push(series(
            "optimized",
            positive.iter().filter_map(|q| q.infidelity_optimized.map(|v| (q.gamma, v))).collect(),
        ));
    }
    Ok(Output {
        table,
        plot: lines("Infidelity against added loss", "gamma", "1 - F", (true, true), plot_series),
        summary: json!({ "monotone": monotone, "slope_fixed": slope_fixed, "slope_optimized": slope_optimized }),
    })
}

fn dissipator_identity(p: &Params, seed: u64) -> Result<Output> {
    let (kappa, eta, dims) = (p.f64("kappa"), p.f64("eta"), p.usize("dims"));
    let sp = SSHParams::new(p.usize("n"), p.f64("j"), p.f64("delta"), 0.0, kappa, eta)?;
    let mut table = ResultTable::new(&["case", "sites", "deviation"]);
    let first = dissipator_mode_identity_check(&sp, dims)?;
    table.push(vec!["ssh".into(), sp.n_sites.into(), first.into()]);
    let mut pts = vec![(0.0, first.max(f64::MIN_POSITIVE))];
    for k in 0..p.usize("random") as u64 {
        let h = random_chiral_hamiltonian(p.usize("random-sites"), seed.wrapping_add(k));
        let d = dissipator_identity_for(&h, kappa, eta, dims)?;
        table.push(vec![format!("random-{k}").into(), h.nrows().into(), d.into()]);
        pts.push(((k + 1) as f64, d.max(f64::MIN_POSITIVE)));
    }
    let worst = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(Output {
        table,
        plot: lines("Site against mode Liouvillian", "case", "Frobenius difference", (false, true), vec![series("deviation", pts)]),
        summary: json!({ "max_deviation": worst }),
    })
}
