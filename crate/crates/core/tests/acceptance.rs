//! Acceptance gates for the two-scale benchmark.
//!
//! Each test is one gate; the harness output gives the pass/fail line per
//! gate. Heavy artifacts (full benchmark runs, off-line sweeps, the
//! flat-punch table) are computed once and shared through `OnceLock`, so the
//! suite stays in the low tens of seconds.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use rough_contact::bem::{
    corrected_pressure, interpolate_curve, solve_exhaustive, solve_nnls, InfluenceOperator,
    MicroSolver, NnlsWorkspace, MAX_CORRECTION_ITERATIONS, TOL_CORRECTION,
};
use rough_contact::bench::{run_alpha_table, run_benchmark, run_offline_fit, BenchmarkConfig, BenchmarkRun};
use rough_contact::composite_moduli;
use rough_contact::coupling::{OfflineCurve, Strategy};
use rough_contact::fit::fit_linear;
use rough_contact::surface::RoughSurface;

/// Seed of the benchmark realization driven by all three strategies.
const BENCH_SEED: u64 = 5;
/// Seeds for the off-line fit-quality gate; the first doubles as BENCH_SEED.
const FIT_SEEDS: [u64; 3] = [5, 17, 22];
/// Extra realizations pushed through the quasi-Newton strategy so the
/// monotonicity gate covers more than one surface.
const EXTRA_SEEDS: [u64; 2] = [17, 22];

struct TimedRun {
    run: BenchmarkRun,
    /// Whole-run wall time, surface preparation included (s).
    wall: f64,
}

fn config_with(strategy: Strategy, seed: u64) -> BenchmarkConfig {
    let mut cfg = BenchmarkConfig::default();
    cfg.micro.seed = seed;
    cfg.solver.strategy = strategy;
    cfg
}

fn timed_run(strategy: Strategy, seed: u64) -> TimedRun {
    let start = Instant::now();
    let run = run_benchmark(&config_with(strategy, seed)).expect("benchmark run failed");
    TimedRun { run, wall: start.elapsed().as_secs_f64() }
}

fn qn_run() -> &'static TimedRun {
    static RUN: OnceLock<TimedRun> = OnceLock::new();
    RUN.get_or_init(|| timed_run(Strategy::Qn, BENCH_SEED))
}

fn cqn_run() -> &'static TimedRun {
    static RUN: OnceLock<TimedRun> = OnceLock::new();
    RUN.get_or_init(|| timed_run(Strategy::Cqn, BENCH_SEED))
}

fn san_run() -> &'static TimedRun {
    static RUN: OnceLock<TimedRun> = OnceLock::new();
    RUN.get_or_init(|| timed_run(Strategy::San, BENCH_SEED))
}

fn extra_runs() -> &'static Vec<TimedRun> {
    static RUNS: OnceLock<Vec<TimedRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        EXTRA_SEEDS
            .iter()
            .map(|&seed| timed_run(Strategy::Qn, seed))
            .collect()
    })
}

fn offline_curves() -> &'static Vec<(u64, OfflineCurve)> {
    static CURVES: OnceLock<Vec<(u64, OfflineCurve)>> = OnceLock::new();
    CURVES.get_or_init(|| {
        FIT_SEEDS
            .iter()
            .map(|&seed| {
                let cfg = config_with(Strategy::San, seed);
                let steps = cfg.solver.offline_steps;
                let (_, _, curve) = run_offline_fit(&cfg, steps).expect("off-line sweep failed");
                (seed, curve)
            })
            .collect()
    })
}

fn stepping_seconds(run: &BenchmarkRun) -> f64 {
    run.history.steps.iter().map(|s| s.wall_seconds).sum()
}

#[test]
fn criterion_01_composite_moduli() {
    let c = composite_moduli(1.0, 0.3, 1.0, 0.3).unwrap();
    println!("criterion 1: E* = {:.6} N/um^2, nu* = {:.6}", c.e, c.nu);
    assert_eq!((c.e * 1e4).round() as i64, 5495, "E* {} != 0.5495 at 4 decimals", c.e);
    assert_eq!((c.nu * 1e4).round() as i64, -3929, "nu* {} != -0.3929 at 4 decimals", c.nu);
}

#[test]
fn criterion_02_flat_punch_factor_table() {
    let expected = [0.778, 0.806, 0.826, 0.841, 0.852, 0.858];
    let table = run_alpha_table(6).unwrap();
    for (&(n, alpha), &reference) in table.iter().zip(&expected) {
        println!("criterion 2: n = {n}, alpha = {alpha:.6}, reference {reference:.3}");
        assert!(
            (alpha - reference).abs() <= 0.02,
            "alpha({n}) = {alpha} departs from {reference} by more than 0.02"
        );
    }
    for pair in table.windows(2) {
        assert!(
            pair[1].1 > pair[0].1,
            "alpha must increase with resolution: {:?} -> {:?}",
            pair[0],
            pair[1]
        );
    }
}

#[test]
fn criterion_03_micro_solver_matches_exhaustive_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(1203);
    for grid in [3usize, 4] {
        for case in 0..50 {
            let cell = rng.random_range(0.3..2.0);
            let e = rng.random_range(0.5..3.0);
            let op = InfluenceOperator::new(grid, cell, e).unwrap();
            let cells = grid * grid;
            let candidates: Vec<usize> = (0..cells).collect();
            let ubar: Vec<f64> = (0..cells).map(|_| rng.random_range(-0.5..1.5)).collect();

            let mut ws = NnlsWorkspace::default();
            let fast = solve_nnls(&op, &candidates, &ubar, &[], &mut ws, 10 * cells)
                .unwrap_or_else(|e| panic!("solver failed on {grid}x{grid} case {case}: {e}"));
            let (oracle_active, oracle_pressures) =
                solve_exhaustive(&op, &candidates, &ubar).expect("oracle found no optimum");

            assert_eq!(
                fast.active, oracle_active,
                "active set mismatch on {grid}x{grid} case {case}"
            );
            let pmax = oracle_pressures.iter().cloned().fold(0.0f64, f64::max);
            for (a, b) in fast.pressures.iter().zip(&oracle_pressures) {
                assert!(
                    (a - b).abs() <= 1e-8 * pmax.max(f64::MIN_POSITIVE),
                    "pressure mismatch on {grid}x{grid} case {case}: {a} vs {b}"
                );
            }

            let scale = ubar.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
            for (i, &c) in candidates.iter().enumerate() {
                let u: f64 = fast
                    .active
                    .iter()
                    .zip(&fast.pressures)
                    .map(|(&a, &p)| op.entry(c, a) * p)
                    .sum();
                if fast.active.contains(&c) {
                    assert!(
                        (u - ubar[i]).abs() <= 1e-10 * scale,
                        "primal residual {:.3e} on {grid}x{grid} case {case}",
                        (u - ubar[i]).abs()
                    );
                } else {
                    assert!(
                        u >= ubar[i] - 1e-10 * scale,
                        "separation violated by {:.3e} on {grid}x{grid} case {case}",
                        ubar[i] - u
                    );
                }
            }
        }
    }
    println!("criterion 3: 50 random cases per grid matched the exhaustive oracle");
}

#[test]
fn criterion_04_flat_punch_response_is_linear() {
    let surface = Arc::new(RoughSurface::flat(4, 1000.0));
    let elastic = composite_moduli(1.0, 0.3, 1.0, 0.3).unwrap();
    let mut solver = MicroSolver::new(surface, &elastic).unwrap();
    let samples: Vec<(f64, f64)> = (1..=8)
        .map(|k| {
            let g = 0.25 * k as f64;
            (g, solver.solve(g).unwrap().total_force)
        })
        .collect();
    let fit = fit_linear(&samples).unwrap();
    println!(
        "criterion 4: slope = {:.6e} N/um, R^2 = 1 - {:.3e}",
        fit.slope,
        1.0 - fit.r2
    );
    assert!(fit.r2 >= 1.0 - 1e-10, "flat-punch R^2 = {} below 1 - 1e-10", fit.r2);
}

#[test]
fn criterion_05_correction_agrees_with_subtracted_curve() {
    let run = &qn_run().run;
    let curve = &offline_curves()
        .iter()
        .find(|(seed, _)| *seed == BENCH_SEED)
        .unwrap()
        .1;
    let samples = &curve.corrected.samples;
    let (g_lo, _) = samples[0];
    let (g_hi, _) = samples[samples.len() - 1];

    let mut solver = MicroSolver::new(Arc::clone(&run.surface), &run.elastic).unwrap();
    for k in 0..10 {
        let g = g_lo + (g_hi - g_lo) * (k as f64 + 0.5) / 10.0;
        let direct = corrected_pressure(
            &mut solver,
            run.alpha,
            g,
            TOL_CORRECTION,
            MAX_CORRECTION_ITERATIONS,
        )
        .unwrap();
        let interpolated = interpolate_curve(samples, g);
        let raw = solver.solve(g).unwrap().mean_pressure;

        let reference = direct.pressure.max(interpolated);
        let deviation = (direct.pressure - interpolated).abs() / reference;
        println!(
            "criterion 5: g = {g:.4} um, corrected {:.6e}, interpolated {:.6e}, raw {:.6e}, dev {:.2e}",
            direct.pressure, interpolated, raw, deviation
        );
        assert!(
            deviation <= 1e-2,
            "corrected and subtracted curves deviate by {deviation:.3e} at g = {g}"
        );
        assert!(
            direct.pressure >= raw * (1.0 - 1e-12),
            "corrected {} fell below raw {} at g = {g}",
            direct.pressure,
            raw
        );
    }
}

#[test]
fn criterion_06_offline_fit_quality_band() {
    for (seed, curve) in offline_curves() {
        println!(
            "criterion 6: seed {seed}, a = {:.6e}, b = {:.4}, R^2 = {:.6}",
            curve.fit.a, curve.fit.b, curve.fit.r2
        );
        assert!(
            curve.fit.r2 >= 0.995,
            "seed {seed}: R^2 = {} below 0.995",
            curve.fit.r2
        );
        assert!(
            (2.4..=3.4).contains(&curve.fit.b),
            "seed {seed}: exponent b = {} outside [2.4, 3.4]",
            curve.fit.b
        );
    }
}

#[test]
fn criterion_07_newton_convergence_structure() {
    let san = san_run().run.history.steps.last().unwrap();
    let residuals = &san.residuals;
    let shown: Vec<String> = residuals.iter().map(|r| format!("{r:.3e}")).collect();
    println!("criterion 7: SAN final-step residuals {shown:?}");
    for k in 1..residuals.len().saturating_sub(1) {
        if residuals[k + 1] <= f64::MIN_POSITIVE {
            break;
        }
        if residuals[k] < 1e-3 {
            let drop_prev = (residuals[k - 1] / residuals[k]).log10();
            let drop_next = (residuals[k] / residuals[k + 1]).log10();
            assert!(
                drop_next >= 1.5 * drop_prev,
                "final-step decay not superlinear: drop {drop_next:.2} after {drop_prev:.2}"
            );
        }
    }

    let san_iterations = san.iterations();
    let qn_iterations = qn_run().run.history.steps.last().unwrap().iterations();
    let cqn_iterations = cqn_run().run.history.steps.last().unwrap().iterations();
    println!(
        "criterion 7: final-step iterations SAN {san_iterations}, QN {qn_iterations}, CQN {cqn_iterations}"
    );
    assert!(
        qn_iterations >= san_iterations + 1,
        "QN final step took {qn_iterations} iterations, expected at least {} \
         (finite-difference tangent vs analytic); the warm-started secant tangent \
         is accurate enough here that this expectation does not hold",
        san_iterations + 1
    );
    assert!(
        cqn_iterations >= san_iterations + 1,
        "CQN final step took {cqn_iterations} iterations, expected at least {}",
        san_iterations + 1
    );
}

#[test]
fn criterion_08_strategy_load_curves_agree() {
    let qn = &qn_run().run;
    let cqn = &cqn_run().run;
    let san = &san_run().run;
    let s = qn.stats.rms;

    let p_max = qn.history.steps.last().unwrap().reaction;
    let mut worst_cqn = 0.0f64;
    let mut worst_san = (0.0f64, 0usize, 0.0f64);
    let mut worst_san_scale = 0.0f64;
    for (k, step) in qn.history.steps.iter().enumerate() {
        let p_qn = step.reaction;
        let p_cqn = cqn.history.steps[k].reaction;
        let dev_cqn = (p_qn - p_cqn).abs() / p_qn.abs();
        worst_cqn = worst_cqn.max(dev_cqn);
        assert!(
            dev_cqn <= 0.01,
            "QN and CQN loads differ by {dev_cqn:.3e} at step {}",
            step.step
        );

        if step.delta >= 0.5 * s * (1.0 - 1e-9) {
            let p_san = san.history.steps[k].reaction;
            let dev_san = (p_qn - p_san).abs() / p_qn.abs();
            if dev_san > worst_san.0 {
                worst_san = (dev_san, step.step, step.delta / s);
            }
            worst_san_scale = worst_san_scale.max((p_qn - p_san).abs() / p_max);
        }
    }
    let (dev, at_step, delta_over_s) = worst_san;
    assert!(
        dev <= 0.10,
        "SAN load departs from QN by {dev:.3e} at step {at_step} (delta = {delta_over_s:.2} \
         rms lengths), exceeding the 10% pointwise band; deviation relative to the final load \
         is only {worst_san_scale:.3e}, so the curves nearly coincide on the load axis, but a \
         single global power law cannot track the low-load response of this surface: the \
         surrogate's fitted exponent (~2.6, set by the high-pressure decade of the off-line \
         sweep) overshoots the local slope of the pressure-gap curve near first contact, so \
         the surrogate under-predicts the load at the bottom of the comparison window",
    );
    println!(
        "criterion 8: worst QN-CQN deviation {worst_cqn:.3e}, worst QN-SAN deviation {dev:.3e}"
    );
}

/// Re-solves the micro problem at each converged Gauss-point gap to recover
/// the contact-area history (the stepping loop itself only stores pressure
/// and tangent).
fn area_fractions(run: &BenchmarkRun) -> Vec<f64> {
    let mut solver = MicroSolver::new(Arc::clone(&run.surface), &run.elastic).unwrap();
    run.history
        .steps
        .iter()
        .map(|rec| {
            let mut acc = 0.0;
            for gauss in &rec.gauss {
                acc += corrected_pressure(
                    &mut solver,
                    run.alpha,
                    gauss.g_n,
                    TOL_CORRECTION,
                    MAX_CORRECTION_ITERATIONS,
                )
                .unwrap()
                .solution
                .area_fraction;
            }
            acc / rec.gauss.len() as f64
        })
        .collect()
}

#[test]
fn criterion_09_monotone_load_area_and_pressure() {
    let runs: Vec<(&str, &BenchmarkRun)> = vec![("qn", &qn_run().run), ("cqn", &cqn_run().run), ("san", &san_run().run)]
        .into_iter()
        .chain(
            extra_runs()
                .iter()
                .map(|t| ("qn-extra", &t.run)),
        )
        .collect();

    for (label, run) in runs {
        let seed = run.config.micro.seed;
        let loads: Vec<f64> = run.history.steps.iter().map(|s| s.reaction).collect();
        let pressures: Vec<f64> = run
            .history
            .steps
            .iter()
            .map(|s| s.gauss.iter().map(|g| g.pressure).sum::<f64>() / s.gauss.len() as f64)
            .collect();
        let areas = area_fractions(run);

        for (name, series) in [("load", &loads), ("mean pressure", &pressures), ("area fraction", &areas)] {
            for pair in series.windows(2) {
                assert!(
                    pair[1] >= pair[0] - 1e-12 * pair[0].abs().max(1.0),
                    "{label} seed {seed}: {name} decreased from {} to {}",
                    pair[0],
                    pair[1]
                );
            }
        }
        println!(
            "criterion 9: {label} seed {seed} monotone (P {:.4e} -> {:.4e} N, area {:.4} -> {:.4})",
            loads[0],
            loads[loads.len() - 1],
            areas[0],
            areas[areas.len() - 1]
        );
    }
}

#[test]
fn criterion_10_runtime_budget_and_ordering() {
    let qn = qn_run();
    let cqn = cqn_run();
    let san = san_run();

    let qn_steps = stepping_seconds(&qn.run);
    let cqn_steps = stepping_seconds(&cqn.run);
    let san_steps = stepping_seconds(&san.run);
    let offline = san.run.offline.as_ref().map(|c| c.wall_seconds).unwrap_or(0.0);
    println!(
        "criterion 10: whole QN run {:.2} s; stepping QN {qn_steps:.4} s, CQN {cqn_steps:.4} s, \
         SAN {san_steps:.4} s (+ off-line {offline:.2} s)",
        qn.wall
    );

    assert!(qn.wall < 600.0, "QN benchmark took {:.1} s, budget 600 s", qn.wall);
    assert!(san_steps < 10.0, "SAN macro stage took {san_steps:.2} s, budget 10 s");
    assert!(
        san_steps < qn_steps && san_steps < cqn_steps,
        "SAN stepping ({san_steps:.4} s) should undercut QN ({qn_steps:.4} s) and CQN ({cqn_steps:.4} s)"
    );
    let ratio = cqn_steps / qn_steps.max(1e-9);
    assert!(
        (0.1..=10.0).contains(&ratio),
        "CQN and QN stepping should be of the same order, got ratio {ratio:.3}"
    );
}
