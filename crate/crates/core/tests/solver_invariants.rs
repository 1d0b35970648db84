//! End-to-end invariants of the solver loops: dual-update replay, the
//! monotone per-outer residual, warm-start carryover, budget controls,
//! determinism, and agreement between the exact and inexact sweeps.

use nalgebra::DVector;

use cvi_core::acvi::{acvi_inexact_run, acvi_run, acvi_run_controlled};
use cvi_core::baselines::{fw_run, run_baseline, BaselineMethod, FwGamma};
use cvi_core::config::{AcviConfig, InexactConfig, InnerOptimizer, InnerSchedule};
use cvi_core::error::SolverError;
use cvi_core::problems::{make_cbg, make_hbg};
use cvi_core::trace::{metric, RunControl, SolverTrace};
use cvi_core::vacvi::vacvi_run;

fn reference_cbg_config() -> AcviConfig {
    AcviConfig::new(0.08, 1e-5, 0.5, InnerSchedule::reference_2d())
}

fn vec_of(rec: &cvi_core::trace::TraceRecord) -> DVector<f64> {
    DVector::from_vec(rec.x.clone())
}

// ---------------------------------------------------------------------------
// Core ACVI loop

#[test]
fn acvi_converges_on_weakly_damped_bilinear_game() {
    let p = make_cbg();
    let trace = acvi_run(&p, &reference_cbg_config()).unwrap();
    assert_eq!(trace.method, "acvi");
    // 50 updates plus the initial record.
    assert_eq!(trace.records.len(), 51);
    let dist = trace.metric_series(metric::DIST_TO_SOLUTION);
    // The very first update already lands near the equilibrium (from
    // sqrt(2) away down to ~0.111), and the full run ends within 1e-2.
    assert!(dist[1].1 < 0.15, "first update did not approach the solution");
    let last = dist.last().unwrap().1;
    assert!(last < 1e-2, "no convergence: final dist {last:e}");
    // Regression pin from the reference run (observed 3.957e-3).
    assert!(last < 4.5e-3, "reference run regressed: final dist {last:e}");
    let consensus = trace.metric_series(metric::CONSENSUS_RESIDUAL);
    let cons_last = consensus.last().unwrap().1;
    // Observed 3.91e-4 after the 50-update schedule.
    assert!(cons_last < 5e-4, "consensus regressed: {cons_last:e}");
}

#[test]
fn consensus_residual_decays_over_long_single_outer() {
    // One outer iteration, K = 200 inner sweeps at the reference
    // hyperparameters: the consensus residual ||x_K - y_K|| decays from
    // ~6.5e-2 after the first update to ~3.1e-5 (frozen regression value;
    // the tail contracts at roughly 0.984 per inner iteration).
    let p = make_cbg();
    let config = AcviConfig::new(
        0.08,
        1e-5,
        0.5,
        InnerSchedule::Constant { outers: 1, inners: 200 },
    );
    let trace = acvi_run(&p, &config).unwrap();
    let cons = trace.metric_series(metric::CONSENSUS_RESIDUAL);
    assert_eq!(cons.last().unwrap().0, 200);
    let last = cons.last().unwrap().1;
    assert!(last < 4e-5, "K=200 consensus regressed: {last:e}");
    assert!(last < 1e-2 * cons[1].1, "consensus is not decaying");
}

#[test]
fn lambda_update_replays_bitwise_from_trace() {
    let p = make_cbg();
    let trace = acvi_run(&p, &reference_cbg_config()).unwrap();
    let beta = 0.08;
    for w in trace.records.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        let lp = DVector::from_vec(prev.lambda.clone().unwrap());
        let ln = DVector::from_vec(next.lambda.clone().unwrap());
        let x = DVector::from_vec(next.x.clone());
        let y = DVector::from_vec(next.y.clone().unwrap());
        let replay = &lp + beta * (&x - &y);
        assert_eq!(ln, replay, "dual update does not replay at iter {}", next.iter);
    }
}

#[test]
fn per_outer_residual_is_nonincreasing() {
    // One outer pass, many inner sweeps: the combined dual/primal residual
    // (1/2beta)||lambda_k+1 - lambda_k||^2 + (beta/2)||y_k+1 - y_k||^2 is
    // nonincreasing in k for monotone operators.
    let cases: Vec<(cvi_core::problem::ProblemInstance, f64)> = vec![
        (make_cbg(), 0.08),
        (make_hbg(0.5, 20).unwrap(), 0.5),
    ];
    for (p, beta) in cases {
        let config = AcviConfig::new(
            beta,
            1e-5,
            0.5,
            InnerSchedule::Constant {
                outers: 1,
                inners: 200,
            },
        );
        let trace = acvi_run(&p, &config).unwrap();
        let series = trace.metric_series(metric::LEMMA_RESIDUAL);
        // Skip the initial record (no residual there) and allow rounding
        // slack at the scale of the residual itself.
        let vals: Vec<f64> = series
            .iter()
            .filter(|(_, v)| v.is_finite())
            .map(|&(_, v)| v)
            .collect();
        assert!(vals.len() >= 199, "missing residual series on {}", p.name);
        for w in vals.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12 * (1.0 + w[0]),
                "residual increased on {}: {} -> {}",
                p.name,
                w[0],
                w[1]
            );
        }
    }
}

#[test]
fn state_carries_over_across_outer_boundaries() {
    // y and lambda continue across outer iterations: each record's dual
    // update chains from the previous record even at outer boundaries, which
    // the bitwise replay test already proves; here check the schedule shape.
    let p = make_cbg();
    let config = AcviConfig::new(
        0.08,
        1e-5,
        0.5,
        InnerSchedule::PerOuter(vec![2, 3, 1]),
    );
    let trace = acvi_run(&p, &config).unwrap();
    let shape: Vec<(usize, usize, usize)> = trace
        .records
        .iter()
        .map(|r| (r.iter, r.outer, r.inner))
        .collect();
    assert_eq!(
        shape,
        vec![
            (0, 0, 0),
            (1, 0, 1),
            (2, 0, 2),
            (3, 1, 1),
            (4, 1, 2),
            (5, 1, 3),
            (6, 2, 1),
        ]
    );
}

#[test]
fn runs_are_deterministic() {
    let p = make_hbg(0.3, 12).unwrap();
    let config = AcviConfig::new(0.5, 1e-6, 0.5, InnerSchedule::Constant { outers: 10, inners: 1 });
    let a = acvi_run(&p, &config).unwrap();
    let b = acvi_run(&p, &config).unwrap();
    let flatten = |t: &SolverTrace| -> Vec<f64> {
        t.records.iter().flat_map(|r| r.x.clone()).collect()
    };
    assert_eq!(flatten(&a), flatten(&b));
}

#[test]
fn update_budget_and_stop_metric_truncate() {
    let p = make_cbg();
    let config = reference_cbg_config();
    let budget = RunControl {
        max_updates: Some(7),
        max_wall_time_s: None,
        stop_metric: None,
    };
    let trace = acvi_run_controlled(&p, &config, &budget).unwrap();
    assert_eq!(trace.records.len(), 8); // initial + 7 updates

    let stop = RunControl {
        max_updates: None,
        max_wall_time_s: None,
        stop_metric: Some((metric::DIST_TO_SOLUTION.to_string(), 1e-2)),
    };
    let trace = acvi_run_controlled(&p, &config, &stop).unwrap();
    let (_, last) = *trace
        .metric_series(metric::DIST_TO_SOLUTION)
        .last()
        .unwrap();
    assert!(last <= 1e-2);
    assert!(trace.records.len() < 51, "stop metric did not truncate");
}

#[test]
fn mu_floor_keeps_barrier_positive() {
    // An aggressive decay would underflow mu without the floor; the prox
    // solutions must stay strictly interior regardless.
    let p = make_cbg();
    let config = AcviConfig::new(
        0.08,
        1e-5,
        1e-40,
        InnerSchedule::Constant { outers: 9, inners: 2 },
    );
    let trace = acvi_run(&p, &config).unwrap();
    for rec in &trace.records {
        let y = rec.y.as_ref().unwrap();
        assert!(y.iter().all(|&t| t > 0.0), "y left the strict interior");
        assert!(y.iter().all(|&t| t.is_finite()));
    }
}

// ---------------------------------------------------------------------------
// Inexact sweep

#[test]
fn inexact_with_many_inner_steps_tracks_exact_solver() {
    // With a barrier weight that keeps the prox target away from the
    // boundary, 400 warm-started descent steps per sweep reproduce the
    // exact-subproblem trajectory to well below the 1e-4 contract
    // (observed worst per-iterate deviation 1.8e-8).
    let p = make_cbg();
    let schedule = InnerSchedule::Constant { outers: 1, inners: 20 };
    let exact = acvi_run(&p, &AcviConfig::new(0.5, 1e-2, 0.5, schedule.clone())).unwrap();
    let inexact_cfg = InexactConfig {
        optimizer: InnerOptimizer::Gda,
        steps: 400,
        eta_x: 0.1,
        eta_y: 0.2,
    };
    let inexact = acvi_inexact_run(
        &p,
        &AcviConfig::new(0.5, 1e-2, 0.5, schedule),
        &inexact_cfg,
    )
    .unwrap();
    assert_eq!(inexact.method, "acvi_inexact");
    assert_eq!(exact.records.len(), inexact.records.len());
    for (e, i) in exact.records.iter().zip(inexact.records.iter()) {
        let drift = (vec_of(e) - vec_of(i)).amax();
        assert!(
            drift < 1e-4,
            "inexact drifted from exact solver at iter {}: {drift:e}",
            e.iter
        );
    }
}

#[test]
fn inexact_single_step_still_converges() {
    // One optimizer step per sweep is enough on a problem whose solution
    // is strictly interior: relative error falls from ~0.99 to ~1.6e-3
    // over 100 sweeps.
    let p = make_hbg(0.5, 8).unwrap();
    let schedule = InnerSchedule::Constant { outers: 1, inners: 100 };
    let inexact_cfg = InexactConfig {
        optimizer: InnerOptimizer::Eg,
        steps: 1,
        eta_x: 0.05,
        eta_y: 0.2,
    };
    let trace = acvi_inexact_run(
        &p,
        &AcviConfig::new(0.5, 1e-9, 0.5, schedule),
        &inexact_cfg,
    )
    .unwrap();
    let rel = trace.metric_series(metric::RELATIVE_ERROR);
    let last = rel.last().unwrap().1;
    assert!(last < 1e-2, "single-step sweeps did not converge: {last:e}");
    assert!(last < 1e-2 * rel[0].1);
}

// ---------------------------------------------------------------------------
// v-ACVI

#[test]
fn vacvi_iterates_stay_strictly_feasible() {
    // A monotone game with simplex-style equality constraints: the
    // barrier keeps every x strictly inside the inequality set while the
    // y-update projects exactly onto the equality set.
    let p = make_hbg(0.5, 4).unwrap();
    let config = AcviConfig::new(
        0.08,
        1e-5,
        0.5,
        InnerSchedule::Constant { outers: 10, inners: 5 },
    );
    let trace = vacvi_run(&p, &config).unwrap();
    assert_eq!(trace.method, "vacvi");
    for rec in &trace.records {
        let x = DVector::from_vec(rec.x.clone());
        assert!(
            p.constraints.strictly_feasible(&x),
            "x left the strict interior at iter {}",
            rec.iter
        );
        // y iterates live on the equality set.
        let y = DVector::from_vec(rec.y.clone().unwrap());
        assert!(p.constraints.equality_residual(&y) < 1e-10);
    }
    let consensus = trace.metric_series(metric::CONSENSUS_RESIDUAL);
    assert!(consensus.last().unwrap().1 < 0.1 * consensus[1].1);
}

#[test]
fn vacvi_converges_on_weakly_damped_bilinear_game() {
    let p = make_cbg();
    let trace = vacvi_run(&p, &reference_cbg_config()).unwrap();
    let dist = trace.metric_series(metric::DIST_TO_SOLUTION);
    assert!(dist.last().unwrap().1 < 1e-2 * dist[0].1);
}

// ---------------------------------------------------------------------------
// Baselines and Frank-Wolfe

#[test]
fn projected_baselines_converge_on_bilinear_game() {
    let p = make_cbg();
    for method in [
        BaselineMethod::Gda,
        BaselineMethod::Eg,
        BaselineMethod::Ogda,
        BaselineMethod::La {
            k: 5,
            alpha: 0.5,
            base: Box::new(BaselineMethod::Eg),
        },
    ] {
        // The per-step contraction on this game at gamma = 0.1 is only
        // ~0.995, so meaningful progress needs several hundred steps.
        let trace = run_baseline(&p, &method, 0.1, 600, None).unwrap();
        assert_eq!(trace.records.len(), 601);
        let dist = trace.metric_series(metric::DIST_TO_SOLUTION);
        assert!(
            dist.last().unwrap().1 < 0.05 * dist[0].1,
            "{} failed to converge",
            method.label()
        );
    }
}

#[test]
fn lookahead_alpha_one_is_base_method() {
    let p = make_cbg();
    let start = DVector::from_vec(vec![3.0, 3.0]);
    let base = run_baseline(&p, &BaselineMethod::Gda, 0.1, 40, Some(&start)).unwrap();
    let la = run_baseline(
        &p,
        &BaselineMethod::La {
            k: 5,
            alpha: 1.0,
            base: Box::new(BaselineMethod::Gda),
        },
        0.1,
        40,
        Some(&start),
    )
    .unwrap();
    for (a, b) in base.records.iter().zip(la.records.iter()) {
        assert_eq!(a.x, b.x, "alpha = 1 must reduce to the base method");
    }
}

#[test]
fn lookahead_alpha_zero_pins_the_anchor() {
    let p = make_cbg();
    let start = DVector::from_vec(vec![2.0, 2.0]);
    let la = run_baseline(
        &p,
        &BaselineMethod::La {
            k: 4,
            alpha: 0.0,
            base: Box::new(BaselineMethod::Gda),
        },
        0.1,
        16,
        Some(&start),
    )
    .unwrap();
    // Every k-th record returns exactly to the anchor.
    for i in (0..=16).step_by(4) {
        assert_eq!(la.records[i].x, vec![2.0, 2.0], "anchor moved at iter {i}");
    }
}

#[test]
fn frank_wolfe_reports_gap_and_respects_eps() {
    // Harmonic steps give the classic O(1/t) gap decay (observed ~2.2/t
    // here), so eps = 1e-2 must trigger an early stop near t = 220 well
    // inside the 2000-iteration budget.
    let p = make_hbg(0.5, 10).unwrap();
    let trace = fw_run(&p, FwGamma::Harmonic, 2000, 1e-2, None).unwrap();
    assert_eq!(trace.method, "fw");
    let gaps = trace.metric_series(metric::GAP);
    assert!(gaps[0].1 > 0.0);
    let &(last_iter, last_gap) = gaps.last().unwrap();
    assert!(
        last_gap <= 1e-2,
        "gap {last_gap:e} above eps after {last_iter} iterations"
    );
    assert!(
        last_iter < 500,
        "eps stop did not trigger early (stopped at {last_iter})"
    );
    // Every recorded gap before the stop is above eps; all are nonnegative
    // (feasible iterates, monotone field).
    assert!(gaps[..gaps.len() - 1].iter().all(|&(_, g)| g > 1e-2));
    assert!(gaps.iter().all(|&(_, g)| g >= -1e-12));

    // The adaptive step rule drives the gap many orders lower on the same
    // budget (observed ~1e-15 after 2000 iterations).
    let adaptive = fw_run(&p, FwGamma::Adaptive { c: 1.0, nu: 1.0 }, 2000, 0.0, None).unwrap();
    let last_adaptive = adaptive.metric_series(metric::GAP).last().unwrap().1;
    assert!(
        last_adaptive < 1e-9,
        "adaptive step rule regressed: final gap {last_adaptive:e}"
    );
}

#[test]
fn frank_wolfe_requires_an_lmo() {
    let p = make_cbg();
    let err = fw_run(&p, FwGamma::Harmonic, 10, 1e-6, None);
    assert!(matches!(err, Err(SolverError::MissingLmo)));
}
