//! Structural properties of the simulated experiments.

use std::f64::consts::PI;

use ctxkernel::eraser::analyze_eraser;
use ctxkernel::harness::{
    ex_mean_witness, run_a6, run_a62, A62Plan, A6Plan, Branch, Family, Replicate, RunMode, Triple,
};
use ctxkernel::simcore::NoiseModel;

#[test]
fn replicates_host_opposite_parities() {
    let plan = A6Plan::default();
    let specs = plan.lane_plans();
    for lane in 0..plan.lanes {
        let of = |rep: Replicate| {
            specs
                .iter()
                .find(|s| s.lane_id == lane && s.replicate == rep && s.family == Family::CtxOnly)
                .unwrap()
        };
        let (r0, r1) = (of(Replicate::R0), of(Replicate::R1));
        assert_eq!(
            r0.triple().index() ^ r1.triple().index(),
            0b100,
            "only C2 differs"
        );
        assert_ne!(r0.label(), r1.label());
    }
    for rep in Replicate::BOTH {
        let mut seen: Vec<usize> = specs
            .iter()
            .filter(|s| s.replicate == rep && s.family == Family::CtxOnly)
            .map(|s| s.triple().index())
            .collect();
        seen.sort();
        assert_eq!(
            seen,
            (0..8).collect::<Vec<_>>(),
            "each replicate covers every triple once"
        );
    }
}

#[test]
fn replicate_contrast_is_antisymmetric_in_the_label() {
    let theta = 1.1;
    let plan = A6Plan {
        thetas: vec![theta],
        families: vec![Family::Active],
        ..A6Plan::default()
    };
    let run = run_a6(&plan, 0, RunMode::Exact).unwrap();
    for lane in 0..plan.lanes {
        let value = |rep: Replicate| {
            let c = run
                .circuits
                .iter()
                .find(|c| c.spec.lane_id == lane && c.spec.replicate == rep)
                .unwrap();
            (c.label, ex_mean_witness(&c.table, "A", "B").unwrap())
        };
        let ((l0, w0), (_, w1)) = (value(Replicate::R0), value(Replicate::R1));
        let sign = if l0 == 0 { 1.0 } else { -1.0 };
        assert!(
            (w0 - w1 - sign * (1.0 - theta.cos())).abs() < 1e-12,
            "lane {lane}"
        );
    }
}

#[test]
fn context_register_reads_back_its_triple() {
    let plan = A6Plan {
        families: vec![Family::CtxOnly],
        thetas: vec![],
        ..A6Plan::default()
    };
    let run = run_a6(&plan, 0, RunMode::Exact).unwrap();
    for c in &run.circuits {
        let key = c.triple.to_string();
        let p: f64 = ctxkernel::simcore::OutcomeTable::weighted(&c.table)
            .into_iter()
            .filter(|(k, _)| *k == key)
            .map(|(_, p)| p)
            .sum();
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(c.triple, key.parse::<Triple>().unwrap());
    }
}

#[test]
fn local_dephasing_matches_marking_but_is_not_erasable() {
    let plan = A62Plan::default();
    let report = analyze_eraser(
        &run_a62(&plan, &NoiseModel::noiseless(), 0, RunMode::Exact).unwrap(),
        1e-9,
    )
    .unwrap();
    for r in &report.records {
        let (mark, local) = (r.v_uncond.unwrap(), r.v_local.unwrap());
        assert!(
            (mark - local).abs() < 1e-9,
            "λ = {}: MARK {mark} vs LOCAL {local}",
            r.lambda
        );
        let erased = r.v_cond_by_outcome.as_ref().unwrap().weighted_mean;
        assert!((erased - 1.0).abs() < 1e-9);
        if r.lambda > 0.1 {
            assert!(
                erased - local > 0.001,
                "conditioning recovers what local dephasing loses"
            );
        }
    }
}

#[test]
fn eraser_conditioned_fringes_have_opposite_signs() {
    let plan = A62Plan {
        lambda_values: vec![PI / 3.0, PI / 2.0],
        branches: vec![Branch::EraseX],
        ..A62Plan::default()
    };
    let report = analyze_eraser(
        &run_a62(&plan, &NoiseModel::noiseless(), 0, RunMode::Exact).unwrap(),
        1e-9,
    )
    .unwrap();
    for r in &report.records {
        let [m0, m1] = r.erase_x_conditioned.unwrap();
        let (m0, m1) = (m0.unwrap(), m1.unwrap());
        assert!(m0 * m1 < 0.0, "λ = {}: {m0} {m1}", r.lambda);
        assert!((m0.abs() - 1.0).abs() < 1e-9 && (m1.abs() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn sampled_runs_are_seed_deterministic() {
    let plan = A6Plan {
        lanes: 8,
        shots: 100,
        thetas: vec![1.0],
        ..A6Plan::default()
    };
    let a = run_a6(&plan, 77, RunMode::Sampled).unwrap();
    let b = run_a6(&plan, 77, RunMode::Sampled).unwrap();
    let c = run_a6(&plan, 78, RunMode::Sampled).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let plan = A6Plan {
        lanes: 8,
        shots: 200,
        thetas: vec![PI / 2.0],
        ..A6Plan::default()
    };
    let options = ctxkernel::pipeline::AnalysisOptions {
        n_shuffles: 50,
        n_resamples: 100,
        ..Default::default()
    };
    let go = || {
        let run = run_a6(&plan, 5, RunMode::Sampled).unwrap();
        serde_json::to_string(&ctxkernel::pipeline::analyze_a6(&run, &options).unwrap()).unwrap()
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(go);
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(go);
    assert_eq!(single, many);
}
