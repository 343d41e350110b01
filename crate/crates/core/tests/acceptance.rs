//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;

use ctxkernel::eraser::analyze_eraser;
use ctxkernel::harness::{
    run_a6, run_a62, A62Plan, A6Plan, ContextEnsemble, Family, NoiseTable, RunMode,
};
use ctxkernel::infostats::{
    miller_madow_entropy, mobius_triplet_atom, permutation_test, plugin_mutual_information, Labeled,
};
use ctxkernel::kernelfit::{fit_delta_curve, CurvePoint};
use ctxkernel::pipeline::{analyze_a6, AnalysisOptions};
use ctxkernel::rng;
use ctxkernel::simcore::{Confusion, CountsTable, Gate, NoiseModel, QuantumState};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Exact interaction-on contrast follows 1 − cos θ, quickly.
fn exact_active_contrast() -> Outcome {
    let start = Instant::now();
    let thetas = vec![0.0, FRAC_PI_4, FRAC_PI_2, PI];
    let plan = A6Plan {
        thetas: thetas.clone(),
        families: vec![Family::Active],
        ..A6Plan::default()
    };
    let run = run_a6(&plan, 1, RunMode::Exact).unwrap();
    let analysis = analyze_a6(&run, &AnalysisOptions::default()).unwrap();
    let worst = thetas
        .iter()
        .map(|&t| {
            (analysis.witness(Family::Active, Some(t)).unwrap().delta_e - (1.0 - t.cos())).abs()
        })
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-10 && elapsed < Duration::from_secs(1),
        format!("max |ΔE − (1 − cos θ)| = {worst:.1e}, {elapsed:.2?}"),
    )
}

/// The ZZ rotation leaves ⟨X_A X_B⟩ on |++⟩ untouched.
fn rzz_preserves_xx() -> Outcome {
    let mut r = rng::stream(2, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let theta = r.random_range(-2.0 * PI..2.0 * PI);
        let mut s = QuantumState::zero(2).unwrap();
        s.apply(&Gate::H { qubit: 0 }).unwrap();
        s.apply(&Gate::H { qubit: 1 }).unwrap();
        s.apply(&Gate::Rzz {
            a: 0,
            b: 1,
            angle: theta,
        })
        .unwrap();
        worst = worst.max((s.expectation("XX").unwrap() - 1.0).abs());
    }
    outcome(
        worst < 1e-10,
        format!("20 random θ, max |⟨XX⟩ − 1| = {worst:.1e}"),
    )
}

/// Parity ensemble: no information below the full triple, one bit in it.
fn parity_ensemble_information() -> Outcome {
    let joint = ContextEnsemble::parity().joint_distribution();
    let c = ["C0", "C1", "C2"];
    let mut lower: f64 = 0.0;
    for i in 0..3 {
        lower = lower.max(
            plugin_mutual_information(&joint, &["Y"], &[c[i]])
                .unwrap()
                .raw_bits
                .abs(),
        );
        for j in i + 1..3 {
            lower = lower.max(
                plugin_mutual_information(&joint, &["Y"], &[c[i], c[j]])
                    .unwrap()
                    .raw_bits
                    .abs(),
            );
        }
    }
    let full = plugin_mutual_information(&joint, &["Y"], &c)
        .unwrap()
        .raw_bits;
    let atoms = mobius_triplet_atom(&joint, "Y", c).unwrap();
    let mi_form = atoms.top_atom();
    let entropy_form = atoms.top_atom_entropy_form;
    let pass = lower < 1e-12
        && (full - 1.0).abs() < 1e-12
        && (mi_form - 1.0).abs() < 1e-12
        && (entropy_form - 1.0).abs() < 1e-12
        && (mi_form - entropy_form).abs() < 1e-12;
    outcome(
        pass,
        format!(
            "max singles/pairs I = {lower:.1e}, I(Y;C0C1C2) = {full:.12}, atom MI form {mi_form:.12}, entropy form {entropy_form:.12}"
        ),
    )
}

#[derive(Clone, Copy)]
struct Rec {
    label: u8,
    value: f64,
}

impl Labeled for Rec {
    fn label(&self) -> u8 {
        self.label
    }
    fn with_label(mut self, label: u8) -> Self {
        self.label = label;
        self
    }
    fn stratum(&self) -> u64 {
        0
    }
}

fn mean_gap(rs: &[Rec]) -> f64 {
    let (mut s, mut n) = ([0.0; 2], [0.0; 2]);
    for r in rs {
        s[r.label as usize] += r.value;
        n[r.label as usize] += 1.0;
    }
    s[0] / n[0] - s[1] / n[1]
}

/// Permutation p-values hit the grid floor on separated data and are
/// uniform on the grid under the null.
fn permutation_calibration() -> Outcome {
    let separated: Vec<Rec> = (0..100)
        .map(|i| Rec {
            label: (i % 2) as u8,
            value: if i % 2 == 0 { 5.0 } else { 0.0 } + 0.01 * i as f64,
        })
        .collect();
    let p500 = permutation_test(&separated, mean_gap, 500, 1)
        .unwrap()
        .p_value;
    let p200 = permutation_test(&separated, mean_gap, 200, 2)
        .unwrap()
        .p_value;

    let shuffles = 99;
    let mut ps: Vec<f64> = (0..200u64)
        .map(|d| {
            let mut r = rng::stream(1000 + d, 0);
            let data: Vec<Rec> = (0..60)
                .map(|i| Rec {
                    label: (i % 2) as u8,
                    value: r.random::<f64>(),
                })
                .collect();
            permutation_test(&data, mean_gap, shuffles, d)
                .unwrap()
                .p_value
        })
        .collect();
    ps.sort_by(f64::total_cmp);
    let grid = (shuffles + 1) as f64;
    let ks = (1..=shuffles + 1)
        .map(|k| {
            let x = k as f64 / grid;
            let empirical = ps.iter().filter(|&&p| p <= x + 1e-12).count() as f64 / ps.len() as f64;
            (empirical - x).abs()
        })
        .fold(0.0, f64::max);
    let pass = p500 == 1.0 / 501.0 && p200 == 1.0 / 201.0 && ks < 0.12;
    outcome(
        pass,
        format!(
            "p(500) = 1/{:.0}, p(200) = 1/{:.0}, null KS = {ks:.3}",
            1.0 / p500,
            1.0 / p200
        ),
    )
}

/// Interaction-off controls show no contrast, exactly when noiseless and
/// within the confidence interval under parity-blind lane noise.
fn passive_nulls() -> Outcome {
    let families = vec![Family::Passive1, Family::Passive2];
    let base = A6Plan {
        thetas: vec![],
        families: families.clone(),
        ..A6Plan::default()
    };
    let quick = AnalysisOptions {
        n_shuffles: 100,
        n_resamples: 400,
        ..AnalysisOptions::default()
    };

    let mut exact_zero = true;
    for mode in [RunMode::Exact, RunMode::Sampled] {
        let run = run_a6(&base, 3, mode).unwrap();
        let a = analyze_a6(&run, &quick).unwrap();
        for &f in &families {
            exact_zero &= a.witness(f, None).unwrap().delta_e == 0.0;
        }
    }

    let mut profiles = std::collections::BTreeMap::new();
    let mut lane_profiles = Vec::new();
    for lane in 0..8 {
        let name = format!("lane{lane}");
        let p = 0.005 + 0.004 * lane as f64;
        profiles.insert(
            name.clone(),
            NoiseModel {
                single_qubit_depolarizing: 0.002 * (1 + lane % 3) as f64,
                two_qubit_depolarizing: 0.01 + 0.002 * lane as f64,
                idle_dephasing: 0.003,
                readout: vec![Confusion::asymmetric(p, 1.5 * p)],
            },
        );
        lane_profiles.push(name);
    }
    let noisy = A6Plan {
        noise_table: NoiseTable {
            profiles,
            lane_profiles,
        },
        ..base
    };
    let mut covered = 0;
    let mut total = 0;
    for rep in 0..20u64 {
        let run = run_a6(&noisy, 100 + rep, RunMode::Sampled).unwrap();
        let a = analyze_a6(
            &run,
            &AnalysisOptions {
                seed: rep,
                ..quick.clone()
            },
        )
        .unwrap();
        // one interval per replication, on the PASSIVE2 (full control) contrast
        let ci = a.witness(Family::Passive2, None).unwrap().ci.unwrap();
        total += 1;
        if ci[0] <= 0.0 && 0.0 <= ci[1] {
            covered += 1;
        }
    }
    outcome(
        exact_zero && covered >= 18,
        format!("noiseless ΔE exactly 0: {exact_zero}; noisy 95% CI covers 0 in {covered}/{total}"),
    )
}

/// Unweighted fit of the reference contrast table.
fn reference_table_fit() -> Outcome {
    let points: Vec<CurvePoint> = [
        (0.0, 0.0),
        (FRAC_PI_4, 0.261230),
        (FRAC_PI_2, 0.910156),
        (PI, 1.786784),
    ]
    .iter()
    .map(|&(theta, delta_e)| CurvePoint {
        theta,
        delta_e,
        sem: None,
    })
    .collect();
    let fit = fit_delta_curve(&points).unwrap();
    outcome(
        !fit.weighted && fit.r_squared >= 0.999 && (0.85..=0.95).contains(&fit.a),
        format!(
            "a = {:.4}, b = {:.4}, R² = {:.5}",
            fit.a, fit.b, fit.r_squared
        ),
    )
}

/// Miller–Madow reduces the small-sample entropy bias on uniform-8.
fn miller_madow_bias() -> Outcome {
    let start = Instant::now();
    let order: Vec<String> = ["x0", "x1", "x2"].iter().map(|s| s.to_string()).collect();
    let (mut plug, mut mm) = (0.0, 0.0);
    let trials = 1000;
    for t in 0..trials {
        let mut r = rng::stream(7, t);
        let mut hist = [0u64; 8];
        for _ in 0..768 {
            hist[r.random_range(0..8)] += 1;
        }
        let e = miller_madow_entropy(&CountsTable::from_histogram(order.clone(), &hist).unwrap());
        plug += (e.plugin_bits - 3.0).abs();
        mm += (e.miller_madow_bits - 3.0).abs();
    }
    plug /= trials as f64;
    mm /= trials as f64;
    let elapsed = start.elapsed();
    outcome(
        mm < plug && plug < 0.05 && mm < 0.05 && elapsed < Duration::from_secs(10),
        format!("mean |H − 3|: plug-in {plug:.5}, Miller–Madow {mm:.5}, {elapsed:.2?}"),
    )
}

/// Eraser: exact complementarity and conditional recovery; the 384-shot
/// bound under a hardware-like profile.
fn eraser_complementarity() -> Outcome {
    let plan = A62Plan::default();
    let exact = analyze_eraser(
        &run_a62(&plan, &NoiseModel::noiseless(), 4, RunMode::Exact).unwrap(),
        1e-9,
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    let mut worst_cond: f64 = 0.0;
    for r in &exact.records {
        let (v, d) = (r.v_uncond.unwrap(), r.d.unwrap());
        worst = worst
            .max((v - (r.lambda / 2.0).cos().abs()).abs())
            .max((d - (r.lambda / 2.0).sin().abs()).abs())
            .max((v * v + d * d - 1.0).abs());
        worst_cond =
            worst_cond.max((r.v_cond_by_outcome.as_ref().unwrap().weighted_mean - 1.0).abs());
    }
    let sampled = analyze_eraser(
        &run_a62(&plan, &NoiseModel::hardware_like(), 4, RunMode::Sampled).unwrap(),
        0.02,
    )
    .unwrap();
    let max_sum = sampled
        .records
        .iter()
        .map(|r| r.v2_plus_d2.unwrap())
        .fold(0.0, f64::max);
    // reported only: without device noise the upward bias and spread of
    // finite-shot V and D (≈0.05 in V² + D²) exceed the 0.02 tolerance
    let noiseless = analyze_eraser(
        &run_a62(&plan, &NoiseModel::noiseless(), 4, RunMode::Sampled).unwrap(),
        0.02,
    )
    .unwrap();
    let noiseless_ok = noiseless
        .records
        .iter()
        .filter(|r| r.bound_ok == Some(true))
        .count();
    outcome(
        exact.records.len() == 9 && worst < 1e-9 && worst_cond < 1e-9 && sampled.all_bounds_ok,
        format!(
            "exact: max deviation {worst:.1e}, conditional V off by {worst_cond:.1e}; {} shots (hardware-like noise): max V²+D² = {max_sum:.4} (noiseless, for reference: {noiseless_ok}/{} λ within tol)",
            plan.shots,
            noiseless.records.len()
        ),
    )
}

/// Screens, information and permutation inference at θ = π/2 under 1%
/// readout noise, with the full pipeline inside the time budget.
fn screened_pipeline() -> Outcome {
    let start = Instant::now();
    let plan = A6Plan {
        noise_table: NoiseTable::uniform(
            "readout1",
            NoiseModel::readout_only(Confusion::symmetric(0.01)),
        ),
        ..A6Plan::default()
    };
    assert_eq!((plan.lanes, plan.shots), (8, 768));
    let run = run_a6(&plan, 9, RunMode::Sampled).unwrap();
    let a = analyze_a6(&run, &AnalysisOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let dc = a.dc_verdict.as_ref().unwrap();
    let worst_screen = dc
        .screens
        .iter()
        .map(|s| s.mi_bits.abs())
        .fold(0.0, f64::max);
    let info_ab = a.information["AB"].miller_madow_bits.unwrap();
    let p = a.permutation_witness.as_ref().unwrap().p_value;
    let p_mi = a.permutation_mi_ab.as_ref().unwrap().p_value;
    let pass = a.reference_theta == Some(FRAC_PI_2)
        && dc.screens_pass
        && worst_screen < 0.01
        && info_ab > 0.15
        && p < 0.01
        && p_mi < 0.01
        && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "max screen I = {worst_screen:.2e}, I(Y;AB) = {info_ab:.4} bits, p = {p:.4} (MI p = {p_mi:.4}), {elapsed:.2?}"
        ),
    )
}

#[test]
fn acceptance() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 9] = [
        (
            "exact interaction-on contrast equals 1 − cos θ",
            exact_active_contrast,
        ),
        ("ZZ rotation preserves ⟨X_A X_B⟩ = 1", rzz_preserves_xx),
        (
            "parity ensemble information and top atom",
            parity_ensemble_information,
        ),
        (
            "permutation p-value grid and null uniformity",
            permutation_calibration,
        ),
        ("interaction-off controls are null", passive_nulls),
        ("reference table fits a(1 − cos θ) + b", reference_table_fit),
        ("Miller–Madow beats plug-in on uniform-8", miller_madow_bias),
        (
            "eraser complementarity and recovery",
            eraser_complementarity,
        ),
        (
            "screens, information and permutation at θ = π/2",
            screened_pipeline,
        ),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        // written to the process stdout directly so the lines show up in
        // plain `cargo test` output, not only under --nocapture
        let line = format!(
            "criterion {}: {} — {name}: {}\n",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
