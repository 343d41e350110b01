//! Information measures on exact and sampled data.

use rand::Rng;

use ctxkernel::harness::ContextEnsemble;
use ctxkernel::infostats::{
    bootstrap_ci, mobius_atoms, mobius_triplet_atom, plugin_mutual_information, RecordSet,
    RecordStatistic, ShotRecord,
};
use ctxkernel::rng;
use ctxkernel::simcore::ProbabilityTable;

const ORDER: [&str; 4] = ["Y", "C0", "C1", "C2"];

fn random_joint(seed: u64) -> ProbabilityTable {
    let mut r = rng::stream(seed, 0);
    // sparse-ish random weights so some outcomes are impossible
    let w: Vec<f64> = (0..16)
        .map(|_| {
            if r.random::<f64>() < 0.2 {
                0.0
            } else {
                r.random::<f64>()
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    ProbabilityTable::from_vector(
        ORDER.iter().map(|s| s.to_string()).collect(),
        &w.iter().map(|x| x / total).collect::<Vec<_>>(),
    )
    .unwrap()
}

#[test]
fn top_atom_forms_agree_on_random_joints() {
    for seed in 0..100 {
        let joint = random_joint(seed);
        let atoms = mobius_triplet_atom(&joint, "Y", ["C0", "C1", "C2"]).unwrap();
        assert!(
            (atoms.top_atom() - atoms.top_atom_entropy_form).abs() < 1e-12,
            "seed {seed}: {} vs {}",
            atoms.top_atom(),
            atoms.top_atom_entropy_form
        );
    }
}

#[test]
fn atoms_are_complete() {
    for seed in 100..150 {
        let joint = random_joint(seed);
        let atoms = mobius_atoms(&joint, "Y", &["C0", "C1", "C2"]).unwrap();
        let total: f64 = atoms.subset_values.values().sum();
        let full = plugin_mutual_information(&joint, &["Y"], &["C0", "C1", "C2"])
            .unwrap()
            .raw_bits;
        assert!((total - full).abs() < 1e-12, "seed {seed}");
        let by_order: f64 = (1..=3).map(|k| atoms.order_total(k)).sum();
        assert!((by_order - full).abs() < 1e-12);
        let normalized: f64 = atoms.normalized_positive.values().sum();
        assert!(normalized == 0.0 || (normalized - 1.0).abs() < 1e-12);
    }
}

#[test]
fn redundant_copies_of_the_label() {
    // C0 = C1 = C2 = Y: every non-empty subset carries the full bit
    let joint = ProbabilityTable::new(
        ORDER,
        [("0000".to_string(), 0.5), ("1111".to_string(), 0.5)].into(),
    )
    .unwrap();
    let atoms = mobius_triplet_atom(&joint, "Y", ["C0", "C1", "C2"]).unwrap();
    for s in [&["C0"][..], &["C1"], &["C2"]] {
        assert!((atoms.atom(s).unwrap() - 1.0).abs() < 1e-12);
    }
    for s in [&["C0", "C1"][..], &["C0", "C2"], &["C1", "C2"]] {
        assert!((atoms.atom(s).unwrap() + 1.0).abs() < 1e-12);
    }
    assert!((atoms.top_atom() - 1.0).abs() < 1e-12);
    assert!((atoms.top_atom_entropy_form - 1.0).abs() < 1e-12);
    assert!((atoms.normalized_top() - 0.25).abs() < 1e-12);
}

#[test]
fn parity_ensemble_is_purely_synergistic() {
    let atoms = mobius_triplet_atom(
        &ContextEnsemble::parity().joint_distribution(),
        "Y",
        ["C0", "C1", "C2"],
    )
    .unwrap();
    assert!((atoms.order_total(1)).abs() < 1e-12);
    assert!((atoms.order_total(2)).abs() < 1e-12);
    assert!((atoms.normalized_top() - 1.0).abs() < 1e-12);
    // uniform context: the conditional-only form coincides
    assert!((atoms.top_atom_conditional_form - 1.0).abs() < 1e-12);
}

#[test]
fn bootstrap_interval_covers_true_information() {
    // Y uniform, X = Y flipped with probability 0.2
    let flip = 0.2f64;
    let h = -(flip * flip.log2() + (1.0 - flip) * (1.0 - flip).log2());
    let truth = 1.0 - h;
    let stat = RecordStatistic::MutualInformation {
        vars: vec!["X".into()],
        corrected: true,
    };
    let reps = 200;
    let mut covered = 0;
    for rep in 0..reps {
        let mut r = rng::stream(42, rep);
        let mut set = RecordSet::new(vec!["X".into()]);
        set.circuits.push("c".into());
        for _ in 0..2000 {
            let y = r.random_range(0..2u8);
            let x = if r.random::<f64>() < flip { 1 - y } else { y };
            set.records.push(ShotRecord {
                lane: 0,
                circuit: 0,
                label: y,
                outcome: u32::from(x),
            });
        }
        let f = stat.bind(&set).unwrap();
        let (lo, hi) =
            bootstrap_ci(&set.records, ShotRecord::lane_circuit, f, 200, 0.95, rep).unwrap();
        if lo <= truth && truth <= hi {
            covered += 1;
        }
    }
    assert!(
        covered as f64 >= 0.9 * reps as f64,
        "coverage {covered}/{reps}"
    );
}
