mod common;

use changeset::connect::{
    estimate_detailed, validate_theorem_conditions, Mode, CLAUSE_CHORD_LENGTH,
};
use changeset::experiment::{run_cell, run_table, run_trial, trial_seed, ExperimentGrid};
use changeset::lattice::{Lattice, PointSet};
use changeset::scan::{scan, select_relevant, OverlapRule};
use changeset::slicing::{FrameSequence, Orientation};
use changeset::synth::{make_shape, NoiseSpec, Norm, Radius, Scenario, ShapeSpec};
use changeset::{MeanGenerator, Point};
use common::gamma;
use proptest::prelude::*;

fn rule(n: usize, q: usize) -> OverlapRule {
    OverlapRule::new(n, q).unwrap()
}

fn coarse_sequence() -> impl Strategy<Value = FrameSequence> {
    (6usize..10, 6usize..12, 1usize..4).prop_flat_map(|(m, n, d)| {
        prop::collection::vec(prop::collection::vec(0u8..3, m * n), d).prop_map(move |frames| {
            let frames: Vec<Vec<f64>> = frames
                .iter()
                .map(|f| f.iter().map(|&v| v as f64).collect())
                .collect();
            FrameSequence::from_frames(Lattice::new(m, n).unwrap(), &frames).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn longer_runs_select_fewer_points(seq in coarse_sequence(), g in 0.0..0.45f64) {
        for o in [Orientation::Horizontal, Orientation::Vertical] {
            let field = scan(&seq, o, 4, gamma(g)).unwrap();
            let q1 = select_relevant(&field, rule(4, 1)).unwrap();
            let q2 = select_relevant(&field, rule(4, 2)).unwrap();
            let bound = field.offsets() / 2;
            for (s, (a, b)) in q1.iter().zip(&q2).enumerate() {
                prop_assert!(b.is_subset(a));
                // distinct relevant points come from disjoint runs of Q+1 offsets
                prop_assert!(a.len() <= bound);
                for p in a {
                    let on = if o == Orientation::Horizontal { p.row } else { p.col };
                    prop_assert_eq!(on, s + 1);
                }
            }
        }
    }

    #[test]
    fn estimate_lies_between_relevant_points(seq in coarse_sequence()) {
        let est = estimate_detailed(&seq, Mode::Horizontal, rule(4, 1), gamma(0.0)).unwrap();
        for (i, h) in est.horizontal.iter().enumerate() {
            let cols: Vec<usize> = h.iter().map(|p| p.col).collect();
            let row: Vec<usize> = est.set.row(i + 1).map(|p| p.col).collect();
            if cols.len() < 2 {
                prop_assert!(row.is_empty());
            } else {
                let want: Vec<usize> = (cols[0] + 1..=*cols.last().unwrap()).collect();
                prop_assert_eq!(row, want);
            }
        }
    }
}

#[test]
fn noiseless_rectangle_is_recovered() {
    let s = Scenario::rectangle(0).with_noise(NoiseSpec::disabled());
    let data = s.generate(0, 20).unwrap();
    let truth = s.truth().unwrap();
    for (mode, r) in [
        (Mode::Horizontal, rule(6, 2)),
        (Mode::Vertical, rule(6, 4)),
        (Mode::Both, rule(4, 1)),
    ] {
        let est = estimate_detailed(&data, mode, r, gamma(0.3)).unwrap();
        assert_eq!(est.set, truth, "{mode} {r}");
    }
}

#[test]
fn pure_noise_gives_nothing() {
    let mut s = Scenario::rectangle(0);
    s.lattice = Lattice::new(40, 40).unwrap();
    s.shapes.clear();
    s.noise = NoiseSpec::gaussian(1.0, 0).unwrap();
    for t in 0..5 {
        let data = s.generate(trial_seed(5, t), 2000).unwrap();
        let est = estimate_detailed(&data, Mode::Both, rule(6, 2), gamma(0.0)).unwrap();
        assert!(
            est.relevant.is_empty(),
            "trial {t}: {} relevant points",
            est.relevant.len()
        );
        assert!(est.set.is_empty());
    }
}

#[test]
fn small_noise_is_nearly_recovered() {
    // boundary windows are reliable at this noise level; what remains is
    // the occasional spurious run among windows without a change
    let s = Scenario::rectangle(1000).with_noise(NoiseSpec::gaussian(0.1, 0).unwrap());
    let mut total = 0.0;
    for t in 0..3 {
        let out = run_trial(
            &s,
            Mode::Horizontal,
            rule(6, 2),
            gamma(0.0),
            trial_seed(1, t),
        )
        .unwrap();
        total += out.jaccard;
    }
    assert!(total / 3.0 < 0.005, "mean distance {}", total / 3.0);
}

fn ball(norm: Norm, num: u64, den: u64, center: (usize, usize)) -> PointSet {
    let spec = ShapeSpec {
        norm,
        radius: Radius::new(num, den).unwrap(),
        center: Point::new(center.0, center.1),
    };
    make_shape(&spec, Lattice::new(100, 100).unwrap()).unwrap()
}

#[test]
fn validator_on_reference_shapes() {
    let lat = Lattice::new(100, 100).unwrap();
    let rect = ball(Norm::Max, 100, 3, (50, 50));
    for mode in [Mode::Horizontal, Mode::Vertical, Mode::Both] {
        let report = validate_theorem_conditions(&rect, lat, 6, mode);
        assert!(report.passed(), "{mode}\n{report}");
    }

    // the diamond's tips are single nodes: too short for one direction alone
    let diamond = ball(Norm::L1, 100, 6, (50, 50));
    let h = validate_theorem_conditions(&diamond, lat, 6, Mode::Horizontal);
    assert!(!h.passed());
    assert!(!h.clause(CLAUSE_CHORD_LENGTH).unwrap().passed);
    let both = validate_theorem_conditions(&diamond, lat, 6, Mode::Both);
    assert!(both.clause(CLAUSE_CHORD_LENGTH).unwrap().passed, "{both}");
    assert!(both.passed(), "{both}");

    // too close to the frame
    let edge = ball(Norm::Max, 10, 1, (12, 50));
    assert!(!validate_theorem_conditions(&edge, lat, 6, Mode::Both).passed());
    // two pieces
    let mut two = ball(Norm::Max, 5, 1, (30, 30));
    two.union_with(&ball(Norm::Max, 5, 1, (60, 60))).unwrap();
    assert!(!validate_theorem_conditions(&two, lat, 6, Mode::Both).passed());
    assert!(!validate_theorem_conditions(&PointSet::empty(lat), lat, 6, Mode::Both).passed());
}

fn small_scenario() -> Scenario {
    let mut s = Scenario::rectangle(0);
    s.lattice = Lattice::new(24, 24).unwrap();
    s.shapes[0].shape = ShapeSpec {
        norm: Norm::Max,
        radius: Radius::new(6, 1).unwrap(),
        center: Point::new(12, 12),
    };
    s.background = MeanGenerator::Drift;
    s
}

#[test]
fn cells_match_the_table() {
    let s = small_scenario();
    let grid = ExperimentGrid {
        d_values: vec![40, 80],
        rules: vec![rule(4, 1), rule(6, 2)],
        gammas: vec![gamma(0.0), gamma(0.3)],
        modes: vec![Mode::Horizontal, Mode::Both],
        reps: 6,
        base_seed: 99,
    };
    let mut csv = Vec::new();
    let records = run_table(&grid, &s, &mut csv).unwrap();
    assert_eq!(records.len(), 16);
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 17);
    for r in &records {
        let cell = run_cell(&s, r.mode, r.rule, r.gamma, r.d, grid.reps, grid.base_seed).unwrap();
        assert_eq!(cell, r.result, "{} {} {} {}", r.rule, r.gamma, r.d, r.mode);
        assert!(text.contains(&r.csv_row()));
    }
}

#[test]
fn golden_trial() {
    // frozen output of the full generate/scan/connect/score chain
    let s = Scenario::rectangle(100);
    let out = run_trial(
        &s,
        Mode::Horizontal,
        rule(6, 2),
        gamma(0.0),
        trial_seed(2024, 0),
    )
    .unwrap();
    assert_eq!(format!("{:.12}", out.jaccard), "0.402595529921");
}
