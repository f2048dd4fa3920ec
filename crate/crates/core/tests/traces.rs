mod common;

use changeset::connect::{estimate_detailed, estimate_from_fields, Mode};
use changeset::lattice::Point;
use changeset::scan::{scan, select_relevant, Critical, OverlapRule, ScanField};
use changeset::slicing::Orientation;
use changeset::synth::NoiseSpec;
use common::{fragment, gamma, points, two_block_data};

fn rule(n: usize, q: usize) -> OverlapRule {
    OverlapRule::new(n, q).unwrap()
}

fn cols(field: &ScanField, slice: usize) -> Vec<Option<usize>> {
    field
        .slice(slice)
        .iter()
        .map(|c| c.point().map(|p| p.col))
        .collect()
}

#[test]
fn row_ten_with_window_six() {
    let truth = fragment();
    let field = ScanField::limiting(&truth, Orientation::Horizontal, 6).unwrap();
    let mut want = vec![Some(5); 5];
    want.extend([8, 9, 10, 11, 12].map(Some));
    want.extend([Some(15); 5]);
    want.extend([None; 5]);
    assert_eq!(cols(&field, 10), want);

    let h = select_relevant(&field, rule(6, 4)).unwrap();
    assert_eq!(h[9], points(truth.lattice(), &[(10, 5), (10, 15)]));
    // Q is at most N - 2
    assert!(OverlapRule::new(6, 5).is_err());
}

#[test]
fn row_ten_with_window_four() {
    let truth = fragment();
    let field = ScanField::limiting(&truth, Orientation::Horizontal, 4).unwrap();
    let mut want = vec![Some(2), Some(3)];
    want.extend([Some(5); 3]);
    want.extend((7..=13).map(Some));
    want.extend([Some(15); 3]);
    want.extend([Some(17), Some(18)]);
    want.extend([None; 3]);
    assert_eq!(cols(&field, 10), want);

    let h = select_relevant(&field, rule(4, 2)).unwrap();
    assert_eq!(h[9], points(truth.lattice(), &[(10, 5), (10, 15)]));
    // Q = 1 also picks up every repeated pair, which are the same two points here
    let h1 = select_relevant(&field, rule(4, 1)).unwrap();
    assert_eq!(h1[9], h[9]);
}

#[test]
fn limiting_fields_reconstruct_the_fragment() {
    let truth = fragment();
    let lat = truth.lattice();
    // column chords of length 3 limit vertical scans to N = 4, and rows 7..=9
    // start four columns in, which leaves room for runs of at most four
    for (n, q) in [(4, 1), (4, 2), (6, 2)] {
        let h = ScanField::limiting(&truth, Orientation::Horizontal, n).unwrap();
        let est = estimate_from_fields(lat, Some(&h), None, Mode::Horizontal, rule(n, q)).unwrap();
        assert_eq!(est.set, truth, "({n},{q}) h");
    }
    let h = ScanField::limiting(&truth, Orientation::Horizontal, 4).unwrap();
    let v = ScanField::limiting(&truth, Orientation::Vertical, 4).unwrap();
    for mode in [Mode::Vertical, Mode::Both] {
        let est = estimate_from_fields(lat, Some(&h), Some(&v), mode, rule(4, 2)).unwrap();
        assert_eq!(est.set, truth, "{mode}");
    }
    assert!(ScanField::limiting(&truth, Orientation::Vertical, 6).is_err());
    let h = ScanField::limiting(&truth, Orientation::Horizontal, 6).unwrap();
    let est = estimate_from_fields(lat, Some(&h), None, Mode::Horizontal, rule(6, 4)).unwrap();
    let short: Vec<usize> = (7..=9).collect();
    for i in 1..=lat.rows() {
        let got = est.set.row(i).count();
        let want = truth.row(i).count();
        if short.contains(&i) {
            assert_eq!(got, 0, "row {i}");
        } else {
            assert_eq!(got, want, "row {i}");
        }
    }
}

#[test]
fn relevant_points_sit_just_outside_on_the_left() {
    let truth = fragment();
    let lat = truth.lattice();
    let h = ScanField::limiting(&truth, Orientation::Horizontal, 6).unwrap();
    let sets = select_relevant(&h, rule(6, 2)).unwrap();
    for i in 1..=lat.rows() {
        let row: Vec<Point> = truth.row(i).collect();
        let got: Vec<Point> = sets[i - 1].iter().collect();
        if row.is_empty() {
            assert!(got.is_empty(), "row {i}");
        } else {
            let first = row[0].col;
            let last = row[row.len() - 1].col;
            assert_eq!(
                got,
                vec![Point::new(i, first - 1), Point::new(i, last)],
                "row {i}"
            );
        }
    }
}

#[test]
fn noiseless_scan_marks_flat_windows_degenerate() {
    let truth = fragment();
    let seq = two_block_data(&truth, NoiseSpec::disabled(), 40);
    let field = scan(&seq, Orientation::Horizontal, 6, gamma(0.0)).unwrap();
    let row = field.slice(10);
    for r in 1..=5 {
        assert_eq!(row[r - 1], Critical::Point(Point::new(10, 5)));
    }
    for r in 6..=10 {
        assert!(matches!(row[r - 1], Critical::Degenerate(_)), "offset {r}");
    }
    for r in 11..=15 {
        assert_eq!(row[r - 1], Critical::Point(Point::new(10, 15)));
    }
    assert!(row[15..].iter().all(|c| *c == Critical::Sentinel));
    let est = estimate_detailed(&seq, Mode::Horizontal, rule(6, 2), gamma(0.0)).unwrap();
    assert_eq!(est.set, truth);
    let est = estimate_detailed(&seq, Mode::Both, rule(4, 2), gamma(0.0)).unwrap();
    assert_eq!(est.set, truth);
}

#[test]
fn noisy_scan_converges_to_the_limit() {
    let truth = fragment();
    let seq = two_block_data(&truth, NoiseSpec::gaussian(0.1, 17).unwrap(), 5000);
    for (o, n) in [(Orientation::Horizontal, 6), (Orientation::Vertical, 4)] {
        let field = scan(&seq, o, n, gamma(0.0)).unwrap();
        let limit = ScanField::limiting(&truth, o, n).unwrap();
        let mut agree = 0;
        let mut total = 0;
        for s in 1..=field.slices() {
            for r in 1..=field.offsets() {
                total += 1;
                agree += usize::from(field.entry(s, r) == limit.entry(s, r));
            }
        }
        assert!(agree as f64 >= 0.9 * total as f64, "{o}: {agree}/{total}");
    }
    let est = estimate_detailed(&seq, Mode::Horizontal, rule(6, 2), gamma(0.0)).unwrap();
    assert_eq!(est.set, truth);
    let est = estimate_detailed(&seq, Mode::Both, rule(4, 2), gamma(0.0)).unwrap();
    assert_eq!(est.set, truth);
}
