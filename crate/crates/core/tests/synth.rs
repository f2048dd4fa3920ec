mod common;

use changeset::lattice::Lattice;
use changeset::synth::{
    generate, make_shape, MeanModel, NoiseSpec, Norm, Radius, Scenario, ShapeSpec,
};
use changeset::{MeanGenerator, Partition, Point};

fn pure_noise(
    m: usize,
    n: usize,
    frames: usize,
    sigma2: f64,
    seed: u64,
) -> changeset::FrameSequence {
    let lat = Lattice::new(m, n).unwrap();
    let means = MeanModel::new(vec![MeanGenerator::Zero]);
    generate(
        &Partition::whole(lat),
        &means,
        &NoiseSpec::gaussian(sigma2, seed).unwrap(),
        frames,
    )
    .unwrap()
}

#[test]
fn noise_moments() {
    let sigma2 = 2.5;
    let seq = pure_noise(20, 25, 200, sigma2, 11);
    let lat = seq.lattice();
    let mut xs = Vec::new();
    for k in 1..=seq.frames() {
        for p in lat.points() {
            xs.push(seq.value(k, p.row, p.col));
        }
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // se(mean) = sigma/sqrt(n); se(var) = sigma^2 sqrt(2/(n-1))
    assert!(mean.abs() < 3.0 * (sigma2 / n).sqrt(), "mean {mean}");
    assert!(
        (var - sigma2).abs() < 3.0 * sigma2 * (2.0 / (n - 1.0)).sqrt(),
        "var {var}"
    );
    let kurt = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n / (var * var);
    // se of sample kurtosis of a normal is about sqrt(24/n)
    assert!(
        (kurt - 3.0).abs() < 3.0 * (24.0 / n).sqrt(),
        "kurtosis {kurt}"
    );
}

#[test]
fn neighbouring_draws_are_uncorrelated() {
    let seq = pure_noise(10, 11, 400, 1.0, 3);
    let lat = seq.lattice();
    let corr = |pairs: &[(f64, f64)]| {
        let n = pairs.len() as f64;
        pairs.iter().map(|(a, b)| a * b).sum::<f64>() / n
    };
    let mut across_cols = Vec::new();
    let mut across_frames = Vec::new();
    let mut across_rows = Vec::new();
    for k in 1..seq.frames() {
        for p in lat.points() {
            let x = seq.value(k, p.row, p.col);
            if p.col < lat.cols() {
                across_cols.push((x, seq.value(k, p.row, p.col + 1)));
            }
            if p.row < lat.rows() {
                across_rows.push((x, seq.value(k, p.row + 1, p.col)));
            }
            across_frames.push((x, seq.value(k + 1, p.row, p.col)));
        }
    }
    for (name, v) in [
        ("cols", across_cols),
        ("rows", across_rows),
        ("frames", across_frames),
    ] {
        let c = corr(&v);
        assert!(c.abs() < 3.0 / (v.len() as f64).sqrt(), "{name}: {c}");
    }
}

#[test]
fn generation_is_reproducible_and_frame_keyed() {
    let s = Scenario::rectangle(0);
    let a = s.generate(42, 6).unwrap();
    assert_eq!(a, s.generate(42, 6).unwrap());
    let longer = s.generate(42, 9).unwrap();
    for k in 1..=6 {
        assert_eq!(a.frame(k), longer.frame(k));
    }
    assert_ne!(a.frame(1), s.generate(43, 6).unwrap().frame(1));
}

#[test]
fn noiseless_means_follow_the_blocks() {
    let s = Scenario::diamond_and_round(0).with_noise(NoiseSpec::disabled());
    let seq = s.generate(0, 4).unwrap();
    for k in 1..=4usize {
        let alt = if k % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(seq.value(k, 1, 1), k as f64);
        assert_eq!(seq.value(k, 35, 35), k as f64 + alt);
        assert_eq!(seq.value(k, 65, 65), k as f64 - alt);
    }
}

#[test]
fn ball_sizes() {
    let lat = Lattice::new(100, 100).unwrap();
    let ball = |norm, num, den| {
        make_shape(
            &ShapeSpec {
                norm,
                radius: Radius::new(num, den).unwrap(),
                center: Point::new(50, 50),
            },
            lat,
        )
        .unwrap()
    };
    // |x|,|y| <= 33
    assert_eq!(ball(Norm::Max, 100, 3).len(), 67 * 67);
    // |x| + |y| <= 16: 2 r^2 + 2 r + 1
    assert_eq!(ball(Norm::L1, 100, 6).len(), 2 * 16 * 16 + 2 * 16 + 1);
    let brute = (-17i64..=17)
        .flat_map(|x| (-17i64..=17).map(move |y| (x, y)))
        .filter(|(x, y)| 36 * (x * x + y * y) <= 10_000)
        .count();
    assert_eq!(ball(Norm::L2, 100, 6).len(), brute);
}
