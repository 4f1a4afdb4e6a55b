use wallsim::asymptotic::{
    a_quadratic_coefficient, symmetric_pearcey, PearceyParams, PearceyQuadrature,
};
use wallsim::kernel::{correlation, kernel_k, KernelMethod, KernelPoint, QuadratureSpec};

// reflected walk row R^n(0, ·) by dense matrix power on [0, 80)
fn walk_row(q: f64, n: usize) -> Vec<f64> {
    let size = 80;
    let r = |x: usize, y: usize| {
        let v = (1.0 - q) / (1.0 + q) * (q.powi(x.abs_diff(y) as i32) + q.powi((x + y) as i32));
        if y == 0 {
            v / 2.0
        } else {
            v
        }
    };
    let mut row = vec![0.0; size];
    row[0] = 1.0;
    for _ in 0..n {
        row = (0..size)
            .map(|y| (0..size).map(|x| row[x] * r(x, y)).sum())
            .collect();
    }
    row
}

#[test]
fn level_one_diagonal_is_walk_law() {
    // q = 1/3 means alpha = 1
    let q = 1.0 / 3.0;
    let quad = QuadratureSpec::default();
    for n in [1usize, 3, 5] {
        let row = walk_row(q, n);
        for s in 0..8 {
            let p = KernelPoint::at_level(1, s).unwrap();
            let v = kernel_k(&p, &p, n as u32, 1.0, &quad).unwrap();
            assert!((v.value - row[s as usize]).abs() < 1e-9, "n={n} s={s}");
            assert!(v.is_accurate());
        }
    }
}

#[test]
fn contour_and_residue_routes_agree() {
    let contour = QuadratureSpec::default();
    let residue = QuadratureSpec {
        method: KernelMethod::Residue,
        ..contour
    };
    for (k1, s1, k2, s2) in [(2, 0, 2, 1), (3, 1, 3, 2), (3, 0, 4, 2), (5, 2, 4, 1)] {
        let p1 = KernelPoint::at_level(k1, s1).unwrap();
        let p2 = KernelPoint::at_level(k2, s2).unwrap();
        let a = kernel_k(&p1, &p2, 4, 0.7, &contour).unwrap().value;
        let b = kernel_k(&p1, &p2, 4, 0.7, &residue).unwrap().value;
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn correlation_of_packed_level_is_one() {
    // at n = 0 level 4 occupies shifted sites {0, 1}
    let pts = [
        KernelPoint::at_level(4, 0).unwrap(),
        KernelPoint::at_level(4, 1).unwrap(),
    ];
    let v = correlation(&pts, 0, 1.0, &QuadratureSpec::default()).unwrap();
    assert!((v - 1.0).abs() < 1e-9, "{v}");
}

#[test]
fn pearcey_origin_value() {
    let v = symmetric_pearcey(
        &PearceyParams::new(0.0, 0.0, 0.0, 0.0),
        &PearceyQuadrature::default(),
    )
    .unwrap();
    assert!((v - 0.22006905899983).abs() < 1e-9, "{v}");
    assert!((a_quadratic_coefficient(1.0) + 3.0 / 128.0).abs() < 1e-15);
}
