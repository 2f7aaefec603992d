use nested_adiabatic::analysis::{
    critical_exponent_log2, fit_scaling, optimal_partition, p_model, predicted_time, solve_alpha,
    solve_alpha_exact, write_model_csv, ComplexityModel,
};
use nested_adiabatic::csp::{census, generate_random_ksat, Partition};
use nested_adiabatic::Error;
use proptest::prelude::*;

fn critical(n_ab: usize, k: usize) -> ComplexityModel {
    ComplexityModel::new(2, n_ab, k, 4.25, 4.25).unwrap()
}

#[test]
fn alpha_reference_roots() {
    assert!((solve_alpha(2, 1.0) - 0.62).abs() <= 0.005);
    assert!((solve_alpha(3, 1.0) - 0.68).abs() <= 0.005);
    // k = 2 gives the golden-ratio conjugate
    assert!((solve_alpha(2, 1.0) - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-11);
    assert_eq!(solve_alpha(3, 0.0), 1.0);
}

#[test]
fn alpha_solves_its_equation() {
    for k in 1..=8 {
        for j in 0..=40 {
            let b = j as f64 * 0.1;
            let x = solve_alpha(k, b);
            assert!((0.0..=1.0).contains(&x));
            assert!((b * x.powi(k as i32) + x - 1.0).abs() < 1e-10, "k={k} b={b}");
        }
    }
}

#[test]
fn alpha_is_monotone() {
    for k in 1..=8 {
        let mut prev = f64::INFINITY;
        for j in 0..=40 {
            let x = solve_alpha(k, j as f64 * 0.1);
            assert!(x <= prev);
            prev = x;
        }
    }
    for j in 0..=40 {
        let b = j as f64 * 0.1;
        let mut prev = 0.0;
        for k in 1..=12 {
            let x = solve_alpha(k, b);
            assert!(x >= prev);
            prev = x;
        }
    }
    // the trend towards 1 as k grows at the critical ratio
    assert!(solve_alpha(40, 1.0) > 0.9);
}

#[test]
fn nested_exponent_beats_the_classical_one() {
    let c = critical_exponent_log2(2, 3);
    assert!((c - 0.34).abs() <= 0.005, "{c}");
    assert!(c < 0.45);
}

#[test]
fn predicted_time_grows_with_the_critical_exponent() {
    let pts: Vec<(f64, f64)> = (20..=60)
        .step_by(5)
        .map(|n| {
            let m = critical(n, 3);
            (n as f64, predicted_time(&m, m.alpha()).log2())
        })
        .collect();
    // T(alpha) = 2 a^alpha exactly at the critical ratio
    for &(n, lt) in &pts {
        assert!((lt - (1.0 + 0.5 * solve_alpha(3, 1.0) * n)).abs() < 1e-9);
    }
    let slope = (pts.last().unwrap().1 - pts[0].1) / (pts.last().unwrap().0 - pts[0].0);
    assert!((slope - 0.34).abs() <= 0.005);
}

#[test]
fn full_partition_is_unstructured_search() {
    for beta in [0.0, 2.0, 4.25] {
        let m = ComplexityModel::new(2, 16, 3, beta, 4.25).unwrap();
        let b = m.beta_ratio();
        let expect = m.a().powf(b) + 1.0;
        assert!((predicted_time(&m, 1.0) / expect - 1.0).abs() < 1e-12);
    }
    // at the critical ratio this is a + 1, i.e. sqrt(d^n_ab) to leading order
    let m = critical(16, 3);
    assert!((predicted_time(&m, 1.0) - 257.0).abs() < 1e-9);
}

#[test]
fn alpha_is_near_optimal_for_large_registers() {
    for k in [2, 3] {
        for n in [40, 80, 200] {
            let m = critical(n, k);
            let grid_min = (0..=1000)
                .map(|j| m.ln_predicted_time(j as f64 / 1000.0))
                .fold(f64::INFINITY, f64::min);
            // alpha solves the reduced equation, so it is optimal only up to O(1) factors
            assert!(
                m.ln_predicted_time(m.alpha()) - grid_min <= 0.05_f64.ln_1p(),
                "k={k} n={n}"
            );
        }
        // the exact minimizer approaches alpha as a grows
        let gap = |n| (solve_alpha_exact(&critical(n, k)) - solve_alpha(k, 1.0)).abs();
        assert!(gap(4000) < 1e-3);
        assert!(gap(4000) < gap(400) && gap(400) < gap(40));
    }
}

#[test]
fn grid_search_agrees_with_alpha_at_scale() {
    let m = critical(4000, 3);
    let (best, _) = (0..=1000)
        .map(|j| (j as f64 / 1000.0, m.ln_predicted_time(j as f64 / 1000.0)))
        .fold((0.0, f64::INFINITY), |b, p| if p.1 < b.1 { p } else { b });
    assert!((best - m.alpha()).abs() <= 1e-3);
}

#[test]
fn optimal_partition_examples() {
    assert_eq!(optimal_partition(12, 3, 1.0).unwrap(), 8);
    assert_eq!(optimal_partition(12, 3, 0.0).unwrap(), 11);
    assert_eq!(optimal_partition(2, 3, 1.0).unwrap(), 1);
    assert_eq!(optimal_partition(2, 1, 100.0).unwrap(), 1);
    assert!(matches!(optimal_partition(1, 3, 1.0), Err(Error::Input(_))));
}

#[test]
fn p_model_edges() {
    let m = ComplexityModel::new(2, 10, 3, 3.0, 4.25).unwrap();
    assert_eq!(p_model(0, &m), 1.0);
    let free = ComplexityModel::new(2, 10, 3, 0.0, 4.25).unwrap();
    assert!((0..=10).all(|n| p_model(n, &free) == 1.0));
    assert!((p_model(10, &m) - 2f64.powf(-10.0 * 3.0 / 4.25)).abs() < 1e-15);
}

#[test]
fn p_model_tracks_random_ensembles() {
    let (n_ab, clauses) = (10usize, 30usize);
    let model = ComplexityModel::new(2, n_ab, 3, clauses as f64 / n_ab as f64, 4.25).unwrap();
    let instances: Vec<_> = (0..200u64)
        .map(|s| generate_random_ksat(n_ab, clauses, 3, 9000 + s).unwrap())
        .collect();
    for n_a in 4..=10 {
        let mean = instances
            .iter()
            .map(|inst| {
                let m_a = if n_a == n_ab {
                    census(inst, Partition::new(n_ab - 1, 1).unwrap()).unwrap().m_ab
                } else {
                    census(inst, Partition::new(n_a, n_ab - n_a).unwrap())
                        .unwrap()
                        .m_a
                };
                m_a as f64 / (1usize << n_a) as f64
            })
            .sum::<f64>()
            / instances.len() as f64;
        let ratio = mean / p_model(n_a, &model);
        assert!(
            (1.0 / 3.0..=3.0).contains(&ratio),
            "n_a={n_a}: empirical {mean} model ratio {ratio}"
        );
    }
}

#[test]
fn exact_root_is_reported_alongside_reduced_one() {
    let m = critical(12, 3);
    let exact = solve_alpha_exact(&m);
    assert!((0.0..=1.0).contains(&exact));
    // at desk scale the reduction is visibly off but within a few hundredths
    assert!((exact - m.alpha()).abs() < 0.1);
    let grid_min = (0..=4096)
        .map(|j| m.ln_predicted_time(j as f64 / 4096.0))
        .fold(f64::INFINITY, f64::min);
    assert!(m.ln_predicted_time(exact) <= grid_min + 1e-12);
}

#[test]
fn fit_scaling_examples() {
    let pts: Vec<(f64, f64)> = (1..=8).map(|j| (2f64.powi(j), 2f64.powi(j).sqrt())).collect();
    let fit = fit_scaling(&pts).unwrap();
    assert!((fit.exponent - 0.5).abs() < 1e-12);
    assert!(fit.residual < 1e-12);
    assert!(matches!(fit_scaling(&pts[..3]), Err(Error::Input(_))));
    let mut bad = pts.clone();
    bad.swap(1, 2);
    assert!(fit_scaling(&bad).is_err());
    bad = pts.clone();
    bad[0].1 = 0.0;
    assert!(fit_scaling(&bad).is_err());
}

#[test]
fn model_csv_has_one_row_per_point() {
    let mut out = Vec::new();
    write_model_csv(&critical(20, 3), 11, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,predicted_time,log2_time");
    assert_eq!(lines.len(), 12);
    assert!(lines[1].starts_with("0,"));
    assert!(lines[11].starts_with("1,"));
}

#[test]
fn model_rejects_bad_parameters() {
    assert!(ComplexityModel::new(2, 10, 3, -1.0, 4.25).is_err());
    assert!(ComplexityModel::new(2, 10, 3, 1.0, 0.0).is_err());
}

proptest! {
    #[test]
    fn fit_recovers_power_laws(e in -2.0f64..2.0, c in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = (1..=6).map(|j| (j as f64 * 3.0, c * (j as f64 * 3.0).powf(e))).collect();
        prop_assert!((fit_scaling(&pts).unwrap().exponent - e).abs() < 1e-9);
    }
}
