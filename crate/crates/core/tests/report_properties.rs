use std::path::PathBuf;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmlab::harness::plot::render_svg;
use qmlab::harness::{csv_string, fit_rate, ExperimentId, Report};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_power_laws_are_recovered(rate in -3.0..3.0f64, scale in 0.01..100.0f64) {
        let pairs: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0].iter().map(|&k: &f64| (k, scale * k.powf(rate))).collect();
        let fit = fit_rate(&pairs).unwrap();
        prop_assert!((fit.slope - rate).abs() <= 1e-10);
        prop_assert!((fit.intercept - scale.ln()).abs() <= 1e-9);
        prop_assert!(fit.r2 >= 1.0 - 1e-12 || rate.abs() < 1e-6);
    }

    #[test]
    fn noisy_power_laws_stay_close(seed in any::<u64>(), rate in -2.0..0.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0, 64.0]
            .iter()
            .map(|&k: &f64| (k, k.powf(rate) * (1.0 + rng.gen_range(-0.05..0.05))))
            .collect();
        let fit = fit_rate(&pairs).unwrap();
        prop_assert!((fit.slope - rate).abs() <= 0.1, "slope {} vs {rate}", fit.slope);
    }

    #[test]
    fn row_order_ignores_insertion_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cells: Vec<(f64, f64, f64)> = Vec::new();
        for (i, k) in [1.0, 2.0, 4.0].into_iter().enumerate() {
            for (j, t) in [0.25, 0.5].into_iter().enumerate() {
                cells.push((k, t, (i * 2 + j) as f64));
            }
        }
        let build = |cells: &[(f64, f64, f64)]| {
            let mut r = Report::new(ExperimentId::WeakConvergence, 1, Some(64), Some(2));
            for &(k, t, v) in cells {
                r.push(Some(k), Some(t), "weak_error", v, "").unwrap();
            }
            csv_string(&r.sorted_rows()).unwrap()
        };
        let reference = build(&cells);
        for i in (1..cells.len()).rev() {
            cells.swap(i, rng.gen_range(0..=i));
        }
        prop_assert_eq!(build(&cells), reference);
    }
}

#[test]
fn too_few_points_cannot_be_fitted() {
    assert!(fit_rate(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
    assert!(fit_rate(&[(1.0, 1.0), (2.0, 0.5), (4.0, 0.0)]).is_err());
}

#[test]
fn svg_matches_the_golden_file() {
    let graph: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0].iter().map(|&k: &f64| (k, 3.0 / k)).collect();
    let control: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0].iter().map(|&k: &f64| (k, 0.8 * k.sqrt())).collect();
    let fits = vec![
        ("graph".to_string(), fit_rate(&graph).unwrap()),
        ("control".to_string(), fit_rate(&control).unwrap()),
    ];
    let svg = render_svg("graph-rate", &fits);
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/graph_rate.svg");
    if std::env::var_os("QMLAB_BLESS").is_some() {
        std::fs::write(&golden, &svg).unwrap();
    }
    let expected = std::fs::read_to_string(&golden).expect("golden file present");
    assert_eq!(svg, expected);
    assert!(svg.contains("graph: slope -1.000"));
    assert!(svg.contains("control: slope 0.500"));
}
