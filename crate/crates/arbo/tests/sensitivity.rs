use arbo::model::{ModelParams, PARAM_NAMES};
use arbo::sensitivity::{
    average_ranks, evaluate_samples, histogram, lhs_sample, prcc_columns, r0_distribution, sensitivity_analysis,
    ParamDistribution,
};
use arbo::ArboError;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn standardized(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
    v.iter().map(|x| (x - m) / s).collect()
}

fn ols_residual(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let x = DMatrix::from_fn(n, cols.len() + 1, |i, j| if j == 0 { 1.0 } else { cols[j - 1][i] });
    let y = DVector::from_column_slice(y);
    let beta = (x.transpose() * &x).try_inverse().unwrap() * x.transpose() * &y;
    (y - x * beta).iter().copied().collect()
}

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
    dot(a, b) / (dot(a, a) * dot(b, b)).sqrt()
}

fn serial_prcc(columns: &[(String, Vec<f64>)], output: &[f64]) -> Vec<f64> {
    let ranked: Vec<Vec<f64>> = columns.iter().map(|(_, c)| standardized(&average_ranks(c))).collect();
    let y = standardized(&average_ranks(output));
    (0..ranked.len())
        .map(|j| {
            let others: Vec<Vec<f64>> =
                ranked.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, c)| c.clone()).collect();
            corr(&ols_residual(&others, &ranked[j]), &ols_residual(&others, &y))
        })
        .collect()
}

fn random_columns(n: usize, k: usize, seed: u64) -> Vec<(String, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|j| (format!("x{j}"), (0..n).map(|_| rng.random::<f64>()).collect())).collect()
}

#[test]
fn lhs_is_reproducible_and_seed_dependent() {
    let d = ParamDistribution::table2_default();
    let a = lhs_sample(&d, 100, 1).unwrap();
    assert_eq!(a, lhs_sample(&d, 100, 1).unwrap());
    assert_ne!(a, lhs_sample(&d, 100, 2).unwrap());
}

#[test]
fn lhs_hits_every_stratum_exactly_once() {
    let d = ParamDistribution::table2_default();
    let n = 200;
    let s = lhs_sample(&d, n, 9).unwrap();
    for name in PARAM_NAMES {
        let [lo, hi] = d.range(name).unwrap();
        let mut seen = vec![0usize; n];
        for p in &s {
            let v = p.get(name).unwrap();
            assert!((lo..=hi).contains(&v));
            seen[(((v - lo) / (hi - lo) * n as f64) as usize).min(n - 1)] += 1;
        }
        assert!(seen.iter().all(|c| *c == 1), "{name}");
    }
}

#[test]
fn lhs_marginal_means_are_close_to_range_midpoints() {
    let d = ParamDistribution::table2_default();
    let s = lhs_sample(&d, 2000, 5).unwrap();
    for name in PARAM_NAMES {
        let [lo, hi] = d.range(name).unwrap();
        let mean = s.iter().map(|p| p.get(name).unwrap()).sum::<f64>() / s.len() as f64;
        assert!((mean - 0.5 * (lo + hi)).abs() <= 0.02 * (hi - lo), "{name}");
    }
}

#[test]
fn degenerate_distribution_gives_constant_r0() {
    let d = ParamDistribution::point(&ModelParams::baseline());
    let reports = evaluate_samples(&lhs_sample(&d, 50, 3).unwrap());
    let dist = r0_distribution(&reports);
    assert_eq!(dist.std, 0.0);
    assert_eq!(dist.histogram.iter().map(|b| b.count).sum::<usize>(), 50);
    assert!(d.varying().is_empty());
}

#[test]
fn histogram_partitions_all_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v: Vec<f64> = (0..1234).map(|_| rng.random_range(0.0..7.0)).collect();
    let h = histogram(&v, 50);
    assert_eq!(h.len(), 50);
    assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), v.len());
    let max = v.iter().copied().fold(0.0, f64::max);
    assert!((h[49].bin_hi - max).abs() < 1e-12);
}

#[test]
fn monotone_output_has_unit_prcc() {
    let cols = random_columns(300, 3, 2);
    let y: Vec<f64> = cols[0].1.iter().map(|v| v.powi(3)).collect();
    let r = prcc_columns(&cols, &y).unwrap();
    assert!((r[0].1 - 1.0).abs() < 1e-9, "{r:?}");
    let neg: Vec<f64> = cols[1].1.iter().map(|v| -v.exp()).collect();
    assert!((prcc_columns(&cols, &neg).unwrap()[1].1 + 1.0).abs() < 1e-9);
}

#[test]
fn prcc_matches_normal_equation_oracle() {
    let cols = random_columns(400, 5, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let y: Vec<f64> = (0..400)
        .map(|i| 2.0 * cols[0].1[i] - cols[2].1[i].powi(2) + 0.3 * cols[4].1[i] + 0.2 * rng.random::<f64>())
        .collect();
    let fast = prcc_columns(&cols, &y).unwrap();
    let slow = serial_prcc(&cols, &y);
    for ((name, a), b) in fast.iter().zip(&slow) {
        assert!((a - b).abs() < 1e-10, "{name}: {a} vs {b}");
    }
    assert!(fast[0].1 > 0.9 && fast[2].1 < -0.5 && fast[1].1.abs() < 0.15);
}

#[test]
fn constant_column_is_a_singular_regression() {
    let mut cols = random_columns(50, 3, 6);
    cols[1].1 = vec![2.0; 50];
    let y = cols[0].1.clone();
    assert!(matches!(prcc_columns(&cols, &y), Err(ArboError::SingularRegression(n)) if n == "x1"));
}

#[test]
fn too_few_samples_are_rejected() {
    let cols = random_columns(4, 3, 6);
    assert!(matches!(prcc_columns(&cols, &[1.0, 2.0, 3.0, 4.0]), Err(ArboError::Precondition(_))));
    assert!(lhs_sample(&ParamDistribution::table2_default(), 1, 0).is_err());
}

#[test]
fn invalid_ranges_are_rejected() {
    let mut d = ParamDistribution::table2_default();
    d.ranges.insert("a".into(), [2.0, 1.0]);
    assert!(matches!(d.validate(), Err(ArboError::InvalidRange { .. })));
    let mut d = ParamDistribution::table2_default();
    d.ranges.insert("bogus".into(), [0.0, 1.0]);
    assert!(matches!(d.validate(), Err(ArboError::UnknownParameter(_))));
}

#[test]
fn dominant_signs_are_stable_across_sample_sizes() {
    let d = ParamDistribution::table2_default();
    let small = sensitivity_analysis(&d, 200, 11).unwrap();
    let large = sensitivity_analysis(&d, 5000, 11).unwrap();
    for name in ["beta_hv", "beta_vh", "a", "theta", "mu_v", "Lambda_h"] {
        let (s, l) = (small.prcc.get(name).unwrap(), large.prcc.get(name).unwrap());
        assert_eq!(s.signum(), l.signum(), "{name}");
        assert!(l.abs() > 0.15, "{name} {l}");
    }
    assert!((small.r0.mean - large.r0.mean).abs() < 0.2 * large.r0.mean);
    let c = large.conditions;
    assert!((c.n_le_1 + c.n_gt_1 - 1.0).abs() < 1e-12);
    assert!((c.dfe_stable + c.r0_ge_1 - c.n_gt_1).abs() < 1e-12);
    assert!((c.two_endemic + c.one_endemic_saddle + c.no_endemic - c.dfe_stable).abs() < 1e-12);
}
