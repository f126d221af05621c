//! Latin hypercube sampling, `R0` distribution statistics, equilibrium
//! condition probabilities and partial rank correlation coefficients.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ArboError, Result};
use crate::model::{ModelParams, PARAM_NAMES};
use crate::thresholds::{bifurcation_thresholds, ThresholdReport};

/// Default number of histogram bins.
pub const HISTOGRAM_BINS: usize = 50;

/// Independent uniform range per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamDistribution {
    /// `name -> [lo, hi]`; every model parameter must be present.
    pub ranges: BTreeMap<String, [f64; 2]>,
}

impl ParamDistribution {
    /// Degenerate distribution concentrated at `p`.
    pub fn point(p: &ModelParams) -> Self {
        let ranges = PARAM_NAMES
            .iter()
            .map(|n| {
                let v = p.get(n).expect("listed parameter");
                (n.to_string(), [v, v])
            })
            .collect();
        Self { ranges }
    }

    /// Literature ranges; single values are widened by ±20%.
    pub fn table2_default() -> Self {
        let mu_h = 1.0 / (67.0 * 365.0);
        let widen = |v: f64| [0.8 * v, 1.2 * v];
        let entries: [(&str, [f64; 2]); 21] = [
            ("Lambda_h", [2.0, 3.0]),
            ("mu_h", widen(mu_h)),
            ("a", widen(1.0)),
            ("beta_hv", [0.1, 0.75]),
            ("beta_vh", [0.1, 0.75]),
            ("gamma_h", [1.0 / 15.0, 1.0 / 3.0]),
            ("delta", widen(1e-3)),
            ("sigma", widen(0.1428)),
            ("eta_h", [0.0, 1.0 - 1e-9]),
            ("eta_v", [0.0, 1.0 - 1e-9]),
            ("mu_v", [1.0 / 30.0, 1.0 / 14.0]),
            ("gamma_v", [1.0 / 21.0, 1.0 / 2.0]),
            ("theta", widen(0.08)),
            ("mu_b", widen(6.0)),
            ("Gamma_E", [1e3, 1e6]),
            ("Gamma_L", [5e2, 5e5]),
            ("mu_E", [0.2, 0.4]),
            ("mu_L", [0.2, 0.4]),
            ("mu_P", widen(0.4)),
            ("s", widen(0.7)),
            ("l", widen(0.5)),
        ];
        Self { ranges: entries.iter().map(|(n, r)| (n.to_string(), *r)).collect() }
    }

    /// Range of one parameter.
    pub fn range(&self, name: &str) -> Result<[f64; 2]> {
        self.ranges.get(name).copied().ok_or_else(|| ArboError::UnknownParameter(name.to_string()))
    }

    /// Checks names and that every range is ordered and admissible.
    pub fn validate(&self) -> Result<()> {
        for name in self.ranges.keys() {
            if !PARAM_NAMES.contains(&name.as_str()) {
                return Err(ArboError::UnknownParameter(name.clone()));
            }
        }
        let base = ModelParams::baseline();
        for name in PARAM_NAMES {
            let [lo, hi] = self.range(name)?;
            let bad = || ArboError::InvalidRange { name: name.to_string(), lo, hi };
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(bad());
            }
            for v in [lo, hi] {
                let mut q = base;
                q.set(name, v)?;
                q.validate().map_err(|_| bad())?;
            }
        }
        Ok(())
    }

    /// Parameters whose range has positive width.
    pub fn varying(&self) -> Vec<&'static str> {
        PARAM_NAMES.iter().copied().filter(|n| self.ranges.get(*n).is_some_and(|[lo, hi]| hi > lo)).collect()
    }
}

/// Latin hypercube sample of `n` parameter sets, reproducible from `seed`.
pub fn lhs_sample(dist: &ParamDistribution, n: usize, seed: u64) -> Result<Vec<ModelParams>> {
    if n < 2 {
        return Err(ArboError::Precondition(format!("LHS needs n >= 2, got {n}")));
    }
    dist.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut samples = vec![ModelParams::baseline(); n];
    let mut strata: Vec<usize> = (0..n).collect();
    for name in PARAM_NAMES {
        let [lo, hi] = dist.range(name)?;
        strata.shuffle(&mut rng);
        for (sample, &k) in samples.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            let v = (lo + (k as f64 + u) / n as f64 * (hi - lo)).clamp(lo, hi);
            sample.set(name, v)?;
        }
    }
    Ok(samples)
}

/// Threshold reports for every sample, evaluated in parallel.
pub fn evaluate_samples(samples: &[ModelParams]) -> Vec<ThresholdReport> {
    samples.par_iter().map(bifurcation_thresholds).collect()
}

/// Fixed-width histogram bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    /// Lower edge.
    pub bin_lo: f64,
    /// Upper edge.
    pub bin_hi: f64,
    /// Number of values in the bin.
    pub count: usize,
}

/// Summary of sampled `R0` values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct R0Distribution {
    /// Sample mean.
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
    /// Fraction with `R0 >= 1`.
    pub p_ge_1: f64,
    /// Number of draws with `N <= 1`, whose `R0` is recorded as 0.
    pub n_le_1_count: usize,
    /// Equal-width bins over `[0, max R0]`.
    pub histogram: Vec<HistogramBin>,
}

/// Equal-width histogram over `[0, max]`; the top edge belongs to the last bin.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    let bins = bins.max(1);
    let max = values.iter().copied().fold(0.0_f64, f64::max);
    let top = if max > 0.0 { max } else { 1.0 };
    let width = top / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = ((v / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin { bin_lo: k as f64 * width, bin_hi: (k + 1) as f64 * width, count })
        .collect()
}

/// Statistics of `R0` over evaluated samples.
pub fn r0_distribution(reports: &[ThresholdReport]) -> R0Distribution {
    let r0: Vec<f64> = reports.iter().map(|r| r.r0).collect();
    let n = r0.len() as f64;
    let mean = r0.iter().sum::<f64>() / n;
    let shift = r0.first().copied().unwrap_or(0.0);
    let (s1, s2) = r0.iter().fold((0.0, 0.0), |(a, b), v| (a + (v - shift), b + (v - shift).powi(2)));
    let var = if r0.len() > 1 { ((s2 - s1 * s1 / n) / (n - 1.0)).max(0.0) } else { 0.0 };
    R0Distribution {
        mean,
        std: var.sqrt(),
        p_ge_1: r0.iter().filter(|v| **v >= 1.0).count() as f64 / n,
        n_le_1_count: reports.iter().filter(|r| !r.vectors_persist).count(),
        histogram: histogram(&r0, HISTOGRAM_BINS),
    }
}

/// Empirical frequencies of the equilibrium-existence events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionProbabilities {
    /// `N <= 1`.
    pub n_le_1: f64,
    /// `N > 1`.
    pub n_gt_1: f64,
    /// Two endemic equilibria below the threshold with `N > 1`.
    pub two_endemic: f64,
    /// `R0` below one and equal to a saddle-node threshold with `N > 1`.
    pub one_endemic_saddle: f64,
    /// No endemic equilibrium below the threshold with `N > 1`.
    pub no_endemic: f64,
    /// `N > 1` and `R0 < 1`.
    pub dfe_stable: f64,
    /// `N > 1` and `R0 >= 1`.
    pub r0_ge_1: f64,
}

/// Partition frequencies over evaluated samples.
pub fn condition_probabilities(reports: &[ThresholdReport]) -> ConditionProbabilities {
    let n = reports.len() as f64;
    let freq = |f: &dyn Fn(&ThresholdReport) -> bool| reports.iter().filter(|r| f(r)).count() as f64 / n;
    let below = |r: &ThresholdReport| r.vectors_persist && r.r0 < 1.0;
    let phi3 = |r: &ThresholdReport| r.r_1b == Some(r.r0) || r.r_2b == Some(r.r0);
    ConditionProbabilities {
        n_le_1: freq(&|r| !r.vectors_persist),
        n_gt_1: freq(&|r| r.vectors_persist),
        two_endemic: freq(&|r| below(r) && r.two_endemic_by_r0()),
        one_endemic_saddle: freq(&|r| below(r) && phi3(r)),
        no_endemic: freq(&|r| below(r) && !r.two_endemic_by_r0() && !phi3(r)),
        dfe_stable: freq(&|r| below(r)),
        r0_ge_1: freq(&|r| r.vectors_persist && r.r0 >= 1.0),
    }
}

/// Average ranks starting at 1; ties share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

fn standardize(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    (sd > 0.0).then(|| v.iter().map(|x| (x - mean) / sd).collect())
}

fn residual(design: &DMatrix<f64>, y: &DVector<f64>, name: &str) -> Result<DVector<f64>> {
    if design.ncols() == 0 {
        return Ok(y.clone());
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let tiny = 1e-10 * (design.nrows() as f64).sqrt();
    if r.diagonal().iter().any(|d| d.abs() <= tiny) {
        return Err(ArboError::SingularRegression(name.to_string()));
    }
    let qty = qr.q().transpose() * y;
    let coef = r.solve_upper_triangular(&qty).ok_or_else(|| ArboError::SingularRegression(name.to_string()))?;
    Ok(y - design * coef)
}

fn pearson(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let ma = a.mean();
    let mb = b.mean();
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
    }
}

/// Partial rank correlation coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrccReport {
    /// `(parameter, coefficient)` in input order.
    pub coefficients: Vec<(String, f64)>,
    /// Number of samples.
    pub n_samples: usize,
    /// Seed that generated the samples, when known.
    pub seed: Option<u64>,
}

impl PrccReport {
    /// Coefficient for one parameter.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.coefficients.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// PRCC of `output` against each named column.
pub fn prcc_columns(columns: &[(String, Vec<f64>)], output: &[f64]) -> Result<Vec<(String, f64)>> {
    let n = output.len();
    let k = columns.len();
    if n <= k + 2 {
        return Err(ArboError::Precondition(format!("PRCC needs more than {} samples, got {n}", k + 2)));
    }
    if columns.iter().any(|(_, c)| c.len() != n) {
        return Err(ArboError::Precondition("PRCC columns differ in length".into()));
    }
    let mut ranked = Vec::with_capacity(k);
    for (name, col) in columns {
        let z = standardize(&average_ranks(col)).ok_or_else(|| ArboError::SingularRegression(name.clone()))?;
        ranked.push(z);
    }
    let y = standardize(&average_ranks(output)).ok_or_else(|| ArboError::SingularRegression("output".to_string()))?;
    let y = DVector::from_vec(y);
    (0..k)
        .into_par_iter()
        .map(|j| {
            let mut design = DMatrix::from_element(n, k, 1.0);
            let mut c = 1;
            for (m, col) in ranked.iter().enumerate() {
                if m != j {
                    design.set_column(c, &DVector::from_column_slice(col));
                    c += 1;
                }
            }
            let xj = DVector::from_column_slice(&ranked[j]);
            let rx = residual(&design, &xj, &columns[j].0)?;
            let ry = residual(&design, &y, &columns[j].0)?;
            Ok((columns[j].0.clone(), pearson(&rx, &ry)))
        })
        .collect()
}

/// PRCC of `outputs` against every varying parameter of the samples.
pub fn prcc(samples: &[ModelParams], outputs: &[f64], names: &[&str], seed: Option<u64>) -> Result<PrccReport> {
    if samples.len() != outputs.len() {
        return Err(ArboError::Precondition("one output per sample is required".into()));
    }
    let columns = names
        .iter()
        .map(|n| Ok((n.to_string(), samples.iter().map(|s| s.get(n)).collect::<Result<Vec<f64>>>()?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PrccReport { coefficients: prcc_columns(&columns, outputs)?, n_samples: samples.len(), seed })
}

/// Full sensitivity study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    /// `R0` statistics.
    pub r0: R0Distribution,
    /// Event probabilities.
    pub conditions: ConditionProbabilities,
    /// PRCC over varying parameters.
    pub prcc: PrccReport,
}

/// Samples and summarises in one call.
pub fn sensitivity_analysis(dist: &ParamDistribution, n: usize, seed: u64) -> Result<SensitivityReport> {
    let samples = lhs_sample(dist, n, seed)?;
    let reports = evaluate_samples(&samples);
    let outputs: Vec<f64> = reports.iter().map(|r| r.r0).collect();
    Ok(SensitivityReport {
        r0: r0_distribution(&reports),
        conditions: condition_probabilities(&reports),
        prcc: prcc(&samples, &outputs, &dist.varying(), Some(seed))?,
    })
}
