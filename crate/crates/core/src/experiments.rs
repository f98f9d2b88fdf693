//! Monte Carlo campaigns over the graph families.
//!
//! Every trial draws from its own stream, `derive_stream(cell, trial)`, where
//! the cell stream is keyed by `(n, k)` alone. Per-trial results are collected
//! in trial order and reduced sequentially, so output does not depend on the
//! thread count or on which other cells share the sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::analyze;
use crate::error::{ensure_param, Error, Result};
use crate::formulas::an_window;
use crate::gen::{self, key_raw, raw_to_exponential};
use crate::model::{derive_stream, ModelKind, ModelParams, SeedSpec};

pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub memory_budget: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            threads: None,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

impl RunOptions {
    pub fn with_threads(threads: usize) -> Self {
        RunOptions {
            threads: Some(threads),
            ..Self::default()
        }
    }

    fn workers(&self) -> usize {
        self.threads
            .unwrap_or_else(rayon::current_num_threads)
            .max(1)
    }

    fn install<R: Send>(&self, job: impl FnOnce() -> R + Send) -> Result<R> {
        match self.threads {
            None => Ok(job()),
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t.max(1))
                    .build()
                    .map_err(|e| Error::Resource(e.to_string()))?;
                Ok(pool.install(job))
            }
        }
    }
}

/// Rough peak bytes for one trial at `(n, k)`.
pub fn trial_memory_bytes(n: usize, k: usize) -> u64 {
    let (n, k) = (n as u64, k as u64);
    n.saturating_mul(k).saturating_mul(64) + n * 96
}

fn check_budget(cells: &[(usize, usize)], opts: &RunOptions) -> Result<()> {
    for &(n, k) in cells {
        let need = trial_memory_bytes(n, k).saturating_mul(opts.workers() as u64);
        if need > opts.memory_budget {
            return Err(Error::Resource(format!(
                "(n = {n}, k = {k}) needs ~{need} bytes across {} workers, budget is {}",
                opts.workers(),
                opts.memory_budget
            )));
        }
    }
    Ok(())
}

/// Stream for the `(n, k)` cell under `seed`.
pub fn cell_seed(seed: SeedSpec, n: usize, k: usize) -> SeedSpec {
    derive_stream(derive_stream(seed, n as u64), k as u64)
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let nf = trials as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// Aggregated statistics for one `(n, k)` cell. Serialized field order is the
/// sweep CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub frac_connected: f64,
    #[serde(rename = "ci_low")]
    pub wilson_ci_low: f64,
    #[serde(rename = "ci_high")]
    pub wilson_ci_high: f64,
    pub mean_isolated: f64,
    pub frac_has_isolated: f64,
    pub mean_degree: f64,
    pub mean_min_degree: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct TrialStats {
    connected: bool,
    isolated: u64,
    degree_sum: u64,
    min_degree: u64,
    max_degree: u64,
}

/// Model used for a sweep cell. Erdős–Rényi cells use `p = k / (n - 1)`, the
/// edge density with mean degree `k`.
pub fn cell_params(kind: ModelKind, n: usize, k: usize) -> Result<ModelParams> {
    match kind {
        ModelKind::ErdosRenyi => {
            ensure_param!(n >= 2, "n must be at least 2");
            ModelParams::erdos_renyi(n, (k as f64 / (n - 1) as f64).min(1.0))
        }
        _ => ModelParams::new(kind, n, k, 0.0),
    }
}

fn run_trial(params: &ModelParams, seed: SeedSpec) -> TrialStats {
    let graph = gen::generate(params, seed).expect("parameters validated before the run");
    let report = analyze(&graph);
    TrialStats {
        connected: report.is_connected,
        isolated: report.isolated_count as u64,
        degree_sum: 2 * report.edge_count as u64,
        min_degree: report.min_degree as u64,
        max_degree: report.max_degree as u64,
    }
}

fn per_trial<T, F>(trials: u64, seed: SeedSpec, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(SeedSpec) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| job(derive_stream(seed, t)))
        .collect()
}

fn run_cell(kind: ModelKind, n: usize, k: usize, trials: u64, seed: SeedSpec) -> Result<SweepCell> {
    let params = cell_params(kind, n, k)?;
    let stats = per_trial(trials, cell_seed(seed, n, k), |s| run_trial(&params, s));
    let mut connected = 0u64;
    let mut with_isolated = 0u64;
    let (mut isolated, mut degree, mut min_degree) = (0u64, 0u64, 0u64);
    for s in &stats {
        if kind == ModelKind::Bilateral {
            assert!(
                s.max_degree <= k as u64,
                "bilateral degree {} exceeds k = {k}",
                s.max_degree
            );
        }
        connected += s.connected as u64;
        with_isolated += (s.isolated > 0) as u64;
        isolated += s.isolated;
        degree += s.degree_sum;
        min_degree += s.min_degree;
    }
    let t = trials as f64;
    let (lo, hi) = wilson_interval(connected, trials);
    Ok(SweepCell {
        n,
        k,
        trials,
        master_seed: seed.master_seed,
        frac_connected: connected as f64 / t,
        wilson_ci_low: lo,
        wilson_ci_high: hi,
        mean_isolated: isolated as f64 / t,
        frac_has_isolated: with_isolated as f64 / t,
        mean_degree: degree as f64 / (t * n as f64),
        mean_min_degree: min_degree as f64 / t,
    })
}

/// Runs the listed `(n, k)` cells in order.
pub fn run_cells(
    cells: &[(usize, usize)],
    trials: u64,
    seed: SeedSpec,
    kind: ModelKind,
    opts: &RunOptions,
) -> Result<Vec<SweepCell>> {
    ensure_param!(trials >= 1, "trials must be positive");
    for &(n, k) in cells {
        cell_params(kind, n, k)?;
    }
    check_budget(cells, opts)?;
    opts.install(|| {
        cells
            .iter()
            .map(|&(n, k)| run_cell(kind, n, k, trials, seed))
            .collect()
    })?
}

/// Full grid `n_list × k_list`, `n` varying slowest.
pub fn run_sweep(
    n_list: &[usize],
    k_list: &[usize],
    trials: u64,
    seed: SeedSpec,
    kind: ModelKind,
    opts: &RunOptions,
) -> Result<Vec<SweepCell>> {
    let cells: Vec<(usize, usize)> = n_list
        .iter()
        .flat_map(|&n| k_list.iter().map(move |&k| (n, k)))
        .collect();
    run_cells(&cells, trials, seed, kind, opts)
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn bernoulli_se(hits: u64, trials: u64) -> f64 {
    let p = hits as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsolationEstimate {
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    /// Fraction of trials in which vertex 0 is isolated.
    pub p1_hat: f64,
    pub p1_se: f64,
    pub mean_isolated: f64,
    pub mean_isolated_se: f64,
}

/// Isolation of vertex 0 and the isolated-vertex count in `G(n, k)`.
pub fn estimate_isolation(
    n: usize,
    k: usize,
    trials: u64,
    seed: SeedSpec,
) -> Result<IsolationEstimate> {
    ensure_param!(trials >= 1, "trials must be positive");
    let params = ModelParams::bilateral(n, k)?;
    let per = per_trial(trials, seed, |s| {
        let g = gen::generate_bilateral(&params, s).expect("validated");
        let isolated = (0..n).filter(|&v| g.degree(v) == 0).count();
        (g.degree(0) == 0, isolated as f64)
    });
    let hits = per.iter().filter(|p| p.0).count() as u64;
    let counts: Vec<f64> = per.iter().map(|p| p.1).collect();
    let (mean_isolated, mean_isolated_se) = mean_and_se(&counts);
    Ok(IsolationEstimate {
        n,
        k,
        trials,
        p1_hat: hits as f64 / trials as f64,
        p1_se: bernoulli_se(hits, trials),
        mean_isolated,
        mean_isolated_se,
    })
}

/// Pairwise isolation of vertices 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationRecord {
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    /// Mean of the isolation indicators of vertices 0 and 1.
    pub p1_hat: f64,
    pub p1_se: f64,
    /// Fraction of trials with both vertices isolated.
    pub p12_hat: f64,
    pub p12_se: f64,
    /// `p12_hat / p1_hat^2`; `None` when no isolation was observed.
    pub ratio: Option<f64>,
    /// Delta-method standard error of `ratio`.
    pub ratio_se: Option<f64>,
}

pub fn estimate_pair_correlation(
    n: usize,
    k: usize,
    trials: u64,
    seed: SeedSpec,
) -> Result<CorrelationRecord> {
    ensure_param!(trials >= 1, "trials must be positive");
    let params = ModelParams::bilateral(n, k)?;
    let per = per_trial(trials, seed, |s| {
        let t = gen::top_k_sets(&params, s).expect("validated");
        let isolated = |v: usize| t.list(v).iter().all(|&u| !t.proposes(u as usize, v));
        (isolated(0), isolated(1))
    });
    let s0 = per.iter().filter(|p| p.0).count() as f64;
    let s1 = per.iter().filter(|p| p.1).count() as f64;
    let s01 = per.iter().filter(|p| p.0 && p.1).count() as f64;
    let nt = trials as f64;
    let a = (s0 + s1) / (2.0 * nt);
    let b = s01 / nt;
    let var_a = (s0 + s1 + 2.0 * s01) / (4.0 * nt) - a * a;
    let var_b = b * (1.0 - b);
    // a * b == b per trial, since both isolated forces a = 1
    let cov_ab = b - a * b;
    let (ratio, ratio_se) = if a > 0.0 {
        let r = b / (a * a);
        let var_r = (var_b / a.powi(4) + 4.0 * b * b * var_a / a.powi(6)
            - 4.0 * b * cov_ab / a.powi(5))
            / nt;
        (Some(r), Some(var_r.max(0.0).sqrt()))
    } else {
        (None, None)
    };
    Ok(CorrelationRecord {
        n,
        k,
        trials,
        p1_hat: a,
        p1_se: (var_a.max(0.0) / nt).sqrt(),
        p12_hat: b,
        p12_se: (var_b / nt).sqrt(),
        ratio,
        ratio_se,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationDetail {
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    /// Fraction of trials with every vertex inside the window.
    pub fraction: f64,
    /// Mean number of vertices per trial at or below the lower edge.
    pub mean_below: f64,
    /// Mean number of vertices per trial at or above the upper edge.
    pub mean_above: f64,
}

/// Checks whether every vertex's `k`-th largest Exponential(1) score falls
/// strictly inside the window of [`an_window`], with `k = ⌊t log n⌋`.
pub fn an_concentration_detail(
    n: usize,
    t: f64,
    trials: u64,
    seed: SeedSpec,
) -> Result<ConcentrationDetail> {
    ensure_param!(trials >= 1, "trials must be positive");
    let window = an_window::<f64>(n as u64, t)?;
    let k = (t * (n as f64).ln()).floor() as usize;
    ensure_param!(k >= 1 && k < n, "k = ⌊t log n⌋ = {k} out of range");
    let per = per_trial(trials, seed, |s| {
        let keys = gen::kth_keys(n, k, s).expect("validated");
        let (mut below, mut above) = (0u64, 0u64);
        for key in keys {
            let v = raw_to_exponential(key_raw(key));
            below += (v <= window.lower) as u64;
            above += (v >= window.upper) as u64;
        }
        (below, above)
    });
    let inside = per.iter().filter(|&&(b, a)| b == 0 && a == 0).count();
    let nt = trials as f64;
    Ok(ConcentrationDetail {
        n,
        k,
        trials,
        fraction: inside as f64 / nt,
        mean_below: per.iter().map(|p| p.0).sum::<u64>() as f64 / nt,
        mean_above: per.iter().map(|p| p.1).sum::<u64>() as f64 / nt,
    })
}

pub fn an_concentration_check(n: usize, t: f64, trials: u64, seed: SeedSpec) -> Result<f64> {
    Ok(an_concentration_detail(n, t, trials, seed)?.fraction)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanDegreeEstimate {
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    pub mean: f64,
    pub se: f64,
}

/// Mean degree of `G(n, k)`, averaging `2|E|/n` over trials.
pub fn estimate_mean_degree(
    n: usize,
    k: usize,
    trials: u64,
    seed: SeedSpec,
) -> Result<MeanDegreeEstimate> {
    ensure_param!(trials >= 1, "trials must be positive");
    let params = ModelParams::bilateral(n, k)?;
    let per = per_trial(trials, seed, |s| {
        let g = gen::generate_bilateral(&params, s).expect("validated");
        2.0 * g.edge_count() as f64 / n as f64
    });
    let (mean, se) = mean_and_se(&per);
    Ok(MeanDegreeEstimate {
        n,
        k,
        trials,
        mean,
        se,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankFrequency {
    pub rank: usize,
    pub freq: f64,
    pub se: f64,
}

/// How often vertex 0 is joined to its `i`-th favourite, for `i = 1..=k`.
pub fn estimate_rank_connection(
    n: usize,
    k: usize,
    trials: u64,
    seed: SeedSpec,
) -> Result<Vec<RankFrequency>> {
    ensure_param!(trials >= 1, "trials must be positive");
    let params = ModelParams::bilateral(n, k)?;
    let per = per_trial(trials, seed, |s| {
        let t = gen::top_k_sets(&params, s).expect("validated");
        t.list(0)
            .iter()
            .map(|&j| t.proposes(j as usize, 0))
            .collect::<Vec<bool>>()
    });
    Ok((0..k)
        .map(|i| {
            let hits = per.iter().filter(|row| row[i]).count() as u64;
            RankFrequency {
                rank: i + 1,
                freq: hits as f64 / trials as f64,
                se: bernoulli_se(hits, trials),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_estimate() {
        for (s, t) in [(0, 10), (10, 10), (3, 10), (199, 200), (1, 1)] {
            let (lo, hi) = wilson_interval(s, t);
            let p = s as f64 / t as f64;
            assert!(lo <= p && p <= hi, "{s}/{t}");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
    }

    #[test]
    fn complete_graph_cell() {
        let cells = run_sweep(
            &[8],
            &[7],
            10,
            SeedSpec::new(1, 0),
            ModelKind::Bilateral,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].frac_connected, 1.0);
        assert_eq!(cells[0].mean_degree, 7.0);
        assert_eq!(cells[0].mean_isolated, 0.0);
    }

    #[test]
    fn cells_do_not_depend_on_neighbours() {
        let seed = SeedSpec::new(5, 0);
        let opts = RunOptions::default();
        let both = run_sweep(&[30], &[2, 3], 4, seed, ModelKind::Bilateral, &opts).unwrap();
        let alone = run_sweep(&[30], &[3], 4, seed, ModelKind::Bilateral, &opts).unwrap();
        assert_eq!(both[1], alone[0]);
    }

    #[test]
    fn budget_guard() {
        let opts = RunOptions {
            threads: Some(1),
            memory_budget: 1_000,
        };
        let err = run_sweep(
            &[100],
            &[5],
            1,
            SeedSpec::new(0, 0),
            ModelKind::Bilateral,
            &opts,
        );
        assert!(matches!(err, Err(Error::Resource(_))));
    }

    #[test]
    fn invalid_cells_rejected() {
        let opts = RunOptions::default();
        let seed = SeedSpec::new(0, 0);
        assert!(run_sweep(&[5], &[5], 1, seed, ModelKind::Bilateral, &opts).is_err());
        assert!(run_sweep(&[5], &[2], 0, seed, ModelKind::Bilateral, &opts).is_err());
    }

    #[test]
    fn two_vertices_never_isolated() {
        let est = estimate_isolation(2, 1, 50, SeedSpec::new(3, 0)).unwrap();
        assert_eq!(est.mean_isolated, 0.0);
        assert_eq!(est.p1_hat, 0.0);
        let rec = estimate_pair_correlation(2, 1, 50, SeedSpec::new(3, 0)).unwrap();
        assert_eq!(rec.p1_hat, 0.0);
        assert!(rec.ratio.is_none());
    }

    #[test]
    fn concentration_fraction_in_unit_interval() {
        let f = an_concentration_check(200, 1.0, 5, SeedSpec::new(1, 0)).unwrap();
        assert!((0.0..=1.0).contains(&f));
        assert!(an_concentration_check(200, 0.1, 5, SeedSpec::new(1, 0)).is_err());
    }

    #[test]
    fn er_sweep_uses_matching_density() {
        let p = cell_params(ModelKind::ErdosRenyi, 11, 4).unwrap();
        assert_eq!(p.p(), 0.4);
    }
}
