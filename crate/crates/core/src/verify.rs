//! Oracle and identity suites behind `bagraph verify`.
//!
//! Each suite compares an evaluator against an independent route (exhaustive
//! enumeration, direct summation) in exact arithmetic and stops at the first
//! mismatch. The evaluator is passed in, so a deliberately broken one can be
//! checked to fail.

use std::fmt;

use num_traits::{One, Zero};

use crate::formulas::{
    conn_prob_by_rank, mean_degree_limit_exact, negbin_partial_mean, negbin_pmf,
};
use crate::urn::{
    all_specs, count_vectors, enumerate, exact_before_first_type0_pmf, exact_first_window_pmf,
    negmulti_pmf, negmulti_shell_sum, UrnSpec,
};
use crate::Exact;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checked: usize,
    /// Full inputs of the first failing case.
    pub failure: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "PASS {:<22} {} cases", self.name, self.checked),
            Some(case) => write!(
                f,
                "FAIL {:<22} after {} cases: {case}",
                self.name, self.checked
            ),
        }
    }
}

struct Suite {
    name: &'static str,
    checked: usize,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite { name, checked: 0 }
    }

    fn check(&mut self, ok: bool, case: impl FnOnce() -> String) -> Result<(), SuiteReport> {
        self.checked += 1;
        if ok {
            Ok(())
        } else {
            Err(SuiteReport {
                name: self.name,
                checked: self.checked,
                failure: Some(case()),
            })
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            checked: self.checked,
            failure: None,
        }
    }
}

fn collapse(r: Result<SuiteReport, SuiteReport>) -> SuiteReport {
    r.unwrap_or_else(|e| e)
}

pub type WindowFn = dyn Fn(&UrnSpec, u64, u64) -> Exact + Sync;
pub type BeforeFn = dyn Fn(&UrnSpec, &[u64]) -> Exact + Sync;

/// Window-count law against enumeration, plus normalization, for every urn
/// with at most `max_total` objects.
pub fn urn_window_suite(max_total: u64, pmf: &WindowFn) -> SuiteReport {
    let mut suite = Suite::new("urn-window");
    collapse((|| {
        for spec in all_specs(max_total) {
            let e = enumerate(&spec).expect("within enumeration cap");
            for m in 0..=spec.total() {
                let mut total = Exact::zero();
                for j in 0..=m.min(spec.m0()) {
                    let got = pmf(&spec, m, j);
                    let want = e.window_probability::<Exact>(m as usize, j as usize);
                    suite.check(got == want, || {
                        format!(
                            "spec={:?} m={m} j={j}: formula {got} != enumeration {want}",
                            spec.type_counts()
                        )
                    })?;
                    total += got;
                }
                suite.check(total.is_one(), || {
                    format!("spec={:?} m={m}: masses sum to {total}", spec.type_counts())
                })?;
            }
        }
        Ok(suite.finish())
    })())
}

/// Counts-before-first-type-0 law against enumeration.
pub fn urn_before_type0_suite(max_total: u64, pmf: &BeforeFn) -> SuiteReport {
    let mut suite = Suite::new("urn-before-type0");
    collapse((|| {
        for spec in all_specs(max_total) {
            let e = enumerate(&spec).expect("within enumeration cap");
            for counts in count_vectors(&spec) {
                let got = pmf(&spec, &counts);
                let want = e.before_type0_probability::<Exact>(&counts);
                suite.check(got == want, || {
                    format!(
                        "spec={:?} counts={counts:?}: formula {got} != enumeration {want}",
                        spec.type_counts()
                    )
                })?;
            }
        }
        Ok(suite.finish())
    })())
}

/// `sum_{j<k} P{X_k = j} = 1/2`, the partial mean closed form against its
/// sum, and the per-rank probabilities summing to the mean degree.
pub fn negbin_suite(max_k: u64) -> SuiteReport {
    let mut suite = Suite::new("negbin-identities");
    let half = Exact::new(1.into(), 2.into());
    collapse((|| {
        for k in 1..=max_k {
            let mut mass = Exact::zero();
            let mut weighted = Exact::zero();
            for j in 0..k {
                let p = negbin_pmf::<Exact>(k, j).expect("k >= 1");
                weighted += p.clone() * Exact::from_integer(j.into());
                mass += p;
            }
            suite.check(mass == half, || format!("k={k}: P(X_k < k) = {mass}"))?;
            let closed = negbin_partial_mean::<Exact>(k).expect("k >= 1");
            suite.check(closed == weighted, || {
                format!("k={k}: partial mean closed form {closed} != sum {weighted}")
            })?;
            let by_rank = (1..=k).fold(Exact::zero(), |acc, i| {
                acc + conn_prob_by_rank::<Exact>(i, k).expect("valid rank")
            });
            let limit = mean_degree_limit_exact(k).expect("k >= 1");
            suite.check(by_rank == limit, || {
                format!("k={k}: rank probabilities sum to {by_rank}, mean degree {limit}")
            })?;
        }
        Ok(suite.finish())
    })())
}

fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

/// Shell sums of the negative multinomial against brute-force compositions.
pub fn shell_suite(max_k: usize, max_n: u64) -> SuiteReport {
    let mut suite = Suite::new("negmulti-shells");
    collapse((|| {
        for k in 1..=max_k {
            for n in 1..=max_n {
                let brute = compositions(n - 1, k).iter().fold(Exact::zero(), |acc, c| {
                    acc + negmulti_pmf::<Exact>(k, c).expect("valid counts")
                });
                let closed = negmulti_shell_sum::<Exact>(k, n).expect("k, n >= 1");
                suite.check(brute == closed, || {
                    format!("k={k} n={n}: shell sum {closed} != composition sum {brute}")
                })?;
            }
        }
        Ok(suite.finish())
    })())
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub max_m: u64,
    pub max_k: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_m: 9,
            max_k: 64,
        }
    }
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<SuiteReport> {
    let window =
        |s: &UrnSpec, m: u64, j: u64| exact_first_window_pmf::<Exact>(s, m, j).expect("valid");
    let before =
        |s: &UrnSpec, c: &[u64]| exact_before_first_type0_pmf::<Exact>(s, c).expect("valid");
    vec![
        urn_window_suite(cfg.max_m, &window),
        urn_before_type0_suite(cfg.max_m, &before),
        negbin_suite(cfg.max_k),
        shell_suite(4, 7),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let reports = run_all(&VerifyConfig {
            max_m: 5,
            max_k: 10,
        });
        assert!(reports.iter().all(|r| r.passed()), "{reports:?}");
        assert!(reports.iter().all(|r| r.checked > 0));
    }

    #[test]
    fn corrupted_window_formula_fails() {
        let broken = |s: &UrnSpec, m: u64, j: u64| {
            let p = exact_first_window_pmf::<Exact>(s, m, j).unwrap();
            if m == 3 && j == 1 {
                p * Exact::new(11.into(), 10.into())
            } else {
                p
            }
        };
        let r = urn_window_suite(5, &broken);
        assert!(!r.passed());
        assert!(r.failure.unwrap().contains("m=3 j=1"));
    }

    #[test]
    fn corrupted_before_formula_fails() {
        let broken = |s: &UrnSpec, c: &[u64]| {
            exact_before_first_type0_pmf::<Exact>(s, c).unwrap() * Exact::from_integer(2.into())
        };
        assert!(!urn_before_type0_suite(3, &broken).passed());
    }

    #[test]
    fn compositions_count() {
        // C(n + k - 1, k - 1)
        assert_eq!(compositions(3, 3).len(), 10);
    }
}
