//! Exact probabilities for uniformly random arrangements of typed objects,
//! and the negative multinomial laws they converge to.
//!
//! An urn holds `m_i` distinct objects of type `i` for `0 <= i <= s` and is
//! emptied in uniformly random order. Fixing the relative order of the type-0
//! objects divides every count by the same symmetry factor, so the evaluators
//! below hold with or without such restrictions.

use std::collections::HashMap;

use num_traits::Float;

use crate::error::{ensure_param, Result};
use crate::scalar::{binomial, factorial, falling, inv_pow, Scalar};

/// Enumeration is capped at this many objects (9! arrangements).
pub const ENUMERATION_MAX_OBJECTS: u64 = 9;

/// Type counts `[m_0, m_1, ..., m_s]`, every count positive and `s >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UrnSpec {
    type_counts: Vec<u64>,
}

impl UrnSpec {
    pub fn new(type_counts: Vec<u64>) -> Result<Self> {
        ensure_param!(type_counts.len() >= 2, "an urn needs at least two types");
        ensure_param!(
            type_counts.iter().all(|&c| c >= 1),
            "type counts must be positive"
        );
        Ok(UrnSpec { type_counts })
    }

    /// `s + 1` types with `count` objects each.
    pub fn balanced(s: usize, count: u64) -> Result<Self> {
        Self::new(vec![count; s + 1])
    }

    pub fn type_counts(&self) -> &[u64] {
        &self.type_counts
    }

    pub fn m0(&self) -> u64 {
        self.type_counts[0]
    }

    /// Number of non-zero types.
    pub fn s(&self) -> usize {
        self.type_counts.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.type_counts.iter().sum()
    }
}

/// `P{X = j}` where `X` counts type-0 objects among the first `m` places.
pub fn exact_first_window_pmf<T: Scalar>(spec: &UrnSpec, m: u64, j: u64) -> Result<T> {
    let total = spec.total();
    let m0 = spec.m0();
    ensure_param!(m <= total, "window m = {m} exceeds the {total} objects");
    ensure_param!(
        j <= m.min(m0),
        "j = {j} out of range for m = {m}, m0 = {m0}"
    );
    Ok(
        binomial::<T>(m, j) * falling::<T>(m0, j) * falling::<T>(total - m0, m - j)
            / falling::<T>(total, m),
    )
}

/// `P{X <= t}` for the window count of [`exact_first_window_pmf`].
pub fn exact_first_window_cdf<T: Scalar>(spec: &UrnSpec, m: u64, t: u64) -> Result<T> {
    let top = t.min(m).min(spec.m0());
    (0..=top).try_fold(T::zero(), |acc, j| {
        Ok(acc + exact_first_window_pmf::<T>(spec, m, j)?)
    })
}

/// Probability that exactly `counts[j-1]` objects of each type `j >= 1`
/// precede the first type-0 object.
pub fn exact_before_first_type0_pmf<T: Scalar>(spec: &UrnSpec, counts: &[u64]) -> Result<T> {
    ensure_param!(
        counts.len() == spec.s(),
        "expected {} counts, got {}",
        spec.s(),
        counts.len()
    );
    for (c, &m) in counts.iter().zip(&spec.type_counts[1..]) {
        ensure_param!(*c <= m, "count {c} exceeds type size {m}");
    }
    let prefix: u64 = counts.iter().sum();
    let choose = counts
        .iter()
        .zip(&spec.type_counts[1..])
        .fold(T::one(), |acc, (&c, &m)| acc * binomial::<T>(m, c));
    Ok(T::from_count(spec.m0()) * choose * factorial::<T>(prefix)
        / falling::<T>(spec.total(), prefix + 1))
}

/// Multinomial coefficient `(sum c)! / prod c!`.
fn multinomial<T: Scalar>(counts: &[u64]) -> T {
    let mut acc = T::one();
    let mut seen = 0;
    for &c in counts {
        seen += c;
        acc = acc * binomial::<T>(seen, c);
    }
    acc
}

/// Negative multinomial mass over `k + 1` equally likely types: the chance of
/// seeing `counts[t]` objects of each type `t < k` before the first object of
/// the last type.
pub fn negmulti_pmf<T: Scalar>(k: usize, counts: &[u64]) -> Result<T> {
    ensure_param!(k >= 1, "k must be positive");
    ensure_param!(
        counts.len() == k,
        "expected {k} counts, got {}",
        counts.len()
    );
    let sum: u64 = counts.iter().sum();
    Ok(multinomial::<T>(counts) * inv_pow::<T>(k as u64 + 1, sum + 1))
}

/// Total negative multinomial mass on the shell `sum counts = n - 1`:
/// `(1/(k+1)) (k/(k+1))^(n-1)`.
pub fn negmulti_shell_sum<T: Scalar>(k: usize, n: u64) -> Result<T> {
    ensure_param!(k >= 1 && n >= 1, "need k >= 1 and n >= 1");
    let k = k as u64;
    let ratio = T::from_count(k) / T::from_count(k + 1);
    let mut acc = T::one() / T::from_count(k + 1);
    for _ in 1..n {
        acc = acc * ratio.clone();
    }
    Ok(acc)
}

/// Leading factor of the lower-tail bound on the window count with balanced
/// types: `exp(-m/(s+1) + t log(m/(t s)) + t + log(t+1))`.
pub fn lower_tail_bound<F: Float>(s: u64, m: u64, t: u64) -> Result<F> {
    ensure_param!(s >= 1 && t >= 1, "need s >= 1 and t >= 1");
    ensure_param!(t * s <= m, "t = {t} exceeds m/s = {m}/{s}");
    let f = |v: u64| F::from(v).expect("integer as float");
    let (s, m, t) = (f(s), f(m), f(t));
    Ok((-m / (s + F::one()) + t * (m / (t * s)).ln() + t + (t + F::one()).ln()).exp())
}

/// Outcome counts from listing every distinct arrangement of an urn.
///
/// Arrangements of type labels are enumerated once each; since every
/// labelled permutation maps to exactly `prod m_i!` of them, each is equally
/// likely.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub arrangements: u64,
    /// `window[m][j]`: arrangements with `j` type-0 labels in the first `m`.
    pub window: Vec<Vec<u64>>,
    /// Per-type counts preceding the first type-0 label.
    pub before_type0: HashMap<Vec<u64>, u64>,
}

impl Enumeration {
    pub fn window_probability<T: Scalar>(&self, m: usize, j: usize) -> T {
        let hits = self
            .window
            .get(m)
            .and_then(|r| r.get(j))
            .copied()
            .unwrap_or(0);
        T::from_count(hits) / T::from_count(self.arrangements)
    }

    pub fn before_type0_probability<T: Scalar>(&self, counts: &[u64]) -> T {
        let hits = self.before_type0.get(counts).copied().unwrap_or(0);
        T::from_count(hits) / T::from_count(self.arrangements)
    }
}

fn next_permutation(v: &mut [u8]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("successor exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Brute force over all arrangements; limited to
/// [`ENUMERATION_MAX_OBJECTS`] objects.
pub fn enumerate(spec: &UrnSpec) -> Result<Enumeration> {
    let total = spec.total();
    ensure_param!(
        total <= ENUMERATION_MAX_OBJECTS,
        "enumeration limited to {ENUMERATION_MAX_OBJECTS} objects"
    );
    let mut labels: Vec<u8> = spec
        .type_counts
        .iter()
        .enumerate()
        .flat_map(|(t, &c)| std::iter::repeat_n(t as u8, c as usize))
        .collect();
    let size = total as usize;
    let mut window = vec![vec![0u64; spec.m0() as usize + 1]; size + 1];
    let mut before_type0 = HashMap::new();
    let mut arrangements = 0;
    let mut prefix = vec![0u64; spec.s()];
    loop {
        arrangements += 1;
        let mut zeros = 0;
        window[0][0] += 1;
        for (pos, &l) in labels.iter().enumerate() {
            zeros += (l == 0) as usize;
            window[pos + 1][zeros] += 1;
        }
        prefix.iter_mut().for_each(|c| *c = 0);
        for &l in &labels {
            if l == 0 {
                break;
            }
            prefix[l as usize - 1] += 1;
        }
        *before_type0.entry(prefix.clone()).or_insert(0) += 1;
        if !next_permutation(&mut labels) {
            break;
        }
    }
    Ok(Enumeration {
        arrangements,
        window,
        before_type0,
    })
}

/// Every urn with at least two types and between 2 and `max_total` objects.
pub fn all_specs(max_total: u64) -> Vec<UrnSpec> {
    fn compositions(rest: u64, cur: &mut Vec<u64>, out: &mut Vec<UrnSpec>) {
        if rest == 0 {
            if cur.len() >= 2 {
                out.push(UrnSpec {
                    type_counts: cur.clone(),
                });
            }
            return;
        }
        for part in 1..=rest {
            cur.push(part);
            compositions(rest - part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for total in 2..=max_total {
        compositions(total, &mut Vec::new(), &mut out);
    }
    out
}

/// All count vectors `0 <= c_j <= m_j` for the non-zero types.
pub fn count_vectors(spec: &UrnSpec) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &m in &spec.type_counts[1..] {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=m).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;
    use num_traits::{One, Zero};

    fn q(n: i64, d: i64) -> Exact {
        Exact::new(n.into(), d.into())
    }

    fn spec(c: &[u64]) -> UrnSpec {
        UrnSpec::new(c.to_vec()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(UrnSpec::new(vec![3]).is_err());
        assert!(UrnSpec::new(vec![2, 0]).is_err());
        assert_eq!(spec(&[3, 2, 2]).total(), 7);
        assert_eq!(spec(&[3, 2, 2]).s(), 2);
    }

    #[test]
    fn window_pmf_examples() {
        // hypergeometric C(2,1) C(2,1) / C(4,2)
        assert_eq!(
            exact_first_window_pmf::<Exact>(&spec(&[2, 2]), 2, 1).unwrap(),
            q(2, 3)
        );
        assert!(exact_first_window_pmf::<Exact>(&spec(&[2, 2]), 0, 0)
            .unwrap()
            .is_one());
        assert!(exact_first_window_pmf::<Exact>(&spec(&[2, 2]), 2, 3).is_err());
        assert!(exact_first_window_pmf::<Exact>(&spec(&[2, 2]), 5, 0).is_err());
        let e = enumerate(&spec(&[3, 2, 2])).unwrap();
        assert_eq!(
            exact_first_window_pmf::<Exact>(&spec(&[3, 2, 2]), 2, 2).unwrap(),
            e.window_probability::<Exact>(2, 2)
        );
    }

    #[test]
    fn window_pmf_is_hypergeometric() {
        // independent route: C(m0, j) C(M - m0, m - j) / C(M, m)
        let s = spec(&[4, 3, 5]);
        for m in 0..=12u64 {
            for j in 0..=m.min(4) {
                let hyper = binomial::<Exact>(4, j) * binomial::<Exact>(8, m - j)
                    / binomial::<Exact>(12, m);
                assert_eq!(exact_first_window_pmf::<Exact>(&s, m, j).unwrap(), hyper);
            }
        }
    }

    #[test]
    fn before_type0_examples() {
        assert_eq!(
            exact_before_first_type0_pmf::<Exact>(&spec(&[1, 1]), &[0]).unwrap(),
            q(1, 2)
        );
        // (2/4) then (2/3)
        assert_eq!(
            exact_before_first_type0_pmf::<Exact>(&spec(&[2, 2]), &[1]).unwrap(),
            q(1, 3)
        );
        let s = spec(&[2, 2, 1]);
        let e = enumerate(&s).unwrap();
        assert_eq!(
            exact_before_first_type0_pmf::<Exact>(&s, &[1, 1]).unwrap(),
            e.before_type0_probability::<Exact>(&[1, 1])
        );
        assert!(exact_before_first_type0_pmf::<Exact>(&s, &[3, 0]).is_err());
        assert!(exact_before_first_type0_pmf::<Exact>(&s, &[1]).is_err());
    }

    #[test]
    fn negmulti_examples() {
        assert_eq!(negmulti_pmf::<Exact>(1, &[0]).unwrap(), q(1, 2));
        assert_eq!(negmulti_pmf::<Exact>(2, &[1, 0]).unwrap(), q(1, 9));
        let shell =
            negmulti_pmf::<Exact>(2, &[1, 0]).unwrap() + negmulti_pmf::<Exact>(2, &[0, 1]).unwrap();
        assert_eq!(shell, q(2, 9));
        assert!(negmulti_pmf::<Exact>(2, &[1]).is_err());
        assert!(negmulti_pmf::<Exact>(0, &[]).is_err());
    }

    #[test]
    fn negmulti_matches_draw_enumeration() {
        // i.i.d. uniform draws over k+1 symbols, stopping at symbol k
        let k = 2usize;
        for len in 1..=5u32 {
            let mut hits: HashMap<Vec<u64>, u64> = HashMap::new();
            let words = 3u64.pow(len - 1);
            for w in 0..words {
                let mut c = vec![0u64; k];
                let mut x = w;
                let mut ok = true;
                for _ in 0..len - 1 {
                    let sym = (x % 3) as usize;
                    x /= 3;
                    if sym == k {
                        ok = false;
                    } else {
                        c[sym] += 1;
                    }
                }
                if ok {
                    *hits.entry(c).or_insert(0) += 1;
                }
            }
            for (c, h) in hits {
                let expect = q(h as i64, 3i64.pow(len));
                assert_eq!(negmulti_pmf::<Exact>(k, &c).unwrap(), expect);
            }
        }
    }

    #[test]
    fn shell_sum_examples() {
        assert_eq!(negmulti_shell_sum::<Exact>(1, 1).unwrap(), q(1, 2));
        assert_eq!(negmulti_shell_sum::<Exact>(2, 2).unwrap(), q(2, 9));
        // brute-force composition sum for k = 3, n = 4
        let mut sum = Exact::zero();
        for a in 0..=3u64 {
            for b in 0..=3 - a {
                sum += negmulti_pmf::<Exact>(3, &[a, b, 3 - a - b]).unwrap();
            }
        }
        assert_eq!(negmulti_shell_sum::<Exact>(3, 4).unwrap(), sum);
    }

    #[test]
    fn shell_tail_beyond_four_squared() {
        for k in 1..=6usize {
            let cut = 4 * (k as u64 + 1).pow(2);
            let head = (1..=cut).fold(Exact::zero(), |acc, n| {
                acc + negmulti_shell_sum::<Exact>(k, n).unwrap()
            });
            let tail = Exact::one() - head;
            let closed = num_traits::pow(q(k as i64, k as i64 + 1), cut as usize);
            assert_eq!(tail, closed);
            let ln_tail = cut as f64 * (k as f64 / (k as f64 + 1.0)).ln();
            assert!(ln_tail <= -4.0 * (k as f64 + 1.0));
        }
    }

    #[test]
    fn tail_bound_values() {
        let v: f64 = lower_tail_bound(1, 4, 1).unwrap();
        assert!((v - (8.0f64).ln().exp() / std::f64::consts::E).abs() < 1e-12);
        assert!((v - 2.943_035_529_371_539).abs() < 1e-9);
        let w: f64 = lower_tail_bound(3, 30, 5).unwrap();
        let expect = (-7.5 + 5.0 * 2f64.ln() + 5.0 + 6f64.ln()).exp();
        assert!((w - expect).abs() < 1e-12 * expect);
        assert!(lower_tail_bound::<f64>(3, 30, 11).is_err());
        let f: f32 = lower_tail_bound(1, 4, 1).unwrap();
        assert!((f as f64 - v).abs() < 1e-5);
    }

    #[test]
    fn window_pmf_normalizes() {
        for s in all_specs(7) {
            for m in 0..=s.total() {
                let total = (0..=m.min(s.m0())).fold(Exact::zero(), |acc, j| {
                    acc + exact_first_window_pmf::<Exact>(&s, m, j).unwrap()
                });
                assert!(total.is_one(), "{s:?} m={m}");
            }
        }
    }

    #[test]
    fn float_path_tracks_exact() {
        let s = spec(&[5, 4, 3]);
        let e: Exact = exact_first_window_pmf(&s, 6, 2).unwrap();
        let f: f64 = exact_first_window_pmf(&s, 6, 2).unwrap();
        assert!((e.to_real() - f).abs() < 1e-14);
    }

    #[test]
    fn enumeration_counts() {
        let e = enumerate(&spec(&[2, 1, 1])).unwrap();
        assert_eq!(e.arrangements, 12);
        assert_eq!(e.before_type0.values().sum::<u64>(), 12);
        assert!(enumerate(&spec(&[5, 5])).is_err());
        assert_eq!(all_specs(3).len(), 1 + 3);
        assert_eq!(count_vectors(&spec(&[1, 2, 1])).len(), 6);
    }

    #[test]
    fn next_permutation_lists_multiset_once() {
        let mut v = vec![0u8, 0, 1, 2];
        let mut n = 1;
        while next_permutation(&mut v) {
            n += 1;
        }
        assert_eq!(n, 12);
    }
}
