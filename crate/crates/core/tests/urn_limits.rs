use bagraph::urn::{exact_before_first_type0_pmf, exact_first_window_pmf, negmulti_pmf};
use bagraph::{Exact, UrnSpec};
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn count_vectors_up_to(s: usize, max_sum: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..s {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u64>| {
                let used: u64 = v.iter().sum();
                (0..=max_sum - used).map(move |i| {
                    let mut w = v.clone();
                    w.push(i);
                    w
                })
            })
            .collect();
    }
    out
}

#[test]
fn balanced_urn_approaches_negative_multinomial() {
    for s in [1usize, 2, 3] {
        let mut previous: Option<Vec<f64>> = None;
        for m_c in [100u64, 1_000, 10_000] {
            let spec = UrnSpec::balanced(s, m_c).unwrap();
            let gaps: Vec<f64> = count_vectors_up_to(s, 5)
                .iter()
                .map(|c| {
                    let exact: Exact = exact_before_first_type0_pmf(&spec, c).unwrap();
                    let limit: Exact = negmulti_pmf(s, c).unwrap();
                    ((exact / limit).to_f64().unwrap() - 1.0).abs()
                })
                .collect();
            if m_c == 10_000 {
                assert!(gaps.iter().all(|g| *g < 0.01), "s={s}: {gaps:?}");
            }
            if let Some(prev) = &previous {
                assert!(gaps.iter().zip(prev).all(|(g, p)| g <= p));
            }
            previous = Some(gaps);
        }
    }
}

proptest! {
    #[test]
    fn window_law_normalizes(counts in prop::collection::vec(1u64..6, 2..5), frac in 0.0f64..=1.0) {
        let spec = UrnSpec::new(counts).unwrap();
        let m = (spec.total() as f64 * frac) as u64;
        let total = (0..=m.min(spec.m0()))
            .map(|j| exact_first_window_pmf::<Exact>(&spec, m, j).unwrap())
            .fold(Exact::zero(), |a, p| a + p);
        prop_assert!(total.is_one());
        let f: f64 = exact_first_window_pmf(&spec, m, 0).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn before_type0_law_normalizes(counts in prop::collection::vec(1u64..4, 2..4)) {
        let spec = UrnSpec::new(counts).unwrap();
        let rest = &spec.type_counts()[1..];
        let total = count_vectors_up_to(rest.len(), rest.iter().sum())
            .into_iter()
            .filter(|c| c.iter().zip(rest).all(|(i, m)| i <= m))
            .map(|c| exact_before_first_type0_pmf::<Exact>(&spec, &c).unwrap())
            .fold(Exact::zero(), |a, p| a + p);
        prop_assert!(total.is_one());
    }
}
