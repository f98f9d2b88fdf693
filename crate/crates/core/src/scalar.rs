use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// A field the exact evaluators can run in.
///
/// Implemented for `f32`, `f64` and [`crate::Exact`]. Only the big rational
/// gives exact answers; the float instances are for quick evaluation.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + FromPrimitive + ToPrimitive + Send + Sync
{
    fn from_count(v: u64) -> Self {
        Self::from_u64(v).expect("integer representable in scalar")
    }

    fn to_real(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Clone + Debug + PartialOrd + Num + FromPrimitive + ToPrimitive + Send + Sync
{
}

/// `C(n, r)` as a product of ratios, exact in rational scalars.
pub fn binomial<T: Scalar>(n: u64, r: u64) -> T {
    if r > n {
        return T::zero();
    }
    let r = r.min(n - r);
    let mut acc = T::one();
    for i in 1..=r {
        acc = acc * T::from_count(n - r + i) / T::from_count(i);
    }
    acc
}

/// Falling factorial `x (x-1) ... (x-len+1)`; zero once a factor hits zero.
pub fn falling<T: Scalar>(x: u64, len: u64) -> T {
    if len > x {
        return T::zero();
    }
    (0..len).fold(T::one(), |acc, l| acc * T::from_count(x - l))
}

pub fn factorial<T: Scalar>(x: u64) -> T {
    falling(x, x)
}

/// `base^-exp` for a positive integer base.
pub fn inv_pow<T: Scalar>(base: u64, exp: u64) -> T {
    let b = T::from_count(base);
    let mut acc = T::one();
    for _ in 0..exp {
        acc = acc / b.clone();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;
    use num_bigint::BigInt;

    #[test]
    fn binomial_matches_integer_binomial() {
        for n in 0..30u64 {
            for r in 0..=n {
                let exact: Exact = binomial(n, r);
                let int = num_integer::binomial(BigInt::from(n), BigInt::from(r));
                assert_eq!(exact, Exact::from_integer(int));
            }
        }
        assert_eq!(binomial::<f64>(3, 5), 0.0);
    }

    #[test]
    fn falling_hits_zero() {
        assert_eq!(falling::<Exact>(3, 4), Exact::from_integer(0.into()));
        assert_eq!(falling::<f64>(5, 2), 20.0);
        assert_eq!(factorial::<f64>(0), 1.0);
        assert_eq!(factorial::<f32>(5), 120.0);
    }

    #[test]
    fn inverse_powers() {
        let v: Exact = inv_pow(2, 10);
        assert_eq!(v, Exact::new(1.into(), 1024.into()));
    }
}
