//! Scalar abstraction: every numerical module is generic over a floating
//! point type implementing [`Scalar`]. `f32` and `f64` are provided; the
//! crate-root aliases pin `f64` for the lab pipeline.

use ndarray::LinalgScalar;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

/// Floating point scalar usable throughout the crate.
///
/// The two random constructors route all randomness through the type itself
/// so generic code never needs `rand` distribution bounds of its own.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + FromStr
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from the half-open unit interval [0, 1).
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

/// Lift an `f64` constant into the working scalar type.
#[inline]
pub fn cst<S: Scalar>(v: f64) -> S {
    S::from_f64(v).expect("finite constant must be representable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constants_lift_to_both_widths() {
        assert_eq!(cst::<f64>(0.5), 0.5);
        assert_eq!(cst::<f32>(0.5), 0.5f32);
    }

    #[test]
    fn normal_draws_are_seed_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..32 {
            let x: f64 = Scalar::standard_normal(&mut a);
            let y: f64 = Scalar::standard_normal(&mut b);
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn unit_uniform_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let u: f64 = Scalar::unit_uniform(&mut rng);
            assert!((0.0..1.0).contains(&u));
        }
    }
}
