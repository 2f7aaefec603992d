//! Scalar abstraction shared by every numeric module.
//!
//! All state vectors, Hamiltonians and schedules are generic over a real
//! scalar `R: Real`; amplitudes are `Complex<R>`. `f64` is the working
//! precision, `f32` is supported for cheap exploratory runs.

use std::fmt;

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Complex amplitude over the scalar `R`.
pub type Amplitude<R> = Complex<R>;

/// Real scalar usable throughout the crate.
pub trait Real:
    RealField + Copy + Default + FromPrimitive + ToPrimitive + fmt::Display + fmt::LowerExp
{
    /// Positive infinity.
    fn infinity() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance of at least `base`, widened for low-precision scalars.
    #[inline]
    fn tolerance(base: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(256.0);
        let base = Self::lit(base);
        if base > floor {
            base
        } else {
            floor
        }
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }
}

impl Real for f32 {
    fn infinity() -> Self {
        f32::INFINITY
    }
}

impl Real for f64 {
    fn infinity() -> Self {
        f64::INFINITY
    }
}

/// `e^{-i theta}`.
#[inline]
pub fn phase_neg<R: Real>(theta: R) -> Complex<R> {
    Complex::new(theta.cos(), -theta.sin())
}

/// `e^{i theta}`.
#[inline]
pub fn phase<R: Real>(theta: R) -> Complex<R> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn czero<R: Real>() -> Complex<R> {
    Complex::new(R::zero(), R::zero())
}

#[inline]
pub fn cre<R: Real>(x: R) -> Complex<R> {
    Complex::new(x, R::zero())
}

/// Argument of a complex number in `(-pi, pi]`.
#[inline]
pub fn arg<R: Real>(z: Complex<R>) -> R {
    z.im.atan2(z.re)
}

/// `|z|`.
#[inline]
pub fn modulus<R: Real>(z: Complex<R>) -> R {
    z.norm_sqr().sqrt()
}

/// Conjugated inner product `<a|b>`.
pub fn dot<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> Complex<R> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm_sqr<R: Real>(v: &[Complex<R>]) -> R {
    v.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr())
}

/// `y += alpha * x`.
pub fn axpy<R: Real>(alpha: Complex<R>, x: &[Complex<R>], y: &mut [Complex<R>]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale<R: Real>(alpha: Complex<R>, v: &mut [Complex<R>]) {
    for z in v {
        *z *= alpha;
    }
}

/// Largest component-wise distance `max_k |a_k - b_k|`.
pub fn max_abs_diff<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> R {
    a.iter()
        .zip(b)
        .map(|(x, y)| modulus(*x - *y))
        .fold(R::zero(), |m, x| if x > m { x } else { m })
}

/// Euclidean distance `||a - b||`.
pub fn distance<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> R {
    a.iter()
        .zip(b)
        .fold(R::zero(), |acc, (x, y)| acc + (*x - *y).norm_sqr())
        .sqrt()
}
