use nalgebra::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::num::{self, cre, Real};

/// Largest register handled by matrix-free routines (`2^24` amplitudes).
pub const MATRIX_FREE_CAP: usize = 1 << 24;

/// A normalized complex amplitude vector over `d^n` basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<R> {
    amps: Vec<Complex<R>>,
}

impl<R: Real> StateVector<R> {
    /// Equal superposition over `d^n` basis states.
    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        let dim = u32::try_from(n)
            .ok()
            .and_then(|n| d.checked_pow(n))
            .filter(|&dim| dim <= MATRIX_FREE_CAP)
            .ok_or_else(|| Error::resource(format!("register {d}^{n} exceeds cap {MATRIX_FREE_CAP}")))?;
        Ok(Self::uniform_dim(dim))
    }

    pub fn uniform_dim(dim: usize) -> Self {
        let amp = cre(R::one() / R::from_usize_lossy(dim).sqrt());
        Self { amps: vec![amp; dim] }
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![num::czero(); dim];
        amps[index] = cre(R::one());
        Self { amps }
    }

    /// Uniform superposition over the given basis indices.
    pub fn uniform_over(dim: usize, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::input("uniform superposition over an empty set"));
        }
        let mut amps = vec![num::czero(); dim];
        let amp = cre(R::one() / R::from_usize_lossy(indices.len()).sqrt());
        for &i in indices {
            if i >= dim {
                return Err(Error::input(format!("basis index {i} outside dimension {dim}")));
            }
            amps[i] = amp;
        }
        Ok(Self { amps })
    }

    /// Normalizes `amps`; fails on the zero vector.
    pub fn from_amplitudes(mut amps: Vec<Complex<R>>) -> Result<Self> {
        let n = num::norm_sqr(&amps).sqrt();
        if !(n > R::zero()) {
            return Err(Error::input("cannot normalize a zero vector"));
        }
        num::scale(cre(R::one() / n), &mut amps);
        Ok(Self { amps })
    }

    /// Wraps amplitudes produced by a unitary map without renormalizing.
    pub(crate) fn from_unitary_image(amps: Vec<Complex<R>>) -> Self {
        Self { amps }
    }

    /// Haar-like random state from Gaussian components.
    pub fn random<G: Rng + ?Sized>(dim: usize, rng: &mut G) -> Self {
        let amps = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(R::lit(re), R::lit(im))
            })
            .collect();
        Self::from_amplitudes(amps).expect("gaussian vector is nonzero")
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<R>] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<R>> {
        self.amps
    }

    pub fn norm(&self) -> R {
        num::norm_sqr(&self.amps).sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex<R> {
        num::dot(&self.amps, &other.amps)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> R {
        self.inner(other).norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<R> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Total probability on the given basis indices.
    pub fn mass_on(&self, indices: &[usize]) -> R {
        indices
            .iter()
            .fold(R::zero(), |acc, &i| acc + self.amps[i].norm_sqr())
    }

    /// `low (x) high` with the low factor on the least significant digits.
    pub fn tensor(low: &Self, high: &Self) -> Self {
        let dl = low.dim();
        let mut amps = vec![num::czero(); dl * high.dim()];
        for (h, &bh) in high.amps.iter().enumerate() {
            for (l, &al) in low.amps.iter().enumerate() {
                amps[l + dl * h] = al * bh;
            }
        }
        Self { amps }
    }

    pub fn distance(&self, other: &Self) -> R {
        num::distance(&self.amps, &other.amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        let s = StateVector::<f64>::uniform(2, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s
            .amplitudes()
            .iter()
            .all(|z| (z.re - h).abs() < 1e-15 && z.im == 0.0));
        let s = StateVector::<f64>::uniform(2, 3).unwrap();
        assert!(s
            .amplitudes()
            .iter()
            .all(|z| (z.re - 2f64.powf(-1.5)).abs() < 1e-15));
        assert!((s.norm() - 1.0).abs() < 1e-15);
        let s = StateVector::<f64>::uniform(3, 2).unwrap();
        assert_eq!(s.dim(), 9);
        assert!(s.amplitudes().iter().all(|z| (z.re - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn uniform_cap() {
        assert!(matches!(
            StateVector::<f64>::uniform(2, 25),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn tensor_layout_low_digits_first() {
        let low = StateVector::<f64>::basis(2, 1);
        let high = StateVector::<f64>::basis(4, 2);
        let t = StateVector::tensor(&low, &high);
        assert_eq!(t.probabilities()[1 + 2 * 2], 1.0);
    }
}
