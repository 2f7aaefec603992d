//! Smallest subspaces invariant under a Hamiltonian pair.
//!
//! Every interpolation `(1 - s) H_i + s H_f`, every factor exponential and
//! every product of them maps the closure of a vector under `{H_i, H_f}`
//! into itself. For the projector families used here these closures have
//! dimension two to four, so exact evolution and spectra reduce to tiny
//! dense problems.

use nalgebra::{Complex, DVector};

use super::dense::CMatrix;
use super::StructuredHamiltonian;
use crate::error::{Error, Result};
use crate::num::{self, cre, Real};

/// Largest closure dimension accepted before giving up.
pub const SECTOR_CAP: usize = 512;

const CLOSURE_TOL: f64 = 1e-10;

/// Orthonormal basis of an invariant subspace with both Hamiltonians
/// projected onto it.
#[derive(Clone, Debug)]
pub struct InvariantSubspace<R> {
    basis: Vec<Vec<Complex<R>>>,
    h_i: CMatrix<R>,
    h_f: CMatrix<R>,
}

fn orthogonalize<R: Real>(w: &mut [Complex<R>], against: &[Vec<Complex<R>>]) {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for q in against {
            let c = num::dot(q, w);
            num::axpy(-c, q, w);
        }
    }
}

impl<R: Real> InvariantSubspace<R> {
    /// Closure of `seed` under `h_i` and `h_f`.
    pub fn closure(
        h_i: &StructuredHamiltonian<R>,
        h_f: &StructuredHamiltonian<R>,
        seed: &[Complex<R>],
    ) -> Result<Self> {
        Self::closure_capped(h_i, h_f, seed, SECTOR_CAP)
    }

    pub fn closure_capped(
        h_i: &StructuredHamiltonian<R>,
        h_f: &StructuredHamiltonian<R>,
        seed: &[Complex<R>],
        cap: usize,
    ) -> Result<Self> {
        if h_i.dim() != h_f.dim() || seed.len() != h_i.dim() {
            return Err(Error::input(
                "closure needs operators and seed of equal dimension",
            ));
        }
        let tol = R::tolerance(CLOSURE_TOL);
        let n0 = num::norm_sqr(seed).sqrt();
        if !(n0 > tol) {
            return Err(Error::input("closure seed is zero"));
        }
        let mut first = seed.to_vec();
        num::scale(cre(R::one() / n0), &mut first);
        let mut basis = vec![first];
        let mut hi_cols: Vec<Vec<Complex<R>>> = Vec::new();
        let mut hf_cols: Vec<Vec<Complex<R>>> = Vec::new();
        let mut next = 0;
        while next < basis.len() {
            let hi_q = h_i.apply_unchecked(&basis[next]);
            let hf_q = h_f.apply_unchecked(&basis[next]);
            for image in [&hi_q, &hf_q] {
                let mut w = image.clone();
                orthogonalize(&mut w, &basis);
                let nw = num::norm_sqr(&w).sqrt();
                if nw > tol {
                    if basis.len() >= cap {
                        return Err(Error::resource(format!(
                            "invariant subspace exceeds {cap} dimensions"
                        )));
                    }
                    num::scale(cre(R::one() / nw), &mut w);
                    basis.push(w);
                }
            }
            hi_cols.push(hi_q);
            hf_cols.push(hf_q);
            next += 1;
        }
        let project = |cols: &[Vec<Complex<R>>]| {
            let k = basis.len();
            CMatrix::from_fn(k, k, |a, b| num::dot(&basis[a], &cols[b]))
        };
        let h_i_k = project(&hi_cols);
        let h_f_k = project(&hf_cols);
        Ok(Self {
            basis,
            h_i: h_i_k,
            h_f: h_f_k,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Complex<R>>] {
        &self.basis
    }

    pub fn h_i(&self) -> &CMatrix<R> {
        &self.h_i
    }

    pub fn h_f(&self) -> &CMatrix<R> {
        &self.h_f
    }

    /// Projected `(1 - s) H_i + s H_f`.
    pub fn hamiltonian_at(&self, s: R) -> CMatrix<R> {
        &self.h_i * cre(R::one() - s) + &self.h_f * cre(s)
    }

    /// Coordinates `Q^dagger v`.
    pub fn restrict(&self, v: &[Complex<R>]) -> DVector<Complex<R>> {
        DVector::from_iterator(self.dim(), self.basis.iter().map(|q| num::dot(q, v)))
    }

    /// Embeds coordinates back into the full register.
    pub fn lift(&self, c: &DVector<Complex<R>>) -> Vec<Complex<R>> {
        let n = self.basis[0].len();
        let mut out = vec![num::czero(); n];
        for (q, &ci) in self.basis.iter().zip(c.iter()) {
            num::axpy(ci, q, &mut out);
        }
        out
    }

    /// Fraction of `v`'s norm lying outside the subspace.
    pub fn leakage(&self, v: &[Complex<R>]) -> R {
        let inside = self.restrict(v).norm_squared();
        let total = num::norm_sqr(v);
        let out = total - inside;
        if out > R::zero() {
            out.sqrt()
        } else {
            R::zero()
        }
    }
}

/// Splits the whole register into mutually orthogonal invariant subspaces.
pub fn decompose<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
) -> Result<Vec<InvariantSubspace<R>>> {
    if h_i.dim() != h_f.dim() {
        return Err(Error::input("decomposition needs operators of equal dimension"));
    }
    let n = h_i.dim();
    let mut covered = vec![R::zero(); n];
    let mut blocks: Vec<InvariantSubspace<R>> = Vec::new();
    let threshold = R::tolerance(1e-8);
    for j in 0..n {
        if R::one() - covered[j] <= threshold {
            continue;
        }
        // the seed is e_j, so its overlaps are single components
        let mut seed = vec![num::czero(); n];
        seed[j] = cre(R::one());
        for q in blocks.iter().flat_map(|b| &b.basis) {
            let c = q[j].conj();
            if c != num::czero() {
                num::axpy(-c, q, &mut seed);
            }
        }
        if covered[j] > R::lit(0.5) {
            for block in &blocks {
                orthogonalize(&mut seed, &block.basis);
            }
        }
        let block = InvariantSubspace::closure(h_i, h_f, &seed)?;
        for q in &block.basis {
            for (cv, z) in covered.iter_mut().zip(q) {
                *cv += z.norm_sqr();
            }
        }
        blocks.push(block);
    }
    Ok(blocks)
}
