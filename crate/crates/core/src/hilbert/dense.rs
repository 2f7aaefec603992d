//! Dense expansions and small-matrix spectral helpers.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use super::StructuredHamiltonian;
use crate::error::{Error, Result};
use crate::num::{self, cre, phase_neg, Real};

/// Default largest dimension expanded densely (`2^12`).
pub const DENSE_CAP: usize = 1 << 12;

pub type CMatrix<R> = DMatrix<Complex<R>>;

/// Dense matrix of a structured Hamiltonian, built column by column from
/// the matrix-free action.
pub fn to_dense<R: Real>(h: &StructuredHamiltonian<R>) -> Result<CMatrix<R>> {
    to_dense_with_cap(h, DENSE_CAP)
}

pub fn to_dense_with_cap<R: Real>(h: &StructuredHamiltonian<R>, cap: usize) -> Result<CMatrix<R>> {
    let n = h.dim();
    if n > cap {
        return Err(Error::resource(format!(
            "dense expansion of dimension {n} exceeds cap {cap}"
        )));
    }
    let mut m = CMatrix::zeros(n, n);
    let mut e = vec![num::czero(); n];
    for j in 0..n {
        e[j] = cre(R::one());
        let col = h.apply_unchecked(&e);
        e[j] = num::czero();
        m.column_mut(j).copy_from_slice(&col);
    }
    Ok(m)
}

/// Largest singular value.
pub fn operator_norm<R: Real>(a: &CMatrix<R>) -> R {
    if a.is_empty() {
        return R::zero();
    }
    a.singular_values()
        .iter()
        .copied()
        .fold(R::zero(), |m, x| if x > m { x } else { m })
}

/// `AB - BA`.
pub fn commutator<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> CMatrix<R> {
    a * b - b * a
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
pub fn eigh<R: Real>(m: &CMatrix<R>) -> (Vec<R>, CMatrix<R>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // symmetrize to shed rounding asymmetry before the solver sees it
    let herm = (m + m.adjoint()) * cre(R::lit(0.5));
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `exp(-i theta M)` for Hermitian `M`.
pub fn hermitian_exp<R: Real>(m: &CMatrix<R>, theta: R) -> CMatrix<R> {
    if m.nrows() == 1 {
        return CMatrix::from_element(1, 1, phase_neg(theta * m[(0, 0)].re));
    }
    let (vals, vecs) = eigh(m);
    let mut scaled = vecs.clone();
    for (j, &lambda) in vals.iter().enumerate() {
        let ph = phase_neg(theta * lambda);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= ph;
        }
    }
    scaled * vecs.adjoint()
}

/// Lowest eigenvalue, first excited level and the coupling between them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelPair<R> {
    pub e0: R,
    /// `None` when the whole space is degenerate with the ground level.
    pub e1: Option<R>,
    /// Largest singular value of `dH` between the two eigenspaces.
    pub dmat: R,
    pub ground_multiplicity: usize,
}

/// Resolves the two lowest levels of `h`, grouping eigenvalues closer than
/// `tol` into degenerate eigenspaces.
pub fn level_pair<R: Real>(h: &CMatrix<R>, dh: &CMatrix<R>, tol: R) -> LevelPair<R> {
    let (vals, vecs) = eigh(h);
    let e0 = vals[0];
    let g_end = vals.iter().take_while(|&&v| v <= e0 + tol).count();
    if g_end == vals.len() {
        return LevelPair {
            e0,
            e1: None,
            dmat: R::zero(),
            ground_multiplicity: g_end,
        };
    }
    let e1 = vals[g_end];
    let x_end = g_end + vals[g_end..].iter().take_while(|&&v| v <= e1 + tol).count();
    let v0 = vecs.columns(0, g_end);
    let v1 = vecs.columns(g_end, x_end - g_end);
    let coupling = v1.adjoint() * dh * v0;
    LevelPair {
        e0,
        e1: Some(e1),
        dmat: operator_norm(&coupling),
        ground_multiplicity: g_end,
    }
}
