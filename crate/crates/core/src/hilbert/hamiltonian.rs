use std::sync::Arc;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::StateVector;
use crate::error::{Error, Result};
use crate::num::{self, cre, phase_neg, Real};

/// Which digits of a product register a tensor factor occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// Least significant digits (the primary register).
    Low,
    /// Most significant digits (the secondary register).
    High,
}

/// Matrix-free projector-structured Hamiltonians.
#[derive(Clone, Debug)]
pub enum StructuredHamiltonian<R> {
    /// `I - sum_{m in marked} |m><m|`.
    DiagonalMarked { dim: usize, marked: Arc<[usize]> },
    /// `I - |s><s|` with `|s>` the uniform superposition of the register.
    RankOneUniform { dim: usize },
    /// `I - |phi><phi|` for an arbitrary normalized `|phi>`.
    RankOneProjector { state: Arc<StateVector<R>> },
    /// `inner (x) I` on a product register; `placement` says where `inner` sits.
    TensorExtended {
        inner: Arc<StructuredHamiltonian<R>>,
        placement: Placement,
        other_dim: usize,
    },
    /// `c_i H_i + c_f H_f`.
    Affine {
        c_i: R,
        h_i: Arc<StructuredHamiltonian<R>>,
        c_f: R,
        h_f: Arc<StructuredHamiltonian<R>>,
    },
    /// `U inner U^dagger` with `U` given as a replayable program.
    Conjugated {
        program: Arc<UnitaryProgram<R>>,
        inner: Arc<StructuredHamiltonian<R>>,
    },
}

type H<R> = StructuredHamiltonian<R>;

impl<R: Real> StructuredHamiltonian<R> {
    pub fn diagonal_marked(dim: usize, marked: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut m: Vec<usize> = marked.into_iter().collect();
        m.sort_unstable();
        m.dedup();
        if let Some(&bad) = m.iter().find(|&&i| i >= dim) {
            return Err(Error::input(format!(
                "marked index {bad} outside dimension {dim}"
            )));
        }
        Ok(H::DiagonalMarked {
            dim,
            marked: m.into(),
        })
    }

    pub fn rank_one_uniform(dim: usize) -> Self {
        H::RankOneUniform { dim }
    }

    pub fn rank_one_projector(state: StateVector<R>) -> Self {
        H::RankOneProjector {
            state: Arc::new(state),
        }
    }

    pub fn tensor_extended(inner: Self, placement: Placement, other_dim: usize) -> Self {
        H::TensorExtended {
            inner: Arc::new(inner),
            placement,
            other_dim,
        }
    }

    pub fn affine(c_i: R, h_i: Self, c_f: R, h_f: Self) -> Result<Self> {
        if h_i.dim() != h_f.dim() {
            return Err(Error::input(format!(
                "affine combination of dimensions {} and {}",
                h_i.dim(),
                h_f.dim()
            )));
        }
        Ok(H::Affine {
            c_i,
            h_i: Arc::new(h_i),
            c_f,
            h_f: Arc::new(h_f),
        })
    }

    /// `(1 - s) H_i + s H_f`.
    pub fn interpolate(h_i: &Self, h_f: &Self, s: R) -> Result<Self> {
        Self::affine(R::one() - s, h_i.clone(), s, h_f.clone())
    }

    pub fn conjugated(program: Arc<UnitaryProgram<R>>, inner: Self) -> Result<Self> {
        if program.dim() != inner.dim() {
            return Err(Error::input(format!(
                "program acts on dimension {}, Hamiltonian on {}",
                program.dim(),
                inner.dim()
            )));
        }
        Ok(H::Conjugated {
            program,
            inner: Arc::new(inner),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            H::DiagonalMarked { dim, .. } | H::RankOneUniform { dim } => *dim,
            H::RankOneProjector { state } => state.dim(),
            H::TensorExtended { inner, other_dim, .. } => inner.dim() * other_dim,
            H::Affine { h_i, .. } => h_i.dim(),
            H::Conjugated { inner, .. } => inner.dim(),
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::input(format!(
                "vector of length {len} for an operator of dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Matrix-free `H v`.
    pub fn apply(&self, v: &[Complex<R>]) -> Result<Vec<Complex<R>>> {
        self.check_dim(v.len())?;
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &[Complex<R>]) -> Vec<Complex<R>> {
        match self {
            H::DiagonalMarked { marked, .. } => {
                let mut out = v.to_vec();
                for &m in marked.iter() {
                    out[m] = num::czero();
                }
                out
            }
            H::RankOneUniform { dim } => {
                let mean = v.iter().fold(num::czero::<R>(), |a, z| a + *z) / cre(R::from_usize_lossy(*dim));
                v.iter().map(|z| z - mean).collect()
            }
            H::RankOneProjector { state } => {
                let phi = state.amplitudes();
                let c = num::dot(phi, v);
                let mut out = v.to_vec();
                num::axpy(-c, phi, &mut out);
                out
            }
            H::TensorExtended {
                inner,
                placement,
                other_dim,
            } => {
                let mut out = vec![num::czero(); v.len()];
                for_each_slice(inner.dim(), *placement, *other_dim, v, &mut out, |src, dst| {
                    dst.copy_from_slice(&inner.apply_unchecked(src));
                });
                out
            }
            H::Affine { c_i, h_i, c_f, h_f } => {
                let mut out = h_i.apply_unchecked(v);
                num::scale(cre(*c_i), &mut out);
                num::axpy(cre(*c_f), &h_f.apply_unchecked(v), &mut out);
                out
            }
            H::Conjugated { program, inner } => {
                let mut w = v.to_vec();
                program.apply_inverse(&mut w);
                let mut w = inner.apply_unchecked(&w);
                program.apply_forward(&mut w);
                w
            }
        }
    }

    /// Diagonal entries, when the operator is diagonal in the computational basis.
    pub fn diagonal(&self) -> Option<Vec<R>> {
        match self {
            H::DiagonalMarked { dim, marked } => {
                let mut d = vec![R::one(); *dim];
                for &m in marked.iter() {
                    d[m] = R::zero();
                }
                Some(d)
            }
            H::TensorExtended {
                inner,
                placement,
                other_dim,
            } => {
                let inner_d = inner.diagonal()?;
                let n = inner_d.len();
                let total = n * other_dim;
                Some(
                    (0..total)
                        .map(|idx| match placement {
                            Placement::Low => inner_d[idx % n],
                            Placement::High => inner_d[idx / other_dim],
                        })
                        .collect(),
                )
            }
            H::Affine { c_i, h_i, c_f, h_f } => {
                let a = h_i.diagonal()?;
                let b = h_f.diagonal()?;
                Some(a.iter().zip(&b).map(|(&x, &y)| *c_i * x + *c_f * y).collect())
            }
            _ => None,
        }
    }

    /// Whether `exp_in_place` has a closed form for this operator.
    pub fn is_exponentiable(&self) -> bool {
        match self {
            H::DiagonalMarked { .. } | H::RankOneUniform { .. } | H::RankOneProjector { .. } => true,
            H::TensorExtended { inner, .. } | H::Conjugated { inner, .. } => inner.is_exponentiable(),
            H::Affine { .. } => self.diagonal().is_some(),
        }
    }

    /// `v <- exp(-i theta H) v` in closed form.
    pub fn exp_in_place(&self, theta: R, v: &mut [Complex<R>]) -> Result<()> {
        self.check_dim(v.len())?;
        if !self.is_exponentiable() {
            return Err(Error::contract(
                "closed-form exponential needs a projector, rank-one, diagonal, tensor-extended or conjugated form",
            ));
        }
        if theta != R::zero() {
            self.exp_unchecked(theta, v);
        }
        Ok(())
    }

    fn exp_unchecked(&self, theta: R, v: &mut [Complex<R>]) {
        let ph = phase_neg(theta);
        match self {
            H::DiagonalMarked { marked, .. } => {
                let kept: Vec<Complex<R>> = marked.iter().map(|&m| v[m]).collect();
                num::scale(ph, v);
                for (&m, z) in marked.iter().zip(kept) {
                    v[m] = z;
                }
            }
            H::RankOneUniform { dim } => {
                let mean = v.iter().fold(num::czero::<R>(), |a, z| a + *z) / cre(R::from_usize_lossy(*dim));
                let shift = (cre(R::one()) - ph) * mean;
                for z in v.iter_mut() {
                    *z = ph * *z + shift;
                }
            }
            H::RankOneProjector { state } => {
                let phi = state.amplitudes();
                let c = num::dot(phi, v);
                num::scale(ph, v);
                num::axpy((cre(R::one()) - ph) * c, phi, v);
            }
            H::TensorExtended {
                inner,
                placement,
                other_dim,
            } => {
                let n = inner.dim();
                match placement {
                    Placement::Low => {
                        for chunk in v.chunks_mut(n) {
                            inner.exp_unchecked(theta, chunk);
                        }
                    }
                    Placement::High => {
                        let mut buf = vec![num::czero(); n];
                        for lo in 0..*other_dim {
                            for (j, b) in buf.iter_mut().enumerate() {
                                *b = v[lo + other_dim * j];
                            }
                            inner.exp_unchecked(theta, &mut buf);
                            for (j, b) in buf.iter().enumerate() {
                                v[lo + other_dim * j] = *b;
                            }
                        }
                    }
                }
            }
            H::Affine { .. } => {
                let diag = self.diagonal().expect("checked by is_exponentiable");
                for (z, e) in v.iter_mut().zip(diag) {
                    *z *= phase_neg(theta * e);
                }
            }
            H::Conjugated { program, inner } => {
                program.apply_inverse(v);
                inner.exp_unchecked(theta, v);
                program.apply_forward(v);
            }
        }
    }

    /// `exp(-i theta H) |v>`.
    pub fn exact_exponential(&self, theta: R, v: &StateVector<R>) -> Result<StateVector<R>> {
        let mut amps = v.amplitudes().to_vec();
        self.exp_in_place(theta, &mut amps)?;
        Ok(StateVector::from_unitary_image(amps))
    }

    /// Squared norm of the projection of `v` onto the lowest eigenspace,
    /// for the forms whose ground space is known structurally.
    pub fn ground_mass(&self, v: &[Complex<R>]) -> Result<R> {
        self.check_dim(v.len())?;
        if let Some(diag) = self.diagonal() {
            let min = diag
                .iter()
                .copied()
                .fold(R::infinity(), |m, x| if x < m { x } else { m });
            let tol = R::tolerance(1e-9);
            return Ok(diag
                .iter()
                .zip(v)
                .filter(|(&e, _)| e <= min + tol)
                .fold(R::zero(), |acc, (_, z)| acc + z.norm_sqr()));
        }
        match self {
            H::RankOneUniform { dim } => {
                let sum = v.iter().fold(num::czero::<R>(), |a, z| a + *z);
                Ok(sum.norm_sqr() / R::from_usize_lossy(*dim))
            }
            H::RankOneProjector { state } => Ok(num::dot(state.amplitudes(), v).norm_sqr()),
            H::TensorExtended {
                inner,
                placement,
                other_dim,
            } => {
                let mut total = R::zero();
                let mut dummy = vec![num::czero(); v.len()];
                let mut err = None;
                for_each_slice(
                    inner.dim(),
                    *placement,
                    *other_dim,
                    v,
                    &mut dummy,
                    |src, _| match inner.ground_mass(src) {
                        Ok(m) => total += m,
                        Err(e) => err = Some(e),
                    },
                );
                match err {
                    Some(e) => Err(e),
                    None => Ok(total),
                }
            }
            H::Conjugated { program, inner } => {
                let mut w = v.to_vec();
                program.apply_inverse(&mut w);
                inner.ground_mass(&w)
            }
            _ => Err(Error::contract(
                "ground space of a general affine combination is not structural",
            )),
        }
    }
}

/// Runs `f(src_slice, dst_slice)` over every slice of a product register on
/// which a factor of dimension `n` acts.
fn for_each_slice<R: Real, F>(
    n: usize,
    placement: Placement,
    other_dim: usize,
    src: &[Complex<R>],
    dst: &mut [Complex<R>],
    mut f: F,
) where
    F: FnMut(&[Complex<R>], &mut [Complex<R>]),
{
    match placement {
        Placement::Low => {
            for (s, d) in src.chunks(n).zip(dst.chunks_mut(n)) {
                f(s, d);
            }
        }
        Placement::High => {
            let mut sbuf = vec![num::czero(); n];
            let mut dbuf = vec![num::czero(); n];
            for lo in 0..other_dim {
                for (j, b) in sbuf.iter_mut().enumerate() {
                    *b = src[lo + other_dim * j];
                }
                f(&sbuf, &mut dbuf);
                for (j, b) in dbuf.iter().enumerate() {
                    dst[lo + other_dim * j] = *b;
                }
            }
        }
    }
}

/// One factor `exp(-i angle H)` of a unitary program.
#[derive(Clone, Debug)]
pub struct ProgramStep<R> {
    pub hamiltonian: Arc<StructuredHamiltonian<R>>,
    pub angle: R,
}

/// An ordered product of closed-form exponentials, replayable forwards
/// (`U`) and backwards with negated angles (`U^dagger`).
#[derive(Clone, Debug)]
pub struct UnitaryProgram<R> {
    dim: usize,
    steps: Vec<ProgramStep<R>>,
}

impl<R: Real> UnitaryProgram<R> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            steps: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[ProgramStep<R>] {
        &self.steps
    }

    /// Appends `exp(-i angle H)`; it acts after every earlier step.
    pub fn push(&mut self, hamiltonian: Arc<StructuredHamiltonian<R>>, angle: R) -> Result<()> {
        if hamiltonian.dim() != self.dim {
            return Err(Error::input(format!(
                "step of dimension {} in a program of dimension {}",
                hamiltonian.dim(),
                self.dim
            )));
        }
        if !hamiltonian.is_exponentiable() {
            return Err(Error::contract("program steps need closed-form exponentials"));
        }
        self.steps.push(ProgramStep { hamiltonian, angle });
        Ok(())
    }

    pub fn apply_forward(&self, v: &mut [Complex<R>]) {
        for step in &self.steps {
            step.hamiltonian.exp_unchecked(step.angle, v);
        }
    }

    pub fn apply_inverse(&self, v: &mut [Complex<R>]) {
        for step in self.steps.iter().rev() {
            step.hamiltonian.exp_unchecked(-step.angle, v);
        }
    }

    pub fn forward(&self, v: &StateVector<R>) -> Result<StateVector<R>> {
        if v.dim() != self.dim {
            return Err(Error::input("state dimension does not match the program"));
        }
        let mut amps = v.amplitudes().to_vec();
        self.apply_forward(&mut amps);
        Ok(StateVector::from_unitary_image(amps))
    }

    pub fn inverse(&self, v: &StateVector<R>) -> Result<StateVector<R>> {
        if v.dim() != self.dim {
            return Err(Error::input("state dimension does not match the program"));
        }
        let mut amps = v.amplitudes().to_vec();
        self.apply_inverse(&mut amps);
        Ok(StateVector::from_unitary_image(amps))
    }
}
