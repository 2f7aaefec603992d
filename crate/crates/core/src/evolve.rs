//! Continuum reference propagation, the two-factor product discretization
//! and measured discretization errors.

use std::io::Write;

use nalgebra::{Complex, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::dense::{self, hermitian_exp, CMatrix};
use crate::hilbert::{
    decompose, InvariantSubspace, StateVector, StructuredHamiltonian, DENSE_CAP, MATRIX_FREE_CAP,
};
use crate::num::{cre, Real};
use crate::schedule::Schedule;

/// Reference substeps per discrete step when none are given.
pub const DEFAULT_SUBSTEP_FACTOR: usize = 64;

/// Largest dimension whose propagators are measured exactly.
pub const DENSE_MEASURE_CAP: usize = 1 << 10;

/// Random probe states used above [`DENSE_MEASURE_CAP`].
pub const ESTIMATE_SAMPLES: usize = 32;

const PROBE_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint<R> {
    pub step: usize,
    pub s: R,
    /// Weight of the state on the instantaneous ground level of `H(s_j)`.
    pub ground_fidelity: R,
}

#[derive(Clone, Debug)]
pub struct EvolutionResult<R> {
    pub final_state: StateVector<R>,
    /// Discrete steps (or reference substeps).
    pub steps: usize,
    pub total_time: R,
    /// Weight on the ground space of `H_f`.
    pub fidelity_to_ground: R,
    /// `s_j` actually used, one per step.
    pub s_values: Vec<R>,
    /// `| ||psi(T)|| - 1 |`.
    pub norm_error: R,
    pub trace: Vec<TracePoint<R>>,
}

impl<R: Real> EvolutionResult<R> {
    /// Writes `step,s,ground_fidelity` rows.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,s,ground_fidelity")?;
        for p in &self.trace {
            writeln!(w, "{},{},{}", p.step, p.s, p.ground_fidelity)?;
        }
        Ok(())
    }
}

/// Coordinates in which a pair of Hamiltonians is handled densely: either a
/// small invariant subspace or the whole register.
enum Frame<R: Real> {
    Sector(InvariantSubspace<R>),
    Full { h_i: CMatrix<R>, h_f: CMatrix<R> },
}

impl<R: Real> Frame<R> {
    fn build(
        h_i: &StructuredHamiltonian<R>,
        h_f: &StructuredHamiltonian<R>,
        v0: &[Complex<R>],
    ) -> Result<Self> {
        match InvariantSubspace::closure(h_i, h_f, v0) {
            Ok(sub) => Ok(Frame::Sector(sub)),
            Err(Error::Resource(_)) if h_i.dim() <= DENSE_CAP => Ok(Frame::Full {
                h_i: dense::to_dense(h_i)?,
                h_f: dense::to_dense(h_f)?,
            }),
            Err(e) => Err(e),
        }
    }

    fn pair(&self) -> (&CMatrix<R>, &CMatrix<R>) {
        match self {
            Frame::Sector(sub) => (sub.h_i(), sub.h_f()),
            Frame::Full { h_i, h_f } => (h_i, h_f),
        }
    }

    fn restrict(&self, v: &[Complex<R>]) -> DVector<Complex<R>> {
        match self {
            Frame::Sector(sub) => sub.restrict(v),
            Frame::Full { .. } => DVector::from_column_slice(v),
        }
    }

    fn lift(&self, c: &DVector<Complex<R>>) -> Vec<Complex<R>> {
        match self {
            Frame::Sector(sub) => sub.lift(c),
            Frame::Full { .. } => c.as_slice().to_vec(),
        }
    }
}

fn interp<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>, s: R) -> CMatrix<R> {
    a * cre(R::one() - s) + b * cre(s)
}

fn check_inputs<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
    v0: &StateVector<R>,
    steps: usize,
) -> Result<()> {
    if h_i.dim() != h_f.dim() || v0.dim() != h_i.dim() {
        return Err(Error::input(format!(
            "dimension mismatch: H_i {}, H_f {}, state {}",
            h_i.dim(),
            h_f.dim(),
            v0.dim()
        )));
    }
    if steps == 0 {
        return Err(Error::input("step count must be at least 1"));
    }
    if (v0.norm() - R::one()).abs() > R::tolerance(1e-10) {
        return Err(Error::input("initial state is not normalized"));
    }
    Ok(())
}

/// Fine piecewise-constant integration in frame coordinates, sampling `s`
/// at substep midpoints.
fn reference_coords<R: Real>(
    a: &CMatrix<R>,
    b: &CMatrix<R>,
    schedule: &Schedule<R>,
    substeps: usize,
    mut c: DVector<Complex<R>>,
) -> (DVector<Complex<R>>, Vec<R>) {
    let dt = schedule.total_time / R::from_usize_lossy(substeps);
    let half = R::lit(0.5);
    let mut s_values = Vec::with_capacity(substeps);
    for j in 0..substeps {
        let s = schedule.s_at(dt * (R::from_usize_lossy(j) + half));
        c = hermitian_exp(&interp(a, b, s), dt) * c;
        s_values.push(s);
    }
    (c, s_values)
}

/// Continuum-limit propagation of `v0` under `H(s(t))`.
///
/// Works inside the invariant subspace generated by `v0`, falling back to
/// the full dense register when that subspace is too large.
pub fn evolve_reference<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
    schedule: &Schedule<R>,
    substeps: usize,
    v0: &StateVector<R>,
) -> Result<EvolutionResult<R>> {
    check_inputs(h_i, h_f, v0, substeps)?;
    let frame = Frame::build(h_i, h_f, v0.amplitudes())?;
    let (a, b) = frame.pair();
    let (c, s_values) = reference_coords(a, b, schedule, substeps, frame.restrict(v0.amplitudes()));
    let amps = frame.lift(&c);
    finish(h_f, amps, substeps, schedule.total_time, s_values, Vec::new())
}

fn finish<R: Real>(
    h_f: &StructuredHamiltonian<R>,
    amps: Vec<Complex<R>>,
    steps: usize,
    total_time: R,
    s_values: Vec<R>,
    trace: Vec<TracePoint<R>>,
) -> Result<EvolutionResult<R>> {
    let state = StateVector::from_unitary_image(amps);
    let fidelity = h_f.ground_mass(state.amplitudes())?;
    Ok(EvolutionResult {
        norm_error: (state.norm() - R::one()).abs(),
        final_state: state,
        steps,
        total_time,
        fidelity_to_ground: fidelity,
        s_values,
        trace,
    })
}

/// One product-formula step: `exp(-i (1-s) H_i dT) exp(-i s H_f dT)`.
pub fn product_step<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
    s: R,
    dt: R,
    v: &mut [Complex<R>],
) -> Result<()> {
    h_f.exp_in_place(s * dt, v)?;
    h_i.exp_in_place((R::one() - s) * dt, v)
}

/// Applies `r` product-formula steps with `s_j = s(jT/r)`.
pub fn evolve_discretized<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
    schedule: &Schedule<R>,
    r: usize,
    v0: &StateVector<R>,
) -> Result<EvolutionResult<R>> {
    discretized(h_i, h_f, schedule, r, v0, false)
}

/// [`evolve_discretized`] that also records the instantaneous ground-level
/// weight after every step.
pub fn evolve_discretized_traced<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
    schedule: &Schedule<R>,
    r: usize,
    v0: &StateVector<R>,
) -> Result<EvolutionResult<R>> {
    discretized(h_i, h_f, schedule, r, v0, true)
}

fn discretized<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
    schedule: &Schedule<R>,
    r: usize,
    v0: &StateVector<R>,
    traced: bool,
) -> Result<EvolutionResult<R>> {
    check_inputs(h_i, h_f, v0, r)?;
    if !h_i.is_exponentiable() || !h_f.is_exponentiable() {
        return Err(Error::contract(
            "product steps need closed-form factor exponentials",
        ));
    }
    let frame = if traced {
        let f = Frame::build(h_i, h_f, v0.amplitudes())?;
        if matches!(f, Frame::Full { .. }) && h_i.dim() > DENSE_MEASURE_CAP {
            return Err(Error::resource(
                "trace needs a small invariant subspace or dim <= 2^10",
            ));
        }
        Some(f)
    } else {
        None
    };
    let dt = schedule.total_time / R::from_usize_lossy(r);
    let s_values = schedule.step_values(r);
    let mut v = v0.amplitudes().to_vec();
    let mut trace = Vec::new();
    for (j, &s) in s_values.iter().enumerate() {
        product_step(h_i, h_f, s, dt, &mut v)?;
        if let Some(frame) = &frame {
            let (a, b) = frame.pair();
            trace.push(TracePoint {
                step: j + 1,
                s,
                ground_fidelity: ground_weight(&interp(a, b, s), &frame.restrict(&v)),
            });
        }
    }
    finish(h_f, v, r, schedule.total_time, s_values, trace)
}

fn ground_weight<R: Real>(h: &CMatrix<R>, c: &DVector<Complex<R>>) -> R {
    let (vals, vecs) = dense::eigh(h);
    let tol = R::tolerance(crate::hilbert::DEGENERACY_TOL);
    let g = vals.iter().take_while(|&&v| v <= vals[0] + tol).count();
    (vecs.columns(0, g).adjoint() * c).norm_squared()
}

/// `(||H_f - H_i||, ||[H_i, H_f]||)` as maxima over the invariant blocks of
/// the pair, or from the dense operators when a block is too large.
pub fn pair_norms<R: Real>(h_i: &StructuredHamiltonian<R>, h_f: &StructuredHamiltonian<R>) -> Result<(R, R)> {
    if h_i.dim() > DENSE_MEASURE_CAP {
        return Err(Error::resource(format!(
            "pair norms limited to dimension {DENSE_MEASURE_CAP}, got {}",
            h_i.dim()
        )));
    }
    let mut dh = R::zero();
    let mut comm = R::zero();
    for (a, b) in block_frames(h_i, h_f)? {
        dh = dh.max(dense::operator_norm(&(&b - &a)));
        comm = comm.max(dense::operator_norm(&dense::commutator(&a, &b)));
    }
    Ok((dh, comm))
}

fn block_frames<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
) -> Result<Vec<(CMatrix<R>, CMatrix<R>)>> {
    match decompose(h_i, h_f) {
        Ok(blocks) => Ok(blocks
            .into_iter()
            .map(|b| (b.h_i().clone(), b.h_f().clone()))
            .collect()),
        Err(Error::Resource(_)) => Ok(vec![(dense::to_dense(h_i)?, dense::to_dense(h_f)?)]),
        Err(e) => Err(e),
    }
}

/// Bounds and measured sizes of both discretization errors.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ErrorBudget<R> {
    pub total_time: R,
    pub steps: usize,
    pub dh_norm: R,
    pub commutator_norm: R,
    /// `sqrt(2 (T/r) ||H_i - H_f||)`.
    pub piecewise_bound: R,
    /// `(T^2/r) ||[H_i, H_f]||`.
    pub trotter_bound_scale: R,
    /// `||U(T) - U'(T)||`.
    pub measured_piecewise: R,
    /// `||U'(T) - prod_j U''_j||`.
    pub measured_trotter: R,
    /// True when the measured values come from random probe states rather
    /// than full propagators.
    pub estimated: bool,
}

impl<R: Real> ErrorBudget<R> {
    pub fn piecewise_within_bound(&self) -> bool {
        self.measured_piecewise <= self.piecewise_bound
    }

    /// `measured_trotter / trotter_bound_scale`, the constant hidden in the
    /// product-formula bound.
    pub fn trotter_constant(&self) -> R {
        if self.trotter_bound_scale > R::zero() {
            self.measured_trotter / self.trotter_bound_scale
        } else if self.measured_trotter > R::tolerance(1e-12) {
            R::infinity()
        } else {
            R::zero()
        }
    }
}

/// Exact propagators `U(T)`, `U'(T)` and `prod U''_j` restricted to one
/// invariant frame.
struct Propagators<R: Real> {
    exact: CMatrix<R>,
    piecewise: CMatrix<R>,
    product: CMatrix<R>,
}

fn propagators<R: Real>(
    a: &CMatrix<R>,
    b: &CMatrix<R>,
    schedule: &Schedule<R>,
    r: usize,
    substeps: usize,
) -> Propagators<R> {
    let k = a.nrows();
    let id = CMatrix::<R>::identity(k, k);
    let dt = schedule.total_time / R::from_usize_lossy(r);
    let mut piecewise = id.clone();
    let mut product = id.clone();
    for s in schedule.step_values(r) {
        piecewise = hermitian_exp(&interp(a, b, s), dt) * piecewise;
        let step = hermitian_exp(a, (R::one() - s) * dt) * hermitian_exp(b, s * dt);
        product = step * product;
    }
    let exact = reference_matrix(a, b, schedule, substeps);
    Propagators {
        exact,
        piecewise,
        product,
    }
}

fn reference_matrix<R: Real>(
    a: &CMatrix<R>,
    b: &CMatrix<R>,
    schedule: &Schedule<R>,
    substeps: usize,
) -> CMatrix<R> {
    let k = a.nrows();
    let dt = schedule.total_time / R::from_usize_lossy(substeps);
    let half = R::lit(0.5);
    let mut u = CMatrix::<R>::identity(k, k);
    for j in 0..substeps {
        let s = schedule.s_at(dt * (R::from_usize_lossy(j) + half));
        u = hermitian_exp(&interp(a, b, s), dt) * u;
    }
    u
}

/// Both discretization bounds next to the measured errors.
///
/// Up to `2^10` dimensions the register is split into invariant subspaces
/// of the pair and all three propagators are formed exactly; the operator
/// norms are then maxima over blocks. Larger registers are probed with
/// [`ESTIMATE_SAMPLES`] seeded random states and flagged as estimates.
pub fn error_budget<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
    schedule: &Schedule<R>,
    r: usize,
) -> Result<ErrorBudget<R>> {
    error_budget_with(h_i, h_f, schedule, r, DEFAULT_SUBSTEP_FACTOR * r)
}

pub fn error_budget_with<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
    schedule: &Schedule<R>,
    r: usize,
    substeps: usize,
) -> Result<ErrorBudget<R>> {
    let dim = h_i.dim();
    if h_f.dim() != dim {
        return Err(Error::input("error budget needs operators of equal dimension"));
    }
    if r == 0 || substeps == 0 {
        return Err(Error::input("step counts must be at least 1"));
    }
    if dim > MATRIX_FREE_CAP {
        return Err(Error::resource(format!(
            "dimension {dim} exceeds cap {MATRIX_FREE_CAP}"
        )));
    }
    let mut dh_norm = R::zero();
    let mut comm_norm = R::zero();
    let mut piece = R::zero();
    let mut trot = R::zero();
    let max = |x: &mut R, y: R| {
        if y > *x {
            *x = y;
        }
    };
    let estimated = dim > DENSE_MEASURE_CAP;
    if !estimated {
        let mut seen: Vec<(CMatrix<R>, CMatrix<R>)> = Vec::new();
        for (a, b) in block_frames(h_i, h_f)? {
            // registers often repeat one block many times over
            if seen.iter().any(|(x, y)| *x == a && *y == b) {
                continue;
            }
            seen.push((a, b));
            let (a, b) = seen.last().map(|(a, b)| (a, b)).unwrap();
            max(&mut dh_norm, dense::operator_norm(&(b - a)));
            max(&mut comm_norm, dense::operator_norm(&dense::commutator(a, b)));
            // a constant Hamiltonian: all three propagators coincide exactly
            if a == b {
                continue;
            }
            let p = propagators(a, b, schedule, r, substeps);
            max(&mut piece, dense::operator_norm(&(&p.exact - &p.piecewise)));
            max(&mut trot, dense::operator_norm(&(&p.piecewise - &p.product)));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        for _ in 0..ESTIMATE_SAMPLES {
            let probe = StateVector::<R>::random(dim, &mut rng);
            let sub = InvariantSubspace::closure(h_i, h_f, probe.amplitudes())?;
            let (a, b) = (sub.h_i(), sub.h_f());
            max(&mut dh_norm, dense::operator_norm(&(b - a)));
            max(&mut comm_norm, dense::operator_norm(&dense::commutator(a, b)));
            if a == b {
                continue;
            }
            let c0 = sub.restrict(probe.amplitudes());
            let p = propagators(a, b, schedule, r, substeps);
            let (ue, up, uq) = (&p.exact * &c0, &p.piecewise * &c0, &p.product * &c0);
            max(&mut piece, (ue - &up).norm());
            max(&mut trot, (up - uq).norm());
        }
    }
    let t = schedule.total_time;
    let rr = R::from_usize_lossy(r);
    Ok(ErrorBudget {
        total_time: t,
        steps: r,
        dh_norm,
        commutator_norm: comm_norm,
        piecewise_bound: (R::lit(2.0) * t / rr * dh_norm).sqrt(),
        trotter_bound_scale: t * t / rr * comm_norm,
        measured_piecewise: piece,
        measured_trotter: trot,
        estimated,
    })
}
