//! Three-stage nested search: a partial search on the primary register
//! (stage A), a conditional extension on the secondary register (stage B)
//! and a global search whose initial Hamiltonian is conjugated by the
//! unitary of the first two stages (stage C).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::csp::{census, Assignment, CspInstance, Partition, SolutionCensus};
use crate::error::{Error, Result};
use crate::evolve::{evolve_discretized, EvolutionResult};
use crate::hilbert::{
    dense, gap_profile_sector, uniform_grid, GapRoute, Placement, StateVector, StructuredHamiltonian,
    UnitaryProgram, DEFAULT_GRID_POINTS,
};
use crate::num::{self, Real};
use crate::schedule::{grover_schedule, local_schedule, Schedule, DEFAULT_EPSILON};

type H<R> = StructuredHamiltonian<R>;

/// Largest register on which matrix-level checks are run.
pub const CHECK_CAP: usize = 1 << 10;

/// Knobs of a nested run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NestedConfig {
    pub epsilon: f64,
    /// `r = ceil(multiplier * T)` for each stage.
    pub r_multiplier_a: f64,
    pub r_multiplier_b: f64,
    pub r_multiplier_c: f64,
    /// Grid of the numerically obtained stage-C profile.
    pub grid_points: usize,
    /// Run the block-decoupling matrix checks when the register is small.
    pub check_decoupling: bool,
}

impl Default for NestedConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            r_multiplier_a: 1.0,
            r_multiplier_b: 1.0,
            r_multiplier_c: 1.0,
            grid_points: DEFAULT_GRID_POINTS,
            check_decoupling: true,
        }
    }
}

impl NestedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::input(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        for (name, m) in [
            ("r_multiplier_a", self.r_multiplier_a),
            ("r_multiplier_b", self.r_multiplier_b),
            ("r_multiplier_c", self.r_multiplier_c),
        ] {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::input(format!("{name} must be positive, got {m}")));
            }
        }
        if self.grid_points < 2 {
            return Err(Error::input("grid_points must be at least 2"));
        }
        Ok(())
    }
}

/// Stage times and step counts.
#[derive(Clone, Debug, Serialize)]
pub struct StagePlan<R> {
    pub epsilon: R,
    pub partition: Partition,
    pub t_a: R,
    pub t_b: R,
    pub t_c: R,
    pub r_a: usize,
    pub r_b: usize,
    pub r_c: usize,
    /// `r_c / t_c`.
    pub r_c_ratio: R,
    /// `min M_{B/m_A}` over extendable branches, which sizes stage B.
    pub stage_b_min_extension: Option<usize>,
    pub stage_c_route: GapRoute,
}

fn steps_for<R: Real>(t: R, multiplier: f64) -> usize {
    let r = (t.to_f64_lossy() * multiplier).ceil();
    if r.is_finite() && r >= 1.0 {
        r as usize
    } else {
        1
    }
}

#[derive(Clone, Debug)]
pub struct StageAOutcome<R> {
    pub state: StateVector<R>,
    /// Overlap with the uniform superposition over partial solutions.
    pub fidelity: R,
    /// Weight on partial solutions.
    pub partial_solution_mass: R,
    pub evolution: EvolutionResult<R>,
}

#[derive(Clone, Debug)]
pub struct StageBOutcome<R> {
    pub state: StateVector<R>,
    /// Overlap with the branch targets, maximized over per-branch phases.
    pub fidelity: R,
    /// Branch phases relative to the branches without extensions (or to
    /// the first branch when every branch extends), wrapped to `(-pi, pi]`.
    pub branch_phases: BTreeMap<usize, R>,
    /// Per-branch overlap with the branch target, normalized by the branch
    /// weight.
    pub branch_fidelities: BTreeMap<usize, R>,
    /// Total change of the branch weights during the stage.
    pub branch_leakage: R,
    /// Target state carrying the measured branch phases.
    pub aligned_target: StateVector<R>,
    pub evolution: EvolutionResult<R>,
}

#[derive(Clone, Debug)]
pub struct StageCOutcome<R> {
    pub solution_mass: R,
    pub evolution: EvolutionResult<R>,
}

/// Largest entries violating the stage-B block structure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecouplingCheck<R> {
    /// `max |<j| <a| H(s) |a'> |j'>|` over distinct partial solutions.
    pub max_cross_branch: R,
    /// `max || H(s) (|i> |s_B>) ||` over `i` outside the partial solutions.
    pub max_annihilation_residual: R,
}

/// Outcome of a complete nested run.
#[derive(Clone, Debug, Serialize)]
pub struct NestedRunReport<R> {
    pub label: String,
    pub census: SolutionCensus,
    pub plan: StagePlan<R>,
    pub fidelity_after_a: R,
    pub fidelity_after_b: R,
    pub branch_phases: BTreeMap<usize, R>,
    pub branch_fidelities: BTreeMap<usize, R>,
    pub branch_leakage: R,
    pub decoupling: Option<DecouplingCheck<R>>,
    pub final_solution_mass: R,
    /// Basis index to probability, nonzero entries only.
    pub measurement_histogram: BTreeMap<usize, R>,
    /// `(T_A + T_B) r_C`.
    pub wall_time_model: R,
    /// Schedules were sized with exact classical solution counts.
    pub oracle_assisted_scheduling: bool,
    pub norm_error: R,
}

/// An instance, its partition and census, with the stage Hamiltonians.
#[derive(Clone, Debug)]
pub struct NestedProblem {
    instance: CspInstance,
    partition: Partition,
    census: SolutionCensus,
    n_a_space: usize,
    n_b_space: usize,
}

impl NestedProblem {
    pub fn new(instance: CspInstance, partition: Partition) -> Result<Self> {
        let c = census(&instance, partition)?;
        Self::with_census(instance, partition, c)
    }

    pub fn with_census(instance: CspInstance, partition: Partition, census: SolutionCensus) -> Result<Self> {
        partition.check(&instance)?;
        if census.partition != partition || census.d != instance.d() {
            return Err(Error::input(
                "census does not belong to this instance and partition",
            ));
        }
        Ok(Self {
            n_a_space: census.n_a_space(),
            n_b_space: census.n_b_space(),
            instance,
            partition,
            census,
        })
    }

    pub fn instance(&self) -> &CspInstance {
        &self.instance
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn census(&self) -> &SolutionCensus {
        &self.census
    }

    pub fn n_a_space(&self) -> usize {
        self.n_a_space
    }

    pub fn n_b_space(&self) -> usize {
        self.n_b_space
    }

    pub fn dim(&self) -> usize {
        self.n_a_space * self.n_b_space
    }

    /// `H_A` on the primary register.
    pub fn h_a<R: Real>(&self) -> Result<H<R>> {
        H::diagonal_marked(self.n_a_space, self.census.partial_solutions())
    }

    /// `H_AB` on the full register.
    pub fn h_ab<R: Real>(&self) -> Result<H<R>> {
        H::diagonal_marked(self.dim(), self.census.solutions.iter().copied())
    }

    /// `H_0 = I - |s_A s_B><s_A s_B|`.
    pub fn h_0<R: Real>(&self) -> H<R> {
        H::rank_one_uniform(self.dim())
    }

    /// Stage-A pair on the primary register.
    pub fn stage_a_pair<R: Real>(&self) -> Result<(H<R>, H<R>)> {
        Ok((H::rank_one_uniform(self.n_a_space), self.h_a()?))
    }

    /// Stage-A pair extended by the identity on the secondary register.
    pub fn stage_a_pair_lifted<R: Real>(&self) -> Result<(H<R>, H<R>)> {
        let (hi, hf) = self.stage_a_pair()?;
        Ok((
            H::tensor_extended(hi, Placement::Low, self.n_b_space),
            H::tensor_extended(hf, Placement::Low, self.n_b_space),
        ))
    }

    /// Stage-B pair: `I_A (x) (I_B - |s_B><s_B|)` and `H_AB - H_A (x) I_B`.
    pub fn stage_b_pair<R: Real>(&self) -> Result<(H<R>, H<R>)> {
        let hi = H::tensor_extended(
            H::rank_one_uniform(self.n_b_space),
            Placement::High,
            self.n_a_space,
        );
        let h_a_ext = H::tensor_extended(self.h_a()?, Placement::Low, self.n_b_space);
        let hf = H::affine(R::one(), self.h_ab()?, -R::one(), h_a_ext)?;
        Ok((hi, hf))
    }

    /// Target of stage B on branch `a`: uniform over the extensions of
    /// `a`, or `|s_B>` when there are none.
    pub fn branch_target<R: Real>(&self, a: usize) -> Result<StateVector<R>> {
        let ext = self.census.extensions_of(a);
        if ext.is_empty() {
            Ok(StateVector::uniform_dim(self.n_b_space))
        } else {
            StateVector::uniform_over(self.n_b_space, &ext)
        }
    }

    /// `sum_a e^{i phi_a} |a> |t_a> / sqrt(M_A)` with `phi_a` taken from
    /// `phases` (zero when absent).
    pub fn ideal_state<R: Real>(&self, phases: Option<&BTreeMap<usize, R>>) -> Result<StateVector<R>> {
        let partial = self.census.partial_solutions();
        if partial.is_empty() {
            return Err(Error::NoPartialSolutions);
        }
        let mut amps = vec![num::czero::<R>(); self.dim()];
        for &a in &partial {
            let t = self.branch_target::<R>(a)?;
            let ph = num::phase(phases.and_then(|p| p.get(&a)).copied().unwrap_or_else(R::zero));
            for (b, z) in t.amplitudes().iter().enumerate() {
                amps[a + self.n_a_space * b] = ph * z;
            }
        }
        StateVector::from_amplitudes(amps)
    }

    fn require_partial(&self) -> Result<()> {
        if self.census.m_a == 0 {
            return Err(Error::NoPartialSolutions);
        }
        Ok(())
    }

    fn require_solutions(&self) -> Result<()> {
        self.require_partial()?;
        if self.census.m_a_s == 0 {
            return Err(Error::Unsatisfiable);
        }
        Ok(())
    }

    pub fn stage_a_schedule<R: Real>(&self, epsilon: R) -> Result<Schedule<R>> {
        self.require_partial()?;
        grover_schedule(self.n_a_space, self.census.m_a, epsilon)
    }

    /// Sized by the smallest extension count among extendable branches;
    /// branches without extensions only pick up a phase.
    pub fn stage_b_schedule<R: Real>(&self, epsilon: R) -> Result<Schedule<R>> {
        self.require_partial()?;
        let m = self.census.min_extension().unwrap_or(self.n_b_space);
        grover_schedule(self.n_b_space, m, epsilon)
    }

    /// Local schedule of the idealized stage-C pair
    /// `(I - |psi_AB><psi_AB|, H_AB)`: computed numerically on small
    /// registers, in closed form (search for `M_A^S` of `M_A`) otherwise.
    pub fn stage_c_schedule<R: Real>(
        &self,
        epsilon: R,
        grid_points: usize,
    ) -> Result<(Schedule<R>, GapRoute)> {
        self.require_solutions()?;
        if self.dim() <= CHECK_CAP {
            let psi = self.ideal_state::<R>(None)?;
            let hi = H::rank_one_projector(psi.clone());
            let hf = self.h_ab()?;
            let profile = gap_profile_sector(&hi, &hf, &psi, &uniform_grid(grid_points))?;
            let route = profile.route;
            Ok((local_schedule(&profile, epsilon)?, route))
        } else {
            let s = grover_schedule(self.census.m_a, self.census.m_a_s, epsilon)?;
            Ok((s, GapRoute::Analytic))
        }
    }

    pub fn plan<R: Real>(&self, config: &NestedConfig) -> Result<StagePlan<R>> {
        config.validate()?;
        let eps = R::lit(config.epsilon);
        let t_a = self.stage_a_schedule(eps)?.total_time;
        let t_b = self.stage_b_schedule(eps)?.total_time;
        let (sc, route) = self.stage_c_schedule(eps, config.grid_points)?;
        let t_c = sc.total_time;
        let r_c = steps_for(t_c, config.r_multiplier_c);
        Ok(StagePlan {
            epsilon: eps,
            partition: self.partition,
            t_a,
            t_b,
            t_c,
            r_a: steps_for(t_a, config.r_multiplier_a),
            r_b: steps_for(t_b, config.r_multiplier_b),
            r_c,
            r_c_ratio: R::from_usize_lossy(r_c) / t_c,
            stage_b_min_extension: self.census.min_extension(),
            stage_c_route: route,
        })
    }

    /// Discretized search from `|s_A>` towards the partial solutions.
    pub fn stage_a<R: Real>(&self, epsilon: R, r_a: usize) -> Result<StageAOutcome<R>> {
        let schedule = self.stage_a_schedule(epsilon)?;
        let (hi, hf) = self.stage_a_pair::<R>()?;
        let v0 = StateVector::uniform_dim(self.n_a_space);
        let evolution = evolve_discretized(&hi, &hf, &schedule, r_a, &v0)?;
        let state = evolution.final_state.clone();
        let partial = self.census.partial_solutions();
        let target = StateVector::uniform_over(self.n_a_space, &partial)?;
        Ok(StageAOutcome {
            fidelity: target.fidelity(&state),
            partial_solution_mass: state.mass_on(&partial),
            state,
            evolution,
        })
    }

    /// Discretized extension of `state_after_a (x) |s_B>` on the secondary
    /// register, branch by branch.
    pub fn stage_b<R: Real>(
        &self,
        state_after_a: &StateVector<R>,
        epsilon: R,
        r_b: usize,
    ) -> Result<StageBOutcome<R>> {
        if state_after_a.dim() != self.n_a_space {
            return Err(Error::input(format!(
                "stage B expects a primary-register state of dimension {}, got {}",
                self.n_a_space,
                state_after_a.dim()
            )));
        }
        let schedule = self.stage_b_schedule(epsilon)?;
        let (hi, hf) = self.stage_b_pair::<R>()?;
        let v0 = StateVector::tensor(state_after_a, &StateVector::uniform_dim(self.n_b_space));
        let before = self.branch_weights(&v0);
        let evolution = evolve_discretized(&hi, &hf, &schedule, r_b, &v0)?;
        let state = evolution.final_state.clone();
        let after = self.branch_weights(&state);
        let branch_leakage = before
            .iter()
            .zip(&after)
            .fold(R::zero(), |acc, (&x, &y)| acc + (x - y).abs());
        let analysis = self.branch_analysis(&state)?;
        Ok(StageBOutcome {
            state,
            fidelity: analysis.fidelity,
            branch_phases: analysis.relative_phases,
            branch_fidelities: analysis.branch_fidelities,
            branch_leakage,
            aligned_target: self.ideal_state(Some(&analysis.raw_phases))?,
            evolution,
        })
    }

    fn branch_weights<R: Real>(&self, v: &StateVector<R>) -> Vec<R> {
        let mut w = vec![R::zero(); self.n_a_space];
        for (idx, z) in v.amplitudes().iter().enumerate() {
            w[idx % self.n_a_space] += z.norm_sqr();
        }
        w
    }

    fn branch_analysis<R: Real>(&self, state: &StateVector<R>) -> Result<BranchAnalysis<R>> {
        let amps = state.amplitudes();
        let mut sum_abs = R::zero();
        let mut raw_phases = BTreeMap::new();
        let mut branch_fidelities = BTreeMap::new();
        for a in self.census.partial_solutions() {
            let t = self.branch_target::<R>(a)?;
            let mut ov = num::czero::<R>();
            let mut weight = R::zero();
            for (b, tz) in t.amplitudes().iter().enumerate() {
                let z = amps[a + self.n_a_space * b];
                ov += tz.conj() * z;
                weight += z.norm_sqr();
            }
            sum_abs += num::modulus(ov);
            raw_phases.insert(a, num::arg(ov));
            let bf = if weight > R::zero() {
                ov.norm_sqr() / weight
            } else {
                R::zero()
            };
            branch_fidelities.insert(a, bf);
        }
        let m_a = R::from_usize_lossy(self.census.m_a);
        let reference = self
            .census
            .ns_branches()
            .first()
            .or(self.census.partial_solutions().first())
            .map(|a| raw_phases[a])
            .unwrap_or_else(R::zero);
        let relative_phases = raw_phases
            .iter()
            .map(|(&a, &p)| (a, wrap_phase(p - reference)))
            .collect();
        Ok(BranchAnalysis {
            fidelity: sum_abs * sum_abs / m_a,
            raw_phases,
            relative_phases,
            branch_fidelities,
        })
    }

    /// Checks the two stage-B structural facts entry by entry at
    /// `s = 0, 1/2, 1`.
    pub fn check_decoupling<R: Real>(&self) -> Result<DecouplingCheck<R>> {
        let dim = self.dim();
        if dim > CHECK_CAP {
            return Err(Error::resource(format!(
                "decoupling check limited to dimension {CHECK_CAP}, got {dim}"
            )));
        }
        let (hi, hf) = self.stage_b_pair::<R>()?;
        let partial = self.census.partial_solutions();
        let mut is_partial = vec![false; self.n_a_space];
        for &a in &partial {
            is_partial[a] = true;
        }
        let s_b = StateVector::<R>::uniform_dim(self.n_b_space);
        let mut cross = R::zero();
        let mut resid = R::zero();
        for s in [R::zero(), R::lit(0.5), R::one()] {
            let h = H::interpolate(&hi, &hf, s)?;
            for &a2 in &partial {
                for j2 in 0..self.n_b_space {
                    let col = h.apply(StateVector::basis(dim, a2 + self.n_a_space * j2).amplitudes())?;
                    for (idx, z) in col.iter().enumerate() {
                        let a = idx % self.n_a_space;
                        if a != a2 && is_partial[a] {
                            cross = cross.max(num::modulus(*z));
                        }
                    }
                }
            }
            for i in (0..self.n_a_space).filter(|&i| !is_partial[i]) {
                let v = StateVector::tensor(&StateVector::basis(self.n_a_space, i), &s_b);
                let hv = h.apply(v.amplitudes())?;
                resid = resid.max(num::norm_sqr(&hv).sqrt());
            }
        }
        Ok(DecouplingCheck {
            max_cross_branch: cross,
            max_annihilation_residual: resid,
        })
    }

    /// The product-formula steps of stages A and B on the full register:
    /// `2 (r_a + r_b)` factor exponentials.
    pub fn build_u<R: Real>(&self, epsilon: R, r_a: usize, r_b: usize) -> Result<UnitaryProgram<R>> {
        if r_a == 0 || r_b == 0 {
            return Err(Error::input("step counts must be at least 1"));
        }
        let mut program = UnitaryProgram::new(self.dim());
        let (ai, af) = self.stage_a_pair_lifted::<R>()?;
        let (bi, bf) = self.stage_b_pair::<R>()?;
        for (sched, r, hi, hf) in [
            (self.stage_a_schedule(epsilon)?, r_a, ai, af),
            (self.stage_b_schedule(epsilon)?, r_b, bi, bf),
        ] {
            let (hi, hf) = (Arc::new(hi), Arc::new(hf));
            let dt = sched.total_time / R::from_usize_lossy(r);
            for s in sched.step_values(r) {
                program.push(hf.clone(), s * dt)?;
                program.push(hi.clone(), (R::one() - s) * dt)?;
            }
        }
        Ok(program)
    }

    /// Global search with `H_i = U H_0 U^dagger` starting from `U |s_AB>`.
    pub fn stage_c<R: Real>(
        &self,
        u: Arc<UnitaryProgram<R>>,
        epsilon: R,
        r_c: usize,
        grid_points: usize,
    ) -> Result<StageCOutcome<R>> {
        self.require_solutions()?;
        let (schedule, _) = self.stage_c_schedule(epsilon, grid_points)?;
        let v0 = u.forward(&StateVector::uniform_dim(self.dim()))?;
        let hi = H::conjugated(u, self.h_0())?;
        let hf = self.h_ab::<R>()?;
        let evolution = evolve_discretized(&hi, &hf, &schedule, r_c, &v0)?;
        Ok(StageCOutcome {
            solution_mass: evolution.final_state.mass_on(&self.census.solutions),
            evolution,
        })
    }

    /// `|| exp(-i t (I - |psi><psi|)) - U exp(-i t H_0) U^dagger ||` for
    /// the given target `psi`, from dense propagators.
    pub fn conjugation_distance<R: Real>(
        &self,
        u: &UnitaryProgram<R>,
        target: &StateVector<R>,
        t: R,
    ) -> Result<R> {
        let dim = self.dim();
        if dim > CHECK_CAP {
            return Err(Error::resource(format!(
                "conjugation check limited to dimension {CHECK_CAP}, got {dim}"
            )));
        }
        let ideal = dense::hermitian_exp(&dense::to_dense(&H::rank_one_projector(target.clone()))?, t);
        let h0 = self.h_0::<R>();
        let mut realized = dense::CMatrix::<R>::zeros(dim, dim);
        for k in 0..dim {
            let mut v = StateVector::<R>::basis(dim, k).into_amplitudes();
            u.apply_inverse(&mut v);
            h0.exp_in_place(t, &mut v)?;
            u.apply_forward(&mut v);
            for (i, z) in v.into_iter().enumerate() {
                realized[(i, k)] = z;
            }
        }
        Ok(dense::operator_norm(&(ideal - realized)))
    }
}

struct BranchAnalysis<R> {
    fidelity: R,
    raw_phases: BTreeMap<usize, R>,
    relative_phases: BTreeMap<usize, R>,
    branch_fidelities: BTreeMap<usize, R>,
}

fn wrap_phase<R: Real>(p: R) -> R {
    let two_pi = R::lit(2.0 * PI);
    let pi = R::lit(PI);
    let mut x = p % two_pi;
    if x > pi {
        x -= two_pi;
    } else if x <= -pi {
        x += two_pi;
    }
    x
}

/// Census, stages A to C and an exact measurement distribution.
pub fn run_nested<R: Real>(
    instance: &CspInstance,
    partition: Partition,
    config: &NestedConfig,
) -> Result<NestedRunReport<R>> {
    let problem = NestedProblem::new(instance.clone(), partition)?;
    problem.run(config)
}

impl NestedProblem {
    pub fn run<R: Real>(&self, config: &NestedConfig) -> Result<NestedRunReport<R>> {
        self.require_solutions()?;
        let plan = self.plan::<R>(config)?;
        let eps = plan.epsilon;
        let a = self.stage_a(eps, plan.r_a)?;
        let b = self.stage_b(&a.state, eps, plan.r_b)?;
        let u = Arc::new(self.build_u(eps, plan.r_a, plan.r_b)?);
        let c = self.stage_c(u, eps, plan.r_c, config.grid_points)?;
        let decoupling = if config.check_decoupling && self.dim() <= CHECK_CAP {
            Some(self.check_decoupling()?)
        } else {
            None
        };
        let final_state = &c.evolution.final_state;
        let measurement_histogram = final_state
            .probabilities()
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > R::zero())
            .collect();
        Ok(NestedRunReport {
            label: self.instance.label().to_string(),
            census: self.census.clone(),
            wall_time_model: (plan.t_a + plan.t_b) * R::from_usize_lossy(plan.r_c),
            plan,
            fidelity_after_a: a.fidelity,
            fidelity_after_b: b.fidelity,
            branch_phases: b.branch_phases,
            branch_fidelities: b.branch_fidelities,
            branch_leakage: b.branch_leakage,
            decoupling,
            final_solution_mass: c.solution_mass,
            measurement_histogram,
            oracle_assisted_scheduling: true,
            norm_error: c.evolution.norm_error,
        })
    }
}

impl<R: Real> NestedRunReport<R> {
    pub fn to_json(&self) -> Result<String>
    where
        R: Serialize,
    {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Most probable basis index.
    pub fn argmax(&self) -> Option<usize> {
        self.measurement_histogram
            .iter()
            .fold(None, |best: Option<(usize, R)>, (&i, &p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((i, p)),
            })
            .map(|(i, _)| i)
    }

    /// Total-variation distance between the histogram conditioned on
    /// solutions and the uniform distribution over solutions.
    pub fn solution_tv_distance(&self) -> R {
        let sols = &self.census.solutions;
        if sols.is_empty() || !(self.final_solution_mass > R::zero()) {
            return R::one();
        }
        let uniform = R::one() / R::from_usize_lossy(sols.len());
        let half = R::lit(0.5);
        sols.iter().fold(R::zero(), |acc, i| {
            let p = self.measurement_histogram.get(i).copied().unwrap_or_else(R::zero);
            acc + (p / self.final_solution_mass - uniform).abs() * half
        })
    }

    /// Seeded sampling of `shots` measurements from the exact histogram.
    pub fn sample_measurements(&self, shots: usize, seed: u64) -> Result<BTreeMap<usize, usize>> {
        let (idx, w): (Vec<usize>, Vec<f64>) = self
            .measurement_histogram
            .iter()
            .map(|(&i, &p)| (i, p.to_f64_lossy()))
            .unzip();
        let dist = WeightedIndex::new(&w).map_err(|e| Error::input(format!("histogram: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(idx[dist.sample(&mut rng)]).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// Writes `index,assignment,probability,is_solution` rows; the
    /// assignment lists digits from variable 0 upwards.
    pub fn write_histogram_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.census.d;
        let n = self.census.partition.n_ab();
        writeln!(w, "index,assignment,probability,is_solution")?;
        for (&i, &p) in &self.measurement_histogram {
            let digits = Assignment::from_index(i, d, n);
            let sep = if d <= 10 { "" } else { " " };
            let text: Vec<String> = digits.digits().iter().map(usize::to_string).collect();
            let sol = self.census.solutions.binary_search(&i).is_ok();
            writeln!(w, "{i},{},{p},{sol}", text.join(sep))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::Constraint;

    fn free_instance(n: usize) -> CspInstance {
        CspInstance::new(2, n, vec![], "free").unwrap()
    }

    /// x0 = 1, x1 = 0 pinned by unary nogoods; x2 = 1 pinned too.
    fn pinned() -> CspInstance {
        let c = vec![
            Constraint::new(vec![0], vec![vec![0]]),
            Constraint::new(vec![1], vec![vec![1]]),
            Constraint::new(vec![2], vec![vec![0]]),
        ];
        CspInstance::new(2, 4, c, "pinned").unwrap()
    }

    #[test]
    fn free_instance_keeps_uniform_state() {
        let p = NestedProblem::new(free_instance(4), Partition::new(2, 2).unwrap()).unwrap();
        let a = p.stage_a::<f64>(0.1, 3).unwrap();
        assert!((a.fidelity - 1.0).abs() < 1e-12);
        let b = p.stage_b(&a.state, 0.1, 3).unwrap();
        assert!((b.fidelity - 1.0).abs() < 1e-12);
        for f in b.branch_fidelities.values() {
            assert!((f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn replay_matches_stage_outputs() {
        let p = NestedProblem::new(pinned(), Partition::new(2, 2).unwrap()).unwrap();
        let plan = p.plan::<f64>(&NestedConfig::default()).unwrap();
        let a = p.stage_a(0.1, plan.r_a).unwrap();
        let b = p.stage_b(&a.state, 0.1, plan.r_b).unwrap();
        let u = p.build_u(0.1, plan.r_a, plan.r_b).unwrap();
        assert_eq!(u.len(), 2 * (plan.r_a + plan.r_b));
        let via_u = u.forward(&StateVector::uniform_dim(16)).unwrap();
        assert!(via_u.distance(&b.state) < 1e-12);
        let back = u.inverse(&via_u).unwrap();
        assert!(back.distance(&StateVector::uniform_dim(16)) < 1e-12);
    }

    #[test]
    fn pinned_run_finds_solution() {
        let report =
            run_nested::<f64>(&pinned(), Partition::new(2, 2).unwrap(), &NestedConfig::default()).unwrap();
        assert_eq!(report.census.m_ab, 2);
        assert!(report.final_solution_mass > 0.8, "{}", report.final_solution_mass);
        let total: f64 = report.measurement_histogram.values().sum();
        assert!((total - 1.0).abs() < 1e-9);
        let dc = report.decoupling.unwrap();
        assert!(dc.max_cross_branch < 1e-12 && dc.max_annihilation_residual < 1e-12);
        assert!(report.branch_leakage < 1e-9);
    }

    #[test]
    fn unsatisfiable_is_reported() {
        let inst = pinned()
            .with_constraint(Constraint::new(vec![3], vec![vec![0], vec![1]]))
            .unwrap();
        let err = run_nested::<f64>(&inst, Partition::new(2, 2).unwrap(), &NestedConfig::default());
        assert!(matches!(err, Err(Error::Unsatisfiable)));
        let inst = pinned()
            .with_constraint(Constraint::new(vec![0], vec![vec![1]]))
            .unwrap();
        let err = run_nested::<f64>(&inst, Partition::new(2, 2).unwrap(), &NestedConfig::default());
        assert!(matches!(err, Err(Error::NoPartialSolutions)));
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-0.5_f64) + 0.5).abs() < 1e-12);
    }
}
