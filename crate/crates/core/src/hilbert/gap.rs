//! Spectral gap and coupling profiles along the linear interpolation.

use std::io::Write;

use serde::Serialize;

use super::dense::{self, level_pair, CMatrix, LevelPair};
use super::subspace::InvariantSubspace;
use super::{StateVector, StructuredHamiltonian};
use crate::error::{Error, Result};
use crate::num::{cre, Real};

pub const DEFAULT_GRID_POINTS: usize = 1025;

/// Eigenvalues closer than this belong to the same level.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// How a profile was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapRoute {
    /// Full eigendecomposition of the dense interpolated Hamiltonian.
    Dense,
    /// Eigendecomposition inside the invariant subspace of the initial state.
    Sector { dim: usize },
    /// Closed-form two-level reduction of the unstructured search pair.
    Analytic,
}

/// `E_0(s)`, `E_1(s)`, their gap and the coupling `|<E_1|dH/ds|E_0>|` on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct GapProfile<R> {
    pub s: Vec<R>,
    pub e0: Vec<R>,
    /// Infinite where no excited level exists.
    pub e1: Vec<R>,
    pub g: Vec<R>,
    pub dmat: Vec<R>,
    /// Interior points where the ground level is degenerate.
    pub flagged: Vec<bool>,
    /// The coarse bound `||H_f - H_i||`, when it was computed.
    pub dh_norm: Option<R>,
    pub route: GapRoute,
}

/// `points` equispaced values covering `[0, 1]`.
pub fn uniform_grid<R: Real>(points: usize) -> Vec<R> {
    let last = R::from_usize_lossy(points.max(2) - 1);
    (0..points.max(2))
        .map(|j| R::from_usize_lossy(j) / last)
        .collect()
}

fn check_grid<R: Real>(grid: &[R]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::input("gap grid needs at least two points"));
    }
    if grid[0] != R::zero() || grid[grid.len() - 1] != R::one() {
        return Err(Error::input("gap grid must start at 0 and end at 1"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::input("gap grid must be strictly increasing"));
    }
    Ok(())
}

impl<R: Real> GapProfile<R> {
    fn from_levels(grid: &[R], levels: Vec<LevelPair<R>>, route: GapRoute) -> Self {
        let n = grid.len();
        let mut out = Self {
            s: grid.to_vec(),
            e0: Vec::with_capacity(n),
            e1: Vec::with_capacity(n),
            g: Vec::with_capacity(n),
            dmat: Vec::with_capacity(n),
            flagged: Vec::with_capacity(n),
            dh_norm: None,
            route,
        };
        let mult: Vec<usize> = levels.iter().map(|lv| lv.ground_multiplicity).collect();
        for (j, lv) in levels.into_iter().enumerate() {
            // a ground level that is more degenerate than at a neighbouring
            // point is a crossing; a degeneracy persisting along the path is not
            let crossing = j > 0 && j + 1 < n && mult[j] > mult[j - 1].min(mult[j + 1]);
            let e1 = lv.e1.unwrap_or_else(R::infinity);
            out.e0.push(lv.e0);
            out.e1.push(e1);
            out.g.push(e1 - lv.e0);
            out.dmat.push(lv.dmat);
            out.flagged.push(crossing);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Smallest gap on the grid and where it occurs.
    pub fn g_min(&self) -> (R, R) {
        let mut best = (self.s[0], self.g[0]);
        for (&s, &g) in self.s.iter().zip(&self.g) {
            if g < best.1 {
                best = (s, g);
            }
        }
        best
    }

    /// Largest coupling on the grid.
    pub fn d_max(&self) -> R {
        self.dmat
            .iter()
            .fold(R::zero(), |a, &b| if b > a { b } else { a })
    }

    pub fn any_flagged(&self) -> bool {
        self.flagged.iter().any(|&f| f)
    }

    /// Writes `s,E0,E1,g,dmat` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "s,E0,E1,g,dmat")?;
        for j in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.s[j], self.e0[j], self.e1[j], self.g[j], self.dmat[j]
            )?;
        }
        Ok(())
    }
}

/// Dense eigensolve of `(1 - s) H_i + s H_f` at every grid point.
pub fn gap_profile<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
    grid: &[R],
) -> Result<GapProfile<R>> {
    check_grid(grid)?;
    if h_i.dim() != h_f.dim() {
        return Err(Error::input("gap profile needs operators of equal dimension"));
    }
    let a = dense::to_dense(h_i)?;
    let b = dense::to_dense(h_f)?;
    let dh = &b - &a;
    let tol = R::tolerance(DEGENERACY_TOL);
    let levels = grid
        .iter()
        .map(|&s| level_pair(&interp(&a, &b, s), &dh, tol))
        .collect();
    let mut p = GapProfile::from_levels(grid, levels, GapRoute::Dense);
    p.dh_norm = Some(dense::operator_norm(&dh));
    Ok(p)
}

/// Gap profile restricted to the invariant subspace generated by `v0`.
///
/// Levels that never couple to the evolving state are excluded, which is
/// what the adiabatic condition actually needs when the final ground space
/// is degenerate.
pub fn gap_profile_sector<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
    v0: &StateVector<R>,
    grid: &[R],
) -> Result<GapProfile<R>> {
    check_grid(grid)?;
    let sub = InvariantSubspace::closure(h_i, h_f, v0.amplitudes())?;
    Ok(sector_profile(&sub, grid))
}

fn sector_profile<R: Real>(sub: &InvariantSubspace<R>, grid: &[R]) -> GapProfile<R> {
    let dh = sub.h_f() - sub.h_i();
    let tol = R::tolerance(DEGENERACY_TOL);
    let levels = grid
        .iter()
        .map(|&s| level_pair(&sub.hamiltonian_at(s), &dh, tol))
        .collect();
    let mut p = GapProfile::from_levels(grid, levels, GapRoute::Sector { dim: sub.dim() });
    p.dh_norm = Some(dense::operator_norm(&dh));
    p
}

fn interp<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>, s: R) -> CMatrix<R> {
    a * cre(R::one() - s) + b * cre(s)
}

fn grover_f<R: Real>(n: usize, m: usize) -> Result<R> {
    if n == 0 || m == 0 || m > n {
        return Err(Error::input(format!("need 1 <= M <= N, got N={n}, M={m}")));
    }
    Ok(R::from_usize_lossy(m) / R::from_usize_lossy(n))
}

/// Gap of the unstructured search pair: `sqrt(1 - 4 (1 - M/N) s (1 - s))`.
pub fn grover_gap<R: Real>(n: usize, m: usize, s: R) -> Result<R> {
    let f = grover_f::<R>(n, m)?;
    Ok(grover_gap_f(f, s))
}

fn grover_gap_f<R: Real>(f: R, s: R) -> R {
    let four = R::lit(4.0);
    let g2 = R::one() - four * (R::one() - f) * s * (R::one() - s);
    if g2 > R::zero() {
        g2.sqrt()
    } else {
        R::zero()
    }
}

/// Closed-form profile of the unstructured search pair with `M` of `N` marked.
pub fn grover_profile<R: Real>(n: usize, m: usize, grid: &[R]) -> Result<GapProfile<R>> {
    check_grid(grid)?;
    let f = grover_f::<R>(n, m)?;
    let coupling = (f * (R::one() - f)).sqrt();
    let half = R::lit(0.5);
    let mut p = GapProfile {
        s: grid.to_vec(),
        e0: Vec::with_capacity(grid.len()),
        e1: Vec::with_capacity(grid.len()),
        g: Vec::with_capacity(grid.len()),
        dmat: Vec::with_capacity(grid.len()),
        flagged: vec![false; grid.len()],
        dh_norm: Some(if m == n { R::zero() } else { R::one() }),
        route: GapRoute::Analytic,
    };
    for &s in grid {
        let g = grover_gap_f(f, s);
        p.e0.push((R::one() - g) * half);
        p.e1.push((R::one() + g) * half);
        p.g.push(g);
        p.dmat.push(coupling / g);
    }
    Ok(p)
}

/// Locates the minimum gap of the dense interpolation by Brent's method.
///
/// Returns `(s*, g(s*))`. The gap of the pair is assumed unimodal on
/// `[0, 1]`, as it is for every projector pair built here.
pub fn min_gap_dense<R: Real>(
    h_i: &StructuredHamiltonian<R>,
    h_f: &StructuredHamiltonian<R>,
    tol: f64,
) -> Result<(R, R)> {
    if h_i.dim() != h_f.dim() {
        return Err(Error::input("gap search needs operators of equal dimension"));
    }
    let a = dense::to_dense(h_i)?;
    let b = dense::to_dense(h_f)?;
    let dh = &b - &a;
    let dtol = R::tolerance(DEGENERACY_TOL);
    let gap = |s: f64| {
        let lv = level_pair(&interp(&a, &b, R::lit(s)), &dh, dtol);
        lv.e1.map_or(f64::INFINITY, |e1| (e1 - lv.e0).to_f64_lossy())
    };
    let (s, g) = brent_min(gap, 0.0, 1.0, tol, 200);
    Ok((R::lit(s), R::lit(g)))
}

/// Brent's parabolic/golden-section minimizer on `[a, b]`.
pub(crate) fn brent_min<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let mut x = a + CGOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::StructuredHamiltonian as H;

    #[test]
    fn n4_single_marked_min_gap_half() {
        let hi = H::<f64>::rank_one_uniform(4);
        let hf = H::diagonal_marked(4, [3]).unwrap();
        let p = gap_profile(&hi, &hf, &uniform_grid(65)).unwrap();
        let (s, g) = p.g_min();
        assert!((s - 0.5).abs() < 1e-12);
        assert!((g - 0.5).abs() < 1e-10);
        assert!((p.g[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn brent_finds_parabola_vertex() {
        let (x, fx) = brent_min(|x| (x - 0.3).powi(2) + 2.0, 0.0, 1.0, 1e-10, 100);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-10);
    }

    #[test]
    fn sector_route_ignores_decoupled_levels() {
        let hi = H::<f64>::rank_one_uniform(16);
        let hf = H::diagonal_marked(16, [0, 5, 7]).unwrap();
        let grid = uniform_grid(33);
        let v0 = StateVector::uniform_dim(16);
        let sector = gap_profile_sector(&hi, &hf, &v0, &grid).unwrap();
        let analytic = grover_profile(16, 3, &grid).unwrap();
        for j in 0..grid.len() {
            assert!((sector.g[j] - analytic.g[j]).abs() < 1e-10);
            assert!((sector.dmat[j] - analytic.dmat[j]).abs() < 1e-10);
        }
        assert!(!sector.any_flagged());
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(grover_profile::<f64>(4, 1, &[0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(grover_profile::<f64>(4, 1, &[0.1, 1.0]).is_err());
    }
}
