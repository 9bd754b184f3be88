//! Caustics in the `(x0, β)` control plane.
//!
//! Paths are born and annihilated in pairs where `β(x_t)` has a fold, that is
//! where `∂β/∂x_t = 0` at fixed `x0`. This module locates the first such
//! frontier around a well, counts paths over a grid of control points, and
//! provides the cusp normal-form discriminant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig9;
use crate::paths::{Branch, Families, PathSolver, Shape};
use crate::potential::{CriticalPoint, WellDescriptor};

/// Inverse temperatures `pπ/(ħω_m)`, `p = 1..=p_max`, at which the constant
/// path on the well top gains one more negative mode.
pub fn bifurcation_thresholds(well: &WellDescriptor, hbar: f64, p_max: u32) -> Vec<f64> {
    (1..=p_max)
        .map(|p| p as f64 * PI / (hbar * well.omega_m))
        .collect()
}

/// Control parameters of the cusp normal form `s⁴ + u1·s² + v1·s`, and the
/// symmetric-direction parameter `u2` of the second cusp (whose `v2` is zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspControl {
    pub u1: f64,
    pub v1: f64,
    pub u2: f64,
}

impl CuspControl {
    pub fn normal_form(&self, s: f64) -> f64 {
        s.powi(4) + self.u1 * s * s + self.v1 * s
    }

    pub fn extrema_count(&self) -> u32 {
        cusp_extrema_count(self.u1, self.v1)
    }
}

/// Number of stationary points of the cusp normal form: three inside the
/// bifurcation set `v1² = −4u1³/27`, one outside, two on the set itself.
///
/// The set is exact for the scaling `s⁴/4 + u1·s²/2 + v1·s`.
pub fn cusp_extrema_count(u1: f64, v1: f64) -> u32 {
    let a = v1 * v1;
    let b = -4.0 * u1.powi(3) / 27.0;
    let tol = 1e-12 * a.abs().max(b.abs()).max(1.0);
    if (a - b).abs() <= tol {
        2
    } else if a < b {
        3
    } else {
        1
    }
}

/// Path counts along one `x0` column, reusable for any number of `β` values.
pub(crate) struct Column<'a> {
    solver: &'a PathSolver,
    fam: Families,
    still: Option<CriticalPoint>,
}

impl<'a> Column<'a> {
    pub fn new(solver: &'a PathSolver, x0: f64, with_bounded: bool) -> Self {
        let (x0, still) = solver.snap(x0);
        Self {
            solver,
            fam: solver.families(x0, with_bounded),
            still,
        }
    }

    /// `(p, N)` at `beta`, or `None` if some family could not be tabulated.
    pub fn counts(&self, beta: f64) -> Option<(u32, u32)> {
        let land = self.solver.landscape();
        let spec = self.solver.spec();
        let x0 = self.fam.x0;
        let (mut p, mut n) = (0u32, 0u32);
        if let Some(c) = self.still {
            p += 1;
            let stable = c.v2 > 0.0 || {
                let omega = (-c.v2 / spec.mass()).sqrt();
                beta * spec.hbar() * omega < PI
            };
            n += u32::from(stable);
        }
        for table in &self.fam.single {
            let Shape::Single(stretch) = table.shape else { continue };
            let knots = table.knots(land, x0, Branch::Excursion);
            if knots.is_empty() {
                return None;
            }
            for w in knots.windows(2) {
                let (a, b) = (w[0], w[1]);
                if (a.1 - beta) * (b.1 - beta) < 0.0 || b.1 == beta {
                    p += 1;
                    let slope = (b.1 - a.1) / (b.0 - a.0);
                    n += u32::from(stretch.dir * slope > 0.0);
                }
            }
        }
        for table in &self.fam.bounded {
            let (_, t_min) = table.branch_min(land, x0, Branch::Periodic(1))?;
            for k in 1..=(beta / t_min).floor() as u32 {
                p += 2 * table.count_roots(land, x0, Branch::Periodic(k), beta) as u32
                    + table.count_roots(land, x0, Branch::RightFirst(k), beta) as u32
                    + table.count_roots(land, x0, Branch::LeftFirst(k), beta) as u32;
            }
        }
        Some((p, n))
    }
}

/// Smallest `β` of the single excursion across the barrier, as a function of
/// the starting point: the fold where a pair of paths is born.
fn fold_beta(solver: &PathSolver, well: &WellDescriptor, x0: f64) -> Option<f64> {
    let (x0, _) = solver.snap(x0);
    if x0 == well.x_m {
        return Some(PI / (solver.spec().hbar() * well.omega_m));
    }
    let (dir, edge) = if x0 > well.x_m {
        (-1.0, well.left_edge)
    } else {
        (1.0, well.right_edge)
    };
    let fam = solver.families(x0, false);
    fam.single.iter().find_map(|t| match t.shape {
        Shape::Single(s) if s.dir == dir && (s.far - edge).abs() <= 1e-8 * edge.abs().max(1.0) => {
            t.branch_min(solver.landscape(), x0, Branch::Excursion).map(|(_, b)| b)
        }
        _ => None,
    })
}

/// Frontier `(x0_left, x0_right)` of the first caustic family at `beta`, or
/// `None` below the first threshold or when the frontier leaves the well.
pub fn caustic_locus(solver: &PathSolver, well: &WellDescriptor, beta: f64) -> Result<Option<(f64, f64)>> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    if beta <= PI / (solver.spec().hbar() * well.omega_m) {
        return Ok(None);
    }
    let side = |edge: f64| -> Option<f64> {
        if !edge.is_finite() {
            return None;
        }
        let at = |t: f64| well.x_m + t * (edge - well.x_m);
        let g = |t: f64| fold_beta(solver, well, at(t)).map_or(f64::INFINITY, |b| b - beta);
        let (mut lo, mut hi) = (0.0, 1.0 - 1e-9);
        if g(hi) <= 0.0 {
            return None;
        }
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if g(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(at(0.5 * (lo + hi)))
    };
    Ok(side(well.left_edge).zip(side(well.right_edge)))
}

/// Sampled frontier of the first caustic family of a well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausticCurve {
    pub well: WellDescriptor,
    /// `(beta, x0_left, x0_right)` in the order of the requested temperatures.
    pub samples: Vec<(f64, f64, f64)>,
    pub branch_index: u32,
}

impl CausticCurve {
    pub fn trace(solver: &PathSolver, well: &WellDescriptor, betas: &[f64]) -> Result<Self> {
        let mut samples = Vec::with_capacity(betas.len());
        for &beta in betas {
            if let Some((l, r)) = caustic_locus(solver, well, beta)? {
                samples.push((beta, l, r));
            }
        }
        Ok(Self {
            well: *well,
            samples,
            branch_index: 1,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("beta,x0_left,x0_right\n");
        for &(b, l, r) in &self.samples {
            out += &format!("{},{},{}\n", sig9(b), sig9(l), sig9(r));
        }
        out
    }
}

/// Number of closed paths `p` and of minima `N` over a grid of control points.
///
/// Matrices are indexed `[beta_index][x0_index]`; `None` marks a cell whose
/// evaluation failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub x0_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    #[serde(rename = "p")]
    pub counts: Vec<Vec<Option<u32>>>,
    #[serde(rename = "N")]
    pub minima_counts: Vec<Vec<Option<u32>>>,
    /// Cells next to a change of `p`.
    pub boundary: Vec<Vec<bool>>,
}

fn uniform(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Counts paths on a `resolution.0 × resolution.1` grid over `x0` and `β`.
pub fn region_map(
    solver: &PathSolver,
    x0_range: (f64, f64),
    beta_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<RegionMap> {
    let (nx, nb) = resolution;
    if nx < 16 || nb < 16 {
        return Err(Error::InvalidArgument(format!(
            "region map needs at least 16 points per axis, got {nx} x {nb}"
        )));
    }
    let finite = [x0_range.0, x0_range.1, beta_range.0, beta_range.1]
        .iter()
        .all(|v| v.is_finite());
    if !finite || x0_range.0 >= x0_range.1 || beta_range.0 >= beta_range.1 || beta_range.0 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "invalid ranges x0 {x0_range:?}, beta {beta_range:?}"
        )));
    }
    let x0_grid = uniform(x0_range, nx);
    let beta_grid = uniform(beta_range, nb);
    let mut counts = vec![vec![None; nx]; nb];
    let mut minima_counts = vec![vec![None; nx]; nb];
    for (i, &x0) in x0_grid.iter().enumerate() {
        let column = Column::new(solver, x0, true);
        for (j, &beta) in beta_grid.iter().enumerate() {
            if let Some((p, n)) = column.counts(beta) {
                counts[j][i] = Some(p);
                minima_counts[j][i] = Some(n);
            }
        }
    }
    let boundary = settle_boundaries(&mut counts);
    Ok(RegionMap {
        x0_grid,
        beta_grid,
        counts,
        minima_counts,
        boundary,
    })
}

fn neighbours(j: usize, i: usize, nb: usize, nx: usize) -> impl Iterator<Item = (usize, usize)> {
    let up = (j + 1 < nb).then_some((j + 1, i));
    let down = j.checked_sub(1).map(|j| (j, i));
    let right = (i + 1 < nx).then_some((j, i + 1));
    let left = i.checked_sub(1).map(|i| (j, i));
    [up, down, right, left].into_iter().flatten()
}

/// Replaces even counts (a caustic inside the cell) by the largest odd
/// neighbour and flags every cell adjacent to a change of `p`.
fn settle_boundaries(counts: &mut [Vec<Option<u32>>]) -> Vec<Vec<bool>> {
    let nb = counts.len();
    let nx = counts.first().map_or(0, Vec::len);
    let mut boundary = vec![vec![false; nx]; nb];
    let original: Vec<Vec<Option<u32>>> = counts.to_vec();
    for j in 0..nb {
        for i in 0..nx {
            if let Some(p) = original[j][i] {
                if p % 2 == 0 {
                    let best = neighbours(j, i, nb, nx)
                        .filter_map(|(a, b)| original[a][b])
                        .filter(|q| q % 2 == 1)
                        .max();
                    counts[j][i] = Some(best.map_or(p + 1, |q| q.max(p - 1)));
                    boundary[j][i] = true;
                }
            }
        }
    }
    for j in 0..nb {
        for i in 0..nx {
            let Some(p) = counts[j][i] else { continue };
            if neighbours(j, i, nb, nx).any(|(a, b)| counts[a][b].is_some_and(|q| q != p)) {
                boundary[j][i] = true;
            }
        }
    }
    boundary
}

impl RegionMap {
    /// `x0,beta,p,N` rows, `beta` varying slowest; missing cells have empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x0,beta,p,N\n");
        for (j, &beta) in self.beta_grid.iter().enumerate() {
            for (i, &x0) in self.x0_grid.iter().enumerate() {
                let show = |v: Option<u32>| v.map(|v| v.to_string()).unwrap_or_default();
                out += &format!(
                    "{},{},{},{}\n",
                    sig9(x0),
                    sig9(beta),
                    show(self.counts[j][i]),
                    show(self.minima_counts[j][i])
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("region map serialises")
    }

    /// Index of the grid column closest to `x0`.
    pub fn column_near(&self, x0: f64) -> usize {
        nearest(&self.x0_grid, x0)
    }

    pub fn row_near(&self, beta: f64) -> usize {
        nearest(&self.beta_grid, beta)
    }
}

fn nearest(grid: &[f64], x: f64) -> usize {
    grid.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map_or(0, |(i, _)| i)
}
