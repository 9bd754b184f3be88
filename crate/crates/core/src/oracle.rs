//! Exact reference spectrum by finite-difference diagonalisation.
//!
//! The Hamiltonian `−(ħ²/2M)∂² + V` is discretised with the three-point
//! Laplacian on a uniform grid with Dirichlet ends. Eigenvalues come from
//! Sturm-sequence bisection on the symmetric tridiagonal matrix, so only the
//! low-lying levels are ever computed. Each level is then Richardson
//! extrapolated from three nested grids (spacing `h`, `h/2`, `h/4`); the
//! level counts as converged when the extrapolations from the coarse and the
//! fine pair agree to `CONVERGENCE_REL`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig9;
use crate::potential::PotentialSpec;

/// Largest boundary amplitude (relative to the peak) for a trusted level.
pub const DECAY_TOL: f64 = 1e-8;
/// Relative eigenvalue shift under grid refinement for a converged level.
pub const CONVERGENCE_REL: f64 = 1e-6;
/// Largest relative spectral tail accepted by [`z_exact`].
pub const TAIL_REL: f64 = 1e-10;

/// Uniform grid `x_min..=x_max` with `n_points` nodes, ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidArgument(format!(
                "grid needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 16 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 16 points, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// The nested grid with half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points - 1,
            ..*self
        }
    }
}

/// Low-lying spectrum of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Extrapolated energies, ascending. Every entry decays at the grid ends.
    pub energies: Vec<f64>,
    pub grid: Grid,
    /// Length of the leading run of refinement-stable levels.
    pub n_converged: usize,
}

impl SpectrumResult {
    /// CSV with header `n,E_n,converged`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,E_n,converged\n");
        for (n, e) in self.energies.iter().enumerate() {
            let flag = u8::from(n < self.n_converged);
            out.push_str(&format!("{n},{},{flag}\n", sig9(*e)));
        }
        out
    }
}

/// Partition function from a spectrum, with the bound used for the
/// truncated tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactZ {
    pub value: f64,
    pub tail_bound: f64,
}

/// Symmetric tridiagonal matrix with constant off-diagonal `off`.
struct Tridiagonal {
    diag: Vec<f64>,
    off: f64,
}

impl Tridiagonal {
    fn hamiltonian(spec: &PotentialSpec, grid: &Grid) -> Self {
        let h = grid.spacing();
        let kinetic = spec.hbar() * spec.hbar() / (2.0 * spec.mass() * h * h);
        let diag = (1..grid.n_points - 1)
            .map(|i| 2.0 * kinetic + spec.value(grid.x_min + i as f64 * h))
            .collect();
        Self {
            diag,
            off: -kinetic,
        }
    }

    fn pivot_floor(&self) -> f64 {
        f64::EPSILON * self.off.abs().max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `lambda`.
    fn count_below(&self, lambda: f64) -> usize {
        let e2 = self.off * self.off;
        let floor = self.pivot_floor();
        let mut q = 1.0;
        let mut count = 0;
        for (i, d) in self.diag.iter().enumerate() {
            q = d - lambda - if i == 0 { 0.0 } else { e2 / q };
            if q.abs() < floor {
                q = -floor;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |a, &d| a.min(d));
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |a, &d| a.max(d));
        (lo - r, hi + r)
    }

    /// The `k`-th eigenvalue (0-based) inside `[lo, hi]` (clipped to the
    /// Gershgorin bounds), bisected to machine precision.
    fn eigenvalue(&self, k: usize, lo: f64, hi: f64) -> f64 {
        let (g_lo, g_hi) = self.gershgorin();
        let (mut lo, mut hi) = (lo.max(g_lo), hi.min(g_hi));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Largest end amplitude relative to the peak, for the eigenvector at
    /// `lambda`, built from a twisted factorisation.
    fn boundary_ratio(&self, lambda: f64) -> f64 {
        let m = self.diag.len();
        let e = self.off;
        let floor = self.pivot_floor();
        let guard = |q: f64| if q.abs() < floor { floor.copysign(q) } else { q };
        let mut fwd = vec![0.0; m];
        let mut bwd = vec![0.0; m];
        fwd[0] = guard(self.diag[0] - lambda);
        for i in 1..m {
            fwd[i] = guard(self.diag[i] - lambda - e * e / fwd[i - 1]);
        }
        bwd[m - 1] = guard(self.diag[m - 1] - lambda);
        for i in (0..m - 1).rev() {
            bwd[i] = guard(self.diag[i] - lambda - e * e / bwd[i + 1]);
        }
        let twist = (0..m)
            .min_by(|&a, &b| {
                let ga = (fwd[a] + bwd[a] - (self.diag[a] - lambda)).abs();
                let gb = (fwd[b] + bwd[b] - (self.diag[b] - lambda)).abs();
                ga.total_cmp(&gb)
            })
            .unwrap_or(0);
        let mut z = vec![0.0; m];
        z[twist] = 1.0;
        for i in (0..twist).rev() {
            z[i] = -e * z[i + 1] / fwd[i];
        }
        for i in twist + 1..m {
            z[i] = -e * z[i - 1] / bwd[i];
        }
        let peak = z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        z[0].abs().max(z[m - 1].abs()) / peak
    }
}

/// Low-lying spectrum of `spec` on `grid`.
///
/// Levels are computed upward until one fails the boundary-decay check,
/// reaches the potential at the grid ends, or is not refinement-stable; that
/// last level is kept as the single unconverged entry. The ground state
/// failing the decay check is an error.
pub fn eigen_spectrum(spec: &PotentialSpec, grid: &Grid) -> Result<SpectrumResult> {
    let grid = Grid::new(grid.x_min, grid.x_max, grid.n_points)?;
    let mats = [
        Tridiagonal::hamiltonian(spec, &grid),
        Tridiagonal::hamiltonian(spec, &grid.refined()),
        Tridiagonal::hamiltonian(spec, &grid.refined().refined()),
    ];
    let ceiling = spec.value(grid.x_min).min(spec.value(grid.x_max));
    let available = mats.iter().map(|t| t.count_below(ceiling)).min().unwrap_or(0);
    let h = grid.spacing();
    let v_min = (0..grid.n_points)
        .map(|i| spec.value(grid.x_min + i as f64 * h))
        .fold(f64::INFINITY, f64::min);
    let mut energies = Vec::new();
    let mut n_converged = 0;
    let mut last = [f64::NEG_INFINITY; 3];
    for k in 0..available {
        let raw: [f64; 3] = std::array::from_fn(|j| mats[j].eigenvalue(k, last[j], ceiling));
        let ratio = mats[0].boundary_ratio(raw[0]);
        if !(ratio < DECAY_TOL) {
            if k == 0 {
                return Err(Error::GridTooNarrow { level: 0, ratio });
            }
            break;
        }
        last = raw;
        let coarse = (4.0 * raw[1] - raw[0]) / 3.0;
        let fine = (4.0 * raw[2] - raw[1]) / 3.0;
        energies.push(fine);
        let scale = fine.abs().max(fine - v_min);
        if (fine - coarse).abs() > CONVERGENCE_REL * scale {
            break;
        }
        n_converged += 1;
    }
    if energies.is_empty() {
        return Err(Error::GridTooNarrow {
            level: 0,
            ratio: f64::INFINITY,
        });
    }
    Ok(SpectrumResult {
        energies,
        grid,
        n_converged,
    })
}

/// `Σ_{n < n_converged} exp(−βE_n)`.
///
/// The missing tail is bounded by continuing the last converged gap as an
/// equally spaced ladder, and must stay below `TAIL_REL` of the sum.
pub fn z_exact(spectrum: &SpectrumResult, beta: f64) -> Result<ExactZ> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    let levels = &spectrum.energies[..spectrum.n_converged];
    if levels.len() < 2 {
        return Err(Error::TailNotNegligible {
            beta,
            tail: f64::INFINITY,
        });
    }
    // shift by the ground state so deep wells do not overflow
    let e0 = levels[0];
    let sum: f64 = levels.iter().map(|e| (-beta * (e - e0)).exp()).sum();
    let top = levels[levels.len() - 1];
    let gap = top - levels[levels.len() - 2];
    let r = (-beta * gap).exp();
    let tail = (-beta * (top - e0)).exp() * r / (1.0 - r);
    if !(tail <= TAIL_REL * sum) {
        return Err(Error::TailNotNegligible {
            beta,
            tail: tail / sum,
        });
    }
    let scale = (-beta * e0).exp();
    Ok(ExactZ {
        value: sum * scale,
        tail_bound: tail * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::z_harmonic_closed_form;
    use crate::UnitSystem;

    fn harmonic_spectrum(lo: f64, hi: f64, n: usize) -> SpectrumResult {
        let spec = PotentialSpec::harmonic(1.0).unwrap();
        eigen_spectrum(&spec, &Grid::new(lo, hi, n).unwrap()).unwrap()
    }

    #[test]
    fn sturm_count_matches_small_matrix() {
        // 2×2 with diag (2, 2), off −1 has eigenvalues 1 and 3
        let t = Tridiagonal {
            diag: vec![2.0, 2.0],
            off: -1.0,
        };
        assert_eq!(t.count_below(0.5), 0);
        assert_eq!(t.count_below(2.0), 1);
        assert_eq!(t.count_below(3.5), 2);
        assert!((t.eigenvalue(0, f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-15);
        assert!((t.eigenvalue(1, 1.0, f64::INFINITY) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn discrete_laplacian_eigenvalues() {
        // −∂² on (0, π) with Dirichlet ends: three-point eigenvalues are
        // (4/h²) sin²(kh/2), k = 1, 2, …
        let n = 201;
        let h = std::f64::consts::PI / (n - 1) as f64;
        let t = Tridiagonal {
            diag: vec![2.0 / (h * h); n - 2],
            off: -1.0 / (h * h),
        };
        let mut lo = f64::NEG_INFINITY;
        for k in 0..20 {
            let lam = t.eigenvalue(k, lo, f64::INFINITY);
            let exact = 4.0 / (h * h) * ((k + 1) as f64 * h / 2.0).sin().powi(2);
            assert!((lam - exact).abs() < 1e-11 * exact, "k={k}: {lam} vs {exact}");
            lo = lam;
        }
    }

    #[test]
    fn harmonic_calibration() {
        let s = harmonic_spectrum(-12.0, 12.0, 4001);
        assert!((s.energies[0] - 0.5).abs() < 1e-6);
        assert!((s.energies[10] - 10.5).abs() < 1e-4);
        for (n, e) in s.energies[..s.n_converged].iter().enumerate() {
            assert!((e - (n as f64 + 0.5)).abs() < 1e-6 * e, "n={n}: {e}");
        }
        assert!(s.n_converged > 20 && s.n_converged <= s.energies.len());
    }

    #[test]
    fn harmonic_partition_function() {
        let s = harmonic_spectrum(-12.0, 12.0, 4001);
        let z = z_exact(&s, 1.0).unwrap();
        assert!((z.value - 0.959_517_375_67).abs() < 1e-8);
        let z = z_exact(&s, 5.0).unwrap();
        let series = (-2.5f64).exp() / (1.0 - (-5f64).exp());
        assert!((z.value - series).abs() < 1e-9 && (z.value - 0.082_641).abs() < 1e-6);
        let z = z_exact(&s, 60.0).unwrap();
        assert!((z.value / (-30f64).exp() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn harmonic_self_consistency() {
        let s = harmonic_spectrum(-16.0, 16.0, 4001);
        let units = UnitSystem::default();
        for i in 0..=19 {
            let beta = 0.5 + 0.5 * i as f64;
            let z = z_exact(&s, beta).unwrap().value;
            let exact = z_harmonic_closed_form(1.0, beta, units).unwrap();
            assert!((z / exact - 1.0).abs() < 1e-5, "β={beta}: {z} vs {exact}");
        }
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let spec = PotentialSpec::harmonic(1.0).unwrap();
        assert!(matches!(
            eigen_spectrum(&spec, &Grid::new(-1.0, 1.0, 401).unwrap()),
            Err(Error::GridTooNarrow { level: 0, .. })
        ));
    }

    #[test]
    fn small_beta_trips_the_tail_bound() {
        let s = harmonic_spectrum(-12.0, 12.0, 2001);
        assert!(matches!(z_exact(&s, 0.01), Err(Error::TailNotNegligible { .. })));
        assert!(z_exact(&s, 0.0).is_err());
    }

    #[test]
    fn tunnelling_splitting_shrinks_with_separation() {
        let mut splittings = Vec::new();
        for a in [1.0, 1.5, 2.0] {
            let spec = PotentialSpec::double_well(1.0, a).unwrap();
            let s = eigen_spectrum(&spec, &Grid::new(-a - 3.0, a + 3.0, 2001).unwrap()).unwrap();
            assert!(s.n_converged >= 2);
            let split = s.energies[1] - s.energies[0];
            assert!(split > 0.0 && split < s.energies[0], "a={a}: {split}");
            splittings.push(split);
        }
        assert!(splittings.windows(2).all(|w| w[1] < w[0]), "{splittings:?}");
    }

    #[test]
    fn refinement_stability_of_z() {
        for (spec, reach) in [
            (PotentialSpec::harmonic(1.0).unwrap(), 12.0),
            (PotentialSpec::double_well(1.0, 1.0).unwrap(), 6.0),
            (PotentialSpec::harmonic_plus_quartic(1.0, 0.5).unwrap(), 6.0),
        ] {
            let grid = Grid::new(-reach, reach, 2001).unwrap();
            let a = z_exact(&eigen_spectrum(&spec, &grid).unwrap(), 1.0).unwrap().value;
            let b = z_exact(&eigen_spectrum(&spec, &grid.refined()).unwrap(), 1.0).unwrap().value;
            assert!((a / b - 1.0).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn energies_strictly_increase() {
        for spec in [
            PotentialSpec::double_well(1.0, 1.0).unwrap(),
            PotentialSpec::harmonic_plus_quartic(1.0, 0.5).unwrap(),
            PotentialSpec::polynomial(vec![0.0, 0.3, -1.0, 0.0, 0.25]).unwrap(),
        ] {
            let s = eigen_spectrum(&spec, &Grid::new(-6.0, 6.0, 1001).unwrap()).unwrap();
            assert!(s.energies.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn csv_layout() {
        let s = SpectrumResult {
            energies: vec![0.5, 1.5, 2.500_000_01],
            grid: Grid::new(-1.0, 1.0, 16).unwrap(),
            n_converged: 2,
        };
        assert_eq!(s.to_csv(), "n,E_n,converged\n0,0.5,1\n1,1.5,1\n2,2.50000001,0\n");
    }
}
