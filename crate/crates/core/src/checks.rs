//! Self-checks against closed forms, shared by the command line `selftest`
//! and the acceptance suite.

use crate::elliptic::{jacobi, quartic_turning_point, EllipticArgs};
use crate::partition::{z_harmonic_closed_form, z_semiclassical, ZConfig};
use crate::paths::{PathSolver, Side};
use crate::potential::PotentialSpec;
use crate::Result;

/// Largest relative error allowed for the harmonic partition function.
pub const HARMONIC_REL_TOL: f64 = 1e-6;
/// Largest disagreement between the elliptic and the generic turning point.
pub const ELLIPTIC_ABS_TOL: f64 = 1e-8;
/// Largest violation of `cn² + sn² = 1`.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Outcome of one check: the worst deviation seen and the bound it is held to.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub worst: f64,
    pub bound: f64,
    pub cases: usize,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.worst <= self.bound
    }
}

/// Semiclassical `Z` of the oscillator against `1/(2 sinh(βħω/2))` for
/// `β ∈ {0.1, 0.5, 1, 2, 5, 10}`, `ω ∈ {0.5, 1, 2}`.
pub fn harmonic_exactness() -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for omega in [0.5, 1.0, 2.0] {
        let spec = PotentialSpec::harmonic(omega)?;
        let solver = PathSolver::new(&spec);
        for beta in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let z = z_semiclassical(&solver, beta, &ZConfig::default())?.value;
            let exact = z_harmonic_closed_form(omega, beta, spec.units())?;
            worst = worst.max((z / exact - 1.0).abs());
            cases += 1;
        }
    }
    Ok(CheckReport {
        name: "harmonic exactness",
        worst,
        bound: HARMONIC_REL_TOL,
        cases,
    })
}

/// Elliptic turning point of `½x² + ½x⁴` against the generic solver on a
/// 20×20 grid `x0 ∈ [0.1, 3]`, `β ∈ [0.1, 5]`.
pub fn elliptic_cross_check() -> Result<CheckReport> {
    let spec = PotentialSpec::harmonic_plus_quartic(1.0, 0.5)?;
    let solver = PathSolver::new(&spec);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let x0 = 0.1 + 2.9 * i as f64 / 19.0;
        for j in 0..20 {
            let beta = 0.1 + 4.9 * j as f64 / 19.0;
            let elliptic = quartic_turning_point(&spec, x0, beta)?;
            let generic = solver
                .solve_turning_points(x0, beta)?
                .into_iter()
                .find(|s| s.side == Side::Left && s.n_periods == 0)
                .and_then(|s| s.x_turn())
                .unwrap_or(f64::NAN);
            let dev = (elliptic - generic).abs();
            worst = if dev.is_nan() { f64::INFINITY } else { worst.max(dev) };
        }
    }
    Ok(CheckReport {
        name: "elliptic cross-check",
        worst,
        bound: ELLIPTIC_ABS_TOL,
        cases: 400,
    })
}

/// `cn² + sn² = 1` at `n` points of a Weyl sequence covering
/// `u ∈ [−20, 20]`, `k ∈ [0, 1]`.
pub fn jacobi_identity(n: usize) -> Result<CheckReport> {
    const G1: f64 = 0.754_877_666_246_692_7;
    const G2: f64 = 0.569_840_290_998_053_2;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let t = i as f64 + 0.5;
        let u = -20.0 + 40.0 * (t * G1).fract();
        let k = (t * G2).fract();
        let j = jacobi(EllipticArgs::new(u, k)?);
        worst = worst.max((j.cn * j.cn + j.sn * j.sn - 1.0).abs());
    }
    Ok(CheckReport {
        name: "jacobi identity",
        worst,
        bound: IDENTITY_TOL,
        cases: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_check_passes() {
        let r = jacobi_identity(1000).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.cases, 1000);
    }

    #[test]
    fn report_threshold() {
        let r = CheckReport {
            name: "x",
            worst: 2e-6,
            bound: 1e-6,
            cases: 1,
        };
        assert!(!r.passed());
    }
}
