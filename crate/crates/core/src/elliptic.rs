//! Jacobi elliptic functions and the closed-form turning point of the
//! harmonic-plus-quartic oscillator.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::potential::{Family, PotentialSpec};
use crate::quadrature::{find_root_bracketed, RootConfig};

/// Below this complementary modulus the `k = 1` limit is used verbatim.
const KC_LIMIT: f64 = 1e-9;
const MAX_AGM_STEPS: usize = 64;

/// Argument and modulus of a Jacobi elliptic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticArgs {
    pub u: f64,
    /// Modulus `k` (not the parameter `m = k²`).
    pub k: f64,
}

impl EllipticArgs {
    pub fn new(u: f64, k: f64) -> Result<Self> {
        if !u.is_finite() || !(0.0..=1.0).contains(&k) {
            return Err(Error::InvalidArgument(format!(
                "need finite u and 0 <= k <= 1, got u = {u}, k = {k}"
            )));
        }
        Ok(Self { u, k })
    }
}

/// `sn`, `cn` and `dn` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

fn complementary(k: f64) -> f64 {
    ((1.0 - k) * (1.0 + k)).max(0.0).sqrt()
}

/// Jacobi functions from the complementary modulus `kc = √(1 − k²)`.
pub(crate) fn jacobi_kc(u: f64, kc: f64) -> Jacobi {
    if kc <= KC_LIMIT {
        let sech = 1.0 / u.cosh();
        return Jacobi {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        };
    }
    let k = (1.0 - kc * kc).max(0.0).sqrt();
    if k == 0.0 {
        return Jacobi {
            sn: u.sin(),
            cn: u.cos(),
            dn: 1.0,
        };
    }
    // descending Landen sequence
    let mut a = [0.0; MAX_AGM_STEPS + 1];
    let mut c = [0.0; MAX_AGM_STEPS + 1];
    a[0] = 1.0;
    c[0] = k;
    let mut b = kc;
    let mut n = 0;
    while n < MAX_AGM_STEPS && c[n].abs() > f64::EPSILON * a[n] {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    Jacobi {
        sn,
        cn,
        dn: (kc * kc + k * k * cn * cn).sqrt(),
    }
}

/// `sn(u, k)`, `cn(u, k)` and `dn(u, k)` from one AGM pass.
pub fn jacobi(args: EllipticArgs) -> Jacobi {
    jacobi_kc(args.u, complementary(args.k))
}

/// Jacobi `cn(u, k)` for `0 ≤ k ≤ 1`.
pub fn jacobi_cn(u: f64, k: f64) -> f64 {
    jacobi_kc(u, complementary(k)).cn
}

pub fn jacobi_sn(u: f64, k: f64) -> f64 {
    jacobi_kc(u, complementary(k)).sn
}

pub fn jacobi_dn(u: f64, k: f64) -> f64 {
    jacobi_kc(u, complementary(k)).dn
}

/// Complete elliptic integral of the first kind, `K(k) = π / (2·AGM(1, k'))`.
/// Infinite at `k = 1`.
pub fn complete_k(k: f64) -> f64 {
    complete_k_kc(complementary(k))
}

fn complete_k_kc(kc: f64) -> f64 {
    if kc == 0.0 {
        return f64::INFINITY;
    }
    let (mut a, mut b) = (1.0_f64, kc);
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    FRAC_PI_2 / a
}

/// Elliptic argument and complementary modulus at a trial turning point.
fn quartic_args(omega: f64, lambda: f64, mass: f64, hbar: f64, beta: f64, x_turn: f64) -> (f64, f64) {
    let mw2 = mass * omega * omega;
    let q = lambda * x_turn * x_turn;
    let u = 0.5 * beta * hbar * omega * (1.0 + 4.0 * q / mw2).sqrt();
    let kc = (2.0 * q / (mw2 + 4.0 * q)).sqrt();
    (u, kc)
}

/// Elliptic arguments `(u, k)` at a given turning point.
pub fn quartic_elliptic_args(spec: &PotentialSpec, beta: f64, x_turn: f64) -> Result<EllipticArgs> {
    let (omega, lambda) = quartic_params(spec)?;
    let (u, kc) = quartic_args(omega, lambda, spec.mass(), spec.hbar(), beta, x_turn);
    EllipticArgs::new(u, complementary(kc))
}

fn quartic_params(spec: &PotentialSpec) -> Result<(f64, f64)> {
    match *spec.family() {
        Family::HarmonicPlusQuartic { omega, lambda } => Ok((omega, lambda)),
        _ => Err(Error::InvalidArgument(
            "closed-form turning point needs a harmonic-plus-quartic potential".into(),
        )),
    }
}

/// Turning point of the single closed path through `x0` for
/// `V = ½Mω²x² + λx⁴`, solving `x_t = x0·cn(u(x_t), k(x_t))`.
///
/// Only roots with `u < K(k)` describe a path that stays on one side of the
/// origin; larger `u` picks up spurious roots from the periodicity of `cn`.
pub fn quartic_turning_point(spec: &PotentialSpec, x0: f64, beta: f64) -> Result<f64> {
    let (omega, lambda) = quartic_params(spec)?;
    if !(beta >= 0.0) || !x0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need beta >= 0 and finite x0, got beta = {beta}, x0 = {x0}"
        )));
    }
    if x0 == 0.0 {
        return Ok(0.0);
    }
    let r = x0.abs();
    let args = |xt: f64| quartic_args(omega, lambda, spec.mass(), spec.hbar(), beta, xt);
    let quarter_gap = |xt: f64| {
        let (u, kc) = args(xt);
        u - complete_k_kc(kc)
    };
    let upper = if quarter_gap(r) < 0.0 {
        r
    } else {
        find_root_bracketed(quarter_gap, (0.0, r), &RootConfig::with_scale(r))?
    };
    let g = |xt: f64| {
        let (u, kc) = args(xt);
        xt - r * jacobi_kc(u, kc).cn
    };
    let root = find_root_bracketed(g, (0.0, upper), &RootConfig::with_scale(r)).map_err(|e| {
        Error::ConvergenceFailure(format!("no turning point bracket in (0, {r}): {e}"))
    })?;
    Ok(root.copysign(x0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{PathSolver, Side};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_moduli() {
        for k in [0.0, 0.3, 0.9, 1.0] {
            assert_eq!(jacobi_cn(0.0, k), 1.0);
        }
        assert!((jacobi_cn(1.0, 0.0) - 0.540_302_31).abs() < 1e-8);
        assert!((jacobi_cn(1.0, 0.0) - 1f64.cos()).abs() < 1e-15);
        assert!((jacobi_cn(1.0, 1.0) - 0.648_054_27).abs() < 1e-8);
        assert!((jacobi_cn(1.0, 1.0) - 1.0 / 1f64.cosh()).abs() < 1e-15);
    }

    #[test]
    fn tabulated_values() {
        // m = k² = 0.5, u = 0.5; reference values from a 20-digit evaluation
        let k = 0.5f64.sqrt();
        let j = jacobi(EllipticArgs::new(0.5, k).unwrap());
        assert!((j.sn - 0.470_750_473_655_657).abs() < 1e-12);
        assert!((j.cn - 0.882_266_394_890_440).abs() < 1e-12);
        assert!((j.dn - 0.942_972_425_777_386).abs() < 1e-12);
        assert!((complete_k(k) - 1.854_074_677_301_372).abs() < 1e-13);
    }

    #[test]
    fn continuity_towards_unit_modulus() {
        for kc in [1e-6, 1e-8, 2e-9] {
            let a = jacobi_kc(0.7, kc).cn;
            assert!((a - 1.0 / 0.7f64.cosh()).abs() < 1e-10);
        }
    }

    #[test]
    fn pythagorean_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let u: f64 = rng.gen_range(-20.0..20.0);
            let k: f64 = rng.gen_range(0.0..=1.0);
            let j = jacobi(EllipticArgs::new(u, k).unwrap());
            assert!((j.cn * j.cn + j.sn * j.sn - 1.0).abs() < 1e-12, "u={u} k={k}");
            assert!((j.dn * j.dn + k * k * j.sn * j.sn - 1.0).abs() < 1e-12, "u={u} k={k}");
        }
    }

    #[test]
    fn quarter_period_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let k: f64 = rng.gen_range(0.0..0.999);
            let u: f64 = rng.gen_range(-5.0..5.0);
            let kk = complete_k(k);
            assert!((jacobi_cn(u + 4.0 * kk, k) - jacobi_cn(u, k)).abs() < 1e-10);
            assert!(jacobi_cn(kk, k).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_modulus() {
        assert!(EllipticArgs::new(0.1, 1.5).is_err());
        assert!(EllipticArgs::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn harmonic_limit() {
        let spec = PotentialSpec::harmonic_plus_quartic(1.0, 1e-12).unwrap();
        let xt = quartic_turning_point(&spec, 1.0, 2.0).unwrap();
        assert!((xt - 0.648_054_27).abs() < 1e-6);
        assert!((xt - 1.0 / 1f64.cosh()).abs() < 1e-9);
        let xt = quartic_turning_point(&spec, -1.0, 2.0).unwrap();
        assert!((xt + 1.0 / 1f64.cosh()).abs() < 1e-9);
    }

    #[test]
    fn collapse_at_high_temperature() {
        let spec = PotentialSpec::harmonic_plus_quartic(1.0, 0.5).unwrap();
        assert_eq!(quartic_turning_point(&spec, 1.3, 0.0).unwrap(), 1.3);
        let xt = quartic_turning_point(&spec, 1.3, 1e-4).unwrap();
        assert!((xt - 1.3).abs() < 1e-6);
        assert_eq!(quartic_turning_point(&spec, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn elliptic_args_within_range() {
        let spec = PotentialSpec::harmonic_plus_quartic(1.0, 0.5).unwrap();
        let a = quartic_elliptic_args(&spec, 1.0, 0.8).unwrap();
        assert!(a.k >= 0.5f64.sqrt() && a.k <= 1.0);
        assert!(quartic_turning_point(&PotentialSpec::harmonic(1.0).unwrap(), 1.0, 1.0).is_err());
    }

    fn generic(solver: &PathSolver, x0: f64, beta: f64) -> f64 {
        let sols = solver.solve_turning_points(x0, beta).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].side, Side::Left);
        sols[0].x_turn().unwrap()
    }

    #[test]
    fn agrees_with_generic_solver_example() {
        let spec = PotentialSpec::harmonic_plus_quartic(1.0, 0.5).unwrap();
        let solver = PathSolver::new(&spec);
        let a = quartic_turning_point(&spec, 1.0, 1.0).unwrap();
        assert!((a - generic(&solver, 1.0, 1.0)).abs() < 1e-8);
    }

    #[test]
    fn agrees_with_generic_solver_on_grid() {
        let spec = PotentialSpec::harmonic_plus_quartic(1.0, 0.5).unwrap();
        let solver = PathSolver::new(&spec);
        for i in 0..20 {
            let x0 = 0.1 + 2.9 * i as f64 / 19.0;
            for j in 0..20 {
                let beta = 0.1 + 4.9 * j as f64 / 19.0;
                let a = quartic_turning_point(&spec, x0, beta).unwrap();
                let b = generic(&solver, x0, beta);
                assert!((a - b).abs() < 1e-8, "x0={x0} beta={beta}: {a} vs {b}");
            }
        }
    }
}
