//! Semiclassical partition function.
//!
//! `Z_sc(β) = ∫ dx0 Σ_j exp(−S_j/ħ)·Δ_j^{−1/2}`, the sum running over the
//! closed paths through `x0` that minimise the action. Where a pair of paths
//! is born (a caustic), one determinant vanishes like `|x0 − x_c|^{1/2}` and
//! the integrand diverges integrably; such points are located first and the
//! `x0` integral is split there.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::catastrophe::{caustic_locus, Column};
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::paths::{PathSolver, Stability};
use crate::potential::{PotentialSpec, UnitSystem};
use crate::quadrature::{find_root_bracketed, integrate_adaptive, QuadratureConfig, RootConfig};

/// Integrand value at one starting point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrandValue {
    pub value: f64,
    /// Number of minima that contributed.
    pub minima: usize,
    /// A minimum-like path sits on a caustic; its term was left out.
    pub divergent_at_caustic: bool,
}

/// Sum of `exp(−S/ħ)·Δ^{−1/2}` over the minima through `x0`.
pub fn integrand(solver: &PathSolver, x0: f64, beta: f64) -> Result<IntegrandValue> {
    let inv = solver.enumerate_minima_candidates(x0, beta)?;
    let hbar = solver.spec().hbar();
    let mut out = IntegrandValue {
        value: 0.0,
        minima: 0,
        divergent_at_caustic: false,
    };
    for path in &inv.paths {
        if let Some(w) = &path.warning {
            if path.stability == Stability::Minimum || path.stability == Stability::Marginal {
                return Err(Error::ConvergenceFailure(format!("path through x0 = {x0}: {w}")));
            }
            continue;
        }
        match path.stability {
            Stability::Minimum => {
                let delta = path.determinant.expect("minima carry a determinant");
                out.value += (-path.action / hbar).exp() / delta.sqrt();
                out.minima += 1;
            }
            Stability::Marginal => out.divergent_at_caustic = true,
            _ => {}
        }
    }
    Ok(out)
}

/// `1 / (2 sinh(βħω/2))`, the exact oscillator result.
pub fn z_harmonic_closed_form(omega: f64, beta: f64, units: UnitSystem) -> Result<f64> {
    if !(omega > 0.0) || !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "omega and beta must be positive, got {omega} and {beta}"
        )));
    }
    Ok(0.5 / (0.5 * beta * units.hbar * omega).sinh())
}

/// Settings for the `x0` integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZConfig {
    pub quadrature: QuadratureConfig,
    /// Integration runs over `[−cutoff, cutoff]`; chosen from `V` if `None`.
    pub x0_cutoff: Option<f64>,
    /// Grid used to detect changes in the number of minima.
    pub caustic_scan_points: usize,
}

impl Default for ZConfig {
    fn default() -> Self {
        Self {
            quadrature: QuadratureConfig {
                rel_tol: 1e-9,
                abs_tol: 1e-14,
                max_subdivisions: 200,
            },
            x0_cutoff: None,
            caustic_scan_points: 200,
        }
    }
}

/// Contribution of one piece of the `x0` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subinterval {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZscResult {
    pub beta: f64,
    pub value: f64,
    pub error_estimate: f64,
    /// Caustic abscissae at which the integral was split.
    pub singular_points: Vec<f64>,
    pub breakdown: Option<Vec<Subinterval>>,
}

const MAX_CUTOFF_WIDENINGS: u32 = 8;

/// Twice the largest `|x|` with `β(V(x) − min V) ≤ 50`.
pub fn default_cutoff(spec: &PotentialSpec, beta: f64) -> f64 {
    let v_min = spec
        .critical_points()
        .iter()
        .map(|c| c.v)
        .fold(f64::INFINITY, f64::min);
    let excess = |x: f64| beta * (spec.value(x) - v_min) - 50.0;
    let reach = |dir: f64| {
        let mut hi = spec.critical_radius().max(1.0);
        while excess(dir * hi) <= 0.0 {
            hi *= 2.0;
        }
        let lo = spec.critical_radius();
        if excess(dir * lo) > 0.0 {
            return lo;
        }
        find_root_bracketed(|r| excess(dir * r), (lo, hi), &RootConfig::default()).unwrap_or(hi)
    };
    2.0 * reach(1.0).max(reach(-1.0))
}

/// Positions where the number of minima changes, at fixed `beta`.
fn singular_points(solver: &PathSolver, beta: f64, cutoff: f64, scan: usize) -> Result<Vec<f64>> {
    let mut points = Vec::new();
    for well in solver.spec().find_wells((-cutoff, cutoff))? {
        if let Some((l, r)) = caustic_locus(solver, &well, beta)? {
            points.extend([l, r]);
        }
    }
    let minima = |x0: f64| Column::new(solver, x0, false).counts(beta).map(|c| c.1);
    let grid: Vec<f64> = (0..=scan)
        .map(|i| -cutoff + 2.0 * cutoff * i as f64 / scan as f64)
        .collect();
    let counts: Vec<Option<u32>> = grid.iter().map(|&x| minima(x)).collect();
    for i in 0..scan {
        let (Some(a), Some(b)) = (counts[i], counts[i + 1]) else {
            continue;
        };
        if a == b {
            continue;
        }
        let (mut lo, mut hi) = (grid[i], grid[i + 1]);
        if points.iter().any(|&p| p >= lo && p <= hi) {
            continue;
        }
        while hi - lo > 1e-13 * hi.abs().max(1.0) {
            let mid = 0.5 * (lo + hi);
            if minima(mid) == Some(a) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        points.push(0.5 * (lo + hi));
    }
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(points)
}

/// Integral of `f` over `[lo, hi]`, with `x = end ± s⁴` near singular ends.
fn integrate_piece<F>(f: &F, lo: f64, hi: f64, lo_singular: bool, hi_singular: bool, cfg: &QuadratureConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    match (lo_singular, hi_singular) {
        (false, false) => {
            let e = integrate_adaptive(f, lo, hi, cfg)?;
            Ok((e.value, e.error))
        }
        (true, true) => {
            let mid = 0.5 * (lo + hi);
            let a = integrate_piece(f, lo, mid, true, false, cfg)?;
            let b = integrate_piece(f, mid, hi, false, true, cfg)?;
            Ok((a.0 + b.0, a.1 + b.1))
        }
        (true, false) | (false, true) => {
            let (anchor, dir) = if lo_singular { (lo, 1.0) } else { (hi, -1.0) };
            let s_max = (hi - lo).powf(0.25);
            let g = |s: f64| {
                let s3 = s * s * s;
                if s == 0.0 {
                    0.0
                } else {
                    4.0 * s3 * f(anchor + dir * s3 * s)
                }
            };
            let e = integrate_adaptive(g, 0.0, s_max, cfg)?;
            Ok((e.value, e.error))
        }
    }
}

/// Semiclassical partition function at inverse temperature `beta`.
pub fn z_semiclassical(solver: &PathSolver, beta: f64, cfg: &ZConfig) -> Result<ZscResult> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    cfg.quadrature.validate()?;
    let spec = solver.spec();
    let f = |x0: f64| integrand(solver, x0, beta).map_or(f64::NAN, |v| v.value);
    let edge_excess = |cutoff: f64| {
        [-cutoff, cutoff]
            .into_iter()
            .map(f)
            .find(|v| !(v.abs() * cutoff <= cfg.quadrature.abs_tol))
    };
    let cutoff = match cfg.x0_cutoff {
        Some(c) => {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidArgument(format!("invalid x0 cutoff {c}")));
            }
            if let Some(value) = edge_excess(c) {
                return Err(Error::CutoffTooSmall { cutoff: c, value });
            }
            c
        }
        None => {
            // At low temperature the integrand decays more slowly than exp(−βV).
            let mut c = default_cutoff(spec, beta);
            let mut widenings = 0;
            while let Some(value) = edge_excess(c) {
                if widenings == MAX_CUTOFF_WIDENINGS {
                    return Err(Error::CutoffTooSmall { cutoff: c, value });
                }
                c *= 2.0;
                widenings += 1;
            }
            c
        }
    };
    let singular = singular_points(solver, beta, cutoff, cfg.caustic_scan_points)?;
    let mut breaks: Vec<(f64, bool)> = vec![(-cutoff, false), (cutoff, false)];
    breaks.extend(singular.iter().map(|&x| (x, true)));
    breaks.extend(
        solver
            .critical_points()
            .iter()
            .filter(|c| c.x.abs() < cutoff && !singular.iter().any(|s| (s - c.x).abs() < 1e-9))
            .map(|c| (c.x, false)),
    );
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pieces = Vec::with_capacity(breaks.len());
    let (mut value, mut error) = (0.0, 0.0);
    for w in breaks.windows(2) {
        let ((lo, ls), (hi, hs)) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let (v, e) = integrate_piece(&f, lo, hi, ls, hs, &cfg.quadrature)?;
        value += v;
        error += e;
        pieces.push(Subinterval {
            lo,
            hi,
            value: v,
            error: e,
        });
    }
    Ok(ZscResult {
        beta,
        value,
        error_estimate: error,
        singular_points: singular,
        breakdown: Some(pieces),
    })
}

/// High-temperature limit `√(M/(2πβħ²))·∫exp(−βV) dx`.
pub fn z_classical_limit(spec: &PotentialSpec, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    let cutoff = default_cutoff(spec, beta);
    let v_min = spec
        .critical_points()
        .iter()
        .map(|c| c.v)
        .fold(f64::INFINITY, f64::min);
    let mut breaks = vec![-cutoff, cutoff];
    breaks.extend(spec.critical_points().iter().map(|c| c.x).filter(|x| x.abs() < cutoff));
    breaks.sort_by(f64::total_cmp);
    let cfg = QuadratureConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-300,
        max_subdivisions: 200,
    };
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += integrate_adaptive(|x| (-beta * (spec.value(x) - v_min)).exp(), w[0], w[1], &cfg)?.value;
    }
    let m = spec.mass();
    let hbar = spec.hbar();
    Ok((m / (2.0 * PI * beta * hbar * hbar)).sqrt() * total * (-beta * v_min).exp())
}

/// CSV of a `Z(β)` sweep: `beta,z_sc,error_estimate,n_singular_points`.
pub fn sweep_csv(results: &[ZscResult]) -> String {
    let mut out = String::from("beta,z_sc,error_estimate,n_singular_points\n");
    for r in results {
        out += &format!(
            "{},{},{},{}\n",
            sig9(r.beta),
            sig9(r.value),
            sig9(r.error_estimate),
            r.singular_points.len()
        );
    }
    out
}
