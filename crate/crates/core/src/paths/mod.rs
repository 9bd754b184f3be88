//! Closed Euclidean classical paths through a point.
//!
//! A path of inverse temperature `β` starts and ends at `x0`, moves in the
//! inverted potential `−V`, and therefore only reaches points with
//! `V(x) ≥ E`, where `E` is its conserved energy. [`PathSolver`] finds every
//! such path, its action, its fluctuation determinant (when one turning point
//! suffices to describe it), and whether it is a minimum of the action.

mod legs;
mod scan;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{CriticalPoint, PotentialSpec};
use crate::quadrature::{derivative_central, QuadratureConfig};

pub(crate) use legs::Landscape;
pub use scan::ScanConfig;
pub(crate) use scan::{Branch, Families, Shape};

/// Which way the path leaves `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    /// The constant path sitting on a critical point of `V`.
    Still,
}

impl Side {
    fn mirrored(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::Still => Side::Still,
        }
    }
}

/// Character of a path as a stationary point of the Euclidean action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Minimum,
    OneSaddle,
    /// Saddle with at least this many negative modes (two or more).
    MultiSaddle(u32),
    /// Determinant numerically zero: the path sits on a caustic.
    Marginal,
}

impl Stability {
    fn from_index(k: u32) -> Self {
        match k {
            0 => Stability::Minimum,
            1 => Stability::OneSaddle,
            k => Stability::MultiSaddle(k),
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stability::Minimum => f.write_str("minimum"),
            Stability::OneSaddle => f.write_str("one_saddle"),
            Stability::MultiSaddle(k) => write!(f, "multi_saddle({k})"),
            Stability::Marginal => f.write_str("marginal"),
        }
    }
}

impl Serialize for Stability {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Stability {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "minimum" => Ok(Stability::Minimum),
            "one_saddle" => Ok(Stability::OneSaddle),
            "marginal" => Ok(Stability::Marginal),
            other => other
                .strip_prefix("multi_saddle(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|k| k.parse().ok())
                .map(Stability::MultiSaddle)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown stability `{other}`"))),
        }
    }
}

/// A solution of the time condition at fixed `(x0, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningSolution {
    /// Direction of the first excursion; `Still` for the constant path.
    pub side: Side,
    /// Number of complete oscillations between both turning points.
    pub n_periods: u32,
    /// Only full oscillations, no extra excursion.
    pub periodic: bool,
    pub x_minus: Option<f64>,
    pub x_plus: Option<f64>,
    pub energy: f64,
    /// Admissible interval of the turning point, for single excursions.
    domain: Option<(f64, f64)>,
}

impl TurningSolution {
    /// The turning point on `side` (the critical point for the still path).
    pub fn x_turn(&self) -> Option<f64> {
        match self.side {
            Side::Left | Side::Still => self.x_minus,
            Side::Right => self.x_plus,
        }
    }

    fn is_single(&self) -> bool {
        self.n_periods == 0 && !self.periodic && self.side != Side::Still
    }
}

/// A closed classical path with its action and stability data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPath {
    pub x0: f64,
    pub beta: f64,
    pub side: Side,
    pub x_minus: Option<f64>,
    pub x_plus: Option<f64>,
    #[serde(rename = "n")]
    pub n_periods: u32,
    pub periodic: bool,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "S")]
    pub action: f64,
    #[serde(rename = "Delta")]
    pub determinant: Option<f64>,
    pub stability: Stability,
    /// Set when part of the evaluation failed; the numbers are then unreliable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ClassicalPath {
    pub fn x_turn(&self) -> Option<f64> {
        match self.side {
            Side::Left | Side::Still => self.x_minus,
            Side::Right => self.x_plus,
        }
    }

    pub fn is_minimum(&self) -> bool {
        self.stability == Stability::Minimum && self.warning.is_none()
    }
}

/// All closed paths through `x0` at inverse temperature `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathInventory {
    pub x0: f64,
    pub beta: f64,
    /// Sorted by ascending action.
    pub paths: Vec<ClassicalPath>,
    pub p: usize,
    #[serde(rename = "N")]
    pub n_minima: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PathInventory {
    fn assemble(x0: f64, beta: f64, mut paths: Vec<ClassicalPath>) -> Self {
        paths.sort_by(|a, b| a.action.total_cmp(&b.action));
        let warnings = paths.iter().filter_map(|p| p.warning.clone()).collect();
        let n_minima = paths.iter().filter(|p| p.is_minimum()).count();
        Self {
            x0,
            beta,
            p: paths.len(),
            n_minima,
            paths,
            warnings,
        }
    }

    pub fn minima(&self) -> impl Iterator<Item = &ClassicalPath> {
        self.paths.iter().filter(|p| p.is_minimum())
    }
}

/// Numerical settings of the path search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub quadrature: QuadratureConfig,
    pub scan: ScanConfig,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            quadrature: QuadratureConfig {
                rel_tol: 1e-12,
                abs_tol: 1e-300,
                max_subdivisions: 200,
            },
            scan: ScanConfig::default(),
        }
    }
}

/// Finds and characterises closed classical paths for one potential.
#[derive(Debug, Clone)]
pub struct PathSolver {
    land: Landscape,
    scan: ScanConfig,
}

impl PathSolver {
    pub fn new(spec: &PotentialSpec) -> Self {
        let cfg = PathConfig::default();
        Self {
            land: Landscape::new(spec.clone(), cfg.quadrature),
            scan: cfg.scan,
        }
    }

    pub fn with_config(spec: &PotentialSpec, cfg: PathConfig) -> Result<Self> {
        cfg.quadrature.validate()?;
        if cfg.scan.initial < 2 || cfg.scan.max < cfg.scan.initial {
            return Err(Error::InvalidArgument(format!(
                "scan grid needs 2 <= initial <= max, got {} and {}",
                cfg.scan.initial, cfg.scan.max
            )));
        }
        Ok(Self {
            land: Landscape::new(spec.clone(), cfg.quadrature),
            scan: cfg.scan,
        })
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.land.spec
    }

    pub(crate) fn landscape(&self) -> &Landscape {
        &self.land
    }

    pub fn critical_points(&self) -> &[CriticalPoint] {
        &self.land.crit
    }

    /// Starting point moved onto a critical point when it is within snapping
    /// distance, together with that critical point.
    pub(crate) fn snap(&self, x0: f64) -> (f64, Option<CriticalPoint>) {
        match self.land.critical_at(x0) {
            Some(c) => (c.x, Some(c)),
            None => (x0, None),
        }
    }

    pub(crate) fn families(&self, x0: f64, with_bounded: bool) -> Families {
        Families::new(&self.land, x0, self.scan, with_bounded)
    }

    /// Inverse temperature of the excursion `x0 → x_turn → x0`.
    pub fn time_of_flight(&self, x0: f64, x_turn: f64) -> Result<f64> {
        if !x0.is_finite() || !x_turn.is_finite() {
            return Err(Error::InvalidArgument("positions must be finite".into()));
        }
        if x0 == x_turn {
            return Ok(0.0);
        }
        self.check_leg(x0, x_turn)?;
        self.land.round_trip_beta(x_turn, x0)
    }

    fn check_leg(&self, x0: f64, x_turn: f64) -> Result<()> {
        if self.land.critical_at(x_turn).is_some() {
            return Err(Error::SingularTurningPoint(x_turn));
        }
        let interior_ok = (1..=100).all(|i| {
            let x = x_turn + (x0 - x_turn) * i as f64 / 101.0;
            self.land.diff(x, x_turn) > 0.0
        }) && self
            .land
            .crit
            .iter()
            .filter(|c| (c.x - x0) * (c.x - x_turn) < 0.0)
            .all(|c| self.land.diff(c.x, x_turn) > 0.0)
            && self.land.diff(x0, x_turn) > 0.0;
        if interior_ok {
            Ok(())
        } else {
            Err(Error::InvalidBracket { x0, x_turn })
        }
    }

    /// Inverse temperature of a path of energy `energy` that makes `n_periods`
    /// full oscillations between the two turning points around `x0`, plus one
    /// extra excursion on `side` (none for `Side::Still`).
    pub fn time_of_flight_periodic(&self, x0: f64, energy: f64, n_periods: u32, side: Side) -> Result<f64> {
        if !(self.spec().value(x0) > energy) {
            return Err(Error::InvalidArgument(format!(
                "energy {energy} must lie below V(x0) = {}",
                self.spec().value(x0)
            )));
        }
        let turn = |dir: f64| -> Result<f64> {
            let x = self.land.first_descent_to_energy(x0, dir, energy).ok_or_else(|| {
                Error::InvalidArgument(format!("no turning point at energy {energy} in direction {dir}"))
            })?;
            if self.land.critical_at(x).is_some() {
                return Err(Error::SingularTurningPoint(x));
            }
            self.land.round_trip_beta(x, x0)
        };
        let need_left = n_periods > 0 || side == Side::Left;
        let need_right = n_periods > 0 || side == Side::Right;
        let t_left = if need_left { turn(-1.0)? } else { 0.0 };
        let t_right = if need_right { turn(1.0)? } else { 0.0 };
        let extra = match side {
            Side::Left => t_left,
            Side::Right => t_right,
            Side::Still => 0.0,
        };
        Ok(n_periods as f64 * (t_left + t_right) + extra)
    }

    /// Every solution of the time condition at `(x0, beta)`.
    pub fn solve_turning_points(&self, x0: f64, beta: f64) -> Result<Vec<TurningSolution>> {
        self.solve(x0, beta, true)
    }

    fn solve(&self, x0: f64, beta: f64, with_bounded: bool) -> Result<Vec<TurningSolution>> {
        check_inputs(x0, beta)?;
        let (x0, still) = self.snap(x0);
        let fam = self.families(x0, with_bounded);
        Ok(self.solutions_from(&fam, still, beta))
    }

    pub(crate) fn solutions_from(
        &self,
        fam: &Families,
        still: Option<CriticalPoint>,
        beta: f64,
    ) -> Vec<TurningSolution> {
        let land = &self.land;
        let x0 = fam.x0;
        let mut out = Vec::new();
        if let Some(c) = still {
            out.push(TurningSolution {
                side: Side::Still,
                n_periods: 0,
                periodic: false,
                x_minus: Some(c.x),
                x_plus: Some(c.x),
                energy: c.v,
                domain: None,
            });
        }
        for table in &fam.single {
            let Shape::Single(stretch) = table.shape else { continue };
            for r in table.roots(land, x0, Branch::Excursion, beta) {
                let (side, x_minus, x_plus) = if stretch.dir < 0.0 {
                    (Side::Left, Some(r.p), None)
                } else {
                    (Side::Right, None, Some(r.p))
                };
                out.push(TurningSolution {
                    side,
                    n_periods: 0,
                    periodic: false,
                    x_minus,
                    x_plus,
                    energy: land.spec.value(r.p),
                    domain: Some(stretch.interval()),
                });
            }
        }
        for table in &fam.bounded {
            let Some((_, t_min)) = table.branch_min(land, x0, Branch::Periodic(1)) else {
                continue;
            };
            let n_max = (beta / t_min).floor() as u32;
            for n in 1..=n_max {
                let branches = [
                    (Branch::Periodic(n), [Side::Right, Side::Left].as_slice(), true),
                    (Branch::RightFirst(n), [Side::Right].as_slice(), false),
                    (Branch::LeftFirst(n), [Side::Left].as_slice(), false),
                ];
                for (branch, sides, periodic) in branches {
                    for r in table.roots(land, x0, branch, beta) {
                        for &side in sides {
                            out.push(TurningSolution {
                                side,
                                n_periods: n,
                                periodic,
                                x_minus: Some(r.sample.partner),
                                x_plus: Some(r.p),
                                energy: land.spec.value(r.p),
                                domain: None,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Euclidean action of a path.
    pub fn action(&self, x0: f64, beta: f64, sol: &TurningSolution) -> Result<f64> {
        let hbar = self.spec().hbar();
        if sol.side == Side::Still {
            return Ok(beta * hbar * sol.energy);
        }
        let (x0, _) = self.snap(x0);
        let leg = |x: Option<f64>| -> Result<f64> {
            let x = x.ok_or_else(|| Error::InvalidArgument("missing turning point".into()))?;
            self.land.round_trip_action(x, x0)
        };
        let base = beta * hbar * sol.energy;
        if sol.is_single() {
            return Ok(base + leg(sol.x_turn())?);
        }
        let (left, right) = (leg(sol.x_minus)?, leg(sol.x_plus)?);
        let extra = match (sol.periodic, sol.side) {
            (true, _) | (_, Side::Still) => 0.0,
            (false, Side::Left) => left,
            (false, Side::Right) => right,
        };
        Ok(base + sol.n_periods as f64 * (left + right) + extra)
    }

    /// Fluctuation determinant of a single-excursion or still path.
    pub fn fluctuation_determinant(&self, x0: f64, beta: f64, sol: &TurningSolution) -> Result<f64> {
        let spec = self.spec();
        let (hbar, mass) = (spec.hbar(), spec.mass());
        if sol.side == Side::Still {
            let x = sol.x_minus.unwrap_or(x0);
            let v2 = spec.d2(x);
            let omega = (v2.abs() / mass).sqrt();
            let bw = beta * hbar * omega;
            return Ok(if omega * beta * hbar < 1e-8 {
                2.0 * PI * hbar * hbar * beta / mass
            } else if v2 < 0.0 {
                2.0 * PI * hbar * bw.sin() / (mass * omega)
            } else {
                2.0 * PI * hbar * bw.sinh() / (mass * omega)
            });
        }
        if !sol.is_single() {
            return Err(Error::Unavailable(sol.n_periods));
        }
        let (x0, _) = self.snap(x0);
        let xt = sol
            .x_turn()
            .ok_or_else(|| Error::InvalidArgument("missing turning point".into()))?;
        let slope = spec.d1(xt);
        let drop = self.land.diff(xt, x0);
        if slope.abs() <= 1e-12 * (drop / (xt - x0)).abs().max(1e-300) || slope == 0.0 {
            return Err(Error::SingularTurningPoint(xt));
        }
        let (lo, hi) = sol.domain.unwrap_or((xt.min(x0), xt.max(x0)));
        let room = (xt - lo).min(hi - xt).max(0.0);
        let h = 1e-3 * room;
        if !(h > 0.0) {
            return Err(Error::SingularTurningPoint(xt));
        }
        let scale = h / 1e-6_f64.max(1e-6 * xt.abs());
        let dbeta = derivative_central(|p| self.land.round_trip_beta(p, x0), xt, scale)?;
        Ok(4.0 * PI * hbar * hbar / mass * drop / slope * dbeta)
    }

    /// Assembles a full path record; evaluation failures become a warning.
    pub fn build_path(&self, x0: f64, beta: f64, sol: &TurningSolution) -> ClassicalPath {
        let mut warning = None;
        let action = self.action(x0, beta, sol).unwrap_or_else(|e| {
            warning = Some(format!("action: {e}"));
            f64::NAN
        });
        let determinant = match self.fluctuation_determinant(x0, beta, sol) {
            Ok(d) => Some(d),
            Err(Error::Unavailable(_)) => None,
            Err(e) => {
                warning.get_or_insert(format!("determinant: {e}"));
                None
            }
        };
        let mut path = ClassicalPath {
            x0,
            beta,
            side: sol.side,
            x_minus: sol.x_minus,
            x_plus: sol.x_plus,
            n_periods: sol.n_periods,
            periodic: sol.periodic,
            energy: sol.energy,
            action,
            determinant,
            stability: Stability::Marginal,
            warning,
        };
        path.stability = classify_stability(self.spec(), &path, determinant);
        path
    }

    /// All closed paths through `x0`, sorted by ascending action.
    pub fn enumerate(&self, x0: f64, beta: f64) -> Result<PathInventory> {
        let sols = self.solve(x0, beta, true)?;
        let paths = sols.iter().map(|s| self.build_path(x0, beta, s)).collect();
        Ok(PathInventory::assemble(x0, beta, paths))
    }

    /// Like [`Self::enumerate`] but skips paths with full oscillations, which
    /// are never minima of the action.
    pub fn enumerate_minima_candidates(&self, x0: f64, beta: f64) -> Result<PathInventory> {
        let sols = self.solve(x0, beta, false)?;
        let paths = sols.iter().map(|s| self.build_path(x0, beta, s)).collect();
        Ok(PathInventory::assemble(x0, beta, paths))
    }

    /// Mirror image of a path under `x → −x` (for even potentials).
    pub fn mirror(path: &ClassicalPath) -> ClassicalPath {
        ClassicalPath {
            x0: -path.x0,
            side: path.side.mirrored(),
            x_minus: path.x_plus.map(|x| -x),
            x_plus: path.x_minus.map(|x| -x),
            ..path.clone()
        }
    }
}

fn check_inputs(x0: f64, beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    if !x0.is_finite() {
        return Err(Error::InvalidArgument(format!("x0 must be finite, got {x0}")));
    }
    Ok(())
}

/// Scale below which a determinant counts as zero.
pub(crate) fn marginal_tolerance(spec: &PotentialSpec, beta: f64) -> f64 {
    1e-10 * 2.0 * PI * spec.hbar() * spec.hbar() * beta / spec.mass()
}

/// Stability class of a path from its determinant and oscillation count.
pub fn classify_stability(spec: &PotentialSpec, path: &ClassicalPath, delta: Option<f64>) -> Stability {
    let tol = marginal_tolerance(spec, path.beta);
    match path.side {
        Side::Still => {
            let x = path.x_minus.unwrap_or(path.x0);
            let v2 = spec.d2(x);
            if let Some(d) = delta {
                if d.abs() < tol {
                    return Stability::Marginal;
                }
            }
            if v2 >= 0.0 {
                return Stability::Minimum;
            }
            let omega = (-v2 / spec.mass()).sqrt();
            Stability::from_index((path.beta * spec.hbar() * omega / PI).floor() as u32)
        }
        _ if path.n_periods == 0 && !path.periodic => match delta {
            Some(d) if d > tol => Stability::Minimum,
            Some(d) if d < -tol => Stability::OneSaddle,
            _ => Stability::Marginal,
        },
        _ => {
            // ẋ vanishes 2n times (periodic) or 2n + 1 times (with an extra
            // excursion) in the interior; the number of negative modes is at
            // least one less than the number of nodes of the zero mode.
            let nodes = 2 * path.n_periods + u32::from(!path.periodic);
            Stability::from_index(nodes - 1)
        }
    }
}

#[cfg(test)]
mod tests;
