//! Unit system, potential families and the wells of the inverted potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{find_root_bracketed, RootConfig};

/// Scan resolution used to locate critical points of `V`.
pub const DEFAULT_SCAN_POINTS: usize = 4096;

/// `ħ` and `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl UnitSystem {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) || !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "hbar and mass must be positive and finite (hbar = {hbar}, mass = {mass})"
            )));
        }
        Ok(Self { hbar, mass })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `½Mω²x²`
    Harmonic { omega: f64 },
    /// `½Mω²x² + λx⁴`
    HarmonicPlusQuartic { omega: f64, lambda: f64 },
    /// `λ(x² − a²)²`
    DoubleWell { lambda: f64, a: f64 },
    /// `Σ c_k x^k`, ascending powers.
    Polynomial { coefficients: Vec<f64> },
}

/// A potential together with the units it is expressed in.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    family: Family,
    units: UnitSystem,
}

/// A stationary point of `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub x: f64,
    pub v: f64,
    pub v2: f64,
}

impl CriticalPoint {
    pub fn is_maximum(&self) -> bool {
        self.v2 < 0.0
    }
}

/// A well of `−V`: a strict local maximum of `V` and the adjacent minima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellDescriptor {
    pub x_m: f64,
    pub omega_m: f64,
    /// Adjacent local minimum of `V` on the left, or `-inf`.
    pub left_edge: f64,
    /// Adjacent local minimum of `V` on the right, or `+inf`.
    pub right_edge: f64,
}

impl WellDescriptor {
    pub fn contains(&self, x: f64) -> bool {
        x > self.left_edge && x < self.right_edge
    }

    /// Distance from `x_m` to the nearer finite edge (or 1 for an unbounded well).
    pub fn half_width(&self) -> f64 {
        let l = self.x_m - self.left_edge;
        let r = self.right_edge - self.x_m;
        let w = l.min(r);
        if w.is_finite() {
            w
        } else {
            1.0
        }
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPotential(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

impl PotentialSpec {
    pub fn new(family: Family, units: UnitSystem) -> Result<Self> {
        UnitSystem::new(units.hbar, units.mass)?;
        let family = match family {
            Family::Harmonic { omega } => {
                positive("omega", omega)?;
                Family::Harmonic { omega }
            }
            Family::HarmonicPlusQuartic { omega, lambda } => {
                positive("omega", omega)?;
                positive("lambda", lambda)?;
                Family::HarmonicPlusQuartic { omega, lambda }
            }
            Family::DoubleWell { lambda, a } => {
                positive("lambda", lambda)?;
                positive("a", a)?;
                Family::DoubleWell { lambda, a }
            }
            Family::Polynomial { coefficients } => {
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidPotential(
                        "polynomial coefficients must be finite".into(),
                    ));
                }
                let mut coefficients = coefficients;
                while coefficients.last() == Some(&0.0) {
                    coefficients.pop();
                }
                let degree = coefficients.len().saturating_sub(1);
                let leading = coefficients.last().copied().unwrap_or(0.0);
                if degree < 2 || degree % 2 != 0 || leading <= 0.0 {
                    return Err(Error::InvalidPotential(format!(
                        "polynomial must be bounded below: even degree >= 2 with positive leading coefficient (degree {degree}, leading {leading})"
                    )));
                }
                Family::Polynomial { coefficients }
            }
        };
        Ok(Self { family, units })
    }

    pub fn harmonic(omega: f64) -> Result<Self> {
        Self::new(Family::Harmonic { omega }, UnitSystem::default())
    }

    pub fn harmonic_plus_quartic(omega: f64, lambda: f64) -> Result<Self> {
        Self::new(
            Family::HarmonicPlusQuartic { omega, lambda },
            UnitSystem::default(),
        )
    }

    pub fn double_well(lambda: f64, a: f64) -> Result<Self> {
        Self::new(Family::DoubleWell { lambda, a }, UnitSystem::default())
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        Self::new(Family::Polynomial { coefficients }, UnitSystem::default())
    }

    pub fn with_units(self, units: UnitSystem) -> Result<Self> {
        Self::new(self.family, units)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn units(&self) -> UnitSystem {
        self.units
    }

    pub fn hbar(&self) -> f64 {
        self.units.hbar
    }

    pub fn mass(&self) -> f64 {
        self.units.mass
    }

    /// `(V, V′, V″)` at `x`, from the analytic formulas of the family.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let m = self.units.mass;
        match &self.family {
            Family::Harmonic { omega } => {
                let k = m * omega * omega;
                (0.5 * k * x * x, k * x, k)
            }
            Family::HarmonicPlusQuartic { omega, lambda } => {
                let k = m * omega * omega;
                let x2 = x * x;
                (
                    0.5 * k * x2 + lambda * x2 * x2,
                    k * x + 4.0 * lambda * x2 * x,
                    k + 12.0 * lambda * x2,
                )
            }
            Family::DoubleWell { lambda, a } => {
                let s = x * x - a * a;
                (lambda * s * s, 4.0 * lambda * x * s, lambda * (12.0 * x * x - 4.0 * a * a))
            }
            Family::Polynomial { coefficients } => {
                let mut v = 0.0;
                let mut d1 = 0.0;
                let mut d2 = 0.0;
                for &c in coefficients.iter().rev() {
                    d2 = d2 * x + 2.0 * d1;
                    d1 = d1 * x + v;
                    v = v * x + c;
                }
                (v, d1, d2)
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.eval(x).2
    }

    /// Divided difference `(V(x) − V(y)) / (x − y)`, equal to `V′(x)` when
    /// `x == y`. Computed in factored form so that `V(x) − V(y)` keeps full
    /// relative precision when `x` and `y` are close.
    pub fn divided_difference(&self, x: f64, y: f64) -> f64 {
        let m = self.units.mass;
        match &self.family {
            Family::Harmonic { omega } => 0.5 * m * omega * omega * (x + y),
            Family::HarmonicPlusQuartic { omega, lambda } => {
                (x + y) * (0.5 * m * omega * omega + lambda * (x * x + y * y))
            }
            Family::DoubleWell { lambda, a } => lambda * (x + y) * (x * x + y * y - 2.0 * a * a),
            Family::Polynomial { coefficients } => {
                // h_j = Σ_{i=0}^{j} x^i y^{j-i}, h_j = x·h_{j-1} + y^j
                let mut h = 1.0;
                let mut y_pow = 1.0;
                let mut sum = 0.0;
                for &c in coefficients.iter().skip(1) {
                    sum += c * h;
                    y_pow *= y;
                    h = x * h + y_pow;
                }
                sum
            }
        }
    }

    /// `V(x) − V(y)` without catastrophic cancellation.
    pub fn difference(&self, x: f64, y: f64) -> f64 {
        (x - y) * self.divided_difference(x, y)
    }

    /// Ascending polynomial coefficients of `V`.
    pub fn coefficients(&self) -> Vec<f64> {
        let m = self.units.mass;
        match &self.family {
            Family::Harmonic { omega } => vec![0.0, 0.0, 0.5 * m * omega * omega],
            Family::HarmonicPlusQuartic { omega, lambda } => {
                vec![0.0, 0.0, 0.5 * m * omega * omega, 0.0, *lambda]
            }
            Family::DoubleWell { lambda, a } => {
                let a2 = a * a;
                vec![lambda * a2 * a2, 0.0, -2.0 * lambda * a2, 0.0, *lambda]
            }
            Family::Polynomial { coefficients } => coefficients.clone(),
        }
    }

    /// Radius containing every critical point (Cauchy bound on the roots of `V′`).
    pub fn critical_radius(&self) -> f64 {
        let c = self.coefficients();
        let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, ck)| k as f64 * ck).collect();
        let lead = *d.last().expect("degree >= 2");
        let max_ratio = d[..d.len() - 1]
            .iter()
            .map(|dj| (dj / lead).abs())
            .fold(0.0, f64::max);
        1.0 + max_ratio
    }

    /// Every sign change of `V′` on a uniform scan of `interval`, refined by
    /// bracketed root finding and polished with Newton steps.
    pub fn critical_points_in(&self, interval: (f64, f64), scan_points: usize) -> Vec<CriticalPoint> {
        let (lo, hi) = interval;
        let n = scan_points.max(2);
        let step = (hi - lo) / (n - 1) as f64;
        let grid: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
            .collect();
        let d: Vec<f64> = grid.iter().map(|&x| self.d1(x)).collect();
        let mut found = Vec::new();
        for i in 0..n {
            if d[i] == 0.0 {
                found.push(grid[i]);
                continue;
            }
            if i + 1 < n && d[i + 1] != 0.0 && d[i].signum() != d[i + 1].signum() {
                let root = find_root_bracketed(|x| self.d1(x), (grid[i], grid[i + 1]), &RootConfig::default())
                    .unwrap_or(0.5 * (grid[i] + grid[i + 1]));
                found.push(self.newton_polish(root, grid[i], grid[i + 1]));
            }
        }
        found
            .into_iter()
            .map(|x| {
                let (v, _, v2) = self.eval(x);
                CriticalPoint { x, v, v2 }
            })
            .collect()
    }

    fn newton_polish(&self, mut x: f64, lo: f64, hi: f64) -> f64 {
        for _ in 0..3 {
            let (_, d1, d2) = self.eval(x);
            if d1 == 0.0 || d2 == 0.0 {
                break;
            }
            let next = x - d1 / d2;
            if !(next >= lo && next <= hi) || (next - x).abs() > 1e-8 * (hi - lo).max(1e-300) {
                break;
            }
            x = next;
        }
        x
    }

    /// All critical points of `V` on the real line.
    pub fn critical_points(&self) -> Vec<CriticalPoint> {
        let r = 1.01 * self.critical_radius();
        self.critical_points_in((-r, r), DEFAULT_SCAN_POINTS)
    }

    /// Scale of `|V″|` on the interval, used by the degeneracy test.
    fn curvature_scale(&self, interval: (f64, f64), n: usize) -> f64 {
        let (lo, hi) = interval;
        (0..n)
            .map(|i| self.d2(lo + (hi - lo) * i as f64 / (n - 1) as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Wells of `−V` (strict local maxima of `V`) inside `search_interval`.
    pub fn find_wells(&self, search_interval: (f64, f64)) -> Result<Vec<WellDescriptor>> {
        self.find_wells_with(search_interval, DEFAULT_SCAN_POINTS)
    }

    pub fn find_wells_with(&self, search_interval: (f64, f64), scan_points: usize) -> Result<Vec<WellDescriptor>> {
        let (lo, hi) = search_interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "search interval must be finite with lo < hi, got [{lo}, {hi}]"
            )));
        }
        let local = self.critical_points_in(search_interval, scan_points);
        let tol = 1e-9 * self.curvature_scale(search_interval, scan_points).max(1.0);
        if let Some(c) = local.iter().find(|c| c.v2.abs() < tol) {
            return Err(Error::DegenerateCriticalPoint { x: c.x, v2: c.v2 });
        }
        let all = self.critical_points();
        let m = self.units.mass;
        Ok(local
            .iter()
            .filter(|c| c.is_maximum())
            .map(|c| {
                let left_edge = all
                    .iter()
                    .filter(|o| o.x < c.x - 1e-9 * c.x.abs().max(1.0) && !o.is_maximum())
                    .map(|o| o.x)
                    .fold(f64::NEG_INFINITY, f64::max);
                let right_edge = all
                    .iter()
                    .filter(|o| o.x > c.x + 1e-9 * c.x.abs().max(1.0) && !o.is_maximum())
                    .map(|o| o.x)
                    .fold(f64::INFINITY, f64::min);
                WellDescriptor {
                    x_m: c.x,
                    omega_m: (-c.v2 / m).sqrt(),
                    left_edge,
                    right_edge,
                }
            })
            .collect())
    }

    /// The well of `−V` containing `x`, if any.
    pub fn well_containing(&self, x: f64) -> Option<WellDescriptor> {
        let r = 1.01 * self.critical_radius();
        self.find_wells((-r, r))
            .ok()?
            .into_iter()
            .find(|w| w.contains(x))
    }

    pub fn to_config(&self) -> PotentialConfig {
        let mut cfg = PotentialConfig {
            family: String::new(),
            omega: None,
            lambda: None,
            a: None,
            coefficients: None,
            hbar: Some(self.units.hbar),
            mass: Some(self.units.mass),
        };
        match &self.family {
            Family::Harmonic { omega } => {
                cfg.family = "harmonic".into();
                cfg.omega = Some(*omega);
            }
            Family::HarmonicPlusQuartic { omega, lambda } => {
                cfg.family = "harmonic_plus_quartic".into();
                cfg.omega = Some(*omega);
                cfg.lambda = Some(*lambda);
            }
            Family::DoubleWell { lambda, a } => {
                cfg.family = "double_well".into();
                cfg.lambda = Some(*lambda);
                cfg.a = Some(*a);
            }
            Family::Polynomial { coefficients } => {
                cfg.family = "polynomial".into();
                cfg.coefficients = Some(coefficients.clone());
            }
        }
        cfg
    }
}

/// Configuration mapping for a potential, with the fixed key names
/// `family`, `omega`, `lambda`, `a`, `coefficients`, `hbar`, `mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

impl TryFrom<&PotentialConfig> for PotentialSpec {
    type Error = Error;

    fn try_from(cfg: &PotentialConfig) -> Result<Self> {
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::InvalidPotential(format!("missing key `{name}` for family `{}`", cfg.family)))
        };
        let key: String = cfg
            .family
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        let family = match key.as_str() {
            "harmonic" => Family::Harmonic {
                omega: need("omega", cfg.omega)?,
            },
            "harmonicplusquartic" => Family::HarmonicPlusQuartic {
                omega: need("omega", cfg.omega)?,
                lambda: need("lambda", cfg.lambda)?,
            },
            "doublewell" => Family::DoubleWell {
                lambda: need("lambda", cfg.lambda)?,
                a: need("a", cfg.a)?,
            },
            "polynomial" => Family::Polynomial {
                coefficients: cfg.coefficients.clone().ok_or_else(|| {
                    Error::InvalidPotential("missing key `coefficients` for family `polynomial`".into())
                })?,
            },
            _ => {
                return Err(Error::InvalidPotential(format!(
                    "unknown family `{}` (expected harmonic, harmonic_plus_quartic, double_well or polynomial)",
                    cfg.family
                )))
            }
        };
        let units = UnitSystem::new(cfg.hbar.unwrap_or(1.0), cfg.mass.unwrap_or(1.0))?;
        PotentialSpec::new(family, units)
    }
}
