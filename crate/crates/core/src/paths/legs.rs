//! Monotone legs of Euclidean trajectories and their time/action integrals.
//!
//! Every closed path is a sequence of legs, each running between a turning
//! point `x_t` (where `V(x_t) = E`) and the starting point `x0`. Along a
//! leg `V(x) > E`. The time and action integrals over a leg are regularised
//! by `x = x_t + s·t²`, which turns `V(x) − E = s·t²·DD(x, x_t)` into a
//! smooth positive function of `t` (`DD` is the divided difference of `V`).

use crate::error::{Error, Result};
use crate::potential::{CriticalPoint, PotentialSpec};
use crate::quadrature::{find_root_bracketed, integrate_adaptive, QuadratureConfig, RootConfig};

/// A maximal interval of admissible turning points in one direction from `x0`.
///
/// Walking away from `x0`, a point `x` can serve as a turning point iff `V(x)`
/// is below every value of `V` met on the way ("record lows"). These points
/// form disjoint intervals, each ending at a local minimum of `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Stretch {
    /// +1 to the right of `x0`, −1 to the left.
    pub dir: f64,
    /// End of the stretch nearer to `x0` (largest admissible energy `V(entry)`).
    pub entry: f64,
    /// Local minimum of `V` closing the stretch.
    pub far: f64,
    /// The stretch starts at `x0` itself.
    pub starts_at_x0: bool,
}

impl Stretch {
    /// Parameter interval `(lo, hi)` in increasing order.
    pub fn interval(&self) -> (f64, f64) {
        if self.entry < self.far {
            (self.entry, self.far)
        } else {
            (self.far, self.entry)
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    /// `x = anchor + dir·t²` for `t ∈ [t_lo, t_hi]`, `V(anchor) = E`.
    Anchored {
        anchor: f64,
        dir: f64,
        t_lo: f64,
        t_hi: f64,
    },
    /// Plain integral over `[a, b]` with `E = V(level)`.
    Plain { a: f64, b: f64, level: f64 },
}

/// The potential together with its critical points, sorted by position.
#[derive(Debug, Clone)]
pub(crate) struct Landscape {
    pub spec: PotentialSpec,
    pub crit: Vec<CriticalPoint>,
    pub quad: QuadratureConfig,
}

impl Landscape {
    pub fn new(spec: PotentialSpec, quad: QuadratureConfig) -> Self {
        let mut crit = spec.critical_points();
        crit.sort_by(|a, b| a.x.total_cmp(&b.x));
        Self { spec, crit, quad }
    }

    pub fn snap_tolerance(x: f64) -> f64 {
        1e-10 * x.abs().max(1.0)
    }

    /// Critical point within snapping distance of `x`.
    pub fn critical_at(&self, x: f64) -> Option<CriticalPoint> {
        self.crit
            .iter()
            .copied()
            .find(|c| (c.x - x).abs() <= Self::snap_tolerance(c.x))
    }

    /// Critical points strictly beyond `x` in direction `dir`, nearest first.
    fn crit_beyond(&self, x: f64, dir: f64) -> Vec<CriticalPoint> {
        let mut out: Vec<CriticalPoint> = self
            .crit
            .iter()
            .copied()
            .filter(|c| (c.x - x) * dir > 0.0)
            .collect();
        if dir < 0.0 {
            out.reverse();
        }
        out
    }

    /// `V(x) − V(y)` in factored form.
    #[inline]
    pub fn diff(&self, x: f64, y: f64) -> f64 {
        self.spec.difference(x, y)
    }

    /// Point in `[a, b]` where `V` equals `V(level)`, for `V` monotone there.
    pub fn crossing(&self, a: f64, b: f64, level: f64) -> f64 {
        let fa = self.diff(a, level);
        let fb = self.diff(b, level);
        if fa == 0.0 {
            return a;
        }
        if fb == 0.0 || fa.signum() == fb.signum() {
            // level at (or numerically beyond) the end of the interval
            return if fa.abs() < fb.abs() { a } else { b };
        }
        find_root_bracketed(|x| self.diff(x, level), (a, b), &RootConfig::with_scale(1e-300))
            .unwrap_or(0.5 * (a + b))
    }

    /// Same as [`Self::crossing`] for a numeric energy level.
    pub fn crossing_energy(&self, a: f64, b: f64, energy: f64) -> f64 {
        let f = |x: f64| self.spec.value(x) - energy;
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            return a;
        }
        if fb == 0.0 || fa.signum() == fb.signum() {
            return if fa.abs() < fb.abs() { a } else { b };
        }
        find_root_bracketed(f, (a, b), &RootConfig::with_scale(1e-300)).unwrap_or(0.5 * (a + b))
    }

    /// Record-low stretches walking from `x0` in direction `dir`.
    pub fn stretches(&self, x0: f64, dir: f64) -> Vec<Stretch> {
        let mut out = Vec::new();
        let mut record = x0;
        let mut pos = x0;
        for c in self.crit_beyond(x0, dir) {
            let descending = self.diff(c.x, pos) < 0.0;
            if descending && self.diff(c.x, record) < 0.0 {
                let starts_at_x0 = pos == x0;
                let entry = if self.diff(pos, record) <= 0.0 {
                    pos
                } else {
                    self.crossing(pos, c.x, record)
                };
                out.push(Stretch {
                    dir,
                    entry,
                    far: c.x,
                    starts_at_x0: starts_at_x0 && entry == x0,
                });
                record = c.x;
            }
            pos = c.x;
        }
        out
    }

    /// First point beyond `from` (direction `dir`) where `V` drops to `V(level)`,
    /// given `V(from) > V(level)`.
    pub fn first_descent_to(&self, from: f64, dir: f64, level: f64) -> Option<f64> {
        let mut pos = from;
        for c in self.crit_beyond(from, dir) {
            if self.diff(c.x, level) <= 0.0 {
                return Some(self.crossing(pos, c.x, level));
            }
            pos = c.x;
        }
        None
    }

    /// First point beyond `from` (direction `dir`) where `V` drops to `energy`,
    /// given `V(from) > energy`.
    pub fn first_descent_to_energy(&self, from: f64, dir: f64, energy: f64) -> Option<f64> {
        let mut pos = from;
        for c in self.crit_beyond(from, dir) {
            if c.v <= energy {
                return Some(self.crossing_energy(pos, c.x, energy));
            }
            pos = c.x;
        }
        None
    }

    fn pieces(&self, x_turn: f64, x0: f64) -> Vec<Piece> {
        let dir = (x0 - x_turn).signum();
        let (lo, hi) = if x_turn < x0 { (x_turn, x0) } else { (x0, x_turn) };
        let peak = self
            .crit
            .iter()
            .filter(|c| c.x > lo && c.x < hi && c.is_maximum())
            .max_by(|a, b| a.v.total_cmp(&b.v));
        match peak {
            Some(p) if self.diff(p.x, x0) > 0.0 => {
                let first = Piece::Anchored {
                    anchor: x_turn,
                    dir,
                    t_lo: 0.0,
                    t_hi: (p.x - x_turn).abs().sqrt(),
                };
                let second = match self.first_descent_to(x0, dir, x_turn) {
                    Some(virt) => Piece::Anchored {
                        anchor: virt,
                        dir: -dir,
                        t_lo: (virt - x0).abs().sqrt(),
                        t_hi: (virt - p.x).abs().sqrt(),
                    },
                    None => Piece::Plain {
                        a: p.x,
                        b: x0,
                        level: x_turn,
                    },
                };
                vec![first, second]
            }
            _ => vec![Piece::Anchored {
                anchor: x_turn,
                dir,
                t_lo: 0.0,
                t_hi: (x0 - x_turn).abs().sqrt(),
            }],
        }
    }

    fn integrate_pieces(&self, x_turn: f64, x0: f64, action: bool) -> Result<f64> {
        if x_turn == x0 {
            return Ok(0.0);
        }
        let two_m = 2.0 * self.spec.mass();
        let mut total = 0.0;
        for piece in self.pieces(x_turn, x0) {
            let est = match piece {
                Piece::Anchored {
                    anchor,
                    dir,
                    t_lo,
                    t_hi,
                } => {
                    let q = |t: f64| dir * self.spec.divided_difference(anchor + dir * t * t, anchor);
                    if action {
                        integrate_adaptive(
                            |t| {
                                let qt = q(t);
                                if qt < 0.0 {
                                    f64::NAN
                                } else {
                                    2.0 * t * t * (two_m * qt).sqrt()
                                }
                            },
                            t_lo,
                            t_hi,
                            &self.quad,
                        )?
                    } else {
                        integrate_adaptive(
                            |t| {
                                let qt = q(t);
                                if qt <= 0.0 {
                                    f64::NAN
                                } else {
                                    (two_m / qt).sqrt()
                                }
                            },
                            t_lo,
                            t_hi,
                            &self.quad,
                        )?
                    }
                }
                Piece::Plain { a, b, level } => {
                    let (a, b) = if a < b { (a, b) } else { (b, a) };
                    if action {
                        integrate_adaptive(|x| (two_m * self.diff(x, level).max(0.0)).sqrt(), a, b, &self.quad)?
                    } else {
                        integrate_adaptive(
                            |x| {
                                let d = self.diff(x, level);
                                if d <= 0.0 {
                                    f64::NAN
                                } else {
                                    (0.5 * self.spec.mass() / d).sqrt()
                                }
                            },
                            a,
                            b,
                            &self.quad,
                        )?
                    }
                }
            };
            total += est.value;
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::EvaluationFailed(x_turn))
        }
    }

    /// Euclidean time `∫ |dx| / v` for one traversal of the leg.
    pub fn leg_time(&self, x_turn: f64, x0: f64) -> Result<f64> {
        self.integrate_pieces(x_turn, x0, false)
    }

    /// `∫ M v |dx|` for one traversal of the leg.
    pub fn leg_action(&self, x_turn: f64, x0: f64) -> Result<f64> {
        self.integrate_pieces(x_turn, x0, true)
    }

    /// Inverse temperature of the out-and-back excursion `x0 → x_turn → x0`.
    pub fn round_trip_beta(&self, x_turn: f64, x0: f64) -> Result<f64> {
        Ok(2.0 * self.leg_time(x_turn, x0)? / self.spec.hbar())
    }

    /// Action carried by the out-and-back excursion, without the `βħE` term.
    pub fn round_trip_action(&self, x_turn: f64, x0: f64) -> Result<f64> {
        Ok(2.0 * self.leg_action(x_turn, x0)?)
    }
}
