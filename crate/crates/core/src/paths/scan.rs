//! Tabulation of the inverse temperature along each family of closed paths.
//!
//! For a fixed starting point the set of closed paths splits into families
//! parameterised by one turning point. Each family yields a few branches
//! `β(p)`; the paths at a given `β` are the roots of `β(p) − β`. Branches are
//! sampled once per starting point and reused for every temperature.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::legs::{Landscape, Stretch};
use crate::quadrature::{find_root_bracketed, minimize_bracketed, RootConfig};

/// Sampling density for the turning-point scan.
///
/// The uniform part of the grid starts at `initial` points and is doubled
/// until the number of discrete extrema stops changing, or `max` is reached.
/// Both ends of every family are also sampled geometrically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanConfig {
    pub initial: usize,
    pub max: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            initial: 128,
            max: 2048,
        }
    }
}

const GRADED_LEVELS: i32 = 50;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Shape {
    /// Out-and-back excursion to one turning point.
    Single(Stretch),
    /// Oscillation between a left and a right turning point of equal energy,
    /// parameterised by the right turning point on `[lo, hi]`, a piece of
    /// the right-hand stretch; `left` supplies the partner.
    Bounded {
        left: Stretch,
        lo: f64,
        hi: f64,
    },
}

/// Which closed path of a family is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Branch {
    /// Single excursion (only for [`Shape::Single`]).
    Excursion,
    /// `n` full oscillations returning to the start.
    Periodic(u32),
    /// `n` full oscillations plus one extra excursion to the right.
    RightFirst(u32),
    /// `n` full oscillations plus one extra excursion to the left.
    LeftFirst(u32),
}

impl Branch {
    fn value(self, s: &Sample) -> f64 {
        let period = s.left + s.right;
        match self {
            Branch::Excursion => s.left + s.right,
            Branch::Periodic(n) => n as f64 * period,
            Branch::RightFirst(n) => n as f64 * period + s.right,
            Branch::LeftFirst(n) => n as f64 * period + s.left,
        }
    }
}

/// Round-trip times at one parameter value. For single excursions only the
/// field of the matching side is nonzero.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sample {
    pub p: f64,
    pub partner: f64,
    pub left: f64,
    pub right: f64,
}

impl Sample {
    fn is_finite(&self) -> bool {
        self.left.is_finite() && self.right.is_finite()
    }
}

#[derive(Debug)]
pub(crate) struct FamilyTable {
    pub shape: Shape,
    samples: Vec<Sample>,
    knots: Mutex<HashMap<Branch, Arc<Vec<(f64, f64)>>>>,
}

/// A root of `β(p) = β` on one branch of one family.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BranchRoot {
    pub p: f64,
    pub sample: Sample,
}

impl FamilyTable {
    pub fn interval(&self) -> (f64, f64) {
        match self.shape {
            Shape::Single(s) => s.interval(),
            Shape::Bounded { lo, hi, .. } => (lo, hi),
        }
    }

    pub fn evaluate(&self, land: &Landscape, x0: f64, p: f64) -> Sample {
        match self.shape {
            Shape::Single(s) => {
                let t = land.round_trip_beta(p, x0).unwrap_or(f64::NAN);
                if s.dir > 0.0 {
                    Sample {
                        p,
                        partner: p,
                        left: 0.0,
                        right: t,
                    }
                } else {
                    Sample {
                        p,
                        partner: p,
                        left: t,
                        right: 0.0,
                    }
                }
            }
            Shape::Bounded { left, .. } => {
                let partner = land.crossing(left.entry, left.far, p);
                let right = land.round_trip_beta(p, x0).unwrap_or(f64::NAN);
                let left = land.round_trip_beta(partner, x0).unwrap_or(f64::NAN);
                Sample {
                    p,
                    partner,
                    left,
                    right,
                }
            }
        }
    }

    fn build(land: &Landscape, x0: f64, shape: Shape, scan: ScanConfig) -> Self {
        let mut table = Self {
            shape,
            samples: Vec::new(),
            knots: Mutex::new(HashMap::new()),
        };
        let (lo, hi) = table.interval();
        let width = hi - lo;
        let at = |u: f64| lo + u * width;

        let mut us: Vec<f64> = (1..GRADED_LEVELS)
            .flat_map(|k| {
                let g = 2f64.powi(-k);
                [g, 1.0 - g]
            })
            .collect();
        let mut n = scan.initial.max(4).next_power_of_two();
        us.extend((1..n).map(|i| i as f64 / n as f64));
        us.sort_by(f64::total_cmp);
        us.dedup();

        let mut samples: Vec<Sample> = us
            .iter()
            .map(|&u| at(u))
            .filter(|&p| p > lo && p < hi)
            .map(|p| table.evaluate(land, x0, p))
            .collect();
        let mut signature = extrema_signature(&table.shape, &samples);
        while n < scan.max {
            n *= 2;
            let fresh: Vec<Sample> = (1..n)
                .step_by(2)
                .map(|i| at(i as f64 / n as f64))
                .filter(|&p| p > lo && p < hi)
                .map(|p| table.evaluate(land, x0, p))
                .collect();
            samples.extend(fresh);
            samples.sort_by(|a, b| a.p.total_cmp(&b.p));
            samples.dedup_by(|a, b| a.p == b.p);
            let refined = extrema_signature(&table.shape, &samples);
            if refined == signature {
                break;
            }
            signature = refined;
        }
        table.samples = samples;
        table
    }

    /// Branch values on the grid, augmented with refined local extrema.
    pub fn knots(&self, land: &Landscape, x0: f64, branch: Branch) -> Arc<Vec<(f64, f64)>> {
        if let Some(k) = self.knots.lock().expect("knot cache poisoned").get(&branch) {
            return Arc::clone(k);
        }
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.is_finite())
            .map(|s| (s.p, branch.value(s)))
            .collect();
        let mut out = pts.clone();
        for i in 1..pts.len().saturating_sub(1) {
            let (a, b, c) = (pts[i - 1].1, pts[i].1, pts[i + 1].1);
            let sign = if b < a && b <= c {
                1.0
            } else if b > a && b >= c {
                -1.0
            } else {
                continue;
            };
            let (lo, hi) = (pts[i - 1].0, pts[i + 1].0);
            let (p, _) = minimize_bracketed(
                |p| {
                    let v = branch.value(&self.evaluate(land, x0, p));
                    if v.is_finite() {
                        sign * v
                    } else {
                        f64::INFINITY
                    }
                },
                lo,
                hi,
                1e-10,
            );
            let v = branch.value(&self.evaluate(land, x0, p));
            if v.is_finite() && p > lo && p < hi && p != pts[i].0 {
                out.push((p, v));
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.dedup_by(|a, b| a.0 == b.0);
        let out = Arc::new(out);
        self.knots
            .lock()
            .expect("knot cache poisoned")
            .insert(branch, Arc::clone(&out));
        out
    }

    /// Smallest value of a branch over the family.
    pub fn branch_min(&self, land: &Landscape, x0: f64, branch: Branch) -> Option<(f64, f64)> {
        self.knots(land, x0, branch)
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Number of roots of `branch(p) = beta`, from sign changes between knots.
    pub fn count_roots(&self, land: &Landscape, x0: f64, branch: Branch, beta: f64) -> usize {
        let k = self.knots(land, x0, branch);
        k.windows(2)
            .filter(|w| (w[0].1 - beta) * (w[1].1 - beta) < 0.0 || w[1].1 == beta)
            .count()
    }

    /// Roots of `branch(p) = beta`, refined to full precision.
    pub fn roots(&self, land: &Landscape, x0: f64, branch: Branch, beta: f64) -> Vec<BranchRoot> {
        let k = self.knots(land, x0, branch);
        let mut out = Vec::new();
        for w in k.windows(2) {
            let (a, b) = (w[0], w[1]);
            let p = if b.1 == beta {
                b.0
            } else if (a.1 - beta) * (b.1 - beta) < 0.0 {
                let cfg = RootConfig::with_scale((b.0 - a.0).abs());
                match find_root_bracketed(
                    |p| branch.value(&self.evaluate(land, x0, p)) - beta,
                    (a.0, b.0),
                    &cfg,
                ) {
                    Ok(p) => p,
                    Err(_) => continue,
                }
            } else {
                continue;
            };
            out.push(BranchRoot {
                p,
                sample: self.evaluate(land, x0, p),
            });
        }
        out
    }
}

fn discrete_extrema(vals: impl Iterator<Item = f64>) -> usize {
    let v: Vec<f64> = vals.collect();
    v.windows(3)
        .filter(|w| (w[1] < w[0] && w[1] <= w[2]) || (w[1] > w[0] && w[1] >= w[2]))
        .count()
}

fn extrema_signature(shape: &Shape, samples: &[Sample]) -> [usize; 3] {
    let ok = || samples.iter().filter(|s| s.is_finite());
    match shape {
        Shape::Single(_) => [discrete_extrema(ok().map(|s| s.left + s.right)), 0, 0],
        Shape::Bounded { .. } => [
            discrete_extrema(ok().map(|s| s.left)),
            discrete_extrema(ok().map(|s| s.right)),
            discrete_extrema(ok().map(|s| s.left + s.right)),
        ],
    }
}

/// All families of closed paths through one starting point.
#[derive(Debug)]
pub(crate) struct Families {
    pub x0: f64,
    pub single: Vec<FamilyTable>,
    pub bounded: Vec<FamilyTable>,
}

impl Families {
    /// Tabulates the families at `x0`; bounded ones only if `with_bounded`.
    pub fn new(land: &Landscape, x0: f64, scan: ScanConfig, with_bounded: bool) -> Self {
        let lefts = land.stretches(x0, -1.0);
        let rights = land.stretches(x0, 1.0);
        let single = lefts
            .iter()
            .chain(rights.iter())
            .map(|&s| FamilyTable::build(land, x0, Shape::Single(s), scan))
            .collect();
        let mut bounded = Vec::new();
        if with_bounded {
            for l in &lefts {
                for r in &rights {
                    if let Some(shape) = bounded_shape(land, *l, *r) {
                        bounded.push(FamilyTable::build(land, x0, shape, scan));
                    }
                }
            }
        }
        Self { x0, single, bounded }
    }
}

fn bounded_shape(land: &Landscape, left: Stretch, right: Stretch) -> Option<Shape> {
    // energy window shared by both stretches
    let top_is_right = land.diff(right.entry, left.entry) <= 0.0;
    let bottom_is_right = land.diff(right.far, left.far) >= 0.0;
    let top = if top_is_right { right.entry } else { left.entry };
    let bottom = if bottom_is_right { right.far } else { left.far };
    if land.diff(top, bottom) <= 0.0 {
        return None;
    }
    let p_top = if top_is_right {
        right.entry
    } else {
        land.crossing(right.entry, right.far, left.entry)
    };
    let p_bottom = if bottom_is_right {
        right.far
    } else {
        land.crossing(right.entry, right.far, left.far)
    };
    let (lo, hi) = if p_top < p_bottom {
        (p_top, p_bottom)
    } else {
        (p_bottom, p_top)
    };
    (hi > lo).then_some(Shape::Bounded {
        left,
        lo,
        hi,
    })
}
