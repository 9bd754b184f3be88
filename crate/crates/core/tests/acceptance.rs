//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p caustica-core --test acceptance`. The process
//! exits non-zero when a criterion fails, except for the literal form of the
//! cusp check, whose two stated requirements cannot both hold (see the note
//! printed with it).

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use caustica::catastrophe::{cusp_extrema_count, region_map};
use caustica::checks::{elliptic_cross_check, harmonic_exactness, ELLIPTIC_ABS_TOL, HARMONIC_REL_TOL, IDENTITY_TOL};
use caustica::elliptic::{jacobi, EllipticArgs};
use caustica::oracle::{eigen_spectrum, z_exact, Grid};
use caustica::partition::{z_semiclassical, ZConfig};
use caustica::paths::{PathSolver, Side};
use caustica::PotentialSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HARMONIC_BUDGET_SECS: f64 = 10.0;
const CLOSED_FORM_TOL: f64 = 1e-8;
const THRESHOLD_TOL: f64 = 1e-4;
const STILL_DELTA_TOL: f64 = 1e-10;
const ACTION_TOL: f64 = 1e-10;
const MIRROR_TOL: f64 = 1e-8;
const ORACLE_RATIO_TOL: f64 = 0.02;

struct Report {
    failures: Vec<String>,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!("[{}] {id}. {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures.push(name.to_string());
        }
    }

    fn known(&mut self, id: u32, name: &str, pass: bool, detail: String, note: &str) {
        println!("[{}] {id}. {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            println!("       note: {note}");
        }
    }
}

fn dw() -> PotentialSpec {
    PotentialSpec::double_well(1.0, 1.0).unwrap()
}

fn harmonic_exactness_criterion(r: &mut Report) {
    let start = Instant::now();
    let check = harmonic_exactness();
    let secs = start.elapsed().as_secs_f64();
    match check {
        Ok(c) => r.line(
            1,
            "harmonic exactness",
            c.worst <= HARMONIC_REL_TOL && c.cases == 18 && secs < HARMONIC_BUDGET_SECS,
            format!("worst rel err {:.2e} (≤ {HARMONIC_REL_TOL:e}) over {} cases in {secs:.2} s (< {HARMONIC_BUDGET_SECS} s)", c.worst, c.cases),
        ),
        Err(e) => r.line(1, "harmonic exactness", false, format!("error: {e}")),
    }
}

fn turning_point_closed_form(r: &mut Report) {
    let solver = PathSolver::new(&PotentialSpec::harmonic(1.0).unwrap());
    let mut worst: f64 = 0.0;
    for x0 in [0.5, 1.0, 3.0] {
        for beta in [0.2, 1.0, 2.0, 5.0] {
            let found = solver
                .solve_turning_points(x0, beta)
                .ok()
                .and_then(|s| s.into_iter().find(|s| s.n_periods == 0 && s.side == Side::Left))
                .and_then(|s| s.x_turn());
            let exact = x0 / (beta / 2.0f64).cosh();
            worst = worst.max(found.map_or(f64::INFINITY, |x| (x - exact).abs()));
        }
    }
    r.line(
        2,
        "turning-point closed form",
        worst <= CLOSED_FORM_TOL,
        format!("worst |x_turn − x0/cosh(βħω/2)| = {worst:.2e} (≤ {CLOSED_FORM_TOL:e}) on 12 points"),
    );
}

fn path_count(solver: &PathSolver, x0: f64, beta: f64) -> Option<usize> {
    solver.enumerate(x0, beta).ok().map(|inv| inv.p)
}

fn first_threshold(r: &mut Report) {
    let solver = PathSolver::new(&dw());
    let (mut lo, mut hi) = (1.0, 2.0);
    let ok = path_count(&solver, 0.0, lo) == Some(1) && path_count(&solver, 0.0, hi) == Some(3);
    while ok && hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if path_count(&solver, 0.0, mid).is_some_and(|p| p >= 3) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let onset = 0.5 * (lo + hi);
    let dev = (onset - PI / 2.0).abs();
    r.line(
        3,
        "first catastrophe threshold",
        ok && dev <= THRESHOLD_TOL,
        format!("onset of p = 3 at β = {onset:.9} vs π/2, |Δβ| = {dev:.2e} (≤ {THRESHOLD_TOL:e})"),
    );

    let omega_m = 2.0;
    let mut worst: f64 = 0.0;
    for beta in [0.3, 1.0, 1.5, 2.0, 3.0, 4.5] {
        let delta = solver
            .enumerate(0.0, beta)
            .ok()
            .and_then(|inv| inv.paths.into_iter().find(|p| p.side == Side::Still))
            .and_then(|p| p.determinant);
        let exact = 2.0 * PI * (beta * omega_m).sin() / omega_m;
        worst = worst.max(delta.map_or(f64::INFINITY, |d| (d - exact).abs()));
    }
    r.line(
        3,
        "still-path determinant",
        worst <= STILL_DELTA_TOL,
        format!("worst |Δ − 2πħ sin(βħω_m)/(Mω_m)| = {worst:.2e} (≤ {STILL_DELTA_TOL:e}) on 6 temperatures"),
    );
}

fn bands(seq: impl IntoIterator<Item = u32>) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::new();
    for p in seq {
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    out
}

fn region_topology(r: &mut Report) {
    let solver = PathSolver::new(&dw());
    let map = match region_map(&solver, (-0.9, 0.9), (0.1, 5.0), (64, 64)) {
        Ok(m) => m,
        Err(e) => return r.line(4, "region-count topology", false, format!("error: {e}")),
    };
    let max_n = map.minima_counts.iter().flatten().flatten().copied().max().unwrap_or(0);
    let complete = map.counts.iter().flatten().all(Option::is_some);
    let nearest = map.column_near(0.0);
    let column_bands: Vec<Vec<u32>> = [nearest.saturating_sub(1), nearest, nearest + 1]
        .into_iter()
        .filter(|&i| i < map.x0_grid.len() && map.x0_grid[i].abs() < 0.02)
        .map(|i| bands(map.counts.iter().filter_map(|row| row[i])))
        .collect();
    // x0 = 0 itself, on the same β rows (a 64-point x0 grid has no node there)
    let at_zero: Vec<u32> = map
        .beta_grid
        .iter()
        .map(|&b| path_count(&solver, 0.0, b).map_or(0, |p| p as u32))
        .collect();
    let cell = map.beta_grid[1] - map.beta_grid[0];
    let mut edges = Vec::new();
    for j in 1..at_zero.len() {
        if at_zero[j] != at_zero[j - 1] {
            edges.push(0.5 * (map.beta_grid[j] + map.beta_grid[j - 1]));
        }
    }
    let targets = [PI / 2.0, PI, 1.5 * PI];
    let edge_dev = if edges.len() == targets.len() {
        edges
            .iter()
            .zip(targets)
            .map(|(e, t)| (e - t).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let expected = vec![1, 3, 5, 7];
    let pass = complete
        && max_n <= 2
        && bands(at_zero.iter().copied()) == expected
        && column_bands.iter().all(|b| *b == expected)
        && edge_dev <= cell;
    r.line(
        4,
        "region-count topology",
        pass,
        format!(
            "x0 = 0 bands {:?}, edges {:?} (max dev {edge_dev:.3} ≤ cell {cell:.3}); nearest map columns {:?}; max N = {max_n}",
            bands(at_zero.iter().copied()),
            edges.iter().map(|e| format!("{e:.3}")).collect::<Vec<_>>(),
            column_bands
        ),
    );
}

fn degenerate_minima(r: &mut Report) {
    let solver = PathSolver::new(&dw());
    let detail = match solver.enumerate(0.0, 2.0) {
        Ok(inv) => {
            let minima: Vec<_> = inv.minima().collect();
            if minima.len() != 2 {
                r.line(5, "degenerate tunnelling minima", false, format!("{} minima", minima.len()));
                return;
            }
            let (a, b) = (minima[0], minima[1]);
            let ds = (a.action - b.action).abs();
            let mirror = (a.x_turn().unwrap_or(f64::NAN) + b.x_turn().unwrap_or(f64::NAN)).abs();
            let pass = ds <= ACTION_TOL && mirror <= MIRROR_TOL && a.side != b.side;
            r.line(
                5,
                "degenerate tunnelling minima",
                pass,
                format!("|S_a − S_b| = {ds:.2e} (≤ {ACTION_TOL:e}), |x_a + x_b| = {mirror:.2e} (≤ {MIRROR_TOL:e})"),
            );
            return;
        }
        Err(e) => format!("error: {e}"),
    };
    r.line(5, "degenerate tunnelling minima", false, detail);
}

fn elliptic_checks(r: &mut Report) {
    match elliptic_cross_check() {
        Ok(c) => r.line(
            6,
            "elliptic cross-check",
            c.worst <= ELLIPTIC_ABS_TOL && c.cases == 400,
            format!("worst |x_elliptic − x_generic| = {:.2e} (≤ {ELLIPTIC_ABS_TOL:e}) on a 20×20 grid", c.worst),
        ),
        Err(e) => r.line(6, "elliptic cross-check", false, format!("error: {e}")),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let u: f64 = rng.gen_range(-50.0..50.0);
        let k: f64 = rng.gen_range(0.0..=1.0);
        let j = jacobi(EllipticArgs::new(u, k).unwrap());
        worst = worst.max((j.cn * j.cn + j.sn * j.sn - 1.0).abs());
    }
    r.line(
        6,
        "jacobi cn² + sn² = 1",
        worst <= IDENTITY_TOL,
        format!("worst violation {worst:.2e} (≤ {IDENTITY_TOL:e}) on 1000 random (u, k)"),
    );
}

fn caustic_integrability(r: &mut Report) {
    let solver = PathSolver::new(&dw());
    let cfg = ZConfig::default();
    let fine_cfg = ZConfig {
        quadrature: cfg.quadrature.halved(),
        ..cfg.clone()
    };
    match (z_semiclassical(&solver, 2.0, &cfg), z_semiclassical(&solver, 2.0, &fine_cfg)) {
        (Ok(a), Ok(b)) => {
            let change = (a.value - b.value).abs();
            r.line(
                7,
                "caustic integrability",
                change < a.error_estimate && !a.singular_points.is_empty(),
                format!(
                    "Z_sc = {:.12}, change under halving {change:.2e} < error estimate {:.2e}; caustics at {:?}",
                    a.value, a.error_estimate, a.singular_points
                ),
            );
        }
        (Err(e), _) | (_, Err(e)) => r.line(7, "caustic integrability", false, format!("error: {e}")),
    }
}

fn oracle_agreement(r: &mut Report) {
    for (name, spec) in [
        ("DoubleWell(1,1)", dw()),
        ("HarmonicPlusQuartic(1,0.5)", PotentialSpec::harmonic_plus_quartic(1.0, 0.5).unwrap()),
    ] {
        let solver = PathSolver::new(&spec);
        let grid = Grid::new(-6.0, 6.0, 2001).unwrap();
        let ratio = |beta: f64| -> Result<f64, caustica::Error> {
            let spectrum = eigen_spectrum(&spec, &grid)?;
            Ok(z_semiclassical(&solver, beta, &ZConfig::default())?.value / z_exact(&spectrum, beta)?.value)
        };
        match ratio(0.5) {
            Ok(q) => r.line(
                8,
                &format!("high-T agreement, {name}"),
                (q - 1.0).abs() <= ORACLE_RATIO_TOL,
                format!("Z_sc/Z_exact at β = 0.5 is {q:.6} (|·−1| ≤ {ORACLE_RATIO_TOL})"),
            ),
            Err(e) => r.line(8, &format!("high-T agreement, {name}"), false, format!("error: {e}")),
        }
        match ratio(5.0) {
            Ok(q) => println!("       report: {name} Z_sc/Z_exact at β = 5 is {q:.6} (not asserted)"),
            Err(e) => println!("       report: {name} at β = 5 failed: {e}"),
        }
    }
}

/// Distinct real roots of `c3·s³ + c1·s + c0` by sign changes on a fine grid
/// inside the Cauchy bound.
fn brute_force_roots(c3: f64, c1: f64, c0: f64) -> u32 {
    let bound = 1.0 + (c1.abs()).max(c0.abs()) / c3.abs();
    let n = 100_000;
    let f = |s: f64| (c3 * s * s + c1) * s + c0;
    let mut count = 0;
    let mut prev = f(-bound);
    for k in 1..=n {
        let cur = f(-bound + 2.0 * bound * k as f64 / n as f64);
        if prev * cur < 0.0 {
            count += 1;
        }
        prev = cur;
    }
    count
}

fn cusp_discriminant(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let points: Vec<(f64, f64)> = (0..1000)
        .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
        .collect();
    let literal = points
        .iter()
        .filter(|&&(u, v)| cusp_extrema_count(u, v) != brute_force_roots(4.0, 2.0 * u, v))
        .count();
    let scaled = points
        .iter()
        .filter(|&&(u, v)| cusp_extrema_count(u, v) != brute_force_roots(1.0, u, v))
        .count();
    r.known(
        9,
        "cusp discriminant vs roots of 4s³ + 2u1·s + v1",
        literal == 0,
        format!("{literal} mismatches on 1000 random points"),
        "the roots of 4s³ + 2u1·s + v1 bifurcate on v1² = −8u1³/27, not on the required \
         v1² = −4u1³/27; mismatches are exactly the points between the two curves, and the \
         documented example (−3, 2) → 2 is itself a three-root point of that cubic",
    );
    r.line(
        9,
        "cusp discriminant vs roots of s³ + u1·s + v1",
        scaled == 0,
        format!("{scaled} mismatches on the same 1000 points (the scaling whose set is v1² = −4u1³/27)"),
    );
}

fn main() -> ExitCode {
    let mut r = Report { failures: Vec::new() };
    harmonic_exactness_criterion(&mut r);
    turning_point_closed_form(&mut r);
    first_threshold(&mut r);
    region_topology(&mut r);
    degenerate_minima(&mut r);
    elliptic_checks(&mut r);
    caustic_integrability(&mut r);
    oracle_agreement(&mut r);
    cusp_discriminant(&mut r);
    if r.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", r.failures.join("; "));
        ExitCode::FAILURE
    }
}
