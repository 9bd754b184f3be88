use super::*;

fn harmonic() -> PathSolver {
    PathSolver::new(&PotentialSpec::harmonic(1.0).unwrap())
}

fn double_well() -> PathSolver {
    PathSolver::new(&PotentialSpec::double_well(1.0, 1.0).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn harmonic_time_of_flight() {
    let s = harmonic();
    let b = s.time_of_flight(1.0, 1.0 / 1f64.cosh()).unwrap();
    assert!(rel(b, 2.0) < 1e-10, "{b}");
    assert_eq!(s.time_of_flight(1.0, 1.0).unwrap(), 0.0);
    let tiny = s.time_of_flight(1.0, 1.0 - 1e-9).unwrap();
    assert!(tiny < 1e-3);
}

#[test]
fn time_of_flight_rejects_bad_brackets() {
    let s = double_well();
    // V(0.5) < V(0.9)? no: V(0.9) is lower, so going 0.9 -> 0.5 climbs; turning at 0.5 from 0.9 is invalid
    assert!(matches!(
        s.time_of_flight(0.9, 0.5),
        Err(Error::InvalidBracket { .. })
    ));
    assert!(matches!(
        s.time_of_flight(0.5, 1.0),
        Err(Error::SingularTurningPoint(_))
    ));
}

#[test]
fn harmonic_single_path() {
    let s = harmonic();
    let sols = s.solve_turning_points(1.0, 2.0).unwrap();
    assert_eq!(sols.len(), 1);
    let xt = sols[0].x_turn().unwrap();
    assert!((xt - 0.648_054_27).abs() < 1e-8, "{xt}");
    assert!((xt - 1.0 / 1f64.cosh()).abs() < 1e-10);
    assert_eq!(sols[0].side, Side::Left);
    let inv = s.enumerate(1.0, 2.0).unwrap();
    let p = &inv.paths[0];
    assert!(rel(p.action, 1f64.tanh()) < 1e-9, "{}", p.action);
    assert!(rel(p.determinant.unwrap(), 2.0 * PI * 2f64.sinh()) < 1e-7);
    assert!((p.determinant.unwrap() - 22.788_236_026).abs() < 1e-6);
    assert_eq!(p.stability, Stability::Minimum);
    assert_eq!((inv.p, inv.n_minima), (1, 1));
}

#[test]
fn harmonic_pieces_are_exact_on_the_grid() {
    let s = harmonic();
    for beta in [0.2, 1.0, 2.0, 5.0] {
        for x0 in [0.5, 1.0, 3.0] {
            let inv = s.enumerate(x0, beta).unwrap();
            assert_eq!(inv.p, 1, "x0={x0} beta={beta}");
            let p = &inv.paths[0];
            let s_exact = x0 * x0 * (0.5 * beta as f64).tanh();
            let d_exact = 2.0 * PI * (beta as f64).sinh();
            assert!(rel(p.action, s_exact) < 1e-7, "S at x0={x0} beta={beta}");
            assert!(
                rel(p.determinant.unwrap(), d_exact) < 1e-7,
                "Delta at x0={x0} beta={beta}: {} vs {d_exact}",
                p.determinant.unwrap()
            );
        }
    }
}

#[test]
fn double_well_round_trip() {
    let s = double_well();
    let sols = s.solve_turning_points(0.5, 1.0).unwrap();
    assert!(!sols.is_empty());
    for sol in sols.iter().filter(|s| s.is_single()) {
        let b = s.time_of_flight(0.5, sol.x_turn().unwrap()).unwrap();
        assert!(rel(b, 1.0) < 1e-9, "{b}");
    }
}

#[test]
fn round_trip_of_every_solution() {
    let s = double_well();
    for (x0, beta) in [(0.3, 2.5), (0.0, 4.0), (-0.6, 5.0), (1.4, 1.0), (0.7, 7.0)] {
        for sol in s.solve_turning_points(x0, beta).unwrap() {
            let b = match (sol.side, sol.n_periods) {
                (Side::Still, _) => continue,
                (_, 0) => s.time_of_flight(x0, sol.x_turn().unwrap()).unwrap(),
                (side, n) => {
                    let side = if sol.periodic { Side::Still } else { side };
                    s.time_of_flight_periodic(x0, sol.energy, n, side).unwrap()
                }
            };
            assert!(rel(b, beta) < 1e-8, "x0={x0} beta={beta} {sol:?} -> {b}");
        }
    }
}

#[test]
fn double_well_counts_at_the_barrier_top() {
    let s = double_well();
    for (beta, p, n) in [(1.0, 1, 1), (2.0, 3, 2), (4.0, 5, 2), (5.0, 7, 2)] {
        let inv = s.enumerate(0.0, beta).unwrap();
        assert_eq!((inv.p, inv.n_minima), (p, n), "beta={beta}: {:#?}", inv.paths);
    }
    let inv = s.enumerate(0.0, 1.0).unwrap();
    assert_eq!(inv.paths[0].side, Side::Still);
    assert_eq!(inv.paths[0].stability, Stability::Minimum);
}

#[test]
fn five_path_regime_composition() {
    let inv = double_well().enumerate(0.0, 4.0).unwrap();
    let count = |st: Stability| inv.paths.iter().filter(|p| p.stability == st).count();
    assert_eq!(count(Stability::Minimum), 2);
    assert_eq!(count(Stability::OneSaddle), 2);
    assert_eq!(count(Stability::MultiSaddle(2)), 1);
    let saddles: Vec<_> = inv
        .paths
        .iter()
        .filter(|p| p.stability == Stability::OneSaddle)
        .collect();
    assert!(saddles.iter().all(|p| p.periodic && p.n_periods == 1));
    assert!(rel(saddles[0].action, saddles[1].action) < 1e-12);
}

#[test]
fn degenerate_minima_at_the_barrier_top() {
    let inv = double_well().enumerate(0.0, 2.0).unwrap();
    let minima: Vec<_> = inv.minima().collect();
    assert_eq!(minima.len(), 2);
    assert!((minima[0].action - minima[1].action).abs() < 1e-10);
    let still = inv.paths.iter().find(|p| p.side == Side::Still).unwrap();
    assert_eq!(still.stability, Stability::OneSaddle);
    assert!((still.action - 2.0).abs() < 1e-14);
}

#[test]
fn still_path_determinant() {
    let s = double_well();
    let still = |beta: f64| {
        s.solve_turning_points(0.0, beta)
            .unwrap()
            .into_iter()
            .find(|t| t.side == Side::Still)
            .unwrap()
    };
    let d = s.fluctuation_determinant(0.0, PI / 4.0, &still(PI / 4.0)).unwrap();
    assert!((d - PI).abs() < 1e-12);
    let d = s.fluctuation_determinant(0.0, PI / 2.0, &still(PI / 2.0)).unwrap();
    assert!(d.abs() < 1e-12);
}

#[test]
fn still_path_stability_examples() {
    let s = double_well();
    let class = |beta: f64| {
        s.enumerate(0.0, beta)
            .unwrap()
            .paths
            .into_iter()
            .find(|p| p.side == Side::Still)
            .unwrap()
            .stability
    };
    assert_eq!(class(1.0), Stability::Minimum);
    assert_eq!(class(2.0), Stability::OneSaddle);
    assert_eq!(class(3.5), Stability::MultiSaddle(2));
}

#[test]
fn still_path_index_steps_by_one() {
    let s = double_well();
    let omega = 2.0;
    let mut prev = None;
    for p in 1..=4 {
        let crossing = p as f64 * PI / omega;
        for beta in [crossing - 1e-3, crossing + 1e-3] {
            let path = s
                .enumerate(0.0, beta)
                .unwrap()
                .paths
                .into_iter()
                .find(|q| q.side == Side::Still)
                .unwrap();
            let idx = match path.stability {
                Stability::Minimum => 0,
                Stability::OneSaddle => 1,
                Stability::MultiSaddle(k) => k,
                Stability::Marginal => panic!("marginal away from the crossing"),
            };
            if beta > crossing {
                assert_eq!(Some(idx), prev.map(|i: u32| i + 1), "beta={beta}");
            }
            prev = Some(idx);
        }
    }
}

#[test]
fn mirror_symmetry_for_even_potential() {
    let s = double_well();
    for (x0, beta) in [(0.4, 2.0), (0.8, 3.0), (1.3, 1.5)] {
        let a = s.enumerate(x0, beta).unwrap();
        let b = s.enumerate(-x0, beta).unwrap();
        assert_eq!(a.p, b.p);
        assert_eq!(a.n_minima, b.n_minima);
        for pa in &a.paths {
            let m = PathSolver::mirror(pa);
            let hit = b.paths.iter().any(|pb| {
                pb.side == m.side
                    && pb.n_periods == m.n_periods
                    && pb.periodic == m.periodic
                    && (pb.action - m.action).abs() <= 1e-10 * m.action.abs().max(1.0)
                    && match (pb.determinant, m.determinant) {
                        (Some(x), Some(y)) => (x - y).abs() <= 1e-10 * y.abs().max(1.0),
                        (None, None) => true,
                        _ => false,
                    }
            });
            assert!(hit, "no mirror for {pa:?}");
        }
    }
}

#[test]
fn outside_the_well_only_single_paths() {
    let s = double_well();
    for beta in [0.5, 2.0, 6.0] {
        let inv = s.enumerate(1.5, beta).unwrap();
        assert_eq!(inv.p, 1, "beta={beta}");
        assert_eq!(inv.paths[0].n_periods, 0);
    }
}

#[test]
fn path_invariants() {
    let s = double_well();
    for (x0, beta) in [(0.2, 3.0), (0.6, 4.5), (-0.9, 2.0), (1.2, 3.0)] {
        let inv = s.enumerate(x0, beta).unwrap();
        assert_eq!(inv.p, inv.paths.len());
        assert!(inv.n_minima <= 2);
        assert!(inv.p % 2 == 1, "x0={x0} beta={beta}: p = {}", inv.p);
        for p in &inv.paths {
            if p.stability == Stability::Minimum {
                assert!(p.determinant.unwrap() > 0.0);
            }
            match p.side {
                Side::Left => assert!(p.x_minus.unwrap() <= x0),
                Side::Right => assert!(p.x_plus.unwrap() >= x0),
                Side::Still => {}
            }
            if p.n_periods == 0 && p.side != Side::Still {
                let xt = p.x_turn().unwrap();
                for i in 1..100 {
                    let x = xt + (x0 - xt) * i as f64 / 100.0;
                    assert!(s.spec().difference(x, xt) >= 0.0);
                }
            }
        }
        for w in inv.paths.windows(2) {
            assert!(w[0].action <= w[1].action);
        }
    }
}

fn bisect_count_jump(s: &PathSolver, x0: f64, mut lo: f64, mut hi: f64) -> f64 {
    let count = |beta: f64| s.enumerate(x0, beta).unwrap().p;
    assert_eq!(count(lo), 1);
    assert_eq!(count(hi), 3);
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if count(mid) == 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn caustic_matches_count_jump_at_the_barrier_top() {
    let s = double_well();
    let jump = bisect_count_jump(&s, 0.0, 1.0, 2.0);
    let still_delta = |beta: f64| {
        s.enumerate(0.0, beta)
            .unwrap()
            .paths
            .into_iter()
            .find(|p| p.side == Side::Still)
            .unwrap()
            .determinant
            .unwrap()
    };
    let (mut lo, mut hi) = (1.0, 2.0);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if still_delta(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((jump - 0.5 * (lo + hi)).abs() < 1e-4, "{jump} vs {lo}");
}

#[test]
fn newborn_pair_has_vanishing_determinant() {
    let s = double_well();
    let x0 = 0.3;
    let jump = bisect_count_jump(&s, x0, 1.0, 2.5);
    let inv = s.enumerate(x0, jump + 1e-6).unwrap();
    let pair: Vec<f64> = inv
        .paths
        .iter()
        .filter(|p| p.side == Side::Left)
        .map(|p| p.determinant.unwrap())
        .collect();
    assert_eq!(pair.len(), 2);
    assert!(pair[0] * pair[1] < 0.0);
    let far = s.enumerate(x0, jump + 0.3).unwrap();
    let far_min = far
        .paths
        .iter()
        .filter(|p| p.side == Side::Left)
        .map(|p| p.determinant.unwrap().abs())
        .fold(f64::INFINITY, f64::min);
    assert!(pair.iter().all(|d| d.abs() < 0.05 * far_min), "{pair:?} vs {far_min}");
}

#[test]
fn unavailable_for_oscillations() {
    let s = double_well();
    let sol = s
        .solve_turning_points(0.0, 4.0)
        .unwrap()
        .into_iter()
        .find(|t| t.n_periods == 1)
        .unwrap();
    assert_eq!(
        s.fluctuation_determinant(0.0, 4.0, &sol),
        Err(Error::Unavailable(1))
    );
}

#[test]
fn inventory_json_shape() {
    let inv = double_well().enumerate(0.0, 2.0).unwrap();
    let v = serde_json::to_value(&inv).unwrap();
    assert_eq!(v["p"], 3);
    assert_eq!(v["N"], 2);
    let first = &v["paths"][0];
    for key in ["side", "x_minus", "x_plus", "n", "E", "S", "Delta", "stability"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    let back: PathInventory = serde_json::from_value(v).unwrap();
    assert_eq!(back, inv);
}

#[test]
fn rejects_nonpositive_beta() {
    assert!(double_well().enumerate(0.0, 0.0).is_err());
    assert!(double_well().enumerate(f64::NAN, 1.0).is_err());
}
