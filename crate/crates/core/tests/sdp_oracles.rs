mod common;

use common::{grid_sdp_2x2, lambda_plus_grid_3, rng, uniform_sym};
use nnpca::ensembles::sample_goe;
use nnpca::heuristics::{lambda_plus_bruteforce, local_ascent, AscentConfig};
use nnpca::sdp::{certify_lambda_max, check_feasibility, solve_primal, SdpConfig, SdpStatus};
use nnpca::{SeedSpec, SymMatrix};

fn solve(w: &SymMatrix) -> nnpca::sdp::SdpSolution {
    solve_primal(w, &SdpConfig::default()).unwrap()
}

#[test]
fn random_2x2_values_match_grid() {
    let mut r = rng(11);
    for _ in 0..100 {
        let w = uniform_sym(&mut r, 2, -2.0, 2.0);
        let sol = solve(&w);
        let oracle = grid_sdp_2x2(&w);
        assert!((sol.value - oracle).abs() <= 1e-3, "solver {} vs grid {oracle} on {w:?}", sol.value);
    }
}

// For n <= 4 every doubly nonnegative matrix is completely positive, so the
// relaxation is tight and its value is the nonnegative maximum of xᵀWx.
#[test]
fn random_3x3_values_match_completely_positive_oracle() {
    let mut r = rng(12);
    for _ in 0..100 {
        let w = uniform_sym(&mut r, 3, -2.0, 2.0);
        let sol = solve(&w);
        let oracle = lambda_plus_grid_3(&w);
        assert!((sol.value - oracle).abs() <= 1e-3, "solver {} vs grid {oracle} on {w:?}", sol.value);
    }
}

#[test]
fn heuristics_match_grid_at_n3() {
    let mut r = rng(13);
    for k in 0..50 {
        let w = uniform_sym(&mut r, 3, -2.0, 2.0);
        let oracle = lambda_plus_grid_3(&w);
        let brute = lambda_plus_bruteforce(&w, 60).unwrap();
        assert!((brute.value - oracle).abs() <= 1e-6, "brute force {} vs {oracle}", brute.value);
        let asc = local_ascent(&w, &AscentConfig::default(), SeedSpec::new(13, k)).unwrap();
        assert!((asc.value - brute.value).abs() <= 1e-3, "ascent {} vs {}", asc.value, brute.value);
    }
}

#[test]
fn antipodal_off_diagonal() {
    let w = SymMatrix::from_rows(&[&[0.0, -1.0], &[-1.0, 0.0]]).unwrap();
    let sol = solve(&w);
    assert_eq!(sol.status, SdpStatus::Converged);
    assert!(sol.value.abs() <= 1e-3);
    assert!(sol.x_opt.get(0, 1).abs() <= 1e-3);
    let y = &sol.y_dual;
    assert!((y.get(0, 1) - 1.0).abs() <= 1e-3, "{y:?}");
    assert!(y.get(0, 0).abs() <= 1e-3 && y.get(1, 1).abs() <= 1e-3);
    assert!(sol.dual_value.abs() <= 1e-3);
}

#[test]
fn distinct_diagonal_needs_no_certificate() {
    let w = SymMatrix::from_diagonal(&[0.3, 1.7]).unwrap();
    let sol = solve(&w);
    assert!((sol.value - 1.7).abs() <= 1e-3);
    assert!((grid_sdp_2x2(&w) - 1.7).abs() <= 1e-9);
    assert!(sol.y_dual.frobenius_norm() <= 1e-3);
    assert!((sol.dual_value - 1.7).abs() <= 1e-3);
}

#[test]
fn converged_solutions_honour_their_contract() {
    let mut r = rng(14);
    for n in [2, 3, 5, 8, 12] {
        let w = uniform_sym(&mut r, n, -1.0, 1.0);
        let cfg = SdpConfig::default();
        let sol = solve_primal(&w, &cfg).unwrap();
        assert_eq!(sol.status, SdpStatus::Converged, "n = {n}");
        assert!(check_feasibility(&sol.x_opt, 10.0 * cfg.primal_tol).feasible);
        assert!(sol.y_dual.min_entry() >= -1e-8);
        assert!(sol.dual_value >= sol.value - 1e-3);
        assert!(certify_lambda_max(&w).unwrap() >= sol.value - 1e-3);
        let asc = local_ascent(&w, &AscentConfig::default(), SeedSpec::new(14, n as u64)).unwrap();
        assert!(asc.value - 1e-6 <= sol.dual_value, "ascent {} above certificate {}", asc.value, sol.dual_value);
        assert!(asc.value <= sol.value + 1e-3);
    }
}

#[test]
fn goe_150_value_and_strong_duality() {
    let w = sample_goe(150, SeedSpec::grid(7, 150, 0)).unwrap();
    let sol = solve(&w);
    assert_eq!(sol.status, SdpStatus::Converged);
    assert!((sol.value - 2f64.sqrt()).abs() <= 0.1, "value {}", sol.value);
    assert!(sol.dual_usable);
    assert!((sol.dual_value - sol.value).abs() <= 1e-3, "gap {}", sol.duality_gap());
    assert!(sol.dual_value <= certify_lambda_max(&w).unwrap() - 0.3);
    let asc = local_ascent(&w, &AscentConfig::default(), SeedSpec::new(7, 0)).unwrap();
    assert!(asc.value - 1e-6 <= sol.dual_value);
    assert!(asc.value <= sol.value + 1e-3);
}
