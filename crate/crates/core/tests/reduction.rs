use faer::Mat;
use nnpca::ensembles::{sample_centered_bernoulli, sample_spiked_wishart, CenteredBernoulliParams, WishartSample};
use nnpca::matrix::{dot, norm};
use nnpca::reduction::{detect, embed_wishart, make_z, make_zhat, reduction_diagnostics, Label};
use nnpca::sdp::certify_lambda_max;
use nnpca::spectral::{eigenvalues, quadratic_form};
use nnpca::SeedSpec;
use rand::{Rng, SeedableRng};

fn planted(n: usize, gamma: f64, beta: f64, rho: f64, tag: u64) -> WishartSample {
    let big_n = (n as f64 / gamma).round() as usize;
    (0..)
        .map(|a| sample_spiked_wishart(n, big_n, beta, rho, true, SeedSpec::new(tag, a)).unwrap())
        .find(|s| !s.degenerate && s.spike.as_ref().unwrap().iter().any(|&x| x > 0.0))
        .unwrap()
}

#[test]
fn embedding_invariants_and_inequality_chain() {
    let n = 300;
    let mut k = 0;
    for gamma in [1.05, 1.2, 1.5] {
        for beta in [-0.9, -0.99] {
            for rho in [0.05, 0.1] {
                k += 1;
                let s = planted(n, gamma, beta, rho, 60 + k);
                let inst = embed_wishart(&s, SeedSpec::new(61, k)).unwrap();
                let big_n = s.big_n;
                assert_eq!(inst.span_dim, big_n);

                let v = &inst.v_basis;
                let gram: Mat<f64> = v.transpose() * v;
                for i in 0..n {
                    for j in 0..n {
                        let t = if i == j { 1.0 } else { 0.0 };
                        assert!((gram[(i, j)] - t).abs() <= 1e-8);
                    }
                }

                let ev = eigenvalues(&inst.w).unwrap();
                for (a, b) in ev.iter().zip(&inst.goe_eigs) {
                    assert!((a - b).abs() <= 1e-8);
                }

                // every sample lies in the span of the first N basis vectors
                let vn = v.subcols(0, big_n);
                for c in 0..big_n {
                    let y = s.samples.col(c);
                    let coef = vn.transpose() * y;
                    let resid = y - vn * &coef;
                    let rn = resid.norm_l2();
                    assert!(rn <= 1e-8 * y.norm_l2().max(1.0), "span residual {rn}");
                }

                let d = reduction_diagnostics(&s, &inst).unwrap();
                assert!(d.z_w_z >= d.bound_rhs - 1e-8, "{d:?}");
                assert!(d.s <= d.zhat_sample_energy / d.mu + 1e-8, "{d:?}");
                assert!(d.lambda_n1 - d.lambda_1 <= 5.0);
            }
        }
    }
}

#[test]
fn complement_carries_the_top_eigenvalues() {
    let s = planted(200, 1.2, -0.9, 0.1, 62);
    let inst = embed_wishart(&s, SeedSpec::new(62, 0)).unwrap();
    let big_n = s.big_n;
    let lam = inst.goe_eigs[big_n];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(62);
    for _ in 0..20 {
        let mut x = vec![0.0; 200];
        for k in big_n..200 {
            let c: f64 = rng.random_range(-1.0..1.0);
            for (xi, b) in x.iter_mut().zip(inst.basis_vector(k)) {
                *xi += c * b;
            }
        }
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        assert!(quadratic_form(&inst.w, &x).unwrap() >= lam - 1e-8);
    }
}

/// Two-sided z-test at the 1% level for the mean and the variance of one
/// entry across draws, with the variance statistic normal-approximated.
fn entry_passes(values: &[f64], var: f64) -> bool {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let s2 = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let z_mean = mean / (var / m).sqrt();
    let z_var = (s2 - var) / (var * (2.0 / (m - 1.0)).sqrt());
    z_mean.abs() <= 2.576 && z_var.abs() <= 2.576
}

#[test]
fn null_embeddings_look_like_goe() {
    let n = 100;
    let draws: Vec<_> = (0..100)
        .map(|t| {
            let s = sample_spiked_wishart(n, 60, 0.0, 0.1, false, SeedSpec::new(63, t)).unwrap();
            embed_wishart(&s, SeedSpec::new(64, t)).unwrap().w
        })
        .collect();
    let nf = n as f64;
    for (i, j) in [(0, 0), (17, 17), (99, 99)] {
        let v: Vec<f64> = draws.iter().map(|w| w.get(i, j)).collect();
        assert!(entry_passes(&v, 2.0 / nf), "diagonal ({i},{j})");
    }
    for (i, j) in [(0, 1), (5, 80), (42, 43)] {
        let v: Vec<f64> = draws.iter().map(|w| w.get(i, j)).collect();
        assert!(entry_passes(&v, 1.0 / nf), "off-diagonal ({i},{j})");
    }
}

#[test]
fn verdicts() {
    let null = sample_spiked_wishart(200, 100, 0.0, 0.1, false, SeedSpec::new(65, 0)).unwrap();
    let v = detect(&null, certify_lambda_max, 0.1, SeedSpec::new(65, 1)).unwrap();
    assert_eq!(v.label, Label::P);
    assert!(v.certificate_value > v.threshold);
    let v = detect(&null, |_| Ok(1.0), 0.1, SeedSpec::new(65, 1)).unwrap();
    assert_eq!(v.label, Label::Q);

    let degenerate = (0..10_000)
        .map(|a| sample_spiked_wishart(20, 10, -0.99, 0.2, true, SeedSpec::new(66, a)).unwrap())
        .find(|s| s.degenerate)
        .expect("beta ‖u‖² <= -1 happens for some draw");
    let v = detect(&degenerate, |_| panic!("certifier must not run"), 0.1, SeedSpec::new(66, 0)).unwrap();
    assert_eq!(v.label, Label::P);
}

#[test]
fn zhat_overlap_is_determined_by_the_positive_count() {
    let (n, rho) = (10_000, 0.1);
    let params = CenteredBernoulliParams::new(rho, n).unwrap();
    for t in 0..5 {
        let u = sample_centered_bernoulli(params, SeedSpec::new(67, t)).unwrap();
        let z = make_z(&u, rho).unwrap();
        let zhat = make_zhat(&u, rho).unwrap();
        assert!(zhat.iter().all(|&x| x >= 0.0) && (norm(&zhat) - 1.0).abs() <= 1e-12);
        let k = u.iter().filter(|&&x| x > 0.0).count() as f64;
        assert!((norm(&z) - (k / (rho * n as f64)).sqrt()).abs() <= 1e-12);
        assert!((dot(&zhat, &u) - (1.0 - rho).sqrt() * norm(&z)).abs() <= 1e-12);
    }
}

/// `P(|sqrt(k / (rho n)) - 1| <= 0.02)` for `k ~ Binomial(n, rho)`.
fn norm_band_probability(n: usize, rho: f64) -> f64 {
    let mut log_pmf = n as f64 * (1.0 - rho).ln();
    let mut total = 0.0;
    for k in 0..=n {
        if k > 0 {
            log_pmf += ((n - k + 1) as f64 / k as f64).ln() + (rho / (1.0 - rho)).ln();
        }
        if ((k as f64 / (rho * n as f64)).sqrt() - 1.0).abs() <= 0.02 {
            total += log_pmf.exp();
        }
    }
    total
}

// ‖z‖ and <ẑ, u> / sqrt(1 - rho) both equal sqrt(k / (rho n)), whose
// standard deviation at n = 10^4, rho = 0.1 is about 0.015; a ±0.02 band
// around the limit therefore holds with probability near 0.8, checked here
// as a frequency.
#[test]
fn zhat_limits_hold_at_their_exact_rate() {
    let (n, rho) = (10_000, 0.1);
    let p = norm_band_probability(n, rho);
    assert!((0.7..0.9).contains(&p), "exact band probability {p}");
    let params = CenteredBernoulliParams::new(rho, n).unwrap();
    let draws = 300;
    let mut hits_norm = 0;
    let mut hits_overlap = 0;
    for t in 0..draws {
        let u = sample_centered_bernoulli(params, SeedSpec::new(68, t)).unwrap();
        if (norm(&make_z(&u, rho).unwrap()) - 1.0).abs() <= 0.02 {
            hits_norm += 1;
        }
        if (dot(&make_zhat(&u, rho).unwrap(), &u) - 0.9f64.sqrt()).abs() <= 0.02 {
            hits_overlap += 1;
        }
    }
    let sd = (p * (1.0 - p) / draws as f64).sqrt();
    let f = hits_norm as f64 / draws as f64;
    assert!((f - p).abs() <= 4.0 * sd, "‖z‖ band frequency {f} vs {p}");
    // the overlap band is wider in k-space by the factor 1 / sqrt(1 - rho)
    assert!(hits_overlap >= hits_norm, "{hits_overlap} < {hits_norm}");
}
