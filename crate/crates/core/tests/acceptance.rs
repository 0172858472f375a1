//! Acceptance gate: every release criterion in one suite, each with its
//! stated tolerance and a single PASS line on success (assertion output
//! doubles as the FAIL line). Paper-scale variants of the two figure
//! criteria are tagged #[ignore] and not part of the default run.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ric_limits::mc::{self, SimSpec};
use ric_limits::recovery;
use ric_limits::ric::{self, Method, ProblemDims, ThresholdKind};
use ric_limits::robustness::{self, Constant};
use ric_limits::tw;
use ric_limits::wishart::{self, SpectralInterval, WishartDims};
use ric_limits::{numerics, LogProb, PrecisionConfig};

fn cfg() -> PrecisionConfig {
    PrecisionConfig::default()
}

/// Criterion 1: Table-I regression, m=2000, s=4, eps=1e-2; EED and TW
/// thresholds at m/n in {0.4, 0.6, 0.8} within +-0.003 (+-0.004 at 0.6,
/// where the n rounding is ambiguous). Budget: < 2 minutes.
#[test]
fn criterion_01_table1_regression() {
    let start = Instant::now();
    let c = cfg();
    // (n, tol, eed_upper, eed_lower, tw_upper, tw_lower)
    let rows = [
        (5000u64, 0.003, 0.3071, 0.2561, 0.3395, 0.2846),
        (3333, 0.004, 0.3000, 0.2512, 0.3304, 0.2778),
        (2500, 0.003, 0.2949, 0.2477, 0.3239, 0.2729),
    ];
    for (n, tol, eu, el, twu, twl) in rows {
        let dims = ProblemDims::new(2000, n, 4).unwrap();
        let got = |kind, method| {
            ric::ric_threshold(&c, dims, 1e-2, kind, method)
                .unwrap()
                .value
        };
        for (kind, method, want) in [
            (ThresholdKind::Upper, Method::Eed, eu),
            (ThresholdKind::Lower, Method::Eed, el),
            (ThresholdKind::Upper, Method::Tw, twu),
            (ThresholdKind::Lower, Method::Tw, twl),
        ] {
            let v = got(kind, method);
            assert!(
                (v - want).abs() <= tol,
                "n={n} {kind:?} {method:?}: got {v}, want {want} +- {tol}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "table regression took {elapsed:?}");
    println!("[PASS] criterion 1: Table I EED/TW thresholds within tolerance ({elapsed:?})");
}

/// Criterion 2: chi-square identity |psi_m1(a,b) - P(m/2; a/2, b/2)| < 1e-12
/// for m = 2..20 over a 10-point window grid.
#[test]
fn criterion_02_chi_square_identity() {
    let c = cfg();
    let mut worst: f64 = 0.0;
    for m in 2u32..=20 {
        let d = WishartDims::new(m, 1).unwrap();
        for i in 0..10 {
            let a = 0.3 * i as f64;
            let b = a + 1.0 + 2.5 * i as f64;
            let psi = wishart::psi(&c, d, SpectralInterval::new(a, b).unwrap())
                .unwrap()
                .prob();
            let gamma = numerics::gen_reg_inc_gamma(&c, m as f64 / 2.0, a / 2.0, b / 2.0)
                .unwrap()
                .prob();
            worst = worst.max((psi - gamma).abs());
        }
    }
    assert!(worst < 1e-12, "worst chi-square deviation {worst:e}");
    println!("[PASS] criterion 2: chi-square identity, worst deviation {worst:e}");
}

/// Criterion 3: normalization |psi(0, inf) - 1| < 1e-10 via the explicit
/// constant: ln K' + ln |Pf Q(0, inf)| must vanish (psi itself is evaluated
/// self-normalized, so the check must go through the independent route).
#[test]
fn criterion_03_normalization() {
    let c = cfg();
    for (m, s) in [(5u32, 2u32), (10, 3), (20, 5), (50, 10), (200, 20)] {
        let d = WishartDims::new(m, s).unwrap();
        let q = wishart::build_q(&c, d, SpectralInterval::new(0.0, f64::INFINITY).unwrap())
            .unwrap();
        let ln_psi = wishart::ln_k_prime(&c, d).unwrap() + wishart::log_pfaffian_abs(&q);
        let dev = (ln_psi.exp() - 1.0).abs();
        assert!(dev < 1e-10, "(m,s)=({m},{s}): |psi(0,inf)-1| = {dev:e}");
    }
    println!("[PASS] criterion 3: psi(0,inf) = 1 within 1e-10 at all five dims");
}

/// Criterion 4: Monte Carlo agreement at 1e6 trials on a 5x5 window grid
/// with true psi inside [0.05, 0.95]; every point within 4 binomial SEs.
/// Budget: < 10 minutes.
#[test]
fn criterion_04_monte_carlo_agreement() {
    let start = Instant::now();
    let c = cfg();
    let trials = 1_000_000u64;
    for (m, s, seed) in [(6u32, 2u32, 11u64), (10, 3, 12), (20, 5, 13)] {
        let d = WishartDims::new(m, s).unwrap();
        let mf = m as f64;
        // percentile-anchored edges keep the grid in the testable bulk
        let mut a_edges = Vec::new();
        let mut b_edges = Vec::new();
        for eta in [0.03, 0.08, 0.15, 0.25, 0.4] {
            let (lmin, lmax) = wishart::eig_percentiles(&c, d, eta).unwrap();
            a_edges.push(mf * lmin);
            b_edges.push(mf * lmax);
        }
        let mut windows = Vec::new();
        for &a in &a_edges {
            for &b in &b_edges {
                windows.push((a, b));
            }
        }
        let est = mc::empirical_psi_grid(d, SimSpec::new(trials, seed).unwrap(), &windows);
        for (idx, &(a, b)) in windows.iter().enumerate() {
            let truth = wishart::psi(&c, d, SpectralInterval::new(a, b).unwrap())
                .unwrap()
                .prob();
            assert!(
                (0.05..=0.95).contains(&truth),
                "grid point left the testable bulk: psi = {truth}"
            );
            let se = (est[idx] * (1.0 - est[idx]) / trials as f64).sqrt();
            assert!(
                (truth - est[idx]).abs() <= 4.0 * se,
                "(m,s)=({m},{s}) window [{a:.3},{b:.3}]: psi {truth} vs {} (se {se:e})",
                est[idx]
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 600, "MC agreement took {elapsed:?}");
    println!("[PASS] criterion 4: 1e6-trial MC within 4 SE on all 75 windows ({elapsed:?})");
}

fn max_certified_s(c: &PrecisionConfig, n: u64, m: u32, delta: f64, level: f64, method: Method) -> u32 {
    let mut s_star = 0;
    for s in 1..m {
        let b = ric::beta_lower_bound(c, ProblemDims::new(m, n, s).unwrap(), delta, method)
            .unwrap();
        if !b.vacuous && b.ln_complement <= level.ln() {
            s_star = s;
        } else {
            break;
        }
    }
    s_star
}

/// Criterion 5: at n=3000, m=1200, the EED bound certifies at least twice
/// the sparsity the concentration bound certifies at complement 1e-10.
#[test]
fn criterion_05_eed_dominates_concentration() {
    let c = cfg();
    let (n, m, delta, level) = (3000u64, 1200u32, 1.0 / 3.0, 1e-10);
    let s_conc = max_certified_s(&c, n, m, delta, level, Method::Concentration);
    let s_eed = max_certified_s(&c, n, m, delta, level, Method::Eed);
    assert!(
        s_eed >= 2 * s_conc,
        "EED s* = {s_eed} below 2x concentration s* = {s_conc}"
    );
    println!("[PASS] criterion 5: EED s* = {s_eed} >= 2x concentration s* = {s_conc}");
}

/// Criterion 6: right-skew asymmetry of the extremes at eta = 1e-10:
/// lambda_max* - 1 > 1 - lambda_min* across m in {200,300,400},
/// s/m in {0.05..0.5}.
#[test]
fn criterion_06_asymmetry() {
    let c = cfg();
    for m in [200u32, 300, 400] {
        for i in 1..=10 {
            let s = ((0.05 * i as f64) * m as f64).round() as u32;
            let d = WishartDims::new(m, s).unwrap();
            let (lmin, lmax) = wishart::eig_percentiles(&c, d, 1e-10).unwrap();
            assert!(
                lmax - 1.0 > 1.0 - lmin,
                "(m,s)=({m},{s}): upper excursion {} <= lower {}",
                lmax - 1.0,
                1.0 - lmin
            );
        }
    }
    println!("[PASS] criterion 6: lambda_max* - 1 > 1 - lambda_min* on the full grid");
}

/// Criterion 7: recovery-condition ordering at m=400, n=4000, eta=1e-3:
/// the asymmetric ECG condition certifies at least the sparsity of the
/// symmetric delta_s < 1/3 condition, and delta_3s < 0.5773 at least that
/// of delta_4s < 0.4782.
#[test]
fn criterion_07_condition_ordering() {
    let c = cfg();
    let (m, n, eta) = (400u32, 4000u64, 1e-3);
    let s_of = |name: &str| {
        recovery::max_sparsity(&c, m, n, eta, &recovery::find_condition(name).unwrap(), Method::Eed)
            .unwrap()
            .s_star
    };
    let s_ctz = s_of("ctz13");
    let s_ecg = s_of("ecg");
    let s_iht = s_of("iht-3s");
    let s_cosamp = s_of("cosamp-4s");
    assert!(s_ecg >= s_ctz, "s*(ecg) = {s_ecg} < s*(ctz13) = {s_ctz}");
    assert!(
        s_iht >= s_cosamp,
        "s*(iht-3s) = {s_iht} < s*(cosamp-4s) = {s_cosamp}"
    );
    println!(
        "[PASS] criterion 7: s*(ecg)={s_ecg} >= s*(ctz13)={s_ctz}, \
         s*(iht-3s)={s_iht} >= s*(cosamp-4s)={s_cosamp}"
    );
}

/// Criterion 8: robustness constants: exact values at zero, monotone
/// increase on 1e3 samples, and a Fig.-6-style level-set recomputation at
/// m=2000 that re-evaluates to its level within 2%.
#[test]
fn criterion_08_robustness_constants() {
    let c = cfg();
    assert!((robustness::c1(0.0).unwrap() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
    assert!((robustness::c2(0.0).unwrap() - 2.0).abs() < 1e-12);
    let mut last = (0.0, 0.0);
    for i in 0..1000 {
        let d = i as f64 * (1.0 / 3.0 - 1e-6) / 999.0;
        let v = (robustness::c1(d).unwrap(), robustness::c2(d).unwrap());
        assert!(v.0 > last.0 && v.1 > last.1, "not increasing at delta = {d}");
        last = v;
    }
    // level set: in the m=2000, n=8000, s=2 configuration, solve for the
    // epsilon that puts delta*_sym on the C1 = 8 contour, then re-evaluate
    // via the full threshold solver
    let (m, s, level) = (2000u32, 2u32, 8.0);
    let dims = ProblemDims::new(m, 4 * m as u64, s).unwrap();
    let d_t = robustness::constant_inverse(Constant::C1, level).unwrap();
    let ln_surv = ric::ln_psw_survival(&c, dims, d_t, Method::Eed).unwrap();
    let eps_t = (ln_surv + dims.ln_binomial(&c).unwrap()).exp();
    assert!(
        eps_t.is_finite() && eps_t > 0.0 && eps_t < 1.0,
        "contour epsilon {eps_t:e} left the feasible range"
    );
    let d_back = ric::ric_threshold(&c, dims, eps_t, ThresholdKind::Symmetric, Method::Eed)
        .unwrap()
        .value;
    let level_back = robustness::c1(d_back).unwrap();
    assert!(
        (level_back - level).abs() <= 0.02 * level,
        "level set at eps = {eps_t:e} re-evaluates to C1 = {level_back}"
    );
    println!(
        "[PASS] criterion 8: C1/C2 exact at 0, monotone; level set C1=8 at eps={eps_t:.3e} \
         re-evaluates to {level_back:.4}"
    );
}

/// Criterion 9: threshold round-trips for 50 random (m, n, s, eps):
/// |ln survival(delta*) - ln(eps / C(n,s))| < 1e-6, all three kinds, both
/// methods.
#[test]
fn criterion_09_threshold_round_trips() {
    let c = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut done = 0;
    while done < 50 {
        let m = rng.gen_range(10u32..=50);
        let s = rng.gen_range(1u32..=(m / 3).clamp(1, 8));
        let n = rng.gen_range((m as u64 + 1)..=5000);
        let eps = 10f64.powf(rng.gen_range(-8.0..=-0.3));
        let dims = ProblemDims::new(m, n, s).unwrap();
        let ln_target = eps.ln() - dims.ln_binomial(&c).unwrap();
        let wd = dims.wishart();
        let mf = m as f64;
        for kind in [ThresholdKind::Symmetric, ThresholdKind::Lower, ThresholdKind::Upper] {
            for method in [Method::Eed, Method::Tw] {
                let t = ric::ric_threshold(&c, dims, eps, kind, method).unwrap();
                let x = t.value;
                let ln_surv = match method {
                    Method::Eed => {
                        let iv = match kind {
                            ThresholdKind::Symmetric => SpectralInterval::new(
                                (mf * (1.0 - x)).max(0.0),
                                mf * (1.0 + x),
                            ),
                            ThresholdKind::Lower => {
                                SpectralInterval::new(mf * (1.0 - x), f64::INFINITY)
                            }
                            ThresholdKind::Upper => SpectralInterval::new(0.0, mf * (1.0 + x)),
                        }
                        .unwrap();
                        wishart::ln_psi_survival(&c, wd, iv).unwrap()
                    }
                    _ => {
                        let sc = tw::scalings(wd);
                        match kind {
                            ThresholdKind::Symmetric => tw::ln_psw_tw_survival(wd, x),
                            ThresholdKind::Upper => {
                                tw::ln_tw1_ccdf((mf * (1.0 + x) - sc.mu_ms) / sc.sigma_ms)
                            }
                            ThresholdKind::Lower => tw::ln_tw1_ccdf(
                                (sc.v_ms - (mf * (1.0 - x)).ln()) / sc.tau_ms,
                            ),
                        }
                    }
                };
                assert!(
                    (ln_surv - ln_target).abs() < 1e-6,
                    "(m,n,s,eps)=({m},{n},{s},{eps:e}) {kind:?} {method:?}: \
                     |{ln_surv} - {ln_target}| >= 1e-6"
                );
            }
        }
        done += 1;
    }
    println!("[PASS] criterion 9: 50 random round-trips within 1e-6, all kinds and methods");
}

/// High-precision TW1 complementary CDF on t = -5.0..3.0 step 0.1
/// (Painleve II via the Hastings-McLeod solution; independent oracle).
const TW1_CCDF_TABLE: [(f64, f64); 81] = [
    (-5.0, 9.994472720085e-01), (-4.9, 9.992902903274e-01), (-4.8, 9.990799232262e-01),
    (-4.7, 9.987978593837e-01), (-4.6, 9.984206450955e-01), (-4.5, 9.979187516490e-01),
    (-4.4, 9.972556289087e-01), (-4.3, 9.963867938149e-01), (-4.2, 9.952590131321e-01),
    (-4.1, 9.938096484919e-01), (-4.0, 9.919662373540e-01), (-3.9, 9.896463847969e-01),
    (-3.8, 9.867580370973e-01), (-3.7, 9.832001982275e-01), (-3.6, 9.788641345196e-01),
    (-3.5, 9.736350911695e-01), (-3.4, 9.673945179128e-01), (-3.3, 9.600227715631e-01),
    (-3.2, 9.514022320868e-01), (-3.1, 9.414207387250e-01), (-3.0, 9.299752256939e-01),
    (-2.9, 9.169754154516e-01), (-2.8, 9.023474133280e-01), (-2.7, 8.860370418896e-01),
    (-2.6, 8.680127575327e-01), (-2.5, 8.482680054812e-01), (-2.4, 8.268228919210e-01),
    (-2.3, 8.037250820206e-01), (-2.2, 7.790498681306e-01), (-2.1, 7.528993911805e-01),
    (-2.0, 7.254010376827e-01), (-1.9, 6.967050723252e-01), (-1.8, 6.669815996148e-01),
    (-1.7, 6.364169755529e-01), (-1.6, 6.052098105186e-01), (-1.5, 5.735667166108e-01),
    (-1.4, 5.416979564738e-01), (-1.3, 5.098131464526e-01), (-1.2, 4.781171556447e-01),
    (-1.1, 4.468063252359e-01), (-1.0, 4.160651108976e-01), (-0.9, 3.860632265515e-01),
    (-0.8, 3.569533420587e-01), (-0.7, 3.288693618265e-01), (-0.6, 3.019252872296e-01),
    (-0.5, 2.762146441530e-01), (-0.4, 2.518104386206e-01), (-0.3, 2.287655888678e-01),
    (-0.2, 2.071137715381e-01), (-0.1, 1.868706128891e-01), (0.0, 1.680351527630e-01),
    (0.1, 1.505915091951e-01), (0.2, 1.345106744285e-01), (0.3, 1.197523782024e-01),
    (0.4, 1.062669609323e-01), (0.5, 9.399720723304e-02), (0.6, 8.288009865805e-02),
    (0.7, 7.284845308272e-02), (0.8, 6.383242648314e-02), (0.9, 5.576086065615e-02),
    (1.0, 4.856246748187e-02), (1.1, 4.216684650358e-02), (1.2, 3.650533781605e-02),
    (1.3, 3.151171649340e-02), (1.4, 2.712273807564e-02), (1.5, 2.327854702903e-02),
    (1.6, 1.992296168459e-02), (1.7, 1.700365003884e-02), (1.8, 1.447221108093e-02),
    (1.9, 1.228417609757e-02), (2.0, 1.039894380760e-02), (2.1, 8.779662288604e-03),
    (2.2, 7.393069567324e-03), (2.3, 6.209303529610e-03), (2.4, 5.201690529652e-03),
    (2.5, 4.346520794998e-03), (2.6, 3.622817475176e-03), (2.7, 3.012104999227e-03),
    (2.8, 2.498181313200e-03), (2.9, 2.066897577327e-03), (3.0, 1.705948021645e-03),
];

/// Criterion 10: surrogate CCDF within 5e-3 of the high-precision table on
/// [-5, 3]; inverse round-trip relative error < 1e-8 down to exp(-600).
#[test]
fn criterion_10_tw_engine() {
    let mut worst: f64 = 0.0;
    for (t, want) in TW1_CCDF_TABLE {
        let got = tw::tw1_ccdf(t).prob();
        worst = worst.max((got - want).abs());
    }
    assert!(worst < 5e-3, "worst CCDF deviation {worst:e}");
    let mut ln_p = -0.105; // ~0.9
    while ln_p >= -600.0 {
        let t = tw::tw1_ccdf_inverse(LogProb::from_ln(ln_p).unwrap()).unwrap();
        let back = tw::ln_tw1_ccdf(t);
        assert!(
            (back - ln_p).abs() < 1e-8,
            "round trip at ln p = {ln_p}: got {back}"
        );
        ln_p *= 1.35;
    }
    println!("[PASS] criterion 10: surrogate within {worst:e} of the TW1 table; inverses round-trip");
}

/// Criterion 11: at n=18, m=10, s=2 with 200 exhaustive-enumeration trials,
/// the empirical CDFs of lRIC/uRIC/RIC dominate the closed-form lower
/// bounds at every tested x, up to the 99% binomial CI.
#[test]
fn criterion_11_empirical_dominance() {
    let c = cfg();
    let (n, m, s, trials) = (18u32, 10u32, 2u32, 200u64);
    let rics = mc::empirical_ric(n, m, s, SimSpec::new(trials, 99).unwrap()).unwrap();
    let dims = ProblemDims::new(m, n as u64, s).unwrap();
    let tf = trials as f64;
    let z99 = 2.576;
    let emp_cdf = |vals: &[f64], x: f64| vals.iter().filter(|&&v| v <= x).count() as f64 / tf;
    let lvals: Vec<f64> = rics.iter().map(|r| r.0).collect();
    let uvals: Vec<f64> = rics.iter().map(|r| r.1).collect();
    let svals: Vec<f64> = rics.iter().map(|r| r.2).collect();
    for i in 1..=12 {
        let x = i as f64 / 13.0 * 0.999; // (0, 1) grid for lower/symmetric
        let xu = i as f64 / 13.0 * 2.5; // upper RIC ranges past 1
        let checks = [
            ("lric", emp_cdf(&lvals, x), ric::aric_cdf_lower_bound(&c, dims, x, ThresholdKind::Lower).unwrap().value()),
            ("uric", emp_cdf(&uvals, xu), ric::aric_cdf_lower_bound(&c, dims, xu, ThresholdKind::Upper).unwrap().value()),
            ("ric", emp_cdf(&svals, x), ric::beta_lower_bound(&c, dims, x, Method::Eed).unwrap().value()),
        ];
        for (name, emp, bound) in checks {
            if bound <= 0.0 {
                continue; // vacuous bound dominates trivially
            }
            let se = (emp * (1.0 - emp) / tf).sqrt().max(1.0 / tf);
            assert!(
                emp + z99 * se >= bound,
                "{name} at x={x:.3}: empirical {emp} below bound {bound} beyond 99% CI"
            );
        }
    }
    println!("[PASS] criterion 11: empirical lRIC/uRIC/RIC CDFs dominate the bounds (99% CI)");
}

/// Paper-scale variant of criterion 5 (n = 3e4): the EED bound certifies a
/// more than 220% larger s/n than concentration. Slow; not in the default
/// suite.
#[test]
#[ignore]
fn criterion_05_paper_scale() {
    let c = cfg();
    let (n, m, delta, level) = (30_000u64, 12_000u32, 1.0 / 3.0, 1e-10);
    let s_conc = max_certified_s(&c, n, m, delta, level, Method::Concentration);
    let b = ric::beta_lower_bound(
        &c,
        ProblemDims::new(m, n, s_conc * 16 / 5).unwrap(),
        delta,
        Method::Eed,
    )
    .unwrap();
    assert!(!b.vacuous && b.ln_complement <= level.ln());
    println!("[PASS] criterion 5 (paper scale): EED certified at 3.2x the concentration s*");
}

/// Paper-scale variant of criterion 7 (m = 4000): the asymmetric ECG
/// condition buys more than a 40% sparsity increase over delta_s < 1/3.
#[test]
#[ignore]
fn criterion_07_paper_scale() {
    let c = cfg();
    let (m, n, eta) = (4000u32, 40_000u64, 1e-3);
    let s_of = |name: &str| {
        recovery::max_sparsity(&c, m, n, eta, &recovery::find_condition(name).unwrap(), Method::Eed)
            .unwrap()
            .s_star
    };
    let s_ctz = s_of("ctz13");
    let s_ecg = s_of("ecg");
    assert!(
        s_ecg as f64 >= 1.4 * s_ctz as f64,
        "s*(ecg) = {s_ecg} is not a 40% increase over s*(ctz13) = {s_ctz}"
    );
    println!("[PASS] criterion 7 (paper scale): s*(ecg)={s_ecg} >= 1.4 s*(ctz13)={s_ctz}");
}
