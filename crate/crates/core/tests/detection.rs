use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use scma_forge::channels::{db_to_linear, ChannelSpec, FadingRealization};
use scma_forge::detection::{check_sparsity, ml_detect, mpa_detect, MlDetector, MpaDetector, ReceivedBlock};
use scma_forge::factor_graph::IndicatorMatrix;
use scma_forge::group_optimizer::{optimize_group, OptimizerConfig};
use scma_forge::progressive_builder::{build_codebooks, Codebook, SearchMode};
use scma_forge::Error;

fn designed() -> Vec<Codebook> {
    let spec = ChannelSpec::rayleigh(0.5).unwrap();
    let g = optimize_group(4, 3, &spec, &OptimizerConfig::default()).unwrap().group;
    build_codebooks(&IndicatorMatrix::four_by_six(), &g, &spec, db_to_linear(16.0), SearchMode::Exhaustive)
        .unwrap()
        .codebooks
}

fn transmit(cbs: &[Codebook], symbols: &[usize], spec: &ChannelSpec, n0: f64, rng: &mut ChaCha8Rng) -> ReceivedBlock {
    let k = cbs[0].res();
    let channel = spec.sample(k, rng);
    let y = (0..k)
        .map(|r| {
            let x: Complex64 = cbs.iter().zip(symbols).map(|(cb, &s)| cb.codewords[s][r]).sum();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            channel.coefficients[r] * x + Complex64::new(re, im) * (n0 / 2.0).sqrt()
        })
        .collect();
    ReceivedBlock::new(y, channel, n0).unwrap()
}

fn random_codebooks(supports: &[Vec<usize>], k: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<Codebook> {
    supports
        .iter()
        .enumerate()
        .map(|(user, sup)| Codebook {
            user,
            codewords: (0..m)
                .map(|_| {
                    (0..k)
                        .map(|r| {
                            if sup.contains(&r) {
                                Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
                            } else {
                                Complex64::new(0.0, 0.0)
                            }
                        })
                        .collect()
                })
                .collect(),
        })
        .collect()
}

fn assert_marginals_equal(a: &[Vec<f64>], b: &[Vec<f64>]) {
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-9, "{ra:?} vs {rb:?}");
        }
    }
}

#[test]
fn mpa_exact_on_disjoint_users() {
    // K = 2, L = 2, d_v = 1: each user alone on its RE
    let f = IndicatorMatrix::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cbs = random_codebooks(&[vec![0], vec![1]], 2, 4, &mut rng);
    let spec = ChannelSpec::rayleigh(0.5).unwrap();
    for _ in 0..50 {
        let b = transmit(&cbs, &[1, 3], &spec, 0.3, &mut rng);
        let ml = MlDetector::new(&cbs).unwrap().detect(&b, true).unwrap();
        let mpa = mpa_detect(&b, &cbs, &f, 1).unwrap();
        assert_marginals_equal(ml.posteriors.as_ref().unwrap(), mpa.posteriors.as_ref().unwrap());
    }
}

#[test]
fn mpa_exact_on_trees() {
    // a path RE0 - u1 - RE1 - u3 - RE2 with leaves u0 on RE0, u2 on RE1, u4 on RE2
    let supports = [vec![0], vec![0, 1], vec![1], vec![1, 2], vec![2]];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let spec = ChannelSpec::rayleigh(0.5).unwrap();
    for _ in 0..20 {
        let cbs = random_codebooks(&supports, 3, 4, &mut rng);
        let symbols: Vec<usize> = (0..5).map(|_| rng.random_range(0..4)).collect();
        let b = transmit(&cbs, &symbols, &spec, 0.5, &mut rng);
        let ml = MlDetector::new(&cbs).unwrap().detect(&b, true).unwrap();
        // the graph diameter is 4 edges, so 3 rounds reach every node
        let mpa = MpaDetector::new(&cbs, 3).unwrap().detect(&b).unwrap();
        assert_marginals_equal(ml.posteriors.as_ref().unwrap(), mpa.posteriors.as_ref().unwrap());
    }
}

#[test]
fn noiseless_blocks_are_recovered() {
    let cbs = designed();
    let ml = MlDetector::new(&cbs).unwrap();
    let mpa = MpaDetector::new(&cbs, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = ChannelSpec::rayleigh(0.5).unwrap();
    for _ in 0..200 {
        let symbols: Vec<usize> = (0..6).map(|_| rng.random_range(0..4)).collect();
        let b = transmit(&cbs, &symbols, &spec, 1e-12, &mut rng);
        assert_eq!(ml.detect(&b, false).unwrap().symbols, symbols);
        assert_eq!(ml.detect_pruned(&b).unwrap().symbols, symbols);
        assert_eq!(mpa.detect(&b).unwrap().symbols, symbols);
    }
}

#[test]
fn ml_enumerates_every_tuple() {
    let cbs = designed();
    let ml = MlDetector::new(&cbs).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let b = transmit(&cbs, &[0; 6], &ChannelSpec::rayleigh(0.5).unwrap(), 0.1, &mut rng);
    ml.detect(&b, false).unwrap();
    assert_eq!(ml.evaluations(), 4096);
    ml.detect(&b, true).unwrap();
    assert_eq!(ml.evaluations(), 8192);
    assert_eq!(ml_detect(&b, &cbs).unwrap().symbols, ml.detect(&b, false).unwrap().symbols);
}

#[test]
fn pruned_search_agrees_on_designed_codebooks() {
    let cbs = designed();
    let ml = MlDetector::new(&cbs).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = ChannelSpec::nakagami(1.5, 1.0).unwrap();
    for i in 0..2000 {
        let symbols: Vec<usize> = (0..6).map(|_| rng.random_range(0..4)).collect();
        let n0 = 1.0 / db_to_linear([0.0, 8.0, 16.0, 24.0][i % 4]);
        let b = transmit(&cbs, &symbols, &spec, n0, &mut rng);
        assert_eq!(ml.detect_pruned(&b).unwrap().symbols, ml.detect(&b, false).unwrap().symbols);
    }
}

#[test]
fn mpa_agrees_with_ml_at_high_snr() {
    let cbs = designed();
    let ml = MlDetector::new(&cbs).unwrap();
    let mpa = MpaDetector::new(&cbs, 8).unwrap();
    let spec = ChannelSpec::rayleigh(0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n0 = 1.0 / db_to_linear(20.0);
    let trials = 10_000;
    let mut agree = 0;
    for _ in 0..trials {
        let symbols: Vec<usize> = (0..6).map(|_| rng.random_range(0..4)).collect();
        let b = transmit(&cbs, &symbols, &spec, n0, &mut rng);
        if ml.detect_pruned(&b).unwrap().symbols == mpa.detect(&b).unwrap().symbols {
            agree += 1;
        }
    }
    assert!(agree as f64 >= 0.99 * trials as f64, "{agree} of {trials}");
}

#[test]
fn mpa_error_rate_close_to_ml() {
    let cbs = designed();
    let ml = MlDetector::new(&cbs).unwrap();
    let mpa = MpaDetector::new(&cbs, 8).unwrap();
    let spec = ChannelSpec::rayleigh(0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n0 = 1.0 / db_to_linear(12.0);
    let (mut e_ml, mut e_mpa) = (0u64, 0u64);
    for _ in 0..40_000 {
        let symbols: Vec<usize> = (0..6).map(|_| rng.random_range(0..4)).collect();
        let b = transmit(&cbs, &symbols, &spec, n0, &mut rng);
        let count = |d: Vec<usize>| d.iter().zip(&symbols).filter(|(a, b)| a != b).count() as u64;
        e_ml += count(ml.detect_pruned(&b).unwrap().symbols);
        e_mpa += count(mpa.detect(&b).unwrap().symbols);
    }
    // same blocks for both; allow three standard deviations of the error count
    let slack = 3.0 * (e_ml as f64).sqrt();
    assert!(e_ml as f64 <= e_mpa as f64 + slack, "ML {e_ml}, MPA {e_mpa}");
    assert!(e_mpa as f64 <= 1.1 * e_ml as f64 + slack, "ML {e_ml}, MPA {e_mpa}");
}

#[test]
fn malformed_inputs_are_rejected() {
    let cbs = designed();
    let f = IndicatorMatrix::four_by_six();
    let ch = FadingRealization { coefficients: vec![Complex64::new(1.0, 0.0); 3] };
    assert!(matches!(
        ReceivedBlock::new(vec![Complex64::new(0.0, 0.0); 4], ch.clone(), 1.0),
        Err(Error::Validation(_))
    ));
    assert!(ReceivedBlock::new(vec![Complex64::new(0.0, 0.0); 3], ch.clone(), 0.0).is_err());
    let short = ReceivedBlock::new(vec![Complex64::new(0.0, 0.0); 3], ch, 1.0).unwrap();
    assert!(ml_detect(&short, &cbs).is_err());
    assert!(MpaDetector::new(&cbs, 0).is_err());
    assert!(MpaDetector::with_damping(&cbs, 4, 1.0).is_err());

    let mut bad = cbs.clone();
    bad[0].codewords[1][0] = Complex64::new(0.1, 0.0);
    assert!(matches!(check_sparsity(&bad, &f), Err(Error::Invariant { name: "sparsity pattern", .. })));
    check_sparsity(&cbs, &f).unwrap();
}

#[test]
fn damping_keeps_decisions_at_high_snr() {
    let cbs = designed();
    let plain = MpaDetector::new(&cbs, 8).unwrap();
    let damped = MpaDetector::with_damping(&cbs, 12, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spec = ChannelSpec::rayleigh(0.5).unwrap();
    let n0 = 1.0 / db_to_linear(25.0);
    let mut same = 0;
    for _ in 0..500 {
        let symbols: Vec<usize> = (0..6).map(|_| rng.random_range(0..4)).collect();
        let b = transmit(&cbs, &symbols, &spec, n0, &mut rng);
        let d = damped.detect(&b).unwrap();
        for row in d.posteriors.as_ref().unwrap() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        if d.symbols == plain.detect(&b).unwrap().symbols {
            same += 1;
        }
    }
    assert!(same >= 490, "{same}");
}
