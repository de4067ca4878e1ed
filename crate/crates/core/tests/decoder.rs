use bibieq::decoder::{decode, decode_batch, Decoder, DecoderConfig};
use bibieq::gf2::BitMatrix;
use bibieq::seeds;
use bibieq::sim::{DemMechanism, DetectorErrorModel, ShotBatch};
use proptest::prelude::*;
use rand::Rng;

fn mech(p: f64, detectors: &[usize], observables: &[usize]) -> DemMechanism {
    DemMechanism { p, detectors: detectors.to_vec(), observables: observables.to_vec() }
}

fn syndrome_of(dem: &DetectorErrorModel, solution: &[usize]) -> Vec<bool> {
    let mut s = vec![false; dem.n_detectors];
    for &v in solution {
        for &d in &dem.mechanisms[v].detectors {
            s[d] ^= true;
        }
    }
    s
}

fn random_dem(rng: &mut impl Rng, n_mech: usize, n_det: usize, p: Option<f64>) -> DetectorErrorModel {
    let mechanisms = (0..n_mech)
        .map(|_| {
            let mut dets: Vec<usize> = (0..n_det).filter(|_| rng.gen_bool(0.3)).collect();
            if dets.is_empty() {
                dets.push(rng.gen_range(0..n_det));
            }
            let obs = if rng.gen_bool(0.5) { vec![0] } else { vec![] };
            mech(p.unwrap_or_else(|| rng.gen_range(0.01..0.3)), &dets, &obs)
        })
        .collect();
    DetectorErrorModel { n_detectors: n_det, n_observables: 1, mechanisms }
}

/// Brute-force posterior marginals by enumerating all `2^n` error patterns.
fn brute_marginals(dem: &DetectorErrorModel, syndrome: &[bool]) -> Vec<f64> {
    let n = dem.mechanisms.len();
    let mut z = 0.0;
    let mut m = vec![0.0; n];
    for mask in 0u32..(1 << n) {
        let chosen: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        if syndrome_of(dem, &chosen) != syndrome {
            continue;
        }
        let w: f64 = (0..n)
            .map(|v| if mask >> v & 1 == 1 { dem.mechanisms[v].p } else { 1.0 - dem.mechanisms[v].p })
            .product();
        z += w;
        for &v in &chosen {
            m[v] += w;
        }
    }
    m.iter().map(|x| x / z).collect()
}

/// Acyclic Tanner graph: a path of mechanisms joined by detectors, with leaf
/// mechanisms hanging off some detectors.
fn tree_dem(rng: &mut impl Rng) -> DetectorErrorModel {
    let spine = rng.gen_range(3..7);
    let n_det = spine - 1;
    let mut mechanisms = Vec::new();
    for i in 0..spine {
        let mut d = vec![];
        if i > 0 {
            d.push(i - 1);
        }
        if i < n_det {
            d.push(i);
        }
        mechanisms.push(mech(rng.gen_range(0.02..0.4), &d, &[]));
    }
    while mechanisms.len() < 11 {
        mechanisms.push(mech(rng.gen_range(0.02..0.4), &[rng.gen_range(0..n_det)], &[]));
    }
    DetectorErrorModel { n_detectors: n_det, n_observables: 0, mechanisms }
}

#[test]
fn bp_is_exact_on_trees() {
    let mut rng = seeds::rng(31);
    for _ in 0..40 {
        let dem = tree_dem(&mut rng);
        let dec = Decoder::new(&dem, DecoderConfig::default()).unwrap();
        let truth: Vec<usize> = (0..dem.mechanisms.len()).filter(|_| rng.gen_bool(0.3)).collect();
        let syn = syndrome_of(&dem, &truth);
        let bp = dec.bp_marginals(&syn, 30);
        let exact = brute_marginals(&dem, &syn);
        for (a, b) in bp.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-9, "bp {a} exact {b}");
        }
    }
}

#[test]
fn osd_order_never_raises_soft_weight() {
    let mut rng = seeds::rng(5);
    for _ in 0..200 {
        let dem = random_dem(&mut rng, 14, 8, None);
        let dec = Decoder::new(&dem, DecoderConfig::default()).unwrap();
        let truth: Vec<usize> = (0..14).filter(|_| rng.gen_bool(0.25)).collect();
        let syn = syndrome_of(&dem, &truth);
        let probs = dec.bp_marginals(&syn, 5);
        let mut last = f64::INFINITY;
        for order in [0, 1, 2, 4, 8] {
            let sol = dec.osd(&syn, &probs, order).unwrap();
            assert_eq!(syndrome_of(&dem, &sol), syn);
            let w = dec.soft_weight(&sol);
            assert!(w <= last + 1e-12, "order {order}: {w} > {last}");
            last = w;
        }
    }
}

#[test]
fn decoding_is_deterministic() {
    let mut rng = seeds::rng(9);
    let dem = random_dem(&mut rng, 40, 16, None);
    let cfg = DecoderConfig { bp_max_iters: 10, osd_order: 3 };
    for _ in 0..50 {
        let truth: Vec<usize> = (0..40).filter(|_| rng.gen_bool(0.1)).collect();
        let syn = syndrome_of(&dem, &truth);
        assert_eq!(decode(&dem, &syn, &cfg).unwrap(), decode(&dem, &syn, &cfg).unwrap());
    }
}

#[test]
fn batch_counts_errors_and_discards() {
    let dem = DetectorErrorModel {
        n_detectors: 3,
        n_observables: 2,
        mechanisms: vec![mech(0.1, &[0], &[0]), mech(0.1, &[0, 1], &[1])],
    };
    let mut batch = ShotBatch::zeros(4, 3, 2, 0);
    // Shot 1: mechanism 0 fired and the observable records it.
    batch.detectors.set(1, 0, true);
    batch.observables.set(1, 0, true);
    // Shot 2: same syndrome, but the observable disagrees with the decoder.
    batch.detectors.set(2, 0, true);
    // Shot 3: detector 2 is touched by no mechanism.
    batch.detectors.set(3, 2, true);
    let out = decode_batch(&dem, &batch, &DecoderConfig::default()).unwrap();
    assert_eq!(out.shots, 4);
    assert_eq!(out.discards, 1);
    assert_eq!(out.errors, 1);
    assert_eq!(out.per_observable, vec![1, 0]);
}

#[test]
fn noiseless_batch_is_clean() {
    let mut rng = seeds::rng(2);
    let dem = random_dem(&mut rng, 30, 12, None);
    let batch = ShotBatch { seed: 0, detectors: BitMatrix::zeros(100, 12), observables: BitMatrix::zeros(100, 1) };
    let out = decode_batch(&dem, &batch, &DecoderConfig::default()).unwrap();
    assert_eq!((out.errors, out.discards), (0, 0));
}

/// With tiny priors nearly every shot has at most one fired mechanism, which
/// the decoder resolves unless another single mechanism shares its syndrome
/// with different observables; the failure rate is bounded by the total mass
/// of such ambiguous mechanisms plus the two-fault probability.
#[test]
fn tiny_noise_stays_under_union_bound() {
    let p = 1e-3;
    let dem = DetectorErrorModel {
        n_detectors: 6,
        n_observables: 1,
        mechanisms: vec![
            mech(p, &[0, 1], &[]),
            mech(p, &[1, 2], &[0]),
            mech(p, &[2, 3], &[]),
            mech(p, &[3, 4], &[]),
            mech(p, &[4, 5], &[0]),
            mech(p, &[5], &[]),
            mech(p, &[0], &[0]),
        ],
    };
    let n = 200_000;
    let batch = dem.sample(n, 17);
    let out = decode_batch(&dem, &batch, &DecoderConfig::default()).unwrap();
    let m = dem.mechanisms.len() as f64;
    let two_faults = m * (m - 1.0) / 2.0 * p * p;
    let bound = two_faults * n as f64;
    assert_eq!(out.discards, 0);
    assert!((out.errors as f64) <= bound + 4.0 * bound.sqrt() + 1.0, "{} errors, bound {bound}", out.errors);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn every_kept_decode_satisfies_its_syndrome(seed in any::<u64>(), iters in 1usize..20, order in 0usize..4) {
        let mut rng = seeds::rng(seed);
        let dem = random_dem(&mut rng, 30, 12, None);
        let dec = Decoder::new(&dem, DecoderConfig { bp_max_iters: iters, osd_order: order }).unwrap();
        for _ in 0..10 {
            let syn: Vec<bool> = (0..12).map(|_| rng.gen_bool(0.3)).collect();
            let r = dec.decode(&syn).unwrap();
            if !r.discard {
                prop_assert_eq!(syndrome_of(&dem, &r.solution), syn);
                let mut obs = vec![false; 1];
                for &v in &r.solution {
                    for &o in &dem.mechanisms[v].observables {
                        obs[o] ^= true;
                    }
                }
                prop_assert_eq!(obs, r.predicted_observables);
            }
        }
    }
}
