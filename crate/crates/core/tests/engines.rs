use bibieq::bbcode::BBCodeSpec;
use bibieq::circuit::{build_memory_circuit, validate_circuit, Basis, Instruction, Noise};
use bibieq::compiler::{compile, sample_erasure_pattern, EcSchedule, NoiseLaw};
use bibieq::engines::{
    approx_rate, bernoulli_chain, convert, cumulative, exact_rate, posteriors, realize_segment, ChannelTarget,
    Engine,
};
use bibieq::seeds;
use proptest::prelude::*;

fn compiled(spec: &BBCodeSpec, rounds: usize, e: f64, schedule: &str) -> bibieq::compiler::ErasureCircuit {
    let c0 = build_memory_circuit(spec, rounds, Basis::X).unwrap();
    compile(&c0, &NoiseLaw::new(e).unwrap(), &EcSchedule::parse(schedule).unwrap()).unwrap()
}

#[test]
fn converted_circuits_are_pauli_only_and_valid() {
    let ce = compiled(&BBCodeSpec::bb72(), 2, 0.02, "2ec");
    let log = sample_erasure_pattern(&ce, 3);
    assert!(log.n_flagged() > 0);
    for engine in [Engine::Exact, Engine::ExactLiteral, Engine::Approx] {
        let (c, report) = convert(&ce, &log, engine, 9).unwrap();
        assert!(validate_circuit(&c).is_empty(), "{engine}");
        assert!(c.instructions.iter().all(|i| !i.is_erasure_annotation()));
        assert_eq!(c.n_detectors, ce.circuit.n_detectors);
        assert_eq!(c.n_observables, ce.circuit.n_observables);
        assert_eq!(c.n_flags, 0);
        assert_eq!(report.segments_processed, ce.checked_segments().count());
        let unconditional = |c: &bibieq::circuit::Circuit| c.count(|i| matches!(i, Instruction::Reset { .. }));
        assert_eq!(unconditional(&c), unconditional(&ce.circuit));
    }
}

#[test]
fn zero_rate_conversion_inserts_nothing() {
    let ce = compiled(&BBCodeSpec::bb72(), 2, 0.0, "4ec");
    let log = sample_erasure_pattern(&ce, 1);
    for engine in [Engine::Exact, Engine::Approx] {
        let (c, report) = convert(&ce, &log, engine, 2).unwrap();
        assert_eq!(report.channels_inserted, 0);
        let noisy = c.count(|i| match i {
            Instruction::Channel1 { noise, .. } | Instruction::Channel2 { noise, .. } => !noise.is_silent(),
            Instruction::MeasFlip { p, .. } => *p > 0.0,
            _ => false,
        });
        assert_eq!(noisy, 0);
    }
}

#[test]
fn conversion_is_reproducible_from_its_seed() {
    let ce = compiled(&BBCodeSpec::bb72(), 1, 0.01, "2ec");
    let log = sample_erasure_pattern(&ce, 77);
    assert_eq!(log, sample_erasure_pattern(&ce, 77));
    let (a, ra) = convert(&ce, &log, Engine::Exact, 5).unwrap();
    let (b, rb) = convert(&ce, &log, Engine::Exact, 5).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    assert_eq!(ra.to_json().unwrap(), rb.to_json().unwrap());
}

#[test]
fn report_rates_follow_the_engine_formulas() {
    let ce = compiled(&BBCodeSpec::bb72(), 2, 0.01, "2ec");
    let e = ce.noise.e;
    let q = ce.noise.q();
    let log = sample_erasure_pattern(&ce, 4);
    let (_, approx) = convert(&ce, &log, Engine::Approx, 0).unwrap();
    for seg in &approx.segments {
        let cum = cumulative(&posteriors(seg.d_s, e, q, seg.r).unwrap());
        assert_eq!(seg.channels.len(), seg.r + 1);
        for ch in &seg.channels {
            assert_eq!(ch.rate, approx_rate(cum[ch.site - 1]));
            assert_eq!(ch.qubits.len(), 1);
        }
    }
    let (_, literal) = convert(&ce, &log, Engine::ExactLiteral, 0).unwrap();
    for seg in &literal.segments {
        let chain = bernoulli_chain(&posteriors(seg.d_s, e, q, seg.r).unwrap()).unwrap();
        let k = seg.k.unwrap();
        assert!(k >= 1 && k <= seg.r + 2);
        for ch in &seg.channels {
            assert!(ch.site >= k);
            assert_eq!(ch.rate, exact_rate(chain.b[ch.site - 1], seg.r + 2 - ch.site));
            assert_eq!(ch.qubits.len(), if ch.site <= seg.r { 2 } else { 1 });
        }
    }
}

/// Site-level randomization probability, summed over every checked site of a
/// full code: Exact randomizes sites `k..=r+1`, Approx carries the cumulative
/// posterior; over many conversions the totals agree.
#[test]
fn exact_and_approx_agree_on_summed_site_marginals() {
    let ce = compiled(&BBCodeSpec::bb72(), 1, 0.02, "4ec");
    let e = ce.noise.e;
    let q = ce.noise.q();
    let (mut hits, mut expect, mut var) = (0.0, 0.0, 0.0);
    for s in 0..100u64 {
        let log = sample_erasure_pattern(&ce, 1000 + s);
        let (_, exact) = convert(&ce, &log, Engine::Exact, 2000 + s).unwrap();
        for seg in &exact.segments {
            let cum = cumulative(&posteriors(seg.d_s, e, q, seg.r).unwrap());
            let k = seg.k.unwrap();
            for (j, &abar) in cum.iter().enumerate() {
                if j + 1 >= k {
                    hits += 1.0;
                }
                expect += abar;
                var += abar * (1.0 - abar);
            }
        }
    }
    assert!(expect > 50.0);
    assert!((hits - expect).abs() <= 4.0 * var.sqrt(), "hits {hits} expected {expect} sd {}", var.sqrt());
}

#[test]
fn flagged_segments_with_perfect_checks_always_fire() {
    let pv = posteriors(true, 0.01, 0.0, 4).unwrap();
    let mut rng = seeds::rng(8);
    for _ in 0..1000 {
        let (k, channels) = realize_segment(Engine::Exact, &pv, &mut rng).unwrap();
        let k = k.unwrap();
        assert!(k <= 5);
        assert_eq!(channels.len(), 6 - k);
        assert!(channels.iter().all(|c| c.rate == 0.5));
        assert_eq!(channels.last().unwrap().target, ChannelTarget::Own);
    }
}

#[test]
fn full_rate_pair_channel_is_uniform() {
    // Fifteen mechanisms at 1/2 give every two-qubit Pauli frame with probability 1/16.
    let mut counts = [0usize; 16];
    let mut rng = seeds::rng(12);
    use rand::Rng;
    let terms = Noise::Uniform(exact_rate(1.0, 3)).mechanisms(2);
    for _ in 0..160_000 {
        let (mut x, mut z) = (0u8, 0u8);
        for (t, p) in &terms {
            if rng.gen_bool(*p) {
                x ^= t.x;
                z ^= t.z;
            }
        }
        counts[(x | (z << 2)) as usize] += 1;
    }
    for c in counts {
        assert!((c as f64 - 10_000.0).abs() < 4.0 * (10_000.0f64 * 15.0 / 16.0).sqrt(), "{c}");
    }
}

proptest! {
    #[test]
    fn posteriors_normalize(d_s in any::<bool>(), e in 1e-6f64..0.3, q in 1e-6f64..0.3, r in 0usize..6) {
        let pv = posteriors(d_s, e, q, r).unwrap();
        let total: f64 = pv.a.iter().sum::<f64>() + pv.residual;
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(pv.a.iter().all(|&a| (0.0..=1.0).contains(&a)));
        let cum = cumulative(&pv);
        prop_assert!(cum.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn chain_law_reproduces_posteriors(d_s in any::<bool>(), e in 1e-6f64..0.3, q in 0.0f64..0.3, r in 0usize..6) {
        let pv = posteriors(d_s, e, q, r).unwrap();
        let chain = bernoulli_chain(&pv).unwrap();
        prop_assert!(chain.b.iter().all(|&b| (0.0..=1.0).contains(&b)));
        let (law, rest) = chain.first_hit_law();
        for (x, y) in law.iter().zip(&pv.a) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((rest - pv.residual).abs() < 1e-12);
    }

    #[test]
    fn approx_rate_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(approx_rate(lo) <= approx_rate(hi));
        prop_assert!(approx_rate(hi) <= 0.5);
    }
}
