use awtc_polar::adversary::apply_write;
use awtc_polar::codec::{parse_observations, ObservationSymbol};
use awtc_polar::*;
use proptest::prelude::*;
use proptest::strategy::Strategy as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn partition(s: &str) -> IndexPartition {
    let class = |c| match c {
        'I' => IndexClass::Info,
        'E' => IndexClass::ChainSource,
        'R' => IndexClass::Random,
        'F' => IndexClass::Frozen,
        'B' => IndexClass::ChainSink,
        _ => unreachable!(),
    };
    IndexPartition::from_classes(s.chars().map(class).collect()).unwrap()
}

fn clean(x: &[bool]) -> Vec<ObservationSymbol> {
    x.iter().map(|&b| ObservationSymbol::from_bit(b)).collect()
}

#[test]
fn encoder_carries_chain_source_into_next_sink() {
    let p = build_partition(&CodeConfig::new(12, 0.32, 0.2, 0.4, 4).unwrap()).unwrap();
    assert!(!p.chain_source().is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pre = ChainState::random(p.chain_sink().len(), &mut rng);
    let msgs: Vec<_> = (0..4).map(|_| MessageBlock::random(p.info().len(), &mut rng)).collect();
    let blocks = encode_session(&msgs, &p, &pre, &mut rng).unwrap();
    assert_eq!(blocks[0].u.gather(p.chain_sink()), pre.bits());
    for w in blocks.windows(2) {
        assert_eq!(w[1].u.gather(p.chain_sink()), w[0].u.gather(p.chain_source()));
    }
}

/// Finds a write set whose realization erases exactly one decision, and
/// that decision is the chain source.
fn single_chain_erasure(p: &IndexPartition, source: usize) -> Vec<usize> {
    let len = p.block_len();
    for m in 1u32..1 << len {
        let set: Vec<usize> = (0..len).filter(|&j| m >> j & 1 == 1).collect();
        let z = realize_profile(&RealizationMask::from_indices(len, &set).unwrap());
        let erased: Vec<usize> = (0..len).filter(|&i| z[i] && p.class_of(i).is_channel_decision()).collect();
        if erased == [source] {
            return set;
        }
    }
    panic!("no write pattern isolates the chain source");
}

#[test]
fn wrong_chain_guess_reaches_the_next_block() {
    // E on the least reliable index, so a single write erases it alone.
    let p = partition("EFFIFRBIFFIRFIII");
    let source = p.chain_source()[0];
    let sink = p.chain_sink()[0];
    let write_set = single_chain_erasure(&p, source);

    let pre = ChainState::preshared(vec![false]);
    let msgs = vec![MessageBlock::new(vec![true, false, true, true, false, true]); 2];
    // find an encoder draw with u_E = 1 so that resolving to 0 is wrong
    let blocks = (0..)
        .map(|seed| encode_session(&msgs, &p, &pre, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap())
        .find(|b| b[0].u.bits[source])
        .unwrap();
    assert!(blocks[1].u.bits[sink]);

    let ys = vec![apply_write(&blocks[0].codeword, &write_set), clean(&blocks[1].codeword)];
    let dec = decode_session(&ys, &p, &pre).unwrap();
    assert_eq!(dec.erasure_counts, vec![1, 0]);
    assert_eq!(dec.blocks[0].guessed, vec![source]);
    assert!(!dec.blocks[0].u.bits[source]);
    assert!(!dec.blocks[0].next_chain.is_exact());
    assert_eq!(dec.blocks[1].u.bits[sink], dec.blocks[0].u.bits[source]);
    assert_ne!(dec.blocks[1].u.bits[sink], blocks[1].u.bits[sink]);
    assert_eq!(dec.messages[0], msgs[0]);
}

#[test]
fn eve_without_preshared_bits_still_decodes_a_clean_block() {
    let p = partition("FBRIEIRIFFIBRREI");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pre = ChainState::random(p.chain_sink().len(), &mut rng);
    let msgs: Vec<_> = (0..3).map(|_| MessageBlock::random(p.info().len(), &mut rng)).collect();
    let blocks = encode_session(&msgs, &p, &pre, &mut rng).unwrap();
    let ys: Vec<_> = blocks.iter().map(|b| clean(&b.codeword)).collect();
    let mut coins = CoinFlip(ChaCha8Rng::seed_from_u64(1));
    let dec = decode_session_with(&ys, &p, None, &mut coins).unwrap();
    assert_eq!(dec.messages, msgs);
}

#[test]
fn hand_traced_single_erasure() {
    let p = partition("FFFI");
    let y = parse_observations("?000").unwrap();
    let dec = sc_decode_block(&y, &p, &ChainState::preshared(vec![])).unwrap();
    assert_eq!(dec.u.bits, vec![false; 4]);
    assert_eq!(dec.erased_decisions, 0);
}

fn config_strategy() -> impl proptest::strategy::Strategy<Value = (CodeConfig, u64)> {
    (3u32..=9, 0.18f64..0.4, 0.0f64..0.35, 0.0f64..0.4, 1usize..4, any::<u64>())
        .prop_map(|(n, beta, w, r, t, seed)| (CodeConfig::new(n, beta, w, r, t).unwrap(), seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sessions_round_trip_without_writes((config, seed) in config_strategy()) {
        let Ok(p) = build_partition(&config) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pre = ChainState::random(p.chain_sink().len(), &mut rng);
        let msgs: Vec<_> = (0..config.blocks).map(|_| MessageBlock::random(p.info().len(), &mut rng)).collect();
        let blocks = encode_session(&msgs, &p, &pre, &mut rng).unwrap();
        let ys: Vec<_> = blocks.iter().map(|b| clean(&b.codeword)).collect();
        let dec = decode_session(&ys, &p, &pre).unwrap();
        prop_assert_eq!(dec.messages, msgs);
        prop_assert!(dec.erasure_counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn extra_erasures_never_reduce_forced_decisions(
        (config, seed) in config_strategy(),
        first in proptest::collection::vec(any::<bool>(), 512),
        extra in proptest::collection::vec(any::<bool>(), 512),
    ) {
        let Ok(p) = build_partition(&config) else { return Ok(()) };
        let len = p.block_len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pre = ChainState::random(p.chain_sink().len(), &mut rng);
        let block = encode_block(&MessageBlock::random(p.info().len(), &mut rng), &p, &pre, &mut rng).unwrap();
        let small: Vec<usize> = (0..len).filter(|&j| first[j]).collect();
        let large: Vec<usize> = (0..len).filter(|&j| first[j] || extra[j]).collect();
        let a = sc_decode_block(&apply_write(&block.codeword, &small), &p, &pre).unwrap();
        let b = sc_decode_block(&apply_write(&block.codeword, &large), &p, &pre).unwrap();
        prop_assert!(b.erased_decisions >= a.erased_decisions);
        prop_assert!(a.guessed.iter().all(|i| b.guessed.contains(i)));
    }
}
