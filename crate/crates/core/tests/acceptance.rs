//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the summary is always
//! printed. Exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use awtc_polar::adversary::apply_write;
use awtc_polar::codec::ObservationSymbol;
use awtc_polar::experiments::write_rows;
use awtc_polar::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> bool {
    elapsed.as_secs_f64() < limit_secs
}

fn random_mask(len: usize, rng: &mut ChaCha8Rng) -> RealizationMask {
    let p: f64 = rng.random();
    RealizationMask::new((0..len).map(|_| rng.random_bool(p)).collect()).unwrap()
}

fn mean_conservation() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for rho in [0.1, 0.2, 0.4, 0.5, 0.8] {
        for n in 1..=12 {
            let profile = bec_profile(rho, n).unwrap();
            worst = worst.max((profile.mean() - rho).abs());
        }
    }
    let t = start.elapsed();
    outcome(worst < 1e-9 && within(t, 10.0), format!("max |mean - rho| = {worst:.2e}, {t:.2?}"))
}

fn count_conservation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    for n in 3..=14 {
        for _ in 0..1000 {
            let mask = random_mask(1 << n, &mut rng);
            let ones = realize_profile(&mask).iter().filter(|&&b| b).count();
            violations += usize::from(ones != mask.popcount());
        }
    }
    let t = start.elapsed();
    outcome(violations == 0 && within(t, 30.0), format!("{violations} violations in 12000 masks, {t:.2?}"))
}

fn bernoulli_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for rho in [0.25f64, 0.5, 0.75] {
        let mut expected = [0.0f64; 8];
        for m in 0u32..256 {
            let bits: Vec<bool> = (0..8).map(|i| m >> i & 1 == 1).collect();
            let ones = m.count_ones() as i32;
            let weight = rho.powi(ones) * (1.0 - rho).powi(8 - ones);
            for (e, z) in expected.iter_mut().zip(realize_profile(&RealizationMask::new(bits).unwrap())) {
                if z {
                    *e += weight;
                }
            }
        }
        let profile = bec_profile(rho, 3).unwrap().linear();
        for (e, p) in expected.iter().zip(&profile) {
            worst = worst.max((e - p).abs());
        }
    }
    let t = start.elapsed();
    outcome(worst < 1e-12 && within(t, 1.0), format!("max deviation {worst:.2e}, {t:.2?}"))
}

fn clean(x: &[bool]) -> Vec<ObservationSymbol> {
    x.iter().map(|&b| ObservationSymbol::from_bit(b)).collect()
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let mut failures = 0;
    let mut exhaustive = 0;
    for n in 0..=4u32 {
        let len = 1usize << n;
        let p = IndexPartition::from_classes(vec![IndexClass::Info; len]).unwrap();
        let none = ChainState::preshared(vec![]);
        for m in 0u32..(1 << len) {
            let u: Vec<bool> = (0..len).map(|i| m >> i & 1 == 1).collect();
            let x = polar_transform(&u).unwrap();
            let dec = sc_decode_block(&clean(&x), &p, &none).unwrap();
            failures += usize::from(dec.u.bits != u || dec.erased_decisions != 0);
            exhaustive += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut sessions = 0;
    while sessions < 100 {
        let config = CodeConfig::new(
            rng.random_range(4..=10),
            rng.random_range(0.2..0.4),
            rng.random_range(0.0..0.3),
            rng.random_range(0.0..0.4),
            3,
        )
        .unwrap();
        let Ok(p) = build_partition(&config) else { continue };
        let pre = ChainState::random(p.chain_sink().len(), &mut rng);
        let msgs: Vec<MessageBlock> = (0..3).map(|_| MessageBlock::random(p.info().len(), &mut rng)).collect();
        let enc = encode_session(&msgs, &p, &pre, &mut rng).unwrap();
        let ys: Vec<_> = enc.iter().map(|b| clean(&b.codeword)).collect();
        let dec = decode_session(&ys, &p, &pre).unwrap();
        failures += usize::from(dec.messages != msgs);
        sessions += 1;
    }
    let t = start.elapsed();
    outcome(
        failures == 0 && within(t, 30.0),
        format!("{failures} failures over {exhaustive} exhaustive words and {sessions} sessions, {t:.2?}"),
    )
}

fn decoder_polarization_coincidence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    let mut mismatches = 0;
    while checked < 200 {
        let config = CodeConfig::new(
            rng.random_range(1..=10),
            rng.random_range(0.15..0.45),
            rng.random_range(0.0..0.5),
            rng.random_range(0.0..0.45),
            1,
        )
        .unwrap();
        let Ok(p) = build_partition(&config) else { continue };
        let len = p.block_len();
        let mask = random_mask(len, &mut rng);
        let z = realize_profile(&mask);
        let expected: Vec<usize> = (0..len)
            .filter(|&i| z[i] && p.class_of(i).is_channel_decision())
            .collect();
        let pre = ChainState::random(p.chain_sink().len(), &mut rng);
        let enc = encode_block(&MessageBlock::random(p.info().len(), &mut rng), &p, &pre, &mut rng).unwrap();
        let write_set: Vec<usize> = (0..len).filter(|&i| mask.bits()[i]).collect();
        let dec = sc_decode_block(&apply_write(&enc.codeword, &write_set), &p, &pre).unwrap();
        mismatches += usize::from(dec.guessed != expected);
        checked += 1;
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches in {checked} (config, mask) pairs"))
}

fn secrecy_rate_trend() -> Outcome {
    let start = Instant::now();
    let mut rates = Vec::new();
    for n in [10, 12, 14, 16] {
        let config = CodeConfig::new(n, 0.2, 0.2, 0.4, 1).unwrap();
        match build_partition(&config) {
            Ok(p) => rates.push(rate_report(&p, &config).secrecy_rate),
            Err(e) => return outcome(false, format!("n = {n}: {e}")),
        }
    }
    let t = start.elapsed();
    let increasing = rates.windows(2).all(|w| w[1] > w[0]);
    let below = rates.iter().all(|&r| r < 0.4);
    let pass = increasing && below && rates[3] > 0.2 && within(t, 120.0);
    let shown: Vec<String> = rates.iter().map(|r| format!("{r:.4}")).collect();
    outcome(pass, format!("R_s over n = 10,12,14,16: [{}], {t:.2?}", shown.join(", ")))
}

/// Non-increasing along the sequence, allowing a single rise that stays
/// within two standard errors of the difference.
fn non_increasing(points: &[Summary]) -> bool {
    let mut rises = 0;
    for w in points.windows(2) {
        let diff = w[1].mean - w[0].mean;
        if diff > 0.0 {
            rises += 1;
            let se = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            if rises > 1 || diff > 2.0 * se {
                return false;
            }
        }
    }
    true
}

fn bound_trends() -> Outcome {
    let start = Instant::now();
    let betas = [0.20, 0.26, 0.32];
    let spec = SweepSpec {
        grid: SweepGrid {
            stages: vec![8, 10, 12, 14],
            betas: betas.to_vec(),
            rho_w: 0.2,
            rho_r: 0.4,
            blocks: 300,
            strategy: Strategy::Uniform,
        },
        kind: TrialKind::Bounds,
        trials: 200,
        base_seed: 7,
        parallelism: 8,
    };
    let sweep = match run_sweep(&spec) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let t = start.elapsed();
    let mut pass = within(t, 300.0);
    let mut lines = Vec::new();
    for (b, beta) in betas.iter().enumerate() {
        for metric in ["ber_bound", "leak_bound"] {
            let points: Option<Vec<Summary>> = (0..4)
                .map(|k| sweep.cells[k * betas.len() + b].summary(TrialKind::Bounds, metric))
                .collect();
            let Some(points) = points else {
                pass = false;
                lines.push(format!("beta {beta} {metric}: infeasible cell"));
                continue;
            };
            let ok = non_increasing(&points);
            pass &= ok;
            let shown: Vec<String> = points.iter().map(|s| format!("{:.1}±{:.1}", s.mean, s.stderr)).collect();
            lines.push(format!(
                "beta {beta:.2} {metric}: [{}] {}",
                shown.join(", "),
                if ok { "ok" } else { "NOT monotone" }
            ));
        }
    }
    outcome(pass, format!("{t:.2?}\n      {}", lines.join("\n      ")))
}

fn end_to_end_ber() -> Outcome {
    let start = Instant::now();
    let spec = SweepSpec {
        grid: SweepGrid {
            stages: vec![8, 9, 10, 11, 12],
            betas: vec![0.26],
            rho_w: 0.2,
            rho_r: 0.4,
            blocks: 50,
            strategy: Strategy::Uniform,
        },
        kind: TrialKind::Simulate,
        trials: 20,
        base_seed: 8,
        parallelism: 8,
    };
    let sweep = match run_sweep(&spec) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let t = start.elapsed();
    let bob: Vec<Option<f64>> = sweep
        .cells
        .iter()
        .map(|c| c.summary(TrialKind::Simulate, "bob_ber").map(|s| s.mean))
        .collect();
    let eve: Vec<Option<f64>> = sweep
        .cells
        .iter()
        .map(|c| c.summary(TrialKind::Simulate, "eve_ber").map(|s| s.mean))
        .collect();
    let bob_drop = match (bob[0], bob[4]) {
        (Some(first), Some(last)) => last * 10.0 <= first && first > 0.0,
        _ => false,
    };
    let eve_ok = eve.iter().all(|e| e.is_some_and(|e| (0.45..=0.55).contains(&e)));
    let fmt = |v: &[Option<f64>]| {
        v.iter()
            .map(|x| x.map_or("n/a".to_string(), |x| format!("{x:.4}")))
            .collect::<Vec<_>>()
            .join(", ")
    };
    outcome(
        bob_drop && eve_ok && within(t, 600.0),
        format!("Bob BER over n = 8..12: [{}]; Eve BER: [{}], {t:.2?}", fmt(&bob), fmt(&eve)),
    )
}

fn trial_csv(spec: &SweepSpec) -> Vec<u8> {
    let mut out = Vec::new();
    write_rows(&run_sweep(spec).unwrap().trial_rows(), &mut out).unwrap();
    out
}

fn determinism() -> Outcome {
    let mut spec = SweepSpec {
        grid: SweepGrid {
            stages: vec![6, 8, 10],
            betas: vec![0.22, 0.3],
            rho_w: 0.2,
            rho_r: 0.4,
            blocks: 10,
            strategy: Strategy::Uniform,
        },
        kind: TrialKind::Simulate,
        trials: 12,
        base_seed: 9,
        parallelism: 1,
    };
    let mut identical = true;
    for kind in [TrialKind::Simulate, TrialKind::Bounds] {
        spec.kind = kind;
        spec.parallelism = 1;
        let serial = trial_csv(&spec);
        spec.parallelism = 8;
        let parallel = trial_csv(&spec);
        identical &= serial == parallel && !serial.is_empty();
    }
    outcome(identical, "simulate and bounds sweeps, parallelism 1 vs 8")
}

fn performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let len = 1 << 16;
    let classes: Vec<IndexClass> = (0..len)
        .map(|_| if rng.random_bool(0.5) { IndexClass::Info } else { IndexClass::Frozen })
        .collect();
    let p = IndexPartition::from_classes(classes).unwrap();
    let u: Vec<bool> = (0..len).map(|i| p.class_of(i) == IndexClass::Info && rng.random()).collect();
    let x = polar_transform(&u).unwrap();
    let write_set: Vec<usize> = (0..len).filter(|_| rng.random_bool(0.2)).collect();
    let y = apply_write(&x, &write_set);
    let none = ChainState::preshared(vec![]);

    let start = Instant::now();
    let decode = sc_decode_block(&y, &p, &none);
    let t_decode = start.elapsed();
    let start = Instant::now();
    let profile = bec_profile(0.3, 18);
    let t_profile = start.elapsed();
    outcome(
        decode.is_ok() && profile.is_ok() && within(t_decode, 1.0) && within(t_profile, 1.0),
        format!("SC decode N = 2^16 in {t_decode:.2?}; profile n = 18 in {t_profile:.2?}"),
    )
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("mean conservation", mean_conservation),
        ("count conservation", count_conservation),
        ("Bernoulli oracle", bernoulli_oracle),
        ("round trip", round_trip),
        ("decoder-polarization coincidence", decoder_polarization_coincidence),
        ("secrecy-rate trend", secrecy_rate_trend),
        ("bound trends", bound_trends),
        ("end-to-end BER", end_to_end_ber),
        ("determinism", determinism),
        ("performance sanity", performance),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        println!(
            "criterion {:>2} {}: {} ({})",
            k + 1,
            if result.pass { "PASS" } else { "FAIL" },
            name,
            result.detail
        );
        if !result.pass {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
