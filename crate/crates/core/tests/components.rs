mod common;

use common::dcbf_undercounts_stream;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use disturbsim::memctrl::RequestKind;
use disturbsim::sim::{parse_trace, write_trace, TraceRecord};
use disturbsim::sketch::CountingBloomFilter;
use disturbsim::verify::{naive_window_max, WindowOracle};

#[test]
fn trace_round_trip_million_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut t = 0u64;
    let recs: Vec<TraceRecord> = (0..1_000_000)
        .map(|_| {
            t += rng.gen_range(0..50_000);
            TraceRecord {
                arrival: t,
                thread: rng.gen_range(0..64),
                kind: if rng.gen_bool(0.3) { RequestKind::Write } else { RequestKind::Read },
                addr: rng.gen::<u64>() >> 20,
            }
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.trace");
    write_trace(&path, &recs).unwrap();
    let back: Vec<TraceRecord> = parse_trace(&path).unwrap().collect::<Result<_, _>>().unwrap();
    assert_eq!(back, recs);
}

#[test]
fn trace_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.trace");
    std::fs::write(&path, "# header\n10 0 R 0x40\n\n5 0 W 0x80\n").unwrap();
    let err = parse_trace(&path).unwrap().collect::<Result<Vec<_>, _>>().unwrap_err();
    assert!(err.to_string().contains(":4"), "{err}");
    std::fs::write(&path, "10 0 Q 0x40\n").unwrap();
    assert!(parse_trace(&path).unwrap().next().unwrap().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_oracle_matches_naive(
        gaps in prop::collection::vec((0u64..6, 0u64..400), 1..2_000),
        window in 1u64..2_000,
    ) {
        let mut t = 0;
        let acts: Vec<(u64, u64)> = gaps.iter().map(|&(row, dt)| { t += dt; (row, t) }).collect();
        let mut o = WindowOracle::new(window);
        for &(r, at) in &acts {
            o.push(r, at);
        }
        let naive = naive_window_max(&acts, window);
        for (row, m) in &naive {
            prop_assert_eq!(o.row_max(*row), *m);
        }
        prop_assert_eq!(o.max(), naive.values().copied().max().unwrap_or(0));
        prop_assert_eq!(o.total(), acts.len() as u64);
    }

    #[test]
    fn cbf_never_undercounts(keys in prop::collection::vec(0u64..5_000, 1..3_000), seed in any::<u64>()) {
        let mut f = CountingBloomFilter::new(1024, 12, seed);
        let mut exact: HashMap<u64, u32> = HashMap::new();
        for &k in &keys {
            f.insert(k);
            *exact.entry(k).or_default() += 1;
        }
        for (k, n) in exact {
            prop_assert!(f.test(k) >= n.min(f.counter_max()));
        }
    }
}

#[test]
fn window_oracle_ten_thousand_acts() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut t = 0;
    let acts: Vec<(u64, u64)> = (0..10_000)
        .map(|_| {
            t += rng.gen_range(0..100);
            (rng.gen_range(0..40), t)
        })
        .collect();
    let mut o = WindowOracle::new(5_000);
    for &(r, at) in &acts {
        o.push(r, at);
    }
    let naive = naive_window_max(&acts, 5_000);
    assert!(naive.iter().all(|(r, m)| o.row_max(*r) == *m));
}

#[test]
fn dcbf_no_false_negatives() {
    for seed in 0..50 {
        assert_eq!(dcbf_undercounts_stream(seed, 100_000), 0, "seed {seed}");
    }
}
